#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ws3r/geometry.hpp"
#include "ws3r/ik.hpp"
#include "ws3r/singularity.hpp"
#include "ws3r/topology.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace ws3r;

namespace {

ManipulatorGeometry fig_geom() { return make_geometry(1, 3, 2, 0, 4); }

std::vector<int> positive_counts(const WorkspaceTopology& t) {
    std::vector<int> out;
    for (const auto& r : t.regions)
        if (r.ik_count > 0) out.push_back(r.ik_count);
    std::sort(out.begin(), out.end());
    return out;
}

// structural sanity shared by every signature we compute
void check_region_invariants(const ManipulatorGeometry& g, const WorkspaceTopology& t) {
    for (std::size_t i = 0; i < t.regions.size(); ++i) {
        const Region& r = t.regions[i];
        CHECK(r.id == static_cast<int>(i));
        CHECK(r.ik_count >= 0);
        CHECK(r.ik_count <= 4);
        CHECK(r.ik_count % 2 == 0);
        CHECK(r.area_estimate > 0);
        REQUIRE(r.sample_points.size() >= 5);
        for (const auto& s : r.sample_points) CHECK(count_ik(g, s.rho, s.z) == r.ik_count);
    }
    CHECK(t.n_cusps >= 0);
    CHECK(t.n_voids >= 0);
    CHECK(t.binary == (t.max_ik == 2));
    for (const auto& a : t.adjacencies) {
        REQUIRE(a.region_a >= 0);
        REQUIRE(a.region_b > a.region_a);
        REQUIRE(a.region_b < static_cast<int>(t.regions.size()));
    }
}

} // namespace

TEST_CASE("reference geometry: two 2-solution and two 4-solution regions, no voids") {
    auto g = fig_geom();
    auto t = topology_signature(g);
    check_region_invariants(g, t);

    CHECK(t.n_cusps == 2);
    CHECK(t.n_nodes_offaxis == 3);
    CHECK(t.n_nodes_onaxis == 0);
    CHECK(t.n_isolated_points == 1);
    CHECK(t.n_voids == 0);
    CHECK(t.max_ik == 4);
    CHECK_FALSE(t.binary);
    CHECK_FALSE(t.single_4region_covers_workspace);

    CHECK(positive_counts(t) == std::vector<int>{2, 2, 4, 4});
    // the empty zones (outside reach, and the pocket hugging the rotation
    // axis) all reach the bounding frame, so none of them is a void
    int zero_regions = 0;
    for (const auto& r : t.regions)
        if (r.ik_count == 0) {
            ++zero_regions;
            CHECK(r.touches_frame);
        }
    CHECK(zero_regions >= 1);
    CHECK(detect_voids(t.regions).empty());
}

TEST_CASE("three-region workspace splits into {2,2,4}") {
    auto g = make_geometry(0, 2, 1, 0, 1.5);
    auto t = topology_signature(g);
    check_region_invariants(g, t);
    CHECK(positive_counts(t) == std::vector<int>{2, 2, 4});
    CHECK(t.n_cusps == 0);
    CHECK(t.n_nodes_offaxis == 0);
    CHECK(t.n_nodes_onaxis == 0);
    CHECK(t.n_voids == 0);
}

TEST_CASE("workspaces covered by a single 4-solution region") {
    const double params[5][5] = {
        {0, 0, 1.5, 0, 2},  // intersecting-axes layout
        {1, 0, 0, 0, 1.5},  // single degenerate image point inside
        {0, 1, 0, 1, 3},
        {0, 0, 3, 1, 1},
        {0, 2, 0, 0, 1},  // rosette: internal fold arcs do not split the region
    };
    for (const auto& p : params) {
        auto g = make_geometry(p[0], p[1], p[2], p[3], p[4]);
        CAPTURE(p[0]);
        CAPTURE(p[1]);
        CAPTURE(p[2]);
        CAPTURE(p[3]);
        CAPTURE(p[4]);
        auto t = topology_signature(g);
        check_region_invariants(g, t);
        CHECK(t.single_4region_covers_workspace);
        CHECK(t.max_ik == 4);
        CHECK(t.n_cusps == 0);
        CHECK(t.n_nodes_offaxis + t.n_nodes_onaxis == 0);
        CHECK(t.n_voids == 0);
        int four_regions = 0;
        for (const auto& r : t.regions)
            if (r.ik_count == 4) ++four_regions;
        CHECK(four_regions == 1);
    }
}

TEST_CASE("degenerate image points annotate the region but never split it") {
    auto g = make_geometry(1, 0, 0, 0, 1.5);
    auto t = topology_signature(g);
    CHECK(t.n_isolated_points == 1);
    // one 4-region plus empty surroundings; the point adds no region boundary
    CHECK(t.single_4region_covers_workspace);
    REQUIRE(t.analysis.isolated_points.size() == 1);
    const auto& ip = t.analysis.isolated_points[0];
    CHECK(count_ik(g, ip.location.rho + 1e-3, ip.location.z) == 4);
}

TEST_CASE("void detection") {
    SUBCASE("hidden empty bubble") {
        auto g = make_geometry(1, 0, 0, 1, 2);
        auto t = topology_signature(g);
        check_region_invariants(g, t);
        CHECK(t.n_voids == 1);
        auto voids = detect_voids(t.regions);
        REQUIRE(voids.size() == 1);
        CHECK(voids[0].ik_count == 0);
        CHECK_FALSE(voids[0].touches_frame);
        CHECK(t.single_4region_covers_workspace);
    }
    SUBCASE("binary workspace with one void") {
        auto g = make_geometry(1, 0.7, 0, 0, 0.5);
        auto t = topology_signature(g);
        check_region_invariants(g, t);
        CHECK(t.n_voids == 1);
        CHECK(t.binary);
        CHECK(t.max_ik == 2);
        CHECK(t.n_nodes_offaxis + t.n_nodes_onaxis == 0);
    }
    SUBCASE("no void despite the empty zone around the axis") {
        auto g = make_geometry(0, 0, 1.5, 0, 2);
        auto t = topology_signature(g);
        CHECK(t.n_voids == 0);
        CHECK(detect_voids(t.regions).empty());
    }
}

TEST_CASE("node counts enter the signature split by axis membership") {
    auto t2 = topology_signature(make_geometry(0, 2, 1.5, 0, 2.2));
    CHECK(t2.n_nodes_offaxis == 2);
    CHECK(t2.n_nodes_onaxis == 0);

    auto t3 = topology_signature(make_geometry(0, 2, 1, 0, 3));
    CHECK(t3.n_nodes_offaxis == 4);
    CHECK(t3.n_nodes_onaxis == 0);
    CHECK(t3.n_cusps == 0);
    CHECK(t3.n_voids == 0);

    auto tb = topology_signature(make_geometry(0, 2, 0, 0, 3));
    CHECK(tb.n_nodes_offaxis == 1);
}

TEST_CASE("adjacent regions differ by exactly two solutions across a clean crossing") {
    const double params[4][5] = {
        {1, 3, 2, 0, 4},
        {0, 2, 1, 0, 1.5},
        {0, 2, 1.5, 0, 2.2},
        {0, 2, 1, 0, 3},
    };
    for (const auto& p : params) {
        auto g = make_geometry(p[0], p[1], p[2], p[3], p[4]);
        auto t = topology_signature(g);
        int clean = 0;
        for (const auto& a : t.adjacencies) {
            if (a.curve < 0 || a.near_junction) continue;
            const int ca = t.regions[static_cast<std::size_t>(a.region_a)].ik_count;
            const int cb = t.regions[static_cast<std::size_t>(a.region_b)].ik_count;
            if (a.folded) {
                // a doubly-traversed arc is two coincident fold branches
                CHECK(std::abs(ca - cb) == 4);
            } else {
                CHECK(std::abs(ca - cb) == 2);
                ++clean;
            }
        }
        CHECK(clean >= 3);  // the transversal arrangements expose plain crossings
    }
}

TEST_CASE("no surviving adjacency joins equal counts") {
    const double params[6][5] = {
        {1, 3, 2, 0, 4}, {0, 2, 1, 0, 1.5}, {0, 2, 0, 0, 1},
        {0, 2, 0, 0, 3}, {0, 1, 0, 1, 3},   {1, 0, 0, 1, 2},
    };
    for (const auto& p : params) {
        auto g = make_geometry(p[0], p[1], p[2], p[3], p[4]);
        auto t = topology_signature(g);
        for (const auto& a : t.adjacencies) {
            if (a.curve < 0 || a.near_junction) continue;
            const int ca = t.regions[static_cast<std::size_t>(a.region_a)].ik_count;
            const int cb = t.regions[static_cast<std::size_t>(a.region_b)].ik_count;
            CHECK(ca != cb);  // equal counts across a clean run must have merged
        }
    }
}

TEST_CASE("mirror symmetry: sample counts are invariant under z -> -z") {
    const double params[3][5] = {{1, 3, 2, 0, 4}, {0, 2, 1, 0, 3}, {1, 0, 0, 1, 2}};
    for (const auto& p : params) {
        auto g = make_geometry(p[0], p[1], p[2], p[3], p[4]);
        auto t = topology_signature(g);
        for (const auto& r : t.regions)
            for (const auto& s : r.sample_points) CHECK(count_ik(g, s.rho, -s.z) == r.ik_count);
    }
}

TEST_CASE("region areas account for the analysis box") {
    const double params[3][5] = {{1, 3, 2, 0, 4}, {0, 2, 1, 0, 1.5}, {1, 0, 0, 1, 2}};
    for (const auto& p : params) {
        auto g = make_geometry(p[0], p[1], p[2], p[3], p[4]);
        const double L = g.length_scale();
        const double box = 1.05 * L * 2.1 * L;
        auto t = topology_signature(g);
        double covered = 0;
        for (const auto& r : t.regions) covered += r.area_estimate;
        CHECK(covered > 0.90 * box);  // the rest is the thin barrier raster
        CHECK(covered < box * (1 + 1e-9));
    }
}

TEST_CASE("signature integers are scale invariant") {
    auto base = topology_signature(fig_geom());
    for (double lam : {0.1, 10.0}) {
        auto g = make_geometry(lam * 1, lam * 3, lam * 2, lam * 0, lam * 4);
        auto t = topology_signature(g);
        CHECK(t.n_cusps == base.n_cusps);
        CHECK(t.n_nodes_offaxis == base.n_nodes_offaxis);
        CHECK(t.n_nodes_onaxis == base.n_nodes_onaxis);
        CHECK(t.n_isolated_points == base.n_isolated_points);
        CHECK(t.n_voids == base.n_voids);
        CHECK(t.max_ik == base.max_ik);
        CHECK(t.binary == base.binary);
        CHECK(t.single_4region_covers_workspace == base.single_4region_covers_workspace);
        REQUIRE(t.regions.size() == base.regions.size());
        for (std::size_t i = 0; i < t.regions.size(); ++i) {
            CHECK(t.regions[i].ik_count == base.regions[i].ik_count);
            CHECK(t.regions[i].touches_frame == base.regions[i].touches_frame);
            CHECK(t.regions[i].area_estimate ==
                  doctest::Approx(base.regions[i].area_estimate * lam * lam).epsilon(1e-3));
        }
    }
}

TEST_CASE("repeated analysis is bit-identical") {
    auto g = make_geometry(0, 2, 1.5, 0, 2.2);
    auto a = topology_signature(g);
    auto b = topology_signature(g);
    REQUIRE(a.regions.size() == b.regions.size());
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
        CHECK(a.regions[i].ik_count == b.regions[i].ik_count);
        CHECK(a.regions[i].area_estimate == b.regions[i].area_estimate);
        REQUIRE(a.regions[i].sample_points.size() == b.regions[i].sample_points.size());
        for (std::size_t k = 0; k < a.regions[i].sample_points.size(); ++k) {
            CHECK(a.regions[i].sample_points[k].rho == b.regions[i].sample_points[k].rho);
            CHECK(a.regions[i].sample_points[k].z == b.regions[i].sample_points[k].z);
        }
    }
    REQUIRE(a.adjacencies.size() == b.adjacencies.size());
    for (std::size_t i = 0; i < a.adjacencies.size(); ++i) {
        CHECK(a.adjacencies[i].region_a == b.adjacencies[i].region_a);
        CHECK(a.adjacencies[i].region_b == b.adjacencies[i].region_b);
        CHECK(a.adjacencies[i].curve == b.adjacencies[i].curve);
        CHECK(a.adjacencies[i].folded == b.adjacencies[i].folded);
        CHECK(a.adjacencies[i].near_junction == b.adjacencies[i].near_junction);
        CHECK(a.adjacencies[i].at.rho == b.adjacencies[i].at.rho);
        CHECK(a.adjacencies[i].at.z == b.adjacencies[i].at.z);
    }
    CHECK(a.warnings == b.warnings);
}

TEST_CASE("integer signature survives a finer raster") {
    auto g = fig_geom();
    TopologyConfig cfg;
    cfg.raster_n = 400;
    auto t = topology_signature(g, cfg);
    CHECK(t.raster_n_used == 400);
    CHECK(positive_counts(t) == std::vector<int>{2, 2, 4, 4});
    CHECK(t.n_voids == 0);
}

TEST_CASE("coarse rasters are refused") {
    auto g = fig_geom();
    CHECK_THROWS_AS((void)decompose_regions(g, {}, 150), Error);
    try {
        (void)decompose_regions(g, {}, 199);
    } catch (const Error& e) {
        CHECK(e.code == errc::invalid_input);
    }
}

TEST_CASE("sample disagreement surfaces as an error instead of a silent pick") {
    // a synthetic barrier box straddling the top cap of the workspace encloses
    // cells with different solution counts; refinement cannot reconcile them
    auto g = fig_geom();
    PlanarCurve square;
    square.vertices = {{1.9, 6.3}, {2.6, 6.3}, {2.6, 7.7}, {1.9, 7.7}};
    try {
        (void)decompose_regions(g, {square}, 200);
        FAIL("expected the unresolved-region error");
    } catch (const Error& e) {
        CHECK(e.code == errc::unresolved_region);
    }
}
