#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ws3r/geometry.hpp"
#include "ws3r/ik.hpp"
#include "ws3r/polyroots.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace ws3r;

namespace {
const double PI = 3.14159265358979323846;

ManipulatorGeometry fig_geom() { return make_geometry(1, 3, 2, 0, 4); }

double torus_dist(const JointConfig& a, const JointConfig& b) {
    auto w = [](double x, double y) { return std::remainder(x - y, 2 * PI); };
    return std::sqrt(w(a.theta1, b.theta1) * w(a.theta1, b.theta1) +
                     w(a.theta2, b.theta2) * w(a.theta2, b.theta2) +
                     w(a.theta3, b.theta3) * w(a.theta3, b.theta3));
}
} // namespace

TEST_CASE("quartic for the home target has the expected exact coefficients") {
    auto g = fig_geom();
    auto p = ik_polynomial(g, std::sqrt(68.0), 0.0);
    CHECK(p.c[0] == doctest::Approx(0.0).scale(4000.0));
    CHECK(p.c[1] == doctest::Approx(-896.0));
    CHECK(p.c[2] == doctest::Approx(2816.0));
    CHECK(p.c[3] == doctest::Approx(-3968.0));
    CHECK(p.c[4] == doctest::Approx(3840.0));
    CHECK(p.effective_degree == 4);
    CHECK(p.eval(0.0) == doctest::Approx(0.0).scale(4000.0));  // theta3 = 0 solves it

    std::vector<double> c(p.c.begin(), p.c.end());
    auto roots = polynomial_real_roots(c);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0] == doctest::Approx(0.0).scale(1.0));
    CHECK(roots[1] == doctest::Approx(0.5));
}

TEST_CASE("quartic path refuses d2 = 0 and depends on z only via its square") {
    CHECK_THROWS_AS(ik_polynomial(make_geometry(0, 2, 0, 0, 1), 2.0, 0.0), Error);
    auto g = make_geometry(0.8, 1.5, 0.7, 0.4, 2.0);
    auto a = ik_polynomial(g, 2.3, 1.1);
    auto b = ik_polynomial(g, 2.3, -1.1);
    for (int i = 0; i < 5; ++i) CHECK(a.c[static_cast<std::size_t>(i)] == b.c[static_cast<std::size_t>(i)]);
}

TEST_CASE("coefficient partials match finite differences in R and Z") {
    auto g = make_geometry(1.1, 2.0, 0.9, 0.5, 1.6);
    const double R = 7.3, Z = 2.1, h = 1e-6;
    auto mk = [&](double RR, double ZZ) {
        return ik_polynomial(g, std::sqrt(RR), std::sqrt(ZZ));
    };
    auto p = mk(R, Z);
    auto pRp = mk(R + h, Z), pRm = mk(R - h, Z);
    auto pZp = mk(R, Z + h), pZm = mk(R, Z - h);
    auto dR = p.dc_dR();
    auto dZ = p.dc_dZ();
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(dR[i] == doctest::Approx((pRp.c[i] - pRm.c[i]) / (2 * h)).epsilon(1e-4).scale(10.0));
        CHECK(dZ[i] == doctest::Approx((pZp.c[i] - pZm.c[i]) / (2 * h)).epsilon(1e-4).scale(10.0));
    }
}

TEST_CASE("reduced theta3 equation: boundary, interior, unreachable") {
    auto g = make_geometry(0, 2, 0, 0, 1);
    auto boundary = solve_theta3_reduced(g, 3.0, 0.0);
    REQUIRE(boundary.size() == 1);
    CHECK(boundary[0] == doctest::Approx(0.0).scale(1.0));

    CHECK(solve_theta3_reduced(g, 10.0, 0.0).empty());

    auto interior = solve_theta3_reduced(g, 2.0, 0.0);
    REQUIRE(interior.size() == 2);
    for (double th3 : interior) {
        double resid = 2.0 * g.d3 * g.d4 * std::cos(th3) +
                       (g.d3 * g.d3 + g.d4 * g.d4 - 4.0);
        CHECK(std::abs(resid) < 1e-10 * g.length_scale() * g.length_scale());
    }

    // identically-zero equation only arises when d3 = r2 = 0
    CHECK_THROWS_AS(solve_theta3_reduced(make_geometry(1, 0, 0, 0, 1.5), 1.0, 0.0), Error);
}

TEST_CASE("counts at pinned targets") {
    auto g = fig_geom();
    CHECK(count_ik(g, std::sqrt(68.0), 0.0) == 2);
    CHECK(count_ik(g, 100.0, 0.0) == 0);
    CHECK(count_ik(g, 4.0, 0.0) == 4);

    auto b1 = make_geometry(0, 2, 0, 0, 1);
    CHECK(count_ik(b1, 2.0, 0.0) == 4);
    CHECK(count_ik(b1, 10.0, 0.0) == 0);
    auto at_edge = count_ik_flagged(b1, 3.0, 0.0);  // outer shell tangency
    CHECK(at_edge.count == 2);
    CHECK(at_edge.near_singular);
}

TEST_CASE("theta3 = pi solutions survive the tan-half parametrization") {
    auto g = fig_geom();
    JointConfig q{0.0, 0.7, normalize_angle(PI)};
    CrossSection cs = cross_section_coords(g, q);
    int n = count_ik(g, cs.rho, cs.z);
    CHECK(n >= 1);
    auto set = solve_ik(g, forward_kinematics(g, q));
    bool found = false;
    for (const auto& s : set.solutions)
        if (torus_dist(s, q) < 1e-6) found = true;
    CHECK(found);
    CHECK(static_cast<int>(set.solutions.size()) == n);
}

TEST_CASE("home target solution set contains the home configuration") {
    auto g = fig_geom();
    auto set = solve_ik(g, {8.0, 2.0, 0.0});
    bool found = false;
    for (const auto& s : set.solutions)
        if (torus_dist(s, {0, 0, 0}) < 1e-7) found = true;
    CHECK(found);
    CHECK(set.solutions.size() == 2);
}

TEST_CASE("single-shell geometry reaches interior targets four ways") {
    auto g = make_geometry(0, 2, 0, 0, 1);
    auto set = solve_ik(g, {2.0, 0.0, 0.0});
    CHECK(set.solutions.size() == 4);
    for (const auto& s : set.solutions) {
        Vec3 p = forward_kinematics(g, s);
        CHECK(std::hypot(std::hypot(p.x - 2.0, p.y), p.z) < 1e-9 * g.length_scale());
    }
}

TEST_CASE("binary geometry never exceeds two solutions") {
    auto g = make_geometry(1, 0.7, 0, 0, 0.5);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ang(-PI, PI);
    for (int trial = 0; trial < 50; ++trial) {
        JointConfig q{ang(rng), ang(rng), ang(rng)};
        Vec3 p = forward_kinematics(g, q);
        auto set = solve_ik(g, p);
        CHECK(set.solutions.size() <= 2);
        CHECK(set.solutions.size() >= 1);
    }
}

TEST_CASE("round trip across a spread of geometries") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ang(-PI, PI);
    auto geoms = {make_geometry(1, 3, 2, 0, 4),     make_geometry(0, 2, 0, 0, 1),
                  make_geometry(1, 0, 0, 0, 1.5),   make_geometry(0, 0, 1.5, 0, 2),
                  make_geometry(1, 3, 0.5, 0.5, 1), make_geometry(2, 1, 1, 2, 3),
                  make_geometry(0, 1, 0, 1, 3),     make_geometry(0, 0, 3, 1, 1)};
    for (const auto& g : geoms) {
        const double L = g.length_scale();
        int checked = 0;
        for (int trial = 0; trial < 40; ++trial) {
            JointConfig q{ang(rng), ang(rng), ang(rng)};
            Vec3 target = forward_kinematics(g, q);
            double rho = std::hypot(target.x, target.y);
            if (rho < 1e-6 * L) continue;
            auto flag = count_ik_flagged(g, rho, target.z);
            if (flag.near_singular || flag.degenerate_continuum) continue;
            ++checked;

            auto set = solve_ik(g, target);
            CHECK(static_cast<int>(set.solutions.size()) == flag.count);
            CHECK(flag.count % 2 == 0);
            CHECK(flag.count >= 1);
            CHECK(count_ik(g, rho, -target.z) == flag.count);

            bool found = false;
            for (std::size_t i = 0; i < set.solutions.size(); ++i) {
                const auto& s = set.solutions[i];
                Vec3 p = forward_kinematics(g, s);
                double err = std::sqrt((p.x - target.x) * (p.x - target.x) +
                                       (p.y - target.y) * (p.y - target.y) +
                                       (p.z - target.z) * (p.z - target.z));
                CHECK(err < 1e-9 * L);
                if (torus_dist(s, {normalize_angle(q.theta1), normalize_angle(q.theta2),
                                   normalize_angle(q.theta3)}) < 1e-5)
                    found = true;
                for (std::size_t j = i + 1; j < set.solutions.size(); ++j)
                    CHECK(torus_dist(s, set.solutions[j]) > 1e-6);
            }
            CHECK(found);
        }
        CHECK(checked > 20);
    }
}
