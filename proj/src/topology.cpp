#include "ws3r/topology.hpp"
#include "ws3r/ik.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <tuple>
#include <numeric>
#include <sstream>
#include <vector>

namespace ws3r {
namespace {

struct Grid {
    int n = 0;          // cells per axis
    double cw = 0;      // cell width (rho)
    double ch = 0;      // cell height (z)
    double z0 = 0;      // z of the lower box edge
    int idx(int i, int j) const { return j * n + i; }
    double cx(int i) const { return (i + 0.5) * cw; }
    double cz(int j) const { return z0 + (j + 0.5) * ch; }
};

// visits every cell a segment crosses, as a 4-connected chain
template <typename F>
void raster_segment(const Grid& gr, double x0, double y0, double x1, double y1, F&& mark) {
    const double fx0 = x0 / gr.cw, fy0 = (y0 - gr.z0) / gr.ch;
    const double fx1 = x1 / gr.cw, fy1 = (y1 - gr.z0) / gr.ch;
    auto clampi = [&](double f) { return std::clamp(static_cast<int>(std::floor(f)), 0, gr.n - 1); };
    int i = clampi(fx0), j = clampi(fy0);
    const int ie = clampi(fx1), je = clampi(fy1);
    mark(i, j);
    const int si = fx1 > fx0 ? 1 : -1, sj = fy1 > fy0 ? 1 : -1;
    const double dx = std::abs(fx1 - fx0), dy = std::abs(fy1 - fy0);
    double tx = dx > 0 ? (si > 0 ? i + 1 - fx0 : fx0 - i) / dx : 2.0;
    double ty = dy > 0 ? (sj > 0 ? j + 1 - fy0 : fy0 - j) / dy : 2.0;
    const double tdx = dx > 0 ? 1.0 / dx : 2.0, tdy = dy > 0 ? 1.0 / dy : 2.0;
    int guard = 4 * (gr.n + gr.n);
    while ((i != ie || j != je) && guard-- > 0) {
        if (tx < ty) {
            i += si;
            tx += tdx;
        } else {
            j += sj;
            ty += tdy;
        }
        if (i < 0 || i >= gr.n || j < 0 || j >= gr.n) break;
        mark(i, j);
    }
}

struct Piece {
    std::vector<int32_t> cells;
    int seed = 0;  // scan-order index of the first cell: canonical ordering key
    bool touches_frame = false;
    int ik_count = -1;
    std::vector<CrossSection> samples;
};

struct RayPair {
    int a = 0, b = 0;   // piece indices, a < b
    int curve = -1;     // single separating curve, -1 when mixed
    bool poisoned = false;
    double mx = 0, mz = 0;
};

struct Decomposition {
    std::vector<Region> regions;
    std::vector<RegionAdjacency> adjacencies;
    std::vector<std::string> warnings;
    bool unresolved = false;
};

Decomposition decompose_on_raster(const ManipulatorGeometry& g,
                                  const std::vector<PlanarCurve>& curves, int n) {
    const double L = g.length_scale();
    Grid gr;
    gr.n = n;
    gr.cw = 1.05 * L / n;
    gr.ch = 2.1 * L / n;
    gr.z0 = -1.05 * L;
    const int total = n * n;

    // barrier cells with up to two distinct owning curves; -2 marks "many"
    std::vector<int16_t> m1(static_cast<std::size_t>(total), -1);
    std::vector<int16_t> m2(static_cast<std::size_t>(total), -1);
    auto mark = [&](int ci) {
        return [&, ci](int i, int j) {
            const int id = gr.idx(i, j);
            if (m1[id] < 0)
                m1[id] = static_cast<int16_t>(ci);
            else if (m1[id] != ci) {
                if (m2[id] == -1)
                    m2[id] = static_cast<int16_t>(ci);
                else if (m2[id] != ci)
                    m2[id] = -2;
            }
        };
    };
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& pc = curves[ci];
        if (pc.degenerate_to_point || pc.vertices.size() < 2) continue;
        auto stamp = mark(static_cast<int>(ci));
        for (std::size_t k = 0; k < pc.vertices.size(); ++k) {
            const auto& a = pc.vertices[k];
            const auto& b = pc.vertices[(k + 1) % pc.vertices.size()];
            raster_segment(gr, a.rho, a.z, b.rho, b.z, stamp);
        }
    }

    // flood fill of non-barrier cells, 4-connected, in scan order
    std::vector<int32_t> piece_of(static_cast<std::size_t>(total), -2);
    for (int id = 0; id < total; ++id)
        if (m1[static_cast<std::size_t>(id)] >= 0) piece_of[static_cast<std::size_t>(id)] = -1;
    std::vector<Piece> pieces;
    std::vector<int32_t> stack;
    for (int seed = 0; seed < total; ++seed) {
        if (piece_of[static_cast<std::size_t>(seed)] != -2) continue;
        const int pid = static_cast<int>(pieces.size());
        pieces.push_back({});
        pieces.back().seed = seed;
        stack.assign(1, seed);
        piece_of[static_cast<std::size_t>(seed)] = pid;
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            pieces[static_cast<std::size_t>(pid)].cells.push_back(id);
            const int i = id % n, j = id / n;
            if (i == 0 || i == n - 1 || j == 0 || j == n - 1)
                pieces[static_cast<std::size_t>(pid)].touches_frame = true;
            const int nbr[4] = {i > 0 ? id - 1 : -1, i < n - 1 ? id + 1 : -1,
                                j > 0 ? id - n : -1, j < n - 1 ? id + n : -1};
            for (int nb : nbr)
                if (nb >= 0 && piece_of[static_cast<std::size_t>(nb)] == -2) {
                    piece_of[static_cast<std::size_t>(nb)] = pid;
                    stack.push_back(nb);
                }
        }
    }

    // distance-to-barrier transform (in cells)
    std::vector<int16_t> dist(static_cast<std::size_t>(total), -1);
    std::vector<int32_t> frontier, next;
    for (int id = 0; id < total; ++id)
        if (piece_of[static_cast<std::size_t>(id)] == -1) {
            dist[static_cast<std::size_t>(id)] = 0;
            frontier.push_back(id);
        }
    if (frontier.empty()) {
        std::fill(dist.begin(), dist.end(), static_cast<int16_t>(std::min(total, 30000)));
    }
    for (int16_t d = 1; !frontier.empty(); ++d) {
        next.clear();
        for (int id : frontier) {
            const int i = id % n, j = id / n;
            const int nbr[4] = {i > 0 ? id - 1 : -1, i < n - 1 ? id + 1 : -1,
                                j > 0 ? id - n : -1, j < n - 1 ? id + n : -1};
            for (int nb : nbr)
                if (nb >= 0 && dist[static_cast<std::size_t>(nb)] < 0) {
                    dist[static_cast<std::size_t>(nb)] = d;
                    next.push_back(nb);
                }
        }
        frontier.swap(next);
    }

    // drop sub-resolution fragments (raster slivers around near-tangencies);
    // 0.01% of the box is far below any real structure at these resolutions
    const std::size_t min_cells =
        std::max<std::size_t>(4, static_cast<std::size_t>(gr.n) * static_cast<std::size_t>(gr.n) / 10000);
    Decomposition out;
    int dropped = 0;
    std::vector<char> alive(pieces.size(), 1);
    for (std::size_t p = 0; p < pieces.size(); ++p)
        if (pieces[p].cells.size() < min_cells) {
            alive[p] = 0;
            ++dropped;
        }
    if (dropped > 0) {
        std::ostringstream os;
        os << dropped << " sub-resolution region fragment(s) dropped";
        out.warnings.push_back(os.str());
    }

    // sample each piece at >= 5 interior cells, maximally distant from barriers
    auto deeper = [&](int32_t a, int32_t b) {
        const int16_t da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
        return da != db ? da > db : a < b;
    };
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        if (!alive[p]) continue;
        auto& pc = pieces[p];
        std::vector<int32_t> cand = pc.cells;
        const std::size_t K = std::min<std::size_t>(cand.size(), 512);
        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(K - 1),
                         cand.end(), deeper);
        cand.resize(K);
        std::sort(cand.begin(), cand.end(), deeper);
        const int dmax = dist[static_cast<std::size_t>(cand[0])];
        std::vector<int32_t> chosen;
        for (int spread = std::max(2, dmax); chosen.size() < 5 && spread >= 1;
             spread = spread > 2 ? spread / 2 : spread - 1) {
            for (int32_t id : cand) {
                if (chosen.size() >= 5) break;
                bool ok = std::find(chosen.begin(), chosen.end(), id) == chosen.end();
                for (int32_t c : chosen) {
                    const int didx = std::abs(id % n - c % n), djdx = std::abs(id / n - c / n);
                    ok = ok && std::max(didx, djdx) >= spread;
                }
                if (ok) chosen.push_back(id);
            }
        }
        for (int32_t id : cand) {
            if (chosen.size() >= 5) break;
            if (std::find(chosen.begin(), chosen.end(), id) == chosen.end()) chosen.push_back(id);
        }
        int count = -1;
        bool unanimous = true;
        for (int32_t id : chosen) {
            const double x = gr.cx(id % n), z = gr.cz(id / n);
            const int c = count_ik(g, x, z);
            pc.samples.push_back({x, z});
            if (count < 0)
                count = c;
            else
                unanimous = unanimous && c == count;
        }
        pc.ik_count = count;
        if (!unanimous) out.unresolved = true;
    }
    if (out.unresolved) return out;

    // junction cells: barrier cells where strands meet (3+ barrier neighbours);
    // rays through their 2-cell neighbourhood are not trusted for merging
    std::vector<char> poison(static_cast<std::size_t>(total), 0);
    for (int id = 0; id < total; ++id) {
        if (piece_of[static_cast<std::size_t>(id)] != -1) continue;
        const int i = id % n, j = id / n;
        int deg = 0;
        if (i > 0 && piece_of[static_cast<std::size_t>(id - 1)] == -1) ++deg;
        if (i < n - 1 && piece_of[static_cast<std::size_t>(id + 1)] == -1) ++deg;
        if (j > 0 && piece_of[static_cast<std::size_t>(id - n)] == -1) ++deg;
        if (j < n - 1 && piece_of[static_cast<std::size_t>(id + n)] == -1) ++deg;
        if (deg < 3) continue;
        for (int jj = std::max(0, j - 2); jj <= std::min(n - 1, j + 2); ++jj)
            for (int ii = std::max(0, i - 2); ii <= std::min(n - 1, i + 2); ++ii)
                poison[static_cast<std::size_t>(gr.idx(ii, jj))] = 1;
    }

    // adjacency rays: from a region cell, cross at most two barrier cells
    std::vector<RayPair> rays;
    for (int id = 0; id < total; ++id) {
        const int a = piece_of[static_cast<std::size_t>(id)];
        if (a < 0 || !alive[static_cast<std::size_t>(a)]) continue;
        const int i = id % n, j = id / n;
        for (int dir = 0; dir < 2; ++dir) {
            const int step = dir == 0 ? 1 : n;
            if (dir == 0 && i + 1 >= n) continue;
            if (dir == 1 && j + 1 >= n) continue;
            int run = 0, cid = -1;
            bool mixed = false, pois = false;
            int k = id + step;
            while (true) {
                const int ki = k % n, kj = k / n;
                if (ki >= n || kj >= n || (dir == 0 && kj != j)) break;
                if (piece_of[static_cast<std::size_t>(k)] != -1) break;
                if (++run > 2) break;
                const int16_t c1 = m1[static_cast<std::size_t>(k)];
                const int16_t c2 = m2[static_cast<std::size_t>(k)];
                if (c2 != -1) mixed = true;
                if (cid == -1)
                    cid = c1;
                else if (cid != c1)
                    mixed = true;
                pois = pois || poison[static_cast<std::size_t>(k)] != 0;
                k += step;
            }
            if (run < 1 || run > 2) continue;
            const int ki = k % n, kj = k / n;
            if (ki >= n || kj >= n || (dir == 0 && kj != j)) continue;
            const int b = piece_of[static_cast<std::size_t>(k)];
            if (b < 0 || b == a || !alive[static_cast<std::size_t>(b)]) continue;
            RayPair rp;
            rp.a = std::min(a, b);
            rp.b = std::max(a, b);
            rp.curve = mixed ? -1 : cid;
            rp.poisoned = pois;
            rp.mx = 0.5 * (gr.cx(i) + gr.cx(ki));
            rp.mz = 0.5 * (gr.cz(j) + gr.cz(kj));
            rays.push_back(rp);
        }
    }

    // merge fragments with equal counts split only by a clean single-curve run
    std::vector<int> parent(pieces.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> root = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& rp : rays) {
        if (rp.poisoned || rp.curve < 0) continue;
        if (pieces[static_cast<std::size_t>(rp.a)].ik_count != pieces[static_cast<std::size_t>(rp.b)].ik_count)
            continue;
        const int ra = root(rp.a), rb = root(rp.b);
        if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }

    // assemble final regions, ordered by the smallest raster index they contain
    std::map<int, std::vector<int>> groups;  // root piece -> members
    for (std::size_t p = 0; p < pieces.size(); ++p)
        if (alive[p]) groups[root(static_cast<int>(p))].push_back(static_cast<int>(p));
    std::vector<std::pair<int, int>> order;  // (min seed, root)
    for (const auto& [r, members] : groups) {
        int seed = std::numeric_limits<int>::max();
        for (int m : members) seed = std::min(seed, pieces[static_cast<std::size_t>(m)].seed);
        order.emplace_back(seed, r);
    }
    std::sort(order.begin(), order.end());
    std::vector<int> region_of(pieces.size(), -1);
    const double cell_area = gr.cw * gr.ch;
    for (const auto& [seed, r] : order) {
        Region reg;
        reg.id = static_cast<int>(out.regions.size());
        std::size_t cells = 0;
        for (int m : groups[r]) {
            const auto& pc = pieces[static_cast<std::size_t>(m)];
            region_of[static_cast<std::size_t>(m)] = reg.id;
            cells += pc.cells.size();
            reg.touches_frame = reg.touches_frame || pc.touches_frame;
            reg.ik_count = pc.ik_count;
            for (const auto& s : pc.samples)
                if (reg.sample_points.size() < 10) reg.sample_points.push_back(s);
        }
        reg.area_estimate = static_cast<double>(cells) * cell_area;
        out.regions.push_back(std::move(reg));
    }

    // deduplicated adjacency list on final region ids
    std::map<std::tuple<int, int, int>, std::size_t> seen;
    for (const auto& rp : rays) {
        const int a = region_of[static_cast<std::size_t>(rp.a)];
        const int b = region_of[static_cast<std::size_t>(rp.b)];
        if (a < 0 || b < 0 || a == b) continue;
        RegionAdjacency adj;
        adj.region_a = std::min(a, b);
        adj.region_b = std::max(a, b);
        adj.curve = rp.curve;
        adj.folded = rp.curve >= 0 && curves[static_cast<std::size_t>(rp.curve)].folded_self_cover;
        adj.near_junction = rp.poisoned;
        adj.at = {rp.mx, rp.mz};
        const auto key = std::make_tuple(adj.region_a, adj.region_b, adj.curve);
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen[key] = out.adjacencies.size();
            out.adjacencies.push_back(adj);
        } else if (out.adjacencies[it->second].near_junction && !adj.near_junction) {
            out.adjacencies[it->second] = adj;  // prefer a clean crossing as witness
        }
    }
    return out;
}

Decomposition decompose_refining(const ManipulatorGeometry& g,
                                 const std::vector<PlanarCurve>& curves, int raster_n,
                                 int* n_used) {
    if (raster_n < 200) throw Error(errc::invalid_input, "raster_n must be at least 200");
    int n = raster_n;
    Decomposition d = decompose_on_raster(g, curves, n);
    for (int doubling = 0; d.unresolved && doubling < 2; ++doubling) {
        n *= 2;
        d = decompose_on_raster(g, curves, n);
    }
    if (d.unresolved)
        throw Error(errc::unresolved_region,
                    "region samples disagree on the IK count after raster refinement");
    if (n_used) *n_used = n;
    return d;
}

} // namespace

std::vector<Region> decompose_regions(const ManipulatorGeometry& g,
                                      const std::vector<PlanarCurve>& curves, int raster_n) {
    return decompose_refining(g, curves, raster_n, nullptr).regions;
}

std::vector<Region> detect_voids(const std::vector<Region>& regions) {
    std::vector<Region> voids;
    for (const auto& r : regions)
        if (r.ik_count == 0 && !r.touches_frame) voids.push_back(r);
    return voids;
}

WorkspaceTopology topology_signature(const ManipulatorGeometry& g, const TopologyConfig& cfg) {
    WorkspaceTopology t;
    t.analysis = analyze_singularities(g, cfg.singularity);
    Decomposition d = decompose_refining(g, t.analysis.planar_curves, cfg.raster_n, &t.raster_n_used);
    t.regions = std::move(d.regions);
    t.adjacencies = std::move(d.adjacencies);
    t.warnings = std::move(d.warnings);

    t.n_cusps = static_cast<int>(t.analysis.cusps.size());
    for (const auto& nd : t.analysis.nodes)
        (nd.on_axis ? t.n_nodes_onaxis : t.n_nodes_offaxis) += 1;
    t.n_isolated_points = static_cast<int>(t.analysis.isolated_points.size());
    t.n_voids = static_cast<int>(detect_voids(t.regions).size());

    int positive_regions = 0;
    for (const auto& r : t.regions) {
        t.max_ik = std::max(t.max_ik, r.ik_count);
        if (r.ik_count > 0) ++positive_regions;
    }
    t.binary = t.max_ik == 2;
    t.single_4region_covers_workspace = positive_regions == 1 && t.max_ik == 4;

    // crossings close to a certified critical point are structurally ambiguous
    const double L = g.length_scale();
    const double excl = 10.0 * 2.1 * L / std::max(1, t.raster_n_used);
    auto near_critical = [&](const CrossSection& p) {
        auto close = [&](const std::vector<CriticalPoint>& pts) {
            for (const auto& cp : pts)
                if (std::hypot(cp.location.rho - p.rho, cp.location.z - p.z) < excl) return true;
            return false;
        };
        return close(t.analysis.nodes) || close(t.analysis.cusps);
    };
    for (auto& adj : t.adjacencies)
        adj.near_junction = adj.near_junction || near_critical(adj.at);
    return t;
}

} // namespace ws3r
