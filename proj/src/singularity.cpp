#include "ws3r/singularity.hpp"
#include "ws3r/ik.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ws3r {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double wrap_delta(double d) {
    // shortest signed representative of d modulo 2*pi, in (-pi, pi]
    d = std::fmod(d, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    if (d > kPi) d -= kTwoPi;
    return d;
}

double torus_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(wrap_delta(a[0] - b[0]), wrap_delta(a[1] - b[1]));
}

bool param_zero(double v, double L) { return v < 1e-12 * L; }

// ---------------------------------------------------------------------------
// det(J) factor structure.  det = d4 * f1 * f2 ... ; each factor is either a
// set of coordinate lines (closed-form zero set) or a smooth implicit factor
// traced by marching squares.  Tracing factors instead of the raw product
// keeps even-multiplicity line zeros (no sign change of the product) and
// line/curve crossings from being missed or mis-spliced.
// ---------------------------------------------------------------------------

struct LineSpec {
    int axis;      // 0: theta2 = value, 1: theta3 = value
    double value;
    bool folded;   // image set is traversed twice by the line
};

struct FactorSet {
    std::vector<LineSpec> lines;
    std::vector<std::function<double(double, double)>> implicits;
};

FactorSet build_factors(const ManipulatorGeometry& g) {
    const double L = g.length_scale();
    const double d2 = g.d2, d3 = g.d3, r2 = g.r2, r3 = g.r3, d4 = g.d4;
    const bool z_d2 = param_zero(d2, L), z_d3 = param_zero(d3, L);
    const bool z_r2 = param_zero(r2, L), z_r3 = param_zero(r3, L);
    FactorSet fs;

    auto add_f_lines = [&] {
        // d3 + d4*cos(theta3) = 0
        const double c = -d3 / d4;
        if (c < -1.0 - 1e-15) return;  // never vanishes
        if (c <= -1.0 + 1e-15) {
            fs.lines.push_back({1, -kPi, false});
            return;
        }
        const double a = std::acos(std::min(1.0, std::max(-1.0, c)));
        fs.lines.push_back({1, a, false});
        fs.lines.push_back({1, -a, false});
    };

    if (z_d2) {
        // first factor: (d3 + d4*c3)*c2 + r3*s2
        if (z_r3) {
            add_f_lines();  // images collapse to points
            fs.lines.push_back({0, kPi / 2, z_r2});
            fs.lines.push_back({0, -kPi / 2, z_r2});
        } else {
            fs.implicits.push_back([d3, d4, r3](double t2, double t3) {
                return (d3 + d4 * std::cos(t3)) * std::cos(t2) + r3 * std::sin(t2);
            });
        }
        // second factor: d3*s3 - r2*c3
        if (z_r2) {
            fs.lines.push_back({1, 0.0, true});
            fs.lines.push_back({1, -kPi, true});
        } else if (z_d3) {
            fs.lines.push_back({1, kPi / 2, !z_r3});
            fs.lines.push_back({1, -kPi / 2, !z_r3});
        } else {
            const double a = std::atan2(r2, d3);  // in (0, pi/2)
            fs.lines.push_back({1, a, true});
            fs.lines.push_back({1, a - kPi, true});
        }
    } else if (z_r2) {
        // det = d4*s3*(d3*(d2 + c2*F + r3*s2) + d2*d4*c3)
        fs.lines.push_back({1, 0.0, false});
        fs.lines.push_back({1, -kPi, false});
        if (z_d3) {
            fs.lines.push_back({1, kPi / 2, false});
            fs.lines.push_back({1, -kPi / 2, false});
        } else if (z_r3) {
            // second factor reduces to F*(d2 + d3*c2)
            add_f_lines();
            const double c = -d2 / d3;
            if (c >= -1.0 - 1e-15) {
                if (c <= -1.0 + 1e-15) {
                    fs.lines.push_back({0, -kPi, true});
                } else {
                    // image depends on theta3 only through cos: traced twice
                    const double b = std::acos(std::min(1.0, std::max(-1.0, c)));
                    fs.lines.push_back({0, b, true});
                    fs.lines.push_back({0, -b, true});
                }
            }
        } else {
            fs.implicits.push_back([d2, d3, d4, r3](double t2, double t3) {
                const double F = d3 + d4 * std::cos(t3);
                return d3 * (d2 + std::cos(t2) * F + r3 * std::sin(t2)) +
                       d2 * d4 * std::cos(t3);
            });
        }
    } else if (z_d3) {
        // F = d4*c3 divides out: det = d4*c3*(d4*s3*px - py*(px - d2))
        fs.lines.push_back({1, kPi / 2, false});
        fs.lines.push_back({1, -kPi / 2, false});
        fs.implicits.push_back([d2, d4, r2, r3](double t2, double t3) {
            const double c2 = std::cos(t2), s2 = std::sin(t2);
            const double c3 = std::cos(t3), s3 = std::sin(t3);
            const double px = d2 + c2 * d4 * c3 + r3 * s2;
            const double py = d4 * s3 + r2;
            return d4 * s3 * px - py * (px - d2);
        });
    } else if (z_r3) {
        add_f_lines();  // point images
        fs.implicits.push_back([d2, d3, r2](double t2, double t3) {
            const double s3 = std::sin(t3), c3 = std::cos(t3);
            return d2 * s3 + std::cos(t2) * (d3 * s3 - r2 * c3);
        });
    } else {
        // no zero parameter: trace det/d4 whole
        fs.implicits.push_back([d2, d3, d4, r2, r3](double t2, double t3) {
            const double c2 = std::cos(t2), s2 = std::sin(t2);
            const double c3 = std::cos(t3), s3 = std::sin(t3);
            const double F = d3 + d4 * c3;
            const double px = d2 + c2 * F + r3 * s2;
            const double py = d4 * s3 + r2;
            return F * s3 * px - c3 * py * (px - d2);
        });
    }

    // a line can arise from both factors (e.g. d2 = d3 = 0, r3 = 0); keep one
    std::vector<LineSpec> dedup;
    for (const auto& ln : fs.lines) {
        bool seen = false;
        for (const auto& o : dedup)
            if (o.axis == ln.axis && std::abs(wrap_delta(o.value - ln.value)) < 1e-12)
                seen = true;
        if (!seen) dedup.push_back(ln);
    }
    fs.lines = std::move(dedup);
    return fs;
}

// ---------------------------------------------------------------------------
// marching squares on the torus for one implicit factor
// ---------------------------------------------------------------------------

struct TraceResult {
    std::vector<TorusCurve> curves;
    bool saddle = false;
};

void refine_on_factor(const std::function<double(double, double)>& f, double& t2,
                      double& t3, double step_cap) {
    for (int it = 0; it < 6; ++it) {
        const double v = f(t2, t3);
        const double h = 1e-6;
        const double gx = (f(t2 + h, t3) - f(t2 - h, t3)) / (2 * h);
        const double gy = (f(t2, t3 + h) - f(t2, t3 - h)) / (2 * h);
        const double g2 = gx * gx + gy * gy;
        if (g2 < 1e-30) break;
        double sx = v * gx / g2, sy = v * gy / g2;
        const double sn = std::hypot(sx, sy);
        if (sn > step_cap) {
            sx *= step_cap / sn;
            sy *= step_cap / sn;
        }
        t2 -= sx;
        t3 -= sy;
        if (sn < 1e-15) break;
    }
}

TraceResult march_factor(const std::function<double(double, double)>& f, int n) {
    const double h = kTwoPi / n;
    auto th = [&](int k) { return -kPi + h * k; };

    std::vector<double> val(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) val[static_cast<size_t>(j) * n + i] = f(th(i), th(j));
    auto V = [&](int i, int j) {
        return val[static_cast<size_t>(((j % n) + n) % n) * n + (((i % n) + n) % n)];
    };
    auto neg = [](double v) { return v < 0.0; };

    // edge id: dir*n*n + j*n + i; dir 0 spans theta2, dir 1 spans theta3
    const int NN = n * n;
    std::vector<double> frac(2 * NN, -1.0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double a = V(i, j);
            const double b0 = V(i + 1, j);
            if (neg(a) != neg(b0)) frac[j * n + i] = a / (a - b0);
            const double b1 = V(i, j + 1);
            if (neg(a) != neg(b1)) frac[NN + j * n + i] = a / (a - b1);
        }
    auto edge_pos = [&](int eid) -> std::array<double, 2> {
        const int dir = eid / NN, rem = eid % NN, j = rem / n, i = rem % n;
        if (dir == 0) return {th(i) + frac[eid] * h, th(j)};
        return {th(i), th(j) + frac[eid] * h};
    };

    std::vector<std::array<int, 2>> adj(2 * NN, {-1, -1});
    auto link = [&](int a, int b) {
        adj[a][adj[a][0] < 0 ? 0 : 1] = b;
        adj[b][adj[b][0] < 0 ? 0 : 1] = a;
    };

    bool saddle = false;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int bottom = j * n + i;
            const int top = ((j + 1) % n) * n + i;
            const int left = NN + j * n + i;
            const int right = NN + j * n + (i + 1) % n;
            int e[4], cnt = 0;
            if (frac[bottom] >= 0) e[cnt++] = bottom;
            if (frac[right] >= 0) e[cnt++] = right;
            if (frac[top] >= 0) e[cnt++] = top;
            if (frac[left] >= 0) e[cnt++] = left;
            if (cnt == 2) {
                link(e[0], e[1]);
            } else if (cnt == 4) {
                saddle = true;
                const double center = f(th(i) + 0.5 * h, th(j) + 0.5 * h);
                if (neg(center) == neg(V(i, j))) {
                    link(bottom, right);  // pockets at corners (i+1,j) and (i,j+1)
                    link(top, left);
                } else {
                    link(bottom, left);
                    link(top, right);
                }
            }
        }

    TraceResult out;
    out.saddle = saddle;
    std::vector<char> visited(2 * NN, 0);
    for (int start = 0; start < 2 * NN; ++start) {
        if (frac[start] < 0 || visited[start] || adj[start][0] < 0) continue;
        TorusCurve curve;
        std::vector<std::array<double, 2>> unwrapped;
        int prev = -1, cur = start;
        std::array<double, 2> acc = edge_pos(cur);
        unwrapped.push_back(acc);
        visited[cur] = 1;
        while (true) {
            int nxt = (adj[cur][0] != prev) ? adj[cur][0] : adj[cur][1];
            if (nxt < 0) break;  // should not happen on a torus
            const auto p = edge_pos(nxt);
            const auto last = unwrapped.back();
            acc = {last[0] + wrap_delta(p[0] - last[0]), last[1] + wrap_delta(p[1] - last[1])};
            if (nxt == start) {
                curve.wrap_count = {static_cast<int>(std::lround((acc[0] - unwrapped.front()[0]) / kTwoPi)),
                                    static_cast<int>(std::lround((acc[1] - unwrapped.front()[1]) / kTwoPi))};
                break;
            }
            unwrapped.push_back(acc);
            visited[nxt] = 1;
            prev = cur;
            cur = nxt;
        }
        if (unwrapped.size() < 4) continue;  // speck, below resolution
        curve.closed = true;
        curve.vertices = std::move(unwrapped);
        out.curves.push_back(std::move(curve));
    }

    // refine vertices onto the factor zero set, then split long steps so that
    // consecutive vertices stay closer than one grid pitch
    for (auto& c : out.curves) {
        for (auto& v : c.vertices) refine_on_factor(f, v[0], v[1], 0.75 * h);
        for (int pass = 0; pass < 4; ++pass) {
            std::vector<std::array<double, 2>> split;
            split.reserve(c.vertices.size() * 2);
            bool any = false;
            const size_t m = c.vertices.size();
            for (size_t k = 0; k < m; ++k) {
                const auto& a = c.vertices[k];
                const auto& b = c.vertices[(k + 1) % m];
                split.push_back(a);
                const double dx = wrap_delta(b[0] - a[0]), dy = wrap_delta(b[1] - a[1]);
                if (std::hypot(dx, dy) >= 0.95 * h) {
                    std::array<double, 2> mid{a[0] + 0.5 * dx, a[1] + 0.5 * dy};
                    refine_on_factor(f, mid[0], mid[1], 0.75 * h);
                    split.push_back(mid);
                    any = true;
                }
            }
            c.vertices = std::move(split);
            if (!any) break;
        }
        for (auto& v : c.vertices) {
            v[0] = normalize_angle(v[0]);
            v[1] = normalize_angle(v[1]);
        }
    }
    return out;
}

TorusCurve make_line_curve(const LineSpec& ln, int n) {
    TorusCurve c;
    const int m = 2 * n;  // keep spacing below one grid pitch
    c.vertices.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double t = normalize_angle(-kPi + kTwoPi * k / m);
        if (ln.axis == 0)
            c.vertices.push_back({normalize_angle(ln.value), t});
        else
            c.vertices.push_back({t, normalize_angle(ln.value)});
    }
    c.closed = true;
    c.wrap_count = (ln.axis == 0) ? std::array<int, 2>{0, 1} : std::array<int, 2>{1, 0};
    return c;
}

struct CurveMeta {
    bool is_line = false;
    LineSpec line{0, 0.0, false};
};

std::vector<TorusCurve> trace_all(const ManipulatorGeometry& g, int grid_n, bool& warn,
                                  std::vector<CurveMeta>* meta_out) {
    if (grid_n < 64) throw Error(errc::invalid_input, "singular-curve grid must be >= 64");
    const FactorSet fs = build_factors(g);
    std::vector<TorusCurve> curves;
    std::vector<CurveMeta> meta;
    warn = false;
    for (const auto& ln : fs.lines) {
        curves.push_back(make_line_curve(ln, grid_n));
        meta.push_back({true, ln});
    }
    for (const auto& f : fs.implicits) {
        TraceResult tr = march_factor(f, grid_n);
        if (tr.saddle) {
            warn = true;  // possibly under-resolved: refine once
            tr = march_factor(f, 2 * grid_n);
        }
        for (auto& c : tr.curves) {
            curves.push_back(std::move(c));
            meta.push_back({false, {0, 0.0, false}});
        }
    }
    // canonical order: by smallest (theta3, theta2) vertex
    std::vector<size_t> order(curves.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](size_t i) {
        double m3 = kPi, m2 = kPi;
        for (const auto& v : curves[i].vertices) {
            if (v[1] < m3) m3 = v[1];
            if (v[0] < m2) m2 = v[0];
        }
        return std::make_pair(m3, m2);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return key(a) < key(b); });
    std::vector<TorusCurve> sorted;
    std::vector<CurveMeta> meta_sorted;
    for (size_t i : order) {
        sorted.push_back(std::move(curves[i]));
        meta_sorted.push_back(meta[i]);
    }
    if (meta_out) *meta_out = std::move(meta_sorted);
    return sorted;
}

// ---------------------------------------------------------------------------
// planar images and their metadata
// ---------------------------------------------------------------------------

double curve_diameter(const PlanarCurve& pc) {
    double rlo = 1e300, rhi = -1e300, zlo = 1e300, zhi = -1e300;
    for (const auto& v : pc.vertices) {
        rlo = std::min(rlo, v.rho);
        rhi = std::max(rhi, v.rho);
        zlo = std::min(zlo, v.z);
        zhi = std::max(zhi, v.z);
    }
    return std::hypot(rhi - rlo, zhi - zlo);
}

double median_segment_length(const PlanarCurve& pc) {
    std::vector<double> lens;
    const size_t m = pc.vertices.size();
    lens.reserve(m);
    for (size_t k = 0; k < m; ++k) {
        const auto& a = pc.vertices[k];
        const auto& b = pc.vertices[(k + 1) % m];
        lens.push_back(std::hypot(b.rho - a.rho, b.z - a.z));
    }
    std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
    return lens[lens.size() / 2];
}

double dist_point_segment(double px, double pz, const CrossSection& a, const CrossSection& b) {
    const double dx = b.rho - a.rho, dz = b.z - a.z;
    const double len2 = dx * dx + dz * dz;
    double t = 0.0;
    if (len2 > 0.0) t = std::max(0.0, std::min(1.0, ((px - a.rho) * dx + (pz - a.z) * dz) / len2));
    return std::hypot(px - (a.rho + t * dx), pz - (a.z + t * dz));
}

double dist_point_curve(double px, double pz, const PlanarCurve& pc) {
    double best = 1e300;
    const size_t m = pc.vertices.size();
    for (size_t k = 0; k < m; ++k)
        best = std::min(best, dist_point_segment(px, pz, pc.vertices[k], pc.vertices[(k + 1) % m]));
    return best;
}

bool sampled_self_cover(const PlanarCurve& pc, double tol) {
    const size_t m = pc.vertices.size();
    if (m < 32) return false;
    const size_t stride = std::max<size_t>(1, m / 48);
    const size_t guard = std::max<size_t>(4, m / 8);
    int hits = 0, total = 0;
    for (size_t k = 0; k < m; k += stride) {
        const auto& p = pc.vertices[k];
        double best = 1e300;
        for (size_t s = 0; s < m; ++s) {
            const size_t di = (s + m - k) % m;
            if (di < guard || m - di < guard) continue;  // skip own neighbourhood
            best = std::min(best, dist_point_segment(p.rho, p.z, pc.vertices[s],
                                                     pc.vertices[(s + 1) % m]));
            if (best < tol) break;
        }
        ++total;
        if (best < tol) ++hits;
    }
    return hits * 10 >= total * 8;
}

bool curves_coincide(const PlanarCurve& a, const PlanarCurve& b, double tol) {
    const size_t m = a.vertices.size();
    const size_t stride = std::max<size_t>(1, m / 24);
    int hits = 0, total = 0;
    for (size_t k = 0; k < m; k += stride) {
        ++total;
        if (dist_point_curve(a.vertices[k].rho, a.vertices[k].z, b) < tol) ++hits;
    }
    return hits * 10 >= total * 9;
}

// ---------------------------------------------------------------------------
// node candidates and certification
// ---------------------------------------------------------------------------

struct NodeCand {
    double rho = 0, z = 0;
    std::array<double, 2> pa{}, pb{};      // joint-space seeds for the two branches
    std::array<double, 2> dir_a{}, dir_b{};  // image directions of the branches
    bool has_dirs = false;
    bool from_point_image = false;
    int curve_a = -1, curve_b = -1;  // planar curve indices the seeds came from
    std::size_t idx_a = 0, idx_b = 0;
};

std::array<double, 2> lerp_torus(const std::array<double, 2>& a, const std::array<double, 2>& b,
                                 double s) {
    return {normalize_angle(a[0] + s * wrap_delta(b[0] - a[0])),
            normalize_angle(a[1] + s * wrap_delta(b[1] - a[1]))};
}

struct RefinedNode {
    bool ok = false;
    std::array<double, 2> a{}, b{};
    double rho = 0, z = 0;
    std::array<double, 3> resid{};   // |det| x2 (per L^3) and image mismatch (per L)
    // image velocities of the two singular branches at the refined point;
    // undefined (va_ok = false) where the branch is a solution continuum or an
    // image fold, whose pushforward vanishes
    std::array<double, 2> va{}, vb{};
    bool va_ok = false, vb_ok = false;
};

RefinedNode refine_node(const ManipulatorGeometry& g, const NodeCand& cand) {
    const double L = g.length_scale();
    const double L2 = L * L, L3 = L2 * L;
    Eigen::Vector4d x(cand.pa[0], cand.pa[1], cand.pb[0], cand.pb[1]);
    RefinedNode out;

    auto image_state = [&](double t2, double t3, double& R, double& z, Eigen::Vector2d& dR,
                           Eigen::Vector2d& dz) {
        const double c2 = std::cos(t2), s2 = std::sin(t2);
        const double c3 = std::cos(t3), s3 = std::sin(t3);
        const double F = g.d3 + g.d4 * c3, Fp = -g.d4 * s3;
        const double px = g.d2 + c2 * F + g.r3 * s2;
        const double py = g.d4 * s3 + g.r2;
        R = px * px + py * py;
        z = g.r3 * c2 - F * s2;
        const double dpx2 = -s2 * F + g.r3 * c2, dpx3 = c2 * Fp;
        const double dpy3 = g.d4 * c3;
        dR = {2 * px * dpx2, 2 * (px * dpx3 + py * dpy3)};
        dz = {-g.r3 * s2 - F * c2, -Fp * s2};
    };

    Eigen::Vector4d Fv;
    for (int it = 0; it < 60; ++it) {
        double Ra, za, Rb, zb;
        Eigen::Vector2d dRa, dza, dRb, dzb;
        image_state(x[0], x[1], Ra, za, dRa, dza);
        image_state(x[2], x[3], Rb, zb, dRb, dzb);
        const double deta = jacobian_det(g, x[0], x[1]);
        const double detb = jacobian_det(g, x[2], x[3]);
        const auto ga = jacobian_det_gradient(g, x[0], x[1]);
        const auto gb = jacobian_det_gradient(g, x[2], x[3]);
        Fv << deta / L3, detb / L3, (Ra - Rb) / L2, (za - zb) / L;
        if (Fv.lpNorm<Eigen::Infinity>() < 1e-13) break;
        Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
        J(0, 0) = ga[0] / L3;
        J(0, 1) = ga[1] / L3;
        J(1, 2) = gb[0] / L3;
        J(1, 3) = gb[1] / L3;
        J(2, 0) = dRa[0] / L2;
        J(2, 1) = dRa[1] / L2;
        J(2, 2) = -dRb[0] / L2;
        J(2, 3) = -dRb[1] / L2;
        J(3, 0) = dza[0] / L;
        J(3, 1) = dza[1] / L;
        J(3, 2) = -dzb[0] / L;
        J(3, 3) = -dzb[1] / L;
        // rank-deficient at nodes fed by a point-image (a continuum direction
        // lies in the kernel): take the minimum-norm step
        Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix4d> cod;
        cod.setThreshold(1e-9);
        cod.compute(J);
        Eigen::Vector4d dx = cod.solve(Fv);
        for (int k = 0; k < 4; ++k) dx[k] = std::max(-0.2, std::min(0.2, dx[k]));
        x -= dx;
    }

    double Ra, za, Rb, zb;
    Eigen::Vector2d dRa, dza, dRb, dzb;
    image_state(x[0], x[1], Ra, za, dRa, dza);
    image_state(x[2], x[3], Rb, zb, dRb, dzb);
    const double deta = jacobian_det(g, x[0], x[1]);
    const double detb = jacobian_det(g, x[2], x[3]);
    const double rhoa = std::sqrt(std::max(0.0, Ra)), rhob = std::sqrt(std::max(0.0, Rb));
    const double mismatch = std::hypot(rhoa - rhob, za - zb);
    // near the axis rho = sqrt(R) amplifies roundoff; accept on squared radius
    const bool img_ok = mismatch < 1e-9 * L ||
                        (std::abs(Ra - Rb) < 1e-11 * L2 && std::abs(za - zb) < 1e-11 * L);
    out.ok = std::abs(deta) < 1e-10 * L3 && std::abs(detb) < 1e-10 * L3 && img_ok;
    out.a = {normalize_angle(x[0]), normalize_angle(x[1])};
    out.b = {normalize_angle(x[2]), normalize_angle(x[3])};
    out.rho = 0.5 * (rhoa + rhob);
    out.z = 0.5 * (za + zb);
    out.resid = {std::abs(deta) / L3, std::abs(detb) / L3, mismatch / L};

    auto branch_velocity = [&](double t2, double t3, const Eigen::Vector2d& dR,
                               const Eigen::Vector2d& dz, double rho, std::array<double, 2>& v) {
        const auto grad = jacobian_det_gradient(g, t2, t3);
        const double gn = std::hypot(grad[0], grad[1]);
        if (gn < 1e-9 * L3) return false;  // det-critical point: no curve tangent
        const double u2 = -grad[1] / gn, u3 = grad[0] / gn;
        const double vR = dR[0] * u2 + dR[1] * u3;
        const double vz = dz[0] * u2 + dz[1] * u3;
        v = {rho > 1e-12 * L ? vR / (2 * rho) : vR / L, vz};
        return std::hypot(v[0], v[1]) > 1e-9 * L;
    };
    out.va_ok = branch_velocity(x[0], x[1], dRa, dza, rhoa, out.va);
    out.vb_ok = branch_velocity(x[2], x[3], dRb, dzb, rhob, out.vb);
    return out;
}

// IK counts sampled on a probe ring around a candidate point.  strict mode
// refuses rings with any near-singular probe; the lenient mode only refuses
// genuinely ambiguous probes (solution continua, odd = on-boundary counts).
struct ProbeRing {
    bool usable = false;
    int transitions = 0;
    int distinct = 0;
};

ProbeRing ring_counts(const ManipulatorGeometry& g, double rho, double z, double r, bool strict) {
    const int m = 16;
    ProbeRing out;
    std::array<int, 16> c{};
    for (int k = 0; k < m; ++k) {
        const double beta = kTwoPi * (k + 0.37) / m;
        const double pr = std::abs(rho + r * std::cos(beta));
        const IkCount ic = count_ik_flagged(g, pr, z + r * std::sin(beta));
        if (ic.degenerate_continuum || (strict && ic.near_singular) || (ic.count % 2) != 0)
            return out;
        c[k] = ic.count;
    }
    out.usable = true;
    int vals[5], nvals = 0;
    for (int k = 0; k < m; ++k) {
        if (c[k] != c[(k + 1) % m]) ++out.transitions;
        bool seen = false;
        for (int j = 0; j < nvals; ++j) seen = seen || vals[j] == c[k];
        if (!seen && nvals < 5) vals[nvals++] = c[k];
    }
    out.distinct = nvals;
    return out;
}

// half-disc variant for points on the symmetry axis (rho ~ 0); non-cyclic
ProbeRing arc_counts(const ManipulatorGeometry& g, double z, double r, bool strict) {
    const int m = 12;
    ProbeRing out;
    std::array<int, 12> c{};
    for (int k = 0; k < m; ++k) {
        const double beta = -kPi / 2 + 0.15 + (kPi - 0.3) * k / (m - 1);
        const IkCount ic = count_ik_flagged(g, std::abs(r * std::cos(beta)), z + r * std::sin(beta));
        if (ic.degenerate_continuum || (strict && ic.near_singular) || (ic.count % 2) != 0)
            return out;
        c[k] = ic.count;
    }
    out.usable = true;
    int vals[5], nvals = 0;
    for (int k = 0; k < m; ++k) {
        if (k + 1 < m && c[k] != c[k + 1]) ++out.transitions;
        bool seen = false;
        for (int j = 0; j < nvals; ++j) seen = seen || vals[j] == c[k];
        if (!seen && nvals < 5) vals[nvals++] = c[k];
    }
    out.distinct = nvals;
    return out;
}

// ---------------------------------------------------------------------------
// cusp certification: Newton on {P, P', P''} in (R, Z, t) on the unit-scaled
// geometry; candidates that do not converge to a genuine triple root nearby
// are dropped.
// ---------------------------------------------------------------------------

struct CuspSolve {
    bool ok = false;
    double R = 0, Z = 0, t = 0;
    std::array<double, 3> resid{};
};

std::array<double, 3> triple_residuals(const QuarticPolynomial& P, double t) {
    double cmax = 0;
    for (double c : P.c) cmax = std::max(cmax, std::abs(c));
    const double T = std::max(1.0, std::abs(t));
    const double T2 = T * T;
    if (cmax == 0) cmax = 1;
    return {std::abs(P.eval(t)) / (cmax * T2 * T2), std::abs(P.deriv(t)) / (4 * cmax * T2 * T),
            std::abs(P.deriv2(t)) / (12 * cmax * T2)};
}

CuspSolve solve_cusp_system(const ManipulatorGeometry& gs, double R0, double Z0, double t0) {
    CuspSolve out;
    double R = std::max(R0, 1e-12), Z = std::max(Z0, 0.0), t = t0;
    for (int it = 0; it < 80; ++it) {
        QuarticPolynomial P;
        try {
            P = ik_polynomial(gs, std::sqrt(R), std::sqrt(Z));
        } catch (const Error&) {
            return out;
        }
        const auto dcR = P.dc_dR(), dcZ = P.dc_dZ();
        auto horner = [&](const std::array<double, 5>& c, int order) {
            // derivative of order `order` evaluated at t
            double acc = 0;
            for (int k = 4; k >= order; --k) {
                double coef = c[k];
                for (int q = 0; q < order; ++q) coef *= (k - q);
                acc = acc * t + coef;
            }
            return acc;
        };
        const double f0 = P.eval(t), f1 = P.deriv(t), f2 = P.deriv2(t);
        const double f3 = 24.0 * P.c[4] * t + 6.0 * P.c[3];
        const auto res = triple_residuals(P, t);
        if (std::max({res[0], res[1], res[2]}) < 1e-12) {
            // demand a genuine triple root: a quadruple root (even quartics at
            // t = 0, e.g. r2 = 0 geometries) is a coincident fold pair, not a cusp
            double cmax = 0;
            for (double c : P.c) cmax = std::max(cmax, std::abs(c));
            if (cmax == 0) cmax = 1;
            if (std::abs(f3) / (24.0 * cmax * std::max(1.0, std::abs(t))) < 1e-4) return out;
            out.ok = true;
            out.R = R;
            out.Z = Z;
            out.t = t;
            out.resid = res;
            return out;
        }
        Eigen::Matrix3d J;
        J << horner(dcR, 0), horner(dcZ, 0), f1,
             horner(dcR, 1), horner(dcZ, 1), f2,
             horner(dcR, 2), horner(dcZ, 2), f3;
        Eigen::Vector3d Fv(f0, f1, f2);
        Eigen::Vector3d dx = J.fullPivLu().solve(Fv);
        dx[0] = std::max(-0.2, std::min(0.2, dx[0]));
        dx[1] = std::max(-0.2, std::min(0.2, dx[1]));
        dx[2] = std::max(-0.5, std::min(0.5, dx[2]));
        R = std::max(1e-14, R - dx[0]);
        Z = std::max(0.0, Z - dx[1]);
        t -= dx[2];
    }
    return out;
}

ManipulatorGeometry unit_scaled(const ManipulatorGeometry& g) {
    const double L = g.length_scale();
    return make_geometry(g.d2 / L, g.d3 / L, g.r2 / L, g.r3 / L, g.d4 / L);
}

std::vector<double> node_algebraic_residuals(const ManipulatorGeometry& gs, double R, double Z,
                                             double t1) {
    QuarticPolynomial P = ik_polynomial(gs, std::sqrt(std::max(0.0, R)),
                                        std::sqrt(std::max(0.0, Z)));
    double cmax = 0;
    for (double c : P.c) cmax = std::max(cmax, std::abs(c));
    if (cmax == 0) cmax = 1;
    const double T = std::max(1.0, std::abs(t1)), T2 = T * T;
    // deflate the double root at t1 twice (synthetic division, remainders dropped)
    std::array<double, 4> q1{};
    for (int k = 4; k >= 1; --k) q1[k - 1] = P.c[k] + (k < 4 ? q1[k] * t1 : 0.0);
    std::array<double, 3> q2{};
    for (int k = 3; k >= 1; --k) q2[k - 1] = q1[k] + (k < 3 ? q2[k] * t1 : 0.0);
    const double disc = q2[1] * q2[1] - 4.0 * q2[2] * q2[0];
    double qmax = 0;
    for (double c : q2) qmax = std::max(qmax, std::abs(c));
    if (qmax == 0) qmax = 1;
    return {std::abs(P.eval(t1)) / (cmax * T2 * T2), std::abs(P.deriv(t1)) / (4 * cmax * T2 * T),
            std::abs(disc) / (qmax * qmax)};
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<TorusCurve> joint_space_singular_curves(const ManipulatorGeometry& g, int grid_n) {
    bool warn = false;
    return trace_all(g, grid_n, warn, nullptr);
}

std::vector<PlanarCurve> workspace_singular_image(const ManipulatorGeometry& g,
                                                  const std::vector<TorusCurve>& curves) {
    const double L = g.length_scale();
    std::vector<PlanarCurve> out;
    out.reserve(curves.size());
    for (size_t i = 0; i < curves.size(); ++i) {
        PlanarCurve pc;
        pc.preimage = static_cast<int>(i);
        pc.vertices.reserve(curves[i].vertices.size());
        for (const auto& v : curves[i].vertices)
            pc.vertices.push_back(cross_section_coords(g, v[0], v[1]));
        pc.degenerate_to_point = curve_diameter(pc) < 1e-7 * L;
        out.push_back(std::move(pc));
    }
    return out;
}

SingularityAnalysis analyze_singularities(const ManipulatorGeometry& g,
                                          const SingularityConfig& cfg) {
    const double L = g.length_scale();
    SingularityAnalysis an;

    std::vector<CurveMeta> meta;
    an.torus_curves = trace_all(g, cfg.grid_n, an.resolution_warning, &meta);
    if (an.resolution_warning)
        an.warnings.push_back("under-resolved cell pattern: factor re-traced at doubled grid");
    an.planar_curves = workspace_singular_image(g, an.torus_curves);
    for (auto& pc : an.planar_curves)
        pc.degenerate_to_point = curve_diameter(pc) < cfg.eps_pt * L;

    const size_t nc = an.planar_curves.size();

    // image fold structure: a curve whose image is covered twice annihilates
    // two solution pairs at once; its self-overlaps are chart artifacts
    for (size_t i = 0; i < nc; ++i) {
        auto& pc = an.planar_curves[i];
        if (pc.degenerate_to_point) continue;
        if (meta[i].is_line) {
            pc.folded_self_cover = meta[i].line.folded;
        } else {
            pc.folded_self_cover = sampled_self_cover(pc, 1e-7 * L);
        }
        if (pc.folded_self_cover) {
            std::ostringstream os;
            os << "curve " << i << ": image traversed twice (fold); self-intersections skipped";
            an.warnings.push_back(os.str());
        }
    }

    std::vector<double> med(nc, 0.0);
    for (size_t i = 0; i < nc; ++i)
        if (!an.planar_curves[i].degenerate_to_point) med[i] = median_segment_length(an.planar_curves[i]);

    // coincident image pairs (distinct torus curves sharing one image set)
    std::vector<std::vector<char>> coincident(nc, std::vector<char>(nc, 0));
    for (size_t i = 0; i < nc; ++i)
        for (size_t j = i + 1; j < nc; ++j) {
            const auto& A = an.planar_curves[i];
            const auto& B = an.planar_curves[j];
            if (A.degenerate_to_point || B.degenerate_to_point) continue;
            if (curves_coincide(A, B, 1e-6 * L) && curves_coincide(B, A, 1e-6 * L)) {
                coincident[i][j] = coincident[j][i] = 1;
                std::ostringstream os;
                os << "curves " << i << " and " << j
                   << ": coincident images; pairwise intersection skipped";
                an.warnings.push_back(os.str());
            }
        }

    // ---- node candidates from segment intersections ----
    std::vector<NodeCand> cands;
    struct Seg {
        size_t curve, idx;
    };
    std::vector<Seg> segs;
    double ext = 0;
    for (size_t i = 0; i < nc; ++i) {
        const auto& pc = an.planar_curves[i];
        if (pc.degenerate_to_point) continue;
        for (const auto& v : pc.vertices) ext = std::max({ext, v.rho, std::abs(v.z)});
        for (size_t k = 0; k < pc.vertices.size(); ++k) segs.push_back({i, k});
    }
    if (ext <= 0) ext = L;
    const double cell = std::max(ext / 256.0, 1e-12 * L);
    std::unordered_map<int64_t, std::vector<int>> hash;
    auto seg_pts = [&](const Seg& s, CrossSection& a, CrossSection& b) {
        const auto& pc = an.planar_curves[s.curve];
        a = pc.vertices[s.idx];
        b = pc.vertices[(s.idx + 1) % pc.vertices.size()];
    };
    for (size_t si = 0; si < segs.size(); ++si) {
        CrossSection a, b;
        seg_pts(segs[si], a, b);
        const int x0 = static_cast<int>(std::floor(std::min(a.rho, b.rho) / cell));
        const int x1 = static_cast<int>(std::floor(std::max(a.rho, b.rho) / cell));
        const int y0 = static_cast<int>(std::floor(std::min(a.z, b.z) / cell));
        const int y1 = static_cast<int>(std::floor(std::max(a.z, b.z) / cell));
        for (int x = x0; x <= x1; ++x)
            for (int y = y0; y <= y1; ++y)
                hash[static_cast<int64_t>(x) * 2000003 + y].push_back(static_cast<int>(si));
    }
    std::unordered_set<uint64_t> tested;
    for (size_t si = 0; si < segs.size(); ++si) {
        CrossSection a1, a2;
        seg_pts(segs[si], a1, a2);
        const int x0 = static_cast<int>(std::floor(std::min(a1.rho, a2.rho) / cell));
        const int x1 = static_cast<int>(std::floor(std::max(a1.rho, a2.rho) / cell));
        const int y0 = static_cast<int>(std::floor(std::min(a1.z, a2.z) / cell));
        const int y1 = static_cast<int>(std::floor(std::max(a1.z, a2.z) / cell));
        for (int x = x0; x <= x1; ++x)
            for (int y = y0; y <= y1; ++y) {
                auto it = hash.find(static_cast<int64_t>(x) * 2000003 + y);
                if (it == hash.end()) continue;
                for (int sjv : it->second) {
                    const size_t sj = static_cast<size_t>(sjv);
                    if (sj <= si) continue;
                    if (!tested.insert((static_cast<uint64_t>(si) << 32) | sj).second) continue;
                    const Seg& s1 = segs[si];
                    const Seg& s2 = segs[sj];
                    const auto& pcu = an.planar_curves[s1.curve];
                    if (s1.curve == s2.curve) {
                        if (pcu.folded_self_cover) continue;
                        const size_t m = pcu.vertices.size();
                        const size_t di = (s2.idx + m - s1.idx) % m;
                        if (di <= 2 || m - di <= 2) continue;  // neighbouring segments
                    } else if (coincident[s1.curve][s2.curve]) {
                        continue;
                    }
                    CrossSection b1, b2;
                    seg_pts(s2, b1, b2);
                    const double d1x = a2.rho - a1.rho, d1z = a2.z - a1.z;
                    const double d2x = b2.rho - b1.rho, d2z = b2.z - b1.z;
                    const double den = d1x * d2z - d1z * d2x;
                    const double l1 = std::hypot(d1x, d1z), l2 = std::hypot(d2x, d2z);
                    if (l1 < 1e-14 * L || l2 < 1e-14 * L) continue;
                    if (std::abs(den) < 1e-10 * l1 * l2) continue;  // parallel
                    const double ex = b1.rho - a1.rho, ez = b1.z - a1.z;
                    const double s = (ex * d2z - ez * d2x) / den;
                    const double u = (ex * d1z - ez * d1x) / den;
                    // tolerant window: a trace that happens to start exactly at
                    // its own self-crossing puts the crossing at a segment
                    // endpoint, where roundoff pushes s or u a hair past 1
                    const double ptol = 1e-9;
                    if (s < -ptol || s > 1 + ptol || u < -ptol || u > 1 + ptol) continue;
                    NodeCand nc2;
                    nc2.rho = a1.rho + s * d1x;
                    nc2.z = a1.z + s * d1z;
                    const auto& ta = an.torus_curves[an.planar_curves[s1.curve].preimage];
                    const auto& tb = an.torus_curves[an.planar_curves[s2.curve].preimage];
                    nc2.pa = lerp_torus(ta.vertices[s1.idx],
                                        ta.vertices[(s1.idx + 1) % ta.vertices.size()], s);
                    nc2.pb = lerp_torus(tb.vertices[s2.idx],
                                        tb.vertices[(s2.idx + 1) % tb.vertices.size()], u);
                    nc2.dir_a = {d1x / l1, d1z / l1};
                    nc2.dir_b = {d2x / l2, d2z / l2};
                    nc2.has_dirs = true;
                    nc2.curve_a = static_cast<int>(s1.curve);
                    nc2.curve_b = static_cast<int>(s2.curve);
                    nc2.idx_a = s1.idx;
                    nc2.idx_b = s2.idx;
                    cands.push_back(nc2);
                }
            }
    }

    // ---- candidates from degenerate point-images lying on another curve ----
    struct PointImage {
        size_t curve;
        CrossSection at;
    };
    std::vector<PointImage> points;
    for (size_t i = 0; i < nc; ++i)
        if (an.planar_curves[i].degenerate_to_point)
            points.push_back({i, an.planar_curves[i].vertices.front()});

    for (const auto& pi : points) {
        for (size_t j = 0; j < nc; ++j) {
            if (j == pi.curve || an.planar_curves[j].degenerate_to_point) continue;
            if (dist_point_curve(pi.at.rho, pi.at.z, an.planar_curves[j]) < 3.0 * med[j]) {
                // nearest segment as the non-degenerate branch
                const auto& pc = an.planar_curves[j];
                size_t bestk = 0;
                double best = 1e300;
                for (size_t k = 0; k < pc.vertices.size(); ++k) {
                    const double d = dist_point_segment(pi.at.rho, pi.at.z, pc.vertices[k],
                                                        pc.vertices[(k + 1) % pc.vertices.size()]);
                    if (d < best) {
                        best = d;
                        bestk = k;
                    }
                }
                NodeCand nc2;
                nc2.rho = pi.at.rho;
                nc2.z = pi.at.z;
                const auto& tb = an.torus_curves[pc.preimage];
                nc2.pb = lerp_torus(tb.vertices[bestk], tb.vertices[(bestk + 1) % tb.vertices.size()],
                                    0.5);
                const auto& tl = an.torus_curves[an.planar_curves[pi.curve].preimage];
                nc2.pa = tl.vertices[tl.vertices.size() / 3];
                nc2.has_dirs = false;
                nc2.from_point_image = true;
                nc2.curve_a = static_cast<int>(pi.curve);
                nc2.curve_b = static_cast<int>(j);
                nc2.idx_b = bestk;
                cands.push_back(nc2);
            }
        }
        for (const auto& pj : points) {
            if (pj.curve <= pi.curve) continue;
            if (std::hypot(pj.at.rho - pi.at.rho, pj.at.z - pi.at.z) < cfg.eps_pt * L) {
                NodeCand nc2;
                nc2.rho = pi.at.rho;
                nc2.z = pi.at.z;
                const auto& ta = an.torus_curves[an.planar_curves[pi.curve].preimage];
                const auto& tb = an.torus_curves[an.planar_curves[pj.curve].preimage];
                nc2.pa = ta.vertices[ta.vertices.size() / 3];
                nc2.pb = tb.vertices[tb.vertices.size() / 3];
                nc2.has_dirs = false;
                nc2.from_point_image = true;
                cands.push_back(nc2);
            }
        }
    }

    // ---- refine, deduplicate, certify ----
    struct Cluster {
        double rho, z;
        std::vector<std::array<double, 2>> preimages;
        std::array<double, 3> resid{1, 1, 1};
        double cross_angle = -1;   // between polyline segment directions, if known
        double branch_angle = -1;  // between analytic branch velocities at the refined point
        bool shared_theta3 = false;
        double t_param = 0;
    };
    std::vector<Cluster> clusters;
    int dropped_tangent = 0;

    // Folded curves revisit the same image arc twice; a seed interpolated
    // across the turning point can make the two-branch refinement collapse
    // onto a single branch.  Re-anchor the seed on the other pass of the same
    // curve through the crossing.
    auto other_pass_seed = [&](int curve, std::size_t idx, double rho, double z,
                               std::array<double, 2>& seed) {
        const auto& pc = an.planar_curves[static_cast<std::size_t>(curve)];
        const auto& tc = an.torus_curves[pc.preimage];
        const std::size_t m = pc.vertices.size();
        if (m < 16) return false;
        const std::size_t guard = std::max<std::size_t>(4, m / 64);
        std::size_t bestk = m;
        double best = 1e300;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t dk = (k + m - idx) % m;
            if (dk <= guard || m - dk <= guard) continue;
            const double d = std::hypot(pc.vertices[k].rho - rho, pc.vertices[k].z - z);
            if (d < best) {
                best = d;
                bestk = k;
            }
        }
        if (bestk == m) return false;
        seed = tc.vertices[bestk];
        return true;
    };

    for (const auto& cand : cands) {
        RefinedNode rn = refine_node(g, cand);
        bool collapsed = rn.ok && torus_dist(rn.a, rn.b) < 1e-5;
        if ((!rn.ok || collapsed) && cand.curve_a >= 0 && cand.curve_b >= 0 &&
            cand.curve_a != cand.curve_b) {
            std::array<double, 2> seed;
            NodeCand retry = cand;
            if (other_pass_seed(cand.curve_b, cand.idx_b, cand.rho, cand.z, seed)) {
                retry.pb = seed;
                const RefinedNode rn2 = refine_node(g, retry);
                if (rn2.ok && torus_dist(rn2.a, rn2.b) >= 1e-5) {
                    rn = rn2;
                    collapsed = false;
                }
            }
            if (!rn.ok || collapsed) {
                retry = cand;
                if (other_pass_seed(cand.curve_a, cand.idx_a, cand.rho, cand.z, seed)) {
                    retry.pa = seed;
                    const RefinedNode rn2 = refine_node(g, retry);
                    if (rn2.ok && torus_dist(rn2.a, rn2.b) >= 1e-5) {
                        rn = rn2;
                        collapsed = false;
                    }
                }
            }
        }
        if (!rn.ok) {
            std::ostringstream os;
            os << "node candidate near (" << cand.rho << ", " << cand.z
               << ") dropped: branch refinement failed";
            an.warnings.push_back(os.str());
            continue;
        }
        if (collapsed) continue;  // tangential self-touch
        Cluster* home = nullptr;
        for (auto& cl : clusters)
            if (std::hypot(cl.rho - rn.rho, cl.z - rn.z) < 1e-5 * L) {
                home = &cl;
                break;
            }
        if (!home) {
            clusters.push_back({});
            home = &clusters.back();
            home->rho = rn.rho;
            home->z = rn.z;
            home->resid = rn.resid;
            home->shared_theta3 = std::abs(wrap_delta(rn.a[1] - rn.b[1])) < 1e-6;
            home->t_param = std::tan(0.5 * rn.a[1]);
        }
        for (const auto& p : {rn.a, rn.b}) {
            bool seen = false;
            for (const auto& q : home->preimages)
                if (torus_dist(p, q) < 1e-6) seen = true;
            // keep the two branch configurations; a point-image contributes a
            // whole continuum of singular preimages and must not pad the list
            if (!seen && home->preimages.size() < 2) home->preimages.push_back(p);
        }
        if (cand.has_dirs) {
            const double dot = cand.dir_a[0] * cand.dir_b[0] + cand.dir_a[1] * cand.dir_b[1];
            const double ang = std::acos(std::min(1.0, std::max(-1.0, std::abs(dot))));
            home->cross_angle = std::max(home->cross_angle, ang);
        }
        if (rn.va_ok && rn.vb_ok) {
            const double na = std::hypot(rn.va[0], rn.va[1]);
            const double nb = std::hypot(rn.vb[0], rn.vb[1]);
            const double dot = (rn.va[0] * rn.vb[0] + rn.va[1] * rn.vb[1]) / (na * nb);
            const double ang = std::acos(std::min(1.0, std::abs(dot)));
            home->branch_angle = std::max(home->branch_angle, ang);
        }
    }

    for (const auto& cl : clusters) {
        const bool on_axis = cl.rho < std::max(cfg.eps_axis * L, 1e-9 * L);
        // Two curves osculating along an arc can stay closer together than any
        // probe radius, so no ring ladder separates them from a node.  The
        // analytic branch velocities at the refined point settle it: a node is
        // a transversal crossing.
        if (cl.branch_angle >= 0 && cl.branch_angle < cfg.min_cross_angle) {
            ++dropped_tangent;
            continue;
        }
        // A genuine transversal crossing keeps a four-sector pattern down to
        // arbitrarily small probe radii.  Fold-curve artifacts (pairs of
        // preimages with identical images on a folded curve) can fake the
        // pattern at coarse radii, while the probe circle still spans some
        // nearby second curve, but collapse to two transitions once the radius
        // drops below the separation.  So the verdict comes from the two
        // smallest usable rungs of the radius ladder, and a single usable rung
        // is never enough evidence.
        auto ladder = [&](bool strict_probes) {
            std::vector<int> rung_trans;
            for (double r = 1e-3 * L; r > 1e-6 * L; r *= 0.4) {
                const ProbeRing ring = on_axis ? arc_counts(g, cl.z, r, strict_probes)
                                               : ring_counts(g, cl.rho, cl.z, r, strict_probes);
                if (ring.usable) rung_trans.push_back(ring.transitions);
            }
            return rung_trans;
        };
        std::vector<int> rung_trans = ladder(true);
        if (rung_trans.size() < 2) {
            // Against a degenerate point-image every probe carries the
            // near-singular flag and the strict ladder starves.  Counting
            // still works there, so retry leniently -- but only for clusters
            // whose image branches cross transversally; near-parallel
            // osculation artifacts must not get a second chance.
            const bool transversal = cl.branch_angle >= cfg.min_cross_angle ||
                                     (cl.branch_angle < 0 &&
                                      (cl.cross_angle < 0 || cl.cross_angle >= cfg.min_cross_angle));
            if (transversal) rung_trans = ladder(false);
        }
        bool is_node = false;
        if (rung_trans.size() >= 2) {
            const int t0 = rung_trans.back();
            const int t1 = rung_trans[rung_trans.size() - 2];
            is_node = on_axis ? t0 >= 3 && t1 >= 3 : t0 == 4 && t1 == 4;
        }
        if (!is_node) {
            if (!rung_trans.empty()) ++dropped_tangent;
            continue;
        }
        CriticalPoint pt;
        pt.kind = CriticalKind::node;
        pt.location = {cl.rho, cl.z};
        pt.preimages = cl.preimages;
        pt.residuals = {cl.resid[0], cl.resid[1], cl.resid[2]};
        pt.on_axis = on_axis;
        pt.shared_theta3 = cl.shared_theta3;
        pt.t_param = cl.t_param;
        pt.transition_degenerate = cl.branch_angle >= 0
                                       ? cl.branch_angle < cfg.min_cross_angle
                                       : cl.cross_angle >= 0 && cl.cross_angle < cfg.min_cross_angle;
        if (!cl.shared_theta3 && !param_zero(g.d2, L)) {
            const ManipulatorGeometry gs = unit_scaled(g);
            pt.algebraic_residuals = node_algebraic_residuals(
                gs, (cl.rho / L) * (cl.rho / L), (cl.z / L) * (cl.z / L), cl.t_param);
        }
        an.nodes.push_back(std::move(pt));
    }
    if (dropped_tangent > 0) {
        std::ostringstream os;
        os << dropped_tangent << " intersection candidate(s) dropped: no transversal "
           << "solution-count crossing";
        an.warnings.push_back(os.str());
    }

    // ---- isolated degenerate images ----
    for (const auto& pi : points) {
        bool taken = false;
        for (const auto& nd : an.nodes)
            if (std::hypot(nd.location.rho - pi.at.rho, nd.location.z - pi.at.z) < 1e-5 * L)
                taken = true;
        if (taken) continue;
        bool merged = false;
        for (auto& iso : an.isolated_points)
            if (std::hypot(iso.location.rho - pi.at.rho, iso.location.z - pi.at.z) < cfg.eps_pt * L) {
                const auto& tl = an.torus_curves[an.planar_curves[pi.curve].preimage];
                iso.preimages.push_back(tl.vertices[tl.vertices.size() / 3]);
                merged = true;
            }
        if (merged) continue;
        // Near an isolated degenerate image the IK quartic is a near-perfect
        // square over a whole neighbourhood, so near-singular flags fire on
        // every probe; only continuum/on-boundary probes disqualify a ring.
        int trans = -1;
        for (double r = 1e-3 * L; r > 1e-6 * L; r *= 0.4) {
            const ProbeRing ring = pi.at.rho < 1e-9 * L
                                       ? arc_counts(g, pi.at.z, r, false)
                                       : ring_counts(g, pi.at.rho, pi.at.z, r, false);
            if (!ring.usable) continue;
            trans = ring.transitions;
            break;
        }
        if (trans != 0) {
            std::ostringstream os;
            os << "degenerate image at (" << pi.at.rho << ", " << pi.at.z
               << ") touches boundary structure; not isolated, not a node";
            an.warnings.push_back(os.str());
            continue;
        }
        CriticalPoint pt;
        pt.kind = CriticalKind::isolated;
        pt.location = pi.at;
        const auto& tl = an.torus_curves[an.planar_curves[pi.curve].preimage];
        const auto v = tl.vertices[tl.vertices.size() / 3];
        pt.preimages = {v};
        pt.residuals = {std::abs(jacobian_det(g, v[0], v[1])) / (L * L * L)};
        pt.on_axis = pi.at.rho < cfg.eps_axis * L;
        pt.t_param = std::tan(0.5 * v[1]);
        an.isolated_points.push_back(std::move(pt));
    }

    // ---- cusps: image-direction reversals, certified as triple roots ----
    const bool quartic_path = !param_zero(g.d2, L);
    int fold_artifacts = 0;
    std::vector<CriticalPoint> cusps;
    const ManipulatorGeometry gs = quartic_path ? unit_scaled(g) : g;
    for (size_t i = 0; i < nc; ++i) {
        const auto& pc = an.planar_curves[i];
        if (pc.degenerate_to_point) continue;
        const size_t m = pc.vertices.size();
        for (size_t k = 0; k < m; ++k) {
            const auto& p0 = pc.vertices[(k + m - 1) % m];
            const auto& p1 = pc.vertices[k];
            const auto& p2 = pc.vertices[(k + 1) % m];
            const double ux = p1.rho - p0.rho, uz = p1.z - p0.z;
            const double vx = p2.rho - p1.rho, vz = p2.z - p1.z;
            const double lu = std::hypot(ux, uz), lv = std::hypot(vx, vz);
            if (lu < 1e-14 * L || lv < 1e-14 * L) continue;
            if (ux * vx + uz * vz > -0.6 * lu * lv) continue;  // no reversal here
            if (!quartic_path) {
                ++fold_artifacts;
                continue;
            }
            const auto& tv = an.torus_curves[pc.preimage].vertices[k];
            const double t0 = std::tan(0.5 * tv[1]);
            CuspSolve cs = solve_cusp_system(gs, (p1.rho / L) * (p1.rho / L),
                                             (p1.z / L) * (p1.z / L),
                                             std::max(-1e6, std::min(1e6, t0)));
            if (!cs.ok) {
                ++fold_artifacts;
                continue;
            }
            const double rho_c = std::sqrt(cs.R) * L;
            const double z_c = (p1.z < 0 ? -1 : 1) * std::sqrt(cs.Z) * L;
            if (std::hypot(rho_c - p1.rho, z_c - p1.z) > 0.05 * L) {
                ++fold_artifacts;  // converged somewhere else: not this feature
                continue;
            }
            CriticalPoint pt;
            pt.kind = CriticalKind::cusp;
            pt.location = {rho_c, z_c};
            pt.residuals = {cs.resid[0], cs.resid[1], cs.resid[2]};
            pt.t_param = cs.t;
            pt.on_axis = rho_c < cfg.eps_axis * L;
            const double theta3 = 2.0 * std::atan(cs.t);
            double theta2 = tv[0];
            {
                // pull theta2 back onto the singular configuration
                const auto sols = solve_ik_section(g, rho_c, z_c);
                double best = 1e300;
                for (const auto& s : sols.solutions) {
                    const double d = std::abs(wrap_delta(s.theta3 - theta3));
                    if (d < best) {
                        best = d;
                        theta2 = s.theta2;
                    }
                }
            }
            pt.preimages = {{normalize_angle(theta2), normalize_angle(theta3)}};
            cusps.push_back(std::move(pt));
        }
    }
    std::sort(cusps.begin(), cusps.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        return std::make_pair(a.location.rho, a.location.z) <
               std::make_pair(b.location.rho, b.location.z);
    });
    for (const auto& c : cusps) {
        bool dup = false;
        for (const auto& kept : an.cusps)
            if (std::hypot(kept.location.rho - c.location.rho, kept.location.z - c.location.z) <
                cfg.eps_pt * L * 10)
                dup = true;
        if (!dup) an.cusps.push_back(c);
    }
    if (fold_artifacts > 0) {
        std::ostringstream os;
        os << fold_artifacts << " direction-reversal candidate(s) without a certified triple root";
        an.warnings.push_back(os.str());
    }

    auto by_location = [](const CriticalPoint& a, const CriticalPoint& b) {
        return std::make_pair(a.location.rho, a.location.z) <
               std::make_pair(b.location.rho, b.location.z);
    };
    std::sort(an.nodes.begin(), an.nodes.end(), by_location);
    std::sort(an.isolated_points.begin(), an.isolated_points.end(), by_location);
    return an;
}

std::vector<CriticalPoint> detect_cusps(const ManipulatorGeometry& g) {
    return analyze_singularities(g).cusps;
}

std::vector<CriticalPoint> detect_nodes(const ManipulatorGeometry& g) {
    return analyze_singularities(g).nodes;
}

std::vector<double> certify_critical_point(const ManipulatorGeometry& g,
                                           const CriticalPoint& point, CriticalKind kind) {
    const double L = g.length_scale();
    const double L3 = L * L * L;
    const ManipulatorGeometry gs = unit_scaled(g);
    const double rho_s = point.location.rho / L;
    const double z_s = std::abs(point.location.z) / L;
    if (kind == CriticalKind::cusp) {
        try {
            const QuarticPolynomial P = ik_polynomial(gs, rho_s, z_s);
            const auto r = triple_residuals(P, point.t_param);
            return {r[0], r[1], r[2]};
        } catch (const Error&) {
            return {1.0, 1.0, 1.0};  // reduced quadratic path never has triple roots
        }
    }
    if (kind == CriticalKind::node) {
        double r0 = -1.0, r1 = -1.0, third = 1.0;
        try {
            const auto alg = node_algebraic_residuals(gs, rho_s * rho_s, z_s * z_s, point.t_param);
            r0 = alg[0];
            r1 = alg[1];
            third = alg[2];
        } catch (const Error&) {
            // no full-degree polynomial on the reduced path
        }
        // a second double root is one witness; the other is a second distinct
        // singular configuration with the same image (branches sharing theta3
        // leave the deflated quadratic with two simple roots)
        if (point.preimages.size() >= 2) {
            double best = 1e300;
            double bdet0 = 1.0, bdet1 = 1.0;
            for (size_t i = 0; i < point.preimages.size(); ++i)
                for (size_t j = i + 1; j < point.preimages.size(); ++j) {
                    const auto& a = point.preimages[i];
                    const auto& b = point.preimages[j];
                    if (torus_dist(a, b) < 1e-8) continue;
                    const CrossSection ca = cross_section_coords(g, a[0], a[1]);
                    const CrossSection cb = cross_section_coords(g, b[0], b[1]);
                    const double da = std::abs(jacobian_det(g, a[0], a[1])) / L3;
                    const double db = std::abs(jacobian_det(g, b[0], b[1])) / L3;
                    const double mm = std::hypot(ca.rho - cb.rho, ca.z - cb.z) / L;
                    const double worst = std::max({da, db, mm});
                    if (worst < best) {
                        best = worst;
                        bdet0 = da;
                        bdet1 = db;
                    }
                }
            if (best < third) third = best;
            if (r0 < 0) {
                r0 = bdet0;
                r1 = bdet1;
            }
        }
        if (r0 < 0) r0 = r1 = 1.0;
        return {r0, r1, third};
    }
    // isolated: |det| at the stored preimage, scale-free
    if (!point.preimages.empty()) {
        const auto& v = point.preimages.front();
        return {std::abs(jacobian_det(g, v[0], v[1])) / L3};
    }
    return {};
}

} // namespace ws3r
