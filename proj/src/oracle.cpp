#include "ws3r/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace ws3r {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double torus_diff(double a, double b) { return std::remainder(a - b, kTwoPi); }

struct NewtonOutcome {
    bool converged = false;
    double th2 = 0, th3 = 0;
};

// axis targets (rho ~ 0): solve (px, py) = 0 instead — the radial residual
// rho^2 only touches zero there, so sign-bracketing and Newton both degrade
NewtonOutcome newton_axis_root(const ManipulatorGeometry& g, double th2, double th3,
                               int iters) {
    NewtonOutcome out;
    const double L = g.length_scale();
    const double tol = 1e-11 * L;
    for (int it = 0; it < iters; ++it) {
        const double c2 = std::cos(th2), s2 = std::sin(th2);
        const double c3 = std::cos(th3), s3 = std::sin(th3);
        const double F = g.d3 + g.d4 * c3;
        const double px = g.d2 + c2 * F + g.r3 * s2;
        const double py = g.d4 * s3 + g.r2;
        if (std::abs(px) < tol && std::abs(py) < tol) {
            out.converged = true;
            out.th2 = normalize_angle(th2);
            out.th3 = normalize_angle(th3);
            return out;
        }
        const double j00 = -s2 * F + g.r3 * c2;   // dpx/dth2
        const double j01 = -c2 * g.d4 * s3;       // dpx/dth3
        const double j10 = 0.0;
        const double j11 = g.d4 * c3;             // dpy/dth3
        const double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-14 * L * L) break;
        th2 -= (px * j11 - py * j01) / det;
        th3 -= (j00 * py - j10 * px) / det;
    }
    return out;
}

// damped Newton on f = (px^2+py^2 - R, pz - z); analytic Jacobian
NewtonOutcome newton_root(const ManipulatorGeometry& g, double R, double z,
                          double th2, double th3, int iters, double step_cap) {
    NewtonOutcome out;
    const double L = g.length_scale();
    const double tol1 = 1e-10 * std::max(R, L * L);
    const double tol2 = 1e-10 * L;

    auto resid = [&](double a2, double a3, double& f1, double& f2) {
        Vec3 p = frame1_position(g, a2, a3);
        f1 = p.x * p.x + p.y * p.y - R;
        f2 = p.z - z;
    };

    double f1, f2;
    resid(th2, th3, f1, f2);
    for (int it = 0; it < iters; ++it) {
        if (std::abs(f1) < tol1 && std::abs(f2) < tol2) {
            out.converged = true;
            out.th2 = normalize_angle(th2);
            out.th3 = normalize_angle(th3);
            return out;
        }
        const double c2 = std::cos(th2), s2 = std::sin(th2);
        const double c3 = std::cos(th3), s3 = std::sin(th3);
        const double F = g.d3 + g.d4 * c3;
        const double Fp = -g.d4 * s3;
        const double px = g.d2 + c2 * F + g.r3 * s2;
        const double py = g.d4 * s3 + g.r2;
        const double dpx2 = -s2 * F + g.r3 * c2;
        const double dpx3 = c2 * Fp;
        const double dpy3 = g.d4 * c3;
        const double dpz2 = -g.r3 * s2 - F * c2;
        const double dpz3 = -Fp * s2;
        double j00 = 2.0 * px * dpx2;
        double j01 = 2.0 * (px * dpx3 + py * dpy3);
        double j10 = dpz2;
        double j11 = dpz3;
        double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-300) break;
        double d2s = -(f1 * j11 - f2 * j01) / det;
        double d3s = -(j00 * f2 - j10 * f1) / det;
        double norm = std::hypot(d2s, d3s);
        if (norm > step_cap) {
            d2s *= step_cap / norm;
            d3s *= step_cap / norm;
        }
        // backtracking on the scaled residual norm
        double base = (f1 / tol1) * (f1 / tol1) + (f2 / tol2) * (f2 / tol2);
        double lambda = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 10; ++bt) {
            double n2 = th2 + lambda * d2s, n3 = th3 + lambda * d3s;
            double g1, g2;
            resid(n2, n3, g1, g2);
            double val = (g1 / tol1) * (g1 / tol1) + (g2 / tol2) * (g2 / tol2);
            if (val < base) {
                th2 = n2;
                th3 = n3;
                f1 = g1;
                f2 = g2;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;  // stalled (likely a local minimum, not a root)
    }
    if (std::abs(f1) < tol1 && std::abs(f2) < tol2) {
        out.converged = true;
        out.th2 = normalize_angle(th2);
        out.th3 = normalize_angle(th3);
    }
    return out;
}

OracleCount scan_grid(const ManipulatorGeometry& g, double rho, double z, int n,
                      int refine_iters, double dedupe_tol) {
    OracleCount result;
    result.grid_used = n;
    const double R = rho * rho;
    const double h = kTwoPi / n;
    const bool axis_mode = rho < 1e-6 * g.length_scale();

    std::vector<double> c2(static_cast<std::size_t>(n)), s2(static_cast<std::size_t>(n));
    std::vector<double> F(static_cast<std::size_t>(n)), py2(static_cast<std::size_t>(n));
    std::vector<double> s3tab(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double th = -kPi + h * k;
        c2[static_cast<std::size_t>(k)] = std::cos(th);
        s2[static_cast<std::size_t>(k)] = std::sin(th);
        s3tab[static_cast<std::size_t>(k)] = std::sin(th);
        const double py = g.d4 * std::sin(th) + g.r2;
        F[static_cast<std::size_t>(k)] = g.d3 + g.d4 * std::cos(th);
        py2[static_cast<std::size_t>(k)] = py * py;
    }

    auto fill_row = [&](int i, std::vector<double>& f1, std::vector<double>& f2) {
        const double ci = c2[static_cast<std::size_t>(i)];
        const double si = s2[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const double Fj = F[static_cast<std::size_t>(j)];
            const double px = g.d2 + ci * Fj + g.r3 * si;
            if (axis_mode) {
                f1[static_cast<std::size_t>(j)] = px;
                f2[static_cast<std::size_t>(j)] = g.d4 * s3tab[static_cast<std::size_t>(j)] + g.r2;
            } else {
                f1[static_cast<std::size_t>(j)] = px * px + py2[static_cast<std::size_t>(j)] - R;
                f2[static_cast<std::size_t>(j)] = (g.r3 * ci - Fj * si) - z;
            }
        }
    };

    std::vector<double> rowa_f1(static_cast<std::size_t>(n)), rowa_f2(static_cast<std::size_t>(n));
    std::vector<double> rowb_f1(static_cast<std::size_t>(n)), rowb_f2(static_cast<std::size_t>(n));
    fill_row(0, rowa_f1, rowa_f2);

    std::vector<std::pair<int, int>> candidates;
    for (int i = 0; i < n; ++i) {
        const int inext = (i + 1) % n;
        fill_row(inext, rowb_f1, rowb_f2);
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            const double a = rowa_f1[static_cast<std::size_t>(j)],
                         b = rowa_f1[static_cast<std::size_t>(jn)],
                         c = rowb_f1[static_cast<std::size_t>(j)],
                         d = rowb_f1[static_cast<std::size_t>(jn)];
            const double lo1 = std::min(std::min(a, b), std::min(c, d));
            const double hi1 = std::max(std::max(a, b), std::max(c, d));
            if (lo1 > 0.0 || hi1 < 0.0) continue;
            const double e = rowa_f2[static_cast<std::size_t>(j)],
                         f = rowa_f2[static_cast<std::size_t>(jn)],
                         gg = rowb_f2[static_cast<std::size_t>(j)],
                         hh = rowb_f2[static_cast<std::size_t>(jn)];
            const double lo2 = std::min(std::min(e, f), std::min(gg, hh));
            const double hi2 = std::max(std::max(e, f), std::max(gg, hh));
            if (lo2 > 0.0 || hi2 < 0.0) continue;
            candidates.emplace_back(i, j);
        }
        std::swap(rowa_f1, rowb_f1);
        std::swap(rowa_f2, rowb_f2);
    }

    std::vector<std::pair<double, double>> roots;
    const double step_cap = 4.0 * h;
    for (auto [i, j] : candidates) {
        const double base2 = -kPi + h * i;
        const double base3 = -kPi + h * j;
        bool cell_ok = false;
        const double offs[5][2] = {
            {0.5, 0.5}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
        for (auto& o : offs) {
            NewtonOutcome nr =
                axis_mode
                    ? newton_axis_root(g, base2 + o[0] * h, base3 + o[1] * h, refine_iters)
                    : newton_root(g, R, z, base2 + o[0] * h, base3 + o[1] * h,
                                  refine_iters, step_cap);
            if (!nr.converged) continue;
            if (axis_mode) {
                Vec3 p = frame1_position(g, nr.th2, nr.th3);
                if (std::abs(p.z - z) > 1e-7 * g.length_scale()) {
                    cell_ok = true;  // converged fine, just a different axis point
                    continue;
                }
            }
            cell_ok = true;
            bool dup = false;
            for (auto& r : roots) {
                if (std::hypot(torus_diff(nr.th2, r.first), torus_diff(nr.th3, r.second)) <
                    dedupe_tol) {
                    dup = true;
                    break;
                }
            }
            if (!dup) roots.emplace_back(nr.th2, nr.th3);
        }
        if (!cell_ok) result.convergence_warning = true;
    }
    result.count = static_cast<int>(roots.size());
    return result;
}

} // namespace

OracleCount brute_force_count_detail(const ManipulatorGeometry& g, double rho, double z,
                                     const OracleConfig& cfg) {
    if (cfg.grid_n < 256) throw Error(errc::invalid_input, "oracle grid_n must be >= 256");
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(z))
        throw Error(errc::invalid_input, "target (rho, z) must be finite with rho >= 0");
    OracleCount base = scan_grid(g, rho, z, cfg.grid_n, cfg.refine_iters, cfg.dedupe_tol);
    if (!base.convergence_warning) return base;
    OracleCount fine = scan_grid(g, rho, z, 2 * cfg.grid_n, cfg.refine_iters, cfg.dedupe_tol);
    fine.convergence_warning = true;  // report that the base grid struggled
    return fine;
}

int brute_force_count(const ManipulatorGeometry& g, double rho, double z,
                      const OracleConfig& cfg) {
    return brute_force_count_detail(g, rho, z, cfg).count;
}

ReachBounds reach_bounds(const ManipulatorGeometry& g, int grid_n) {
    if (grid_n < 16) throw Error(errc::invalid_input, "reach grid too coarse");
    const double h = kTwoPi / grid_n;
    double best_min = std::numeric_limits<double>::infinity(), bm2 = 0, bm3 = 0;
    double best_max = -1.0, bx2 = 0, bx3 = 0;
    auto r2_at = [&](double a2, double a3) {
        Vec3 p = frame1_position(g, a2, a3);
        return p.x * p.x + p.y * p.y + p.z * p.z;
    };
    for (int i = 0; i < grid_n; ++i) {
        const double th2 = -kPi + h * i;
        for (int j = 0; j < grid_n; ++j) {
            const double th3 = -kPi + h * j;
            const double v = r2_at(th2, th3);
            if (v < best_min) { best_min = v; bm2 = th2; bm3 = th3; }
            if (v > best_max) { best_max = v; bx2 = th2; bx3 = th3; }
        }
    }
    // derivative-free zoom refinement around each extremum
    auto refine = [&](double& val, double c2v, double c3v, bool maximize) {
        double pitch = h;
        double cur2 = c2v, cur3 = c3v;
        for (int it = 0; it < 60; ++it) {
            for (int a = -2; a <= 2; ++a) {
                for (int b = -2; b <= 2; ++b) {
                    const double v = r2_at(cur2 + a * pitch * 0.5, cur3 + b * pitch * 0.5);
                    if ((maximize && v > val) || (!maximize && v < val)) {
                        val = v;
                        c2v = cur2 + a * pitch * 0.5;
                        c3v = cur3 + b * pitch * 0.5;
                    }
                }
            }
            cur2 = c2v;
            cur3 = c3v;
            pitch *= 0.5;
        }
    };
    refine(best_min, bm2, bm3, false);
    refine(best_max, bx2, bx3, true);
    ReachBounds rb;
    rb.min_extent = std::sqrt(std::max(0.0, best_min));
    rb.max_extent = std::sqrt(std::max(0.0, best_max));
    return rb;
}

} // namespace ws3r
