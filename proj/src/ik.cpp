#include "ws3r/ik.hpp"
#include "ws3r/polyroots.hpp"

#include <algorithm>
#include <cmath>

namespace ws3r {

namespace {

constexpr double kPi = 3.14159265358979323846;

double horner(const std::array<double, 5>& c, double t) {
    double acc = 0.0;
    for (int i = 4; i >= 0; --i) acc = acc * t + c[static_cast<std::size_t>(i)];
    return acc;
}

} // namespace

double QuarticPolynomial::eval(double t) const { return horner(c, t); }

double QuarticPolynomial::deriv(double t) const {
    return ((4.0 * c[4] * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
}

double QuarticPolynomial::deriv2(double t) const {
    return (12.0 * c[4] * t + 6.0 * c[3]) * t + 2.0 * c[2];
}

std::array<double, 5> QuarticPolynomial::dc_dR() const {
    return {2.0 * C, 2.0 * B, 2.0 * A + 2.0 * C, 2.0 * B, 2.0 * A};
}

std::array<double, 5> QuarticPolynomial::dc_dZ() const {
    auto d = dc_dR();
    d[0] += four_d2_sq;
    d[2] += 2.0 * four_d2_sq;
    d[4] += four_d2_sq;
    return d;
}

QuarticPolynomial ik_polynomial(const ManipulatorGeometry& g, double rho, double z) {
    if (!(g.d2 > 0.0))
        throw Error(errc::zero_d2_path,
                    "quartic path requires d2 > 0; use the reduced theta3 solver");
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(z))
        throw Error(errc::invalid_input, "target (rho, z) must be finite with rho >= 0");

    const double R = rho * rho;
    const double Z = z * z;
    const double K = R + Z - (g.d2 * g.d2 + g.r3 * g.r3 + g.d3 * g.d3 +
                              g.d4 * g.d4 + g.r2 * g.r2);
    QuarticPolynomial p;
    p.target_R = R;
    p.target_Z = Z;
    p.A = K + 2.0 * g.d3 * g.d4;
    p.B = -4.0 * g.r2 * g.d4;
    p.C = K - 2.0 * g.d3 * g.d4;
    p.four_d2_sq = 4.0 * g.d2 * g.d2;
    const double W = p.four_d2_sq * (Z - g.r3 * g.r3);
    const double V1 = 2.0 * g.d2 * (g.d3 - g.d4);
    const double V2 = 2.0 * g.d2 * (g.d3 + g.d4);

    p.c[0] = p.C * p.C + W - V2 * V2;
    p.c[1] = 2.0 * p.B * p.C;
    p.c[2] = 2.0 * p.A * p.C + p.B * p.B + 2.0 * W - 2.0 * V1 * V2;
    p.c[3] = 2.0 * p.A * p.B;
    p.c[4] = p.A * p.A + W - V1 * V1;

    double cmax = 0.0;
    for (double v : p.c) cmax = std::max(cmax, std::abs(v));
    p.effective_degree = 4;
    while (p.effective_degree > 0 &&
           std::abs(p.c[static_cast<std::size_t>(p.effective_degree)]) <= 1e-12 * cmax)
        --p.effective_degree;
    return p;
}

std::vector<double> solve_theta3_reduced(const ManipulatorGeometry& g, double rho, double z) {
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(z))
        throw Error(errc::invalid_input, "target (rho, z) must be finite with rho >= 0");
    const double A = 2.0 * g.r2 * g.d4;
    const double B = 2.0 * g.d3 * g.d4;
    const double M = std::hypot(A, B);
    if (M == 0.0)
        throw Error(errc::degenerate_reduced,
                    "theta3 equation vanishes identically (d3 = r2 = 0)");
    const double R = rho * rho;
    const double Z = z * z;
    const double C = g.d3 * g.d3 + g.d4 * g.d4 + g.r2 * g.r2 + g.r3 * g.r3 - R - Z;
    if (std::abs(C) > M) return {};

    // A*s3 + B*c3 = M*sin(theta3 + phi) with phi = atan2(B, A)
    const double phi = std::atan2(B, A);
    const double alpha = std::asin(std::clamp(-C / M, -1.0, 1.0));
    double r1 = normalize_angle(alpha - phi);
    double r2v = normalize_angle(kPi - alpha - phi);
    std::vector<double> roots{r1};
    double gap = std::abs(normalize_angle(r2v - r1));
    if (gap > 1e-10) roots.push_back(r2v);
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

struct Theta3Roots {
    std::vector<double> theta3;          // distinct candidates in [-pi, pi)
    std::vector<bool> is_double;         // clustered / tangent root
    bool near_singular = false;
    bool degenerate = false;             // polynomial vanished identically
};

// d2 > 0: distinct real quartic roots plus the theta3 = pi candidate.
Theta3Roots quartic_theta3_roots(const ManipulatorGeometry& g, double rho, double z) {
    Theta3Roots out;
    const QuarticPolynomial p = ik_polynomial(g, rho, z);
    double cmax = 0.0;
    for (double v : p.c) cmax = std::max(cmax, std::abs(v));
    if (cmax == 0.0) {
        out.degenerate = true;
        return out;
    }

    std::vector<double> coeff(p.c.begin(), p.c.end());
    std::vector<double> troots = polynomial_real_roots(coeff);

    // cluster in t: a near-double root counts once
    std::vector<double> reps;
    std::vector<bool> dbl;
    for (double t : troots) {
        if (!reps.empty() && std::abs(t - reps.back()) < 1e-8 * (1.0 + std::abs(t))) {
            reps.back() = 0.5 * (reps.back() + t);
            dbl.back() = true;
            out.near_singular = true;
        } else {
            reps.push_back(t);
            dbl.push_back(false);
        }
    }
    for (std::size_t i = 0; i < reps.size(); ++i) {
        out.theta3.push_back(normalize_angle(2.0 * std::atan(reps[i])));
        out.is_double.push_back(dbl[i]);
    }

    // t = tan(theta3/2) cannot represent theta3 = pi: a vanishing leading
    // coefficient signals that root; confirm against the closure constraint.
    if (std::abs(p.c[4]) < 1e-12 * cmax) {
        const double U = p.A / (2.0 * g.d2);
        const double F = g.d3 - g.d4;
        const double resid = U * U + p.target_Z - F * F - g.r3 * g.r3;
        const double L = g.length_scale();
        if (std::abs(resid) < 1e-9 * (L * L + p.target_R + p.target_Z)) {
            out.theta3.push_back(normalize_angle(kPi));
            out.is_double.push_back(false);
        }
    }

    if (p.effective_degree == 4) {
        double disc = quartic_discriminant(coeff);
        double norm = std::pow(cmax, 6);
        if (std::abs(disc) < 1e-9 * norm) out.near_singular = true;
    } else {
        out.near_singular = true;  // degree drop is itself a boundary situation
    }
    return out;
}

} // namespace

IkCount count_ik_flagged(const ManipulatorGeometry& g, double rho, double z) {
    IkCount result;
    const double L = g.length_scale();
    const double zero_len = 1e-12 * L;

    if (g.d2 > zero_len) {
        Theta3Roots roots = quartic_theta3_roots(g, rho, z);
        result.near_singular = roots.near_singular;
        result.degenerate_continuum = roots.degenerate;
        for (double th3 : roots.theta3) {
            const double F = g.d3 + g.d4 * std::cos(th3);
            if (F * F + g.r3 * g.r3 < zero_len * zero_len) {
                // theta2 indeterminate: the whole circle solves the target
                result.degenerate_continuum = true;
                continue;
            }
            result.count += 1;
        }
        return result;
    }

    // d2 = 0: each theta3 root carries up to two theta2 branches
    const double R = rho * rho;
    const double Z = z * z;
    const double A = 2.0 * g.r2 * g.d4;
    const double B = 2.0 * g.d3 * g.d4;
    const double C = g.d3 * g.d3 + g.d4 * g.d4 + g.r2 * g.r2 + g.r3 * g.r3 - R - Z;
    const double M = std::hypot(A, B);
    if (M > 0.0 && std::abs(std::abs(C) - M) < 1e-9 * L * L) result.near_singular = true;

    std::vector<double> roots = solve_theta3_reduced(g, rho, z);
    const double u_tol = 1e-9 * L;
    for (double th3 : roots) {
        const double F = g.d3 + g.d4 * std::cos(th3);
        const double denom = F * F + g.r3 * g.r3;
        const double disc = denom - Z;  // = px^2 along this theta3 branch
        if (denom < zero_len * zero_len) {
            if (std::abs(disc) < u_tol * u_tol) result.degenerate_continuum = true;
            continue;
        }
        if (disc > u_tol * u_tol) {
            result.count += 2;
        } else if (disc > -u_tol * u_tol) {
            result.count += 1;
            result.near_singular = true;
        }
    }
    return result;
}

int count_ik(const ManipulatorGeometry& g, double rho, double z) {
    return count_ik_flagged(g, rho, z).count;
}

namespace {

// one Newton step on (theta2, theta3) against (rho^2, z) residuals, FD Jacobian
void polish_section_solution(const ManipulatorGeometry& g, double rho, double z,
                             double& th2, double& th3) {
    const double R = rho * rho;
    for (int it = 0; it < 3; ++it) {
        Vec3 p = frame1_position(g, th2, th3);
        double f0 = p.x * p.x + p.y * p.y - R;
        double f1 = p.z - z;
        double scale = 1.0 + R + z * z;
        if (f0 * f0 + f1 * f1 < 1e-28 * scale * scale) return;
        const double h = 1e-6;
        Vec3 p2p = frame1_position(g, th2 + h, th3);
        Vec3 p2m = frame1_position(g, th2 - h, th3);
        Vec3 p3p = frame1_position(g, th2, th3 + h);
        Vec3 p3m = frame1_position(g, th2, th3 - h);
        double j00 = (p2p.x * p2p.x + p2p.y * p2p.y - p2m.x * p2m.x - p2m.y * p2m.y) / (2 * h);
        double j01 = (p3p.x * p3p.x + p3p.y * p3p.y - p3m.x * p3m.x - p3m.y * p3m.y) / (2 * h);
        double j10 = (p2p.z - p2m.z) / (2 * h);
        double j11 = (p3p.z - p3m.z) / (2 * h);
        double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-14 * scale) return;
        th2 -= (f0 * j11 - f1 * j01) / det;
        th3 -= (j00 * f1 - j10 * f0) / det;
    }
}

} // namespace

IkSolutionSet solve_ik_section(const ManipulatorGeometry& g, double rho, double z, double tol) {
    IkSolutionSet set;
    const double L = g.length_scale();
    const double zero_len = 1e-12 * L;
    const double eps_axis = 1e-9 * L;
    set.on_axis_target = rho < eps_axis;

    struct Branch {
        double th2, th3;
        RootFlag flag;
    };
    std::vector<Branch> branches;

    if (g.d2 > zero_len) {
        const double K = rho * rho + z * z -
                         (g.d2 * g.d2 + g.r3 * g.r3 + g.d3 * g.d3 + g.d4 * g.d4 +
                          g.r2 * g.r2);
        Theta3Roots roots = quartic_theta3_roots(g, rho, z);
        set.near_singular = roots.near_singular;
        set.degenerate_continuum = roots.degenerate;
        for (std::size_t i = 0; i < roots.theta3.size(); ++i) {
            const double th3 = roots.theta3[i];
            const double c3 = std::cos(th3), s3 = std::sin(th3);
            const double F = g.d3 + g.d4 * c3;
            const double denom = F * F + g.r3 * g.r3;
            if (denom < zero_len * zero_len) {
                set.degenerate_continuum = true;
                continue;
            }
            const double U = (K - 2.0 * g.d3 * g.d4 * c3 - 2.0 * g.r2 * g.d4 * s3) /
                             (2.0 * g.d2);
            double c2 = (F * U + g.r3 * z) / denom;
            double s2 = (g.r3 * U - F * z) / denom;
            const double n = std::hypot(c2, s2);
            if (n > 0.0) { c2 /= n; s2 /= n; }
            branches.push_back({std::atan2(s2, c2), th3,
                                roots.is_double[i] ? RootFlag::double_root
                                                   : RootFlag::simple});
        }
    } else {
        const double Z = z * z;
        std::vector<double> roots = solve_theta3_reduced(g, rho, z);
        const double u_tol = 1e-9 * L;
        const double A = 2.0 * g.r2 * g.d4;
        const double B = 2.0 * g.d3 * g.d4;
        const double C = g.d3 * g.d3 + g.d4 * g.d4 + g.r2 * g.r2 + g.r3 * g.r3 -
                         rho * rho - Z;
        const double M = std::hypot(A, B);
        if (M > 0.0 && std::abs(std::abs(C) - M) < 1e-9 * L * L) set.near_singular = true;
        for (double th3 : roots) {
            const double F = g.d3 + g.d4 * std::cos(th3);
            const double denom = F * F + g.r3 * g.r3;
            const double disc = denom - Z;
            if (denom < zero_len * zero_len) {
                if (std::abs(disc) < u_tol * u_tol) set.degenerate_continuum = true;
                continue;
            }
            if (disc <= -u_tol * u_tol) continue;
            const bool tangent = disc <= u_tol * u_tol;
            const double u = std::sqrt(std::max(disc, 0.0));
            const int nsigns = tangent ? 1 : 2;
            if (tangent) set.near_singular = true;
            for (int s = 0; s < nsigns; ++s) {
                const double px = (s == 0) ? u : -u;
                double c2 = (F * px + g.r3 * z) / denom;
                double s2 = (g.r3 * px - F * z) / denom;
                const double n = std::hypot(c2, s2);
                if (n > 0.0) { c2 /= n; s2 /= n; }
                branches.push_back({std::atan2(s2, c2), th3,
                                    tangent ? RootFlag::double_root : RootFlag::simple});
            }
        }
    }

    for (auto& b : branches) {
        polish_section_solution(g, rho, z, b.th2, b.th3);
        Vec3 p1 = frame1_position(g, b.th2, b.th3);
        double th1 = set.on_axis_target ? 0.0 : normalize_angle(-std::atan2(p1.y, p1.x));
        JointConfig q{th1, normalize_angle(b.th2), normalize_angle(b.th3)};
        Vec3 world = forward_kinematics(g, q);
        const double err = std::hypot(std::hypot(world.x - rho, world.y), world.z - z);
        RootFlag flag = b.flag;
        if (!set.on_axis_target && err > tol * L) flag = RootFlag::near_singular;
        set.solutions.push_back(q);
        set.multiplicity_flags.push_back(flag);
    }
    return set;
}

IkSolutionSet solve_ik(const ManipulatorGeometry& g, const Vec3& target, double tol) {
    if (!std::isfinite(target.x) || !std::isfinite(target.y) || !std::isfinite(target.z))
        throw Error(errc::invalid_input, "target must be finite");
    const double rho = std::hypot(target.x, target.y);
    IkSolutionSet set = solve_ik_section(g, rho, target.z, tol);
    if (!set.on_axis_target) {
        const double phi = std::atan2(target.y, target.x);
        for (auto& q : set.solutions) q.theta1 = normalize_angle(q.theta1 + phi);
    }
    return set;
}

} // namespace ws3r
