#pragma once
#include "ws3r/geometry.hpp"

#include <array>
#include <vector>

namespace ws3r {

// Inverse-kinematics polynomial P(t) in t = tan(theta3/2) for a target circle
// (rho, z).  Coefficients depend on the target only through R = rho^2 and
// Z = z^2, so targets (rho, z) and (rho, -z) share the same polynomial.
struct QuarticPolynomial {
    std::array<double, 5> c{};  // ascending: c[k] multiplies t^k
    double target_R = 0.0;
    double target_Z = 0.0;
    int effective_degree = 0;   // 4 unless leading coefficients vanish

    double eval(double t) const;
    double deriv(double t) const;    // dP/dt
    double deriv2(double t) const;   // d2P/dt2
    // partial derivatives of each coefficient w.r.t. the target R and Z
    std::array<double, 5> dc_dR() const;
    std::array<double, 5> dc_dZ() const;

    // internals kept for the coefficient partials
    double A = 0, B = 0, C = 0, four_d2_sq = 0;
};

// Requires d2 > 0; throws errc::zero_d2_path otherwise.
QuarticPolynomial ik_polynomial(const ManipulatorGeometry& g, double rho, double z);

// d2 = 0 path: roots theta3 in [-pi, pi) of A*s3 + B*c3 + C = 0 with
// A = 2*r2*d4, B = 2*d3*d4, C = d3^2+d4^2+r2^2+r3^2 - R - Z.
// Throws errc::degenerate_reduced if A = B = 0 (excluded at construction).
std::vector<double> solve_theta3_reduced(const ManipulatorGeometry& g, double rho, double z);

enum class RootFlag { simple, double_root, near_singular };

struct IkSolutionSet {
    std::vector<JointConfig> solutions;
    std::vector<RootFlag> multiplicity_flags;  // parallel to solutions
    bool on_axis_target = false;        // rho < eps_axis: theta1 returned as 0
    bool near_singular = false;         // root structure numerically marginal
    bool degenerate_continuum = false;  // a continuum of solutions exists
};

struct IkCount {
    int count = 0;  // distinct (theta2, theta3) solutions, 0..4
    bool near_singular = false;
    bool degenerate_continuum = false;
};

IkCount count_ik_flagged(const ManipulatorGeometry& g, double rho, double z);
int count_ik(const ManipulatorGeometry& g, double rho, double z);

IkSolutionSet solve_ik(const ManipulatorGeometry& g, const Vec3& target, double tol = 1e-9);

// Axial-symmetry convenience: all solutions for the target circle at theta1 = 0,
// i.e. world target (rho, 0, z).
IkSolutionSet solve_ik_section(const ManipulatorGeometry& g, double rho, double z,
                               double tol = 1e-9);

} // namespace ws3r
