#pragma once
#include <array>
#include <stdexcept>
#include <string>

namespace ws3r {

enum class errc {
    non_positive_d4,
    negative_parameter,
    degenerate_geometry,
    zero_d2_path,
    degenerate_reduced,
    unknown_type,
    invalid_input,
    unresolved_region,
};

class Error : public std::runtime_error {
public:
    errc code;
    Error(errc c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// Link geometry of a 3R serial arm with mutually orthogonal consecutive
// joint axes.  d* are link lengths along the common normals, r* the joint
// offsets; the wrist point sits d4 along the last link.  All joints are
// unlimited revolutes.
struct ManipulatorGeometry {
    double d2 = 0, d3 = 0, r2 = 0, r3 = 0, d4 = 1;

    // characteristic length used to scale tolerances
    double length_scale() const { return d2 + d3 + d4 + r2 + r3; }
};

// Validates and returns the geometry; throws ws3r::Error on bad input.
ManipulatorGeometry make_geometry(double d2, double d3, double r2, double r3, double d4);
void validate_geometry(const ManipulatorGeometry& g);

struct JointConfig {
    double theta1 = 0, theta2 = 0, theta3 = 0;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

struct CrossSection {
    double rho = 0, z = 0;
};

// wraps into [-pi, pi)
double normalize_angle(double a);

// Wrist-point position in the frame after the first joint (theta1 = 0 slice).
Vec3 frame1_position(const ManipulatorGeometry& g, double theta2, double theta3);

Vec3 forward_kinematics(const ManipulatorGeometry& g, const JointConfig& q);

// (rho, z) of the axial cross-section swept by theta1.
CrossSection cross_section_coords(const ManipulatorGeometry& g, double theta2, double theta3);

// Closed-form determinant of the 3x3 positional Jacobian.  Depends on
// (theta2, theta3) only.
double jacobian_det(const ManipulatorGeometry& g, double theta2, double theta3);

inline CrossSection cross_section_coords(const ManipulatorGeometry& g, const JointConfig& q) {
    return cross_section_coords(g, q.theta2, q.theta3);
}
inline double jacobian_det(const ManipulatorGeometry& g, const JointConfig& q) {
    return jacobian_det(g, q.theta2, q.theta3);
}

// analytic gradient of jacobian_det wrt (theta2, theta3)
std::array<double, 2> jacobian_det_gradient(const ManipulatorGeometry& g,
                                            double theta2, double theta3);

// Central-difference determinant of the full positional Jacobian; independent
// check of jacobian_det (the two agree up to a fixed constant factor).
double numeric_jacobian_det(const ManipulatorGeometry& g, const JointConfig& q,
                            double step = 1e-5);

} // namespace ws3r
