#include "ws3r/geometry.hpp"

#include <cmath>

namespace ws3r {

void validate_geometry(const ManipulatorGeometry& g)
{
    for (double v : {g.d2, g.d3, g.r2, g.r3, g.d4})
        if (!std::isfinite(v))
            throw Error(errc::invalid_input, "geometry parameter is not finite");
    if (g.d4 <= 0)
        throw Error(errc::non_positive_d4, "d4 must be > 0");
    if (g.d2 < 0 || g.d3 < 0 || g.r2 < 0 || g.r3 < 0)
        throw Error(errc::negative_parameter, "d2, d3, r2, r3 must be >= 0");
    if (g.d2 == 0 && g.d3 == 0 && g.r2 == 0)
        throw Error(errc::degenerate_geometry,
                    "d2 = d3 = r2 = 0 collapses the workspace to a shell of fixed radius");
}

ManipulatorGeometry make_geometry(double d2, double d3, double r2, double r3, double d4)
{
    ManipulatorGeometry g{d2, d3, r2, r3, d4};
    validate_geometry(g);
    return g;
}

double normalize_angle(double a)
{
    double r = std::remainder(a, 2.0 * M_PI); // (-pi, pi]
    if (r >= M_PI)
        r -= 2.0 * M_PI;
    return r;
}

Vec3 frame1_position(const ManipulatorGeometry& g, double theta2, double theta3)
{
    const double c2 = std::cos(theta2), s2 = std::sin(theta2);
    const double c3 = std::cos(theta3), s3 = std::sin(theta3);
    const double F = g.d3 + g.d4 * c3;
    return {g.d2 + c2 * F + g.r3 * s2,
            g.d4 * s3 + g.r2,
            g.r3 * c2 - F * s2};
}

Vec3 forward_kinematics(const ManipulatorGeometry& g, const JointConfig& q)
{
    const Vec3 p = frame1_position(g, q.theta2, q.theta3);
    const double c1 = std::cos(q.theta1), s1 = std::sin(q.theta1);
    return {c1 * p.x - s1 * p.y, s1 * p.x + c1 * p.y, p.z};
}

CrossSection cross_section_coords(const ManipulatorGeometry& g, double theta2, double theta3)
{
    const Vec3 p = frame1_position(g, theta2, theta3);
    return {std::hypot(p.x, p.y), p.z};
}

double jacobian_det(const ManipulatorGeometry& g, double theta2, double theta3)
{
    const double c2 = std::cos(theta2), s2 = std::sin(theta2);
    const double c3 = std::cos(theta3), s3 = std::sin(theta3);
    const double F = g.d3 + g.d4 * c3;
    const double px = g.d2 + c2 * F + g.r3 * s2;
    const double py = g.r2 + g.d4 * s3;
    return g.d4 * (F * s3 * px - c3 * py * (px - g.d2));
}

std::array<double, 2> jacobian_det_gradient(const ManipulatorGeometry& g,
                                            double theta2, double theta3)
{
    const double c2 = std::cos(theta2), s2 = std::sin(theta2);
    const double c3 = std::cos(theta3), s3 = std::sin(theta3);
    const double F = g.d3 + g.d4 * c3;
    const double Fp = -g.d4 * s3;
    const double px = g.d2 + c2 * F + g.r3 * s2;
    const double py = g.r2 + g.d4 * s3;
    const double pz = g.r3 * c2 - F * s2;
    const double px3 = c2 * Fp;     // d px / d theta3
    const double py3 = g.d4 * c3;
    const double d2_ = g.d4 * pz * (F * s3 - c3 * py);
    const double d3_ = g.d4 * ((Fp * s3 + F * c3) * px + F * s3 * px3
                               + s3 * py * (px - g.d2)
                               - c3 * py3 * (px - g.d2) - c3 * py * px3);
    return {d2_, d3_};
}

double numeric_jacobian_det(const ManipulatorGeometry& g, const JointConfig& q, double step)
{
    double J[3][3];
    const double qs[3] = {q.theta1, q.theta2, q.theta3};
    for (int k = 0; k < 3; ++k) {
        double qp[3] = {qs[0], qs[1], qs[2]}, qm[3] = {qs[0], qs[1], qs[2]};
        qp[k] += step;
        qm[k] -= step;
        const Vec3 a = forward_kinematics(g, {qp[0], qp[1], qp[2]});
        const Vec3 b = forward_kinematics(g, {qm[0], qm[1], qm[2]});
        J[0][k] = (a.x - b.x) / (2 * step);
        J[1][k] = (a.y - b.y) / (2 * step);
        J[2][k] = (a.z - b.z) / (2 * step);
    }
    return J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1])
         - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0])
         + J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
}

} // namespace ws3r
