#pragma once
#include "ws3r/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace ws3r {

// Connected component of the singular set det(J) = 0 on the joint torus.
struct TorusCurve {
    std::vector<std::array<double, 2>> vertices;  // (theta2, theta3), wrapped to [-pi, pi)
    bool closed = true;
    std::array<int, 2> wrap_count{0, 0};  // winding around the theta2/theta3 circles
};

// Image of a TorusCurve in the (rho, z) half-plane, vertex for vertex.
struct PlanarCurve {
    std::vector<CrossSection> vertices;
    int preimage = -1;              // index into the torus-curve list
    bool degenerate_to_point = false;
    bool folded_self_cover = false;  // traverses its own image set twice
};

enum class CriticalKind { cusp, node, isolated };

struct CriticalPoint {
    CriticalKind kind = CriticalKind::node;
    CrossSection location;
    std::vector<std::array<double, 2>> preimages;
    // certification residuals on the unit-scaled geometry:
    //   cusp: polynomial triple-root system values
    //   node: |det| at both refined preimages + image mismatch
    std::vector<double> residuals;
    // diagnostic residuals of the coincident-root-pair polynomial system
    // (empty when that system does not apply to this point's structure)
    std::vector<double> algebraic_residuals;
    double t_param = 0.0;  // tan(theta3/2) at the certified point
    bool on_axis = false;
    bool transition_degenerate = false;  // branches cross at a near-tangent angle
    bool shared_theta3 = false;          // both branches carry the same theta3
};

struct SingularityConfig {
    int grid_n = 720;
    double eps_sing = 1e-9;        // |det| tolerance after refinement, times L^3
    double eps_pt = 1e-7;          // point-coincidence tolerance, times L
    double eps_cert = 1e-7;        // certification residual gate (unit-scaled)
    double eps_axis = 1e-9;        // on-axis threshold, times L
    double min_cross_angle = 1e-3; // below this, crossings are annotated as transitional
};

struct SingularityAnalysis {
    std::vector<TorusCurve> torus_curves;
    std::vector<PlanarCurve> planar_curves;
    std::vector<CriticalPoint> cusps;
    std::vector<CriticalPoint> nodes;            // certified; includes on-axis ones, flagged
    std::vector<CriticalPoint> isolated_points;
    std::vector<std::string> warnings;           // dropped candidates, coincident images, ...
    bool resolution_warning = false;
};

std::vector<TorusCurve> joint_space_singular_curves(const ManipulatorGeometry& g,
                                                    int grid_n = 720);

std::vector<PlanarCurve> workspace_singular_image(const ManipulatorGeometry& g,
                                                  const std::vector<TorusCurve>& curves);

SingularityAnalysis analyze_singularities(const ManipulatorGeometry& g,
                                          const SingularityConfig& cfg = {});

std::vector<CriticalPoint> detect_cusps(const ManipulatorGeometry& g);
std::vector<CriticalPoint> detect_nodes(const ManipulatorGeometry& g);

// Evaluates the polynomial-system residuals for a point of the given kind at
// its stored (R, Z, t), on the unit-scaled geometry:
//   cusp: {P, dP/dt, d2P/dt2}
//   node: {P, dP/dt, discriminant of P deflated by its double root}
std::vector<double> certify_critical_point(const ManipulatorGeometry& g,
                                           const CriticalPoint& point, CriticalKind kind);

} // namespace ws3r
