#pragma once
#include "ws3r/geometry.hpp"

namespace ws3r {

struct OracleConfig {
    int grid_n = 1024;         // torus sampling resolution (>= 256)
    int refine_iters = 30;     // Newton iteration cap per candidate cell
    double dedupe_tol = 1e-6;  // torus distance below which roots merge
    unsigned long long seed = 1;  // used by callers that generate probe sets
};

struct OracleCount {
    int count = 0;
    bool convergence_warning = false;  // some candidate cell never converged
    int grid_used = 0;                 // resolution behind the returned count
};

// Exhaustive check, independent of the polynomial solver: scan the
// (theta2, theta3) torus, bracket (rho^2, z) componentwise per grid cell,
// run damped Newton from each candidate, deduplicate converged roots.
// On a convergence warning the grid is doubled once and the finer result
// is returned.
OracleCount brute_force_count_detail(const ManipulatorGeometry& g, double rho, double z,
                                     const OracleConfig& cfg = {});
int brute_force_count(const ManipulatorGeometry& g, double rho, double z,
                      const OracleConfig& cfg = {});

struct ReachBounds {
    double min_extent = 0.0;  // closest approach of the workspace to the origin
    double max_extent = 0.0;  // outer reach, <= sum of all five lengths
};

ReachBounds reach_bounds(const ManipulatorGeometry& g, int grid_n = 512);

} // namespace ws3r
