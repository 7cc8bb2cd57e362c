#pragma once
#include "ws3r/geometry.hpp"
#include "ws3r/singularity.hpp"

#include <string>
#include <vector>

namespace ws3r {

// Maximal connected zone of the (rho, z) half-plane with a constant number of
// IK solutions, bounded by singular-curve images and/or the analysis frame.
struct Region {
    int id = -1;
    std::vector<CrossSection> sample_points;  // interior, far from boundaries
    int ik_count = 0;
    bool touches_frame = false;  // meets the bounding box, including rho = 0
    double area_estimate = 0;    // raster cells times cell area
};

// Two regions facing each other across a thin stretch of singular curve.
struct RegionAdjacency {
    int region_a = -1;
    int region_b = -1;
    int curve = -1;              // separating planar curve; -1 if several overlap
    bool folded = false;         // that curve traverses its image twice
    bool near_junction = false;  // crossing sits near a curve junction or critical point
    CrossSection at;             // midpoint of the probing ray
};

struct WorkspaceTopology {
    int n_cusps = 0;
    int n_nodes_offaxis = 0;
    int n_nodes_onaxis = 0;
    int n_isolated_points = 0;
    int n_voids = 0;
    std::vector<Region> regions;  // includes the exterior zero-count region
    int max_ik = 0;
    bool single_4region_covers_workspace = false;
    bool binary = false;  // max_ik == 2
    std::vector<RegionAdjacency> adjacencies;
    SingularityAnalysis analysis;
    std::vector<std::string> warnings;
    int raster_n_used = 0;
};

struct TopologyConfig {
    SingularityConfig singularity;
    int raster_n = 800;
};

// Raster flood fill of the half-plane rho in [0, 1.05 L], z in [± 1.05 L] with
// curve-adjacent cells as barriers; fragments with equal counts separated only
// by a single simple curve stretch are merged back into one region.  Doubles
// the raster (twice at most) if region samples disagree, then throws
// errc::unresolved_region.
std::vector<Region> decompose_regions(const ManipulatorGeometry& g,
                                      const std::vector<PlanarCurve>& curves,
                                      int raster_n = 800);

// Bounded zero-count regions that do not touch the frame.
std::vector<Region> detect_voids(const std::vector<Region>& regions);

WorkspaceTopology topology_signature(const ManipulatorGeometry& g,
                                     const TopologyConfig& cfg = {});

} // namespace ws3r
