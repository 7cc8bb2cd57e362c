#pragma once

#include "ws3r/classifier.hpp"
#include "ws3r/geometry.hpp"

#include <string>
#include <vector>

namespace ws3r {

// One swept parameter: n samples evenly spaced over [lo, hi] (endpoints
// included; n = 1 pins the value at lo).
struct SweepAxis {
    std::string param;  // one of d2, d3, r2, r3, d4
    double lo = 0;
    double hi = 1;
    int n = 2;
};

struct SweepCell {
    double x = 0;
    double y = 0;
    std::string label;          // type label, or the node count in "nodes" mode
    bool on_transition = false;
    bool valid = true;          // false: the cell's geometry fails validation
};

// Parameter-plane map of type labels (or node counts).  Cells are stored
// row-major: y outer ascending, x inner ascending.
struct SweepMap {
    SweepAxis x;
    SweepAxis y;
    ManipulatorGeometry base;  // fixed parameters; swept ones overwritten per cell
    std::string mode = "label";
    std::vector<SweepCell> cells;
};

// mode "label": classify_label per cell (fast).  mode "nodes": certified
// off-axis node count per cell (much slower).  threads = 0 picks the hardware
// concurrency; cell order in the result is independent of threading.
SweepMap run_sweep(const ManipulatorGeometry& base, const SweepAxis& x, const SweepAxis& y,
                   const std::string& mode = "label", int threads = 0);

// Header `x,y,label,on_transition`; numbers with 17 significant digits;
// labels containing commas are double-quoted.
std::string sweep_csv(const SweepMap& m);

// Cell map color-coded by label with a legend; transition cells black.
std::string sweep_svg(const SweepMap& m);

} // namespace ws3r
