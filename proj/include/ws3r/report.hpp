#pragma once

#include "ws3r/classifier.hpp"
#include "ws3r/topology.hpp"

#include <string>

namespace ws3r {

// Everything one analysis run produces, bundled for serialization.
struct AnalysisReport {
    ManipulatorGeometry geometry;
    TypeClassification classification;
    TopologyConfig config;
    unsigned long long seed = 1;
    bool label_only = false;
};

// label_only skips curve tracing and workspace decomposition.
AnalysisReport analyze_report(const ManipulatorGeometry& g, const TopologyConfig& cfg = {},
                              bool label_only = false, unsigned long long seed = 1,
                              double eps_zero = 1e-12, double eps_trans = 1e-9);

// Deterministic JSON text with a fixed key order; every floating-point value
// is printed with 17 significant digits so parsing reproduces the exact
// double.  The catalog block carries a "paper-sourced" provenance marker.
std::string report_json(const AnalysisReport& r);

// Inverse of report_json: report_json(report_from_json(s)) == s for any s
// produced by report_json.  Throws ws3r::Error (invalid_input) on malformed
// or incomplete text.
AnalysisReport report_from_json(const std::string& text);

// Flat key/value geometry document: required numeric keys d2, d3, r2, r3, d4,
// nothing else.  Throws ws3r::Error (invalid_input) on violations.
ManipulatorGeometry load_geometry_json(const std::string& text);

// Half cross-section plot of a full analysis: 4-solution regions dark gray,
// 2-solution regions light gray on white, singular curves black, cusps drawn
// as circles, nodes as crosses, isolated points as diamonds.  raster_n sets
// the shading resolution.  Requires a report with computed topology.
std::string workspace_svg(const AnalysisReport& r, int raster_n = 400);

} // namespace ws3r
