#pragma once

#include "ws3r/geometry.hpp"
#include "ws3r/topology.hpp"

#include <string>
#include <vector>

namespace ws3r {

enum class Family { A, B, C, D, E, F, G, H, I, J, GenericR3Zero, Generic };

std::string to_string(Family f);

struct FamilyCase {
    Family label = Family::Generic;
    // zero-pattern of (d2, r2, d3, r3); d4 can never be zero
    bool zero_d2 = false;
    bool zero_r2 = false;
    bool zero_d3 = false;
    bool zero_r3 = false;
    std::vector<std::string> warnings;
};

// A parameter counts as zero iff |value| < eps_zero * length_scale().
FamilyCase family_case(const ManipulatorGeometry& g, double eps_zero = 1e-12);

enum class ManipulatorType {
    A1, A2, A3, B1, B2, C, D1, D2, D3, D4, D5, D6, E, F1, F2, G, H, I1, I2, I3, I4, J
};
constexpr int kManipulatorTypeCount = 22;

std::string to_string(ManipulatorType t);

// Catalog metadata for one of the 22 types. These values are quoted from the
// published classification table; they are never computed here, and
// `annotation` records where that table disagrees with its own defining text.
struct Table1Properties {
    int voids = 0;
    int nodes = 0;  // off-axis node points
    std::string four_solution_note;  // "", "All the workspace", or "Null"
    bool t_connected = false;
    bool well_connected = false;
    std::string annotation;
};

Table1Properties table1_properties(ManipulatorType t);  // throws errc::unknown_type

enum class SurfaceId { E1, E2, E3, Sigma1, Sigma2Low, Sigma2High, DEqualities, IAsymptote };
enum class SurfaceSide { Below, On, Above };

struct SurfaceEvaluation {
    SurfaceId surface = SurfaceId::E2;
    std::string expression;  // e.g. "d4 = sqrt(d3^2 + r2^2)"
    double residual = 0;     // signed, scale-normalized
    SurfaceSide side = SurfaceSide::Below;
    bool defined = true;     // false: the surface has no real locus here
    // auxiliary radicals sqrt((d3 +- d2)^2 + r2^2) for the r3 = 0 families
    bool has_aux = false;
    double aux_a = 0;
    double aux_b = 0;
    // the critical last-link length for the r2 = 0, r3 > 0 family
    bool has_delta = false;
    double delta = 0;
};

// Separating-surface residuals for the multi-type families {A, B, D, F, I}.
// |residual| < eps_trans reads as "on the surface".
std::vector<SurfaceEvaluation> evaluate_surfaces(const ManipulatorGeometry& g,
                                                 const FamilyCase& fc, double eps_trans = 1e-9);

struct TypeLabel {
    enum class Kind {
        None,        // families outside the classification (generic patterns)
        Type,        // one of the 22 types
        Transition,  // on a separating surface between flank_a and flank_b
        Ambiguous,   // undecidable without the workspace signature (flank_a | flank_b)
    };
    Kind kind = Kind::None;
    ManipulatorType type = ManipulatorType::A1;
    ManipulatorType flank_a = ManipulatorType::A1;
    ManipulatorType flank_b = ManipulatorType::A1;
};

std::string to_string(const TypeLabel& label, Family family);

struct TypeClassification {
    FamilyCase family;
    TypeLabel type_label;
    std::string label_text;  // printable form of type_label
    Table1Properties table1;
    bool has_table1 = false;
    std::vector<SurfaceEvaluation> surfaces;
    WorkspaceTopology computed;
    bool has_computed = false;
    // true when the computed off-axis node and void counts match the catalog
    // row (vacuously true when there is no single catalog row to compare)
    bool consistent = false;
    std::vector<std::string> warnings;
};

// Label-only fast path: no curve tracing, no workspace decomposition.
TypeClassification classify_label(const ManipulatorGeometry& g, double eps_zero = 1e-12,
                                  double eps_trans = 1e-9);

// Full classification: label + computed workspace signature + consistency.
TypeClassification classify(const ManipulatorGeometry& g, const TopologyConfig& cfg = {},
                            double eps_zero = 1e-12, double eps_trans = 1e-9);

} // namespace ws3r
