#include "ws3r/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ws3r {

std::string to_string(Family f)
{
    switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::C: return "C";
    case Family::D: return "D";
    case Family::E: return "E";
    case Family::F: return "F";
    case Family::G: return "G";
    case Family::H: return "H";
    case Family::I: return "I";
    case Family::J: return "J";
    case Family::GenericR3Zero: return "GENERIC_R3ZERO";
    case Family::Generic: return "GENERIC";
    }
    return "?";
}

std::string to_string(ManipulatorType t)
{
    switch (t) {
    case ManipulatorType::A1: return "A1";
    case ManipulatorType::A2: return "A2";
    case ManipulatorType::A3: return "A3";
    case ManipulatorType::B1: return "B1";
    case ManipulatorType::B2: return "B2";
    case ManipulatorType::C: return "C";
    case ManipulatorType::D1: return "D1";
    case ManipulatorType::D2: return "D2";
    case ManipulatorType::D3: return "D3";
    case ManipulatorType::D4: return "D4";
    case ManipulatorType::D5: return "D5";
    case ManipulatorType::D6: return "D6";
    case ManipulatorType::E: return "E";
    case ManipulatorType::F1: return "F1";
    case ManipulatorType::F2: return "F2";
    case ManipulatorType::G: return "G";
    case ManipulatorType::H: return "H";
    case ManipulatorType::I1: return "I1";
    case ManipulatorType::I2: return "I2";
    case ManipulatorType::I3: return "I3";
    case ManipulatorType::I4: return "I4";
    case ManipulatorType::J: return "J";
    }
    return "?";
}

FamilyCase family_case(const ManipulatorGeometry& g, double eps_zero)
{
    validate_geometry(g);
    const double L = g.length_scale();
    FamilyCase fc;
    fc.zero_d2 = std::abs(g.d2) < eps_zero * L;
    fc.zero_r2 = std::abs(g.r2) < eps_zero * L;
    fc.zero_d3 = std::abs(g.d3) < eps_zero * L;
    fc.zero_r3 = std::abs(g.r3) < eps_zero * L;

    // The published tree names five zero patterns per r3 branch.  The
    // pattern d2, r2 > 0, d3 = 0 has no dedicated case: with r3 = 0 we fold
    // it into C (whose catalog row only demands d3 = r3 = 0), with r3 > 0 it
    // stays generic.  Either way a warning records the stretch.
    if (fc.zero_r3) {
        if (fc.zero_d2 && !fc.zero_r2 && !fc.zero_d3) fc.label = Family::A;
        else if (fc.zero_d2 && fc.zero_r2 && !fc.zero_d3) fc.label = Family::B;
        else if (fc.zero_d2 && !fc.zero_r2 && fc.zero_d3) fc.label = Family::C;
        else if (!fc.zero_d2 && fc.zero_r2 && !fc.zero_d3) fc.label = Family::D;
        else if (!fc.zero_d2 && fc.zero_r2 && fc.zero_d3) fc.label = Family::E;
        else if (!fc.zero_d2 && !fc.zero_r2 && fc.zero_d3) {
            fc.label = Family::C;
            fc.warnings.push_back(
                "zero pattern (d3 = 0, r3 = 0) with d2, r2 > 0 has no named case; "
                "treated as case C, whose catalog row requires only d3 = r3 = 0");
        } else {
            fc.label = Family::GenericR3Zero;
        }
    } else {
        if (fc.zero_d2 && !fc.zero_r2 && !fc.zero_d3) fc.label = Family::F;
        else if (fc.zero_d2 && fc.zero_r2 && !fc.zero_d3) fc.label = Family::G;
        else if (fc.zero_d2 && !fc.zero_r2 && fc.zero_d3) fc.label = Family::H;
        else if (!fc.zero_d2 && fc.zero_r2 && !fc.zero_d3) fc.label = Family::I;
        else if (!fc.zero_d2 && fc.zero_r2 && fc.zero_d3) fc.label = Family::J;
        else if (!fc.zero_d2 && !fc.zero_r2 && fc.zero_d3) {
            fc.label = Family::Generic;
            fc.warnings.push_back(
                "zero pattern (d3 = 0, r3 > 0) with d2, r2 > 0 falls outside the ten "
                "named cases; no type label assigned");
        } else {
            fc.label = Family::Generic;
        }
    }
    return fc;
}

Table1Properties table1_properties(ManipulatorType t)
{
    // Values quoted verbatim from the published classification table.
    // `nodes` counts off-axis node points; annotations flag rows that
    // contradict the table's own defining text.
    Table1Properties p;
    auto set = [&](int voids, int nodes, const char* note, bool tconn, bool wconn,
                   const char* annotation = "") {
        p.voids = voids;
        p.nodes = nodes;
        p.four_solution_note = note;
        p.t_connected = tconn;
        p.well_connected = wconn;
        p.annotation = annotation;
    };
    switch (t) {
    case ManipulatorType::A1: set(0, 0, "", true, false); break;
    case ManipulatorType::A2: set(0, 2, "", true, false); break;
    case ManipulatorType::A3: set(0, 4, "", true, false); break;
    case ManipulatorType::B1: set(0, 0, "All the workspace", true, true); break;
    case ManipulatorType::B2: set(0, 1, "All the workspace", false, false); break;
    case ManipulatorType::C:
        set(0, 0, "All the workspace", true, true,
            "catalog row states only d3 = 0, r3 = 0; the case definition also requires d2 = 0");
        break;
    case ManipulatorType::D1:
        set(1, 2, "", false, false,
            "catalog row prints the ordering d4 > d2 > d3, duplicating D4; the defining "
            "text's d4 < d2 < d3 is used for labeling");
        break;
    case ManipulatorType::D2: set(0, 0, "", false, false); break;
    case ManipulatorType::D3: set(0, 1, "", false, false); break;
    case ManipulatorType::D4: set(0, 2, "", false, false); break;
    case ManipulatorType::D5: set(0, 0, "", true, false); break;
    case ManipulatorType::D6: set(1, 0, "Null", true, false); break;
    case ManipulatorType::E: set(0, 0, "All the workspace", true, true); break;
    case ManipulatorType::F1: set(0, 0, "", true, false); break;
    case ManipulatorType::F2: set(0, 2, "", false, false); break;
    case ManipulatorType::G: set(0, 0, "All the workspace", true, true); break;
    case ManipulatorType::H: set(0, 0, "All the workspace", true, true); break;
    case ManipulatorType::I1: set(0, 0, "", false, false); break;
    case ManipulatorType::I2: set(1, 2, "", false, false); break;
    case ManipulatorType::I3: set(1, 0, "", true, false); break;
    case ManipulatorType::I4:
        set(1, 2, "", true, false,
            "catalog row omits the defining inequalities (prints only r2 = 0) and marks the "
            "workspace t-connected where the defining text says it is not");
        break;
    case ManipulatorType::J: set(1, 0, "All the workspace", true, false); break;
    default: throw Error(errc::unknown_type, "no catalog row for this type");
    }
    return p;
}

namespace {

SurfaceSide side_of(double residual, double eps_trans)
{
    if (std::abs(residual) < eps_trans) return SurfaceSide::On;
    return residual < 0 ? SurfaceSide::Below : SurfaceSide::Above;
}

} // namespace

std::vector<SurfaceEvaluation> evaluate_surfaces(const ManipulatorGeometry& g,
                                                 const FamilyCase& fc, double eps_trans)
{
    const double L = g.length_scale();
    const double aux_a = std::sqrt((g.d3 + g.d2) * (g.d3 + g.d2) + g.r2 * g.r2);
    const double aux_b = std::sqrt((g.d3 - g.d2) * (g.d3 - g.d2) + g.r2 * g.r2);

    auto make = [&](SurfaceId id, std::string expr, double residual) {
        SurfaceEvaluation s;
        s.surface = id;
        s.expression = std::move(expr);
        s.residual = residual;
        s.side = side_of(residual, eps_trans);
        return s;
    };
    auto with_aux = [&](SurfaceEvaluation s) {
        s.has_aux = true;
        s.aux_a = aux_a;
        s.aux_b = aux_b;
        return s;
    };

    std::vector<SurfaceEvaluation> out;
    switch (fc.label) {
    case Family::A: {
        out.push_back(with_aux(make(SurfaceId::E2, "d4 = d3", (g.d4 - g.d3) / L)));
        const double e3 = std::sqrt(g.d3 * g.d3 + g.r2 * g.r2);
        out.push_back(with_aux(make(SurfaceId::E3, "d4 = sqrt(d3^2 + r2^2)", (g.d4 - e3) / L)));
        break;
    }
    case Family::B:
        out.push_back(with_aux(make(SurfaceId::E2, "d4 = d3", (g.d4 - g.d3) / L)));
        break;
    case Family::D:
        out.push_back(with_aux(make(SurfaceId::DEqualities, "d4 = d2", (g.d4 - g.d2) / L)));
        out.push_back(with_aux(make(SurfaceId::DEqualities, "d4 = d3", (g.d4 - g.d3) / L)));
        out.push_back(with_aux(make(SurfaceId::DEqualities, "d3 = d2", (g.d3 - g.d2) / L)));
        break;
    case Family::F: {
        const double s1 = std::sqrt(g.d3 * g.d3 + g.r2 * g.r2);
        out.push_back(make(SurfaceId::Sigma1, "d4 = sqrt(d3^2 + r2^2)", (g.d4 - s1) / L));
        break;
    }
    case Family::I: {
        // critical last-link length delta; its radicand flips sign with
        // d3^2 - d2^2, and the surface has no real locus when negative
        const double denom = g.d3 * g.d3 - g.d2 * g.d2;
        const double radicand = denom != 0 ? 1 + g.r3 * g.r3 / denom
                                           : -std::numeric_limits<double>::infinity();
        SurfaceEvaluation s;
        s.surface = denom > 0 ? SurfaceId::Sigma2High : SurfaceId::Sigma2Low;
        s.expression = "d4 = d2*sqrt(1 + r3^2/(d3^2 - d2^2))";
        if (std::isfinite(radicand) && radicand >= 0) {
            s.has_delta = true;
            s.delta = g.d2 * std::sqrt(radicand);
            s.residual = (g.d4 - s.delta) / L;
            s.side = side_of(s.residual, eps_trans);
        } else {
            s.defined = false;
        }
        out.push_back(s);
        out.push_back(make(SurfaceId::IAsymptote, "d3 = d2", (g.d3 - g.d2) / L));
        break;
    }
    default:
        throw Error(errc::invalid_input,
                    "separating surfaces exist only for cases A, B, D, F, I");
    }
    return out;
}

std::string to_string(const TypeLabel& label, Family family)
{
    switch (label.kind) {
    case TypeLabel::Kind::None: return to_string(family);
    case TypeLabel::Kind::Type: return to_string(label.type);
    case TypeLabel::Kind::Transition:
        return "Transition(" + to_string(label.flank_a) + "," + to_string(label.flank_b) + ")";
    case TypeLabel::Kind::Ambiguous:
        return to_string(label.flank_a) + "|" + to_string(label.flank_b);
    }
    return "?";
}

namespace {

TypeLabel type_of(ManipulatorType t)
{
    TypeLabel l;
    l.kind = TypeLabel::Kind::Type;
    l.type = t;
    return l;
}

TypeLabel transition(ManipulatorType a, ManipulatorType b)
{
    TypeLabel l;
    l.kind = TypeLabel::Kind::Transition;
    l.flank_a = a;
    l.flank_b = b;
    return l;
}

// Flanks of one D-family equality plane.  The residual of the plane NOT
// containing the tied pair decides which pair of orderings meet here; a tie
// there too (all three lengths equal) takes the ">" branch.
TypeLabel d_plane_transition(int plane, const std::vector<SurfaceEvaluation>& s)
{
    using MT = ManipulatorType;
    switch (plane) {
    case 0:  // d4 = d2, split by d3 vs d2
        return s[2].side == SurfaceSide::Below ? transition(MT::D4, MT::D5)
                                               : transition(MT::D1, MT::D2);
    case 1:  // d4 = d3, split by d3 vs d2
        return s[2].side == SurfaceSide::Below ? transition(MT::D5, MT::D6)
                                               : transition(MT::D2, MT::D3);
    default:  // d3 = d2, split by d4 vs d2
        return s[0].side == SurfaceSide::Below ? transition(MT::D6, MT::D1)
                                               : transition(MT::D3, MT::D4);
    }
}

TypeLabel resolve_label(const ManipulatorGeometry& g, const FamilyCase& fc,
                        const std::vector<SurfaceEvaluation>& s,
                        std::vector<std::string>& warnings)
{
    using MT = ManipulatorType;
    const auto on = [&](std::size_t i) {
        return s[i].defined && s[i].side == SurfaceSide::On;
    };

    switch (fc.label) {
    case Family::A:
        if (on(0) && on(1))
            warnings.push_back("both separating surfaces within tolerance; labeled by the first");
        if (on(0)) return transition(MT::A1, MT::A2);
        if (on(1)) return transition(MT::A2, MT::A3);
        if (s[0].side == SurfaceSide::Below) return type_of(MT::A1);
        return s[1].side == SurfaceSide::Below ? type_of(MT::A2) : type_of(MT::A3);
    case Family::B:
        if (on(0)) return transition(MT::B1, MT::B2);
        return s[0].side == SurfaceSide::Below ? type_of(MT::B1) : type_of(MT::B2);
    case Family::D: {
        int first_on = -1, n_on = 0;
        for (int i = 0; i < 3; ++i)
            if (on(static_cast<std::size_t>(i))) {
                if (first_on < 0) first_on = i;
                ++n_on;
            }
        if (n_on > 1)
            warnings.push_back("several link-length equalities hold at once; "
                               "labeled by the first plane");
        if (first_on >= 0) return d_plane_transition(first_on, s);
        const bool a = s[0].side == SurfaceSide::Above;  // d4 > d2
        const bool b = s[1].side == SurfaceSide::Above;  // d4 > d3
        const bool c = s[2].side == SurfaceSide::Above;  // d3 > d2
        if (c) {
            if (!a && !b) return type_of(MT::D1);  // d4 < d2 < d3
            if (a && !b) return type_of(MT::D2);   // d2 < d4 < d3
            return type_of(MT::D3);                // d2 < d3 < d4
        }
        if (a && b) return type_of(MT::D4);      // d3 < d2 < d4
        if (!a && b) return type_of(MT::D5);     // d3 < d4 < d2
        return type_of(MT::D6);                  // d4 < d3 < d2
    }
    case Family::F:
        if (on(0)) return transition(MT::F1, MT::F2);
        return s[0].side == SurfaceSide::Below ? type_of(MT::F1) : type_of(MT::F2);
    case Family::I: {
        if (s[1].side == SurfaceSide::On) {
            // on the d3 = d2 asymptote the critical length diverges; the
            // published transition examples split the flanks by d4 vs d2
            return g.d4 >= g.d2 ? transition(MT::I1, MT::I3) : transition(MT::I2, MT::I3);
        }
        const bool high = s[1].side == SurfaceSide::Above;  // d3 > d2
        if (!s[0].defined) {
            // no real critical length on this side: I3 and I4 cannot be told
            // apart without the computed workspace signature
            warnings.push_back("critical last-link length undefined "
                               "(r3^2 > d2^2 - d3^2): label needs the computed signature");
            TypeLabel l;
            l.kind = TypeLabel::Kind::Ambiguous;
            l.flank_a = MT::I3;
            l.flank_b = MT::I4;
            return l;
        }
        if (on(0))
            return high ? transition(MT::I1, MT::I2) : transition(MT::I3, MT::I4);
        const bool above = s[0].side == SurfaceSide::Above;  // d4 > delta
        if (high) return above ? type_of(MT::I1) : type_of(MT::I2);
        return above ? type_of(MT::I3) : type_of(MT::I4);
    }
    default:
        break;
    }
    return {};
}

} // namespace

TypeClassification classify_label(const ManipulatorGeometry& g, double eps_zero,
                                  double eps_trans)
{
    TypeClassification out;
    out.family = family_case(g, eps_zero);
    out.warnings = out.family.warnings;
    out.consistent = true;  // vacuously: nothing computed yet

    switch (out.family.label) {
    case Family::C: out.type_label = type_of(ManipulatorType::C); break;
    case Family::E: out.type_label = type_of(ManipulatorType::E); break;
    case Family::G: out.type_label = type_of(ManipulatorType::G); break;
    case Family::H: out.type_label = type_of(ManipulatorType::H); break;
    case Family::J: out.type_label = type_of(ManipulatorType::J); break;
    case Family::GenericR3Zero:
    case Family::Generic:
        out.type_label.kind = TypeLabel::Kind::None;
        break;
    default:
        out.surfaces = evaluate_surfaces(g, out.family, eps_trans);
        out.type_label = resolve_label(g, out.family, out.surfaces, out.warnings);
        break;
    }

    if (out.type_label.kind == TypeLabel::Kind::Type) {
        out.table1 = table1_properties(out.type_label.type);
        out.has_table1 = true;
        if (!out.table1.annotation.empty())
            out.warnings.push_back("catalog: " + out.table1.annotation);
    }
    out.label_text = to_string(out.type_label, out.family.label);
    return out;
}

TypeClassification classify(const ManipulatorGeometry& g, const TopologyConfig& cfg,
                            double eps_zero, double eps_trans)
{
    TypeClassification out = classify_label(g, eps_zero, eps_trans);
    out.computed = topology_signature(g, cfg);
    out.has_computed = true;

    if (out.type_label.kind == TypeLabel::Kind::Ambiguous) {
        // pick the flank whose catalog signature is nearest the computed one
        // (ties go to the first flank)
        const auto pa = table1_properties(out.type_label.flank_a);
        const auto pb = table1_properties(out.type_label.flank_b);
        const auto dist = [&](const Table1Properties& p) {
            return std::abs(p.voids - out.computed.n_voids) +
                   std::abs(p.nodes - out.computed.n_nodes_offaxis);
        };
        const ManipulatorType chosen =
            dist(pa) <= dist(pb) ? out.type_label.flank_a : out.type_label.flank_b;
        out.type_label = type_of(chosen);
        out.table1 = table1_properties(chosen);
        out.has_table1 = true;
        if (!out.table1.annotation.empty())
            out.warnings.push_back("catalog: " + out.table1.annotation);
        out.warnings.push_back("label " + to_string(chosen) +
                               " chosen by nearest computed signature");
        out.label_text = to_string(out.type_label, out.family.label);
    }

    if (out.has_table1) {
        out.consistent = out.table1.voids == out.computed.n_voids &&
                         out.table1.nodes == out.computed.n_nodes_offaxis;
        if (!out.consistent)
            out.warnings.push_back(
                "computed signature (" + std::to_string(out.computed.n_voids) + " voids, " +
                std::to_string(out.computed.n_nodes_offaxis) + " off-axis nodes) differs from "
                "the catalog row for " + to_string(out.type_label.type) + " (" +
                std::to_string(out.table1.voids) + ", " + std::to_string(out.table1.nodes) +
                "); the computed workspace is authoritative, the label follows the "
                "defining inequalities");
    } else {
        out.consistent = true;
    }
    return out;
}

} // namespace ws3r
