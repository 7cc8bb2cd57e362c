#include "ws3r/report.hpp"

#include "ws3r/ik.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace ws3r {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_px(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

// Streaming writer with a fixed key order and 2-space indentation; leaf
// arrays of numbers are emitted inline.
class JsonOut {
public:
    std::string text = "{";
    void key(const char* k)
    {
        if (comma_) text += ',';
        text += '\n';
        text.append(static_cast<std::size_t>(2 * depth_), ' ');
        if (k) {
            text += '"';
            text += k;
            text += "\": ";
        }
        comma_ = false;
    }
    void open(const char* k, char bracket)
    {
        key(k);
        text += bracket;
        ++depth_;
    }
    void close(char bracket)
    {
        --depth_;
        text += '\n';
        text.append(static_cast<std::size_t>(2 * depth_), ' ');
        text += bracket;
        comma_ = true;
    }
    void raw(const char* k, const std::string& literal)
    {
        key(k);
        text += literal;
        comma_ = true;
    }
    void kv(const char* k, double v) { raw(k, fmt(v)); }
    void kv(const char* k, int v) { raw(k, std::to_string(v)); }
    void kv(const char* k, unsigned long long v) { raw(k, std::to_string(v)); }
    void kv(const char* k, bool v) { raw(k, v ? "true" : "false"); }
    void kv(const char* k, const std::string& v) { raw(k, '"' + escape(v) + '"'); }
    void strings(const char* k, const std::vector<std::string>& v)
    {
        std::string lit = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) lit += ", ";
            lit += '"' + escape(v[i]) + '"';
        }
        lit += ']';
        raw(k, lit);
    }
    void numbers(const char* k, const std::vector<double>& v)
    {
        std::string lit = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) lit += ", ";
            lit += fmt(v[i]);
        }
        lit += ']';
        raw(k, lit);
    }
    std::string finish()
    {
        text += "\n}\n";
        return std::move(text);
    }

private:
    int depth_ = 1;
    bool comma_ = false;
};

const char* surface_name(SurfaceId s)
{
    switch (s) {
    case SurfaceId::E1: return "e1";
    case SurfaceId::E2: return "e2";
    case SurfaceId::E3: return "e3";
    case SurfaceId::Sigma1: return "sigma1";
    case SurfaceId::Sigma2Low: return "sigma2_low";
    case SurfaceId::Sigma2High: return "sigma2_high";
    case SurfaceId::DEqualities: return "d_equalities";
    case SurfaceId::IAsymptote: return "i_asymptote";
    }
    return "?";
}

const char* side_name(SurfaceSide s)
{
    switch (s) {
    case SurfaceSide::Below: return "below";
    case SurfaceSide::On: return "on";
    case SurfaceSide::Above: return "above";
    }
    return "?";
}

const char* kind_name(TypeLabel::Kind k)
{
    switch (k) {
    case TypeLabel::Kind::None: return "none";
    case TypeLabel::Kind::Type: return "type";
    case TypeLabel::Kind::Transition: return "transition";
    case TypeLabel::Kind::Ambiguous: return "ambiguous";
    }
    return "?";
}

const char* crit_name(CriticalKind k)
{
    switch (k) {
    case CriticalKind::cusp: return "cusp";
    case CriticalKind::node: return "node";
    case CriticalKind::isolated: return "isolated";
    }
    return "?";
}

template <typename Enum, int N>
Enum enum_from(const std::string& s, const char* what)
{
    for (int i = 0; i < N; ++i) {
        const Enum e = static_cast<Enum>(i);
        std::string name;
        if constexpr (std::is_same_v<Enum, SurfaceId>) name = surface_name(e);
        else if constexpr (std::is_same_v<Enum, SurfaceSide>) name = side_name(e);
        else if constexpr (std::is_same_v<Enum, TypeLabel::Kind>) name = kind_name(e);
        else if constexpr (std::is_same_v<Enum, CriticalKind>) name = crit_name(e);
        else name = to_string(e);
        if (name == s) return e;
    }
    throw Error(errc::invalid_input, std::string("unrecognized ") + what + ": " + s);
}

void write_critical_point(JsonOut& j, const CriticalPoint& p)
{
    j.open(nullptr, '{');
    j.kv("kind", std::string(crit_name(p.kind)));
    j.kv("rho", p.location.rho);
    j.kv("z", p.location.z);
    j.kv("on_axis", p.on_axis);
    j.kv("t_param", p.t_param);
    j.kv("transition_degenerate", p.transition_degenerate);
    j.kv("shared_theta3", p.shared_theta3);
    std::string pre = "[";
    for (std::size_t i = 0; i < p.preimages.size(); ++i) {
        if (i) pre += ", ";
        pre += '[' + fmt(p.preimages[i][0]) + ", " + fmt(p.preimages[i][1]) + ']';
    }
    pre += ']';
    j.raw("preimages", pre);
    j.numbers("residuals", p.residuals);
    j.numbers("algebraic_residuals", p.algebraic_residuals);
    j.close('}');
}

CriticalPoint read_critical_point(const nlohmann::json& e)
{
    CriticalPoint p;
    p.kind = enum_from<CriticalKind, 3>(e.at("kind").get<std::string>(), "critical kind");
    p.location.rho = e.at("rho").get<double>();
    p.location.z = e.at("z").get<double>();
    p.on_axis = e.at("on_axis").get<bool>();
    p.t_param = e.at("t_param").get<double>();
    p.transition_degenerate = e.at("transition_degenerate").get<bool>();
    p.shared_theta3 = e.at("shared_theta3").get<bool>();
    for (const auto& pre : e.at("preimages"))
        p.preimages.push_back({pre.at(0).get<double>(), pre.at(1).get<double>()});
    for (const auto& r : e.at("residuals")) p.residuals.push_back(r.get<double>());
    for (const auto& r : e.at("algebraic_residuals"))
        p.algebraic_residuals.push_back(r.get<double>());
    return p;
}

TypeLabel label_from_text(TypeLabel::Kind kind, const std::string& text)
{
    const auto type_from = [](const std::string& s) {
        for (int i = 0; i < kManipulatorTypeCount; ++i) {
            const auto t = static_cast<ManipulatorType>(i);
            if (to_string(t) == s) return t;
        }
        throw Error(errc::invalid_input, "unrecognized type label: " + s);
    };
    TypeLabel l;
    l.kind = kind;
    switch (kind) {
    case TypeLabel::Kind::None: break;
    case TypeLabel::Kind::Type: l.type = type_from(text); break;
    case TypeLabel::Kind::Transition: {
        const auto open = text.find('('), comma = text.find(','), closep = text.find(')');
        if (open == std::string::npos || comma == std::string::npos ||
            closep == std::string::npos)
            throw Error(errc::invalid_input, "malformed transition label: " + text);
        l.flank_a = type_from(text.substr(open + 1, comma - open - 1));
        l.flank_b = type_from(text.substr(comma + 1, closep - comma - 1));
        break;
    }
    case TypeLabel::Kind::Ambiguous: {
        const auto bar = text.find('|');
        if (bar == std::string::npos)
            throw Error(errc::invalid_input, "malformed ambiguous label: " + text);
        l.flank_a = type_from(text.substr(0, bar));
        l.flank_b = type_from(text.substr(bar + 1));
        break;
    }
    }
    return l;
}

} // namespace

AnalysisReport analyze_report(const ManipulatorGeometry& g, const TopologyConfig& cfg,
                              bool label_only, unsigned long long seed, double eps_zero,
                              double eps_trans)
{
    AnalysisReport r;
    r.geometry = g;
    r.config = cfg;
    r.seed = seed;
    r.label_only = label_only;
    r.classification = label_only ? classify_label(g, eps_zero, eps_trans)
                                  : classify(g, cfg, eps_zero, eps_trans);
    return r;
}

std::string report_json(const AnalysisReport& r)
{
    const auto& c = r.classification;
    JsonOut j;

    j.open("geometry", '{');
    j.kv("d2", r.geometry.d2);
    j.kv("d3", r.geometry.d3);
    j.kv("r2", r.geometry.r2);
    j.kv("r3", r.geometry.r3);
    j.kv("d4", r.geometry.d4);
    j.close('}');

    j.kv("family", to_string(c.family.label));
    j.open("zero_pattern", '{');
    j.kv("d2", c.family.zero_d2);
    j.kv("r2", c.family.zero_r2);
    j.kv("d3", c.family.zero_d3);
    j.kv("r3", c.family.zero_r3);
    j.close('}');

    j.kv("label_kind", std::string(kind_name(c.type_label.kind)));
    j.kv("label", c.label_text);

    if (c.has_table1) {
        j.open("table1", '{');
        j.kv("provenance", std::string("paper-sourced"));
        j.kv("voids", c.table1.voids);
        j.kv("nodes", c.table1.nodes);
        j.kv("four_solution_note", c.table1.four_solution_note);
        j.kv("t_connected", c.table1.t_connected);
        j.kv("well_connected", c.table1.well_connected);
        j.kv("annotation", c.table1.annotation);
        j.close('}');
    }

    j.open("surfaces", '[');
    for (const auto& s : c.surfaces) {
        j.open(nullptr, '{');
        j.kv("surface", std::string(surface_name(s.surface)));
        j.kv("expression", s.expression);
        j.kv("residual", s.residual);
        j.kv("side", std::string(side_name(s.side)));
        j.kv("defined", s.defined);
        if (s.has_aux) {
            j.kv("aux_a", s.aux_a);
            j.kv("aux_b", s.aux_b);
        }
        if (s.has_delta) j.kv("delta", s.delta);
        j.close('}');
    }
    j.close(']');

    if (c.has_computed) {
        const auto& t = c.computed;
        j.open("computed", '{');
        j.kv("n_cusps", t.n_cusps);
        j.kv("n_nodes_offaxis", t.n_nodes_offaxis);
        j.kv("n_nodes_onaxis", t.n_nodes_onaxis);
        j.kv("n_isolated_points", t.n_isolated_points);
        j.kv("n_voids", t.n_voids);
        j.kv("max_ik", t.max_ik);
        j.kv("binary", t.binary);
        j.kv("single_4region_covers_workspace", t.single_4region_covers_workspace);
        j.kv("raster_n_used", t.raster_n_used);
        j.open("regions", '[');
        for (const auto& reg : t.regions) {
            j.open(nullptr, '{');
            j.kv("id", reg.id);
            j.kv("ik_count", reg.ik_count);
            j.kv("area_estimate", reg.area_estimate);
            j.kv("touches_frame", reg.touches_frame);
            j.close('}');
        }
        j.close(']');
        j.open("critical_points", '[');
        for (const auto& p : t.analysis.cusps) write_critical_point(j, p);
        for (const auto& p : t.analysis.nodes) write_critical_point(j, p);
        for (const auto& p : t.analysis.isolated_points) write_critical_point(j, p);
        j.close(']');
        j.strings("region_warnings", t.warnings);
        j.strings("analysis_warnings", t.analysis.warnings);
        j.kv("resolution_warning", t.analysis.resolution_warning);
        j.close('}');
    }

    j.kv("consistent", c.consistent);

    j.open("config", '{');
    j.kv("grid_n", r.config.singularity.grid_n);
    j.kv("raster_n", r.config.raster_n);
    j.kv("eps_sing", r.config.singularity.eps_sing);
    j.kv("eps_pt", r.config.singularity.eps_pt);
    j.kv("eps_cert", r.config.singularity.eps_cert);
    j.kv("eps_axis", r.config.singularity.eps_axis);
    j.kv("min_cross_angle", r.config.singularity.min_cross_angle);
    j.kv("seed", r.seed);
    j.close('}');

    j.kv("label_only", r.label_only);
    j.strings("warnings", c.warnings);
    return j.finish();
}

AnalysisReport report_from_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::invalid_input, std::string("report parse failure: ") + e.what());
    }
    try {
        AnalysisReport r;
        const auto& geo = doc.at("geometry");
        r.geometry.d2 = geo.at("d2").get<double>();
        r.geometry.d3 = geo.at("d3").get<double>();
        r.geometry.r2 = geo.at("r2").get<double>();
        r.geometry.r3 = geo.at("r3").get<double>();
        r.geometry.d4 = geo.at("d4").get<double>();

        auto& c = r.classification;
        for (int i = 0; i < 12; ++i) {
            const auto f = static_cast<Family>(i);
            if (to_string(f) == doc.at("family").get<std::string>()) c.family.label = f;
        }
        const auto& zp = doc.at("zero_pattern");
        c.family.zero_d2 = zp.at("d2").get<bool>();
        c.family.zero_r2 = zp.at("r2").get<bool>();
        c.family.zero_d3 = zp.at("d3").get<bool>();
        c.family.zero_r3 = zp.at("r3").get<bool>();

        const auto kind = enum_from<TypeLabel::Kind, 4>(
            doc.at("label_kind").get<std::string>(), "label kind");
        c.label_text = doc.at("label").get<std::string>();
        c.type_label = label_from_text(kind, c.label_text);

        if (doc.contains("table1")) {
            const auto& t1 = doc.at("table1");
            c.has_table1 = true;
            c.table1.voids = t1.at("voids").get<int>();
            c.table1.nodes = t1.at("nodes").get<int>();
            c.table1.four_solution_note = t1.at("four_solution_note").get<std::string>();
            c.table1.t_connected = t1.at("t_connected").get<bool>();
            c.table1.well_connected = t1.at("well_connected").get<bool>();
            c.table1.annotation = t1.at("annotation").get<std::string>();
        }

        for (const auto& e : doc.at("surfaces")) {
            SurfaceEvaluation s;
            s.surface = enum_from<SurfaceId, 8>(e.at("surface").get<std::string>(), "surface");
            s.expression = e.at("expression").get<std::string>();
            s.residual = e.at("residual").get<double>();
            s.side = enum_from<SurfaceSide, 3>(e.at("side").get<std::string>(), "side");
            s.defined = e.at("defined").get<bool>();
            if (e.contains("aux_a")) {
                s.has_aux = true;
                s.aux_a = e.at("aux_a").get<double>();
                s.aux_b = e.at("aux_b").get<double>();
            }
            if (e.contains("delta")) {
                s.has_delta = true;
                s.delta = e.at("delta").get<double>();
            }
            c.surfaces.push_back(s);
        }

        if (doc.contains("computed")) {
            const auto& tc = doc.at("computed");
            c.has_computed = true;
            auto& t = c.computed;
            t.n_cusps = tc.at("n_cusps").get<int>();
            t.n_nodes_offaxis = tc.at("n_nodes_offaxis").get<int>();
            t.n_nodes_onaxis = tc.at("n_nodes_onaxis").get<int>();
            t.n_isolated_points = tc.at("n_isolated_points").get<int>();
            t.n_voids = tc.at("n_voids").get<int>();
            t.max_ik = tc.at("max_ik").get<int>();
            t.binary = tc.at("binary").get<bool>();
            t.single_4region_covers_workspace =
                tc.at("single_4region_covers_workspace").get<bool>();
            t.raster_n_used = tc.at("raster_n_used").get<int>();
            for (const auto& e : tc.at("regions")) {
                Region reg;
                reg.id = e.at("id").get<int>();
                reg.ik_count = e.at("ik_count").get<int>();
                reg.area_estimate = e.at("area_estimate").get<double>();
                reg.touches_frame = e.at("touches_frame").get<bool>();
                t.regions.push_back(reg);
            }
            for (const auto& e : tc.at("critical_points")) {
                const CriticalPoint p = read_critical_point(e);
                if (p.kind == CriticalKind::cusp) t.analysis.cusps.push_back(p);
                else if (p.kind == CriticalKind::node) t.analysis.nodes.push_back(p);
                else t.analysis.isolated_points.push_back(p);
            }
            for (const auto& w : tc.at("region_warnings"))
                t.warnings.push_back(w.get<std::string>());
            for (const auto& w : tc.at("analysis_warnings"))
                t.analysis.warnings.push_back(w.get<std::string>());
            t.analysis.resolution_warning = tc.at("resolution_warning").get<bool>();
        }

        c.consistent = doc.at("consistent").get<bool>();

        const auto& cfg = doc.at("config");
        r.config.singularity.grid_n = cfg.at("grid_n").get<int>();
        r.config.raster_n = cfg.at("raster_n").get<int>();
        r.config.singularity.eps_sing = cfg.at("eps_sing").get<double>();
        r.config.singularity.eps_pt = cfg.at("eps_pt").get<double>();
        r.config.singularity.eps_cert = cfg.at("eps_cert").get<double>();
        r.config.singularity.eps_axis = cfg.at("eps_axis").get<double>();
        r.config.singularity.min_cross_angle = cfg.at("min_cross_angle").get<double>();
        r.seed = cfg.at("seed").get<unsigned long long>();

        r.label_only = doc.at("label_only").get<bool>();
        for (const auto& w : doc.at("warnings")) c.warnings.push_back(w.get<std::string>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::invalid_input, std::string("report field failure: ") + e.what());
    }
}

ManipulatorGeometry load_geometry_json(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::invalid_input, std::string("geometry parse failure: ") + e.what());
    }
    if (!doc.is_object())
        throw Error(errc::invalid_input, "geometry file must hold a JSON object");
    const char* const keys[] = {"d2", "d3", "r2", "r3", "d4"};
    for (const auto& item : doc.items()) {
        if (std::none_of(std::begin(keys), std::end(keys),
                         [&](const char* k) { return item.key() == k; }))
            throw Error(errc::invalid_input, "unknown geometry key: " + item.key());
        if (!item.value().is_number())
            throw Error(errc::invalid_input, "geometry key " + item.key() + " must be numeric");
    }
    for (const char* k : keys)
        if (!doc.contains(k))
            throw Error(errc::invalid_input, std::string("missing geometry key: ") + k);
    return make_geometry(doc.at("d2").get<double>(), doc.at("d3").get<double>(),
                         doc.at("r2").get<double>(), doc.at("r3").get<double>(),
                         doc.at("d4").get<double>());
}

std::string workspace_svg(const AnalysisReport& r, int raster_n)
{
    if (!r.classification.has_computed)
        throw Error(errc::invalid_input, "workspace plot needs a computed analysis");
    const auto& g = r.geometry;
    const auto& analysis = r.classification.computed.analysis;
    const double L = g.length_scale();
    const double rmax = 1.05 * L, zmax = 1.05 * L;

    const int nx = std::max(raster_n, 16), nz = 2 * nx;
    const double cell = rmax / nx;

    const double margin = 20, plot_w = 420;
    const double scale = plot_w / rmax;
    const double plot_h = 2 * zmax * scale;
    const double width = plot_w + 2 * margin, height = plot_h + 2 * margin;
    const auto X = [&](double rho) { return margin + rho * scale; };
    const auto Y = [&](double z) { return margin + (zmax - z) * scale; };

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_px(width) +
           "\" height=\"" + fmt_px(height) + "\" viewBox=\"0 0 " + fmt_px(width) + " " +
           fmt_px(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt_px(width) + "\" height=\"" + fmt_px(height) +
           "\" fill=\"#FFFFFF\"/>\n";

    // solution-count shading, run-length merged per row (top row first)
    for (int iz = nz - 1; iz >= 0; --iz) {
        const double z = -zmax + (iz + 0.5) * cell;
        int run_start = -1, run_count = 0;
        const auto flush = [&](int end_ix) {
            if (run_start < 0) return;
            const char* color = run_count == 4 ? "#6E6E6E" : "#C8C8C8";
            svg += "<rect x=\"" + fmt_px(X(run_start * cell)) + "\" y=\"" +
                   fmt_px(Y(z + 0.5 * cell)) + "\" width=\"" +
                   fmt_px((end_ix - run_start) * cell * scale) + "\" height=\"" +
                   fmt_px(cell * scale) + "\" fill=\"" + color + "\"/>\n";
            run_start = -1;
        };
        for (int ix = 0; ix < nx; ++ix) {
            const double rho = (ix + 0.5) * cell;
            const int count = count_ik(g, rho, z);
            const int bucket = count >= 4 ? 4 : count >= 2 ? 2 : 0;
            if (bucket == 0) {
                flush(ix);
                continue;
            }
            if (run_start >= 0 && bucket != run_count) flush(ix);
            if (run_start < 0) {
                run_start = ix;
                run_count = bucket;
            }
        }
        flush(nx);
    }

    // singular-curve images
    for (const auto& curve : analysis.planar_curves) {
        if (curve.vertices.empty()) continue;
        if (curve.degenerate_to_point) {
            svg += "<circle cx=\"" + fmt_px(X(curve.vertices[0].rho)) + "\" cy=\"" +
                   fmt_px(Y(curve.vertices[0].z)) + "\" r=\"2\" fill=\"#000000\"/>\n";
            continue;
        }
        std::string d = "M";
        for (std::size_t i = 0; i < curve.vertices.size(); ++i) {
            d += (i ? " L" : " ") + fmt_px(X(curve.vertices[i].rho)) + " " +
                 fmt_px(Y(curve.vertices[i].z));
        }
        const bool closed = curve.preimage >= 0 &&
                            curve.preimage < static_cast<int>(analysis.torus_curves.size()) &&
                            analysis.torus_curves[static_cast<std::size_t>(curve.preimage)].closed;
        if (closed) d += " Z";
        svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.2\"/>\n";
    }

    // critical-point markers: circles, crosses, diamonds
    for (const auto& p : analysis.cusps)
        svg += "<circle cx=\"" + fmt_px(X(p.location.rho)) + "\" cy=\"" + fmt_px(Y(p.location.z)) +
               "\" r=\"5\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    for (const auto& p : analysis.nodes) {
        const double x = X(p.location.rho), y = Y(p.location.z);
        svg += "<path d=\"M " + fmt_px(x - 5) + " " + fmt_px(y - 5) + " L " + fmt_px(x + 5) +
               " " + fmt_px(y + 5) + " M " + fmt_px(x - 5) + " " + fmt_px(y + 5) + " L " +
               fmt_px(x + 5) + " " + fmt_px(y - 5) +
               "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    }
    for (const auto& p : analysis.isolated_points) {
        const double x = X(p.location.rho), y = Y(p.location.z);
        svg += "<path d=\"M " + fmt_px(x) + " " + fmt_px(y - 6) + " L " + fmt_px(x + 6) + " " +
               fmt_px(y) + " L " + fmt_px(x) + " " + fmt_px(y + 6) + " L " + fmt_px(x - 6) +
               " " + fmt_px(y) +
               " Z\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace ws3r
