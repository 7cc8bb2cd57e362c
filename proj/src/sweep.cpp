#include "ws3r/sweep.hpp"

#include "ws3r/singularity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

namespace ws3r {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double* param_slot(ManipulatorGeometry& g, const std::string& name)
{
    if (name == "d2") return &g.d2;
    if (name == "d3") return &g.d3;
    if (name == "r2") return &g.r2;
    if (name == "r3") return &g.r3;
    if (name == "d4") return &g.d4;
    return nullptr;
}

void check_axis(const SweepAxis& a)
{
    ManipulatorGeometry probe;
    if (!param_slot(probe, a.param))
        throw Error(errc::invalid_input, "unknown sweep parameter: " + a.param);
    if (a.n < 1) throw Error(errc::invalid_input, "sweep axis needs at least one sample");
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.lo > a.hi)
        throw Error(errc::invalid_input, "bad sweep range for " + a.param);
}

double axis_value(const SweepAxis& a, int i)
{
    if (a.n <= 1) return a.lo;
    return a.lo + (a.hi - a.lo) * i / (a.n - 1);
}

} // namespace

SweepMap run_sweep(const ManipulatorGeometry& base, const SweepAxis& x, const SweepAxis& y,
                   const std::string& mode, int threads)
{
    check_axis(x);
    check_axis(y);
    if (x.param == y.param)
        throw Error(errc::invalid_input, "the two swept parameters must differ");
    if (mode != "label" && mode != "nodes")
        throw Error(errc::invalid_input, "sweep mode must be label or nodes");

    SweepMap m;
    m.x = x;
    m.y = y;
    m.base = base;
    m.mode = mode;
    m.cells.resize(static_cast<std::size_t>(x.n) * static_cast<std::size_t>(y.n));

    const auto fill = [&](std::size_t ci) {
        SweepCell& cell = m.cells[ci];
        const int ix = static_cast<int>(ci) % x.n, iy = static_cast<int>(ci) / x.n;
        cell.x = axis_value(x, ix);
        cell.y = axis_value(y, iy);
        ManipulatorGeometry g = base;
        *param_slot(g, x.param) = cell.x;
        *param_slot(g, y.param) = cell.y;
        try {
            const auto c = classify_label(g);
            cell.on_transition = c.type_label.kind == TypeLabel::Kind::Transition;
            if (mode == "label") {
                cell.label = c.label_text;
            } else {
                int off_axis = 0;
                for (const auto& n : detect_nodes(g))
                    if (!n.on_axis) ++off_axis;
                cell.label = std::to_string(off_axis);
            }
        } catch (const Error&) {
            cell.valid = false;
            cell.label = "INVALID";
        }
    };

    const std::size_t total = m.cells.size();
    std::size_t pool = threads > 0 ? static_cast<std::size_t>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    // label cells are microseconds each; threading only pays off for node counts
    if (mode == "label") pool = 1;
    pool = std::min(pool, total);
    if (pool <= 1) {
        for (std::size_t ci = 0; ci < total; ++ci) fill(ci);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(pool);
        for (std::size_t w = 0; w < pool; ++w)
            workers.emplace_back([&] {
                for (std::size_t ci = next.fetch_add(1); ci < total; ci = next.fetch_add(1))
                    fill(ci);
            });
        for (auto& t : workers) t.join();
    }
    return m;
}

std::string sweep_csv(const SweepMap& m)
{
    std::string out = "x,y,label,on_transition\n";
    for (const auto& cell : m.cells) {
        std::string label = cell.label;
        if (label.find(',') != std::string::npos || label.find('"') != std::string::npos) {
            std::string quoted = "\"";
            for (char c : label) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            quoted += '"';
            label = quoted;
        }
        out += fmt(cell.x) + "," + fmt(cell.y) + "," + label + "," +
               (cell.on_transition ? "1" : "0") + "\n";
    }
    return out;
}

std::string sweep_svg(const SweepMap& m)
{
    static const char* const palette[] = {
        "#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860",
        "#DA8BC3", "#CCB974", "#64B5CD", "#8C8C8C", "#EDB120", "#77AC30",
        "#7E2F8E", "#A2142F", "#0072BD", "#D95319",
    };
    constexpr std::size_t palette_n = sizeof palette / sizeof palette[0];

    // color per label in row-major first-appearance order; transition cells
    // are drawn black on top of whatever domain they border
    std::vector<std::string> order;
    const auto color_of = [&](const std::string& label) -> std::string {
        if (label == "INVALID") return "#FFE0E0";
        auto it = std::find(order.begin(), order.end(), label);
        if (it == order.end()) {
            order.push_back(label);
            it = order.end() - 1;
        }
        const auto idx = static_cast<std::size_t>(it - order.begin());
        return palette[idx % palette_n];
    };

    const int nx = m.x.n, ny = m.y.n;
    const double cell = std::max(4.0, 480.0 / std::max(nx, ny));
    const double ml = 60, mt = 20, mb = 45, legend_w = 170;
    const double plot_w = cell * nx, plot_h = cell * ny;
    const double width = ml + plot_w + legend_w, height = mt + plot_h + mb;
    const auto px = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) + "\" height=\"" +
           px(height) + "\" viewBox=\"0 0 " + px(width) + " " + px(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + px(width) + "\" height=\"" + px(height) +
           "\" fill=\"#FFFFFF\"/>\n";

    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const auto& c = m.cells[static_cast<std::size_t>(iy) * nx + ix];
            const std::string fill = c.on_transition ? "#000000" : color_of(c.label);
            svg += "<rect x=\"" + px(ml + ix * cell) + "\" y=\"" +
                   px(mt + (ny - 1 - iy) * cell) + "\" width=\"" + px(cell) + "\" height=\"" +
                   px(cell) + "\" fill=\"" + fill + "\"/>\n";
        }
    }

    svg += "<rect x=\"" + px(ml) + "\" y=\"" + px(mt) + "\" width=\"" + px(plot_w) +
           "\" height=\"" + px(plot_h) +
           "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    const auto text = [&](double tx, double ty, const std::string& s, const char* anchor) {
        std::string esc;
        for (char c : s) {
            if (c == '<') esc += "&lt;";
            else if (c == '>') esc += "&gt;";
            else if (c == '&') esc += "&amp;";
            else esc += c;
        }
        svg += "<text x=\"" + px(tx) + "\" y=\"" + px(ty) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" + anchor +
               "\">" + esc + "</text>\n";
    };
    text(ml + plot_w / 2, mt + plot_h + 32, m.x.param, "middle");
    text(ml - 8, mt + plot_h / 2, m.y.param, "end");
    text(ml, mt + plot_h + 16, fmt(m.x.lo), "middle");
    text(ml + plot_w, mt + plot_h + 16, fmt(m.x.hi), "middle");
    text(ml - 8, mt + plot_h, fmt(m.y.lo), "end");
    text(ml - 8, mt + 10, fmt(m.y.hi), "end");

    double ly = mt + 10;
    text(ml + plot_w + 16, ly, "legend", "start");
    ly += 10;
    for (const auto& label : order) {
        svg += "<rect x=\"" + px(ml + plot_w + 16) + "\" y=\"" + px(ly) +
               "\" width=\"12\" height=\"12\" fill=\"" + color_of(label) +
               "\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n";
        text(ml + plot_w + 34, ly + 10, label, "start");
        ly += 18;
    }
    svg += "<rect x=\"" + px(ml + plot_w + 16) + "\" y=\"" + px(ly) +
           "\" width=\"12\" height=\"12\" fill=\"#000000\"/>\n";
    text(ml + plot_w + 34, ly + 10, "transition", "start");
    ly += 18;
    if (std::any_of(m.cells.begin(), m.cells.end(),
                    [](const SweepCell& c) { return !c.valid; })) {
        svg += "<rect x=\"" + px(ml + plot_w + 16) + "\" y=\"" + px(ly) +
               "\" width=\"12\" height=\"12\" fill=\"#FFE0E0\" stroke=\"#000000\""
               " stroke-width=\"0.5\"/>\n";
        text(ml + plot_w + 34, ly + 10, "INVALID", "start");
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace ws3r
