#include "ws3r/cli.hpp"

#include "ws3r/classifier.hpp"
#include "ws3r/geometry.hpp"
#include "ws3r/ik.hpp"
#include "ws3r/oracle.hpp"
#include "ws3r/report.hpp"
#include "ws3r/singularity.hpp"
#include "ws3r/sweep.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ws3r {

namespace {

int exit_code_for(const Error& e)
{
    switch (e.code) {
    case errc::invalid_input:
    case errc::non_positive_d4:
    case errc::negative_parameter:
    case errc::degenerate_geometry:
    case errc::unknown_type:
        return 2;
    default:
        return 1;
    }
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::invalid_input, "cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::invalid_input, "cannot write file: " + path);
    out << content;
    if (!out) throw Error(errc::invalid_input, "write failed: " + path);
}

SweepAxis parse_axis(const std::string& spec)
{
    // param:lo:hi:n
    std::vector<std::string> parts;
    std::string cur;
    for (char c : spec) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 4)
        throw Error(errc::invalid_input, "axis must look like param:lo:hi:n, got: " + spec);
    SweepAxis a;
    a.param = parts[0];
    try {
        a.lo = std::stod(parts[1]);
        a.hi = std::stod(parts[2]);
        a.n = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw Error(errc::invalid_input, "bad axis numbers in: " + spec);
    }
    return a;
}

void apply_fixed(ManipulatorGeometry& g, const std::vector<std::string>& fixed)
{
    for (const auto& kv : fixed) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw Error(errc::invalid_input, "fixed parameter must look like k=v, got: " + kv);
        const std::string key = kv.substr(0, eq);
        double value = 0;
        try {
            value = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(errc::invalid_input, "bad fixed value in: " + kv);
        }
        if (key == "d2") g.d2 = value;
        else if (key == "d3") g.d3 = value;
        else if (key == "r2") g.r2 = value;
        else if (key == "r3") g.r3 = value;
        else if (key == "d4") g.d4 = value;
        else throw Error(errc::invalid_input, "unknown fixed parameter: " + key);
    }
}

struct ValidateOptions {
    int samples = 200;
    unsigned long long seed = 7;
    int oracle_grid = 1024;
};

// Seeded property-suite runner; prints one PASS/FAIL line per property.
int run_validate(const ManipulatorGeometry& g, const ValidateOptions& opt, std::ostream& out)
{
    const double L = g.length_scale();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool all_pass = true;
    const auto report = [&](const char* name, bool pass, const std::string& detail) {
        out << (pass ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) out << ": " << detail;
        out << "\n";
        if (!pass) all_pass = false;
    };

    // determinant proportionality: closed form vs central differences
    {
        double lo = 0, hi = 0;
        int used = 0;
        bool zero_mismatch = false;
        for (int i = 0; i < 200; ++i) {
            const JointConfig q{0, angle(rng), angle(rng)};
            const double analytic = jacobian_det(g, q);
            const double numeric = numeric_jacobian_det(g, q);
            if (std::abs(analytic) < 1e-6 * L * L * L) {
                if (std::abs(numeric) > 1e-3 * L * L * L) zero_mismatch = true;
                continue;
            }
            const double ratio = numeric / analytic;
            if (!used) lo = hi = ratio;
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ++used;
        }
        const double spread = used ? (hi - lo) / std::abs(0.5 * (hi + lo)) : 0;
        std::ostringstream detail;
        detail << "relative spread " << spread << " over " << used << " samples";
        report("det-proportionality", used > 0 && spread < 1e-5 && !zero_mismatch,
               detail.str());
    }

    // probe set: torus images (reachable) plus box points, kept away from the
    // traced singular curves so solution counts are stable
    const auto analysis = analyze_singularities(g);
    std::vector<CrossSection> curve_pts;
    for (const auto& c : analysis.planar_curves)
        curve_pts.insert(curve_pts.end(), c.vertices.begin(), c.vertices.end());
    const auto curve_distance = [&](double rho, double z) {
        double best = 1e300;
        for (const auto& p : curve_pts)
            best = std::min(best, std::hypot(p.rho - rho, p.z - z));
        return best;
    };
    std::vector<CrossSection> probes;
    for (int attempt = 0; attempt < 200 * opt.samples &&
                          static_cast<int>(probes.size()) < opt.samples;
         ++attempt) {
        CrossSection p;
        if (attempt % 4 == 0) {
            p.rho = 1.1 * L * unit(rng);
            p.z = 1.1 * L * (2 * unit(rng) - 1);
        } else {
            p = cross_section_coords(g, angle(rng), angle(rng));
        }
        if (curve_distance(p.rho, p.z) < L / 100) continue;
        const auto flagged = count_ik_flagged(g, p.rho, p.z);
        if (flagged.near_singular || flagged.degenerate_continuum) continue;
        probes.push_back(p);
    }

    {
        std::ostringstream detail;
        detail << probes.size() << " of " << opt.samples << " requested";
        report("probe-generation", static_cast<int>(probes.size()) >= opt.samples / 2,
               detail.str());
    }

    // oracle agreement, with one finer-grid retry per disagreement
    {
        int agree = 0;
        std::string first_fail;
        OracleConfig ocfg;
        ocfg.grid_n = opt.oracle_grid;
        for (const auto& p : probes) {
            const int analytic = count_ik(g, p.rho, p.z);
            int oracle = brute_force_count(g, p.rho, p.z, ocfg);
            if (oracle != analytic) {
                OracleConfig fine = ocfg;
                fine.grid_n = 2 * ocfg.grid_n;
                oracle = brute_force_count(g, p.rho, p.z, fine);
            }
            if (oracle == analytic) {
                ++agree;
            } else if (first_fail.empty()) {
                std::ostringstream fs;
                fs << "probe (" << p.rho << ", " << p.z << ") analytic " << analytic
                   << " oracle " << oracle;
                first_fail = fs.str();
            }
        }
        std::ostringstream detail;
        detail << agree << "/" << probes.size() << " probes agree";
        if (!first_fail.empty()) detail << "; first disagreement " << first_fail;
        report("oracle-agreement",
               !probes.empty() && agree * 100 >= static_cast<int>(probes.size()) * 99,
               detail.str());
    }

    // solution counts are even in z
    {
        int bad = 0;
        std::string first;
        for (const auto& p : probes) {
            if (count_ik(g, p.rho, p.z) != count_ik(g, p.rho, -p.z)) {
                ++bad;
                if (first.empty()) {
                    std::ostringstream fs;
                    fs << "probe (" << p.rho << ", " << p.z << ")";
                    first = fs.str();
                }
            }
        }
        report("mirror-symmetry", bad == 0,
               bad ? first : "counts match at " + std::to_string(probes.size()) + " probes");
    }

    // solution counts are invariant under uniform scaling
    {
        int bad = 0;
        for (const double lambda : {0.1, 10.0}) {
            const auto scaled = make_geometry(lambda * g.d2, lambda * g.d3, lambda * g.r2,
                                              lambda * g.r3, lambda * g.d4);
            for (const auto& p : probes)
                if (count_ik(g, p.rho, p.z) !=
                    count_ik(scaled, lambda * p.rho, lambda * p.z))
                    ++bad;
        }
        report("scale-invariance", bad == 0,
               bad ? std::to_string(bad) + " scaled probes disagree"
                   : "0.1x and 10x counts match");
    }

    // probe counts never exceed the computed workspace maximum
    {
        const auto cls = classify(g);
        int probe_max = 0;
        for (const auto& p : probes)
            probe_max = std::max(probe_max, count_ik(g, p.rho, p.z));
        std::ostringstream detail;
        detail << "max_ik = " << cls.computed.max_ik << ", probe max = " << probe_max;
        if (cls.computed.binary) detail << " (binary)";
        report("count-range", probe_max <= cls.computed.max_ik, detail.str());
    }

    return all_pass ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"workspace topology toolkit for 3R orthogonal manipulators"};
    app.require_subcommand(1);

    std::string file;
    std::string json_path, svg_path, csv_path;
    TopologyConfig cfg;
    double eps_zero = 1e-12, eps_trans = 1e-9;
    unsigned long long seed = 1;
    int svg_raster = 400;

    auto* c_classify = app.add_subcommand("classify", "type label without curve tracing");
    c_classify->add_option("geometry", file, "geometry JSON file")->required();
    c_classify->add_option("--json", json_path, "also write the report here");
    c_classify->add_option("--eps-zero", eps_zero, "zero-parameter threshold (times L)");
    c_classify->add_option("--eps-trans", eps_trans, "on-surface threshold (times L)");

    auto* c_analyze = app.add_subcommand("analyze", "full workspace analysis");
    c_analyze->add_option("geometry", file, "geometry JSON file")->required();
    c_analyze->add_option("--grid", cfg.singularity.grid_n, "joint-space trace resolution");
    c_analyze->add_option("--raster", cfg.raster_n, "region decomposition resolution");
    c_analyze->add_option("--json", json_path, "also write the report here");
    c_analyze->add_option("--svg", svg_path, "write a cross-section plot here");
    c_analyze->add_option("--svg-raster", svg_raster, "plot shading resolution");
    c_analyze->add_option("--seed", seed, "seed echoed into the report");
    c_analyze->add_option("--eps-sing", cfg.singularity.eps_sing, "singularity residual gate");
    c_analyze->add_option("--eps-pt", cfg.singularity.eps_pt, "point coincidence tolerance");
    c_analyze->add_option("--eps-cert", cfg.singularity.eps_cert, "certification gate");
    c_analyze->add_option("--eps-axis", cfg.singularity.eps_axis, "on-axis threshold");
    c_analyze->add_option("--min-cross-angle", cfg.singularity.min_cross_angle,
                          "tangency annotation threshold");
    c_analyze->add_option("--eps-zero", eps_zero, "zero-parameter threshold (times L)");
    c_analyze->add_option("--eps-trans", eps_trans, "on-surface threshold (times L)");

    std::string x_spec, y_spec, mode = "label";
    std::vector<std::string> fixed;
    int threads = 0;
    auto* c_sweep = app.add_subcommand("sweep", "parameter-plane type map");
    c_sweep->add_option("--x", x_spec, "swept x axis, param:lo:hi:n")->required();
    c_sweep->add_option("--y", y_spec, "swept y axis, param:lo:hi:n")->required();
    c_sweep->add_option("--fixed", fixed, "fixed parameter, k=v (repeatable)");
    c_sweep->add_option("--mode", mode, "label or nodes")
        ->check(CLI::IsMember({"label", "nodes"}));
    c_sweep->add_option("--csv", csv_path, "write cells here instead of stdout");
    c_sweep->add_option("--svg", svg_path, "write a color-coded map here");
    c_sweep->add_option("--threads", threads, "worker threads for nodes mode (0 = auto)");

    ValidateOptions vopt;
    auto* c_validate = app.add_subcommand("validate", "seeded property suites");
    c_validate->add_option("geometry", file, "geometry JSON file")->required();
    c_validate->add_option("--samples", vopt.samples, "probe count");
    c_validate->add_option("--seed", vopt.seed, "probe generation seed");
    c_validate->add_option("--oracle-grid", vopt.oracle_grid, "oracle torus resolution");

    std::vector<const char*> argv;
    argv.push_back("ws3r");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(c_classify)) {
            const auto g = load_geometry_json(slurp(file));
            const auto rep = analyze_report(g, cfg, true, seed, eps_zero, eps_trans);
            const std::string json = report_json(rep);
            out << json;
            if (!json_path.empty()) spill(json_path, json);
            return 0;
        }
        if (app.got_subcommand(c_analyze)) {
            const auto g = load_geometry_json(slurp(file));
            const auto rep = analyze_report(g, cfg, false, seed, eps_zero, eps_trans);
            const std::string json = report_json(rep);
            out << json;
            if (!json_path.empty()) spill(json_path, json);
            if (!svg_path.empty()) spill(svg_path, workspace_svg(rep, svg_raster));
            return 0;
        }
        if (app.got_subcommand(c_sweep)) {
            ManipulatorGeometry base{0, 0, 0, 0, 1};
            apply_fixed(base, fixed);
            const auto m = run_sweep(base, parse_axis(x_spec), parse_axis(y_spec), mode,
                                     threads);
            const std::string csv = sweep_csv(m);
            if (csv_path.empty()) out << csv;
            else spill(csv_path, csv);
            if (!svg_path.empty()) spill(svg_path, sweep_svg(m));
            return 0;
        }
        if (app.got_subcommand(c_validate)) {
            const auto g = load_geometry_json(slurp(file));
            return run_validate(g, vopt, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace ws3r
