#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ws3r/cli.hpp"
#include "ws3r/report.hpp"
#include "ws3r/sweep.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ws3r;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::string write_temp(const std::string& name, const std::string& content)
{
    const auto dir = std::filesystem::temp_directory_path() / "ws3r_report_tests";
    std::filesystem::create_directories(dir);
    const auto path = (dir / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

std::string slurp_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("analysis reports serialize losslessly")
{
    const auto g = make_geometry(0, 2, 1.5, 0, 2.2);
    const auto rep = analyze_report(g);
    const std::string s = report_json(rep);
    REQUIRE(!s.empty());
    CHECK(s.front() == '{');
    CHECK(s.back() == '\n');

    const auto back = report_from_json(s);
    CHECK(report_json(back) == s);

    // exact bit-level survival of the doubles
    CHECK(back.geometry.d2 == rep.geometry.d2);
    CHECK(back.geometry.d3 == rep.geometry.d3);
    CHECK(back.geometry.r2 == rep.geometry.r2);
    CHECK(back.geometry.d4 == rep.geometry.d4);
    CHECK(back.seed == rep.seed);
    CHECK(back.label_only == rep.label_only);

    const auto& ca = rep.classification;
    const auto& cb = back.classification;
    CHECK(cb.label_text == ca.label_text);
    CHECK(cb.family.label == ca.family.label);
    CHECK(cb.has_table1 == ca.has_table1);
    CHECK(cb.consistent == ca.consistent);
    CHECK(cb.warnings == ca.warnings);
    REQUIRE(cb.surfaces.size() == ca.surfaces.size());
    for (std::size_t i = 0; i < ca.surfaces.size(); ++i) {
        CHECK(cb.surfaces[i].surface == ca.surfaces[i].surface);
        CHECK(cb.surfaces[i].expression == ca.surfaces[i].expression);
        CHECK(cb.surfaces[i].residual == ca.surfaces[i].residual);
        CHECK(cb.surfaces[i].side == ca.surfaces[i].side);
        CHECK(cb.surfaces[i].defined == ca.surfaces[i].defined);
    }
    REQUIRE(cb.has_computed);
    CHECK(cb.computed.n_cusps == ca.computed.n_cusps);
    CHECK(cb.computed.n_nodes_offaxis == ca.computed.n_nodes_offaxis);
    CHECK(cb.computed.n_voids == ca.computed.n_voids);
    CHECK(cb.computed.max_ik == ca.computed.max_ik);
    CHECK(cb.computed.raster_n_used == ca.computed.raster_n_used);
    REQUIRE(cb.computed.regions.size() == ca.computed.regions.size());
    for (std::size_t i = 0; i < ca.computed.regions.size(); ++i) {
        CHECK(cb.computed.regions[i].ik_count == ca.computed.regions[i].ik_count);
        CHECK(cb.computed.regions[i].area_estimate == ca.computed.regions[i].area_estimate);
        CHECK(cb.computed.regions[i].touches_frame == ca.computed.regions[i].touches_frame);
    }
    const auto& na = ca.computed.analysis;
    const auto& nb = cb.computed.analysis;
    REQUIRE(nb.nodes.size() == na.nodes.size());
    for (std::size_t i = 0; i < na.nodes.size(); ++i) {
        CHECK(nb.nodes[i].location.rho == na.nodes[i].location.rho);
        CHECK(nb.nodes[i].location.z == na.nodes[i].location.z);
        CHECK(nb.nodes[i].t_param == na.nodes[i].t_param);
        CHECK(nb.nodes[i].residuals == na.nodes[i].residuals);
        CHECK(nb.nodes[i].preimages == na.nodes[i].preimages);
    }

    SUBCASE("repeated analysis is byte-identical")
    {
        const auto rep2 = analyze_report(g);
        CHECK(report_json(rep2) == s);
    }

    SUBCASE("label-only reports round-trip without a computed block")
    {
        const auto lite = analyze_report(g, {}, true);
        CHECK(lite.label_only);
        CHECK(!lite.classification.has_computed);
        const std::string ls = report_json(lite);
        CHECK(ls.find("\"computed\"") == std::string::npos);
        const auto lback = report_from_json(ls);
        CHECK(!lback.classification.has_computed);
        CHECK(lback.label_only);
        CHECK(report_json(lback) == ls);
    }

    SUBCASE("transition labels round-trip")
    {
        const auto trep = analyze_report(make_geometry(0, 2, 1, 0, 2), {}, true);
        CHECK(trep.classification.label_text == "Transition(A1,A2)");
        const std::string ts = report_json(trep);
        CHECK(ts.find("\"label_kind\": \"transition\"") != std::string::npos);
        CHECK(report_json(report_from_json(ts)) == ts);
    }

    SUBCASE("malformed report text is rejected")
    {
        CHECK_THROWS_AS(report_from_json("not json"), Error);
        CHECK_THROWS_AS(report_from_json("{}"), Error);
        CHECK_THROWS_AS(report_from_json("[1,2]"), Error);
        try {
            report_from_json("{\"geometry\": {}}");
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code == errc::invalid_input);
        }
    }
}

TEST_CASE("report text pins number formatting, key order, and provenance")
{
    const auto rep = analyze_report(make_geometry(0, 2, 0.1, 0, 2.2), {}, true);
    const std::string s = report_json(rep);

    // 17 significant digits reproduce the exact double
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    CHECK(s.find("2.2000000000000002") != std::string::npos);
    const auto j = nlohmann::json::parse(s);
    CHECK(j.at("geometry").at("r2").get<double>() == 0.1);
    CHECK(j.at("geometry").at("d4").get<double>() == 2.2);

    // fixed top-level key order
    const char* const order[] = {"\"geometry\":",   "\"family\":",  "\"zero_pattern\":",
                                 "\"label_kind\":", "\"label\":",   "\"table1\":",
                                 "\"surfaces\":",   "\"consistent\":", "\"config\":",
                                 "\"label_only\":", "\"warnings\":"};
    std::size_t prev = 0;
    for (const char* key : order) {
        const auto pos = s.find(key);
        REQUIRE_MESSAGE(pos != std::string::npos, key);
        CHECK_MESSAGE(pos > prev, key);
        prev = pos;
    }

    // catalog rows carry their provenance marker and the quoted properties
    CHECK(j.at("table1").at("provenance").get<std::string>() == "paper-sourced");
    CHECK(j.at("table1").at("voids").get<int>() == 0);
    CHECK(j.at("table1").at("nodes").get<int>() == 4);
    CHECK(j.at("label").get<std::string>() == "A3");
    CHECK(j.at("label_kind").get<std::string>() == "type");
    CHECK(j.at("family").get<std::string>() == "A");
    CHECK(j.at("zero_pattern").at("d2").get<bool>());
    CHECK(!j.at("zero_pattern").at("r2").get<bool>());

    for (const char* key : {"grid_n", "raster_n", "eps_sing", "eps_pt", "eps_cert",
                            "eps_axis", "min_cross_angle", "seed"})
        CHECK_MESSAGE(j.at("config").contains(key), key);

    SUBCASE("generic families have no catalog row")
    {
        const auto gen = analyze_report(make_geometry(1, 3, 2, 0, 4), {}, true);
        const std::string gs = report_json(gen);
        CHECK(gs.find("\"table1\"") == std::string::npos);
        CHECK(gs.find("\"label_kind\": \"none\"") != std::string::npos);
        const auto gj = nlohmann::json::parse(gs);
        CHECK(gj.at("family").get<std::string>() == "GENERIC_R3ZERO");
    }
}

TEST_CASE("geometry documents are validated strictly")
{
    const auto g = load_geometry_json("{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5}");
    CHECK(g.d2 == 0);
    CHECK(g.d3 == 2);
    CHECK(g.r2 == 1);
    CHECK(g.r3 == 0);
    CHECK(g.d4 == 1.5);

    // key order does not matter; integers count as numbers
    const auto g2 = load_geometry_json("{\"d4\": 2, \"r3\": 1, \"r2\": 0, \"d3\": 3, \"d2\": 1}");
    CHECK(g2.d4 == 2);
    CHECK(g2.r3 == 1);

    const auto expect_invalid = [](const std::string& text) {
        try {
            load_geometry_json(text);
            FAIL_CHECK("expected a throw for: ", text);
        } catch (const Error& e) {
            CHECK(e.code == errc::invalid_input);
        }
    };
    expect_invalid("{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5, \"d5\": 1}");
    expect_invalid("{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0}");
    expect_invalid("{\"d2\": \"two\", \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5}");
    expect_invalid("{\"d2\": true, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5}");
    expect_invalid("{\"d2\": [0], \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5}");
    expect_invalid("[0, 2, 1, 0, 1.5]");
    expect_invalid("{\"d2\": 0,");

    // values still go through geometry validation
    try {
        load_geometry_json("{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": -1}");
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code == errc::non_positive_d4);
    }
    try {
        load_geometry_json("{\"d2\": -0.5, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1}");
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code == errc::negative_parameter);
    }
}

TEST_CASE("workspace plots mark the computed features")
{
    // this geometry has all three marker kinds: cusps, nodes, isolated points
    const auto rep = analyze_report(make_geometry(1, 3, 2, 0, 4));
    const auto& t = rep.classification.computed;
    REQUIRE(t.n_cusps == 2);
    REQUIRE(t.n_nodes_offaxis == 3);
    REQUIRE(t.n_isolated_points == 1);

    const std::string svg = workspace_svg(rep, 150);
    CHECK(svg.rfind("<?xml version=\"1.0\"", 0) == 0);
    CHECK(svg.find("</svg>\n") == svg.size() - 7);
    CHECK(svg.find("#6E6E6E") != std::string::npos);
    CHECK(svg.find("#C8C8C8") != std::string::npos);
    CHECK(svg.find("fill=\"#FFFFFF\"") != std::string::npos);

    // circles for cusps, crosses for nodes, closed diamonds for isolated points
    CHECK(count_occurrences(svg, "r=\"5\"") == static_cast<std::size_t>(t.n_cusps));
    const auto diamonds =
        count_occurrences(svg, " Z\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>");
    CHECK(diamonds == static_cast<std::size_t>(t.n_isolated_points));
    const auto marker_total = count_occurrences(svg, "stroke-width=\"1.5\"");
    const auto nodes_total = t.analysis.nodes.size();
    CHECK(marker_total == static_cast<std::size_t>(t.n_cusps) + nodes_total + diamonds);

    CHECK(workspace_svg(rep, 150) == svg);

    SUBCASE("plots need a computed analysis")
    {
        const auto lite = analyze_report(make_geometry(1, 3, 2, 0, 4), {}, true);
        try {
            workspace_svg(lite);
            FAIL("expected a throw");
        } catch (const Error& e) {
            CHECK(e.code == errc::invalid_input);
        }
    }
}

TEST_CASE("parameter sweeps cover the grid in fixed order")
{
    ManipulatorGeometry base{};
    base.d4 = 1;

    const auto m = run_sweep(base, {"d3", 0.5, 2, 4}, {"d4", 0.5, 2, 3});
    REQUIRE(m.cells.size() == 12);
    // row-major, y outer ascending, x inner ascending, endpoints included
    CHECK(m.cells[0].x == 0.5);
    CHECK(m.cells[0].y == 0.5);
    CHECK(m.cells[3].x == 2.0);
    CHECK(m.cells[3].y == 0.5);
    CHECK(m.cells[4].x == 0.5);
    CHECK(m.cells[4].y == 1.25);
    CHECK(m.cells[11].x == 2.0);
    CHECK(m.cells[11].y == 2.0);

    std::set<std::string> labels;
    for (const auto& c : m.cells) {
        CHECK(c.valid);
        if (!c.on_transition) labels.insert(c.label);
    }
    CHECK(labels == std::set<std::string>{"B1", "B2"});
    CHECK(m.cells[0].on_transition);   // d3 = d4 = 0.5
    CHECK(m.cells[11].on_transition);  // d3 = d4 = 2
    CHECK(m.cells[1].label == "B1");   // d4 below d3
    CHECK(m.cells[4].label == "B2");   // d4 above d3

    SUBCASE("single-sample axes pin the low endpoint")
    {
        const auto m1 = run_sweep(base, {"d3", 0.7, 9, 1}, {"d4", 0.5, 2, 3});
        REQUIRE(m1.cells.size() == 3);
        for (const auto& c : m1.cells) CHECK(c.x == 0.7);
    }

    SUBCASE("cells with invalid geometry are kept, flagged")
    {
        const auto mi = run_sweep(base, {"d2", 0, 1, 2}, {"d3", 0, 1, 2});
        REQUIRE(mi.cells.size() == 4);
        CHECK(!mi.cells[0].valid);  // d2 = r2 = d3 = 0
        CHECK(mi.cells[0].label == "INVALID");
        CHECK(!mi.cells[0].on_transition);
        CHECK(mi.cells[1].valid);
        CHECK(mi.cells[1].label == "E");
        CHECK(mi.cells[2].on_transition);  // d4 = d3 = 1
    }

    SUBCASE("bad requests are rejected")
    {
        const auto expect_invalid = [&](const SweepAxis& x, const SweepAxis& y,
                                        const std::string& mode) {
            try {
                run_sweep(base, x, y, mode);
                FAIL_CHECK("expected a throw");
            } catch (const Error& e) {
                CHECK(e.code == errc::invalid_input);
            }
        };
        expect_invalid({"q2", 0, 1, 2}, {"d4", 0, 1, 2}, "label");
        expect_invalid({"d3", 0, 1, 0}, {"d4", 0, 1, 2}, "label");
        expect_invalid({"d3", 2, 1, 2}, {"d4", 0, 1, 2}, "label");
        expect_invalid({"d3", 0, 1, 2}, {"d3", 0, 1, 2}, "label");
        expect_invalid({"d3", 0, 1, 2}, {"d4", 0.5, 1, 2}, "counts");
    }

    SUBCASE("nodes mode reports certified off-axis counts")
    {
        const auto mn = run_sweep(base, {"d3", 0.5, 2, 2}, {"d4", 1, 1, 1}, "nodes");
        REQUIRE(mn.cells.size() == 2);
        CHECK(mn.cells[0].label == "1");  // d4 above d3: one off-axis node
        CHECK(mn.cells[1].label == "0");
        CHECK(!mn.cells[0].on_transition);

        // cell order and content independent of the thread count
        const auto m1 = run_sweep(base, {"d3", 0.5, 2, 2}, {"d4", 1, 1, 1}, "nodes", 1);
        const auto m4 = run_sweep(base, {"d3", 0.5, 2, 2}, {"d4", 1, 1, 1}, "nodes", 4);
        REQUIRE(m1.cells.size() == m4.cells.size());
        for (std::size_t i = 0; i < m1.cells.size(); ++i) {
            CHECK(m1.cells[i].label == m4.cells[i].label);
            CHECK(m1.cells[i].x == m4.cells[i].x);
        }
    }
}

TEST_CASE("sweep output renders as csv and svg")
{
    ManipulatorGeometry base{};
    base.d4 = 1;
    const auto m = run_sweep(base, {"d3", 0.5, 2, 4}, {"d4", 0.5, 2, 3});

    const std::string csv = sweep_csv(m);
    CHECK(csv.rfind("x,y,label,on_transition\n", 0) == 0);
    CHECK(count_occurrences(csv, "\n") == 13);
    // labels with commas are double-quoted
    const std::string second_line = csv.substr(csv.find('\n') + 1);
    CHECK(second_line.rfind("0.5,0.5,\"Transition(B1,B2)\",1\n", 0) == 0);
    CHECK(csv.find("1,0.5,B1,0") != std::string::npos);
    CHECK(sweep_csv(m) == csv);

    const std::string svg = sweep_svg(m);
    CHECK(svg.rfind("<?xml version=\"1.0\"", 0) == 0);
    CHECK(svg.find(">legend</text>") != std::string::npos);
    CHECK(svg.find(">transition</text>") != std::string::npos);
    CHECK(svg.find(">B1</text>") != std::string::npos);
    CHECK(svg.find(">B2</text>") != std::string::npos);
    CHECK(svg.find(">d3</text>") != std::string::npos);
    CHECK(svg.find(">d4</text>") != std::string::npos);
    CHECK(count_occurrences(svg, "fill=\"#000000\"") >= 2);  // transition cells + legend swatch
    CHECK(count_occurrences(svg, "<rect") >= m.cells.size());
    CHECK(sweep_svg(m) == svg);

    SUBCASE("invalid cells get their own color")
    {
        const auto mi = run_sweep(base, {"d2", 0, 1, 2}, {"d3", 0, 1, 2});
        const auto s = sweep_svg(mi);
        CHECK(s.find("#FFE0E0") != std::string::npos);
        CHECK(s.find(">INVALID</text>") != std::string::npos);
    }
}

TEST_CASE("command line drives every subcommand")
{
    const std::string a1 = write_temp(
        "a1.json", "{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1.5}\n");
    const std::string b1 = write_temp(
        "b1.json", "{\"d2\": 0, \"d3\": 2, \"r2\": 0, \"r3\": 0, \"d4\": 1}\n");

    SUBCASE("classify prints a label-only report")
    {
        std::ostringstream out, err;
        const int rc = run_cli({"classify", a1}, out, err);
        CHECK(rc == 0);
        CHECK(err.str().empty());
        const auto j = nlohmann::json::parse(out.str());
        CHECK(j.at("label").get<std::string>() == "A1");
        CHECK(j.at("label_only").get<bool>());
        CHECK(!j.contains("computed"));

        const std::string copy =
            (std::filesystem::temp_directory_path() / "ws3r_report_tests" / "a1_rep.json").string();
        std::ostringstream out2, err2;
        CHECK(run_cli({"classify", a1, "--json", copy}, out2, err2) == 0);
        CHECK(slurp_file(copy) == out2.str());
        CHECK(out2.str() == out.str());
    }

    SUBCASE("analyze writes the report and the plot")
    {
        const auto dir = std::filesystem::temp_directory_path() / "ws3r_report_tests";
        const std::string rep_path = (dir / "b1_rep.json").string();
        const std::string svg_path = (dir / "b1_plot.svg").string();
        std::ostringstream out, err;
        const int rc = run_cli({"analyze", b1, "--raster", "300", "--json", rep_path, "--svg",
                                svg_path, "--svg-raster", "120"},
                               out, err);
        CHECK(rc == 0);
        const auto j = nlohmann::json::parse(out.str());
        CHECK(j.at("label").get<std::string>() == "B1");
        CHECK(j.at("computed").at("max_ik").get<int>() == 4);
        CHECK(j.at("computed").at("single_4region_covers_workspace").get<bool>());
        CHECK(j.at("config").at("raster_n").get<int>() == 300);
        CHECK(slurp_file(rep_path) == out.str());
        const std::string svg = slurp_file(svg_path);
        CHECK(svg.rfind("<?xml", 0) == 0);
        CHECK(svg.find("#6E6E6E") != std::string::npos);
    }

    SUBCASE("sweep prints csv and writes files on request")
    {
        std::ostringstream out, err;
        const int rc = run_cli({"sweep", "--x", "d3:0.5:2:4", "--y", "d4:0.5:2:3", "--fixed",
                                "d2=0", "--fixed", "r2=0", "--fixed", "r3=0"},
                               out, err);
        CHECK(rc == 0);
        CHECK(out.str().rfind("x,y,label,on_transition\n", 0) == 0);
        CHECK(out.str().find("\"Transition(B1,B2)\"") != std::string::npos);

        const auto dir = std::filesystem::temp_directory_path() / "ws3r_report_tests";
        const std::string csv_path = (dir / "sweep.csv").string();
        const std::string svg_path = (dir / "sweep.svg").string();
        std::ostringstream out2, err2;
        CHECK(run_cli({"sweep", "--x", "d3:0.5:2:4", "--y", "d4:0.5:2:3", "--fixed", "d2=0",
                       "--fixed", "r2=0", "--fixed", "r3=0", "--csv", csv_path, "--svg",
                       svg_path},
                      out2, err2) == 0);
        CHECK(out2.str().empty());
        CHECK(slurp_file(csv_path) == out.str());
        CHECK(slurp_file(svg_path).rfind("<?xml", 0) == 0);
    }

    SUBCASE("validate prints one line per property")
    {
        std::ostringstream out, err;
        const int rc = run_cli({"validate", b1, "--samples", "20", "--seed", "7"}, out, err);
        CHECK(rc == 0);
        CHECK(out.str().find("PASS det-proportionality") != std::string::npos);
        CHECK(out.str().find("PASS oracle-agreement") != std::string::npos);
        CHECK(out.str().find("PASS count-range") != std::string::npos);
        CHECK(out.str().find("FAIL") == std::string::npos);

        // an empty probe set cannot certify oracle agreement: exit 1
        std::ostringstream out2, err2;
        CHECK(run_cli({"validate", b1, "--samples", "0"}, out2, err2) == 1);
        CHECK(out2.str().find("FAIL oracle-agreement") != std::string::npos);
    }

    SUBCASE("input failures exit with code 2")
    {
        const auto rc_of = [](std::vector<std::string> args) {
            std::ostringstream out, err;
            const int rc = run_cli(args, out, err);
            return rc;
        };
        CHECK(rc_of({"classify", "/nonexistent/geometry.json"}) == 2);
        CHECK(rc_of({"classify",
                     write_temp("bad_d4.json",
                                "{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": -1}")}) == 2);
        CHECK(rc_of({"classify", write_temp("corrupt.json", "{\"d2\": 0,")}) == 2);
        CHECK(rc_of({"classify",
                     write_temp("extra.json",
                                "{\"d2\": 0, \"d3\": 2, \"r2\": 1, \"r3\": 0, \"d4\": 1, "
                                "\"theta\": 3}")}) == 2);
        CHECK(rc_of({}) == 2);
        CHECK(rc_of({"frobnicate"}) == 2);
        CHECK(rc_of({"sweep", "--x", "d3:0.5:2", "--y", "d4:0:1:2"}) == 2);
        CHECK(rc_of({"sweep", "--x", "d3:0.5:2:2", "--y", "d4:0.5:1:2", "--fixed", "q=1"}) == 2);
        CHECK(rc_of({"sweep", "--x", "d3:0.5:2:2", "--y", "d4:0.5:1:2", "--mode", "bogus"}) == 2);

        std::ostringstream out, err;
        CHECK(run_cli({"classify", "--help"}, out, err) == 0);
        CHECK(out.str().find("geometry JSON file") != std::string::npos);
    }
}
