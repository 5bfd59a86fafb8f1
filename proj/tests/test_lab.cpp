#include "bergmanlab/lab.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bergmanlab;

namespace {

Json config(const std::string& experiment)
{
    return Json{{"schema_version", 1}, {"experiment", experiment}, {"n", 2}, {"d", 1}, {"seed", 3}};
}

RunOptions no_files()
{
    RunOptions o;
    o.write_files = false;
    return o;
}

std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("bergmanlab_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config validation")
{
    CHECK_NOTHROW(parse_config(config("spectrum")));
    Json bad = config("spectrum");
    bad["d"] = 2;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = config("spectrum");
    bad["D"] = Json::array({6, 6});
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = config("spectrum");
    bad["tolerances"] = {{"identity", -1.0}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    CHECK_THROWS_AS(parse_config(config("no-such-experiment")), ConfigError);
    bad = config("spectrum");
    bad["schema_version"] = 7;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = config("commutators");
    bad["sweep"] = {{"variable", "D"}, {"values", {12, 10}}, {"metric", "schatten_sum"}};
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    CHECK(experiment_names().size() == 11);
}

TEST_CASE("geometry identities run")
{
    Json c = config("geometry-identities");
    c["n"] = 3;
    const RunReport r = run(parse_config(c), no_files());
    CHECK(r.all_passed);
    for (const auto& v : r.payload.at("verdicts")) {
        CHECK(v.contains("tolerance"));
        CHECK(v.at("value").get<double>() < 1e-10);
    }
}

TEST_CASE("hyperplane identity and gram runs")
{
    Json h = config("hyperplane-identity");
    h["D"] = 8;
    const RunReport r = run(parse_config(h), no_files());
    CHECK(r.all_passed);
    const Json& row = r.payload.at("tables")[0].at("rows")[0];
    CHECK(row[3].get<double>() < 1e-6);

    Json g = config("gram-criterion");
    g["params"] = {{"random_single", 5}, {"points", Json::array({Json::array({Json::array({0.1, 0.2})})})}};
    const RunReport gr = run(parse_config(g), no_files());
    CHECK(gr.all_passed);
}

TEST_CASE("runs are deterministic and tables carry operation names")
{
    Json c = config("extension-norms");
    c["D"] = Json::array({4, 6});
    const RunConfig cfg = parse_config(c);
    const RunReport a = run(cfg, no_files());
    const RunReport b = run(cfg, no_files());
    CHECK(a.payload.dump() == b.payload.dump());
    for (const auto& t : a.payload.at("tables"))
        CHECK(!t.at("operations").empty());
    CHECK(!a.payload.contains("timings"));
    CHECK(a.timings.contains("wall_seconds"));
}

TEST_CASE("error propagation carries experiment context")
{
    Json c = config("spectrum");
    c["measure"] = {{"source", "atoms"}, {"atoms", Json::array()}};
    CHECK_THROWS_AS(run(parse_config(c), no_files()), Error);

    c = config("spectrum");
    c["params"] = {{"min_gap_ratio", 1e30}};
    try {
        run(parse_config(c), no_files());
        FAIL("expected NoSpectralGap");
    } catch (const NoSpectralGap& e) {
        CHECK(std::string(e.what()).find("experiment spectrum") != std::string::npos);
    }
}

TEST_CASE("sweep produces rows and a trend verdict")
{
    Json c = config("commutators");
    c["sweep"] = {{"variable", "D"}, {"values", {6, 8}}, {"metric", "schatten_sum"}, {"trend", "stabilizes"},
                  {"tolerance", 0.05}};
    RunOptions o = no_files();
    o.threads = 2;
    const RunReport r = sweep(parse_config(c), o);
    const Json& table = r.payload.at("tables")[0];
    CHECK(table.at("name") == "sweep");
    CHECK(table.at("rows").size() == 2);
    CHECK(r.payload.at("verdicts").back().at("name").get<std::string>().find("sweep_schatten_sum") == 0);

    o.threads = 1;
    CHECK(sweep(parse_config(c), o).payload.dump() == r.payload.dump());
}

TEST_CASE("report files")
{
    const auto dir = scratch("report");
    RunOptions o;
    o.out_dir = dir.string();
    Json c = config("hyperplane-identity");
    c["D"] = 4;
    run(parse_config(c), o);
    CHECK(std::filesystem::exists(dir / "report.json"));
    std::ifstream csv(dir / "hyperplane.csv");
    std::string header, line;
    std::getline(csv, header);
    std::getline(csv, line);
    CHECK(header.rfind("D,basis_size", 0) == 0);
    CHECK(line.rfind("4.0000000000000000e+00,", 0) == 0);
    CHECK(format_csv_number(0.1) == "1.0000000000000001e-01");
    std::filesystem::remove_all(dir);
}

TEST_CASE("measure and variety serialization round trip")
{
    MeasureSpec mu(2);
    mu.add_atom(BallPoint{Complex(0.1, 0.2), 0.3}, 0.5);
    mu.add_node(BallPoint{0.0, Complex(0.0, -0.4)}, 1.5);
    const auto path = scratch("measure.json");
    write_measure_file(path.string(), mu);
    const MeasureSpec back = read_measure_file(path.string());
    CHECK(back.fingerprint() == mu.fingerprint());
    std::filesystem::remove(path);

    Polynomial f(1);
    f.add({2}, Complex(0.1, 0.0));
    const VarietySpec g = PolynomialGraph(2, 1, {f});
    CHECK(variety_to_json(variety_from_json(variety_to_json(g))) == variety_to_json(g));
    CHECK_THROWS_AS(variety_from_json(Json{{"type", "affine_slice"}, {"basepoint", {0, 0}}, {"frame", {{1, 1}}}}),
                    ConfigError);
    CHECK_THROWS_AS(measure_from_json(Json{{"schema_version", 1}, {"dimension", 2},
                                           {"records", {{{"type", "atom"}, {"coords", {1.0, 0}}, {"weight", 1}}}}}),
                    DomainError);
}
