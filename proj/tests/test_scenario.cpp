#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qme/analysis.hpp"
#include "qme/scenario.hpp"

using namespace qme;
using nlohmann::json;

namespace {

const std::filesystem::path kScenarios = QME_SCENARIO_DIR;

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "qme_test_scenario" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Rows of a CSV file, header dropped.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

json two_state() { return load_json(kScenarios / "two_state_fermion.json"); }

std::string parse_error(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return "";
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + QME_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("bundled scenarios round-trip") {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
        if (entry.path().extension() != ".json") continue;
        ++count;
        CAPTURE(entry.path().filename().string());
        const Scenario s = parse_scenario_file(entry.path());
        const Scenario again = parse_scenario(to_json(s));
        CHECK(again == s);
        CHECK(to_json(again) == to_json(s));
    }
    CHECK(count >= 6);
}

TEST_CASE("appendix_d scenario carries the counterexample matrix") {
    const Scenario s = parse_scenario_file(kScenarios / "appendix_d.json");
    CHECK(s.equation == Equation::Markoff);
    CHECK(max_abs(s.initial - appendix_d_initial_matrix()) == 0.0);
    CHECK(s.initial(0, 0).real() == 1.0 / 3.0);
    CHECK(s.initial(0, 1).real() == 10.0 / 27.0);
    CHECK(s.initial(1, 2).real() == 2.0 / 9.0);
    CHECK(s.expect_violations);
}

TEST_CASE("validation messages name the field") {
    json doc = two_state();
    doc["rates"] = json::array({json::array({2, 1, -1.0})});
    CHECK(parse_error(doc).find("rates[(2,1)]") != std::string::npos);

    doc = two_state();
    doc["equation"] = "schroedinger";
    CHECK(parse_error(doc).find("equation") != std::string::npos);

    doc = two_state();
    doc.erase("rates");
    CHECK(parse_error(doc).find("rates") != std::string::npos);

    doc = two_state();
    doc["dephasing"] = json::array();
    CHECK(parse_error(doc).find("dephasing") != std::string::npos);

    doc = two_state();
    doc["colour"] = "blue";
    CHECK(parse_error(doc).find("colour") != std::string::npos);

    doc = two_state();
    doc["rates"] = json::array({json::array({3, 1, 1.0})});
    CHECK(parse_error(doc).find("rates") != std::string::npos);

    doc = two_state();
    doc["hamiltonian"] = json::array({json::array({0, 1}), json::array({0, 0})});
    CHECK(parse_error(doc).find("hamiltonian") != std::string::npos);

    doc = two_state();
    doc["initial"] = {{"preset", "diagonal"}, {"occupations", {1.5, 0.0}}};
    CHECK(parse_error(doc).find("initial") != std::string::npos);

    doc = two_state();
    doc["integrator"]["dt"] = -1.0;
    CHECK(parse_error(doc).find("integrator.dt") != std::string::npos);

    doc = two_state();
    doc["statistics"] = "boson";
    CHECK(parse_error(doc).find("analysis.duality") != std::string::npos);
}

TEST_CASE("empty preset") {
    json doc = two_state();
    doc["dimension"] = 3;
    doc["rates"] = json::array();
    doc["initial"] = {{"preset", "empty"}};
    const Scenario s = parse_scenario(doc);
    CHECK(s.initial.rows() == 3);
    CHECK(max_abs(s.initial) == 0.0);
}

TEST_CASE("overrides") {
    json doc = two_state();
    apply_override(doc, "dt=1e-4");
    apply_override(doc, "integrator.t1=2");
    apply_override(doc, "analysis.duality=false");
    apply_override(doc, "name=renamed");
    const Scenario s = parse_scenario(doc);
    CHECK(s.integrator.dt == 1e-4);
    CHECK(s.integrator.t1 == 2.0);
    CHECK_FALSE(s.analysis.duality);
    CHECK(s.name == "renamed");
    CHECK_THROWS(apply_override(doc, "no_equals_sign"));
}

TEST_CASE("output directory resolution") {
    const Scenario s = parse_scenario(two_state());
    RunOptions o;
    o.out_dir = "/tmp/explicit";
    CHECK(resolve_out_dir(s, o) == std::filesystem::path("/tmp/explicit"));
    o.out_dir.reset();
    ::setenv("QME_OUT_DIR", "/tmp/root", 1);
    CHECK(resolve_out_dir(s, o) == std::filesystem::path("/tmp/root/two_state_fermion"));
    ::unsetenv("QME_OUT_DIR");
    CHECK(resolve_out_dir(s, o) == std::filesystem::path("qme_out/two_state_fermion"));
}

TEST_CASE("run appendix_d") {
    RunOptions o;
    o.out_dir = scratch("appendix_d");
    const auto r = run_scenario(kScenarios / "appendix_d.json", o);
    REQUIRE(r.exit_code == kExitOk);
    CHECK(std::abs(r.summary["min_eig_final"].get<double>() + 0.19045) <= 1e-4);
    CHECK_FALSE(r.summary["violations"].empty());
    CHECK(std::filesystem::exists(*o.out_dir / "states.csv"));
    CHECK(std::filesystem::exists(*o.out_dir / "diagnostics.csv"));
    const json on_disk = load_json(*o.out_dir / "summary.json");
    CHECK(on_disk["final_spectrum"].size() == 3);
    CHECK(on_disk.contains("wall_time_seconds"));

    // The same run without the expectation is a physics violation.
    o.overrides = {"expect_violations=false", "t1=1"};
    CHECK(run_scenario(kScenarios / "appendix_d.json", o).exit_code == kExitUnexpectedViolation);
}

TEST_CASE("run two_state_fermion matches the closed form") {
    RunOptions o;
    o.out_dir = scratch("two_state_fermion");
    const auto r = run_scenario(kScenarios / "two_state_fermion.json", o);
    REQUIRE(r.exit_code == kExitOk);
    const auto rows = read_csv(*o.out_dir / "states.csv");
    REQUIRE(rows.size() == 301);
    double worst = 0.0;
    for (const auto& row : rows) {
        REQUIRE(row.size() == 9);
        worst = std::max(worst, std::abs(row[7] - (1.0 - 1.0 / (1.0 + row[0]))));
    }
    CHECK(worst <= 1e-6);
    const auto diag = read_csv(*o.out_dir / "diagnostics.csv");
    REQUIRE(diag.front().size() == 6);
    for (const auto& row : diag) CHECK(row[5] <= 1e-10);
    CHECK(r.summary["duality_residual_max"].get<double>() <= 1e-10);
}

TEST_CASE("homogeneous chain agrees with the occupation equation") {
    RunOptions o;
    o.out_dir = scratch("chain");
    o.overrides = {"dt=1e-4"};
    const auto r = run_scenario(kScenarios / "homogeneous_chain.json", o);
    REQUIRE(r.exit_code == kExitOk);
    CHECK(r.summary["quasiclassical_max_residual"].get<double>() <= 1e-8);

    json doc = load_json(kScenarios / "homogeneous_chain.json");
    doc["equation"] = "quasiclassical";
    doc.erase("hamiltonian");
    doc.erase("analysis");
    doc["integrator"]["dt"] = 1e-4;
    RunOptions q;
    q.out_dir = scratch("chain_quasiclassical");
    REQUIRE(run_scenario(parse_scenario(doc), q).exit_code == kExitOk);

    const auto a = read_csv(*o.out_dir / "states.csv");
    const auto b = read_csv(*q.out_dir / "states.csv");
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t col = 1 + 2 * (k * 5 + k);
            worst = std::max(worst, std::abs(a[i][col] - b[i][col]));
        }
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("runs are deterministic") {
    RunOptions a, b;
    a.out_dir = scratch("det_a");
    b.out_dir = scratch("det_b");
    REQUIRE(run_scenario(kScenarios / "generalized_fermion.json", a).exit_code == kExitOk);
    REQUIRE(run_scenario(kScenarios / "generalized_fermion.json", b).exit_code == kExitOk);
    CHECK(slurp(*a.out_dir / "states.csv") == slurp(*b.out_dir / "states.csv"));
    CHECK(slurp(*a.out_dir / "diagnostics.csv") == slurp(*b.out_dir / "diagnostics.csv"));
}

TEST_CASE("fock scenario summary") {
    RunOptions o;
    o.out_dir = scratch("fock");
    const auto r = run_scenario(kScenarios / "fock_closure_2mode.json", o);
    REQUIRE(r.exit_code == kExitOk);
    CHECK(r.summary["fock"]["closure_residual_t0"].get<double>() <= 1e-10);
    CHECK(r.summary["fock"]["initial_product_state"].get<bool>());
    CHECK(std::abs(r.summary["trace_final"].get<double>() - 1.0) <= 1e-10);
}

TEST_CASE("operational failures exit 1") {
    RunOptions o;
    o.out_dir = scratch("failure");
    auto r = run_scenario(kScenarios / "does_not_exist.json", o);
    CHECK(r.exit_code == kExitError);
    CHECK_FALSE(r.error.empty());

    // Boson gain at a huge rate overflows: n ~ e^{1000 t}.
    json doc = {{"name", "blowup"},
                {"equation", "general"},
                {"statistics", "boson"},
                {"dimension", 1},
                {"initial", {{"preset", "empty"}}},
                {"hamiltonian", "zero"},
                {"A_p", "zero"},
                {"A_pbar", {{"diagonal", {-500.0}}}},
                {"integrator", {{"t1", 2.0}, {"dt", 1e-3}}}};
    r = run_scenario(parse_scenario(doc), o);
    CHECK(r.exit_code == kExitError);
    CHECK(r.error.find("t = ") != std::string::npos);
}

TEST_CASE("command line") {
    const auto out = scratch("cli");
    const std::string file = "\"" + (kScenarios / "two_state_boson.json").string() + "\"";
    CHECK(cli("run " + file + " --quiet --out-dir \"" + out.string() + "\" --override t1=0.5") == 0);
    CHECK(std::filesystem::exists(out / "summary.json"));
    CHECK(load_json(out / "summary.json")["t_final"].get<double>() == 0.5);
    CHECK(cli("run " + file + " --quiet --out-dir \"" + out.string() + "\" --override dt=-1") == 1);
    CHECK(cli("run \"" + (kScenarios / "appendix_d.json").string() + "\" --quiet --out-dir \"" + out.string() +
              "\" --override t1=1 --override expect_violations=false") == 2);
    CHECK(cli("show " + file) == 0);
    CHECK(cli("run missing.json --quiet") == 1);
    CHECK(cli("frobnicate") == 1);
}
