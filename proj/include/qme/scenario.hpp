#pragma once

// JSON scenario files and the runner behind `qme run`.
//
// Orbital and mode indices in scenario files are 1-based: a rate entry
// [2, 1, 0.5] is the jump 1 -> 2 with w_21 = 0.5.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "qme/dynamics.hpp"

namespace qme {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Equation {
    MeanfieldNonhermitian,
    General,
    NonlinearMaster,
    GeneralizedJumps,
    Markoff,
    Lindblad,
    Quasiclassical,
    FockOracle,
};

const char* to_string(Equation e) noexcept;
Equation equation_from_string(const std::string& name);

struct FockBlock {
    std::size_t modes = 1;
    std::vector<double> energies;
    std::size_t boson_cutoff = 4;
    bool operator==(const FockBlock&) const = default;
};

struct IntegratorBlock {
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 1e-3;
    std::size_t record_every = 1;
    bool hermitize_each_step = true;
    bool check_initial = true;
    double halving_tolerance = 0.0;
    bool operator==(const IntegratorBlock&) const = default;
};

struct OutputBlock {
    bool states = true;
    bool diagnostics = true;
    bool operator==(const OutputBlock&) const = default;
};

struct AnalysisBlock {
    bool duality = false;               // evolve the hole form alongside (fermions)
    bool quasiclassical_check = false;  // compare the diagonal with the occupation equation
    std::vector<double> low_density_epsilons;
    bool operator==(const AnalysisBlock&) const = default;
};

struct Scenario {
    std::string name;
    std::string description;
    Equation equation = Equation::NonlinearMaster;
    Statistics statistics = Statistics::Fermion;
    std::size_t dimension = 1;      // one-particle dimension (modes for fock_oracle)
    ComplexMatrix initial;          // Fock-space matrix for fock_oracle

    std::optional<ComplexMatrix> hamiltonian;
    std::optional<ComplexMatrix> a;       // single nonhermitian part
    std::optional<ComplexMatrix> a_p;
    std::optional<ComplexMatrix> a_pbar;
    std::optional<RateMap> rates;
    std::optional<std::vector<ComplexMatrix>> jumps;
    std::optional<RateMap> dephasing;
    std::optional<FockBlock> fock;

    IntegratorBlock integrator;
    OutputBlock output;
    AnalysisBlock analysis;
    bool expect_violations = false;

    bool operator==(const Scenario& other) const;
};

/// Validated scenario; ScenarioError names the offending field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_file(const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

/// Canonical JSON (presets expanded to explicit matrices). parse(to_json(s)) == s.
nlohmann::json to_json(const Scenario& s);

/// "a.b.c=value". Bare integrator keys (dt, t1, ...) are accepted without the
/// "integrator." prefix. The value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// --- runner ----------------------------------------------------------------

struct RunOptions {
    std::vector<std::string> overrides;
    std::optional<std::filesystem::path> out_dir;
    bool quiet = true;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnexpectedViolation = 2;

struct RunResult {
    int exit_code = kExitOk;
    std::filesystem::path out_dir;
    nlohmann::json summary;
    std::string error;
};

/// Output directory: options.out_dir, else $QME_OUT_DIR/<name>, else qme_out/<name>.
std::filesystem::path resolve_out_dir(const Scenario& s, const RunOptions& options);

/// Integrates the scenario and writes states.csv, diagnostics.csv, summary.json.
/// Never throws; failures are reported through exit_code and error.
RunResult run_scenario(const std::filesystem::path& path, const RunOptions& options);
RunResult run_scenario(const Scenario& scenario, const RunOptions& options);

}  // namespace qme
