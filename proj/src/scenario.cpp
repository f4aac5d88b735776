#include "qme/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qme/analysis.hpp"
#include "qme/fock_oracle.hpp"

namespace qme {

using nlohmann::json;

namespace {

struct EquationInfo {
    Equation eq;
    const char* name;
    std::vector<std::string> groups;
};

const std::vector<EquationInfo>& equation_table() {
    static const std::vector<EquationInfo> table = {
        {Equation::MeanfieldNonhermitian, "meanfield_nonhermitian", {"hamiltonian", "A"}},
        {Equation::General, "general", {"hamiltonian", "A_p", "A_pbar"}},
        {Equation::NonlinearMaster, "nonlinear_master", {"hamiltonian", "rates"}},
        {Equation::GeneralizedJumps, "generalized_jumps", {"hamiltonian", "jumps"}},
        {Equation::Markoff, "markoff", {"hamiltonian", "rates", "dephasing"}},
        {Equation::Lindblad, "lindblad", {"hamiltonian", "jumps"}},
        {Equation::Quasiclassical, "quasiclassical", {"rates"}},
        {Equation::FockOracle, "fock_oracle", {"fock", "rates"}},
    };
    return table;
}

const std::set<std::string> kParameterGroups = {"hamiltonian", "A",     "A_p",       "A_pbar",
                                                "rates",       "jumps", "dephasing", "fock"};
const std::set<std::string> kTopLevel = {"name",       "description", "equation", "statistics",
                                         "dimension",  "initial",     "integrator", "output",
                                         "analysis",   "expect_violations"};
const std::set<std::string> kIntegratorKeys = {"t0",           "t1",         "dt",
                                               "record_every", "hermitize_each_step",
                                               "check_initial", "halving_tolerance"};

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ScenarioError(field + ": " + msg);
}

const EquationInfo& info(Equation e) {
    for (const auto& i : equation_table()) {
        if (i.eq == e) return i;
    }
    throw ScenarioError("unknown equation");
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
}

std::size_t count(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(field, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

bool boolean(const json& j, const std::string& field) {
    if (!j.is_boolean()) fail(field, "expected true or false");
    return j.get<bool>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& field) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) fail(field.empty() ? key : field + "." + key, "unknown key");
    }
}

RealMatrix real_rows(const json& rows, std::size_t dim, const std::string& field) {
    if (!rows.is_array() || rows.size() != dim) {
        fail(field, "expected " + std::to_string(dim) + " rows");
    }
    const auto n = static_cast<Eigen::Index>(dim);
    RealMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || row.size() != dim) {
            fail(field, "row " + std::to_string(i + 1) + " must have " + std::to_string(dim) + " entries");
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            m(i, k) = number(row[static_cast<std::size_t>(k)], field);
        }
    }
    return m;
}

/// nested real array | {"real": rows, "imag": rows} | {"diagonal": [...]} | "zero"
ComplexMatrix matrix_value(const json& j, std::size_t dim, const std::string& field) {
    const auto n = static_cast<Eigen::Index>(dim);
    if (j.is_string()) {
        if (j.get<std::string>() == "zero") return ComplexMatrix::Zero(n, n);
        fail(field, "unknown matrix preset '" + j.get<std::string>() + "'");
    }
    if (j.is_array()) return real_rows(j, dim, field).cast<Complex>();
    if (j.is_object()) {
        if (j.contains("diagonal")) {
            reject_unknown(j, {"diagonal"}, field);
            const json& d = j["diagonal"];
            if (!d.is_array() || d.size() != dim) fail(field, "diagonal must have " + std::to_string(dim) + " entries");
            RealVector v(n);
            for (Eigen::Index i = 0; i < n; ++i) v(i) = number(d[static_cast<std::size_t>(i)], field);
            return v.cast<Complex>().asDiagonal().toDenseMatrix();
        }
        reject_unknown(j, {"real", "imag"}, field);
        if (!j.contains("real")) fail(field, "matrix object needs 'real' (and optionally 'imag')");
        ComplexMatrix m = real_rows(j["real"], dim, field + ".real").cast<Complex>();
        if (j.contains("imag")) m += Complex(0.0, 1.0) * real_rows(j["imag"], dim, field + ".imag").cast<Complex>();
        return m;
    }
    fail(field, "expected a matrix");
}

json matrix_json(const ComplexMatrix& m) {
    auto rows = [&](bool imag) {
        json out = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(imag ? m(i, k).imag() : m(i, k).real());
            out.push_back(row);
        }
        return out;
    };
    if (m.imag().isZero(0.0)) return rows(false);
    return json{{"real", rows(false)}, {"imag", rows(true)}};
}

ComplexMatrix hermitian_value(const json& j, std::size_t dim, const std::string& field) {
    ComplexMatrix m = matrix_value(j, dim, field);
    const double defect = hermiticity_defect(m);
    if (defect > kHermitianTolerance) {
        std::ostringstream os;
        os << "matrix must be hermitian (defect " << defect << ")";
        fail(field, os.str());
    }
    return m;
}

RateMap rate_list(const json& j, std::size_t dim, const std::string& field) {
    if (!j.is_array()) fail(field, "expected a list of [to, from, rate] triples");
    RateMap rates;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number_integer() ||
            !entry[1].is_number_integer() || !entry[2].is_number()) {
            fail(field, "each entry must be [to, from, rate] with 1-based integer indices");
        }
        const long long to = entry[0].get<long long>();
        const long long from = entry[1].get<long long>();
        std::ostringstream name;
        name << field << "[(" << to << "," << from << ")]";
        if (to < 1 || from < 1 || static_cast<std::size_t>(to) > dim || static_cast<std::size_t>(from) > dim) {
            fail(name.str(), "index out of range 1.." + std::to_string(dim));
        }
        const double w = entry[2].get<double>();
        if (!std::isfinite(w) || w < 0.0) {
            std::ostringstream os;
            os << "rate must be a finite nonnegative number, got " << w;
            fail(name.str(), os.str());
        }
        const auto key = std::make_pair(static_cast<std::size_t>(to - 1), static_cast<std::size_t>(from - 1));
        if (rates.count(key)) fail(name.str(), "duplicate entry");
        rates[key] = w;
    }
    return rates;
}

json rate_json(const RateMap& rates) {
    json out = json::array();
    for (const auto& [key, w] : rates) out.push_back(json::array({key.first + 1, key.second + 1, w}));
    return out;
}

std::vector<double> number_list(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(number(x, field));
    return out;
}

ComplexMatrix one_particle_initial(const json& j, const Scenario& s) {
    const std::string field = "initial";
    const auto n = static_cast<Eigen::Index>(s.dimension);
    if (!j.is_object()) fail(field, "expected an object");
    if (j.contains("preset")) {
        const std::string preset = j["preset"].is_string() ? j["preset"].get<std::string>() : "";
        if (preset == "empty") {
            reject_unknown(j, {"preset"}, field);
            return ComplexMatrix::Zero(n, n);
        }
        if (preset == "appendix_d") {
            reject_unknown(j, {"preset"}, field);
            if (s.dimension != 3) fail(field, "preset 'appendix_d' requires dimension 3");
            return appendix_d_initial_matrix();
        }
        if (preset == "diagonal") {
            reject_unknown(j, {"preset", "occupations"}, field);
            if (!j.contains("occupations")) fail(field + ".occupations", "missing");
            const auto occ = number_list(j["occupations"], field + ".occupations");
            if (occ.size() != s.dimension) fail(field + ".occupations", "expected " + std::to_string(s.dimension) + " entries");
            ComplexMatrix m = ComplexMatrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) m(i, i) = occ[static_cast<std::size_t>(i)];
            return m;
        }
        fail(field + ".preset", "unknown preset '" + preset + "'");
    }
    reject_unknown(j, {"matrix"}, field);
    if (!j.contains("matrix")) fail(field, "needs 'preset' or 'matrix'");
    return matrix_value(j["matrix"], s.dimension, field + ".matrix");
}

ComplexMatrix fock_initial(const json& j, const FockOracle& oracle) {
    const std::string field = "initial";
    if (!j.is_object()) fail(field, "expected an object");
    const std::string preset = j.contains("preset") && j["preset"].is_string() ? j["preset"].get<std::string>() : "";
    try {
        if (preset == "fock_occupations") {
            reject_unknown(j, {"preset", "occupations"}, field);
            std::vector<std::size_t> occ;
            if (!j.contains("occupations") || !j["occupations"].is_array()) fail(field + ".occupations", "missing");
            for (const auto& x : j["occupations"]) occ.push_back(count(x, field + ".occupations"));
            return oracle.basis_state(occ);
        }
        if (preset == "fock_product") {
            reject_unknown(j, {"preset", "distributions"}, field);
            if (!j.contains("distributions") || !j["distributions"].is_array()) fail(field + ".distributions", "missing");
            std::vector<std::vector<double>> dists;
            for (const auto& d : j["distributions"]) dists.push_back(number_list(d, field + ".distributions"));
            return oracle.product_state(dists);
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        fail(field, e.what());
    }
    if (!preset.empty()) fail(field + ".preset", "unknown preset '" + preset + "'");
    reject_unknown(j, {"matrix"}, field);
    if (!j.contains("matrix")) fail(field, "needs 'preset' or 'matrix'");
    return matrix_value(j["matrix"], oracle.dim(), field + ".matrix");
}

bool is_diagonal(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (i != k && m(i, k) != Complex(0.0, 0.0)) return false;
        }
    }
    return true;
}

bool same(const std::optional<ComplexMatrix>& a, const std::optional<ComplexMatrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

const char* to_string(Equation e) noexcept {
    for (const auto& i : equation_table()) {
        if (i.eq == e) return i.name;
    }
    return "unknown";
}

Equation equation_from_string(const std::string& name) {
    for (const auto& i : equation_table()) {
        if (name == i.name) return i.eq;
    }
    std::string known;
    for (const auto& i : equation_table()) known += std::string(known.empty() ? "" : ", ") + i.name;
    throw ScenarioError("equation: unknown equation '" + name + "' (known: " + known + ")");
}

bool Scenario::operator==(const Scenario& o) const {
    if (name != o.name || description != o.description || equation != o.equation ||
        statistics != o.statistics || dimension != o.dimension) {
        return false;
    }
    if (!same(initial, o.initial) || !same(hamiltonian, o.hamiltonian) || !same(a, o.a) ||
        !same(a_p, o.a_p) || !same(a_pbar, o.a_pbar)) {
        return false;
    }
    if (jumps.has_value() != o.jumps.has_value()) return false;
    if (jumps) {
        if (jumps->size() != o.jumps->size()) return false;
        for (std::size_t i = 0; i < jumps->size(); ++i) {
            if (!same((*jumps)[i], (*o.jumps)[i])) return false;
        }
    }
    return rates == o.rates && dephasing == o.dephasing && fock == o.fock &&
           integrator == o.integrator && output == o.output && analysis == o.analysis &&
           expect_violations == o.expect_violations;
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ScenarioError("scenario: top level must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!kTopLevel.count(key) && !kParameterGroups.count(key)) fail(key, "unknown key");
    }
    Scenario s;
    if (!doc.contains("name") || !doc["name"].is_string()) fail("name", "missing or not a string");
    s.name = doc["name"].get<std::string>();
    if (s.name.empty() || s.name.find('/') != std::string::npos) fail("name", "must be a non-empty file-name-safe string");
    if (doc.contains("description")) {
        if (!doc["description"].is_string()) fail("description", "expected a string");
        s.description = doc["description"].get<std::string>();
    }
    if (!doc.contains("equation") || !doc["equation"].is_string()) fail("equation", "missing or not a string");
    s.equation = equation_from_string(doc["equation"].get<std::string>());

    const std::string stats = doc.value("statistics", std::string("fermion"));
    if (stats == "fermion") {
        s.statistics = Statistics::Fermion;
    } else if (stats == "boson") {
        s.statistics = Statistics::Boson;
    } else {
        fail("statistics", "expected 'fermion' or 'boson'");
    }

    if (!doc.contains("dimension")) fail("dimension", "missing");
    s.dimension = count(doc["dimension"], "dimension");
    if (s.dimension == 0) fail("dimension", "must be positive");

    const auto& required = info(s.equation).groups;
    for (const auto& g : kParameterGroups) {
        const bool wanted = std::find(required.begin(), required.end(), g) != required.end();
        if (wanted && !doc.contains(g)) {
            fail(g, std::string("required by equation '") + to_string(s.equation) + "'");
        }
        if (!wanted && doc.contains(g)) {
            fail(g, std::string("not accepted by equation '") + to_string(s.equation) + "'");
        }
    }

    if (doc.contains("integrator")) {
        const json& ij = doc["integrator"];
        if (!ij.is_object()) fail("integrator", "expected an object");
        reject_unknown(ij, kIntegratorKeys, "integrator");
        auto& b = s.integrator;
        if (ij.contains("t0")) b.t0 = number(ij["t0"], "integrator.t0");
        if (ij.contains("t1")) b.t1 = number(ij["t1"], "integrator.t1");
        if (ij.contains("dt")) b.dt = number(ij["dt"], "integrator.dt");
        if (ij.contains("record_every")) b.record_every = count(ij["record_every"], "integrator.record_every");
        if (ij.contains("hermitize_each_step")) b.hermitize_each_step = boolean(ij["hermitize_each_step"], "integrator.hermitize_each_step");
        if (ij.contains("check_initial")) b.check_initial = boolean(ij["check_initial"], "integrator.check_initial");
        if (ij.contains("halving_tolerance")) b.halving_tolerance = number(ij["halving_tolerance"], "integrator.halving_tolerance");
        if (!(b.dt > 0.0)) fail("integrator.dt", "must be positive");
        if (!(b.t1 > b.t0)) fail("integrator.t1", "must exceed t0");
        if (b.record_every == 0) fail("integrator.record_every", "must be positive");
        if (b.halving_tolerance < 0.0) fail("integrator.halving_tolerance", "must be nonnegative");
    }
    if (doc.contains("output")) {
        const json& oj = doc["output"];
        if (!oj.is_object()) fail("output", "expected an object");
        reject_unknown(oj, {"states", "diagnostics"}, "output");
        if (oj.contains("states")) s.output.states = boolean(oj["states"], "output.states");
        if (oj.contains("diagnostics")) s.output.diagnostics = boolean(oj["diagnostics"], "output.diagnostics");
    }
    if (doc.contains("expect_violations")) s.expect_violations = boolean(doc["expect_violations"], "expect_violations");

    try {
        if (doc.contains("rates")) {
            s.rates = rate_list(doc["rates"], s.dimension, "rates");
            (void)TransitionNetwork::computational(s.dimension, *s.rates);
        }
        if (doc.contains("dephasing")) {
            s.dephasing = rate_list(doc["dephasing"], s.dimension, "dephasing");
            (void)DephasingRates(s.dimension, *s.dephasing);
        }
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(e.what());
    }
    if (doc.contains("hamiltonian")) s.hamiltonian = hermitian_value(doc["hamiltonian"], s.dimension, "hamiltonian");
    if (doc.contains("A")) s.a = hermitian_value(doc["A"], s.dimension, "A");
    if (doc.contains("A_p")) s.a_p = hermitian_value(doc["A_p"], s.dimension, "A_p");
    if (doc.contains("A_pbar")) s.a_pbar = hermitian_value(doc["A_pbar"], s.dimension, "A_pbar");
    if (doc.contains("jumps")) {
        const json& jj = doc["jumps"];
        if (!jj.is_array()) fail("jumps", "expected a list of matrices");
        std::vector<ComplexMatrix> ops;
        for (std::size_t i = 0; i < jj.size(); ++i) {
            ops.push_back(matrix_value(jj[i], s.dimension, "jumps[" + std::to_string(i + 1) + "]"));
        }
        s.jumps = std::move(ops);
    }

    if (!doc.contains("initial")) fail("initial", "missing");
    if (s.equation == Equation::FockOracle) {
        const json& fj = doc["fock"];
        if (!fj.is_object()) fail("fock", "expected an object");
        reject_unknown(fj, {"energies", "boson_cutoff"}, "fock");
        FockBlock fb;
        fb.modes = s.dimension;
        fb.energies = fj.contains("energies") ? number_list(fj["energies"], "fock.energies")
                                              : std::vector<double>(s.dimension, 0.0);
        if (fj.contains("boson_cutoff")) fb.boson_cutoff = count(fj["boson_cutoff"], "fock.boson_cutoff");
        FockModel model{fb.modes, s.statistics, fb.energies, fb.boson_cutoff, *s.rates};
        try {
            model.validate();
        } catch (const std::exception& e) {
            fail("fock", e.what());
        }
        s.fock = fb;
        const FockOracle oracle(model);
        s.initial = fock_initial(doc["initial"], oracle);
        if (s.integrator.check_initial) {
            try {
                (void)ManyBodyState::validated(s.initial);
            } catch (const std::exception& e) {
                fail("initial", e.what());
            }
        }
    } else {
        s.initial = one_particle_initial(doc["initial"], s);
        const auto check = check_density_matrix(s.initial, s.statistics);
        if (s.integrator.check_initial && !check.ok) {
            std::ostringstream os;
            os << check.failure << " (min eigenvalue " << check.min_eigenvalue << ", max eigenvalue "
               << check.max_eigenvalue << ")";
            fail("initial", os.str());
        }
        if (check.hermiticity_defect > kHermitianTolerance) fail("initial", "matrix must be hermitian");
        if (s.equation == Equation::Quasiclassical && !is_diagonal(s.initial)) {
            fail("initial", "the occupation equation needs a diagonal initial state");
        }
    }

    if (doc.contains("analysis")) {
        const json& aj = doc["analysis"];
        if (!aj.is_object()) fail("analysis", "expected an object");
        reject_unknown(aj, {"duality", "quasiclassical_check", "low_density_epsilons"}, "analysis");
        if (aj.contains("duality")) s.analysis.duality = boolean(aj["duality"], "analysis.duality");
        if (aj.contains("quasiclassical_check")) s.analysis.quasiclassical_check = boolean(aj["quasiclassical_check"], "analysis.quasiclassical_check");
        if (aj.contains("low_density_epsilons")) s.analysis.low_density_epsilons = number_list(aj["low_density_epsilons"], "analysis.low_density_epsilons");
    }
    if (s.analysis.duality) {
        const bool eq_ok = s.equation == Equation::General || s.equation == Equation::NonlinearMaster ||
                           s.equation == Equation::GeneralizedJumps;
        if (s.statistics != Statistics::Fermion || !eq_ok) {
            fail("analysis.duality", "needs fermions and equation general, nonlinear_master or generalized_jumps");
        }
    }
    if (s.analysis.quasiclassical_check) {
        if (s.equation != Equation::NonlinearMaster) fail("analysis.quasiclassical_check", "needs equation nonlinear_master");
        if (!is_diagonal(*s.hamiltonian) || !is_diagonal(s.initial)) {
            fail("analysis.quasiclassical_check", "needs a diagonal hamiltonian and a diagonal initial state");
        }
    }
    if (!s.analysis.low_density_epsilons.empty() && s.equation != Equation::NonlinearMaster) {
        fail("analysis.low_density_epsilons", "needs equation nonlinear_master");
    }
    return s;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

Scenario parse_scenario_file(const std::filesystem::path& path) {
    return parse_scenario(load_json(path));
}

json to_json(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    if (!s.description.empty()) doc["description"] = s.description;
    doc["equation"] = to_string(s.equation);
    doc["statistics"] = to_string(s.statistics);
    doc["dimension"] = s.dimension;
    doc["initial"] = json{{"matrix", matrix_json(s.initial)}};
    if (s.hamiltonian) doc["hamiltonian"] = matrix_json(*s.hamiltonian);
    if (s.a) doc["A"] = matrix_json(*s.a);
    if (s.a_p) doc["A_p"] = matrix_json(*s.a_p);
    if (s.a_pbar) doc["A_pbar"] = matrix_json(*s.a_pbar);
    if (s.rates) doc["rates"] = rate_json(*s.rates);
    if (s.dephasing) doc["dephasing"] = rate_json(*s.dephasing);
    if (s.jumps) {
        json list = json::array();
        for (const auto& w : *s.jumps) list.push_back(matrix_json(w));
        doc["jumps"] = list;
    }
    if (s.fock) doc["fock"] = json{{"energies", s.fock->energies}, {"boson_cutoff", s.fock->boson_cutoff}};
    const auto& b = s.integrator;
    doc["integrator"] = json{{"t0", b.t0},
                             {"t1", b.t1},
                             {"dt", b.dt},
                             {"record_every", b.record_every},
                             {"hermitize_each_step", b.hermitize_each_step},
                             {"check_initial", b.check_initial},
                             {"halving_tolerance", b.halving_tolerance}};
    doc["output"] = json{{"states", s.output.states}, {"diagnostics", s.output.diagnostics}};
    doc["analysis"] = json{{"duality", s.analysis.duality},
                           {"quasiclassical_check", s.analysis.quasiclassical_check},
                           {"low_density_epsilons", s.analysis.low_density_epsilons}};
    doc["expect_violations"] = s.expect_violations;
    return doc;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ScenarioError("override '" + assignment + "': expected key=value");
    }
    std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    if (key.find('.') == std::string::npos && kIntegratorKeys.count(key)) key = "integrator." + key;

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ScenarioError("override '" + assignment + "': empty key segment");
        if (!node->is_object()) throw ScenarioError("override '" + assignment + "': '" + part + "' is not inside an object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

}  // namespace qme
