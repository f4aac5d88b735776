#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qme/analysis.hpp"
#include "qme/fock_oracle.hpp"
#include "qme/integrator.hpp"
#include "qme/scenario.hpp"

namespace qme {

using nlohmann::json;

namespace {

struct Evolved {
    Trajectory particles;
    std::optional<Trajectory> holes;
    std::optional<Trajectory> occupations;  // quasiclassical cross-check
    json extra = json::object();
};

EvolutionSpec base_spec(const Scenario& s) {
    EvolutionSpec spec;
    spec.t0 = s.integrator.t0;
    spec.t1 = s.integrator.t1;
    spec.dt = s.integrator.dt;
    spec.record_every = s.integrator.record_every;
    spec.hermitize_each_step = s.integrator.hermitize_each_step;
    spec.check_initial = s.integrator.check_initial;
    spec.halving_tolerance = s.integrator.halving_tolerance;
    return spec;
}

EvolutionSpec with_rhs(EvolutionSpec spec, RhsFunction rhs) {
    spec.rhs = std::move(rhs);
    return spec;
}

Evolved evolve_fock(const Scenario& s, const EvolutionSpec& spec) {
    const FockModel model{s.dimension, s.statistics, s.fock->energies, s.fock->boson_cutoff, *s.rates};
    const FockOracle oracle(model);
    const auto closure = closure_residual_at_t0(oracle, s.initial);

    EvolutionSpec fock_spec = with_rhs(spec, [&oracle](double, const ComplexMatrix& rho) {
        return oracle.rhs(rho);
    });
    // many-body state: positivity and unit trace, no fermion bound on the Fock matrix
    fock_spec.check_initial = false;
    const Trajectory many_body = evolve(fock_spec, DensityMatrix(s.initial, Statistics::Boson));

    Evolved out;
    out.particles.steps = many_body.steps;
    double superselection = 0.0;
    double top_level = 0.0;
    double min_many_body = 0.0;
    for (std::size_t i = 0; i < many_body.size(); ++i) {
        const ComplexMatrix& rs = many_body.states[i].matrix();
        const ComplexMatrix rho_p = oracle.one_particle(rs);
        out.particles.times.push_back(many_body.times[i]);
        out.particles.states.emplace_back(rho_p, s.statistics);
        out.particles.diagnostics.push_back(diagnose(rho_p));
        superselection = std::max(superselection, max_abs(commutator(oracle.number_operator(), rs)));
        top_level = std::max(top_level, oracle.top_level_population(rs));
        min_many_body = std::min(min_many_body, many_body.diagnostics[i].min_eigenvalue);
    }
    out.extra["fock"] = json{
        {"fock_dimension", oracle.dim()},
        {"closure_residual_t0", closure.residual},
        {"closure_exact_rates", std::vector<double>(closure.exact_rates.data(), closure.exact_rates.data() + closure.exact_rates.size())},
        {"closure_reduced_rates", std::vector<double>(closure.closure_rates.data(), closure.closure_rates.data() + closure.closure_rates.size())},
        {"initial_product_state", closure.product_state},
        {"cutoff_contaminated", top_level >= kCutoffContaminationThreshold},
        {"max_top_level_population", top_level},
        {"many_body_trace_final", many_body.diagnostics.back().trace},
        {"many_body_min_eigenvalue", min_many_body},
        {"max_number_commutator", superselection},
    };
    return out;
}

Evolved evolve_scenario(const Scenario& s) {
    const EvolutionSpec spec = base_spec(s);
    if (s.equation == Equation::FockOracle) return evolve_fock(s, spec);

    const DensityMatrix initial(s.initial, s.statistics);
    const std::size_t n = s.dimension;
    auto op = [](const std::optional<ComplexMatrix>& m) { return HermitianOperator(*m); };
    const HermitianOperator h = s.hamiltonian ? op(s.hamiltonian) : HermitianOperator::zero(n);
    const TransitionNetwork net = TransitionNetwork::computational(n, s.rates.value_or(RateMap{}));

    Evolved out;
    RhsFunction rhs;
    RhsFunction hole_rhs;
    switch (s.equation) {
        case Equation::MeanfieldNonhermitian:
            rhs = make_meanfield_rhs(h, op(s.a), s.statistics);
            break;
        case Equation::General:
            rhs = make_general_rhs(h, op(s.a_p), op(s.a_pbar), s.statistics);
            hole_rhs = make_hole_form_rhs(h, op(s.a_p), op(s.a_pbar));
            break;
        case Equation::NonlinearMaster:
            rhs = make_nonlinear_master_rhs(h, constant_network(net), s.statistics);
            hole_rhs = make_nonlinear_master_hole_rhs(h, constant_network(net));
            break;
        case Equation::GeneralizedJumps: {
            const JumpOperatorSet jumps(n, *s.jumps);
            rhs = make_generalized_rhs(h, jumps, s.statistics);
            hole_rhs = make_generalized_hole_rhs(h, jumps);
            break;
        }
        case Equation::Markoff:
            rhs = make_markoff_rhs(h, constant_network(net), DephasingRates(n, *s.dephasing));
            break;
        case Equation::Lindblad:
            rhs = make_lindblad_rhs(h, JumpOperatorSet(n, *s.jumps));
            break;
        case Equation::Quasiclassical:
            rhs = make_quasiclassical_rhs(net.rate_matrix(), s.statistics);
            break;
        case Equation::FockOracle:
            break;
    }

    out.particles = evolve(with_rhs(spec, rhs), initial);
    if (s.analysis.duality) {
        EvolutionSpec hole_spec = with_rhs(spec, hole_rhs);
        out.holes = evolve(hole_spec, hole_transform(initial));
    }
    if (s.analysis.quasiclassical_check) {
        EvolutionSpec q = with_rhs(spec, make_quasiclassical_rhs(net.rate_matrix(), s.statistics));
        out.occupations = evolve(q, initial);
        out.extra["quasiclassical_max_residual"] = max_diagonal_difference(out.particles, *out.occupations);
    }
    if (!s.analysis.low_density_epsilons.empty()) {
        const double trace = initial.particle_number();
        if (!(trace > 0.0)) throw ScenarioError("analysis.low_density_epsilons: initial state must have positive trace");
        const DensityMatrix sigma(initial.matrix() / trace, s.statistics);
        const auto fit = low_density_slope(h, net, sigma, s.analysis.low_density_epsilons);
        out.extra["low_density"] = json{{"slope", fit.slope},
                                        {"degenerate", fit.degenerate},
                                        {"epsilons", fit.epsilons},
                                        {"residuals", fit.residuals}};
    }
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

void write_states(const std::filesystem::path& file, const Trajectory& traj) {
    std::ofstream out(file);
    if (!out) throw ScenarioError("cannot write '" + file.string() + "'");
    const Eigen::Index n = traj.states.front().matrix().rows();
    out << "t";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) out << ",re_" << i + 1 << "_" << k + 1 << ",im_" << i + 1 << "_" << k + 1;
    }
    out << "\n";
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const ComplexMatrix& m = traj.states[s].matrix();
        out << fmt(traj.times[s]);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < n; ++k) out << "," << fmt(m(i, k).real()) << "," << fmt(m(i, k).imag());
        }
        out << "\n";
    }
}

void write_diagnostics(const std::filesystem::path& file, const Trajectory& traj,
                       const DiagnosticSeries& d) {
    std::ofstream out(file);
    if (!out) throw ScenarioError("cannot write '" + file.string() + "'");
    out << "t,trace,min_eig,max_eig,herm_defect";
    if (d.duality_residual) out << ",duality_residual";
    out << "\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& g = traj.diagnostics[i];
        out << fmt(traj.times[i]) << "," << fmt(g.trace) << "," << fmt(g.min_eigenvalue) << ","
            << fmt(g.max_eigenvalue) << "," << fmt(g.hermiticity_defect);
        if (d.duality_residual) out << "," << fmt((*d.duality_residual)[i]);
        out << "\n";
    }
}

}  // namespace

std::filesystem::path resolve_out_dir(const Scenario& s, const RunOptions& options) {
    if (options.out_dir) return *options.out_dir;
    if (const char* root = std::getenv("QME_OUT_DIR"); root != nullptr && *root != '\0') {
        return std::filesystem::path(root) / s.name;
    }
    return std::filesystem::path("qme_out") / s.name;
}

RunResult run_scenario(const Scenario& s, const RunOptions& options) {
    RunResult result;
    const auto start = std::chrono::steady_clock::now();
    try {
        result.out_dir = resolve_out_dir(s, options);
        const Evolved ev = evolve_scenario(s);
        const Trajectory& traj = ev.particles;
        const DiagnosticSeries series = diagnostic_series(traj, ev.holes ? &*ev.holes : nullptr);
        const auto violations = bounds_monitor(traj, s.statistics);
        const auto crossing = crossing_time(traj);

        std::filesystem::create_directories(result.out_dir);
        if (s.output.states) write_states(result.out_dir / "states.csv", traj);
        if (s.output.diagnostics) write_diagnostics(result.out_dir / "diagnostics.csv", traj, series);

        const RealVector final_spectrum = hermitian_eigenvalues(traj.states.back().matrix());
        json summary;
        summary["name"] = s.name;
        summary["equation"] = to_string(s.equation);
        summary["statistics"] = to_string(s.statistics);
        summary["dimension"] = s.dimension;
        summary["t_final"] = traj.times.back();
        summary["steps"] = traj.steps;
        summary["snapshots"] = traj.size();
        summary["final_spectrum"] = std::vector<double>(final_spectrum.data(), final_spectrum.data() + final_spectrum.size());
        summary["min_eig_final"] = final_spectrum(0);
        summary["max_eig_final"] = final_spectrum(final_spectrum.size() - 1);
        summary["trace_initial"] = traj.diagnostics.front().trace;
        summary["trace_final"] = traj.diagnostics.back().trace;
        summary["max_trace_drift"] = max_trace_drift(traj);
        summary["max_hermiticity_defect"] = max_hermiticity_defect(traj);
        summary["initial_min_eig"] = traj.diagnostics.front().min_eigenvalue;
        json vlist = json::array();
        for (const auto& v : violations) {
            vlist.push_back(json{{"t", v.time}, {"kind", to_string(v.kind)}, {"eigenvalue", v.eigenvalue}});
        }
        summary["violations"] = vlist;
        summary["crossing_time"] = crossing ? json(*crossing) : json(nullptr);
        if (series.duality_residual) {
            double worst = 0.0;
            for (double r : *series.duality_residual) worst = std::max(worst, r);
            summary["duality_residual_max"] = worst;
        }
        for (const auto& [k, v] : ev.extra.items()) summary[k] = v;
        summary["expect_violations"] = s.expect_violations;

        const bool unexpected = !violations.empty() && !s.expect_violations;
        result.exit_code = unexpected ? kExitUnexpectedViolation : kExitOk;
        summary["status"] = unexpected ? "unexpected_violation" : "ok";
        summary["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.summary = summary;

        std::ofstream out(result.out_dir / "summary.json");
        if (!out) throw ScenarioError("cannot write summary.json in '" + result.out_dir.string() + "'");
        out << summary.dump(2) << "\n";
        if (!options.quiet) {
            std::cout << s.name << ": " << traj.steps << " steps to t = " << traj.times.back()
                      << ", min eigenvalue " << final_spectrum(0) << ", " << violations.size()
                      << " violation(s), output in " << result.out_dir.string() << "\n";
        }
    } catch (const IntegrationDiverged& e) {
        result.exit_code = kExitError;
        result.error = e.what();
    } catch (const std::exception& e) {
        result.exit_code = kExitError;
        result.error = e.what();
    }
    return result;
}

RunResult run_scenario(const std::filesystem::path& path, const RunOptions& options) {
    try {
        json doc = load_json(path);
        for (const auto& o : options.overrides) apply_override(doc, o);
        return run_scenario(parse_scenario(doc), options);
    } catch (const std::exception& e) {
        RunResult r;
        r.exit_code = kExitError;
        r.error = e.what();
        return r;
    }
}

}  // namespace qme
