#include "qme/integrator.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "qme/kernels.hpp"

namespace qme {

namespace {

ComplexMatrix stage(const RhsFunction& rhs, double t, const ComplexMatrix& rho) {
    ComplexMatrix k = rhs(t, rho);
    if (k.rows() != rho.rows() || k.cols() != rho.cols()) {
        throw DimensionMismatch("step_rk4: right-hand side returned a matrix of the wrong shape");
    }
    if (!all_finite(k)) {
        std::ostringstream os;
        os << "integration diverged: non-finite right-hand side at t = " << t;
        throw IntegrationDiverged(t, os.str());
    }
    return k;
}

ComplexMatrix rk4(const ComplexMatrix& y, const RhsFunction& rhs, double t, double dt) {
    const ComplexMatrix k1 = stage(rhs, t, y);
    const ComplexMatrix k2 = stage(rhs, t + 0.5 * dt, y + (0.5 * dt) * k1);
    const ComplexMatrix k3 = stage(rhs, t + 0.5 * dt, y + (0.5 * dt) * k2);
    const ComplexMatrix k4 = stage(rhs, t + dt, y + dt * k3);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Stepper {
    const EvolutionSpec& spec;
    double max_correction = 0.0;

    ComplexMatrix finish(ComplexMatrix y) {
        if (!spec.hermitize_each_step) return y;
        ComplexMatrix h = hermitian_part(y);
        max_correction = std::max(max_correction, max_abs(h - y));
        return h;
    }

    ComplexMatrix advance(const ComplexMatrix& y, double t, double h, int depth) {
        if (spec.halving_tolerance <= 0.0) return finish(rk4(y, spec.rhs, t, h));
        const ComplexMatrix full = rk4(y, spec.rhs, t, h);
        const ComplexMatrix mid = rk4(y, spec.rhs, t, 0.5 * h);
        const ComplexMatrix two_half = rk4(mid, spec.rhs, t + 0.5 * h, 0.5 * h);
        if (max_abs(full - two_half) <= spec.halving_tolerance || depth >= spec.max_halvings) {
            return finish(two_half);
        }
        const ComplexMatrix first = advance(y, t, 0.5 * h, depth + 1);
        return advance(first, t + 0.5 * h, 0.5 * h, depth + 1);
    }
};

}  // namespace

SnapshotDiagnostics diagnose(const ComplexMatrix& rho) {
    SnapshotDiagnostics d;
    d.trace = rho.trace().real();
    d.hermiticity_defect = hermiticity_defect(rho);
    const RealVector ev = hermitian_eigenvalues(rho);
    d.min_eigenvalue = ev(0);
    d.max_eigenvalue = ev(ev.size() - 1);
    return d;
}

DensityMatrix step_rk4(const DensityMatrix& state, const RhsFunction& rhs, double t, double dt,
                       bool hermitize) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
    ComplexMatrix y = rk4(state.matrix(), rhs, t, dt);
    if (hermitize) y = hermitian_part(y);
    return DensityMatrix(std::move(y), state.statistics());
}

Trajectory evolve(const EvolutionSpec& spec, const DensityMatrix& initial) {
    if (!spec.rhs) throw std::invalid_argument("evolve: no right-hand side");
    if (!(spec.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
    if (!(spec.t1 > spec.t0)) throw std::invalid_argument("evolve: t1 must exceed t0");
    if (spec.record_every == 0) throw std::invalid_argument("evolve: record_every must be positive");
    if (spec.check_initial) {
        // throws InvariantViolation before any stepping
        (void)DensityMatrix::validated(initial.matrix(), initial.statistics());
    }

    const double span = spec.t1 - spec.t0;
    const auto n_steps = static_cast<std::size_t>(std::ceil(span / spec.dt - 1e-9));

    Trajectory traj;
    auto record = [&](double t, const ComplexMatrix& y) {
        traj.times.push_back(t);
        traj.states.emplace_back(y, initial.statistics());
        traj.diagnostics.push_back(diagnose(y));
    };

    Stepper stepper{spec};
    ComplexMatrix y = initial.matrix();
    record(spec.t0, y);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = spec.t0 + static_cast<double>(k) * spec.dt;
        const double t_next = (k + 1 == n_steps) ? spec.t1 : spec.t0 + static_cast<double>(k + 1) * spec.dt;
        y = stepper.advance(y, t, t_next - t, 0);
        if (!all_finite(y)) {
            std::ostringstream os;
            os << "integration diverged: non-finite state at t = " << t_next;
            throw IntegrationDiverged(t_next, os.str());
        }
        if ((k + 1) % spec.record_every == 0 || k + 1 == n_steps) record(t_next, y);
    }
    traj.steps = n_steps;
    traj.max_hermitize_correction = stepper.max_correction;
    return traj;
}

std::vector<Trajectory> evolve_ensemble(const std::vector<EvolutionSpec>& specs,
                                        const std::vector<DensityMatrix>& initials,
                                        bool parallel) {
    if (specs.size() != initials.size()) {
        throw DimensionMismatch("evolve_ensemble: one initial state per spec is required");
    }
    const auto n = static_cast<long>(specs.size());
    std::vector<Trajectory> out(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                evolve(specs[static_cast<std::size_t>(i)], initials[static_cast<std::size_t>(i)]);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

RhsFunction make_meanfield_rhs(HermitianOperator h, HermitianOperator a, Statistics stats) {
    return [h = std::move(h), a = std::move(a), stats](double, const ComplexMatrix& rho) {
        return rhs_meanfield_nonhermitian(h, a, DensityMatrix(rho, stats));
    };
}

RhsFunction make_general_rhs(HermitianOperator h, HermitianOperator a_p,
                             HermitianOperator a_pbar, Statistics stats) {
    return [h = std::move(h), a_p = std::move(a_p), a_pbar = std::move(a_pbar), stats](
               double, const ComplexMatrix& rho) {
        return rhs_general(h, a_p, a_pbar, DensityMatrix(rho, stats));
    };
}

RhsFunction make_hole_form_rhs(HermitianOperator h, HermitianOperator a_p,
                               HermitianOperator a_pbar) {
    return [h = std::move(h), a_p = std::move(a_p), a_pbar = std::move(a_pbar)](
               double, const ComplexMatrix& rho_bar) {
        return rhs_hole_form(h, a_p, a_pbar, DensityMatrix(rho_bar, Statistics::Fermion));
    };
}

RhsFunction make_nonlinear_master_rhs(HermitianOperator h, NetworkProvider net, Statistics stats,
                                      bool use_kernel) {
    return [h = std::move(h), net = std::move(net), stats, use_kernel](double t,
                                                                        const ComplexMatrix& rho) {
        const TransitionNetwork network = net(t);
        if (use_kernel && network.is_computational()) {
            return kernels::nonlinear_master(h.matrix(), network.rate_matrix(), rho, stats);
        }
        return rhs_nonlinear_master(h, network, DensityMatrix(rho, stats));
    };
}

RhsFunction make_nonlinear_master_hole_rhs(HermitianOperator h, NetworkProvider net) {
    return [h = std::move(h), net = std::move(net)](double t, const ComplexMatrix& rho_bar) {
        const DensityMatrix holes(rho_bar, Statistics::Fermion);
        const auto ops = build_relaxation_operators(net(t), hole_transform(holes));
        return rhs_hole_form(h, ops.particle_loss, ops.hole_loss, holes);
    };
}

RhsFunction make_generalized_rhs(HermitianOperator h, JumpOperatorSet jumps, Statistics stats) {
    return [h = std::move(h), jumps = std::move(jumps), stats](double, const ComplexMatrix& rho) {
        return rhs_generalized(h, jumps, DensityMatrix(rho, stats));
    };
}

RhsFunction make_generalized_hole_rhs(HermitianOperator h, JumpOperatorSet jumps) {
    return [h = std::move(h), jumps = std::move(jumps)](double, const ComplexMatrix& rho_bar) {
        const DensityMatrix holes(rho_bar, Statistics::Fermion);
        const auto ops = relaxation_operators_from_jumps(jumps, hole_transform(holes));
        return rhs_hole_form(h, ops.particle_loss, ops.hole_loss, holes);
    };
}

RhsFunction make_markoff_rhs(HermitianOperator h, NetworkProvider net, DephasingRates dephasing) {
    return [h = std::move(h), net = std::move(net), dephasing = std::move(dephasing)](
               double t, const ComplexMatrix& rho) {
        const TransitionNetwork network = net(t);
        if (network.is_computational()) {
            return kernels::markoff(h.matrix(), network.rate_matrix(), dephasing.matrix(), rho);
        }
        return rhs_markoff(h, network, dephasing, rho);
    };
}

RhsFunction make_lindblad_rhs(HermitianOperator h, JumpOperatorSet jumps) {
    return [h = std::move(h), jumps = std::move(jumps)](double, const ComplexMatrix& rho) {
        return rhs_lindblad(h, jumps, rho);
    };
}

RhsFunction make_quasiclassical_rhs(RealMatrix w, Statistics stats) {
    return [w = std::move(w), stats](double, const ComplexMatrix& rho) {
        const RealVector df = rhs_quasiclassical(rho.diagonal().real(), w, stats);
        return ComplexMatrix(df.cast<Complex>().asDiagonal());
    };
}

}  // namespace qme
