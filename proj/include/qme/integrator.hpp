#pragma once

// Fixed-step RK4 time stepping for any right-hand side in dynamics.hpp.

#include <cstddef>
#include <functional>
#include <vector>

#include "qme/dynamics.hpp"

namespace qme {

/// d rho / dt at stage time t. Receives the raw stage matrix; statistics are
/// frozen into the closure by the make_*_rhs factories below.
using RhsFunction = std::function<ComplexMatrix(double t, const ComplexMatrix& rho)>;

struct EvolutionSpec {
    RhsFunction rhs;
    double t0 = 0.0;
    double t1 = 1.0;
    double dt = 1e-3;
    bool hermitize_each_step = true;
    std::size_t record_every = 1;
    /// Reject an initial state that violates the DensityMatrix invariants.
    bool check_initial = true;
    /// > 0 enables step halving: a step is accepted when one full step and two
    /// half steps agree to this max-abs tolerance, otherwise it is split.
    double halving_tolerance = 0.0;
    int max_halvings = 10;
};

struct SnapshotDiagnostics {
    double trace = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double hermiticity_defect = 0.0;
};

SnapshotDiagnostics diagnose(const ComplexMatrix& rho);

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<SnapshotDiagnostics> diagnostics;
    std::size_t steps = 0;
    /// Largest max-abs change made by the hermitization of a single step.
    double max_hermitize_correction = 0.0;

    std::size_t size() const noexcept { return times.size(); }
};

/// One classical RK4 step. Throws IntegrationDiverged when a stage is not finite.
DensityMatrix step_rk4(const DensityMatrix& state, const RhsFunction& rhs, double t, double dt,
                       bool hermitize = true);

/// Integrates from spec.t0 to exactly spec.t1 (the last step may be shorter).
Trajectory evolve(const EvolutionSpec& spec, const DensityMatrix& initial);

/// Independent trajectories, one per (spec, initial) pair. With `parallel`
/// the loop is distributed over OpenMP threads; results are identical to the
/// serial loop.
std::vector<Trajectory> evolve_ensemble(const std::vector<EvolutionSpec>& specs,
                                        const std::vector<DensityMatrix>& initials,
                                        bool parallel = true);

// Right-hand-side factories. Operators are captured by value.

RhsFunction make_meanfield_rhs(HermitianOperator h, HermitianOperator a, Statistics stats);
RhsFunction make_general_rhs(HermitianOperator h, HermitianOperator a_p,
                             HermitianOperator a_pbar, Statistics stats);
/// Hole-matrix form with fixed A_p, A_pbar (fermions).
RhsFunction make_hole_form_rhs(HermitianOperator h, HermitianOperator a_p,
                               HermitianOperator a_pbar);

/// Uses the OpenMP element-wise kernel when the network basis is the
/// computational one and `use_kernel` is set, the operator-algebra path otherwise.
RhsFunction make_nonlinear_master_rhs(HermitianOperator h, NetworkProvider net, Statistics stats,
                                      bool use_kernel = true);
/// Evolves rho_bar; the relaxation operators are built from rho = I - rho_bar.
RhsFunction make_nonlinear_master_hole_rhs(HermitianOperator h, NetworkProvider net);

RhsFunction make_generalized_rhs(HermitianOperator h, JumpOperatorSet jumps, Statistics stats);
RhsFunction make_generalized_hole_rhs(HermitianOperator h, JumpOperatorSet jumps);

RhsFunction make_markoff_rhs(HermitianOperator h, NetworkProvider net, DephasingRates dephasing);
RhsFunction make_lindblad_rhs(HermitianOperator h, JumpOperatorSet jumps);

/// Occupation equation lifted to diagonal matrices: diag(f) -> diag(df/dt).
RhsFunction make_quasiclassical_rhs(RealMatrix w, Statistics stats);

}  // namespace qme
