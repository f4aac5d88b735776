#pragma once

// Post-processing of trajectories: positivity and bound violations,
// particle-hole duality, low-density scaling, and the dephasing
// counterexample setup.

#include <optional>
#include <vector>

#include "qme/integrator.hpp"

namespace qme {

inline constexpr double kViolationThreshold = 1e-8;

struct DiagnosticSeries {
    std::vector<double> times;
    std::vector<double> trace_drift;  // trace(t) - trace(t0)
    std::vector<double> min_eigenvalue;
    std::vector<double> max_eigenvalue;
    std::vector<double> hermiticity_defect;
    std::optional<std::vector<double>> duality_residual;  // |rho + rho_bar - I|_max
};

/// Throws DimensionMismatch when `holes` is given on a different time grid.
DiagnosticSeries diagnostic_series(const Trajectory& traj, const Trajectory* holes = nullptr);

double max_trace_drift(const Trajectory& traj);
double max_hermiticity_defect(const Trajectory& traj);

/// Largest |rho_p(t) + rho_pbar(t) - I| over all snapshots.
double duality_check(const Trajectory& particles, const Trajectory& holes);

/// Largest |diag rho_a(t) - diag rho_b(t)| over snapshots (same time grid).
double max_diagonal_difference(const Trajectory& a, const Trajectory& b);

struct Violation {
    enum class Kind { NegativeEigenvalue, FermionAboveOne };
    double time = 0.0;
    Kind kind = Kind::NegativeEigenvalue;
    double eigenvalue = 0.0;
};

const char* to_string(Violation::Kind k) noexcept;

/// (t, eigenvalue) wherever min < -threshold, and for fermions max > 1 + threshold.
std::vector<Violation> bounds_monitor(const Trajectory& traj, Statistics stats,
                                      double threshold = kViolationThreshold);

/// First time the minimum eigenvalue goes from >= 0 to < 0, located by
/// bisection on the linear interpolant between the bracketing snapshots.
std::optional<double> crossing_time(const Trajectory& traj);

// --- dephasing counterexample -------------------------------------------

/// The 3x3 initial matrix: 1/3 on the diagonal, 10/27 on (1,2) and (1,3), 2/9 on (2,3).
ComplexMatrix appendix_d_initial_matrix();

/// Spectrum of the initial matrix with the (2,3) coherence removed:
/// {1/3 - 10 sqrt2 / 27, 1/3, 1/3 + 10 sqrt2 / 27}.
RealVector appendix_d_limit_spectrum();

struct AppendixDSetup {
    DensityMatrix initial;
    HermitianOperator hamiltonian;
    TransitionNetwork network;   // no transitions
    DephasingRates dephasing;    // Gamma_23 = Gamma_32 = gamma
};

/// Pure dephasing between orbitals 2 and 3 with diagonal H0 (zero by default).
AppendixDSetup appendix_d_scenario(double gamma = 1.0,
                                   const RealVector& h0_diagonal = RealVector::Zero(3));

// --- low-density limit ---------------------------------------------------

struct LowDensityFit {
    double slope = 0.0;
    std::vector<double> epsilons;   // points kept in the fit
    std::vector<double> residuals;
    bool degenerate = false;        // fewer than two residuals above the floor
};

inline constexpr double kLowDensityFloor = 1e-14;

/// Least-squares slope of log |RHS_nonlinear(eps sigma) - RHS_markoff(eps sigma)|_max
/// against log eps. sigma must be PSD with unit trace and the epsilons must
/// span at least three decades.
LowDensityFit low_density_slope(const HermitianOperator& h, const TransitionNetwork& net,
                                const DensityMatrix& sigma, const std::vector<double>& epsilons);

}  // namespace qme
