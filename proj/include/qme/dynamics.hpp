#pragma once

// Right-hand sides of the one-particle evolution equations.
//
// Conventions: rho is the one-particle density matrix, H the hermitian
// Liouville-flow operator, hbar = 1. A_p ("particle_loss") drains particles,
// A_pbar ("hole_loss") drains holes, i.e. feeds particles. The blocking /
// enhancement sign comes from occupation_sign(): (1 - n) for fermions,
// (1 + n) for bosons.
//
// These are the operator-algebra reference implementations. The OpenMP
// element-wise kernels in kernels.hpp are tested against them.

#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "qme/operators.hpp"

namespace qme {

/// Directed transition rates keyed by (to, from): w_{to,from} is the rate of
/// the jump from -> to. (a,b) and (b,a) are independent entries.
using RateMap = std::map<std::pair<std::size_t, std::size_t>, double>;

class TransitionNetwork {
public:
    /// `basis` columns are the orthonormal orbitals |n>.
    TransitionNetwork(ComplexMatrix basis, RateMap rates);

    static TransitionNetwork computational(std::size_t dim, RateMap rates);
    static TransitionNetwork empty(std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
    const ComplexMatrix& basis() const noexcept { return basis_; }
    const RateMap& rates() const noexcept { return rates_; }
    bool is_computational() const noexcept { return computational_; }

    /// Dense W with W(to, from) = w_{to,from}, zero diagonal.
    RealMatrix rate_matrix() const;

    /// <n|rho|n> for every orbital of the network.
    RealVector occupations(const ComplexMatrix& rho) const;

private:
    ComplexMatrix basis_;
    RateMap rates_;
    bool computational_ = false;
};

/// Rates evaluated at an integrator stage time.
using NetworkProvider = std::function<TransitionNetwork(double t)>;
NetworkProvider constant_network(TransitionNetwork net);

/// Arbitrary jump operators W_l, all the same dimension as the state.
class JumpOperatorSet {
public:
    JumpOperatorSet(std::size_t dim, std::vector<ComplexMatrix> ops);

    /// W_l = sqrt(w_{n'n}) |n><n'| for every network entry (n', n).
    static JumpOperatorSet from_network(const TransitionNetwork& net);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<ComplexMatrix>& operators() const noexcept { return ops_; }
    std::size_t size() const noexcept { return ops_.size(); }

private:
    std::size_t dim_;
    std::vector<ComplexMatrix> ops_;
};

/// Pure-dephasing rates Gamma_{n'n} = Gamma_{nn'} >= 0 on distinct orbital pairs.
/// A key given in only one orientation is mirrored; conflicting orientations are rejected.
class DephasingRates {
public:
    DephasingRates(std::size_t dim, const RateMap& gamma);

    static DephasingRates none(std::size_t dim) { return DephasingRates(dim, {}); }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(gamma_.rows()); }
    const RealMatrix& matrix() const noexcept { return gamma_; }
    bool is_zero() const noexcept { return gamma_.isZero(0.0); }

private:
    RealMatrix gamma_;
};

struct RelaxationOperators {
    HermitianOperator particle_loss;  // A_p
    HermitianOperator hole_loss;      // A_pbar
};

/// -i [H, rho]
ComplexMatrix liouville_term(const HermitianOperator& h, const ComplexMatrix& rho);

/// Liouville flow plus a single nonhermitian part: (1/i)[H,rho] + {rho, A}.
ComplexMatrix rhs_meanfield_nonhermitian(const HermitianOperator& h, const HermitianOperator& a,
                                         const DensityMatrix& rho);

/// (1/i)[H,rho] + {rho, A_p} - {I -+ rho, A_pbar}; sign from rho.statistics().
ComplexMatrix rhs_general(const HermitianOperator& h, const HermitianOperator& a_p,
                          const HermitianOperator& a_pbar, const DensityMatrix& rho);

/// I - rho. Fermions only.
DensityMatrix hole_transform(const DensityMatrix& rho);

/// Fermion equation written for the hole matrix rho_bar = I - rho:
/// (1/i)[H,rho_bar] + {rho_bar, A_pbar} - {I - rho_bar, A_p}.
ComplexMatrix rhs_hole_form(const HermitianOperator& h, const HermitianOperator& a_p,
                            const HermitianOperator& a_pbar, const DensityMatrix& rho_bar);

/// Summed per-transition operators
///   A_pbar = -1/2 sum w_{n'n} <n|rho|n> |n'><n'|
///   A_p    = -1/2 sum w_{n'n} (1 +- <n'|rho|n'>) |n><n|
RelaxationOperators build_relaxation_operators(const TransitionNetwork& net,
                                               const DensityMatrix& rho);

/// A_p = -1/2 sum W (I +- rho) W^dag, A_pbar = -1/2 sum W^dag rho W.
RelaxationOperators relaxation_operators_from_jumps(const JumpOperatorSet& jumps,
                                                    const DensityMatrix& rho);

/// Nonlinear master equation: rhs_general with network-built relaxation operators.
ComplexMatrix rhs_nonlinear_master(const HermitianOperator& h, const TransitionNetwork& net,
                                   const DensityMatrix& rho);

/// Nonlinear equation with arbitrary jump operators.
ComplexMatrix rhs_generalized(const HermitianOperator& h, const JumpOperatorSet& jumps,
                              const DensityMatrix& rho);

/// Linear Markoff equation with optional pure dephasing (network basis).
ComplexMatrix rhs_markoff(const HermitianOperator& h, const TransitionNetwork& net,
                          const DephasingRates& dephasing, const ComplexMatrix& rho);

/// (1/i)[H,rho] - 1/2 sum {rho, W W^dag} + sum W^dag rho W.
ComplexMatrix rhs_lindblad(const HermitianOperator& h, const JumpOperatorSet& jumps,
                           const ComplexMatrix& rho);

/// Occupation-number master equation
///   df_p/dt = sum_q w(p,q) (1 +- f_p) f_q - sum_q w(q,p) (1 +- f_q) f_p
/// with w(to, from). Rejects negative rates and occupations outside
/// [0, 1] (fermions) or [0, inf) (bosons), up to `tolerance`.
RealVector rhs_quasiclassical(const RealVector& f, const RealMatrix& w, Statistics stats,
                              double tolerance = kHermitianTolerance);

/// A' = A_p + A_pbar for fermions, A_p - A_pbar for bosons.
HermitianOperator rewrite_A_prime(const HermitianOperator& a_p, const HermitianOperator& a_pbar,
                                  Statistics stats);

/// (1/i)[H,rho] + {rho, A'} - 2 A_pbar, equal to rhs_general when A' comes from rewrite_A_prime.
ComplexMatrix rhs_rewritten(const HermitianOperator& h, const HermitianOperator& a_prime,
                            const HermitianOperator& a_pbar, const ComplexMatrix& rho);

}  // namespace qme
