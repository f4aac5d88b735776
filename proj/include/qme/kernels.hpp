#pragma once

// OpenMP element-wise kernels for networks whose orbitals are the
// computational basis vectors. In that basis every relaxation operator is
// diagonal, so each right-hand side reduces to
//
//   out(i,j) = -i[H,rho](i,j) + c(i,j) rho(i,j) + delta(i,j) g(i)
//
// with per-orbital coefficient vectors. The operator-algebra versions in
// dynamics.hpp are the serial reference; tests require agreement to 1e-12.

#include "qme/operators.hpp"

namespace qme::kernels {

/// Rows below this size run single-threaded.
inline constexpr Eigen::Index kParallelThreshold = 32;
/// Columns per GEMM task in the commutator.
inline constexpr Eigen::Index kColumnBlock = 16;

/// -i [H, rho] for hermitian H and rho (the hermitian structure is used, not checked).
ComplexMatrix liouville(const ComplexMatrix& h, const ComplexMatrix& rho);

/// Same as rhs_nonlinear_master on TransitionNetwork::computational(rates).
/// `w(to, from)` is the dense rate matrix.
ComplexMatrix nonlinear_master(const ComplexMatrix& h, const RealMatrix& w,
                               const ComplexMatrix& rho, Statistics stats);

/// Same as rhs_markoff on a computational-basis network with dephasing matrix `gamma`.
ComplexMatrix markoff(const ComplexMatrix& h, const RealMatrix& w, const RealMatrix& gamma,
                      const ComplexMatrix& rho);

}  // namespace qme::kernels
