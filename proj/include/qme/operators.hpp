#pragma once

// Dense complex-matrix layer shared by every equation in the library.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

#include "qme/errors.hpp"

namespace qme {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTolerance = 1e-10;

enum class Statistics { Fermion, Boson };

/// The sign in the (1 ± n) blocking/enhancement factor: -1 for fermions, +1 for bosons.
/// Every equation reads the sign from here.
constexpr double occupation_sign(Statistics s) noexcept {
    return s == Statistics::Fermion ? -1.0 : 1.0;
}

const char* to_string(Statistics s) noexcept;

/// max_ij |M_ij - conj(M_ji)|
double hermiticity_defect(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);

/// Throws DimensionMismatch unless `m` is square and non-empty,
/// InvariantViolation when an entry is NaN/Inf.
void require_square_finite(const ComplexMatrix& m, const char* what);
void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// (M + M†)/2
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// |v><v|
ComplexMatrix projector(const ComplexVector& v);

/// Square complex matrix validated to be hermitian at construction.
class HermitianOperator {
public:
    explicit HermitianOperator(ComplexMatrix m, double tolerance = kHermitianTolerance);

    static HermitianOperator zero(std::size_t dim);
    static HermitianOperator diagonal(const RealVector& d);

    const ComplexMatrix& matrix() const noexcept { return m_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double tolerance() const noexcept { return tol_; }

private:
    ComplexMatrix m_;
    double tol_;
};

struct Spectrum {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // orthonormal columns
};

Spectrum hermitian_eig(const HermitianOperator& m);

struct PositivityReport {
    double min_eigenvalue = 0.0;
    bool is_psd = true;
};

PositivityReport positivity_report(const HermitianOperator& m);

/// Eigenvalues of the hermitian part of a matrix that may carry small
/// non-hermitian round-off (integrator snapshots).
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

/// One-particle density matrix: the state that every equation evolves.
///
/// The plain constructor does not check positivity; integrated states may
/// legitimately leave the admissible set and that must stay observable.
/// Use `validated` for user-supplied initial data.
class DensityMatrix {
public:
    DensityMatrix(ComplexMatrix rho, Statistics stats);

    static DensityMatrix validated(ComplexMatrix rho, Statistics stats,
                                   double tolerance = kHermitianTolerance);

    const ComplexMatrix& matrix() const noexcept { return rho_; }
    Statistics statistics() const noexcept { return stats_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    double particle_number() const { return rho_.trace().real(); }

    /// Diagonal element <k|rho|k> in the computational basis.
    double occupation(std::size_t k) const { return rho_(k, k).real(); }

private:
    ComplexMatrix rho_;
    Statistics stats_;
};

struct DensityMatrixCheck {
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double trace_imag = 0.0;
    bool ok = true;
    const char* failure = nullptr;
};

/// Evaluates every DensityMatrix invariant without throwing.
DensityMatrixCheck check_density_matrix(const ComplexMatrix& rho, Statistics stats,
                                        double tolerance = kHermitianTolerance);

}  // namespace qme
