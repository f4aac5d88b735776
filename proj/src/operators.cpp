#include "qme/operators.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace qme {

const char* to_string(Statistics s) noexcept {
    return s == Statistics::Fermion ? "fermion" : "boson";
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("hermiticity_defect: matrix is not square");
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const Complex z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

void require_square_finite(const ComplexMatrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        std::ostringstream os;
        os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw DimensionMismatch(os.str());
    }
    if (!all_finite(m)) {
        throw InvariantViolation(std::string(what) + ": matrix has NaN/Inf entries");
    }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs "
           << b.rows() << "x" << b.cols() << ")";
        throw DimensionMismatch(os.str());
    }
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    return 0.5 * (m + m.adjoint());
}

ComplexMatrix projector(const ComplexVector& v) {
    return v * v.adjoint();
}

HermitianOperator::HermitianOperator(ComplexMatrix m, double tolerance)
    : m_(std::move(m)), tol_(tolerance) {
    require_square_finite(m_, "HermitianOperator");
    const double defect = hermiticity_defect(m_);
    if (defect > tol_) {
        std::ostringstream os;
        os << "HermitianOperator: hermiticity defect " << defect << " exceeds tolerance " << tol_;
        throw InvariantViolation(os.str());
    }
}

HermitianOperator HermitianOperator::zero(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return HermitianOperator(ComplexMatrix::Zero(n, n));
}

HermitianOperator HermitianOperator::diagonal(const RealVector& d) {
    return HermitianOperator(d.cast<Complex>().asDiagonal().toDenseMatrix());
}

Spectrum hermitian_eig(const HermitianOperator& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) {
        throw InvariantViolation("hermitian_eig: eigensolver did not converge");
    }
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

PositivityReport positivity_report(const HermitianOperator& m) {
    const double lo = hermitian_eig(m).eigenvalues(0);
    return PositivityReport{lo, lo >= -m.tolerance()};
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

DensityMatrix::DensityMatrix(ComplexMatrix rho, Statistics stats)
    : rho_(std::move(rho)), stats_(stats) {
    if (rho_.rows() != rho_.cols()) {
        throw DimensionMismatch("DensityMatrix: matrix is not square");
    }
}

DensityMatrixCheck check_density_matrix(const ComplexMatrix& rho, Statistics stats,
                                        double tolerance) {
    DensityMatrixCheck c;
    if (!all_finite(rho)) {
        c.ok = false;
        c.failure = "entries must be finite";
        return c;
    }
    c.hermiticity_defect = hermiticity_defect(rho);
    c.trace_imag = std::abs(rho.trace().imag());
    const RealVector ev = hermitian_eigenvalues(rho);
    c.min_eigenvalue = ev(0);
    c.max_eigenvalue = ev(ev.size() - 1);
    if (c.hermiticity_defect > tolerance) {
        c.ok = false;
        c.failure = "matrix must be hermitian";
    } else if (c.min_eigenvalue < -tolerance) {
        c.ok = false;
        c.failure = "matrix must be positive semidefinite";
    } else if (stats == Statistics::Fermion && c.max_eigenvalue > 1.0 + tolerance) {
        c.ok = false;
        c.failure = "fermion occupations must not exceed 1";
    } else if (c.trace_imag > tolerance || rho.trace().real() < -tolerance) {
        c.ok = false;
        c.failure = "trace must be real and nonnegative";
    }
    return c;
}

DensityMatrix DensityMatrix::validated(ComplexMatrix rho, Statistics stats, double tolerance) {
    require_square_finite(rho, "DensityMatrix");
    const auto c = check_density_matrix(rho, stats, tolerance);
    if (!c.ok) {
        std::ostringstream os;
        os << "DensityMatrix: " << c.failure << " (min eigenvalue " << c.min_eigenvalue
           << ", max eigenvalue " << c.max_eigenvalue << ", hermiticity defect "
           << c.hermiticity_defect << ")";
        throw InvariantViolation(os.str());
    }
    return DensityMatrix(std::move(rho), stats);
}

}  // namespace qme
