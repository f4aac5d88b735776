#pragma once
// Random instances shared by the test binaries.

#include <cstdint>
#include <random>

#include "qme/dynamics.hpp"
#include "qme/operators.hpp"

namespace qme::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_);
    }

    ComplexMatrix complex_matrix(std::size_t n) {
        ComplexMatrix m(n, n);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = {uniform(), uniform()};
        return m;
    }
    HermitianOperator hermitian(std::size_t n) { return HermitianOperator(hermitian_part(complex_matrix(n))); }

    /// PSD with eigenvalues in [0, max_eig]; unit trace when max_eig <= 0.
    ComplexMatrix psd(std::size_t n, double max_eig = 1.0) {
        const ComplexMatrix b = complex_matrix(n);
        ComplexMatrix rho = b * b.adjoint();
        if (max_eig <= 0.0) return rho / rho.trace().real();
        return rho * (max_eig / hermitian_eigenvalues(rho).maxCoeff());
    }
    /// Eigenvalues uniform in [0, 1) with a random unitary frame.
    ComplexMatrix fermion_state(std::size_t n) {
        Eigen::HouseholderQR<ComplexMatrix> qr(complex_matrix(n));
        const ComplexMatrix q = qr.householderQ();
        RealVector d(n);
        for (std::size_t i = 0; i < n; ++i) d(i) = uniform(0.0, 1.0);
        return hermitian_part(q * d.cast<Complex>().asDiagonal() * q.adjoint());
    }
    ComplexMatrix unitary(std::size_t n) {
        Eigen::HouseholderQR<ComplexMatrix> qr(complex_matrix(n));
        return qr.householderQ();
    }

    RateMap rates(std::size_t n, double density = 0.7) {
        RateMap r;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (i != k && uniform(0.0, 1.0) < density) r[{i, k}] = uniform(0.0, 2.0);
            }
        }
        return r;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace qme::testing
