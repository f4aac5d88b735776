#include "doctest.h"

#include <cmath>

#include "qme/errors.hpp"
#include "qme/operators.hpp"
#include "test_util.hpp"

using namespace qme;

namespace {

ComplexMatrix real2(double a, double b, double c, double d) {
    ComplexMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("commutator examples") {
    testing::Rng rng(1);
    const ComplexMatrix b = rng.complex_matrix(3);
    CHECK(max_abs(commutator(ComplexMatrix::Identity(3, 3), b)) == 0.0);

    const ComplexMatrix a = real2(1, 0, 0, 2);
    const ComplexMatrix n = real2(0, 1, 0, 0);
    CHECK(max_abs(commutator(a, n) - real2(0, -1, 0, 0)) == 0.0);

    const ComplexMatrix x = rng.complex_matrix(4), y = rng.complex_matrix(4);
    CHECK(max_abs(commutator(x, y) + commutator(y, x)) == 0.0);
    CHECK(max_abs(commutator(x, x)) == 0.0);
}

TEST_CASE("anticommutator examples") {
    testing::Rng rng(2);
    const ComplexMatrix b = rng.complex_matrix(3);
    CHECK(max_abs(anticommutator(ComplexMatrix::Identity(3, 3), b) - 2.0 * b) == 0.0);

    const ComplexMatrix x = rng.complex_matrix(4), y = rng.complex_matrix(4), z = rng.complex_matrix(4);
    CHECK(max_abs(anticommutator(x, y) - anticommutator(y, x)) == 0.0);
    const Complex alpha{0.3, -1.7};
    CHECK(max_abs(anticommutator(x, alpha * y + z) - (alpha * anticommutator(x, y) + anticommutator(x, z))) < 1e-14);

    const ComplexMatrix p00 = real2(1, 0, 0, 0), p01 = real2(0, 1, 0, 0);
    CHECK(max_abs(anticommutator(p00, p01) - p01) == 0.0);
}

TEST_CASE("dimension mismatch is rejected") {
    const ComplexMatrix a = ComplexMatrix::Identity(2, 2), b = ComplexMatrix::Identity(3, 3);
    CHECK_THROWS_AS(commutator(a, b), DimensionMismatch);
    CHECK_THROWS_AS(anticommutator(a, b), DimensionMismatch);
}

TEST_CASE("hermitian operator construction") {
    CHECK_THROWS_AS(HermitianOperator(real2(0, 1, 0, 0)), InvariantViolation);
    CHECK_THROWS_AS(HermitianOperator(ComplexMatrix(2, 3)), DimensionMismatch);
    ComplexMatrix nan = ComplexMatrix::Zero(2, 2);
    nan(0, 0) = std::nan("");
    CHECK_THROWS(HermitianOperator(nan));
    // Tiny anti-hermitian noise within tolerance is accepted.
    ComplexMatrix near = real2(1, 0.5, 0.5, 2);
    near(0, 1) += 1e-12;
    CHECK_NOTHROW(HermitianOperator{near});
}

TEST_CASE("hermitian_eig examples") {
    RealVector d(2);
    d << 0.2, 0.7;
    auto s = hermitian_eig(HermitianOperator::diagonal(d));
    CHECK(s.eigenvalues(0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.eigenvalues(1) == doctest::Approx(0.7).epsilon(1e-15));

    const double a = 10.0 / 27.0;
    s = hermitian_eig(HermitianOperator(real2(1.0 / 3, a, a, 1.0 / 3)));
    CHECK(std::abs(s.eigenvalues(0) - (1.0 / 3 - a)) < 1e-15);
    CHECK(std::abs(s.eigenvalues(1) - (1.0 / 3 + a)) < 1e-15);

    // Arrowhead matrix: 1/3 diagonal with only the first row/column coupled.
    ComplexMatrix arrow = ComplexMatrix::Zero(3, 3);
    arrow.diagonal().setConstant(1.0 / 3);
    arrow(0, 1) = arrow(1, 0) = arrow(0, 2) = arrow(2, 0) = a;
    s = hermitian_eig(HermitianOperator(arrow));
    const double r = 10.0 * std::sqrt(2.0) / 27.0;
    CHECK(std::abs(s.eigenvalues(0) - (1.0 / 3 - r)) < 1e-14);
    CHECK(std::abs(s.eigenvalues(1) - 1.0 / 3) < 1e-14);
    CHECK(std::abs(s.eigenvalues(2) - (1.0 / 3 + r)) < 1e-14);
}

TEST_CASE("hermitian_eig reconstruction property") {
    testing::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = rng.index(1, 10);
        const auto m = rng.hermitian(n);
        const auto s = hermitian_eig(m);
        const ComplexMatrix& v = s.eigenvectors;
        const double rec = max_abs(v * s.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint() - m.matrix());
        const double orth = max_abs(v.adjoint() * v - ComplexMatrix::Identity(n, n));
        CHECK(rec <= 1e-10 * static_cast<double>(n));
        CHECK(orth <= 1e-10 * static_cast<double>(n));
        for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i) CHECK(s.eigenvalues(i - 1) <= s.eigenvalues(i));

        const auto report = positivity_report(m);
        CHECK(report.min_eigenvalue == s.eigenvalues(0));
        CHECK(report.is_psd == (s.eigenvalues(0) >= -kHermitianTolerance));
    }
}

TEST_CASE("positivity_report examples") {
    auto r = positivity_report(HermitianOperator::zero(3));
    CHECK(r.min_eigenvalue == 0.0);
    CHECK(r.is_psd);

    RealVector d(2);
    d << 1.0, -0.5;
    r = positivity_report(HermitianOperator::diagonal(d));
    CHECK(r.min_eigenvalue == doctest::Approx(-0.5));
    CHECK_FALSE(r.is_psd);
}

TEST_CASE("density matrix invariants") {
    testing::Rng rng(4);
    const ComplexMatrix good = rng.fermion_state(4);
    CHECK(check_density_matrix(good, Statistics::Fermion).ok);
    CHECK_NOTHROW(DensityMatrix::validated(good, Statistics::Fermion));

    RealVector d(2);
    d << 1.2, 0.1;
    const ComplexMatrix above = d.cast<Complex>().asDiagonal();
    CHECK_FALSE(check_density_matrix(above, Statistics::Fermion).ok);
    CHECK(check_density_matrix(above, Statistics::Boson).ok);
    CHECK_THROWS_AS(DensityMatrix::validated(above, Statistics::Fermion), InvariantViolation);

    d << 0.5, -0.1;
    const ComplexMatrix negative = d.cast<Complex>().asDiagonal();
    CHECK_THROWS_AS(DensityMatrix::validated(negative, Statistics::Boson), InvariantViolation);

    ComplexMatrix inf = good;
    inf(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(check_density_matrix(inf, Statistics::Fermion).ok);
    CHECK_THROWS(DensityMatrix::validated(inf, Statistics::Fermion));

    const DensityMatrix rho(good, Statistics::Fermion);
    CHECK(rho.particle_number() == doctest::Approx(good.trace().real()));
    CHECK(rho.occupation(2) == good(2, 2).real());
}

TEST_CASE("occupation sign") {
    CHECK(occupation_sign(Statistics::Fermion) == -1.0);
    CHECK(occupation_sign(Statistics::Boson) == 1.0);
}
