#include "doctest.h"

#include <cmath>

#include "qme/errors.hpp"
#include "qme/fock_oracle.hpp"
#include "qme/integrator.hpp"
#include "test_util.hpp"

using namespace qme;

namespace {

FockModel fermions(std::size_t modes, RateMap rates = {}) {
    FockModel m;
    m.modes = modes;
    m.statistics = Statistics::Fermion;
    m.energies.assign(modes, 0.0);
    m.rates = std::move(rates);
    return m;
}

FockModel bosons(std::size_t modes, std::size_t cutoff, RateMap rates = {}) {
    FockModel m = fermions(modes, std::move(rates));
    m.statistics = Statistics::Boson;
    m.boson_cutoff = cutoff;
    return m;
}

/// Random product distribution per mode; for bosons the top (cutoff) level is left empty.
std::vector<std::vector<double>> random_distributions(testing::Rng& rng, const FockModel& m) {
    std::vector<std::vector<double>> out;
    const std::size_t levels = m.levels_per_mode();
    const std::size_t used = m.statistics == Statistics::Boson ? levels - 1 : levels;
    for (std::size_t k = 0; k < m.modes; ++k) {
        std::vector<double> p(levels, 0.0);
        double total = 0.0;
        for (std::size_t l = 0; l < used; ++l) total += (p[l] = rng.uniform(0.0, 1.0));
        for (auto& x : p) x /= total;
        out.push_back(p);
    }
    return out;
}

}  // namespace

TEST_CASE("single fermion mode") {
    const auto c = build_mode_operators(fermions(1));
    REQUIRE(c.size() == 1);
    ComplexMatrix expected(2, 2);
    expected << 0, 1, 0, 0;
    CHECK(max_abs(c[0] - expected) == 0.0);
    CHECK(max_abs(anticommutator(c[0], c[0].adjoint()) - ComplexMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("fermion anticommutation relations") {
    for (std::size_t modes = 1; modes <= 4; ++modes) {
        const auto model = fermions(modes);
        const auto c = build_mode_operators(model);
        CHECK(canonical_relation_defect(model, c) <= 1e-12);
        if (modes >= 2) CHECK(max_abs(anticommutator(c[0], c[1])) == 0.0);
    }
}

TEST_CASE("boson ladder operators") {
    const auto model = bosons(1, 3);
    const auto c = build_mode_operators(model);
    RealVector n(4);
    n << 0, 1, 2, 3;
    CHECK(max_abs(c[0].adjoint() * c[0] - ComplexMatrix(n.cast<Complex>().asDiagonal())) < 1e-14);
    CHECK(canonical_relation_defect(bosons(2, 4), build_mode_operators(bosons(2, 4))) <= 1e-12);
    CHECK(canonical_relation_defect(bosons(3, 2), build_mode_operators(bosons(3, 2))) <= 1e-12);
}

TEST_CASE("basis ordering") {
    const FockOracle f(fermions(2));
    CHECK(f.index_of({1, 0}) == 2);
    CHECK(f.index_of({0, 1}) == 1);
    CHECK(f.occupations(3) == std::vector<std::size_t>{1, 1});
    const FockOracle b(bosons(2, 4));
    CHECK(b.index_of({1, 0}) == 1);
    CHECK(b.index_of({0, 1}) == 5);
    CHECK(b.occupations(7) == std::vector<std::size_t>{2, 1});
    for (std::size_t i = 0; i < b.dim(); ++i) CHECK(b.index_of(b.occupations(i)) == i);
}

TEST_CASE("resource limits") {
    CHECK_THROWS_AS(build_mode_operators(fermions(5)), ResourceLimit);
    CHECK_THROWS_AS(FockOracle(bosons(4, 10)), ResourceLimit);
    CHECK_NOTHROW(bosons(4, 9).validate());  // exactly at the dimension limit
    CHECK_NOTHROW(FockOracle(bosons(4, 3)));
    FockModel bad = fermions(2);
    bad.energies = {0.0};
    CHECK_THROWS_AS(FockOracle{bad}, DimensionMismatch);
    CHECK_THROWS(FockOracle(fermions(2, {{{1, 0}, -1.0}})));
}

TEST_CASE("exact master equation") {
    testing::Rng rng(50);
    FockModel model = fermions(2);
    model.energies = {0.3, -0.7};
    const FockOracle liouville(model);
    const ComplexMatrix rho = rng.psd(4, 0.0);
    const ComplexMatrix h = liouville.hamiltonian();
    const ComplexMatrix expected = Complex(0, -1) * (h * rho - rho * h);
    CHECK(max_abs(liouville.rhs(rho) - expected) < 1e-15);

    const FockOracle jump(fermions(2, {{{1, 0}, 1.0}}));
    const ComplexMatrix start = jump.basis_state({1, 0});
    const ComplexMatrix d = jump.rhs(start);
    const ComplexMatrix n2 = jump.annihilators()[1].adjoint() * jump.annihilators()[1];
    CHECK(std::abs((n2 * d).trace().real() - 1.0) < 1e-15);

    for (int trial = 0; trial < 20; ++trial) {
        FockModel m = trial % 2 ? fermions(3, rng.rates(3)) : bosons(2, 3, rng.rates(2));
        for (auto& e : m.energies) e = rng.uniform();
        const FockOracle o(m);
        const ComplexMatrix r = o.rhs(rng.psd(o.dim(), 0.0));
        CHECK(std::abs(r.trace()) <= 1e-12);
        CHECK(hermiticity_defect(r) <= 1e-12);
    }

    CHECK_THROWS_AS(jump.rhs(ComplexMatrix::Zero(3, 3)), DimensionMismatch);
    CHECK_THROWS_AS(rhs_fock_lindblad(model, ManyBodyState::validated(ComplexMatrix::Identity(2, 2) / 2.0)), DimensionMismatch);
}

TEST_CASE("one-particle reduction") {
    const auto model = fermions(2);
    const FockOracle f(model);
    ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    CHECK(max_abs(f.one_particle(f.basis_state({1, 0})) - expected) == 0.0);
    CHECK(max_abs(f.one_particle(f.basis_state({0, 0}))) == 0.0);

    ComplexVector bell = ComplexVector::Zero(4);
    bell(f.index_of({1, 0})) = bell(f.index_of({0, 1})) = 1.0 / std::sqrt(2.0);
    const auto reduced = reduce_one_particle(model, ManyBodyState::validated(projector(bell)));
    CHECK(max_abs(reduced.matrix() - ComplexMatrix::Constant(2, 2, 0.5)) < 1e-15);

    testing::Rng rng(51);
    const FockOracle b(bosons(2, 3));
    const ComplexMatrix rho = rng.psd(b.dim(), 0.0);
    CHECK(std::abs(b.one_particle(rho).trace() - (b.number_operator() * rho).trace()) < 1e-13);
    CHECK(hermiticity_defect(b.one_particle(rho)) < 1e-15);
}

TEST_CASE("many-body state validation") {
    CHECK_THROWS_AS(ManyBodyState::validated(ComplexMatrix::Identity(2, 2)), InvariantViolation);
    RealVector d(2);
    d << 1.2, -0.2;
    CHECK_THROWS_AS(ManyBodyState::validated(d.cast<Complex>().asDiagonal()), InvariantViolation);
}

TEST_CASE("closure examples") {
    const auto model = fermions(2, {{{1, 0}, 1.0}});
    const FockOracle f(model);
    auto report = closure_residual_at_t0(f, f.basis_state({1, 0}));
    CHECK(report.residual <= 1e-10);
    CHECK(report.product_state);
    CHECK(report.exact_rates(1) == doctest::Approx(1.0));

    testing::Rng rng(52);
    const FockOracle busy(fermions(3, rng.rates(3)));
    report = closure_residual_at_t0(busy, busy.basis_state({0, 0, 0}));
    CHECK(report.residual == 0.0);

    // Correlated state: one particle shared by two modes. The closure
    // multiplies marginals, the exact rate sees the correlation.
    ComplexVector bell = ComplexVector::Zero(4);
    bell(f.index_of({1, 0})) = bell(f.index_of({0, 1})) = 1.0 / std::sqrt(2.0);
    report = closure_residual_at_t0(f, projector(bell));
    CHECK_FALSE(report.product_state);
    CHECK(report.residual == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("closure is exact on random product states") {
    testing::Rng rng(53);
    for (int trial = 0; trial < 60; ++trial) {
        FockModel m;
        switch (trial % 3) {
            case 0: m = fermions(2, rng.rates(2, 1.0)); break;
            case 1: m = fermions(3, rng.rates(3)); break;
            default: m = bosons(2, 4, rng.rates(2, 1.0)); break;
        }
        for (auto& e : m.energies) e = rng.uniform();
        const FockOracle o(m);
        const ComplexMatrix rho = o.product_state(random_distributions(rng, m));
        REQUIRE(o.is_product_state(rho));
        const auto report = closure_residual_at_t0(o, rho);
        CHECK(report.residual <= 1e-10);
        CHECK_FALSE(report.cutoff_contaminated);
    }
}

TEST_CASE("cutoff contamination flag") {
    const auto model = bosons(2, 2, {{{1, 0}, 1.0}});
    const FockOracle o(model);
    const ComplexMatrix rho = o.product_state({{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}});
    CHECK(o.top_level_population(rho) == doctest::Approx(1.0));
    CHECK(closure_residual_at_t0(o, rho).cutoff_contaminated);
    CHECK(o.top_level_population(o.basis_state({1, 1})) == 0.0);
}

TEST_CASE("exact evolution keeps positivity, trace and particle number sectors") {
    testing::Rng rng(54);
    FockModel m = fermions(2, {{{1, 0}, 1.0}, {{0, 1}, 0.4}});
    m.energies = {0.2, -0.5};
    const FockOracle o(m);
    // Block diagonal in particle number, otherwise random.
    ComplexMatrix rho = rng.psd(o.dim(), 0.0);
    for (std::size_t i = 0; i < o.dim(); ++i) {
        for (std::size_t j = 0; j < o.dim(); ++j) {
            std::size_t ni = 0, nj = 0;
            for (auto x : o.occupations(i)) ni += x;
            for (auto x : o.occupations(j)) nj += x;
            if (ni != nj) rho(i, j) = 0.0;
        }
    }
    rho /= rho.trace().real();
    EvolutionSpec spec;
    spec.rhs = [&o](double, const ComplexMatrix& r) { return o.rhs(r); };
    spec.t1 = 10.0;
    spec.dt = 1e-3;
    spec.record_every = 500;
    const auto traj = evolve(spec, DensityMatrix(rho, Statistics::Boson));
    CHECK(traj.steps == 10000);
    const ComplexMatrix& n = o.number_operator();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const ComplexMatrix& r = traj.states[i].matrix();
        CHECK(std::abs(traj.diagnostics[i].trace - 1.0) <= 1e-9);
        CHECK(traj.diagnostics[i].min_eigenvalue >= -1e-9);
        CHECK(max_abs(n * r - r * n) <= 1e-10);
    }
}
