// Serial operator-algebra reference vs OpenMP element-wise kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "qme/dynamics.hpp"
#include "qme/integrator.hpp"
#include "qme/kernels.hpp"

namespace {

struct Problem {
    qme::HermitianOperator h;
    qme::TransitionNetwork net;
    qme::ComplexMatrix rho;
};

Problem make_problem(std::size_t n) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> r(0.0, 1.0);
    qme::ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {u(rng), u(rng)};
    qme::RateMap rates;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (i != k) rates[{i, k}] = r(rng);
        }
    }
    qme::ComplexMatrix b(n, n);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = {u(rng), u(rng)};
    qme::ComplexMatrix rho = b * b.adjoint();
    rho /= 2.0 * qme::hermitian_eigenvalues(rho).maxCoeff();
    return {qme::HermitianOperator(qme::hermitian_part(a)),
            qme::TransitionNetwork::computational(n, rates), rho};
}

void BM_NonlinearMasterReference(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
    const qme::DensityMatrix rho(p.rho, qme::Statistics::Fermion);
    for (auto _ : state) benchmark::DoNotOptimize(qme::rhs_nonlinear_master(p.h, p.net, rho));
}

void BM_NonlinearMasterKernel(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
    const qme::RealMatrix w = p.net.rate_matrix();
    for (auto _ : state) {
        benchmark::DoNotOptimize(qme::kernels::nonlinear_master(p.h.matrix(), w, p.rho, qme::Statistics::Fermion));
    }
}

void BM_MarkoffReference(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
    const auto none = qme::DephasingRates::none(p.net.dim());
    for (auto _ : state) benchmark::DoNotOptimize(qme::rhs_markoff(p.h, p.net, none, p.rho));
}

void BM_MarkoffKernel(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)));
    const qme::RealMatrix w = p.net.rate_matrix();
    const qme::RealMatrix g = qme::RealMatrix::Zero(w.rows(), w.cols());
    for (auto _ : state) benchmark::DoNotOptimize(qme::kernels::markoff(p.h.matrix(), w, g, p.rho));
}

void BM_Ensemble(benchmark::State& state, bool parallel) {
    const auto p = make_problem(8);
    std::vector<qme::EvolutionSpec> specs;
    std::vector<qme::DensityMatrix> initials;
    for (int i = 0; i < 16; ++i) {
        qme::EvolutionSpec spec;
        spec.rhs = qme::make_nonlinear_master_rhs(p.h, qme::constant_network(p.net), qme::Statistics::Fermion);
        spec.t1 = 0.5;
        spec.dt = 1e-2;
        spec.record_every = 50;
        specs.push_back(spec);
        initials.emplace_back(p.rho, qme::Statistics::Fermion);
    }
    for (auto _ : state) benchmark::DoNotOptimize(qme::evolve_ensemble(specs, initials, parallel));
}

}  // namespace

BENCHMARK(BM_NonlinearMasterReference)->RangeMultiplier(2)->Range(8, 128);
BENCHMARK(BM_NonlinearMasterKernel)->RangeMultiplier(2)->Range(8, 128);
BENCHMARK(BM_MarkoffReference)->RangeMultiplier(2)->Range(8, 128);
BENCHMARK(BM_MarkoffKernel)->RangeMultiplier(2)->Range(8, 128);
BENCHMARK_CAPTURE(BM_Ensemble, serial, false);
BENCHMARK_CAPTURE(BM_Ensemble, openmp, true);

BENCHMARK_MAIN();
