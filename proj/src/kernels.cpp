#include "qme/kernels.hpp"

#include <algorithm>
#include <string>

namespace qme::kernels {

namespace {

void check_shapes(const ComplexMatrix& h, const RealMatrix& w, const ComplexMatrix& rho,
                  const char* what) {
    require_same_dim(h, rho, what);
    if (w.rows() != rho.rows() || w.cols() != rho.cols()) {
        throw DimensionMismatch(std::string(what) + ": rate matrix does not match the state");
    }
}

}  // namespace

ComplexMatrix liouville(const ComplexMatrix& h, const ComplexMatrix& rho) {
    require_same_dim(h, rho, "kernels::liouville");
    const Eigen::Index n = rho.rows();

    // Both operands are hermitian, so rho H = (H rho)^dag and one product suffices.
    // Column blocks of H rho are independent GEMMs, one per thread.
    ComplexMatrix x(n, n);
    const Eigen::Index blocks = (n + kColumnBlock - 1) / kColumnBlock;
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index j0 = b * kColumnBlock;
        const Eigen::Index width = std::min(kColumnBlock, n - j0);
        x.middleCols(j0, width).noalias() = h * rho.middleCols(j0, width);
    }

    ComplexMatrix out(n, n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex c = x(i, j) - std::conj(x(j, i));
            out(i, j) = Complex(c.imag(), -c.real());  // -i c
        }
    }
    return out;
}

ComplexMatrix nonlinear_master(const ComplexMatrix& h, const RealMatrix& w,
                               const ComplexMatrix& rho, Statistics stats) {
    check_shapes(h, w, rho, "kernels::nonlinear_master");
    const Eigen::Index n = rho.rows();
    const double s = occupation_sign(stats);
    const RealVector occ = rho.diagonal().real();

    // loss(n): total outflow coefficient of orbital n, gain(n): inflow into n
    RealVector loss(n);
    RealVector gain(n);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (Eigen::Index k = 0; k < n; ++k) {
        double out_k = 0.0;
        double in_k = 0.0;
        for (Eigen::Index m = 0; m < n; ++m) {
            out_k += w(m, k) * (1.0 + s * occ(m));
            in_k += w(k, m) * occ(m);
        }
        loss(k) = out_k;
        gain(k) = in_k;
    }

    ComplexMatrix out = liouville(h, rho);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = -0.5 * (loss(i) + loss(j)) + 0.5 * s * (gain(i) + gain(j));
            out(i, j) += c * rho(i, j);
        }
        out(j, j) += gain(j);
    }
    return out;
}

ComplexMatrix markoff(const ComplexMatrix& h, const RealMatrix& w, const RealMatrix& gamma,
                      const ComplexMatrix& rho) {
    check_shapes(h, w, rho, "kernels::markoff");
    if (gamma.rows() != rho.rows() || gamma.cols() != rho.cols()) {
        throw DimensionMismatch("kernels::markoff: dephasing matrix does not match the state");
    }
    const Eigen::Index n = rho.rows();
    const RealVector occ = rho.diagonal().real();
    const RealVector outflow = w.colwise().sum().transpose();
    const RealVector gain = w * occ;

    ComplexMatrix out = liouville(h, rho);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = -0.5 * (outflow(i) + outflow(j));
            if (i != j) c -= gamma(j, i);
            out(i, j) += c * rho(i, j);
        }
        out(j, j) += gain(j);
    }
    return out;
}

}  // namespace qme::kernels
