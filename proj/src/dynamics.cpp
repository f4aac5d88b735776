#include "qme/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace qme {

namespace {

constexpr double kGramTolerance = 1e-10;

std::string pair_name(const char* field, std::size_t to, std::size_t from) {
    std::ostringstream os;
    os << field << "[(" << to + 1 << "," << from + 1 << ")]";
    return os.str();
}

void require_dim(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << expected << " vs " << got << ")";
        throw DimensionMismatch(os.str());
    }
}

void validate_rate_map(const RateMap& rates, std::size_t dim, const char* field) {
    for (const auto& [key, w] : rates) {
        const auto [to, from] = key;
        if (to >= dim || from >= dim) {
            throw DimensionMismatch(pair_name(field, to, from) + ": orbital index out of range");
        }
        if (to == from) {
            throw InvariantViolation(pair_name(field, to, from) + ": self-transition not allowed");
        }
        if (!std::isfinite(w) || w < 0.0) {
            std::ostringstream os;
            os << pair_name(field, to, from) << ": rate must be a finite nonnegative number, got " << w;
            throw InvariantViolation(os.str());
        }
    }
}

ComplexMatrix identity_like(const ComplexMatrix& m) {
    return ComplexMatrix::Identity(m.rows(), m.cols());
}

// U diag(c) U^dag with U the network basis.
ComplexMatrix basis_diagonal(const TransitionNetwork& net, const RealVector& c) {
    if (net.is_computational()) {
        return c.cast<Complex>().asDiagonal().toDenseMatrix();
    }
    const ComplexMatrix& u = net.basis();
    return u * c.cast<Complex>().asDiagonal() * u.adjoint();
}

}  // namespace

TransitionNetwork::TransitionNetwork(ComplexMatrix basis, RateMap rates)
    : basis_(std::move(basis)), rates_(std::move(rates)) {
    require_square_finite(basis_, "TransitionNetwork basis");
    validate_rate_map(rates_, dim(), "rates");
    const ComplexMatrix gram = basis_.adjoint() * basis_;
    if (max_abs(gram - identity_like(gram)) > kGramTolerance) {
        throw InvariantViolation("TransitionNetwork: basis kets are not orthonormal");
    }
    computational_ = basis_.isIdentity(0.0);
}

TransitionNetwork TransitionNetwork::computational(std::size_t dim, RateMap rates) {
    const auto n = static_cast<Eigen::Index>(dim);
    return TransitionNetwork(ComplexMatrix::Identity(n, n), std::move(rates));
}

TransitionNetwork TransitionNetwork::empty(std::size_t dim) {
    return computational(dim, {});
}

RealMatrix TransitionNetwork::rate_matrix() const {
    const auto n = static_cast<Eigen::Index>(dim());
    RealMatrix w = RealMatrix::Zero(n, n);
    for (const auto& [key, rate] : rates_) {
        w(static_cast<Eigen::Index>(key.first), static_cast<Eigen::Index>(key.second)) = rate;
    }
    return w;
}

RealVector TransitionNetwork::occupations(const ComplexMatrix& rho) const {
    require_same_dim(basis_, rho, "TransitionNetwork::occupations");
    if (computational_) return rho.diagonal().real();
    return (basis_.adjoint() * rho * basis_).diagonal().real();
}

NetworkProvider constant_network(TransitionNetwork net) {
    return [net = std::move(net)](double) { return net; };
}

JumpOperatorSet::JumpOperatorSet(std::size_t dim, std::vector<ComplexMatrix> ops)
    : dim_(dim), ops_(std::move(ops)) {
    for (const auto& w : ops_) {
        if (static_cast<std::size_t>(w.rows()) != dim_ || static_cast<std::size_t>(w.cols()) != dim_) {
            std::ostringstream os;
            os << "JumpOperatorSet: operator is " << w.rows() << "x" << w.cols()
               << ", state dimension is " << dim_;
            throw DimensionMismatch(os.str());
        }
        if (!all_finite(w)) throw InvariantViolation("JumpOperatorSet: NaN/Inf entry");
    }
}

JumpOperatorSet JumpOperatorSet::from_network(const TransitionNetwork& net) {
    std::vector<ComplexMatrix> ops;
    ops.reserve(net.rates().size());
    const ComplexMatrix& u = net.basis();
    for (const auto& [key, w] : net.rates()) {
        const auto to = static_cast<Eigen::Index>(key.first);
        const auto from = static_cast<Eigen::Index>(key.second);
        // |n><n'| with n = from, n' = to
        ops.push_back(std::sqrt(w) * u.col(from) * u.col(to).adjoint());
    }
    return JumpOperatorSet(net.dim(), std::move(ops));
}

DephasingRates::DephasingRates(std::size_t dim, const RateMap& gamma) {
    const auto n = static_cast<Eigen::Index>(dim);
    gamma_ = RealMatrix::Zero(n, n);
    validate_rate_map(gamma, dim, "dephasing");
    for (const auto& [key, g] : gamma) {
        const auto a = static_cast<Eigen::Index>(key.first);
        const auto b = static_cast<Eigen::Index>(key.second);
        auto mirror = gamma.find({key.second, key.first});
        if (mirror != gamma.end() && mirror->second != g) {
            throw InvariantViolation(pair_name("dephasing", key.first, key.second) +
                                     ": Gamma must be symmetric");
        }
        gamma_(a, b) = g;
        gamma_(b, a) = g;
    }
}

ComplexMatrix liouville_term(const HermitianOperator& h, const ComplexMatrix& rho) {
    return Complex(0.0, -1.0) * commutator(h.matrix(), rho);
}

ComplexMatrix rhs_meanfield_nonhermitian(const HermitianOperator& h, const HermitianOperator& a,
                                         const DensityMatrix& rho) {
    const ComplexMatrix& r = rho.matrix();
    return liouville_term(h, r) + anticommutator(r, a.matrix());
}

ComplexMatrix rhs_general(const HermitianOperator& h, const HermitianOperator& a_p,
                          const HermitianOperator& a_pbar, const DensityMatrix& rho) {
    const ComplexMatrix& r = rho.matrix();
    const double s = occupation_sign(rho.statistics());
    const ComplexMatrix blocked = identity_like(r) + s * r;
    return liouville_term(h, r) + anticommutator(r, a_p.matrix()) -
           anticommutator(blocked, a_pbar.matrix());
}

DensityMatrix hole_transform(const DensityMatrix& rho) {
    if (rho.statistics() != Statistics::Fermion) {
        throw InvariantViolation("hole_transform: the hole picture is defined for fermions only");
    }
    return DensityMatrix(identity_like(rho.matrix()) - rho.matrix(), Statistics::Fermion);
}

ComplexMatrix rhs_hole_form(const HermitianOperator& h, const HermitianOperator& a_p,
                            const HermitianOperator& a_pbar, const DensityMatrix& rho_bar) {
    if (rho_bar.statistics() != Statistics::Fermion) {
        throw InvariantViolation("rhs_hole_form: the hole picture is defined for fermions only");
    }
    const ComplexMatrix& r = rho_bar.matrix();
    return liouville_term(h, r) + anticommutator(r, a_pbar.matrix()) -
           anticommutator(identity_like(r) - r, a_p.matrix());
}

RelaxationOperators build_relaxation_operators(const TransitionNetwork& net,
                                               const DensityMatrix& rho) {
    require_dim(net.dim(), rho.dim(), "build_relaxation_operators");
    const double s = occupation_sign(rho.statistics());
    const RealVector occ = net.occupations(rho.matrix());
    const auto n = static_cast<Eigen::Index>(net.dim());

    RealVector loss = RealVector::Zero(n);  // coefficient of |n><n| in -2 A_p
    RealVector gain = RealVector::Zero(n);  // coefficient of |n'><n'| in -2 A_pbar
    for (const auto& [key, w] : net.rates()) {
        const auto to = static_cast<Eigen::Index>(key.first);
        const auto from = static_cast<Eigen::Index>(key.second);
        loss(from) += w * (1.0 + s * occ(to));
        gain(to) += w * occ(from);
    }
    return RelaxationOperators{
        HermitianOperator(basis_diagonal(net, -0.5 * loss)),
        HermitianOperator(basis_diagonal(net, -0.5 * gain)),
    };
}

RelaxationOperators relaxation_operators_from_jumps(const JumpOperatorSet& jumps,
                                                    const DensityMatrix& rho) {
    require_dim(jumps.dim(), rho.dim(), "relaxation_operators_from_jumps");
    const ComplexMatrix& r = rho.matrix();
    const double s = occupation_sign(rho.statistics());
    const ComplexMatrix blocked = identity_like(r) + s * r;
    ComplexMatrix a_p = ComplexMatrix::Zero(r.rows(), r.cols());
    ComplexMatrix a_pbar = a_p;
    for (const auto& w : jumps.operators()) {
        a_p -= 0.5 * w * blocked * w.adjoint();
        a_pbar -= 0.5 * w.adjoint() * r * w;
    }
    return RelaxationOperators{HermitianOperator(hermitian_part(a_p)),
                               HermitianOperator(hermitian_part(a_pbar))};
}

ComplexMatrix rhs_nonlinear_master(const HermitianOperator& h, const TransitionNetwork& net,
                                   const DensityMatrix& rho) {
    require_dim(h.dim(), rho.dim(), "rhs_nonlinear_master");
    const auto ops = build_relaxation_operators(net, rho);
    return rhs_general(h, ops.particle_loss, ops.hole_loss, rho);
}

ComplexMatrix rhs_generalized(const HermitianOperator& h, const JumpOperatorSet& jumps,
                              const DensityMatrix& rho) {
    require_dim(h.dim(), rho.dim(), "rhs_generalized");
    require_dim(jumps.dim(), rho.dim(), "rhs_generalized");
    const ComplexMatrix& r = rho.matrix();
    const double s = occupation_sign(rho.statistics());
    const ComplexMatrix blocked = identity_like(r) + s * r;
    ComplexMatrix out = liouville_term(h, r);
    for (const auto& w : jumps.operators()) {
        out -= 0.5 * anticommutator(r, w * blocked * w.adjoint());
        out += 0.5 * anticommutator(blocked, w.adjoint() * r * w);
    }
    return out;
}

ComplexMatrix rhs_markoff(const HermitianOperator& h, const TransitionNetwork& net,
                          const DephasingRates& dephasing, const ComplexMatrix& rho) {
    require_dim(h.dim(), static_cast<std::size_t>(rho.rows()), "rhs_markoff");
    require_dim(net.dim(), h.dim(), "rhs_markoff");
    require_dim(dephasing.dim(), h.dim(), "rhs_markoff");
    const auto n = static_cast<Eigen::Index>(net.dim());
    const RealVector occ = net.occupations(rho);

    RealVector out_rate = RealVector::Zero(n);
    RealVector gain = RealVector::Zero(n);
    for (const auto& [key, w] : net.rates()) {
        const auto to = static_cast<Eigen::Index>(key.first);
        const auto from = static_cast<Eigen::Index>(key.second);
        out_rate(from) += w;
        gain(to) += w * occ(from);
    }
    ComplexMatrix out = liouville_term(h, rho) -
                        0.5 * anticommutator(rho, basis_diagonal(net, out_rate)) +
                        basis_diagonal(net, gain);
    if (!dephasing.is_zero()) {
        const ComplexMatrix& u = net.basis();
        const ComplexMatrix in_basis = net.is_computational() ? rho : ComplexMatrix(u.adjoint() * rho * u);
        ComplexMatrix damp = ComplexMatrix::Zero(n, n);
        const RealMatrix& g = dephasing.matrix();
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                if (a != b) damp(a, b) = g(b, a) * in_basis(a, b);
            }
        }
        out -= net.is_computational() ? damp : ComplexMatrix(u * damp * u.adjoint());
    }
    return out;
}

ComplexMatrix rhs_lindblad(const HermitianOperator& h, const JumpOperatorSet& jumps,
                           const ComplexMatrix& rho) {
    require_dim(h.dim(), static_cast<std::size_t>(rho.rows()), "rhs_lindblad");
    require_dim(jumps.dim(), h.dim(), "rhs_lindblad");
    ComplexMatrix out = liouville_term(h, rho);
    for (const auto& w : jumps.operators()) {
        out -= 0.5 * anticommutator(rho, w * w.adjoint());
        out += w.adjoint() * rho * w;
    }
    return out;
}

RealVector rhs_quasiclassical(const RealVector& f, const RealMatrix& w, Statistics stats,
                              double tolerance) {
    const Eigen::Index n = f.size();
    if (w.rows() != n || w.cols() != n) {
        throw DimensionMismatch("rhs_quasiclassical: rate matrix does not match occupation vector");
    }
    for (Eigen::Index p = 0; p < n; ++p) {
        const double upper = stats == Statistics::Fermion ? 1.0 + tolerance : INFINITY;
        if (!std::isfinite(f(p)) || f(p) < -tolerance || f(p) > upper) {
            std::ostringstream os;
            os << "rhs_quasiclassical: occupation f[" << p + 1 << "] = " << f(p)
               << " is outside the admissible range for " << to_string(stats) << "s";
            throw InvariantViolation(os.str());
        }
        for (Eigen::Index q = 0; q < n; ++q) {
            if (!std::isfinite(w(p, q)) || w(p, q) < 0.0) {
                throw InvariantViolation(pair_name("rates", static_cast<std::size_t>(p),
                                                   static_cast<std::size_t>(q)) +
                                         ": rate must be a finite nonnegative number");
            }
        }
    }
    const double s = occupation_sign(stats);
    RealVector df = RealVector::Zero(n);
    for (Eigen::Index p = 0; p < n; ++p) {
        double acc = 0.0;
        for (Eigen::Index q = 0; q < n; ++q) {
            acc += w(p, q) * (1.0 + s * f(p)) * f(q);
            acc -= w(q, p) * (1.0 + s * f(q)) * f(p);
        }
        df(p) = acc;
    }
    return df;
}

HermitianOperator rewrite_A_prime(const HermitianOperator& a_p, const HermitianOperator& a_pbar,
                                  Statistics stats) {
    require_same_dim(a_p.matrix(), a_pbar.matrix(), "rewrite_A_prime");
    return HermitianOperator(a_p.matrix() - occupation_sign(stats) * a_pbar.matrix());
}

ComplexMatrix rhs_rewritten(const HermitianOperator& h, const HermitianOperator& a_prime,
                            const HermitianOperator& a_pbar, const ComplexMatrix& rho) {
    return liouville_term(h, rho) + anticommutator(rho, a_prime.matrix()) - 2.0 * a_pbar.matrix();
}

}  // namespace qme
