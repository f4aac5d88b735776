#include "qme/fock_oracle.hpp"

#include <cmath>
#include <sstream>

namespace qme {

std::size_t FockModel::fock_dim() const noexcept {
    std::size_t d = 1;
    for (std::size_t k = 0; k < modes; ++k) d *= levels_per_mode();
    return d;
}

void FockModel::validate() const {
    if (modes == 0 || modes > kMaxFockModes) {
        std::ostringstream os;
        os << "FockModel: " << modes << " modes requested, supported range is 1.." << kMaxFockModes;
        throw ResourceLimit(os.str());
    }
    if (statistics == Statistics::Boson) {
        if (boson_cutoff == 0) throw InvariantViolation("FockModel: boson cutoff must be positive");
        double d = 1.0;
        for (std::size_t k = 0; k < modes; ++k) d *= static_cast<double>(boson_cutoff + 1);
        if (d > static_cast<double>(kMaxFockDim)) {
            std::ostringstream os;
            os << "FockModel: boson Fock dimension " << d << " exceeds " << kMaxFockDim;
            throw ResourceLimit(os.str());
        }
    }
    if (energies.size() != modes) {
        throw DimensionMismatch("FockModel: one energy per mode is required");
    }
    for (double e : energies) {
        if (!std::isfinite(e)) throw InvariantViolation("FockModel: energies must be finite");
    }
    // reuse the network validation for rate keys and signs
    (void)TransitionNetwork::computational(modes, rates);
}

ManyBodyState ManyBodyState::validated(ComplexMatrix rho, double tolerance) {
    require_square_finite(rho, "ManyBodyState");
    const auto c = check_density_matrix(rho, Statistics::Boson, tolerance);
    if (!c.ok) {
        throw InvariantViolation(std::string("ManyBodyState: ") + c.failure);
    }
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tolerance) {
        std::ostringstream os;
        os << "ManyBodyState: trace must be 1, got " << rho.trace().real();
        throw InvariantViolation(os.str());
    }
    return ManyBodyState(std::move(rho));
}

namespace {

std::vector<std::size_t> decode(const FockModel& m, std::size_t index) {
    std::vector<std::size_t> occ(m.modes, 0);
    if (m.statistics == Statistics::Fermion) {
        for (std::size_t k = 0; k < m.modes; ++k) {
            occ[k] = (index >> (m.modes - 1 - k)) & 1u;
        }
    } else {
        const std::size_t radix = m.boson_cutoff + 1;
        for (std::size_t k = 0; k < m.modes; ++k) {
            occ[k] = index % radix;
            index /= radix;
        }
    }
    return occ;
}

std::size_t encode(const FockModel& m, const std::vector<std::size_t>& occ) {
    if (occ.size() != m.modes) throw DimensionMismatch("Fock occupation list has the wrong length");
    std::size_t index = 0;
    if (m.statistics == Statistics::Fermion) {
        for (std::size_t k = 0; k < m.modes; ++k) {
            if (occ[k] > 1) throw InvariantViolation("fermion occupation must be 0 or 1");
            index = (index << 1) | occ[k];
        }
    } else {
        std::size_t scale = 1;
        for (std::size_t k = 0; k < m.modes; ++k) {
            if (occ[k] > m.boson_cutoff) throw InvariantViolation("boson occupation above cutoff");
            index += occ[k] * scale;
            scale *= m.boson_cutoff + 1;
        }
    }
    return index;
}

}  // namespace

std::vector<ComplexMatrix> build_mode_operators(const FockModel& model) {
    model.validate();
    const std::size_t dim = model.fock_dim();
    const auto n = static_cast<Eigen::Index>(dim);
    std::vector<ComplexMatrix> ops(model.modes, ComplexMatrix::Zero(n, n));
    for (std::size_t col = 0; col < dim; ++col) {
        const auto occ = decode(model, col);
        std::size_t parity = 0;
        for (std::size_t k = 0; k < model.modes; ++k) {
            if (occ[k] > 0) {
                auto lowered = occ;
                --lowered[k];
                const auto row = static_cast<Eigen::Index>(encode(model, lowered));
                double amp = 0.0;
                if (model.statistics == Statistics::Fermion) {
                    amp = (parity % 2 == 0) ? 1.0 : -1.0;
                } else {
                    amp = std::sqrt(static_cast<double>(occ[k]));
                }
                ops[k](row, static_cast<Eigen::Index>(col)) = amp;
            }
            parity += occ[k];
        }
    }
    return ops;
}

double canonical_relation_defect(const FockModel& model, const std::vector<ComplexMatrix>& c) {
    if (c.size() != model.modes) throw DimensionMismatch("canonical_relation_defect: mode count");
    const auto n = c.empty() ? Eigen::Index{0} : c.front().rows();
    const ComplexMatrix eye = ComplexMatrix::Identity(n, n);

    // boson check restricted to states with every mode strictly below the cutoff
    std::vector<Eigen::Index> interior;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto occ = decode(model, static_cast<std::size_t>(i));
        bool inside = true;
        for (auto o : occ) inside = inside && (model.statistics == Statistics::Fermion || o < model.boson_cutoff);
        if (inside) interior.push_back(i);
    }

    double worst = 0.0;
    for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = 0; b < c.size(); ++b) {
            const ComplexMatrix delta = (a == b) ? eye : ComplexMatrix::Zero(n, n);
            if (model.statistics == Statistics::Fermion) {
                worst = std::max(worst, max_abs(anticommutator(c[a], c[b].adjoint()) - delta));
                worst = std::max(worst, max_abs(anticommutator(c[a], c[b])));
            } else {
                const ComplexMatrix rel = commutator(c[a], c[b].adjoint()) - delta;
                for (auto i : interior) {
                    for (auto j : interior) worst = std::max(worst, std::abs(rel(i, j)));
                }
                worst = std::max(worst, max_abs(commutator(c[a], c[b])));
            }
        }
    }
    return worst;
}

FockOracle::FockOracle(FockModel model) : model_(std::move(model)) {
    c_ = build_mode_operators(model_);
    const auto n = static_cast<Eigen::Index>(dim());
    h_ = ComplexMatrix::Zero(n, n);
    number_ = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < model_.modes; ++k) {
        const ComplexMatrix nk = c_[k].adjoint() * c_[k];
        h_ += model_.energies[k] * nk;
        number_ += nk;
    }
    loss_ = ComplexMatrix::Zero(n, n);
    for (const auto& [key, w] : model_.rates) {
        ComplexMatrix a = std::sqrt(w) * c_[key.first].adjoint() * c_[key.second];
        loss_ += a.adjoint() * a;
        jumps_.push_back(std::move(a));
    }
}

std::vector<std::size_t> FockOracle::occupations(std::size_t index) const {
    if (index >= dim()) throw DimensionMismatch("FockOracle::occupations: index out of range");
    return decode(model_, index);
}

std::size_t FockOracle::index_of(const std::vector<std::size_t>& occupations) const {
    return encode(model_, occupations);
}

ComplexMatrix FockOracle::rhs(const ComplexMatrix& rho_s) const {
    require_same_dim(h_, rho_s, "FockOracle::rhs");
    ComplexMatrix out = Complex(0.0, -1.0) * commutator(h_, rho_s) - 0.5 * anticommutator(loss_, rho_s);
    for (const auto& a : jumps_) out += a * rho_s * a.adjoint();
    return out;
}

ComplexMatrix FockOracle::one_particle(const ComplexMatrix& rho_s) const {
    require_same_dim(h_, rho_s, "FockOracle::one_particle");
    const auto m = static_cast<Eigen::Index>(model_.modes);
    ComplexMatrix rho_p(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            rho_p(a, b) = (c_[static_cast<std::size_t>(a)].adjoint() * c_[static_cast<std::size_t>(b)] * rho_s).trace();
        }
    }
    return rho_p;
}

ComplexMatrix FockOracle::basis_state(const std::vector<std::size_t>& occupations) const {
    const auto n = static_cast<Eigen::Index>(dim());
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    const auto i = static_cast<Eigen::Index>(encode(model_, occupations));
    rho(i, i) = 1.0;
    return rho;
}

ComplexMatrix FockOracle::product_state(const std::vector<std::vector<double>>& dists) const {
    if (dists.size() != model_.modes) {
        throw DimensionMismatch("product_state: one distribution per mode is required");
    }
    for (const auto& p : dists) {
        if (p.size() != model_.levels_per_mode()) {
            throw DimensionMismatch("product_state: distribution length must equal levels per mode");
        }
        double total = 0.0;
        for (double x : p) {
            if (!(x >= 0.0)) throw InvariantViolation("product_state: probabilities must be nonnegative");
            total += x;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvariantViolation("product_state: distribution must sum to 1");
    }
    const auto n = static_cast<Eigen::Index>(dim());
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto occ = decode(model_, static_cast<std::size_t>(i));
        double p = 1.0;
        for (std::size_t k = 0; k < model_.modes; ++k) p *= dists[k][occ[k]];
        rho(i, i) = p;
    }
    return rho;
}

double FockOracle::top_level_population(const ComplexMatrix& rho_s) const {
    if (model_.statistics == Statistics::Fermion) return 0.0;
    double pop = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
        const auto occ = decode(model_, i);
        for (auto o : occ) {
            if (o == model_.boson_cutoff) {
                pop += rho_s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
                break;
            }
        }
    }
    return pop;
}

bool FockOracle::is_product_state(const ComplexMatrix& rho_s, double tolerance) const {
    const auto n = static_cast<Eigen::Index>(dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && std::abs(rho_s(i, j)) > tolerance) return false;
        }
    }
    const std::size_t levels = model_.levels_per_mode();
    std::vector<std::vector<double>> marginal(model_.modes, std::vector<double>(levels, 0.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto occ = decode(model_, static_cast<std::size_t>(i));
        for (std::size_t k = 0; k < model_.modes; ++k) marginal[k][occ[k]] += rho_s(i, i).real();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto occ = decode(model_, static_cast<std::size_t>(i));
        double p = 1.0;
        for (std::size_t k = 0; k < model_.modes; ++k) p *= marginal[k][occ[k]];
        if (std::abs(p - rho_s(i, i).real()) > tolerance) return false;
    }
    return true;
}

ComplexMatrix rhs_fock_lindblad(const FockModel& model, const ManyBodyState& rho_s) {
    return FockOracle(model).rhs(rho_s.matrix());
}

DensityMatrix reduce_one_particle(const FockModel& model, const ManyBodyState& rho_s) {
    return DensityMatrix(FockOracle(model).one_particle(rho_s.matrix()), model.statistics);
}

ClosureReport closure_residual_at_t0(const FockOracle& oracle, const ComplexMatrix& rho_s) {
    const FockModel& model = oracle.model();
    const ComplexMatrix drho = oracle.rhs(rho_s);
    const auto m = static_cast<Eigen::Index>(model.modes);

    ClosureReport report;
    report.exact_rates = RealVector(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& c = oracle.annihilators()[static_cast<std::size_t>(k)];
        report.exact_rates(k) = (c.adjoint() * c * drho).trace().real();
    }
    const RealVector occ = oracle.one_particle(rho_s).diagonal().real();
    const RealMatrix w = TransitionNetwork::computational(model.modes, model.rates).rate_matrix();
    report.closure_rates = rhs_quasiclassical(occ, w, model.statistics);
    report.residual = (report.exact_rates - report.closure_rates).cwiseAbs().maxCoeff();
    report.product_state = oracle.is_product_state(rho_s);
    report.cutoff_contaminated =
        oracle.top_level_population(rho_s) >= kCutoffContaminationThreshold;
    return report;
}

ClosureReport closure_residual_at_t0(const FockModel& model, const ManyBodyState& rho_s) {
    return closure_residual_at_t0(FockOracle(model), rho_s.matrix());
}

}  // namespace qme
