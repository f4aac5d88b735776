#include "qme/analysis.hpp"

#include <cmath>
#include <sstream>

namespace qme {

namespace {

void require_same_grid(const Trajectory& a, const Trajectory& b, const char* what) {
    if (a.times.size() != b.times.size()) {
        throw DimensionMismatch(std::string(what) + ": trajectories have different lengths");
    }
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        if (std::abs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::abs(a.times[i]))) {
            std::ostringstream os;
            os << what << ": time grids differ at snapshot " << i << " (" << a.times[i] << " vs "
               << b.times[i] << ")";
            throw DimensionMismatch(os.str());
        }
    }
}

}  // namespace

const char* to_string(Violation::Kind k) noexcept {
    return k == Violation::Kind::NegativeEigenvalue ? "negative_eigenvalue" : "fermion_above_one";
}

DiagnosticSeries diagnostic_series(const Trajectory& traj, const Trajectory* holes) {
    DiagnosticSeries s;
    const double trace0 = traj.diagnostics.empty() ? 0.0 : traj.diagnostics.front().trace;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& d = traj.diagnostics[i];
        s.times.push_back(traj.times[i]);
        s.trace_drift.push_back(d.trace - trace0);
        s.min_eigenvalue.push_back(d.min_eigenvalue);
        s.max_eigenvalue.push_back(d.max_eigenvalue);
        s.hermiticity_defect.push_back(d.hermiticity_defect);
    }
    if (holes != nullptr) {
        require_same_grid(traj, *holes, "diagnostic_series");
        std::vector<double> dual;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const ComplexMatrix& p = traj.states[i].matrix();
            const ComplexMatrix sum = p + holes->states[i].matrix();
            dual.push_back(max_abs(sum - ComplexMatrix::Identity(p.rows(), p.cols())));
        }
        s.duality_residual = std::move(dual);
    }
    return s;
}

double max_trace_drift(const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& d : traj.diagnostics) {
        worst = std::max(worst, std::abs(d.trace - traj.diagnostics.front().trace));
    }
    return worst;
}

double max_hermiticity_defect(const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& d : traj.diagnostics) worst = std::max(worst, d.hermiticity_defect);
    return worst;
}

double duality_check(const Trajectory& particles, const Trajectory& holes) {
    const auto series = diagnostic_series(particles, &holes);
    double worst = 0.0;
    for (double r : *series.duality_residual) worst = std::max(worst, r);
    return worst;
}

double max_diagonal_difference(const Trajectory& a, const Trajectory& b) {
    require_same_grid(a, b, "max_diagonal_difference");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const RealVector da = a.states[i].matrix().diagonal().real();
        const RealVector db = b.states[i].matrix().diagonal().real();
        if (da.size() != db.size()) throw DimensionMismatch("max_diagonal_difference: state dims differ");
        worst = std::max(worst, (da - db).cwiseAbs().maxCoeff());
    }
    return worst;
}

std::vector<Violation> bounds_monitor(const Trajectory& traj, Statistics stats, double threshold) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& d = traj.diagnostics[i];
        if (d.min_eigenvalue < -threshold) {
            out.push_back({traj.times[i], Violation::Kind::NegativeEigenvalue, d.min_eigenvalue});
        }
        if (stats == Statistics::Fermion && d.max_eigenvalue > 1.0 + threshold) {
            out.push_back({traj.times[i], Violation::Kind::FermionAboveOne, d.max_eigenvalue});
        }
    }
    return out;
}

std::optional<double> crossing_time(const Trajectory& traj) {
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double ma = traj.diagnostics[i - 1].min_eigenvalue;
        const double mb = traj.diagnostics[i].min_eigenvalue;
        if (ma >= 0.0 && mb < 0.0) {
            const double ta = traj.times[i - 1];
            const double tb = traj.times[i];
            auto interp = [&](double t) { return ma + (mb - ma) * (t - ta) / (tb - ta); };
            double lo = ta;
            double hi = tb;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (interp(mid) >= 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return std::nullopt;
}

ComplexMatrix appendix_d_initial_matrix() {
    const double diag = 1.0 / 3.0;
    const double a = 10.0 / 27.0;
    const double b = 2.0 / 9.0;
    ComplexMatrix rho(3, 3);
    rho << diag, a, a,
           a, diag, b,
           a, b, diag;
    return rho;
}

RealVector appendix_d_limit_spectrum() {
    const double third = 1.0 / 3.0;
    const double split = 10.0 * std::sqrt(2.0) / 27.0;
    RealVector ev(3);
    ev << third - split, third, third + split;
    return ev;
}

AppendixDSetup appendix_d_scenario(double gamma, const RealVector& h0_diagonal) {
    if (!(gamma > 0.0)) throw InvariantViolation("appendix_d_scenario: gamma must be positive");
    if (h0_diagonal.size() != 3) throw DimensionMismatch("appendix_d_scenario: H0 must be 3x3 diagonal");
    // The initial matrix has a negative eigenvalue; it is deliberately not validated.
    return AppendixDSetup{
        DensityMatrix(appendix_d_initial_matrix(), Statistics::Fermion),
        HermitianOperator::diagonal(h0_diagonal),
        TransitionNetwork::empty(3),
        DephasingRates(3, {{{1, 2}, gamma}}),
    };
}

LowDensityFit low_density_slope(const HermitianOperator& h, const TransitionNetwork& net,
                                const DensityMatrix& sigma, const std::vector<double>& epsilons) {
    const auto check = check_density_matrix(sigma.matrix(), Statistics::Boson);
    if (!check.ok) throw InvariantViolation(std::string("low_density_slope: sigma ") + check.failure);
    if (std::abs(sigma.particle_number() - 1.0) > kHermitianTolerance) {
        throw InvariantViolation("low_density_slope: sigma must have unit trace");
    }
    if (epsilons.size() < 2) throw std::invalid_argument("low_density_slope: need at least two epsilons");
    double lo = epsilons.front();
    double hi = epsilons.front();
    for (double e : epsilons) {
        if (!(e > 0.0)) throw std::invalid_argument("low_density_slope: epsilons must be positive");
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    if (hi / lo < 1e3 * (1.0 - 1e-12)) {
        throw std::invalid_argument("low_density_slope: epsilons must span at least three decades");
    }

    const DephasingRates none = DephasingRates::none(net.dim());
    LowDensityFit fit;
    for (double e : epsilons) {
        const DensityMatrix scaled(e * sigma.matrix(), sigma.statistics());
        const double r = max_abs(rhs_nonlinear_master(h, net, scaled) -
                                 rhs_markoff(h, net, none, scaled.matrix()));
        if (r < kLowDensityFloor) continue;
        fit.epsilons.push_back(e);
        fit.residuals.push_back(r);
    }
    if (fit.epsilons.size() < 2) {
        fit.degenerate = true;
        return fit;
    }
    double mx = 0.0, my = 0.0;
    const auto n = static_cast<double>(fit.epsilons.size());
    for (std::size_t i = 0; i < fit.epsilons.size(); ++i) {
        mx += std::log(fit.epsilons[i]);
        my += std::log(fit.residuals[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < fit.epsilons.size(); ++i) {
        const double dx = std::log(fit.epsilons[i]) - mx;
        sxy += dx * (std::log(fit.residuals[i]) - my);
        sxx += dx * dx;
    }
    fit.slope = sxy / sxx;
    return fit;
}

}  // namespace qme
