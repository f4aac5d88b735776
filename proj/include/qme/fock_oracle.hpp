#pragma once

// Exact second-quantized master equation on a small Fock space.
//
// Basis ordering:
//   fermions  occupation bitstring n_1 n_2 ... n_M read as a binary integer
//             (mode 1 is the most significant bit), e.g. |10> = index 2
//   bosons    mixed radix, little endian: index = sum_k n_k (cutoff+1)^k
// Fermionic sign: c_k picks up (-1)^(number of occupied modes before k).

#include <cstddef>
#include <vector>

#include "qme/dynamics.hpp"

namespace qme {

inline constexpr std::size_t kMaxFockModes = 4;
inline constexpr std::size_t kMaxFockDim = 10000;

struct FockModel {
    std::size_t modes = 1;
    Statistics statistics = Statistics::Fermion;
    std::vector<double> energies;     // epsilon_n, one per mode
    std::size_t boson_cutoff = 4;     // max occupancy per mode (bosons)
    RateMap rates;                    // (to, from) -> w, mode indices

    std::size_t levels_per_mode() const noexcept {
        return statistics == Statistics::Fermion ? 2 : boson_cutoff + 1;
    }
    std::size_t fock_dim() const noexcept;

    /// Throws ResourceLimit / InvariantViolation / DimensionMismatch.
    void validate() const;
};

/// Many-body density matrix on the Fock space: PSD with unit trace.
class ManyBodyState {
public:
    static ManyBodyState validated(ComplexMatrix rho, double tolerance = kHermitianTolerance);
    const ComplexMatrix& matrix() const noexcept { return rho_; }

private:
    explicit ManyBodyState(ComplexMatrix rho) : rho_(std::move(rho)) {}
    ComplexMatrix rho_;
};

/// Annihilators c_1 .. c_M as dense Fock-space matrices.
std::vector<ComplexMatrix> build_mode_operators(const FockModel& model);

/// Max deviation from the canonical (anti)commutation relations. For bosons
/// the [c_n, c_m^dag] check is restricted to basis states below the cutoff.
double canonical_relation_defect(const FockModel& model, const std::vector<ComplexMatrix>& c);

class FockOracle {
public:
    explicit FockOracle(FockModel model);

    const FockModel& model() const noexcept { return model_; }
    std::size_t dim() const noexcept { return model_.fock_dim(); }
    const std::vector<ComplexMatrix>& annihilators() const noexcept { return c_; }
    const ComplexMatrix& hamiltonian() const noexcept { return h_; }
    /// sqrt(w_{n'n}) c_{n'}^dag c_n, one per rate entry
    const std::vector<ComplexMatrix>& jump_operators() const noexcept { return jumps_; }
    const ComplexMatrix& number_operator() const noexcept { return number_; }

    std::vector<std::size_t> occupations(std::size_t index) const;
    std::size_t index_of(const std::vector<std::size_t>& occupations) const;

    /// (1/i)[H_S, rho] - 1/2 sum {A^dag A, rho} + sum A rho A^dag
    ComplexMatrix rhs(const ComplexMatrix& rho_s) const;

    /// <n|rho_p|n'> = Tr c_n^dag c_n' rho_S
    ComplexMatrix one_particle(const ComplexMatrix& rho_s) const;

    /// |n_1 ... n_M><n_1 ... n_M|
    ComplexMatrix basis_state(const std::vector<std::size_t>& occupations) const;
    /// Diagonal product state from per-mode occupation distributions p_k(n).
    ComplexMatrix product_state(const std::vector<std::vector<double>>& mode_distributions) const;

    /// Probability of basis states with at least one mode at the cutoff (bosons, else 0).
    double top_level_population(const ComplexMatrix& rho_s) const;
    /// Fock-diagonal and equal to the product of its single-mode marginals.
    bool is_product_state(const ComplexMatrix& rho_s, double tolerance = 1e-12) const;

private:
    FockModel model_;
    std::vector<ComplexMatrix> c_;
    ComplexMatrix h_;
    std::vector<ComplexMatrix> jumps_;
    ComplexMatrix loss_;  // sum A^dag A
    ComplexMatrix number_;
};

ComplexMatrix rhs_fock_lindblad(const FockModel& model, const ManyBodyState& rho_s);

DensityMatrix reduce_one_particle(const FockModel& model, const ManyBodyState& rho_s);

struct ClosureReport {
    double residual = 0.0;
    RealVector exact_rates;    // d<N_n>/dt from the exact Fock equation
    RealVector closure_rates;  // semiclassical occupation equation on the reduced diagonal
    bool product_state = true; // false: closure is not exact, residual quantifies it
    bool cutoff_contaminated = false;
};

inline constexpr double kCutoffContaminationThreshold = 0.01;

/// Compares exact t = 0 occupation derivatives with the closed occupation
/// equation evaluated on the reduced one-particle matrix.
ClosureReport closure_residual_at_t0(const FockModel& model, const ManyBodyState& rho_s);
ClosureReport closure_residual_at_t0(const FockOracle& oracle, const ComplexMatrix& rho_s);

}  // namespace qme
