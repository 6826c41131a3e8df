#pragma once

#include "design_lab/tensor_core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace design_lab {

enum class Boundary { open, periodic };

std::string_view to_string(Boundary b);
Boundary         boundary_from_string(std::string_view name);

/// Mixed-field Ising chain H = J Σ Z_i Z_{i+1} + h_x Σ X_i + h_z Σ Z_i. Site 1 is
/// the leftmost tensor factor; A is the first `cut` sites.
struct SpinChainConfig {
    int                 n_sites = 12;
    double              j       = 1.0;
    double              h_x     = 1.05;
    double              h_z     = 0.5;
    Boundary            boundary = Boundary::open;
    int                 cut      = 1;
    std::vector<double> times    = default_times();
    /// One token for every site, or a comma-separated token per site.
    /// Tokens: 0, 1, +, -, +y, -y (eigenstates of Z, X and Y).
    std::string initial_state = "+y";

    static std::vector<double> default_times(); // 0, 1, ..., 20

    [[nodiscard]] Index dim() const { return Index{1} << n_sites; }
    [[nodiscard]] Index dim_a() const { return Index{1} << cut; }
    [[nodiscard]] Index dim_b() const { return Index{1} << (n_sites - cut); }
};

/// Throws invalid_argument for malformed fields and resource_limit when
/// 2^N exceeds 4096 or the dimension cap.
void validate(const SpinChainConfig &cfg);

/// Real symmetric matrix of H in the computational basis.
Eigen::MatrixXd build_hamiltonian_real(const SpinChainConfig &cfg);
HermitianOperator build_hamiltonian(const SpinChainConfig &cfg);

PureState initial_product_state(const SpinChainConfig &cfg);

/// exp(−iHt) from one full eigendecomposition (LAPACK ?syevd/?heevd).
class SpectralPropagator {
  public:
    explicit SpectralPropagator(const Eigen::MatrixXd &real_symmetric);
    explicit SpectralPropagator(const HermitianOperator &h);

    /// Validated exp(−iHt)ψ0.
    [[nodiscard]] PureState evolve(const PureState &psi0, double t) const;
    /// exp(−iHt)ψ0 without renormalizing or validating the result.
    [[nodiscard]] CVector        propagate(const CVector &psi0, double t) const;
    [[nodiscard]] const RVector &energies() const noexcept { return energies_; }
    [[nodiscard]] Index          dim() const noexcept { return energies_.size(); }

  private:
    RVector         energies_;
    Eigen::MatrixXd real_vectors_;
    CMatrix         complex_vectors_;
    bool            real_ = true;
};

/// exp(−iHt) ψ0; decomposes H on every call, so prefer SpectralPropagator for time grids.
PureState evolve(const PureState &psi0, const HermitianOperator &h, double t);

/// ⟨ψ|H|ψ⟩ for a real symmetric H.
double energy(const PureState &psi, const Eigen::MatrixXd &h);

struct TraceOptions {
    int                   k              = 2;
    int                   n_random_bases = 50;
    std::uint64_t         seed           = 0;
    unsigned              workers        = 1;
    double                delta_prob     = 0.1;
    /// Defaults to the smallest 1e-4 grid value at which M = 2^{N−cut} meets the threshold at Δ.
    std::optional<double> eps_prime_ref;
};

struct TimeSlice {
    double t                       = 0.0;
    double delta                   = 0.0;
    double design_error_comp       = 0.0;
    double q10                     = 0.0;
    double q50                     = 0.0;
    double q90                     = 0.0;
    /// theorem_epsilon(ε′_ref, k, d_A, δ); NaN when δ ≥ 1/(2 d_A).
    double theorem_ceiling         = 0.0;
    /// Share of random bases whose design error is ≤ theorem_ceiling (0 when NaN).
    double fraction_within_ceiling = 0.0;
    /// |1 − Σ_z p_z| for the computational-basis outcomes and |1 − ‖ψ(t)‖|.
    double probability_defect      = 0.0;
    double norm_defect             = 0.0;
    std::vector<double> random_errors;
};

struct SpinChainTrace {
    std::vector<TimeSlice> slices;
    double                 eps_prime_ref = 0.0;
    std::uint64_t          threshold_m   = 0;
    Index                  m             = 0;
    Index                  d_a           = 0;
    std::vector<double>    energies;     // ⟨H⟩ at every slice
};

/// Smallest multiple of 1e-4 not below eps_prime_for_dimension(M, d_A, k, Δ).
double reference_eps_prime(Index m, Index d_a, int k, double delta_prob);

/// Linear-interpolation quantile (numpy's default) of `values`.
double quantile(std::vector<double> values, double q);

/// Random basis b at slice s uses RngStream(seed, s·n_random_bases + b).
SpinChainTrace design_error_trace(const SpinChainConfig &cfg, const TraceOptions &opts);

} // namespace design_lab
