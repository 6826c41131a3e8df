#pragma once

#include "design_lab/ensembles.hpp"
#include "design_lab/records.hpp"
#include "design_lab/sampling.hpp"
#include "design_lab/tensor_core.hpp"

#include <cstdint>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace design_lab {

/// Parameters a bound was evaluated at; unset fields do not apply.
struct BoundContext {
    std::optional<Index>  d_a;
    std::optional<int>    k;
    std::optional<Index>  m;
    std::optional<double> delta;
    std::optional<double> eps_prime;
    std::optional<double> delta_prob;
};

/// observed ≤ bound + tolerance. Composite checks list their parts in `details`;
/// the top-level report is satisfied only when every part is.
struct BoundReport {
    std::string              name;
    double                   bound_value    = 0.0;
    double                   observed_value = 0.0;
    double                   tolerance      = 0.0;
    bool                     satisfied      = false;
    double                   margin         = 0.0;
    BoundContext             context;
    std::vector<BoundReport> details;

    static BoundReport make(std::string name, double bound, double observed, double tolerance, BoundContext ctx = {});
    /// Satisfied iff every detail is; bound/observed taken from the detail with the smallest margin.
    static BoundReport combine(std::string name, std::vector<BoundReport> details, BoundContext ctx = {});
};

nlohmann::json to_json(const BoundContext &ctx);
nlohmann::json to_json(const BoundReport &report);

// ---------------------------------------------------------------------------
// Closed forms

/// 2k√(d_A δ) + δ d_A. Requires 0 ≤ δ < 1/(2 d_A).
double continuity_bound(Index d_a, int k, double delta);

/// Smallest integer M > 4(2k−1)² d_A^{2k−1}/ε′² · ln(2 d_A^{2k}/Δ).
std::uint64_t design_threshold_m(Index d_a, int k, double eps_prime, double delta_prob);

/// ε′ + continuity_bound(d_A, k, δ).
double theorem_epsilon(double eps_prime, int k, Index d_a, double delta);

/// 2 d_A^{2k} exp(−M ε′² / (4(2k−1)² d_A^{2k−1})).
double tail_bound(Index m, Index d_a, int k, double eps_prime);

/// 2(2k−1)/√d_A.
double lipschitz_bound(Index d_a, int k);

/// The ε′ at which design_threshold_m(d_A, k, ε′, Δ) first admits M, i.e. the
/// inversion of the threshold formula: √(4(2k−1)² d_A^{2k−1} ln(2 d_A^{2k}/Δ) / M).
double eps_prime_for_dimension(Index m, Index d_a, int k, double delta_prob);

/// ½ Σ |p_i − r_i|.
double total_variation(const RVector &p, const RVector &r);

// ---------------------------------------------------------------------------
// Lemma checks

/// Weighted family of density matrices {(p_z, ρ_z)}.
struct DensityEnsemble {
    std::vector<double>            probabilities;
    std::vector<HermitianOperator> densities;
};

/// D(Σ p ρ^{⊗k}, Σ r σ^{⊗k}) ≤ Σ p D(ρ^{⊗k}, σ^{⊗k}) + D(p, r) ≤ k Σ p D(ρ, σ) + D(p, r),
/// each within 1e-9. Details: "tensor_power_step" and "telescoping_step".
BoundReport check_mixture_inequality(const DensityEnsemble &a, const DensityEnsemble &b, int k);

/// Compares the deformed row ensemble of (V, ρ_A) with the row ensemble of V:
/// max_z |p_z − r_z|/(2δ d_A r_z) ≤ 1, D(p, r) ≤ δ d_A and max_z D(ψ_z, φ_z) ≤ 2√(d_A δ),
/// where δ = D(ρ_A, I/d_A). Throws out_of_theorem_domain unless δ < 1/(2 d_A).
BoundReport check_normalization_lemma(const Isometry &v, const HermitianOperator &rho_a);

/// D(M^(k)_Ψ, M^(k)_Φ) ≤ continuity_bound(d_A, k, δ), where Φ is the exact
/// thermal companion of Ψ, both measured in `basis`, and δ = D(ρ_A, I/d_A).
BoundReport check_continuity(const BipartiteState &psi, const MeasurementBasis &basis, int k);

/// λ ↦ {ρ(λ)_z}: unnormalized PSD matrices with p(λ)_z = Tr ρ(λ)_z.
using DensityCurve = std::function<std::vector<CMatrix>(double)>;

/// Central-difference derivative of Σ_z p_z ρ̂_z^{⊗k} against
/// Σ_l Σ_z ρ̂^{⊗l} ⊗ ρ′ ⊗ ρ̂^{⊗(k−l−1)} − (k−1) Σ_z p′_z ρ̂_z^{⊗k}, with ρ′ and p′ also
/// by central differences. Reports the max-entry deviation against
/// max(1e-8, 1e2·h²·scale), scale = max(1, largest entry of either side).
/// Throws invalid_curve if some p_z ≤ 1e-12 at λ or λ ± h.
BoundReport check_derivative_identity(const DensityCurve &curve, double lambda, double h, int k);

/// ρ(λ)_z = (1/d) W† e^{−λG} |z⟩⟨z| e^{λG} W for z = 0..M−1, G skew-Hermitian M × M.
DensityCurve canonical_isometry_curve(const Isometry &w, const CMatrix &g);

// ---------------------------------------------------------------------------
// Monte Carlo tail

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
    double center     = 0.0;
    double lower      = 0.0;
    double upper      = 0.0;
    double half_width = 0.0;
};

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ95);

struct TailConfig {
    Index         d_a        = 2;
    int           k          = 2;
    Index         m          = 64;
    double        delta      = 0.0;
    double        eps_prime  = 0.3;
    double        delta_prob = 0.1;
    std::uint64_t n_trials   = 100;
    std::uint64_t seed       = 0;
    unsigned      workers    = 1;
    bool          record_timing = false;
};

struct TailResult {
    std::vector<TrialRecord> records;
    BoundReport              report;
    std::uint64_t            exceedances   = 0;
    double                   fraction      = 0.0;
    WilsonInterval           wilson;
    double                   tail_bound    = 0.0;
    double                   threshold     = 0.0;
    std::uint64_t            threshold_m   = 0;
    bool                     below_threshold = false;
};

/// One trial: RngStream(seed, trial_index); draws V = haar_isometry(M, d_A), and
/// when δ > 0 also ρ_A = Tr_Ā perturbed_thermal_state(d_A, M, δ); the design error
/// of the (deformed) row ensemble is compared with ε′ (δ = 0) or with
/// theorem_epsilon(ε′, k, d_A, δ) (δ > 0).
TrialRecord run_tail_trial(const TailConfig &cfg, const MomentOperator &haar, std::uint64_t trial_index);

/// Runs cfg.n_trials trials on cfg.workers threads. The report has details
/// "wilson_upper_vs_Delta" (asserted only when M meets the threshold) and
/// "fraction_vs_tail_bound" (empirical ≤ tail_bound + 3 Wilson half-widths).
TailResult monte_carlo_tail(const TailConfig &cfg);

void validate(const TailConfig &cfg);

} // namespace design_lab
