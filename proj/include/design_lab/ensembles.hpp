#pragma once

#include "design_lab/sampling.hpp"
#include "design_lab/tensor_core.hpp"

#include <string_view>
#include <vector>

namespace design_lab {

enum class EnsembleSource { projected, row, deformed_row };

std::string_view to_string(EnsembleSource source);
EnsembleSource   ensemble_source_from_string(std::string_view name);

/// Outcome probabilities below this are dropped before renormalizing.
inline constexpr double kZeroProbability = 1e-14;

/// A finite ensemble {(p_z, |ψ_z⟩)} of pure states on C^d. States are stored as
/// the columns of a d × n matrix; `outcome(z)` remembers which measurement
/// outcome (row index) produced member z after zero-probability outcomes were
/// dropped.
class StateEnsemble {
  public:
    /// Validates Σp = 1 within 1e-10, p > 0 and unit-norm columns within 1e-10.
    StateEnsemble(RVector probabilities, CMatrix states, std::vector<Index> outcomes, EnsembleSource source);

    /// Builds the ensemble from unnormalized vectors (columns): p_z = scale·‖v_z‖²,
    /// members with p_z < 1e-14 dropped, survivors renormalized. The size of
    /// that renormalization is kept in renormalization_shift().
    static StateEnsemble from_unnormalized(const CMatrix &vectors, double scale, EnsembleSource source);

    [[nodiscard]] Index                     size() const noexcept { return probabilities_.size(); }
    [[nodiscard]] Index                     dim() const noexcept { return states_.rows(); }
    [[nodiscard]] EnsembleSource            source() const noexcept { return source_; }
    [[nodiscard]] const RVector            &probabilities() const noexcept { return probabilities_; }
    [[nodiscard]] const CMatrix            &states() const noexcept { return states_; }
    [[nodiscard]] const std::vector<Index> &outcomes() const noexcept { return outcomes_; }
    [[nodiscard]] double                    probability(Index z) const { return probabilities_(z); }
    [[nodiscard]] PureState                 state(Index z) const { return PureState::normalized(states_.col(z)); }
    [[nodiscard]] Index                     outcome(Index z) const { return outcomes_[static_cast<std::size_t>(z)]; }
    [[nodiscard]] double                    renormalization_shift() const noexcept { return renormalization_shift_; }

    /// Σ_z p_z |ψ_z⟩⟨ψ_z|
    [[nodiscard]] HermitianOperator average_state() const;

  private:
    RVector            probabilities_;
    CMatrix            states_;
    std::vector<Index> outcomes_;
    EnsembleSource     source_;
    double             renormalization_shift_ = 0.0;
};

class MomentOperator {
  public:
    /// Validates dimension d^k and unit trace within 1e-10.
    MomentOperator(HermitianOperator op, Index base_dim, int order);

    [[nodiscard]] const HermitianOperator &op() const noexcept { return op_; }
    [[nodiscard]] const CMatrix           &matrix() const noexcept { return op_.matrix(); }
    [[nodiscard]] Index                    base_dim() const noexcept { return base_dim_; }
    [[nodiscard]] int                      order() const noexcept { return order_; }

  private:
    HermitianOperator op_;
    Index             base_dim_;
    int               order_;
};

class MeasurementBasis {
  public:
    /// Columns of `unitary` are the basis vectors U|z⟩.
    explicit MeasurementBasis(HaarUnitary unitary) : unitary_(std::move(unitary)) {}
    static MeasurementBasis computational(Index dim) { return MeasurementBasis(HaarUnitary(CMatrix::Identity(dim, dim))); }

    [[nodiscard]] const CMatrix &matrix() const noexcept { return unitary_.matrix(); }
    [[nodiscard]] Index          dim() const noexcept { return unitary_.dim(); }

  private:
    HaarUnitary unitary_;
};

/// Post-measurement ensemble of measuring Ā in `basis`:
/// p_z = ‖(1 ⊗ ⟨u_z|)Ψ‖², ψ_z = (1 ⊗ ⟨u_z|)Ψ / √p_z.
StateEnsemble projected_ensemble(const BipartiteState &state, const MeasurementBasis &basis);

/// Row ensemble of an isometry: ψ_z ∝ V†|z⟩ (the conjugated row z), p_z = ‖V†|z⟩‖²/d.
StateEnsemble row_ensemble(const Isometry &v);

/// Ensemble of measuring (√(d_A ρ_A) ⊗ 1)|Φ_V⟩ in the computational basis:
/// ψ_z ∝ √ρ_A V†|z⟩, p_z = ⟨z|V ρ_A V†|z⟩. Costs O(M d_A²).
StateEnsemble deformed_row_ensemble(const Isometry &v, const HermitianOperator &rho_a);

/// The state (√ρ_A ⊗ 1)·(V† as coefficients), whose computational-basis
/// projected ensemble is deformed_row_ensemble(v, rho_a).
BipartiteState purification_from_isometry(const Isometry &v, const HermitianOperator &rho_a);

/// Replaces every member ψ_z by U ψ_z.
StateEnsemble rotate_members(const StateEnsemble &e, const CMatrix &unitary);

/// Û_A = U_A ⊕ 1_{M−d_A} in the basis where W is the standard embedding.
CMatrix embed_local_unitary(const CMatrix &local, Index dim);

/// Σ_z p_z |ψ_z⟩⟨ψ_z|^{⊗k}, accumulated in member order.
MomentOperator moment_operator(const StateEnsemble &e, int k);

/// Projector onto the symmetric subspace of (C^d)^{⊗k}: the average of all k!
/// slot-permutation operators.
CMatrix symmetric_projector(Index d, int k);

/// P_sym / binom(d + k − 1, k).
MomentOperator haar_moment_operator(Index d, int k);

/// Trace distance between the ensemble's k-th moment and the Haar moment.
double design_distance(const StateEnsemble &e, int k);
double design_distance(const StateEnsemble &e, const MomentOperator &haar);

/// (1/√d_A) Σ_i |i⟩ ⊗ |φ_i⟩ from the Schmidt decomposition of `state`.
/// Throws rank_deficiency when the smallest Schmidt weight is below 1e-12.
BipartiteState exact_thermal_companion(const BipartiteState &state);

/// ‖(I − P_sym) op‖₁ style residual: trace norm of op − P op P.
double symmetric_subspace_residual(const MomentOperator &m);

} // namespace design_lab
