#pragma once

#include "design_lab/bounds.hpp"
#include "design_lab/sampling.hpp"
#include "design_lab/tensor_core.hpp"

#include <cstddef>

namespace design_lab {

/// The explicit M × M gradient is a diagnostic; larger M is refused.
inline constexpr Index kGradientMaxM = 64;

/// f_α(U) = Tr[X_α M^(k)(UW)], where M^(k)(V) is the k-th moment of the row
/// ensemble of V and X_α runs over an orthonormal Hermitian basis of d_A^k × d_A^k
/// matrices.
struct GradientProbe {
    HaarUnitary   u;
    Isometry      w;
    OperatorBasis basis;
    int           k;

    /// W = standard embedding, basis = hermitian_operator_basis(d_A^k).
    /// Throws resource_limit for M > 64 or d_A^k beyond the cap.
    static GradientProbe make(HaarUnitary u, Index d_a, int k);

    [[nodiscard]] Index m() const noexcept { return w.rows(); }
    [[nodiscard]] Index d_a() const noexcept { return w.cols(); }
};

/// Tr[X M^(k)(UW)] for one Hermitian X.
double f_operator(const CMatrix &u, const Isometry &w, const CMatrix &x, int k);
double f_alpha(const GradientProbe &probe, std::size_t alpha);

/// Gradient of U ↦ Tr[X M^(k)(UW)] on the unitary group: (S − S†) U with
/// S = Σ_z |z⟩⟨z| V B_z V†, V = UW, R_z the normalized row state and
/// B_z = (1/d_A) Σ_{l=0}^{k−1} Tr_{all but slot l+1}[X (R_z^{⊗l} ⊗ I ⊗ R_z^{⊗(k−l−1)})]
///       − (k−1) Tr[X R_z^{⊗k}] I/d_A.
/// It satisfies Tr[∇† G U] = d/dλ f(e^{λG} U) at λ = 0 for skew-Hermitian G.
CMatrix gradient_for_operator(const CMatrix &u, const Isometry &w, const CMatrix &x, int k);
CMatrix gradient_f_alpha(const GradientProbe &probe, std::size_t alpha);

/// (f(e^{hG}U) − f(e^{−hG}U)) / (2h).
double directional_derivative_fd(const GradientProbe &probe, std::size_t alpha, const CMatrix &g, double h);

/// |Tr[∇f_α† G U] − finite difference| ≤ 1e-6.
BoundReport check_directional_derivative(const GradientProbe &probe, std::size_t alpha, const CMatrix &g, double h);

/// max_α ‖∇f_α‖₂ ≤ 2(2k−1)/√d_A + 1e-9.
BoundReport check_gradient_bound(const GradientProbe &probe);

} // namespace design_lab
