#pragma once

#include "design_lab/errors.hpp"

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

/*
 * Dense complex linear algebra for pure states, density operators and their
 * tensor powers.
 *
 * Tensor index convention (shared by every module): slot-1-major. A vector on
 * (C^d)^{⊗k} is indexed by i = i_1 d^{k-1} + i_2 d^{k-2} + ... + i_k, so the
 * first tensor slot varies slowest. kron(a, b) places `a` in slot 1. A
 * bipartite state on C^{d_A} ⊗ C^M is stored as the d_A × M coefficient matrix
 * C with ⟨i|⊗⟨z|Ψ⟩ = C(i, z), which is the same convention with A first.
 */

namespace design_lab {

using Index   = Eigen::Index;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kNormTolerance      = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kEigenvalueCutoff   = 1e-14;

inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Upper bound on d^k for dense tensor-power objects. Defaults to 4096 and can
/// be overridden through the DESIGN_LAB_CAP environment variable.
std::size_t dimension_cap();

/// d^k as an integer, or throws resource_limit when it exceeds `cap`.
Index checked_power(Index d, int k, std::size_t cap);

class PureState {
  public:
    /// Throws invalid_argument unless ‖amplitudes‖ = 1 within 1e-12.
    explicit PureState(CVector amplitudes);

    /// Rescales `v` to unit norm; throws invalid_argument on a zero vector.
    static PureState normalized(const CVector &v);
    static PureState basis(Index dim, Index i);

    [[nodiscard]] const CVector &amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] Index          dim() const noexcept { return amplitudes_.size(); }
    [[nodiscard]] CMatrix        projector() const { return amplitudes_ * amplitudes_.adjoint(); }

  private:
    CVector amplitudes_;
};

class HermitianOperator {
  public:
    /// Throws invalid_argument unless the matrix is square and equals its
    /// adjoint within 1e-12 (relative to the largest entry when that exceeds 1).
    explicit HermitianOperator(CMatrix entries);

    /// Projects onto the Hermitian part (A + A†)/2. For accumulated sums whose
    /// round-off breaks exact symmetry.
    static HermitianOperator hermitian_part(const CMatrix &entries);
    static HermitianOperator identity(Index dim);
    static HermitianOperator maximally_mixed(Index dim);
    static HermitianOperator projector(const PureState &psi);

    [[nodiscard]] const CMatrix &matrix() const noexcept { return entries_; }
    [[nodiscard]] Index          dim() const noexcept { return entries_.rows(); }
    [[nodiscard]] double         trace() const { return entries_.trace().real(); }
    [[nodiscard]] RVector        eigenvalues() const;
    [[nodiscard]] double         min_eigenvalue() const;

  private:
    CMatrix entries_;
};

class BipartiteState {
  public:
    /// Coefficient matrix C (d_A × M). Throws invalid_argument unless ‖C‖_F = 1
    /// within 1e-12.
    explicit BipartiteState(CMatrix coefficients);

    /// Reshapes a state vector on C^{d_A} ⊗ C^M (A-slot major).
    static BipartiteState from_vector(const CVector &psi, Index dim_a, Index dim_b);

    [[nodiscard]] const CMatrix &coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] Index          dim_a() const noexcept { return coefficients_.rows(); }
    [[nodiscard]] Index          dim_b() const noexcept { return coefficients_.cols(); }
    [[nodiscard]] CVector        to_vector() const;

  private:
    CMatrix coefficients_;
};

struct SchmidtDecomposition {
    RVector weights;     ///< q_i, nonincreasing, sums to one
    CMatrix left_basis;  ///< d_A × d_A, column i is |i⟩_A
    CMatrix right_basis; ///< M × d_A, column i is |φ_i⟩ (the ket, not the SVD vector)

    /// Σ_i √q_i |i⟩ ⊗ |φ_i⟩ as a coefficient matrix.
    [[nodiscard]] CMatrix reassemble() const;
};

struct OperatorBasis {
    Index                dim = 0;
    std::vector<CMatrix> elements;
};

enum class Subsystem { A, complement };

/// ½ Σ|λ_i(a − b)|, eigenvalues below 1e-14 in magnitude dropped.
double trace_distance(const HermitianOperator &a, const HermitianOperator &b);

/// ‖h‖₁ for a Hermitian matrix (not validated; callers pass Hermitian input).
double trace_norm_hermitian(const CMatrix &h);

/// √(1 − |⟨ψ|φ⟩|²), which equals the trace distance of the two projectors.
double pure_state_distance(const PureState &psi, const PureState &phi);

/// |⟨ψ|φ⟩|².
double fidelity(const PureState &psi, const PureState &phi);

HermitianOperator partial_trace(const BipartiteState &state, Subsystem keep);

/// Traces every slot of an operator on (C^d)^{⊗k} except `slot` (1-based).
CMatrix           partial_trace_all_but(const CMatrix &op, Index d, int k, int slot);
HermitianOperator partial_trace_all_but(const HermitianOperator &op, Index d, int k, int slot);

/// Singular value decomposition of C. Right vectors belonging to weights below
/// 1e-14 are replaced by standard basis vectors orthonormalized, in index
/// order, against the retained ones.
SchmidtDecomposition schmidt_decompose(const BipartiteState &state);

CMatrix kron(const CMatrix &a, const CMatrix &b);
CVector kron(const CVector &a, const CVector &b);

/// k-fold tensor power, slot-1-major; k = 0 gives the 1 × 1 identity. Throws
/// resource_limit when d^k > cap.
CMatrix           kron_power(const CMatrix &op, int k, std::size_t cap = dimension_cap());
CVector           kron_power(const CVector &v, int k, std::size_t cap = dimension_cap());
PureState         kron_power(const PureState &psi, int k);
HermitianOperator kron_power(const HermitianOperator &op, int k);

/// d² Hilbert–Schmidt orthonormal Hermitian matrices: I/√d, the off-diagonal
/// symmetric and antisymmetric pairs, then the diagonal generalized Gell-Mann
/// matrices.
OperatorBasis hermitian_operator_basis(Index d);

/// Principal square root of a positive semidefinite matrix; negative
/// round-off eigenvalues are clamped to zero.
CMatrix psd_sqrt(const HermitianOperator &rho);

/// e^{tG} for skew-Hermitian G, through the spectral decomposition of iG.
CMatrix exp_skew_hermitian(const CMatrix &g, double t);

/// Throws invalid_argument unless `rho` is a density matrix (trace one within
/// `tol`, min eigenvalue ≥ −tol).
void require_density_matrix(const HermitianOperator &rho, double tol, const char *what);

} // namespace design_lab
