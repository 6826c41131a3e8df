#pragma once

#include "design_lab/tensor_core.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace design_lab {

/// A reproducible random stream. The engine is std::mt19937_64 seeded through
/// std::seed_seq with the four 32-bit halves of (seed, stream_index); normal
/// variates come from std::normal_distribution. Parallel work gives every trial
/// its own stream_index, so draws never depend on scheduling.
class RngStream {
  public:
    static constexpr std::string_view algorithm_id = "mt19937_64/seed_seq(seed_lo,seed_hi,stream_lo,stream_hi)/std::normal_distribution";

    RngStream(std::uint64_t seed, std::uint64_t stream_index);

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }

    double  normal() { return normal_(engine_); }
    double  uniform() { return uniform_(engine_); }
    Complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    /// rows × cols matrix of independent complex normals, filled column by column.
    CMatrix ginibre(Index rows, Index cols);

  private:
    std::uint64_t                          seed_;
    std::uint64_t                          stream_index_;
    std::mt19937_64                        engine_;
    std::normal_distribution<double>       normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

class HaarUnitary {
  public:
    /// Throws invalid_argument unless ‖U†U − I‖_max ≤ 1e-10.
    explicit HaarUnitary(CMatrix matrix);
    [[nodiscard]] const CMatrix &matrix() const noexcept { return matrix_; }
    [[nodiscard]] Index          dim() const noexcept { return matrix_.rows(); }

  private:
    CMatrix matrix_;
};

class Isometry {
  public:
    /// M × d matrix with V†V = I_d within 1e-10.
    explicit Isometry(CMatrix matrix);

    /// W = (I_d over 0): the identity block stacked on zeros.
    static Isometry standard_embedding(Index rows, Index cols);
    /// First `cols` columns of a unitary, i.e. V = U W.
    static Isometry from_unitary(const CMatrix &unitary, Index cols);

    [[nodiscard]] const CMatrix &matrix() const noexcept { return matrix_; }
    [[nodiscard]] Index          rows() const noexcept { return matrix_.rows(); }
    [[nodiscard]] Index          cols() const noexcept { return matrix_.cols(); }

  private:
    CMatrix matrix_;
};

inline constexpr double kUnitaryTolerance = 1e-10;

/// Ginibre matrix, Householder QR, Q rescaled column-wise by the phases of
/// diag(R). Exactly Haar on U(M).
HaarUnitary haar_unitary(Index dim, RngStream &rng);

/// Thin-QR analogue of haar_unitary: distributed like the first d columns of a
/// Haar unitary, at O(M d²) cost.
Isometry haar_isometry(Index rows, Index cols, RngStream &rng);

PureState haar_pure_state(Index dim, RngStream &rng);

/// Σ_i √q_i |a_i⟩ ⊗ |b_i⟩ with q = (1/d_A + δ, 1/d_A − δ, 1/d_A, ...), {a_i} a Haar
/// basis of A and {b_i} the columns of haar_isometry(M, d_A). The reduced state
/// sits at trace distance exactly δ from I/d_A. Requires 0 ≤ δ < 1/(2 d_A).
BipartiteState perturbed_thermal_state(Index dim_a, Index dim_b, double delta, RngStream &rng);

/// A density matrix at trace distance exactly δ from I/d with a random
/// eigenbasis and random traceless perturbation shape. Requires δ < 1/(2d).
HermitianOperator random_density_at_distance(Index dim, double delta, RngStream &rng);

/// Random mixed state GG†/Tr(GG†) with G Ginibre.
HermitianOperator random_density(Index dim, RngStream &rng);

/// Skew-Hermitian (A − A†)/2 with A Ginibre, scaled to unit Frobenius norm.
CMatrix random_skew_hermitian(Index dim, RngStream &rng);

} // namespace design_lab
