#include "design_lab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace design_lab {

std::string_view to_string(EnsembleSource source) {
    switch(source) {
        case EnsembleSource::projected: return "projected";
        case EnsembleSource::row: return "row";
        case EnsembleSource::deformed_row: return "deformed_row";
    }
    return "unknown";
}

EnsembleSource ensemble_source_from_string(std::string_view name) {
    if(name == "projected") return EnsembleSource::projected;
    if(name == "row") return EnsembleSource::row;
    if(name == "deformed_row") return EnsembleSource::deformed_row;
    fail(ErrorKind::invalid_argument, "unknown ensemble source '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// StateEnsemble

StateEnsemble::StateEnsemble(RVector probabilities, CMatrix states, std::vector<Index> outcomes, EnsembleSource source)
    : probabilities_(std::move(probabilities)), states_(std::move(states)), outcomes_(std::move(outcomes)), source_(source) {
    require(probabilities_.size() >= 1, ErrorKind::invalid_argument, "ensemble must have at least one member");
    require(states_.cols() == probabilities_.size(), ErrorKind::invalid_argument, "ensemble: one state per probability required");
    require(static_cast<Index>(outcomes_.size()) == probabilities_.size(), ErrorKind::invalid_argument,
            "ensemble: one outcome label per member required");
    require((probabilities_.array() > 0.0).all(), ErrorKind::invalid_argument, "ensemble probabilities must be positive");
    require(std::abs(probabilities_.sum() - 1.0) <= 1e-10, ErrorKind::invalid_argument, "ensemble probabilities must sum to one");
    const double worst = (states_.colwise().norm().array() - 1.0).abs().maxCoeff();
    require(worst <= 1e-10, ErrorKind::invalid_argument, "ensemble states must be normalized");
}

StateEnsemble StateEnsemble::from_unnormalized(const CMatrix &vectors, double scale, EnsembleSource source) {
    const RVector      weights = vectors.colwise().squaredNorm().transpose() * scale;
    std::vector<Index> kept;
    kept.reserve(static_cast<std::size_t>(weights.size()));
    for(Index z = 0; z < weights.size(); ++z)
        if(weights(z) >= kZeroProbability) kept.push_back(z);
    require(!kept.empty(), ErrorKind::invalid_argument, "ensemble has no outcome with nonzero probability");

    const Index n = static_cast<Index>(kept.size());
    RVector     p(n);
    CMatrix     states(vectors.rows(), n);
    for(Index j = 0; j < n; ++j) {
        const Index z = kept[static_cast<std::size_t>(j)];
        p(j)          = weights(z);
        states.col(j) = vectors.col(z) / vectors.col(z).norm();
    }
    const double total = p.sum();
    p /= total;
    StateEnsemble e(std::move(p), std::move(states), std::move(kept), source);
    e.renormalization_shift_ = std::abs(1.0 - total);
    return e;
}

HermitianOperator StateEnsemble::average_state() const {
    CMatrix weighted = states_ * probabilities_.cwiseSqrt().asDiagonal();
    return HermitianOperator::hermitian_part(weighted * weighted.adjoint());
}

// ---------------------------------------------------------------------------

MomentOperator::MomentOperator(HermitianOperator op, Index base_dim, int order) : op_(std::move(op)), base_dim_(base_dim), order_(order) {
    require(order >= 1, ErrorKind::invalid_argument, "moment operator order must be >= 1");
    require(op_.dim() == checked_power(base_dim, order, std::numeric_limits<std::size_t>::max()), ErrorKind::invalid_argument,
            "moment operator dimension must be d^k");
    require(std::abs(op_.trace() - 1.0) <= 1e-10, ErrorKind::invalid_argument, "moment operator must have unit trace");
}

// ---------------------------------------------------------------------------
// Ensemble constructions

StateEnsemble projected_ensemble(const BipartiteState &state, const MeasurementBasis &basis) {
    require(basis.dim() == state.dim_b(), ErrorKind::invalid_argument,
            "projected_ensemble: basis dimension " + std::to_string(basis.dim()) + " does not match M = " + std::to_string(state.dim_b()));
    // (1 ⊗ ⟨u_z|)Ψ = Σ_{i,z'} C(i,z') conj(U(z',z)) |i⟩, i.e. column z of C·conj(U)
    const CMatrix vectors = state.coefficients() * basis.matrix().conjugate();
    return StateEnsemble::from_unnormalized(vectors, 1.0, EnsembleSource::projected);
}

StateEnsemble row_ensemble(const Isometry &v) {
    return StateEnsemble::from_unnormalized(v.matrix().adjoint(), 1.0 / static_cast<double>(v.cols()), EnsembleSource::row);
}

StateEnsemble deformed_row_ensemble(const Isometry &v, const HermitianOperator &rho_a) {
    require(rho_a.dim() == v.cols(), ErrorKind::invalid_argument, "deformed_row_ensemble: rho_A dimension must equal d_A");
    require_density_matrix(rho_a, 1e-10, "deformed_row_ensemble");
    const CMatrix vectors = psd_sqrt(rho_a) * v.matrix().adjoint();
    return StateEnsemble::from_unnormalized(vectors, 1.0, EnsembleSource::deformed_row);
}

BipartiteState purification_from_isometry(const Isometry &v, const HermitianOperator &rho_a) {
    require(rho_a.dim() == v.cols(), ErrorKind::invalid_argument, "purification_from_isometry: rho_A dimension must equal d_A");
    require_density_matrix(rho_a, 1e-10, "purification_from_isometry");
    CMatrix c = psd_sqrt(rho_a) * v.matrix().adjoint();
    c /= c.norm();
    return BipartiteState(std::move(c));
}

StateEnsemble rotate_members(const StateEnsemble &e, const CMatrix &unitary) {
    require(unitary.rows() == e.dim() && unitary.cols() == e.dim(), ErrorKind::invalid_argument, "rotate_members: dimension mismatch");
    CMatrix states = unitary * e.states();
    for(Index z = 0; z < states.cols(); ++z) states.col(z).normalize();
    return StateEnsemble(e.probabilities(), std::move(states), e.outcomes(), e.source());
}

CMatrix embed_local_unitary(const CMatrix &local, Index dim) {
    require(local.rows() == local.cols() && local.rows() <= dim, ErrorKind::invalid_argument, "embed_local_unitary: bad dimensions");
    CMatrix out                                 = CMatrix::Identity(dim, dim);
    out.topLeftCorner(local.rows(), local.cols()) = local;
    return out;
}

// ---------------------------------------------------------------------------
// Moments

MomentOperator moment_operator(const StateEnsemble &e, int k) {
    const Index       d   = e.dim();
    const std::size_t cap = dimension_cap();
    const Index       dim = checked_power(d, k, cap);
    const Index n   = e.size();

    // Σ_z p_z |ψ_z^{⊗k}⟩⟨ψ_z^{⊗k}| = T T† with T's columns √p_z ψ_z^{⊗k}, in fixed chunks.
    constexpr Index chunk = 4096;
    CMatrix         acc   = CMatrix::Zero(dim, dim);
    CMatrix         t(dim, std::min(chunk, n));
    for(Index start = 0; start < n; start += chunk) {
        const Index width = std::min(chunk, n - start);
        for(Index j = 0; j < width; ++j) {
            const Index z = start + j;
            t.col(j)      = std::sqrt(e.probability(z)) * kron_power(CVector(e.states().col(z)), k, cap);
        }
        acc.noalias() += t.leftCols(width) * t.leftCols(width).adjoint();
    }
    return MomentOperator(HermitianOperator::hermitian_part(acc), d, k);
}

CMatrix symmetric_projector(Index d, int k) {
    const Index dim = checked_power(d, k, dimension_cap());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<Index> stride(static_cast<std::size_t>(k));
    for(int s = k - 1, w = 1; s >= 0; --s, w *= static_cast<int>(d)) stride[static_cast<std::size_t>(s)] = w;

    double           factorial = 1.0;
    for(int i = 2; i <= k; ++i) factorial *= i;

    CMatrix          p = CMatrix::Zero(dim, dim);
    std::vector<Index> digits(static_cast<std::size_t>(k));
    do {
        for(Index idx = 0; idx < dim; ++idx) {
            Index rest = idx;
            for(int s = 0; s < k; ++s) {
                digits[static_cast<std::size_t>(s)] = rest / stride[static_cast<std::size_t>(s)];
                rest %= stride[static_cast<std::size_t>(s)];
            }
            Index permuted = 0;
            for(int s = 0; s < k; ++s) permuted += digits[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] * stride[static_cast<std::size_t>(s)];
            p(permuted, idx) += 1.0 / factorial;
        }
    } while(std::next_permutation(perm.begin(), perm.end()));
    return p;
}

MomentOperator haar_moment_operator(Index d, int k) {
    // binom(d + k − 1, k)
    double sym_dim = 1.0;
    for(int i = 1; i <= k; ++i) sym_dim = sym_dim * static_cast<double>(d + k - i) / static_cast<double>(i);
    return MomentOperator(HermitianOperator::hermitian_part(symmetric_projector(d, k) / std::round(sym_dim)), d, k);
}

double design_distance(const StateEnsemble &e, const MomentOperator &haar) {
    require(haar.base_dim() == e.dim(), ErrorKind::invalid_argument, "design_distance: Haar moment has the wrong base dimension");
    return trace_distance(moment_operator(e, haar.order()).op(), haar.op());
}

double design_distance(const StateEnsemble &e, int k) { return design_distance(e, haar_moment_operator(e.dim(), k)); }

BipartiteState exact_thermal_companion(const BipartiteState &state) {
    const SchmidtDecomposition schmidt = schmidt_decompose(state);
    const double               smallest = schmidt.weights.minCoeff();
    if(smallest < 1e-12)
        fail(ErrorKind::rank_deficiency, "exact_thermal_companion: Schmidt rank below d_A (smallest weight " + std::to_string(smallest) + ")");
    const double d_a = static_cast<double>(state.dim_a());
    CMatrix      c   = schmidt.left_basis * schmidt.right_basis.transpose() / std::sqrt(d_a);
    c /= c.norm();
    return BipartiteState(std::move(c));
}

double symmetric_subspace_residual(const MomentOperator &m) {
    const CMatrix p = symmetric_projector(m.base_dim(), m.order());
    const CMatrix r = m.matrix() - p * m.matrix() * p;
    return trace_norm_hermitian(0.5 * (r + r.adjoint()));
}

} // namespace design_lab
