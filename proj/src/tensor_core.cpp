#include "design_lab/tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace design_lab {

std::string_view to_string(ErrorKind kind) {
    switch(kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::resource_limit: return "resource_limit";
        case ErrorKind::out_of_theorem_domain: return "out_of_theorem_domain";
        case ErrorKind::rank_deficiency: return "rank_deficiency";
        case ErrorKind::invalid_curve: return "invalid_curve";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

std::size_t dimension_cap() {
    if(const char *env = std::getenv("DESIGN_LAB_CAP"); env != nullptr && *env != '\0') {
        char *end   = nullptr;
        auto  value = std::strtoull(env, &end, 10);
        if(end != nullptr && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
        fail(ErrorKind::invalid_argument, std::string("DESIGN_LAB_CAP must be a positive integer, got '") + env + "'");
    }
    return kDefaultDimensionCap;
}

Index checked_power(Index d, int k, std::size_t cap) {
    require(d >= 1, ErrorKind::invalid_argument, "dimension must be positive");
    require(k >= 1, ErrorKind::invalid_argument, "tensor power k must be >= 1");
    std::size_t result = 1;
    for(int i = 0; i < k; ++i) {
        if(result > cap / static_cast<std::size_t>(d)) {
            fail(ErrorKind::resource_limit,
                 "d^k = " + std::to_string(d) + "^" + std::to_string(k) + " exceeds the dimension cap " + std::to_string(cap));
        }
        result *= static_cast<std::size_t>(d);
    }
    return static_cast<Index>(result);
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    require(amplitudes_.size() >= 1, ErrorKind::invalid_argument, "pure state must have dimension >= 1");
    const double norm = amplitudes_.norm();
    if(std::abs(norm - 1.0) > kNormTolerance)
        fail(ErrorKind::invalid_argument, "pure state is not normalized (norm = " + std::to_string(norm) + ")");
}

PureState PureState::normalized(const CVector &v) {
    const double norm = v.norm();
    require(norm > 0.0, ErrorKind::invalid_argument, "cannot normalize the zero vector");
    return PureState(v / norm);
}

PureState PureState::basis(Index dim, Index i) {
    require(i >= 0 && i < dim, ErrorKind::invalid_argument, "basis index out of range");
    CVector v = CVector::Zero(dim);
    v(i)      = 1.0;
    return PureState(std::move(v));
}

// ---------------------------------------------------------------------------
// HermitianOperator

namespace {
    double hermiticity_defect(const CMatrix &m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }
} // namespace

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols() && entries_.rows() >= 1, ErrorKind::invalid_argument,
            "Hermitian operator must be a nonempty square matrix");
    const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
    if(hermiticity_defect(entries_) > kHermitianTolerance * scale)
        fail(ErrorKind::invalid_argument, "operator is not Hermitian within tolerance");
}

HermitianOperator HermitianOperator::hermitian_part(const CMatrix &entries) {
    require(entries.rows() == entries.cols(), ErrorKind::invalid_argument, "Hermitian part requires a square matrix");
    CMatrix h = 0.5 * (entries + entries.adjoint());
    return HermitianOperator(std::move(h));
}

HermitianOperator HermitianOperator::identity(Index dim) { return HermitianOperator(CMatrix::Identity(dim, dim)); }

HermitianOperator HermitianOperator::maximally_mixed(Index dim) {
    return HermitianOperator(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

HermitianOperator HermitianOperator::projector(const PureState &psi) { return HermitianOperator::hermitian_part(psi.projector()); }

RVector HermitianOperator::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double HermitianOperator::min_eigenvalue() const { return eigenvalues().minCoeff(); }

// ---------------------------------------------------------------------------
// BipartiteState

BipartiteState::BipartiteState(CMatrix coefficients) : coefficients_(std::move(coefficients)) {
    require(coefficients_.rows() >= 1 && coefficients_.cols() >= 1, ErrorKind::invalid_argument,
            "bipartite state needs positive dimensions");
    const double norm = coefficients_.norm();
    if(std::abs(norm - 1.0) > kNormTolerance)
        fail(ErrorKind::invalid_argument, "bipartite state is not normalized (Frobenius norm = " + std::to_string(norm) + ")");
}

BipartiteState BipartiteState::from_vector(const CVector &psi, Index dim_a, Index dim_b) {
    require(psi.size() == dim_a * dim_b, ErrorKind::invalid_argument, "state vector length does not match d_A * M");
    CMatrix c(dim_a, dim_b);
    for(Index i = 0; i < dim_a; ++i)
        for(Index z = 0; z < dim_b; ++z) c(i, z) = psi(i * dim_b + z);
    return BipartiteState(std::move(c));
}

CVector BipartiteState::to_vector() const {
    CVector psi(dim_a() * dim_b());
    for(Index i = 0; i < dim_a(); ++i)
        for(Index z = 0; z < dim_b(); ++z) psi(i * dim_b() + z) = coefficients_(i, z);
    return psi;
}

CMatrix SchmidtDecomposition::reassemble() const {
    CMatrix c = CMatrix::Zero(left_basis.rows(), right_basis.rows());
    for(Index i = 0; i < weights.size(); ++i) c += std::sqrt(weights(i)) * left_basis.col(i) * right_basis.col(i).transpose();
    return c;
}

// ---------------------------------------------------------------------------
// Distances

double trace_norm_hermitian(const CMatrix &h) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    double                                 sum = 0.0;
    for(double lambda : solver.eigenvalues())
        if(std::abs(lambda) >= kEigenvalueCutoff) sum += std::abs(lambda);
    return sum;
}

double trace_distance(const HermitianOperator &a, const HermitianOperator &b) {
    require(a.dim() == b.dim(), ErrorKind::invalid_argument,
            "trace_distance: dimension mismatch (" + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    return 0.5 * trace_norm_hermitian(a.matrix() - b.matrix());
}

double fidelity(const PureState &psi, const PureState &phi) {
    require(psi.dim() == phi.dim(), ErrorKind::invalid_argument, "fidelity: dimension mismatch");
    return std::norm(psi.amplitudes().dot(phi.amplitudes()));
}

double pure_state_distance(const PureState &psi, const PureState &phi) {
    require(psi.dim() == phi.dim(), ErrorKind::invalid_argument, "pure_state_distance: dimension mismatch");
    // 1 − |c|² = (1 − |c|)(1 + |c|) with 1 − |c| = ‖ψ − e^{iθ}φ‖²/2; no cancellation near c = 1.
    const Complex c     = psi.amplitudes().dot(phi.amplitudes());
    const double  mag   = std::abs(c);
    const Complex phase = mag > 0.0 ? std::conj(c) / mag : Complex(1.0, 0.0);
    const double  gap   = 0.5 * (psi.amplitudes() - phase * phi.amplitudes()).squaredNorm();
    return std::sqrt(std::max(0.0, gap * (1.0 + mag)));
}

// ---------------------------------------------------------------------------
// Partial traces

HermitianOperator partial_trace(const BipartiteState &state, Subsystem keep) {
    const CMatrix &c = state.coefficients();
    if(keep == Subsystem::A) return HermitianOperator::hermitian_part(c * c.adjoint());
    // ⟨z|ρ_Ā|z'⟩ = Σ_i C(i,z) conj(C(i,z')), i.e. (C†C)^T
    return HermitianOperator::hermitian_part((c.adjoint() * c).transpose());
}

CMatrix partial_trace_all_but(const CMatrix &op, Index d, int k, int slot) {
    require(k >= 1, ErrorKind::invalid_argument, "partial_trace_all_but: k must be >= 1");
    require(slot >= 1 && slot <= k, ErrorKind::invalid_argument,
            "partial_trace_all_but: slot " + std::to_string(slot) + " outside 1.." + std::to_string(k));
    const Index dim = checked_power(d, k, std::numeric_limits<std::size_t>::max());
    require(op.rows() == dim && op.cols() == dim, ErrorKind::invalid_argument,
            "partial_trace_all_but: operator dimension is not d^k for d = " + std::to_string(d) + ", k = " + std::to_string(k));

    Index after = 1; // d^(k - slot): stride of the kept slot
    for(int s = slot; s < k; ++s) after *= d;
    const Index others = dim / d;

    CMatrix out = CMatrix::Zero(d, d);
    for(Index r = 0; r < others; ++r) {
        const Index low  = r % after;
        const Index high = r / after;
        const Index base = high * after * d + low;
        for(Index a = 0; a < d; ++a)
            for(Index b = 0; b < d; ++b) out(a, b) += op(base + a * after, base + b * after);
    }
    return out;
}

HermitianOperator partial_trace_all_but(const HermitianOperator &op, Index d, int k, int slot) {
    return HermitianOperator::hermitian_part(partial_trace_all_but(op.matrix(), d, k, slot));
}

// ---------------------------------------------------------------------------
// Schmidt decomposition

SchmidtDecomposition schmidt_decompose(const BipartiteState &state) {
    const CMatrix &c     = state.coefficients();
    const Index    dim_a = c.rows();
    const Index    dim_b = c.cols();
    require(dim_a <= dim_b, ErrorKind::invalid_argument, "schmidt_decompose requires d_A <= M");

    Eigen::JacobiSVD<CMatrix> svd(c, Eigen::ComputeFullU | Eigen::ComputeThinV);

    SchmidtDecomposition out;
    out.weights    = svd.singularValues().array().square();
    out.left_basis = svd.matrixU();
    // C = Σ s_i u_i v_i†, so the A ⊗ Ā ket partner of u_i is conj(v_i).
    out.right_basis = svd.matrixV().conjugate();

    std::vector<Index> kept;
    for(Index i = 0; i < dim_a; ++i)
        if(out.weights(i) >= kEigenvalueCutoff) kept.push_back(i);

    if(static_cast<Index>(kept.size()) < dim_a) {
        CMatrix basis(dim_b, dim_a);
        Index   filled = 0;
        for(Index i : kept) basis.col(filled++) = out.right_basis.col(i);
        for(Index e = 0; e < dim_b && filled < dim_a; ++e) {
            CVector v = CVector::Unit(dim_b, e);
            for(Index j = 0; j < filled; ++j) v -= basis.col(j) * basis.col(j).dot(v);
            // second pass keeps the completion orthonormal to machine precision
            for(Index j = 0; j < filled; ++j) v -= basis.col(j) * basis.col(j).dot(v);
            const double norm = v.norm();
            if(norm > 1e-6) basis.col(filled++) = v / norm;
        }
        for(Index i = 0, slot = static_cast<Index>(kept.size()); i < dim_a; ++i) {
            if(out.weights(i) < kEigenvalueCutoff) {
                out.right_basis.col(i) = basis.col(slot++);
                out.weights(i)         = std::max(out.weights(i), 0.0);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tensor products

CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for(Index i = 0; i < a.rows(); ++i)
        for(Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVector kron(const CVector &a, const CVector &b) {
    CVector out(a.size() * b.size());
    for(Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CMatrix kron_power(const CMatrix &op, int k, std::size_t cap) {
    if(k == 0) return CMatrix::Identity(1, 1);
    checked_power(std::max(op.rows(), op.cols()), k, cap);
    CMatrix out = op;
    for(int i = 1; i < k; ++i) out = kron(out, op);
    return out;
}

CVector kron_power(const CVector &v, int k, std::size_t cap) {
    if(k == 0) return CVector::Ones(1);
    checked_power(v.size(), k, cap);
    CVector out = v;
    for(int i = 1; i < k; ++i) out = kron(out, v);
    return out;
}

PureState kron_power(const PureState &psi, int k) { return PureState::normalized(kron_power(psi.amplitudes(), k)); }

HermitianOperator kron_power(const HermitianOperator &op, int k) {
    return HermitianOperator::hermitian_part(kron_power(op.matrix(), k));
}

// ---------------------------------------------------------------------------
// Operator basis

OperatorBasis hermitian_operator_basis(Index d) {
    require(d >= 1, ErrorKind::invalid_argument, "operator basis dimension must be >= 1");
    OperatorBasis basis;
    basis.dim = d;
    basis.elements.reserve(static_cast<std::size_t>(d * d));
    basis.elements.push_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));

    const double   inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Complex  i_unit(0.0, 1.0);
    for(Index i = 0; i < d; ++i) {
        for(Index j = i + 1; j < d; ++j) {
            CMatrix sym = CMatrix::Zero(d, d);
            sym(i, j) = sym(j, i) = inv_sqrt2;
            basis.elements.push_back(std::move(sym));

            CMatrix anti = CMatrix::Zero(d, d);
            anti(i, j)   = i_unit * inv_sqrt2;
            anti(j, i)   = -i_unit * inv_sqrt2;
            basis.elements.push_back(std::move(anti));
        }
    }
    for(Index l = 1; l < d; ++l) {
        const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
        CMatrix      diag = CMatrix::Zero(d, d);
        for(Index j = 0; j < l; ++j) diag(j, j) = norm;
        diag(l, l) = -static_cast<double>(l) * norm;
        basis.elements.push_back(std::move(diag));
    }
    return basis;
}

// ---------------------------------------------------------------------------

CMatrix psd_sqrt(const HermitianOperator &rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix());
    RVector                                roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().adjoint();
}

CMatrix exp_skew_hermitian(const CMatrix &g, double t) {
    require(g.rows() == g.cols(), ErrorKind::invalid_argument, "exp_skew_hermitian: matrix must be square");
    // e^{tG} = e^{−it(iG)} with iG Hermitian.
    const CMatrix                          h = Complex(0.0, 1.0) * g;
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h + h.adjoint()));
    const CVector phases = (Complex(0.0, -t) * solver.eigenvalues().cast<Complex>()).array().exp();
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

void require_density_matrix(const HermitianOperator &rho, double tol, const char *what) {
    if(std::abs(rho.trace() - 1.0) > tol) fail(ErrorKind::invalid_argument, std::string(what) + ": trace is not one");
    if(rho.min_eigenvalue() < -tol) fail(ErrorKind::invalid_argument, std::string(what) + ": operator is not positive semidefinite");
}

} // namespace design_lab
