#include "design_lab/sampling.hpp"

#include <cmath>
#include <string>

namespace design_lab {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index) : seed_(seed), stream_index_(stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32)};
    engine_.seed(seq);
}

CMatrix RngStream::ginibre(Index rows, Index cols) {
    CMatrix g(rows, cols);
    for(Index j = 0; j < cols; ++j)
        for(Index i = 0; i < rows; ++i) g(i, j) = complex_normal();
    return g;
}

HaarUnitary::HaarUnitary(CMatrix matrix) : matrix_(std::move(matrix)) {
    require(matrix_.rows() == matrix_.cols() && matrix_.rows() >= 1, ErrorKind::invalid_argument, "unitary must be square");
    const Index n      = matrix_.rows();
    double      defect = (matrix_.adjoint() * matrix_ - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    require(defect <= kUnitaryTolerance, ErrorKind::invalid_argument, "matrix is not unitary within 1e-10");
}

Isometry::Isometry(CMatrix matrix) : matrix_(std::move(matrix)) {
    require(matrix_.cols() >= 1 && matrix_.rows() >= matrix_.cols(), ErrorKind::invalid_argument,
            "isometry must be M x d with 1 <= d <= M");
    const Index d      = matrix_.cols();
    double      defect = (matrix_.adjoint() * matrix_ - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    require(defect <= kUnitaryTolerance, ErrorKind::invalid_argument, "matrix is not an isometry within 1e-10");
}

Isometry Isometry::standard_embedding(Index rows, Index cols) { return Isometry(CMatrix::Identity(rows, cols)); }

Isometry Isometry::from_unitary(const CMatrix &unitary, Index cols) {
    require(cols >= 1 && cols <= unitary.cols(), ErrorKind::invalid_argument, "isometry width exceeds the unitary");
    return Isometry(unitary.leftCols(cols));
}

namespace {

    /// Thin Q of a Householder QR with columns multiplied by diag(R)/|diag(R)|.
    CMatrix phase_fixed_q(const CMatrix &g) {
        const Index                     rows = g.rows();
        const Index                     cols = g.cols();
        Eigen::HouseholderQR<CMatrix>   qr(g);
        CMatrix                         q  = qr.householderQ() * CMatrix::Identity(rows, cols);
        const CMatrix                  &rq = qr.matrixQR();
        for(Index j = 0; j < cols; ++j) {
            const Complex r   = rq(j, j);
            const double  mag = std::abs(r);
            const Complex phase = mag > 0.0 ? r / mag : Complex(1.0, 0.0);
            q.col(j) *= phase;
        }
        return q;
    }

} // namespace

HaarUnitary haar_unitary(Index dim, RngStream &rng) {
    require(dim >= 1, ErrorKind::invalid_argument, "haar_unitary: dimension must be >= 1");
    return HaarUnitary(phase_fixed_q(rng.ginibre(dim, dim)));
}

Isometry haar_isometry(Index rows, Index cols, RngStream &rng) {
    require(cols >= 1 && cols <= rows, ErrorKind::invalid_argument,
            "haar_isometry: need 1 <= d <= M, got M = " + std::to_string(rows) + ", d = " + std::to_string(cols));
    return Isometry(phase_fixed_q(rng.ginibre(rows, cols)));
}

PureState haar_pure_state(Index dim, RngStream &rng) {
    require(dim >= 1, ErrorKind::invalid_argument, "haar_pure_state: dimension must be >= 1");
    return PureState::normalized(rng.ginibre(dim, 1).col(0));
}

BipartiteState perturbed_thermal_state(Index dim_a, Index dim_b, double delta, RngStream &rng) {
    require(dim_a >= 1 && dim_a <= dim_b, ErrorKind::invalid_argument, "perturbed_thermal_state: need 1 <= d_A <= M");
    require(delta >= 0.0, ErrorKind::invalid_argument, "perturbed_thermal_state: delta must be nonnegative");
    if(delta >= 1.0 / (2.0 * static_cast<double>(dim_a)))
        fail(ErrorKind::out_of_theorem_domain, "perturbed_thermal_state: delta = " + std::to_string(delta) + " violates delta < 1/(2 d_A)");
    if(delta > 0.0 && dim_a < 2) fail(ErrorKind::out_of_theorem_domain, "perturbed_thermal_state: d_A = 1 admits only delta = 0");

    const double base = 1.0 / static_cast<double>(dim_a);
    RVector      roots(dim_a);
    for(Index i = 0; i < dim_a; ++i) roots(i) = base;
    if(dim_a >= 2) {
        roots(0) = base + delta;
        roots(1) = base - delta;
    }
    roots = roots.cwiseSqrt();

    const HaarUnitary a = haar_unitary(dim_a, rng);
    const Isometry    b = haar_isometry(dim_b, dim_a, rng);
    CMatrix           c = a.matrix() * roots.asDiagonal() * b.matrix().transpose();
    c /= c.norm(); // removes the O(1e-16) drift of the isometry columns
    return BipartiteState(std::move(c));
}

HermitianOperator random_density_at_distance(Index dim, double delta, RngStream &rng) {
    require(dim >= 1, ErrorKind::invalid_argument, "random_density_at_distance: dimension must be >= 1");
    require(delta >= 0.0, ErrorKind::invalid_argument, "random_density_at_distance: delta must be nonnegative");
    if(delta >= 1.0 / (2.0 * static_cast<double>(dim)))
        fail(ErrorKind::out_of_theorem_domain, "random_density_at_distance: delta violates delta < 1/(2d)");
    const CMatrix mixed = CMatrix::Identity(dim, dim) / static_cast<double>(dim);
    if(delta == 0.0 || dim == 1) {
        require(delta == 0.0, ErrorKind::out_of_theorem_domain, "d = 1 admits only delta = 0");
        return HermitianOperator(mixed);
    }
    CMatrix g = rng.ginibre(dim, dim);
    CMatrix h = 0.5 * (g + g.adjoint());
    h -= CMatrix::Identity(dim, dim) * (h.trace() / static_cast<double>(dim));
    const double half_norm = 0.5 * trace_norm_hermitian(h);
    // Negative eigenvalues of h sum to −‖h‖₁/2, so δ h/(‖h‖₁/2) ≥ −δ > −1/(2d).
    CMatrix rho = mixed + (delta / half_norm) * h;
    return HermitianOperator::hermitian_part(rho);
}

HermitianOperator random_density(Index dim, RngStream &rng) {
    CMatrix g   = rng.ginibre(dim, dim);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return HermitianOperator::hermitian_part(rho);
}

CMatrix random_skew_hermitian(Index dim, RngStream &rng) {
    CMatrix a = rng.ginibre(dim, dim);
    CMatrix g = 0.5 * (a - a.adjoint());
    return g / g.norm();
}

} // namespace design_lab
