#include "design_lab/gradient.hpp"
#include "design_lab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace design_lab {

GradientProbe GradientProbe::make(HaarUnitary u, Index d_a, int k) {
    const Index m = u.dim();
    if(m > kGradientMaxM)
        fail(ErrorKind::resource_limit, "gradient diagnostics are limited to M <= 64, got M = " + std::to_string(m));
    require(d_a >= 1 && d_a <= m, ErrorKind::invalid_argument, "GradientProbe: need 1 <= d_A <= M");
    require(k >= 1, ErrorKind::invalid_argument, "GradientProbe: k must be >= 1");
    const Index dim = checked_power(d_a, k, dimension_cap());
    return GradientProbe{std::move(u), Isometry::standard_embedding(m, d_a), hermitian_operator_basis(dim), k};
}

namespace {

    const CMatrix &basis_element(const GradientProbe &probe, std::size_t alpha) {
        require(alpha < probe.basis.elements.size(), ErrorKind::invalid_argument,
                "operator basis index " + std::to_string(alpha) + " out of range");
        return probe.basis.elements[alpha];
    }

    void require_operator(const Isometry &w, const CMatrix &x, int k) {
        const Index dim = checked_power(w.cols(), k, dimension_cap());
        require(x.rows() == dim && x.cols() == dim, ErrorKind::invalid_argument, "X must be d_A^k x d_A^k");
    }

} // namespace

double f_operator(const CMatrix &u, const Isometry &w, const CMatrix &x, int k) {
    require_operator(w, x, k);
    const Isometry v(u * w.matrix());
    return (x * moment_operator(row_ensemble(v), k).matrix()).trace().real();
}

double f_alpha(const GradientProbe &probe, std::size_t alpha) {
    return f_operator(probe.u.matrix(), probe.w, basis_element(probe, alpha), probe.k);
}

CMatrix gradient_for_operator(const CMatrix &u, const Isometry &w, const CMatrix &x, int k) {
    require_operator(w, x, k);
    require(u.rows() == w.rows() && u.cols() == w.rows(), ErrorKind::invalid_argument, "U must be M x M");
    const Index   m = u.rows();
    const Index   d = w.cols();
    const double  dd = static_cast<double>(d);
    const CMatrix v  = u * w.matrix();
    const CMatrix id = CMatrix::Identity(d, d);

    CMatrix s = CMatrix::Zero(m, m);
    for(Index z = 0; z < m; ++z) {
        const CVector row  = v.row(z).adjoint(); // V†|z⟩
        const double  norm2 = row.squaredNorm();
        if(norm2 / dd < kZeroProbability) continue; // ⟨z|V vanishes, so does row z of S
        const CMatrix r = row * row.adjoint() / norm2;

        CMatrix b = CMatrix::Zero(d, d);
        for(int l = 0; l < k; ++l) {
            const CMatrix slotted = kron(kron(kron_power(r, l), id), kron_power(r, k - l - 1));
            b += partial_trace_all_but(CMatrix(x * slotted), d, k, l + 1);
        }
        if(k > 1) b -= (k - 1) * (x * kron_power(r, k)).trace().real() * id;
        b /= dd;
        s.row(z) = v.row(z) * b * v.adjoint();
    }
    return (s - s.adjoint()) * u;
}

CMatrix gradient_f_alpha(const GradientProbe &probe, std::size_t alpha) {
    return gradient_for_operator(probe.u.matrix(), probe.w, basis_element(probe, alpha), probe.k);
}

double directional_derivative_fd(const GradientProbe &probe, std::size_t alpha, const CMatrix &g, double h) {
    require(g.rows() == probe.m() && g.cols() == probe.m(), ErrorKind::invalid_argument, "direction must be M x M");
    require(h > 0.0, ErrorKind::invalid_argument, "finite-difference step must be positive");
    const CMatrix &x  = basis_element(probe, alpha);
    const double   up = f_operator(exp_skew_hermitian(g, h) * probe.u.matrix(), probe.w, x, probe.k);
    const double   dn = f_operator(exp_skew_hermitian(g, -h) * probe.u.matrix(), probe.w, x, probe.k);
    return (up - dn) / (2.0 * h);
}

BoundReport check_directional_derivative(const GradientProbe &probe, std::size_t alpha, const CMatrix &g, double h) {
    const CMatrix grad     = gradient_f_alpha(probe, alpha);
    const double  analytic = (grad.adjoint() * g * probe.u.matrix()).trace().real();
    const double  numeric  = directional_derivative_fd(probe, alpha, g, h);
    BoundContext  ctx;
    ctx.d_a = probe.d_a();
    ctx.k   = probe.k;
    ctx.m   = probe.m();
    return BoundReport::make("directional_derivative", 0.0, std::abs(analytic - numeric), 1e-6, ctx);
}

BoundReport check_gradient_bound(const GradientProbe &probe) {
    double worst = 0.0;
    for(std::size_t alpha = 0; alpha < probe.basis.elements.size(); ++alpha) worst = std::max(worst, gradient_f_alpha(probe, alpha).norm());
    BoundContext ctx;
    ctx.d_a = probe.d_a();
    ctx.k   = probe.k;
    ctx.m   = probe.m();
    return BoundReport::make("gradient_norm", lipschitz_bound(probe.d_a(), probe.k), worst, 1e-9, ctx);
}

} // namespace design_lab
