#include "design_lab/gradient.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace design_lab;
using test_support::expect_error;
using test_support::max_abs;

namespace {

GradientProbe probe_at(Index m, Index d, int k, std::uint64_t stream) {
    RngStream rng(51, stream);
    return GradientProbe::make(haar_unitary(m, rng), d, k);
}

/// Σ_z [P_z W B_z W† − W B_z W† P_z] at U = I, with B_z assembled term by term
/// from its slot-wise definition.
CMatrix literal_gradient_at_identity(Index m, Index d, const CMatrix &x, int k) {
    const CMatrix w   = Isometry::standard_embedding(m, d).matrix();
    const CMatrix id  = CMatrix::Identity(d, d);
    CMatrix       out = CMatrix::Zero(m, m);
    for(Index z = 0; z < d; ++z) {
        CMatrix r = CMatrix::Zero(d, d);
        r(z, z)   = 1.0;
        CMatrix b = CMatrix::Zero(d, d);
        for(int l = 0; l < k; ++l) b += partial_trace_all_but(CMatrix(x * kron(kron(kron_power(r, l), id), kron_power(r, k - l - 1))), d, k, l + 1) / double(d);
        // ∇p_z carries (W W† U†|z⟩⟨z| − |z⟩⟨z| U W W†)/d_A.
        b -= (k - 1) * (x * kron_power(r, k)).trace().real() * id / double(d);
        CMatrix p = CMatrix::Zero(m, m);
        p(z, z)   = 1.0;
        out += p * w * b * w.adjoint() - w * b * w.adjoint() * p;
    }
    return out;
}

} // namespace

TEST_CASE("k = 1 gradients vanish") {
    const auto probe = probe_at(8, 2, 1, 0);
    for(std::size_t a = 0; a < probe.basis.elements.size(); ++a) CHECK(gradient_f_alpha(probe, a).norm() < 1e-13);
    CHECK(check_gradient_bound(probe).satisfied);
}

TEST_CASE("identity component has zero gradient") {
    for(int k : {2, 3}) {
        const auto probe = probe_at(8, 2, k, 1);
        CHECK(f_alpha(probe, 0) == doctest::Approx(1.0 / std::sqrt(std::pow(2.0, k))).epsilon(1e-12));
        CHECK(gradient_f_alpha(probe, 0).norm() < 1e-13);
    }
}

TEST_CASE("gradient matches finite differences") {
    RngStream rng(52, 0);
    for(auto [m, d, k] : {std::tuple<Index, Index, int>{4, 2, 2}, {8, 2, 3}, {9, 3, 2}}) {
        const auto probe = probe_at(m, d, k, static_cast<std::uint64_t>(m));
        for(std::size_t a = 1; a < probe.basis.elements.size(); a += 3) {
            const CMatrix g = random_skew_hermitian(m, rng);
            const auto    r = check_directional_derivative(probe, a, g, 1e-5);
            CHECK(r.satisfied);
            CHECK(r.observed_value <= 1e-6);
        }
    }
}

TEST_CASE("gradient is tangent to the unitary group") {
    const auto    probe = probe_at(8, 2, 2, 2);
    const CMatrix grad  = gradient_f_alpha(probe, 5);
    const CMatrix left  = grad * probe.u.matrix().adjoint();
    CHECK(max_abs(left + left.adjoint()) < 1e-13);
}

TEST_CASE("gradient agrees with the slot-wise formula at U = I") {
    for(auto [m, d, k] : {std::tuple<Index, Index, int>{4, 2, 2}, {8, 2, 3}, {6, 3, 2}}) {
        const auto probe = GradientProbe::make(HaarUnitary(CMatrix::Identity(m, m)), d, k);
        for(std::size_t a = 0; a < probe.basis.elements.size(); ++a)
            CHECK(max_abs(gradient_f_alpha(probe, a) - literal_gradient_at_identity(m, d, probe.basis.elements[a], k)) < 1e-13);
    }
}

TEST_CASE("gradient norms stay below the Lipschitz bound") {
    for(int k : {2, 3})
        for(int trial = 0; trial < 5; ++trial) {
            const auto r = check_gradient_bound(probe_at(8, 2, k, 100 + trial));
            CHECK(r.satisfied);
            CHECK(r.bound_value == lipschitz_bound(2, k));
        }
}

TEST_CASE("gradient probe limits") {
    RngStream rng(53, 0);
    expect_error(ErrorKind::resource_limit, [&] { GradientProbe::make(haar_unitary(65, rng), 2, 2); });
    expect_error(ErrorKind::invalid_argument, [&] { GradientProbe::make(haar_unitary(2, rng), 3, 2); });
    const auto probe = probe_at(4, 2, 2, 3);
    expect_error(ErrorKind::invalid_argument, [&] { gradient_f_alpha(probe, 16); });
}
