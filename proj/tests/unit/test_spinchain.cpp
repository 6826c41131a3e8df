#include "design_lab/bounds.hpp"
#include "design_lab/spinchain.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace design_lab;
using test_support::expect_error;
using test_support::max_abs;

namespace {

SpinChainConfig small_chain(int n) {
    SpinChainConfig cfg;
    cfg.n_sites = n;
    cfg.times   = {0.0, 0.5, 1.0, 2.0, 4.0};
    return cfg;
}

} // namespace

TEST_CASE("classical Ising pair") {
    SpinChainConfig cfg = small_chain(2);
    cfg.h_x = cfg.h_z = 0.0;
    const Eigen::MatrixXd h = build_hamiltonian_real(cfg);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
    expected.diagonal() << 1.0, -1.0, -1.0, 1.0;
    CHECK((h - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-site fields act on the right tensor factor") {
    SpinChainConfig cfg = small_chain(2);
    cfg.j   = 0.0;
    cfg.h_x = 1.0;
    cfg.h_z = 0.0;
    const CMatrix h = build_hamiltonian_real(cfg).cast<Complex>();
    CMatrix       x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    const CMatrix id = CMatrix::Identity(2, 2);
    CHECK(max_abs(h - kron(x, id) - kron(id, x)) == 0.0);
}

TEST_CASE("periodic boundary adds the wrap-around bond") {
    SpinChainConfig open = small_chain(3);
    SpinChainConfig ring = open;
    ring.boundary        = Boundary::periodic;
    const Eigen::MatrixXd diff = build_hamiltonian_real(ring) - build_hamiltonian_real(open);
    // J Z_3 Z_1 is diagonal with sign (−1)^{b_1 + b_3}.
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
    for(int s = 0; s < 8; ++s) expected(s, s) = open.j * (((s >> 2) ^ s) & 1 ? -1.0 : 1.0);
    CHECK((diff - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(boundary_from_string(to_string(Boundary::periodic)) == Boundary::periodic);
    expect_error(ErrorKind::invalid_argument, [] { boundary_from_string("twisted"); });
}

TEST_CASE("Hamiltonian is Hermitian and real") {
    const SpinChainConfig cfg = small_chain(5);
    const auto            h   = build_hamiltonian(cfg);
    CHECK(max_abs(h.matrix() - h.matrix().adjoint()) < 1e-12);
    CHECK(h.matrix().imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("product initial states") {
    SpinChainConfig cfg = small_chain(3);
    cfg.initial_state   = "0";
    CHECK(std::abs(initial_product_state(cfg).amplitudes()(0)) == doctest::Approx(1.0));
    cfg.initial_state = "1,0,1";
    CHECK(std::abs(initial_product_state(cfg).amplitudes()(5)) == doctest::Approx(1.0));
    cfg.initial_state = "+";
    CHECK((initial_product_state(cfg).amplitudes().cwiseAbs2().array() - 0.125).abs().maxCoeff() < 1e-15);
    cfg.initial_state = "+y";
    const CVector y = initial_product_state(cfg).amplitudes();
    CHECK(std::abs(y(7) - std::pow(Complex(0.0, 1.0), 3) / std::pow(2.0, 1.5)) < 1e-15);
    cfg.initial_state = "0,1";
    expect_error(ErrorKind::invalid_argument, [&] { initial_product_state(cfg); });
    cfg.initial_state = "z";
    expect_error(ErrorKind::invalid_argument, [&] { initial_product_state(cfg); });
}

TEST_CASE("time evolution") {
    const SpinChainConfig    cfg = small_chain(6);
    const Eigen::MatrixXd    h   = build_hamiltonian_real(cfg);
    const SpectralPropagator prop(h);
    const PureState          psi0 = initial_product_state(cfg);
    CHECK(max_abs(prop.evolve(psi0, 0.0).amplitudes() - psi0.amplitudes()) < 1e-13);

    // An eigenstate only picks up a phase.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const PureState eigen(es.eigenvectors().col(3).cast<Complex>());
    CHECK(fidelity(prop.evolve(eigen, 3.7), eigen) == doctest::Approx(1.0).epsilon(1e-12));

    const double e0 = energy(psi0, h);
    for(double t : {0.5, 1.0, 5.0, 20.0}) {
        const PureState psi = prop.evolve(psi0, t);
        CHECK(std::abs(energy(psi, h) - e0) < 1e-9);
        CHECK(std::abs(psi.amplitudes().norm() - 1.0) < 1e-10);
    }

    // The real and complex eigensolver paths agree; so does the one-shot evolve.
    const SpectralPropagator complex_prop(build_hamiltonian(cfg));
    CHECK(max_abs(complex_prop.propagate(psi0.amplitudes(), 2.0) - prop.propagate(psi0.amplitudes(), 2.0)) < 1e-11);
    CHECK(max_abs(evolve(psi0, build_hamiltonian(cfg), 2.0).amplitudes() - prop.propagate(psi0.amplitudes(), 2.0)) < 1e-11);
}

TEST_CASE("evolution against a Taylor-series propagator") {
    const SpinChainConfig cfg = small_chain(3);
    const CMatrix         h   = build_hamiltonian(cfg).matrix();
    const double          t   = 0.3;
    CMatrix               u = CMatrix::Identity(8, 8), term = u;
    for(int n = 1; n < 40; ++n) {
        term = term * (Complex(0.0, -t) * h) / double(n);
        u += term;
    }
    const PureState psi0 = initial_product_state(cfg);
    CHECK(max_abs(SpectralPropagator(build_hamiltonian_real(cfg)).propagate(psi0.amplitudes(), t) - u * psi0.amplitudes()) < 1e-12);
}

TEST_CASE("quantiles use linear interpolation") {
    CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.9) == doctest::Approx(4.6));
    CHECK(quantile({7.0}, 0.9) == 7.0);
    expect_error(ErrorKind::invalid_argument, [] { quantile({}, 0.5); });
}

TEST_CASE("reference eps_prime for the demo chain") {
    const double eps = reference_eps_prime(2048, 2, 2, 0.1);
    CHECK(eps == doctest::Approx(0.9007).epsilon(1e-12));
    CHECK(design_threshold_m(2, 2, eps, 0.1) <= 2048);
    CHECK(design_threshold_m(2, 2, eps - 1e-4, 0.1) > 2048);
}

TEST_CASE("design error trace on a small chain") {
    const SpinChainConfig cfg = small_chain(6);
    TraceOptions          opts;
    opts.n_random_bases = 8;
    opts.seed           = 61;
    opts.eps_prime_ref  = 0.9;
    const auto trace    = design_error_trace(cfg, opts);
    REQUIRE(trace.slices.size() == cfg.times.size());
    CHECK(trace.d_a == 2);
    CHECK(trace.m == 32);

    // Product start: ρ_A is pure.
    CHECK(trace.slices[0].delta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isnan(trace.slices[0].theorem_ceiling));
    CHECK(trace.slices[0].fraction_within_ceiling == 0.0);
    for(const auto &s : trace.slices) {
        CHECK(s.norm_defect < 1e-10);
        CHECK(s.probability_defect < 1e-10);
        CHECK(s.design_error_comp >= 0.0);
        CHECK(s.design_error_comp <= 1.0);
        CHECK(s.q10 <= s.q50);
        CHECK(s.q50 <= s.q90);
        CHECK(s.random_errors.size() == 8);
    }
    for(double e : trace.energies) CHECK(std::abs(e - trace.energies.front()) < 1e-9);

    opts.workers = 3;
    const auto again = design_error_trace(cfg, opts);
    for(std::size_t s = 0; s < trace.slices.size(); ++s) CHECK(again.slices[s].random_errors == trace.slices[s].random_errors);
}

TEST_CASE("k = 1 computational error is the distance from maximal mixedness") {
    const SpinChainConfig cfg = small_chain(5);
    TraceOptions          opts;
    opts.k              = 1;
    opts.n_random_bases = 2;
    opts.eps_prime_ref  = 0.5;
    for(const auto &s : design_error_trace(cfg, opts).slices) CHECK(s.design_error_comp == doctest::Approx(s.delta).epsilon(1e-10));
}

TEST_CASE("spin chain validation") {
    SpinChainConfig cfg = small_chain(1);
    expect_error(ErrorKind::invalid_argument, [&] { validate(cfg); });
    cfg.n_sites = 13;
    expect_error(ErrorKind::resource_limit, [&] { validate(cfg); });
    cfg.n_sites = 4;
    cfg.cut     = 3;
    expect_error(ErrorKind::invalid_argument, [&] { validate(cfg); });
    cfg.cut   = 2;
    cfg.times = {0.0, 2.0, 1.0};
    expect_error(ErrorKind::invalid_argument, [&] { validate(cfg); });
    cfg.times = {-1.0};
    expect_error(ErrorKind::invalid_argument, [&] { validate(cfg); });
    cfg.times = {0.0};
    validate(cfg);
}
