#include "design_lab/bounds.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace design_lab;
using test_support::expect_error;
using test_support::max_abs;

namespace {

DensityEnsemble random_family(Index d, std::size_t n, RngStream &rng) {
    DensityEnsemble e;
    RVector         w(static_cast<Index>(n));
    for(Index i = 0; i < w.size(); ++i) w(i) = rng.uniform() + 0.05;
    w /= w.sum();
    for(std::size_t i = 0; i < n; ++i) {
        e.probabilities.push_back(w(static_cast<Index>(i)));
        // Mix pure and mixed members.
        e.densities.push_back(i % 2 ? random_density(d, rng) : HermitianOperator::projector(haar_pure_state(d, rng)));
    }
    return e;
}

} // namespace

TEST_CASE("continuity bound values") {
    CHECK(continuity_bound(2, 2, 0.0) == 0.0);
    CHECK(continuity_bound(2, 2, 0.1) == doctest::Approx(4.0 * std::sqrt(0.2) + 0.2).epsilon(1e-14));
    CHECK(continuity_bound(2, 2, 0.1) == doctest::Approx(1.98885).epsilon(1e-5));
    CHECK(continuity_bound(2, 1, 0.01) == doctest::Approx(0.30284).epsilon(1e-5));
    expect_error(ErrorKind::out_of_theorem_domain, [] { continuity_bound(2, 2, 0.25); });
    expect_error(ErrorKind::out_of_theorem_domain, [] { continuity_bound(2, 2, -1e-3); });
}

TEST_CASE("design threshold values") {
    CHECK(design_threshold_m(2, 1, 0.1, 0.01) == 5348);
    CHECK(design_threshold_m(2, 2, 0.3, 0.1) == 18459);
    expect_error(ErrorKind::invalid_argument, [] { design_threshold_m(2, 2, 0.0, 0.1); });
    expect_error(ErrorKind::invalid_argument, [] { design_threshold_m(2, 2, 0.3, 1.0); });
}

TEST_CASE("design threshold monotonicity") {
    CHECK(design_threshold_m(2, 2, 0.3, 0.01) > design_threshold_m(2, 2, 0.3, 0.1));
    CHECK(design_threshold_m(2, 3, 0.3, 0.1) > design_threshold_m(2, 2, 0.3, 0.1));
    CHECK(design_threshold_m(3, 2, 0.3, 0.1) > design_threshold_m(2, 2, 0.3, 0.1));
    CHECK(design_threshold_m(2, 2, 0.2, 0.1) > design_threshold_m(2, 2, 0.3, 0.1));
}

TEST_CASE("theorem epsilon values") {
    CHECK(theorem_epsilon(0.3, 2, 2, 0.0) == 0.3);
    CHECK(theorem_epsilon(0.3, 2, 2, 1e-4) == doctest::Approx(0.35677).epsilon(1e-5));
    CHECK(theorem_epsilon(0.1, 2, 2, 1e-3) == doctest::Approx(0.28089).epsilon(1e-5));
}

TEST_CASE("tail bound values") {
    CHECK(tail_bound(4096, 2, 1, 0.2) == doctest::Approx(8.0 * std::exp(-20.48)).epsilon(1e-13));
    CHECK(tail_bound(4096, 2, 1, 0.2) == doctest::Approx(1.02e-8).epsilon(1e-2));
    CHECK(tail_bound(1 << 20, 2, 2, 0.3) < tail_bound(1 << 10, 2, 2, 0.3));
    CHECK(tail_bound(Index{1} << 40, 2, 2, 0.3) == 0.0);
    for(auto [d, k, eps, delta] : {std::tuple<Index, int, double, double>{2, 2, 0.3, 0.1}, {2, 1, 0.1, 0.01}, {3, 2, 0.5, 0.05}}) {
        const auto m = design_threshold_m(d, k, eps, delta);
        CHECK(tail_bound(static_cast<Index>(m), d, k, eps) <= delta);
        CHECK(tail_bound(static_cast<Index>(m) - 2, d, k, eps) > delta);
    }
}

TEST_CASE("Lipschitz bound values") {
    CHECK(lipschitz_bound(4, 2) == 3.0);
    CHECK(lipschitz_bound(1, 1) == 2.0);
    CHECK(lipschitz_bound(2, 3) == doctest::Approx(7.0711).epsilon(1e-5));
    CHECK(lipschitz_bound(2, 3) > lipschitz_bound(2, 2));
}

TEST_CASE("eps_prime_for_dimension inverts the threshold") {
    const double eps = eps_prime_for_dimension(18459, 2, 2, 0.1);
    CHECK(eps < 0.3);
    CHECK(eps > 0.2999);
    CHECK(design_threshold_m(2, 2, eps * (1 + 1e-12), 0.1) <= 18459);
    CHECK(design_threshold_m(2, 2, eps * (1 - 1e-6), 0.1) > 18459);
}

TEST_CASE("BoundReport bookkeeping") {
    const auto ok  = BoundReport::make("a", 1.0, 0.5, 0.0);
    const auto bad = BoundReport::make("b", 1.0, 1.5, 0.1);
    CHECK(ok.satisfied);
    CHECK(ok.margin == 0.5);
    CHECK_FALSE(bad.satisfied);
    CHECK_FALSE(BoundReport::make("nan", 1.0, std::nan(""), 0.0).satisfied);
    const auto both = BoundReport::combine("both", {ok, bad});
    CHECK_FALSE(both.satisfied);
    CHECK(both.observed_value == 1.5);
    CHECK(to_json(both)["details"].size() == 2);
}

TEST_CASE("Wilson interval") {
    const auto zero = wilson_interval(0, 100);
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == doctest::Approx(kWilsonZ95 * kWilsonZ95 / (100 + kWilsonZ95 * kWilsonZ95)).epsilon(1e-12));
    const auto half = wilson_interval(50, 100);
    CHECK(half.center == doctest::Approx(0.5));
    CHECK(half.lower == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(half.upper == doctest::Approx(0.59617).epsilon(1e-4));
    CHECK(wilson_interval(100, 100).upper == 1.0);
    expect_error(ErrorKind::invalid_argument, [] { wilson_interval(3, 2); });
}

TEST_CASE("mixture inequality on random ensemble pairs") {
    RngStream rng(41, 0);
    for(int trial = 0; trial < 60; ++trial) {
        const Index d = 2 + trial % 2;
        const int   k = 1 + trial % 3;
        const auto  a = random_family(d, 4, rng);
        const auto  b = random_family(d, 4, rng);
        const auto  r = check_mixture_inequality(a, b, k);
        CHECK(r.satisfied);

        // Independent evaluation of the three quantities.
        CMatrix ma = CMatrix::Zero(1, 1), mb = ma;
        double  powered = 0.0, single = 0.0, tv = 0.0;
        for(std::size_t i = 0; i < 4; ++i) {
            const CMatrix ra = kron_power(a.densities[i].matrix(), k), rb = kron_power(b.densities[i].matrix(), k);
            if(i == 0) ma = mb = CMatrix::Zero(ra.rows(), ra.cols());
            ma += a.probabilities[i] * ra;
            mb += b.probabilities[i] * rb;
            powered += a.probabilities[i] * trace_distance(HermitianOperator::hermitian_part(ra), HermitianOperator::hermitian_part(rb));
            single += a.probabilities[i] * trace_distance(a.densities[i], b.densities[i]);
            tv += 0.5 * std::abs(a.probabilities[i] - b.probabilities[i]);
        }
        const double lhs = trace_distance(HermitianOperator::hermitian_part(ma), HermitianOperator::hermitian_part(mb));
        CHECK(lhs <= powered + tv + 1e-9);
        CHECK(powered + tv <= k * single + tv + 1e-9);
        CHECK(r.details[0].observed_value == doctest::Approx(lhs).epsilon(1e-10));
    }
}

TEST_CASE("mixture inequality special cases") {
    RngStream  rng(42, 0);
    const auto a   = random_family(3, 3, rng);
    const auto same = check_mixture_inequality(a, a, 3);
    CHECK(same.satisfied);
    for(const auto &detail : same.details) {
        CHECK(detail.observed_value < 1e-13);
        CHECK(detail.bound_value < 1e-13);
    }
    // Singletons at k = 1: D(ρ, σ) on both sides.
    DensityEnsemble x{{1.0}, {random_density(2, rng)}}, y{{1.0}, {random_density(2, rng)}};
    const auto      single = check_mixture_inequality(x, y, 1);
    CHECK(single.details[0].observed_value == doctest::Approx(single.details[1].bound_value).epsilon(1e-12));
    DensityEnsemble short_one{{1.0}, {random_density(2, rng)}};
    expect_error(ErrorKind::invalid_argument, [&] { check_mixture_inequality(a, short_one, 1); });
}

TEST_CASE("normalization lemma") {
    RngStream rng(43, 0);
    const Isometry v = haar_isometry(32, 2, rng);
    const auto thermal = check_normalization_lemma(v, HermitianOperator::maximally_mixed(2));
    CHECK(thermal.satisfied);
    for(const auto &d : thermal.details) CHECK(d.observed_value < 1e-14);

    for(double delta : {0.01, 0.1, 0.2499}) {
        for(int trial = 0; trial < 20; ++trial) {
            const Index d   = 2;
            const auto  rho = random_density_at_distance(d, delta, rng);
            const auto  r   = check_normalization_lemma(haar_isometry(40, d, rng), rho);
            CHECK(r.satisfied);
            CHECK(r.context.delta.value() == doctest::Approx(delta).epsilon(1e-10));
        }
    }
    expect_error(ErrorKind::out_of_theorem_domain,
                 [&] { check_normalization_lemma(v, HermitianOperator::projector(PureState::basis(2, 0))); });
}

TEST_CASE("continuity bound holds between a state and its companion") {
    RngStream rng(44, 0);
    for(Index d : {2, 3})
        for(int k : {1, 2, 3})
            for(double delta : {1e-4, 1e-2, 0.1 / (2.0 * d)}) {
                const auto psi   = perturbed_thermal_state(d, 16, delta, rng);
                const auto basis = MeasurementBasis(haar_unitary(16, rng));
                const auto r     = check_continuity(psi, basis, k);
                CHECK(r.satisfied);
                CHECK(r.observed_value < r.bound_value);
            }
}

TEST_CASE("derivative identity") {
    RngStream rng(45, 0);
    const DensityCurve constant = [](double) {
        return std::vector<CMatrix>{CMatrix::Identity(2, 2) * 0.25, CMatrix::Identity(2, 2) * 0.25};
    };
    const auto flat = check_derivative_identity(constant, 0.3, 1e-5, 3);
    CHECK(flat.satisfied);
    CHECK(flat.observed_value < 1e-14);

    const Isometry w = Isometry::standard_embedding(8, 2);
    for(int k : {1, 2, 3}) {
        const auto r = check_derivative_identity(canonical_isometry_curve(w, random_skew_hermitian(8, rng)), 0.2, 1e-5, k);
        CHECK(r.satisfied);
        CHECK(r.observed_value <= 1e-7);
    }

    const DensityCurve vanishing = [](double) { return std::vector<CMatrix>{CMatrix::Zero(2, 2)}; };
    expect_error(ErrorKind::invalid_curve, [&] { check_derivative_identity(vanishing, 0.0, 1e-5, 2); });
    expect_error(ErrorKind::invalid_argument, [&] { canonical_isometry_curve(w, CMatrix::Identity(8, 8)); });
}

TEST_CASE("Monte Carlo tail examples") {
    TailConfig cfg;
    cfg.k        = 1;
    cfg.m        = 64;
    cfg.n_trials = 50;
    const auto one = monte_carlo_tail(cfg);
    CHECK(one.exceedances == 0);
    for(const auto &r : one.records) CHECK(r.design_error < 1e-10);

    cfg.k = 2;
    cfg.m = 2;
    const auto tiny = monte_carlo_tail(cfg);
    CHECK(tiny.fraction == 1.0);
    for(const auto &r : tiny.records) CHECK(r.design_error == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(tiny.below_threshold);

    cfg.m = 1;
    expect_error(ErrorKind::invalid_argument, [&] { monte_carlo_tail(cfg); });
    cfg.m     = 64;
    cfg.delta = 0.3;
    expect_error(ErrorKind::out_of_theorem_domain, [&] { monte_carlo_tail(cfg); });
}

TEST_CASE("Monte Carlo tail stays under the analytic tail plus noise") {
    for(Index m : {16, 64, 256}) {
        TailConfig cfg;
        cfg.m         = m;
        cfg.eps_prime = 0.5;
        cfg.n_trials  = 100;
        cfg.seed      = 46;
        const auto r  = monte_carlo_tail(cfg);
        CHECK(r.fraction <= r.tail_bound + 3 * r.wilson.half_width);
        CHECK(r.report.satisfied);
    }
}

TEST_CASE("tail trials are independent of worker count") {
    TailConfig cfg;
    cfg.m        = 128;
    cfg.delta    = 0.01;
    cfg.n_trials = 24;
    cfg.seed     = 47;
    const auto serial = monte_carlo_tail(cfg);
    cfg.workers       = 4;
    const auto threaded = monte_carlo_tail(cfg);
    CHECK(serial.records == threaded.records);
    for(std::size_t i = 0; i < serial.records.size(); ++i) CHECK(serial.records[i].trial_index == i);
}
