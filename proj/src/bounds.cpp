#include "design_lab/bounds.hpp"
#include "design_lab/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace design_lab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// BoundReport

BoundReport BoundReport::make(std::string name, double bound, double observed, double tolerance, BoundContext ctx) {
    BoundReport r;
    r.name           = std::move(name);
    r.bound_value    = bound;
    r.observed_value = observed;
    r.tolerance      = tolerance;
    r.margin         = bound - observed;
    r.satisfied      = observed <= bound + tolerance; // false for NaN
    r.context        = ctx;
    return r;
}

BoundReport BoundReport::combine(std::string name, std::vector<BoundReport> details, BoundContext ctx) {
    require(!details.empty(), ErrorKind::invalid_argument, "BoundReport::combine needs at least one detail");
    const auto tightest = std::min_element(details.begin(), details.end(),
                                           [](const BoundReport &a, const BoundReport &b) { return a.margin < b.margin; });
    BoundReport r = make(std::move(name), tightest->bound_value, tightest->observed_value, tightest->tolerance, ctx);
    r.satisfied   = std::all_of(details.begin(), details.end(), [](const BoundReport &d) { return d.satisfied; });
    r.details     = std::move(details);
    return r;
}

json to_json(const BoundContext &ctx) {
    json j = json::object();
    if(ctx.d_a) j["d_A"] = *ctx.d_a;
    if(ctx.k) j["k"] = *ctx.k;
    if(ctx.m) j["M"] = *ctx.m;
    if(ctx.delta) j["delta"] = *ctx.delta;
    if(ctx.eps_prime) j["eps_prime"] = *ctx.eps_prime;
    if(ctx.delta_prob) j["Delta"] = *ctx.delta_prob;
    return j;
}

json to_json(const BoundReport &report) {
    json j{{"name", report.name},         {"bound_value", report.bound_value}, {"observed_value", report.observed_value},
           {"tolerance", report.tolerance}, {"satisfied", report.satisfied},    {"margin", report.margin},
           {"context", to_json(report.context)}};
    if(!report.details.empty()) {
        j["details"] = json::array();
        for(const auto &d : report.details) j["details"].push_back(to_json(d));
    }
    return j;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

    void require_order(Index d_a, int k) {
        require(d_a >= 1, ErrorKind::invalid_argument, "d_A must be >= 1");
        require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    }

    void require_delta_domain(Index d_a, double delta) {
        require(std::isfinite(delta) && delta >= 0.0, ErrorKind::out_of_theorem_domain, "delta must be finite and nonnegative");
        if(delta >= 1.0 / (2.0 * static_cast<double>(d_a)))
            fail(ErrorKind::out_of_theorem_domain,
                 "delta = " + std::to_string(delta) + " violates delta < 1/(2 d_A) = " + std::to_string(1.0 / (2.0 * static_cast<double>(d_a))));
    }

    void require_open_unit(double x, const char *what) {
        if(!(x > 0.0 && x < 1.0)) fail(ErrorKind::invalid_argument, std::string(what) + " must lie in (0, 1)");
    }

    /// 4(2k−1)² d_A^{2k−1}
    double concentration_constant(Index d_a, int k) {
        const double d = static_cast<double>(d_a);
        const double c = 2.0 * k - 1.0;
        return 4.0 * c * c * std::pow(d, 2.0 * k - 1.0);
    }

} // namespace

double continuity_bound(Index d_a, int k, double delta) {
    require_order(d_a, k);
    require_delta_domain(d_a, delta);
    const double d = static_cast<double>(d_a);
    return 2.0 * k * std::sqrt(d * delta) + delta * d;
}

std::uint64_t design_threshold_m(Index d_a, int k, double eps_prime, double delta_prob) {
    require_order(d_a, k);
    require_open_unit(eps_prime, "eps_prime");
    require_open_unit(delta_prob, "Delta");
    const double d     = static_cast<double>(d_a);
    const double value = concentration_constant(d_a, k) / (eps_prime * eps_prime) * std::log(2.0 * std::pow(d, 2.0 * k) / delta_prob);
    if(!(value < 9.0e18)) fail(ErrorKind::resource_limit, "design_threshold_m: threshold exceeds the 64-bit range");
    return static_cast<std::uint64_t>(std::floor(value)) + 1;
}

double theorem_epsilon(double eps_prime, int k, Index d_a, double delta) { return eps_prime + continuity_bound(d_a, k, delta); }

double tail_bound(Index m, Index d_a, int k, double eps_prime) {
    require_order(d_a, k);
    require(m >= 1 && eps_prime > 0.0, ErrorKind::invalid_argument, "tail_bound: M and eps_prime must be positive");
    const double d = static_cast<double>(d_a);
    return 2.0 * std::pow(d, 2.0 * k) * std::exp(-static_cast<double>(m) * eps_prime * eps_prime / concentration_constant(d_a, k));
}

double lipschitz_bound(Index d_a, int k) {
    require_order(d_a, k);
    return 2.0 * (2.0 * k - 1.0) / std::sqrt(static_cast<double>(d_a));
}

double eps_prime_for_dimension(Index m, Index d_a, int k, double delta_prob) {
    require_order(d_a, k);
    require(m >= 1, ErrorKind::invalid_argument, "eps_prime_for_dimension: M must be positive");
    require_open_unit(delta_prob, "Delta");
    const double d = static_cast<double>(d_a);
    return std::sqrt(concentration_constant(d_a, k) * std::log(2.0 * std::pow(d, 2.0 * k) / delta_prob) / static_cast<double>(m));
}

double total_variation(const RVector &p, const RVector &r) {
    require(p.size() == r.size(), ErrorKind::invalid_argument, "total_variation: length mismatch");
    return 0.5 * (p - r).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Lemma checks

namespace {

    RVector validated_weights(const DensityEnsemble &e, const char *which) {
        require(!e.probabilities.empty() && e.probabilities.size() == e.densities.size(), ErrorKind::invalid_argument,
                std::string("check_mixture_inequality: ensemble ") + which + " needs one density per probability");
        RVector p(static_cast<Index>(e.probabilities.size()));
        for(std::size_t i = 0; i < e.probabilities.size(); ++i) {
            require(e.probabilities[i] >= 0.0, ErrorKind::invalid_argument, "check_mixture_inequality: negative probability");
            p(static_cast<Index>(i)) = e.probabilities[i];
        }
        require(std::abs(p.sum() - 1.0) <= 1e-10, ErrorKind::invalid_argument, "check_mixture_inequality: probabilities must sum to one");
        return p;
    }

    CMatrix power_of_normalized(const CMatrix &rho_hat, int k) { return kron_power(rho_hat, k, std::numeric_limits<std::size_t>::max()); }

} // namespace

BoundReport check_mixture_inequality(const DensityEnsemble &a, const DensityEnsemble &b, int k) {
    require(k >= 1, ErrorKind::invalid_argument, "check_mixture_inequality: k must be >= 1");
    const RVector p = validated_weights(a, "A");
    const RVector r = validated_weights(b, "B");
    require(p.size() == r.size(), ErrorKind::invalid_argument, "check_mixture_inequality: ensembles must have equal length");
    const Index d = a.densities.front().dim();
    for(std::size_t i = 0; i < a.densities.size(); ++i)
        require(a.densities[i].dim() == d && b.densities[i].dim() == d, ErrorKind::invalid_argument,
                "check_mixture_inequality: all densities must share one dimension");

    const Index dim = checked_power(d, k, dimension_cap());
    CMatrix     mix_a = CMatrix::Zero(dim, dim);
    CMatrix     mix_b = CMatrix::Zero(dim, dim);
    double      powered = 0.0;
    double      single  = 0.0;
    for(std::size_t i = 0; i < a.densities.size(); ++i) {
        const CMatrix ra = kron_power(a.densities[i].matrix(), k);
        const CMatrix rb = kron_power(b.densities[i].matrix(), k);
        const double  pi = p(static_cast<Index>(i));
        mix_a += pi * ra;
        mix_b += r(static_cast<Index>(i)) * rb;
        powered += pi * 0.5 * trace_norm_hermitian(ra - rb);
        single += pi * trace_distance(a.densities[i], b.densities[i]);
    }
    const double tv     = total_variation(p, r);
    const double lhs    = 0.5 * trace_norm_hermitian(mix_a - mix_b);
    const double middle = powered + tv;
    const double rhs    = k * single + tv;

    BoundContext ctx;
    ctx.d_a = d;
    ctx.k   = k;
    return BoundReport::combine("mixture_inequality",
                                {BoundReport::make("tensor_power_step", middle, lhs, 1e-9, ctx),
                                 BoundReport::make("telescoping_step", rhs, middle, 1e-9, ctx)},
                                ctx);
}

BoundReport check_normalization_lemma(const Isometry &v, const HermitianOperator &rho_a) {
    const Index d = v.cols();
    require(rho_a.dim() == d, ErrorKind::invalid_argument, "check_normalization_lemma: rho_A dimension must equal d_A");
    require_density_matrix(rho_a, 1e-10, "check_normalization_lemma");
    const double delta = trace_distance(rho_a, HermitianOperator::maximally_mixed(d));
    require_delta_domain(d, delta);

    const double  dd       = static_cast<double>(d);
    const CMatrix rows     = v.matrix().adjoint();      // column z is V†|z⟩
    const CMatrix deformed = psd_sqrt(rho_a) * rows;    // column z is √ρ_A V†|z⟩
    const RVector r        = rows.colwise().squaredNorm().transpose() / dd;
    const RVector p        = deformed.colwise().squaredNorm().transpose();

    // |p_z − r_z| ≤ 2δ d_A r_z is reported as max_z |p_z − r_z|/(2 d_A r_z) ≤ δ.
    double worst_ratio   = 0.0;
    double worst_overlap = 0.0;
    for(Index z = 0; z < r.size(); ++z) {
        if(r(z) < kZeroProbability) {
            if(p(z) > kZeroProbability) worst_ratio = std::numeric_limits<double>::infinity();
            continue;
        }
        worst_ratio = std::max(worst_ratio, std::abs(p(z) - r(z)) / (2.0 * dd * r(z)));
        if(p(z) < kZeroProbability) continue;
        const double overlap = pure_state_distance(PureState::normalized(deformed.col(z)), PureState::normalized(rows.col(z)));
        worst_overlap        = std::max(worst_overlap, overlap);
    }

    BoundContext ctx;
    ctx.d_a   = d;
    ctx.m     = v.rows();
    ctx.delta = delta;
    return BoundReport::combine("normalization_lemma",
                                {BoundReport::make("per_outcome_probability", delta, worst_ratio, 1e-12, ctx),
                                 BoundReport::make("distribution_distance", delta * dd, total_variation(p, r), 1e-12, ctx),
                                 BoundReport::make("member_overlap", 2.0 * std::sqrt(dd * delta), worst_overlap, 1e-9, ctx)},
                                ctx);
}

BoundReport check_continuity(const BipartiteState &psi, const MeasurementBasis &basis, int k) {
    const Index          d     = psi.dim_a();
    const double         delta = trace_distance(partial_trace(psi, Subsystem::A), HermitianOperator::maximally_mixed(d));
    const double         bound = continuity_bound(d, k, delta);
    const BipartiteState phi   = exact_thermal_companion(psi);
    const double observed = trace_distance(moment_operator(projected_ensemble(psi, basis), k).op(),
                                           moment_operator(projected_ensemble(phi, basis), k).op());
    BoundContext ctx;
    ctx.d_a   = d;
    ctx.k     = k;
    ctx.m     = psi.dim_b();
    ctx.delta = delta;
    return BoundReport::make("continuity", bound, observed, 1e-10, ctx);
}

BoundReport check_derivative_identity(const DensityCurve &curve, double lambda, double h, int k) {
    require(k >= 1, ErrorKind::invalid_argument, "check_derivative_identity: k must be >= 1");
    require(h > 0.0, ErrorKind::invalid_argument, "check_derivative_identity: step must be positive");
    const std::vector<CMatrix> lo  = curve(lambda - h);
    const std::vector<CMatrix> mid = curve(lambda);
    const std::vector<CMatrix> hi  = curve(lambda + h);
    require(!mid.empty() && lo.size() == mid.size() && hi.size() == mid.size(), ErrorKind::invalid_curve,
            "check_derivative_identity: curve must return the same nonempty family at every point");
    const Index d = mid.front().rows();
    for(const auto *family : {&lo, &mid, &hi})
        for(const CMatrix &rho : *family)
            require(rho.rows() == d && rho.cols() == d, ErrorKind::invalid_curve, "check_derivative_identity: inconsistent dimensions");

    const auto weight = [](const CMatrix &rho) {
        const double p = rho.trace().real();
        if(!(p > 1e-12)) fail(ErrorKind::invalid_curve, "check_derivative_identity: p_z <= 1e-12 on the curve");
        return p;
    };
    // Σ_z p_z ρ̂_z^{⊗k}
    const auto mixture = [&](const std::vector<CMatrix> &family) {
        const Index dim = checked_power(d, k, dimension_cap());
        CMatrix     out = CMatrix::Zero(dim, dim);
        for(const CMatrix &rho : family) {
            const double p = weight(rho);
            out += p * power_of_normalized(rho / p, k);
        }
        return out;
    };

    const CMatrix lhs = (mixture(hi) - mixture(lo)) / (2.0 * h);

    CMatrix rhs = CMatrix::Zero(lhs.rows(), lhs.cols());
    for(std::size_t z = 0; z < mid.size(); ++z) {
        const double  p     = weight(mid[z]);
        const CMatrix hat   = mid[z] / p;
        const CMatrix deriv = (hi[z] - lo[z]) / (2.0 * h);
        for(int l = 0; l < k; ++l)
            rhs += kron(kron(power_of_normalized(hat, l), deriv), power_of_normalized(hat, k - l - 1));
        if(k > 1) rhs -= (k - 1) * deriv.trace().real() * power_of_normalized(hat, k);
    }

    const double scale     = std::max({1.0, lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff()});
    const double tolerance = std::max(1e-8, 1e2 * h * h * scale);
    BoundContext ctx;
    ctx.d_a = d;
    ctx.k   = k;
    return BoundReport::make("derivative_identity", 0.0, (lhs - rhs).cwiseAbs().maxCoeff(), tolerance, ctx);
}

DensityCurve canonical_isometry_curve(const Isometry &w, const CMatrix &g) {
    require(g.rows() == w.rows() && g.cols() == w.rows(), ErrorKind::invalid_argument, "canonical_isometry_curve: G must be M x M");
    require((g + g.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::invalid_argument, "canonical_isometry_curve: G must be skew-Hermitian");
    return [w = w.matrix(), g](double lambda) {
        // W† e^{−λG}|z⟩ = (e^{λG} W)† |z⟩
        const CMatrix        v = exp_skew_hermitian(g, lambda) * w;
        const double         d = static_cast<double>(w.cols());
        std::vector<CMatrix> family;
        family.reserve(static_cast<std::size_t>(v.rows()));
        for(Index z = 0; z < v.rows(); ++z) {
            const CVector row = v.row(z).adjoint();
            family.emplace_back(row * row.adjoint() / d);
        }
        return family;
    };
}

// ---------------------------------------------------------------------------
// Monte Carlo tail

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
    require(trials >= 1 && successes <= trials, ErrorKind::invalid_argument, "wilson_interval: need 0 <= successes <= trials, trials >= 1");
    const double n     = static_cast<double>(trials);
    const double phat  = static_cast<double>(successes) / n;
    const double z2    = z * z;
    const double denom = 1.0 + z2 / n;
    WilsonInterval w;
    w.center     = (phat + z2 / (2.0 * n)) / denom;
    w.half_width = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    w.lower      = successes == 0 ? 0.0 : std::max(0.0, w.center - w.half_width);
    w.upper      = successes == trials ? 1.0 : std::min(1.0, w.center + w.half_width);
    return w;
}

void validate(const TailConfig &cfg) {
    require(cfg.d_a >= 1, ErrorKind::invalid_argument, "d_A must be >= 1");
    require(cfg.k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(cfg.m >= cfg.d_a, ErrorKind::invalid_argument,
            "infeasible configuration: M = " + std::to_string(cfg.m) + " < d_A = " + std::to_string(cfg.d_a));
    checked_power(cfg.d_a, cfg.k, dimension_cap());
    require_delta_domain(cfg.d_a, cfg.delta);
    if(cfg.delta > 0.0 && cfg.d_a < 2) fail(ErrorKind::out_of_theorem_domain, "d_A = 1 admits only delta = 0");
    require_open_unit(cfg.eps_prime, "eps_prime");
    require_open_unit(cfg.delta_prob, "Delta");
    require(cfg.n_trials >= 1, ErrorKind::invalid_argument, "n_trials must be >= 1");
    require(cfg.workers >= 1, ErrorKind::invalid_argument, "workers must be >= 1");
}

TrialRecord run_tail_trial(const TailConfig &cfg, const MomentOperator &haar, std::uint64_t trial_index) {
    const auto start = std::chrono::steady_clock::now();
    RngStream  rng(cfg.seed, trial_index);
    const Isometry v = haar_isometry(cfg.m, cfg.d_a, rng);

    double error = 0.0;
    if(cfg.delta > 0.0) {
        const HermitianOperator rho_a = partial_trace(perturbed_thermal_state(cfg.d_a, cfg.m, cfg.delta, rng), Subsystem::A);
        error                         = design_distance(deformed_row_ensemble(v, rho_a), haar);
    } else {
        error = design_distance(row_ensemble(v), haar);
    }

    TrialRecord rec;
    rec.trial_index    = trial_index;
    rec.stream_index   = rng.stream_index();
    rec.d_a            = cfg.d_a;
    rec.k              = cfg.k;
    rec.m              = cfg.m;
    rec.delta          = cfg.delta;
    rec.design_error   = error;
    rec.threshold_used = cfg.delta > 0.0 ? theorem_epsilon(cfg.eps_prime, cfg.k, cfg.d_a, cfg.delta) : cfg.eps_prime;
    rec.exceeded       = error > rec.threshold_used;
    if(cfg.record_timing)
        rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

TailResult monte_carlo_tail(const TailConfig &cfg) {
    validate(cfg);
    const MomentOperator haar = haar_moment_operator(cfg.d_a, cfg.k);

    TailResult result;
    result.records.resize(static_cast<std::size_t>(cfg.n_trials));
    parallel_for(result.records.size(), cfg.workers, [&](std::size_t i) { result.records[i] = run_tail_trial(cfg, haar, i); });

    for(const auto &rec : result.records) result.exceedances += rec.exceeded ? 1 : 0;
    result.fraction        = static_cast<double>(result.exceedances) / static_cast<double>(cfg.n_trials);
    result.wilson          = wilson_interval(result.exceedances, cfg.n_trials);
    result.tail_bound      = tail_bound(cfg.m, cfg.d_a, cfg.k, cfg.eps_prime);
    result.threshold       = result.records.front().threshold_used;
    result.threshold_m     = design_threshold_m(cfg.d_a, cfg.k, cfg.eps_prime, cfg.delta_prob);
    result.below_threshold = static_cast<std::uint64_t>(cfg.m) < result.threshold_m;

    BoundContext ctx;
    ctx.d_a        = cfg.d_a;
    ctx.k          = cfg.k;
    ctx.m          = cfg.m;
    ctx.delta      = cfg.delta;
    ctx.eps_prime  = cfg.eps_prime;
    ctx.delta_prob = cfg.delta_prob;

    std::vector<BoundReport> details;
    details.push_back(BoundReport::make("fraction_vs_tail_bound", result.tail_bound + 3.0 * result.wilson.half_width, result.fraction, 0.0, ctx));
    if(!result.below_threshold) details.push_back(BoundReport::make("wilson_upper_vs_Delta", cfg.delta_prob, result.wilson.upper, 0.0, ctx));
    result.report = BoundReport::combine(cfg.delta > 0.0 ? "theorem_tail" : "lemma_tail", std::move(details), ctx);
    return result;
}

} // namespace design_lab
