#include "design_lab/spinchain.hpp"
#include "design_lab/bounds.hpp"
#include "design_lab/ensembles.hpp"
#include "design_lab/parallel.hpp"
#include "design_lab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace design_lab {

std::string_view to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Boundary boundary_from_string(std::string_view name) {
    if(name == "open") return Boundary::open;
    if(name == "periodic") return Boundary::periodic;
    fail(ErrorKind::invalid_argument, "boundary must be 'open' or 'periodic', got '" + std::string(name) + "'");
}

std::vector<double> SpinChainConfig::default_times() {
    std::vector<double> t(21);
    for(std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return t;
}

namespace {

    std::vector<std::string> site_tokens(const SpinChainConfig &cfg) {
        std::vector<std::string> tokens;
        std::stringstream        in(cfg.initial_state);
        for(std::string tok; std::getline(in, tok, ',');) {
            tok.erase(std::remove(tok.begin(), tok.end(), ' '), tok.end());
            tokens.push_back(tok);
        }
        if(tokens.size() == 1) tokens.assign(static_cast<std::size_t>(cfg.n_sites), tokens.front());
        require(tokens.size() == static_cast<std::size_t>(cfg.n_sites), ErrorKind::invalid_argument,
                "initial_state needs one token or one token per site");
        return tokens;
    }

    CVector site_state(const std::string &token) {
        const double r = 1.0 / std::sqrt(2.0);
        CVector      v(2);
        if(token == "0") v << 1.0, 0.0;
        else if(token == "1") v << 0.0, 1.0;
        else if(token == "+") v << r, r;
        else if(token == "-") v << r, -r;
        else if(token == "+y") v << r, Complex(0.0, r);
        else if(token == "-y") v << r, Complex(0.0, -r);
        else fail(ErrorKind::invalid_argument, "unknown site state '" + token + "' (expected 0, 1, +, -, +y, -y)");
        return v;
    }

    /// Real matrix times complex vector without materializing a complex copy of the matrix.
    template<class Mat>
    CVector real_times(const Mat &a, const CVector &v) {
        const RVector re = a * v.real();
        const RVector im = a * v.imag();
        CVector       out(re.size());
        out.real() = re;
        out.imag() = im;
        return out;
    }

} // namespace

void validate(const SpinChainConfig &cfg) {
    require(cfg.n_sites >= 2, ErrorKind::invalid_argument, "spin chain needs at least 2 sites");
    if(cfg.n_sites > 12 || static_cast<std::size_t>(cfg.dim()) > dimension_cap())
        fail(ErrorKind::resource_limit, "spin chain Hilbert space 2^" + std::to_string(cfg.n_sites) + " exceeds the limit of 4096");
    require(cfg.cut >= 1 && cfg.cut <= 2 && cfg.cut < cfg.n_sites, ErrorKind::invalid_argument, "cut must be 1 or 2 and leave a complement");
    require(std::isfinite(cfg.j) && std::isfinite(cfg.h_x) && std::isfinite(cfg.h_z), ErrorKind::invalid_argument,
            "couplings must be finite");
    require(!cfg.times.empty(), ErrorKind::invalid_argument, "time grid must be nonempty");
    for(std::size_t i = 0; i < cfg.times.size(); ++i) {
        require(std::isfinite(cfg.times[i]) && cfg.times[i] >= 0.0, ErrorKind::invalid_argument, "times must be finite and nonnegative");
        require(i == 0 || cfg.times[i] > cfg.times[i - 1], ErrorKind::invalid_argument, "times must be strictly increasing");
    }
    site_tokens(cfg);
    for(const auto &tok : site_tokens(cfg)) site_state(tok);
}

Eigen::MatrixXd build_hamiltonian_real(const SpinChainConfig &cfg) {
    validate(cfg);
    const int   n   = cfg.n_sites;
    const Index dim = cfg.dim();
    // Site s (0-based from the left) is bit n−1−s of the basis index; Z|0⟩ = |0⟩.
    const auto z = [n](Index idx, int s) { return ((idx >> (n - 1 - s)) & 1) ? -1.0 : 1.0; };

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for(Index idx = 0; idx < dim; ++idx) {
        double diag = 0.0;
        for(int s = 0; s + 1 < n; ++s) diag += cfg.j * z(idx, s) * z(idx, s + 1);
        if(cfg.boundary == Boundary::periodic) diag += cfg.j * z(idx, n - 1) * z(idx, 0);
        for(int s = 0; s < n; ++s) diag += cfg.h_z * z(idx, s);
        h(idx, idx) = diag;
        for(int s = 0; s < n; ++s) h(idx ^ (Index{1} << (n - 1 - s)), idx) += cfg.h_x;
    }
    return h;
}

HermitianOperator build_hamiltonian(const SpinChainConfig &cfg) { return HermitianOperator(build_hamiltonian_real(cfg).cast<Complex>()); }

PureState initial_product_state(const SpinChainConfig &cfg) {
    validate(cfg);
    CVector psi = CVector::Ones(1);
    for(const auto &tok : site_tokens(cfg)) psi = kron(psi, site_state(tok));
    return PureState::normalized(psi);
}

// ---------------------------------------------------------------------------

SpectralPropagator::SpectralPropagator(const Eigen::MatrixXd &real_symmetric) {
    const Index n = real_symmetric.rows();
    require(n >= 1 && real_symmetric.cols() == n, ErrorKind::invalid_argument, "SpectralPropagator: matrix must be square");
    real_vectors_ = real_symmetric;
    energies_.resize(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), real_vectors_.data(),
                                           static_cast<lapack_int>(n), energies_.data());
    if(info != 0) fail(ErrorKind::invalid_argument, "eigendecomposition failed (dsyevd info " + std::to_string(info) + ")");
}

SpectralPropagator::SpectralPropagator(const HermitianOperator &h) : real_(false) {
    const Index n    = h.dim();
    complex_vectors_ = h.matrix();
    energies_.resize(n);
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), complex_vectors_.data(),
                                           static_cast<lapack_int>(n), energies_.data());
    if(info != 0) fail(ErrorKind::invalid_argument, "eigendecomposition failed (zheevd info " + std::to_string(info) + ")");
}

CVector SpectralPropagator::propagate(const CVector &psi0, double t) const {
    require(psi0.size() == dim(), ErrorKind::invalid_argument, "evolve: state dimension does not match H");
    CVector coeffs = real_ ? real_times(real_vectors_.transpose(), psi0) : CVector(complex_vectors_.adjoint() * psi0);
    for(Index i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::exp(Complex(0.0, -energies_(i) * t));
    return real_ ? real_times(real_vectors_, coeffs) : CVector(complex_vectors_ * coeffs);
}

PureState SpectralPropagator::evolve(const PureState &psi0, double t) const { return PureState(propagate(psi0.amplitudes(), t)); }

PureState evolve(const PureState &psi0, const HermitianOperator &h, double t) { return SpectralPropagator(h).evolve(psi0, t); }

double energy(const PureState &psi, const Eigen::MatrixXd &h) {
    require(psi.dim() == h.rows(), ErrorKind::invalid_argument, "energy: dimension mismatch");
    const CVector &a = psi.amplitudes();
    return a.dot(real_times(h, a)).real();
}

// ---------------------------------------------------------------------------

double reference_eps_prime(Index m, Index d_a, int k, double delta_prob) {
    const double exact = eps_prime_for_dimension(m, d_a, k, delta_prob);
    return std::ceil(exact * 1e4) / 1e4;
}

double quantile(std::vector<double> values, double q) {
    require(!values.empty(), ErrorKind::invalid_argument, "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, ErrorKind::invalid_argument, "quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double      pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo  = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi  = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SpinChainTrace design_error_trace(const SpinChainConfig &cfg, const TraceOptions &opts) {
    validate(cfg);
    require(opts.k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(opts.n_random_bases >= 1, ErrorKind::invalid_argument, "n_random_bases must be >= 1");
    require(opts.workers >= 1, ErrorKind::invalid_argument, "workers must be >= 1");
    const Index d_a = cfg.dim_a();
    const Index m   = cfg.dim_b();
    checked_power(d_a, opts.k, dimension_cap());

    SpinChainTrace trace;
    trace.d_a           = d_a;
    trace.m             = m;
    trace.eps_prime_ref = opts.eps_prime_ref ? *opts.eps_prime_ref : reference_eps_prime(m, d_a, opts.k, opts.delta_prob);
    require(trace.eps_prime_ref > 0.0 && trace.eps_prime_ref < 1.0, ErrorKind::out_of_theorem_domain,
            "reference eps_prime must lie in (0, 1); M = " + std::to_string(m) + " is too small for this k and Delta");
    trace.threshold_m = design_threshold_m(d_a, opts.k, trace.eps_prime_ref, opts.delta_prob);

    const Eigen::MatrixXd    h = build_hamiltonian_real(cfg);
    const SpectralPropagator propagator(h);
    const PureState          psi0 = initial_product_state(cfg);
    const MomentOperator     haar = haar_moment_operator(d_a, opts.k);
    const HermitianOperator  mixed = HermitianOperator::maximally_mixed(d_a);
    const MeasurementBasis   computational = MeasurementBasis::computational(m);

    trace.slices.resize(cfg.times.size());
    trace.energies.resize(cfg.times.size());
    parallel_for(cfg.times.size(), opts.workers, [&](std::size_t s) {
        TimeSlice      slice;
        slice.t                  = cfg.times[s];
        const CVector        raw = propagator.propagate(psi0.amplitudes(), slice.t);
        slice.norm_defect        = std::abs(1.0 - raw.norm());
        const PureState      psi(raw);
        const BipartiteState state = BipartiteState::from_vector(psi.amplitudes(), d_a, m);
        const HermitianOperator rho_a = partial_trace(state, Subsystem::A);

        slice.delta       = trace_distance(rho_a, mixed);
        const StateEnsemble comp = projected_ensemble(state, computational);
        slice.probability_defect = comp.renormalization_shift();
        slice.design_error_comp  = design_distance(comp, haar);

        const bool in_domain  = slice.delta < 1.0 / (2.0 * static_cast<double>(d_a));
        slice.theorem_ceiling = in_domain ? theorem_epsilon(trace.eps_prime_ref, opts.k, d_a, slice.delta) : std::nan("");

        slice.random_errors.resize(static_cast<std::size_t>(opts.n_random_bases));
        std::size_t within = 0;
        for(int b = 0; b < opts.n_random_bases; ++b) {
            RngStream      rng(opts.seed, s * static_cast<std::uint64_t>(opts.n_random_bases) + static_cast<std::uint64_t>(b));
            const Isometry v   = haar_isometry(m, d_a, rng);
            const double   err = design_distance(deformed_row_ensemble(v, rho_a), haar);
            slice.random_errors[static_cast<std::size_t>(b)] = err;
            if(in_domain && err <= slice.theorem_ceiling) ++within;
        }
        slice.q10                     = quantile(slice.random_errors, 0.1);
        slice.q50                     = quantile(slice.random_errors, 0.5);
        slice.q90                     = quantile(slice.random_errors, 0.9);
        slice.fraction_within_ceiling = static_cast<double>(within) / static_cast<double>(opts.n_random_bases);
        trace.energies[s]             = energy(psi, h);
        trace.slices[s]               = std::move(slice);
    });
    return trace;
}

} // namespace design_lab
