#include "design_lab/harness.hpp"
#include "design_lab/bounds.hpp"
#include "design_lab/ensembles.hpp"
#include "design_lab/gradient.hpp"
#include "design_lab/parallel.hpp"
#include "design_lab/records.hpp"
#include "design_lab/sampling.hpp"

#include <toml.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace design_lab {

using nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
    switch(kind) {
        case ExperimentKind::lemma2_tail: return "lemma2_tail";
        case ExperimentKind::theorem1_endtoend: return "theorem1_endtoend";
        case ExperimentKind::continuity_sweep: return "continuity_sweep";
        case ExperimentKind::gradient_check: return "gradient_check";
        case ExperimentKind::scaling_sweep: return "scaling_sweep";
        case ExperimentKind::spinchain_demo: return "spinchain_demo";
        case ExperimentKind::oracle_check: return "oracle_check";
    }
    return "unknown";
}

ExperimentKind experiment_from_string(std::string_view name) {
    for(auto kind : {ExperimentKind::lemma2_tail, ExperimentKind::theorem1_endtoend, ExperimentKind::continuity_sweep,
                     ExperimentKind::gradient_check, ExperimentKind::scaling_sweep, ExperimentKind::spinchain_demo,
                     ExperimentKind::oracle_check})
        if(to_string(kind) == name) return kind;
    fail(ErrorKind::invalid_argument, "unknown experiment '" + std::string(name) + "'");
}

std::string_view records_file_name(ExperimentKind kind) {
    switch(kind) {
        case ExperimentKind::gradient_check: return "gradient.csv";
        case ExperimentKind::spinchain_demo: return "spinchain.csv";
        case ExperimentKind::oracle_check: return "oracle.csv";
        default: return "records.csv";
    }
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.experiment = kind;
    switch(kind) {
        case ExperimentKind::lemma2_tail:
            cfg.m_values = {32768};
            cfg.n_trials = 500;
            break;
        case ExperimentKind::theorem1_endtoend:
            cfg.m_values = {32768};
            cfg.delta    = 1e-4;
            cfg.n_trials = 200;
            break;
        case ExperimentKind::continuity_sweep:
            cfg.d_values        = {2, 3};
            cfg.k_values        = {1, 2, 3};
            cfg.delta_values    = {1e-4, 1e-2};
            cfg.delta_fractions = {0.1};
            cfg.m_values        = {16};
            cfg.n_trials        = 556; // 18 cells, 10008 trials
            break;
        case ExperimentKind::gradient_check:
            cfg.k_values = {2, 3};
            cfg.m_values = {4, 8, 16};
            cfg.n_trials = 200;
            break;
        case ExperimentKind::scaling_sweep:
            cfg.m_values = {64, 256, 1024, 4096, 16384};
            cfg.n_trials = 100;
            break;
        case ExperimentKind::spinchain_demo: break;
        case ExperimentKind::oracle_check: break;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// TOML

namespace {

    [[noreturn]] void bad_key(std::string_view key, std::string_view expected) {
        fail(ErrorKind::invalid_argument, "config key '" + std::string(key) + "' must be " + std::string(expected));
    }

    std::int64_t toml_int(const toml::node &n, std::string_view key) {
        if(!n.is_integer()) bad_key(key, "an integer");
        return *n.value<std::int64_t>();
    }

    std::int64_t toml_nonneg(const toml::node &n, std::string_view key) {
        const auto v = toml_int(n, key);
        if(v < 0) bad_key(key, "a nonnegative integer");
        return v;
    }

    double toml_real(const toml::node &n, std::string_view key) {
        if(!n.is_number()) bad_key(key, "a number");
        return *n.value<double>();
    }

    std::string toml_string(const toml::node &n, std::string_view key) {
        if(!n.is_string()) bad_key(key, "a string");
        return *n.value<std::string>();
    }

    bool toml_bool(const toml::node &n, std::string_view key) {
        if(!n.is_boolean()) bad_key(key, "a boolean");
        return *n.value<bool>();
    }

    /// A scalar or an array of scalars.
    template<class T, class Get>
    std::vector<T> toml_list(const toml::node &n, std::string_view key, Get get) {
        std::vector<T> out;
        if(const auto *arr = n.as_array()) {
            for(const auto &item : *arr) out.push_back(static_cast<T>(get(item, key)));
            if(out.empty()) bad_key(key, "a nonempty list");
        } else {
            out.push_back(static_cast<T>(get(n, key)));
        }
        return out;
    }

    void apply_spinchain_table(const toml::table &tbl, ExperimentConfig &cfg) {
        for(const auto &[k, node] : tbl) {
            const std::string key = "spinchain." + std::string(k.str());
            const auto        name = k.str();
            if(name == "n_sites") cfg.spinchain.n_sites = static_cast<int>(toml_int(node, key));
            else if(name == "j") cfg.spinchain.j = toml_real(node, key);
            else if(name == "h_x") cfg.spinchain.h_x = toml_real(node, key);
            else if(name == "h_z") cfg.spinchain.h_z = toml_real(node, key);
            else if(name == "boundary") cfg.spinchain.boundary = boundary_from_string(toml_string(node, key));
            else if(name == "cut") cfg.spinchain.cut = static_cast<int>(toml_int(node, key));
            else if(name == "times") cfg.spinchain.times = toml_list<double>(node, key, toml_real);
            else if(name == "initial_state") cfg.spinchain.initial_state = toml_string(node, key);
            else if(name == "n_random_bases") cfg.n_random_bases = static_cast<int>(toml_int(node, key));
            else if(name == "eps_prime_ref") cfg.eps_prime_ref = toml_real(node, key);
            else fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
        }
    }

} // namespace

ExperimentConfig parse_config(std::string_view toml_text, ExperimentKind kind) {
    toml::table tbl;
    try {
        tbl = toml::parse(toml_text);
    } catch(const toml::parse_error &e) {
        fail(ErrorKind::invalid_argument, std::string("config is not valid TOML: ") + std::string(e.description()));
    }

    ExperimentConfig cfg = default_config(kind);
    for(const auto &[k, node] : tbl) {
        const std::string key(k.str());
        if(key == "experiment") {
            const auto named = experiment_from_string(toml_string(node, key));
            if(named != kind)
                fail(ErrorKind::invalid_argument,
                     "config names experiment '" + std::string(to_string(named)) + "' but '" + std::string(to_string(kind)) + "' was requested");
        } else if(key == "d_a") cfg.d_a = toml_nonneg(node, key);
        else if(key == "k") cfg.k = static_cast<int>(toml_int(node, key));
        else if(key == "d_values") cfg.d_values = toml_list<Index>(node, key, toml_nonneg);
        else if(key == "k_values") cfg.k_values = toml_list<int>(node, key, toml_int);
        else if(key == "m") cfg.m_values = toml_list<Index>(node, key, toml_nonneg);
        else if(key == "delta") cfg.delta = toml_real(node, key);
        else if(key == "delta_values") cfg.delta_values = toml_list<double>(node, key, toml_real);
        else if(key == "delta_fractions") cfg.delta_fractions = toml_list<double>(node, key, toml_real);
        else if(key == "eps_prime") cfg.eps_prime = toml_real(node, key);
        else if(key == "delta_prob") cfg.delta_prob = toml_real(node, key);
        else if(key == "n_trials") cfg.n_trials = static_cast<std::uint64_t>(toml_nonneg(node, key));
        else if(key == "n_samples") cfg.n_samples = static_cast<std::uint64_t>(toml_nonneg(node, key));
        else if(key == "checks") cfg.checks = toml_list<std::string>(node, key, toml_string);
        else if(key == "seed") cfg.seed = static_cast<std::uint64_t>(toml_nonneg(node, key));
        else if(key == "workers") cfg.workers = static_cast<unsigned>(toml_nonneg(node, key));
        else if(key == "output_dir") cfg.output_dir = toml_string(node, key);
        else if(key == "record_timing") cfg.record_timing = toml_bool(node, key);
        else if(key == "spinchain") {
            const auto *sub = node.as_table();
            if(!sub) bad_key(key, "a table");
            apply_spinchain_table(*sub, cfg);
        } else fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path, ExperimentKind kind) { return parse_config(read_text_file(path), kind); }

// ---------------------------------------------------------------------------
// Validation

namespace {

    TailConfig tail_config(const ExperimentConfig &cfg, Index m) {
        TailConfig t;
        t.d_a           = cfg.d_a;
        t.k             = cfg.k;
        t.m             = m;
        t.delta         = cfg.delta;
        t.eps_prime     = cfg.eps_prime;
        t.delta_prob    = cfg.delta_prob;
        t.n_trials      = cfg.n_trials;
        t.seed          = cfg.seed;
        t.workers       = cfg.workers;
        t.record_timing = cfg.record_timing;
        return t;
    }

    struct ContinuityCell {
        Index  d;
        int    k;
        double delta;
    };

    std::vector<ContinuityCell> continuity_cells(const ExperimentConfig &cfg) {
        std::vector<ContinuityCell> cells;
        for(Index d : cfg.d_values)
            for(int k : cfg.k_values) {
                for(double delta : cfg.delta_values) cells.push_back({d, k, delta});
                for(double f : cfg.delta_fractions) cells.push_back({d, k, f / (2.0 * static_cast<double>(d))});
            }
        return cells;
    }

    void require_single_m(const ExperimentConfig &cfg) {
        require(cfg.m_values.size() == 1, ErrorKind::invalid_argument,
                std::string(to_string(cfg.experiment)) + " takes exactly one M, got " + std::to_string(cfg.m_values.size()));
    }

} // namespace

void validate(const ExperimentConfig &cfg) {
    require(cfg.workers >= 1 && cfg.workers <= 1024, ErrorKind::invalid_argument, "workers must lie in [1, 1024]");
    require(cfg.d_a >= 1, ErrorKind::invalid_argument, "d_a must be >= 1");
    require(cfg.k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
    require(cfg.n_trials >= 1, ErrorKind::invalid_argument, "n_trials must be >= 1");
    require(!cfg.m_values.empty(), ErrorKind::invalid_argument, "m must be nonempty");
    for(Index m : cfg.m_values) require(m >= 1, ErrorKind::invalid_argument, "M must be positive");

    switch(cfg.experiment) {
        case ExperimentKind::lemma2_tail:
        case ExperimentKind::theorem1_endtoend: {
            require_single_m(cfg);
            if(cfg.experiment == ExperimentKind::lemma2_tail)
                require(cfg.delta == 0.0, ErrorKind::invalid_argument, "lemma2_tail runs at delta = 0; use theorem1_endtoend for delta > 0");
            else
                require(cfg.delta > 0.0, ErrorKind::invalid_argument, "theorem1_endtoend needs delta > 0");
            validate(tail_config(cfg, cfg.m_values.front()));
            break;
        }
        case ExperimentKind::continuity_sweep: {
            require_single_m(cfg);
            require(!cfg.d_values.empty() && !cfg.k_values.empty(), ErrorKind::invalid_argument, "continuity_sweep needs d_values and k_values");
            require(!cfg.delta_values.empty() || !cfg.delta_fractions.empty(), ErrorKind::invalid_argument,
                    "continuity_sweep needs delta_values or delta_fractions");
            for(double f : cfg.delta_fractions)
                require(f > 0.0 && f < 1.0, ErrorKind::out_of_theorem_domain, "delta_fractions must lie in (0, 1)");
            for(const auto &c : continuity_cells(cfg)) {
                require(c.d >= 2, ErrorKind::out_of_theorem_domain, "continuity_sweep needs d_A >= 2");
                require(c.k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
                require(cfg.m_values.front() >= c.d, ErrorKind::invalid_argument, "M must be >= d_A");
                require(c.delta > 0.0, ErrorKind::out_of_theorem_domain, "continuity_sweep needs delta > 0");
                continuity_bound(c.d, c.k, c.delta); // domain check
                checked_power(c.d, c.k, dimension_cap());
            }
            break;
        }
        case ExperimentKind::gradient_check: {
            require(!cfg.k_values.empty(), ErrorKind::invalid_argument, "gradient_check needs k_values");
            for(int k : cfg.k_values) {
                require(k >= 1, ErrorKind::invalid_argument, "k must be >= 1");
                checked_power(cfg.d_a, k, dimension_cap());
            }
            for(Index m : cfg.m_values) {
                if(m > kGradientMaxM) fail(ErrorKind::resource_limit, "gradient_check is limited to M <= 64");
                require(m >= cfg.d_a, ErrorKind::invalid_argument, "M must be >= d_A");
            }
            break;
        }
        case ExperimentKind::scaling_sweep: {
            require(cfg.m_values.size() >= 2, ErrorKind::invalid_argument, "scaling_sweep needs at least two values of M");
            std::vector<Index> sorted = cfg.m_values;
            std::sort(sorted.begin(), sorted.end());
            require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::invalid_argument, "M values must be distinct");
            require(cfg.delta == 0.0, ErrorKind::invalid_argument, "scaling_sweep runs at delta = 0");
            for(Index m : cfg.m_values) validate(tail_config(cfg, m));
            break;
        }
        case ExperimentKind::spinchain_demo: {
            validate(cfg.spinchain);
            require(cfg.n_random_bases >= 1, ErrorKind::invalid_argument, "n_random_bases must be >= 1");
            require(cfg.delta_prob > 0.0 && cfg.delta_prob < 1.0, ErrorKind::invalid_argument, "delta_prob must lie in (0, 1)");
            if(cfg.eps_prime_ref)
                require(*cfg.eps_prime_ref > 0.0 && *cfg.eps_prime_ref < 1.0, ErrorKind::invalid_argument, "eps_prime_ref must lie in (0, 1)");
            checked_power(cfg.spinchain.dim_a(), cfg.k, dimension_cap());
            break;
        }
        case ExperimentKind::oracle_check: {
            require(!cfg.checks.empty(), ErrorKind::invalid_argument, "checks must be nonempty");
            for(const auto &c : cfg.checks)
                require(std::find(kOracleChecks.begin(), kOracleChecks.end(), c) != kOracleChecks.end(), ErrorKind::invalid_argument,
                        "unknown oracle check '" + c + "'");
            require(cfg.n_samples >= 1, ErrorKind::invalid_argument, "n_samples must be >= 1");
            break;
        }
    }
}

json config_echo(const ExperimentConfig &cfg) {
    json j{{"experiment", to_string(cfg.experiment)},
           {"seed", cfg.seed},
           {"record_timing", cfg.record_timing}};
    switch(cfg.experiment) {
        case ExperimentKind::lemma2_tail:
        case ExperimentKind::theorem1_endtoend:
        case ExperimentKind::scaling_sweep:
            j["d_a"]        = cfg.d_a;
            j["k"]          = cfg.k;
            j["m"]          = cfg.m_values;
            j["delta"]      = cfg.delta;
            j["eps_prime"]  = cfg.eps_prime;
            j["delta_prob"] = cfg.delta_prob;
            j["n_trials"]   = cfg.n_trials;
            break;
        case ExperimentKind::continuity_sweep:
            j["d_values"]        = cfg.d_values;
            j["k_values"]        = cfg.k_values;
            j["m"]               = cfg.m_values;
            j["delta_values"]    = cfg.delta_values;
            j["delta_fractions"] = cfg.delta_fractions;
            j["n_trials"]        = cfg.n_trials;
            break;
        case ExperimentKind::gradient_check:
            j["d_a"]      = cfg.d_a;
            j["k_values"] = cfg.k_values;
            j["m"]        = cfg.m_values;
            j["n_trials"] = cfg.n_trials;
            break;
        case ExperimentKind::spinchain_demo: {
            const auto &s = cfg.spinchain;
            j["k"]          = cfg.k;
            j["delta_prob"] = cfg.delta_prob;
            j["spinchain"]  = {{"n_sites", s.n_sites},           {"j", s.j},     {"h_x", s.h_x},   {"h_z", s.h_z},
                               {"boundary", to_string(s.boundary)}, {"cut", s.cut}, {"times", s.times}, {"initial_state", s.initial_state},
                               {"n_random_bases", cfg.n_random_bases}};
            if(cfg.eps_prime_ref) j["spinchain"]["eps_prime_ref"] = *cfg.eps_prime_ref;
            break;
        }
        case ExperimentKind::oracle_check:
            j["checks"]    = cfg.checks;
            j["n_samples"] = cfg.n_samples;
            break;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Criteria

Criterion Criterion::make(std::string name, double observed, std::string relation, double bound) {
    Criterion c{std::move(name), observed, std::move(relation), bound, false};
    if(c.relation == "<=") c.passed = observed <= bound;
    else if(c.relation == "<") c.passed = observed < bound;
    else if(c.relation == ">=") c.passed = observed >= bound;
    else fail(ErrorKind::invalid_argument, "unknown criterion relation '" + c.relation + "'");
    return c;
}

bool SummaryReport::passed() const {
    return !criteria.empty() && std::all_of(criteria.begin(), criteria.end(), [](const Criterion &c) { return c.passed; });
}

namespace {

    struct Outcome {
        std::vector<Criterion> criteria;
        json                   results = json::object();
        std::string            rows; // CSV content
        std::string            stream_rule;
    };

    std::string fmt_bool(bool b) { return b ? "1" : "0"; }

    json wilson_json(const WilsonInterval &w) {
        return {{"center", w.center}, {"lower", w.lower}, {"upper", w.upper}, {"half_width", w.half_width}};
    }

    // -- tail experiments --------------------------------------------------

    Outcome run_tail(const ExperimentConfig &cfg) {
        const TailResult r = monte_carlo_tail(tail_config(cfg, cfg.m_values.front()));
        Outcome          out;
        out.stream_rule = "trial i uses RngStream(seed, i)";
        out.rows        = records_to_csv(r.records);

        double max_error = 0.0;
        for(const auto &rec : r.records) max_error = std::max(max_error, rec.design_error);
        out.results = {{"exceedances", r.exceedances},
                       {"fraction", r.fraction},
                       {"wilson95", wilson_json(r.wilson)},
                       {"tail_bound", r.tail_bound},
                       {"threshold_used", r.threshold},
                       {"threshold_M", r.threshold_m},
                       {"below_threshold", r.below_threshold},
                       {"max_design_error", max_error},
                       {"report", to_json(r.report)}};

        out.criteria.push_back(Criterion::make("fraction_le_tail_bound_plus_3_halfwidths", r.fraction, "<=",
                                               r.tail_bound + 3.0 * r.wilson.half_width));
        if(!r.below_threshold) {
            out.criteria.push_back(Criterion::make("exceedance_fraction_le_Delta", r.fraction, "<=", cfg.delta_prob));
            out.criteria.push_back(Criterion::make("wilson_upper_le_Delta", r.wilson.upper, "<=", cfg.delta_prob));
        }
        return out;
    }

    // -- continuity sweep --------------------------------------------------

    Outcome run_continuity(const ExperimentConfig &cfg) {
        const auto                  cells = continuity_cells(cfg);
        const Index                 m     = cfg.m_values.front();
        const std::uint64_t         per   = cfg.n_trials;
        std::vector<TrialRecord>    records(cells.size() * per);
        std::vector<double>         ratios(records.size());

        parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
            const auto        start = std::chrono::steady_clock::now();
            const auto       &cell  = cells[i / per];
            RngStream         rng(cfg.seed, i);
            const auto        psi   = perturbed_thermal_state(cell.d, m, cell.delta, rng);
            const auto        basis = MeasurementBasis(haar_unitary(m, rng));
            const BoundReport rep   = check_continuity(psi, basis, cell.k);

            TrialRecord rec;
            rec.trial_index    = i;
            rec.stream_index   = i;
            rec.d_a            = cell.d;
            rec.k              = cell.k;
            rec.m              = m;
            rec.delta          = *rep.context.delta;
            rec.design_error   = rep.observed_value;
            rec.threshold_used = rep.bound_value;
            rec.exceeded       = !rep.satisfied;
            if(cfg.record_timing)
                rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            records[i] = rec;
            ratios[i]  = rep.observed_value / rep.bound_value;
        });

        Outcome out;
        out.stream_rule = "trial i (cell-major) uses RngStream(seed, i)";
        out.rows        = records_to_csv(records);
        std::uint64_t violations = 0;
        for(const auto &r : records) violations += r.exceeded ? 1 : 0;
        const double max_ratio = *std::max_element(ratios.begin(), ratios.end());

        json per_cell = json::array();
        for(std::size_t c = 0; c < cells.size(); ++c) {
            double cell_max = 0.0;
            for(std::size_t i = c * per; i < (c + 1) * per; ++i) cell_max = std::max(cell_max, ratios[i]);
            per_cell.push_back({{"d_A", cells[c].d}, {"k", cells[c].k}, {"delta", cells[c].delta},
                                {"bound", continuity_bound(cells[c].d, cells[c].k, cells[c].delta)}, {"max_ratio", cell_max}});
        }
        out.results = {{"trials", records.size()}, {"violations", violations}, {"max_tightness_ratio", max_ratio}, {"cells", per_cell}};
        out.criteria.push_back(Criterion::make("violations", static_cast<double>(violations), "<=", 0.0));
        out.criteria.push_back(Criterion::make("max_tightness_ratio", max_ratio, "<", 1.0));
        return out;
    }

    // -- gradient check ----------------------------------------------------

    struct GradientRow {
        int         k;
        Index       m;
        double      max_norm;
        double      bound;
        std::size_t alpha;
        double      directional;
        double      lambda;
        double      curve_deviation;
        double      curve_tolerance;
    };

    Outcome run_gradient(const ExperimentConfig &cfg) {
        struct Cell {
            int   k;
            Index m;
        };
        std::vector<Cell> cells;
        for(int k : cfg.k_values)
            for(Index m : cfg.m_values) cells.push_back({k, m});
        const std::uint64_t      per = cfg.n_trials;
        std::vector<GradientRow> rows(cells.size() * per);
        constexpr double         h = 1e-5;

        parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
            const Cell   &cell = cells[i / per];
            RngStream     rng(cfg.seed, i);
            GradientProbe probe = GradientProbe::make(haar_unitary(cell.m, rng), cfg.d_a, cell.k);
            const auto    n_alpha = probe.basis.elements.size();
            const auto    alpha   = std::min(n_alpha - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_alpha)));
            const CMatrix g       = random_skew_hermitian(cell.m, rng);
            const double  lambda  = rng.uniform();
            const CMatrix g_curve = random_skew_hermitian(cell.m, rng);

            const BoundReport bound = check_gradient_bound(probe);
            const BoundReport dir   = check_directional_derivative(probe, alpha, g, h);
            const BoundReport curve = check_derivative_identity(canonical_isometry_curve(probe.w, g_curve), lambda, h, cell.k);
            rows[i] = {cell.k, cell.m, bound.observed_value, bound.bound_value, alpha, dir.observed_value, lambda, curve.observed_value,
                       curve.tolerance};
        });

        CsvTable table;
        table.header = {"trial_index", "stream_index", "d_A", "k", "M", "max_gradient_norm", "lipschitz_bound", "alpha",
                        "directional_deviation", "curve_lambda", "derivative_deviation", "derivative_tolerance"};
        double max_dir = 0.0, max_curve = 0.0;
        for(std::size_t i = 0; i < rows.size(); ++i) {
            const auto &r = rows[i];
            table.add_row({std::to_string(i), std::to_string(i), std::to_string(cfg.d_a), std::to_string(r.k), std::to_string(r.m),
                           format_double(r.max_norm), format_double(r.bound), std::to_string(r.alpha), format_double(r.directional),
                           format_double(r.lambda), format_double(r.curve_deviation), format_double(r.curve_tolerance)});
            max_dir   = std::max(max_dir, r.directional);
            max_curve = std::max(max_curve, r.curve_deviation);
        }

        Outcome out;
        out.stream_rule = "probe i ((k, M)-cell-major) uses RngStream(seed, i)";
        out.rows        = table.to_csv();
        json per_k      = json::array();
        for(int k : cfg.k_values) {
            double worst = 0.0;
            for(const auto &r : rows)
                if(r.k == k) worst = std::max(worst, r.max_norm);
            const double bound = lipschitz_bound(cfg.d_a, k);
            per_k.push_back({{"k", k}, {"max_gradient_norm", worst}, {"lipschitz_bound", bound}});
            out.criteria.push_back(Criterion::make("max_gradient_norm_k" + std::to_string(k), worst, "<=", bound + 1e-9));
        }
        out.criteria.push_back(Criterion::make("max_directional_deviation", max_dir, "<=", 1e-6));
        out.criteria.push_back(Criterion::make("max_derivative_identity_deviation", max_curve, "<=", 1e-7));
        out.results = {{"probes", rows.size()}, {"per_k", per_k}, {"max_directional_deviation", max_dir},
                       {"max_derivative_identity_deviation", max_curve}, {"step", h}};
        return out;
    }

    // -- scaling sweep -----------------------------------------------------

    double median(std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    /// Least-squares slope of log(y) against log(x).
    double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
        const std::size_t n = x.size();
        double            mx = 0.0, my = 0.0;
        for(std::size_t i = 0; i < n; ++i) {
            mx += std::log(x[i]);
            my += std::log(y[i]);
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0.0, sxx = 0.0;
        for(std::size_t i = 0; i < n; ++i) {
            const double dx = std::log(x[i]) - mx;
            sxy += dx * (std::log(y[i]) - my);
            sxx += dx * dx;
        }
        return sxy / sxx;
    }

    Outcome run_scaling(const ExperimentConfig &cfg) {
        const std::uint64_t      per = cfg.n_trials;
        std::vector<TrialRecord> records(cfg.m_values.size() * per);
        const MomentOperator     haar = haar_moment_operator(cfg.d_a, cfg.k);
        std::vector<TailConfig>  tails;
        for(Index m : cfg.m_values) tails.push_back(tail_config(cfg, m));

        parallel_for(records.size(), cfg.workers, [&](std::size_t i) { records[i] = run_tail_trial(tails[i / per], haar, i); });

        Outcome out;
        out.stream_rule = "trial i (M-major) uses RngStream(seed, i)";
        out.rows        = records_to_csv(records);
        std::vector<double> ms, medians;
        json                per_m = json::array();
        for(std::size_t c = 0; c < cfg.m_values.size(); ++c) {
            std::vector<double> errors;
            for(std::size_t i = c * per; i < (c + 1) * per; ++i) errors.push_back(records[i].design_error);
            ms.push_back(static_cast<double>(cfg.m_values[c]));
            medians.push_back(median(errors));
            per_m.push_back({{"M", cfg.m_values[c]}, {"median_design_error", medians.back()}});
        }
        const double slope = loglog_slope(ms, medians);
        out.results        = {{"per_M", per_m}, {"loglog_slope", slope}, {"expected_slope", -0.5}};
        out.criteria.push_back(Criterion::make("loglog_slope_lower", slope, ">=", -0.6));
        out.criteria.push_back(Criterion::make("loglog_slope_upper", slope, "<=", -0.4));
        return out;
    }

    // -- spin chain --------------------------------------------------------

    Outcome run_spinchain(const ExperimentConfig &cfg) {
        TraceOptions opts;
        opts.k              = cfg.k;
        opts.n_random_bases = cfg.n_random_bases;
        opts.seed           = cfg.seed;
        opts.workers        = cfg.workers;
        opts.delta_prob     = cfg.delta_prob;
        opts.eps_prime_ref  = cfg.eps_prime_ref;
        const SpinChainTrace trace = design_error_trace(cfg.spinchain, opts);

        CsvTable table;
        table.header = {"slice", "t", "basis", "delta", "design_error", "q10", "q50", "q90", "theorem_ceiling", "fraction_within_ceiling"};
        double min_delta = std::numeric_limits<double>::infinity();
        double late_min_fraction = std::numeric_limits<double>::infinity();
        double late_max_q90      = 0.0;
        std::size_t late         = 0;
        double max_norm_defect = 0.0, max_prob_defect = 0.0;
        json   slices = json::array();
        for(std::size_t s = 0; s < trace.slices.size(); ++s) {
            const auto &sl = trace.slices[s];
            const bool  comp_within = std::isfinite(sl.theorem_ceiling) && sl.design_error_comp <= sl.theorem_ceiling;
            table.add_row({std::to_string(s), format_double(sl.t), "computational", format_double(sl.delta), format_double(sl.design_error_comp),
                           format_double(sl.design_error_comp), format_double(sl.design_error_comp), format_double(sl.design_error_comp),
                           format_double(sl.theorem_ceiling), comp_within ? "1" : "0"});
            table.add_row({std::to_string(s), format_double(sl.t), "haar_random", format_double(sl.delta), format_double(sl.q50),
                           format_double(sl.q10), format_double(sl.q50), format_double(sl.q90), format_double(sl.theorem_ceiling),
                           format_double(sl.fraction_within_ceiling)});
            if(sl.t <= 20.0) min_delta = std::min(min_delta, sl.delta);
            if(sl.t <= 20.0 && sl.delta < 0.05) {
                ++late;
                late_min_fraction = std::min(late_min_fraction, sl.fraction_within_ceiling);
                late_max_q90      = std::max(late_max_q90, sl.q90);
            }
            max_norm_defect = std::max(max_norm_defect, sl.norm_defect);
            max_prob_defect = std::max(max_prob_defect, sl.probability_defect);
            slices.push_back({{"t", sl.t},
                              {"delta", sl.delta},
                              {"design_error_comp", sl.design_error_comp},
                              {"q10", sl.q10},
                              {"q50", sl.q50},
                              {"q90", sl.q90},
                              {"theorem_ceiling", sl.theorem_ceiling},
                              {"fraction_within_ceiling", sl.fraction_within_ceiling},
                              {"energy", trace.energies[s]}});
        }
        if(late == 0) late_min_fraction = 0.0;
        const auto [e_lo, e_hi] = std::minmax_element(trace.energies.begin(), trace.energies.end());

        Outcome out;
        out.stream_rule = "random basis b at slice s uses RngStream(seed, s * n_random_bases + b)";
        out.rows        = table.to_csv();
        out.results     = {{"d_A", trace.d_a},
                           {"M", trace.m},
                           {"eps_prime_ref", trace.eps_prime_ref},
                           {"threshold_M_at_eps_prime_ref", trace.threshold_m},
                           {"threshold_met", trace.threshold_m <= static_cast<std::uint64_t>(trace.m)},
                           {"late_slices", late},
                           {"energy_drift", *e_hi - *e_lo},
                           {"max_norm_defect", max_norm_defect},
                           {"max_probability_defect", max_prob_defect},
                           {"slices", slices}};
        out.criteria.push_back(Criterion::make("min_delta_up_to_t20", min_delta, "<", 0.05));
        out.criteria.push_back(Criterion::make("late_min_fraction_within_ceiling", late_min_fraction, ">=", 0.9));
        out.criteria.push_back(Criterion::make("late_max_q90_random_basis_error", late ? late_max_q90 : 1.0, "<=", 0.35));
        out.criteria.push_back(
            Criterion::make("final_comp_error_below_initial", trace.slices.back().design_error_comp, "<", trace.slices.front().design_error_comp));
        return out;
    }

    // -- oracle checks -----------------------------------------------------

    struct OracleRow {
        std::string   check;
        std::uint64_t trial = 0;
        std::uint64_t stream = 0;
        Index         d = 0;
        int           k = 0;
        Index         m = 0;
        double        delta = 0.0;
        double        observed = 0.0;
        double        bound = 0.0;
        double        tolerance = 0.0;
        bool          passed = false;
    };

    /// Disjoint stream ranges per check.
    std::uint64_t stream_base(const std::string &check) {
        const auto pos = std::find(kOracleChecks.begin(), kOracleChecks.end(), check) - kOracleChecks.begin();
        return static_cast<std::uint64_t>(pos) << 40;
    }

    OracleRow from_report(const std::string &check, std::uint64_t trial, std::uint64_t stream, const BoundReport &rep) {
        OracleRow r;
        r.check     = check;
        r.trial     = trial;
        r.stream    = stream;
        r.d         = rep.context.d_a.value_or(0);
        r.k         = rep.context.k.value_or(0);
        r.m         = rep.context.m.value_or(0);
        r.delta     = rep.context.delta.value_or(0.0);
        r.observed  = rep.observed_value;
        r.bound     = rep.bound_value;
        r.tolerance = rep.tolerance;
        r.passed    = rep.satisfied;
        return r;
    }

    std::vector<OracleRow> oracle_one_design(const ExperimentConfig &cfg) {
        constexpr std::size_t n = 1000;
        const Index           dims[] = {2, 3, 4};
        const Index           ms[]   = {8, 16, 32, 64, 128, 256};
        const std::uint64_t   base   = stream_base("one_design");
        std::vector<OracleRow> rows(n);
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            const Index d = dims[i % 3];
            const Index m = ms[(i / 3) % 6];
            RngStream   rng(cfg.seed, base + i);
            const auto  e   = row_ensemble(haar_isometry(m, d, rng));
            const double dev = trace_norm_hermitian(e.average_state().matrix() - CMatrix::Identity(d, d) / static_cast<double>(d));
            BoundContext ctx;
            ctx.d_a = d;
            ctx.k   = 1;
            ctx.m   = m;
            rows[i] = from_report("one_design", i, base + i, BoundReport::make("one_design", 0.0, dev, 1e-10, ctx));
        });
        return rows;
    }

    std::vector<OracleRow> oracle_haar_moment(const ExperimentConfig &cfg) {
        struct Cell {
            Index d;
            int   k;
        };
        std::vector<Cell> cells;
        for(Index d = 1; d <= 3; ++d)
            for(int k = 1; k <= 3; ++k) cells.push_back({d, k});
        constexpr std::uint64_t chunk    = 1000;
        const std::uint64_t     n_chunks = (cfg.n_samples + chunk - 1) / chunk;
        const std::uint64_t     base     = stream_base("haar_moment");

        std::vector<CMatrix> partial(cells.size() * n_chunks);
        parallel_for(partial.size(), cfg.workers, [&](std::size_t i) {
            const Cell         &cell  = cells[i / n_chunks];
            const std::uint64_t j     = i % n_chunks;
            const std::uint64_t count = std::min(chunk, cfg.n_samples - j * chunk);
            RngStream           rng(cfg.seed, base + i);
            const Index         dim = checked_power(cell.d, cell.k, dimension_cap());
            CMatrix             t(dim, static_cast<Index>(count));
            for(std::uint64_t s = 0; s < count; ++s)
                t.col(static_cast<Index>(s)) = kron_power(haar_pure_state(cell.d, rng).amplitudes(), cell.k);
            partial[i] = t * t.adjoint();
        });

        std::vector<OracleRow> rows;
        for(std::size_t c = 0; c < cells.size(); ++c) {
            CMatrix sum = partial[c * n_chunks];
            for(std::uint64_t j = 1; j < n_chunks; ++j) sum += partial[c * n_chunks + j];
            sum /= static_cast<double>(cfg.n_samples);
            const MomentOperator haar = haar_moment_operator(cells[c].d, cells[c].k);
            const double         dev  = trace_norm_hermitian(0.5 * (sum + sum.adjoint()) - haar.matrix());
            BoundContext         ctx;
            ctx.d_a = cells[c].d;
            ctx.k   = cells[c].k;
            rows.push_back(from_report("haar_moment", c, base + c * n_chunks, BoundReport::make("haar_moment", 5e-2, dev, 0.0, ctx)));
        }
        return rows;
    }

    std::vector<OracleRow> oracle_covariance(const ExperimentConfig &cfg) {
        constexpr std::size_t  n = 100;
        constexpr Index        m = 16;
        constexpr int          k = 2;
        const std::uint64_t    base = stream_base("covariance");
        std::vector<OracleRow> rows(n);
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            const Index      d = i % 2 ? 3 : 2;
            RngStream        rng(cfg.seed, base + i);
            const HaarUnitary u   = haar_unitary(m, rng);
            const HaarUnitary u_a = haar_unitary(d, rng);
            const Isometry    w   = Isometry::standard_embedding(m, d);
            const Isometry    rotated(u.matrix() * embed_local_unitary(u_a.matrix(), m) * w.matrix());
            const Isometry    plain(u.matrix() * w.matrix());
            const auto        lhs = moment_operator(row_ensemble(rotated), k);
            const auto        rhs = moment_operator(rotate_members(row_ensemble(plain), u_a.matrix().adjoint()), k);
            BoundContext      ctx;
            ctx.d_a = d;
            ctx.k   = k;
            ctx.m   = m;
            rows[i] = from_report("covariance", i, base + i,
                                  BoundReport::make("covariance", 0.0, trace_norm_hermitian(lhs.matrix() - rhs.matrix()), 1e-10, ctx));
        });
        return rows;
    }

    std::vector<OracleRow> oracle_normalization(const ExperimentConfig &cfg) {
        constexpr std::size_t  n      = 1000;
        constexpr Index        m      = 32;
        const double           deltas[] = {0.01, 0.1};
        const Index            dims[]   = {2, 3, 4};
        const std::uint64_t    base   = stream_base("normalization");
        std::vector<OracleRow> rows(n);
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            const double delta = deltas[i % 2];
            const Index  d     = dims[(i / 2) % 3];
            RngStream    rng(cfg.seed, base + i);
            const auto   rho = random_density_at_distance(d, delta, rng);
            const auto   v   = haar_isometry(m, d, rng);
            rows[i]          = from_report("normalization", i, base + i, check_normalization_lemma(v, rho));
        });
        return rows;
    }

    std::vector<OracleRow> oracle_mixture(const ExperimentConfig &cfg) {
        constexpr std::size_t  n    = 1000;
        const std::uint64_t    base = stream_base("mixture");
        std::vector<OracleRow> rows(n);
        parallel_for(n, cfg.workers, [&](std::size_t i) {
            const Index d    = 2 + static_cast<Index>(i % 2);
            const int   k    = 1 + static_cast<int>((i / 2) % 3);
            const auto  size = 1 + (i / 6) % 4;
            RngStream   rng(cfg.seed, base + i);
            DensityEnsemble a, b;
            const auto weights = [&] {
                std::vector<double> w(size);
                double              total = 0.0;
                for(auto &x : w) total += (x = 0.05 + rng.uniform());
                for(auto &x : w) x /= total;
                return w;
            };
            a.probabilities = weights();
            b.probabilities = weights();
            for(std::size_t z = 0; z < size; ++z) {
                a.densities.push_back(random_density(d, rng));
                b.densities.push_back(random_density(d, rng));
            }
            rows[i] = from_report("mixture", i, base + i, check_mixture_inequality(a, b, k));
        });
        return rows;
    }

    Outcome run_oracle(const ExperimentConfig &cfg) {
        CsvTable table;
        table.header = {"check", "trial_index", "stream_index", "d", "k", "M", "delta", "observed", "bound", "tolerance", "passed"};
        Outcome out;
        out.stream_rule = "check c, item i uses RngStream(seed, (c << 40) + i); haar_moment chunks of 1000 samples per stream";
        for(const auto &check : cfg.checks) {
            std::vector<OracleRow> rows;
            if(check == "one_design") rows = oracle_one_design(cfg);
            else if(check == "haar_moment") rows = oracle_haar_moment(cfg);
            else if(check == "covariance") rows = oracle_covariance(cfg);
            else if(check == "normalization") rows = oracle_normalization(cfg);
            else rows = oracle_mixture(cfg);

            std::uint64_t failures = 0;
            double        min_margin = std::numeric_limits<double>::infinity();
            for(const auto &r : rows) {
                table.add_row({r.check, std::to_string(r.trial), std::to_string(r.stream), std::to_string(r.d), std::to_string(r.k),
                               std::to_string(r.m), format_double(r.delta), format_double(r.observed), format_double(r.bound),
                               format_double(r.tolerance), fmt_bool(r.passed)});
                failures += r.passed ? 0 : 1;
                min_margin = std::min(min_margin, r.bound - r.observed);
            }
            out.results[check] = {{"cases", rows.size()}, {"failures", failures}, {"min_margin", min_margin}};
            out.criteria.push_back(Criterion::make(check + "_failures", static_cast<double>(failures), "<=", 0.0));
        }
        out.rows = table.to_csv();
        return out;
    }

    json criterion_json(const Criterion &c) {
        return {{"name", c.name}, {"observed", c.observed}, {"relation", c.relation}, {"bound", c.bound}, {"passed", c.passed}};
    }

} // namespace

SummaryReport run_experiment(const ExperimentConfig &cfg) {
    validate(cfg);
    Outcome out;
    switch(cfg.experiment) {
        case ExperimentKind::lemma2_tail:
        case ExperimentKind::theorem1_endtoend: out = run_tail(cfg); break;
        case ExperimentKind::continuity_sweep: out = run_continuity(cfg); break;
        case ExperimentKind::gradient_check: out = run_gradient(cfg); break;
        case ExperimentKind::scaling_sweep: out = run_scaling(cfg); break;
        case ExperimentKind::spinchain_demo: out = run_spinchain(cfg); break;
        case ExperimentKind::oracle_check: out = run_oracle(cfg); break;
    }

    SummaryReport report;
    report.experiment   = cfg.experiment;
    report.criteria     = out.criteria;
    report.results      = out.results;
    report.records_path = cfg.output_dir / std::string(records_file_name(cfg.experiment));
    report.summary_path = cfg.output_dir / "summary.json";

    json criteria = json::array();
    for(const auto &c : report.criteria) criteria.push_back(criterion_json(c));
    report.document = {{"schema", kSummarySchema},
                       {"version", DESIGN_LAB_VERSION},
                       {"experiment", to_string(cfg.experiment)},
                       {"config", config_echo(cfg)},
                       {"rng", {{"algorithm", RngStream::algorithm_id}, {"seed", cfg.seed}, {"stream_rule", out.stream_rule}}},
                       {"results", out.results},
                       {"criteria", criteria},
                       {"passed", report.passed()},
                       {"records_file", records_file_name(cfg.experiment)}};

    write_text_file(report.records_path, out.rows);
    write_text_file(report.summary_path, report.document.dump(2) + "\n");
    return report;
}

} // namespace design_lab
