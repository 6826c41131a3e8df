#include "design_lab/cli.hpp"
#include "design_lab/bounds.hpp"
#include "design_lab/harness.hpp"
#include "design_lab/records.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace design_lab {

namespace {

    struct Overrides {
        std::optional<std::string>   config;
        std::optional<std::uint64_t> seed;
        std::optional<unsigned>      workers;
        std::optional<std::string>   out;
        std::optional<Index>         d_a;
        std::optional<int>           k;
        std::vector<Index>           m;
        std::optional<double>        delta;
        std::optional<double>        eps_prime;
        std::optional<double>        delta_prob;
        std::optional<std::uint64_t> trials;
        bool                         timing = false;
    };

    void add_experiment_flags(CLI::App *sub, Overrides &o) {
        sub->add_option("--config", o.config, "TOML experiment file; flags override its values");
        sub->add_option("--seed", o.seed, "64-bit RNG seed");
        sub->add_option("--workers", o.workers, "worker threads (results do not depend on this)");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--d-a", o.d_a, "subsystem dimension d_A");
        sub->add_option("--k", o.k, "moment order k");
        sub->add_option("--m", o.m, "bath dimension M (comma-separated list for sweeps)")->delimiter(',');
        sub->add_option("--delta", o.delta, "distance of rho_A from I/d_A");
        sub->add_option("--eps-prime", o.eps_prime, "design error threshold eps'");
        sub->add_option("--delta-prob", o.delta_prob, "failure probability Delta");
        sub->add_option("--trials", o.trials, "trials per cell (Haar samples per (d, k) for oracle)");
        sub->add_flag("--timing", o.timing, "record per-trial wall time (breaks byte-identical output)");
    }

    ExperimentConfig resolve(ExperimentKind kind, const Overrides &o) {
        ExperimentConfig cfg = o.config ? load_config(*o.config, kind) : default_config(kind);
        const bool uses_lists = kind == ExperimentKind::continuity_sweep || kind == ExperimentKind::gradient_check;
        if(o.seed) cfg.seed = *o.seed;
        if(o.workers) cfg.workers = *o.workers;
        if(o.out) cfg.output_dir = *o.out;
        if(o.d_a) {
            if(kind == ExperimentKind::continuity_sweep) cfg.d_values = {*o.d_a};
            else cfg.d_a = *o.d_a;
        }
        if(o.k) {
            if(uses_lists) cfg.k_values = {*o.k};
            else cfg.k = *o.k;
        }
        if(!o.m.empty()) cfg.m_values = o.m;
        if(o.delta) {
            if(kind == ExperimentKind::continuity_sweep) {
                cfg.delta_values    = {*o.delta};
                cfg.delta_fractions = {};
            } else {
                cfg.delta = *o.delta;
            }
        }
        if(o.eps_prime) cfg.eps_prime = *o.eps_prime;
        if(o.delta_prob) cfg.delta_prob = *o.delta_prob;
        if(o.trials) {
            if(kind == ExperimentKind::oracle_check) cfg.n_samples = *o.trials;
            else cfg.n_trials = *o.trials;
        }
        if(o.timing) cfg.record_timing = true;
        return cfg;
    }

    void print_error(std::ostream &err, std::string_view kind, std::string_view message) {
        err << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
    }

    struct BoundsArgs {
        Index                 d_a = 0;
        int                   k   = 0;
        std::optional<double> eps_prime;
        std::optional<double> delta_prob;
        std::optional<double> delta;
        std::optional<Index>  m;
    };

    void print_bounds(const BoundsArgs &a, std::ostream &out) {
        out << "lipschitz_bound " << format_double(lipschitz_bound(a.d_a, a.k)) << '\n';
        if(a.eps_prime && a.delta_prob) out << "threshold_M " << design_threshold_m(a.d_a, a.k, *a.eps_prime, *a.delta_prob) << '\n';
        if(a.delta) {
            out << "continuity_bound " << format_double(continuity_bound(a.d_a, a.k, *a.delta)) << '\n';
            if(a.eps_prime) out << "theorem_epsilon " << format_double(theorem_epsilon(*a.eps_prime, a.k, a.d_a, *a.delta)) << '\n';
        }
        if(a.m && a.eps_prime) out << "tail_bound " << format_double(tail_bound(*a.m, a.d_a, a.k, *a.eps_prime)) << '\n';
        if(a.m && a.delta_prob) out << "eps_prime_for_M " << format_double(eps_prime_for_dimension(*a.m, a.d_a, a.k, *a.delta_prob)) << '\n';
    }

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"design_lab: numerical checks of projected-ensemble design bounds"};
    app.name("design_lab");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(DESIGN_LAB_VERSION));

    struct Entry {
        const char    *name;
        ExperimentKind kind;
        const char    *help;
    };
    const Entry entries[] = {
        {"tail", ExperimentKind::lemma2_tail, "Monte Carlo tail of the row-ensemble design error (delta = 0)"},
        {"theorem", ExperimentKind::theorem1_endtoend, "end-to-end tail with a perturbed thermal state (delta > 0)"},
        {"continuity", ExperimentKind::continuity_sweep, "continuity bound between a state and its thermal companion"},
        {"gradient", ExperimentKind::gradient_check, "gradient norms, directional derivatives and the derivative identity"},
        {"scaling", ExperimentKind::scaling_sweep, "median design error against M"},
        {"spinchain", ExperimentKind::spinchain_demo, "mixed-field Ising quench demonstrator"},
        {"oracle", ExperimentKind::oracle_check, "exact and Monte Carlo oracles (1-design, Haar moment, covariance, lemmas)"},
    };
    std::vector<Overrides> overrides(std::size(entries));
    std::vector<CLI::App *> subs;
    for(std::size_t i = 0; i < std::size(entries); ++i) {
        auto *sub = app.add_subcommand(entries[i].name, entries[i].help);
        add_experiment_flags(sub, overrides[i]);
        subs.push_back(sub);
    }

    BoundsArgs bounds_args;
    auto      *bounds = app.add_subcommand("bounds", "print closed-form bounds for the given parameters");
    bounds->add_option("--d-a", bounds_args.d_a, "subsystem dimension d_A")->required();
    bounds->add_option("--k", bounds_args.k, "moment order k")->required();
    bounds->add_option("--eps-prime", bounds_args.eps_prime, "design error threshold eps'");
    bounds->add_option("--delta-prob", bounds_args.delta_prob, "failure probability Delta");
    bounds->add_option("--delta", bounds_args.delta, "distance of rho_A from I/d_A");
    bounds->add_option("--m", bounds_args.m, "bath dimension M");

    if(argc <= 1) {
        err << app.help();
        print_error(err, "usage", "a subcommand is required");
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch(const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch(const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch(const CLI::CallForVersion &) {
        out << DESIGN_LAB_VERSION << '\n';
        return 0;
    } catch(const CLI::ParseError &e) {
        err << app.help();
        print_error(err, "usage", e.what());
        return 1;
    }

    try {
        if(bounds->parsed()) {
            print_bounds(bounds_args, out);
            return 0;
        }
        for(std::size_t i = 0; i < subs.size(); ++i) {
            if(!subs[i]->parsed()) continue;
            const ExperimentConfig cfg    = resolve(entries[i].kind, overrides[i]);
            const SummaryReport    report = run_experiment(cfg);
            for(const auto &c : report.criteria)
                out << "criterion " << c.name << ' ' << format_double(c.observed) << ' ' << c.relation << ' ' << format_double(c.bound) << ' '
                    << (c.passed ? "PASS" : "FAIL") << '\n';
            out << "records " << report.records_path.string() << '\n' << "summary " << report.summary_path.string() << '\n';
            return report.passed() ? 0 : 2;
        }
    } catch(const Error &e) {
        print_error(err, to_string(e.kind()), e.what());
        return 1;
    } catch(const std::exception &e) {
        print_error(err, "runtime", e.what());
        return 1;
    }
    return 1;
}

} // namespace design_lab
