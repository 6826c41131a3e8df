#pragma once

#include "design_lab/spinchain.hpp"
#include "design_lab/tensor_core.hpp"

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace design_lab {

enum class ExperimentKind { lemma2_tail, theorem1_endtoend, continuity_sweep, gradient_check, scaling_sweep, spinchain_demo, oracle_check };

std::string_view to_string(ExperimentKind kind);
ExperimentKind   experiment_from_string(std::string_view name);

/// Checks run by oracle_check.
inline const std::vector<std::string> kOracleChecks{"one_design", "haar_moment", "covariance", "normalization", "mixture"};

struct ExperimentConfig {
    ExperimentKind      experiment = ExperimentKind::lemma2_tail;
    Index               d_a        = 2;
    int                 k          = 2;
    std::vector<Index>  d_values;        // continuity_sweep
    std::vector<int>    k_values;        // continuity_sweep, gradient_check
    std::vector<Index>  m_values{64};    // one entry for the tail experiments
    double              delta      = 0.0;
    std::vector<double> delta_values;    // continuity_sweep: absolute δ
    std::vector<double> delta_fractions; // continuity_sweep: δ as a fraction of 1/(2 d_A)
    double              eps_prime  = 0.3;
    double              delta_prob = 0.1;
    std::uint64_t       n_trials   = 100;
    std::uint64_t       n_samples  = 100000; // oracle_check: Haar states per (d, k)
    std::vector<std::string> checks = kOracleChecks;
    std::uint64_t       seed       = 0;
    unsigned            workers    = 1;
    std::filesystem::path output_dir = "design_lab_out";
    bool                record_timing = false;
    SpinChainConfig     spinchain;
    int                 n_random_bases = 50;
    std::optional<double> eps_prime_ref;
};

/// Defaults that reproduce the reference run of each experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Reads a TOML file on top of default_config(kind). The file's `experiment`
/// key, when present, must name `kind`; unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path &path, ExperimentKind kind);
ExperimentConfig parse_config(std::string_view toml_text, ExperimentKind kind);

/// Checks every field against the preconditions of the experiment it feeds.
void validate(const ExperimentConfig &cfg);

/// The config as echoed into summaries: everything except workers and output_dir,
/// which do not affect results.
nlohmann::json config_echo(const ExperimentConfig &cfg);

/// One asserted criterion: passed ⇔ `observed relation bound` for the stored numbers.
struct Criterion {
    std::string name;
    double      observed = 0.0;
    std::string relation; // "<=", "<", ">="
    double      bound    = 0.0;
    bool        passed   = false;

    static Criterion make(std::string name, double observed, std::string relation, double bound);
};

struct SummaryReport {
    ExperimentKind         experiment = ExperimentKind::lemma2_tail;
    std::vector<Criterion> criteria;
    nlohmann::json         results;
    nlohmann::json         document; // full summary.json content
    std::filesystem::path  records_path;
    std::filesystem::path  summary_path;

    [[nodiscard]] bool passed() const;
};

inline constexpr std::string_view kSummarySchema = "design_lab.summary/1";

/// Validates, runs, and writes <output_dir>/<records file> and <output_dir>/summary.json.
SummaryReport run_experiment(const ExperimentConfig &cfg);

/// File name of the per-row CSV written by `kind`.
std::string_view records_file_name(ExperimentKind kind);

} // namespace design_lab
