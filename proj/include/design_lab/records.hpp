#pragma once

#include "design_lab/tensor_core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace design_lab {

/// One Monte Carlo trial: its inputs, the observed design error and whether it
/// exceeded the threshold in force for the experiment.
struct TrialRecord {
    std::uint64_t trial_index    = 0;
    std::uint64_t stream_index   = 0;
    Index         d_a            = 0;
    int           k              = 0;
    Index         m              = 0;
    double        delta          = 0.0;
    double        design_error   = 0.0;
    double        threshold_used = 0.0;
    bool          exceeded       = false;
    double        wall_time_ms   = 0.0;

    friend bool operator==(const TrialRecord &, const TrialRecord &) = default;
};

inline constexpr std::string_view kTrialCsvHeader =
    "trial_index,stream_index,d_A,k,M,delta,design_error,threshold_used,exceeded,wall_time_ms";

enum class RecordFormat { csv, json };

/// Round-trip text for a double: printf %.17g.
std::string format_double(double x);

/// Serializes records (sorted by trial_index by the caller). Throws
/// invalid_argument on an empty list.
std::string records_to_csv(const std::vector<TrialRecord> &records);
std::string records_to_json(const std::vector<TrialRecord> &records);

std::vector<TrialRecord> parse_records_csv(std::string_view text);
std::vector<TrialRecord> parse_records_json(std::string_view text);

/// Writes the records to `path` in the requested format; throws io on failure.
void emit_records(const std::vector<TrialRecord> &records, RecordFormat format, const std::filesystem::path &path);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path &path, std::string_view content);
std::string read_text_file(const std::filesystem::path &path);

} // namespace design_lab

namespace design_lab {

/// Plain CSV table for experiments whose rows are not TrialRecords.
struct CsvTable {
    std::vector<std::string>              header;
    std::vector<std::vector<std::string>> rows;

    void               add_row(std::vector<std::string> row);
    [[nodiscard]] std::string to_csv() const;
};

} // namespace design_lab
