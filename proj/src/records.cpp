#include "design_lab/records.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace design_lab {

using nlohmann::json;

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::string records_to_csv(const std::vector<TrialRecord> &records) {
    require(!records.empty(), ErrorKind::invalid_argument, "emit_records: record list is empty");
    std::string out(kTrialCsvHeader);
    out += '\n';
    for(const auto &r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.trial_index, r.stream_index, r.d_a, r.k, r.m, format_double(r.delta),
                           format_double(r.design_error), format_double(r.threshold_used), r.exceeded ? 1 : 0,
                           format_double(r.wall_time_ms));
    }
    return out;
}

std::string records_to_json(const std::vector<TrialRecord> &records) {
    require(!records.empty(), ErrorKind::invalid_argument, "emit_records: record list is empty");
    json rows = json::array();
    for(const auto &r : records) {
        rows.push_back({{"trial_index", r.trial_index},
                        {"stream_index", r.stream_index},
                        {"d_A", r.d_a},
                        {"k", r.k},
                        {"M", r.m},
                        {"delta", r.delta},
                        {"design_error", r.design_error},
                        {"threshold_used", r.threshold_used},
                        {"exceeded", r.exceeded},
                        {"wall_time_ms", r.wall_time_ms}});
    }
    return json{{"schema", "design_lab.records/1"}, {"records", rows}}.dump(2) + "\n";
}

namespace {

    template<class T>
    T parse_number(std::string_view field, const char *what) {
        T value{};
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if(ec != std::errc() || ptr != field.data() + field.size())
            fail(ErrorKind::invalid_argument, std::string("records: cannot parse ") + what + " from '" + std::string(field) + "'");
        return value;
    }

} // namespace

std::vector<TrialRecord> parse_records_csv(std::string_view text) {
    std::vector<TrialRecord> out;
    std::istringstream       in{std::string(text)};
    std::string              line;
    if(!std::getline(in, line) || line != kTrialCsvHeader) fail(ErrorKind::invalid_argument, "records: CSV header does not match the schema");
    while(std::getline(in, line)) {
        if(line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view              rest = line;
        for(std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) f.push_back(rest.substr(0, pos));
        f.push_back(rest);
        require(f.size() == 10, ErrorKind::invalid_argument, "records: expected 10 CSV fields, got " + std::to_string(f.size()));
        TrialRecord r;
        r.trial_index    = parse_number<std::uint64_t>(f[0], "trial_index");
        r.stream_index   = parse_number<std::uint64_t>(f[1], "stream_index");
        r.d_a            = parse_number<Index>(f[2], "d_A");
        r.k              = parse_number<int>(f[3], "k");
        r.m              = parse_number<Index>(f[4], "M");
        r.delta          = parse_number<double>(f[5], "delta");
        r.design_error   = parse_number<double>(f[6], "design_error");
        r.threshold_used = parse_number<double>(f[7], "threshold_used");
        const int exceeded = parse_number<int>(f[8], "exceeded");
        require(exceeded == 0 || exceeded == 1, ErrorKind::invalid_argument, "records: exceeded must be 0 or 1");
        r.exceeded     = exceeded == 1;
        r.wall_time_ms = parse_number<double>(f[9], "wall_time_ms");
        out.push_back(r);
    }
    return out;
}

std::vector<TrialRecord> parse_records_json(std::string_view text) {
    std::vector<TrialRecord> out;
    try {
        const json doc = json::parse(text);
        if(doc.at("schema") != "design_lab.records/1") fail(ErrorKind::invalid_argument, "records: unsupported JSON schema");
        for(const auto &row : doc.at("records")) {
            TrialRecord r;
            r.trial_index    = row.at("trial_index").get<std::uint64_t>();
            r.stream_index   = row.at("stream_index").get<std::uint64_t>();
            r.d_a            = row.at("d_A").get<Index>();
            r.k              = row.at("k").get<int>();
            r.m              = row.at("M").get<Index>();
            r.delta          = row.at("delta").get<double>();
            r.design_error   = row.at("design_error").get<double>();
            r.threshold_used = row.at("threshold_used").get<double>();
            r.exceeded       = row.at("exceeded").get<bool>();
            r.wall_time_ms   = row.at("wall_time_ms").get<double>();
            out.push_back(r);
        }
    } catch(const json::exception &e) {
        fail(ErrorKind::invalid_argument, std::string("records: malformed JSON: ") + e.what());
    }
    return out;
}

void write_text_file(const std::filesystem::path &path, std::string_view content) {
    std::error_code ec;
    if(path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if(ec) fail(ErrorKind::io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if(!out) fail(ErrorKind::io, "write to " + path.string() + " failed");
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if(!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit_records(const std::vector<TrialRecord> &records, RecordFormat format, const std::filesystem::path &path) {
    write_text_file(path, format == RecordFormat::csv ? records_to_csv(records) : records_to_json(records));
}

} // namespace design_lab

namespace design_lab {

void CsvTable::add_row(std::vector<std::string> row) {
    require(row.size() == header.size(), ErrorKind::invalid_argument, "CsvTable: row width does not match the header");
    rows.push_back(std::move(row));
}

std::string CsvTable::to_csv() const {
    require(!rows.empty(), ErrorKind::invalid_argument, "CsvTable: no rows to emit");
    const auto join = [](const std::vector<std::string> &fields) {
        std::string line;
        for(std::size_t i = 0; i < fields.size(); ++i) {
            if(i) line += ',';
            line += fields[i];
        }
        return line + '\n';
    };
    std::string out = join(header);
    for(const auto &row : rows) out += join(row);
    return out;
}

} // namespace design_lab
