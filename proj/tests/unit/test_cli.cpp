#include "design_lab/cli.hpp"
#include "design_lab/records.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <sstream>
#include <vector>

using namespace design_lab;
using test_support::scratch_dir;

namespace {

struct Run {
    int         code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "design_lab");
    std::vector<const char *> argv;
    for(const auto &a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out  = out.str();
    r.err  = err.str();
    return r;
}

nlohmann::json last_json_line(const std::string &text) {
    const auto end   = text.find_last_not_of('\n');
    const auto start = text.rfind('\n', end);
    return nlohmann::json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1));
}

} // namespace

TEST_CASE("bounds subcommand prints the threshold") {
    const auto r = run({"bounds", "--d-a", "2", "--k", "2", "--eps-prime", "0.3", "--delta-prob", "0.1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("threshold_M 18459\n") != std::string::npos);
    CHECK(r.out.find("lipschitz_bound 4.2426406871192848") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with error JSON") {
    const auto none = run({});
    CHECK(none.code == 1);
    CHECK(none.err.find("Usage") != std::string::npos);
    CHECK(last_json_line(none.err).at("error").at("kind") == "usage");

    const auto unknown = run({"tail", "--bogus"});
    CHECK(unknown.code == 1);
    CHECK(last_json_line(unknown.err).at("error").at("kind") == "usage");

    const auto missing = run({"tail", "--config", "missing.file"});
    CHECK(missing.code == 1);
    CHECK(last_json_line(missing.err).at("error").at("kind") == "io");

    const auto domain = run({"theorem", "--delta", "0.3", "--trials", "1", "--out", scratch_dir("cli_domain").string()});
    CHECK(domain.code == 1);
    CHECK(last_json_line(domain.err).at("error").at("kind") == "out_of_theorem_domain");
}

TEST_CASE("passing run exits 0 and flags override the config file") {
    const auto dir = scratch_dir("cli_pass");
    write_text_file(dir / "tail.toml", "experiment = \"lemma2_tail\"\nk = 2\nm = 64\nn_trials = 50\n");
    const auto r = run({"tail", "--config", (dir / "tail.toml").string(), "--k", "1", "--trials", "5", "--out", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
    const auto records = parse_records_csv(read_text_file(dir / "out" / "records.csv"));
    CHECK(records.size() == 5);
    CHECK(records.front().k == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("violated criteria exit 2") {
    // A four-site chain never gets ρ_A close to I/2 within t = 1.
    const auto dir = scratch_dir("cli_fail");
    write_text_file(dir / "chain.toml", "[spinchain]\nn_sites = 4\ntimes = [0, 1]\nn_random_bases = 3\neps_prime_ref = 0.9\n");
    const auto r = run({"spinchain", "--config", (dir / "chain.toml").string(), "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.out.find("criterion min_delta_up_to_t20") != std::string::npos);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("help and version exit 0") {
    CHECK(run({"--help"}).code == 0);
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == std::string(DESIGN_LAB_VERSION) + "\n");
}
