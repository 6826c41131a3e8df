#include "design_lab/records.hpp"
#include "design_lab/serialization.hpp"
#include "test_support.hpp"

using namespace design_lab;
using nlohmann::json;
using test_support::expect_error;
using test_support::max_abs;

namespace {

json load(const char *name) { return json::parse(read_text_file(std::string(DESIGN_LAB_TEST_DATA) + "/" + name)); }

} // namespace

TEST_CASE("golden ensemble and moment of the standard embedding") {
    const auto ensemble = row_ensemble(Isometry::standard_embedding(3, 2));
    const auto golden   = ensemble_from_json(load("golden_ensemble.json"));
    CHECK(golden.size() == ensemble.size());
    CHECK((golden.probabilities() - ensemble.probabilities()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(max_abs(golden.states() - ensemble.states()) < 1e-15);
    CHECK(golden.outcomes() == ensemble.outcomes());

    const auto moment = moment_from_json(load("golden_moment.json"));
    CHECK(moment.order() == 2);
    CHECK(max_abs(moment.matrix() - moment_operator(ensemble, 2).matrix()) < 1e-15);
}

TEST_CASE("ensemble and moment JSON round-trip exactly") {
    RngStream  rng(31, 0);
    const auto e    = deformed_row_ensemble(haar_isometry(9, 3, rng), random_density(3, rng));
    const auto back = ensemble_from_json(json::parse(to_json(e).dump()));
    CHECK(back.probabilities() == e.probabilities());
    CHECK(back.states() == e.states());
    CHECK(back.outcomes() == e.outcomes());
    CHECK(back.source() == EnsembleSource::deformed_row);

    const auto m     = moment_operator(e, 2);
    const auto m_back = moment_from_json(json::parse(to_json(m).dump()));
    CHECK(m_back.matrix() == m.matrix());
    CHECK(m_back.base_dim() == 3);
}

TEST_CASE("malformed documents are rejected") {
    expect_error(ErrorKind::invalid_argument, [] { ensemble_from_json(json{{"schema", "other"}}); });
    expect_error(ErrorKind::invalid_argument, [] { complex_from_json(json::array({1.0})); });
    json doc = load("golden_moment.json");
    doc["op"][0].erase(0);
    expect_error(ErrorKind::invalid_argument, [&] { moment_from_json(doc); });
}
