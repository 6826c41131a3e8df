#include "design_lab/serialization.hpp"

#include <string>

namespace design_lab {

using nlohmann::json;

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json &j) {
    require(j.is_array() && j.size() == 2, ErrorKind::invalid_argument, "complex numbers are encoded as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

namespace {
    void require_schema(const json &j, const char *schema) {
        require(j.is_object() && j.value("schema", std::string()) == schema, ErrorKind::invalid_argument,
                std::string("expected a document with schema ") + schema);
    }
} // namespace

json to_json(const StateEnsemble &e) {
    json members = json::array();
    for(Index z = 0; z < e.size(); ++z) {
        json psi = json::array();
        for(Index i = 0; i < e.dim(); ++i) psi.push_back(complex_to_json(e.states()(i, z)));
        members.push_back({{"outcome", e.outcome(z)}, {"p", e.probability(z)}, {"psi", std::move(psi)}});
    }
    return {{"schema", kEnsembleSchema}, {"dim", e.dim()}, {"source", std::string(to_string(e.source()))}, {"members", std::move(members)}};
}

json to_json(const MomentOperator &m) {
    json rows = json::array();
    for(Index r = 0; r < m.matrix().rows(); ++r) {
        json row = json::array();
        for(Index c = 0; c < m.matrix().cols(); ++c) row.push_back(complex_to_json(m.matrix()(r, c)));
        rows.push_back(std::move(row));
    }
    return {{"schema", kMomentSchema}, {"dim", m.base_dim()}, {"k", m.order()}, {"op", std::move(rows)}};
}

StateEnsemble ensemble_from_json(const json &j) {
    require_schema(j, kEnsembleSchema);
    const Index  dim     = j.at("dim").get<Index>();
    const json  &members = j.at("members");
    const Index  n       = static_cast<Index>(members.size());
    RVector      p(n);
    CMatrix      states(dim, n);
    std::vector<Index> outcomes;
    for(Index z = 0; z < n; ++z) {
        const json &m = members[static_cast<std::size_t>(z)];
        p(z)          = m.at("p").get<double>();
        outcomes.push_back(m.at("outcome").get<Index>());
        const json &psi = m.at("psi");
        require(static_cast<Index>(psi.size()) == dim, ErrorKind::invalid_argument, "ensemble member has wrong dimension");
        for(Index i = 0; i < dim; ++i) states(i, z) = complex_from_json(psi[static_cast<std::size_t>(i)]);
    }
    return StateEnsemble(std::move(p), std::move(states), std::move(outcomes), ensemble_source_from_string(j.at("source").get<std::string>()));
}

MomentOperator moment_from_json(const json &j) {
    require_schema(j, kMomentSchema);
    const Index dim  = j.at("dim").get<Index>();
    const int   k    = j.at("k").get<int>();
    const json &rows = j.at("op");
    const Index n    = static_cast<Index>(rows.size());
    CMatrix     op(n, n);
    for(Index r = 0; r < n; ++r) {
        require(static_cast<Index>(rows[static_cast<std::size_t>(r)].size()) == n, ErrorKind::invalid_argument, "moment operator must be square");
        for(Index c = 0; c < n; ++c) op(r, c) = complex_from_json(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    return MomentOperator(HermitianOperator(std::move(op)), dim, k);
}

} // namespace design_lab
