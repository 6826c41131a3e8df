#pragma once

#include "design_lab/ensembles.hpp"

#include <json.hpp>

/*
 * JSON forms used by golden-file tests.
 *
 *   ensemble: {"schema": "design_lab.ensemble/1", "dim": d, "source": "row",
 *              "members": [{"outcome": z, "p": p_z, "psi": [[re, im], ...]}, ...]}
 *   moment:   {"schema": "design_lab.moment/1", "dim": d, "k": k,
 *              "op": [[[re, im], ...], ...]}   (row-major)
 */

namespace design_lab {

inline constexpr const char *kEnsembleSchema = "design_lab.ensemble/1";
inline constexpr const char *kMomentSchema   = "design_lab.moment/1";

nlohmann::json complex_to_json(Complex c);
Complex        complex_from_json(const nlohmann::json &j);

nlohmann::json to_json(const StateEnsemble &e);
nlohmann::json to_json(const MomentOperator &m);
StateEnsemble  ensemble_from_json(const nlohmann::json &j);
MomentOperator moment_from_json(const nlohmann::json &j);

} // namespace design_lab
