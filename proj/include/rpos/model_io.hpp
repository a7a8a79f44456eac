#pragma once

// JSON model files.
//
//   {"matrix": {"b": SEQ, "c": SEQ} | {"a": SEQ},
//    "hamiltonian": {"alpha": SEQ} | {"b": SEQ, "c": SEQ}}     (optional)
//
//   SEQ  = {"prefix": [numbers...], "tail": number | null}
//
// A missing or null "tail" means NoTail. Unknown keys are rejected.

#include <optional>
#include <string>

#include <json.hpp>

#include "rpos/seqmodel.hpp"

namespace rpos {

struct Model {
  NearestNeighborMatrix matrix;
  std::optional<HamiltonianSpec> hamiltonian;
};

RealSequence parse_real_sequence(const nlohmann::json& j, const std::string& where);
PositiveSequence parse_positive_sequence(const nlohmann::json& j, const std::string& where);
Model parse_model(const nlohmann::json& j);
Model load_model(const std::string& path);

nlohmann::json to_json(const RealSequence& s);

}  // namespace rpos
