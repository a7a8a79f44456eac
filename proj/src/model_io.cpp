#include "rpos/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rpos/error.hpp"

namespace rpos {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Validation, where + ": expected an object");
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::Validation, where + ": unknown key \"" + key + "\"");
  }
}

std::vector<double> parse_prefix(const json& j, const std::string& where) {
  if (!j.contains("prefix")) return {};
  const json& p = j.at("prefix");
  if (!p.is_array()) throw Error(ErrorCode::Validation, where + ".prefix: expected an array");
  std::vector<double> out;
  out.reserve(p.size());
  for (const auto& v : p) {
    if (!v.is_number()) throw Error(ErrorCode::Validation, where + ".prefix: non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

Tail parse_tail(const json& j, const std::string& where) {
  if (!j.contains("tail") || j.at("tail").is_null()) return NoTail{};
  const json& t = j.at("tail");
  if (!t.is_number()) throw Error(ErrorCode::Validation, where + ".tail: expected number or null");
  return ConstantTail{t.get<double>()};
}

}  // namespace

RealSequence parse_real_sequence(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown_keys(j, where, {"prefix", "tail"});
  std::vector<double> prefix = parse_prefix(j, where);
  Tail tail = parse_tail(j, where);
  if (prefix.empty() && std::holds_alternative<NoTail>(tail)) {
    throw Error(ErrorCode::Validation, where + ": empty sequence");
  }
  return {std::move(prefix), tail};
}

PositiveSequence parse_positive_sequence(const json& j, const std::string& where) {
  RealSequence s = parse_real_sequence(j, where);
  try {
    return make_sequence(s.prefix(), s.tail());
  } catch (const Error& e) {
    throw Error(ErrorCode::Validation, where + ": " + e.what(), e.index());
  }
}

Model parse_model(const json& j) {
  require_object(j, "model");
  reject_unknown_keys(j, "model", {"matrix", "hamiltonian"});
  if (!j.contains("matrix")) throw Error(ErrorCode::Validation, "model: missing \"matrix\"");

  const json& mj = j.at("matrix");
  require_object(mj, "matrix");
  std::optional<NearestNeighborMatrix> matrix;
  if (mj.contains("a")) {
    reject_unknown_keys(mj, "matrix", {"a"});
    matrix = NearestNeighborMatrix::symmetric_from_products(
        parse_positive_sequence(mj.at("a"), "matrix.a"));
  } else if (mj.contains("b") && mj.contains("c")) {
    reject_unknown_keys(mj, "matrix", {"b", "c"});
    matrix = matrix_from_edge_rewards(parse_real_sequence(mj.at("b"), "matrix.b"),
                                      parse_real_sequence(mj.at("c"), "matrix.c"));
  } else {
    throw Error(ErrorCode::Validation, "matrix: expected {\"a\"} or {\"b\", \"c\"}");
  }

  Model model{*matrix, std::nullopt};
  if (j.contains("hamiltonian")) {
    const json& hj = j.at("hamiltonian");
    require_object(hj, "hamiltonian");
    if (hj.contains("alpha")) {
      reject_unknown_keys(hj, "hamiltonian", {"alpha"});
      model.hamiltonian = SiteRewards{parse_real_sequence(hj.at("alpha"), "hamiltonian.alpha")};
    } else if (hj.contains("b") && hj.contains("c")) {
      reject_unknown_keys(hj, "hamiltonian", {"b", "c"});
      model.hamiltonian = EdgeRewards{parse_real_sequence(hj.at("b"), "hamiltonian.b"),
                                      parse_real_sequence(hj.at("c"), "hamiltonian.c")};
    } else {
      throw Error(ErrorCode::Validation,
                  "hamiltonian: expected {\"alpha\"} or {\"b\", \"c\"}");
    }
  }
  return model;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Validation, "cannot open model file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Validation, std::string("malformed JSON: ") + e.what());
  }
  return parse_model(j);
}

nlohmann::json to_json(const RealSequence& s) {
  json j;
  j["prefix"] = s.prefix();
  if (auto v = s.tail_value()) {
    j["tail"] = *v;
  } else {
    j["tail"] = nullptr;
  }
  return j;
}

}  // namespace rpos
