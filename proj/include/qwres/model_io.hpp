#pragma once

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qwres/error.hpp"
#include "qwres/expr.hpp"
#include "qwres/model.hpp"

namespace qwres {

// Model files are JSON:
//
// {
//   "name": "example",                       optional
//   "eps_max": 0.5,                          optional, default unbounded
//   "vertices": ["u", "v"],
//   "arcs": [{"from": "u", "to": "v", "name": "a1"}, ...],
//   "in_tails": [{"index": 1, "at_vertex": "u", "name": "w1in"}, ...],   name optional
//   "out_tails": [{"index": 1, "at_vertex": "v"}, ...],
//   "coins": {"u": [["sqrt(1 - eps^2)", "-eps"], ["eps", "sqrt(1 - eps^2)"]], ...}
// }
//
// Coin rows follow the arcs leaving the vertex and columns the arcs entering
// it, both in carrier order: interior arcs as listed, then incoming tails by
// index, then outgoing tails by index. Unknown fields are rejected.

namespace detail {

using nlohmann::json;

inline void only_fields(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::ModelFormat, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(ErrorCode::ModelFormat, "unknown field '" + key + "' in " + where);
  }
}

template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorCode::ModelFormat, where + " lacks field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ModelFormat, where + "." + key + ": " + e.what());
  }
}

inline std::string entry_text(const json& e, const std::string& where) {
  if (e.is_string()) return e.get<std::string>();
  if (e.is_number()) return expr::format_number(e.get<double>());
  fail(ErrorCode::ModelFormat, where + " entries must be strings or numbers");
}

}  // namespace detail

inline ModelFamily load_model(const nlohmann::json& j) {
  using detail::field;
  detail::only_fields(j, {"name", "eps_max", "vertices", "arcs", "in_tails", "out_tails", "coins"}, "model");
  ModelFamily f;
  f.name = j.contains("name") ? field<std::string>(j, "name", "model") : "model";
  if (j.contains("eps_max")) f.eps_max = field<double>(j, "eps_max", "model");

  const auto vertices = field<std::vector<std::string>>(j, "vertices", "model");
  std::vector<ArcSpec> arcs;
  for (const auto& a : field<nlohmann::json>(j, "arcs", "model")) {
    detail::only_fields(a, {"from", "to", "name"}, "arc");
    arcs.push_back({field<std::string>(a, "from", "arc"), field<std::string>(a, "to", "arc"),
                    field<std::string>(a, "name", "arc")});
  }
  auto tails = [&](const char* key, std::vector<TailSpec>& out, std::vector<std::string>& names) {
    const auto list = field<nlohmann::json>(j, key, "model");
    if (!list.is_array()) fail(ErrorCode::ModelFormat, std::string(key) + " must be a list");
    std::vector<std::pair<int, std::string>> named;
    for (const auto& t : list) {
      detail::only_fields(t, {"index", "at_vertex", "name"}, key);
      TailSpec s{field<int>(t, "index", key), field<std::string>(t, "at_vertex", key)};
      out.push_back(s);
      if (t.contains("name")) named.emplace_back(s.index, field<std::string>(t, "name", key));
    }
    if (named.empty()) return false;
    if (named.size() != out.size()) fail(ErrorCode::ModelFormat, std::string(key) + ": name all tails or none");
    names.assign(out.size(), "");
    for (const auto& [idx, name] : named) {
      if (idx >= 1 && idx <= static_cast<int>(names.size())) names[idx - 1] = name;
    }
    return true;
  };
  std::vector<TailSpec> in_tails, out_tails;
  std::vector<std::string> in_names, out_names;
  const bool has_in = tails("in_tails", in_tails, in_names);
  const bool has_out = tails("out_tails", out_tails, out_names);
  f.graph = build_graph(vertices, arcs, in_tails, out_tails, has_in ? &in_names : nullptr,
                        has_out ? &out_names : nullptr);

  const auto coins = field<nlohmann::json>(j, "coins", "model");
  if (!coins.is_object()) fail(ErrorCode::ModelFormat, "coins must be an object keyed by vertex");
  for (const auto& [vname, m] : coins.items()) {
    const auto v = f.graph.find_vertex(vname);
    if (!v) fail(ErrorCode::ModelFormat, "coin for unknown vertex '" + vname + "'");
    if (!m.is_array()) fail(ErrorCode::ModelFormat, "coin at '" + vname + "' must be a list of rows");
    std::vector<std::vector<std::string>> text;
    for (const auto& row : m) {
      if (!row.is_array()) fail(ErrorCode::ModelFormat, "coin at '" + vname + "' must be a list of rows");
      std::vector<std::string> r;
      for (const auto& e : row) r.push_back(detail::entry_text(e, "coin at '" + vname + "'"));
      text.push_back(std::move(r));
    }
    if (text.size() != f.graph.degree(*v)) {
      fail(ErrorCode::DimensionMismatch, "coin at '" + vname + "' is " + std::to_string(text.size()) +
                                             "x" + std::to_string(text.size()) + ", degree is " +
                                             std::to_string(f.graph.degree(*v)));
    }
    f.coins.set(*v, text);
  }
  for (std::size_t k = 0; k < f.graph.num_vertices(); ++k) {
    if (!f.coins.coins.count(VertexId{k})) {
      fail(ErrorCode::ModelFormat, "no coin for vertex '" + f.graph.vertex_name(VertexId{k}) + "'");
    }
  }
  return f;
}

inline ModelFamily load_model_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ModelFormat, std::string("invalid JSON: ") + e.what());
  }
  return load_model(j);
}

inline ModelFamily load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ModelFormat, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_text(ss.str());
}

inline nlohmann::json to_json(const ModelFamily& f) {
  const GraphWithTails& g = f.graph;
  nlohmann::json j;
  j["name"] = f.name;
  if (f.eps_max < std::numeric_limits<double>::infinity()) j["eps_max"] = f.eps_max;
  j["vertices"] = g.vertex_names();
  auto vname = [&](std::optional<VertexId> v) { return g.vertex_name(*v); };
  j["arcs"] = nlohmann::json::array();
  for (std::size_t k = 0; k < g.num_interior_arcs(); ++k) {
    const Arc& a = g.arc(ArcId{k});
    j["arcs"].push_back({{"from", vname(a.origin)}, {"to", vname(a.terminus)}, {"name", a.name}});
  }
  j["in_tails"] = nlohmann::json::array();
  j["out_tails"] = nlohmann::json::array();
  for (int n = 1; n <= static_cast<int>(g.num_tails()); ++n) {
    const Arc& a = g.arc(g.incoming(n));
    j["in_tails"].push_back({{"index", n}, {"at_vertex", vname(a.terminus)}, {"name", a.name}});
    const Arc& b = g.arc(g.outgoing(n));
    j["out_tails"].push_back({{"index", n}, {"at_vertex", vname(b.origin)}, {"name", b.name}});
  }
  j["coins"] = nlohmann::json::object();
  for (const auto& [v, m] : f.coins.coins) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : m) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& e : row) r.push_back(print_expr(e));
      rows.push_back(r);
    }
    j["coins"][g.vertex_name(v)] = rows;
  }
  return j;
}

}  // namespace qwres
