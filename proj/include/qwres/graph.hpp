#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qwres/error.hpp"

namespace qwres {

struct VertexId {
  std::size_t value = 0;
  auto operator<=>(const VertexId&) const = default;
};

struct ArcId {
  std::size_t value = 0;
  auto operator<=>(const ArcId&) const = default;
};

enum class ArcKind { Interior, Incoming, Outgoing };

/// Boundary arcs have one endpoint on a tail, which is not stored.
struct Arc {
  std::string name;
  ArcKind kind = ArcKind::Interior;
  std::optional<VertexId> origin;
  std::optional<VertexId> terminus;
  int tail = 0;  // 1-based tail index for boundary arcs, 0 otherwise
};

struct ArcSpec {
  std::string from;
  std::string to;
  std::string name;
};

struct TailSpec {
  int index = 0;
  std::string at_vertex;
};

/// Finite interior (V0, A0) with N incoming and N outgoing tails.
///
/// Arc ids are laid out as [A0 | in-boundary 1..N | out-boundary 1..N]; every
/// matrix over the carrier uses this order.
class GraphWithTails {
 public:
  std::size_t num_vertices() const { return vertex_names_.size(); }
  std::size_t num_interior_arcs() const { return num_interior_; }
  std::size_t num_tails() const { return num_tails_; }
  std::size_t carrier_size() const { return arcs_.size(); }

  const std::string& vertex_name(VertexId v) const { return vertex_names_.at(v.value); }
  const std::vector<std::string>& vertex_names() const { return vertex_names_; }
  std::optional<VertexId> find_vertex(const std::string& name) const {
    auto it = vertex_index_.find(name);
    if (it == vertex_index_.end()) return std::nullopt;
    return VertexId{it->second};
  }

  const Arc& arc(ArcId a) const { return arcs_.at(a.value); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::optional<ArcId> find_arc(const std::string& name) const {
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      if (arcs_[i].name == name) return ArcId{i};
    }
    return std::nullopt;
  }

  ArcId incoming(int n) const { return ArcId{num_interior_ + static_cast<std::size_t>(n - 1)}; }
  ArcId outgoing(int n) const {
    return ArcId{num_interior_ + num_tails_ + static_cast<std::size_t>(n - 1)};
  }

  VertexId incoming_anchor(int n) const { return *arc(incoming(n)).terminus; }
  VertexId outgoing_anchor(int n) const { return *arc(outgoing(n)).origin; }

  /// Coin column order at v: arcs ending at v, in arc-id order.
  const std::vector<ArcId>& in_slots(VertexId v) const { return in_slots_.at(v.value); }
  /// Coin row order at v: arcs leaving v, in arc-id order.
  const std::vector<ArcId>& out_slots(VertexId v) const { return out_slots_.at(v.value); }
  std::size_t degree(VertexId v) const { return in_slots(v).size(); }

  friend GraphWithTails build_graph(const std::vector<std::string>&, const std::vector<ArcSpec>&,
                                    const std::vector<TailSpec>&, const std::vector<TailSpec>&,
                                    const std::vector<std::string>*, const std::vector<std::string>*);

 private:
  std::vector<std::string> vertex_names_;
  std::map<std::string, std::size_t> vertex_index_;
  std::vector<Arc> arcs_;
  std::size_t num_interior_ = 0;
  std::size_t num_tails_ = 0;
  std::vector<std::vector<ArcId>> in_slots_;
  std::vector<std::vector<ArcId>> out_slots_;
};

namespace detail {

inline void check_tail_indices(const std::vector<TailSpec>& tails, const char* family) {
  std::set<int> seen;
  for (const auto& t : tails) {
    if (!seen.insert(t.index).second) {
      fail(ErrorCode::DuplicateTailIndex,
           std::string(family) + " tail index " + std::to_string(t.index) + " repeated");
    }
  }
  for (const auto& t : tails) {
    if (t.index < 1 || t.index > static_cast<int>(tails.size())) {
      fail(ErrorCode::DuplicateTailIndex, std::string(family) + " tail indices must be 1.." +
                                              std::to_string(tails.size()) + ", got " +
                                              std::to_string(t.index));
    }
  }
}

}  // namespace detail

/// Validates and builds a graph with tails. Optional name lists label the
/// boundary arcs (by tail index); defaults are "in<n>" and "out<n>".
inline GraphWithTails build_graph(const std::vector<std::string>& vertices,
                                  const std::vector<ArcSpec>& arcs,
                                  const std::vector<TailSpec>& in_tails,
                                  const std::vector<TailSpec>& out_tails,
                                  const std::vector<std::string>* in_names = nullptr,
                                  const std::vector<std::string>* out_names = nullptr) {
  GraphWithTails g;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!g.vertex_index_.emplace(vertices[i], i).second) {
      fail(ErrorCode::DuplicateName, "vertex '" + vertices[i] + "' declared twice");
    }
  }
  g.vertex_names_ = vertices;
  if (vertices.empty()) fail(ErrorCode::EmptyInterior, "no interior vertices");

  auto lookup = [&](const std::string& name, const std::string& what) {
    auto v = g.find_vertex(name);
    if (!v) fail(ErrorCode::DanglingArc, what + " references unknown vertex '" + name + "'");
    return *v;
  };

  std::set<std::string> arc_names;
  for (const auto& a : arcs) {
    if (!a.name.empty() && !arc_names.insert(a.name).second) {
      fail(ErrorCode::DuplicateName, "arc '" + a.name + "' declared twice");
    }
    Arc arc;
    arc.name = a.name;
    arc.kind = ArcKind::Interior;
    arc.origin = lookup(a.from, "arc '" + a.name + "'");
    arc.terminus = lookup(a.to, "arc '" + a.name + "'");
    g.arcs_.push_back(arc);
  }
  g.num_interior_ = arcs.size();

  detail::check_tail_indices(in_tails, "incoming");
  detail::check_tail_indices(out_tails, "outgoing");

  std::vector<Arc> in_arcs(in_tails.size()), out_arcs(out_tails.size());
  for (const auto& t : in_tails) {
    Arc& arc = in_arcs[t.index - 1];
    arc.kind = ArcKind::Incoming;
    arc.tail = t.index;
    arc.terminus = lookup(t.at_vertex, "incoming tail " + std::to_string(t.index));
    arc.name = in_names ? in_names->at(t.index - 1) : "in" + std::to_string(t.index);
  }
  for (const auto& t : out_tails) {
    Arc& arc = out_arcs[t.index - 1];
    arc.kind = ArcKind::Outgoing;
    arc.tail = t.index;
    arc.origin = lookup(t.at_vertex, "outgoing tail " + std::to_string(t.index));
    arc.name = out_names ? out_names->at(t.index - 1) : "out" + std::to_string(t.index);
  }
  g.arcs_.insert(g.arcs_.end(), in_arcs.begin(), in_arcs.end());
  g.arcs_.insert(g.arcs_.end(), out_arcs.begin(), out_arcs.end());

  g.in_slots_.assign(vertices.size(), {});
  g.out_slots_.assign(vertices.size(), {});
  for (std::size_t i = 0; i < g.arcs_.size(); ++i) {
    if (g.arcs_[i].terminus) g.in_slots_[g.arcs_[i].terminus->value].push_back(ArcId{i});
    if (g.arcs_[i].origin) g.out_slots_[g.arcs_[i].origin->value].push_back(ArcId{i});
  }
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (g.in_slots_[v].size() != g.out_slots_[v].size()) {
      fail(ErrorCode::NotBalanced, "vertex '" + vertices[v] + "' has in-degree " +
                                       std::to_string(g.in_slots_[v].size()) + " and out-degree " +
                                       std::to_string(g.out_slots_[v].size()));
    }
  }
  if (in_tails.size() != out_tails.size()) {
    fail(ErrorCode::NotBalanced, "incoming and outgoing tail counts differ");
  }
  g.num_tails_ = in_tails.size();
  return g;
}

struct FiniteGraph {
  std::vector<std::string> vertices;
  std::vector<ArcSpec> arcs;
};

/// Cuts a balanced finite graph at a set of vertices "at infinity": arcs into
/// the set become outgoing tails, arcs out of it become incoming tails, both
/// numbered in input arc order.
inline GraphWithTails from_finite_graph(const FiniteGraph& fg,
                                        const std::vector<std::string>& boundary) {
  std::set<std::string> bset(boundary.begin(), boundary.end());
  std::set<std::string> known(fg.vertices.begin(), fg.vertices.end());
  for (const auto& b : bset) {
    if (!known.count(b)) fail(ErrorCode::DanglingArc, "boundary vertex '" + b + "' unknown");
  }
  std::map<std::string, long> balance;
  for (const auto& a : fg.arcs) {
    if (!known.count(a.from) || !known.count(a.to)) {
      fail(ErrorCode::DanglingArc, "arc '" + a.name + "' references unknown vertex");
    }
    balance[a.from] -= 1;
    balance[a.to] += 1;
  }
  for (const auto& [v, b] : balance) {
    if (b != 0) fail(ErrorCode::NotBalanced, "vertex '" + v + "' is not balanced");
  }

  std::vector<std::string> interior;
  for (const auto& v : fg.vertices) {
    if (!bset.count(v)) interior.push_back(v);
  }
  if (interior.empty()) fail(ErrorCode::EmptyInterior, "every vertex lies on the boundary");

  std::vector<ArcSpec> arcs;
  std::vector<TailSpec> in_tails, out_tails;
  std::vector<std::string> in_names, out_names;
  for (const auto& a : fg.arcs) {
    const bool from_b = bset.count(a.from) > 0;
    const bool to_b = bset.count(a.to) > 0;
    if (from_b && to_b) {
      fail(ErrorCode::InvalidBoundary, "arc '" + a.name + "' joins two boundary vertices");
    } else if (from_b) {
      in_tails.push_back({static_cast<int>(in_tails.size()) + 1, a.to});
      in_names.push_back(a.name);
    } else if (to_b) {
      out_tails.push_back({static_cast<int>(out_tails.size()) + 1, a.from});
      out_names.push_back(a.name);
    } else {
      arcs.push_back(a);
    }
  }
  return build_graph(interior, arcs, in_tails, out_tails, &in_names, &out_names);
}

}  // namespace qwres
