#pragma once

#include <vector>

#include "qwres/coins.hpp"
#include "qwres/graph.hpp"
#include "qwres/linalg.hpp"

namespace qwres {

/// U(eps) on the carrier A0 + in-boundary + out-boundary (columns pre-state,
/// rows post-state) with its interior and boundary blocks.
struct WalkOperator {
  double eps = 0.0;
  std::size_t m = 0;  // |A0|
  std::size_t n = 0;  // number of tails
  CMatrix full;
  CMatrix interior;  // A0 -> A0
  CMatrix b_in;      // in-boundary -> A0
  CMatrix b_out;     // A0 -> out-boundary
  CMatrix direct;    // in-boundary -> out-boundary

  Eigen::Index in_offset() const { return static_cast<Eigen::Index>(m); }
  Eigen::Index out_offset() const { return static_cast<Eigen::Index>(m + n); }

  /// Orthonormality residual of the columns indexed by A0 and the in-boundary.
  double isometry_residual() const {
    return qwres::isometry_residual(full.leftCols(static_cast<Eigen::Index>(m + n)));
  }
};

inline WalkOperator assemble(const GraphWithTails& g, const EvaluatedCoins& coins) {
  WalkOperator w;
  w.eps = coins.eps;
  w.m = g.num_interior_arcs();
  w.n = g.num_tails();
  const auto size = static_cast<Eigen::Index>(g.carrier_size());
  w.full = CMatrix::Zero(size, size);
  for (std::size_t vi = 0; vi < g.num_vertices(); ++vi) {
    const VertexId v{vi};
    auto it = coins.coins.find(v);
    if (it == coins.coins.end()) {
      fail(ErrorCode::DimensionMismatch, "no coin for vertex '" + g.vertex_name(v) + "'");
    }
    const CMatrix& c = it->second;
    const auto& ins = g.in_slots(v);
    const auto& outs = g.out_slots(v);
    if (c.rows() != static_cast<Eigen::Index>(outs.size()) ||
        c.cols() != static_cast<Eigen::Index>(ins.size())) {
      fail(ErrorCode::DimensionMismatch, "coin at '" + g.vertex_name(v) + "' is " +
                                             std::to_string(c.rows()) + "x" +
                                             std::to_string(c.cols()) + ", degree is " +
                                             std::to_string(ins.size()));
    }
    for (std::size_t r = 0; r < outs.size(); ++r) {
      for (std::size_t k = 0; k < ins.size(); ++k) {
        w.full(static_cast<Eigen::Index>(outs[r].value), static_cast<Eigen::Index>(ins[k].value)) =
            c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
      }
    }
  }
  for (const auto& [v, c] : coins.coins) {
    if (v.value >= g.num_vertices()) fail(ErrorCode::DimensionMismatch, "coin for unknown vertex");
  }
  const auto m = static_cast<Eigen::Index>(w.m);
  const auto n = static_cast<Eigen::Index>(w.n);
  w.interior = w.full.block(0, 0, m, m);
  w.b_in = w.full.block(0, m, m, n);
  w.b_out = w.full.block(m + n, 0, n, m);
  w.direct = w.full.block(m + n, m, n, n);
  return w;
}

/// One step of the walk for a state on A0 + in-boundary; the result lives on
/// A0 + out-boundary. Out-boundary input is ignored (it moves further down the
/// tail, off the carrier).
inline CVector apply(const WalkOperator& w, const CVector& state) {
  CVector s = state;
  s.tail(static_cast<Eigen::Index>(w.n)).setZero();
  return w.full * s;
}

struct RouteEntry {
  int tail = 0;   // n
  int steps = 0;  // k_n
  cplx phase;     // c_n
};

using Routing = std::vector<RouteEntry>;

/// Follows each in-boundary delta under U(0) until it leaves through the
/// out-boundary and checks that it does so deterministically through the
/// tail with the same index.
inline Routing free_routing_check(const WalkOperator& w, double support_tol = 1e-12) {
  Routing out;
  const auto size = w.full.rows();
  const auto m = static_cast<Eigen::Index>(w.m);
  const auto n = static_cast<Eigen::Index>(w.n);
  for (Eigen::Index t = 0; t < n; ++t) {
    CVector psi = CVector::Zero(size);
    psi(m + t) = 1.0;
    bool exited = false;
    for (Eigen::Index step = 1; step <= m + 1; ++step) {
      psi = qwres::apply(w, psi);
      std::vector<Eigen::Index> support;
      for (Eigen::Index i = 0; i < size; ++i) {
        if (std::abs(psi(i)) > support_tol) support.push_back(i);
      }
      if (support.size() != 1 || std::abs(std::abs(psi(support[0])) - 1.0) > support_tol) {
        if (support.empty()) {
          fail(ErrorCode::NoExit, "tail " + std::to_string(t + 1) + " amplitude vanished");
        }
        fail(ErrorCode::NotDeterministic,
             "tail " + std::to_string(t + 1) + " spreads at step " + std::to_string(step));
      }
      const Eigen::Index a = support[0];
      if (a >= m + n) {
        const Eigen::Index target = a - (m + n);
        if (target != t) {
          fail(ErrorCode::LabelMismatch, "tail " + std::to_string(t + 1) + " exits through " +
                                             std::to_string(target + 1));
        }
        out.push_back({static_cast<int>(t + 1), static_cast<int>(step), psi(a)});
        exited = true;
        break;
      }
      psi.tail(n).setZero();
    }
    if (!exited) fail(ErrorCode::NoExit, "tail " + std::to_string(t + 1) + " never exits");
  }
  return out;
}

/// Scattering matrix of the free dynamics: diag(z^{1-k_n} c_n).
inline CMatrix sigma0(const Routing& routing, cplx z) {
  const auto n = static_cast<Eigen::Index>(routing.size());
  CMatrix s = CMatrix::Zero(n, n);
  for (const auto& r : routing) {
    s(r.tail - 1, r.tail - 1) = ipow(z, 1 - r.steps) * r.phase;
  }
  return s;
}

}  // namespace qwres
