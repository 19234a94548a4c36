#pragma once

#include <map>
#include <string>
#include <vector>

#include "qwres/error.hpp"
#include "qwres/expr.hpp"
#include "qwres/graph.hpp"
#include "qwres/linalg.hpp"

namespace qwres {

/// Rows follow out_slots(v), columns follow in_slots(v).
using ExprMatrix = std::vector<std::vector<Expr>>;

struct CoinFamily {
  std::map<VertexId, ExprMatrix> coins;

  void set(VertexId v, ExprMatrix m) {
    for (const auto& row : m) {
      if (row.size() != m.size()) {
        fail(ErrorCode::DimensionMismatch, "coin matrix must be square");
      }
    }
    coins[v] = std::move(m);
  }

  void set(VertexId v, const std::vector<std::vector<std::string>>& text) {
    ExprMatrix m;
    for (const auto& row : text) {
      std::vector<Expr> r;
      for (const auto& s : row) r.push_back(parse_expr(s));
      m.push_back(std::move(r));
    }
    set(v, std::move(m));
  }
};

struct EvaluatedCoins {
  double eps = 0.0;
  std::map<VertexId, CMatrix> coins;
  std::map<VertexId, double> residuals;  // ||U^* U - I||_max

  double max_residual() const {
    double r = 0.0;
    for (const auto& [v, x] : residuals) r = std::max(r, x);
    return r;
  }
};

inline constexpr double kUnitaryTol = 1e-10;

/// Evaluates every entry at eps. With check_unitary, a residual above 1e-10
/// raises NotUnitary naming the first offending vertex.
inline EvaluatedCoins eval_coins(const CoinFamily& family, double eps, bool check_unitary = true,
                                 const GraphWithTails* graph = nullptr) {
  if (!(eps >= 0.0)) fail(ErrorCode::EpsOutOfRange, "eps must be >= 0");
  EvaluatedCoins out;
  out.eps = eps;
  for (const auto& [v, m] : family.coins) {
    const auto n = static_cast<Eigen::Index>(m.size());
    CMatrix c(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index k = 0; k < n; ++k) c(r, k) = eval_expr(m[r][k], eps);
    }
    out.residuals[v] = isometry_residual(c);
    out.coins[v] = std::move(c);
  }
  if (check_unitary) {
    for (const auto& [v, r] : out.residuals) {
      if (r > kUnitaryTol) {
        const std::string name = graph ? graph->vertex_name(v) : "#" + std::to_string(v.value);
        fail(ErrorCode::NotUnitary, "coin at vertex '" + name + "' has residual " +
                                        expr::format_number(r) + " at eps=" + expr::format_number(eps));
      }
    }
  }
  return out;
}

}  // namespace qwres
