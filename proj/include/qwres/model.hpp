#pragma once

#include <limits>
#include <string>

#include "qwres/coins.hpp"
#include "qwres/graph.hpp"
#include "qwres/walk.hpp"

namespace qwres {

/// A graph together with an eps-dependent coin family and its admissible
/// range 0 <= eps < eps_max.
struct ModelFamily {
  std::string name;
  GraphWithTails graph;
  CoinFamily coins;
  double eps_max = std::numeric_limits<double>::infinity();

  void check_eps(double eps) const {
    if (!(eps >= 0.0) || !(eps < eps_max)) {
      fail(ErrorCode::EpsOutOfRange, name + " requires 0 <= eps < " + expr::format_number(eps_max) +
                                         ", got " + expr::format_number(eps));
    }
  }

  WalkOperator at(double eps) const {
    check_eps(eps);
    return assemble(graph, eval_coins(coins, eps, true, &graph));
  }
};

}  // namespace qwres
