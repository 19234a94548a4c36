#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qwres/error.hpp"
#include "qwres/expr.hpp"
#include "qwres/linalg.hpp"
#include "qwres/model.hpp"

namespace qwres {

/// Barrier coins C(x) at increasing sites x (first site 0); C = I elsewhere.
struct BarrierSpec {
  std::vector<long> positions;
  std::vector<CMatrix> coins;

  long last() const { return positions.back(); }

  void validate() const {
    if (positions.empty() || positions.size() != coins.size()) {
      fail(ErrorCode::BadBarrierSpec, "need one coin per barrier position");
    }
    if (positions.front() != 0) fail(ErrorCode::BadBarrierSpec, "first barrier must sit at 0");
    for (std::size_t k = 1; k < positions.size(); ++k) {
      if (positions[k] <= positions[k - 1]) {
        fail(ErrorCode::BadBarrierSpec, "barrier positions must be strictly increasing");
      }
    }
    for (const auto& c : coins) {
      if (c.rows() != 2 || c.cols() != 2) fail(ErrorCode::BadBarrierSpec, "barrier coins are 2x2");
      if (isometry_residual(c) > kUnitaryTol) fail(ErrorCode::NotUnitary, "barrier coin is not unitary");
    }
  }

  void require_corners() const {
    for (const auto& c : coins) {
      if (std::abs(c(0, 0)) <= 1e-14) fail(ErrorCode::ZeroCorner, "C(x)_11 vanishes");
    }
  }
};

/// [[sqrt(1-r^2), r], [-r, sqrt(1-r^2)]].
inline CMatrix rotation_coin(double r) {
  if (!(r > -1.0 && r < 1.0)) fail(ErrorCode::BadBarrierSpec, "rotation parameter must lie in (-1, 1)");
  const double s = std::sqrt(1.0 - r * r);
  CMatrix c(2, 2);
  c << s, r, -r, s;
  return c;
}

inline CMatrix transfer_matrix(const CMatrix& c, cplx z) {
  if (std::abs(z) == 0.0) fail(ErrorCode::InvalidArgument, "z must be nonzero");
  if (std::abs(c(0, 0)) <= 1e-14) fail(ErrorCode::ZeroCorner, "C_11 vanishes");
  CMatrix t(2, 2);
  t << z, -c(0, 1), c(1, 0), c.determinant() / z;
  return t / c(0, 0);
}

/// (1/z) T(x_last) ... T(0), identity sites included. Applied to (1, 0) it
/// gives the (a, b) pair of the incident-normalized stationary state.
inline CMatrix transfer_product(const BarrierSpec& spec, cplx z) {
  spec.validate();
  CMatrix p = CMatrix::Identity(2, 2);
  std::size_t next = 0;
  for (long x = 0; x <= spec.last(); ++x) {
    if (next < spec.positions.size() && spec.positions[next] == x) {
      p = transfer_matrix(spec.coins[next++], z) * p;
    } else {
      p = transfer_matrix(CMatrix::Identity(2, 2), z) * p;
    }
  }
  return p / z;
}

struct LineScattering {
  double T = 0.0;
  double R = 0.0;
  cplx a;
  cplx b;
  std::vector<cplx> resonances;  // nonzero resonances, roots of the quantization condition
};

namespace detail {

/// Roots of sum_k coeff[k] x^k via the companion matrix.
inline std::vector<cplx> poly_roots(const std::vector<cplx>& coeff) {
  const int deg = static_cast<int>(coeff.size()) - 1;
  if (deg < 1) return {};
  CMatrix comp = CMatrix::Zero(deg, deg);
  for (int k = 1; k < deg; ++k) comp(k, k - 1) = 1.0;
  for (int k = 0; k < deg; ++k) comp(k, deg - 1) = -coeff[k] / coeff[deg];
  Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + deg);
  std::sort(out.begin(), out.end(), [](cplx p, cplx q) {
    return std::arg(p) != std::arg(q) ? std::arg(p) < std::arg(q) : std::abs(p) < std::abs(q);
  });
  return out;
}

/// All n-th roots of w, sorted by argument.
inline std::vector<cplx> nth_roots(cplx w, long n) {
  std::vector<cplx> out;
  const double r = std::pow(std::abs(w), 1.0 / static_cast<double>(n));
  for (long k = 0; k < n; ++k) {
    out.push_back(std::polar(r, (std::arg(w) + 2.0 * kPi * static_cast<double>(k)) / static_cast<double>(n)));
  }
  std::sort(out.begin(), out.end(), [](cplx p, cplx q) { return std::arg(p) < std::arg(q); });
  return out;
}

}  // namespace detail

inline LineScattering double_barrier(const BarrierSpec& spec, cplx z) {
  spec.validate();
  if (spec.coins.size() != 2) fail(ErrorCode::BadBarrierSpec, "double barrier needs two coins");
  spec.require_corners();
  const CMatrix& c = spec.coins[0];
  const CMatrix& d = spec.coins[1];
  const long x0 = spec.positions[1];
  const cplx zx = ipow(z, x0), zmx = ipow(z, -x0);
  const cplx corner = c(0, 0) * d(0, 0);
  LineScattering out;
  out.a = (zx - d(0, 1) * c(1, 0) * zmx) / corner;
  out.b = (d(1, 0) * zx + c(1, 0) * d.determinant() * zmx) / (z * corner);
  const cplx den = ipow(z, 2 * x0) - c(1, 0) * d(0, 1);
  if (std::abs(den) <= 1e-300) fail(ErrorCode::PoleHit, "z is a resonance");
  out.T = std::norm(corner / den);
  out.R = std::norm(out.b / out.a);
  out.resonances = detail::nth_roots(c(1, 0) * d(0, 1), 2 * x0);
  return out;
}

/// Points z with z^{2 x0} = -C(0)_21 det C(x0) / C(x0)_21, where T = 1 when
/// the barriers are symmetric.
inline std::vector<cplx> tunneling_energies(const BarrierSpec& spec) {
  spec.validate();
  const CMatrix& c = spec.coins[0];
  const CMatrix& d = spec.coins[1];
  if (std::abs(d(1, 0)) <= 1e-300) fail(ErrorCode::ZeroCorner, "C(x0)_21 vanishes");
  return detail::nth_roots(-c(1, 0) * d.determinant() / d(1, 0), 2 * spec.positions[1]);
}

/// |C(0)_21 / C(x0)_12|^{1/2} |C(x0)_22 / C(0)_11|, the modulus of the
/// resonant state's right-going component beyond the second barrier.
inline double double_barrier_symmetry(const BarrierSpec& spec) {
  spec.validate();
  spec.require_corners();
  const CMatrix& c = spec.coins[0];
  const CMatrix& d = spec.coins[1];
  return std::sqrt(std::abs(c(1, 0) / d(0, 1))) * std::abs(d(1, 1) / c(0, 0));
}

/// The same quantity evaluated from the stationary state at a resonance lam.
inline double double_barrier_symmetry_at(const BarrierSpec& spec, cplx lam) {
  spec.validate();
  spec.require_corners();
  const CMatrix& c = spec.coins[0];
  const CMatrix& d = spec.coins[1];
  const long x0 = spec.positions[1];
  return std::abs((d(1, 0) * ipow(lam, x0) + c(1, 0) * d.determinant() * ipow(lam, -x0)) /
                  (c(0, 0) * d(0, 0)));
}

inline LineScattering triple_barrier(const BarrierSpec& spec, cplx z) {
  spec.validate();
  if (spec.coins.size() != 3) fail(ErrorCode::BadBarrierSpec, "triple barrier needs three coins");
  spec.require_corners();
  const CMatrix& c0 = spec.coins[0];
  const CMatrix& c1 = spec.coins[1];
  const CMatrix& c2 = spec.coins[2];
  const long x0 = spec.positions[1], x1 = spec.positions[2];
  const cplx d1 = c1.determinant(), d2 = c2.determinant();
  const cplx aa = ipow(z, x1 + 1) - c1(1, 0) * c2(0, 1) * ipow(z, 2 * x0 - x1 + 1) -
                  c0(1, 0) * c1(0, 1) * ipow(z, x1 - 2 * x0 + 1) -
                  c0(1, 0) * c2(0, 1) * d1 * ipow(z, 1 - x1);
  const cplx bb = c2(1, 0) * ipow(z, x1) + c1(1, 0) * d2 * ipow(z, 2 * x0 - x1) -
                  c0(1, 0) * c1(0, 1) * c2(1, 0) * ipow(z, x1 - 2 * x0) +
                  c0(1, 0) * d1 * d2 * ipow(z, -x1);
  if (std::abs(aa) <= 1e-300) fail(ErrorCode::PoleHit, "z is a resonance");
  const cplx corner = c0(0, 0) * c1(0, 0) * c2(0, 0);
  LineScattering out;
  out.a = aa / (z * corner);
  out.b = bb / (z * corner);
  out.T = std::norm(corner / aa);
  out.R = std::norm(bb / aa);
  // z^{x1-1} a(z): degree 2 x1 polynomial.
  std::vector<cplx> poly(2 * x1 + 1, 0.0);
  poly[2 * x1] += 1.0;
  poly[2 * x0] -= c1(1, 0) * c2(0, 1);
  poly[2 * (x1 - x0)] -= c0(1, 0) * c1(0, 1);
  poly[0] -= c0(1, 0) * c2(0, 1) * d1;
  out.resonances = detail::poly_roots(poly);
  return out;
}

/// T and R from the transfer product, for any number of barriers.
inline LineScattering line_scattering(const BarrierSpec& spec, cplx z) {
  spec.require_corners();
  const CMatrix p = transfer_product(spec, z);
  LineScattering out;
  out.a = p(0, 0);
  out.b = p(1, 0);
  out.T = 1.0 / std::norm(out.a);
  out.R = std::norm(out.b / out.a);
  return out;
}

namespace detail {

inline Expr constant_expr(cplx v) {
  if (v.imag() == 0.0) return expr::number(v.real());
  return expr::binary(ExprKind::Add, expr::number(v.real()),
                      expr::binary(ExprKind::Mul, expr::number(v.imag()), expr::leaf(ExprKind::ImagUnit)));
}

inline std::string site(char side, long x) { return std::string(1, side) + std::to_string(x); }
inline std::string arc_l(long x) { return "aL" + std::to_string(x); }
inline std::string arc_r(long x) { return "aR" + std::to_string(x); }

}  // namespace detail

/// Graph form of the line walk. Site x carries vertices L(x), R(x); at a
/// barrier they merge into B(x). Arcs aL(x) run L(x+1) -> L(x) and aR(x) run
/// R(x-1) -> R(x). Incoming tails: 1 = aR(0), 2 = aL(last); outgoing tails:
/// 1 = aL(-1), 2 = aR(last+1).
inline ModelFamily line_to_graph(const std::vector<long>& positions, const std::vector<ExprMatrix>& coins) {
  {
    BarrierSpec shape;
    shape.positions = positions;
    shape.coins.assign(coins.size(), CMatrix::Identity(2, 2));
    shape.validate();
  }
  for (const auto& c : coins) {
    if (c.size() != 2 || c[0].size() != 2 || c[1].size() != 2) {
      fail(ErrorCode::BadBarrierSpec, "barrier coins are 2x2");
    }
  }
  const long last = positions.back();
  std::vector<int> barrier_at(static_cast<std::size_t>(last + 1), -1);
  for (std::size_t k = 0; k < positions.size(); ++k) barrier_at[positions[k]] = static_cast<int>(k);
  auto vertex = [&](char side, long x) {
    return barrier_at[x] >= 0 ? detail::site('B', x) : detail::site(side, x);
  };

  std::vector<std::string> vs;
  for (long x = 0; x <= last; ++x) {
    if (barrier_at[x] >= 0) {
      vs.push_back(detail::site('B', x));
    } else {
      vs.push_back(detail::site('L', x));
      vs.push_back(detail::site('R', x));
    }
  }
  std::vector<ArcSpec> arcs;
  for (long x = 0; x < last; ++x) arcs.push_back({vertex('L', x + 1), vertex('L', x), detail::arc_l(x)});
  for (long x = 1; x <= last; ++x) arcs.push_back({vertex('R', x - 1), vertex('R', x), detail::arc_r(x)});
  const std::vector<std::string> in_names{detail::arc_r(0), detail::arc_l(last)};
  const std::vector<std::string> out_names{detail::arc_l(-1), detail::arc_r(last + 1)};

  ModelFamily f;
  f.name = "line";
  f.graph = build_graph(vs, arcs, {{1, vertex('R', 0)}, {2, vertex('L', last)}},
                        {{1, vertex('L', 0)}, {2, vertex('R', last)}}, &in_names, &out_names);

  auto slot = [&](const std::vector<ArcId>& slots, const std::string& name) -> std::size_t {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (f.graph.arc(slots[s]).name == name) return s;
    }
    fail(ErrorCode::InvalidArgument, "internal: arc '" + name + "' not at vertex");
  };
  for (long x = 0; x <= last; ++x) {
    if (barrier_at[x] < 0) {
      for (char side : {'L', 'R'}) f.coins.set(*f.graph.find_vertex(detail::site(side, x)), ExprMatrix{{expr::number(1.0)}});
      continue;
    }
    const VertexId v = *f.graph.find_vertex(detail::site('B', x));
    // (U phi(aL(x-1)), U phi(aR(x+1))) = C(x) (phi(aL(x)), phi(aR(x)))
    const std::string in_arc[2] = {detail::arc_l(x), detail::arc_r(x)};
    const std::string out_arc[2] = {detail::arc_l(x - 1), detail::arc_r(x + 1)};
    const ExprMatrix& c = coins[static_cast<std::size_t>(barrier_at[x])];
    ExprMatrix m(2, std::vector<Expr>(2));
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) {
        m[slot(f.graph.out_slots(v), out_arc[r])][slot(f.graph.in_slots(v), in_arc[k])] = c[r][k];
      }
    }
    f.coins.set(v, m);
  }
  return f;
}

inline ModelFamily line_to_graph(const BarrierSpec& spec) {
  spec.validate();
  std::vector<ExprMatrix> coins;
  for (const auto& c : spec.coins) {
    coins.push_back({{detail::constant_expr(c(0, 0)), detail::constant_expr(c(0, 1))},
                     {detail::constant_expr(c(1, 0)), detail::constant_expr(c(1, 1))}});
  }
  return line_to_graph(spec.positions, coins);
}

/// Barrier coins [[e, s], [-s, e]] with e = exp(-c/eps), s = sqrt(1 - e^2), at
/// 0 and x0. Transmission is exponentially small when c1 != c2.
inline std::vector<ExprMatrix> broken_symmetry_coins(double c1, double c2) {
  std::vector<ExprMatrix> out;
  for (double c : {c1, c2}) {
    const std::string cs = "(" + expr::format_number(c) + ")";
    const std::string e = "exp(-" + cs + "/eps)";
    const std::string s = "sqrt(1 - exp(-2*" + cs + "/eps))";
    out.push_back({{parse_expr(e), parse_expr(s)}, {parse_expr("-" + s), parse_expr(e)}});
  }
  return out;
}

/// Evaluates expression coins at eps into a numeric spec.
inline BarrierSpec eval_barrier(const std::vector<long>& positions, const std::vector<ExprMatrix>& coins,
                                double eps) {
  BarrierSpec spec;
  spec.positions = positions;
  for (const auto& c : coins) {
    CMatrix m(2, 2);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) m(r, k) = eval_expr(c[r][k], eps);
    }
    spec.coins.push_back(m);
  }
  spec.validate();
  return spec;
}

}  // namespace qwres
