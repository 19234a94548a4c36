#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qwres/error.hpp"
#include "qwres/linalg.hpp"
#include "qwres/model.hpp"

namespace qwres {

/// Four vertices L+, R+, L-, R-, six interior arcs, two tails. Coupling of the
/// through-paths to the inner 4-cycle has strength eps.
inline ModelFamily matrix_schrodinger_model() {
  ModelFamily f;
  f.name = "ms";
  f.eps_max = 1.0 / std::sqrt(2.0);
  f.graph = build_graph({"L+", "R+", "L-", "R-"},
                        {{"L-", "L+", "a1"},
                         {"L+", "R+", "a2"},
                         {"R+", "R-", "a3"},
                         {"R-", "L-", "a4"},
                         {"L+", "L-", "a5"},
                         {"R-", "R+", "a6"}},
                        {{1, "L+"}, {2, "R-"}}, {{1, "L-"}, {2, "R+"}});
  const std::string s = "sqrt(1 - eps^2)";
  const std::vector<std::vector<std::string>> in_coin{{s, "-eps"}, {"eps", s}};
  const std::vector<std::vector<std::string>> out_coin{{s, "eps"}, {"-eps", s}};
  f.coins.set(*f.graph.find_vertex("L+"), in_coin);
  f.coins.set(*f.graph.find_vertex("R-"), in_coin);
  f.coins.set(*f.graph.find_vertex("L-"), out_coin);
  f.coins.set(*f.graph.find_vertex("R+"), out_coin);
  return f;
}

/// Directed N-cycle v1 -> v2 -> ... -> vN -> v1 with one tail pair per vertex;
/// vertex n leaks with strength c_n * eps.
inline ModelFamily cycle_model(int n, const std::vector<double>& c) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "cycle model needs N >= 2");
  if (static_cast<int>(c.size()) != n) fail(ErrorCode::InvalidArgument, "need N coupling constants");
  ModelFamily f;
  f.name = "cycle";
  double cmax = 0.0;
  for (double ck : c) {
    if (!(ck >= 0.0)) fail(ErrorCode::InvalidArgument, "coupling constants must be >= 0");
    cmax = std::max(cmax, ck);
  }
  if (cmax > 0.0) f.eps_max = 1.0 / cmax;
  std::vector<std::string> vs;
  std::vector<ArcSpec> arcs;
  std::vector<TailSpec> tails;
  for (int k = 1; k <= n; ++k) {
    vs.push_back("v" + std::to_string(k));
    tails.push_back({k, "v" + std::to_string(k)});
  }
  for (int k = 1; k <= n; ++k) {
    const int prev = k == 1 ? n : k - 1;
    arcs.push_back({"v" + std::to_string(prev), "v" + std::to_string(k), "a" + std::to_string(k)});
  }
  f.graph = build_graph(vs, arcs, tails, tails);
  for (int k = 1; k <= n; ++k) {
    const std::string ce = "(" + expr::format_number(c[k - 1]) + "*eps)";
    const std::string s = "sqrt(1 - " + ce + "^2)";
    f.coins.set(*f.graph.find_vertex("v" + std::to_string(k)),
                std::vector<std::vector<std::string>>{{s, ce}, {"-" + ce, s}});
  }
  return f;
}

// Closed forms. These use plain complex arithmetic only.

inline CMatrix closed_form_sigma_ms(double eps, cplx z) {
  const cplx den = z * (z * z + 1.0 - 2.0 * eps * eps);
  if (std::abs(den) <= 1e-14) fail(ErrorCode::PoleHit, "z is a pole of the closed form");
  const cplx d = (1.0 - eps * eps) * (z * z + 1.0) / den;
  const cplx o = eps * eps * (z * z - 1.0) / den;
  CMatrix s(2, 2);
  s << d, o, o, d;
  return s;
}

/// Entry (l, n) is Sigma delta_{in n} evaluated at out l.
inline CMatrix closed_form_sigma_cycle(int n, const std::vector<double>& c, double eps, cplx z) {
  std::vector<double> tau(n + 1, 1.0);
  for (int k = 1; k <= n; ++k) {
    const double r = 1.0 - c[k - 1] * c[k - 1] * eps * eps;
    if (!(r > 0.0)) fail(ErrorCode::EpsOutOfRange, "c_k * eps must be < 1");
    tau[k] = tau[k - 1] * std::sqrt(r);
  }
  cplx zn(1.0);
  for (int k = 0; k < n; ++k) zn *= z;
  const cplx den = zn - tau[n];
  if (std::abs(z) <= 1e-14 || std::abs(den) <= 1e-14) fail(ErrorCode::PoleHit, "z is a pole");
  auto zpow = [&](int p) {
    cplx r(1.0);
    for (int k = 0; k < std::abs(p); ++k) r *= z;
    return p < 0 ? 1.0 / r : r;
  };
  CMatrix s(n, n);
  for (int col = 1; col <= n; ++col) {
    for (int l = 1; l <= n; ++l) {
      const double cn = c[col - 1], cl = c[l - 1];
      if (l == col) {
        const double r = 1.0 - cn * cn * eps * eps;
        s(l - 1, col - 1) = (r * zn - tau[n]) / (std::sqrt(r) * den);
      } else if (l < col) {
        s(l - 1, col - 1) = -cn * cl * eps * eps * tau[l - 1] * tau[n] * zpow(col - l) / (tau[col] * den);
      } else {
        s(l - 1, col - 1) = -cn * cl * eps * eps * tau[l - 1] * zpow(n + col - l) / (tau[col] * den);
      }
    }
  }
  return s;
}

struct IdentitySides {
  cplx lhs;
  cplx rhs;
};

/// sum_{k<N} mu^{kp} / (z - c mu^k) and N c^{N-p} z^{p-1} / (z^N - c^N), mu = e^{2 pi i / N}.
inline IdentitySides partial_fraction_identity(int n, int p, double c, cplx z) {
  if (n < 1 || p < 1 || p > n || !(c > 0.0)) fail(ErrorCode::InvalidArgument, "need 1 <= p <= N, c > 0");
  cplx zn(1.0);
  for (int k = 0; k < n; ++k) zn *= z;
  const double cn = std::pow(c, n);
  if (std::abs(zn - cn) <= 1e-14 * std::max(1.0, cn)) fail(ErrorCode::PoleHit, "z^N = c^N");
  IdentitySides out;
  for (int k = 0; k < n; ++k) {
    const cplx muk = std::polar(1.0, 2.0 * kPi * k / n);
    const cplx mukp = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) * p / n);
    out.lhs += mukp / (z - c * muk);
  }
  cplx zp(1.0);
  for (int k = 0; k < p - 1; ++k) zp *= z;
  out.rhs = static_cast<double>(n) * std::pow(c, n - p) * zp / (zn - cn);
  return out;
}

struct RandomModelOptions {
  int tails = 2;
  int max_cycles = 2;
  int max_cycle_length = 3;
  bool crossing = true;   // some vertex mixes two different tails' paths
  double min_gap = 0.15;  // between unit-circle eigenvalues at eps = 0
};

/// Random model with deterministic index-preserving routing at eps = 0, simple
/// unit-circle eigenvalues at eps = 0 and coins U_v(eps) = Phi G(eps) Psi(eps)
/// in the passage basis, where G(0) = I.
inline ModelFamily random_model(std::uint64_t seed, const RandomModelOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> coupling(0.5, 2.0);
  std::uniform_int_distribution<int> coin_flip(0, 1);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    struct Passage {
      std::string in, out;
      int owner;  // tail index, or 0 for cycles
    };
    std::vector<std::string> interior;
    std::vector<Passage> passages;
    for (int t = 1; t <= opt.tails; ++t) {
      const std::string in = "in" + std::to_string(t), out = "out" + std::to_string(t);
      if (coin_flip(rng)) {
        const std::string x = "x" + std::to_string(t);
        interior.push_back(x);
        passages.push_back({in, x, t});
        passages.push_back({x, out, t});
      } else {
        passages.push_back({in, out, t});
      }
    }
    std::uniform_int_distribution<int> ncyc(1, opt.max_cycles), clen(1, opt.max_cycle_length);
    const int cycles = ncyc(rng);
    std::vector<int> lengths;
    for (int k = 0; k < cycles; ++k) {
      const int len = clen(rng);
      lengths.push_back(len);
      for (int i = 0; i < len; ++i) interior.push_back("c" + std::to_string(k) + "_" + std::to_string(i));
      for (int i = 0; i < len; ++i) {
        passages.push_back({"c" + std::to_string(k) + "_" + std::to_string(i),
                            "c" + std::to_string(k) + "_" + std::to_string((i + 1) % len), 0});
      }
    }
    std::shuffle(passages.begin(), passages.end(), rng);

    // Pair passages into vertices.
    std::vector<std::vector<Passage>> vertices;
    for (std::size_t i = 0; i < passages.size(); i += 2) {
      std::vector<Passage> v{passages[i]};
      if (i + 1 < passages.size()) v.push_back(passages[i + 1]);
      vertices.push_back(v);
    }
    bool crossing = false;
    for (const auto& v : vertices) {
      if (v.size() == 2 && v[0].owner > 0 && v[1].owner > 0 && v[0].owner != v[1].owner) crossing = true;
    }
    if (opt.crossing && !crossing) continue;

    std::vector<double> theta(passages.size());
    for (auto& t : theta) t = angle(rng);

    // Unit-circle spectrum at eps = 0: each cycle contributes the L-th roots of its phase.
    std::vector<cplx> ev0;
    {
      std::size_t idx = 0;
      std::vector<double> cycle_phase(cycles, 0.0);
      for (const auto& v : vertices) {
        for (const auto& p : v) {
          if (p.owner == 0) {
            const int k = std::stoi(p.in.substr(1, p.in.find('_') - 1));
            cycle_phase[k] += theta[idx];
          }
          ++idx;
        }
      }
      for (int k = 0; k < cycles; ++k) {
        for (int j = 0; j < lengths[k]; ++j) {
          ev0.push_back(std::polar(1.0, (cycle_phase[k] + 2.0 * kPi * j) / lengths[k]));
        }
      }
    }
    bool separated = true;
    for (std::size_t i = 0; i < ev0.size(); ++i) {
      for (std::size_t j = i + 1; j < ev0.size(); ++j) {
        if (std::abs(ev0[i] - ev0[j]) < opt.min_gap) separated = false;
      }
    }
    if (!separated) continue;

    std::vector<std::string> vnames;
    std::vector<ArcSpec> arcs;
    std::vector<TailSpec> in_tails, out_tails;
    std::map<std::string, std::string> origin, terminus;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const std::string name = "u" + std::to_string(k + 1);
      vnames.push_back(name);
      for (const auto& p : vertices[k]) {
        terminus[p.in] = name;
        origin[p.out] = name;
      }
    }
    for (const auto& a : interior) arcs.push_back({origin.at(a), terminus.at(a), a});
    for (int t = 1; t <= opt.tails; ++t) {
      in_tails.push_back({t, terminus.at("in" + std::to_string(t))});
      out_tails.push_back({t, origin.at("out" + std::to_string(t))});
    }

    ModelFamily f;
    f.name = "random:" + std::to_string(seed);
    f.graph = build_graph(vnames, arcs, in_tails, out_tails);

    auto num = [](double x) { return "(" + expr::format_number(x) + ")"; };
    std::size_t idx = 0;
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const VertexId v = *f.graph.find_vertex(vnames[k]);
      const auto& ps = vertices[k];
      const std::size_t d = ps.size();
      std::vector<double> th(d), ga(d);
      for (std::size_t j = 0; j < d; ++j) {
        th[j] = theta[idx + j];
        ga[j] = angle(rng);
      }
      idx += d;
      const double kappa = coupling(rng), beta = angle(rng);
      std::vector<std::vector<std::string>> g(d, std::vector<std::string>(d));
      if (d == 1) {
        g[0][0] = "1";
      } else {
        const std::string ke = num(kappa) + "*eps";
        g[0][0] = "cos(" + ke + ")";
        g[1][1] = "cos(" + ke + ")";
        g[0][1] = "-exp(i*" + num(beta) + ")*sin(" + ke + ")";
        g[1][0] = "exp(-i*" + num(beta) + ")*sin(" + ke + ")";
      }
      // Slot positions of each passage's arcs.
      auto slot_of = [&](const std::vector<ArcId>& slots, const std::string& arc) {
        for (std::size_t s = 0; s < slots.size(); ++s) {
          if (f.graph.arc(slots[s]).name == arc) return s;
        }
        fail(ErrorCode::InvalidArgument, "internal: arc not found");
      };
      std::vector<std::vector<std::string>> coin(d, std::vector<std::string>(d));
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          const std::size_t row = slot_of(f.graph.out_slots(v), ps[r].out);
          const std::size_t col = slot_of(f.graph.in_slots(v), ps[c].in);
          coin[row][col] = "exp(i*" + num(th[r]) + ")*(" + g[r][c] + ")*exp(i*" + num(ga[c]) + "*eps)";
        }
      }
      f.coins.set(v, coin);
    }
    return f;
  }
  fail(ErrorCode::InvalidArgument, "could not draw a random model with the requested properties");
}

}  // namespace qwres
