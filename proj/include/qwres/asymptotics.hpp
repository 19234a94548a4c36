#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qwres/error.hpp"
#include "qwres/linalg.hpp"
#include "qwres/model.hpp"
#include "qwres/scattering.hpp"
#include "qwres/spectral.hpp"

namespace qwres {

/// Geometric grid with `per_decade` points per decade on [lo, hi], optionally
/// preceded by 0.
inline std::vector<double> geometric_grid(double lo, double hi, int per_decade, bool with_zero = true) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) fail(ErrorCode::InvalidArgument, "bad geometric grid");
  std::vector<double> g;
  if (with_zero) g.push_back(0.0);
  const int n = std::max(1, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)));
  for (int k = 0; k <= n; ++k) g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / n));
  return g;
}

inline std::vector<double> default_eps_grid() { return geometric_grid(1e-3, 1e-1, 25); }

struct ResonanceTrack {
  std::vector<double> eps_grid;
  std::vector<cplx> start;                // unit-circle eigenvalues of U(0)|A0
  std::vector<std::vector<cplx>> paths;   // paths[k][i] = lambda_{eps_i}(start[k])
  std::vector<double> max_step;           // largest jump between consecutive grid points
  int refinements = 0;

  /// Index of the path starting nearest to lambda0.
  std::size_t path_for(cplx lambda0) const {
    if (start.empty()) fail(ErrorCode::InvalidArgument, "no unit-circle eigenvalue to track");
    std::size_t best = 0;
    for (std::size_t k = 1; k < start.size(); ++k) {
      if (std::abs(start[k] - lambda0) < std::abs(start[best] - lambda0)) best = k;
    }
    return best;
  }
};

namespace detail {

inline std::vector<cplx> raw_eigenvalues(const WalkOperator& w) {
  if (w.m == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> es(w.interior, false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

inline std::size_t nearest_index(const std::vector<cplx>& ev, cplx mu) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < ev.size(); ++k) {
    if (std::abs(ev[k] - mu) < std::abs(ev[best] - mu)) best = k;
  }
  return best;
}

struct Tracker {
  const ModelFamily& family;
  int refinements = 0;

  // Moves every value from e0 to e1, halving the step while a match is not
  // clearly closer than half the gap to the other eigenvalues at e0.
  std::vector<cplx> advance(double e0, const std::vector<cplx>& ev0, double e1,
                            const std::vector<cplx>& vals, int depth) {
    const std::vector<cplx> ev1 = raw_eigenvalues(family.at(e1));
    std::vector<cplx> next;
    std::vector<std::size_t> used;
    bool ok = true;
    for (cplx v : vals) {
      const std::size_t self = nearest_index(ev0, v);
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < ev0.size(); ++k) {
        if (k != self) gap = std::min(gap, std::abs(ev0[k] - v));
      }
      const std::size_t j = nearest_index(ev1, v);
      if (!(std::abs(ev1[j] - v) < 0.5 * gap) || std::find(used.begin(), used.end(), j) != used.end()) {
        ok = false;
        break;
      }
      used.push_back(j);
      next.push_back(ev1[j]);
    }
    if (ok) return next;
    if (depth >= 20) {
      fail(ErrorCode::TrackingAmbiguous, "cannot follow resonances near eps=" + expr::format_number(e1));
    }
    ++refinements;
    const double mid = 0.5 * (e0 + e1);
    const std::vector<cplx> evm = raw_eigenvalues(family.at(mid));
    const std::vector<cplx> vm = advance(e0, ev0, mid, vals, depth + 1);
    return advance(mid, evm, e1, vm, depth + 1);
  }
};

}  // namespace detail

/// Follows each unit-circle eigenvalue of U(0)|A0 along an increasing eps grid
/// starting at 0, by nearest-neighbour matching with step bisection.
inline ResonanceTrack track_resonances(const ModelFamily& family, const std::vector<double>& eps_grid,
                                       const SpectralOptions& opt = {}) {
  if (eps_grid.empty() || eps_grid.front() != 0.0) {
    fail(ErrorCode::InvalidArgument, "eps grid must start at 0");
  }
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > eps_grid[i - 1])) fail(ErrorCode::InvalidArgument, "eps grid must increase");
  }
  ResonanceTrack t;
  t.eps_grid = eps_grid;
  const WalkOperator w0 = family.at(0.0);
  const EigenSystem sys0 = eigen_decompose(w0, opt);
  for (const auto& c : sys0.clusters) {
    if (!c.on_unit_circle) continue;
    if (!c.simple()) {
      fail(ErrorCode::SimplicityViolated, "eigenvalue " + expr::format_number(c.lambda.real()) + "+" +
                                              expr::format_number(c.lambda.imag()) +
                                              "i of U(0) is not simple");
    }
    t.start.push_back(c.lambda);
  }
  t.paths.assign(t.start.size(), {});
  t.max_step.assign(t.start.size(), 0.0);
  std::vector<cplx> vals = t.start;
  for (std::size_t k = 0; k < vals.size(); ++k) t.paths[k].push_back(vals[k]);
  if (vals.empty()) return t;

  detail::Tracker tr{family};
  std::vector<cplx> ev = detail::raw_eigenvalues(w0);
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    std::vector<cplx> next = tr.advance(eps_grid[i - 1], ev, eps_grid[i], vals, 0);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      t.max_step[k] = std::max(t.max_step[k], std::abs(next[k] - vals[k]));
      t.paths[k].push_back(next[k]);
    }
    vals = std::move(next);
    ev = detail::raw_eigenvalues(family.at(eps_grid[i]));
  }
  t.refinements = tr.refinements;
  return t;
}

/// lambda_eps for the unit-circle eigenvalue of U(0) nearest lambda0, tracked
/// along `steps` uniform steps.
inline cplx tracked_resonance(const ModelFamily& family, double eps, cplx lambda0, int steps = 16,
                              const SpectralOptions& opt = {}) {
  if (eps == 0.0) {
    const ResonanceTrack t = track_resonances(family, {0.0}, opt);
    return t.start[t.path_for(lambda0)];
  }
  std::vector<double> grid;
  for (int k = 0; k <= steps; ++k) grid.push_back(eps * k / steps);
  const ResonanceTrack t = track_resonances(family, grid, opt);
  return t.paths[t.path_for(lambda0)].back();
}

/// Least-squares slope and intercept of log y against log x.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LogLogFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorCode::InvalidArgument, "log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LogLogFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

/// ||Sigma(eps, z) - Sigma(0, z)|| (largest singular value).
inline double discrepancy_norm(const ModelFamily& family, cplx z, double eps, const SpectralOptions& opt = {}) {
  if (std::abs(std::abs(z) - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "z must lie on the unit circle");
  if (eps == 0.0) return 0.0;
  const CMatrix s0 = scattering_matrix(family.at(0.0), z, Route::Resolvent, opt).sigma;
  const CMatrix s1 = scattering_matrix(family.at(eps), z, Route::Resolvent, opt).sigma;
  return op_norm(s1 - s0);
}

/// ||Sigma(eps, z) - Sigma(0, z) - sum_lambda M_lambda(z)||, the sum running over
/// the resonances that continue the unit-circle eigenvalues of U(0).
inline double main_identity_residual(const ModelFamily& family, cplx z, double eps,
                                     const std::vector<cplx>& tracked, const SpectralOptions& opt = {}) {
  const WalkOperator w = family.at(eps);
  const EigenSystem sys = eigen_decompose(w, opt);
  CMatrix d = scattering_matrix(w, sys, z).sigma - scattering_matrix(family.at(0.0), z, Route::Resolvent, opt).sigma;
  for (cplx lam : tracked) {
    const Cluster& c = sys.nearest(lam);
    if (c.on_unit_circle || c.is_zero) continue;
    d -= M_lambda_block(w, c, z);
  }
  return op_norm(d);
}

/// T(J, alpha, eps, z) for normalized alpha supported in J.
inline double transmission(const WalkOperator& w, const EigenSystem& sys, cplx z, const ChannelSplit& split,
                           const CVector& alpha) {
  const CVector out = generalized_eigenfunction(w, sys, z, alpha).alpha_out;
  double t = 0.0;
  for (int k = 1; k <= static_cast<int>(out.size()); ++k) {
    if (!split.contains(k)) t += std::norm(out(k - 1));
  }
  return t;
}

struct TunnelingReport {
  cplx lambda;
  double eps = 0.0;
  cplx z_star;
  ChannelSplit split;
  CVector alpha_J;                // normalized restriction of chi(Omega_in) phi^* to J
  CVector alpha_Jc_out;           // normalized restriction of chi(Omega_out) phi to J^c
  double symmetry_residual = 0.0;  // | ||g_J|| - ||g_Jc|| | / ||g||
  double T_at_peak = 0.0;
  double overlap = 0.0;            // |<Sigma alpha_J, alpha_Jc_out>|
  bool width_measured = false;
  double theta_minus = 0.0;
  double theta_plus = 0.0;
  double peak_width_measured = 0.0;
  double peak_width_predicted = 0.0;  // 2 (1 - |lambda|)
  double comfortability_value = 0.0;
  double comfortability_bound = 0.0;
};

namespace detail {

struct PeakSetup {
  WalkOperator w;
  EigenSystem sys;
  cplx lambda;
  ResonantStateBoundary b;
};

inline PeakSetup peak_setup(const ModelFamily& family, double eps, cplx lambda0, const SpectralOptions& opt) {
  PeakSetup p;
  const cplx lam = tracked_resonance(family, eps, lambda0, 16, opt);
  p.w = family.at(eps);
  p.sys = eigen_decompose(p.w, opt);
  const Cluster& c = p.sys.nearest(lam);
  if (c.on_unit_circle || !(std::abs(c.lambda) < 1.0)) {
    fail(ErrorCode::ResonanceOnCircle, "tracked resonance lies on the unit circle at eps=" + expr::format_number(eps));
  }
  p.lambda = c.lambda;
  p.b = boundary_data(p.w, c);
  return p;
}

inline CVector restrict_normalized(const CVector& v, const ChannelSplit& split, bool inside) {
  CVector r = CVector::Zero(v.size());
  for (int k = 1; k <= static_cast<int>(v.size()); ++k) {
    if (split.contains(k) == inside) r(k - 1) = v(k - 1);
  }
  const double n = r.norm();
  if (!(n > 0.0)) fail(ErrorCode::BadSupport, "resonant state has no weight on the requested channels");
  return r / n;
}

}  // namespace detail

struct PeakWidth {
  double theta_minus = 0.0;
  double theta_plus = 0.0;
};

/// Half-height crossings of theta -> T(J, alpha, eps, e^{i theta} z_star)
/// nearest to theta = 0, bisected to 1e-12.
inline PeakWidth peak_width(const WalkOperator& w, const EigenSystem& sys, cplx z_star, const ChannelSplit& split,
                            const CVector& alpha, double scale) {
  auto t_at = [&](double th) { return transmission(w, sys, z_star * unit(th), split, alpha); };
  const double limit = kPi / 4.0;
  const double step = std::max(scale / 4.0, 1e-9);
  auto crossing = [&](double dir) {
    double inside = 0.0, th = 0.0;
    while (true) {
      th = std::min(th + step, limit);
      if (t_at(dir * th) < 0.5) break;
      inside = th;
      if (th >= limit) fail(ErrorCode::NoCrossing, "T stays above 1/2 within |theta| <= pi/4");
    }
    double lo = inside, hi = th;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (t_at(dir * mid) >= 0.5 ? lo : hi) = mid;
    }
    return dir * 0.5 * (lo + hi);
  };
  PeakWidth p;
  p.theta_plus = crossing(1.0);
  p.theta_minus = crossing(-1.0);
  return p;
}

inline PeakWidth peak_width(const ModelFamily& family, double eps, cplx lambda0, const ChannelSplit& split,
                            const SpectralOptions& opt = {}) {
  split.validate(static_cast<int>(family.graph.num_tails()));
  const detail::PeakSetup p = detail::peak_setup(family, eps, lambda0, opt);
  const CVector alpha = detail::restrict_normalized(p.b.in_data_co, split, true);
  const cplx z_star = p.lambda / std::abs(p.lambda);
  if (transmission(p.w, p.sys, z_star, split, alpha) < 0.9) {
    fail(ErrorCode::PeakTooLow, "T at the peak is below 0.9");
  }
  return peak_width(p.w, p.sys, z_star, split, alpha, 1.0 - std::abs(p.lambda));
}

/// Resonant-tunneling diagnostics at z_star = lambda_eps / |lambda_eps|.
inline TunnelingReport tunneling_check(const ModelFamily& family, double eps, cplx lambda0,
                                       const ChannelSplit& split, const SpectralOptions& opt = {}) {
  split.validate(static_cast<int>(family.graph.num_tails()));
  const detail::PeakSetup p = detail::peak_setup(family, eps, lambda0, opt);
  TunnelingReport r;
  r.lambda = p.lambda;
  r.eps = eps;
  r.split = split;
  r.z_star = p.lambda / std::abs(p.lambda);
  const CVector& g = p.b.in_data_co;
  double gj = 0.0, gjc = 0.0;
  for (int k = 1; k <= static_cast<int>(g.size()); ++k) (split.contains(k) ? gj : gjc) += std::norm(g(k - 1));
  r.symmetry_residual = std::abs(std::sqrt(gj) - std::sqrt(gjc)) / g.norm();
  r.alpha_J = detail::restrict_normalized(g, split, true);
  r.alpha_Jc_out = detail::restrict_normalized(p.b.out_data, split, false);
  const CVector out = generalized_eigenfunction(p.w, p.sys, r.z_star, r.alpha_J).alpha_out;
  for (int k = 1; k <= static_cast<int>(out.size()); ++k) {
    if (!split.contains(k)) r.T_at_peak += std::norm(out(k - 1));
  }
  r.overlap = std::abs(r.alpha_Jc_out.dot(out));
  const double width = 1.0 - std::abs(p.lambda);
  r.peak_width_predicted = 2.0 * width;
  if (r.T_at_peak >= 0.9) {
    const PeakWidth pw = peak_width(p.w, p.sys, r.z_star, split, r.alpha_J, width);
    r.width_measured = true;
    r.theta_minus = pw.theta_minus;
    r.theta_plus = pw.theta_plus;
    r.peak_width_measured = pw.theta_plus - pw.theta_minus;
  }
  r.comfortability_value = comfortability(p.w, p.sys, r.z_star, g / g.norm());
  const double m = std::abs(p.lambda);
  r.comfortability_bound = (1.0 + m) * m * m / width;
  return r;
}

struct ComfortabilityGrowth {
  double value = 0.0;
  double lower_bound = 0.0;
  double one_minus_modulus = 0.0;
};

/// E(U(eps), normalized chi(Omega_in) phi^*, z_star) and (1+|l|)|l|^2/(1-|l|).
inline ComfortabilityGrowth comfortability_growth(const ModelFamily& family, double eps, cplx lambda0,
                                                  const SpectralOptions& opt = {}) {
  const detail::PeakSetup p = detail::peak_setup(family, eps, lambda0, opt);
  const CVector& g = p.b.in_data_co;
  ComfortabilityGrowth c;
  const double m = std::abs(p.lambda);
  c.one_minus_modulus = 1.0 - m;
  c.value = comfortability(p.w, p.sys, p.lambda / m, g / g.norm());
  c.lower_bound = (1.0 + m) * m * m / (1.0 - m);
  return c;
}

/// max_n | |phi(out_n)| / ||chi(Omega_out) phi|| - |phi^*(in_n)| / ||chi(Omega_in) phi^*|| |.
inline double boundary_profile_gap(const ResonantStateBoundary& b) {
  double gap = 0.0;
  const double ho = b.out_data.norm(), gi = b.in_data_co.norm();
  for (Eigen::Index k = 0; k < b.out_data.size(); ++k) {
    gap = std::max(gap, std::abs(std::abs(b.out_data(k)) / ho - std::abs(b.in_data_co(k)) / gi));
  }
  return gap;
}

}  // namespace qwres
