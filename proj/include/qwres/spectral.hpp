#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "qwres/error.hpp"
#include "qwres/linalg.hpp"
#include "qwres/walk.hpp"

namespace qwres {

struct SpectralOptions {
  double tol_cluster_rel = 1e-8;  // scaled by ||M||
  double tol_circle = 1e-8;
  double rank_tol = 1e-10;  // relative singular-value threshold
};

/// One eigenvalue cluster with right Jordan chains and biorthogonal left chains.
///
/// Column j of `right` is phi_{k,l}; chains are stored consecutively with
/// l = 1 (the eigenvector) first. (M - lambda) phi_{k,l} = phi_{k,l-1} and
/// (M^* - conj(lambda)) left_{k,l} = left_{k,l+1}; left^* right = I.
struct Cluster {
  cplx lambda;
  bool on_unit_circle = false;
  bool is_zero = false;
  std::vector<int> chain_lengths;
  CMatrix right;
  CMatrix left;

  int multiplicity() const { return static_cast<int>(right.cols()); }
  bool simple() const { return multiplicity() == 1; }

  Eigen::Index column(int k, int l) const {
    Eigen::Index c = 0;
    for (int i = 0; i < k; ++i) c += chain_lengths[i];
    return c + l - 1;
  }
  CVector chain(int k, int l) const { return right.col(column(k, l)); }
  CVector co_chain(int k, int l) const { return left.col(column(k, l)); }
};

struct EigenSystem {
  Eigen::Index dim = 0;
  double tol_cluster = 0.0;
  double tol_circle = 0.0;
  std::vector<Cluster> clusters;

  const Cluster* zero_cluster() const {
    for (const auto& c : clusters) {
      if (c.is_zero) return &c;
    }
    return nullptr;
  }

  /// Cluster whose eigenvalue is nearest to mu.
  const Cluster& nearest(cplx mu) const {
    if (clusters.empty()) fail(ErrorCode::InvalidArgument, "empty spectrum");
    const Cluster* best = &clusters.front();
    for (const auto& c : clusters) {
      if (std::abs(c.lambda - mu) < std::abs(best->lambda - mu)) best = &c;
    }
    return *best;
  }
};

namespace detail {

/// Rescales v so its largest-modulus component is real and positive.
inline void fix_phase(CVector& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double a = std::abs(v(imax));
  if (a > 0.0) v *= std::conj(v(imax)) / a;
}

/// Orthonormal basis of the part of span(cand) orthogonal to span(covered).
inline CMatrix complement_in(const CMatrix& cand, const CMatrix& covered) {
  CMatrix r = cand;
  if (covered.cols() > 0) {
    Eigen::JacobiSVD<CMatrix> svd(covered, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    const auto& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > 1e-10 * s(0)) ++rank;
    }
    CMatrix q = svd.matrixU().leftCols(rank);
    r -= q * (q.adjoint() * r);
  }
  Eigen::JacobiSVD<CMatrix> svd(r, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > 1e-6) ++keep;
  }
  return svd.matrixU().leftCols(keep);
}

inline Cluster build_cluster(const CMatrix& m, cplx lambda, int mult, const SpectralOptions& opt) {
  const Eigen::Index n = m.rows();
  Cluster cl;
  cl.lambda = lambda;
  const CMatrix nmat = m - lambda * CMatrix::Identity(n, n);

  // Kernels of N^j until the generalized eigenspace is reached.
  std::vector<CMatrix> kernels{CMatrix(n, 0)};
  std::vector<Eigen::Index> dims{0};
  CMatrix power = CMatrix::Identity(n, n);
  for (int j = 1; j <= mult; ++j) {
    power = nmat * power;
    CMatrix k = null_space(power, opt.rank_tol);
    if (k.cols() > mult) {
      fail(ErrorCode::ClusterAmbiguity, "kernel of (M - lambda)^" + std::to_string(j) +
                                            " exceeds the cluster multiplicity");
    }
    kernels.push_back(k);
    dims.push_back(k.cols());
    if (k.cols() == mult) break;
    if (k.cols() == dims[dims.size() - 2]) break;
  }
  const int p = static_cast<int>(dims.size()) - 1;
  if (dims.back() != mult) {
    fail(ErrorCode::IllConditionedChain,
         "generalized eigenspace has dimension " + std::to_string(dims.back()) + ", expected " +
             std::to_string(mult));
  }

  // Chain tops, longest first.
  struct Top {
    int length;
    CVector x;
  };
  std::vector<Top> tops;
  for (int j = p; j >= 1; --j) {
    const Eigen::Index next = j < p ? dims[j + 1] : dims[j];
    const Eigen::Index count = (dims[j] - dims[j - 1]) - (next - dims[j]);
    if (count <= 0) continue;
    CMatrix covered = kernels[j - 1];
    for (const auto& t : tops) {
      CVector y = t.x;
      for (int s = 0; s < t.length - j; ++s) y = nmat * y;
      covered.conservativeResize(n, covered.cols() + 1);
      covered.col(covered.cols() - 1) = y;
    }
    CMatrix fresh = complement_in(kernels[j], covered);
    if (fresh.cols() < count) {
      fail(ErrorCode::IllConditionedChain, "could not extend Jordan chains at level " +
                                               std::to_string(j));
    }
    for (Eigen::Index c = 0; c < count; ++c) {
      CVector x = fresh.col(c);
      fix_phase(x);
      tops.push_back({j, x});
    }
  }

  cl.right = CMatrix(n, mult);
  Eigen::Index col = 0;
  for (const auto& t : tops) {
    cl.chain_lengths.push_back(t.length);
    std::vector<CVector> vs(t.length);
    vs[t.length - 1] = t.x;
    for (int l = t.length - 1; l >= 1; --l) vs[l - 1] = nmat * vs[l];
    for (const auto& v : vs) cl.right.col(col++) = v;
  }

  // Left generalized eigenspace, then biorthogonal rescaling W = L (V^* L)^{-1}.
  CMatrix lpow = CMatrix::Identity(n, n);
  const CMatrix nadj = nmat.adjoint();
  for (int j = 0; j < p; ++j) lpow = nadj * lpow;
  CMatrix lbasis = null_space(lpow, opt.rank_tol);
  if (lbasis.cols() != mult) {
    fail(ErrorCode::IllConditionedChain, "left generalized eigenspace has dimension " +
                                             std::to_string(lbasis.cols()) + ", expected " +
                                             std::to_string(mult));
  }
  CMatrix pairing = cl.right.adjoint() * lbasis;
  Eigen::JacobiSVD<CMatrix> psvd(pairing);
  const double smin = psvd.singularValues()(psvd.singularValues().size() - 1);
  if (smin < 1e-12) {
    fail(ErrorCode::IllConditionedChain, "biorthogonal pairing " + expr::format_number(smin));
  }
  cl.left = lbasis * pairing.inverse();
  return cl;
}

}  // namespace detail

/// Clustered eigen-decomposition of a (generally non-normal) square matrix.
inline EigenSystem eigen_decompose(const CMatrix& m, const SpectralOptions& opt = {}) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "matrix must be square");
  EigenSystem sys;
  sys.dim = m.rows();
  sys.tol_circle = opt.tol_circle;
  const double norm = op_norm(m);
  sys.tol_cluster = opt.tol_cluster_rel * std::max(norm, 1e-300);
  if (m.rows() == 0) return sys;

  Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
  const CVector ev = solver.eigenvalues();
  const Eigen::Index n = ev.size();

  // Single-linkage grouping; a group that chains beyond 2*tol is ambiguous.
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(ev(i) - ev(j)) <= sys.tol_cluster) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> group_of(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = find(i);
    if (group_of[r] < 0) {
      group_of[r] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[r]].push_back(i);
  }

  for (const auto& g : groups) {
    cplx mean(0.0);
    for (auto i : g) mean += ev(i);
    mean /= static_cast<double>(g.size());
    for (auto i : g) {
      for (auto j : g) {
        if (std::abs(ev(i) - ev(j)) > 2.0 * sys.tol_cluster) {
          fail(ErrorCode::ClusterAmbiguity, "eigenvalues near " + expr::format_number(mean.real()) +
                                                "+" + expr::format_number(mean.imag()) +
                                                "i chain beyond twice the cluster tolerance");
        }
      }
    }
    const bool is_zero = std::abs(mean) <= sys.tol_cluster;
    if (is_zero) mean = 0.0;
    Cluster c = detail::build_cluster(m, mean, static_cast<int>(g.size()), opt);
    c.is_zero = is_zero;
    c.on_unit_circle = std::abs(std::abs(mean) - 1.0) <= opt.tol_circle;
    sys.clusters.push_back(std::move(c));
  }

  // Deterministic order: zero cluster first, then by argument, then modulus.
  std::sort(sys.clusters.begin(), sys.clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.is_zero != b.is_zero) return a.is_zero;
    const double aa = std::arg(a.lambda), ab = std::arg(b.lambda);
    if (aa != ab) return aa < ab;
    return std::abs(a.lambda) < std::abs(b.lambda);
  });
  return sys;
}

inline EigenSystem eigen_decompose(const WalkOperator& w, const SpectralOptions& opt = {}) {
  return eigen_decompose(w.interior, opt);
}

/// Residuals of the chain relations and of biorthogonality (max-norm).
struct ChainResiduals {
  double right = 0.0;
  double left = 0.0;
  double biorthogonality = 0.0;
};

inline ChainResiduals chain_residuals(const CMatrix& m, const Cluster& c) {
  ChainResiduals r;
  const Eigen::Index n = m.rows();
  const CMatrix nmat = m - c.lambda * CMatrix::Identity(n, n);
  const CMatrix nadj = nmat.adjoint();
  for (std::size_t k = 0; k < c.chain_lengths.size(); ++k) {
    const int len = c.chain_lengths[k];
    for (int l = 1; l <= len; ++l) {
      CVector prev = l > 1 ? c.chain(static_cast<int>(k), l - 1) : CVector::Zero(n);
      CVector next = l < len ? c.co_chain(static_cast<int>(k), l + 1) : CVector::Zero(n);
      r.right = std::max(r.right, (nmat * c.chain(static_cast<int>(k), l) - prev).cwiseAbs().maxCoeff());
      r.left = std::max(r.left, (nadj * c.co_chain(static_cast<int>(k), l) - next).cwiseAbs().maxCoeff());
    }
  }
  return r;
}

/// Max-norm deviation of the full biorthogonality matrix from the identity.
inline double biorthogonality_residual(const EigenSystem& sys) {
  const Eigen::Index n = sys.dim;
  CMatrix v(n, n), w(n, n);
  Eigen::Index col = 0;
  for (const auto& c : sys.clusters) {
    v.middleCols(col, c.multiplicity()) = c.right;
    w.middleCols(col, c.multiplicity()) = c.left;
    col += c.multiplicity();
  }
  if (col != n) return std::numeric_limits<double>::infinity();
  return max_abs(w.adjoint() * v - CMatrix::Identity(n, n));
}

/// P_lambda f = sum (f, left_{k,l}) right_{k,l}.
inline CVector projection_apply(const Cluster& c, const CVector& f) {
  return c.right * (c.left.adjoint() * f);
}

struct ResonanceEntry {
  cplx lambda;
  int multiplicity = 0;
  bool is_eigenvalue_of_u = false;
};

inline std::vector<ResonanceEntry> resonance_set(const EigenSystem& sys) {
  std::vector<ResonanceEntry> out;
  for (const auto& c : sys.clusters) out.push_back({c.lambda, c.multiplicity(), c.on_unit_circle});
  return out;
}

inline std::vector<ResonanceEntry> resonance_set(const WalkOperator& w,
                                                 const SpectralOptions& opt = {}) {
  return resonance_set(eigen_decompose(w, opt));
}

/// Boundary values of a simple resonant state and of its incoming partner.
struct ResonantStateBoundary {
  cplx lambda;
  bool on_unit_circle = false;
  CVector interior;     // chi(A0) phi
  CVector co_interior;  // chi(A0) phi^*
  CVector out_data;     // chi(Omega_out) phi
  CVector in_data_co;   // chi(Omega_in) phi^*
};

/// From U phi = lambda phi on the out-boundary rows: lambda phi(out) = B_out phi.
/// From U^* phi^* = conj(lambda) phi^* on the in-boundary rows:
/// conj(lambda) phi^*(in) = B_in^* phi^*.
inline ResonantStateBoundary boundary_data(const WalkOperator& w, const Cluster& c) {
  if (!c.simple()) fail(ErrorCode::NotSimple, "cluster has multiplicity " + std::to_string(c.multiplicity()));
  if (c.is_zero) fail(ErrorCode::ZeroCluster, "the zero resonance has no tail extension");
  ResonantStateBoundary b;
  b.lambda = c.lambda;
  b.on_unit_circle = c.on_unit_circle;
  b.interior = c.right.col(0);
  b.co_interior = c.left.col(0);
  const auto n = static_cast<Eigen::Index>(w.n);
  if (c.on_unit_circle) {
    b.out_data = CVector::Zero(n);
    b.in_data_co = CVector::Zero(n);
    return b;
  }
  b.out_data = w.b_out * b.interior / c.lambda;
  b.in_data_co = w.b_in.adjoint() * b.co_interior / std::conj(c.lambda);
  return b;
}

/// Boundary data of generalized (Jordan) resonant states, one column per chain
/// vector in the cluster's column order.
struct ChainBoundary {
  CMatrix out_data;    // chi(Omega_out) phi_{k,l}
  CMatrix in_data_co;  // chi(Omega_in) phi^*_{k,l}
};

inline ChainBoundary chain_boundary_data(const WalkOperator& w, const Cluster& c) {
  if (c.is_zero) fail(ErrorCode::ZeroCluster, "the zero resonance has no tail extension");
  const auto n = static_cast<Eigen::Index>(w.n);
  ChainBoundary b;
  b.out_data = CMatrix::Zero(n, c.multiplicity());
  b.in_data_co = CMatrix::Zero(n, c.multiplicity());
  if (c.on_unit_circle) return b;
  for (std::size_t k = 0; k < c.chain_lengths.size(); ++k) {
    const int len = c.chain_lengths[k];
    const int kk = static_cast<int>(k);
    CVector prev = CVector::Zero(n);
    for (int l = 1; l <= len; ++l) {
      CVector h = (w.b_out * c.chain(kk, l) - prev) / c.lambda;
      b.out_data.col(c.column(kk, l)) = h;
      prev = h;
    }
    CVector next = CVector::Zero(n);
    for (int l = len; l >= 1; --l) {
      CVector g = (w.b_in.adjoint() * c.co_chain(kk, l) - next) / std::conj(c.lambda);
      b.in_data_co.col(c.column(kk, l)) = g;
      next = g;
    }
  }
  return b;
}

}  // namespace qwres
