#pragma once

#include <set>
#include <vector>

#include "qwres/error.hpp"
#include "qwres/linalg.hpp"
#include "qwres/spectral.hpp"
#include "qwres/walk.hpp"

namespace qwres {

enum class Route { Resolvent, Expansion };

/// Interior part u and outgoing boundary data alpha_out = z chi(Omega_out) phi
/// of the generalized eigenfunction with incoming data alpha_in.
struct GeneralizedEigenfunction {
  CVector u;
  CVector alpha_out;
  double orthogonality_residual = 0.0;  // max ||P_lambda f|| over unit-circle clusters
};

inline constexpr double kOrthogonalityTol = 1e-8;

namespace detail {

inline void check_z(cplx z) {
  if (!(std::abs(z) >= 1e-6)) fail(ErrorCode::InvalidArgument, "z must satisfy |z| >= 1e-6");
}

inline bool on_circle(cplx z, double tol) { return std::abs(std::abs(z) - 1.0) <= tol; }

}  // namespace detail

/// Reduced-resolvent construction: u = sum over off-circle clusters of
/// sum_k (M - lambda)^k P_lambda f / (z - lambda)^{k+1}, f = B_in alpha_in.
inline GeneralizedEigenfunction generalized_eigenfunction(const WalkOperator& w,
                                                          const EigenSystem& sys, cplx z,
                                                          const CVector& alpha_in) {
  detail::check_z(z);
  if (alpha_in.size() != static_cast<Eigen::Index>(w.n)) {
    fail(ErrorCode::DimensionMismatch, "alpha_in has wrong length");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(w.m);
  const CVector f = w.b_in * alpha_in;
  GeneralizedEigenfunction g;
  g.u = CVector::Zero(m);
  const bool z_on_circle = detail::on_circle(z, sys.tol_circle);
  for (const auto& c : sys.clusters) {
    CVector pf = projection_apply(c, f);
    if (c.on_unit_circle) {
      g.orthogonality_residual = std::max(g.orthogonality_residual, pf.norm());
      continue;
    }
    if (!z_on_circle && std::abs(z - c.lambda) <= std::max(sys.tol_cluster, 1e-12)) {
      fail(ErrorCode::AtInteriorResonance, "z coincides with a resonance");
    }
    const cplx d = z - c.lambda;
    cplx denom = d;
    for (int k = 0; k < c.multiplicity(); ++k) {
      g.u += pf / denom;
      pf = w.interior * pf - c.lambda * pf;
      denom *= d;
    }
  }
  if (g.orthogonality_residual > kOrthogonalityTol * std::max(1.0, f.norm())) {
    fail(ErrorCode::OrthogonalityViolated,
         "f has component " + expr::format_number(g.orthogonality_residual) +
             " along unit-circle eigenvectors");
  }
  g.alpha_out = w.b_out * g.u + w.direct * alpha_in;
  return g;
}

inline GeneralizedEigenfunction generalized_eigenfunction(const WalkOperator& w, cplx z,
                                                          const CVector& alpha_in,
                                                          const SpectralOptions& opt = {}) {
  return generalized_eigenfunction(w, eigen_decompose(w, opt), z, alpha_in);
}

/// Independent reference: solves (M - z) u = -B_in alpha_in directly, with a
/// minimum-norm least-squares solve on the unit circle.
inline GeneralizedEigenfunction oracle_direct_solve(const WalkOperator& w, cplx z,
                                                    const CVector& alpha_in) {
  detail::check_z(z);
  const Eigen::Index m = static_cast<Eigen::Index>(w.m);
  const CVector f = w.b_in * alpha_in;
  const CMatrix a = w.interior - z * CMatrix::Identity(m, m);
  GeneralizedEigenfunction g;
  if (m == 0) {
    g.u = CVector::Zero(0);
  } else if (detail::on_circle(z, 1e-12)) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    g.u = svd.solve(-f);
  } else {
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (!(lu.rcond() > 1e-14)) fail(ErrorCode::SingularSystem, "z is an eigenvalue of the interior");
    g.u = lu.solve(-f);
  }
  const double res = m == 0 ? 0.0 : (a * g.u + f).norm();
  if (!(res <= 1e-6 * std::max(1.0, f.norm()))) {
    fail(ErrorCode::SingularSystem, "solve residual " + expr::format_number(res));
  }
  g.alpha_out = w.b_out * g.u + w.direct * alpha_in;
  return g;
}

namespace detail {

/// sum_{k,l,p} (B_in alpha, left_{k,l+p}) / (z - lambda)^{p+1} B_out right_{k,l},
/// as an N x N matrix.
inline CMatrix chain_block(const WalkOperator& w, const Cluster& c, cplx z) {
  const auto n = static_cast<Eigen::Index>(w.n);
  CMatrix out = CMatrix::Zero(n, n);
  const CMatrix emit = w.b_out * c.right;              // columns B_out phi_{k,l}
  const CMatrix pair = w.b_in.adjoint() * c.left;      // columns B_in^* phi^*_{k,l}
  const cplx d = z - c.lambda;
  for (std::size_t k = 0; k < c.chain_lengths.size(); ++k) {
    const int len = c.chain_lengths[k];
    const int kk = static_cast<int>(k);
    for (int l = 1; l <= len; ++l) {
      cplx denom = d;
      for (int p = 0; p <= len - l; ++p) {
        out += emit.col(c.column(kk, l)) * pair.col(c.column(kk, l + p)).adjoint() / denom;
        denom *= d;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Contribution of a nonzero off-circle cluster to the scattering matrix,
/// written with tail data of the (generalized) resonant states.
inline CMatrix M_lambda_block(const WalkOperator& w, const Cluster& c, cplx z) {
  if (c.is_zero) fail(ErrorCode::ZeroCluster, "use M_zero_block for the zero cluster");
  detail::check_z(z);
  const auto n = static_cast<Eigen::Index>(w.n);
  CMatrix out = CMatrix::Zero(n, n);
  if (c.on_unit_circle) return out;
  const cplx lam = c.lambda;
  const cplx lamc = std::conj(lam);
  const cplx d = z - lam;
  if (c.simple()) {
    const ResonantStateBoundary b = boundary_data(w, c);
    return lam * lam / d * b.out_data * b.in_data_co.adjoint();
  }
  const ChainBoundary b = chain_boundary_data(w, c);
  for (std::size_t k = 0; k < c.chain_lengths.size(); ++k) {
    const int len = c.chain_lengths[k];
    const int kk = static_cast<int>(k);
    auto g = [&](int j) -> CVector {
      if (j > len) return CVector::Zero(n);
      return b.in_data_co.col(c.column(kk, j));
    };
    for (int l = 1; l <= len; ++l) {
      cplx denom = d;
      for (int p = 0; p <= len - l; ++p) {
        const int j = l + p;
        // chi(Omega_in) U^{-2} phi^*_j expanded along the co-chain
        const CVector q = lamc * lamc * g(j) + 2.0 * lamc * g(j + 1) + g(j + 2);
        out += b.out_data.col(c.column(kk, l)) * q.adjoint() / denom;
        denom *= d;
      }
    }
  }
  return out;
}

/// Zero-cluster chains plus the direct in-to-out coupling D.
inline CMatrix M_zero_block(const WalkOperator& w, const EigenSystem& sys, cplx z) {
  detail::check_z(z);
  CMatrix out = w.direct;
  if (const Cluster* c = sys.zero_cluster()) out += detail::chain_block(w, *c, z);
  return out;
}

struct ScatteringReport {
  cplx z;
  Route route = Route::Resolvent;
  CMatrix sigma;       // rows out-boundary, columns in-boundary
  CMatrix interior_u;  // column n: u for alpha_in = delta_n (resolvent route only)
  double unitarity_residual = 0.0;
  double orthogonality_residual = 0.0;
};

inline ScatteringReport scattering_matrix(const WalkOperator& w, const EigenSystem& sys, cplx z,
                                          Route route = Route::Resolvent) {
  detail::check_z(z);
  const auto n = static_cast<Eigen::Index>(w.n);
  ScatteringReport r;
  r.z = z;
  r.route = route;
  if (route == Route::Resolvent) {
    r.sigma = CMatrix(n, n);
    r.interior_u = CMatrix(static_cast<Eigen::Index>(w.m), n);
    for (Eigen::Index k = 0; k < n; ++k) {
      CVector e = CVector::Zero(n);
      e(k) = 1.0;
      GeneralizedEigenfunction g = generalized_eigenfunction(w, sys, z, e);
      r.sigma.col(k) = g.alpha_out;
      r.interior_u.col(k) = g.u;
      r.orthogonality_residual = std::max(r.orthogonality_residual, g.orthogonality_residual);
    }
  } else {
    r.sigma = M_zero_block(w, sys, z);
    for (const auto& c : sys.clusters) {
      if (c.is_zero || c.on_unit_circle) continue;
      r.sigma += M_lambda_block(w, c, z);
    }
  }
  r.unitarity_residual = isometry_residual(r.sigma);
  return r;
}

inline ScatteringReport scattering_matrix(const WalkOperator& w, cplx z,
                                          Route route = Route::Resolvent,
                                          const SpectralOptions& opt = {}) {
  return scattering_matrix(w, eigen_decompose(w, opt), z, route);
}

/// Scattering matrix from the direct-solve oracle.
inline CMatrix oracle_sigma(const WalkOperator& w, cplx z) {
  const auto n = static_cast<Eigen::Index>(w.n);
  CMatrix s(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    CVector e = CVector::Zero(n);
    e(k) = 1.0;
    s.col(k) = oracle_direct_solve(w, z, e).alpha_out;
  }
  return s;
}

/// A nonempty proper subset J of the tail indices 1..N.
struct ChannelSplit {
  std::vector<int> J;

  bool contains(int n) const { return std::find(J.begin(), J.end(), n) != J.end(); }

  void validate(int num_tails) const {
    std::set<int> s(J.begin(), J.end());
    if (s.empty() || static_cast<int>(s.size()) >= num_tails || s.size() != J.size()) {
      fail(ErrorCode::BadChannelSplit, "J must be a nonempty proper subset of 1..N without repeats");
    }
    for (int n : s) {
      if (n < 1 || n > num_tails) fail(ErrorCode::BadChannelSplit, "tail index out of range");
    }
  }
};

struct TransmissionReflection {
  double T = 0.0;
  double R = 0.0;
};

/// R = ||chi(Omega_J) Sigma alpha||^2, T = ||chi(Omega_Jc) Sigma alpha||^2.
inline TransmissionReflection transmission_reflection(const CMatrix& sigma,
                                                      const ChannelSplit& split,
                                                      const CVector& alpha_in) {
  const int n = static_cast<int>(sigma.cols());
  split.validate(n);
  if (std::abs(alpha_in.norm() - 1.0) > 1e-10) fail(ErrorCode::NotNormalized, "||alpha_in|| != 1");
  for (int k = 1; k <= n; ++k) {
    if (!split.contains(k) && std::abs(alpha_in(k - 1)) > 1e-14) {
      fail(ErrorCode::BadSupport, "alpha_in has weight on tail " + std::to_string(k) + " outside J");
    }
  }
  const CVector out = sigma * alpha_in;
  TransmissionReflection tr;
  for (int k = 1; k <= n; ++k) {
    (split.contains(k) ? tr.R : tr.T) += std::norm(out(k - 1));
  }
  return tr;
}

inline double comfortability(const WalkOperator& w, const EigenSystem& sys, cplx z,
                             const CVector& alpha_in) {
  return generalized_eigenfunction(w, sys, z, alpha_in).u.squaredNorm();
}

}  // namespace qwres
