#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace qwres {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Largest singular value; zero for empty matrices.
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// ||A^* A - I||_max for the columns of A.
inline double isometry_residual(const CMatrix& a) {
  if (a.cols() == 0) return 0.0;
  CMatrix g = a.adjoint() * a;
  g -= CMatrix::Identity(a.cols(), a.cols());
  return max_abs(g);
}

/// Orthonormal basis of ker(A), rank decided by singular values below rel_tol * sigma_max.
inline CMatrix null_space(const CMatrix& a, double rel_tol = 1e-10) {
  const auto n = a.cols();
  if (a.rows() == 0) return CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * smax && smax > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

/// Integer power of a complex number, exact for small exponents.
inline cplx ipow(cplx z, long n) {
  if (n < 0) return cplx(1.0) / ipow(z, -n);
  cplx r(1.0);
  cplx b = z;
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

inline cplx unit(double theta) { return std::polar(1.0, theta); }

}  // namespace qwres
