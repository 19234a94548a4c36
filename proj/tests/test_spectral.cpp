#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "qwres/builtin_models.hpp"
#include "qwres/spectral.hpp"

using namespace qwres;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

// True if every expected value matches a distinct cluster within tol.
bool spectrum_matches(const EigenSystem& sys, std::vector<std::pair<cplx, int>> expected, double tol) {
  if (sys.clusters.size() != expected.size()) return false;
  for (const auto& c : sys.clusters) {
    auto it = std::find_if(expected.begin(), expected.end(), [&](const auto& e) {
      return std::abs(e.first - c.lambda) <= tol && e.second == c.multiplicity();
    });
    if (it == expected.end()) return false;
    expected.erase(it);
  }
  return true;
}

const double kR = std::sqrt(0.5);

}  // namespace

TEST(Spectral, MatrixSchrodingerSpectrum) {
  const EigenSystem sys = eigen_decompose(matrix_schrodinger_model().at(0.5));
  EXPECT_TRUE(spectrum_matches(sys, {{0, 2}, {1, 1}, {-1, 1}, {cplx(0, kR), 1}, {cplx(0, -kR), 1}}, 1e-10));
  ASSERT_NE(sys.zero_cluster(), nullptr);
  EXPECT_EQ(sys.zero_cluster()->multiplicity(), 2);
  EXPECT_TRUE(sys.nearest(1.0).on_unit_circle);
  EXPECT_FALSE(sys.nearest(cplx(0, 0.7)).on_unit_circle);
}

TEST(Spectral, CycleSpectrum) {
  const EigenSystem s4 = eigen_decompose(cycle_model(4, {1, 1, 1, 1}).at(0.6));
  EXPECT_TRUE(spectrum_matches(s4, {{0.8, 1}, {-0.8, 1}, {cplx(0, 0.8), 1}, {cplx(0, -0.8), 1}}, 1e-10));
  EXPECT_EQ(s4.zero_cluster(), nullptr);
  const EigenSystem s3 = eigen_decompose(cycle_model(3, {1, 1, 1}).at(0.6));
  std::vector<std::pair<cplx, int>> expected;
  for (int k = 1; k <= 3; ++k) expected.push_back({0.8 * unit(2 * kPi * k / 3), 1});
  EXPECT_TRUE(spectrum_matches(s3, expected, 1e-10));
}

TEST(Spectral, ResonanceSetFlagsCircle) {
  const auto set = resonance_set(matrix_schrodinger_model().at(0.5));
  int flagged = 0;
  for (const auto& r : set) {
    if (r.is_eigenvalue_of_u) {
      ++flagged;
      EXPECT_NEAR(std::abs(r.lambda), 1.0, 1e-10);
    }
  }
  EXPECT_EQ(flagged, 2);
  const auto at0 = resonance_set(matrix_schrodinger_model().at(0.0));
  int on_circle = 0;
  for (const auto& r : at0) on_circle += r.is_eigenvalue_of_u ? 1 : 0;
  EXPECT_EQ(on_circle, 4);
  for (const auto& r : resonance_set(cycle_model(4, {1, 1, 1, 1}).at(0.6))) EXPECT_FALSE(r.is_eigenvalue_of_u);
}

TEST(Spectral, ResonancesInsideClosedDisk) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ModelFamily f = random_model(seed);
    for (double eps : {0.05, 0.2}) {
      for (const auto& r : resonance_set(f.at(eps))) EXPECT_LE(std::abs(r.lambda), 1 + 1e-10);
    }
  }
}

TEST(Spectral, ChainsAndBiorthogonality) {
  const WalkOperator w = matrix_schrodinger_model().at(0.3);
  const EigenSystem sys = eigen_decompose(w);
  EXPECT_LT(biorthogonality_residual(sys), 1e-10);
  for (const auto& c : sys.clusters) {
    const ChainResiduals r = chain_residuals(w.interior, c);
    EXPECT_LT(r.right, 1e-10);
    EXPECT_LT(r.left, 1e-10);
    EXPECT_LT(r.biorthogonality, 1e-10);
  }
}

TEST(Spectral, JordanBlockChain) {
  CMatrix m(3, 3);
  m << 0.5, 1, 0, 0, 0.5, 1, 0, 0, 0.5;
  const EigenSystem sys = eigen_decompose(m);
  ASSERT_EQ(sys.clusters.size(), 1u);
  const Cluster& c = sys.clusters[0];
  ASSERT_EQ(c.chain_lengths, std::vector<int>{3});
  EXPECT_NEAR(std::abs(c.lambda - cplx(0.5)), 0, 1e-4);
  const ChainResiduals r = chain_residuals(m, c);
  EXPECT_LT(r.right, 1e-8);
  EXPECT_LT(r.biorthogonality, 1e-8);
}

TEST(Spectral, NilpotentInterior) {
  // A two-barrier-free line at eps = 0 has a nilpotent interior.
  CMatrix m = CMatrix::Zero(4, 4);
  m(1, 0) = 1;
  m(2, 1) = 1;
  m(3, 2) = 1;
  const EigenSystem sys = eigen_decompose(m);
  ASSERT_EQ(sys.clusters.size(), 1u);
  EXPECT_TRUE(sys.clusters[0].is_zero);
  EXPECT_EQ(sys.clusters[0].chain_lengths, std::vector<int>{4});
  EXPECT_LT(biorthogonality_residual(sys), 1e-12);
}

TEST(Spectral, ProjectionsResolveIdentity) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const WalkOperator w = matrix_schrodinger_model().at(0.3);
  const EigenSystem sys = eigen_decompose(w);
  for (int trial = 0; trial < 5; ++trial) {
    CVector f(6);
    for (auto& x : f) x = cplx(g(rng), g(rng));
    CVector sum = CVector::Zero(6);
    for (const auto& c : sys.clusters) {
      const CVector pf = projection_apply(c, f);
      EXPECT_LT((projection_apply(c, pf) - pf).norm(), 1e-8 * f.norm());
      sum += pf;
    }
    EXPECT_LT((sum - f).norm(), 1e-8 * f.norm());
  }
  const Cluster& a = sys.nearest(1.0);
  const Cluster& b = sys.nearest(-1.0);
  const CVector v = a.chain(0, 1);
  EXPECT_LT((projection_apply(a, v) - v).norm(), 1e-10);
  EXPECT_LT(projection_apply(b, v).norm(), 1e-8);
}

TEST(Spectral, EigenvectorNormalization) {
  const EigenSystem sys = eigen_decompose(matrix_schrodinger_model().at(0.3));
  for (const auto& c : sys.clusters) {
    if (!c.simple()) continue;
    const CVector v = c.right.col(0);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    EXPECT_NEAR(v(imax).imag(), 0.0, 1e-12);
    EXPECT_GT(v(imax).real(), 0.0);
  }
}

TEST(Spectral, BoundaryDataMatrixSchrodinger) {
  const double eps = 0.3;
  const WalkOperator w = matrix_schrodinger_model().at(eps);
  const EigenSystem sys = eigen_decompose(w);
  const cplx lam(0, std::sqrt(1 - 2 * eps * eps));
  const ResonantStateBoundary b = boundary_data(w, sys.nearest(lam));
  // Up to the free scalar, the outgoing data is proportional to (1, -1) and
  // the incoming co-data to (-1, 1).
  EXPECT_NEAR(std::abs(b.out_data(0) + b.out_data(1)), 0, 1e-12);
  EXPECT_NEAR(std::abs(b.in_data_co(0) + b.in_data_co(1)), 0, 1e-12);
  // Magnitude ratio against the interior normalization.
  const double ratio = b.out_data.squaredNorm() / b.interior.squaredNorm();
  EXPECT_NEAR(ratio, 1 / std::norm(lam) - 1, 1e-10);
  const double co_ratio = b.in_data_co.squaredNorm() / b.co_interior.squaredNorm();
  EXPECT_NEAR(co_ratio, 1 / std::norm(lam) - 1, 1e-10);
  // Pairing normalization.
  EXPECT_NEAR(std::abs(b.co_interior.dot(b.interior) - cplx(1)), 0, 1e-12);
}

TEST(Spectral, BoundaryDataCycle) {
  // out(l) / out(1) and in(l) / in(1) follow from the explicit resonant state.
  const int n = 4;
  const double eps = 0.6;
  const WalkOperator w = cycle_model(n, {1, 1, 1, 1}).at(eps);
  const EigenSystem sys = eigen_decompose(w);
  const double t = std::sqrt(1 - eps * eps);
  for (const auto& c : sys.clusters) {
    const ResonantStateBoundary b = boundary_data(w, c);
    for (int l = 1; l <= n; ++l) {
      const cplx out_expected = std::pow(t, l - 1) / ipow(c.lambda, l);
      const cplx in_expected = ipow(std::conj(c.lambda), l - 1) / std::pow(t, l);
      EXPECT_NEAR(std::abs(b.out_data(l - 1) / b.out_data(0) - out_expected / (1.0 / c.lambda)), 0, 1e-10);
      EXPECT_NEAR(std::abs(b.in_data_co(l - 1) / b.in_data_co(0) - in_expected / (1.0 / t)), 0, 1e-10);
    }
    EXPECT_NEAR(b.out_data.squaredNorm() / b.interior.squaredNorm(), 0.5625, 1e-10);
  }
}

TEST(Spectral, BoundaryDataOnCircleVanishes) {
  const WalkOperator w = matrix_schrodinger_model().at(0.3);
  const EigenSystem sys = eigen_decompose(w);
  for (cplx mu : {cplx(1), cplx(-1)}) {
    const ResonantStateBoundary b = boundary_data(w, sys.nearest(mu));
    EXPECT_TRUE(b.on_unit_circle);
    EXPECT_LT(b.out_data.norm(), 1e-12);
    EXPECT_LT(b.in_data_co.norm(), 1e-12);
  }
}

TEST(Spectral, BoundaryDataPreconditions) {
  const WalkOperator w = matrix_schrodinger_model().at(0.3);
  const EigenSystem sys = eigen_decompose(w);
  EXPECT_EQ(code_of([&] { boundary_data(w, *sys.zero_cluster()); }), ErrorCode::NotSimple);
}

TEST(Spectral, ResonantStateSatisfiesEigenEquation) {
  // Extending by out_data * lambda^{-j} on the outgoing tails solves U phi = lambda phi on A0.
  const WalkOperator w = cycle_model(3, {0.5, 1, 0.8}).at(0.3);
  const EigenSystem sys = eigen_decompose(w);
  for (const auto& c : sys.clusters) {
    const ResonantStateBoundary b = boundary_data(w, c);
    EXPECT_LT((w.interior * b.interior - c.lambda * b.interior).norm(), 1e-10);
    // The outgoing tail value is (U phi)(out) / lambda.
    EXPECT_LT((w.b_out * b.interior - c.lambda * b.out_data).norm(), 1e-10);
  }
}

TEST(Spectral, ClusterAmbiguity) {
  // Equally spaced by d with tolerance 1.2 d: neighbours link, but the chain
  // spans 3 d, beyond twice the tolerance.
  const double d = 1e-9;
  CMatrix m = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) m(k, k) = 0.5 + k * d;
  SpectralOptions opt;
  opt.tol_cluster_rel = 1.2 * d / 0.5;
  EXPECT_EQ(code_of([&] { eigen_decompose(m, opt); }), ErrorCode::ClusterAmbiguity);
  opt.tol_cluster_rel = 1e-12;
  EXPECT_EQ(eigen_decompose(m, opt).clusters.size(), 4u);
}

TEST(Spectral, NonSquareRejected) {
  EXPECT_EQ(code_of([] { eigen_decompose(CMatrix::Zero(2, 3)); }), ErrorCode::DimensionMismatch);
}
