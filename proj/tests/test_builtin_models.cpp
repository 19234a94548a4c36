#include <random>

#include <gtest/gtest.h>

#include "qwres/builtin_models.hpp"
#include "qwres/scattering.hpp"

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

std::vector<double> taus(const std::vector<double>& c, double eps) {
  std::vector<double> t{1.0};
  for (double ck : c) t.push_back(t.back() * std::sqrt(1 - ck * ck * eps * eps));
  return t;
}

// sum_{n in J} c_n tau_N^{(n-1)/N} / (c tau_n) e^{-2 pi i k (n-1)/N} delta_n
CVector cycle_alpha(const std::vector<double>& c, const std::vector<int>& J, double cnorm, double eps, int k) {
  const int n = static_cast<int>(c.size());
  const auto t = taus(c, eps);
  CVector a = CVector::Zero(n);
  for (int m : J) {
    a(m - 1) = c[m - 1] * std::pow(t[n], (m - 1.0) / n) / (cnorm * t[m]) * unit(-2 * kPi * k * (m - 1.0) / n);
  }
  return a;
}

}  // namespace

TEST(BuiltinModels, MatrixSchrodingerRange) {
  const ModelFamily ms = matrix_schrodinger_model();
  EXPECT_NO_THROW(ms.at(0.7));
  EXPECT_EQ(code_of([&] { ms.at(0.70710678118654757); }), ErrorCode::EpsOutOfRange);
  EXPECT_EQ(code_of([&] { ms.at(-0.1); }), ErrorCode::EpsOutOfRange);
}

TEST(BuiltinModels, CycleRange) {
  const ModelFamily cy = cycle_model(3, {0.5, 2.0, 1.0});
  EXPECT_NO_THROW(cy.at(0.49));
  EXPECT_EQ(code_of([&] { cy.at(0.5); }), ErrorCode::EpsOutOfRange);
  EXPECT_EQ(code_of([] { cycle_model(1, {1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { cycle_model(3, {1, 1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { closed_form_sigma_cycle(2, {1, 1}, 1.0, unit(0.2)); }), ErrorCode::EpsOutOfRange);
}

TEST(BuiltinModels, MatrixSchrodingerClosedForm) {
  for (double eps : {0.0, 0.2, 0.45, 0.65}) {
    const WalkOperator w = matrix_schrodinger_model().at(eps);
    for (int k = 0; k < 12; ++k) {
      const cplx z = unit(0.13 + 2 * kPi * k / 12);
      EXPECT_LT(max_abs(scattering_matrix(w, z).sigma - closed_form_sigma_ms(eps, z)), 1e-10);
    }
  }
  // eps = 0 gives diag(1/z).
  const cplx z = unit(1.2);
  EXPECT_LT(max_abs(closed_form_sigma_ms(0.0, z) - CMatrix::Identity(2, 2) / z), 1e-15);
  EXPECT_EQ(code_of([] { closed_form_sigma_ms(0.5, cplx(0, std::sqrt(0.5))); }), ErrorCode::PoleHit);
}

TEST(BuiltinModels, CycleClosedForm) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int n = 2; n <= 5; ++n) {
    std::vector<double> c(n);
    for (auto& x : c) x = u(rng);
    for (double eps : {0.1, 0.4}) {
      const WalkOperator w = cycle_model(n, c).at(eps);
      for (int k = 0; k < 8; ++k) {
        const cplx z = unit(0.21 + 2 * kPi * k / 8);
        EXPECT_LT(max_abs(scattering_matrix(w, z).sigma - closed_form_sigma_cycle(n, c, eps, z)), 1e-10);
      }
    }
  }
  EXPECT_LT(max_abs(closed_form_sigma_cycle(3, {1, 1, 1}, 0.0, unit(0.4)) - CMatrix::Identity(3, 3)), 1e-15);
}

TEST(BuiltinModels, CycleTwoLeakyVertices) {
  // c = (c1, 0, .., c1 at j0, .., 0): the 2x2 block has the explicit form and
  // at z^N = 1 the walker is fully transmitted from tail 1 to tail j0.
  const int n = 5, j0 = 3;
  const double c1 = 0.8, eps = 0.3, e = c1 * c1 * eps * eps;
  std::vector<double> c(n, 0.0);
  c[0] = c[j0 - 1] = c1;
  EXPECT_NEAR(taus(c, eps)[n], 1 - e, 1e-15);
  const WalkOperator w = cycle_model(n, c).at(eps);
  for (double th : {0.3, 1.9}) {
    const cplx z = unit(th);
    const CMatrix s = scattering_matrix(w, z).sigma;
    const cplx zn = ipow(z, n);
    EXPECT_NEAR(std::abs(s(0, 0) - (zn - 1.0) * std::sqrt(1 - e) / (zn - 1.0 + e)), 0, 1e-12);
    EXPECT_NEAR(std::abs(s(j0 - 1, 0) + e * ipow(z, n + 1 - j0) / (zn - 1.0 + e)), 0, 1e-12);
    EXPECT_NEAR(std::abs(s(0, j0 - 1) + e * ipow(z, j0 - 1) / (zn - 1.0 + e)), 0, 1e-12);
    EXPECT_NEAR(std::abs(s(1, 1) - 1.0), 0, 1e-12);
  }
  for (int k = 0; k < n; ++k) {
    const cplx z = unit(2 * kPi * k / n);
    const CMatrix s = scattering_matrix(w, z).sigma;
    EXPECT_NEAR(std::abs(s(j0 - 1, 0) + ipow(z, 1 - j0)), 0, 1e-10);
    EXPECT_NEAR(std::abs(s(0, j0 - 1) + ipow(z, j0 - 1)), 0, 1e-10);
  }
}

TEST(BuiltinModels, CycleOneAgainstMany) {
  // c_1^2 = sum_{n >= 2} c_n^2: tail 1 spreads over the others and the
  // combination alpha_k focuses back into tail 1, up to O(eps^2).
  const std::vector<double> c{1.0, 0.6, 0.8};
  const int n = 3;
  for (double eps : {0.01, 0.03}) {
    const WalkOperator w = cycle_model(n, c).at(eps);
    for (int k = 0; k < n; ++k) {
      const cplx z = unit(2 * kPi * k / n);
      const CMatrix s = scattering_matrix(w, z).sigma;
      EXPECT_LE(std::abs(s(0, 0)), 10 * eps * eps);
      for (int l = 2; l <= n; ++l) {
        EXPECT_LE(std::abs(s(l - 1, 0) + c[l - 1] / (c[0] * ipow(z, l - 1))), 10 * eps * eps);
      }
      const CVector out = s * cycle_alpha(c, {2, 3}, c[0], eps, k);
      CVector expected = CVector::Zero(n);
      expected(0) = -1.0;
      EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 10 * eps * eps);
    }
  }
}

TEST(BuiltinModels, CycleBalancedSplit) {
  // sum_J c_n^2 = sum_Jc c_n^2 = c^2: alpha_k on J leaves through J^c with
  // amplitudes -(c_l / c) z^{1-l}.
  const std::vector<double> c{0.6, 1.0, 0.8, 0.0};
  const std::vector<int> J{1, 3};
  const double cn = 1.0;
  const int n = 4;
  for (double eps : {0.01, 0.03}) {
    const WalkOperator w = cycle_model(n, c).at(eps);
    for (int k = 0; k < n; ++k) {
      const cplx z = unit(2 * kPi * k / n);
      const CVector out = scattering_matrix(w, z).sigma * cycle_alpha(c, J, cn, eps, k);
      CVector expected = CVector::Zero(n);
      for (int l : {2, 4}) expected(l - 1) = -c[l - 1] / cn * ipow(z, 1 - l);
      EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 10 * eps * eps) << eps << " " << k;
    }
  }
}

TEST(BuiltinModels, PartialFractionIdentity) {
  const auto a = partial_fraction_identity(4, 2, 0.9, unit(kPi / 7));
  EXPECT_LE(std::abs(a.lhs - a.rhs), 1e-12 * (1 + std::abs(a.rhs)));
  const auto b = partial_fraction_identity(3, 3, 1.0, 2.0);
  EXPECT_NEAR(std::abs(b.rhs - 3.0 * 4.0 / 7.0), 0, 1e-14);
  EXPECT_LE(std::abs(b.lhs - b.rhs), 1e-12 * (1 + std::abs(b.rhs)));
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> cu(0.05, 2.0), th(0, 2 * kPi), rad(0.3, 1.7);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const int p = 1 + static_cast<int>(rng() % n);
    const auto s = partial_fraction_identity(n, p, cu(rng), rad(rng) * unit(th(rng)));
    EXPECT_LE(std::abs(s.lhs - s.rhs), 1e-12 * (1 + std::abs(s.rhs)));
  }
  EXPECT_EQ(code_of([] { partial_fraction_identity(2, 1, 1.0, 1.0); }), ErrorCode::PoleHit);
  EXPECT_EQ(code_of([] { partial_fraction_identity(2, 3, 1.0, 2.0); }), ErrorCode::InvalidArgument);
}

TEST(BuiltinModels, RandomModelsAreValid) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ModelFamily f = random_model(seed);
    const Routing r = free_routing_check(f.at(0.0));
    EXPECT_EQ(r.size(), 2u);
    const EigenSystem sys = eigen_decompose(f.at(0.0));
    int on_circle = 0;
    for (const auto& c : sys.clusters) {
      if (c.on_unit_circle) {
        ++on_circle;
        EXPECT_TRUE(c.simple());
      }
    }
    EXPECT_GT(on_circle, 0);
    EXPECT_LT(f.at(0.3).isometry_residual(), 1e-12);
  }
  // Same seed, same model.
  EXPECT_LT(max_abs(random_model(4).at(0.2).full - random_model(4).at(0.2).full), 1e-300);
}
