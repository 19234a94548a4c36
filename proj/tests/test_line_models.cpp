#include <random>

#include <gtest/gtest.h>

#include "qwres/line_models.hpp"
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

CMatrix coin(cplx a, cplx b, cplx c, cplx d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const CMatrix kSym = coin(0.6, 0.8, -0.8, 0.6);

BarrierSpec symmetric_double() { return {{0, 1}, {kSym, kSym}}; }
BarrierSpec tuned_triple(double r0 = 0.4) {
  return {{0, 2, 3}, {rotation_coin(0.5), rotation_coin(r0), rotation_coin(0.75)}};
}

// Random unitary with |C11| >= sin(0.1).
CMatrix random_coin(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  std::uniform_real_distribution<double> t(0.1, kPi / 2 - 0.1);
  const double th = t(rng);
  const cplx a = std::cos(th) * unit(u(rng)), b = std::sin(th) * unit(u(rng)), ph = unit(u(rng));
  return coin(a, b, -ph * std::conj(b), ph * std::conj(a));
}

double graph_T(const ModelFamily& f, double eps, cplx z) {
  const CMatrix s = scattering_matrix(f.at(eps), z).sigma;
  return std::norm(s(0, 1));
}

}  // namespace

TEST(LineModels, TransferMatrix) {
  const cplx z = unit(0.7);
  const CMatrix t = transfer_matrix(CMatrix::Identity(2, 2), z);
  EXPECT_LT(max_abs(t - coin(z, 0, 0, 1.0 / z)), 1e-15);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const CMatrix c = random_coin(rng);
    EXPECT_NEAR(std::abs(transfer_matrix(c, z).determinant() - c(1, 1) / c(0, 0)), 0, 1e-12);
  }
  EXPECT_EQ(code_of([] { transfer_matrix(coin(0, 1, -1, 0), 1.0); }), ErrorCode::ZeroCorner);
}

TEST(LineModels, RotationCoin) {
  const CMatrix c = rotation_coin(0.6);
  EXPECT_LT(max_abs(c - coin(0.8, 0.6, -0.6, 0.8)), 1e-15);
  EXPECT_EQ(code_of([] { rotation_coin(1.0); }), ErrorCode::BadBarrierSpec);
}

TEST(LineModels, SpecValidation) {
  EXPECT_EQ(code_of([] { BarrierSpec{{1, 2}, {kSym, kSym}}.validate(); }), ErrorCode::BadBarrierSpec);
  EXPECT_EQ(code_of([] { BarrierSpec{{0, 0}, {kSym, kSym}}.validate(); }), ErrorCode::BadBarrierSpec);
  EXPECT_EQ(code_of([] { BarrierSpec{{0, 1}, {kSym}}.validate(); }), ErrorCode::BadBarrierSpec);
  EXPECT_EQ(code_of([] { BarrierSpec{{0, 1}, {kSym, coin(1, 1, 0, 1)}}.validate(); }), ErrorCode::NotUnitary);
  EXPECT_EQ(code_of([] { double_barrier({{0, 1}, {kSym, coin(0, 1, -1, 0)}}, 1.0); }), ErrorCode::ZeroCorner);
  EXPECT_EQ(code_of([] { double_barrier(tuned_triple(), 1.0); }), ErrorCode::BadBarrierSpec);
}

TEST(LineModels, SymmetricDoubleBarrier) {
  const BarrierSpec s = symmetric_double();
  for (cplx z : {cplx(0, 1), cplx(0, -1)}) {
    const LineScattering r = double_barrier(s, z);
    EXPECT_NEAR(r.T, 1.0, 1e-12);
    EXPECT_NEAR(r.R, 0.0, 1e-12);
  }
  const LineScattering r = double_barrier(s, 1.0);
  ASSERT_EQ(r.resonances.size(), 2u);
  EXPECT_NEAR(std::abs(r.resonances[0] - cplx(0, -0.8)), 0, 1e-12);
  EXPECT_NEAR(std::abs(r.resonances[1] - cplx(0, 0.8)), 0, 1e-12);
  for (cplx e : tunneling_energies(s)) EXPECT_NEAR(std::abs(std::abs(e.imag()) - 1.0), 0, 1e-12);
  EXPECT_NEAR(double_barrier_symmetry(s), 1.0, 1e-12);
  for (cplx lam : r.resonances) EXPECT_NEAR(double_barrier_symmetry_at(s, lam), 1.0, 1e-10);
}

// Reference from tools/oracles/reference_values.py.
TEST(LineModels, DoubleBarrierFrozenOracle) {
  const cplx z = unit(0.4);
  EXPECT_NEAR(double_barrier(symmetric_double(), z).T, 0.056313925398550679, 1e-13);
  EXPECT_NEAR(line_scattering(symmetric_double(), z).T, 0.056313925398550679, 1e-13);
  EXPECT_NEAR(graph_T(line_to_graph(symmetric_double()), 0.0, z), 0.056313925398550679, 1e-12);
}

TEST(LineModels, TripleTunedToI) {
  const LineScattering r = triple_barrier(tuned_triple(), cplx(0, 1));
  EXPECT_NEAR(r.T, 1.0, 1e-12);
  EXPECT_NEAR(r.R, 0.0, 1e-12);
  EXPECT_GT(triple_barrier(tuned_triple(0.41), cplx(0, 1)).R, 1e-6);
  EXPECT_EQ(r.resonances.size(), 6u);
  for (cplx lam : r.resonances) EXPECT_LT(std::abs(lam), 1.0);
}

TEST(LineModels, TripleFrozenOracle) {
  const cplx z = unit(0.9);
  EXPECT_NEAR(triple_barrier(tuned_triple(), z).T, 0.27883020214596893, 1e-13);
  EXPECT_NEAR(line_scattering(tuned_triple(), z).T, 0.27883020214596893, 1e-13);
  EXPECT_NEAR(graph_T(line_to_graph(tuned_triple()), 0.0, z), 0.27883020214596893, 1e-12);
}

TEST(LineModels, ClosedFormsAreUnitary) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> r(-0.95, 0.95), th(0, 2 * kPi);
  for (int k = 0; k < 50; ++k) {
    const BarrierSpec db{{0, 1 + k % 3}, {random_coin(rng), random_coin(rng)}};
    const BarrierSpec tb{{0, 1 + k % 2, 3 + k % 3}, {rotation_coin(r(rng)), rotation_coin(r(rng)), rotation_coin(r(rng))}};
    const cplx z = unit(th(rng));
    const LineScattering a = double_barrier(db, z);
    const LineScattering b = triple_barrier(tb, z);
    EXPECT_NEAR(a.T + a.R, 1.0, 1e-10);
    EXPECT_NEAR(b.T + b.R, 1.0, 1e-10);
    EXPECT_NEAR(a.T, line_scattering(db, z).T, 1e-10);
    EXPECT_NEAR(b.T, line_scattering(tb, z).T, 1e-10);
  }
}

TEST(LineModels, ArgIdentity) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const CMatrix c = random_coin(rng), d = random_coin(rng);
    const cplx lhs = -c(1, 0) * d.determinant() / d(1, 0);
    const cplx rhs = c(1, 0) * d(0, 1);
    EXPECT_NEAR(std::abs(lhs / std::abs(lhs) - rhs / std::abs(rhs)), 0, 1e-10);
  }
}

TEST(LineModels, TunnelingEnergiesAlignWithResonances) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const BarrierSpec s{{0, 2}, {random_coin(rng), random_coin(rng)}};
    const auto e = tunneling_energies(s);
    const auto r = double_barrier(s, 1.0).resonances;
    ASSERT_EQ(e.size(), r.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      // Only the phases agree unless |C(0)_21| = |C(x0)_21|.
      EXPECT_NEAR(std::abs(e[i] / std::abs(e[i]) - r[i] / std::abs(r[i])), 0, 1e-10);
    }
  }
}

TEST(LineModels, BrokenSymmetryIsOpaque) {
  const std::vector<long> pos{0, 1};
  const auto coins = broken_symmetry_coins(1.0, 2.0);
  const BarrierSpec s = eval_barrier(pos, coins, 0.1);
  double tmax = 0.0;
  for (int k = 0; k < 4096; ++k) tmax = std::max(tmax, double_barrier(s, unit(2 * kPi * k / 4096)).T);
  EXPECT_LE(tmax, 1e-6);
}

TEST(LineModels, BrokenSymmetryFrozenOracle) {
  const BarrierSpec s = eval_barrier({0, 3}, broken_symmetry_coins(1.0, 2.0), 0.1);
  EXPECT_NEAR(double_barrier(s, unit(0.3)).T / 5.6654596962469631e-27, 1.0, 1e-8);
}

TEST(LineModels, GraphEmbedding) {
  const ModelFamily f = line_to_graph(symmetric_double());
  EXPECT_EQ(f.graph.num_tails(), 2u);
  EXPECT_EQ(f.graph.num_vertices(), 2u);
  EXPECT_EQ(f.graph.num_interior_arcs(), 2u);
  for (int k = 0; k < 32; ++k) {
    const cplx z = unit(0.05 + 2 * kPi * k / 32);
    EXPECT_NEAR(graph_T(f, 0.0, z), double_barrier(symmetric_double(), z).T, 1e-10);
  }
  EXPECT_NEAR(graph_T(f, 0.0, cplx(0, 1)), 1.0, 1e-10);
}

TEST(LineModels, IdentityBarriersAreTransparent) {
  const BarrierSpec s{{0, 2}, {CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)}};
  const ModelFamily f = line_to_graph(s);
  for (double th : {0.2, 1.4, 2.9}) {
    EXPECT_NEAR(graph_T(f, 0.0, unit(th)), 1.0, 1e-10);
    EXPECT_NEAR(double_barrier(s, unit(th)).T, 1.0, 1e-12);
  }
}
