#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lyap/chain.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"
#include "lyap/rng.hpp"
#include "test_support.hpp"

using namespace lyap;
using namespace lyap::testing;

namespace {

double log_spectral_norm(const std::vector<std::vector<long double>>& p) {
  Eigen::MatrixXd e(p.size(), p.size());
  for (std::size_t r = 0; r < p.size(); ++r)
    for (std::size_t c = 0; c < p.size(); ++c) e(r, c) = static_cast<double>(p[r][c]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
  return std::log(svd.singularValues()(0));
}

// Brute-force a_n: explicit symbol sequences, long double products of compounds.
double naive_a_n(const CocycleModel& m, std::size_t n, std::size_t k) {
  const auto nu = resolve_stationary_law(m);
  const std::size_t big = binomial(m.dim, k);
  double total = 0.0;
  for (std::size_t z = 0; z < m.phase_space_size(); ++z) {
    if (nu.weights()[z] == 0.0) continue;
    std::size_t combos = 1;
    for (std::size_t i = 1; i < n; ++i) combos *= m.symbols;
    for (std::size_t code = 0; code < combos; ++code) {
      ChainState cur{z / m.states, z % m.states};
      std::vector<Matrix> factors{compound_matrix(m.matrix(cur.t, cur.x), k)};
      double w = nu.weights()[z];
      std::size_t rest = code;
      for (std::size_t i = 1; i < n; ++i) {
        const std::size_t s = rest % m.symbols;
        rest /= m.symbols;
        const std::size_t x = m.map(cur.t, cur.x);
        w *= m.kernel_row(cur.t, x)[s];
        cur = {s, x};
        factors.push_back(compound_matrix(m.matrix(cur.t, cur.x), k));
      }
      if (w == 0.0) continue;
      total += w * log_spectral_norm(long_product(factors, big));
    }
  }
  return total;
}

CocycleModel alternating_model(Gen& g) {
  return CocycleModel::matrix_products({random_matrix(2, g), random_matrix(2, g)},
                                       FiniteKernel(Matrix{{0, 1}, {1, 0}}));
}

CocycleModel random_bernoulli(std::size_t symbols, std::size_t d, Gen& g) {
  std::vector<Matrix> ms;
  for (std::size_t i = 0; i < symbols; ++i) ms.push_back(random_matrix(d, g));
  return CocycleModel::matrix_products(std::move(ms), bernoulli_kernel(random_probability(symbols, g)));
}

EdgeModel random_edge(std::size_t symbols, std::size_t states, std::size_t d, Gen& g) {
  EdgeModel e;
  e.dim = d;
  e.symbols = symbols;
  e.states = states;
  e.kernel = FiniteKernel(random_stochastic(symbols, g));
  for (std::size_t i = 0; i < symbols * symbols * states; ++i) {
    e.matrices.push_back(random_matrix(d, g));
    e.next_state.push_back(std::uniform_int_distribution<std::size_t>(0, states - 1)(g));
  }
  for (std::size_t x = 0; x < states; ++x) e.next_state[e.index(0, 0, x)] = (x + 1) % states;
  return e;
}

}  // namespace

TEST(IterateNorms, ScalarPathSum) {
  const auto m = scalar_model({2.0, 0.5}, bernoulli_kernel(std::vector<double>{0.5, 0.5}));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a = make_stream(seed, 0);
    Rng b = make_stream(seed, 0);
    const std::size_t n = 1 + seed * 13;
    const auto path = sample_path(m, {0, 0}, n, a);
    double expected = 0.0;
    for (const auto& z : path) expected += std::log(z.t == 0 ? 2.0 : 0.5);
    EXPECT_NEAR(iterate_norms(m, {0, 0}, n, 1, b).value(), expected, 1e-12);
  }
}

TEST(IterateNorms, TopPowerIsLogDetSum) {
  Gen g(41);
  const auto m = random_place_dependent(3, 2, 3, g);
  Rng a = make_stream(5, 0);
  Rng b = make_stream(5, 0);
  const auto path = sample_path(m, {1, 0}, 400, a);
  double expected = 0.0;
  for (const auto& z : path) expected += std::log(std::abs(determinant(m.matrix(z.t, z.x))));
  EXPECT_NEAR(iterate_norms(m, {1, 0}, 400, 3, b).value(), expected, 1e-8);
}

TEST(IterateNorms, MatchesExtendedPrecisionProduct) {
  Gen g(42);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_place_dependent(2, 2, 3, g);
    const std::size_t n = 1 + trial % 10;
    const std::size_t k = 1 + trial % 3;
    Rng a = make_stream(trial, 1);
    Rng b = make_stream(trial, 1);
    const auto path = sample_path(m, {0, 1}, n, a);
    std::vector<Matrix> factors;
    for (const auto& z : path) factors.push_back(compound_matrix(m.matrix(z.t, z.x), k));
    const double oracle = log_spectral_norm(long_product(factors, binomial(3, k)));
    EXPECT_NEAR(iterate_norms(m, {0, 1}, n, k, b).value(), oracle, 1e-8);
  }
}

TEST(IterateNorms, LongProductsStayFinite) {
  // 1e5 steps of growth log 1000 per step would overflow without rescaling
  const auto m = scalar_model({1000.0}, FiniteKernel(Matrix{{1.0}}));
  Rng rng = make_stream(0, 0);
  EXPECT_NEAR(iterate_norms(m, {0, 0}, 100000, 1, rng).value(), 100000 * std::log(1000.0), 1e-6);
  const auto tiny = scalar_model({1e-3}, FiniteKernel(Matrix{{1.0}}));
  EXPECT_NEAR(iterate_norms(tiny, {0, 0}, 100000, 1, rng).value(), -100000 * std::log(1000.0),
              1e-6);
}

TEST(IterateNorms, ZeroMatrixIsMinusInfinity) {
  const auto m = CocycleModel::matrix_products({Matrix(2, 2), Matrix::identity(2)},
                                               FiniteKernel(Matrix{{0, 1}, {1, 0}}));
  Rng rng = make_stream(0, 0);
  EXPECT_TRUE(iterate_norms(m, {1, 0}, 3, 1, rng).is_minus_infinity());
  EXPECT_TRUE(iterate_norms(m, {1, 0}, 1, 1, rng).is_finite());
  const auto rank1 = CocycleModel::matrix_products({Matrix{{1, 1}, {1, 1}}}, FiniteKernel(Matrix{{1.0}}));
  EXPECT_TRUE(iterate_norms(rank1, {0, 0}, 5, 2, rng).is_minus_infinity());
  EXPECT_NEAR(iterate_norms(rank1, {0, 0}, 5, 1, rng).value(), 5 * std::log(2.0), 1e-12);
}

TEST(IterateNorms, RejectsBadK) {
  const auto m = scalar_model({2.0}, FiniteKernel(Matrix{{1.0}}));
  Rng rng = make_stream(0, 0);
  EXPECT_THROW(iterate_norms(m, {0, 0}, 3, 2, rng), ParameterError);
  EXPECT_THROW(iterate_norms(m, {0, 0}, 3, 0, rng), ParameterError);
}

TEST(IterateDirection, DiagonalFirstEntries) {
  const auto m = CocycleModel::matrix_products(
      {Matrix::diagonal({2.0, 5.0}), Matrix::diagonal({0.25, 1.0})},
      bernoulli_kernel(std::vector<double>{0.5, 0.5}));
  Rng a = make_stream(3, 0);
  Rng b = make_stream(3, 0);
  const auto path = sample_path(m, {0, 0}, 50, a);
  double expected = 0.0;
  for (const auto& z : path) expected += std::log(z.t == 0 ? 2.0 : 0.25);
  EXPECT_NEAR(iterate_direction(m, {0, 0}, frame_direction(2, 0), 50, 1, b).value(), expected,
              1e-12);
}

TEST(IterateDirection, ZeroHorizonIsZero) {
  Gen g(43);
  const auto m = random_place_dependent(2, 2, 2, g);
  Rng rng = make_stream(0, 0);
  EXPECT_EQ(iterate_direction(m, {0, 0}, frame_direction(2, 1), 0, 1, rng), ExtendedReal(0.0));
}

TEST(IterateDirection, KernelDirectionDies) {
  const auto m = CocycleModel::matrix_products({Matrix{{0, 1}, {0, 0}}}, FiniteKernel(Matrix{{1.0}}));
  Rng rng = make_stream(0, 0);
  EXPECT_TRUE(iterate_direction(m, {0, 0}, frame_direction(2, 0), 1, 1, rng).is_minus_infinity());
  EXPECT_THROW(iterate_direction(m, {0, 0}, ProjState::cemetery(), 1, 1, rng), ParameterError);
}

// Along a shared path the gain of any direction is at most the norm.
TEST(IterateDirection, DominatedByNorm) {
  Gen g(44);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 3;
    const std::size_t k = 1 + trial % d;
    const auto m = random_place_dependent(2, 3, d, g);
    std::vector<double> v(binomial(d, k));
    for (auto& x : v) x = gauss(g);
    const std::size_t n = 1 + trial;
    Rng a = make_stream(trial, 0);
    Rng b = make_stream(trial, 0);
    const auto dir = iterate_direction(m, {1, 2}, normalize(v), n, k, a);
    const auto norm = iterate_norms(m, {1, 2}, n, k, b);
    EXPECT_LE(dir.value(), norm.value() + 1e-9);
  }
}

TEST(ExactFiniteHorizon, HorizonOneDirectFormula) {
  Gen g(45);
  const auto m = random_place_dependent(3, 2, 3, g);
  const auto nu = resolve_stationary_law(m);
  for (std::size_t k = 1; k <= 3; ++k) {
    double expected = 0.0;
    for (std::size_t z = 0; z < m.phase_space_size(); ++z)
      expected += nu.weights()[z] * log_top_k_norm(m.matrices[z], k).value();
    EXPECT_NEAR(exact_finite_horizon(m, 1, k).a_n.value.value(), expected, 1e-12);
  }
}

TEST(ExactFiniteHorizon, BalancedScalarsGiveZero) {
  const auto m = scalar_model({2.0, 0.5}, bernoulli_kernel(std::vector<double>{0.5, 0.5}));
  for (std::size_t n = 1; n <= 12; ++n) EXPECT_NEAR(exact_finite_horizon(m, n, 1).a_n.value.value(), 0.0, 1e-12);
}

TEST(ExactFiniteHorizon, MatchesBruteForceEnumeration) {
  Gen g(46);
  for (int trial = 0; trial < 6; ++trial) {
    const auto m = random_place_dependent(2, 2, 2 + trial % 2, g);
    for (std::size_t n = 1; n <= 7; ++n) {
      const std::size_t k = 1 + n % m.dim;
      EXPECT_NEAR(exact_finite_horizon(m, n, k).a_n.value.value(), naive_a_n(m, n, k), 1e-9);
    }
  }
}

// Fekete check: a_{n+m} <= a_n + a_m on exhaustive sequences.
TEST(ExactFiniteHorizon, Subadditive) {
  Gen g(47);
  std::vector<CocycleModel> models;
  for (int i = 0; i < 3; ++i) models.push_back(alternating_model(g));
  for (int i = 0; i < 3; ++i) models.push_back(random_place_dependent(2, 2, 2, g));
  models.push_back(random_bernoulli(3, 3, g));
  for (const auto& m : models) {
    for (std::size_t k = 1; k <= m.dim; ++k) {
      std::vector<double> a(13, 0.0);
      const std::size_t top = m.symbols == 3 ? 9 : 12;
      for (std::size_t n = 1; n <= top; ++n) a[n] = exact_finite_horizon(m, n, k).a_n.value.value();
      for (std::size_t p = 1; p <= top; ++p)
        for (std::size_t q = 1; p + q <= top; ++q) EXPECT_LE(a[p + q], a[p] + a[q] + 1e-9);
    }
  }
}

TEST(ExactFiniteHorizon, ScalingShiftsByNKLogC) {
  Gen g(48);
  const auto m = random_place_dependent(2, 2, 3, g);
  for (double c : {0.1, 3.0, 17.0}) {
    const auto scaled = m.scaled(c);
    for (std::size_t n = 1; n <= 8; ++n) {
      for (std::size_t k = 1; k <= 3; ++k) {
        const double base = exact_finite_horizon(m, n, k).a_n.value.value();
        EXPECT_NEAR(exact_finite_horizon(scaled, n, k).a_n.value.value(),
                    base + static_cast<double>(n * k) * std::log(c), 1e-9);
      }
    }
  }
}

TEST(ExactFiniteHorizon, L1NormChangesRateByAtMostLogD) {
  Gen g(49);
  const auto m = random_place_dependent(2, 2, 4, g);
  ExactOptions l1;
  l1.norm = OperatorNorm::l1;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t k = 1; k <= 4; ++k) {
      const double two = exact_finite_horizon(m, n, k).a_n.value.value();
      const double one = exact_finite_horizon(m, n, k, l1).a_n.value.value();
      const double big = static_cast<double>(binomial(4, k));
      EXPECT_LE(std::abs(two - one) / n, std::log(big) / n + 1e-12);
    }
  }
}

TEST(ExactFiniteHorizon, DirectionSupDominatedByNorm) {
  Gen g(50);
  const auto m = random_place_dependent(3, 2, 3, g);
  ExactOptions opts;
  opts.extra_directions = {{1.0, 1.0, 1.0}, {1.0, -2.0, 0.5}};
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto r = exact_finite_horizon(m, n, 1, opts);
    for (std::size_t z = 0; z < r.per_state.size(); ++z) {
      EXPECT_LE(r.per_state[z].value, r.per_state_norm[z].value + 1e-12);
      EXPECT_LE(r.per_state_frame[z].value, r.per_state[z].value);
      EXPECT_EQ(r.per_state[z].kind, HorizonKind::conditional_sup_direction);
    }
  }
  const auto sup = exact_conditional_sup(m, 4, 1, opts);
  const auto full = exact_finite_horizon(m, 4, 1, opts);
  for (std::size_t z = 0; z < sup.size(); ++z) EXPECT_EQ(sup[z].value, full.per_state[z].value);
}

TEST(ExactFiniteHorizon, TopPowerDirectionEqualsNorm) {
  Gen g(51);
  const auto m = random_place_dependent(2, 2, 3, g);
  const auto r = exact_finite_horizon(m, 5, 3);
  for (std::size_t z = 0; z < r.per_state.size(); ++z)
    EXPECT_NEAR(r.per_state[z].value.value(), r.per_state_norm[z].value.value(), 1e-10);
}

TEST(ExactFiniteHorizon, SingularMemberGivesMinusInfinity) {
  const auto m = CocycleModel::matrix_products({Matrix{{1, 1}, {1, 1}}, Matrix::identity(2)},
                                               bernoulli_kernel(std::vector<double>{0.3, 0.7}));
  EXPECT_TRUE(exact_finite_horizon(m, 3, 2).a_n.value.is_minus_infinity());
  EXPECT_TRUE(exact_finite_horizon(m, 3, 1).a_n.value.is_finite());
}

TEST(ExactFiniteHorizon, BudgetRefusal) {
  Gen g(52);
  const auto m = random_bernoulli(4, 2, g);
  ExactOptions opts;
  opts.budget = 1000;
  try {
    exact_finite_horizon(m, 10, 1, opts);
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_EQ(e.required(), std::pow(4.0, 9.0));
    EXPECT_EQ(e.limit(), 1000.0);
  }
  EXPECT_NO_THROW(exact_finite_horizon(m, 5, 1, opts));
}

TEST(ExactFiniteHorizon, EdgeAgreesWithLiftedVertex) {
  Gen g(53);
  for (int trial = 0; trial < 4; ++trial) {
    const auto e = random_edge(2, 2, 2, g);
    const auto v = edge_to_vertex(e);
    for (std::size_t n = 1; n <= 8; ++n) {
      for (std::size_t k = 1; k <= 2; ++k) {
        const double a = exact_finite_horizon(e, n, k).a_n.value.value();
        const double b = exact_finite_horizon(v, n, k).a_n.value.value();
        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
      }
    }
  }
}

TEST(ExactFiniteHorizon, EdgeWithSymbolIndependentDataMatchesVertex) {
  Gen g(54);
  const Matrix a = random_matrix(2, g);
  const Matrix b = random_matrix(2, g);
  const Matrix q = random_stochastic(2, g);
  EdgeModel e;
  e.dim = 2;
  e.symbols = 2;
  e.states = 1;
  e.kernel = FiniteKernel(q);
  // F(t, s, x) depends on t only
  e.matrices = {a, a, b, b};
  e.next_state = {0, 0, 0, 0};
  const auto v = CocycleModel::matrix_products({a, b}, FiniteKernel(q));
  for (std::size_t n = 1; n <= 8; ++n)
    EXPECT_NEAR(exact_finite_horizon(e, n, 1).a_n.value.value(),
                exact_finite_horizon(v, n, 1).a_n.value.value(), 1e-12);
}
