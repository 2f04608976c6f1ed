#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lyap/chain.hpp"
#include "lyap/errors.hpp"
#include "lyap/estimators.hpp"
#include "lyap/simplex.hpp"
#include "lyap/ulam.hpp"
#include "test_support.hpp"

using namespace lyap;
using namespace lyap::testing;

namespace {

const double kLog2 = std::log(2.0);

CocycleModel single(const Matrix& a) {
  return CocycleModel::matrix_products({a}, FiniteKernel(Matrix{{1.0}}));
}

CocycleModel random_bernoulli2(Gen& g) {
  return CocycleModel::matrix_products({random_matrix(2, g), random_matrix(2, g)},
                                       bernoulli_kernel(random_probability(2, g)));
}

struct Lifts {
  LiftSolution max;
  LiftSolution min;
};

Lifts solve_both(const CocycleModel& model, std::size_t m) {
  const auto grid = make_grid(model, m);
  const auto h = build_transfer(model, grid, 1);
  const auto c = potential_vector(model, grid, 1);
  const auto nu = resolve_stationary_law(model);
  return {optimize_invariant_lift(h, nu, c, Sense::max), optimize_invariant_lift(h, nu, c, Sense::min)};
}

// The invariant-lift LP over every (z, cell) variable, solved directly.
double full_lp_value(const TransferMatrix& h, const StationaryLaw& nu,
                     const std::vector<ExtendedReal>& c, Sense sense) {
  const std::size_t n = h.size();
  const std::size_t cells = h.grid.cells();
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < n; ++i)
    if (c[i].is_finite()) cols.push_back(i);
  Matrix a(n + h.phase_states, cols.size());
  std::vector<double> b(n + h.phase_states, 0.0), obj;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const std::size_t i = cols[k];
    for (std::size_t j = 0; j < n; ++j) a(j, k) = h.entries(i, j) - (i == j ? 1.0 : 0.0);
    a(n + i / cells, k) = 1.0;
    obj.push_back(sense == Sense::max ? c[i].value() : -c[i].value());
  }
  for (std::size_t z = 0; z < h.phase_states; ++z) b[n + z] = nu.weights()[z];
  const auto r = solve_lp(a, b, obj);
  EXPECT_EQ(r.status, LpStatus::optimal) << "infeasibility " << r.infeasibility;
  return sense == Sense::max ? r.objective : -r.objective;
}

// Rounding in the row sums would otherwise compound through the squarings.
void renormalize_rows(Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) sum += a(i, j);
    for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) /= sum;
  }
}

// Cesaro average of mu0 H^i over 2^levels steps, by doubling.
std::vector<double> cesaro_average(const Matrix& h, const std::vector<double>& mu0, int levels) {
  const std::size_t n = h.rows();
  Matrix avg = Matrix::identity(n);
  Matrix power = h;
  for (int l = 0; l < levels; ++l) {
    avg = (avg + avg * power).scaled(0.5);
    power = power * power;
    renormalize_rows(avg);
    renormalize_rows(power);
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += mu0[i] * avg(i, j);
  return out;
}

}  // namespace

TEST(UlamGrid, CellsAndSamples) {
  const auto g = make_grid(4, false);
  EXPECT_EQ(g.cells(), 4u);
  EXPECT_DOUBLE_EQ(g.width(), std::numbers::pi / 4);
  EXPECT_EQ(g.cell_of(0.0), 0u);
  EXPECT_EQ(g.cell_of(std::numbers::pi / 4), 1u);
  EXPECT_EQ(g.cell_of(std::numbers::pi - 1e-9), 0u);
  const auto s = g.samples(0, 2);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0], std::numbers::pi - std::numbers::pi / 16, 1e-15);
  EXPECT_NEAR(s[1], std::numbers::pi / 16, 1e-15);
  for (std::size_t j = 0; j < 4; ++j)
    for (double theta : g.samples(j, 5)) EXPECT_EQ(g.cell_of(theta), j);
  EXPECT_EQ(make_grid(4, true).cells(), 5u);
  EXPECT_THROW(make_grid(1, false), ParameterError);
}

TEST(UlamGrid, CemeteryOnlyForSingularModels) {
  EXPECT_FALSE(make_grid(single(Matrix::identity(2)), 10).cemetery_cell);
  EXPECT_TRUE(make_grid(single(Matrix{{1, 2}, {2, 4}}), 10).cemetery_cell);
}

TEST(BuildTransfer, IdentityMatrix) {
  const auto m = single(Matrix::identity(2));
  const auto h = build_transfer(m, make_grid(16, false), 1);
  EXPECT_EQ(h.entries, Matrix::identity(16));
}

TEST(BuildTransfer, RotationByOneCellIsACyclicShift) {
  const std::size_t cells = 24;
  const auto m = single(Matrix::rotation(std::numbers::pi / cells));
  const auto h = build_transfer(m, make_grid(cells, false), 1);
  for (std::size_t j = 0; j < cells; ++j)
    for (std::size_t k = 0; k < cells; ++k)
      EXPECT_EQ(h.entries(j, k), k == (j + 1) % cells ? 1.0 : 0.0) << j << "," << k;
}

TEST(BuildTransfer, RowsAreStochastic) {
  Gen g(81);
  for (int trial = 0; trial < 5; ++trial) {
    auto m = random_place_dependent(2, 2, 2, g);
    if (trial == 0) m.matrices[0] = Matrix{{1, 1}, {2, 2}};
    const auto grid = make_grid(m, 50);
    const auto h = build_transfer(m, grid, 1 + trial);
    for (std::size_t i = 0; i < h.size(); ++i) {
      double s = 0.0;
      for (double v : h.entries.row(i)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-10);
    }
  }
}

TEST(BuildTransfer, UnsupportedDimension) {
  const auto m = single(Matrix::identity(3));
  EXPECT_THROW(build_transfer(m, make_grid(8, false), 1), UnsupportedDimensionError);
  EXPECT_THROW(potential_vector(m, make_grid(8, false), 1), UnsupportedDimensionError);
}

TEST(PotentialVector, ConformalIsConstant) {
  const auto m = single(Matrix::rotation(0.4).scaled(2.0));
  for (const auto& v : potential_vector(m, make_grid(30, false), 3)) EXPECT_NEAR(v.value(), kLog2, 1e-14);
}

TEST(PotentialVector, DiagonalAxes) {
  const auto m = single(Matrix::diagonal({2.0, 1.0}));
  const auto c = potential_vector(m, make_grid(100, false), 1);
  EXPECT_NEAR(c[0].value(), kLog2, 1e-15);
  EXPECT_NEAR(c[50].value(), 0.0, 1e-15);
}

TEST(PotentialVector, CemeteryCellIsMinusInfinity) {
  const auto m = single(Matrix{{1, 1}, {1, 1}});
  const auto grid = make_grid(m, 20);
  const auto c = potential_vector(m, grid, 1);
  ASSERT_EQ(c.size(), 21u);
  EXPECT_TRUE(c[20].is_minus_infinity());
}

TEST(PotentialVector, MatchesFineQuadrature) {
  Gen g(82);
  const auto m = random_place_dependent(2, 1, 2, g);
  const auto grid = make_grid(200, false);
  const auto coarse = potential_vector(m, grid, 1);
  const auto fine = potential_vector(m, grid, 10);
  // midpoint rule: |error| <= w^2 / 24 * max|f''| on the cell, for 1 and for 10 samples
  const double w = grid.width();
  for (std::size_t z = 0; z < m.phase_space_size(); ++z) {
    const Matrix& f = m.matrix(z / m.states, z % m.states);
    auto logn = [&](double th) {
      const double v[2] = {std::cos(th), std::sin(th)};
      return std::log(euclidean_norm(f.apply(v)));
    };
    for (std::size_t cell = 0; cell < grid.m; ++cell) {
      const double a = grid.center(cell) - w / 2;
      const double hh = w / 200;
      double curv = 0.0;
      for (int i = 0; i <= 200; ++i) {
        const double th = a + i * hh;
        curv = std::max(curv, std::abs(logn(th + hh) - 2 * logn(th) + logn(th - hh)) / (hh * hh));
      }
      const double bound = 1.1 * w * w / 24 * curv * (1.0 + 1.0 / 100) + 1e-12;
      const std::size_t i = z * grid.cells() + cell;
      EXPECT_LE(std::abs(coarse[i].value() - fine[i].value()), bound) << "z " << z << " cell " << cell;
    }
  }

  // independent oracle: Simpson's rule on a few cells
  for (std::size_t cell : {3u, 77u, 150u}) {
    const Matrix& f = m.matrix(1, 0);
    const double a = grid.center(cell) - grid.width() / 2;
    const std::size_t steps = 1000;
    const double hstep = grid.width() / steps;
    double acc = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) {
      const double th = a + i * hstep;
      const double v[2] = {std::cos(th), std::sin(th)};
      const double val = std::log(euclidean_norm(f.apply(v)));
      acc += val * (i == 0 || i == steps ? 1 : (i % 2 ? 4 : 2));
    }
    const double oracle = acc * hstep / 3 / grid.width();
    EXPECT_NEAR(fine[1 * grid.cells() + cell].value(), oracle, 1e-4);
  }
}

TEST(OptimizeLift, DiagonalEndpoints) {
  const auto r = solve_both(single(Matrix::diagonal({2.0, 1.0})), 400);
  EXPECT_NEAR(r.max.value.value(), kLog2, 0.02);
  EXPECT_NEAR(r.min.value.value(), 0.0, 0.02);
  for (const auto* s : {&r.max, &r.min}) {
    EXPECT_LE(s->invariance_residual, 1e-8);
    EXPECT_LE(s->marginal_residual, 1e-8);
    EXPECT_EQ(s->m, 400u);
    EXPECT_EQ(s->samples_per_cell, 1u);
  }
}

TEST(OptimizeLift, ConformalMaxEqualsMin) {
  const auto r = solve_both(single(Matrix::rotation(std::sqrt(2.0)).scaled(2.0)), 200);
  EXPECT_NEAR(r.max.value.value(), kLog2, 1e-3);
  EXPECT_NEAR(r.min.value.value(), kLog2, 1e-3);
}

TEST(OptimizeLift, MeasureIsAnInvariantLiftOfNu) {
  Gen g(83);
  const auto m = random_place_dependent(2, 2, 2, g);
  const auto r = solve_both(m, 60);
  for (const auto* s : {&r.max, &r.min}) {
    double total = 0.0;
    for (double v : s->measure) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
    EXPECT_LE(s->invariance_residual, 1e-8);
    EXPECT_LE(s->marginal_residual, 1e-8);
    EXPECT_GE(s->active_classes, 1u);
    EXPECT_LE(s->active_classes, s->classes);
  }
  EXPECT_LE(r.min.value, r.max.value);
}

// The class-weight formulation must agree with the LP over all (z, cell) variables.
TEST(OptimizeLift, AgreesWithFullLinearProgram) {
  Gen g(84);
  for (int trial = 0; trial < 8; ++trial) {
    auto m = trial < 4 ? random_bernoulli2(g) : random_place_dependent(2, 2, 2, g);
    if (trial == 3) m.matrices[1] = Matrix{{1, 2}, {0.5, 1}};
    const std::size_t cells = 6 + trial;
    const auto grid = make_grid(m, cells);
    const auto h = build_transfer(m, grid, 1);
    const auto c = potential_vector(m, grid, 1);
    const auto nu = resolve_stationary_law(m);
    for (Sense sense : {Sense::max, Sense::min}) {
      const auto lift = optimize_invariant_lift(h, nu, c, sense);
      if (!lift.value.is_finite()) continue;
      EXPECT_NEAR(lift.value.value(), full_lp_value(h, nu, c, sense), 1e-8) << "trial " << trial;
    }
  }
}

TEST(OptimizeLift, CesaroAverageIsFeasible) {
  Gen g(85);
  const auto m = random_place_dependent(2, 2, 2, g);
  const auto grid = make_grid(m, 12);
  const auto h = build_transfer(m, grid, 1);
  const auto c = potential_vector(m, grid, 1);
  const auto nu = resolve_stationary_law(m);
  // any lift of nu: spread each z over its cells
  std::vector<double> mu0(h.size(), 0.0);
  for (std::size_t z = 0; z < h.phase_states; ++z)
    for (std::size_t cell = 0; cell < grid.cells(); ++cell)
      mu0[h.index(z, cell)] = nu.weights()[z] / grid.cells();
  const auto mu = cesaro_average(h.entries, mu0, 34);
  double inv = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    double pushed = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) pushed += mu[i] * h.entries(i, j);
    inv += std::abs(pushed - mu[j]);
  }
  EXPECT_LE(inv, 1e-8);
  for (std::size_t z = 0; z < h.phase_states; ++z) {
    double mass = 0.0;
    for (std::size_t cell = 0; cell < grid.cells(); ++cell) mass += mu[h.index(z, cell)];
    EXPECT_NEAR(mass, nu.weights()[z], 1e-8);
  }
  double value = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) value += mu[i] * c[i].value();
  const auto mx = optimize_invariant_lift(h, nu, c, Sense::max);
  const auto mn = optimize_invariant_lift(h, nu, c, Sense::min);
  EXPECT_LE(value, mx.value.value() + 1e-8);
  EXPECT_GE(value, mn.value.value() - 1e-8);
}

TEST(OptimizeLift, MaximizerAvoidsCemetery) {
  const auto m = CocycleModel::matrix_products({Matrix{{1, 0.5}, {2, 1}}, Matrix{{1.5, 0.2}, {-0.3, 0.9}}},
                                               bernoulli_kernel(std::vector<double>{0.3, 0.7}));
  const auto r = solve_both(m, 100);
  ASSERT_TRUE(r.max.value.is_finite());
  EXPECT_EQ(r.max.forbidden_mass, 0.0);
  const std::size_t cells = 101;
  for (std::size_t z = 0; z < 2; ++z) EXPECT_EQ(r.max.measure[z * cells + 100], 0.0);
}

TEST(OptimizeLift, EveryLiftDiesGivesMinusInfinity) {
  // the rank-one map sends everything into its kernel after two steps
  const auto m = single(Matrix{{0, 1}, {0, 0}});
  const auto r = solve_both(m, 10);
  EXPECT_TRUE(r.max.value.is_minus_infinity());
  EXPECT_TRUE(r.min.value.is_minus_infinity());
  EXPECT_NEAR(r.max.forbidden_mass, 1.0, 1e-12);
}

TEST(OptimizeLift, SandwichesMonteCarlo) {
  Gen g(86);
  const auto m = random_bernoulli2(g);
  const std::size_t cells = 200;
  const auto r = solve_both(m, cells);
  const auto mc = estimate_sum_top_k(m, 1, {2000, 200, 9, 1});
  const double slack = 3 * mc.std_error + 5.0 / cells;
  EXPECT_LE(r.min.value.value(), mc.mean.value() + slack);
  EXPECT_GE(r.max.value.value(), mc.mean.value() - slack);
}

TEST(OptimizeLift, ShapeErrors) {
  const auto m = single(Matrix::identity(2));
  const auto grid = make_grid(8, false);
  const auto h = build_transfer(m, grid, 1);
  const std::vector<ExtendedReal> short_c(3, ExtendedReal(0.0));
  EXPECT_THROW(optimize_invariant_lift(h, StationaryLaw(1, 1, {1.0}), short_c, Sense::max),
               ParameterError);
}

TEST(Intertwining, FiberwiseConstantStaysConstant) {
  Gen g(87);
  for (int trial = 0; trial < 3; ++trial) {
    auto m = random_place_dependent(3, 2, 2, g);
    if (trial == 2) m.matrices[2] = Matrix{{0, 0}, {1, 3}};
    const auto h = build_transfer(m, make_grid(m, 80), 2);
    const auto r = verify_intertwining(h);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.max_spread, 1e-8);
    EXPECT_EQ(r.vectors, m.phase_space_size() + 1 + 100);
  }
}
