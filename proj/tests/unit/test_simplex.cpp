#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "lyap/simplex.hpp"
#include "test_support.hpp"

using namespace lyap;
using namespace lyap::testing;

namespace {

// Best basic feasible solution by enumerating every column subset of size rank.
std::optional<double> brute_force_lp(const Matrix& a, const std::vector<double>& b,
                                     const std::vector<double>& c) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const Eigen::MatrixXd ea = to_eigen(a);
  Eigen::VectorXd eb(rows);
  for (std::size_t i = 0; i < rows; ++i) eb(i) = b[i];
  std::optional<double> best;
  for (std::uint32_t mask = 0; mask < (1u << cols); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != rows) continue;
    Eigen::MatrixXd basis(rows, rows);
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < cols; ++j)
      if (mask & (1u << j)) {
        basis.col(idx.size()) = ea.col(j);
        idx.push_back(j);
      }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (lu.rank() < static_cast<Eigen::Index>(rows)) continue;
    const Eigen::VectorXd xb = lu.solve(eb);
    if (xb.minCoeff() < -1e-9) continue;
    double obj = 0.0;
    for (std::size_t i = 0; i < rows; ++i) obj += c[idx[i]] * xb(i);
    if (!best || obj > *best) best = obj;
  }
  return best;
}

void expect_feasible(const Matrix& a, const std::vector<double>& b, const LpResult& r, double tol) {
  for (double x : r.x) EXPECT_GE(x, -tol);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * r.x[j];
    EXPECT_NEAR(s, b[i], tol);
  }
}

}  // namespace

TEST(Simplex, SmallKnownProgram) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks s1..s3)
  const Matrix a{{1, 0, 1, 0, 0}, {0, 2, 0, 1, 0}, {3, 2, 0, 0, 1}};
  const std::vector<double> b{4, 12, 18};
  const std::vector<double> c{3, 5, 0, 0, 0};
  const auto r = solve_lp(a, b, c);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 36.0, 1e-10);
  EXPECT_NEAR(r.x[0], 2.0, 1e-10);
  EXPECT_NEAR(r.x[1], 6.0, 1e-10);
  expect_feasible(a, b, r, 1e-10);
}

TEST(Simplex, EqualityRowsNeedPhaseOne) {
  // min x + y subject to x + 2y = 4, 3x + y = 7
  const Matrix a{{1, 2}, {3, 1}};
  const std::vector<double> b{4, 7};
  const auto r = solve_lp(a, b, std::vector<double>{-1, -1});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Simplex, NegativeRightHandSide) {
  const Matrix a{{-1, -1, 1}};
  const auto r = solve_lp(a, std::vector<double>{-2}, std::vector<double>{-1, -2, 0});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, -2.0, 1e-12);
}

TEST(Simplex, RedundantRows) {
  const Matrix a{{1, 1, 0}, {2, 2, 0}, {0, 1, 1}};
  const std::vector<double> b{1, 2, 1};
  const auto r = solve_lp(a, b, std::vector<double>{1, 0, 2});
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
  expect_feasible(a, b, r, 1e-12);
}

TEST(Simplex, Infeasible) {
  const Matrix a{{1, 1}, {1, -1}};
  const std::vector<double> b{1, 3};
  const auto r = solve_lp(a, b, std::vector<double>{1, 1});
  EXPECT_EQ(r.status, LpStatus::infeasible);
  EXPECT_GT(r.infeasibility, 0.5);
  ASSERT_EQ(r.row_slacks.size(), 2u);
  const auto neg = solve_lp(Matrix{{1, 1}}, std::vector<double>{-1}, std::vector<double>{0, 0});
  EXPECT_EQ(neg.status, LpStatus::infeasible);
}

TEST(Simplex, Unbounded) {
  const Matrix a{{1, -1}};
  const auto r = solve_lp(a, std::vector<double>{1}, std::vector<double>{1, 0});
  EXPECT_EQ(r.status, LpStatus::unbounded);
}

// Beale's example cycles under the textbook largest-coefficient rule.
TEST(Simplex, BealeCyclingExampleTerminates) {
  const Matrix a{{1, 0, 0, 0.25, -8, -1, 9},
                 {0, 1, 0, 0.5, -12, -0.5, 3},
                 {0, 0, 1, 0, 0, 1, 0}};
  const std::vector<double> b{0, 0, 1};
  const std::vector<double> c{0, 0, 0, 0.75, -20, 0.5, -6};
  const auto r = solve_lp(a, b, c);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 1.25, 1e-12);
  expect_feasible(a, b, r, 1e-12);
}

TEST(Simplex, DegenerateTransportation) {
  // 3x3 transportation problem with many ties
  Matrix a(6, 9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      a(i, i * 3 + j) = 1;
      a(3 + j, i * 3 + j) = 1;
    }
  const std::vector<double> b{1, 1, 1, 1, 1, 1};
  std::vector<double> c(9, 0.0);
  c[0] = c[4] = c[8] = 1.0;
  const auto r = solve_lp(a, b, c);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-12);
  expect_feasible(a, b, r, 1e-12);
}

TEST(Simplex, MatchesBasisEnumerationOnRandomPrograms) {
  Gen g(71);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + trial % 4;
    const std::size_t cols = rows + 1 + trial % 5;
    Matrix a(rows, cols);
    std::vector<double> b(rows), c(cols);
    // positive constraint matrix bounds the feasible set
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) a(i, j) = unif(g, 0.1, 2.0);
      b[i] = unif(g, 0.5, 3.0);
    }
    for (auto& v : c) v = gauss(g);
    const auto oracle = brute_force_lp(a, b, c);
    const auto r = solve_lp(a, b, c);
    if (!oracle) {
      EXPECT_EQ(r.status, LpStatus::infeasible) << "trial " << trial;
      continue;
    }
    ++checked;
    ASSERT_EQ(r.status, LpStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, *oracle, 1e-9 * (1 + std::abs(*oracle))) << "trial " << trial;
    expect_feasible(a, b, r, 1e-9);
  }
  EXPECT_GT(checked, 50);
}

TEST(Simplex, DimensionMismatchThrows) {
  EXPECT_THROW(solve_lp(Matrix{{1, 1}}, std::vector<double>{1, 2}, std::vector<double>{1, 1}),
               std::invalid_argument);
}
