#include "lyap/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lyap/errors.hpp"

namespace lyap {

namespace {

class Tableau {
 public:
  Tableau(const Matrix& a, std::span<const double> b)
      : rows_(a.rows()), cols_(a.cols()), width_(a.cols() + 1),
        data_(rows_ * width_), objective_(width_, 0.0), basis_(rows_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < cols_; ++j) at(i, j) = sign * a(i, j);
      at(i, cols_) = sign * b[i];
      basis_[i] = artificial(i);
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * width_ + j]; }
  double rhs(std::size_t i) const { return at(i, cols_); }
  std::vector<double>& objective() { return objective_; }
  std::size_t basis(std::size_t i) const { return basis_[i]; }
  bool is_artificial(std::size_t i) const { return basis_[i] >= cols_; }
  std::size_t artificial(std::size_t i) const { return cols_ + i; }

  void pivot(std::size_t p, std::size_t q) {
    double* prow = &data_[p * width_];
    const double inv = 1.0 / prow[q];
    nonzero_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nonzero_.push_back(j);
      }
    }
    prow[q] = 1.0;
    auto eliminate = [&](double* row) {
      const double f = row[q];
      if (f == 0.0) return;
      for (std::size_t j : nonzero_) row[j] -= f * prow[j];
      row[q] = 0.0;
    };
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i != p) eliminate(&data_[i * width_]);
    }
    eliminate(objective_.data());
    if (prow[cols_] < 0.0) prow[cols_] = 0.0;
    basis_[p] = q;
  }

  void remove_row(std::size_t p) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(p * width_),
                data_.begin() + static_cast<std::ptrdiff_t>((p + 1) * width_));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(p));
    --rows_;
  }

  std::vector<double> solution() const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) x[basis_[i]] = std::max(0.0, rhs(i));
    }
    return x;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_;
  std::vector<double> data_;
  std::vector<double> objective_;  // reduced costs, then -objective value
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonzero_;
};

enum class Outcome { optimal, unbounded };

// Minimizes the objective row of `t` over the original columns.
Outcome run(Tableau& t, const LpOptions& options, std::size_t& iterations) {
  const std::size_t limit = 50 * (t.rows() + t.cols()) + 1000;
  for (;;) {
    if (++iterations > limit) throw std::runtime_error("simplex: iteration limit reached");
    const auto& z = t.objective();
    std::size_t q = t.cols();
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (z[j] < -options.optimality_tolerance) {
        q = j;
        break;
      }
    }
    if (q == t.cols()) return Outcome::optimal;

    std::size_t p = t.rows();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, q);
      if (a <= options.pivot_tolerance) continue;
      const double r = t.rhs(i) / a;
      const bool tie = p < t.rows() && std::abs(r - ratio) <= 1e-12 * (1.0 + ratio);
      if (tie) {
        if (t.basis(i) < t.basis(p)) p = i;
      } else if (r < ratio) {
        ratio = r;
        p = i;
      }
    }
    if (p == t.rows()) return Outcome::unbounded;
    t.pivot(p, q);
  }
}

}  // namespace

LpResult solve_lp(const Matrix& a, std::span<const double> b, std::span<const double> c,
                  const LpOptions& options) {
  if (b.size() != a.rows() || c.size() != a.cols()) {
    throw ParameterError("solve_lp: dimension mismatch");
  }
  LpResult result;
  Tableau t(a, b);

  // Phase one: minimize the sum of artificials.
  double scale = 1.0;
  for (double v : b) scale += std::abs(v);
  auto& z = t.objective();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j <= t.cols(); ++j) z[j] -= t.at(i, j);
  }
  run(t, options, result.iterations);
  result.infeasibility = std::max(0.0, -z[t.cols()]);
  if (result.infeasibility > options.feasibility_tolerance * scale) {
    result.status = LpStatus::infeasible;
    result.x = t.solution();
    result.row_slacks.resize(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) ax += a(i, j) * result.x[j];
      result.row_slacks[i] = b[i] - ax;
    }
    return result;
  }

  // Drive remaining artificials out of the basis; rows where that is
  // impossible are linearly dependent and dropped.
  for (std::size_t i = 0; i < t.rows();) {
    if (!t.is_artificial(i)) {
      ++i;
      continue;
    }
    std::size_t q = t.cols();
    double best = 1e-9;
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (std::abs(t.at(i, j)) > best) {
        best = std::abs(t.at(i, j));
        q = j;
      }
    }
    if (q == t.cols()) {
      t.remove_row(i);
    } else {
      t.pivot(i, q);
      ++i;
    }
  }

  // Phase two on the original objective (minimize -c).
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t j = 0; j < t.cols(); ++j) z[j] = -c[j];
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double cb = -c[t.basis(i)];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= t.cols(); ++j) z[j] -= cb * t.at(i, j);
  }
  if (run(t, options, result.iterations) == Outcome::unbounded) {
    result.status = LpStatus::unbounded;
    return result;
  }
  result.x = t.solution();
  for (std::size_t j = 0; j < c.size(); ++j) result.objective += c[j] * result.x[j];
  result.row_slacks.assign(a.rows(), 0.0);
  return result;
}

}  // namespace lyap
