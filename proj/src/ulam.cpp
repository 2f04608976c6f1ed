#include "lyap/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"
#include "lyap/projective.hpp"
#include "lyap/rng.hpp"
#include "lyap/simplex.hpp"

namespace lyap {

double UlamGrid::width() const { return std::numbers::pi / static_cast<double>(m); }

double UlamGrid::center(std::size_t j) const { return static_cast<double>(j) * width(); }

std::size_t UlamGrid::cell_of(double theta) const {
  const auto j = static_cast<std::size_t>(std::floor(theta / width() + 0.5));
  return j >= m ? j - m : j;
}

std::vector<double> UlamGrid::samples(std::size_t j, std::size_t samples_per_cell) const {
  std::vector<double> out;
  out.reserve(samples_per_cell);
  const double s = static_cast<double>(samples_per_cell);
  for (std::size_t i = 0; i < samples_per_cell; ++i) {
    double theta = center(j) + ((static_cast<double>(i) + 0.5) / s - 0.5) * width();
    if (theta < 0.0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta -= std::numbers::pi;
    out.push_back(theta);
  }
  return out;
}

UlamGrid make_grid(std::size_t m, bool cemetery_cell) {
  if (m < 2) throw ParameterError("Ulam grid needs m >= 2");
  return UlamGrid{m, cemetery_cell};
}

UlamGrid make_grid(const CocycleModel& model, std::size_t m) {
  bool singular = false;
  for (const auto& f : model.matrices) {
    if (log_bottom_k_conorm(f, f.rows()).is_minus_infinity()) singular = true;
  }
  return make_grid(m, singular);
}

namespace {

void check_ulam_model(const CocycleModel& model, std::size_t samples_per_cell) {
  model.validate();
  if (model.dim != 2) {
    throw UnsupportedDimensionError("Ulam discretization needs d = 2 (k = 1)");
  }
  if (!model.has_finite_kernel()) {
    throw ParameterError("Ulam discretization needs a finite kernel");
  }
  if (samples_per_cell == 0) throw ParameterError("samples_per_cell must be positive");
}

std::vector<double> image(const Matrix& f, double theta) {
  const double v[2] = {std::cos(theta), std::sin(theta)};
  return f.apply(v);
}

}  // namespace

TransferMatrix build_transfer(const CocycleModel& model, const UlamGrid& grid,
                              std::size_t samples_per_cell) {
  check_ulam_model(model, samples_per_cell);
  const std::size_t nz = model.phase_space_size();
  TransferMatrix h{grid, nz, samples_per_cell, Matrix(nz * grid.cells(), nz * grid.cells())};
  const double share = 1.0 / static_cast<double>(samples_per_cell);
  for (std::size_t z = 0; z < nz; ++z) {
    const std::size_t t = z / model.states;
    const std::size_t x = z % model.states;
    const std::size_t x_next = model.map(t, x);
    const auto row = model.kernel_row(t, x_next);
    auto spread = [&](std::size_t source, std::size_t target_cell, double weight) {
      for (std::size_t s = 0; s < model.symbols; ++s) {
        if (row[s] <= 0.0) continue;
        const std::size_t z_next = model.index(s, x_next);
        h.entries(source, h.index(z_next, target_cell)) += weight * row[s];
      }
    };
    for (std::size_t c = 0; c < grid.m; ++c) {
      for (double theta : grid.samples(c, samples_per_cell)) {
        const ProjState p = normalize(image(model.matrix(t, x), theta));
        std::size_t target = grid.m;
        if (!p.is_cemetery()) {
          target = grid.cell_of(angle_of(p));
        } else if (!grid.cemetery_cell) {
          throw ParameterError("build_transfer: a direction collapses but the grid has no cemetery cell");
        }
        spread(h.index(z, c), target, share);
      }
    }
    if (grid.cemetery_cell) spread(h.index(z, grid.m), grid.m, 1.0);
  }
  return h;
}

std::vector<ExtendedReal> potential_vector(const CocycleModel& model, const UlamGrid& grid,
                                           std::size_t samples_per_cell) {
  check_ulam_model(model, samples_per_cell);
  const std::size_t nz = model.phase_space_size();
  std::vector<ExtendedReal> out(nz * grid.cells(), ExtendedReal::minus_infinity());
  for (std::size_t z = 0; z < nz; ++z) {
    const Matrix& f = model.matrix(z / model.states, z % model.states);
    for (std::size_t c = 0; c < grid.m; ++c) {
      ExtendedReal sum = 0.0;
      for (double theta : grid.samples(c, samples_per_cell)) {
        sum += ExtendedReal::log_of(euclidean_norm(image(f, theta)));
      }
      out[z * grid.cells() + c] = sum / static_cast<double>(samples_per_cell);
    }
  }
  return out;
}

namespace {

constexpr double kForbiddenTolerance = 1e-9;

struct ErgodicPiece {
  std::vector<std::size_t> states;
  std::vector<double> weights;  // stationary law on `states`
  std::vector<double> marginal;  // pushed to Z
  bool forbidden = false;
  double value = 0.0;  // c^T pi when not forbidden
};

std::vector<ErgodicPiece> ergodic_pieces(const TransferMatrix& h,
                                         std::span<const ExtendedReal> c) {
  const std::size_t cells = h.grid.cells();
  std::vector<ErgodicPiece> pieces;
  for (auto& states : closed_classes(h.entries)) {
    ErgodicPiece piece;
    piece.states = std::move(states);
    const std::size_t size = piece.states.size();
    Matrix restricted(size, size);
    for (std::size_t a = 0; a < size; ++a) {
      for (std::size_t b = 0; b < size; ++b) {
        restricted(a, b) = h.entries(piece.states[a], piece.states[b]);
      }
    }
    piece.weights = stationary_vector(restricted);
    piece.marginal.assign(h.phase_states, 0.0);
    for (std::size_t a = 0; a < size; ++a) {
      const std::size_t i = piece.states[a];
      piece.marginal[i / cells] += piece.weights[a];
      if (c[i].is_finite()) {
        piece.value += piece.weights[a] * c[i].value();
      } else {
        piece.forbidden = true;
      }
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

// Weights w >= 0 over `use` with sum_C w_C marginal_C = nu, maximizing
// objective^T w.
LpResult solve_weights(const std::vector<ErgodicPiece>& pieces, const std::vector<std::size_t>& use,
                       const StationaryLaw& nu, const std::vector<double>& objective) {
  const std::size_t nz = nu.weights().size();
  Matrix a(nz, use.size());
  for (std::size_t col = 0; col < use.size(); ++col) {
    for (std::size_t z = 0; z < nz; ++z) a(z, col) = pieces[use[col]].marginal[z];
  }
  return solve_lp(a, nu.weights(), objective);
}

[[noreturn]] void report_infeasible(const LpResult& r) {
  throw InfeasibleError("no invariant lift of nu exists on this grid", r.infeasibility,
                        r.row_slacks);
}

}  // namespace

LiftSolution optimize_invariant_lift(const TransferMatrix& h, const StationaryLaw& nu,
                                     std::span<const ExtendedReal> c, Sense sense) {
  const std::size_t n = h.size();
  if (c.size() != n) throw ParameterError("optimize_invariant_lift: potential has wrong length");
  if (nu.weights().size() != h.phase_states) {
    throw ParameterError("optimize_invariant_lift: nu does not match the transfer matrix");
  }
  const auto pieces = ergodic_pieces(h, c);
  std::vector<std::size_t> all, allowed;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    all.push_back(p);
    if (!pieces[p].forbidden) allowed.push_back(p);
  }

  LiftSolution out;
  out.sense = sense;
  out.m = h.grid.m;
  out.samples_per_cell = h.samples_per_cell;
  out.classes = pieces.size();

  auto values_on = [&](const std::vector<std::size_t>& use, double sign) {
    std::vector<double> obj;
    for (std::size_t p : use) obj.push_back(sign * pieces[p].value);
    return obj;
  };
  std::vector<double> weights(pieces.size(), 0.0);
  auto take = [&](const LpResult& r, const std::vector<std::size_t>& use) {
    for (std::size_t col = 0; col < use.size(); ++col) weights[use[col]] = r.x[col];
    out.iterations += r.iterations;
  };
  bool collapsed = false;

  if (sense == Sense::max) {
    const LpResult r = solve_weights(pieces, allowed, nu, values_on(allowed, 1.0));
    if (r.status == LpStatus::optimal) {
      take(r, allowed);
    } else {
      // Every invariant lift touches a forbidden cell.
      const LpResult any = solve_weights(pieces, all, nu, std::vector<double>(all.size(), 0.0));
      if (any.status != LpStatus::optimal) report_infeasible(any);
      take(any, all);
      collapsed = true;
    }
  } else {
    bool restrict = false;
    if (allowed.size() < all.size()) {
      std::vector<double> indicator;
      for (std::size_t p : all) indicator.push_back(pieces[p].forbidden ? 1.0 : 0.0);
      const LpResult r = solve_weights(pieces, all, nu, indicator);
      if (r.status != LpStatus::optimal) report_infeasible(r);
      if (r.objective > kForbiddenTolerance) {
        take(r, all);
        collapsed = true;
      } else {
        restrict = true;
      }
    }
    if (!collapsed) {
      const auto& use = restrict ? allowed : all;
      const LpResult r = solve_weights(pieces, use, nu, values_on(use, -1.0));
      if (r.status != LpStatus::optimal) report_infeasible(r);
      take(r, use);
    }
  }

  std::vector<double> mu(n, 0.0);
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    if (weights[p] <= 0.0) continue;
    ++out.active_classes;
    for (std::size_t a = 0; a < pieces[p].states.size(); ++a) {
      mu[pieces[p].states[a]] += weights[p] * pieces[p].weights[a];
    }
  }

  ExtendedReal value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (c[i].is_finite()) {
      value += mu[i] * c[i].value();
    } else {
      out.forbidden_mass += mu[i];
    }
  }
  out.value = collapsed ? ExtendedReal::minus_infinity() : value;

  std::vector<double> pushed(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) pushed[j] += mu[i] * h.entries(i, j);
  }
  for (std::size_t j = 0; j < n; ++j) out.invariance_residual += std::abs(pushed[j] - mu[j]);
  const std::size_t cells = h.grid.cells();
  for (std::size_t z = 0; z < h.phase_states; ++z) {
    double mass = 0.0;
    for (std::size_t cell = 0; cell < cells; ++cell) mass += mu[z * cells + cell];
    out.marginal_residual = std::max(out.marginal_residual, std::abs(mass - nu.weights()[z]));
  }
  out.measure = std::move(mu);
  return out;
}

IntertwiningReport verify_intertwining(const TransferMatrix& h, std::size_t random_vectors,
                                       std::uint64_t seed) {
  const std::size_t nz = h.phase_states;
  const std::size_t cells = h.grid.cells();
  std::vector<std::vector<double>> tests;
  for (std::size_t z = 0; z < nz; ++z) {
    std::vector<double> g(nz, 0.0);
    g[z] = 1.0;
    tests.push_back(std::move(g));
  }
  tests.emplace_back(nz, 1.0);
  Rng rng = make_stream(seed, 0);
  for (std::size_t r = 0; r < random_vectors; ++r) {
    std::vector<double> g(nz);
    for (auto& v : g) v = 2.0 * uniform01(rng) - 1.0;
    tests.push_back(std::move(g));
  }

  IntertwiningReport report;
  for (const auto& g : tests) {
    for (std::size_t z = 0; z < nz; ++z) {
      double lo = HUGE_VAL;
      double hi = -HUGE_VAL;
      for (std::size_t cell = 0; cell < cells; ++cell) {
        const auto row = h.entries.row(h.index(z, cell));
        double v = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) v += row[j] * g[j / cells];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      report.max_spread = std::max(report.max_spread, hi - lo);
    }
  }
  report.vectors = tests.size();
  report.pass = report.max_spread <= 1e-8;
  return report;
}

}  // namespace lyap
