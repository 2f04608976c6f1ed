#include "lyap/cocycle.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "lyap/chain.hpp"
#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"

namespace lyap {

namespace {

constexpr double kRescaleHigh = 1e100;
constexpr double kRescaleLow = 1e-100;

// Keeps max|M| inside [1e-100, 1e100]; returns false on collapse.
bool rescale(Matrix& m, double& log_scale) {
  const double mx = m.max_abs();
  if (mx <= kKillThreshold) return false;
  if (mx > kRescaleHigh || mx < kRescaleLow) {
    m *= 1.0 / mx;
    log_scale += std::log(mx);
  }
  return true;
}

double operator_norm(const Matrix& m, OperatorNorm norm) {
  return norm == OperatorNorm::spectral ? spectral_norm(m) : l1_operator_norm(m);
}

// In-place projective step on a unit representative, accumulating log-gains.
struct DirectionTracker {
  std::vector<double> v;
  std::vector<double> w;
  double sum = 0.0;
  bool dead = false;

  void step(const Matrix& c) {
    if (dead) return;
    const std::size_t n = v.size();
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      const auto row = c.row(r);
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      w[r] = acc;
    }
    const double norm = euclidean_norm(w);
    if (norm <= kKillThreshold) {
      dead = true;
      return;
    }
    sum += std::log(norm);
    const double inv = 1.0 / norm;
    for (std::size_t r = 0; r < n; ++r) v[r] = w[r] * inv;
  }

  ExtendedReal value() const {
    return dead ? ExtendedReal::minus_infinity() : ExtendedReal(sum);
  }
};

std::vector<ProjState> candidate_directions(std::size_t dimension,
                                            const std::vector<std::vector<double>>& extra,
                                            std::size_t& frame_count) {
  std::vector<ProjState> dirs;
  for (std::size_t i = 0; i < dimension; ++i) dirs.push_back(frame_direction(dimension, i));
  frame_count = dirs.size();
  for (const auto& e : extra) {
    if (e.size() != dimension) {
      throw ParameterError("extra direction must have length C(d, k)");
    }
    auto p = normalize(e);
    if (p.is_cemetery()) throw ParameterError("extra direction must be non-zero");
    dirs.push_back(std::move(p));
  }
  return dirs;
}

ExtendedReal weighted(double w, const ExtendedReal& v) {
  if (v.is_minus_infinity()) return v;
  return ExtendedReal(w * v.value());
}

// Weighted accumulation of leaf values for one starting state.
struct LeafAccumulator {
  OperatorNorm norm;
  const std::vector<ProjState>* directions;
  ExtendedReal norm_sum = 0.0;
  std::vector<ExtendedReal> direction_sums;

  LeafAccumulator(OperatorNorm n, const std::vector<ProjState>& dirs)
      : norm(n), directions(&dirs), direction_sums(dirs.size(), ExtendedReal(0.0)) {}

  void add_dead(double weight) {
    if (weight <= 0.0) return;
    norm_sum = ExtendedReal::minus_infinity();
    for (auto& s : direction_sums) s = ExtendedReal::minus_infinity();
  }

  void add(double weight, const Matrix& product, double log_scale) {
    if (weight <= 0.0) return;
    const double pn = operator_norm(product, norm);
    norm_sum += weighted(weight, ExtendedReal::log_of(pn) + log_scale);
    for (std::size_t i = 0; i < directions->size(); ++i) {
      const auto img = product.apply((*directions)[i].coords());
      const double g = euclidean_norm(img);
      const ExtendedReal gain =
          g <= kKillThreshold ? ExtendedReal::minus_infinity() : ExtendedReal(std::log(g) + log_scale);
      direction_sums[i] += weighted(weight, gain);
    }
  }

};

void finish_state(const LeafAccumulator& acc, std::size_t n, std::size_t frame_count,
                  std::size_t z, FiniteHorizonResult& out) {
  out.per_state_norm[z] = {n, acc.norm_sum, HorizonKind::mean_log_norm};
  ExtendedReal frame = ExtendedReal::minus_infinity();
  ExtendedReal all = ExtendedReal::minus_infinity();
  for (std::size_t i = 0; i < acc.direction_sums.size(); ++i) {
    all = max(all, acc.direction_sums[i]);
    if (i < frame_count) frame = max(frame, acc.direction_sums[i]);
  }
  out.per_state_frame[z] = {n, frame, HorizonKind::conditional_sup_direction};
  out.per_state[z] = {n, all, HorizonKind::conditional_sup_direction};
}

void check_budget(double required, double budget) {
  if (required > budget) {
    throw BudgetError("exact_finite_horizon: " + std::to_string(required) +
                          " paths required, budget is " + std::to_string(budget),
                      required, budget);
  }
}

}  // namespace

CompoundCocycle::CompoundCocycle(const CocycleModel& model, std::size_t k)
    : model_(&model), k_(k), states_(model.states) {
  model.validate();
  if (k < 1 || k > model.dim) throw ParameterError("CompoundCocycle: k must be in [1, d]");
  dimension_ = binomial(model.dim, k);
  compounds_.reserve(model.matrices.size());
  for (const auto& m : model.matrices) compounds_.push_back(compound_matrix(m, k));
}

std::vector<ChainState> sample_path(const CocycleModel& model, ChainState z0, std::size_t n,
                                    Rng& rng) {
  std::vector<ChainState> path;
  path.reserve(n);
  ChainState z = z0;
  for (std::size_t i = 0; i < n; ++i) {
    path.push_back(z);
    if (i + 1 < n) z = driving_step(z, model, rng);
  }
  return path;
}

ExtendedReal iterate_norms(const CompoundCocycle& cocycle, ChainState z0, std::size_t n,
                           Rng& rng) {
  const auto& model = cocycle.model();
  const std::size_t dim = cocycle.dimension();
  Matrix m = Matrix::identity(dim);
  Matrix tmp(dim, dim);
  double log_scale = 0.0;
  bool dead = false;
  ChainState z = z0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dead) {
      multiply_into(cocycle.at(z.t, z.x), m, tmp);
      std::swap(m, tmp);
      dead = !rescale(m, log_scale);
    }
    if (i + 1 < n) z = driving_step(z, model, rng);
  }
  if (dead) return ExtendedReal::minus_infinity();
  return ExtendedReal::log_of(spectral_norm(m)) + log_scale;
}

ExtendedReal iterate_norms(const CocycleModel& model, ChainState z0, std::size_t n,
                           std::size_t k, Rng& rng) {
  const CompoundCocycle cocycle(model, k);
  return iterate_norms(cocycle, z0, n, rng);
}

NormPair iterate_norm_pair(const CompoundCocycle& cocycle, ChainState z0, std::size_t n,
                           Rng& rng) {
  const auto& model = cocycle.model();
  const std::size_t dim = cocycle.dimension();
  Matrix top = Matrix::identity(dim);
  Matrix inv = Matrix::identity(dim);
  Matrix tmp(dim, dim);
  double top_scale = 0.0;
  double inv_scale = 0.0;
  bool top_dead = false;
  bool singular = false;

  // Factor inverses are formed on demand; a factor is singular when its
  // smallest singular value is numerically zero.
  std::vector<std::optional<Matrix>> inverses(model.matrices.size());
  std::vector<char> known(model.matrices.size(), 0);

  ChainState z = z0;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& c = cocycle.at(z.t, z.x);
    if (!top_dead) {
      multiply_into(c, top, tmp);
      std::swap(top, tmp);
      top_dead = !rescale(top, top_scale);
    }
    if (!singular) {
      const std::size_t idx = model.index(z.t, z.x);
      if (!known[idx]) {
        known[idx] = 1;
        if (log_bottom_k_conorm(model.matrices[idx], model.dim).is_finite()) {
          inverses[idx] = inverse(c);
        }
      }
      if (!inverses[idx]) {
        singular = true;
      } else {
        multiply_into(inv, *inverses[idx], tmp);
        std::swap(inv, tmp);
        singular = !rescale(inv, inv_scale);
      }
    }
    if (i + 1 < n) z = driving_step(z, model, rng);
  }
  NormPair out;
  out.top = top_dead ? ExtendedReal::minus_infinity()
                     : ExtendedReal::log_of(spectral_norm(top)) + top_scale;
  if (singular) {
    out.bottom = ExtendedReal::minus_infinity();
  } else {
    out.bottom = ExtendedReal(-(std::log(spectral_norm(inv)) + inv_scale));
  }
  return out;
}

std::vector<ExtendedReal> iterate_directions(const CompoundCocycle& cocycle, ChainState z0,
                                             const std::vector<ProjState>& directions,
                                             std::size_t n, Rng& rng) {
  const auto& model = cocycle.model();
  std::vector<DirectionTracker> trackers;
  trackers.reserve(directions.size());
  for (const auto& d : directions) {
    if (d.is_cemetery()) throw ParameterError("iterate_direction: v0 must not be the cemetery");
    if (d.dimension() != cocycle.dimension()) {
      throw ParameterError("iterate_direction: direction has wrong dimension");
    }
    DirectionTracker t;
    t.v.assign(d.coords().begin(), d.coords().end());
    t.w.resize(t.v.size());
    trackers.push_back(std::move(t));
  }
  ChainState z = z0;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& c = cocycle.at(z.t, z.x);
    for (auto& t : trackers) t.step(c);
    if (i + 1 < n) z = driving_step(z, model, rng);
  }
  std::vector<ExtendedReal> out;
  out.reserve(trackers.size());
  for (const auto& t : trackers) out.push_back(t.value());
  return out;
}

ExtendedReal iterate_direction(const CocycleModel& model, ChainState z0, const ProjState& v0,
                               std::size_t n, std::size_t k, Rng& rng) {
  const CompoundCocycle cocycle(model, k);
  return iterate_directions(cocycle, z0, {v0}, n, rng).front();
}

namespace {

FiniteHorizonResult enumerate_vertex(const CocycleModel& model, std::size_t n, std::size_t k,
                                     const ExactOptions& options) {
  if (n == 0) throw ParameterError("exact_finite_horizon: n must be >= 1");
  model.validate();
  if (!model.has_finite_kernel()) {
    throw ParameterError("exact_finite_horizon: sampler kernels cannot be enumerated");
  }
  check_budget(std::pow(static_cast<double>(model.symbols), static_cast<double>(n - 1)) *
                   static_cast<double>(model.states),
               options.budget);
  const CompoundCocycle cocycle(model, k);
  const std::size_t dim = cocycle.dimension();
  std::size_t frame_count = 0;
  const auto directions = candidate_directions(dim, options.extra_directions, frame_count);

  const std::size_t nz = model.phase_space_size();
  FiniteHorizonResult out;
  out.per_state.resize(nz);
  out.per_state_norm.resize(nz);
  out.per_state_frame.resize(nz);

  std::vector<Matrix> products(n + 1, Matrix::identity(dim));
  std::vector<double> scales(n + 1, 0.0);

  for (std::size_t zi = 0; zi < nz; ++zi) {
    LeafAccumulator acc(options.norm, directions);
    // products[j] holds F^j for the current prefix.
    auto visit = [&](auto&& self, std::size_t depth, ChainState z, double weight) -> void {
      multiply_into(cocycle.at(z.t, z.x), products[depth], products[depth + 1]);
      scales[depth + 1] = scales[depth];
      if (!rescale(products[depth + 1], scales[depth + 1])) {
        acc.add_dead(weight);
        return;
      }
      if (depth + 1 == n) {
        acc.add(weight, products[depth + 1], scales[depth + 1]);
        return;
      }
      const std::size_t x_next = model.map(z.t, z.x);
      const auto row = model.kernel_row(z.t, x_next);
      for (std::size_t s = 0; s < model.symbols; ++s) {
        if (row[s] > 0.0) self(self, depth + 1, ChainState{s, x_next}, weight * row[s]);
      }
    };
    visit(visit, 0, ChainState{zi / model.states, zi % model.states}, 1.0);
    finish_state(acc, n, frame_count, zi, out);
  }
  return out;
}

}  // namespace

FiniteHorizonResult exact_finite_horizon(const CocycleModel& model, std::size_t n,
                                         std::size_t k, const ExactOptions& options) {
  const StationaryLaw nu = resolve_stationary_law(model);
  FiniteHorizonResult out = enumerate_vertex(model, n, k, options);
  ExtendedReal a = 0.0;
  for (std::size_t zi = 0; zi < out.per_state_norm.size(); ++zi) {
    const double w = nu.weights()[zi];
    if (w > 0.0) a += weighted(w, out.per_state_norm[zi].value);
  }
  out.a_n = {n, a, HorizonKind::mean_log_norm};
  return out;
}

std::vector<HorizonValue> exact_conditional_sup(const CocycleModel& model, std::size_t n,
                                                std::size_t k, const ExactOptions& options) {
  return enumerate_vertex(model, n, k, options).per_state;
}

FiniteHorizonResult exact_finite_horizon(const EdgeModel& model, std::size_t n, std::size_t k,
                                         const ExactOptions& options) {
  if (n == 0) throw ParameterError("exact_finite_horizon: n must be >= 1");
  model.validate();
  check_budget(std::pow(static_cast<double>(model.symbols), static_cast<double>(n)) *
                   static_cast<double>(model.states),
               options.budget);
  if (k < 1 || k > model.dim) throw ParameterError("exact_finite_horizon: k must be in [1, d]");
  const StationaryLaw nu = resolve_stationary_law(model);
  std::vector<Matrix> compounds;
  compounds.reserve(model.matrices.size());
  for (const auto& m : model.matrices) compounds.push_back(compound_matrix(m, k));
  const std::size_t dim = binomial(model.dim, k);
  std::size_t frame_count = 0;
  const auto directions = candidate_directions(dim, options.extra_directions, frame_count);

  const std::size_t nz = model.symbols * model.states;
  FiniteHorizonResult out;
  out.per_state.resize(nz);
  out.per_state_norm.resize(nz);
  out.per_state_frame.resize(nz);

  std::vector<Matrix> products(n + 1, Matrix::identity(dim));
  std::vector<double> scales(n + 1, 0.0);

  for (std::size_t zi = 0; zi < nz; ++zi) {
    LeafAccumulator acc(options.norm, directions);
    // From (t, x) at depth j: choose the jump t -> s, apply F(t, s, x).
    auto visit = [&](auto&& self, std::size_t depth, std::size_t t, std::size_t x,
                     double weight) -> void {
      for (std::size_t s = 0; s < model.symbols; ++s) {
        const double q = model.kernel(t, s);
        if (q <= 0.0) continue;
        const double w = weight * q;
        multiply_into(compounds[model.index(t, s, x)], products[depth], products[depth + 1]);
        scales[depth + 1] = scales[depth];
        if (!rescale(products[depth + 1], scales[depth + 1])) {
          acc.add_dead(w);
          continue;
        }
        if (depth + 1 == n) {
          acc.add(w, products[depth + 1], scales[depth + 1]);
        } else {
          self(self, depth + 1, s, model.map(t, s, x), w);
        }
      }
    };
    visit(visit, 0, zi / model.states, zi % model.states, 1.0);
    finish_state(acc, n, frame_count, zi, out);
  }

  ExtendedReal a = 0.0;
  for (std::size_t zi = 0; zi < nz; ++zi) {
    const double w = nu.weights()[zi];
    if (w > 0.0) a += weighted(w, out.per_state_norm[zi].value);
  }
  out.a_n = {n, a, HorizonKind::mean_log_norm};
  return out;
}

}  // namespace lyap
