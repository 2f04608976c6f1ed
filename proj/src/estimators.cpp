#include "lyap/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lyap/chain.hpp"
#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"
#include "lyap/parallel.hpp"

namespace lyap {

namespace {

// Projective distance sqrt(1 - <u, v>^2) between unit representatives.
double projective_distance(std::span<const double> u, std::span<const double> v) {
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::sqrt(std::max(0.0, 1.0 - dot * dot));
}

ProjState gaussian_direction(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  for (;;) {
    for (auto& c : v) c = standard_normal(rng);
    auto p = normalize(v);
    if (!p.is_cemetery()) return p;
  }
}

void check_k(const CocycleModel& model, std::size_t k, const char* who) {
  if (k < 1 || k > model.dim) {
    throw ParameterError(std::string(who) + ": k must be in 1..d");
  }
}

ExtendedReal mean_of(const std::vector<ExtendedReal>& values, std::size_t begin,
                     std::size_t step) {
  ExtendedReal sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = begin; i < values.size(); i += step) {
    sum += values[i];
    ++count;
  }
  return count == 0 ? ExtendedReal::minus_infinity() : sum / static_cast<double>(count);
}

// Argmax of `select` over [0, count), scored with `score`.
ExtendedReal held_out(const std::vector<ExtendedReal>& select,
                      const std::vector<ExtendedReal>& score, std::size_t count) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < count; ++i) {
    if (select[i] > select[best]) best = i;
  }
  return score[best];
}

ExtendedReal plain_max(const std::vector<ExtendedReal>& values, std::size_t count) {
  ExtendedReal m = ExtendedReal::minus_infinity();
  for (std::size_t i = 0; i < count; ++i) m = max(m, values[i]);
  return m;
}

}  // namespace

EstimateCI summarize(std::span<const ExtendedReal> samples, std::size_t horizon) {
  EstimateCI out;
  out.trials = samples.size();
  out.horizon = horizon;
  if (samples.empty()) {
    throw ParameterError("summarize: no samples");
  }
  std::size_t dead = 0;
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s.is_minus_infinity()) {
      ++dead;
    } else {
      sum += s.value();
    }
  }
  out.minus_infinity_fraction = static_cast<double>(dead) / static_cast<double>(samples.size());
  if (dead > 0) {
    out.mean = ExtendedReal::minus_infinity();
    return out;
  }
  const double count = static_cast<double>(samples.size());
  const double mean = sum / count;
  double ss = 0.0;
  for (const auto& s : samples) ss += (s.value() - mean) * (s.value() - mean);
  out.mean = mean;
  out.std_error = samples.size() > 1 ? std::sqrt(ss / (count - 1.0)) / std::sqrt(count) : 0.0;
  return out;
}

TopBottom estimate_top_and_bottom(const CocycleModel& model, std::size_t k,
                                  const McParams& params) {
  check_k(model, k, "estimate_sum_bottom_k");
  if (params.n == 0 || params.trials == 0) {
    throw ParameterError("estimate_sum_bottom_k: n and trials must be positive");
  }
  const StationaryLaw nu = resolve_stationary_law(model);
  const CompoundCocycle cocycle(model, k);
  std::vector<ExtendedReal> top(params.trials), bottom(params.trials);
  const double n = static_cast<double>(params.n);
  parallel_for(params.trials, params.workers, [&](std::size_t i) {
    Rng rng = make_stream(params.seed, i);
    const ChainState z0 = nu.sample(rng);
    const NormPair pair = iterate_norm_pair(cocycle, z0, params.n, rng);
    top[i] = pair.top / n;
    bottom[i] = pair.bottom / n;
  });
  return {summarize(top, params.n), summarize(bottom, params.n)};
}

EstimateCI estimate_sum_top_k(const CocycleModel& model, std::size_t k, const McParams& params) {
  check_k(model, k, "estimate_sum_top_k");
  if (params.n == 0 || params.trials == 0) {
    throw ParameterError("estimate_sum_top_k: n and trials must be positive");
  }
  const StationaryLaw nu = resolve_stationary_law(model);
  const CompoundCocycle cocycle(model, k);
  std::vector<ExtendedReal> values(params.trials);
  const double n = static_cast<double>(params.n);
  parallel_for(params.trials, params.workers, [&](std::size_t i) {
    Rng rng = make_stream(params.seed, i);
    const ChainState z0 = nu.sample(rng);
    values[i] = iterate_norms(cocycle, z0, params.n, rng) / n;
  });
  return summarize(values, params.n);
}

EstimateCI estimate_sum_bottom_k(const CocycleModel& model, std::size_t k,
                                 const McParams& params) {
  return estimate_top_and_bottom(model, k, params).bottom;
}

DirectionSupResult estimate_direction_sup(const CocycleModel& model, std::size_t k,
                                          const DirectionSupParams& params) {
  check_k(model, k, "estimate_direction_sup");
  if (params.n == 0 || params.outer == 0 || params.inner == 0) {
    throw ParameterError("estimate_direction_sup: n, outer and inner must be positive");
  }
  const StationaryLaw nu = resolve_stationary_law(model);
  const CompoundCocycle cocycle(model, k);
  const std::size_t dim = cocycle.dimension();
  std::vector<ProjState> directions;
  for (std::size_t i = 0; i < dim; ++i) directions.push_back(frame_direction(dim, i));
  const std::size_t frame_count = directions.size();
  for (const auto& e : params.extra_directions) {
    if (e.size() != dim) throw ParameterError("extra direction must have length C(d, k)");
    auto p = normalize(e);
    if (p.is_cemetery()) throw ParameterError("extra direction must be non-zero");
    directions.push_back(std::move(p));
  }
  const std::size_t m = directions.size();
  const double n = static_cast<double>(params.n);

  std::vector<ExtendedReal> frame(params.outer), combined(params.outer);
  parallel_for(params.outer, params.workers, [&](std::size_t r) {
    Rng outer_rng = make_stream(params.seed, r);
    const ChainState z0 = nu.sample(outer_rng);
    const std::uint64_t sub = outer_rng();
    // gains[j * m + i]: path j, direction i
    std::vector<ExtendedReal> gains(params.inner * m);
    for (std::size_t j = 0; j < params.inner; ++j) {
      Rng rng = make_stream(sub, j);
      const auto g = iterate_directions(cocycle, z0, directions, params.n, rng);
      for (std::size_t i = 0; i < m; ++i) gains[j * m + i] = g[i] / n;
    }
    if (params.inner == 1) {
      frame[r] = plain_max(gains, frame_count);
      combined[r] = plain_max(gains, m);
      return;
    }
    std::vector<ExtendedReal> even(m), odd(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<ExtendedReal> column(params.inner);
      for (std::size_t j = 0; j < params.inner; ++j) column[j] = gains[j * m + i];
      even[i] = mean_of(column, 0, 2);
      odd[i] = mean_of(column, 1, 2);
    }
    auto crossed = [&](std::size_t count) {
      const ExtendedReal a = held_out(even, odd, count);
      const ExtendedReal b = held_out(odd, even, count);
      return (a + b) / 2.0;
    };
    frame[r] = crossed(frame_count);
    combined[r] = crossed(m);
  });
  return {summarize(frame, params.n), summarize(combined, params.n)};
}

ExtendedReal estimate_tracking(const CocycleModel& model, std::size_t k, std::size_t n,
                               std::uint64_t seed, const ProjState& v0) {
  check_k(model, k, "estimate_tracking");
  if (n == 0) throw ParameterError("estimate_tracking: n must be positive");
  const StationaryLaw nu = resolve_stationary_law(model);
  const CompoundCocycle cocycle(model, k);
  Rng rng = make_stream(seed, 0);
  const ChainState z0 = nu.sample(rng);
  return iterate_directions(cocycle, z0, {v0}, n, rng).front() / static_cast<double>(n);
}

ExtendedReal estimate_tracking(const CocycleModel& model, std::size_t k, std::size_t n,
                               std::uint64_t seed) {
  check_k(model, k, "estimate_tracking");
  Rng direction_rng = make_stream(seed, 1);
  const ProjState v0 = gaussian_direction(binomial(model.dim, k), direction_rng);
  return estimate_tracking(model, k, n, seed, v0);
}

ParticleResult furstenberg_particles(const std::vector<Matrix>& matrices,
                                     const FiniteKernel& p_kernel, std::span<const double> p,
                                     std::size_t k, const ParticleParams& params) {
  if (matrices.empty()) throw ParameterError("furstenberg_particles: no matrices");
  if (matrices.size() != p_kernel.states() || p.size() != matrices.size()) {
    throw ParameterError("furstenberg_particles: matrices, P and p must share the alphabet");
  }
  if (params.particles == 0 || params.avg == 0) {
    throw ParameterError("furstenberg_particles: particles and avg must be positive");
  }
  if (closed_classes(p_kernel.matrix()).size() > 1) {
    throw AmbiguityError("furstenberg_particles: P has several closed classes");
  }
  if (stationarity_residual(p, p_kernel.matrix()) > 1e-10) {
    throw ParameterError("furstenberg_particles: p is not stationary for P");
  }
  const std::size_t symbols = matrices.size();
  const CocycleModel model = CocycleModel::matrix_products(
      matrices, p_kernel, StationaryLaw(symbols, 1, std::vector<double>(p.begin(), p.end())));
  model.validate();
  if (k < 1 || k > model.dim) throw ParameterError("furstenberg_particles: k must be in 1..d");
  const CompoundCocycle cocycle(model, k);
  const std::size_t dim = cocycle.dimension();
  const StationaryLaw& nu = *model.nu;

  struct Particle {
    std::size_t symbol = 0;
    ProjState v = ProjState::cemetery();
    ExtendedReal value;
    bool merged = false;
  };
  std::vector<Particle> particles(params.particles);
  parallel_for(params.particles, params.workers, [&](std::size_t i) {
    Rng rng = make_stream(params.seed, i);
    ChainState z = nu.sample(rng);
    ProjState v = gaussian_direction(dim, rng);
    // Shadow direction pushed by the same matrices; used only for the lift tag.
    ProjState shadow = gaussian_direction(dim, rng);
    ExtendedReal sum = 0.0;
    const std::size_t steps = params.burn + params.avg;
    for (std::size_t s = 0; s < steps; ++s) {
      const Matrix& a = cocycle.at(z.t, z.x);
      const GainStep step = apply_log(a, v);
      if (s >= params.burn) sum += step.log_gain;
      v = step.next;
      shadow = apply_log(a, shadow).next;
      z = driving_step(z, model, rng);
      if (v.is_cemetery() && s >= params.burn) break;
    }
    Particle& out = particles[i];
    out.symbol = z.t;
    out.v = v;
    out.value = sum / static_cast<double>(params.avg);
    out.merged = dim == 1 ||
                 (!v.is_cemetery() && !shadow.is_cemetery() &&
                  projective_distance(v.coords(), shadow.coords()) < 1e-8);
  });

  ParticleResult result;
  result.eta.clouds.resize(symbols);
  std::vector<ExtendedReal> values;
  values.reserve(particles.size());
  bool all_merged = true;
  for (const auto& pt : particles) {
    if (pt.v.is_cemetery()) ++result.cemetery_hits;
    result.eta.clouds[pt.symbol].push_back(pt.v);
    values.push_back(pt.value);
    all_merged = all_merged && pt.merged;
  }
  result.lambda = summarize(values, params.avg);
  result.lift_tag = all_merged ? "unique_lift" : "lower_bound";
  return result;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::norm:
      return "norm";
    case Method::direction_sup:
      return "direction_sup";
    case Method::tracking:
      return "tracking";
    case Method::furstenberg:
      return "furstenberg";
  }
  return "norm";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::norm, Method::direction_sup, Method::tracking, Method::furstenberg}) {
    if (name == method_name(m)) return m;
  }
  throw ParameterError("unknown method '" + name + "'");
}

std::vector<ExtendedReal> exponents_from_sums(std::span<const ExtendedReal> sums) {
  std::vector<ExtendedReal> out;
  out.reserve(sums.size());
  ExtendedReal previous = 0.0;  // Lambda_0 = log ||wedge^0|| = 0
  for (const auto& s : sums) {
    out.push_back(previous.is_finite() ? s - previous : ExtendedReal::minus_infinity());
    previous = s;
  }
  return out;
}

namespace {

struct SumEstimate {
  EstimateCI ci;
  std::string lift_tag;
};

SumEstimate estimate_sum(const CocycleModel& model, std::size_t k, std::size_t n,
                         const SpectrumParams& params) {
  switch (params.method) {
    case Method::norm:
      return {estimate_sum_top_k(model, k, {n, params.trials, params.seed, params.workers}), {}};
    case Method::direction_sup: {
      DirectionSupParams p;
      p.n = n;
      p.outer = params.trials;
      p.inner = params.inner;
      p.seed = params.seed;
      p.workers = params.workers;
      return {estimate_direction_sup(model, k, p).combined, {}};
    }
    case Method::tracking: {
      const ExtendedReal v = estimate_tracking(model, k, n, params.seed);
      EstimateCI ci;
      ci.mean = v;
      ci.trials = 1;
      ci.horizon = n;
      ci.minus_infinity_fraction = v.is_finite() ? 0.0 : 1.0;
      return {ci, {}};
    }
    case Method::furstenberg: {
      if (model.states != 1) {
        throw ParameterError("furstenberg method needs a model with a single phase state");
      }
      const auto* finite = std::get_if<FiniteKernel>(&model.kernel);
      const auto* place = std::get_if<PlaceDependentKernel>(&model.kernel);
      if (finite == nullptr && place == nullptr) {
        throw ParameterError("furstenberg method needs a finite kernel");
      }
      const FiniteKernel& q = finite != nullptr ? *finite : place->at(0);
      const StationaryLaw nu = resolve_stationary_law(model);
      ParticleParams p;
      p.particles = params.trials;
      p.burn = params.burn;
      p.avg = n;
      p.seed = params.seed;
      p.workers = params.workers;
      auto r = furstenberg_particles(model.matrices, q, nu.weights(), k, p);
      return {r.lambda, r.lift_tag};
    }
  }
  throw ParameterError("unknown method");
}

}  // namespace

EstimateCI estimate_Lambda(const CocycleModel& model, std::size_t k,
                           const SpectrumParams& params) {
  check_k(model, k, "estimate_Lambda");
  return estimate_sum(model, k, params.n, params).ci;
}

SpectrumReport spectrum(const CocycleModel& model, const SpectrumParams& params) {
  model.validate();
  if (params.n == 0 || params.trials == 0) {
    throw ParameterError("spectrum: n and trials must be positive");
  }
  SpectrumReport report;
  report.method = params.method;
  report.seed = params.seed;
  std::vector<ExtendedReal> sums;
  for (std::size_t k = 1; k <= model.dim; ++k) {
    SumEstimate est = estimate_sum(model, k, params.n, params);
    SpectrumEntry entry;
    entry.k = k;
    entry.Lambda = est.ci;
    if (params.bias_diagnostic) {
      const std::size_t half = std::max<std::size_t>(1, params.n / 2);
      const EstimateCI h = estimate_sum(model, k, half, params).ci;
      if (h.mean.is_finite() && est.ci.mean.is_finite()) {
        entry.bias_spread = std::abs(est.ci.mean.value() - h.mean.value());
      }
    }
    if (!est.lift_tag.empty()) {
      // One non-unique lift makes the whole report a lower bound.
      if (report.lift_tag.empty() || est.lift_tag == "lower_bound") report.lift_tag = est.lift_tag;
    }
    sums.push_back(entry.Lambda.mean);
    report.entries.push_back(std::move(entry));
  }
  const auto lambdas = exponents_from_sums(sums);
  for (std::size_t i = 0; i < lambdas.size(); ++i) report.entries[i].lambda = lambdas[i];
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    const ExtendedReal& cur = lambdas[i];
    const ExtendedReal& prev = lambdas[i - 1];
    if (cur.is_minus_infinity()) continue;
    if (prev.is_minus_infinity()) {
      report.ordering_consistent = false;
      continue;
    }
    const double slack =
        2.0 * (report.entries[i].Lambda.std_error + report.entries[i - 1].Lambda.std_error) +
        1e-12 * std::max(1.0, std::abs(prev.value()));
    if (cur.value() > prev.value() + slack) report.ordering_consistent = false;
  }
  return report;
}

DependenceReport pointwise_dependence_check(const CocycleModel& model, std::size_t k,
                                            std::size_t n, std::size_t groups,
                                            std::size_t trials_per_group, std::uint64_t seed,
                                            std::size_t workers) {
  check_k(model, k, "pointwise_dependence_check");
  if (n == 0 || groups == 0 || trials_per_group == 0) {
    throw ParameterError("pointwise_dependence_check: n, groups and trials must be positive");
  }
  DependenceReport report;
  if (!model.has_finite_kernel()) {
    report.skipped = true;
    report.warning = "sampler kernels are not supported; check skipped";
    return report;
  }
  if (closed_classes(driving_kernel(model)).size() > 1) {
    report.skipped = true;
    report.warning = "driving chain has several closed classes; stationary law is ambiguous";
    return report;
  }
  const StationaryLaw nu = resolve_stationary_law(model);
  const CompoundCocycle cocycle(model, k);

  std::vector<ChainState> starts(groups);
  std::vector<std::uint64_t> subseeds(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    Rng rng = make_stream(seed, g);
    starts[g] = nu.sample(rng);
    subseeds[g] = rng();
  }
  std::vector<ExtendedReal> values(groups * trials_per_group);
  parallel_for(values.size(), workers, [&](std::size_t idx) {
    const std::size_t g = idx / trials_per_group;
    Rng rng = make_stream(subseeds[g], idx % trials_per_group);
    values[idx] = iterate_norms(cocycle, starts[g], n, rng) / static_cast<double>(n);
  });

  auto group_values = [&](std::size_t g) {
    return std::span<const ExtendedReal>(values).subspan(g * trials_per_group, trials_per_group);
  };
  std::vector<double> finite_means;
  double spread_sum = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    DependenceGroup group{starts[g], summarize(group_values(g), n)};
    if (group.estimate.mean.is_finite()) {
      finite_means.push_back(group.estimate.mean.value());
      spread_sum += group.estimate.std_error * std::sqrt(static_cast<double>(trials_per_group));
    }
    report.groups.push_back(group);
  }
  if (!finite_means.empty()) {
    report.within_group_spread = spread_sum / static_cast<double>(finite_means.size());
    double mu = 0.0;
    for (double v : finite_means) mu += v;
    mu /= static_cast<double>(finite_means.size());
    double ss = 0.0;
    for (double v : finite_means) ss += (v - mu) * (v - mu);
    report.across_group_spread =
        finite_means.size() > 1 ? std::sqrt(ss / static_cast<double>(finite_means.size() - 1))
                                : 0.0;
  }

  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<ExtendedReal> pooled;
    for (std::size_t h = 0; h < groups; ++h) {
      if (h == g || starts[h] != starts[g]) continue;
      const auto v = group_values(h);
      pooled.insert(pooled.end(), v.begin(), v.end());
    }
    if (pooled.empty()) continue;
    ++report.comparisons;
    const EstimateCI& own = report.groups[g].estimate;
    const EstimateCI rest = summarize(pooled, n);
    bool agree = false;
    if (own.mean.is_minus_infinity() || rest.mean.is_minus_infinity()) {
      agree = own.mean.is_minus_infinity() && rest.mean.is_minus_infinity();
    } else {
      const double combined = std::hypot(own.std_error, rest.std_error);
      const double diff = std::abs(own.mean.value() - rest.mean.value());
      agree = diff <= 3.0 * combined + 1e-12 * std::max(1.0, std::abs(rest.mean.value()));
    }
    if (!agree) ++report.failures;
  }
  report.pass = report.failures == 0;
  return report;
}

std::vector<UniformGrowthRow> uniform_growth(const CocycleModel& model, std::size_t k,
                                             std::size_t n_max, const ExactOptions& options) {
  check_k(model, k, "uniform_growth");
  if (n_max == 0) throw ParameterError("uniform_growth: n_max must be positive");
  std::vector<UniformGrowthRow> rows;
  ExtendedReal running;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto values = exact_conditional_sup(model, n, k, options);
    ExtendedReal m = ExtendedReal::minus_infinity();
    for (const auto& v : values) m = max(m, v.value);
    UniformGrowthRow row;
    row.max_value = {n, m, HorizonKind::uniform_max};
    row.per_step = m / static_cast<double>(n);
    running = n == 1 ? row.per_step : min(running, row.per_step);
    row.running_inf = running;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lyap
