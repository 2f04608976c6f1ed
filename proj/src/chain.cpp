#include "lyap/chain.hpp"

#include <cmath>
#include <string>

#include "lyap/errors.hpp"

namespace lyap {

namespace {

constexpr double kLawResidualTolerance = 1e-10;

void check_supplied_law(const StationaryLaw& nu, const Matrix& q, const char* who) {
  const double res = stationarity_residual(nu.weights(), q);
  if (res > kLawResidualTolerance) {
    throw ParameterError(std::string(who) +
                         ": supplied stationary law is not invariant (residual " +
                         std::to_string(res) + ")");
  }
}

}  // namespace

ChainState driving_step(const ChainState& z, const CocycleModel& model, Rng& rng) {
  const std::size_t x_next = model.map(z.t, z.x);
  std::size_t s;
  if (const auto* sampler = std::get_if<SamplerKernel>(&model.kernel)) {
    s = sampler->draw(z.t, x_next, rng);
    if (s >= model.symbols) throw ParameterError("driving_step: sampler returned bad symbol");
  } else {
    s = sample_index(model.kernel_row(z.t, x_next), rng);
  }
  return {s, x_next};
}

Matrix driving_kernel(const CocycleModel& model) {
  const std::size_t n = model.phase_space_size();
  Matrix q(n, n);
  for (std::size_t t = 0; t < model.symbols; ++t) {
    for (std::size_t x = 0; x < model.states; ++x) {
      const std::size_t x_next = model.map(t, x);
      const auto row = model.kernel_row(t, x_next);
      for (std::size_t s = 0; s < model.symbols; ++s)
        q(model.index(t, x), model.index(s, x_next)) += row[s];
    }
  }
  return q;
}

Matrix driving_kernel(const EdgeModel& model) {
  const std::size_t n = model.symbols * model.states;
  Matrix q(n, n);
  for (std::size_t t = 0; t < model.symbols; ++t)
    for (std::size_t x = 0; x < model.states; ++x)
      for (std::size_t s = 0; s < model.symbols; ++s)
        q(t * model.states + x, s * model.states + model.map(t, s, x)) += model.kernel(t, s);
  return q;
}

StationaryLaw stationary_law_solve(const CocycleModel& model) {
  model.validate();
  if (!model.has_finite_kernel()) {
    throw ParameterError("stationary_law_solve: sampler kernels are not supported");
  }
  return StationaryLaw(model.symbols, model.states, stationary_vector(driving_kernel(model)));
}

StationaryLaw stationary_law_solve(const EdgeModel& model) {
  model.validate();
  return StationaryLaw(model.symbols, model.states, stationary_vector(driving_kernel(model)));
}

StationaryLaw resolve_stationary_law(const CocycleModel& model) {
  if (!model.nu) return stationary_law_solve(model);
  if (model.has_finite_kernel()) {
    check_supplied_law(*model.nu, driving_kernel(model), "resolve_stationary_law");
  }
  return *model.nu;
}

StationaryLaw resolve_stationary_law(const EdgeModel& model) {
  if (!model.nu) return stationary_law_solve(model);
  check_supplied_law(*model.nu, driving_kernel(model), "resolve_stationary_law");
  return *model.nu;
}

CocycleModel edge_to_vertex(const EdgeModel& model) {
  model.validate();
  const std::size_t t_count = model.symbols;
  const std::size_t te = t_count * t_count;
  const StationaryLaw nu = resolve_stationary_law(model);

  CocycleModel out;
  out.dim = model.dim;
  out.symbols = te;
  out.states = model.states;
  out.next_state.resize(te * model.states);
  out.matrices.resize(te * model.states);
  Matrix qe(te, te);
  std::vector<double> nue(te * model.states, 0.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t s = 0; s < t_count; ++s) {
      const std::size_t e = t * t_count + s;
      for (std::size_t x = 0; x < model.states; ++x) {
        out.next_state[e * model.states + x] = model.map(t, s, x);
        out.matrices[e * model.states + x] = model.matrix(t, s, x);
        nue[e * model.states + x] = nu(t, x) * model.kernel(t, s);
      }
      for (std::size_t r = 0; r < t_count; ++r) qe(e, s * t_count + r) = model.kernel(s, r);
    }
  }
  out.kernel = FiniteKernel(std::move(qe));
  double total = 0.0;
  for (double w : nue) total += w;
  for (double& w : nue) w /= total;
  out.nu = StationaryLaw(te, model.states, std::move(nue));
  out.validate();
  return out;
}

std::vector<std::size_t> simulate_edge_path(const EdgeModel& model, const ChainState& z0,
                                            std::size_t n, Rng& rng) {
  std::vector<std::size_t> path;
  path.reserve(n + 1);
  path.push_back(z0.t);
  for (std::size_t i = 0; i < n; ++i) path.push_back(sample_index(model.kernel.row(path.back()), rng));
  return path;
}

std::vector<std::size_t> edge_coding(const std::vector<std::size_t>& path, std::size_t symbols) {
  std::vector<std::size_t> coded;
  if (path.size() < 2) return coded;
  coded.reserve(path.size() - 1);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) coded.push_back(path[i] * symbols + path[i + 1]);
  return coded;
}

Matrix edge_product(const EdgeModel& model, std::size_t x0, const std::vector<std::size_t>& path) {
  Matrix prod = Matrix::identity(model.dim);
  std::size_t x = x0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    prod = model.matrix(path[i], path[i + 1], x) * prod;
    x = model.map(path[i], path[i + 1], x);
  }
  return prod;
}

Matrix vertex_product(const CocycleModel& model, std::size_t x0,
                      const std::vector<std::size_t>& symbols) {
  Matrix prod = Matrix::identity(model.dim);
  std::size_t x = x0;
  for (std::size_t t : symbols) {
    prod = model.matrix(t, x) * prod;
    x = model.map(t, x);
  }
  return prod;
}

}  // namespace lyap
