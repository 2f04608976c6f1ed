#pragma once

#include <cstddef>
#include <vector>

#include "lyap/model.hpp"
#include "lyap/noise.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// One step of the driving chain on Z: x' = f(t, x), s ~ Q_{x'}(t, .).
ChainState driving_step(const ChainState& z, const CocycleModel& model, Rng& rng);

/// The |Z| x |Z| transition matrix q(z, z') of the driving chain.
Matrix driving_kernel(const CocycleModel& model);
/// Edge driving chain: (t, x) -> (s, f(t, s, x)) with probability Q(t, s).
Matrix driving_kernel(const EdgeModel& model);

/// Stationary law of the driving chain. Throws AmbiguityError when the chain
/// has several closed classes and ParameterError for sampler kernels.
/// Ignores model.nu.
StationaryLaw stationary_law_solve(const CocycleModel& model);
StationaryLaw stationary_law_solve(const EdgeModel& model);

/// model.nu when supplied (checked for stationarity within 1e-10), otherwise
/// the solved law.
StationaryLaw resolve_stationary_law(const CocycleModel& model);
StationaryLaw resolve_stationary_law(const EdgeModel& model);

/// Vertex model over T^e = T x T (symbol (t, s) at index t * |T| + s) with
/// Q^e((t, s), (s, r)) = Q(s, r) and nu^e((t, s), x) = nu(t, x) Q(t, s).
CocycleModel edge_to_vertex(const EdgeModel& model);

/// Simulated edge noise path omega_0 .. omega_n starting from z0 = (omega_0, x0).
std::vector<std::size_t> simulate_edge_path(const EdgeModel& model, const ChainState& z0,
                                            std::size_t n, Rng& rng);

/// Canonical coding (omega_i) -> ((omega_0, omega_1), (omega_1, omega_2), ...).
std::vector<std::size_t> edge_coding(const std::vector<std::size_t>& path, std::size_t symbols);

/// F^n = F(w_{n-1}, w_n, x_{n-1}) ... F(w_0, w_1, x_0) along a given edge path.
Matrix edge_product(const EdgeModel& model, std::size_t x0, const std::vector<std::size_t>& path);

/// F^n = F(t_{n-1}, x_{n-1}) ... F(t_0, x_0) along a given vertex symbol path.
Matrix vertex_product(const CocycleModel& model, std::size_t x0,
                      const std::vector<std::size_t>& symbols);

}  // namespace lyap
