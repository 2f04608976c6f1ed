#pragma once

#include <cstddef>
#include <vector>

#include "lyap/extended_real.hpp"
#include "lyap/matrix.hpp"
#include "lyap/model.hpp"
#include "lyap/projective.hpp"
#include "lyap/rng.hpp"

namespace lyap {

/// Precomputed k-th exterior powers of every F(t, x) of a model.
class CompoundCocycle {
 public:
  CompoundCocycle(const CocycleModel& model, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  /// C(d, k)
  std::size_t dimension() const noexcept { return dimension_; }
  const Matrix& at(std::size_t t, std::size_t x) const { return compounds_[t * states_ + x]; }
  const CocycleModel& model() const noexcept { return *model_; }

 private:
  const CocycleModel* model_;
  std::size_t k_;
  std::size_t dimension_;
  std::size_t states_;
  std::vector<Matrix> compounds_;
};

/// The n driving-chain states z_0 .. z_{n-1} visited from z0. Consumes the
/// generator exactly as iterate_norms / iterate_direction do.
std::vector<ChainState> sample_path(const CocycleModel& model, ChainState z0, std::size_t n,
                                    Rng& rng);

/// log ||wedge^k F^n|| along one simulated path (spectral norm, not divided by n).
ExtendedReal iterate_norms(const CocycleModel& model, ChainState z0, std::size_t n,
                           std::size_t k, Rng& rng);
ExtendedReal iterate_norms(const CompoundCocycle& cocycle, ChainState z0, std::size_t n,
                           Rng& rng);

/// Along one simulated path: log ||wedge^k F^n|| (top) and
/// log m(wedge^k F^n) (bottom conorm), both un-normalized. The bottom value is
/// computed from the product of inverses, so it stays accurate for long paths;
/// it is -inf as soon as one factor is singular.
struct NormPair {
  ExtendedReal top;
  ExtendedReal bottom;
};
NormPair iterate_norm_pair(const CompoundCocycle& cocycle, ChainState z0, std::size_t n,
                           Rng& rng);

/// Sum of projective log-gains of v0 along one simulated path, i.e.
/// log(||wedge^k F^n v0|| / ||v0||); -inf on cemetery absorption.
ExtendedReal iterate_direction(const CocycleModel& model, ChainState z0, const ProjState& v0,
                               std::size_t n, std::size_t k, Rng& rng);

/// Simultaneous version over several starting directions sharing one path.
std::vector<ExtendedReal> iterate_directions(const CompoundCocycle& cocycle, ChainState z0,
                                             const std::vector<ProjState>& directions,
                                             std::size_t n, Rng& rng);

enum class HorizonKind { mean_log_norm, conditional_sup_direction, uniform_max };

struct HorizonValue {
  std::size_t n = 0;
  ExtendedReal value;
  HorizonKind kind = HorizonKind::mean_log_norm;
};

enum class OperatorNorm { spectral, l1 };

struct ExactOptions {
  /// Extra unit directions (length C(d, k)) for the per-state supremum.
  std::vector<std::vector<double>> extra_directions;
  OperatorNorm norm = OperatorNorm::spectral;
  /// Maximum number of enumerated paths per starting state times |X|.
  double budget = 1e7;
};

struct FiniteHorizonResult {
  /// a_n = sum_z nu(z) E[log ||wedge^k F^n|| | z0 = z]
  HorizonValue a_n;
  /// Per z: max over candidate directions of E[log gain | z0 = z, v]
  std::vector<HorizonValue> per_state;
  /// Per z: E[log ||wedge^k F^n|| | z0 = z]
  std::vector<HorizonValue> per_state_norm;
  /// Per z: max over the frame directions e_I only.
  std::vector<HorizonValue> per_state_frame;
};

/// Exact finite-horizon expectations by enumerating every noise path with its
/// Markov weight. Throws BudgetError when |T|^(n-1) |X| exceeds the budget.
FiniteHorizonResult exact_finite_horizon(const CocycleModel& model, std::size_t n,
                                         std::size_t k, const ExactOptions& options = {});

/// Per-state conditional suprema only (no stationary law needed): for every
/// z, max over the candidate directions of E[log gain | z0 = z, v].
std::vector<HorizonValue> exact_conditional_sup(const CocycleModel& model, std::size_t n,
                                                std::size_t k, const ExactOptions& options = {});

/// Same quantity for an edge model, enumerating edge paths directly
/// (independent of the vertex lift).
FiniteHorizonResult exact_finite_horizon(const EdgeModel& model, std::size_t n, std::size_t k,
                                         const ExactOptions& options = {});

}  // namespace lyap
