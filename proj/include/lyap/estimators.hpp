#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/extended_real.hpp"
#include "lyap/model.hpp"
#include "lyap/noise.hpp"
#include "lyap/projective.hpp"

namespace lyap {

/// Monte Carlo estimate of a growth rate. When any trial collapsed to -inf the
/// mean is -inf, std_error is 0 and the collapsed share is recorded.
struct EstimateCI {
  ExtendedReal mean;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::size_t horizon = 0;
  double minus_infinity_fraction = 0.0;
};

/// Sample mean and std / sqrt(count) of already normalized per-trial values.
EstimateCI summarize(std::span<const ExtendedReal> samples, std::size_t horizon);

struct McParams {
  std::size_t n = 1000;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// (1/n) log ||wedge^k F^n|| averaged over paths with z0 ~ nu.
EstimateCI estimate_sum_top_k(const CocycleModel& model, std::size_t k, const McParams& params);

/// (1/n) log m(wedge^k F^n), the bottom conorm, on the same paths as
/// estimate_sum_top_k with equal parameters.
EstimateCI estimate_sum_bottom_k(const CocycleModel& model, std::size_t k,
                                 const McParams& params);

struct TopBottom {
  EstimateCI top;
  EstimateCI bottom;
};
/// Both of the above from a single pass.
TopBottom estimate_top_and_bottom(const CocycleModel& model, std::size_t k,
                                  const McParams& params);

struct DirectionSupParams {
  std::size_t n = 1000;
  /// Replicates with their own z0 ~ nu.
  std::size_t outer = 50;
  /// Paths per replicate, shared by every candidate direction.
  std::size_t inner = 8;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// Unit vectors of length C(d, k) tried besides the frame e_I.
  std::vector<std::vector<double>> extra_directions;
};

struct DirectionSupResult {
  /// Sup over the frame directions only.
  EstimateCI frame;
  /// Sup over frame and extra directions together (equal to `frame` without extras).
  EstimateCI combined;
};

/// Per replicate: the best direction is picked on half of the inner paths and
/// scored on the other half (and vice versa), so the maximum is not biased
/// upward by noise. With inner == 1 the plain maximum is used.
DirectionSupResult estimate_direction_sup(const CocycleModel& model, std::size_t k,
                                          const DirectionSupParams& params);

/// (1/n) log-gain of one Gaussian starting direction along one long path.
/// Equals Lambda_k only for generic v0; a v0 inside a slower invariant
/// subspace undershoots.
ExtendedReal estimate_tracking(const CocycleModel& model, std::size_t k, std::size_t n,
                               std::uint64_t seed);
/// Same with a caller-chosen starting direction.
ExtendedReal estimate_tracking(const CocycleModel& model, std::size_t k, std::size_t n,
                               std::uint64_t seed, const ProjState& v0);

struct ParticleParams {
  std::size_t particles = 64;
  std::size_t burn = 1000;
  std::size_t avg = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// eta_i: particles whose current symbol is i, equally weighted.
struct StationaryMeasureVector {
  std::vector<std::vector<ProjState>> clouds;
};

struct ParticleResult {
  StationaryMeasureVector eta;
  EstimateCI lambda;
  std::size_t cemetery_hits = 0;
  /// "unique_lift" when independent starting directions driven by the same
  /// noise merged, "lower_bound" otherwise.
  std::string lift_tag;
};

/// Joint chain (t_n, [v_n]) for matrices depending on the symbol only.
/// Throws AmbiguityError when P has several closed classes.
ParticleResult furstenberg_particles(const std::vector<Matrix>& matrices, const FiniteKernel& p_kernel,
                                     std::span<const double> p, std::size_t k,
                                     const ParticleParams& params);

enum class Method { norm, direction_sup, tracking, furstenberg };

const char* method_name(Method m);
/// Throws ParameterError for unknown names.
Method parse_method(const std::string& name);

struct SpectrumParams {
  Method method = Method::norm;
  std::size_t n = 1000;
  std::size_t trials = 100;
  /// direction_sup: paths per replicate (trials is the replicate count).
  std::size_t inner = 8;
  /// furstenberg: trials is the particle count, n the averaging length.
  std::size_t burn = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// Also estimate at n / 2 and report |Lambda(n) - Lambda(n/2)|.
  bool bias_diagnostic = false;
};

struct SpectrumEntry {
  std::size_t k = 0;
  EstimateCI Lambda;
  ExtendedReal lambda;
  std::optional<double> bias_spread;
};

struct SpectrumReport {
  Method method = Method::norm;
  std::uint64_t seed = 0;
  std::vector<SpectrumEntry> entries;
  /// lambda_k <= lambda_{k-1} + 2 (se_k + se_{k-1}) for every k.
  bool ordering_consistent = true;
  /// Only set for the furstenberg method.
  std::string lift_tag;
};

/// One Lambda_k with the estimator selected by params.method at horizon params.n.
EstimateCI estimate_Lambda(const CocycleModel& model, std::size_t k, const SpectrumParams& params);

/// Lambda_k for k = 1..d with a common seed for every k, and
/// lambda_k = Lambda_k - Lambda_{k-1} (-inf when Lambda_{k-1} is -inf).
SpectrumReport spectrum(const CocycleModel& model, const SpectrumParams& params);

/// lambda_k from a list of Lambda_k, k = 1..d.
std::vector<ExtendedReal> exponents_from_sums(std::span<const ExtendedReal> sums);

struct DependenceGroup {
  ChainState start;
  EstimateCI estimate;
};

struct DependenceReport {
  bool skipped = false;
  std::string warning;
  bool pass = true;
  std::vector<DependenceGroup> groups;
  /// Mean over groups of the per-group trial standard deviation.
  double within_group_spread = 0.0;
  /// Standard deviation of the group means.
  double across_group_spread = 0.0;
  std::size_t comparisons = 0;
  std::size_t failures = 0;
};

/// Groups draw z0 ~ nu and run independent tail paths from it. Each group is
/// compared with the pooled groups that share its z0 (leave one out) at
/// 3 combined standard errors. Skipped when the driving chain has several
/// closed classes.
DependenceReport pointwise_dependence_check(const CocycleModel& model, std::size_t k,
                                            std::size_t n, std::size_t groups,
                                            std::size_t trials_per_group, std::uint64_t seed,
                                            std::size_t workers = 1);

struct UniformGrowthRow {
  HorizonValue max_value;  // max over z of the exact per-state supremum
  ExtendedReal per_step;   // max_value / n
  ExtendedReal running_inf;
};

/// n = 1..n_max of max_z phi_n(z), with (1/n) max and its running infimum.
std::vector<UniformGrowthRow> uniform_growth(const CocycleModel& model, std::size_t k,
                                             std::size_t n_max, const ExactOptions& options = {});

}  // namespace lyap
