#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lyap/extended_real.hpp"
#include "lyap/matrix.hpp"
#include "lyap/model.hpp"
#include "lyap/noise.hpp"

namespace lyap {

/// Partition of the projective line [0, pi) into m arcs of width pi/m.
/// Cell j is centred at j pi/m, so cell 0 wraps around the identification
/// pi ~ 0. An optional cemetery cell (index m) receives collapsed directions.
struct UlamGrid {
  std::size_t m = 0;
  bool cemetery_cell = false;

  std::size_t cells() const { return m + (cemetery_cell ? 1 : 0); }
  double width() const;
  double center(std::size_t j) const;
  std::size_t cell_of(double theta) const;
  /// Equispaced midpoints of the S sub-arcs of cell j, in [0, pi).
  std::vector<double> samples(std::size_t j, std::size_t samples_per_cell) const;
};

/// Throws ParameterError when m < 2.
UlamGrid make_grid(std::size_t m, bool cemetery_cell);
/// Cemetery cell only when some F(t, x) is singular.
UlamGrid make_grid(const CocycleModel& model, std::size_t m);

/// Row-stochastic matrix over (z, cell), index z * grid.cells() + cell.
struct TransferMatrix {
  UlamGrid grid;
  std::size_t phase_states = 0;  // |Z|
  std::size_t samples_per_cell = 0;
  Matrix entries;

  std::size_t size() const { return entries.rows(); }
  std::size_t index(std::size_t z, std::size_t cell) const { return z * grid.cells() + cell; }
};

/// Discretized lifted operator for d = 2, k = 1: every sample angle of (z, c)
/// is pushed by F(t, x) and spread over the next states (s, f(t, x)) with
/// weight Q_{f(t,x)}(t, s). Throws UnsupportedDimensionError unless d = 2.
TransferMatrix build_transfer(const CocycleModel& model, const UlamGrid& grid,
                              std::size_t samples_per_cell);

/// Cell average of log |F(t, x) v| over the sample angles; -inf on the
/// cemetery cell and on any cell with a collapsing sample.
std::vector<ExtendedReal> potential_vector(const CocycleModel& model, const UlamGrid& grid,
                                           std::size_t samples_per_cell);

enum class Sense { max, min };

struct LiftSolution {
  std::vector<double> measure;
  ExtendedReal value;
  Sense sense = Sense::max;
  /// ||mu^T H - mu^T||_1
  double invariance_residual = 0.0;
  /// max_z |sum_cells mu(z, .) - nu(z)|
  double marginal_residual = 0.0;
  /// Mass on cells whose potential is -inf.
  double forbidden_mass = 0.0;
  std::size_t m = 0;
  std::size_t samples_per_cell = 0;
  /// Closed classes of H, and how many of them carry mass in the optimum.
  std::size_t classes = 0;
  std::size_t active_classes = 0;
  std::size_t iterations = 0;
};

/// Optimizes c^T mu over H-invariant probability vectors whose base marginal
/// is nu. Invariant vectors of H are exactly the convex combinations of the
/// stationary laws of its closed classes, so the program is solved over class
/// weights (one column per class, one row per z). Cells with potential -inf
/// never carry mass in the maximum; the minimum is -inf when some invariant
/// lift puts mass there. Throws InfeasibleError with the constraint slacks
/// when no invariant lift exists.
LiftSolution optimize_invariant_lift(const TransferMatrix& h, const StationaryLaw& nu,
                                     std::span<const ExtendedReal> c, Sense sense);

struct IntertwiningReport {
  double max_spread = 0.0;
  std::size_t vectors = 0;
  bool pass = false;
};

/// Applies H to fiberwise-constant vectors (each z indicator, all-ones and
/// `random_vectors` random ones) and reports the largest spread of the image
/// within one fiber. Passes at 1e-8.
IntertwiningReport verify_intertwining(const TransferMatrix& h, std::size_t random_vectors = 100,
                                       std::uint64_t seed = 1);

}  // namespace lyap
