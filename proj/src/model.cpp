#include "lyap/model.hpp"

#include <string>

#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"

namespace lyap {

namespace {

void validate_tables(std::size_t dim, std::size_t entries, std::size_t states,
                     const std::vector<std::size_t>& next_state,
                     const std::vector<Matrix>& matrices, const char* who) {
  if (dim == 0 || dim > kMaxFiberDimension) {
    throw ParameterError(std::string(who) + ": fiber dimension must be in [1, 16]");
  }
  if (next_state.size() != entries || matrices.size() != entries) {
    throw ParameterError(std::string(who) + ": map/matrix tables are not total");
  }
  for (std::size_t x : next_state) {
    if (x >= states) throw ParameterError(std::string(who) + ": map value out of range");
  }
  for (const auto& m : matrices) {
    if (m.rows() != dim || m.cols() != dim) {
      throw ParameterError(std::string(who) + ": every matrix must be d x d");
    }
    if (!m.all_finite()) throw ParameterError(std::string(who) + ": non-finite matrix entry");
  }
}

}  // namespace

bool CocycleModel::has_finite_kernel() const {
  return !std::holds_alternative<SamplerKernel>(kernel);
}

std::span<const double> CocycleModel::kernel_row(std::size_t t, std::size_t x) const {
  if (const auto* q = std::get_if<FiniteKernel>(&kernel)) return q->row(t);
  if (const auto* pq = std::get_if<PlaceDependentKernel>(&kernel)) return pq->at(x).row(t);
  throw ParameterError("kernel_row: sampler kernels have no explicit rows");
}

void CocycleModel::validate() const {
  if (symbols == 0 || states == 0) throw ParameterError("CocycleModel: empty T or X");
  validate_tables(dim, symbols * states, states, next_state, matrices, "CocycleModel");
  if (const auto* q = std::get_if<FiniteKernel>(&kernel)) {
    if (q->states() != symbols) throw ParameterError("CocycleModel: kernel alphabet != |T|");
  } else if (const auto* pq = std::get_if<PlaceDependentKernel>(&kernel)) {
    if (pq->symbols() != symbols || pq->states() != states) {
      throw ParameterError("CocycleModel: place-dependent kernel shape mismatch");
    }
  } else if (!std::get<SamplerKernel>(kernel).draw) {
    throw ParameterError("CocycleModel: sampler kernel has no draw function");
  }
  if (nu && (nu->symbols() != symbols || nu->states() != states)) {
    throw ParameterError("CocycleModel: stationary law shape mismatch");
  }
}

CocycleModel CocycleModel::scaled(double c) const {
  if (!(c > 0.0)) throw ParameterError("CocycleModel::scaled: c must be > 0");
  CocycleModel out = *this;
  for (auto& m : out.matrices) m *= c;
  return out;
}

CocycleModel CocycleModel::matrix_products(std::vector<Matrix> per_symbol, NoiseKernel kernel,
                                           std::optional<StationaryLaw> nu) {
  CocycleModel m;
  if (per_symbol.empty()) throw ParameterError("matrix_products: empty alphabet");
  m.dim = per_symbol.front().rows();
  m.symbols = per_symbol.size();
  m.states = 1;
  m.next_state.assign(m.symbols, 0);
  m.matrices = std::move(per_symbol);
  m.kernel = std::move(kernel);
  m.nu = std::move(nu);
  m.validate();
  return m;
}

void EdgeModel::validate() const {
  if (symbols == 0 || states == 0) throw ParameterError("EdgeModel: empty T or X");
  validate_tables(dim, symbols * symbols * states, states, next_state, matrices, "EdgeModel");
  if (kernel.states() != symbols) throw ParameterError("EdgeModel: kernel alphabet != |T|");
  if (nu && (nu->symbols() != symbols || nu->states() != states)) {
    throw ParameterError("EdgeModel: stationary law shape mismatch");
  }
}

}  // namespace lyap
