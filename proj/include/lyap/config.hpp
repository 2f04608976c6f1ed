#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lyap/matrix.hpp"
#include "lyap/model.hpp"

namespace lyap {

struct KernelSpec {
  enum class Kind { bernoulli, markov, place_dependent, edge };
  Kind kind = Kind::bernoulli;
  std::vector<double> p;            // bernoulli
  Matrix rows;                      // markov, edge
  std::vector<Matrix> per_state;    // place_dependent, one per x

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Model tables in canonical (fully expanded) form.
struct ModelSpec {
  std::size_t dim = 0;
  std::size_t symbols = 0;
  std::size_t states = 1;
  /// Vertex: index t * states + x. Edge: (t * symbols + s) * states + x.
  std::vector<Matrix> matrices;
  std::vector<std::size_t> maps;
  KernelSpec kernel;
  std::optional<std::vector<double>> nu;

  bool is_edge() const { return kernel.kind == KernelSpec::Kind::edge; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct TaskSpec {
  std::string command = "spectrum";
  std::vector<std::size_t> k;  // empty: every k = 1..d
  std::size_t n = 1000;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::string method = "norm";
  std::size_t inner = 8;
  std::size_t burn = 1000;
  std::size_t workers = 1;
  bool bias_diagnostic = false;
  // oracle / convergence
  std::size_t n_max = 8;
  double budget = 1e7;
  std::vector<std::size_t> horizons;
  // ulam
  std::size_t grid_m = 200;
  std::size_t samples_per_cell = 1;
  std::size_t potential_samples = 1;
  double grid_slack = 5.0;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct OutputSpec {
  std::string path;  // empty: standard output
  std::string format = "json";
  std::string uniform_path;  // convergence: optional uniform-growth CSV

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  ModelSpec model;
  TaskSpec task;
  OutputSpec output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Validates and expands a configuration document. Throws ConfigError with
/// the JSON path of the offending field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Canonical document; parse_config(emit_config(c)) == c.
nlohmann::json emit_config(const RunConfig& config);

/// git-style blob hash (SHA-1 of "blob <size>\0<canonical json>").
std::string fingerprint(const nlohmann::json& doc);

CocycleModel to_vertex_model(const ModelSpec& spec);
/// Throws ParameterError unless the spec describes an edge model.
EdgeModel to_edge_model(const ModelSpec& spec);
/// Vertex model for any spec; edge specs are lifted to T x T.
CocycleModel to_cocycle(const ModelSpec& spec);

}  // namespace lyap
