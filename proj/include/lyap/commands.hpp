#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "lyap/config.hpp"
#include "lyap/estimators.hpp"
#include "lyap/extended_real.hpp"

namespace lyap {

/// Command-line values that take precedence over the configuration file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

RunConfig apply_overrides(RunConfig config, const Overrides& overrides);

/// {"value": x, "minus_infinity": false} or {"value": "-inf", "minus_infinity": true}
nlohmann::json extended_json(const ExtendedReal& x);
nlohmann::json estimate_json(const EstimateCI& e);

/// Result documents: {command, config, fingerprint, seed, result, meta}.
/// Everything outside "meta" is a pure function of (config, seed).
nlohmann::json run_spectrum(const RunConfig& config);
nlohmann::json run_oracle_compare(const RunConfig& config);
nlohmann::json run_ulam_verify(const RunConfig& config);
nlohmann::json run_convergence(const RunConfig& config);

/// Dispatch on `command` (spectrum, oracle, ulam, convergence).
nlohmann::json run_command(const std::string& command, const RunConfig& config);

/// CSV rendering of a result document. Convergence documents use the header
/// n,estimate,stderr,inf_flag.
std::string to_csv(const nlohmann::json& doc);
/// Uniform-growth table of a convergence document (empty when it was skipped).
std::string uniform_csv(const nlohmann::json& doc);

/// Writes the document in the configured format to output.path (or stdout).
void write_result(const nlohmann::json& doc, const RunConfig& config);

}  // namespace lyap
