#include "lyap/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "lyap/chain.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/errors.hpp"
#include "lyap/ulam.hpp"

namespace lyap {

using nlohmann::json;

RunConfig apply_overrides(RunConfig config, const Overrides& overrides) {
  if (overrides.seed) config.task.seed = *overrides.seed;
  if (overrides.workers) {
    if (*overrides.workers == 0) throw ConfigError("--workers", "must be positive");
    config.task.workers = *overrides.workers;
  }
  if (overrides.out) config.output.path = *overrides.out;
  if (overrides.format) {
    if (*overrides.format != "json" && *overrides.format != "csv") {
      throw ConfigError("--format", "expected json or csv");
    }
    config.output.format = *overrides.format;
  }
  return config;
}

json extended_json(const ExtendedReal& x) {
  if (x.is_minus_infinity()) return {{"value", "-inf"}, {"minus_infinity", true}};
  return {{"value", x.value()}, {"minus_infinity", false}};
}

json estimate_json(const EstimateCI& e) {
  return {{"mean", extended_json(e.mean)},
          {"stderr", e.std_error},
          {"trials", e.trials},
          {"horizon", e.horizon},
          {"minus_infinity_fraction", e.minus_infinity_fraction}};
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json wrap(const std::string& command, const RunConfig& config,
          const std::function<json()>& body) {
  const auto start = std::chrono::steady_clock::now();
  json result = body();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  const json echo = emit_config(config);
  return {{"command", command},
          {"config", echo},
          {"fingerprint", fingerprint(echo)},
          {"seed", config.task.seed},
          {"result", std::move(result)},
          {"meta", {{"timestamp", utc_timestamp()}, {"wall_clock_seconds", elapsed.count()}}}};
}

std::vector<std::size_t> requested_k(const RunConfig& config) {
  if (!config.task.k.empty()) return config.task.k;
  std::vector<std::size_t> all;
  for (std::size_t k = 1; k <= config.model.dim; ++k) all.push_back(k);
  return all;
}

SpectrumParams spectrum_params(const TaskSpec& t) {
  SpectrumParams p;
  p.method = parse_method(t.method);
  p.n = t.n;
  p.trials = t.trials;
  p.inner = t.inner;
  p.burn = t.burn;
  p.seed = t.seed;
  p.workers = t.workers;
  p.bias_diagnostic = t.bias_diagnostic;
  return p;
}

// Exact horizon values for a spec, enumerating edge paths directly for edge models.
FiniteHorizonResult exact_for(const ModelSpec& spec, const CocycleModel& lifted, std::size_t n,
                              std::size_t k, const ExactOptions& options) {
  if (spec.is_edge()) return exact_finite_horizon(to_edge_model(spec), n, k, options);
  return exact_finite_horizon(lifted, n, k, options);
}

std::string csv_number(const json& ext) {
  return ext.at("minus_infinity").get<bool>() ? "-inf" : ext.at("value").dump();
}

std::string inf_flag(const json& ext) {
  return ext.at("minus_infinity").get<bool>() ? "1" : "0";
}

}  // namespace

json run_spectrum(const RunConfig& config) {
  return wrap("spectrum", config, [&] {
    const CocycleModel model = to_cocycle(config.model);
    const SpectrumReport report = spectrum(model, spectrum_params(config.task));
    const auto ks = requested_k(config);
    json entries = json::array();
    for (const auto& e : report.entries) {
      if (std::find(ks.begin(), ks.end(), e.k) == ks.end()) continue;
      json entry = {{"k", e.k}, {"Lambda", estimate_json(e.Lambda)}, {"lambda", extended_json(e.lambda)}};
      if (e.bias_spread) entry["bias_spread"] = *e.bias_spread;
      entries.push_back(std::move(entry));
    }
    json result = {{"method", method_name(report.method)},
                   {"seed", report.seed},
                   {"entries", entries},
                   {"ordering_consistent", report.ordering_consistent}};
    if (!report.lift_tag.empty()) result["lift_tag"] = report.lift_tag;
    return result;
  });
}

json run_oracle_compare(const RunConfig& config) {
  return wrap("oracle", config, [&] {
    const CocycleModel model = to_cocycle(config.model);
    const TaskSpec& t = config.task;
    ExactOptions options;
    options.budget = t.budget;
    json tables = json::array();
    bool all_pass = true;
    for (std::size_t k : requested_k(config)) {
      std::vector<ExtendedReal> a(t.n_max + 1, ExtendedReal(0.0));
      json rows = json::array();
      for (std::size_t n = 1; n <= t.n_max; ++n) {
        a[n] = exact_for(config.model, model, n, k, options).a_n.value;
        const ExtendedReal exact = a[n] / static_cast<double>(n);
        const EstimateCI mc = estimate_sum_top_k(model, k, {n, t.trials, t.seed, t.workers});
        json row = {{"n", n},
                    {"exact", extended_json(exact)},
                    {"estimate", estimate_json(mc)},
                    {"band", 3.0 * mc.std_error}};
        bool pass = false;
        if (exact.is_finite() && mc.mean.is_finite()) {
          const double diff = std::abs(exact.value() - mc.mean.value());
          row["diff"] = diff;
          pass = diff <= 3.0 * mc.std_error + 1e-12 * std::max(1.0, std::abs(exact.value()));
        } else {
          pass = exact.is_minus_infinity() && mc.mean.is_minus_infinity();
        }
        row["pass"] = pass;
        all_pass = all_pass && pass;
        rows.push_back(std::move(row));
      }
      // a_{n+m} <= a_n + a_m over the computed range
      double worst = -HUGE_VAL;
      std::size_t pairs = 0;
      for (std::size_t n = 1; n <= t.n_max; ++n) {
        for (std::size_t m = 1; n + m <= t.n_max; ++m) {
          if (!a[n + m].is_finite() || !a[n].is_finite() || !a[m].is_finite()) continue;
          worst = std::max(worst, a[n + m].value() - a[n].value() - a[m].value());
          ++pairs;
        }
      }
      const bool subadditive = pairs == 0 || worst <= 1e-9;
      all_pass = all_pass && subadditive;
      json sub = {{"pairs", pairs}, {"pass", subadditive}};
      if (pairs > 0) sub["max_excess"] = worst;
      tables.push_back({{"k", k}, {"rows", rows}, {"subadditivity", sub}});
    }
    return json{{"tables", tables}, {"pass", all_pass}};
  });
}

json run_ulam_verify(const RunConfig& config) {
  return wrap("ulam", config, [&] {
    const CocycleModel model = to_cocycle(config.model);
    const TaskSpec& t = config.task;
    for (std::size_t k : t.k) {
      if (k != 1) throw UnsupportedDimensionError("Ulam verification supports k = 1 only");
    }
    if (model.dim != 2) throw UnsupportedDimensionError("Ulam verification needs d = 2");
    const UlamGrid grid = make_grid(model, t.grid_m);
    const TransferMatrix h = build_transfer(model, grid, t.samples_per_cell);
    const auto c = potential_vector(model, grid, t.potential_samples);
    const StationaryLaw nu = resolve_stationary_law(model);
    const LiftSolution hi = optimize_invariant_lift(h, nu, c, Sense::max);
    const LiftSolution lo = optimize_invariant_lift(h, nu, c, Sense::min);
    const IntertwiningReport inter = verify_intertwining(h, 100, t.seed);
    const EstimateCI mc = estimate_sum_top_k(model, 1, {t.n, t.trials, t.seed, t.workers});

    auto lift_json = [](const LiftSolution& s) {
      return json{{"value", extended_json(s.value)},
                  {"invariance_residual", s.invariance_residual},
                  {"marginal_residual", s.marginal_residual},
                  {"forbidden_mass", s.forbidden_mass},
                  {"classes", s.classes},
                  {"active_classes", s.active_classes},
                  {"iterations", s.iterations}};
    };
    const double slack = 3.0 * mc.std_error + t.grid_slack / static_cast<double>(t.grid_m);
    bool sandwich = false;
    if (mc.mean.is_finite()) {
      const double v = mc.mean.value();
      const bool below = hi.value.is_finite() && v <= hi.value.value() + slack;
      const bool above = lo.value.is_minus_infinity() || lo.value.value() - slack <= v;
      sandwich = below && above;
    } else {
      sandwich = lo.value.is_minus_infinity();
    }
    return json{{"grid",
                 {{"m", grid.m},
                  {"samples_per_cell", t.samples_per_cell},
                  {"potential_samples", t.potential_samples},
                  {"cemetery_cell", grid.cemetery_cell}}},
                {"max", lift_json(hi)},
                {"min", lift_json(lo)},
                {"intertwining",
                 {{"max_spread", inter.max_spread}, {"vectors", inter.vectors}, {"pass", inter.pass}}},
                {"estimate", estimate_json(mc)},
                {"sandwich", {{"slack", slack}, {"pass", sandwich}}}};
  });
}

json run_convergence(const RunConfig& config) {
  return wrap("convergence", config, [&] {
    const CocycleModel model = to_cocycle(config.model);
    const TaskSpec& t = config.task;
    const std::size_t k = t.k.empty() ? 1 : t.k.front();
    std::vector<std::size_t> horizons = t.horizons;
    if (horizons.empty()) {
      for (std::size_t div : {8, 4, 2, 1}) horizons.push_back(std::max<std::size_t>(1, t.n / div));
      horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    }
    SpectrumParams params = spectrum_params(t);
    json series = json::array();
    for (std::size_t n : horizons) {
      params.n = n;
      const EstimateCI e = estimate_Lambda(model, k, params);
      series.push_back({{"n", n}, {"estimate", extended_json(e.mean)}, {"stderr", e.std_error}});
    }
    json result = {{"k", k}, {"method", t.method}, {"series", series}};
    ExactOptions options;
    options.budget = t.budget;
    try {
      json rows = json::array();
      for (const auto& r : uniform_growth(model, k, t.n_max, options)) {
        rows.push_back({{"n", r.max_value.n},
                        {"max_value", extended_json(r.max_value.value)},
                        {"per_step", extended_json(r.per_step)},
                        {"running_inf", extended_json(r.running_inf)}});
      }
      result["uniform_growth"] = rows;
    } catch (const BudgetError& e) {
      result["uniform_growth"] = {{"skipped", e.what()}, {"required", e.required()}};
    } catch (const ParameterError& e) {
      result["uniform_growth"] = {{"skipped", e.what()}};
    }
    return result;
  });
}

json run_command(const std::string& command, const RunConfig& config) {
  if (command == "spectrum") return run_spectrum(config);
  if (command == "oracle") return run_oracle_compare(config);
  if (command == "ulam") return run_ulam_verify(config);
  if (command == "convergence") return run_convergence(config);
  throw ConfigError("/task/command", "unknown command '" + command + "'");
}

std::string to_csv(const json& doc) {
  std::ostringstream out;
  const std::string command = doc.at("command");
  const json& r = doc.at("result");
  if (command == "convergence") {
    out << "n,estimate,stderr,inf_flag\n";
    for (const auto& row : r.at("series")) {
      out << row.at("n").get<std::size_t>() << ',' << csv_number(row.at("estimate")) << ','
          << row.at("stderr").dump() << ',' << inf_flag(row.at("estimate")) << '\n';
    }
  } else if (command == "spectrum") {
    out << "k,Lambda,stderr,lambda,inf_flag\n";
    for (const auto& e : r.at("entries")) {
      const json& mean = e.at("Lambda").at("mean");
      out << e.at("k").get<std::size_t>() << ',' << csv_number(mean) << ','
          << e.at("Lambda").at("stderr").dump() << ',' << csv_number(e.at("lambda")) << ','
          << inf_flag(e.at("lambda")) << '\n';
    }
  } else if (command == "oracle") {
    out << "k,n,exact,estimate,stderr,band,pass\n";
    for (const auto& table : r.at("tables")) {
      for (const auto& row : table.at("rows")) {
        out << table.at("k").get<std::size_t>() << ',' << row.at("n").get<std::size_t>() << ','
            << csv_number(row.at("exact")) << ',' << csv_number(row.at("estimate").at("mean"))
            << ',' << row.at("estimate").at("stderr").dump() << ',' << row.at("band").dump()
            << ',' << (row.at("pass").get<bool>() ? 1 : 0) << '\n';
      }
    }
  } else {
    out << "quantity,value\n";
    out << "max," << csv_number(r.at("max").at("value")) << '\n';
    out << "min," << csv_number(r.at("min").at("value")) << '\n';
    out << "estimate," << csv_number(r.at("estimate").at("mean")) << '\n';
    out << "stderr," << r.at("estimate").at("stderr").dump() << '\n';
    out << "intertwining_spread," << r.at("intertwining").at("max_spread").dump() << '\n';
    out << "sandwich_pass," << (r.at("sandwich").at("pass").get<bool>() ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string uniform_csv(const json& doc) {
  const json& r = doc.at("result");
  if (!r.contains("uniform_growth") || !r.at("uniform_growth").is_array()) return {};
  std::ostringstream out;
  out << "n,max_value,per_step,running_inf,inf_flag\n";
  for (const auto& row : r.at("uniform_growth")) {
    out << row.at("n").get<std::size_t>() << ',' << csv_number(row.at("max_value")) << ','
        << csv_number(row.at("per_step")) << ',' << csv_number(row.at("running_inf")) << ','
        << inf_flag(row.at("running_inf")) << '\n';
  }
  return out.str();
}

void write_result(const json& doc, const RunConfig& config) {
  const std::string text = config.output.format == "csv" ? to_csv(doc) : doc.dump(2) + "\n";
  if (config.output.path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(config.output.path);
    if (!out) throw ConfigError("/output/path", "cannot write " + config.output.path);
    out << text;
  }
  if (!config.output.uniform_path.empty()) {
    std::ofstream out(config.output.uniform_path);
    if (!out) throw ConfigError("/output/uniform_path", "cannot write " + config.output.uniform_path);
    out << uniform_csv(doc);
  }
}

}  // namespace lyap
