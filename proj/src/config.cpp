#include "lyap/config.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lyap/chain.hpp"
#include "lyap/errors.hpp"
#include "lyap/exterior.hpp"
#include "lyap/noise.hpp"

namespace lyap {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string join(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(join(path, key), "required field is missing");
  }
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::size_t positive(const json& v, const std::string& path) {
  const std::size_t c = count(v, path);
  if (c == 0) throw ConfigError(path, "must be positive");
  return c;
}

std::vector<double> vector_of(const json& v, std::size_t length, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  if (v.size() != length) {
    throw ConfigError(path, "expected " + std::to_string(length) + " entries");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], join(path, i)));
  return out;
}

Matrix matrix_of(const json& v, std::size_t rows, std::size_t cols, const std::string& path) {
  if (rows == 1 && cols == 1 && v.is_number()) return Matrix(1, 1, number(v, path));
  if (!v.is_array() || v.size() != rows) {
    throw ConfigError(path, "expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = vector_of(v[r], cols, join(path, r));
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  if (!m.all_finite()) throw ConfigError(path, "entries must be finite");
  return m;
}

json matrix_json(const Matrix& m) { return m.to_rows(); }

Matrix stochastic_of(const json& v, std::size_t n, const std::string& path) {
  Matrix m = matrix_of(v, n, n, path);
  try {
    validate_stochastic(m, "kernel");
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  return m;
}

// "1,0" -> {1, 0}
std::vector<std::size_t> parse_key(const std::string& key, std::size_t parts,
                                   const std::string& path) {
  std::vector<std::size_t> out;
  std::stringstream ss(key);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || !std::all_of(item.begin(), item.end(), ::isdigit)) {
      throw ConfigError(path, "malformed key '" + key + "'");
    }
    out.push_back(std::stoul(item));
  }
  if (out.size() != parts) throw ConfigError(path, "malformed key '" + key + "'");
  return out;
}

std::string make_key(std::initializer_list<std::size_t> parts) {
  std::string out;
  for (std::size_t p : parts) {
    if (!out.empty()) out += ',';
    out += std::to_string(p);
  }
  return out;
}

void check_range(std::size_t value, std::size_t bound, const std::string& path) {
  if (value >= bound) throw ConfigError(path, "index out of range");
}

void parse_vertex_tables(const json& model, ModelSpec& spec, const std::string& path) {
  const std::size_t d = spec.dim, nt = spec.symbols, nx = spec.states;
  const std::string mpath = join(path, "matrices");
  const json& mats = require(model, "matrices", path);
  std::vector<std::optional<Matrix>> table(nt * nx);
  if (mats.is_array()) {
    if (mats.size() != nt) throw ConfigError(mpath, "expected one matrix per symbol");
    for (std::size_t t = 0; t < nt; ++t) {
      const Matrix m = matrix_of(mats[t], d, d, join(mpath, t));
      for (std::size_t x = 0; x < nx; ++x) table[t * nx + x] = m;
    }
  } else if (mats.is_object()) {
    for (const auto& [key, value] : mats.items()) {
      const auto idx = parse_key(key, 2, join(mpath, key));
      check_range(idx[0], nt, join(mpath, key));
      check_range(idx[1], nx, join(mpath, key));
      table[idx[0] * nx + idx[1]] = matrix_of(value, d, d, join(mpath, key));
    }
  } else {
    throw ConfigError(mpath, "expected an array or an object keyed \"t,x\"");
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table[i]) {
      throw ConfigError(mpath, "missing matrix for (t,x) = " + make_key({i / nx, i % nx}));
    }
    spec.matrices.push_back(*table[i]);
  }

  const std::string fpath = join(path, "maps");
  spec.maps.assign(nt * nx, 0);
  if (model.contains("maps")) {
    const json& maps = model.at("maps");
    if (!maps.is_array() || maps.size() != nt) {
      throw ConfigError(fpath, "expected one array per symbol");
    }
    for (std::size_t t = 0; t < nt; ++t) {
      if (!maps[t].is_array() || maps[t].size() != nx) {
        throw ConfigError(join(fpath, t), "expected " + std::to_string(nx) + " entries");
      }
      for (std::size_t x = 0; x < nx; ++x) {
        const std::size_t v = count(maps[t][x], join(join(fpath, t), x));
        check_range(v, nx, join(join(fpath, t), x));
        spec.maps[t * nx + x] = v;
      }
    }
  } else if (nx > 1) {
    throw ConfigError(fpath, "required when states > 1");
  }
}

void parse_edge_tables(const json& model, ModelSpec& spec, const std::string& path) {
  const std::size_t d = spec.dim, nt = spec.symbols, nx = spec.states;
  const std::string mpath = join(path, "matrices");
  const json& mats = require(model, "matrices", path);
  if (!mats.is_object()) throw ConfigError(mpath, "expected an object keyed \"t,s\" or \"t,s,x\"");
  std::vector<std::optional<Matrix>> table(nt * nt * nx);
  for (const auto& [key, value] : mats.items()) {
    const std::string kpath = join(mpath, key);
    const std::size_t parts = std::count(key.begin(), key.end(), ',') + 1;
    const auto idx = parse_key(key, parts == 3 ? 3 : 2, kpath);
    check_range(idx[0], nt, kpath);
    check_range(idx[1], nt, kpath);
    const Matrix m = matrix_of(value, d, d, kpath);
    if (idx.size() == 3) {
      check_range(idx[2], nx, kpath);
      table[(idx[0] * nt + idx[1]) * nx + idx[2]] = m;
    } else {
      for (std::size_t x = 0; x < nx; ++x) table[(idx[0] * nt + idx[1]) * nx + x] = m;
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table[i]) {
      const std::size_t x = i % nx, ts = i / nx;
      throw ConfigError(mpath, "missing matrix for (t,s,x) = " + make_key({ts / nt, ts % nt, x}));
    }
    spec.matrices.push_back(*table[i]);
  }

  const std::string fpath = join(path, "maps");
  spec.maps.assign(nt * nt * nx, 0);
  if (model.contains("maps")) {
    const json& maps = model.at("maps");
    if (!maps.is_object()) throw ConfigError(fpath, "expected an object keyed \"t,s\"");
    std::vector<bool> seen(nt * nt, false);
    for (const auto& [key, value] : maps.items()) {
      const std::string kpath = join(fpath, key);
      const auto idx = parse_key(key, 2, kpath);
      check_range(idx[0], nt, kpath);
      check_range(idx[1], nt, kpath);
      if (!value.is_array() || value.size() != nx) {
        throw ConfigError(kpath, "expected " + std::to_string(nx) + " entries");
      }
      for (std::size_t x = 0; x < nx; ++x) {
        const std::size_t v = count(value[x], join(kpath, x));
        check_range(v, nx, join(kpath, x));
        spec.maps[(idx[0] * nt + idx[1]) * nx + x] = v;
      }
      seen[idx[0] * nt + idx[1]] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw ConfigError(fpath, "every pair \"t,s\" needs a map");
    }
  } else if (nx > 1) {
    throw ConfigError(fpath, "required when states > 1");
  }
}

KernelSpec parse_kernel(const json& v, std::size_t nt, std::size_t nx, const std::string& path) {
  if (!v.is_object() || v.size() != 1) {
    throw ConfigError(path, "expected exactly one of bernoulli, markov, place_dependent, edge");
  }
  KernelSpec k;
  const auto& [kind, body] = *v.items().begin();
  const std::string bpath = join(path, kind);
  if (kind == "bernoulli") {
    k.kind = KernelSpec::Kind::bernoulli;
    k.p = vector_of(body, nt, bpath);
    try {
      (void)bernoulli_kernel(k.p);
    } catch (const ParameterError& e) {
      throw ConfigError(bpath, e.what());
    }
  } else if (kind == "markov" || kind == "edge") {
    k.kind = kind == "markov" ? KernelSpec::Kind::markov : KernelSpec::Kind::edge;
    k.rows = stochastic_of(body, nt, bpath);
  } else if (kind == "place_dependent") {
    k.kind = KernelSpec::Kind::place_dependent;
    if (!body.is_object()) throw ConfigError(bpath, "expected an object keyed by state");
    std::vector<std::optional<Matrix>> per(nx);
    for (const auto& [key, rows] : body.items()) {
      const auto idx = parse_key(key, 1, join(bpath, key));
      check_range(idx[0], nx, join(bpath, key));
      per[idx[0]] = stochastic_of(rows, nt, join(bpath, key));
    }
    for (std::size_t x = 0; x < nx; ++x) {
      if (!per[x]) throw ConfigError(bpath, "missing kernel for state " + std::to_string(x));
      k.per_state.push_back(*per[x]);
    }
  } else {
    throw ConfigError(bpath, "unknown kernel kind");
  }
  return k;
}

ModelSpec parse_model(const json& model, const std::string& path) {
  if (!model.is_object()) throw ConfigError(path, "expected an object");
  ModelSpec spec;
  spec.dim = positive(require(model, "d", path), join(path, "d"));
  if (spec.dim > kMaxFiberDimension) throw ConfigError(join(path, "d"), "d must be at most 16");
  spec.symbols = positive(require(model, "symbols", path), join(path, "symbols"));
  if (model.contains("states")) spec.states = positive(model.at("states"), join(path, "states"));
  spec.kernel = parse_kernel(require(model, "kernel", path), spec.symbols, spec.states,
                             join(path, "kernel"));
  if (spec.is_edge()) {
    parse_edge_tables(model, spec, path);
  } else {
    parse_vertex_tables(model, spec, path);
  }
  if (model.contains("nu")) {
    const std::string npath = join(path, "nu");
    spec.nu = vector_of(model.at("nu"), spec.symbols * spec.states, npath);
    try {
      StationaryLaw(spec.symbols, spec.states, *spec.nu);
    } catch (const ParameterError& e) {
      throw ConfigError(npath, e.what());
    }
  }
  try {
    if (spec.is_edge()) {
      to_edge_model(spec).validate();
    } else {
      to_vertex_model(spec).validate();
    }
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

TaskSpec parse_task(const json& task, const std::string& path) {
  TaskSpec t;
  if (task.is_null()) return t;
  if (!task.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : task.items()) {
    const std::string p = join(path, key);
    if (key == "command") {
      if (!value.is_string()) throw ConfigError(p, "expected a string");
      t.command = value.get<std::string>();
      if (t.command != "spectrum" && t.command != "oracle" && t.command != "ulam" &&
          t.command != "convergence") {
        throw ConfigError(p, "unknown command");
      }
    } else if (key == "k") {
      if (value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) t.k.push_back(positive(value[i], join(p, i)));
      } else {
        t.k.push_back(positive(value, p));
      }
    } else if (key == "n") {
      t.n = positive(value, p);
    } else if (key == "trials") {
      t.trials = positive(value, p);
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ConfigError(p, "expected an unsigned integer");
      }
      t.seed = value.get<std::uint64_t>();
    } else if (key == "method") {
      if (!value.is_string()) throw ConfigError(p, "expected a string");
      t.method = value.get<std::string>();
      if (t.method != "norm" && t.method != "direction_sup" && t.method != "tracking" &&
          t.method != "furstenberg") {
        throw ConfigError(p, "unknown method");
      }
    } else if (key == "inner") {
      t.inner = positive(value, p);
    } else if (key == "burn") {
      t.burn = count(value, p);
    } else if (key == "workers") {
      t.workers = positive(value, p);
    } else if (key == "bias_diagnostic") {
      if (!value.is_boolean()) throw ConfigError(p, "expected a boolean");
      t.bias_diagnostic = value.get<bool>();
    } else if (key == "n_max") {
      t.n_max = positive(value, p);
    } else if (key == "budget") {
      t.budget = number(value, p);
      if (!(t.budget > 0.0)) throw ConfigError(p, "must be positive");
    } else if (key == "horizons") {
      if (!value.is_array() || value.empty()) throw ConfigError(p, "expected a non-empty array");
      for (std::size_t i = 0; i < value.size(); ++i) {
        t.horizons.push_back(positive(value[i], join(p, i)));
      }
    } else if (key == "grid_m") {
      t.grid_m = count(value, p);
      if (t.grid_m < 2) throw ConfigError(p, "must be at least 2");
    } else if (key == "samples_per_cell") {
      t.samples_per_cell = positive(value, p);
    } else if (key == "potential_samples") {
      t.potential_samples = positive(value, p);
    } else if (key == "grid_slack") {
      t.grid_slack = number(value, p);
      if (t.grid_slack < 0.0) throw ConfigError(p, "must be non-negative");
    } else {
      throw ConfigError(p, "unknown field");
    }
  }
  return t;
}

OutputSpec parse_output(const json& out, const std::string& path) {
  OutputSpec o;
  if (out.is_null()) return o;
  if (!out.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : out.items()) {
    const std::string p = join(path, key);
    if (!value.is_string()) throw ConfigError(p, "expected a string");
    if (key == "path") {
      o.path = value.get<std::string>();
    } else if (key == "format") {
      o.format = value.get<std::string>();
      if (o.format != "json" && o.format != "csv") throw ConfigError(p, "expected json or csv");
    } else if (key == "uniform_path") {
      o.uniform_path = value.get<std::string>();
    } else {
      throw ConfigError(p, "unknown field");
    }
  }
  return o;
}

json emit_kernel(const KernelSpec& k) {
  switch (k.kind) {
    case KernelSpec::Kind::bernoulli:
      return {{"bernoulli", k.p}};
    case KernelSpec::Kind::markov:
      return {{"markov", matrix_json(k.rows)}};
    case KernelSpec::Kind::edge:
      return {{"edge", matrix_json(k.rows)}};
    case KernelSpec::Kind::place_dependent: {
      json per = json::object();
      for (std::size_t x = 0; x < k.per_state.size(); ++x) {
        per[std::to_string(x)] = matrix_json(k.per_state[x]);
      }
      return {{"place_dependent", per}};
    }
  }
  return {};
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "model" && key != "task" && key != "output") {
      throw ConfigError("/" + key, "unknown field");
    }
  }
  RunConfig config;
  config.model = parse_model(require(doc, "model", ""), "/model");
  config.task = parse_task(doc.contains("task") ? doc.at("task") : json(), "/task");
  config.output = parse_output(doc.contains("output") ? doc.at("output") : json(), "/output");
  for (std::size_t i = 0; i < config.task.k.size(); ++i) {
    if (config.task.k[i] > config.model.dim) {
      throw ConfigError("/task/k/" + std::to_string(i), "k must be in 1..d");
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open configuration file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
  return parse_config(doc);
}

json emit_config(const RunConfig& config) {
  const ModelSpec& m = config.model;
  json model;
  model["d"] = m.dim;
  model["symbols"] = m.symbols;
  model["states"] = m.states;
  model["kernel"] = emit_kernel(m.kernel);
  json mats = json::object();
  json maps;
  if (m.is_edge()) {
    maps = json::object();
    for (std::size_t t = 0; t < m.symbols; ++t) {
      for (std::size_t s = 0; s < m.symbols; ++s) {
        std::vector<std::size_t> f;
        for (std::size_t x = 0; x < m.states; ++x) {
          const std::size_t i = (t * m.symbols + s) * m.states + x;
          mats[make_key({t, s, x})] = matrix_json(m.matrices[i]);
          f.push_back(m.maps[i]);
        }
        maps[make_key({t, s})] = f;
      }
    }
  } else {
    maps = json::array();
    for (std::size_t t = 0; t < m.symbols; ++t) {
      std::vector<std::size_t> f;
      for (std::size_t x = 0; x < m.states; ++x) {
        mats[make_key({t, x})] = matrix_json(m.matrices[t * m.states + x]);
        f.push_back(m.maps[t * m.states + x]);
      }
      maps.push_back(f);
    }
  }
  model["matrices"] = mats;
  model["maps"] = maps;
  if (m.nu) model["nu"] = *m.nu;

  const TaskSpec& t = config.task;
  json task = {{"command", t.command},
               {"n", t.n},
               {"trials", t.trials},
               {"seed", t.seed},
               {"method", t.method},
               {"inner", t.inner},
               {"burn", t.burn},
               {"workers", t.workers},
               {"bias_diagnostic", t.bias_diagnostic},
               {"n_max", t.n_max},
               {"budget", t.budget},
               {"grid_m", t.grid_m},
               {"samples_per_cell", t.samples_per_cell},
               {"potential_samples", t.potential_samples},
               {"grid_slack", t.grid_slack}};
  if (!t.k.empty()) task["k"] = t.k;
  if (!t.horizons.empty()) task["horizons"] = t.horizons;

  json output = {{"format", config.output.format}};
  if (!config.output.path.empty()) output["path"] = config.output.path;
  if (!config.output.uniform_path.empty()) output["uniform_path"] = config.output.uniform_path;
  return {{"model", model}, {"task", task}, {"output", output}};
}

std::string fingerprint(const json& doc) {
  const std::string body = doc.dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  std::string hex;
  char buf[3];
  for (unsigned char c : digest) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    hex += buf;
  }
  return hex;
}

CocycleModel to_vertex_model(const ModelSpec& spec) {
  if (spec.is_edge()) throw ParameterError("to_vertex_model: spec describes an edge model");
  CocycleModel m;
  m.dim = spec.dim;
  m.symbols = spec.symbols;
  m.states = spec.states;
  m.next_state = spec.maps;
  m.matrices = spec.matrices;
  switch (spec.kernel.kind) {
    case KernelSpec::Kind::bernoulli:
      m.kernel = bernoulli_kernel(spec.kernel.p);
      break;
    case KernelSpec::Kind::markov:
      m.kernel = FiniteKernel(spec.kernel.rows);
      break;
    case KernelSpec::Kind::place_dependent: {
      std::vector<FiniteKernel> per;
      for (const auto& rows : spec.kernel.per_state) per.emplace_back(rows);
      m.kernel = PlaceDependentKernel(std::move(per));
      break;
    }
    case KernelSpec::Kind::edge:
      break;
  }
  if (spec.nu) m.nu = StationaryLaw(spec.symbols, spec.states, *spec.nu);
  return m;
}

EdgeModel to_edge_model(const ModelSpec& spec) {
  if (!spec.is_edge()) throw ParameterError("to_edge_model: spec is not an edge model");
  EdgeModel m;
  m.dim = spec.dim;
  m.symbols = spec.symbols;
  m.states = spec.states;
  m.next_state = spec.maps;
  m.matrices = spec.matrices;
  m.kernel = FiniteKernel(spec.kernel.rows);
  if (spec.nu) m.nu = StationaryLaw(spec.symbols, spec.states, *spec.nu);
  return m;
}

CocycleModel to_cocycle(const ModelSpec& spec) {
  return spec.is_edge() ? edge_to_vertex(to_edge_model(spec)) : to_vertex_model(spec);
}

}  // namespace lyap
