#include "hdpmpm/io.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unistd.h>

#include "json.hpp"

#include "hdpmpm/errors.hpp"

namespace hdpmpm {

using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "0.1.0";
constexpr std::string_view kDrawsSchema = "hdpmpm-draws/1";
constexpr std::string_view kManifestSchema = "hdpmpm-manifest/1";
constexpr std::string_view kTruthSchema = "hdpmpm-truth/1";
constexpr std::string_view kSidecarSchema = "hdpmpm-mask-sidecar/1";

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buf);
}

std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool parse_int(const std::string& token, long& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  out = std::strtol(token.c_str(), &end, 10);
  return end != nullptr && *end == '\0';
}

json vector_to_json(const Eigen::Ref<const VectorXd>& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VectorXd json_to_vector(const json& arr) {
  VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& value : arr) v[i++] = value.get<double>();
  return v;
}

}  // namespace

std::string software_version() { return std::string(kVersion); }

std::string current_timestamp() { return iso_now(); }

// ---------------------------------------------------------------------------
// Dictionary

DataDictionary load_dictionary(const std::string& path) {
  const json doc = parse_json_file(path);
  DataDictionary dict;
  if (doc.contains("missing_tokens")) {
    dict.missing_tokens = doc.at("missing_tokens").get<std::vector<std::string>>();
  }
  if (!doc.contains("variables") || !doc.at("variables").is_array()) {
    throw DataError(path + ": dictionary needs a 'variables' array");
  }
  for (const auto& entry : doc.at("variables")) {
    VariableSpec var;
    var.name = entry.at("name").get<std::string>();
    var.levels = entry.at("levels").get<int>();
    if (var.levels < 2) {
      throw DataError(path + ": variable '" + var.name + "' must have at least 2 levels");
    }
    if (entry.contains("labels")) {
      var.labels = entry.at("labels").get<std::vector<std::string>>();
      if (static_cast<int>(var.labels.size()) != var.levels) {
        throw DataError(path + ": variable '" + var.name + "' labels must match level count");
      }
    }
    if (entry.contains("missing_tokens")) {
      var.missing_tokens = entry.at("missing_tokens").get<std::vector<std::string>>();
    }
    dict.variables.push_back(std::move(var));
  }
  for (std::size_t a = 0; a < dict.variables.size(); ++a) {
    for (std::size_t b = a + 1; b < dict.variables.size(); ++b) {
      if (dict.variables[a].name == dict.variables[b].name) {
        throw DataError(path + ": duplicate variable name '" + dict.variables[a].name + "'");
      }
    }
  }
  return dict;
}

void save_dictionary(const DataDictionary& dict, const std::string& path) {
  json doc;
  doc["missing_tokens"] = dict.missing_tokens;
  doc["variables"] = json::array();
  for (const auto& var : dict.variables) {
    json entry;
    entry["name"] = var.name;
    entry["levels"] = var.levels;
    if (!var.labels.empty()) entry["labels"] = var.labels;
    if (!var.missing_tokens.empty()) entry["missing_tokens"] = var.missing_tokens;
    doc["variables"].push_back(std::move(entry));
  }
  atomic_write(path, doc.dump(2) + "\n");
}

DataDictionary infer_dictionary(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError(csv_path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv_path + ": empty file");
  DataDictionary dict;
  for (const std::string& name : split_line(chomp(line))) {
    VariableSpec var;
    var.name = name;
    var.levels = 2;
    dict.variables.push_back(std::move(var));
  }
  long file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    line = chomp(line);
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != dict.variables.size()) {
      throw DataError(csv_path + ": line " + std::to_string(file_line) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(dict.variables.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string& token = fields[j];
      bool missing = false;
      for (const auto& m : dict.missing_tokens) missing = missing || token == m;
      if (missing) continue;
      long code = 0;
      if (!parse_int(token, code) || code < 1) {
        throw DataError(csv_path + ": line " + std::to_string(file_line) + ", column " +
                        std::to_string(j + 1) + ": cannot infer levels from token '" + token +
                        "'");
      }
      dict.variables[j].levels = std::max(dict.variables[j].levels, static_cast<int>(code));
    }
  }
  return dict;
}

// ---------------------------------------------------------------------------
// CSV data

Dataset load_csv(const std::string& path, const DataDictionary& dict) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_line(chomp(line));
  if (header.size() != dict.variables.size()) {
    throw DataError(path + ": header has " + std::to_string(header.size()) +
                    " columns, dictionary describes " + std::to_string(dict.variables.size()));
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != dict.variables[j].name) {
      throw DataError(path + ": header column " + std::to_string(j + 1) + " is '" + header[j] +
                      "', dictionary expects '" + dict.variables[j].name + "'");
    }
  }

  const std::size_t p = dict.variables.size();
  std::vector<int> flat;
  long rows = 0;
  long file_line = 1;
  while (std::getline(in, line)) {
    ++file_line;
    line = chomp(line);
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != p) {
      throw DataError(path + ": line " + std::to_string(file_line) + " has " +
                      std::to_string(fields.size()) + " fields, expected " + std::to_string(p));
    }
    for (std::size_t j = 0; j < p; ++j) {
      const VariableSpec& var = dict.variables[j];
      const std::string& token = fields[j];
      bool missing = false;
      for (const auto& m : dict.missing_tokens) missing = missing || token == m;
      for (const auto& m : var.missing_tokens) missing = missing || token == m;
      if (missing) {
        flat.push_back(kMissingCell);
        continue;
      }
      int code = 0;
      bool resolved = false;
      for (std::size_t d = 0; d < var.labels.size(); ++d) {
        if (var.labels[d] == token) {
          code = static_cast<int>(d) + 1;
          resolved = true;
          break;
        }
      }
      if (!resolved) {
        long parsed = 0;
        if (!parse_int(token, parsed)) {
          throw DataError(path + ": line " + std::to_string(file_line) + ", column " +
                          std::to_string(j + 1) + " (" + var.name + "): unknown level '" + token +
                          "'");
        }
        code = static_cast<int>(parsed);
      }
      if (code < 1 || code > var.levels) {
        throw DataError(path + ": line " + std::to_string(file_line) + ", column " +
                        std::to_string(j + 1) + " (" + var.name + "): value " +
                        std::to_string(code) + " outside 1.." + std::to_string(var.levels));
      }
      flat.push_back(code);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path + ": no data rows");

  Dataset ds;
  ds.cells.resize(rows, static_cast<Eigen::Index>(p));
  for (long i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      ds.cells(i, static_cast<Eigen::Index>(j)) = flat[static_cast<std::size_t>(i) * p + j];
    }
  }
  ds.mask = mask_from_cells(ds.cells);
  ds.levels.resize(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    ds.levels[static_cast<Eigen::Index>(j)] = dict.variables[j].levels;
    ds.variable_names.push_back(dict.variables[j].name);
    if (!dict.variables[j].labels.empty()) {
      if (ds.level_labels.empty()) ds.level_labels.resize(p);
      ds.level_labels[j] = dict.variables[j].labels;
    }
  }
  if (!ds.level_labels.empty()) ds.level_labels.resize(p);
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < ds.p(); ++j) {
    if (j > 0) out << ',';
    out << ds.variable_names[static_cast<std::size_t>(j)];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      if (j > 0) out << ',';
      if (ds.mask(i, j) == 0) out << ds.cells(i, j);
    }
    out << '\n';
  }
  atomic_write(path, out.str());
}

// ---------------------------------------------------------------------------
// Config, hashes, manifest

FitConfig load_fit_config(const std::string& path) {
  const json doc = parse_json_file(path);
  FitConfig cfg;
  cfg.hp.k = doc.value("k", cfg.hp.k);
  cfg.hp.a = doc.value("a", cfg.hp.a);
  cfg.hp.b = doc.value("b", cfg.hp.b);
  cfg.hp.c = doc.value("c", cfg.hp.c);
  cfg.hp.d = doc.value("d", cfg.hp.d);
  cfg.chain.iterations = doc.value("iterations", cfg.chain.iterations);
  cfg.chain.burn_in = doc.value("burn_in", cfg.chain.burn_in);
  cfg.chain.thin = doc.value("thin", cfg.chain.thin);
  cfg.chain.seed = doc.value("seed", cfg.chain.seed);
  cfg.chain.relabel = doc.value("relabel", cfg.chain.relabel);
  cfg.chain.parallel_cells = doc.value("parallel_cells", cfg.chain.parallel_cells);
  cfg.chain.workers = doc.value("workers", cfg.chain.workers);
  cfg.store.pi = doc.value("store_pi", cfg.store.pi);
  cfg.store.z = doc.value("store_z", cfg.store.z);
  if (doc.contains("saturation")) {
    const json& sat = doc.at("saturation");
    const std::string policy = sat.value("policy", std::string("grow"));
    if (policy == "abort") {
      cfg.chain.saturation = SaturationPolicy::kAbort;
    } else if (policy == "grow") {
      cfg.chain.saturation = SaturationPolicy::kGrow;
    } else {
      throw DataError(path + ": unknown saturation policy '" + policy + "'");
    }
    cfg.chain.grow_step = sat.value("step", cfg.chain.grow_step);
    cfg.chain.max_restarts = sat.value("max_restarts", cfg.chain.max_restarts);
  }
  return cfg;
}

std::string fingerprint_dataset(const Dataset& ds) {
  std::ostringstream bytes;
  bytes << ds.n() << ';' << ds.p() << ';';
  for (Eigen::Index j = 0; j < ds.p(); ++j) bytes << ds.levels[j] << ',';
  bytes << ';';
  for (const auto& name : ds.variable_names) bytes << name << ',';
  bytes << ';';
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.p(); ++j) {
      bytes << ds.cells(i, j) << (ds.mask(i, j) != 0 ? "m" : "o");
    }
  }
  return to_hex(fnv1a64(bytes.str()));
}

std::string hash_config(const Hyperparameters& hp, const ChainConfig& cfg) {
  json doc;
  doc["k"] = hp.k;
  doc["a"] = hp.a;
  doc["b"] = hp.b;
  doc["c"] = hp.c;
  doc["d"] = hp.d;
  doc["iterations"] = cfg.iterations;
  doc["burn_in"] = cfg.burn_in;
  doc["thin"] = cfg.thin;
  doc["seed"] = cfg.seed;
  doc["relabel"] = cfg.relabel;
  doc["saturation"] = cfg.saturation == SaturationPolicy::kAbort ? "abort" : "grow";
  doc["grow_step"] = cfg.grow_step;
  doc["max_restarts"] = cfg.max_restarts;
  return to_hex(fnv1a64(doc.dump()));
}

std::string manifest_hash(const RunManifest& manifest) {
  std::uint64_t h = fnv1a64(manifest.config_hash);
  h = fnv1a64(manifest.dataset_fingerprint, h);
  h = fnv1a64(std::to_string(manifest.seed), h);
  return to_hex(h);
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json doc;
  doc["schema"] = kManifestSchema;
  doc["hash"] = manifest_hash(manifest);
  doc["config_hash"] = manifest.config_hash;
  doc["seed"] = manifest.seed;
  doc["version"] = manifest.version;
  doc["started_at"] = manifest.started_at;
  doc["finished_at"] = manifest.finished_at;
  doc["dataset_fingerprint"] = manifest.dataset_fingerprint;
  doc["saturation_events"] = manifest.saturation_events;
  doc["k_used"] = manifest.k_used;
  doc["restarts"] = manifest.restarts;
  atomic_write(path, doc.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  const json doc = parse_json_file(path);
  if (doc.value("schema", std::string()) != kManifestSchema) {
    throw DataError(path + ": not a manifest file");
  }
  RunManifest manifest;
  manifest.config_hash = doc.at("config_hash").get<std::string>();
  manifest.seed = doc.at("seed").get<std::uint64_t>();
  manifest.version = doc.value("version", std::string());
  manifest.started_at = doc.value("started_at", std::string());
  manifest.finished_at = doc.value("finished_at", std::string());
  manifest.dataset_fingerprint = doc.at("dataset_fingerprint").get<std::string>();
  manifest.saturation_events = doc.value("saturation_events", std::vector<long>{});
  manifest.k_used = doc.value("k_used", 0);
  manifest.restarts = doc.value("restarts", 0);
  return manifest;
}

// ---------------------------------------------------------------------------
// Draws

void save_draws(const PosteriorDraws& draws, const std::string& path, StoreFlags flags,
                const std::string& manifest_hash_value) {
  std::ostringstream out;
  json header;
  header["schema"] = kDrawsSchema;
  header["version"] = kVersion;
  header["manifest_hash"] = manifest_hash_value;
  header["k"] = draws.hp_echo.k;
  header["a"] = draws.hp_echo.a;
  header["b"] = draws.hp_echo.b;
  header["c"] = draws.hp_echo.c;
  header["d"] = draws.hp_echo.d;
  const Eigen::Index n = draws.draws.empty() ? 0 : draws.draws.front().pi.rows();
  const Eigen::Index p = draws.draws.empty() ? 0 : static_cast<Eigen::Index>(draws.draws.front().phi.size());
  header["n"] = n;
  header["p"] = p;
  json levels = json::array();
  if (!draws.draws.empty()) {
    for (const auto& table : draws.draws.front().phi) levels.push_back(table.cols());
  }
  header["levels"] = levels;
  header["variables"] = draws.variable_names;
  header["iterations"] = draws.config_echo.iterations;
  header["burn_in"] = draws.config_echo.burn_in;
  header["thin"] = draws.config_echo.thin;
  header["seed"] = draws.config_echo.seed;
  header["relabel"] = draws.config_echo.relabel;
  header["store_pi"] = flags.pi;
  header["store_z"] = flags.z;
  header["restarts"] = draws.restarts;
  header["saturation_events"] = draws.saturation_events;
  out << header.dump() << '\n';

  for (std::size_t r = 0; r < draws.draws.size(); ++r) {
    const ModelState& state = draws.draws[r];
    json rec;
    rec["iter"] = draws.kept_iterations[r];
    const std::size_t sweep_count = draws.occupied_counts.size();
    if (sweep_count == draws.draws.size()) {
      rec["occupied"] = draws.occupied_counts[r];
    } else if (sweep_count > 0 && draws.kept_iterations[r] >= 1 &&
               static_cast<std::size_t>(draws.kept_iterations[r]) <= sweep_count) {
      rec["occupied"] = draws.occupied_counts[static_cast<std::size_t>(draws.kept_iterations[r] - 1)];
    } else {
      rec["occupied"] = 0;
    }
    rec["beta"] = vector_to_json(state.beta);
    rec["gamma"] = state.gamma;
    rec["alpha0"] = state.alpha0;
    json phi = json::array();
    for (const auto& table : state.phi) {
      json per_var = json::array();
      for (Eigen::Index c = 0; c < table.rows(); ++c) {
        per_var.push_back(vector_to_json(table.row(c).transpose()));
      }
      phi.push_back(std::move(per_var));
    }
    rec["phi"] = std::move(phi);
    if (flags.pi) {
      json pi = json::array();
      for (Eigen::Index i = 0; i < state.pi.rows(); ++i) {
        pi.push_back(vector_to_json(state.pi.row(i).transpose()));
      }
      rec["pi"] = std::move(pi);
    }
    if (flags.z) {
      json z = json::array();
      for (Eigen::Index i = 0; i < state.z.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < state.z.cols(); ++j) row.push_back(state.z(i, j) + 1);
        z.push_back(std::move(row));
      }
      rec["z"] = std::move(z);
    }
    out << rec.dump() << '\n';
  }
  atomic_write(path, out.str());
}

PosteriorDraws load_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty draws file");
  json header;
  try {
    header = json::parse(chomp(line));
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid draws header: " + e.what());
  }
  if (header.value("schema", std::string()) != kDrawsSchema) {
    throw DataError(path + ": not a draws file (schema mismatch)");
  }

  PosteriorDraws draws;
  draws.hp_echo.k = header.at("k").get<int>();
  draws.hp_echo.a = header.value("a", 0.25);
  draws.hp_echo.b = header.value("b", 0.25);
  draws.hp_echo.c = header.value("c", 0.25);
  draws.hp_echo.d = header.value("d", 0.25);
  draws.config_echo.iterations = header.value("iterations", 0L);
  draws.config_echo.burn_in = header.value("burn_in", 0L);
  draws.config_echo.thin = header.value("thin", 1);
  draws.config_echo.seed = header.value("seed", std::uint64_t{0});
  draws.config_echo.relabel = header.value("relabel", true);
  draws.has_pi = header.value("store_pi", false);
  draws.has_z = header.value("store_z", false);
  draws.restarts = header.value("restarts", 0);
  draws.saturation_events = header.value("saturation_events", std::vector<long>{});
  draws.variable_names = header.value("variables", std::vector<std::string>{});
  const int k = draws.hp_echo.k;
  const std::vector<long> levels = header.value("levels", std::vector<long>{});
  const Eigen::Index n = header.value("n", 0L);
  const Eigen::Index p = static_cast<Eigen::Index>(levels.size());

  auto schema_error = [&](long record, const std::string& detail) {
    return DataError(path + ": record " + std::to_string(record + 1) +
                     " does not match the draws schema: " + detail);
  };
  auto parse_record = [&](const json& rec, long record) {
    ModelState state;
    state.beta = json_to_vector(rec.at("beta"));
    if (state.beta.size() != k) throw schema_error(record, "beta length != k");
    state.v = stick_from_weights(state.beta);
    state.gamma = rec.value("gamma", 0.0);
    state.alpha0 = rec.value("alpha0", 0.0);
    const json& phi = rec.at("phi");
    if (static_cast<Eigen::Index>(phi.size()) != p) {
      throw schema_error(record, "phi variable count != header p");
    }
    state.phi.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const json& per_var = phi[static_cast<std::size_t>(j)];
      if (static_cast<int>(per_var.size()) != k) {
        throw schema_error(record, "phi cluster count != k");
      }
      state.phi[j].resize(k, levels[static_cast<std::size_t>(j)]);
      for (int c = 0; c < k; ++c) {
        const VectorXd row = json_to_vector(per_var[static_cast<std::size_t>(c)]);
        if (row.size() != state.phi[j].cols()) {
          throw schema_error(record, "phi row length != level count");
        }
        state.phi[j].row(c) = row.transpose();
      }
    }
    if (draws.has_pi) {
      const json& pi = rec.at("pi");
      state.pi.resize(n, k);
      for (Eigen::Index i = 0; i < n; ++i) {
        state.pi.row(i) = json_to_vector(pi[static_cast<std::size_t>(i)]).transpose();
      }
    }
    if (draws.has_z) {
      const json& z = rec.at("z");
      state.z.resize(n, p);
      for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = z[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) {
          state.z(i, j) = row[static_cast<std::size_t>(j)].get<int>() - 1;
        }
      }
    }
    return state;
  };

  long record_index = 0;
  long last_iter = -1;
  while (std::getline(in, line)) {
    line = chomp(line);
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
      if (!rec.contains("iter") || !rec.contains("beta") || !rec.contains("phi")) {
        throw DataError("record misses required fields");
      }
    } catch (const std::exception&) {
      throw DataError(path + ": truncated or corrupt draws file; last complete record is " +
                      std::to_string(record_index) +
                      (last_iter >= 0 ? " (iteration " + std::to_string(last_iter) + ")" : ""));
    }
    try {
      ModelState state = parse_record(rec, record_index);
      draws.kept_iterations.push_back(rec.at("iter").get<long>());
      draws.occupied_counts.push_back(rec.value("occupied", 0));
      last_iter = draws.kept_iterations.back();
      draws.draws.push_back(std::move(state));
      ++record_index;
    } catch (const json::exception& e) {
      throw schema_error(record_index, e.what());
    }
  }
  return draws;
}

// ---------------------------------------------------------------------------
// Simulation and mask specs

GenSpec load_genspec(const std::string& path) {
  const json doc = parse_json_file(path);
  GenSpec spec;
  spec.n = doc.at("n").get<int>();
  spec.p = doc.at("p").get<int>();
  if (doc.at("levels").is_number()) {
    spec.levels = VectorXi::Constant(spec.p, doc.at("levels").get<int>());
  } else {
    const auto values = doc.at("levels").get<std::vector<int>>();
    spec.levels.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j) {
      spec.levels[static_cast<Eigen::Index>(j)] = values[j];
    }
  }
  spec.beta = json_to_vector(doc.at("beta"));
  spec.alpha0 = doc.value("alpha0", 10.0);
  for (const auto& profile : doc.at("profiles")) {
    std::vector<VectorXd> rows;
    for (const auto& simplex : profile) rows.push_back(json_to_vector(simplex));
    spec.profiles.push_back(std::move(rows));
  }
  return spec;
}

MarSpec load_marspec(const std::string& path) {
  const json doc = parse_json_file(path);
  MarSpec spec;
  for (int index : doc.at("targets").get<std::vector<int>>()) spec.targets.push_back(index - 1);
  for (int index : doc.at("predictors").get<std::vector<int>>()) {
    spec.predictors.push_back(index - 1);
  }
  spec.target_rate = doc.value("target_rate", 0.3);
  if (doc.contains("intercepts") && !doc.at("intercepts").is_string()) {
    spec.auto_intercepts = false;
    spec.intercepts = doc.at("intercepts").get<std::vector<double>>();
  }
  for (const auto& per_target : doc.at("coefficients")) {
    std::vector<VectorXd> rows;
    for (const auto& per_predictor : per_target) rows.push_back(json_to_vector(per_predictor));
    spec.coefficients.push_back(std::move(rows));
  }
  return spec;
}

void save_truth(const SyntheticTruth& truth, const std::string& path) {
  json doc;
  doc["schema"] = kTruthSchema;
  doc["beta"] = vector_to_json(truth.beta);
  json profiles = json::array();
  for (const auto& profile : truth.profiles) {
    json per_var = json::array();
    for (const auto& simplex : profile) per_var.push_back(vector_to_json(simplex));
    profiles.push_back(std::move(per_var));
  }
  doc["profiles"] = std::move(profiles);
  json z = json::array();
  for (Eigen::Index i = 0; i < truth.z.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < truth.z.cols(); ++j) row.push_back(truth.z(i, j) + 1);
    z.push_back(std::move(row));
  }
  doc["z"] = std::move(z);
  atomic_write(path, doc.dump() + "\n");
}

LoadedTruth load_truth(const std::string& path) {
  const json doc = parse_json_file(path);
  if (doc.value("schema", std::string()) != kTruthSchema) {
    throw DataError(path + ": not a truth sidecar");
  }
  LoadedTruth truth;
  truth.beta = json_to_vector(doc.at("beta"));
  for (const auto& profile : doc.at("profiles")) {
    std::vector<VectorXd> rows;
    for (const auto& simplex : profile) rows.push_back(json_to_vector(simplex));
    truth.profiles.push_back(std::move(rows));
  }
  return truth;
}

void save_mask_sidecar(const Dataset& original, const Dataset& masked, const std::string& path) {
  if (original.n() != masked.n() || original.p() != masked.p()) {
    throw std::invalid_argument("mask sidecar: datasets have different shapes");
  }
  json entries = json::array();
  for (Eigen::Index i = 0; i < original.n(); ++i) {
    for (Eigen::Index j = 0; j < original.p(); ++j) {
      if (masked.mask(i, j) != 0 && original.mask(i, j) == 0) {
        json entry;
        entry["row"] = i + 1;
        entry["col"] = j + 1;
        entry["value"] = original.cells(i, j);
        entries.push_back(std::move(entry));
      }
    }
  }
  json doc;
  doc["schema"] = kSidecarSchema;
  doc["n"] = original.n();
  doc["p"] = original.p();
  doc["entries"] = std::move(entries);
  atomic_write(path, doc.dump() + "\n");
}

Dataset unmask_with_sidecar(const Dataset& masked, const std::string& path) {
  const json doc = parse_json_file(path);
  if (doc.value("schema", std::string()) != kSidecarSchema) {
    throw DataError(path + ": not a mask sidecar");
  }
  if (doc.at("n").get<Eigen::Index>() != masked.n() ||
      doc.at("p").get<Eigen::Index>() != masked.p()) {
    throw DataError(path + ": sidecar shape does not match the dataset");
  }
  Dataset restored = masked;
  for (const auto& entry : doc.at("entries")) {
    const Eigen::Index i = entry.at("row").get<Eigen::Index>() - 1;
    const Eigen::Index j = entry.at("col").get<Eigen::Index>() - 1;
    if (i < 0 || i >= masked.n() || j < 0 || j >= masked.p()) {
      throw DataError(path + ": sidecar entry out of range");
    }
    restored.cells(i, j) = entry.at("value").get<int>();
    restored.mask(i, j) = 0;
  }
  return restored;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

}  // namespace

void write_profiles_csv(const ProfileSummary& summary, const std::vector<int>& profiles,
                        const std::vector<std::string>& variable_names, const std::string& path) {
  std::ostringstream out;
  out << "profile,proportion,proportion_sd,variable,level,mean,sd\n";
  for (int c : profiles) {
    for (std::size_t j = 0; j < summary.mean_phi.size(); ++j) {
      for (Eigen::Index d = 0; d < summary.mean_phi[j].cols(); ++d) {
        out << (c + 1) << ',' << format_double(summary.mean_beta[c]) << ','
            << format_double(summary.sd_beta[c]) << ',' << variable_names[j] << ',' << (d + 1)
            << ',' << format_double(summary.mean_phi[j](c, d)) << ','
            << format_double(summary.sd_phi[j](c, d)) << '\n';
      }
    }
  }
  atomic_write(path, out.str());
}

void write_functionals_csv(const FunctionalReport& report,
                           const std::vector<std::string>& variable_names,
                           const std::string& path) {
  std::ostringstream out;
  out << "variable";
  for (int c : report.profiles) out << ",cr_" << (c + 1);
  out << ",dr_" << (report.pair.first + 1) << '_' << (report.pair.second + 1) << ",tie_rate\n";
  for (Eigen::Index j = 0; j < report.dr_mean.size(); ++j) {
    out << variable_names[static_cast<std::size_t>(j)];
    for (Eigen::Index c = 0; c < report.cr_mean.cols(); ++c) {
      out << ',' << format_double(report.cr_mean(j, c));
    }
    out << ',' << format_double(report.dr_mean[j]) << ',' << format_double(report.tie_rate[j])
        << '\n';
  }
  atomic_write(path, out.str());
}

void write_membership_csv(const MembershipReport& report, const std::string& path) {
  std::ostringstream out;
  out << "dominant_count,persons\n";
  for (const auto& [count, persons] : report.histogram) out << count << ',' << persons << '\n';
  atomic_write(path, out.str());
}

void write_summary_json(const ProfileSummary& summary, const std::vector<int>& dominant,
                        const FunctionalReport& functionals, const MembershipReport* membership,
                        const std::string& path) {
  json doc;
  doc["draw_count"] = summary.draw_count;
  doc["mean_beta"] = vector_to_json(summary.mean_beta);
  doc["sd_beta"] = vector_to_json(summary.sd_beta);
  json dominant_json = json::array();
  for (int c : dominant) dominant_json.push_back(c + 1);
  doc["dominant_profiles"] = std::move(dominant_json);
  json cr = json::array();
  for (Eigen::Index j = 0; j < functionals.cr_mean.rows(); ++j) {
    cr.push_back(vector_to_json(functionals.cr_mean.row(j).transpose()));
  }
  doc["cohesion_ratio_mean"] = std::move(cr);
  doc["disagreement_mean"] = vector_to_json(functionals.dr_mean);
  doc["tie_rate"] = vector_to_json(functionals.tie_rate);
  json profile_ids = json::array();
  for (int c : functionals.profiles) profile_ids.push_back(c + 1);
  doc["functional_profiles"] = std::move(profile_ids);
  doc["functional_pair"] = {functionals.pair.first + 1, functionals.pair.second + 1};
  if (membership != nullptr) {
    json hist = json::object();
    for (const auto& [count, persons] : membership->histogram) {
      hist[std::to_string(count)] = persons;
    }
    json modal = json::object();
    for (const auto& [cluster, share] : membership->modal_share) {
      modal[std::to_string(cluster + 1)] = share;
    }
    doc["membership"] = {{"threshold", membership->threshold},
                         {"histogram", std::move(hist)},
                         {"modal_share", std::move(modal)}};
  }
  atomic_write(path, doc.dump(2) + "\n");
}

void write_trace_csvs(const PosteriorDraws& draws, const std::string& directory,
                      const std::vector<std::pair<int, int>>& marginals) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  const std::size_t count = draws.draws.size();
  const int k = count > 0 ? draws.draws.front().k() : 0;

  std::ostringstream beta_out;
  beta_out << "draw,iteration";
  for (int c = 0; c < k; ++c) beta_out << ",beta_" << (c + 1);
  beta_out << '\n';
  for (std::size_t r = 0; r < count; ++r) {
    beta_out << (r + 1) << ',' << draws.kept_iterations[r];
    for (int c = 0; c < k; ++c) beta_out << ',' << format_double(draws.draws[r].beta[c]);
    beta_out << '\n';
  }
  atomic_write((dir / "trace_beta.csv").string(), beta_out.str());

  const VectorXd gamma_series = trace(draws, TraceSelector::gamma());
  const VectorXd alpha_series = trace(draws, TraceSelector::alpha0());
  const VectorXd occupied_series = trace(draws, TraceSelector::occupied());
  std::ostringstream scalars;
  scalars << "draw,iteration,gamma,alpha0,occupied\n";
  for (std::size_t r = 0; r < count; ++r) {
    scalars << (r + 1) << ',' << draws.kept_iterations[r] << ','
            << format_double(gamma_series[static_cast<Eigen::Index>(r)]) << ','
            << format_double(alpha_series[static_cast<Eigen::Index>(r)]) << ','
            << static_cast<long>(occupied_series[static_cast<Eigen::Index>(r)]) << '\n';
  }
  atomic_write((dir / "trace_scalars.csv").string(), scalars.str());

  if (!marginals.empty()) {
    std::vector<VectorXd> series;
    std::ostringstream out;
    out << "draw,iteration";
    for (const auto& [j, d] : marginals) {
      out << ",marginal_" << (j + 1) << '_' << (d + 1);
      series.push_back(trace(draws, TraceSelector::marginal_prob(j, d)));
    }
    out << '\n';
    for (std::size_t r = 0; r < count; ++r) {
      out << (r + 1) << ',' << draws.kept_iterations[r];
      for (const auto& s : series) out << ',' << format_double(s[static_cast<Eigen::Index>(r)]);
      out << '\n';
    }
    atomic_write((dir / "trace_marginals.csv").string(), out.str());
  }
}

void write_joint_report_json(const JointTestReport& report, const std::string& path) {
  json doc;
  doc["replicates"] = report.replicates;
  doc["stat_count"] = report.stat_count;
  doc["within_three"] = report.within_three;
  doc["fraction_within_three"] = report.fraction_within_three();
  doc["max_abs_z"] = report.max_abs_z;
  doc["pass"] = report.pass();
  json stats = json::array();
  for (const auto& stat : report.stats) {
    json entry;
    entry["name"] = stat.name;
    entry["marginal_mean"] = stat.marginal_mean;
    entry["marginal_se"] = stat.marginal_se;
    entry["successive_mean"] = stat.successive_mean;
    entry["successive_se"] = stat.successive_se;
    entry["z"] = stat.z;
    stats.push_back(std::move(entry));
  }
  doc["stats"] = std::move(stats);
  atomic_write(path, doc.dump(2) + "\n");
}

void atomic_write(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  static std::atomic<unsigned long> counter{0};
  const fs::path temp = target.parent_path() /
                        (target.filename().string() + ".tmp." +
                         std::to_string(::getpid()) + "." + std::to_string(counter++));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(temp.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) throw DataError(temp.string() + ": write failed");
  }
  fs::rename(temp, target);
}

}  // namespace hdpmpm
