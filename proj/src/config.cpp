#include "nilm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "nilm/errors.hpp"
#include "nilm/fft.hpp"

namespace nilm {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "homes",          "samples_per_home_per_label",
      "background_watts", "noise_sigma",
      "home_jitter",    "filter_threshold_watts",
      "window_len",     "padded_len",
      "top_k",          "num_trees",
      "max_internal_nodes", "svm_c",
      "svm_degree",     "svm_coef0",
      "k_folds",        "z_threshold",
      "windows",        "layout_neighbours",
      "layout_tol",     "layout_min_size",
      "layout_ratio",   "layout_theta",
      "layout_max_iterations", "seed",
  };
  return keys;
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config document must be an object");
  for (const auto& item : j.items())
    if (!known_keys().count(item.key()))
      throw ConfigError("unknown config key: " + item.key());

  RunConfig c;
  read_key(j, "homes", c.homes);
  read_key(j, "samples_per_home_per_label", c.samples_per_home_per_label);
  read_key(j, "background_watts", c.background_watts);
  read_key(j, "noise_sigma", c.noise_sigma);
  read_key(j, "home_jitter", c.home_jitter);
  read_key(j, "filter_threshold_watts", c.filter_threshold_watts);
  read_key(j, "window_len", c.window_len);
  read_key(j, "padded_len", c.padded_len);
  read_key(j, "top_k", c.top_k);
  read_key(j, "num_trees", c.num_trees);
  read_key(j, "max_internal_nodes", c.max_internal_nodes);
  read_key(j, "svm_c", c.svm_c);
  read_key(j, "svm_degree", c.svm_degree);
  read_key(j, "svm_coef0", c.svm_coef0);
  read_key(j, "k_folds", c.k_folds);
  read_key(j, "z_threshold", c.z_threshold);
  read_key(j, "layout_neighbours", c.layout_neighbours);
  read_key(j, "layout_tol", c.layout_tol);
  read_key(j, "layout_min_size", c.layout_min_size);
  read_key(j, "layout_ratio", c.layout_ratio);
  read_key(j, "layout_theta", c.layout_theta);
  read_key(j, "layout_max_iterations", c.layout_max_iterations);
  read_key(j, "seed", c.seed);

  if (j.contains("windows")) {
    const nlohmann::json& w = j.at("windows");
    if (!w.is_array()) throw ConfigError("config key 'windows' must be an array");
    c.windows.clear();
    for (const nlohmann::json& entry : w) {
      if (!entry.is_object())
        throw ConfigError("each observation window must be an object");
      for (const auto& item : entry.items())
        if (item.key() != "name" && item.key() != "start_minute" &&
            item.key() != "end_minute")
          throw ConfigError("unknown observation window key: " + item.key());
      ObservationWindow ow;
      read_key(entry, "name", ow.name);
      read_key(entry, "start_minute", ow.start_minute);
      read_key(entry, "end_minute", ow.end_minute);
      c.windows.push_back(std::move(ow));
    }
  }

  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["homes"] = c.homes;
  j["samples_per_home_per_label"] = c.samples_per_home_per_label;
  j["background_watts"] = c.background_watts;
  j["noise_sigma"] = c.noise_sigma;
  j["home_jitter"] = c.home_jitter;
  j["filter_threshold_watts"] = c.filter_threshold_watts;
  j["window_len"] = c.window_len;
  j["padded_len"] = c.padded_len;
  j["top_k"] = c.top_k;
  j["num_trees"] = c.num_trees;
  j["max_internal_nodes"] = c.max_internal_nodes;
  j["svm_c"] = c.svm_c;
  j["svm_degree"] = c.svm_degree;
  j["svm_coef0"] = c.svm_coef0;
  j["k_folds"] = c.k_folds;
  j["z_threshold"] = c.z_threshold;
  j["layout_neighbours"] = c.layout_neighbours;
  j["layout_tol"] = c.layout_tol;
  j["layout_min_size"] = c.layout_min_size;
  j["layout_ratio"] = c.layout_ratio;
  j["layout_theta"] = c.layout_theta;
  j["layout_max_iterations"] = c.layout_max_iterations;
  j["seed"] = c.seed;
  j["windows"] = nlohmann::json::array();
  for (const ObservationWindow& w : c.windows)
    j["windows"].push_back({{"name", w.name},
                            {"start_minute", w.start_minute},
                            {"end_minute", w.end_minute}});
  return j;
}

void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.homes < 1) fail("homes must be >= 1");
  if (c.samples_per_home_per_label < 1) fail("samples_per_home_per_label must be >= 1");
  if (c.background_watts < 0) fail("background_watts must be >= 0");
  if (c.noise_sigma < 0) fail("noise_sigma must be >= 0");
  if (c.home_jitter < 0 || c.home_jitter > 0.5) fail("home_jitter must be in [0, 0.5]");
  if (c.filter_threshold_watts < 0) fail("filter_threshold_watts must be >= 0");
  if (c.window_len < 2) fail("window_len must be >= 2");
  if (!is_pow2(static_cast<std::size_t>(c.padded_len)))
    fail("padded_len must be a power of two");
  if (c.padded_len < c.window_len) fail("padded_len must be >= window_len");
  if (c.top_k < 1 || c.top_k > c.padded_len / 2 + 1)
    fail("top_k must be in [1, padded_len/2 + 1]");
  if (c.num_trees < 1) fail("num_trees must be >= 1");
  if (c.max_internal_nodes < 1) fail("max_internal_nodes must be >= 1");
  if (c.svm_c <= 0) fail("svm_c must be > 0");
  if (c.svm_degree < 1) fail("svm_degree must be >= 1");
  if (c.k_folds < 2) fail("k_folds must be >= 2");
  if (c.z_threshold < 0) fail("z_threshold must be >= 0");
  if (c.layout_neighbours < 1) fail("layout_neighbours must be >= 1");
  if (c.layout_tol <= 0) fail("layout_tol must be > 0");
  if (c.layout_min_size < 2) fail("layout_min_size must be >= 2");
  if (c.layout_ratio <= 0 || c.layout_ratio >= 1)
    fail("layout_ratio must be in (0, 1)");
  if (c.layout_theta < 0) fail("layout_theta must be >= 0");
  if (c.layout_max_iterations < 1) fail("layout_max_iterations must be >= 1");
  try {
    validate_windows(c.windows);
  } catch (const std::invalid_argument& e) {
    fail(std::string("windows: ") + e.what());
  }
}

std::string config_hash(const RunConfig& config) {
  const std::string doc = config_to_json(config).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : doc) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

SynthParams synth_params(const RunConfig& c) {
  SynthParams p;
  p.homes = c.homes;
  p.samples_per_home_per_label = c.samples_per_home_per_label;
  p.window_len = c.window_len;
  p.seed = c.seed;
  p.background_watts = c.background_watts;
  p.noise_sigma = c.noise_sigma;
  p.filter_threshold_watts = c.filter_threshold_watts;
  p.home_jitter = c.home_jitter;
  return p;
}

PipelineSpec pipeline_spec(const RunConfig& c, ModelKind model,
                           SelectorKind selector) {
  PipelineSpec spec;
  spec.model = model;
  spec.selector = selector;
  spec.top_k = c.top_k;
  spec.k_folds = c.k_folds;
  spec.seed = c.seed;
  spec.forest.num_trees = c.num_trees;
  spec.forest.max_internal_nodes = c.max_internal_nodes;
  spec.forest.seed = c.seed;
  spec.svm.C = c.svm_c;
  spec.svm.degree = c.svm_degree;
  spec.svm.coef0 = c.svm_coef0;
  return spec;
}

LayoutParams layout_params(const RunConfig& c, int jobs) {
  LayoutParams p;
  p.tol = c.layout_tol;
  p.min_size = c.layout_min_size;
  p.coarsen_ratio = c.layout_ratio;
  p.max_iterations_per_level = c.layout_max_iterations;
  p.theta = c.layout_theta;
  p.seed = c.seed;
  p.jobs = jobs;
  return p;
}

}  // namespace nilm
