#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nilm/behaviour.hpp"
#include "nilm/classify.hpp"
#include "nilm/graph_layout.hpp"
#include "nilm/signal_model.hpp"

namespace nilm {

// Every tunable of the pipeline in one serializable document. A run is a
// pure function of (input files, config, seed); the config hash is stamped
// into every output for provenance.
struct RunConfig {
  // synthesis
  int homes = 3;
  int samples_per_home_per_label = 25;
  double background_watts = 80.0;
  double noise_sigma = 30.0;
  double home_jitter = 0.10;

  // preprocessing
  double filter_threshold_watts = 300.0;
  int window_len = 6;
  int padded_len = 8;

  // feature selection
  int top_k = 4;

  // decision forest
  int num_trees = 32;
  int max_internal_nodes = 128;

  // svm
  double svm_c = 1.0;
  int svm_degree = 2;
  double svm_coef0 = 1.0;

  // evaluation
  int k_folds = 10;

  // behaviour
  double z_threshold = 3.0;
  std::vector<ObservationWindow> windows = default_windows();

  // layout
  int layout_neighbours = 5;
  double layout_tol = 1e-3;
  int layout_min_size = 10;
  double layout_ratio = 0.75;
  double layout_theta = 1.2;
  int layout_max_iterations = 500;

  std::uint64_t seed = 42;
};

// Throws ConfigError on unknown keys, wrong types, or any value violating a
// module precondition.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& config);
void validate_config(const RunConfig& config);

// FNV-1a of the canonical JSON rendering, 16 hex digits.
std::string config_hash(const RunConfig& config);

SynthParams synth_params(const RunConfig& config);
PipelineSpec pipeline_spec(const RunConfig& config, ModelKind model,
                           SelectorKind selector);
LayoutParams layout_params(const RunConfig& config, int jobs);

}  // namespace nilm
