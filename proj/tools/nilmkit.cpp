// nilmkit: synthesize traces, train and evaluate classifiers, replay
// disaggregation, and derive routine/anomaly/layout reports. Every command
// is a pure function of (input files, config, seed); outputs embed the
// config hash and re-runs are byte-identical for any --jobs value.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nilm/behaviour.hpp"
#include "nilm/classify.hpp"
#include "nilm/config.hpp"
#include "nilm/errors.hpp"
#include "nilm/features.hpp"
#include "nilm/graph_layout.hpp"
#include "nilm/io.hpp"
#include "nilm/preprocess.hpp"
#include "nilm/rng.hpp"
#include "nilm/signal_model.hpp"
#include "nilm/timeutil.hpp"

namespace {

using namespace nilm;

constexpr std::uint64_t kTagDemoTrace = 0xd3a0;

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  if (dir.back() == '/') return dir + name;
  return dir + "/" + name;
}

// One activation of each class at a fixed daytime slot over a single day,
// composed with the configured background and noise. Serves as replayable
// input for the disaggregate command.
ComposeResult demo_day(const RunConfig& config) {
  static const int starts[kNumLabels] = {
      7 * 3600,           // Kettle 07:00
      7 * 3600 + 1800,    // Toaster 07:30
      12 * 3600,          // Microwave 12:00
      14 * 3600,          // WashingMachine 14:00
      18 * 3600,          // Cooker 18:00
  };
  std::vector<ScheduleEntry> schedule;
  for (int code = 0; code < kNumLabels; ++code)
    schedule.push_back(
        {default_signature(label_from_code(code)), starts[code]});
  const std::int64_t start_epoch = 1704067200;  // 2024-01-01T00:00:00Z
  return compose_aggregate(schedule, 86400, config.background_watts,
                           config.noise_sigma,
                           derive_seed(config.seed, {kTagDemoTrace}),
                           start_epoch);
}

FeatureCorpus corpus_from_windows(const WindowCorpus& corpus, int padded_len) {
  FeatureCorpus out;
  out.features = feature_matrix(corpus, padded_len);
  out.labels.reserve(corpus.rows.size());
  out.start_ts.reserve(corpus.rows.size());
  for (const WindowRow& row : corpus.rows) {
    out.labels.push_back(static_cast<int>(row.label));
    out.start_ts.push_back(row.source_start_t);
  }
  return out;
}

int cmd_synth(const RunConfig& config, const std::string& out_dir) {
  const std::string hash = config_hash(config);
  const WindowCorpus windows = synth_dataset(synth_params(config));
  const FeatureCorpus corpus = corpus_from_windows(windows, config.padded_len);
  write_corpus_csv(join_path(out_dir, "corpus.csv"), corpus, hash);
  write_minmax_json(join_path(out_dir, "corpus_minmax.json"),
                    minmax_normalize(corpus.features).stats, hash);

  const ComposeResult demo = demo_day(config);
  write_trace_csv(join_path(out_dir, "trace.csv"), demo.trace, hash);
  write_truth_csv(join_path(out_dir, "truth.csv"), demo.truth, hash);

  std::vector<long> per_label(kNumLabels, 0);
  for (const WindowRow& row : windows.rows)
    per_label[static_cast<int>(row.label)]++;
  const long total_windows = static_cast<long>(windows.rows.size());
  const long readings = total_windows * windows.window_len;
  std::cout << "corpus: " << total_windows << " windows ("
            << windows.window_len << " readings each), "
            << readings << " readings total\n";
  for (int code = 0; code < kNumLabels; ++code)
    std::cout << "  " << to_string(label_from_code(code)) << ": "
              << per_label[code] << " windows, "
              << per_label[code] * windows.window_len << " readings\n";
  std::cout << "wrote corpus.csv corpus_minmax.json trace.csv truth.csv\n";
  return 0;
}

int cmd_train_eval(const RunConfig& config, const std::string& corpus_path,
                   ModelKind model, SelectorKind selector,
                   const std::string& out_dir, int tune_iterations,
                   int jobs) {
  const std::string hash = config_hash(config);
  const FeatureCorpus corpus = read_corpus_csv(corpus_path);
  PipelineSpec spec = pipeline_spec(config, model, selector);
  if (tune_iterations > 0) {
    const TuneResult tuned =
        tune_random_search(corpus.features, corpus.labels, spec,
                           tune_iterations, config.seed, jobs);
    spec.forest = tuned.forest;
    spec.svm = tuned.svm;
    std::cout << "tuned macro AUC " << tuned.macro_auc << "\n";
  }

  const PipelineResult result =
      evaluate_pipeline(corpus.features, corpus.labels, spec, jobs);
  write_metrics_csv(join_path(out_dir, "metrics.csv"), result.eval, model,
                    selector, hash);

  ModelFile file;
  file.model = train_pipeline(corpus.features, corpus.labels, spec, jobs);
  file.window_len = config.window_len;
  file.padded_len = config.padded_len;
  file.filter_threshold_watts = config.filter_threshold_watts;
  write_model_json(join_path(out_dir, "model.json"), file, hash);

  if (selector != SelectorKind::None) {
    const Eigen::MatrixXd X_norm =
        minmax_normalize(corpus.features).normalized;
    const FeatureScores scores = selector == SelectorKind::Flda
                                     ? flda_scores(X_norm, corpus.labels)
                                     : spearman_scores(X_norm, corpus.labels);
    write_scores_json(join_path(out_dir, "scores.json"), scores, hash);
  }

  std::cout << "model " << to_string(model) << " selector "
            << to_string(selector) << ": macro AUC "
            << result.eval.macro_auc << ", accuracy "
            << result.eval.accuracy << "\n";
  std::cout << "wrote metrics.csv model.json"
            << (selector != SelectorKind::None ? " scores.json" : "") << "\n";
  return 0;
}

int cmd_disaggregate(const RunConfig& config, const std::string& model_path,
                     const std::string& trace_path, const std::string& out) {
  const std::string hash = config_hash(config);
  const ModelFile file = read_model_json(model_path);
  if (file.window_len != config.window_len ||
      file.padded_len != config.padded_len ||
      file.filter_threshold_watts != config.filter_threshold_watts)
    throw DataError(
        "model preprocessing contract does not match the configuration "
        "(window_len/padded_len/filter_threshold_watts)");

  const AggregateTrace trace = read_trace_csv(trace_path);
  const AggregateTrace filtered =
      highpass_filter(trace, file.filter_threshold_watts);
  const std::vector<EventWindow> events =
      detect_events(filtered, file.window_len);

  std::vector<DetectionEvent> detections;
  std::vector<int> instance_count(kNumLabels, 0);
  for (const EventWindow& window : events) {
    const FeatureVector fv = fft_features(window, file.padded_len);
    const PipelinePrediction pred =
        predict_pipeline(file.model, fv.magnitudes);
    DetectionEvent det;
    det.timestamp = trace.start_epoch + window.start_t;
    det.label = label_from_code(pred.label_code);
    det.device_id = std::string(to_string(det.label)) + "-" +
                    std::to_string(++instance_count[pred.label_code]);
    det.confidence = pred.confidence;
    detections.push_back(std::move(det));
  }
  write_detections_csv(out, detections, hash);
  std::cout << detections.size() << " detections -> " << out << "\n";
  return 0;
}

int cmd_routine(const RunConfig& config, const std::string& detections_path,
                const std::string& out_dir) {
  const std::string hash = config_hash(config);
  const std::vector<DetectionEvent> events =
      read_detections_csv(detections_path);
  const RoutineProfile profile = build_routine(events, config.windows);

  std::optional<Period> period;
  if (!events.empty()) {
    Period p;
    p.start = p.end = events.front().timestamp;
    for (const DetectionEvent& e : events) {
      p.start = std::min(p.start, e.timestamp);
      p.end = std::max(p.end, e.timestamp);
    }
    period = p;
  }
  write_routine_json(join_path(out_dir, "routine.json"), profile, period,
                     hash);
  write_sankey_json(join_path(out_dir, "sankey.json"), sankey_flows(profile),
                    hash);
  std::cout << profile.total << " events -> routine.json sankey.json\n";
  return 0;
}

int cmd_anomalies(const RunConfig& config, const std::string& detections_path,
                  const std::string& baseline_path, const std::string& out) {
  const std::string hash = config_hash(config);
  const std::vector<DetectionEvent> events =
      read_detections_csv(detections_path);
  const RoutineFile baseline = read_routine_json(baseline_path);

  if (baseline.period && !events.empty()) {
    std::int64_t lo = events.front().timestamp, hi = lo;
    for (const DetectionEvent& e : events) {
      lo = std::min(lo, e.timestamp);
      hi = std::max(hi, e.timestamp);
    }
    if (lo <= baseline.period->end && baseline.period->start <= hi)
      std::cerr << "warning: monitored events overlap the baseline period ("
                << format_iso8601(baseline.period->start) << " to "
                << format_iso8601(baseline.period->end) << ")\n";
  }

  const AnomalyReport report =
      zscore_anomalies(events, baseline.profile, config.z_threshold);
  write_anomalies_csv(out, report, hash);
  long flagged = 0;
  for (const ScoredEvent& entry : report.entries) flagged += entry.flagged;
  std::cout << flagged << " of " << report.entries.size()
            << " events flagged -> " << out << "\n";
  return 0;
}

int cmd_layout(const RunConfig& config, const std::string& corpus_path,
               const std::string& out_dir, int jobs) {
  const std::string hash = config_hash(config);
  const FeatureCorpus corpus = read_corpus_csv(corpus_path);
  const int n = static_cast<int>(corpus.features.rows());
  SimilarityGraph graph;
  if (n >= 2) {
    graph = device_similarity_graph(
        corpus.features, corpus.labels,
        std::min(config.layout_neighbours, n - 1));
  } else {
    // a lone feature row still renders: one vertex, no edges
    graph.num_vertices = n;
    graph.labels = corpus.labels;
    for (int i = 0; i < n; ++i) graph.ids.push_back(std::to_string(i));
  }
  const LayoutResult layout =
      multilevel_layout(graph, layout_params(config, jobs));
  write_layout_json(join_path(out_dir, "layout.json"), graph, layout, hash);
  write_layout_svg(join_path(out_dir, "layout.svg"), graph, layout);
  std::cout << graph.num_vertices << " vertices, "
            << graph.edges.size() << " edges, "
            << (layout.converged ? "converged" : "iteration cap hit")
            << " -> layout.json layout.svg\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-intrusive load monitoring toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_override = 0;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    sub->add_option("--seed", seed_override, "override the configured seed");
    sub->add_option("--jobs", jobs, "worker threads for training/evaluation")
        ->check(CLI::PositiveNumber);
  };

  // synth
  std::string out_dir = ".";
  int homes_override = 0, samples_override = 0;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a labeled corpus and a replayable day trace");
  add_common(synth);
  synth->add_option("--out-dir", out_dir, "output directory");
  synth->add_option("--homes", homes_override, "simulated properties");
  synth->add_option("--samples", samples_override,
                    "activations per property per appliance");

  // train-eval
  std::string corpus_path = "corpus.csv";
  std::string model_name = "forest", selector_name = "flda";
  int tune_iterations = 0;
  CLI::App* train = app.add_subcommand(
      "train-eval", "k-fold evaluation plus a persisted fitted model");
  add_common(train);
  train->add_option("--corpus", corpus_path, "labeled corpus CSV");
  train->add_option("--model", model_name, "forest|svm")
      ->check(CLI::IsMember({"forest", "svm"}));
  train->add_option("--selector", selector_name, "flda|sc|none")
      ->check(CLI::IsMember({"flda", "sc", "none"}));
  train->add_option("--out-dir", out_dir, "output directory");
  train->add_option("--tune", tune_iterations,
                    "random-search iterations before the final fit")
      ->check(CLI::NonNegativeNumber);

  // disaggregate
  std::string model_path = "model.json", trace_path = "trace.csv";
  std::string out_path = "detections.csv";
  CLI::App* disagg = app.add_subcommand(
      "disaggregate", "replay a trace through a fitted model");
  add_common(disagg);
  disagg->add_option("--model-file", model_path, "fitted model JSON");
  disagg->add_option("--trace", trace_path, "aggregate trace CSV");
  disagg->add_option("--out", out_path, "detections CSV to write");

  // routine
  std::string detections_path = "detections.csv";
  CLI::App* routine = app.add_subcommand(
      "routine", "observation-window profile and appliance-hour flows");
  add_common(routine);
  routine->add_option("--detections", detections_path, "detections CSV");
  routine->add_option("--out-dir", out_dir, "output directory");

  // anomalies
  std::string baseline_path = "routine.json";
  double threshold_override = -1.0;
  CLI::App* anomalies = app.add_subcommand(
      "anomalies", "z-score events against a baseline routine");
  add_common(anomalies);
  anomalies->add_option("--detections", detections_path, "detections CSV");
  anomalies->add_option("--baseline", baseline_path, "baseline routine JSON");
  anomalies->add_option("--out", out_path, "anomalies CSV to write");
  anomalies->add_option("--threshold", threshold_override,
                        "override the configured z threshold");

  // layout
  CLI::App* layout = app.add_subcommand(
      "layout", "similarity-graph layout of the corpus feature rows");
  add_common(layout);
  layout->add_option("--corpus", corpus_path, "labeled corpus CSV");
  layout->add_option("--out-dir", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    nilm::RunConfig config;
    if (!config_path.empty()) config = nilm::load_config(config_path);

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed")) config.seed = seed_override;
    if (sub == synth) {
      if (synth->count("--homes")) config.homes = homes_override;
      if (synth->count("--samples"))
        config.samples_per_home_per_label = samples_override;
    }
    if (sub == anomalies && anomalies->count("--threshold"))
      config.z_threshold = threshold_override;
    nilm::validate_config(config);

    if (sub == synth) return cmd_synth(config, out_dir);
    if (sub == train)
      return cmd_train_eval(config, corpus_path,
                            nilm::model_kind_from_string(model_name),
                            nilm::selector_from_string(selector_name),
                            out_dir, tune_iterations, jobs);
    if (sub == disagg)
      return cmd_disaggregate(config, model_path, trace_path, out_path);
    if (sub == routine) return cmd_routine(config, detections_path, out_dir);
    if (sub == anomalies)
      return cmd_anomalies(config, detections_path, baseline_path, out_path);
    if (sub == layout) return cmd_layout(config, corpus_path, out_dir, jobs);
    return 1;
  } catch (const nilm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nilm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
