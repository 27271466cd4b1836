#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilm/behaviour.hpp"
#include "nilm/classify.hpp"
#include "nilm/graph_layout.hpp"
#include "nilm/preprocess.hpp"
#include "nilm/signal_model.hpp"

// File formats. Every writer stamps a `config_hash` (comment line in CSV,
// top-level key in JSON) so outputs are traceable to the run configuration.
// All text is ASCII with LF line endings; readers throw DataError with the
// offending line number.

namespace nilm {

// CSV `t_seconds,watts` (watts to 3 decimals) with a `# start_epoch=` line.
void write_trace_csv(const std::string& path, const AggregateTrace& trace,
                     const std::string& hash);
AggregateTrace read_trace_csv(const std::string& path);

// CSV `label,start_t,end_t`.
void write_truth_csv(const std::string& path, const GroundTruthLog& truth,
                     const std::string& hash);
GroundTruthLog read_truth_csv(const std::string& path);

// CSV `label,source_start_t,m0..mK` of raw (unnormalized) magnitudes.
struct FeatureCorpus {
  std::vector<int> labels;             // class code per row
  std::vector<std::int64_t> start_ts;  // source window start per row
  Eigen::MatrixXd features;
};
void write_corpus_csv(const std::string& path, const FeatureCorpus& corpus,
                      const std::string& hash);
FeatureCorpus read_corpus_csv(const std::string& path);

// Sidecar with the corpus per-column (min, max) for prediction-time reuse.
void write_minmax_json(const std::string& path, const MinMaxStats& stats,
                       const std::string& hash);
MinMaxStats read_minmax_json(const std::string& path);

// CSV `timestamp_iso8601,label,device_id,confidence`.
void write_detections_csv(const std::string& path,
                          const std::vector<DetectionEvent>& events,
                          const std::string& hash);
std::vector<DetectionEvent> read_detections_csv(const std::string& path);

// CSV `device,sensitivity,specificity,auc`, percent with 2 decimals, one row
// per class plus a trailing Macro row.
void write_metrics_csv(const std::string& path, const EvalResult& result,
                       ModelKind model, SelectorKind selector,
                       const std::string& hash);

// JSON list of {index, score, method}.
void write_scores_json(const std::string& path, const FeatureScores& scores,
                       const std::string& hash);

// Versioned model document: preprocessing contract (window length, padding,
// filter threshold), normalization stats, kept features, and the fitted
// forest or SVM.
struct ModelFile {
  PipelineModel model;
  int window_len = kDefaultWindowLen;
  int padded_len = kDefaultPaddedLen;
  double filter_threshold_watts = kDefaultFilterThresholdWatts;
};
void write_model_json(const std::string& path, const ModelFile& file,
                      const std::string& hash);
ModelFile read_model_json(const std::string& path);

// Inclusive epoch-second bounds of the detections a routine was built from.
struct Period {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

void write_routine_json(const std::string& path, const RoutineProfile& profile,
                        const std::optional<Period>& period,
                        const std::string& hash);
struct RoutineFile {
  RoutineProfile profile;
  std::optional<Period> period;
};
RoutineFile read_routine_json(const std::string& path);

// `{nodes:[{name}], links:[{source,target,value}]}` with appliance nodes
// first, then hour nodes; link indices reference the nodes array.
void write_sankey_json(const std::string& path,
                       const std::vector<SankeyFlow>& flows,
                       const std::string& hash);

// CSV `timestamp,label,z,flagged` plus a `# z_threshold=` line. Unscored
// events carry z=nan; a zero-dispersion off-time event carries z=inf.
void write_anomalies_csv(const std::string& path, const AnomalyReport& report,
                         const std::string& hash);

// `{vertices:[{id,label,x,y}], edges:[{u,v,w}]}` plus convergence info.
void write_layout_json(const std::string& path, const SimilarityGraph& graph,
                       const LayoutResult& layout, const std::string& hash);

// Scatter of the layout with one colour class per appliance label.
void write_layout_svg(const std::string& path, const SimilarityGraph& graph,
                      const LayoutResult& layout);

}  // namespace nilm
