#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "nilm/errors.hpp"
#include "nilm/io.hpp"
#include "nilm/timeutil.hpp"

namespace nilm {

namespace {

using nlohmann::json;

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd json_to_vector(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw DataError(where + ": expected an array");
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw DataError(where + ": expected numbers");
    v[static_cast<int>(i)] = arr[i].get<double>();
  }
  return v;
}

template <class T>
T require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw DataError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where + ": key '" + key + "': " + e.what());
  }
}

json tree_node_to_json(const DecisionTree& tree, int index) {
  const TreeNode& node = tree.nodes[index];
  json j;
  if (node.is_leaf()) {
    j["histogram"] = node.histogram;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = tree_node_to_json(tree, node.left);
    j["right"] = tree_node_to_json(tree, node.right);
  }
  return j;
}

int tree_node_from_json(const json& j, DecisionTree& tree,
                        const std::string& where) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("histogram")) {
    tree.nodes[index].histogram =
        require<std::vector<double>>(j, "histogram", where);
    for (double c : tree.nodes[index].histogram)
      if (c < 0) throw DataError(where + ": negative leaf count");
  } else {
    const int feature = require<int>(j, "feature", where);
    const double threshold = require<double>(j, "threshold", where);
    if (!j.contains("left") || !j.contains("right"))
      throw DataError(where + ": split node missing a child");
    const int left = tree_node_from_json(j.at("left"), tree, where);
    const int right = tree_node_from_json(j.at("right"), tree, where);
    tree.nodes[index].feature = feature;
    tree.nodes[index].threshold = threshold;
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
  }
  return index;
}

}  // namespace

void write_minmax_json(const std::string& path, const MinMaxStats& stats,
                       const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["col_min"] = vector_to_json(stats.col_min);
  j["col_max"] = vector_to_json(stats.col_max);
  write_json_file(path, j);
}

MinMaxStats read_minmax_json(const std::string& path) {
  const json j = load_json_file(path);
  MinMaxStats stats;
  if (!j.contains("col_min") || !j.contains("col_max"))
    throw DataError(path + ": missing col_min/col_max");
  stats.col_min = json_to_vector(j.at("col_min"), path);
  stats.col_max = json_to_vector(j.at("col_max"), path);
  if (stats.col_min.size() != stats.col_max.size())
    throw DataError(path + ": col_min/col_max length mismatch");
  return stats;
}

void write_scores_json(const std::string& path, const FeatureScores& scores,
                       const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["scores"] = json::array();
  for (const auto& [index, score] : scores.scores)
    j["scores"].push_back({{"index", index},
                           {"score", score},
                           {"method", to_string(scores.method)}});
  write_json_file(path, j);
}

void write_model_json(const std::string& path, const ModelFile& file,
                      const std::string& hash) {
  const PipelineModel& m = file.model;
  json j;
  j["version"] = 1;
  j["config_hash"] = hash;
  j["kind"] = to_string(m.kind);
  j["selector"] = to_string(m.selector);
  j["window_len"] = file.window_len;
  j["padded_len"] = file.padded_len;
  j["filter_threshold_watts"] = file.filter_threshold_watts;
  j["selected_features"] = m.selected_features;
  j["stats"] = {{"col_min", vector_to_json(m.stats.col_min)},
                {"col_max", vector_to_json(m.stats.col_max)}};

  if (m.kind == ModelKind::Forest) {
    json f;
    f["params"] = {{"num_trees", m.forest.params.num_trees},
                   {"max_internal_nodes", m.forest.params.max_internal_nodes},
                   {"min_samples_leaf", m.forest.params.min_samples_leaf},
                   {"bag_fraction", m.forest.params.bag_fraction},
                   {"seed", m.forest.params.seed}};
    f["class_codes"] = m.forest.class_codes;
    f["num_features"] = m.forest.num_features;
    f["trees"] = json::array();
    for (const DecisionTree& tree : m.forest.trees)
      f["trees"].push_back(tree_node_to_json(tree, 0));
    j["forest"] = std::move(f);
  } else {
    json s;
    s["params"] = {{"c", m.svm.params.C},
                   {"degree", m.svm.params.degree},
                   {"coef0", m.svm.params.coef0},
                   {"kkt_tolerance", m.svm.params.kkt_tolerance},
                   {"max_iterations", m.svm.params.max_iterations}};
    s["class_codes"] = m.svm.class_codes;
    s["num_features"] = m.svm.num_features;
    s["machines"] = json::array();
    for (const BinarySvm& machine : m.svm.machines) {
      json mj;
      mj["bias"] = machine.bias;
      mj["kkt_residual"] = machine.kkt_residual;
      mj["converged"] = machine.converged;
      mj["coefficients"] = vector_to_json(machine.coefficients);
      mj["support_vectors"] = json::array();
      for (int r = 0; r < machine.support_vectors.rows(); ++r)
        mj["support_vectors"].push_back(
            vector_to_json(machine.support_vectors.row(r).transpose()));
      s["machines"].push_back(std::move(mj));
    }
    j["svm"] = std::move(s);
  }
  write_json_file(path, j);
}

ModelFile read_model_json(const std::string& path) {
  const json j = load_json_file(path);
  if (require<int>(j, "version", path) != 1)
    throw DataError(path + ": unsupported model version");
  ModelFile file;
  PipelineModel& m = file.model;
  try {
    m.kind = model_kind_from_string(require<std::string>(j, "kind", path));
    m.selector = selector_from_string(require<std::string>(j, "selector", path));
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  file.window_len = require<int>(j, "window_len", path);
  file.padded_len = require<int>(j, "padded_len", path);
  file.filter_threshold_watts =
      require<double>(j, "filter_threshold_watts", path);
  m.selected_features = require<std::vector<int>>(j, "selected_features", path);
  if (!j.contains("stats")) throw DataError(path + ": missing stats");
  m.stats.col_min = json_to_vector(j.at("stats").at("col_min"), path);
  m.stats.col_max = json_to_vector(j.at("stats").at("col_max"), path);
  if (m.stats.col_min.size() != m.stats.col_max.size())
    throw DataError(path + ": stats length mismatch");
  for (int f : m.selected_features)
    if (f < 0 || f >= m.stats.col_min.size())
      throw DataError(path + ": selected feature index out of range");

  if (m.kind == ModelKind::Forest) {
    if (!j.contains("forest")) throw DataError(path + ": missing forest");
    const json& f = j.at("forest");
    const json& p = f.at("params");
    m.forest.params.num_trees = require<int>(p, "num_trees", path);
    m.forest.params.max_internal_nodes =
        require<int>(p, "max_internal_nodes", path);
    m.forest.params.min_samples_leaf = require<int>(p, "min_samples_leaf", path);
    m.forest.params.bag_fraction = require<double>(p, "bag_fraction", path);
    m.forest.params.seed = require<std::uint64_t>(p, "seed", path);
    m.forest.class_codes = require<std::vector<int>>(f, "class_codes", path);
    m.forest.num_features = require<int>(f, "num_features", path);
    if (!f.contains("trees") || !f.at("trees").is_array())
      throw DataError(path + ": missing trees");
    for (const json& tj : f.at("trees")) {
      DecisionTree tree;
      tree_node_from_json(tj, tree, path);
      for (const TreeNode& node : tree.nodes)
        if (!node.is_leaf() &&
            (node.feature >= m.forest.num_features || node.left < 0 ||
             node.right < 0))
          throw DataError(path + ": malformed tree node");
      m.forest.trees.push_back(std::move(tree));
    }
    if (m.forest.trees.empty()) throw DataError(path + ": empty forest");
  } else {
    if (!j.contains("svm")) throw DataError(path + ": missing svm");
    const json& s = j.at("svm");
    const json& p = s.at("params");
    m.svm.params.C = require<double>(p, "c", path);
    m.svm.params.degree = require<int>(p, "degree", path);
    m.svm.params.coef0 = require<double>(p, "coef0", path);
    m.svm.params.kkt_tolerance = require<double>(p, "kkt_tolerance", path);
    m.svm.params.max_iterations = require<long>(p, "max_iterations", path);
    m.svm.class_codes = require<std::vector<int>>(s, "class_codes", path);
    m.svm.num_features = require<int>(s, "num_features", path);
    if (!s.contains("machines") || !s.at("machines").is_array())
      throw DataError(path + ": missing machines");
    for (const json& mj : s.at("machines")) {
      BinarySvm machine;
      machine.bias = require<double>(mj, "bias", path);
      machine.kkt_residual = require<double>(mj, "kkt_residual", path);
      machine.converged = require<bool>(mj, "converged", path);
      machine.coefficients = json_to_vector(mj.at("coefficients"), path);
      const json& sv = mj.at("support_vectors");
      if (!sv.is_array()) throw DataError(path + ": support_vectors");
      machine.support_vectors =
          Eigen::MatrixXd(sv.size(), m.svm.num_features);
      for (size_t r = 0; r < sv.size(); ++r) {
        Eigen::VectorXd row = json_to_vector(sv[r], path);
        if (row.size() != m.svm.num_features)
          throw DataError(path + ": support vector width mismatch");
        machine.support_vectors.row(static_cast<int>(r)) = row.transpose();
      }
      if (machine.coefficients.size() !=
          static_cast<int>(machine.support_vectors.rows()))
        throw DataError(path + ": coefficient count mismatch");
      m.svm.machines.push_back(std::move(machine));
    }
    if (m.svm.machines.size() != m.svm.class_codes.size())
      throw DataError(path + ": one machine per class required");
  }
  return file;
}

void write_routine_json(const std::string& path, const RoutineProfile& profile,
                        const std::optional<Period>& period,
                        const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["total"] = profile.total;
  j["windows"] = json::array();
  for (const ObservationWindow& w : profile.windows)
    j["windows"].push_back({{"name", w.name},
                            {"start_minute", w.start_minute},
                            {"end_minute", w.end_minute}});
  j["counts"] = json::array();
  for (int code = 0; code < kNumLabels; ++code)
    for (size_t wi = 0; wi < profile.windows.size(); ++wi)
      if (profile.counts[code][wi] > 0)
        j["counts"].push_back(
            {{"label", to_string(label_from_code(code))},
             {"window", profile.windows[wi].name},
             {"count", profile.counts[code][wi]}});
  j["hour_flows"] = json::array();
  for (int code = 0; code < kNumLabels; ++code)
    for (int hour = 0; hour < 24; ++hour)
      if (profile.hour_flows[code][hour] > 0)
        j["hour_flows"].push_back(
            {{"label", to_string(label_from_code(code))},
             {"hour", hour},
             {"count", profile.hour_flows[code][hour]}});
  j["stats"] = json::array();
  for (int code = 0; code < kNumLabels; ++code) {
    const CircularStats& s = profile.stats[code];
    json sj;
    sj["label"] = to_string(label_from_code(code));
    sj["events"] = s.event_count;
    if (s.event_count > 0) {
      sj["mean_minute"] = s.mean_minute;
      sj["resultant"] = s.resultant;
      // infinity is not a JSON number; null round-trips to +inf
      if (std::isfinite(s.stddev_minutes))
        sj["stddev_minutes"] = s.stddev_minutes;
      else
        sj["stddev_minutes"] = nullptr;
    }
    j["stats"].push_back(std::move(sj));
  }
  if (period) {
    j["period"] = {{"start", format_iso8601(period->start)},
                   {"end", format_iso8601(period->end)}};
  } else {
    j["period"] = nullptr;
  }
  write_json_file(path, j);
}

RoutineFile read_routine_json(const std::string& path) {
  const json j = load_json_file(path);
  RoutineFile file;
  RoutineProfile& profile = file.profile;
  if (!j.contains("windows") || !j.at("windows").is_array())
    throw DataError(path + ": missing windows");
  for (const json& wj : j.at("windows")) {
    ObservationWindow w;
    w.name = require<std::string>(wj, "name", path);
    w.start_minute = require<int>(wj, "start_minute", path);
    w.end_minute = require<int>(wj, "end_minute", path);
    profile.windows.push_back(std::move(w));
  }
  try {
    validate_windows(profile.windows);
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  profile.counts.assign(kNumLabels,
                        std::vector<long>(profile.windows.size(), 0));
  profile.hour_flows.assign(kNumLabels, std::vector<long>(24, 0));
  profile.total = require<long>(j, "total", path);

  auto window_index = [&](const std::string& name) {
    for (size_t i = 0; i < profile.windows.size(); ++i)
      if (profile.windows[i].name == name) return static_cast<int>(i);
    throw DataError(path + ": unknown window '" + name + "'");
  };
  auto code_of = [&](const json& item) {
    try {
      return static_cast<int>(
          label_from_string(require<std::string>(item, "label", path)));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  };

  if (j.contains("counts"))
    for (const json& item : j.at("counts"))
      profile.counts[code_of(item)]
                    [window_index(require<std::string>(item, "window", path))] =
          require<long>(item, "count", path);
  if (j.contains("hour_flows"))
    for (const json& item : j.at("hour_flows")) {
      const int hour = require<int>(item, "hour", path);
      if (hour < 0 || hour > 23) throw DataError(path + ": hour out of range");
      profile.hour_flows[code_of(item)][hour] =
          require<long>(item, "count", path);
    }
  if (j.contains("stats"))
    for (const json& item : j.at("stats")) {
      const int code = code_of(item);
      CircularStats& s = profile.stats[code];
      s.event_count = require<long>(item, "events", path);
      if (s.event_count > 0) {
        s.mean_minute = require<double>(item, "mean_minute", path);
        s.resultant = require<double>(item, "resultant", path);
        if (item.contains("stddev_minutes") &&
            item.at("stddev_minutes").is_null())
          s.stddev_minutes = std::numeric_limits<double>::infinity();
        else
          s.stddev_minutes = require<double>(item, "stddev_minutes", path);
      }
    }
  if (j.contains("period") && !j.at("period").is_null()) {
    Period p;
    try {
      p.start = parse_iso8601(require<std::string>(j.at("period"), "start", path));
      p.end = parse_iso8601(require<std::string>(j.at("period"), "end", path));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
    file.period = p;
  }
  return file;
}

void write_sankey_json(const std::string& path,
                       const std::vector<SankeyFlow>& flows,
                       const std::string& hash) {
  json nodes = json::array();
  json links = json::array();
  std::vector<int> label_node(kNumLabels, -1);
  std::vector<int> hour_node(24, -1);
  for (const SankeyFlow& f : flows) {
    const int code = static_cast<int>(f.label);
    if (label_node[code] < 0) {
      label_node[code] = static_cast<int>(nodes.size());
      nodes.push_back({{"name", to_string(f.label)}});
    }
  }
  for (const SankeyFlow& f : flows) {
    if (hour_node[f.hour] < 0) {
      hour_node[f.hour] = static_cast<int>(nodes.size());
      char buf[8];
      std::snprintf(buf, sizeof(buf), "%02dh", f.hour);
      nodes.push_back({{"name", buf}});
    }
    links.push_back({{"source", label_node[static_cast<int>(f.label)]},
                     {"target", hour_node[f.hour]},
                     {"value", f.weight}});
  }
  json j;
  j["config_hash"] = hash;
  j["nodes"] = std::move(nodes);
  j["links"] = std::move(links);
  write_json_file(path, j);
}

void write_layout_json(const std::string& path, const SimilarityGraph& graph,
                       const LayoutResult& layout, const std::string& hash) {
  json j;
  j["config_hash"] = hash;
  j["converged"] = layout.converged;
  j["levels"] = layout.levels;
  j["vertices"] = json::array();
  for (int i = 0; i < graph.num_vertices; ++i) {
    json v;
    v["id"] = graph.ids.empty() ? std::to_string(i) : graph.ids[i];
    if (!graph.labels.empty() && graph.labels[i] >= 0 &&
        graph.labels[i] < kNumLabels)
      v["label"] = to_string(label_from_code(graph.labels[i]));
    else
      v["label"] = nullptr;
    v["x"] = layout.coords(i, 0);
    v["y"] = layout.coords(i, 1);
    j["vertices"].push_back(std::move(v));
  }
  j["edges"] = json::array();
  for (const GraphEdge& e : graph.edges)
    j["edges"].push_back({{"u", e.u}, {"v", e.v}, {"w", e.w}});
  write_json_file(path, j);
}

void write_layout_svg(const std::string& path, const SimilarityGraph& graph,
                      const LayoutResult& layout) {
  static const char* kPalette[kNumLabels] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                             "#d62728", "#9467bd"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);

  const int n = graph.num_vertices;
  double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
  if (n > 0) {
    lo_x = layout.coords.col(0).minCoeff();
    hi_x = layout.coords.col(0).maxCoeff();
    lo_y = layout.coords.col(1).minCoeff();
    hi_y = layout.coords.col(1).maxCoeff();
  }
  const double span_x = hi_x - lo_x > 0 ? hi_x - lo_x : 1.0;
  const double span_y = hi_y - lo_y > 0 ? hi_y - lo_y : 1.0;
  const double size = 800.0, margin = 30.0, inner = size - 2 * margin;

  auto px = [&](double x) { return margin + (x - lo_x) / span_x * inner; };
  auto py = [&](double y) { return margin + (hi_y - y) / span_y * inner; };
  auto f2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"800\" viewBox=\"0 0 800 800\">\n";
  out << "  <rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  for (const GraphEdge& e : graph.edges)
    out << "  <line x1=\"" << f2(px(layout.coords(e.u, 0))) << "\" y1=\""
        << f2(py(layout.coords(e.u, 1))) << "\" x2=\""
        << f2(px(layout.coords(e.v, 0))) << "\" y2=\""
        << f2(py(layout.coords(e.v, 1)))
        << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n";
  for (int i = 0; i < n; ++i) {
    const char* colour = "#444444";
    if (!graph.labels.empty() && graph.labels[i] >= 0 &&
        graph.labels[i] < kNumLabels)
      colour = kPalette[graph.labels[i]];
    out << "  <circle cx=\"" << f2(px(layout.coords(i, 0))) << "\" cy=\""
        << f2(py(layout.coords(i, 1))) << "\" r=\"4\" fill=\"" << colour
        << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace nilm
