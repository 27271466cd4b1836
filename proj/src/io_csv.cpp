#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "nilm/errors.hpp"
#include "nilm/io.hpp"
#include "nilm/timeutil.hpp"

namespace nilm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF on all hosts
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct CsvDoc {
  std::map<std::string, std::string> comments;  // "# key=value" lines
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line no, fields)
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

CsvDoc read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  CsvDoc doc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        doc.comments[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (doc.header.empty()) {
      doc.header = split_fields(line);
      continue;
    }
    doc.rows.push_back({line_no, split_fields(line)});
  }
  if (doc.header.empty())
    throw DataError(path + ": missing CSV header");
  return doc;
}

void expect_header(const CsvDoc& doc, const std::string& path,
                   const std::vector<std::string>& expected) {
  if (doc.header.size() < expected.size())
    throw DataError(path + ": header has " + std::to_string(doc.header.size()) +
                    " columns, expected at least " +
                    std::to_string(expected.size()));
  for (size_t i = 0; i < expected.size(); ++i)
    if (doc.header[i] != expected[i])
      throw DataError(path + ": header column " + std::to_string(i + 1) +
                      " is '" + doc.header[i] + "', expected '" + expected[i] +
                      "'");
}

[[noreturn]] void row_error(const std::string& path, int line_no,
                            const std::string& msg) {
  throw DataError(path + " line " + std::to_string(line_no) + ": " + msg);
}

double to_double(const std::string& path, int line_no, const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    row_error(path, line_no, "not a number: '" + s + "'");
  }
}

std::int64_t to_int64(const std::string& path, int line_no,
                      const std::string& s) {
  try {
    size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    row_error(path, line_no, "not an integer: '" + s + "'");
  }
}

void check_columns(const std::string& path, int line_no,
                   const std::vector<std::string>& fields, size_t n) {
  if (fields.size() != n)
    row_error(path, line_no,
              "has " + std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(n));
}

}  // namespace

void write_trace_csv(const std::string& path, const AggregateTrace& trace,
                     const std::string& hash) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "# start_epoch=" << trace.start_epoch << "\n";
  out << "t_seconds,watts\n";
  for (const PowerReading& r : trace.readings)
    out << r.t << "," << fmt("%.3f", r.watts) << "\n";
}

AggregateTrace read_trace_csv(const std::string& path) {
  const CsvDoc doc = read_csv(path);
  expect_header(doc, path, {"t_seconds", "watts"});
  AggregateTrace trace;
  if (auto it = doc.comments.find("start_epoch"); it != doc.comments.end())
    trace.start_epoch = to_int64(path, 0, it->second);
  std::int64_t prev_t = -kSampleIntervalS;
  bool first = true;
  for (const auto& [line_no, fields] : doc.rows) {
    check_columns(path, line_no, fields, 2);
    PowerReading r;
    r.t = to_int64(path, line_no, fields[0]);
    r.watts = to_double(path, line_no, fields[1]);
    if (r.watts < 0) row_error(path, line_no, "negative watts");
    if (r.t % kSampleIntervalS != 0)
      row_error(path, line_no, "timestamp not a multiple of 10 s");
    if (!first && r.t != prev_t + kSampleIntervalS)
      row_error(path, line_no, "gap or misorder: t=" + std::to_string(r.t) +
                                   " after t=" + std::to_string(prev_t));
    prev_t = r.t;
    first = false;
    trace.readings.push_back(r);
  }
  return trace;
}

void write_truth_csv(const std::string& path, const GroundTruthLog& truth,
                     const std::string& hash) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "label,start_t,end_t\n";
  for (const GroundTruthEntry& e : truth)
    out << to_string(e.label) << "," << e.start_t << "," << e.end_t << "\n";
}

GroundTruthLog read_truth_csv(const std::string& path) {
  const CsvDoc doc = read_csv(path);
  expect_header(doc, path, {"label", "start_t", "end_t"});
  GroundTruthLog truth;
  for (const auto& [line_no, fields] : doc.rows) {
    check_columns(path, line_no, fields, 3);
    GroundTruthEntry e;
    try {
      e.label = label_from_string(fields[0]);
    } catch (const DataError& err) {
      row_error(path, line_no, err.what());
    }
    e.start_t = to_int64(path, line_no, fields[1]);
    e.end_t = to_int64(path, line_no, fields[2]);
    if (e.end_t <= e.start_t) row_error(path, line_no, "end_t <= start_t");
    truth.push_back(e);
  }
  return truth;
}

void write_corpus_csv(const std::string& path, const FeatureCorpus& corpus,
                      const std::string& hash) {
  const int d = static_cast<int>(corpus.features.cols());
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "label,source_start_t";
  for (int j = 0; j < d; ++j) out << ",m" << j;
  out << "\n";
  for (int i = 0; i < corpus.features.rows(); ++i) {
    out << to_string(label_from_code(corpus.labels[i])) << ","
        << corpus.start_ts[i];
    for (int j = 0; j < d; ++j)
      out << "," << fmt("%.17g", corpus.features(i, j));
    out << "\n";
  }
}

FeatureCorpus read_corpus_csv(const std::string& path) {
  const CsvDoc doc = read_csv(path);
  expect_header(doc, path, {"label", "source_start_t"});
  const int d = static_cast<int>(doc.header.size()) - 2;
  if (d < 1) throw DataError(path + ": no feature columns");
  for (int j = 0; j < d; ++j)
    if (doc.header[j + 2] != "m" + std::to_string(j))
      throw DataError(path + ": feature column " + std::to_string(j) +
                      " must be named m" + std::to_string(j));
  FeatureCorpus corpus;
  corpus.features = Eigen::MatrixXd(doc.rows.size(), d);
  int i = 0;
  for (const auto& [line_no, fields] : doc.rows) {
    check_columns(path, line_no, fields, static_cast<size_t>(d) + 2);
    try {
      corpus.labels.push_back(static_cast<int>(label_from_string(fields[0])));
    } catch (const DataError& err) {
      row_error(path, line_no, err.what());
    }
    corpus.start_ts.push_back(to_int64(path, line_no, fields[1]));
    for (int j = 0; j < d; ++j) {
      const double v = to_double(path, line_no, fields[j + 2]);
      if (!(v >= 0)) row_error(path, line_no, "negative magnitude");
      corpus.features(i, j) = v;
    }
    ++i;
  }
  return corpus;
}

void write_detections_csv(const std::string& path,
                          const std::vector<DetectionEvent>& events,
                          const std::string& hash) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "timestamp_iso8601,label,device_id,confidence\n";
  for (const DetectionEvent& e : events)
    out << format_iso8601(e.timestamp) << "," << to_string(e.label) << ","
        << e.device_id << "," << fmt("%.6f", e.confidence) << "\n";
}

std::vector<DetectionEvent> read_detections_csv(const std::string& path) {
  const CsvDoc doc = read_csv(path);
  expect_header(doc, path,
                {"timestamp_iso8601", "label", "device_id", "confidence"});
  std::vector<DetectionEvent> events;
  for (const auto& [line_no, fields] : doc.rows) {
    check_columns(path, line_no, fields, 4);
    DetectionEvent e;
    try {
      e.timestamp = parse_iso8601(fields[0]);
      e.label = label_from_string(fields[1]);
    } catch (const DataError& err) {
      row_error(path, line_no, err.what());
    }
    e.device_id = fields[2];
    e.confidence = to_double(path, line_no, fields[3]);
    if (e.confidence < 0 || e.confidence > 1)
      row_error(path, line_no, "confidence outside [0, 1]");
    events.push_back(std::move(e));
  }
  return events;
}

void write_metrics_csv(const std::string& path, const EvalResult& result,
                       ModelKind model, SelectorKind selector,
                       const std::string& hash) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "# model=" << to_string(model) << "\n";
  out << "# selector=" << to_string(selector) << "\n";
  out << "device,sensitivity,specificity,auc\n";
  for (const ClassMetrics& cm : result.per_class) {
    const std::string device = cm.label_code >= 0 && cm.label_code < kNumLabels
                                   ? to_string(label_from_code(cm.label_code))
                                   : std::to_string(cm.label_code);
    out << device << "," << fmt("%.2f", 100.0 * cm.sensitivity) << ","
        << fmt("%.2f", 100.0 * cm.specificity) << ","
        << fmt("%.2f", 100.0 * cm.auc) << "\n";
  }
  out << "Macro," << fmt("%.2f", 100.0 * result.macro_sensitivity) << ","
      << fmt("%.2f", 100.0 * result.macro_specificity) << ","
      << fmt("%.2f", 100.0 * result.macro_auc) << "\n";
}

void write_anomalies_csv(const std::string& path, const AnomalyReport& report,
                         const std::string& hash) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << hash << "\n";
  out << "# z_threshold=" << fmt("%.17g", report.threshold) << "\n";
  out << "timestamp,label,z,flagged\n";
  for (const ScoredEvent& s : report.entries) {
    std::string z;
    if (std::isnan(s.z))
      z = "nan";
    else if (std::isinf(s.z))
      z = "inf";
    else
      z = fmt("%.9g", s.z);
    out << format_iso8601(s.event.timestamp) << "," << to_string(s.event.label)
        << "," << z << "," << (s.flagged ? "true" : "false") << "\n";
  }
}

}  // namespace nilm
