#include "suitfilter/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "suitfilter/errors.hpp"
#include "suitfilter/signals.hpp"

namespace suitfilter {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_csv_double(const std::string& field, const std::string& source,
                        std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(source + ": line " + std::to_string(row) +
                     ", column '" + column + "': not a number: '" + field +
                     "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(source + ": line " + std::to_string(row) +
                     ", column '" + column + "': non-finite value");
  }
  return v;
}

int parse_csv_int(const std::string& field, const std::string& source,
                  std::size_t row, const std::string& column) {
  int v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(source + ": line " + std::to_string(row) +
                     ", column '" + column + "': not an integer: '" + field +
                     "'");
  }
  return v;
}

void check_class_index(int value, std::size_t k, const std::string& source,
                       std::size_t row, const std::string& column) {
  if (value < 0 || static_cast<std::size_t>(value) >= k) {
    throw ParseError(source + ": line " + std::to_string(row) + ", column '" +
                     column + "': class index " + std::to_string(value) +
                     " outside [0," + std::to_string(k) + ")");
  }
}

void finish_table(LogitTable& table, const std::string& source) {
  if (table.records.empty()) {
    throw ParseError(source + ": no records");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(table.records.size());
  for (const auto& rec : table.records) {
    if (!seen.insert(rec.id).second) {
      throw ParseError(source + ": duplicate id '" + rec.id + "'");
    }
  }
  table.n_classes = table.records.front().logits.size();
}

TableFormat detect_format(const std::string& path, TableFormat format) {
  if (format != TableFormat::kAuto) return format;
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
    return TableFormat::kJsonl;
  }
  return TableFormat::kCsv;
}

json double_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double require_finite(const json& j, const std::string& key,
                      const std::string& source) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(source + ": missing numeric field '" + key + "'");
  }
  const double v = j[key].get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(source + ": field '" + key + "' is not finite");
  }
  return v;
}

std::vector<double> require_double_array(const json& j, const std::string& key,
                                         std::size_t expected,
                                         const std::string& source) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ParseError(source + ": missing array field '" + key + "'");
  }
  std::vector<double> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) {
    if (!v.is_number()) {
      throw ParseError(source + ": field '" + key +
                       "' contains a non-numeric entry");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ParseError(source + ": field '" + key +
                       "' contains a non-finite entry");
    }
    out.push_back(d);
  }
  if (out.size() != expected) {
    throw ParseError(source + ": field '" + key + "' has " +
                     std::to_string(out.size()) + " entries, expected " +
                     std::to_string(expected));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) {
    throw ConfigError("format_double: conversion failed");
  }
  return std::string(buf, ptr);
}

LogitTable read_logit_table(const std::string& path, TableFormat format) {
  const std::string text = read_text_file(path);
  switch (detect_format(path, format)) {
    case TableFormat::kJsonl:
      return parse_logit_jsonl(text, path);
    default:
      return parse_logit_csv(text, path);
  }
}

LogitTable parse_logit_csv(const std::string& text,
                           const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(source_name + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw ParseError(source_name + ": header must start with 'id'");
  }
  std::size_t col = 1;
  std::size_t label_col = 0, pred_col = 0, fold_col = 0;  // 0 = absent
  if (col < header.size() && header[col] == "label") label_col = col++;
  if (col < header.size() && header[col] == "prediction") pred_col = col++;
  if (col < header.size() && header[col] == "fold") fold_col = col++;
  const std::size_t first_logit = col;
  for (std::size_t i = 0; col < header.size(); ++col, ++i) {
    if (header[col] != "logit_" + std::to_string(i)) {
      throw ParseError(source_name + ": header column " +
                       std::to_string(col + 1) + " is '" + header[col] +
                       "', expected 'logit_" + std::to_string(i) + "'");
    }
  }
  const std::size_t k = header.size() - first_logit;
  if (k < 2) {
    throw ParseError(source_name +
                     ": need at least columns logit_0 and logit_1");
  }

  LogitTable table;
  std::size_t row = 1;  // physical line number; the header was line 1
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    LogitRecord rec;
    rec.id = fields[0];
    if (rec.id.empty()) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": empty id");
    }
    if (label_col != 0 && !fields[label_col].empty()) {
      const int v = parse_csv_int(fields[label_col], source_name, row, "label");
      check_class_index(v, k, source_name, row, "label");
      rec.label = v;
    }
    if (pred_col != 0 && !fields[pred_col].empty()) {
      const int v =
          parse_csv_int(fields[pred_col], source_name, row, "prediction");
      check_class_index(v, k, source_name, row, "prediction");
      rec.prediction = v;
    }
    if (fold_col != 0) {
      rec.fold = fields[fold_col];
    }
    rec.logits.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      rec.logits[i] = parse_csv_double(fields[first_logit + i], source_name,
                                       row, "logit_" + std::to_string(i));
    }
    table.records.push_back(std::move(rec));
  }
  finish_table(table, source_name);
  return table;
}

LogitTable parse_logit_jsonl(const std::string& text,
                             const std::string& source_name) {
  std::istringstream in(text);
  std::string line;
  LogitTable table;
  std::size_t row = 0;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source_name + ": line " + std::to_string(row) + ": " +
                       e.what());
    }
    if (!j.is_object()) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": expected a JSON object");
    }
    LogitRecord rec;
    if (!j.contains("id") || !j["id"].is_string()) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": missing string field 'id'");
    }
    rec.id = j["id"].get<std::string>();
    if (!j.contains("logits") || !j["logits"].is_array()) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": missing array field 'logits'");
    }
    for (const auto& v : j["logits"]) {
      if (!v.is_number()) {
        throw ParseError(source_name + ": line " + std::to_string(row) +
                         ", column 'logits': non-numeric entry");
      }
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        throw ParseError(source_name + ": line " + std::to_string(row) +
                         ", column 'logits': non-finite entry");
      }
      rec.logits.push_back(d);
    }
    if (rec.logits.size() < 2) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": need at least 2 logits");
    }
    if (k == 0) {
      k = rec.logits.size();
    } else if (rec.logits.size() != k) {
      throw ParseError(source_name + ": line " + std::to_string(row) +
                       ": has " + std::to_string(rec.logits.size()) +
                       " logits, expected " + std::to_string(k));
    }
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_number_integer()) {
        throw ParseError(source_name + ": line " + std::to_string(row) +
                         ", column 'label': not an integer");
      }
      const int v = j["label"].get<int>();
      check_class_index(v, k, source_name, row, "label");
      rec.label = v;
    }
    if (j.contains("prediction") && !j["prediction"].is_null()) {
      if (!j["prediction"].is_number_integer()) {
        throw ParseError(source_name + ": line " + std::to_string(row) +
                         ", column 'prediction': not an integer");
      }
      const int v = j["prediction"].get<int>();
      check_class_index(v, k, source_name, row, "prediction");
      rec.prediction = v;
    }
    if (j.contains("fold") && !j["fold"].is_null()) {
      if (!j["fold"].is_string()) {
        throw ParseError(source_name + ": line " + std::to_string(row) +
                         ", column 'fold': not a string");
      }
      rec.fold = j["fold"].get<std::string>();
    }
    table.records.push_back(std::move(rec));
  }
  finish_table(table, source_name);
  return table;
}

std::string logit_table_to_csv(const std::vector<LogitRecord>& records) {
  if (records.empty()) {
    throw InvalidInput("logit_table_to_csv: no records");
  }
  bool any_label = false, any_pred = false, any_fold = false;
  for (const auto& r : records) {
    any_label = any_label || r.label.has_value();
    any_pred = any_pred || r.prediction.has_value();
    any_fold = any_fold || !r.fold.empty();
  }
  const std::size_t k = records.front().logits.size();
  std::ostringstream out;
  out << "id";
  if (any_label) out << ",label";
  if (any_pred) out << ",prediction";
  if (any_fold) out << ",fold";
  for (std::size_t i = 0; i < k; ++i) out << ",logit_" << i;
  out << "\n";
  for (const auto& r : records) {
    out << r.id;
    if (any_label) {
      out << ',';
      if (r.label) out << *r.label;
    }
    if (any_pred) {
      out << ',';
      if (r.prediction) out << *r.prediction;
    }
    if (any_fold) out << ',' << r.fold;
    for (double z : r.logits) out << ',' << format_double(z);
    out << "\n";
  }
  return out.str();
}

std::string logit_table_to_jsonl(const std::vector<LogitRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["logits"] = r.logits;
    if (r.label) j["label"] = *r.label;
    if (r.prediction) j["prediction"] = *r.prediction;
    if (!r.fold.empty()) j["fold"] = r.fold;
    out << j.dump() << "\n";
  }
  return out.str();
}

void write_logit_table(const std::string& path,
                       const std::vector<LogitRecord>& records,
                       TableFormat format) {
  switch (detect_format(path, format)) {
    case TableFormat::kJsonl:
      write_text_file(path, logit_table_to_jsonl(records));
      break;
    default:
      write_text_file(path, logit_table_to_csv(records));
      break;
  }
}

std::string signals_to_csv(const std::vector<LogitRecord>& records) {
  std::ostringstream out;
  out << "id";
  for (const auto& name : signal_names()) out << ',' << name;
  out << "\n";
  for (const auto& r : records) {
    const auto arr = extract_signals(r).to_array();
    out << r.id;
    for (double v : arr) out << ',' << format_double(v);
    out << "\n";
  }
  return out.str();
}

std::string estimator_to_json_string(const CorrectnessEstimator& estimator) {
  json j;
  j["version"] = 1;
  j["signal_order"] = estimator.signal_order;
  j["weights"] = estimator.weights;
  j["bias"] = estimator.bias;
  j["normalizer"] = {{"mean", estimator.normalizer.mean},
                     {"std", estimator.normalizer.std},
                     {"fitted_on", estimator.normalizer.fitted_on}};
  json params = json::object();
  switch (estimator.calibrator.kind) {
    case Calibrator::Kind::kPlatt:
      params["a"] = estimator.calibrator.a;
      params["c"] = estimator.calibrator.c;
      break;
    case Calibrator::Kind::kTemperature:
      params["T"] = estimator.calibrator.temperature;
      break;
    default:
      break;
  }
  j["calibrator"] = {{"kind", to_string(estimator.calibrator.kind)},
                     {"params", params}};
  j["training_meta"] = {
      {"iterations", estimator.training_meta.iterations},
      {"final_loss", estimator.training_meta.final_loss},
      {"lambda", estimator.training_meta.lambda},
      {"converged", estimator.training_meta.converged},
      {"degenerate", estimator.training_meta.degenerate}};
  return j.dump(2) + "\n";
}

CorrectnessEstimator estimator_from_json_string(const std::string& text) {
  const std::string source = "estimator json";
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ParseError(source + ": expected a JSON object");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != 1) {
    throw ParseError(source + ": unsupported or missing version");
  }
  if (!j.contains("signal_order") || !j["signal_order"].is_array() ||
      j["signal_order"].empty()) {
    throw ParseError(source + ": missing non-empty array 'signal_order'");
  }

  CorrectnessEstimator est;
  for (const auto& v : j["signal_order"]) {
    if (!v.is_string()) {
      throw ParseError(source + ": signal_order entries must be strings");
    }
    const std::string name = v.get<std::string>();
    try {
      signal_index(name);
    } catch (const InvalidInput&) {
      throw ParseError(source + ": unknown signal name '" + name + "'");
    }
    est.signal_order.push_back(name);
  }
  const std::size_t s = est.signal_order.size();
  est.weights = require_double_array(j, "weights", s, source);
  est.bias = require_finite(j, "bias", source);

  if (!j.contains("normalizer") || !j["normalizer"].is_object()) {
    throw ParseError(source + ": missing object 'normalizer'");
  }
  const json& n = j["normalizer"];
  est.normalizer.mean = require_double_array(n, "mean", s, source);
  est.normalizer.std = require_double_array(n, "std", s, source);
  est.normalizer.fitted_on = n.value("fitted_on", std::string());
  for (double sd : est.normalizer.std) {
    if (!(sd > 0.0)) {
      throw ParseError(source + ": normalizer std entries must be > 0");
    }
  }

  if (!j.contains("calibrator") || !j["calibrator"].is_object()) {
    throw ParseError(source + ": missing object 'calibrator'");
  }
  const json& cal = j["calibrator"];
  if (!cal.contains("kind") || !cal["kind"].is_string()) {
    throw ParseError(source + ": calibrator needs a string 'kind'");
  }
  Calibrator::Kind kind;
  try {
    kind = calibrator_kind_from_string(cal["kind"].get<std::string>());
  } catch (const InvalidInput& e) {
    throw ParseError(source + ": " + e.what());
  }
  const json params = cal.value("params", json::object());
  switch (kind) {
    case Calibrator::Kind::kPlatt:
      est.calibrator = Calibrator::platt(require_finite(params, "a", source),
                                         require_finite(params, "c", source));
      break;
    case Calibrator::Kind::kTemperature: {
      const double t = require_finite(params, "T", source);
      if (!(t > 0.0)) {
        throw ParseError(source + ": temperature must be > 0");
      }
      est.calibrator = Calibrator::temp(t);
      break;
    }
    default:
      est.calibrator = Calibrator::none();
      break;
  }

  const json meta = j.value("training_meta", json::object());
  est.training_meta.iterations = meta.value("iterations", std::size_t{0});
  est.training_meta.final_loss = meta.value("final_loss", 0.0);
  est.training_meta.lambda = meta.value("lambda", 0.0);
  est.training_meta.converged = meta.value("converged", false);
  est.training_meta.degenerate = meta.value("degenerate", std::string());
  return est;
}

void save_estimator(const std::string& path,
                    const CorrectnessEstimator& estimator) {
  write_text_file(path, estimator_to_json_string(estimator));
}

CorrectnessEstimator load_estimator(const std::string& path) {
  try {
    return estimator_from_json_string(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string report_to_json_string(const SuitabilityReport& report) {
  json j;
  j["decision"] = report.suitable ? "SUITABLE" : "INCONCLUSIVE";
  j["decision_raw"] = report.suitable_raw ? "SUITABLE" : "INCONCLUSIVE";
  j["p_value"] = report.welch.p_one_sided;
  j["t"] = double_or_string(report.welch.t);
  j["df"] = report.welch.df;
  j["alpha"] = report.alpha;
  j["m"] = report.margin_requested;
  j["m_prime"] = report.margin_used;
  j["mean_pc_test"] = report.mean_pc_test;
  j["mean_pc_user"] = report.mean_pc_user;
  j["n_test"] = report.welch.n_test;
  j["n_user"] = report.welch.n_user;
  j["correction"] = to_string(report.correction);
  j["stage"] = report.stage;
  j["estimator_id"] = report.estimator_id;
  j["timestamp"] = report.timestamp;
  j["config_digest"] = report.config_digest;
  return j.dump(2) + "\n";
}

std::string experiments_to_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  out << "fold_user,fold_test,fold_sf,acc_user,acc_test,"
         "ground_truth_suitable,p_value,decision,delta_u,delta_test,"
         "accuracy_difference\n";
  for (const auto& r : records) {
    out << r.fold_user << ',' << r.fold_test << ',' << r.fold_sf << ','
        << format_double(r.acc_user) << ',' << format_double(r.acc_test) << ','
        << (r.ground_truth_suitable ? 1 : 0) << ','
        << format_double(r.p_value) << ',' << (r.decision ? 1 : 0) << ','
        << format_double(r.delta_u) << ',' << format_double(r.delta_test)
        << ',' << format_double(r.accuracy_difference) << "\n";
  }
  return out.str();
}

std::string experiments_to_jsonl(
    const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    json j;
    j["fold_user"] = r.fold_user;
    j["fold_test"] = r.fold_test;
    j["fold_sf"] = r.fold_sf;
    j["acc_user"] = r.acc_user;
    j["acc_test"] = r.acc_test;
    j["ground_truth_suitable"] = r.ground_truth_suitable;
    j["p_value"] = r.p_value;
    j["decision"] = r.decision;
    j["delta_u"] = r.delta_u;
    j["delta_test"] = r.delta_test;
    j["accuracy_difference"] = r.accuracy_difference;
    out << j.dump() << "\n";
  }
  return out.str();
}

std::string summary_to_json_string(const GridSummary& summary, double alpha,
                                   std::size_t n_records) {
  json j;
  j["n_records"] = n_records;
  j["alpha"] = alpha;
  j["accuracy"] = summary.accuracy;
  j["fpr"] = summary.fpr;
  j["roc_auc"] = summary.roc_auc ? json(*summary.roc_auc) : json(nullptr);
  j["pr_auc"] = summary.pr_auc ? json(*summary.pr_auc) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string bins_to_csv(const std::vector<SensitivityBin>& bins) {
  std::ostringstream out;
  out << "lo,hi,count,suitable_fraction\n";
  for (const auto& b : bins) {
    out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count
        << ',' << format_double(b.suitable_fraction) << "\n";
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw ConfigError("write failed: " + path);
  }
}

}  // namespace suitfilter
