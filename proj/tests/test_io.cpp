#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "suitfilter/errors.hpp"
#include "suitfilter/io.hpp"
#include "suitfilter/random.hpp"
#include "suitfilter/signals.hpp"

using namespace suitfilter;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "suitfilter_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<LogitRecord> random_records(std::size_t n, std::size_t k,
                                        Rng& rng, bool labels = true) {
  std::vector<LogitRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    LogitRecord r;
    r.id = "rec_" + std::to_string(i);
    r.logits.resize(k);
    for (auto& v : r.logits) v = rng.normal(0.0, 3.0);
    if (labels) r.label = static_cast<int>(rng.uniform_int(k));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("format_double emits shortest round-tripping strings") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.0) == "-3");
  CHECK(format_double(0.1) == "0.1");  // not 0.1000000000000000055...
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double v = rng.normal(0.0, 1e3);
    CHECK(std::stod(format_double(v)) == v);
  }
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(-1.0, 1.0) * 1e-8;
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("csv parse worked example with all optional columns") {
  const std::string text =
      "id,label,prediction,fold,logit_0,logit_1,logit_2\n"
      "a,0,,train,1.5,-0.25,0\n"
      "b,2,1,test,0.125,3,-7.5\n"
      "c,,,,-1,2,0.5\n";
  const LogitTable table = parse_logit_csv(text, "example.csv");
  CHECK(table.n_classes == 3);
  REQUIRE(table.records.size() == 3);

  const LogitRecord& a = table.records[0];
  CHECK(a.id == "a");
  REQUIRE(a.label.has_value());
  CHECK(*a.label == 0);
  CHECK_FALSE(a.prediction.has_value());
  CHECK(a.fold == "train");
  CHECK(a.logits == std::vector<double>{1.5, -0.25, 0.0});

  const LogitRecord& b = table.records[1];
  REQUIRE(b.prediction.has_value());
  CHECK(*b.prediction == 1);
  CHECK(b.fold == "test");

  const LogitRecord& c = table.records[2];
  CHECK_FALSE(c.label.has_value());
  CHECK(c.fold.empty());
}

TEST_CASE("csv parser handles minimal header and CRLF") {
  const std::string text =
      "id,logit_0,logit_1\r\n"
      "x,1,2\r\n"
      "y,3,4\r\n";
  const LogitTable table = parse_logit_csv(text, "crlf.csv");
  CHECK(table.n_classes == 2);
  CHECK(table.records[1].logits == std::vector<double>{3.0, 4.0});
  CHECK_FALSE(table.records[0].label.has_value());
}

TEST_CASE("csv parse errors carry row and column context") {
  const std::string header = "id,label,logit_0,logit_1\n";

  // Ragged row; the reported number is the physical file line.
  CHECK_THROWS_WITH_AS(parse_logit_csv(header + "a,0,1\n", "f.csv"),
                       doctest::Contains("line 2"), ParseError);
  // Non-numeric logit.
  CHECK_THROWS_WITH_AS(parse_logit_csv(header + "a,0,1,oops\n", "f.csv"),
                       doctest::Contains("logit_1"), ParseError);
  // Label out of range for two classes.
  CHECK_THROWS_AS(parse_logit_csv(header + "a,5,1,2\n", "f.csv"), ParseError);
  CHECK_THROWS_AS(parse_logit_csv(header + "a,-1,1,2\n", "f.csv"), ParseError);
  // Duplicate id.
  CHECK_THROWS_WITH_AS(
      parse_logit_csv(header + "a,0,1,2\na,1,3,4\n", "f.csv"),
      doctest::Contains("duplicate"), ParseError);
  // Empty id.
  CHECK_THROWS_AS(parse_logit_csv(header + ",0,1,2\n", "f.csv"), ParseError);
  // Missing logit columns entirely.
  CHECK_THROWS_AS(parse_logit_csv("id,label\na,0\n", "f.csv"), ParseError);
  // Unknown header column.
  CHECK_THROWS_AS(parse_logit_csv("id,mystery,logit_0\na,1,2\n", "f.csv"),
                  ParseError);
  // No data rows.
  CHECK_THROWS_AS(parse_logit_csv("id,logit_0\n", "f.csv"), ParseError);
  // Non-finite logit.
  CHECK_THROWS_AS(parse_logit_csv(header + "a,0,inf,2\n", "f.csv"),
                  ParseError);
}

TEST_CASE("jsonl parse worked example and errors") {
  const std::string text =
      R"({"id":"a","label":1,"logits":[0.5,1.5]})" "\n"
      R"({"id":"b","logits":[2,3],"fold":"u1","prediction":0})" "\n";
  const LogitTable table = parse_logit_jsonl(text, "f.jsonl");
  CHECK(table.n_classes == 2);
  REQUIRE(table.records.size() == 2);
  CHECK(table.records[0].id == "a");
  CHECK(*table.records[0].label == 1);
  CHECK(table.records[1].fold == "u1");
  CHECK(*table.records[1].prediction == 0);

  // Inconsistent k across lines.
  CHECK_THROWS_WITH_AS(
      parse_logit_jsonl(R"({"id":"a","logits":[1,2]})" "\n"
                        R"({"id":"b","logits":[1,2,3]})" "\n",
                        "f.jsonl"),
      doctest::Contains("line 2"), ParseError);
  // Malformed JSON.
  CHECK_THROWS_AS(parse_logit_jsonl("{not json}\n", "f.jsonl"), ParseError);
  // Missing required fields.
  CHECK_THROWS_AS(parse_logit_jsonl(R"({"id":"a"})" "\n", "f.jsonl"),
                  ParseError);
  CHECK_THROWS_AS(parse_logit_jsonl(R"({"logits":[1,2]})" "\n", "f.jsonl"),
                  ParseError);
  // Empty input.
  CHECK_THROWS_AS(parse_logit_jsonl("", "f.jsonl"), ParseError);
}

TEST_CASE("csv and jsonl round-trips preserve every double bit-exactly") {
  Rng rng(9);
  auto records = random_records(50, 6, rng);
  // Adversarial values: many digits, tiny, huge, negative zero.
  records[0].logits[0] = 0.1 + 0.2;  // 0.30000000000000004
  records[1].logits[1] = 1e-300;
  records[2].logits[2] = -1.7976931348623157e308;
  records[3].logits[3] = 5e-324;  // smallest subnormal
  records[4].prediction = 3;
  records[5].fold = "fold with space";

  for (auto format : {TableFormat::kCsv, TableFormat::kJsonl}) {
    const std::string text = format == TableFormat::kCsv
                                 ? logit_table_to_csv(records)
                                 : logit_table_to_jsonl(records);
    const LogitTable back = format == TableFormat::kCsv
                                ? parse_logit_csv(text, "rt")
                                : parse_logit_jsonl(text, "rt");
    REQUIRE(back.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(back.records[i].id == records[i].id);
      CHECK(back.records[i].label == records[i].label);
      CHECK(back.records[i].prediction == records[i].prediction);
      CHECK(back.records[i].fold == records[i].fold);
      REQUIRE(back.records[i].logits.size() == records[i].logits.size());
      for (std::size_t j = 0; j < records[i].logits.size(); ++j) {
        // Bitwise equality, not approximate.
        CHECK(back.records[i].logits[j] == records[i].logits[j]);
      }
    }
  }
}

TEST_CASE("optional csv columns are omitted when no record uses them") {
  Rng rng(2);
  const auto unlabeled = random_records(3, 2, rng, /*labels=*/false);
  const std::string text = logit_table_to_csv(unlabeled);
  CHECK(text.rfind("id,logit_0,logit_1\n", 0) == 0);

  auto labeled = unlabeled;
  labeled[1].label = 1;
  CHECK(logit_table_to_csv(labeled).rfind("id,label,logit_0", 0) == 0);
}

TEST_CASE("read/write logit tables through files with format detection") {
  const auto dir = temp_dir();
  Rng rng(3);
  const auto records = random_records(10, 4, rng);

  const auto csv_path = (dir / "table.csv").string();
  const auto jsonl_path = (dir / "table.jsonl").string();
  write_logit_table(csv_path, records);
  write_logit_table(jsonl_path, records);

  const LogitTable from_csv = read_logit_table(csv_path);
  const LogitTable from_jsonl = read_logit_table(jsonl_path);
  REQUIRE(from_csv.records.size() == 10);
  REQUIRE(from_jsonl.records.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(from_csv.records[i].logits == from_jsonl.records[i].logits);
    CHECK(from_csv.records[i].logits == records[i].logits);
  }
  CHECK_THROWS_AS(read_logit_table((dir / "missing.csv").string()),
                  ParseError);
}

TEST_CASE("signals csv has the canonical header and oracle-exact values") {
  LogitRecord r;
  r.id = "probe";
  r.logits = {1.0, 2.0, 3.0};
  const std::string csv = signals_to_csv({r});
  std::string header = "id";
  for (const auto& name : signal_names()) header += "," + name;
  CHECK(csv.rfind(header + "\n", 0) == 0);
  // conf_max of softmax([1,2,3]), frozen in the signal oracle suite; the
  // last printed digit may sit one ulp from the long-double reference.
  CHECK(csv.find("0.665240955774821") != std::string::npos);
}

TEST_CASE("estimator json round-trip is bit-identical in behaviour") {
  Rng rng(12);
  const auto records = random_records(80, 5, rng);
  const SignalMatrix signals = extract_matrix(records);
  const std::vector<int> labels = correctness_labels(records);
  CorrectnessEstimator est = train(signals, labels);
  est.calibrator = Calibrator::platt(1.25, -0.5);

  const std::string json = estimator_to_json_string(est);
  const CorrectnessEstimator back = estimator_from_json_string(json);
  CHECK(back.signal_order == est.signal_order);
  CHECK(back.weights == est.weights);
  CHECK(back.bias == est.bias);
  CHECK(back.normalizer.mean == est.normalizer.mean);
  CHECK(back.normalizer.std == est.normalizer.std);
  CHECK(back.calibrator.kind == est.calibrator.kind);
  CHECK(back.calibrator.a == est.calibrator.a);
  CHECK(back.calibrator.c == est.calibrator.c);
  CHECK(back.training_meta.iterations == est.training_meta.iterations);
  CHECK(back.training_meta.final_loss == est.training_meta.final_loss);
  CHECK(back.digest() == est.digest());
  // Identical predictions, bit for bit.
  CHECK(predict_pc(back, records) == predict_pc(est, records));

  // Temperature calibrator round-trips too.
  est.calibrator = Calibrator::temp(2.5);
  const CorrectnessEstimator back2 =
      estimator_from_json_string(estimator_to_json_string(est));
  CHECK(back2.calibrator.temperature == 2.5);
  CHECK(back2.digest() == est.digest());
}

TEST_CASE("estimator files round-trip through disk") {
  const auto dir = temp_dir();
  Rng rng(31);
  const auto records = random_records(30, 3, rng);
  const CorrectnessEstimator est =
      train(extract_matrix(records), correctness_labels(records));
  const auto path = (dir / "est.json").string();
  save_estimator(path, est);
  const CorrectnessEstimator back = load_estimator(path);
  CHECK(back.digest() == est.digest());
  CHECK_THROWS_AS(load_estimator((dir / "nope.json").string()), ParseError);
}

TEST_CASE("estimator json validation rejects corrupted documents") {
  Rng rng(14);
  const auto records = random_records(20, 3, rng);
  const CorrectnessEstimator est =
      train(extract_matrix(records), correctness_labels(records));
  const std::string good = estimator_to_json_string(est);

  auto corrupt = [&](const std::string& from, const std::string& to) {
    std::string t = good;
    const auto pos = t.find(from);
    REQUIRE(pos != std::string::npos);
    t.replace(pos, from.size(), to);
    return t;
  };

  CHECK_THROWS_AS(estimator_from_json_string("not json"), ParseError);
  CHECK_THROWS_AS(estimator_from_json_string("{}"), ParseError);
  // Unknown signal name.
  CHECK_THROWS_AS(
      estimator_from_json_string(corrupt("\"conf_max\"", "\"conf_mox\"")),
      ParseError);
  // Unsupported version.
  CHECK_THROWS_AS(
      estimator_from_json_string(corrupt("\"version\": 1", "\"version\": 99")),
      ParseError);
  // Unknown calibrator kind.
  CHECK_THROWS_AS(
      estimator_from_json_string(corrupt("\"none\"", "\"bogus\"")),
      ParseError);
}

TEST_CASE("report json carries the documented keys and degenerate t spelling") {
  SuitabilityReport r;
  r.suitable = true;
  r.suitable_raw = true;
  r.alpha = 0.05;
  r.margin_requested = 0.02;
  r.margin_used = 0.03;
  r.welch.t = -2.5;
  r.welch.df = 7.25;
  r.welch.p_one_sided = 0.021;
  r.welch.n_test = 100;
  r.welch.n_user = 80;
  r.mean_pc_test = 0.71;
  r.mean_pc_user = 0.74;
  r.estimator_id = "cafe0123cafe0123";
  r.timestamp = "2025-01-01T00:00:00Z";
  r.config_digest = "beef";
  r.correction = Correction::kPocock;
  r.stage = 2;

  const std::string json = report_to_json_string(r);
  for (const char* key :
       {"\"decision\"", "\"decision_raw\"", "\"p_value\"", "\"t\"", "\"df\"",
        "\"alpha\"", "\"m\"", "\"m_prime\"", "\"mean_pc_test\"",
        "\"mean_pc_user\"", "\"n_test\"", "\"n_user\"", "\"correction\"",
        "\"stage\"", "\"estimator_id\"", "\"timestamp\"",
        "\"config_digest\""}) {
    CHECK(json.find(key) != std::string::npos);
  }
  CHECK(json.find("\"SUITABLE\"") != std::string::npos);
  CHECK(json.find("pocock") != std::string::npos);

  r.suitable = false;
  r.welch.t = -std::numeric_limits<double>::infinity();
  const std::string degenerate = report_to_json_string(r);
  CHECK(degenerate.find("\"-inf\"") != std::string::npos);
  CHECK(degenerate.find("\"INCONCLUSIVE\"") != std::string::npos);
  r.welch.t = std::numeric_limits<double>::infinity();
  CHECK(report_to_json_string(r).find("\"inf\"") != std::string::npos);
}

TEST_CASE("experiment exports cover every record and field") {
  ExperimentRecord e;
  e.fold_user = "u";
  e.fold_test = "t";
  e.fold_sf = "s";
  e.acc_user = 0.625;
  e.acc_test = 0.75;
  e.ground_truth_suitable = false;
  e.p_value = 0.125;
  e.decision = false;
  e.delta_u = 0.01;
  e.delta_test = -0.02;
  e.accuracy_difference = -0.125;

  const std::string csv = experiments_to_csv({e});
  CHECK(csv.find("fold_user") != std::string::npos);
  CHECK(csv.find("u,t,s") != std::string::npos);
  CHECK(csv.find("0.625") != std::string::npos);

  const std::string jsonl = experiments_to_jsonl({e, e});
  // Two lines, each a standalone JSON object.
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(jsonl.find("\"p_value\"") != std::string::npos);

  GridSummary s;
  s.accuracy = 0.9;
  s.fpr = 0.0625;
  s.roc_auc = 0.875;
  const std::string summary = summary_to_json_string(s, 0.05, 42);
  CHECK(summary.find("\"accuracy\"") != std::string::npos);
  CHECK(summary.find("0.875") != std::string::npos);
  CHECK(summary.find("42") != std::string::npos);
  // Absent PR AUC serializes as null.
  CHECK(summary.find("null") != std::string::npos);

  SensitivityBin b;
  b.lo = -0.02;
  b.hi = -0.01;
  b.count = 5;
  b.suitable_fraction = 0.2;
  const std::string bins = bins_to_csv({b});
  CHECK(bins.find("lo,hi,count,suitable_fraction") != std::string::npos);
  CHECK(bins.find("-0.02,-0.01,5,0.2") != std::string::npos);
}

TEST_CASE("text file helpers") {
  const auto dir = temp_dir();
  const auto path = (dir / "note.txt").string();
  write_text_file(path, "hello\n");
  CHECK(read_text_file(path) == "hello\n");
  CHECK_THROWS_AS(read_text_file((dir / "absent.txt").string()), ParseError);
  CHECK_THROWS_AS(write_text_file((dir / "no_dir" / "x.txt").string(), "x"),
                  ConfigError);
}
