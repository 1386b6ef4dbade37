// suitfilter CLI: signal extraction, estimator training, suitability
// decisions, sequential monitoring, and the evaluation harness.
//
// Exit codes for `decide`: 0 = SUITABLE, 10 = INCONCLUSIVE, anything else is
// an error.  Other subcommands exit 0 on success.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "suitfilter/calibration.hpp"
#include "suitfilter/correctness.hpp"
#include "suitfilter/errors.hpp"
#include "suitfilter/harness.hpp"
#include "suitfilter/io.hpp"
#include "suitfilter/pipeline.hpp"
#include "suitfilter/random.hpp"
#include "suitfilter/signals.hpp"

namespace sf = suitfilter;
using nlohmann::json;

namespace {

constexpr int kExitSuitable = 0;
constexpr int kExitInconclusive = 10;
constexpr int kExitError = 1;

std::uint64_t default_seed() {
  const char* env = std::getenv("SUITFILTER_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw sf::ConfigError("SUITFILTER_SEED is not an unsigned integer");
  }
}

struct SignalsArgs {
  std::string input;
  std::string out;
};

struct TrainArgs {
  std::string sf_path;
  std::string out;
  double lambda = 1e-4;
  std::size_t max_iters = 10000;
  double tolerance = 1e-8;
  std::string calibrate = "none";
  double calibration_split = 0.0;
  std::string calibrate_on_user;  // oracle mode
  std::vector<std::string> signals;
  bool no_normalize = false;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct DecideArgs {
  std::string estimator;
  std::string test;
  std::string user;
  double margin = 0.0;
  double alpha = 0.05;
  std::optional<double> delta_test;
  std::optional<double> delta_u;
  std::string report;
  bool as_json = false;
  bool quiet = false;
};

struct MonitorArgs {
  std::string estimator;
  std::string test;
  std::vector<std::string> users;
  double margin = 0.0;
  double alpha = 0.05;
  std::string correction = "none";
  std::size_t stages = 0;
  std::string report;
  bool as_json = false;
  bool quiet = false;
};

struct GridArgs {
  std::string folds;
  double margin = 0.0;
  double alpha = 0.05;
  double lambda = 1e-4;
  std::size_t max_iters = 10000;
  double tolerance = 1e-8;
  double bin_width = 0.01;
  std::string out;
  std::string summary;
  std::string bins;
  bool quiet = false;
};

struct SynthArgs {
  std::string config;
  std::string out_dir;
  std::string format = "csv";
  bool quiet = false;
};

struct DiagnoseArgs {
  std::string estimator;
  std::string labeled;
  std::size_t bins = 10;
  bool as_json = false;
};

std::vector<std::size_t> signal_indices_for(
    const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(sf::signal_index(n));
  return idx;
}

int run_signals(const SignalsArgs& args) {
  const sf::LogitTable table = sf::read_logit_table(args.input);
  const std::string csv = sf::signals_to_csv(table.records);
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    sf::write_text_file(args.out, csv);
  }
  return 0;
}

int run_train(const TrainArgs& args) {
  const sf::LogitTable table = sf::read_logit_table(args.sf_path);
  const std::vector<int> labels = sf::correctness_labels(table.records);
  sf::SignalMatrix matrix = sf::extract_matrix(table.records);

  std::vector<std::string> order = args.signals;
  if (order.empty()) {
    order = sf::signal_names();
  } else {
    std::set<std::string> unique(order.begin(), order.end());
    if (unique.size() != order.size()) {
      throw sf::ConfigError("--signals lists a signal twice");
    }
    matrix = sf::select_columns(matrix, signal_indices_for(order));
  }

  if (args.calibration_split < 0.0 || args.calibration_split >= 1.0) {
    throw sf::ConfigError("--calibration-split must lie in [0,1)");
  }
  if (!args.calibrate_on_user.empty() && args.calibrate == "none") {
    throw sf::ConfigError("--calibrate-on-user requires --calibrate");
  }
  if (args.calibration_split > 0.0 && args.calibrate == "none") {
    throw sf::ConfigError("--calibration-split requires --calibrate");
  }

  // Optional held-out calibration split, drawn with the seeded RNG so runs
  // are reproducible.
  std::vector<std::size_t> train_rows(matrix.rows());
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::vector<std::size_t> calib_rows;
  if (args.calibration_split > 0.0) {
    sf::Rng rng(args.seed ? *args.seed : default_seed());
    for (std::size_t i = train_rows.size() - 1; i > 0; --i) {
      std::swap(train_rows[i],
                train_rows[static_cast<std::size_t>(
                    rng.uniform_int(static_cast<int>(i + 1)))]);
    }
    const auto n_calib = static_cast<std::size_t>(
        args.calibration_split * static_cast<double>(matrix.rows()));
    if (n_calib == 0 || n_calib >= matrix.rows()) {
      throw sf::ConfigError("--calibration-split leaves an empty split");
    }
    calib_rows.assign(train_rows.begin(),
                      train_rows.begin() + static_cast<std::ptrdiff_t>(n_calib));
    train_rows.erase(train_rows.begin(),
                     train_rows.begin() + static_cast<std::ptrdiff_t>(n_calib));
  }

  auto take_rows = [&](const std::vector<std::size_t>& rows,
                       sf::SignalMatrix& out_m, std::vector<int>& out_l) {
    out_m = sf::SignalMatrix(rows.size(), matrix.cols());
    out_l.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t c = 0; c < matrix.cols(); ++c) {
        out_m.at(i, c) = matrix.at(rows[i], c);
      }
      out_l[i] = labels[rows[i]];
    }
  };

  sf::SignalMatrix train_matrix;
  std::vector<int> train_labels;
  take_rows(train_rows, train_matrix, train_labels);

  sf::TrainConfig config;
  config.lambda = args.lambda;
  config.max_iters = args.max_iters;
  config.tolerance = args.tolerance;
  config.normalize = !args.no_normalize;
  config.fitted_on = std::filesystem::path(args.sf_path).filename().string();
  sf::CorrectnessEstimator est =
      sf::train(train_matrix, train_labels, config, order);

  if (args.calibrate != "none") {
    sf::SignalMatrix calib_matrix;
    std::vector<int> calib_labels;
    if (!args.calibrate_on_user.empty()) {
      // Oracle mode: calibrate on a labeled user split (Figure-4-style
      // theoretical experiment, not a deployment path).
      const sf::LogitTable user = sf::read_logit_table(args.calibrate_on_user);
      calib_labels = sf::correctness_labels(user.records);
      calib_matrix = sf::extract_matrix(user.records);
      if (!args.signals.empty()) {
        calib_matrix =
            sf::select_columns(calib_matrix, signal_indices_for(order));
      }
    } else if (!calib_rows.empty()) {
      take_rows(calib_rows, calib_matrix, calib_labels);
    } else {
      calib_matrix = matrix;
      calib_labels = labels;
    }
    const std::vector<double> scores = sf::raw_scores(est, calib_matrix);
    est.calibrator = args.calibrate == "platt"
                         ? sf::fit_platt(scores, calib_labels)
                         : sf::fit_temperature(scores, calib_labels);
  }

  sf::save_estimator(args.out, est);
  if (!args.quiet) {
    std::cout << "trained on " << train_matrix.rows() << " samples, "
              << order.size() << " signals; final loss "
              << sf::format_double(est.training_meta.final_loss)
              << (est.training_meta.converged ? " (converged)" : "")
              << (est.training_meta.degenerate.empty()
                      ? ""
                      : " [degenerate: " + est.training_meta.degenerate + "]")
              << "; estimator " << est.digest() << " -> " << args.out
              << std::endl;
  }
  return 0;
}

int run_decide(const DecideArgs& args) {
  if (args.delta_test.has_value() != args.delta_u.has_value()) {
    throw sf::ConfigError("--delta-test and --delta-u must be given together");
  }
  const sf::CorrectnessEstimator est = sf::load_estimator(args.estimator);
  const sf::LogitTable test = sf::read_logit_table(args.test);
  const sf::LogitTable user = sf::read_logit_table(args.user);

  std::optional<std::pair<double, double>> adjustment;
  if (args.delta_test) {
    adjustment = std::make_pair(*args.delta_test, *args.delta_u);
  }
  const sf::SuitabilityReport report = sf::decide(
      est, test.records, user.records, args.margin, args.alpha, adjustment);

  const std::string report_json = sf::report_to_json_string(report);
  if (!args.report.empty()) {
    sf::write_text_file(args.report, report_json);
  }
  if (!args.quiet) {
    if (args.as_json) {
      std::cout << report_json;
    } else {
      std::cout << (report.suitable ? "SUITABLE" : "INCONCLUSIVE")
                << " (p=" << sf::format_double(report.welch.p_one_sided)
                << ", alpha=" << sf::format_double(report.alpha)
                << ", m'=" << sf::format_double(report.margin_used) << ")"
                << std::endl;
    }
  }
  return report.suitable ? kExitSuitable : kExitInconclusive;
}

int run_monitor(const MonitorArgs& args) {
  const sf::CorrectnessEstimator est = sf::load_estimator(args.estimator);
  const sf::LogitTable test = sf::read_logit_table(args.test);
  const sf::Correction correction = sf::correction_from_string(args.correction);

  sf::MonitorSession session(est, test.records, args.margin, args.alpha,
                             correction, args.stages);
  for (const auto& path : args.users) {
    const sf::LogitTable batch = sf::read_logit_table(path);
    session.add_batch(batch.records);
  }

  std::string out;
  for (const auto& rep : session.reports()) {
    out += sf::report_to_json_string(rep);
  }
  if (!args.report.empty()) {
    sf::write_text_file(args.report, out);
  }
  if (!args.quiet) {
    if (args.as_json) {
      std::cout << out;
    } else {
      for (const auto& rep : session.reports()) {
        std::cout << "stage " << rep.stage << ": p="
                  << sf::format_double(rep.welch.p_one_sided) << " raw="
                  << (rep.suitable_raw ? "SUITABLE" : "INCONCLUSIVE")
                  << " corrected="
                  << (rep.suitable ? "SUITABLE" : "INCONCLUSIVE") << std::endl;
      }
    }
  }
  return 0;
}

std::vector<std::pair<std::string, std::vector<sf::LogitRecord>>> load_folds(
    const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::vector<sf::LogitRecord>>> folds;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".csv" || ext == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      sf::LogitTable table = sf::read_logit_table(f.string());
      folds.emplace_back(f.stem().string(), std::move(table.records));
    }
    return folds;
  }
  // Single file: group by the fold column.
  sf::LogitTable table = sf::read_logit_table(path);
  std::vector<std::string> order;
  std::map<std::string, std::vector<sf::LogitRecord>> by_fold;
  for (auto& rec : table.records) {
    if (rec.fold.empty()) {
      throw sf::ConfigError("--folds file: record '" + rec.id +
                            "' has no fold assignment");
    }
    if (by_fold.find(rec.fold) == by_fold.end()) order.push_back(rec.fold);
    by_fold[rec.fold].push_back(std::move(rec));
  }
  for (const auto& name : order) {
    folds.emplace_back(name, std::move(by_fold[name]));
  }
  return folds;
}

void write_grid_outputs(const std::vector<sf::ExperimentRecord>& records,
                        const sf::GridConfig& config, double bin_width,
                        const std::string& out, const std::string& summary,
                        const std::string& bins, bool quiet) {
  if (!out.empty()) {
    const bool jsonl =
        out.size() >= 6 && out.substr(out.size() - 6) == ".jsonl";
    sf::write_text_file(out, jsonl ? sf::experiments_to_jsonl(records)
                                   : sf::experiments_to_csv(records));
  }
  const sf::GridSummary s = sf::summarize(records, config.alpha);
  if (!summary.empty()) {
    sf::write_text_file(summary,
                        sf::summary_to_json_string(s, config.alpha,
                                                   records.size()));
  }
  if (!bins.empty()) {
    sf::write_text_file(
        bins, sf::bins_to_csv(
                  sf::sensitivity_bins(records, config.alpha, bin_width)));
  }
  if (!quiet) {
    std::cout << records.size() << " experiments; decision accuracy "
              << sf::format_double(s.accuracy) << ", FPR "
              << sf::format_double(s.fpr);
    if (s.roc_auc) std::cout << ", ROC AUC " << sf::format_double(*s.roc_auc);
    if (s.pr_auc) std::cout << ", PR AUC " << sf::format_double(*s.pr_auc);
    std::cout << std::endl;
  }
}

int run_grid_cmd(const GridArgs& args) {
  const auto folds = load_folds(args.folds);
  sf::GridConfig config;
  config.margin = args.margin;
  config.alpha = args.alpha;
  config.train.lambda = args.lambda;
  config.train.max_iters = args.max_iters;
  config.train.tolerance = args.tolerance;
  const auto records = sf::run_grid(folds, config);
  write_grid_outputs(records, config, args.bin_width, args.out, args.summary,
                     args.bins, args.quiet);
  return 0;
}

int run_synth(const SynthArgs& args) {
  json cfg;
  try {
    cfg = json::parse(sf::read_text_file(args.config));
  } catch (const json::parse_error& e) {
    throw sf::ParseError(args.config + ": " + std::string(e.what()));
  }
  if (!cfg.is_object() || !cfg.contains("folds") || !cfg["folds"].is_array() ||
      cfg["folds"].size() < 3) {
    throw sf::ConfigError(args.config +
                          ": config needs a 'folds' array with >= 3 entries");
  }

  const std::uint64_t base_seed = cfg.contains("seed")
                                      ? cfg["seed"].get<std::uint64_t>()
                                      : default_seed();
  std::vector<std::pair<std::string, std::vector<sf::LogitRecord>>> folds;
  std::size_t index = 0;
  for (const auto& f : cfg["folds"]) {
    sf::SyntheticShiftConfig sc;
    sc.name = f.value("name", "fold" + std::to_string(index));
    sc.n_classes = f.value("n_classes", std::size_t{10});
    sc.n_samples = f.value("n_samples", std::size_t{1000});
    sc.accuracy = f.value("accuracy", 0.7);
    sc.noise_scale = f.value("noise_scale", 1.0);
    sc.temperature = f.value("temperature", 1.0);
    sc.seed = f.contains("seed") ? f["seed"].get<std::uint64_t>()
                                 : base_seed + index;
    folds.emplace_back(sc.name, sf::generate_synthetic_domain(sc));
    ++index;
  }

  sf::GridConfig config;
  config.margin = cfg.value("margin", 0.0);
  config.alpha = cfg.value("alpha", 0.05);
  config.train.lambda = cfg.value("lambda", 1e-4);
  config.train.max_iters = cfg.value("max_iters", std::size_t{10000});
  config.train.tolerance = cfg.value("tolerance", 1e-8);
  const double bin_width = cfg.value("bin_width", 0.01);

  const auto records = sf::run_grid(folds, config);

  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  const std::string records_name =
      args.format == "jsonl" ? "records.jsonl" : "records.csv";
  write_grid_outputs(records, config, bin_width,
                     (dir / records_name).string(),
                     (dir / "summary.json").string(),
                     (dir / "bins.csv").string(), args.quiet);
  return 0;
}

int run_diagnose(const DiagnoseArgs& args) {
  const sf::CorrectnessEstimator est = sf::load_estimator(args.estimator);
  const sf::LogitTable table = sf::read_logit_table(args.labeled);
  const std::vector<int> correctness = sf::correctness_labels(table.records);
  const std::vector<double> pc = sf::predict_pc(est, table.records);
  const sf::CalibrationReport rep =
      sf::calibration_report(pc, correctness, args.bins);

  const sf::SignalMatrix full = sf::extract_matrix(table.records);
  struct Row {
    std::string name;
    std::optional<sf::AnovaResult> anova;
  };
  std::vector<Row> rows;
  for (std::size_t c = 0; c < sf::kNumSignals; ++c) {
    Row row;
    row.name = sf::signal_names()[c];
    try {
      row.anova = sf::anova_f(full.column(c), correctness);
    } catch (const sf::DegenerateStatistic&) {
      row.anova = std::nullopt;  // constant column or single-class labels
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const double fa = a.anova ? a.anova->f : -1.0;
    const double fb = b.anova ? b.anova->f : -1.0;
    return fa > fb;
  });

  if (args.as_json) {
    json j;
    j["n"] = pc.size();
    j["ece"] = rep.ece;
    j["mce"] = rep.mce;
    j["rmsce"] = rep.rmsce;
    j["delta"] = rep.delta;
    j["anova"] = json::array();
    for (const auto& row : rows) {
      json r;
      r["signal"] = row.name;
      if (row.anova) {
        r["f"] = row.anova->f;
        r["p"] = row.anova->p;
      } else {
        r["f"] = nullptr;
        r["p"] = nullptr;
      }
      j["anova"].push_back(r);
    }
    std::cout << j.dump(2) << std::endl;
  } else {
    std::cout << "n=" << pc.size() << " ECE=" << sf::format_double(rep.ece)
              << " MCE=" << sf::format_double(rep.mce)
              << " RMSCE=" << sf::format_double(rep.rmsce)
              << " delta=" << sf::format_double(rep.delta) << "\n";
    std::cout << "signal ANOVA (correct vs incorrect):\n";
    for (const auto& row : rows) {
      std::cout << "  " << row.name << ": ";
      if (row.anova) {
        std::cout << "F=" << sf::format_double(row.anova->f)
                  << " p=" << sf::format_double(row.anova->p) << "\n";
      } else {
        std::cout << "undefined (degenerate groups)\n";
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"suitability filter: decide whether a classifier's accuracy "
               "holds up on an unlabeled user domain"};
  app.require_subcommand(1);

  SignalsArgs signals_args;
  auto* cmd_signals =
      app.add_subcommand("signals", "extract per-sample suitability signals");
  cmd_signals->add_option("input", signals_args.input, "logit table (csv/jsonl)")
      ->required();
  cmd_signals->add_option("--out", signals_args.out,
                          "output CSV path (default stdout)");

  TrainArgs train_args;
  auto* cmd_train =
      app.add_subcommand("train", "fit the correctness estimator on D_sf");
  cmd_train->add_option("--sf", train_args.sf_path, "labeled holdout table")
      ->required();
  cmd_train->add_option("--out", train_args.out, "estimator JSON path")
      ->required();
  cmd_train->add_option("--lambda", train_args.lambda, "L2 strength");
  cmd_train->add_option("--max-iters", train_args.max_iters,
                        "gradient-descent iteration cap");
  cmd_train->add_option("--tolerance", train_args.tolerance,
                        "gradient infinity-norm stop threshold");
  cmd_train
      ->add_option("--calibrate", train_args.calibrate,
                   "calibrator: none|platt|temperature")
      ->check(CLI::IsMember({"none", "platt", "temperature"}));
  cmd_train->add_option("--calibration-split", train_args.calibration_split,
                        "fraction of D_sf held out for calibrator fitting");
  cmd_train->add_option("--calibrate-on-user", train_args.calibrate_on_user,
                        "oracle mode: labeled user table for calibration");
  cmd_train->add_option("--signals", train_args.signals,
                        "signal subset (comma-separated)")
      ->delimiter(',');
  cmd_train->add_flag("--no-normalize", train_args.no_normalize,
                      "skip z-score normalization");
  cmd_train->add_option("--seed", train_args.seed,
                        "RNG seed (default: SUITFILTER_SEED or 0)");
  cmd_train->add_flag("--quiet", train_args.quiet, "suppress summary output");

  DecideArgs decide_args;
  auto* cmd_decide = app.add_subcommand(
      "decide", "one-shot suitability decision (exit 0 SUITABLE, 10 "
                "INCONCLUSIVE)");
  cmd_decide->add_option("--estimator", decide_args.estimator, "estimator JSON")
      ->required();
  cmd_decide->add_option("--test", decide_args.test, "test logit table")
      ->required();
  cmd_decide->add_option("--user", decide_args.user, "user logit table")
      ->required();
  cmd_decide->add_option("--margin", decide_args.margin,
                         "non-inferiority margin m");
  cmd_decide->add_option("--alpha", decide_args.alpha, "significance level");
  auto* opt_dt = cmd_decide->add_option("--delta-test", decide_args.delta_test,
                                        "accuracy-estimation error on test");
  auto* opt_du = cmd_decide->add_option("--delta-u", decide_args.delta_u,
                                        "accuracy-estimation error on user");
  opt_dt->needs(opt_du);
  opt_du->needs(opt_dt);
  cmd_decide->add_option("--report", decide_args.report, "report JSON path");
  cmd_decide->add_flag("--json", decide_args.as_json, "print the full report");
  cmd_decide->add_flag("--quiet", decide_args.quiet, "no stdout, exit code only");

  MonitorArgs monitor_args;
  auto* cmd_monitor = app.add_subcommand(
      "monitor", "sequential decisions over a stream of user batches");
  cmd_monitor
      ->add_option("--estimator", monitor_args.estimator, "estimator JSON")
      ->required();
  cmd_monitor->add_option("--test", monitor_args.test, "test logit table")
      ->required();
  cmd_monitor
      ->add_option("--user", monitor_args.users,
                   "user batch table (repeatable, in stream order)")
      ->required();
  cmd_monitor->add_option("--margin", monitor_args.margin, "margin m");
  cmd_monitor->add_option("--alpha", monitor_args.alpha, "significance level");
  cmd_monitor
      ->add_option("--correction", monitor_args.correction,
                   "multiple-testing correction: none|bh|pocock|obf")
      ->check(CLI::IsMember({"none", "bh", "pocock", "obf"}));
  cmd_monitor->add_option("--stages", monitor_args.stages,
                          "stage count for alpha-spending corrections");
  cmd_monitor->add_option("--report", monitor_args.report,
                          "write reports as JSON stream");
  cmd_monitor->add_flag("--json", monitor_args.as_json, "print full reports");
  cmd_monitor->add_flag("--quiet", monitor_args.quiet, "suppress output");

  auto* cmd_eval = app.add_subcommand("eval", "evaluation harness");
  cmd_eval->require_subcommand(1);

  GridArgs grid_args;
  auto* cmd_grid = cmd_eval->add_subcommand(
      "grid", "fold grid: every (user, test, sf) assignment");
  cmd_grid
      ->add_option("--folds", grid_args.folds,
                   "directory of per-fold tables, or one table with a fold "
                   "column")
      ->required();
  cmd_grid->add_option("--margin", grid_args.margin, "margin m");
  cmd_grid->add_option("--alpha", grid_args.alpha, "significance level");
  cmd_grid->add_option("--lambda", grid_args.lambda, "L2 strength");
  cmd_grid->add_option("--max-iters", grid_args.max_iters, "iteration cap");
  cmd_grid->add_option("--tolerance", grid_args.tolerance, "stop threshold");
  cmd_grid->add_option("--bin-width", grid_args.bin_width,
                       "sensitivity bin width");
  cmd_grid->add_option("--out", grid_args.out,
                       "experiment records path (.csv or .jsonl)");
  cmd_grid->add_option("--summary", grid_args.summary, "summary JSON path");
  cmd_grid->add_option("--bins", grid_args.bins, "sensitivity bins CSV path");
  cmd_grid->add_flag("--quiet", grid_args.quiet, "suppress summary output");

  SynthArgs synth_args;
  auto* cmd_synth = cmd_eval->add_subcommand(
      "synth", "synthetic covariate-shift grid from a JSON config");
  cmd_synth->add_option("--config", synth_args.config, "config JSON path")
      ->required();
  cmd_synth->add_option("--out-dir", synth_args.out_dir, "output directory")
      ->required();
  cmd_synth
      ->add_option("--format", synth_args.format, "records format: csv|jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd_synth->add_flag("--quiet", synth_args.quiet, "suppress summary output");

  DiagnoseArgs diagnose_args;
  auto* cmd_diagnose = app.add_subcommand(
      "diagnose", "calibration metrics and per-signal ANOVA on a labeled set");
  cmd_diagnose
      ->add_option("--estimator", diagnose_args.estimator, "estimator JSON")
      ->required();
  cmd_diagnose
      ->add_option("--labeled", diagnose_args.labeled, "labeled logit table")
      ->required();
  cmd_diagnose->add_option("--bins", diagnose_args.bins,
                           "calibration bin count");
  cmd_diagnose->add_flag("--json", diagnose_args.as_json, "JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_signals) return run_signals(signals_args);
    if (*cmd_train) return run_train(train_args);
    if (*cmd_decide) return run_decide(decide_args);
    if (*cmd_monitor) return run_monitor(monitor_args);
    if (*cmd_grid) return run_grid_cmd(grid_args);
    if (*cmd_synth) return run_synth(synth_args);
    if (*cmd_diagnose) return run_diagnose(diagnose_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
  return kExitError;
}
