#include "tactile/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tactile/calib.hpp"
#include "tactile/dataset.hpp"
#include "tactile/error.hpp"
#include "tactile/eval.hpp"
#include "tactile/preprocess.hpp"
#include "tactile/sim.hpp"
#include "tactile/textio.hpp"

namespace tactile::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TACTILE_PIPE_THREADS")) {
    if (auto v = textio::parse_int(env); v && *v >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(*v));
  }
  return n;
}

struct SimulateArgs {
  std::string pair;
  std::string profiles;
  std::string out;
  std::uint64_t seed = 0;
  int trials = 10;
  int adc_bits = dataset::kDeviceAdcBits;
};

struct EvaluateArgs {
  std::string data;
  std::size_t components = 15;
  std::size_t folds = 5;
  double c = 1.0;
  bool paper_mode = false;
  std::uint64_t seed = 0;
  std::string normalization = "divide_by_variance";
  std::string report;
  std::string model;
};

struct CalibrateArgs {
  std::string fixture;
  int degree = 3;
  std::string out;
  std::string kind;
  std::string unit = "celsius";
};

struct TrainArgs {
  std::string data;
  std::size_t components = 15;
  double c = 1.0;
  std::string normalization = "divide_by_variance";
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string data;
};

struct ReportArgs {
  std::vector<std::string> reports;
  std::string plot_data;
  std::string data;
  std::string trial;
};

eval::PipelineConfig make_config(std::size_t components, std::size_t folds, double c, const std::string& norm,
                                 bool paper_mode, std::uint64_t seed) {
  eval::PipelineConfig config;
  config.k_components = components;
  config.folds = folds;
  config.c = c;
  config.normalization_mode = preprocess::parse_mode(norm);
  config.paper_mode = paper_mode;
  config.seed = seed;
  config.threads = thread_cap();
  return config;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  auto profiles = sim::builtin_profiles();
  if (!a.profiles.empty()) profiles = sim::profiles_from_json(textio::read_file(a.profiles));
  std::pair<sim::ObjectProfile, sim::ObjectProfile> pair;
  try {
    pair = sim::resolve_pair(a.pair, profiles);
  } catch (const Error& e) {
    err << "error: unknown pair '" << a.pair << "'. Known pairs:\n";
    if (a.profiles.empty()) {
      for (const auto& p : sim::builtin_pairs()) err << "  " << p << "\n";
    } else {
      err << "  <foreground>_vs_<background> with names from " << a.profiles << ":";
      for (const auto& [name, _] : profiles) err << " " << name;
      err << "\n";
    }
    return kUsage;
  }
  sim::SessionProtocol protocol;
  protocol.trials_per_object = a.trials;
  protocol.seed = a.seed;
  protocol.adc_bits = a.adc_bits;
  const auto ds = sim::simulate_pair_dataset(pair.first, pair.second, protocol);
  dataset::write_dataset(ds, a.out);
  out << "wrote " << ds.trials.size() << " trials to " << a.out << "\n";
  return kSuccess;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const auto fixture = calib::read_fixture(a.fixture);
  calib::CalibrationFile file;
  file.kind = a.kind.empty() ? fs::path(a.fixture).stem().string() : a.kind;
  file.fitted_on = fs::path(a.fixture).filename().string();
  file.model = calib::fit_polynomial(fixture.counts, fixture.values, a.degree, calib::parse_unit(a.unit));
  calib::write_calibration(file, a.out);
  out << "r2=" << fixed(file.model.r_squared, 6) << "\n";
  return kSuccess;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto config = make_config(a.components, a.folds, a.c, a.normalization, a.paper_mode, a.seed);
  const auto ds = dataset::read_dataset(a.data);
  const auto report = eval::cross_validate(ds, config);
  const auto report_path = a.report.empty() ? "report_" + ds.pair_name + ".json" : a.report;
  textio::write_file(report_path, eval::report_to_json(report));
  if (!a.model.empty()) eval::save_model(eval::train_full(ds, config), a.model);
  out << report.pair_name << " accuracy=" << fixed(report.mean_accuracy, 3) << " mode=" << report.mode_name() << "\n";
  return kSuccess;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto config = make_config(a.components, 5, a.c, a.normalization, false, 0);
  const auto ds = dataset::read_dataset(a.data);
  const auto model = eval::train_full(ds, config);
  const auto path = a.out.empty() ? "model_" + ds.pair_name + ".v1.txt" : a.out;
  eval::save_model(model, path);
  out << "wrote model " << path << " (" << model.pca.k() << " components, "
      << fixed(model.pca.explained_ratio_sum() * 100.0, 2) << "% variance)\n";
  return kSuccess;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto model = eval::load_model(a.model);
  const auto ds = dataset::read_dataset(a.data);
  std::size_t correct = 0;
  for (const auto& trial : ds.trials) {
    const auto p = eval::predict_trial(model, trial);
    const auto& name = p.label == 1 ? model.foreground_label : model.background_label;
    out << p.trial_id << " " << name << " score=" << textio::format_double(p.score) << "\n";
    if (name == trial.object_label) ++correct;
  }
  if (!ds.trials.empty()) {
    out << "accuracy=" << fixed(static_cast<double>(correct) / static_cast<double>(ds.trials.size()), 3) << "\n";
  }
  return kSuccess;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  fs::create_directories(a.plot_data);
  std::string table = "pair,foreground,background,mode,mean_accuracy,per_fold_accuracy\n";
  for (const auto& path : a.reports) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(textio::read_file(path));
      std::string folds;
      for (const auto& v : j.at("per_fold_accuracy")) {
        if (!folds.empty()) folds += ';';
        folds += textio::format_double(v.get<double>());
      }
      table += j.at("pair_name").get<std::string>() + "," + j.at("foreground").get<std::string>() + "," +
               j.at("background").get<std::string>() + "," + j.at("mode").get<std::string>() + "," +
               textio::format_double(j.at("mean_accuracy").get<double>()) + "," + folds + "\n";
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvariantViolation, "malformed report " + path + ": " + e.what());
    }
  }
  textio::write_file(fs::path(a.plot_data) / "accuracy_table.csv", table);
  out << "wrote accuracy_table.csv (" << a.reports.size() << " rows)\n";

  if (!a.data.empty()) {
    const auto ds = dataset::read_dataset(a.data);
    if (ds.trials.empty()) fail(ErrorCode::InvariantViolation, "dataset has no trials to export");
    const dataset::RawTrial* trial = &ds.trials.front();
    if (!a.trial.empty()) {
      trial = nullptr;
      for (const auto& t : ds.trials) {
        if (t.trial_id == a.trial) trial = &t;
      }
      if (!trial) fail(ErrorCode::InvariantViolation, "no trial '" + a.trial + "' in " + a.data);
    }
    const preprocess::ContactParams contact;
    const auto event = preprocess::detect_contact(*trial, contact);
    const auto windows = preprocess::window_trial(*trial, event, contact);
    for (auto m : preprocess::kModalities) {
      std::string csv = "t_rel_s,value\n";
      const auto& w = windows[m];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(preprocess::kPreContactSamples)) /
                         dataset::kContactRateHz;
        csv += textio::format_double(t) + "," + textio::format_double(w[i]) + "\n";
      }
      const auto name = "trace_" + trial->trial_id + "_" + std::string(preprocess::modality_name(m)) + ".csv";
      textio::write_file(fs::path(a.plot_data) / name, csv);
    }
    out << "wrote 3 trace files for " << trial->trial_id << "\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal tactile recognition pipeline: simulate, calibrate, evaluate, train, predict, report",
               "tactile_pipe"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic foreground/background pair dataset");
  simulate->add_option("--pair", sim_args.pair, "Pair name <foreground>_vs_<background>")->required();
  simulate->add_option("--profiles", sim_args.profiles, "Object profile JSON file (default: built-in profiles)");
  simulate->add_option("--out", sim_args.out, "Output dataset directory")->required();
  simulate->add_option("--seed", sim_args.seed, "Session seed")->capture_default_str();
  simulate->add_option("--trials", sim_args.trials, "Trials per object")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--adc-bits", sim_args.adc_bits, "ADC resolution; 0 stores unquantized counts")
      ->capture_default_str()
      ->check(CLI::Range(0, 24));

  CalibrateArgs cal_args;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a polynomial calibration to a counts,value fixture");
  calibrate->add_option("--fixture", cal_args.fixture, "Fixture CSV with counts,value rows")->required();
  calibrate->add_option("--degree", cal_args.degree, "Polynomial degree")->capture_default_str()->check(CLI::Range(0, 10));
  calibrate->add_option("--out", cal_args.out, "Output calibration JSON")->required();
  calibrate->add_option("--kind", cal_args.kind, "Channel kind recorded in the file (default: fixture name)");
  calibrate->add_option("--unit", cal_args.unit, "Output unit (celsius|newtons)")->capture_default_str();

  EvaluateArgs ev_args;
  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation of the full pipeline");
  evaluate->add_option("--data", ev_args.data, "Dataset directory")->required();
  evaluate->add_option("--components", ev_args.components, "PCA components")->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_option("--folds", ev_args.folds, "Cross-validation folds (>= 2)")->capture_default_str()->check(CLI::Range(2, 1000));
  evaluate->add_option("--c", ev_args.c, "SVM penalty C (> 0)")->capture_default_str()->check(CLI::PositiveNumber);
  evaluate->add_flag("--paper-mode", ev_args.paper_mode,
                     "Fit normalization and PCA on the whole dataset before cross-validation (default: off)");
  evaluate->add_option("--seed", ev_args.seed, "Fold-assignment seed")->capture_default_str();
  evaluate->add_option("--normalization", ev_args.normalization, "divide_by_variance | divide_by_std")
      ->capture_default_str();
  evaluate->add_option("--report", ev_args.report, "Report JSON path (default: report_<pair>.json)");
  evaluate->add_option("--model", ev_args.model, "Also fit on all trials and save the model here");

  TrainArgs tr_args;
  auto* train = app.add_subcommand("train", "Fit the pipeline on every trial and save the model");
  train->add_option("--data", tr_args.data, "Dataset directory")->required();
  train->add_option("--components", tr_args.components, "PCA components")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--c", tr_args.c, "SVM penalty C (> 0)")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--normalization", tr_args.normalization, "divide_by_variance | divide_by_std")
      ->capture_default_str();
  train->add_option("--out", tr_args.out, "Model path (default: model_<pair>.v1.txt)");

  PredictArgs pr_args;
  auto* predict = app.add_subcommand("predict", "Classify every trial of a dataset with a saved model");
  predict->add_option("--model", pr_args.model, "Model file")->required();
  predict->add_option("--data", pr_args.data, "Dataset directory")->required();

  ReportArgs rep_args;
  auto* report = app.add_subcommand("report", "Export accuracy table and windowed traces as CSV");
  report->add_option("--report", rep_args.reports, "Report JSON file(s)")->required();
  report->add_option("--plot-data", rep_args.plot_data, "Output directory for CSV files")->required();
  report->add_option("--data", rep_args.data, "Dataset directory for trace export");
  report->add_option("--trial", rep_args.trial, "Trial id to export (default: first trial)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, out, err);
    if (*calibrate) return cmd_calibrate(cal_args, out);
    if (*evaluate) return cmd_evaluate(ev_args, out);
    if (*train) return cmd_train(tr_args, out);
    if (*predict) return cmd_predict(pr_args, out);
    if (*report) return cmd_report(rep_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (category_of(e.code())) {
      case ErrorCategory::Usage: return kUsage;
      case ErrorCategory::Numerical: return kNumericalError;
      case ErrorCategory::Data: return kDataError;
    }
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace tactile::cli
