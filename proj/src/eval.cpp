#include "tactile/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tactile/error.hpp"
#include "tactile/rng.hpp"
#include "tactile/textio.hpp"

namespace tactile::eval {

using nlohmann::json;
using preprocess::TrialWindows;

namespace {

struct PreparedTrial {
  std::string trial_id;
  int label = 1;
  TrialWindows windows;
};

std::vector<PreparedTrial> prepare(const dataset::Dataset& dataset, const preprocess::ContactParams& contact) {
  std::vector<PreparedTrial> out;
  out.reserve(dataset.trials.size());
  for (const auto& trial : dataset.trials) {
    try {
      const auto event = preprocess::detect_contact(trial, contact);
      out.push_back({trial.trial_id, preprocess::label_of(trial.role), preprocess::window_trial(trial, event, contact)});
    } catch (const Error& e) {
      throw Error(e.code(), "trial " + trial.trial_id + ": " + e.detail());
    }
  }
  return out;
}

std::pair<std::string, std::string> pair_labels(const dataset::Dataset& dataset) {
  std::string fg;
  std::string bg;
  for (const auto& t : dataset.trials) {
    (t.role == dataset::Role::Foreground ? fg : bg) = t.object_label;
  }
  return {fg, bg};
}

// normalization -> PCA -> SVM on `train`; `shared` supplies a pre-fitted
// normalization and PCA (paper mode).
struct FittedPipeline {
  preprocess::NormalizationStats stats;
  pca::PcaModel pca;
  svm::SvmModel svm;
};

struct SharedFit {
  preprocess::NormalizationStats stats;
  pca::PcaModel pca;
};

std::vector<std::string> ids_of(const std::vector<const PreparedTrial*>& trials) {
  std::vector<std::string> ids;
  ids.reserve(trials.size());
  for (const auto* t : trials) ids.push_back(t->trial_id);
  return ids;
}

SharedFit fit_front_end(const std::vector<const PreparedTrial*>& train, const PipelineConfig& config,
                        const FitObserver& observer, std::size_t fold) {
  SharedFit out;
  std::vector<TrialWindows> windows;
  windows.reserve(train.size());
  for (const auto* t : train) windows.push_back(t->windows);
  out.stats = preprocess::fit_normalization(windows, config.normalization_mode);
  if (observer) observer(fold, FitStage::Normalization, ids_of(train));

  Matrix features(train.size(), preprocess::kFeatureLength);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto fv = preprocess::assemble_feature(train[i]->windows, out.stats, train[i]->label);
    std::copy(fv.values.begin(), fv.values.end(), features.row(i).begin());
  }
  out.pca = pca::fit_pca(features, config.k_components);
  if (observer) observer(fold, FitStage::Pca, ids_of(train));
  return out;
}

std::vector<double> scores_of(const PreparedTrial& trial, const SharedFit& front) {
  const auto fv = preprocess::assemble_feature(trial.windows, front.stats, trial.label);
  return pca::project(front.pca, fv.values);
}

svm::SvmModel fit_classifier(const std::vector<const PreparedTrial*>& train, const SharedFit& front,
                             const PipelineConfig& config, const FitObserver& observer, std::size_t fold) {
  Matrix scores(train.size(), front.pca.k());
  std::vector<int> labels;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto z = scores_of(*train[i], front);
    std::copy(z.begin(), z.end(), scores.row(i).begin());
    labels.push_back(train[i]->label);
  }
  svm::SvmOptions options;
  options.c = config.c;
  options.tol = config.svm_tol;
  options.max_passes = config.svm_max_passes;
  auto model = svm::train_svm(scores, labels, options);
  if (observer) observer(fold, FitStage::Svm, ids_of(train));
  return model;
}

struct FoldResult {
  FoldDiagnostics diag;
  std::array<std::array<std::size_t, 2>, 2> confusion{};
};

std::string vector_line(std::string_view key, std::span<const double> values) {
  std::string line(key);
  for (double v : values) {
    line += ' ';
    line += textio::format_double(v);
  }
  line += '\n';
  return line;
}

std::string scalar_line(std::string_view key, double value) {
  return std::string(key) + " " + textio::format_double(value) + "\n";
}

}  // namespace

void validate_config(const PipelineConfig& config) {
  if (config.folds < 2) fail(ErrorCode::InvalidArgument, "folds must be >= 2 (KLessThan2)");
  if (config.k_components < 1) fail(ErrorCode::InvalidArgument, "k_components must be >= 1");
  if (!(config.c > 0.0) || !std::isfinite(config.c)) fail(ErrorCode::InvalidArgument, "c must be > 0");
}

std::vector<std::size_t> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "KLessThan2: k must be >= 2");
  std::vector<std::size_t> folds(labels.size(), 0);
  std::size_t offset = 0;
  for (int cls : {1, -1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < k) {
      fail(ErrorCode::ClassTooSmall, "class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                                         " members, fewer than k = " + std::to_string(k));
    }
    Rng rng(derive_seed(seed, cls == 1 ? "folds:+1" : "folds:-1"));
    rng.shuffle(members);
    for (std::size_t p = 0; p < members.size(); ++p) folds[members[p]] = (offset + p) % k;
    offset += members.size();
  }
  for (int label : labels) {
    if (label != 1 && label != -1) fail(ErrorCode::InvalidArgument, "labels must be +1 or -1");
  }
  return folds;
}

EvaluationReport cross_validate(const dataset::Dataset& dataset, const PipelineConfig& config,
                                const FitObserver& observer) {
  validate_config(config);
  if (auto violations = dataset::validate_dataset(dataset); !violations.empty() || dataset.trials.empty()) {
    fail(ErrorCode::InvariantViolation,
         violations.empty() ? "dataset is empty" : violations.front().field + ": " + violations.front().rule);
  }
  const auto prepared = prepare(dataset, config.contact);
  std::vector<int> labels;
  for (const auto& p : prepared) labels.push_back(p.label);
  const auto assignment = stratified_kfold(labels, config.folds, config.seed);

  std::optional<SharedFit> shared;
  if (config.paper_mode) {
    std::vector<const PreparedTrial*> all;
    for (const auto& p : prepared) all.push_back(&p);
    shared = fit_front_end(all, config, observer, kAllFolds);
  }

  std::vector<FoldResult> results(config.folds);
  std::vector<std::exception_ptr> errors(config.folds);
  auto run_fold = [&](std::size_t fold) {
    try {
      std::vector<const PreparedTrial*> train;
      std::vector<const PreparedTrial*> test;
      for (std::size_t i = 0; i < prepared.size(); ++i) {
        (assignment[i] == fold ? test : train).push_back(&prepared[i]);
      }
      const SharedFit front = shared ? *shared : fit_front_end(train, config, observer, fold);
      const auto model = fit_classifier(train, front, config, observer, fold);

      FoldResult& r = results[fold];
      r.diag.train_size = train.size();
      r.diag.test_size = test.size();
      r.diag.explained_variance = front.pca.explained_variance;
      r.diag.explained_ratio_sum = front.pca.explained_ratio_sum();
      r.diag.svm_converged = model.converged;
      r.diag.svm_iterations = model.iterations;
      r.diag.svm_final_violation = model.final_violation;
      for (const auto* t : test) {
        const auto pred = svm::predict(model, scores_of(*t, front));
        if (pred.label == t->label) ++r.diag.correct;
        r.confusion[t->label == 1 ? 0 : 1][pred.label == 1 ? 0 : 1]++;
      }
    } catch (const Error& e) {
      errors[fold] = std::make_exception_ptr(Error(e.code(), "fold " + std::to_string(fold) + ": " + e.detail()));
    } catch (...) {
      errors[fold] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, config.folds);
  if (workers == 1) {
    for (std::size_t f = 0; f < config.folds; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < config.folds; f = next++) run_fold(f);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EvaluationReport report;
  report.pair_name = dataset.pair_name;
  std::tie(report.foreground_label, report.background_label) = pair_labels(dataset);
  report.paper_mode = config.paper_mode;
  report.config = config;
  std::size_t correct = 0;
  for (auto& r : results) {
    report.per_fold_accuracy.push_back(static_cast<double>(r.diag.correct) / static_cast<double>(r.diag.test_size));
    correct += r.diag.correct;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) report.confusion[a][b] += r.confusion[a][b];
    }
    report.folds.push_back(std::move(r.diag));
  }
  report.mean_accuracy = static_cast<double>(correct) / static_cast<double>(prepared.size());
  for (std::size_t i = 0; i < prepared.size(); ++i) report.fold_assignment[prepared[i].trial_id] = assignment[i];
  return report;
}

PipelineModel train_full(const dataset::Dataset& dataset, const PipelineConfig& config) {
  validate_config(config);
  if (auto violations = dataset::validate_dataset(dataset); !violations.empty() || dataset.trials.empty()) {
    fail(ErrorCode::InvariantViolation,
         violations.empty() ? "dataset is empty" : violations.front().field + ": " + violations.front().rule);
  }
  const auto prepared = prepare(dataset, config.contact);
  std::vector<const PreparedTrial*> all;
  for (const auto& p : prepared) all.push_back(&p);
  const auto front = fit_front_end(all, config, {}, kAllFolds);
  PipelineModel model;
  model.pair_name = dataset.pair_name;
  std::tie(model.foreground_label, model.background_label) = pair_labels(dataset);
  model.contact = config.contact;
  model.stats = front.stats;
  model.pca = front.pca;
  model.svm = fit_classifier(all, front, config, {}, kAllFolds);
  return model;
}

TrialPrediction predict_trial(const PipelineModel& model, const dataset::RawTrial& trial) {
  const auto event = preprocess::detect_contact(trial, model.contact);
  const auto windows = preprocess::window_trial(trial, event, model.contact);
  const auto fv = preprocess::assemble_feature(windows, model.stats, 1, trial.trial_id);
  const auto pred = svm::predict(model.svm, pca::project(model.pca, fv.values));
  return {trial.trial_id, pred.label, pred.score};
}

std::string model_to_text(const PipelineModel& m) {
  std::string out;
  out += "tactile-pipeline-model\n";
  out += "version " + std::to_string(kModelVersion) + "\n";
  out += "pair_name " + m.pair_name + "\n";
  out += "foreground " + m.foreground_label + "\n";
  out += "background " + m.background_label + "\n";
  out += "[CONTACT]\n";
  out += "baseline_samples " + std::to_string(m.contact.baseline_samples) + "\n";
  out += scalar_line("k_sigma", m.contact.k_sigma);
  out += scalar_line("min_rise", m.contact.min_rise);
  out += scalar_line("force_x_scale", m.contact.force_calibration.x_scale);
  out += vector_line("force_coefficients", m.contact.force_calibration.coefficients);
  out += "[STATS]\n";
  out += "mode " + std::string(preprocess::mode_name(m.stats.mode)) + "\n";
  for (auto mod : preprocess::kModalities) {
    const auto& s = m.stats.modality[static_cast<std::size_t>(mod)];
    const std::string name(preprocess::modality_name(mod));
    out += scalar_line(name + ".mean", s.mean);
    out += scalar_line(name + ".variance", s.variance);
  }
  out += "[PCA]\n";
  out += "dim " + std::to_string(m.pca.dim()) + "\n";
  out += "k " + std::to_string(m.pca.k()) + "\n";
  out += scalar_line("total_variance", m.pca.total_variance);
  out += "jacobi_sweeps " + std::to_string(m.pca.jacobi_sweeps) + "\n";
  out += scalar_line("jacobi_offdiag_ratio", m.pca.jacobi_offdiag_ratio);
  out += vector_line("explained_variance", m.pca.explained_variance);
  out += vector_line("explained_ratio", m.pca.explained_ratio);
  out += vector_line("mean", m.pca.mean);
  for (std::size_t c = 0; c < m.pca.k(); ++c) {
    out += vector_line("component." + std::to_string(c), m.pca.components.row(c));
  }
  out += "[SVM]\n";
  out += scalar_line("c", m.svm.c);
  out += scalar_line("bias", m.svm.bias);
  out += "iterations " + std::to_string(m.svm.iterations) + "\n";
  out += scalar_line("final_violation", m.svm.final_violation);
  out += std::string("converged ") + (m.svm.converged ? "1" : "0") + "\n";
  out += vector_line("weights", m.svm.weights);
  out += vector_line("alphas", m.svm.alphas);
  out += "[END]\n";
  return out;
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  [[noreturn]] void malformed(const std::string& why) const {
    fail(ErrorCode::MalformedModelFile, "line " + std::to_string(pos_) + ": " + why);
  }

  std::string next_line() {
    if (pos_ >= lines_.size()) malformed("unexpected end of file");
    return lines_[pos_++];
  }

  void expect_exact(const std::string& expected) {
    if (next_line() != expected) malformed("expected '" + expected + "'");
  }

  // "key rest-of-line"
  std::string text(const std::string& key) {
    const auto line = next_line();
    if (line.rfind(key + " ", 0) != 0) malformed("expected key '" + key + "'");
    return line.substr(key.size() + 1);
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::size_t> count = std::nullopt) {
    const auto line = next_line();
    std::vector<double> out;
    auto tokens = textio::split(line, ' ');
    if (tokens.empty() || tokens.front() != key) malformed("expected key '" + key + "'");
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto v = textio::parse_double(tokens[i]);
      if (!v) malformed("non-numeric value for '" + key + "'");
      out.push_back(*v);
    }
    if (count && out.size() != *count) {
      malformed("'" + key + "' has " + std::to_string(out.size()) + " values, expected " + std::to_string(*count));
    }
    return out;
  }

  double number(const std::string& key) { return numbers(key, 1).front(); }

  std::size_t count(const std::string& key) {
    const double v = number(key);
    if (v < 0.0 || v != std::floor(v)) malformed("'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

PipelineModel model_from_text(const std::string& text) {
  ModelReader r(text);
  PipelineModel m;
  r.expect_exact("tactile-pipeline-model");
  const auto version = r.text("version");
  if (version != std::to_string(kModelVersion)) {
    fail(ErrorCode::VersionMismatch, "model version " + version + " (supported: " + std::to_string(kModelVersion) + ")");
  }
  m.pair_name = r.text("pair_name");
  m.foreground_label = r.text("foreground");
  m.background_label = r.text("background");

  r.expect_exact("[CONTACT]");
  m.contact.baseline_samples = r.count("baseline_samples");
  m.contact.k_sigma = r.number("k_sigma");
  m.contact.min_rise = r.number("min_rise");
  m.contact.force_calibration.x_scale = r.number("force_x_scale");
  m.contact.force_calibration.coefficients = r.numbers("force_coefficients");
  if (m.contact.force_calibration.coefficients.empty()) r.malformed("force_coefficients is empty");
  m.contact.force_calibration.degree = static_cast<int>(m.contact.force_calibration.coefficients.size()) - 1;
  m.contact.force_calibration.output_unit = dataset::Unit::Newtons;
  m.contact.force_calibration.r_squared = 1.0;

  r.expect_exact("[STATS]");
  try {
    m.stats.mode = preprocess::parse_mode(r.text("mode"));
  } catch (const Error&) {
    r.malformed("unknown normalization mode");
  }
  for (auto mod : preprocess::kModalities) {
    const std::string name(preprocess::modality_name(mod));
    auto& s = m.stats.modality[static_cast<std::size_t>(mod)];
    s.mean = r.number(name + ".mean");
    s.variance = r.number(name + ".variance");
  }

  r.expect_exact("[PCA]");
  const auto dim = r.count("dim");
  const auto k = r.count("k");
  m.pca.total_variance = r.number("total_variance");
  m.pca.jacobi_sweeps = r.count("jacobi_sweeps");
  m.pca.jacobi_offdiag_ratio = r.number("jacobi_offdiag_ratio");
  m.pca.explained_variance = r.numbers("explained_variance", k);
  m.pca.explained_ratio = r.numbers("explained_ratio", k);
  m.pca.mean = r.numbers("mean", dim);
  std::vector<double> comps;
  comps.reserve(k * dim);
  for (std::size_t c = 0; c < k; ++c) {
    auto row = r.numbers("component." + std::to_string(c), dim);
    comps.insert(comps.end(), row.begin(), row.end());
  }
  m.pca.components = Matrix(k, dim, std::move(comps));

  r.expect_exact("[SVM]");
  m.svm.c = r.number("c");
  m.svm.bias = r.number("bias");
  m.svm.iterations = r.count("iterations");
  m.svm.final_violation = r.number("final_violation");
  m.svm.converged = r.count("converged") != 0;
  m.svm.weights = r.numbers("weights", k);
  m.svm.alphas = r.numbers("alphas");
  r.expect_exact("[END]");
  return m;
}

void save_model(const PipelineModel& model, const std::filesystem::path& path) {
  textio::write_file(path, model_to_text(model));
}

PipelineModel load_model(const std::filesystem::path& path) { return model_from_text(textio::read_file(path)); }

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["pair_name"] = report.pair_name;
  j["foreground"] = report.foreground_label;
  j["background"] = report.background_label;
  j["mode"] = report.mode_name();
  j["per_fold_accuracy"] = report.per_fold_accuracy;
  j["mean_accuracy"] = report.mean_accuracy;
  j["confusion"] = {
      {"rows", "true foreground, true background"},
      {"columns", "predicted foreground, predicted background"},
      {"counts", {{report.confusion[0][0], report.confusion[0][1]}, {report.confusion[1][0], report.confusion[1][1]}}}};
  j["fold_assignment"] = report.fold_assignment;
  const auto& c = report.config;
  j["config"] = {{"k_components", c.k_components},
                 {"folds", c.folds},
                 {"c", c.c},
                 {"normalization_mode", preprocess::mode_name(c.normalization_mode)},
                 {"paper_mode", c.paper_mode},
                 {"seed", c.seed},
                 {"svm_tol", c.svm_tol},
                 {"svm_max_passes", c.svm_max_passes},
                 {"contact",
                  {{"baseline_samples", c.contact.baseline_samples},
                   {"k_sigma", c.contact.k_sigma},
                   {"min_rise_newtons", c.contact.min_rise}}}};
  json folds = json::array();
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& d = report.folds[f];
    folds.push_back({{"fold", f},
                     {"train_size", d.train_size},
                     {"test_size", d.test_size},
                     {"correct", d.correct},
                     {"explained_variance", d.explained_variance},
                     {"explained_ratio_sum", d.explained_ratio_sum},
                     {"svm_converged", d.svm_converged},
                     {"svm_iterations", d.svm_iterations},
                     {"svm_final_violation", d.svm_final_violation}});
  }
  j["diagnostics"] = folds;
  return j.dump(2) + "\n";
}

}  // namespace tactile::eval
