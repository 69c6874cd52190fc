#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tactile/dataset.hpp"
#include "tactile/pca.hpp"
#include "tactile/preprocess.hpp"
#include "tactile/svm.hpp"

namespace tactile::eval {

struct PipelineConfig {
  std::size_t k_components = 15;
  std::size_t folds = 5;
  double c = 1.0;
  preprocess::NormalizationMode normalization_mode = preprocess::NormalizationMode::DivideByVariance;
  /// Fit normalization and PCA on the whole dataset before cross-validation.
  bool paper_mode = false;
  std::uint64_t seed = 0;
  preprocess::ContactParams contact;
  double svm_tol = 1e-6;
  std::size_t svm_max_passes = 10000;
  std::size_t threads = 1;  // concurrent folds; output does not depend on it
};

/// Throws InvalidArgument when folds < 2, k_components < 1 or c <= 0.
void validate_config(const PipelineConfig& config);

/// Fold index per label position. Each class is shuffled with a seeded stream
/// and dealt round-robin, continuing where the previous class stopped.
std::vector<std::size_t> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct FoldDiagnostics {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t correct = 0;
  std::vector<double> explained_variance;
  double explained_ratio_sum = 0.0;
  bool svm_converged = false;
  std::size_t svm_iterations = 0;
  double svm_final_violation = 0.0;
};

struct EvaluationReport {
  std::string pair_name;
  std::string foreground_label;
  std::string background_label;
  bool paper_mode = false;
  std::vector<double> per_fold_accuracy;
  double mean_accuracy = 0.0;
  /// rows: true foreground, true background; columns: predicted foreground, background
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::map<std::string, std::size_t> fold_assignment;
  PipelineConfig config;
  std::vector<FoldDiagnostics> folds;

  std::string mode_name() const { return paper_mode ? "paper_mode" : "leak_free"; }
};

enum class FitStage { Normalization, Pca, Svm };

/// Instrumentation hook: receives the trial ids each fit saw. With
/// config.threads > 1 it may be called concurrently from different folds.
using FitObserver = std::function<void(std::size_t fold, FitStage stage, const std::vector<std::string>& trial_ids)>;

/// In paper mode the shared normalization/PCA fits are reported with
/// fold == kAllFolds.
inline constexpr std::size_t kAllFolds = static_cast<std::size_t>(-1);

EvaluationReport cross_validate(const dataset::Dataset& dataset, const PipelineConfig& config,
                                const FitObserver& observer = {});

struct PipelineModel {
  std::string pair_name;
  std::string foreground_label;
  std::string background_label;
  preprocess::ContactParams contact;
  preprocess::NormalizationStats stats;
  pca::PcaModel pca;
  svm::SvmModel svm;
};

PipelineModel train_full(const dataset::Dataset& dataset, const PipelineConfig& config);

struct TrialPrediction {
  std::string trial_id;
  int label = 1;
  double score = 0.0;
};

TrialPrediction predict_trial(const PipelineModel& model, const dataset::RawTrial& trial);

inline constexpr int kModelVersion = 1;

std::string model_to_text(const PipelineModel& model);
PipelineModel model_from_text(const std::string& text);
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

std::string report_to_json(const EvaluationReport& report);

}  // namespace tactile::eval
