#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tactile/calib.hpp"
#include "tactile/dataset.hpp"

namespace tactile::preprocess {

inline constexpr std::size_t kPreContactSamples = 100;    // 0.2 s at 500 Hz
inline constexpr std::size_t kPostContactSamples = 2000;  // 4 s at 500 Hz
inline constexpr std::size_t kWindowLength = kPreContactSamples + kPostContactSamples;
inline constexpr std::size_t kModalityCount = 3;
inline constexpr std::size_t kFeatureLength = kModalityCount * kWindowLength;

/// Feature modalities in concatenation order.
enum class Modality { Force = 0, Microphone = 1, Accelerometer = 2 };
inline constexpr std::array<Modality, kModalityCount> kModalities = {Modality::Force, Modality::Microphone,
                                                                     Modality::Accelerometer};
std::string_view modality_name(Modality m);
dataset::ChannelKind channel_of(Modality m);

struct ContactParams {
  std::size_t baseline_samples = 50;  // 0.1 s
  double k_sigma = 6.0;
  double min_rise = 0.05;  // N, absolute floor on the threshold above baseline
  calib::CalibrationModel force_calibration;  // counts -> N

  ContactParams();
};

struct ContactEvent {
  std::size_t index_500hz = 0;
  double time = 0.0;                 // s
  double detection_threshold = 0.0;  // N
  double baseline_mean = 0.0;        // N
  double baseline_std = 0.0;         // N
};

/// First sample whose calibrated force exceeds
/// baseline_mean + max(k_sigma * baseline_std, min_rise).
ContactEvent detect_contact(const dataset::RawTrial& trial, const ContactParams& params = {});
ContactEvent detect_contact_newtons(std::span<const double> force_newtons, const ContactParams& params = {});

/// Per-modality windows [index - 100, index + 2000): force in newtons,
/// microphone and accelerometer in raw counts.
struct TrialWindows {
  std::array<std::vector<double>, kModalityCount> modality;

  const std::vector<double>& operator[](Modality m) const { return modality[static_cast<std::size_t>(m)]; }
  std::vector<double>& operator[](Modality m) { return modality[static_cast<std::size_t>(m)]; }
};

TrialWindows window_trial(const dataset::RawTrial& trial, const ContactEvent& event,
                          const ContactParams& params = {});
std::vector<double> window_channel(std::span<const double> samples, std::size_t contact_index);

enum class NormalizationMode { DivideByVariance, DivideByStd };
std::string_view mode_name(NormalizationMode mode);
NormalizationMode parse_mode(std::string_view name);

struct ModalityStats {
  double mean = 0.0;
  double variance = 0.0;  // population

  bool operator==(const ModalityStats&) const = default;
};

struct NormalizationStats {
  std::array<ModalityStats, kModalityCount> modality{};
  NormalizationMode mode = NormalizationMode::DivideByVariance;

  bool operator==(const NormalizationStats&) const = default;
};

NormalizationStats fit_normalization(std::span<const TrialWindows> windows,
                                     NormalizationMode mode = NormalizationMode::DivideByVariance);

struct FeatureVector {
  std::vector<double> values;
  std::string trial_id;
  int label = 1;  // +1 foreground, -1 background
};

int label_of(dataset::Role role);

FeatureVector assemble_feature(const TrialWindows& windows, const NormalizationStats& stats, int label,
                               std::string trial_id = {});

}  // namespace tactile::preprocess
