#include "tactile/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/device.hpp"
#include "tactile/error.hpp"

namespace tactile::preprocess {

using dataset::ChannelKind;

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::Force: return "force";
    case Modality::Microphone: return "mic";
    case Modality::Accelerometer: return "accel";
  }
  return "?";
}

ChannelKind channel_of(Modality m) {
  switch (m) {
    case Modality::Force: return ChannelKind::Force;
    case Modality::Microphone: return ChannelKind::Microphone;
    case Modality::Accelerometer: return ChannelKind::Accelerometer;
  }
  return ChannelKind::Force;
}

ContactParams::ContactParams() : force_calibration(device::force_calibration()) {}

ContactEvent detect_contact_newtons(std::span<const double> force, const ContactParams& params) {
  if (params.baseline_samples < 2) fail(ErrorCode::InvalidArgument, "baseline needs at least 2 samples");
  if (force.size() < std::max(params.baseline_samples, kPreContactSamples)) {
    fail(ErrorCode::InsufficientPreContact, "force channel shorter than the pre-contact baseline");
  }
  const auto baseline = force.first(params.baseline_samples);
  double mean = 0.0;
  for (double f : baseline) mean += f;
  mean /= static_cast<double>(baseline.size());
  double var = 0.0;
  for (double f : baseline) var += (f - mean) * (f - mean);
  var /= static_cast<double>(baseline.size());
  const double std_dev = std::sqrt(var);

  ContactEvent event;
  event.baseline_mean = mean;
  event.baseline_std = std_dev;
  event.detection_threshold = mean + std::max(params.k_sigma * std_dev, params.min_rise);

  const auto hit = std::find_if(force.begin(), force.end(), [&](double f) { return f > event.detection_threshold; });
  if (hit == force.end()) {
    fail(ErrorCode::NoContactDetected, "force never exceeds " + std::to_string(event.detection_threshold) + " N");
  }
  event.index_500hz = static_cast<std::size_t>(hit - force.begin());
  if (event.index_500hz < kPreContactSamples) {
    fail(ErrorCode::InsufficientPreContact,
         "contact at sample " + std::to_string(event.index_500hz) + " leaves less than 0.2 s before it");
  }
  event.time = static_cast<double>(event.index_500hz) / dataset::kContactRateHz;
  return event;
}

ContactEvent detect_contact(const dataset::RawTrial& trial, const ContactParams& params) {
  const auto newtons = calib::apply_calibration(params.force_calibration, trial.channel(ChannelKind::Force));
  return detect_contact_newtons(newtons, params);
}

std::vector<double> window_channel(std::span<const double> samples, std::size_t contact_index) {
  if (contact_index < kPreContactSamples) {
    fail(ErrorCode::InsufficientPreContact, "contact index " + std::to_string(contact_index) + " < 100");
  }
  if (samples.size() < contact_index + kPostContactSamples) {
    fail(ErrorCode::InsufficientPostContact,
         "need " + std::to_string(contact_index + kPostContactSamples) + " samples, channel has " +
             std::to_string(samples.size()));
  }
  const auto first = samples.begin() + static_cast<std::ptrdiff_t>(contact_index - kPreContactSamples);
  return {first, first + static_cast<std::ptrdiff_t>(kWindowLength)};
}

TrialWindows window_trial(const dataset::RawTrial& trial, const ContactEvent& event, const ContactParams& params) {
  TrialWindows out;
  for (auto m : kModalities) {
    auto window = window_channel(trial.channel(channel_of(m)), event.index_500hz);
    if (m == Modality::Force) window = calib::apply_calibration(params.force_calibration, window);
    out[m] = std::move(window);
  }
  return out;
}

std::string_view mode_name(NormalizationMode mode) {
  return mode == NormalizationMode::DivideByVariance ? "divide_by_variance" : "divide_by_std";
}

NormalizationMode parse_mode(std::string_view name) {
  if (name == "divide_by_variance" || name == "variance") return NormalizationMode::DivideByVariance;
  if (name == "divide_by_std" || name == "std") return NormalizationMode::DivideByStd;
  fail(ErrorCode::InvalidArgument, "unknown normalization mode '" + std::string(name) + "'");
}

NormalizationStats fit_normalization(std::span<const TrialWindows> windows, NormalizationMode mode) {
  if (windows.empty()) fail(ErrorCode::InsufficientPoints, "normalization needs at least one window");
  NormalizationStats stats;
  stats.mode = mode;
  for (auto m : kModalities) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : windows) {
      for (double x : w[m]) sum += x;
      count += w[m].size();
    }
    if (count == 0) fail(ErrorCode::InsufficientPoints, "empty " + std::string(modality_name(m)) + " windows");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& w : windows) {
      for (double x : w[m]) ss += (x - mean) * (x - mean);
    }
    const double variance = ss / static_cast<double>(count);
    if (!(variance > 0.0)) {
      fail(ErrorCode::ZeroVariance, std::string(modality_name(m)) + " has zero variance across training windows");
    }
    stats.modality[static_cast<std::size_t>(m)] = {mean, variance};
  }
  return stats;
}

int label_of(dataset::Role role) { return role == dataset::Role::Foreground ? 1 : -1; }

FeatureVector assemble_feature(const TrialWindows& windows, const NormalizationStats& stats, int label,
                               std::string trial_id) {
  FeatureVector out;
  out.label = label;
  out.trial_id = std::move(trial_id);
  out.values.reserve(kFeatureLength);
  for (auto m : kModalities) {
    const auto& w = windows[m];
    if (w.size() != kWindowLength) {
      fail(ErrorCode::LengthMismatch, std::string(modality_name(m)) + " window has " + std::to_string(w.size()) +
                                          " samples, expected 2100");
    }
    const auto& s = stats.modality[static_cast<std::size_t>(m)];
    if (!(s.variance > 0.0)) fail(ErrorCode::ZeroVariance, std::string(modality_name(m)) + " variance is zero");
    const double divisor = stats.mode == NormalizationMode::DivideByVariance ? s.variance : std::sqrt(s.variance);
    for (double x : w) {
      const double v = (x - s.mean) / divisor;
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, std::string(modality_name(m)) + " window is not finite");
      out.values.push_back(v);
    }
  }
  return out;
}

}  // namespace tactile::preprocess
