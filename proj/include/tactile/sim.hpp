#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tactile/calib.hpp"
#include "tactile/dataset.hpp"

namespace tactile::sim {

/// Mechanical, acoustic and thermal character of one household object.
/// All values are synthetic fixture constants chosen to reproduce qualitative
/// contrasts (stiff/immobile vs compliant/mobile), not measured properties.
struct ObjectProfile {
  std::string name;
  double stiffness = 1.0;           // relative, (0, 1]
  double mobility = 0.0;            // 0 immobile .. 1 freely pushed aside
  double damping = 40.0;            // 1/s, acoustic ring-down rate
  double resonance = 120.0;         // Hz, < 250
  double thermal_effusivity = 0.5;  // relative, (0, 1]
  double surface_temp = 22.0;       // C
  double force_noise_std = 0.01;    // N
  double mic_noise_std = 4.0;       // counts
  double accel_noise_std = 4.0;     // counts

  bool operator==(const ObjectProfile&) const = default;
};

/// Empty when the profile is usable; otherwise one message per broken rule.
std::vector<std::string> validate_profile(const ObjectProfile& profile);

struct SessionProtocol {
  int trials_per_object = 10;
  double trial_duration = 5.0;  // s
  double velocity_min = 0.15;   // m/s
  double velocity_max = 0.35;   // m/s
  double inter_trial_wait = 10.0;  // s, metadata only
  double reheat_wait = 180.0;      // s, metadata only
  std::uint64_t seed = 0;
  int adc_bits = dataset::kDeviceAdcBits;
};

/// Proportionality constants of the signal models.
struct SignalModel {
  double force_gain = 60.0;          // F_max = force_gain * stiffness * (1 - mobility_relief * mobility) * v
  double mobility_relief = 0.7;
  double rise_time_scale = 0.0004;   // tau_r = rise_time_scale / (stiffness * v)
  double mic_gain = 2500.0;          // counts per (stiffness * m/s)
  double accel_spike_gain = 8.0;     // g per (stiffness * m/s)
  double accel_ring_gain = 1.5;      // g per (stiffness * m/s)
  double spike_width_scale = 0.004;  // s; half-sine width = spike_width_scale / stiffness
  double contact_gain_jitter = 0.10;  // relative std of a per-trial, per-channel amplitude factor
  double counts_per_g = 409.5;       // ADXL335 at 330 mV/g on a 3.3 V, 12-bit ADC
  double midscale_counts = 2048.0;
  double contact_time_min = 0.3;     // s
  double contact_time_max = 0.5;     // s
  double heater_temp = 45.0;         // C
  double heat_rate_gain = 2.0;       // 1/s per unit effusivity
  double therm_rate = 4.0;           // 1/s
  double ambient_temp = 22.0;        // C
  double thermal_noise_std = 0.02;   // C
};

inline constexpr double kMinDuration = 4.5;

dataset::RawTrial simulate_trial(const ObjectProfile& profile, double velocity, double duration, std::uint64_t seed,
                                 int adc_bits = dataset::kDeviceAdcBits, const SignalModel& model = {});

/// Closed-form plateau force of the contact model.
double peak_force(const ObjectProfile& profile, double velocity, const SignalModel& model = {});

dataset::Dataset simulate_pair_dataset(const ObjectProfile& foreground, const ObjectProfile& background,
                                       const SessionProtocol& protocol, const SignalModel& model = {});

std::map<std::string, ObjectProfile> builtin_profiles();

/// Canonical recognition pairs, `<foreground>_vs_<background>`.
std::vector<std::string> builtin_pairs();

/// Splits `<fg>_vs_<bg>` and looks both names up in `profiles`.
std::pair<ObjectProfile, ObjectProfile> resolve_pair(const std::string& pair_name,
                                                     const std::map<std::string, ObjectProfile>& profiles);

std::string profiles_to_json(const std::map<std::string, ObjectProfile>& profiles);
std::map<std::string, ObjectProfile> profiles_from_json(const std::string& text);

/// Reference calibration sets built from the device transfer curves.
/// Thermistor: temperatures uniform over [15, 45] C, reference reading + N(0, noise_std).
calib::Fixture thermistor_fixture(std::size_t points, double noise_std, std::uint64_t seed);
/// Taxel: forces uniform over [0, 25] N, reference reading + N(0, noise_std).
calib::Fixture force_fixture(std::size_t points, double noise_std, std::uint64_t seed);

}  // namespace tactile::sim
