#include "tactile/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "tactile/device.hpp"
#include "tactile/error.hpp"
#include "tactile/rng.hpp"

namespace tactile::sim {

using dataset::ChannelKind;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double quantize(double counts, int adc_bits) {
  if (adc_bits <= 0) return counts;
  const double top = std::ldexp(1.0, adc_bits) - 1.0;
  return std::clamp(std::round(counts), 0.0, top);
}

std::vector<double> quantize_all(std::vector<double> counts, int adc_bits) {
  for (auto& c : counts) c = quantize(c, adc_bits);
  return counts;
}

std::string trial_id_for(const std::string& name, int index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 2) digits.insert(0, "0");
  return name + "_" + digits;
}

}  // namespace

std::vector<std::string> validate_profile(const ObjectProfile& p) {
  std::vector<std::string> out;
  auto finite = [](double v) { return std::isfinite(v); };
  if (p.name.empty()) out.push_back("name must be non-empty");
  if (!(p.stiffness > 0.0 && p.stiffness <= 1.0)) out.push_back("stiffness must be in (0, 1]");
  if (!(p.mobility >= 0.0 && p.mobility <= 1.0)) out.push_back("mobility must be in [0, 1]");
  if (!(p.damping >= 0.0) || !finite(p.damping)) out.push_back("damping must be >= 0");
  if (!(p.resonance > 0.0 && p.resonance < 250.0)) out.push_back("resonance must be in (0, 250) Hz");
  if (!(p.thermal_effusivity > 0.0 && p.thermal_effusivity <= 1.0)) {
    out.push_back("thermal_effusivity must be in (0, 1]");
  }
  if (!finite(p.surface_temp)) out.push_back("surface_temp must be finite");
  if (!(p.force_noise_std >= 0.0) || !(p.mic_noise_std >= 0.0) || !(p.accel_noise_std >= 0.0) ||
      !finite(p.force_noise_std) || !finite(p.mic_noise_std) || !finite(p.accel_noise_std)) {
    out.push_back("noise standard deviations must be finite and >= 0");
  }
  return out;
}

double peak_force(const ObjectProfile& profile, double velocity, const SignalModel& model) {
  return model.force_gain * profile.stiffness * (1.0 - model.mobility_relief * profile.mobility) * velocity;
}

dataset::RawTrial simulate_trial(const ObjectProfile& profile, double velocity, double duration,
                                 std::uint64_t seed, int adc_bits, const SignalModel& model) {
  if (auto problems = validate_profile(profile); !problems.empty()) {
    std::string msg = profile.name + ": ";
    for (const auto& p : problems) msg += p + "; ";
    fail(ErrorCode::InvalidProfile, msg);
  }
  if (!(velocity > 0.0) || !std::isfinite(velocity)) {
    fail(ErrorCode::NonPositiveVelocity, "velocity must be > 0, got " + std::to_string(velocity));
  }
  if (!(duration >= kMinDuration) || !std::isfinite(duration)) {
    fail(ErrorCode::DurationTooShort, "duration must be >= 4.5 s to hold the analysis window");
  }

  Rng contact_rng(derive_seed(seed, "contact_time"));
  const double t_c = contact_rng.uniform(model.contact_time_min, model.contact_time_max);

  const auto n_fast = static_cast<std::size_t>(std::llround(duration * dataset::kContactRateHz));
  const auto n_slow = static_cast<std::size_t>(std::llround(duration * dataset::kThermalRateHz));

  // contact angle and location vary from press to press
  Rng gain_rng(derive_seed(seed, "contact_gain"));
  auto gain = [&] { return std::exp(model.contact_gain_jitter * gain_rng.normal()); };
  const double force_gain = gain();
  const double mic_gain = gain();
  const double accel_gain = gain();

  const double f_max = peak_force(profile, velocity, model) * force_gain;
  const double tau_r = model.rise_time_scale / (profile.stiffness * velocity);
  const double mic_amp = model.mic_gain * profile.stiffness * velocity * mic_gain;
  const double spike_amp = model.accel_spike_gain * profile.stiffness * velocity * model.counts_per_g * accel_gain;
  const double ring_amp = model.accel_ring_gain * profile.stiffness * velocity * model.counts_per_g * accel_gain;
  const double spike_width = model.spike_width_scale / profile.stiffness;

  Rng force_rng(derive_seed(seed, "force"));
  Rng mic_rng(derive_seed(seed, "mic"));
  Rng accel_rng(derive_seed(seed, "accel"));
  std::vector<double> force(n_fast);
  std::vector<double> mic(n_fast);
  std::vector<double> accel(n_fast);
  for (std::size_t i = 0; i < n_fast; ++i) {
    const double t = static_cast<double>(i) / dataset::kContactRateHz;
    const double dt = t - t_c;
    double newtons = 0.0;
    double ring = 0.0;
    double spike = 0.0;
    if (dt >= 0.0) {
      newtons = f_max * (1.0 - std::exp(-dt / tau_r));
      ring = std::exp(-profile.damping * dt) * std::sin(kTwoPi * profile.resonance * dt);
      if (dt < spike_width) spike = std::sin(std::numbers::pi * dt / spike_width);
    }
    newtons += force_rng.normal(0.0, profile.force_noise_std);
    force[i] = device::force_counts(newtons);
    mic[i] = model.midscale_counts + mic_amp * ring + mic_rng.normal(0.0, profile.mic_noise_std);
    accel[i] = model.midscale_counts + spike_amp * spike + ring_amp * ring +
               accel_rng.normal(0.0, profile.accel_noise_std);
  }

  Rng heat_rng(derive_seed(seed, "heat"));
  Rng therm_rng(derive_seed(seed, "therm"));
  Rng ambient_rng(derive_seed(seed, "ambient"));
  const double e = profile.thermal_effusivity;
  const double heat_eq = model.heater_temp + (profile.surface_temp - model.heater_temp) * e / (1.0 + e);
  const double heat_rate = model.heat_rate_gain * e;
  std::vector<double> heat(n_slow);
  std::vector<double> therm(n_slow);
  std::vector<double> ambient(n_slow);
  for (std::size_t i = 0; i < n_slow; ++i) {
    const double t = static_cast<double>(i) / dataset::kThermalRateHz;
    const double dt = t - t_c;
    double heater = model.heater_temp;
    double probe = model.ambient_temp;
    if (dt >= 0.0) {
      heater = heat_eq + (model.heater_temp - heat_eq) * std::exp(-heat_rate * dt);
      probe = profile.surface_temp + (model.ambient_temp - profile.surface_temp) * std::exp(-model.therm_rate * dt);
    }
    heat[i] = device::thermistor_counts(heater + heat_rng.normal(0.0, model.thermal_noise_std));
    therm[i] = device::thermistor_counts(probe + therm_rng.normal(0.0, model.thermal_noise_std));
    ambient[i] = device::lm35_counts(model.ambient_temp + ambient_rng.normal(0.0, model.thermal_noise_std));
  }

  dataset::RawTrial trial;
  trial.object_label = profile.name;
  trial.pre_contact_velocity = velocity;
  trial.duration = duration;
  trial.adc_bits = adc_bits;
  trial.seed = seed;
  trial.true_contact_time = t_c;
  trial.channels[ChannelKind::Force] = quantize_all(std::move(force), adc_bits);
  trial.channels[ChannelKind::Microphone] = quantize_all(std::move(mic), adc_bits);
  trial.channels[ChannelKind::Accelerometer] = quantize_all(std::move(accel), adc_bits);
  trial.channels[ChannelKind::HeatTransfer] = quantize_all(std::move(heat), adc_bits);
  trial.channels[ChannelKind::FastThermistor] = quantize_all(std::move(therm), adc_bits);
  trial.channels[ChannelKind::AmbientTemp] = quantize_all(std::move(ambient), adc_bits);
  return trial;
}

dataset::Dataset simulate_pair_dataset(const ObjectProfile& foreground, const ObjectProfile& background,
                                       const SessionProtocol& protocol, const SignalModel& model) {
  if (protocol.trials_per_object < 1) fail(ErrorCode::InvalidArgument, "trials_per_object must be >= 1");
  if (!(protocol.velocity_min > 0.0) || !(protocol.velocity_max >= protocol.velocity_min)) {
    fail(ErrorCode::InvalidArgument, "velocity range must satisfy 0 < min <= max");
  }
  if (foreground.name == background.name) {
    fail(ErrorCode::InvalidProfile, "foreground and background must be different objects");
  }
  dataset::Dataset out;
  out.pair_name = foreground.name + "_vs_" + background.name;
  for (const auto* profile : {&foreground, &background}) {
    const auto role = profile == &foreground ? dataset::Role::Foreground : dataset::Role::Background;
    const std::uint64_t object_seed = derive_seed(protocol.seed, profile->name);
    Rng velocity_rng(derive_seed(object_seed, "velocity"));
    for (int i = 0; i < protocol.trials_per_object; ++i) {
      const double velocity = velocity_rng.uniform(protocol.velocity_min, protocol.velocity_max);
      auto trial = simulate_trial(*profile, velocity, protocol.trial_duration,
                                  derive_seed(object_seed, static_cast<std::uint64_t>(i)), protocol.adc_bits, model);
      trial.trial_id = trial_id_for(profile->name, i);
      trial.role = role;
      out.trials.push_back(std::move(trial));
    }
  }
  return out;
}

std::map<std::string, ObjectProfile> builtin_profiles() {
  // name, stiffness, mobility, damping, resonance, effusivity, surface_temp, noise (N, counts, counts)
  const std::vector<ObjectProfile> list = {
      {"toothbrush", 0.15, 0.90, 60.0, 180.0, 0.30, 22.0, 0.01, 4.0, 4.0},
      {"counter", 1.00, 0.00, 25.0, 90.0, 0.90, 21.0, 0.01, 4.0, 4.0},
      {"towel", 0.20, 0.40, 80.0, 60.0, 0.20, 22.5, 0.01, 4.0, 4.0},
      {"towel_rack", 0.85, 0.25, 15.0, 210.0, 0.95, 21.5, 0.01, 4.0, 4.0},
      {"toilet_handle", 0.80, 0.10, 35.0, 140.0, 0.85, 21.5, 0.01, 4.0, 4.0},
      {"toilet_tank", 0.95, 0.00, 35.0, 140.0, 0.75, 20.5, 0.01, 4.0, 4.0},
      {"toilet_seat", 0.78, 0.12, 35.0, 140.0, 0.35, 22.0, 0.01, 4.0, 4.0},
  };
  std::map<std::string, ObjectProfile> out;
  for (const auto& p : list) out.emplace(p.name, p);
  return out;
}

std::vector<std::string> builtin_pairs() {
  return {"toothbrush_vs_counter", "towel_vs_towel_rack", "toilet_handle_vs_toilet_tank",
          "toilet_seat_vs_toilet_tank"};
}

std::pair<ObjectProfile, ObjectProfile> resolve_pair(const std::string& pair_name,
                                                     const std::map<std::string, ObjectProfile>& profiles) {
  const auto pos = pair_name.find("_vs_");
  if (pos == std::string::npos) fail(ErrorCode::InvalidArgument, "pair name must be <foreground>_vs_<background>");
  const auto fg = pair_name.substr(0, pos);
  const auto bg = pair_name.substr(pos + 4);
  auto fg_it = profiles.find(fg);
  auto bg_it = profiles.find(bg);
  if (fg_it == profiles.end() || bg_it == profiles.end() || fg == bg) {
    fail(ErrorCode::InvalidArgument, "unknown pair '" + pair_name + "'");
  }
  return {fg_it->second, bg_it->second};
}

std::string profiles_to_json(const std::map<std::string, ObjectProfile>& profiles) {
  json j = json::object();
  for (const auto& [name, p] : profiles) {
    j[name] = {{"stiffness", p.stiffness},
               {"mobility", p.mobility},
               {"damping", p.damping},
               {"resonance", p.resonance},
               {"thermal_effusivity", p.thermal_effusivity},
               {"surface_temp", p.surface_temp},
               {"force_noise_std", p.force_noise_std},
               {"mic_noise_std", p.mic_noise_std},
               {"accel_noise_std", p.accel_noise_std}};
  }
  return j.dump(2) + "\n";
}

std::map<std::string, ObjectProfile> profiles_from_json(const std::string& text) {
  std::map<std::string, ObjectProfile> out;
  try {
    auto j = json::parse(text);
    if (!j.is_object()) fail(ErrorCode::InvalidProfile, "profiles file must hold a JSON object");
    for (const auto& [name, v] : j.items()) {
      ObjectProfile p;
      p.name = name;
      p.stiffness = v.at("stiffness").get<double>();
      p.mobility = v.at("mobility").get<double>();
      p.damping = v.at("damping").get<double>();
      p.resonance = v.at("resonance").get<double>();
      p.thermal_effusivity = v.at("thermal_effusivity").get<double>();
      p.surface_temp = v.at("surface_temp").get<double>();
      p.force_noise_std = v.at("force_noise_std").get<double>();
      p.mic_noise_std = v.at("mic_noise_std").get<double>();
      p.accel_noise_std = v.at("accel_noise_std").get<double>();
      if (auto problems = validate_profile(p); !problems.empty()) {
        fail(ErrorCode::InvalidProfile, name + ": " + problems.front());
      }
      out.emplace(name, p);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidProfile, std::string("malformed profiles file: ") + e.what());
  }
  return out;
}

calib::Fixture thermistor_fixture(std::size_t points, double noise_std, std::uint64_t seed) {
  Rng temp_rng(derive_seed(seed, "fixture_temp"));
  Rng noise_rng(derive_seed(seed, "fixture_noise"));
  calib::Fixture out;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = temp_rng.uniform(15.0, 45.0);
    out.counts.push_back(quantize(device::thermistor_counts(t), dataset::kDeviceAdcBits));
    out.values.push_back(t + noise_rng.normal(0.0, noise_std));
  }
  return out;
}

calib::Fixture force_fixture(std::size_t points, double noise_std, std::uint64_t seed) {
  Rng force_rng(derive_seed(seed, "fixture_force"));
  Rng noise_rng(derive_seed(seed, "fixture_noise"));
  calib::Fixture out;
  for (std::size_t i = 0; i < points; ++i) {
    const double f = force_rng.uniform(0.0, 25.0);
    out.counts.push_back(quantize(device::force_counts(f), dataset::kDeviceAdcBits));
    out.values.push_back(f + noise_rng.normal(0.0, noise_std));
  }
  return out;
}

}  // namespace tactile::sim
