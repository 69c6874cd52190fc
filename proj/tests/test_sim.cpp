#include <doctest.h>

#include <cmath>

#include "tactile/calib.hpp"
#include "tactile/device.hpp"
#include "tactile/error.hpp"
#include "tactile/sim.hpp"

using namespace tactile;
using namespace tactile::sim;
using dataset::ChannelKind;

namespace {

std::vector<double> force_newtons(const dataset::RawTrial& t) {
  std::vector<double> out;
  for (double c : t.channel(ChannelKind::Force)) out.push_back(device::force_newtons(c));
  return out;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

double max_slope(const std::vector<double>& v) {
  double best = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) best = std::max(best, v[i] - v[i - 1]);
  return best;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("builtin profiles") {
  const auto p = builtin_profiles();
  CHECK(p.size() == 7);
  for (const char* name :
       {"toothbrush", "counter", "towel", "towel_rack", "toilet_handle", "toilet_tank", "toilet_seat"}) {
    REQUIRE(p.count(name) == 1);
    CHECK(p.at(name).name == name);
    CHECK(validate_profile(p.at(name)).empty());
  }
  CHECK(p.at("counter").stiffness > p.at("toothbrush").stiffness);
  CHECK(p.at("toothbrush").mobility > p.at("counter").mobility);

  // deliberate overlap between the handle and the tank
  const auto& h = p.at("toilet_handle");
  const auto& t = p.at("toilet_tank");
  const std::vector<std::pair<double, double>> params = {
      {h.stiffness, t.stiffness}, {h.damping, t.damping}, {h.resonance, t.resonance},
      {h.thermal_effusivity, t.thermal_effusivity}, {h.surface_temp, t.surface_temp}};
  bool close = false;
  for (auto [a, b] : params) close = close || std::abs(a - b) < 0.3 * std::max(std::abs(a), std::abs(b));
  CHECK(close);

  for (const auto& pair : builtin_pairs()) {
    const auto [fg, bg] = resolve_pair(pair, p);
    CHECK(fg.name + "_vs_" + bg.name == pair);
  }
  CHECK(code_of([&] { resolve_pair("bogus", p); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { resolve_pair("toothbrush_vs_sink", p); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("counter responds harder and faster than the toothbrush") {
  const auto p = builtin_profiles();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (double v : {0.15, 0.25, 0.35}) {
      const auto counter = force_newtons(simulate_trial(p.at("counter"), v, 5.0, seed));
      const auto brush = force_newtons(simulate_trial(p.at("toothbrush"), v, 5.0, seed));
      CHECK(max_of(counter) > max_of(brush));
      CHECK(max_slope(counter) > max_slope(brush));
    }
  }
}

TEST_CASE("simulate_trial errors") {
  const auto p = builtin_profiles();
  CHECK(code_of([&] { simulate_trial(p.at("counter"), 0.0, 5.0, 1); }) == ErrorCode::NonPositiveVelocity);
  CHECK(code_of([&] { simulate_trial(p.at("counter"), -0.2, 5.0, 1); }) == ErrorCode::NonPositiveVelocity);
  CHECK(code_of([&] { simulate_trial(p.at("counter"), 0.2, 4.0, 1); }) == ErrorCode::DurationTooShort);
  auto bad = p.at("counter");
  bad.resonance = 300.0;
  CHECK(code_of([&] { simulate_trial(bad, 0.2, 5.0, 1); }) == ErrorCode::InvalidProfile);
  bad = p.at("counter");
  bad.stiffness = 0.0;
  CHECK_FALSE(validate_profile(bad).empty());
  bad = p.at("counter");
  bad.mic_noise_std = -1.0;
  CHECK_FALSE(validate_profile(bad).empty());
}

TEST_CASE("simulate_trial is deterministic and records ground truth") {
  const auto p = builtin_profiles();
  const auto a = simulate_trial(p.at("towel"), 0.2, 5.0, 99);
  const auto b = simulate_trial(p.at("towel"), 0.2, 5.0, 99);
  CHECK(a == b);
  REQUIRE(a.true_contact_time.has_value());
  CHECK(*a.true_contact_time >= 0.3);
  CHECK(*a.true_contact_time <= 0.5);
  auto named = a;
  named.trial_id = "towel_01";
  CHECK(dataset::validate_trial(named).empty());
  const auto c = simulate_trial(p.at("towel"), 0.2, 5.0, 100);
  CHECK(c.channel(ChannelKind::Microphone) != a.channel(ChannelKind::Microphone));
}

TEST_CASE("sample counts follow the channel rates") {
  const auto p = builtin_profiles();
  const auto t = simulate_trial(p.at("counter"), 0.25, 5.0, 1);
  for (auto kind : dataset::kAllChannels) {
    CHECK(t.channel(kind).size() == (dataset::is_contact_channel(kind) ? 2500u : 500u));
  }
  const auto longer = simulate_trial(p.at("counter"), 0.25, 7.5, 1);
  CHECK(longer.channel(ChannelKind::Force).size() == 3750);
  CHECK(longer.channel(ChannelKind::AmbientTemp).size() == 750);
}

TEST_CASE("force is quiet before contact") {
  const auto p = builtin_profiles();
  for (const auto& [name, profile] : p) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto t = simulate_trial(profile, 0.25, 5.0, 500 + seed);
      const auto f = force_newtons(t);
      const double limit = *t.true_contact_time - 0.010;
      for (std::size_t i = 0; static_cast<double>(i) / 500.0 < limit; ++i) {
        sum += std::abs(f[i]);
        ++count;
      }
    }
    CAPTURE(name);
    CHECK(sum / static_cast<double>(count) <= 5.0 * profile.force_noise_std);
  }
}

TEST_CASE("peak force is monotone in velocity and stiffness") {
  auto profile = builtin_profiles().at("towel");
  for (double m : {0.0, 0.4, 1.0}) {
    profile.mobility = m;
    double prev_s = -1.0;
    for (double s = 0.05; s <= 1.0; s += 0.05) {
      profile.stiffness = s;
      const double f = peak_force(profile, 0.25);
      CHECK(f >= prev_s);
      prev_s = f;
      double prev_v = -1.0;
      for (double v = 0.05; v <= 1.0; v += 0.05) {
        const double fv = peak_force(profile, v);
        CHECK(fv >= prev_v);
        prev_v = fv;
      }
    }
  }
}

TEST_CASE("quantization error is at most half an LSB") {
  const auto p = builtin_profiles();
  for (const char* name : {"counter", "toothbrush", "toilet_seat"}) {
    const auto ideal = simulate_trial(p.at(name), 0.3, 5.0, 8, 0);
    const auto quant = simulate_trial(p.at(name), 0.3, 5.0, 8, 12);
    for (auto kind : dataset::kAllChannels) {
      const auto& a = ideal.channel(kind);
      const auto& b = quant.channel(kind);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] >= 0.0 && a[i] <= 4095.0) CHECK(std::abs(a[i] - b[i]) <= 0.5);
        CHECK(b[i] == std::round(b[i]));
      }
    }
  }
}

TEST_CASE("heater cools on contact and the probe moves toward the surface") {
  const auto p = builtin_profiles();
  const auto t = simulate_trial(p.at("counter"), 0.25, 5.0, 4, 0);
  const auto& heat = t.channel(ChannelKind::HeatTransfer);
  CHECK(device::thermistor_celsius(heat.front()) == doctest::Approx(45.0).epsilon(0.01));
  CHECK(device::thermistor_celsius(heat.back()) < 40.0);
  const auto& therm = t.channel(ChannelKind::FastThermistor);
  CHECK(std::abs(device::thermistor_celsius(therm.back()) - p.at("counter").surface_temp) < 0.2);
}

TEST_CASE("simulate_pair_dataset") {
  const auto p = builtin_profiles();
  SessionProtocol protocol;
  const auto ds = simulate_pair_dataset(p.at("towel"), p.at("towel_rack"), protocol);
  CHECK(ds.trials.size() == 20);
  CHECK(ds.pair_name == "towel_vs_towel_rack");
  std::size_t fg = 0;
  for (const auto& t : ds.trials) {
    fg += t.role == dataset::Role::Foreground;
    CHECK(t.pre_contact_velocity >= protocol.velocity_min);
    CHECK(t.pre_contact_velocity <= protocol.velocity_max);
  }
  CHECK(fg == 10);
  CHECK(dataset::validate_dataset(ds).empty());
  CHECK(ds.trials.front().trial_id == "towel_01");

  protocol.trials_per_object = 1;
  CHECK(simulate_pair_dataset(p.at("towel"), p.at("towel_rack"), protocol).trials.size() == 2);

  SessionProtocol other;
  other.seed = 1;
  CHECK(simulate_pair_dataset(p.at("towel"), p.at("towel_rack"), other) != ds);
  CHECK(simulate_pair_dataset(p.at("towel"), p.at("towel_rack"), SessionProtocol{}) == ds);
}

TEST_CASE("profiles JSON round-trip") {
  const auto p = builtin_profiles();
  CHECK(profiles_from_json(profiles_to_json(p)) == p);
  CHECK_THROWS_AS(profiles_from_json("{\"x\": {\"stiffness\": 2.0}}"), Error);
}

TEST_CASE("calibration fixtures") {
  const auto therm = thermistor_fixture(200, 0.5, 1);
  CHECK(therm.counts.size() == 200);
  for (double v : therm.values) {
    CHECK(v > 12.0);
    CHECK(v < 48.0);
  }
  const auto force = force_fixture(50, 0.0, 2);
  for (std::size_t i = 0; i < force.counts.size(); ++i) {
    // counts are quantized, so the reading is within one count of the truth
    const double lsb = device::force_newtons(force.counts[i] + 1.0) - device::force_newtons(force.counts[i]);
    CHECK(std::abs(device::force_newtons(force.counts[i]) - force.values[i]) <= lsb);
  }
}
