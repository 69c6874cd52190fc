#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tactile::dataset {

enum class ChannelKind { Force, Microphone, Accelerometer, HeatTransfer, FastThermistor, AmbientTemp };
enum class Unit { AdcCounts, Newtons, Celsius, Volts, G };
enum class Role { Foreground, Background };

inline constexpr std::array<ChannelKind, 6> kAllChannels = {
    ChannelKind::Force,        ChannelKind::Microphone,     ChannelKind::Accelerometer,
    ChannelKind::HeatTransfer, ChannelKind::FastThermistor, ChannelKind::AmbientTemp};

inline constexpr double kContactRateHz = 500.0;
inline constexpr double kThermalRateHz = 100.0;
inline constexpr int kDeviceAdcBits = 12;
inline constexpr int kManifestVersion = 1;

struct ChannelSpec {
  ChannelKind kind;
  double sample_rate_hz;
  Unit unit;
};

/// Raw recordings are stored in ADC counts on every channel.
ChannelSpec channel_spec(ChannelKind kind);
double sample_rate(ChannelKind kind);
bool is_contact_channel(ChannelKind kind);

/// File-format channel names: force, mic, accel, heat, therm, ambient.
std::string_view channel_name(ChannelKind kind);
std::optional<ChannelKind> parse_channel_name(std::string_view name);

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

struct RawTrial {
  std::string trial_id;
  std::string object_label;
  Role role = Role::Foreground;
  std::map<ChannelKind, std::vector<double>> channels;
  double pre_contact_velocity = 0.0;  // m/s
  double duration = 0.0;              // s
  int adc_bits = kDeviceAdcBits;      // 0 = unquantized
  std::optional<std::uint64_t> seed;
  std::optional<double> true_contact_time;  // s, simulator ground truth

  const std::vector<double>& channel(ChannelKind kind) const;

  bool operator==(const RawTrial&) const = default;
};

struct Dataset {
  std::vector<RawTrial> trials;
  std::string pair_name;
  int manifest_version = kManifestVersion;

  bool operator==(const Dataset&) const = default;
};

struct Violation {
  std::string field;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_trial(const RawTrial& trial);

/// Trial-level violations (prefixed with the trial id) plus dataset rules:
/// unique ids and, when non-empty, exactly one foreground and one background label.
std::vector<Violation> validate_dataset(const Dataset& dataset);

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

/// Serialized trial CSV, exactly as written to `<trial_id>.csv`.
std::string trial_to_csv(const RawTrial& trial);

}  // namespace tactile::dataset
