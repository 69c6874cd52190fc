#include "tactile/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tactile/error.hpp"
#include "tactile/textio.hpp"

namespace tactile::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestName = "manifest.json";
constexpr std::string_view kCsvHeader = "t_s,channel,value";

bool safe_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

std::size_t channel_order(ChannelKind kind) {
  return static_cast<std::size_t>(std::find(kAllChannels.begin(), kAllChannels.end(), kind) -
                                  kAllChannels.begin());
}

std::string violations_message(const std::vector<Violation>& violations) {
  std::string msg;
  for (const auto& v : violations) {
    if (!msg.empty()) msg += "; ";
    msg += v.field + ": " + v.rule;
  }
  return msg;
}

std::set<std::string> csv_files_in(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

RawTrial parse_trial_csv(const std::string& text, const std::string& file) {
  RawTrial trial;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  auto malformed = [&](const std::string& reason) {
    fail(ErrorCode::MalformedTrialFile, file + " row " + std::to_string(row) + ": " + reason);
  };

  std::size_t last_order = 0;
  double last_t = -1.0;
  bool any = false;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1) {
      if (textio::trim(line) != kCsvHeader) malformed("expected header '" + std::string(kCsvHeader) + "'");
      continue;
    }
    if (textio::trim(line).empty()) continue;
    auto cells = textio::split(line, ',');
    if (cells.size() != 3) malformed("expected 3 cells, found " + std::to_string(cells.size()));
    auto t = textio::parse_double(cells[0]);
    if (!t || !std::isfinite(*t)) malformed("non-numeric t_s '" + std::string(cells[0]) + "'");
    auto kind = parse_channel_name(textio::trim(cells[1]));
    if (!kind) malformed("unknown channel '" + std::string(cells[1]) + "'");
    auto value = textio::parse_double(cells[2]);
    if (!value) malformed("non-numeric value '" + std::string(cells[2]) + "'");

    const std::size_t order = channel_order(*kind);
    if (any && (order < last_order || (order == last_order && *t <= last_t))) {
      malformed("rows not sorted by (channel, t_s)");
    }
    auto& samples = trial.channels[*kind];
    const double expected_t = static_cast<double>(samples.size()) / sample_rate(*kind);
    if (std::abs(*t - expected_t) > 1e-9) malformed("t_s does not match sample index");
    samples.push_back(*value);
    last_order = order;
    last_t = *t;
    any = true;
  }
  if (row == 0) malformed("empty file");
  return trial;
}

}  // namespace

ChannelSpec channel_spec(ChannelKind kind) { return {kind, sample_rate(kind), Unit::AdcCounts}; }

double sample_rate(ChannelKind kind) { return is_contact_channel(kind) ? kContactRateHz : kThermalRateHz; }

bool is_contact_channel(ChannelKind kind) {
  return kind == ChannelKind::Force || kind == ChannelKind::Microphone || kind == ChannelKind::Accelerometer;
}

std::string_view channel_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Force: return "force";
    case ChannelKind::Microphone: return "mic";
    case ChannelKind::Accelerometer: return "accel";
    case ChannelKind::HeatTransfer: return "heat";
    case ChannelKind::FastThermistor: return "therm";
    case ChannelKind::AmbientTemp: return "ambient";
  }
  return "?";
}

std::optional<ChannelKind> parse_channel_name(std::string_view name) {
  for (auto kind : kAllChannels) {
    if (channel_name(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string_view role_name(Role role) { return role == Role::Foreground ? "foreground" : "background"; }

std::optional<Role> parse_role(std::string_view name) {
  if (name == "foreground") return Role::Foreground;
  if (name == "background") return Role::Background;
  return std::nullopt;
}

const std::vector<double>& RawTrial::channel(ChannelKind kind) const {
  auto it = channels.find(kind);
  if (it == channels.end()) {
    fail(ErrorCode::InvariantViolation,
         "trial " + trial_id + " has no " + std::string(channel_name(kind)) + " channel");
  }
  return it->second;
}

std::vector<Violation> validate_trial(const RawTrial& trial) {
  std::vector<Violation> out;
  if (!safe_id(trial.trial_id)) out.push_back({"trial_id", "must be non-empty and use only [A-Za-z0-9_.-]"});
  if (trial.object_label.empty()) out.push_back({"object_label", "must be non-empty"});
  if (!(trial.pre_contact_velocity > 0.0) || !std::isfinite(trial.pre_contact_velocity)) {
    out.push_back({"pre_contact_velocity", "must be finite and > 0"});
  }
  if (!(trial.duration > 0.0) || !std::isfinite(trial.duration)) {
    out.push_back({"duration", "must be finite and > 0"});
  }
  if (trial.adc_bits < 0 || trial.adc_bits > 24) out.push_back({"adc_bits", "must be 0 (unquantized) or 1..24"});
  if (trial.channels.size() != kAllChannels.size()) {
    out.push_back({"channels", "expected 6 channels, found " + std::to_string(trial.channels.size())});
  }

  std::map<bool, std::vector<std::pair<ChannelKind, std::size_t>>> lengths_by_rate;  // keyed by is_contact
  const double max_count = trial.adc_bits > 0 && trial.adc_bits <= 24 ? std::ldexp(1.0, trial.adc_bits) - 1.0 : 0.0;
  for (auto kind : kAllChannels) {
    auto it = trial.channels.find(kind);
    const std::string field = "channels." + std::string(channel_name(kind));
    if (it == trial.channels.end()) {
      out.push_back({field, "missing"});
      continue;
    }
    const auto& samples = it->second;
    lengths_by_rate[is_contact_channel(kind)].emplace_back(kind, samples.size());
    if (trial.duration > 0.0 && std::isfinite(trial.duration)) {
      const double expected = trial.duration * sample_rate(kind);
      if (std::abs(static_cast<double>(samples.size()) - expected) > 1.0 + 1e-9) {
        out.push_back({field, "length " + std::to_string(samples.size()) + " inconsistent with duration"});
      }
    }
    bool nonfinite = false;
    bool out_of_range = false;
    for (double s : samples) {
      if (!std::isfinite(s)) {
        nonfinite = true;
      } else if (max_count > 0.0 && (s < 0.0 || s > max_count || s != std::floor(s))) {
        out_of_range = true;
      }
    }
    if (nonfinite) out.push_back({field, "contains non-finite samples"});
    if (out_of_range) {
      out.push_back({field, "samples must be integer counts in [0, " + textio::format_double(max_count) + "]"});
    }
  }
  for (const auto& [fast, lengths] : lengths_by_rate) {
    bool equal = true;
    std::string listing;
    for (const auto& [kind, n] : lengths) {
      equal = equal && n == lengths.front().second;
      listing += (listing.empty() ? "" : ", ") + std::string(channel_name(kind)) + " " + std::to_string(n);
    }
    if (!equal) out.push_back({"channels", std::string(fast ? "500 Hz" : "100 Hz") + " channel lengths differ: " + listing});
  }
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  std::vector<Violation> out;
  if (dataset.manifest_version != kManifestVersion) {
    out.push_back({"manifest_version", "unsupported version " + std::to_string(dataset.manifest_version)});
  }
  std::set<std::string> ids;
  std::map<std::string, std::set<Role>> roles_by_label;
  for (const auto& trial : dataset.trials) {
    for (auto& v : validate_trial(trial)) out.push_back({trial.trial_id + "." + v.field, v.rule});
    if (!ids.insert(trial.trial_id).second) out.push_back({"trials", "duplicate trial_id " + trial.trial_id});
    roles_by_label[trial.object_label].insert(trial.role);
  }
  if (!dataset.trials.empty()) {
    if (roles_by_label.size() != 2) {
      out.push_back({"trials", "expected exactly 2 object labels, found " + std::to_string(roles_by_label.size())});
    } else {
      std::set<Role> seen;
      bool consistent = true;
      for (const auto& [label, roles] : roles_by_label) {
        if (roles.size() != 1) consistent = false;
        seen.insert(roles.begin(), roles.end());
      }
      if (!consistent || seen.size() != 2) {
        out.push_back({"trials", "one label must be foreground and the other background"});
      }
    }
  }
  return out;
}

std::string trial_to_csv(const RawTrial& trial) {
  std::string out;
  out.reserve(64 * 4000);
  out += kCsvHeader;
  out += '\n';
  for (auto kind : kAllChannels) {
    auto it = trial.channels.find(kind);
    if (it == trial.channels.end()) continue;
    const double rate = sample_rate(kind);
    const auto name = channel_name(kind);
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      out += textio::format_double(static_cast<double>(i) / rate);
      out += ',';
      out += name;
      out += ',';
      out += textio::format_double(it->second[i]);
      out += '\n';
    }
  }
  return out;
}

void write_dataset(const Dataset& dataset, const fs::path& dir) {
  if (auto violations = validate_dataset(dataset); !violations.empty()) {
    fail(ErrorCode::InvariantViolation, violations_message(violations));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create directory " + dir.string());

  std::set<std::string> new_files;
  for (const auto& t : dataset.trials) new_files.insert(t.trial_id + ".csv");

  // Trial files from a previous manifest in this directory are replaced;
  // anything else would become an orphan, so refuse.
  std::set<std::string> previous;
  if (fs::exists(dir / kManifestName)) {
    try {
      auto old = json::parse(textio::read_file(dir / kManifestName));
      for (const auto& entry : old.at("trials")) previous.insert(entry.at("file").get<std::string>());
    } catch (const json::exception&) {
      // unreadable old manifest: treat as no previous files
    }
  }
  for (const auto& name : csv_files_in(dir)) {
    if (!new_files.count(name) && !previous.count(name)) {
      fail(ErrorCode::InvariantViolation, "directory contains unrelated trial file " + name);
    }
  }
  for (const auto& name : previous) {
    if (!new_files.count(name)) fs::remove(dir / name, ec);
  }

  json manifest;
  manifest["manifest_version"] = dataset.manifest_version;
  manifest["pair_name"] = dataset.pair_name;
  manifest["trials"] = json::array();
  for (const auto& t : dataset.trials) {
    json entry;
    entry["trial_id"] = t.trial_id;
    entry["file"] = t.trial_id + ".csv";
    entry["object_label"] = t.object_label;
    entry["role"] = role_name(t.role);
    entry["velocity_mps"] = t.pre_contact_velocity;
    entry["seed"] = t.seed ? json(*t.seed) : json(nullptr);
    entry["adc_bits"] = t.adc_bits;
    entry["duration_s"] = t.duration;
    entry["contact_time_s"] = t.true_contact_time ? json(*t.true_contact_time) : json(nullptr);
    manifest["trials"].push_back(std::move(entry));
    textio::write_file(dir / (t.trial_id + ".csv"), trial_to_csv(t));
  }
  textio::write_file(dir / kManifestName, manifest.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  const auto manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) fail(ErrorCode::MissingManifest, "no manifest.json in " + dir.string());

  Dataset dataset;
  std::set<std::string> listed;
  try {
    auto manifest = json::parse(textio::read_file(manifest_path));
    dataset.manifest_version = manifest.at("manifest_version").get<int>();
    if (dataset.manifest_version != kManifestVersion) {
      fail(ErrorCode::VersionMismatch, "manifest_version " + std::to_string(dataset.manifest_version) +
                                           " (supported: " + std::to_string(kManifestVersion) + ")");
    }
    dataset.pair_name = manifest.at("pair_name").get<std::string>();
    for (const auto& entry : manifest.at("trials")) {
      const auto file = entry.at("file").get<std::string>();
      const auto path = dir / file;
      if (!fs::exists(path)) fail(ErrorCode::MissingTrialFile, "manifest references missing file " + file);
      RawTrial trial = parse_trial_csv(textio::read_file(path), file);
      trial.trial_id = entry.at("trial_id").get<std::string>();
      trial.object_label = entry.at("object_label").get<std::string>();
      auto role = parse_role(entry.at("role").get<std::string>());
      if (!role) fail(ErrorCode::InvariantViolation, "unknown role for trial " + trial.trial_id);
      trial.role = *role;
      trial.pre_contact_velocity = entry.at("velocity_mps").get<double>();
      if (!entry.at("seed").is_null()) trial.seed = entry.at("seed").get<std::uint64_t>();
      trial.adc_bits = entry.at("adc_bits").get<int>();
      if (entry.contains("duration_s")) {
        trial.duration = entry.at("duration_s").get<double>();
      } else {
        const auto& force = trial.channels[ChannelKind::Force];
        trial.duration = static_cast<double>(force.size()) / kContactRateHz;
      }
      if (entry.contains("contact_time_s") && !entry.at("contact_time_s").is_null()) {
        trial.true_contact_time = entry.at("contact_time_s").get<double>();
      }
      listed.insert(file);
      dataset.trials.push_back(std::move(trial));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvariantViolation, std::string("malformed manifest: ") + e.what());
  }

  for (const auto& name : csv_files_in(dir)) {
    if (!listed.count(name)) fail(ErrorCode::InvariantViolation, "orphan trial file not in manifest: " + name);
  }
  if (auto violations = validate_dataset(dataset); !violations.empty()) {
    fail(ErrorCode::InvariantViolation, violations_message(violations));
  }
  return dataset;
}

}  // namespace tactile::dataset
