#include "tactile/calib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "tactile/error.hpp"
#include "tactile/textio.hpp"

namespace tactile::calib {

using nlohmann::json;

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, std::string(what) + " contains a non-finite value");
  }
}

double horner(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
  return acc;
}

// Householder QR least squares for a dense column-major n x m system.
std::vector<double> solve_least_squares(std::vector<double> a, std::vector<double> b, std::size_t n,
                                        std::size_t m) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[j * n + i]; };
  std::vector<double> diag(m);
  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += at(i, j) * at(i, j);
    max_col_norm = std::max(max_col_norm, std::sqrt(s));
  }
  for (std::size_t k = 0; k < m; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += at(i, k) * at(i, k);
    norm = std::sqrt(norm);
    if (norm <= 1e-13 * max_col_norm) {
      fail(ErrorCode::DegenerateInputs, "Vandermonde matrix is rank deficient (too few distinct inputs)");
    }
    const double alpha = at(k, k) > 0.0 ? -norm : norm;
    // v = x - alpha e1, stored in place
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += at(i, k) * at(i, k);
    for (std::size_t j = k + 1; j < m; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += at(i, k) * at(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) at(i, j) -= f * at(i, k);
    }
    double dot = 0.0;
    for (std::size_t i = k; i < n; ++i) dot += at(i, k) * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < n; ++i) b[i] -= f * at(i, k);
    diag[k] = alpha;
  }
  std::vector<double> x(m);
  for (std::size_t k = m; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < m; ++j) s -= at(k, j) * x[j];
    x[k] = s / diag[k];
  }
  return x;
}

}  // namespace

std::vector<double> CalibrationModel::unscaled_coefficients() const {
  std::vector<double> out(coefficients.size());
  double scale = 1.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    out[k] = coefficients[k] / scale;
    scale *= x_scale;
  }
  return out;
}

CalibrationModel fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree,
                                dataset::Unit output_unit) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "degree must be >= 0");
  if (xs.size() != ys.size()) {
    fail(ErrorCode::LengthMismatch,
         "xs has " + std::to_string(xs.size()) + " points but ys has " + std::to_string(ys.size()));
  }
  const auto m = static_cast<std::size_t>(degree) + 1;
  if (xs.size() < m) {
    fail(ErrorCode::InsufficientPoints, "degree " + std::to_string(degree) + " needs at least " +
                                            std::to_string(m) + " points, got " + std::to_string(xs.size()));
  }
  require_finite(xs, "xs");
  require_finite(ys, "ys");
  if (degree > 0 && std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    fail(ErrorCode::DegenerateInputs, "all xs are identical");
  }

  double x_scale = 0.0;
  for (double x : xs) x_scale = std::max(x_scale, std::abs(x));
  if (x_scale == 0.0) x_scale = 1.0;

  const std::size_t n = xs.size();
  std::vector<double> a(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = xs[i] / x_scale;
    double p = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      a[j * n + i] = p;
      p *= u;
    }
  }

  CalibrationModel model;
  model.degree = degree;
  model.output_unit = output_unit;
  model.x_scale = x_scale;
  model.coefficients = solve_least_squares(std::move(a), std::vector<double>(ys.begin(), ys.end()), n, m);
  model.r_squared = r_squared(model, xs, ys);
  return model;
}

double apply_calibration(const CalibrationModel& model, double raw) {
  if (!std::isfinite(raw)) fail(ErrorCode::NonFiniteInput, "raw value is not finite");
  return horner(model.coefficients, raw / model.x_scale);
}

std::vector<double> apply_calibration(const CalibrationModel& model, std::span<const double> raw) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(apply_calibration(model, r));
  return out;
}

double r_squared(const CalibrationModel& model, std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) fail(ErrorCode::LengthMismatch, "xs and ys differ in length");
  if (xs.size() < 2) fail(ErrorCode::InsufficientPoints, "r_squared needs at least 2 points");
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  double ss_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - apply_calibration(model, xs[i]);
    ss_res += r * r;
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
    ss_y += ys[i] * ys[i];
  }
  if (ss_tot == 0.0) {
    // constant targets: perfect (to rounding) prediction counts as R^2 = 1
    const double floor = 1e-24 * std::max(ss_y, 1.0);
    return ss_res <= floor ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return 1.0 - ss_res / ss_tot;
}

std::string_view unit_name(dataset::Unit unit) {
  switch (unit) {
    case dataset::Unit::AdcCounts: return "adc_counts";
    case dataset::Unit::Newtons: return "newtons";
    case dataset::Unit::Celsius: return "celsius";
    case dataset::Unit::Volts: return "volts";
    case dataset::Unit::G: return "g";
  }
  return "?";
}

dataset::Unit parse_unit(std::string_view name) {
  for (auto u : {dataset::Unit::AdcCounts, dataset::Unit::Newtons, dataset::Unit::Celsius, dataset::Unit::Volts,
                 dataset::Unit::G}) {
    if (unit_name(u) == name) return u;
  }
  fail(ErrorCode::InvalidArgument, "unknown unit '" + std::string(name) + "'");
}

std::string to_json(const CalibrationFile& file) {
  json j;
  j["kind"] = file.kind;
  j["degree"] = file.model.degree;
  j["coefficients"] = file.model.coefficients;
  j["x_scale"] = file.model.x_scale;
  j["r_squared"] = file.model.r_squared;
  j["fitted_on"] = file.fitted_on;
  j["input_unit"] = unit_name(file.model.input_unit);
  j["output_unit"] = unit_name(file.model.output_unit);
  return j.dump(2) + "\n";
}

CalibrationFile calibration_from_json(const std::string& text) {
  try {
    auto j = json::parse(text);
    CalibrationFile file;
    file.kind = j.at("kind").get<std::string>();
    file.model.degree = j.at("degree").get<int>();
    file.model.coefficients = j.at("coefficients").get<std::vector<double>>();
    file.model.x_scale = j.at("x_scale").get<double>();
    file.model.r_squared = j.at("r_squared").get<double>();
    file.fitted_on = j.value("fitted_on", "");
    if (j.contains("output_unit")) file.model.output_unit = parse_unit(j.at("output_unit").get<std::string>());
    if (file.model.degree < 0 || file.model.coefficients.size() != static_cast<std::size_t>(file.model.degree) + 1) {
      fail(ErrorCode::InvariantViolation, "coefficient count must equal degree + 1");
    }
    if (!(file.model.x_scale > 0.0)) fail(ErrorCode::InvariantViolation, "x_scale must be positive");
    return file;
  } catch (const json::exception& e) {
    fail(ErrorCode::InvariantViolation, std::string("malformed calibration file: ") + e.what());
  }
}

void write_calibration(const CalibrationFile& file, const std::filesystem::path& path) {
  textio::write_file(path, to_json(file));
}

CalibrationFile read_calibration(const std::filesystem::path& path) {
  return calibration_from_json(textio::read_file(path));
}

Fixture read_fixture(const std::filesystem::path& path) {
  std::istringstream in(textio::read_file(path));
  std::string line;
  Fixture fixture;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto trimmed = textio::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto cells = textio::split(trimmed, ',');
    if (cells.size() != 2) {
      fail(ErrorCode::MalformedTrialFile, path.string() + " row " + std::to_string(row) + ": expected 2 cells");
    }
    auto x = textio::parse_double(cells[0]);
    auto y = textio::parse_double(cells[1]);
    if (!x || !y) {
      if (fixture.counts.empty() && textio::trim(cells[0]) == "counts") continue;  // header
      fail(ErrorCode::MalformedTrialFile, path.string() + " row " + std::to_string(row) + ": non-numeric cell");
    }
    fixture.counts.push_back(*x);
    fixture.values.push_back(*y);
  }
  return fixture;
}

std::string fixture_to_csv(const Fixture& fixture) {
  std::string out = "counts,value\n";
  for (std::size_t i = 0; i < fixture.counts.size(); ++i) {
    out += textio::format_double(fixture.counts[i]) + "," + textio::format_double(fixture.values[i]) + "\n";
  }
  return out;
}

}  // namespace tactile::calib
