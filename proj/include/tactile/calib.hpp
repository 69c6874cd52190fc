#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tactile/dataset.hpp"

namespace tactile::calib {

/// Polynomial map from ADC counts to engineering units. Coefficients act on the
/// conditioned input u = raw / x_scale, lowest order first.
struct CalibrationModel {
  std::vector<double> coefficients;
  int degree = 3;
  double r_squared = 0.0;
  dataset::Unit input_unit = dataset::Unit::AdcCounts;
  dataset::Unit output_unit = dataset::Unit::Celsius;
  double x_scale = 1.0;

  /// Coefficients in raw counts: c_k / x_scale^k.
  std::vector<double> unscaled_coefficients() const;

  bool operator==(const CalibrationModel&) const = default;
};

/// Least-squares polynomial fit via Householder QR on the scaled Vandermonde
/// matrix. x_scale = max|x| (1 when every x is zero).
CalibrationModel fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree = 3,
                                dataset::Unit output_unit = dataset::Unit::Celsius);

double apply_calibration(const CalibrationModel& model, double raw);
std::vector<double> apply_calibration(const CalibrationModel& model, std::span<const double> raw);

/// 1 - SS_res / SS_tot. Negative for a model that does worse than the mean.
double r_squared(const CalibrationModel& model, std::span<const double> xs, std::span<const double> ys);

/// `calib_<kind>.json`
struct CalibrationFile {
  std::string kind;
  CalibrationModel model;
  std::string fitted_on;

  bool operator==(const CalibrationFile&) const = default;
};

std::string to_json(const CalibrationFile& file);
CalibrationFile calibration_from_json(const std::string& text);
void write_calibration(const CalibrationFile& file, const std::filesystem::path& path);
CalibrationFile read_calibration(const std::filesystem::path& path);

/// Reference pairs (counts, value) with a `counts,value` header.
struct Fixture {
  std::vector<double> counts;
  std::vector<double> values;
};

Fixture read_fixture(const std::filesystem::path& path);
std::string fixture_to_csv(const Fixture& fixture);

std::string_view unit_name(dataset::Unit unit);
dataset::Unit parse_unit(std::string_view name);

}  // namespace tactile::calib
