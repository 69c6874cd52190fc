#include "tactile/device.hpp"

#include <cmath>
#include <vector>

namespace tactile::device {

namespace {
constexpr double kKelvin = 273.15;
constexpr double kT25 = 298.15;
constexpr double kLm35VoltsPerC = 0.010;
}  // namespace

double force_newtons(double counts) {
  const double d = (counts - kForceBaselineCounts) / kAdcFullScale;
  return kForceLinear * d + kForceCubic * d * d * d;
}

double force_counts(double newtons) {
  // depressed cubic d^3 + p d - q = 0 with a single real root (p > 0)
  const double p = kForceLinear / kForceCubic;
  const double q = newtons / kForceCubic;
  const double disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  double d = std::cbrt(q / 2.0 + disc) + std::cbrt(q / 2.0 - disc);
  d -= (kForceCubic * d * d * d + kForceLinear * d - newtons) / (3.0 * kForceCubic * d * d + kForceLinear);
  return kForceBaselineCounts + d * kAdcFullScale;
}

calib::CalibrationModel force_calibration() {
  const double u0 = kForceBaselineCounts / kAdcFullScale;
  const double a = kForceLinear;
  const double b = kForceCubic;
  calib::CalibrationModel model;
  model.degree = 3;
  model.x_scale = kAdcFullScale;
  model.coefficients = {-a * u0 - b * u0 * u0 * u0, a + 3.0 * b * u0 * u0, -3.0 * b * u0, b};
  model.r_squared = 1.0;
  model.output_unit = dataset::Unit::Newtons;
  return model;
}

double thermistor_counts(double celsius) {
  const double r = kNtcR25 * std::exp(kNtcBeta * (1.0 / (celsius + kKelvin) - 1.0 / kT25));
  return kAdcFullScale * kDividerR / (kDividerR + r);
}

double thermistor_celsius(double counts) {
  const double r = kDividerR * (kAdcFullScale / counts - 1.0);
  return 1.0 / (1.0 / kT25 + std::log(r / kNtcR25) / kNtcBeta) - kKelvin;
}

double lm35_counts(double celsius) { return celsius * kLm35VoltsPerC / kAdcVref * kAdcFullScale; }

double lm35_celsius(double counts) { return counts / kAdcFullScale * kAdcVref / kLm35VoltsPerC; }

calib::CalibrationModel thermistor_calibration() {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i <= 600; ++i) {
    const double t = 0.1 * i;
    xs.push_back(thermistor_counts(t));
    ys.push_back(t);
  }
  return calib::fit_polynomial(xs, ys, 3, dataset::Unit::Celsius);
}

}  // namespace tactile::device
