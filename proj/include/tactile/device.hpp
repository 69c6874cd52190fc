#pragma once

#include "tactile/calib.hpp"

// Synthetic ground-truth transfer curves of the handheld device's analog front
// end. They stand in for bench calibration data that is not available; the
// simulator uses them to convert physical quantities into ADC counts.
namespace tactile::device {

inline constexpr double kAdcFullScale = 4095.0;  // 12-bit
inline constexpr double kAdcVref = 3.3;          // volts

// Fabric taxel in a voltage divider, counts -> newtons:
//   F(c) = kForceLinear * d + kForceCubic * d^3,  d = (c - kForceBaselineCounts) / 4095
inline constexpr double kForceBaselineCounts = 300.0;
inline constexpr double kForceLinear = 60.0;   // N per full scale
inline constexpr double kForceCubic = 120.0;   // N per full scale^3

double force_newtons(double counts);
/// Inverse of force_newtons (unquantized counts).
double force_counts(double newtons);
/// Exact cubic of force_newtons expressed as a calibration model (x_scale 4095).
calib::CalibrationModel force_calibration();

// 10k NTC thermistor (B = 3950) over a 10k low-side resistor; counts rise with temperature.
inline constexpr double kNtcR25 = 10000.0;
inline constexpr double kNtcBeta = 3950.0;
inline constexpr double kDividerR = 10000.0;

double thermistor_counts(double celsius);
double thermistor_celsius(double counts);

// LM35, 10 mV per degree C.
double lm35_counts(double celsius);
double lm35_celsius(double counts);

/// Cubic fit of the thermistor curve over 0..60 C, used as the default
/// conversion for the heat and therm channels.
calib::CalibrationModel thermistor_calibration();

}  // namespace tactile::device
