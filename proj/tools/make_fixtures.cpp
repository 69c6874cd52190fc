// Regenerates the calibration fixtures under data/fixtures from the device
// transfer curves: make_fixtures <output-dir>
#include <filesystem>
#include <iostream>

#include "tactile/calib.hpp"
#include "tactile/device.hpp"
#include "tactile/sim.hpp"
#include "tactile/textio.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? argv[1] : "data/fixtures";
  fs::create_directories(dir);
  using tactile::textio::write_file;
  using tactile::calib::fixture_to_csv;

  write_file(dir / "thermistor.csv", fixture_to_csv(tactile::sim::thermistor_fixture(200, 0.5, 1)));
  write_file(dir / "force.csv", fixture_to_csv(tactile::sim::force_fixture(200, 0.9, 2)));

  tactile::calib::Fixture exact;
  for (int c = 300; c <= 2700; c += 100) {
    exact.counts.push_back(c);
    exact.values.push_back(tactile::device::force_newtons(c));
  }
  write_file(dir / "force_exact_cubic.csv", fixture_to_csv(exact));

  tactile::calib::Fixture tiny;
  tiny.counts = {1000, 2000};
  tiny.values = {1.0, 2.0};
  write_file(dir / "two_points.csv", fixture_to_csv(tiny));
  std::cout << "wrote fixtures to " << dir << "\n";
  return 0;
}
