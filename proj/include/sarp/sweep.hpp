#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sarp/config.hpp"
#include "sarp/dynamics.hpp"

namespace sarp {

// Random power sweep between lo and hi (pi units), one decay-off dynamics
// evaluation per step; D = mean(|c_i - mean|) / mean.
struct RobustnessResult {
  std::vector<double> powers_pi;
  std::vector<double> counts;
  double mean = 0.0;
  double mean_abs_rel_dev = 0.0;
};
RobustnessResult robustness(const DriveFactory& factory, double power_lo,
                            double power_hi, int n_steps, std::uint64_t seed);

// Wavelength x power grid of decay-off x_counts and preparation fidelity.
// Failed grid points are reported as NaN and counted.
struct Map2dResult {
  std::vector<double> wavelength_nm;  // size nw
  std::vector<double> power_pi;       // size np
  std::vector<double> counts;         // row-major [iw * np + ip]
  std::vector<double> f_p;
  int failures = 0;
};
Map2dResult map2d(const DriveFactory& factory,
                  std::span<const double> wavelength_nm,
                  std::span<const double> power_pi);

// Runs the experiment described by a config file. Returns the files written.
// Throws ConfigError for schema problems and NumericalError for solver
// failures; no partial output files are left behind.
std::vector<std::string> run_config(const std::string& config_path,
                                    const std::string& out_dir = ".",
                                    std::optional<std::uint64_t> seed_override = {},
                                    int jobs = 0);
std::vector<std::string> run_config_parsed(Config cfg,
                                           const std::string& out_dir);

}  // namespace sarp
