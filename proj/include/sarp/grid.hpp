#pragma once

#include <stdexcept>

#include "sarp/errors.hpp"

namespace sarp {

// Uniform time grid. n_samples must be a power of two so the DFT pair is an
// exact round trip.
struct TimeGrid {
  double t_start = 0.0;  // ps
  double dt = 1.0;       // ps
  int n_samples = 2;

  double t(int k) const { return t_start + k * dt; }
  double t_end() const { return t_start + (n_samples - 1) * dt; }
  double span() const { return (n_samples - 1) * dt; }
  double center() const { return t_start + (n_samples / 2) * dt; }

  // Symmetric window [-half_span, +half_span), sample n/2 lands on t = 0.
  static TimeGrid centered(double half_span, int n) {
    return TimeGrid{-half_span, 2.0 * half_span / n, n};
  }

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("TimeGrid: dt must be positive");
    if (n_samples < 2) throw ConfigError("TimeGrid: need at least 2 samples");
    if ((n_samples & (n_samples - 1)) != 0)
      throw ConfigError("TimeGrid: n_samples must be a power of two");
  }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace sarp
