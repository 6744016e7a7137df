#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "sarp/grid.hpp"

namespace sarp {

using Complex = std::complex<double>;

// Complex drive envelope Omega(t) in rad/ps, sampled on a TimeGrid.
// carrier_offset is the detuning of the pulse carrier from the simulation
// frame reference, in rad/ps; the envelope holds everything else.
struct TemporalField {
  TimeGrid grid;
  std::vector<Complex> envelope;
  double carrier_offset = 0.0;

  double energy() const;  // sum |Omega|^2 dt, rad^2/ps
  // Cubic (Catmull-Rom) interpolation of the envelope; zero outside the grid.
  Complex envelope_at(double t) const;
  // Indices of the first/last sample with |Omega| above rel_threshold * max.
  // Returns false if the field is identically zero.
  bool support(double& t_lo, double& t_hi, double rel_threshold = 1e-8) const;
  void validate() const;
};

// Spectral amplitude on the angular-frequency axis relative to the carrier,
// ascending from -pi/dt to +pi/dt - dw with dw = 2*pi/(n*dt).
struct SpectralField {
  std::vector<double> omega;  // rad/ps
  std::vector<Complex> amp;
  double carrier_offset = 0.0;

  double energy() const;  // sum |A|^2 dw / (2 pi); equals temporal energy
};

// Spectral transmission window: Gaussian-smoothed slit
//   F(w) = 1/2 [erf((w-wc+hw)/(sqrt2 s)) - erf((w-wc-hw)/(sqrt2 s))].
struct ShaperConfig {
  double center_detuning = 0.0;        // rad/ps, slit center vs frame reference
  double slit_halfwidth = 0.5;         // rad/ps
  double gaussian_smoothing_sigma = 0.15;  // rad/ps

  void validate() const;
  double transmission(double omega) const;
};

// Quadratic spectral phase exp(i * gdd/2 * w^2) about the carrier.
struct ChirpSpec {
  double gdd_ps2 = 0.0;
};

struct PulseMetrics {
  double area = 0.0;  // sum |Omega| dt, rad
  std::optional<double> fwhm;       // ps, measured on |Omega|^2
  std::optional<double> peak_time;  // ps
};

// Gaussian with intensity FWHM `fwhm_ps` and envelope area `area_rad`,
// peaked at the grid center: Omega(t) = O0 exp(-2 ln2 (t-tc)^2 / fwhm^2).
TemporalField make_gaussian(double fwhm_ps, double area_rad,
                            double carrier_offset, const TimeGrid& grid);

SpectralField to_spectrum(const TemporalField& field);
TemporalField to_time(const SpectralField& spec, const TimeGrid& grid);

SpectralField apply_shaper(const SpectralField& spec, const ShaperConfig& cfg);
SpectralField apply_chirp(const SpectralField& spec, const ChirpSpec& chirp);

PulseMetrics pulse_metrics(const TemporalField& field);

// Band-limited upsampling by an integer power-of-two factor (same window,
// factor times more samples), via zero padding in the frequency domain.
TemporalField resample(const TemporalField& field, int factor);

// Slit half-width such that shaping a transform-limited `input_fwhm_ps`
// Gaussian yields `target_fwhm_ps` intensity FWHM, solved by bisection.
double solve_slit_halfwidth(double input_fwhm_ps, double target_fwhm_ps,
                            double smoothing_sigma, const TimeGrid& grid);

// CSV import/export. Temporal columns: t_ps,re_omega,im_omega.
// Spectral columns: w_radps,re_amp,im_amp. Header row mandatory.
void write_temporal_csv(const TemporalField& field, const std::string& path);
TemporalField read_temporal_csv(const std::string& path);
void write_spectral_csv(const SpectralField& spec, const std::string& path);
SpectralField read_spectral_csv(const std::string& path);

}  // namespace sarp
