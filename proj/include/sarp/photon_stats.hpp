#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sarp/errors.hpp"

namespace sarp {

enum class CircPol : std::uint8_t { Plus, Minus };

// Slots inside one pulse, used to key the per-photon random substreams.
enum PhotonSlot : std::uint8_t { kSlotXX = 0, kSlotX = 1, kSlotExtra = 2 };

struct StimModel {
  bool enabled = false;
  double delay_ps = 7.0;
  double success_prob = 1.0;
};

struct EmissionModel {
  double f_prep = 1.0;         // XX preparation probability per pulse
  double gamma_xx = 1.0 / 120.0;
  double gamma_x = 1.0 / 250.0;
  StimModel stim;
  double p_multi = 0.0;        // extra independent X photon per pulse
  double rep_period_ns = 12.5;

  double rep_period_ps() const { return rep_period_ns * 1000.0; }
  void validate() const;
};

struct DetectorModel {
  double efficiency = 1.0;        // per channel
  double dark_rate_hz = 0.0;      // counts per second
  double timing_jitter_sigma_ps = 0.0;
};

struct PhotonEvent {
  double t_ps = 0.0;          // absolute emission time
  float wp_start_rel = 0.0f;  // wavepacket start relative to the pulse, ps
  std::uint32_t pulse = 0;
  CircPol pol = CircPol::Plus;
  PhotonSlot slot = kSlotX;
};

struct EmissionRun {
  EmissionModel model;
  std::uint64_t n_pulses = 0;
  std::vector<PhotonEvent> xx_photons;
  std::vector<PhotonEvent> x_photons;  // cascade X plus p_multi extras

  double span_ps() const { return n_pulses * model.rep_period_ps(); }
};

struct ClickStream {
  int channel = 0;
  std::vector<double> t_ps;  // nondecreasing

  void validate() const;
};

struct HistConfig {
  double bin_width_ps = 100.0;
  double window_ps = 75000.0;      // +-window; multiple of the rep period
  double peak_window_ps = 2000.0;  // per-peak integration window
  double rep_period_ps = 12500.0;

  void validate() const;
};

struct CorrelationHistogram {
  HistConfig cfg;
  std::vector<std::uint64_t> counts;

  int n_bins() const { return static_cast<int>(counts.size()); }
  double bin_center(int i) const;
  // Counts within +-peak_window/2 of delay k*rep_period.
  double peak_area(int k) const;
  // Peak orders (k != 0) fully contained in the window.
  std::vector<int> side_peak_orders() const;
  double total() const;
};

struct FidelityEstimate {
  double f_p = 0.0;   // clamped to [0, 1]
  double raw = 0.0;   // as computed, may exceed 1
  bool clamped = false;
  double a_center = 0.0;
  double a_side_mean = 0.0;
  int n_side_peaks = 0;
};

struct G2Result {
  CorrelationHistogram histogram;
  double g2_zero = 0.0;
  double a_center = 0.0;
  double a_side_mean = 0.0;
};

struct HomResult {
  CorrelationHistogram histogram;
  double visibility = 0.0;
  double a_center = 0.0;
  double a_uncorr_mean = 0.0;  // mean of the +-2T and +-3T peaks
};

struct MziScanResult {
  std::vector<double> phase_rad;
  std::vector<std::uint64_t> port1;
  std::vector<std::uint64_t> port2;
  double v_est = 0.0;
  double fit_offset = 0.0;
  double fit_residual_rms = 0.0;
};

// Per-pulse cascade sampling. Deterministic for a given seed and independent
// of any parallel partitioning (counter-based per-pulse substreams).
EmissionRun sample_emissions(const EmissionModel& model, std::uint64_t n_pulses,
                             std::uint64_t seed);
EmissionRun sample_emissions_serial(const EmissionModel& model,
                                    std::uint64_t n_pulses, std::uint64_t seed);

// Poissonian control source: k ~ Poisson(mean_photons) independent photons
// per pulse, each delayed by Exp(gamma_x).
EmissionRun sample_poisson_source(double mean_photons, double gamma_x,
                                  double rep_period_ns, std::uint64_t n_pulses,
                                  std::uint64_t seed);

// Efficiency thinning, optional circular-polarization filter, Gaussian timing
// jitter and Poisson dark counts over span_ps; output sorted.
ClickStream detect(std::span<const PhotonEvent> photons, double span_ps,
                   const DetectorModel& det, std::optional<CircPol> pol_filter,
                   std::uint64_t seed, int channel = 0);

// Histogram of (t_stop - t_start) over all pairs within the window.
CorrelationHistogram cross_correlate(const ClickStream& start,
                                     const ClickStream& stop,
                                     const HistConfig& cfg);
CorrelationHistogram cross_correlate_serial(const ClickStream& start,
                                            const ClickStream& stop,
                                            const HistConfig& cfg);

// Peak-area algebra, kept separate so the estimators can be pinned by
// synthetic-area tests.
double fidelity_from_areas(double a_side_mean, double a_center, double c_pol);
double hom_visibility_from_areas(double a_center, double a_uncorr_mean);

// F_p = (A_side / A_center) * c_pol from a start=XX, stop=X histogram.
FidelityEstimate fidelity_eq1(const CorrelationHistogram& hist, double c_pol);

// 50:50 split of the X stream, coincidence histogram between the outputs,
// g2(0) = A_center / mean(A_side).
G2Result hbt_g2(const ClickStream& x_stream, const HistConfig& cfg,
                std::uint64_t seed);

struct HomOptions {
  HistConfig hist;
  // Test hook: overrides the pairwise mode overlap s^2 (0 = distinguishable).
  std::optional<double> forced_overlap;
};

// Unbalanced MZI (one rep period arm imbalance) on the X photons; photons of
// consecutive pulses meeting at the output coupler coincide with probability
// (1 - s^2)/2, s^2 = exp(-gamma_x |t1 - t2|) for wavepacket start times t1,2.
// V from the +-2T and +-3T normalization peaks: V = 1 - 2 A_center / A_uncorr.
HomResult hom_visibility(const EmissionModel& model, const DetectorModel& det,
                         std::uint64_t n_pulses, std::uint64_t seed,
                         const HomOptions& opt = {});

// Phase-scanned MZI photon counting; port-1 counts ~ Poisson with mean
// mean_counts*(1 + v_true cos(phase))/2, port 2 with -cos. V from a linear
// least-squares sinusoid fit to port 1.
MziScanResult mzi_pnc_scan(double v_true, double mean_counts,
                           std::span<const double> phases,
                           std::uint64_t n_per_phase, std::uint64_t seed);

void write_clickstream_csv(const ClickStream& s, const std::string& path);
void write_histogram_csv(const CorrelationHistogram& h, const std::string& path);

}  // namespace sarp
