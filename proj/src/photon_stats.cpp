#include "sarp/photon_stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "sarp/parallel.hpp"
#include "sarp/rng.hpp"

namespace sarp {

namespace {

// Substream ids; every random decision has its own (seed, index, stream) key
// so results do not depend on work partitioning.
enum Stream : std::uint64_t {
  kStrEmission = 1,
  kStrDetectBase = 2,  // +slot (3 slots)
  kStrDark = 6,
  kStrMziArmBase = 7,    // +slot
  kStrMziPortBase = 10,  // +slot
  kStrHbtSplit = 13,
  kStrMziOutcome = 14,
  kStrPoissonSource = 15,
  kStrMziScan = 16,
};

void sample_pulse_range(const EmissionModel& m, std::uint64_t seed,
                        std::uint64_t begin, std::uint64_t end,
                        std::vector<PhotonEvent>& xx,
                        std::vector<PhotonEvent>& x) {
  const double rep = m.rep_period_ps();
  for (std::uint64_t p = begin; p < end; ++p) {
    Rng r(seed, p, kStrEmission);
    const double t0 = static_cast<double>(p) * rep;
    if (r.bernoulli(m.f_prep)) {
      const CircPol pol = r.bernoulli(0.5) ? CircPol::Plus : CircPol::Minus;
      double xx_delay;
      if (m.stim.enabled && r.bernoulli(m.stim.success_prob))
        xx_delay = m.stim.delay_ps;
      else
        xx_delay = r.exponential(m.gamma_xx);
      const double x_delay = xx_delay + r.exponential(m.gamma_x);
      xx.push_back({t0 + xx_delay, 0.0f, static_cast<std::uint32_t>(p), pol,
                    kSlotXX});
      x.push_back({t0 + x_delay, static_cast<float>(xx_delay),
                   static_cast<std::uint32_t>(p), pol, kSlotX});
    }
    if (m.p_multi > 0.0 && r.bernoulli(m.p_multi)) {
      const CircPol pol = r.bernoulli(0.5) ? CircPol::Plus : CircPol::Minus;
      const double d = r.exponential(m.gamma_x);
      x.push_back(
          {t0 + d, 0.0f, static_cast<std::uint32_t>(p), pol, kSlotExtra});
    }
  }
}

void check_run_args(const EmissionModel& m, std::uint64_t n_pulses) {
  m.validate();
  if (n_pulses < 1) throw ConfigError("sample_emissions: need n_pulses >= 1");
  if ((m.f_prep > 0.0 || m.p_multi > 0.0) &&
      n_pulses > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("sample_emissions: too many pulses for photon indexing");
}

}  // namespace

void EmissionModel::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(f_prep) || !prob(p_multi) || !prob(stim.success_prob))
    throw ConfigError("EmissionModel: probabilities must lie in [0,1]");
  if (!(gamma_xx > 0.0) || !(gamma_x > 0.0))
    throw ConfigError("EmissionModel: rates must be positive");
  if (!(rep_period_ns > 0.0))
    throw ConfigError("EmissionModel: rep period must be positive");
}

void ClickStream::validate() const {
  for (std::size_t i = 1; i < t_ps.size(); ++i)
    if (t_ps[i] < t_ps[i - 1])
      throw ConfigError("ClickStream: timestamps must be nondecreasing");
}

void HistConfig::validate() const {
  if (!(bin_width_ps > 0.0) || !(window_ps > 0.0) || !(rep_period_ps > 0.0))
    throw ConfigError("HistConfig: widths must be positive");
  const double k = window_ps / rep_period_ps;
  if (std::abs(k - std::round(k)) > 1e-9)
    throw ConfigError("HistConfig: window must be a multiple of the rep period");
  const double nb = 2.0 * window_ps / bin_width_ps;
  if (std::abs(nb - std::round(nb)) > 1e-9)
    throw ConfigError("HistConfig: window must be a multiple of the bin width");
  if (!(peak_window_ps > 0.0) || peak_window_ps > rep_period_ps)
    throw ConfigError("HistConfig: peak window must be in (0, rep_period]");
}

double CorrelationHistogram::bin_center(int i) const {
  return -cfg.window_ps + (i + 0.5) * cfg.bin_width_ps;
}

double CorrelationHistogram::peak_area(int k) const {
  const double c0 = k * cfg.rep_period_ps;
  double area = 0.0;
  for (int i = 0; i < n_bins(); ++i)
    if (std::abs(bin_center(i) - c0) <= 0.5 * cfg.peak_window_ps)
      area += static_cast<double>(counts[i]);
  return area;
}

std::vector<int> CorrelationHistogram::side_peak_orders() const {
  const int kmax = static_cast<int>(std::floor(
      (cfg.window_ps - 0.5 * cfg.peak_window_ps) / cfg.rep_period_ps));
  std::vector<int> orders;
  for (int k = -kmax; k <= kmax; ++k)
    if (k != 0) orders.push_back(k);
  return orders;
}

double CorrelationHistogram::total() const {
  double s = 0.0;
  for (auto c : counts) s += static_cast<double>(c);
  return s;
}

EmissionRun sample_emissions(const EmissionModel& model, std::uint64_t n_pulses,
                             std::uint64_t seed) {
  check_run_args(model, n_pulses);
  EmissionRun run;
  run.model = model;
  run.n_pulses = n_pulses;
  if (model.f_prep == 0.0 && model.p_multi == 0.0) return run;

  constexpr std::uint64_t kChunk = 1 << 16;
  const int n_chunks = static_cast<int>((n_pulses + kChunk - 1) / kChunk);
  std::vector<std::vector<PhotonEvent>> sxx(n_chunks), sx(n_chunks);
  parallel_for_index(n_chunks, [&](int c) {
    const std::uint64_t b = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t e = std::min(n_pulses, b + kChunk);
    sample_pulse_range(model, seed, b, e, sxx[c], sx[c]);
  });
  std::size_t nxx = 0, nx = 0;
  for (int c = 0; c < n_chunks; ++c) {
    nxx += sxx[c].size();
    nx += sx[c].size();
  }
  run.xx_photons.reserve(nxx);
  run.x_photons.reserve(nx);
  for (int c = 0; c < n_chunks; ++c) {
    run.xx_photons.insert(run.xx_photons.end(), sxx[c].begin(), sxx[c].end());
    run.x_photons.insert(run.x_photons.end(), sx[c].begin(), sx[c].end());
  }
  return run;
}

EmissionRun sample_emissions_serial(const EmissionModel& model,
                                    std::uint64_t n_pulses,
                                    std::uint64_t seed) {
  check_run_args(model, n_pulses);
  EmissionRun run;
  run.model = model;
  run.n_pulses = n_pulses;
  if (model.f_prep == 0.0 && model.p_multi == 0.0) return run;
  sample_pulse_range(model, seed, 0, n_pulses, run.xx_photons, run.x_photons);
  return run;
}

EmissionRun sample_poisson_source(double mean_photons, double gamma_x,
                                  double rep_period_ns, std::uint64_t n_pulses,
                                  std::uint64_t seed) {
  if (mean_photons < 0.0)
    throw ConfigError("sample_poisson_source: mean must be >= 0");
  EmissionRun run;
  run.model.f_prep = 0.0;
  run.model.p_multi = 0.0;
  run.model.gamma_x = gamma_x;
  run.model.rep_period_ns = rep_period_ns;
  run.n_pulses = n_pulses;
  const double rep = run.model.rep_period_ps();
  for (std::uint64_t p = 0; p < n_pulses; ++p) {
    Rng r(seed, p, kStrPoissonSource);
    const std::uint64_t k = r.poisson(mean_photons);
    for (std::uint64_t j = 0; j < k; ++j) {
      const CircPol pol = r.bernoulli(0.5) ? CircPol::Plus : CircPol::Minus;
      run.x_photons.push_back({p * rep + r.exponential(gamma_x), 0.0f,
                               static_cast<std::uint32_t>(p), pol, kSlotX});
    }
  }
  return run;
}

ClickStream detect(std::span<const PhotonEvent> photons, double span_ps,
                   const DetectorModel& det, std::optional<CircPol> pol_filter,
                   std::uint64_t seed, int channel) {
  if (det.efficiency < 0.0 || det.efficiency > 1.0)
    throw ConfigError("DetectorModel: efficiency must lie in [0,1]");
  if (det.dark_rate_hz < 0.0)
    throw ConfigError("DetectorModel: dark rate must be >= 0");

  ClickStream out;
  out.channel = channel;
  out.t_ps.reserve(photons.size());
  for (const auto& ph : photons) {
    if (pol_filter && ph.pol != *pol_filter) continue;
    Rng r(seed, ph.pulse, kStrDetectBase + ph.slot);
    if (!r.bernoulli(det.efficiency)) continue;
    double t = ph.t_ps;
    if (det.timing_jitter_sigma_ps > 0.0)
      t += r.gaussian(det.timing_jitter_sigma_ps);
    out.t_ps.push_back(t);
  }
  if (det.dark_rate_hz > 0.0 && span_ps > 0.0) {
    Rng r(seed, static_cast<std::uint64_t>(channel), kStrDark);
    const double rate_per_ps = det.dark_rate_hz * 1e-12;
    double t = r.exponential(rate_per_ps);
    while (t < span_ps) {
      out.t_ps.push_back(t);
      t += r.exponential(rate_per_ps);
    }
  }
  std::sort(out.t_ps.begin(), out.t_ps.end());
  return out;
}

namespace {

void correlate_range(const std::vector<double>& a, const std::vector<double>& b,
                     const HistConfig& cfg, std::size_t i_begin,
                     std::size_t i_end, std::vector<std::uint64_t>& counts) {
  const double w = cfg.window_ps;
  const double inv_bw = 1.0 / cfg.bin_width_ps;
  const int n_bins = static_cast<int>(counts.size());
  std::size_t lo =
      std::lower_bound(b.begin(), b.end(), a[i_begin] - w) - b.begin();
  for (std::size_t i = i_begin; i < i_end; ++i) {
    const double s = a[i];
    while (lo < b.size() && b[lo] < s - w) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] < s + w; ++j) {
      const int bin = static_cast<int>((b[j] - s + w) * inv_bw);
      if (bin >= 0 && bin < n_bins) ++counts[bin];
    }
  }
}

CorrelationHistogram make_hist(const HistConfig& cfg) {
  cfg.validate();
  CorrelationHistogram h;
  h.cfg = cfg;
  h.counts.assign(static_cast<std::size_t>(
                      std::llround(2.0 * cfg.window_ps / cfg.bin_width_ps)),
                  0);
  return h;
}

}  // namespace

CorrelationHistogram cross_correlate(const ClickStream& start,
                                     const ClickStream& stop,
                                     const HistConfig& cfg) {
  start.validate();
  stop.validate();
  CorrelationHistogram h = make_hist(cfg);
  if (start.t_ps.empty() || stop.t_ps.empty()) return h;

  constexpr std::size_t kChunk = 1 << 15;
  const int n_chunks =
      static_cast<int>((start.t_ps.size() + kChunk - 1) / kChunk);
  std::vector<std::vector<std::uint64_t>> partial(
      n_chunks, std::vector<std::uint64_t>(h.counts.size(), 0));
  parallel_for_index(n_chunks, [&](int c) {
    const std::size_t b = static_cast<std::size_t>(c) * kChunk;
    const std::size_t e = std::min(start.t_ps.size(), b + kChunk);
    correlate_range(start.t_ps, stop.t_ps, cfg, b, e, partial[c]);
  });
  for (const auto& p : partial)
    for (std::size_t i = 0; i < p.size(); ++i) h.counts[i] += p[i];
  return h;
}

CorrelationHistogram cross_correlate_serial(const ClickStream& start,
                                            const ClickStream& stop,
                                            const HistConfig& cfg) {
  start.validate();
  stop.validate();
  CorrelationHistogram h = make_hist(cfg);
  if (start.t_ps.empty() || stop.t_ps.empty()) return h;
  correlate_range(start.t_ps, stop.t_ps, cfg, 0, start.t_ps.size(), h.counts);
  return h;
}

double fidelity_from_areas(double a_side_mean, double a_center, double c_pol) {
  if (!(a_center > 0.0))
    throw NumericalError("fidelity: undefined for zero center-peak area");
  return a_side_mean / a_center * c_pol;
}

double hom_visibility_from_areas(double a_center, double a_uncorr_mean) {
  if (!(a_uncorr_mean > 0.0))
    throw NumericalError("hom visibility: zero normalization peaks");
  return 1.0 - 2.0 * (a_center / a_uncorr_mean);
}

FidelityEstimate fidelity_eq1(const CorrelationHistogram& hist, double c_pol) {
  const auto orders = hist.side_peak_orders();
  if (orders.size() < 3)
    throw ConfigError("fidelity_eq1: need >= 3 resolvable side peaks");
  FidelityEstimate est;
  est.a_center = hist.peak_area(0);
  double sum = 0.0;
  for (int k : orders) sum += hist.peak_area(k);
  est.n_side_peaks = static_cast<int>(orders.size());
  est.a_side_mean = sum / est.n_side_peaks;
  est.raw = fidelity_from_areas(est.a_side_mean, est.a_center, c_pol);
  est.clamped = est.raw > 1.0;
  est.f_p = est.clamped ? 1.0 : est.raw;
  return est;
}

G2Result hbt_g2(const ClickStream& x_stream, const HistConfig& cfg,
                std::uint64_t seed) {
  x_stream.validate();
  ClickStream d1, d2;
  d1.channel = 1;
  d2.channel = 2;
  for (std::size_t i = 0; i < x_stream.t_ps.size(); ++i) {
    Rng r(seed, i, kStrHbtSplit);
    (r.bernoulli(0.5) ? d1 : d2).t_ps.push_back(x_stream.t_ps[i]);
  }
  G2Result res;
  res.histogram = cross_correlate(d1, d2, cfg);
  const auto orders = res.histogram.side_peak_orders();
  double sum = 0.0;
  for (int k : orders) sum += res.histogram.peak_area(k);
  res.a_side_mean = orders.empty() ? 0.0 : sum / orders.size();
  res.a_center = res.histogram.peak_area(0);
  if (res.a_side_mean < 100.0)
    throw NumericalError(
        "hbt_g2: insufficient statistics, mean side-peak counts = " +
        std::to_string(res.a_side_mean));
  res.g2_zero = res.a_center / res.a_side_mean;
  return res;
}

HomResult hom_visibility(const EmissionModel& model, const DetectorModel& det,
                         std::uint64_t n_pulses, std::uint64_t seed,
                         const HomOptions& opt) {
  HistConfig cfg = opt.hist;
  cfg.rep_period_ps = model.rep_period_ps();
  cfg.validate();

  const EmissionRun run = sample_emissions(model, n_pulses, seed);
  const double rep = model.rep_period_ps();

  struct Routed {
    double t;  // arrival time at the output coupler
    float wp;  // wavepacket start, pulse-relative
    std::uint64_t slot;
    bool long_arm;
    std::uint32_t pulse;
    PhotonSlot src;
  };

  // Efficiency thinning, then 50:50 arm routing; the long arm adds one rep
  // period, so photons land in time slot pulse (+1 for the long arm).
  std::vector<Routed> routed;
  routed.reserve(run.x_photons.size());
  for (const auto& ph : run.x_photons) {
    Rng r(seed, ph.pulse, kStrDetectBase + ph.slot);
    if (!r.bernoulli(det.efficiency)) continue;
    Rng arm_rng(seed, ph.pulse, kStrMziArmBase + ph.slot);
    const bool long_arm = arm_rng.bernoulli(0.5);
    const std::uint64_t slot = ph.pulse + (long_arm ? 1u : 0u);
    routed.push_back({ph.t_ps + (long_arm ? rep : 0.0), ph.wp_start_rel, slot,
                      long_arm, ph.pulse, ph.slot});
  }
  std::stable_sort(
      routed.begin(), routed.end(),
      [](const Routed& a, const Routed& b) { return a.slot < b.slot; });

  ClickStream port1, port2;
  port1.channel = 1;
  port2.channel = 2;
  auto emit = [&](const Routed& p, bool to_port1) {
    double t = p.t;
    if (det.timing_jitter_sigma_ps > 0.0) {
      Rng jr(seed, p.pulse, kStrMziPortBase + 2 + p.src);
      t += jr.gaussian(det.timing_jitter_sigma_ps);
    }
    (to_port1 ? port1 : port2).t_ps.push_back(t);
  };

  const double gx = model.gamma_x;
  std::size_t i = 0;
  while (i < routed.size()) {
    std::size_t j = i;
    while (j < routed.size() && routed[j].slot == routed[i].slot) ++j;
    bool handled = false;
    if (j - i == 2) {
      const Routed& a = routed[i];
      const Routed& b = routed[i + 1];
      // consecutive-pulse photons meeting at the coupler interfere
      if (a.long_arm != b.long_arm && a.pulse != b.pulse) {
        const double s2 =
            opt.forced_overlap
                ? *opt.forced_overlap
                : std::exp(-gx * std::abs(static_cast<double>(a.wp) -
                                          static_cast<double>(b.wp)));
        Rng r(seed, a.slot, kStrMziOutcome);
        const bool coincide = r.bernoulli(0.5 * (1.0 - s2));
        const bool flip = r.bernoulli(0.5);
        emit(a, flip);
        emit(b, coincide ? !flip : flip);
        handled = true;
      }
    }
    if (!handled) {
      for (std::size_t k = i; k < j; ++k) {
        Rng r(seed, routed[k].pulse, kStrMziPortBase + routed[k].src);
        emit(routed[k], r.bernoulli(0.5));
      }
    }
    i = j;
  }

  if (det.dark_rate_hz > 0.0) {
    const double span = run.span_ps() + rep;
    for (ClickStream* s : {&port1, &port2}) {
      Rng r(seed, static_cast<std::uint64_t>(s->channel), kStrDark);
      const double rate_per_ps = det.dark_rate_hz * 1e-12;
      double t = r.exponential(rate_per_ps);
      while (t < span) {
        s->t_ps.push_back(t);
        t += r.exponential(rate_per_ps);
      }
    }
  }
  std::sort(port1.t_ps.begin(), port1.t_ps.end());
  std::sort(port2.t_ps.begin(), port2.t_ps.end());

  HomResult res;
  res.histogram = cross_correlate(port1, port2, cfg);
  res.a_center = res.histogram.peak_area(0);
  double sum = 0.0;
  for (int k : {-3, -2, 2, 3}) sum += res.histogram.peak_area(k);
  res.a_uncorr_mean = sum / 4.0;
  if (res.a_uncorr_mean < 100.0)
    throw NumericalError(
        "hom_visibility: insufficient statistics, mean normalization counts "
        "= " +
        std::to_string(res.a_uncorr_mean));
  res.visibility = hom_visibility_from_areas(res.a_center, res.a_uncorr_mean);
  return res;
}

MziScanResult mzi_pnc_scan(double v_true, double mean_counts,
                           std::span<const double> phases,
                           std::uint64_t n_per_phase, std::uint64_t seed) {
  if (!(mean_counts > 0.0))
    throw ConfigError("mzi_pnc_scan: mean_counts must be positive");
  if (phases.size() < 3) throw ConfigError("mzi_pnc_scan: need >= 3 phases");
  const auto [mn, mx] = std::minmax_element(phases.begin(), phases.end());
  if (*mx - *mn < 2.0 * std::numbers::pi - 1e-9)
    throw ConfigError("mzi_pnc_scan: phases must span >= 2 pi");

  MziScanResult res;
  res.phase_rad.assign(phases.begin(), phases.end());
  res.port1.resize(phases.size());
  res.port2.resize(phases.size());
  const double n_eff = mean_counts * static_cast<double>(n_per_phase);
  for (std::size_t j = 0; j < phases.size(); ++j) {
    const double c = std::cos(phases[j]);
    Rng r1(seed, j, kStrMziScan);
    Rng r2(seed, j + (1ull << 32), kStrMziScan);
    res.port1[j] = r1.poisson(0.5 * n_eff * (1.0 + v_true * c));
    res.port2[j] = r2.poisson(0.5 * n_eff * (1.0 - v_true * c));
  }

  // least-squares fit of c0 + a cos(phi) + b sin(phi) to the port-1 counts
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < phases.size(); ++j) {
    const Eigen::Vector3d row(1.0, std::cos(phases[j]), std::sin(phases[j]));
    ata += row * row.transpose();
    aty += row * static_cast<double>(res.port1[j]);
  }
  const auto lu = ata.fullPivLu();
  if (!lu.isInvertible())
    throw NumericalError("mzi_pnc_scan: degenerate phase design, fit failed");
  const Eigen::Vector3d sol = lu.solve(aty);
  double ss = 0.0;
  for (std::size_t j = 0; j < phases.size(); ++j) {
    const double fit =
        sol[0] + sol[1] * std::cos(phases[j]) + sol[2] * std::sin(phases[j]);
    const double d = fit - static_cast<double>(res.port1[j]);
    ss += d * d;
  }
  res.fit_residual_rms = std::sqrt(ss / phases.size());
  res.fit_offset = sol[0];
  if (!(sol[0] > 0.0))
    throw NumericalError(
        "mzi_pnc_scan: fit failed, non-positive offset; residual rms = " +
        std::to_string(res.fit_residual_rms));
  res.v_est = std::sqrt(sol[1] * sol[1] + sol[2] * sol[2]) / sol[0];
  return res;
}

void write_clickstream_csv(const ClickStream& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "channel,t_ps\n";
  char buf[64];
  for (double t : s.t_ps) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", s.channel, t);
    os << buf;
  }
  if (!os) throw ConfigError("write failed: " + path);
}

void write_histogram_csv(const CorrelationHistogram& h,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "bin_center_ps,counts\n";
  char buf[64];
  for (int i = 0; i < h.n_bins(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%llu\n", h.bin_center(i),
                  static_cast<unsigned long long>(h.counts[i]));
    os << buf;
  }
  if (!os) throw ConfigError("write failed: " + path);
}

}  // namespace sarp
