#include "sarp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "sarp/parallel.hpp"

namespace sarp {

namespace {

constexpr double kPi = std::numbers::pi;
using State = Eigen::Matrix<Complex, 18, 1>;  // 4x4 rho + two accumulators

struct DriveEval {
  const TemporalField* field = nullptr;
  double carrier = 0.0;
  bool active = false;

  void bind(const TemporalField& f) {
    field = &f;
    carrier = f.carrier_offset;
    double lo, hi;
    active = f.support(lo, hi);
  }
  Complex at(double t) const {
    if (!active) return {0.0, 0.0};
    const Complex env = field->envelope_at(t);
    return env * std::polar(1.0, carrier * t);
  }
};

struct Rhs {
  double delta = 0.0;
  double gxx = 0.0, gx = 0.0;
  bool decay = false;
  DriveEval tpe;
  DriveEval stim;
  int stim_level = kXH;

  Eigen::Matrix4cd hamiltonian(double t) const {
    Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
    h(kXH, kXH) = delta;
    h(kXV, kXV) = delta;
    const Complex wt = 0.5 * tpe.at(t);
    h(kG, kXH) += wt;
    h(kXH, kXX) += wt;
    if (stim.field) h(stim_level, kXX) += 0.5 * stim.at(t);
    h(kXH, kG) = std::conj(h(kG, kXH));
    h(kXX, kXH) = std::conj(h(kXH, kXX));
    h(kXX, kXV) = std::conj(h(kXV, kXX));
    return h;
  }

  void operator()(double t, const State& y, State& dy) const {
    Eigen::Map<const Eigen::Matrix4cd> rho(y.data());
    Eigen::Map<Eigen::Matrix4cd> out(dy.data());
    const Eigen::Matrix4cd h = hamiltonian(t);
    out.noalias() = Complex(0.0, -1.0) * (h * rho - rho * h);
    if (decay) {
      const double pxx = rho(kXX, kXX).real();
      out(kXH, kXH) += 0.5 * gxx * pxx;
      out(kXV, kXV) += 0.5 * gxx * pxx;
      out(kG, kG) += gx * (rho(kXH, kXH).real() + rho(kXV, kXV).real());
      // coherence damping from the channel out-rates (0, gx, gx, gxx)
      const double gout[4] = {0.0, gx, gx, gxx};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          out(i, j) -= 0.5 * (gout[i] + gout[j]) * rho(i, j);
    }
    dy[16] = rho(kXH, kXH).real();
    dy[17] = rho(kXV, kXV).real();
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;

struct StepResult {
  State y;
  State f_end;  // FSAL derivative at the step end
  double err = 0.0;
};

StepResult dopri5_step(const Rhs& rhs, double t, double h, const State& y,
                       const State& f0, double atol, double rtol) {
  State k2, k3, k4, k5, k6, k7;
  State tmp = y + h * kA21 * f0;
  rhs(t + kC2 * h, tmp, k2);
  tmp = y + h * (kA31 * f0 + kA32 * k2);
  rhs(t + kC3 * h, tmp, k3);
  tmp = y + h * (kA41 * f0 + kA42 * k2 + kA43 * k3);
  rhs(t + kC4 * h, tmp, k4);
  tmp = y + h * (kA51 * f0 + kA52 * k2 + kA53 * k3 + kA54 * k4);
  rhs(t + kC5 * h, tmp, k5);
  tmp = y + h * (kA61 * f0 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
  rhs(t + h, tmp, k6);

  StepResult r;
  r.y = y + h * (kB1 * f0 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
  rhs(t + h, r.y, k7);
  r.f_end = k7;

  const State err_vec =
      h * (kE1 * f0 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
  double acc = 0.0;
  for (int i = 0; i < 18; ++i) {
    const double sc =
        atol + rtol * std::max(std::abs(y[i]), std::abs(r.y[i]));
    const double e = std::abs(err_vec[i]) / sc;
    acc += e * e;
  }
  r.err = std::sqrt(acc / 18.0);
  return r;
}

// Cubic Hermite interpolation between accepted steps (dense output).
State hermite(double t, double t0, double t1, const State& y0, const State& y1,
              const State& f0, const State& f1) {
  const double h = t1 - t0;
  const double u = (t - t0) / h;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

DensityMatrix4 rho_of(const State& y) {
  DensityMatrix4 r;
  r.m = Eigen::Map<const Eigen::Matrix4cd>(y.data());
  return r;
}

}  // namespace

void QdParams::validate() const {
  if (!(binding_energy_mev > 0.0))
    throw ConfigError("QdParams: binding energy must be positive");
  if (!(gamma_xx > 0.0) || !(gamma_x > 0.0))
    throw ConfigError("QdParams: radiative rates must be positive");
}

Eigen::Matrix4cd build_hamiltonian(double t, const QdParams& params,
                                   const DriveSet& drives) {
  params.validate();
  drives.tpe.validate();
  if (t < drives.tpe.grid.t_start || t > drives.tpe.grid.t_end())
    throw ConfigError("build_hamiltonian: t outside the drive grid");
  if (drives.stim) drives.stim->field.validate();
  Rhs rhs;
  rhs.delta = params.delta();
  rhs.tpe.bind(drives.tpe);
  if (drives.stim) {
    rhs.stim.bind(drives.stim->field);
    rhs.stim_level = exciton_level(drives.stim->pol);
  }
  return rhs.hamiltonian(t);
}

EvolveResult evolve(const DensityMatrix4& rho0, const QdParams& params,
                    const DriveSet& drives, const SimOptions& options) {
  params.validate();
  options.grid.validate();
  rho0.validate();
  drives.tpe.validate();
  if (drives.stim) drives.stim->field.validate();

  const double t0 = options.grid.t_start;
  const double t_end = options.grid.t_end();

  // Drive supports must lie inside the simulation window.
  double sup_lo = std::numeric_limits<double>::infinity();
  double sup_hi = -std::numeric_limits<double>::infinity();
  auto fold_support = [&](const TemporalField& f) {
    double lo, hi;
    if (!f.support(lo, hi)) return;
    if (lo < t0 - 1e-9 || hi > t_end + 1e-9)
      throw ConfigError("evolve: drive support outside the simulation grid");
    sup_lo = std::min(sup_lo, lo);
    sup_hi = std::max(sup_hi, hi);
  };
  fold_support(drives.tpe);
  if (drives.stim) fold_support(drives.stim->field);
  const bool has_drive = std::isfinite(sup_lo);

  if (options.decay_enabled && has_drive) {
    const double tail = t_end - sup_hi;
    if (tail < 8.0 / params.gamma_x - 1e-9)
      throw ConfigError(
          "evolve: decay requires >= 8/gamma_x of post-pulse tail in the grid");
  }

  Rhs rhs;
  rhs.delta = params.delta();
  rhs.gxx = params.gamma_xx;
  rhs.gx = params.gamma_x;
  rhs.decay = options.decay_enabled;
  rhs.tpe.bind(drives.tpe);
  if (drives.stim) {
    rhs.stim.bind(drives.stim->field);
    rhs.stim_level = exciton_level(drives.stim->pol);
  }

  const double atol = 1e-12;
  const double rtol = options.rel_tol;
  auto hmax_at = [&](double t) {
    if (!has_drive) return 100.0;
    if (t < sup_lo - 1e-12) return std::max(sup_lo - t, 1e-3);
    if (t <= sup_hi + 5.0) return 2.0;
    return 100.0;
  };

  State y;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) y[c * 4 + r] = rho0.m(r, c);
  y[16] = y[17] = Complex(0.0, 0.0);

  EvolveResult result;
  int next_sample = 0;
  auto store_through = [&](double ta, double tb, const State& ya,
                           const State& yb, const State& fa, const State& fb) {
    if (!options.store_trajectory) return;
    while (next_sample < options.grid.n_samples) {
      const double ts = options.grid.t(next_sample);
      if (ts > tb + 1e-12) break;
      State ys = (ts <= ta) ? ya : hermite(ts, ta, tb, ya, yb, fa, fb);
      TrajectoryPoint pt{ts, rho_of(ys)};
      pt.rho.validate(1e-8, 1e-8, -1e-9);
      result.trajectory.push_back(std::move(pt));
      ++next_sample;
    }
  };

  State f0;
  rhs(t0, y, f0);
  store_through(t0, t0, y, y, f0, f0);

  double t = t0;
  double h = std::min(0.05, hmax_at(t0));
  const double h_floor = 1e-10 * (t_end - t0);
  while (t < t_end - 1e-12) {
    h = std::min({h, hmax_at(t), t_end - t});
    const StepResult st = dopri5_step(rhs, t, h, y, f0, atol, rtol);
    if (st.err <= 1.0) {
      store_through(t, t + h, y, st.y, f0, st.f_end);
      t += h;
      y = st.y;
      f0 = st.f_end;
      ++result.n_accepted;
      const double fac = (st.err == 0.0)
                             ? 10.0
                             : std::clamp(0.9 * std::pow(st.err, -0.2), 0.2, 10.0);
      h *= fac;
    } else {
      ++result.n_rejected;
      h *= std::max(0.2, 0.9 * std::pow(st.err, -0.2));
      if (h < h_floor)
        throw NumericalError(
            "evolve: integrator failed to reach the requested tolerance "
            "(step underflow at t = " +
            std::to_string(t) + " ps)");
    }
    if (result.n_accepted + result.n_rejected > 50'000'000)
      throw NumericalError("evolve: step budget exceeded");
  }

  result.rho = rho_of(y);
  result.integral_xh = y[16].real();
  result.integral_xv = y[17].real();

  const double tr = result.rho.trace();
  if (std::abs(tr - 1.0) > 1e-6)
    throw NumericalError("evolve: trace drifted to " + std::to_string(tr));
  return result;
}

double pnc_visibility(const DensityMatrix4& rho, Level upper, Level lower) {
  const double pu = rho.population(upper);
  if (pu <= 1e-12) return 0.0;
  return std::norm(rho.coherence(lower, upper)) / pu;
}

double prep_fidelity(const QdParams& params, const DriveSet& drives,
                     const SimOptions& options) {
  if (options.decay_enabled)
    throw ConfigError("prep_fidelity: decay must be disabled");
  const EvolveResult r =
      evolve(DensityMatrix4::pure(kG), params, drives, options);
  return r.rho.population(kXX);
}

double x_counts(const QdParams& params, const DriveSet& drives,
                const SimOptions& options, Pol collection) {
  const EvolveResult r =
      evolve(DensityMatrix4::pure(kG), params, drives, options);
  if (options.decay_enabled) {
    const double integral =
        collection == Pol::H ? r.integral_xh : r.integral_xv;
    return params.gamma_x * integral;
  }
  const bool stim_into_collection =
      drives.stim && drives.stim->pol == collection;
  const double b = stim_into_collection ? 1.0 : 0.5;
  return r.rho.population(exciton_level(collection)) +
         b * r.rho.population(kXX);
}

namespace {

TemporalField scaled_copy(const TemporalField& f, double s) {
  TemporalField out = f;
  for (auto& v : out.envelope) v *= s;
  return out;
}

SimOptions window_for(const TemporalField& f, double rel_tol) {
  double lo, hi;
  if (!f.support(lo, hi)) {
    lo = f.grid.t_start;
    hi = f.grid.t_end();
  }
  lo -= 2.0;
  hi += 2.0;
  const int n = 1024;
  return SimOptions{TimeGrid{lo, (hi - lo) / (n - 1), n}, false, rel_tol, false};
}

}  // namespace

double calibrate_pi_power(const QdParams& params,
                          const TemporalField& tpe_template, double rel_tol) {
  params.validate();
  const double e_tpl = tpe_template.energy();
  if (!(e_tpl > 0.0))
    throw ConfigError("calibrate_pi_power: template has zero energy");

  auto fidelity_at = [&](double power) {
    const DriveSet d{scaled_copy(tpe_template, std::sqrt(power)), std::nullopt};
    return prep_fidelity(params, d, window_for(d.tpe, rel_tol));
  };

  // Scan up to a two-photon pulse area of ~2.6 pi; the first maximum sits
  // near area pi, i.e. near P = p_hi/2.6.
  const double p_hi = 2.6 * kPi * 2.0 * params.delta() / e_tpl;
  const int n_scan = 26;
  std::vector<double> f(n_scan + 1, 0.0);
  for (int i = 1; i <= n_scan; ++i) f[i] = fidelity_at(i * p_hi / n_scan);

  int i_max = -1;
  for (int i = 1; i < n_scan; ++i) {
    if (f[i] >= f[i - 1] && f[i] >= f[i + 1] && f[i] > 0.25) {
      i_max = i;
      break;
    }
  }
  if (i_max < 0)
    throw NumericalError("calibrate_pi_power: no interior maximum in scan");

  double a = (i_max - 1) * p_hi / n_scan;
  double b = (i_max + 1) * p_hi / n_scan;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = fidelity_at(x1), f2 = fidelity_at(x2);
  for (int it = 0; it < 40; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = fidelity_at(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = fidelity_at(x1);
    }
  }
  return 0.5 * (a + b);
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "t_ps,p_g,p_xh,p_xv,p_xx,re_rho_g_xx,im_rho_g_xx\n";
  char buf[256];
  for (const auto& pt : traj) {
    const Complex c = pt.rho.coherence(kG, kXX);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  pt.t, pt.rho.population(kG), pt.rho.population(kXH),
                  pt.rho.population(kXV), pt.rho.population(kXX), c.real(),
                  c.imag());
    os << buf;
  }
  if (!os) throw ConfigError("write failed: " + path);
}

// ---------------------------------------------------------------------------

DriveFactory::DriveFactory(const QdParams& params, const DriveConfig& cfg)
    : params_(params), cfg_(cfg) {
  params_.validate();
  cfg_.shaping_grid.validate();
  slit_halfwidth_ = solve_slit_halfwidth(cfg_.input_fwhm_ps, cfg_.slp_fwhm_ps,
                                         cfg_.shaper_sigma, cfg_.shaping_grid);
  seed_spectrum_ = to_spectrum(
      make_gaussian(cfg_.input_fwhm_ps, 1.0, 0.0, cfg_.shaping_grid));
  unit_energy_ = shaped_unit_power(0.0, 0.0).energy();
  const TemporalField tpl = shaped_unit_power(0.0, 0.0);
  pi_power_ = calibrate_pi_power(params_, tpl, cfg_.rel_tol);
}

TemporalField DriveFactory::shaped_unit_power(double slit_center_detuning,
                                              double gdd_ps2) const {
  ShaperConfig sc{slit_center_detuning, slit_halfwidth_, cfg_.shaper_sigma};
  SpectralField s = apply_shaper(seed_spectrum_, sc);
  if (gdd_ps2 != 0.0) s = apply_chirp(s, ChirpSpec{gdd_ps2});
  TemporalField f = to_time(s, cfg_.shaping_grid);
  if (unit_energy_ > 0.0) {
    const double e = f.energy();
    if (e < 1e-12 * unit_energy_)
      throw NumericalError("DriveFactory: slit transmits no energy");
    f = scaled_copy(f, std::sqrt(unit_energy_ / e));
  }
  return f;
}

TemporalField DriveFactory::tpe_pulse(double slit_center_detuning,
                                      double gdd_ps2, double power_pi) const {
  if (power_pi < 0.0) throw ConfigError("tpe_pulse: power must be >= 0");
  TemporalField f = shaped_unit_power(slit_center_detuning, gdd_ps2);
  f = scaled_copy(f, std::sqrt(power_pi * pi_power_));
  return resample(f, cfg_.upsample_factor);
}

DriveSet DriveFactory::drives_at(double slit_center_detuning,
                                 double power_pi) const {
  DriveSet d{tpe_pulse(slit_center_detuning, cfg_.gdd_ps2, power_pi),
             std::nullopt};
  if (cfg_.stim_enabled) {
    const PulseMetrics m = pulse_metrics(d.tpe);
    const double peak = m.peak_time.value_or(d.tpe.grid.center());
    const double center = peak + cfg_.stim_delay_ps;
    const int n = 512;
    const double half = 16.0;
    TimeGrid g{center - half, 2.0 * half / n, n};
    const double carrier = cfg_.stim_detuning - params_.delta();
    StimDrive stim{make_gaussian(cfg_.stim_fwhm_ps, cfg_.stim_area_rad, carrier, g),
                   cfg_.stim_pol};
    d.stim = std::move(stim);
  }
  return d;
}

DriveSet DriveFactory::drives(double power_pi) const {
  return drives_at(cfg_.slit_center_detuning, power_pi);
}

SimOptions DriveFactory::sim_options(const DriveSet& drives, bool decay) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  auto fold = [&](const TemporalField& f) {
    double a, b;
    if (f.support(a, b)) {
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
  };
  fold(drives.tpe);
  if (drives.stim) fold(drives.stim->field);
  if (!std::isfinite(lo)) {
    lo = drives.tpe.grid.t_start;
    hi = lo + 10.0;
  }
  lo -= 2.0;
  hi += 2.0;
  if (decay) hi += 10.0 / params_.gamma_x + 5.0 / params_.gamma_xx;
  const int n = decay ? 4096 : 1024;
  return SimOptions{TimeGrid{lo, (hi - lo) / (n - 1), n}, decay, cfg_.rel_tol,
                    false};
}

std::vector<RabiPoint> rabi_trace(const DriveFactory& factory,
                                  std::span<const double> powers_pi) {
  for (double p : powers_pi)
    if (p < 0.0) throw ConfigError("rabi_trace: powers must be >= 0");
  std::vector<RabiPoint> out(powers_pi.size());
  parallel_for_index(static_cast<int>(powers_pi.size()), [&](int i) {
    const double p = powers_pi[i];
    const DriveSet d = factory.drives(p);
    const SimOptions opt = factory.sim_options(d, false);
    const EvolveResult r =
        evolve(DensityMatrix4::pure(kG), factory.params(), d, opt);
    const bool stim_into_collection =
        d.stim && d.stim->pol == factory.config().collection_pol;
    const double b = stim_into_collection ? 1.0 : 0.5;
    const double counts =
        r.rho.population(exciton_level(factory.config().collection_pol)) +
        b * r.rho.population(kXX);
    out[i] = RabiPoint{p, counts, r.rho.population(kXX),
                       pnc_visibility(r.rho, kXX, kG)};
  });
  return out;
}

}  // namespace sarp
