#include "sarp/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sarp/fft.hpp"

namespace sarp {

namespace {
constexpr double kPi = std::numbers::pi;

double intensity_fwhm(const TemporalField& f) {
  const auto m = pulse_metrics(f);
  if (!m.fwhm) throw NumericalError("intensity_fwhm: zero field");
  return *m.fwhm;
}
}  // namespace

double TemporalField::energy() const {
  double e = 0.0;
  for (const auto& v : envelope) e += std::norm(v);
  return e * grid.dt;
}

Complex TemporalField::envelope_at(double t) const {
  const int n = grid.n_samples;
  const double x = (t - grid.t_start) / grid.dt;
  if (x < 0.0 || x > n - 1) return {0.0, 0.0};
  int i = static_cast<int>(std::floor(x));
  if (i > n - 2) i = n - 2;
  const double u = x - i;
  const Complex p0 = envelope[std::max(i - 1, 0)];
  const Complex p1 = envelope[i];
  const Complex p2 = envelope[i + 1];
  const Complex p3 = envelope[std::min(i + 2, n - 1)];
  // Catmull-Rom
  const Complex a = 2.0 * p1;
  const Complex b = p2 - p0;
  const Complex c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
  const Complex d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
  return 0.5 * (a + b * u + c * (u * u) + d * (u * u * u));
}

bool TemporalField::support(double& t_lo, double& t_hi,
                            double rel_threshold) const {
  double peak = 0.0;
  for (const auto& v : envelope) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) return false;
  const double thr = rel_threshold * peak;
  int lo = 0, hi = grid.n_samples - 1;
  while (lo < hi && std::abs(envelope[lo]) < thr) ++lo;
  while (hi > lo && std::abs(envelope[hi]) < thr) --hi;
  t_lo = grid.t(lo);
  t_hi = grid.t(hi);
  return true;
}

void TemporalField::validate() const {
  grid.validate();
  if (static_cast<int>(envelope.size()) != grid.n_samples)
    throw ConfigError("TemporalField: envelope size does not match grid");
  for (const auto& v : envelope)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ConfigError("TemporalField: non-finite envelope sample");
}

double SpectralField::energy() const {
  if (omega.size() < 2) return 0.0;
  const double dw = omega[1] - omega[0];
  double e = 0.0;
  for (const auto& v : amp) e += std::norm(v);
  return e * dw / (2.0 * kPi);
}

void ShaperConfig::validate() const {
  if (!(slit_halfwidth > 0.0))
    throw ConfigError("ShaperConfig: slit_halfwidth must be positive");
  if (gaussian_smoothing_sigma < 0.0)
    throw ConfigError("ShaperConfig: smoothing sigma must be non-negative");
}

double ShaperConfig::transmission(double w) const {
  const double x = w - center_detuning;
  if (gaussian_smoothing_sigma == 0.0) {
    if (std::abs(x) < slit_halfwidth) return 1.0;
    return std::abs(x) == slit_halfwidth ? 0.5 : 0.0;
  }
  const double s = std::numbers::sqrt2 * gaussian_smoothing_sigma;
  return 0.5 * (std::erf((x + slit_halfwidth) / s) -
                std::erf((x - slit_halfwidth) / s));
}

TemporalField make_gaussian(double fwhm_ps, double area_rad,
                            double carrier_offset, const TimeGrid& grid) {
  grid.validate();
  if (!(fwhm_ps > 0.0)) throw ConfigError("make_gaussian: fwhm must be positive");
  if (area_rad < 0.0) throw ConfigError("make_gaussian: area must be >= 0");

  TemporalField f;
  f.grid = grid;
  f.envelope.assign(grid.n_samples, Complex(0.0, 0.0));
  f.carrier_offset = carrier_offset;
  if (area_rad == 0.0) return f;

  const double tc = grid.center();
  if (tc - 5.0 * fwhm_ps < grid.t_start || tc + 5.0 * fwhm_ps > grid.t_end())
    throw ConfigError("make_gaussian: grid too small for pulse support");

  // intensity-FWHM convention: |Omega|^2 has FWHM fwhm_ps
  const double o0 = area_rad / (fwhm_ps * std::sqrt(kPi / (2.0 * std::numbers::ln2)));
  const double k = 2.0 * std::numbers::ln2 / (fwhm_ps * fwhm_ps);
  double sum = 0.0;
  for (int i = 0; i < grid.n_samples; ++i) {
    const double t = grid.t(i) - tc;
    const double v = o0 * std::exp(-k * t * t);
    f.envelope[i] = Complex(v, 0.0);
    sum += v;
  }
  const double discrete_area = sum * grid.dt;
  if (std::abs(discrete_area - area_rad) > 1e-6 * area_rad)
    throw ConfigError("make_gaussian: grid cannot represent the pulse area");
  return f;
}

SpectralField to_spectrum(const TemporalField& field) {
  field.validate();
  const int n = field.grid.n_samples;
  const double dt = field.grid.dt;
  const double dw = 2.0 * kPi / (n * dt);

  std::vector<Complex> a(field.envelope);
  fft_pow2(a, +1);

  SpectralField s;
  s.omega.resize(n);
  s.amp.resize(n);
  s.carrier_offset = field.carrier_offset;
  for (int idx = 0; idx < n; ++idx) {
    const int j = idx - n / 2;  // signed frequency index
    const double w = j * dw;
    s.omega[idx] = w;
    s.amp[idx] = dt * std::polar(1.0, w * field.grid.t_start) * a[(j + n) % n];
  }
  return s;
}

TemporalField to_time(const SpectralField& spec, const TimeGrid& grid) {
  grid.validate();
  const int n = grid.n_samples;
  const double dt = grid.dt;
  const double dw = 2.0 * kPi / (n * dt);
  if (static_cast<int>(spec.omega.size()) != n ||
      static_cast<int>(spec.amp.size()) != n)
    throw ConfigError("to_time: spectrum size does not match grid");
  if (spec.omega.size() >= 2 &&
      std::abs((spec.omega[1] - spec.omega[0]) - dw) > 1e-9 * dw)
    throw ConfigError("to_time: spectral resolution does not match grid");

  std::vector<Complex> a(n);
  for (int idx = 0; idx < n; ++idx) {
    const int j = idx - n / 2;
    a[(j + n) % n] = spec.amp[idx] * std::polar(1.0, -spec.omega[idx] * grid.t_start);
  }
  fft_pow2(a, -1);

  TemporalField f;
  f.grid = grid;
  f.envelope.resize(n);
  f.carrier_offset = spec.carrier_offset;
  const double scale = 1.0 / (n * dt);
  for (int k = 0; k < n; ++k) f.envelope[k] = a[k] * scale;
  return f;
}

SpectralField apply_shaper(const SpectralField& spec, const ShaperConfig& cfg) {
  cfg.validate();
  SpectralField out = spec;
  for (std::size_t i = 0; i < out.amp.size(); ++i)
    out.amp[i] *= cfg.transmission(out.omega[i]);
  return out;
}

SpectralField apply_chirp(const SpectralField& spec, const ChirpSpec& chirp) {
  if (!std::isfinite(chirp.gdd_ps2))
    throw ConfigError("apply_chirp: gdd must be finite");
  SpectralField out = spec;
  for (std::size_t i = 0; i < out.amp.size(); ++i) {
    const double w = out.omega[i];
    out.amp[i] *= std::polar(1.0, 0.5 * chirp.gdd_ps2 * w * w);
  }
  return out;
}

PulseMetrics pulse_metrics(const TemporalField& field) {
  field.validate();
  PulseMetrics m;
  const int n = field.grid.n_samples;

  int k_peak = 0;
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::abs(field.envelope[i]);
    m.area += v;
    if (v > peak) {
      peak = v;
      k_peak = i;
    }
  }
  m.area *= field.grid.dt;
  if (peak <= 0.0) return m;  // zero field: area 0, fwhm/peak absent

  m.peak_time = field.grid.t(k_peak);

  // FWHM of the main lobe of |Omega|^2, linear interpolation at half max.
  const double half = 0.5 * peak * peak;
  auto intensity = [&](int i) { return std::norm(field.envelope[i]); };
  double t_lo = field.grid.t(0), t_hi = field.grid.t(n - 1);
  bool found_lo = false, found_hi = false;
  for (int i = k_peak; i > 0; --i) {
    if (intensity(i - 1) < half) {
      const double f1 = intensity(i - 1), f2 = intensity(i);
      const double u = (half - f1) / (f2 - f1);
      t_lo = field.grid.t(i - 1) + u * field.grid.dt;
      found_lo = true;
      break;
    }
  }
  for (int i = k_peak; i < n - 1; ++i) {
    if (intensity(i + 1) < half) {
      const double f1 = intensity(i), f2 = intensity(i + 1);
      const double u = (f1 - half) / (f1 - f2);
      t_hi = field.grid.t(i) + u * field.grid.dt;
      found_hi = true;
      break;
    }
  }
  if (found_lo && found_hi) m.fwhm = t_hi - t_lo;
  return m;
}

TemporalField resample(const TemporalField& field, int factor) {
  if (factor < 1 || (factor & (factor - 1)) != 0)
    throw ConfigError("resample: factor must be a positive power of two");
  if (factor == 1) return field;
  const SpectralField s = to_spectrum(field);
  const int n = field.grid.n_samples;
  const int n2 = n * factor;

  TimeGrid fine{field.grid.t_start, field.grid.dt / factor, n2};
  SpectralField wide;
  wide.omega.resize(n2);
  wide.amp.assign(n2, Complex(0.0, 0.0));
  wide.carrier_offset = s.carrier_offset;
  const double dw = 2.0 * kPi / (n2 * fine.dt);  // same dw as the input
  for (int idx = 0; idx < n2; ++idx) wide.omega[idx] = (idx - n2 / 2) * dw;
  const int off = n2 / 2 - n / 2;
  for (int idx = 0; idx < n; ++idx) wide.amp[idx + off] = s.amp[idx];
  return to_time(wide, fine);
}

double solve_slit_halfwidth(double input_fwhm_ps, double target_fwhm_ps,
                            double smoothing_sigma, const TimeGrid& grid) {
  if (!(target_fwhm_ps > input_fwhm_ps))
    throw ConfigError("solve_slit_halfwidth: target must exceed input duration");
  const TemporalField seed = make_gaussian(input_fwhm_ps, 1.0, 0.0, grid);
  const SpectralField spec = to_spectrum(seed);

  auto shaped_fwhm = [&](double hw) {
    ShaperConfig cfg{0.0, hw, smoothing_sigma};
    return intensity_fwhm(to_time(apply_shaper(spec, cfg), grid));
  };

  double lo = 0.02, hi = 8.0;  // rad/ps; duration decreases with slit width
  if (shaped_fwhm(lo) < target_fwhm_ps || shaped_fwhm(hi) > target_fwhm_ps)
    throw NumericalError("solve_slit_halfwidth: target outside bracket");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shaped_fwhm(mid) > target_fwhm_ps)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

void write_rows_csv(const std::string& path, const char* header,
                    double carrier_offset, const std::vector<double>& x,
                    const std::vector<Complex>& y) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  char buf[128];
  if (carrier_offset != 0.0) {
    std::snprintf(buf, sizeof buf, "# carrier_offset_radps = %.17g\n",
                  carrier_offset);
    os << buf;
  }
  os << header << "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[i], y[i].real(),
                  y[i].imag());
    os << buf;
  }
  if (!os) throw ConfigError("write failed: " + path);
}

struct CsvData {
  double carrier_offset = 0.0;
  std::vector<double> x;
  std::vector<Complex> y;
};

CsvData read_rows_csv(const std::string& path, const std::string& header) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open: " + path);
  CsvData d;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("carrier_offset_radps");
      if (pos != std::string::npos) {
        const auto eq = line.find('=', pos);
        if (eq != std::string::npos)
          d.carrier_offset = std::stod(line.substr(eq + 1));
      }
      continue;
    }
    if (!header_seen) {
      if (line != header)
        throw ConfigError(path + ": expected header '" + header + "', got '" +
                          line + "'");
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    double a, b, c;
    char c1, c2;
    if (!(ss >> a >> c1 >> b >> c2 >> c) || c1 != ',' || c2 != ',')
      throw ConfigError(path + ":" + std::to_string(lineno) + ": bad row");
    d.x.push_back(a);
    d.y.emplace_back(b, c);
  }
  if (!header_seen) throw ConfigError(path + ": missing mandatory header row");
  if (d.x.size() < 2) throw ConfigError(path + ": need at least 2 rows");
  return d;
}

}  // namespace

void write_temporal_csv(const TemporalField& field, const std::string& path) {
  field.validate();
  std::vector<double> t(field.grid.n_samples);
  for (int i = 0; i < field.grid.n_samples; ++i) t[i] = field.grid.t(i);
  write_rows_csv(path, "t_ps,re_omega,im_omega", field.carrier_offset, t,
                 field.envelope);
}

TemporalField read_temporal_csv(const std::string& path) {
  const CsvData d = read_rows_csv(path, "t_ps,re_omega,im_omega");
  TemporalField f;
  const double dt = d.x[1] - d.x[0];
  f.grid = TimeGrid{d.x[0], dt, static_cast<int>(d.x.size())};
  for (std::size_t i = 1; i < d.x.size(); ++i)
    if (std::abs(d.x[i] - d.x[i - 1] - dt) > 1e-9 * dt)
      throw ConfigError(path + ": non-uniform time axis");
  f.envelope = d.y;
  f.carrier_offset = d.carrier_offset;
  f.validate();
  return f;
}

void write_spectral_csv(const SpectralField& spec, const std::string& path) {
  write_rows_csv(path, "w_radps,re_amp,im_amp", spec.carrier_offset, spec.omega,
                 spec.amp);
}

SpectralField read_spectral_csv(const std::string& path) {
  const CsvData d = read_rows_csv(path, "w_radps,re_amp,im_amp");
  SpectralField s;
  s.omega = d.x;
  s.amp = d.y;
  s.carrier_offset = d.carrier_offset;
  return s;
}

}  // namespace sarp
