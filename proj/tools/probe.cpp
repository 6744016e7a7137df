// Scratch probe for the dynamics core; not installed.
#include <chrono>
#include <cstdio>

#include "sarp/dynamics.hpp"
#include "sarp/parallel.hpp"

using namespace sarp;

int main() {
  auto t0 = std::chrono::steady_clock::now();
  QdParams qd;
  DriveConfig cfg;
  DriveFactory fac(qd, cfg);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("slit halfwidth = %.6f rad/ps\n", fac.slit_halfwidth());
  std::printf("pi power (template units) = %.6f\n", fac.pi_power());
  std::printf("pi pulse energy = %.6f rad^2/ps (2*pi*delta=%.6f)\n",
              fac.pi_pulse_energy(), 2 * 3.14159265358979 * qd.delta());
  std::printf("factory setup: %.2f s\n",
              std::chrono::duration<double>(t1 - t0).count());

  // SLP duration check
  auto slp = fac.tpe_pulse(0.0, 0.0, 1.0);
  auto m = pulse_metrics(slp);
  std::printf("SLP fwhm = %.3f ps, area = %.4f rad\n", m.fwhm.value_or(-1),
              m.area);
  auto slp_c = fac.tpe_pulse(0.0, 45.0, 1.0);
  auto mc = pulse_metrics(slp_c);
  std::printf("chirped SLP fwhm = %.3f ps, peak at %.3f ps\n",
              mc.fwhm.value_or(-1), mc.peak_time.value_or(0));

  // Unchirped Rabi: fidelities at 0.5..6 pi
  std::vector<double> pows;
  for (double p = 0.25; p <= 6.0 + 1e-9; p += 0.25) pows.push_back(p);
  auto tr = rabi_trace(fac, pows);
  std::printf("\nunchirped: power  F_p  counts  V\n");
  for (const auto& r : tr)
    std::printf("  %.2f  %.4f  %.4f  %.4f\n", r.power_pi, r.f_p, r.x_counts,
                r.pnc_v);

  auto t2 = std::chrono::steady_clock::now();
  std::printf("unchirped trace (%zu pts): %.2f s\n", pows.size(),
              std::chrono::duration<double>(t2 - t1).count());

  // Chirped plateau
  DriveConfig cfg_c = cfg;
  cfg_c.gdd_ps2 = 45.0;
  DriveFactory fac_c(qd, cfg_c);
  std::vector<double> pp = {1.0, 1.5, 2.0, 2.25, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
  auto trc = rabi_trace(fac_c, pp);
  std::printf("\nchirped 45 ps^2: power  F_p  counts  V\n");
  for (const auto& r : trc)
    std::printf("  %.2f  %.5f  %.5f  %.5f\n", r.power_pi, r.f_p, r.x_counts,
                r.pnc_v);
  double cmin = 1e9, cmax = 0;
  for (const auto& r : trc)
    if (r.power_pi >= 2.0) {
      cmin = std::min(cmin, r.x_counts);
      cmax = std::max(cmax, r.x_counts);
    }
  std::printf("plateau [2,6]pi: max/min = %.4f\n", cmax / cmin);
  auto t3 = std::chrono::steady_clock::now();
  std::printf("chirped trace: %.2f s\n",
              std::chrono::duration<double>(t3 - t2).count());
  return 0;
}
