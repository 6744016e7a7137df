#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sarp/errors.hpp"

namespace sarp::qkd {

struct QkdParams {
  double mu = 0.1;            // mean photon number per pulse
  double rep_rate_hz = 8e7;
  double accum_time_s = 100.0;
  double f_ec = 1.2;          // error-correction inefficiency
  double q_sift = 0.5;
  double e_det = 0.02;
  double p_dc = 1e-7;         // dark-count probability per pulse
  double eps = 1e-9;          // eps_EC = eps_PA = eps_PE
  double g2 = 0.005;
  double q_key = 0.9;         // fraction of sifted bits used for key

  void validate() const;
};

struct ChannelParams {
  double loss_db = 0.0;
  double eta_bob = 1.0;

  void validate() const;
};

enum class RateMode { Asymptotic, FiniteSize };

struct RateResult {
  double p_click = 0.0;
  double qber = 0.0;
  double delta_tagged = 0.0;  // tagged (multi-photon) fraction of clicks
  double r_asym = 0.0;        // secure fraction per pulse; may be negative
  std::optional<double> r_finite;
  double secure_bits = 0.0;   // over accum_time, clamped at zero
  double n_sift = 0.0;
  double xi = 0.0;            // parameter-estimation broadening of the QBER
};

struct TolerableLoss {
  bool has_key = false;
  double loss_db = 0.0;  // largest loss with a positive secure fraction
};

struct CoinFlipParams {
  double a = 0.9;          // state preparation parameter
  int k_rounds = 500;      // pulses exchanged per coin flip
  double mu_nominal = 0.1;
  double g2 = 0.005;
  double eta = 1.0;        // detection efficiency

  void validate() const;
};

struct CoinFlipResult {
  double p_cheat_bob = 0.0;
  double p_cheat_alice = 0.0;
  double diff = 0.0;
};

// Multi-photon bound P_m = mu^2 g2 / 2, used as the working value.
double multiphoton_prob(double mu, double g2);

// Binary Shannon entropy, h(0) = h(1) = 0; throws outside [0,1].
double binary_entropy(double x);

// GLLP-style secure fraction with the tagging correction; finite-size mode
// adds parameter-estimation broadening and the EC/PA bit costs.
RateResult secure_key_rate(const QkdParams& params, const ChannelParams& chan,
                           RateMode mode);

// Largest loss with r > 0, bisected on a 0.01 dB grid (exactly the value a
// linear 0.01 dB scan finds).
TolerableLoss tolerable_loss(const QkdParams& params, RateMode mode);

// Stand-in strong-coin-flipping fairness model: single-photon rounds give
// cheating baseline a, any multi-photon leak cheats with certainty; Alice's
// probability is the same expression frozen at mu_nominal.
CoinFlipResult coinflip_fairness(const CoinFlipParams& cf, double mu);

enum class PncExcitation { Resonant, Chirped };

// Photon-number-coherence visibility vs pulse area. Resonant mode is the
// closed form cos^2(theta/2); chirped mode defers to the dynamics hook
// (theta -> V), e.g. the chirped-drive visibility at power (theta/pi)^2.
std::vector<std::pair<double, double>> pnc_vs_area(
    std::span<const double> theta_rad, PncExcitation mode,
    const std::function<double(double)>& dynamics_hook = {});

}  // namespace sarp::qkd
