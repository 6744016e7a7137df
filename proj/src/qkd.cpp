#include "sarp/qkd.hpp"

#include <algorithm>
#include <cmath>

namespace sarp::qkd {

namespace {
constexpr double kLossStepDb = 0.01;

double eta_total(const ChannelParams& chan) {
  return std::pow(10.0, -chan.loss_db / 10.0) * chan.eta_bob;
}
}  // namespace

void QkdParams::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(mu >= 0.0)) throw ConfigError("QkdParams: mu must be >= 0");
  if (!(rep_rate_hz > 0.0) || !(accum_time_s > 0.0))
    throw ConfigError("QkdParams: rate and accumulation time must be positive");
  if (!(f_ec >= 1.0)) throw ConfigError("QkdParams: f_ec must be >= 1");
  if (!prob(q_sift) || !prob(e_det) || !prob(p_dc) || !prob(q_key))
    throw ConfigError("QkdParams: probabilities must lie in [0,1]");
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("QkdParams: eps must lie in (0,1)");
  if (g2 < 0.0) throw ConfigError("QkdParams: g2 must be >= 0");
}

void ChannelParams::validate() const {
  if (loss_db < 0.0) throw ConfigError("ChannelParams: loss must be >= 0 dB");
  if (eta_bob < 0.0 || eta_bob > 1.0)
    throw ConfigError("ChannelParams: eta_bob must lie in [0,1]");
}

void CoinFlipParams::validate() const {
  if (a < 0.0 || a > 1.0) throw ConfigError("CoinFlipParams: a must be in [0,1]");
  if (k_rounds < 1) throw ConfigError("CoinFlipParams: k_rounds must be >= 1");
  if (!(mu_nominal > 0.0))
    throw ConfigError("CoinFlipParams: mu_nominal must be positive");
  if (g2 < 0.0) throw ConfigError("CoinFlipParams: g2 must be >= 0");
  if (!(eta > 0.0) || eta > 1.0)
    throw ConfigError("CoinFlipParams: eta must lie in (0,1]");
}

double multiphoton_prob(double mu, double g2) {
  if (mu < 0.0 || g2 < 0.0)
    throw ConfigError("multiphoton_prob: arguments must be >= 0");
  return 0.5 * mu * mu * g2;
}

double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0)
    throw ConfigError("binary_entropy: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

RateResult secure_key_rate(const QkdParams& params, const ChannelParams& chan,
                           RateMode mode) {
  params.validate();
  chan.validate();
  const double eta = eta_total(chan);
  const double mu_eta = params.mu * eta;

  RateResult res;
  res.p_click = 1.0 - (1.0 - params.p_dc) * (1.0 - mu_eta);
  if (!(res.p_click > 0.0)) {
    res.r_asym = 0.0;
    if (mode == RateMode::FiniteSize) res.r_finite = 0.0;
    return res;
  }
  res.qber = (0.5 * params.p_dc + params.e_det * mu_eta) / res.p_click;
  const double p_m = multiphoton_prob(params.mu, params.g2);
  res.delta_tagged = std::min(1.0, p_m / res.p_click);

  const double prefac = params.q_sift * params.q_key * res.p_click;
  auto bracket = [&](double e, double extra_cost) {
    const double one_minus_delta = 1.0 - res.delta_tagged;
    if (one_minus_delta <= 0.0) return 0.0;
    const double e_tagged = e / one_minus_delta;
    if (e_tagged >= 0.5) return 0.0;
    return one_minus_delta * (1.0 - binary_entropy(e_tagged)) -
           params.f_ec * binary_entropy(std::min(e, 1.0)) - extra_cost;
  };

  res.r_asym = prefac * bracket(res.qber, 0.0);

  if (mode == RateMode::FiniteSize) {
    const double n_pulses = params.rep_rate_hz * params.accum_time_s;
    res.n_sift = n_pulses * params.q_sift * res.p_click;
    if (res.n_sift < 1.0) {
      res.r_finite = 0.0;
      res.secure_bits = 0.0;
      return res;
    }
    const double n_pe = (1.0 - params.q_key) * res.n_sift;
    const double n_key = params.q_key * res.n_sift;
    res.xi = std::sqrt(std::log(2.0 / params.eps) / (2.0 * n_pe));
    const double e_broadened = std::min(1.0, res.qber + res.xi);
    const double bit_cost =
        (std::log2(2.0 / params.eps) + 2.0 * std::log2(1.0 / params.eps)) /
        n_key;
    res.r_finite = prefac * bracket(e_broadened, bit_cost);
    res.secure_bits = std::max(0.0, *res.r_finite * n_pulses);
  } else {
    res.secure_bits = std::max(
        0.0, res.r_asym * params.rep_rate_hz * params.accum_time_s);
  }
  return res;
}

namespace {

double rate_at(const QkdParams& params, double loss_db, RateMode mode) {
  const RateResult r = secure_key_rate(params, ChannelParams{loss_db}, mode);
  return mode == RateMode::FiniteSize ? r.r_finite.value_or(0.0) : r.r_asym;
}

}  // namespace

TolerableLoss tolerable_loss(const QkdParams& params, RateMode mode) {
  if (!(rate_at(params, 0.0, mode) > 0.0)) return TolerableLoss{false, 0.0};

  // integer 0.01 dB grid so bisection reproduces a linear scan exactly
  long k_lo = 0;
  long k_hi = 100;  // 1 dB
  const long k_cap = 30000;  // 300 dB
  while (rate_at(params, k_hi * kLossStepDb, mode) > 0.0) {
    k_lo = k_hi;
    k_hi *= 2;
    if (k_hi > k_cap)
      throw NumericalError("tolerable_loss: no cutoff below 300 dB");
  }
  while (k_hi - k_lo > 1) {
    const long mid = k_lo + (k_hi - k_lo) / 2;
    if (rate_at(params, mid * kLossStepDb, mode) > 0.0)
      k_lo = mid;
    else
      k_hi = mid;
  }
  return TolerableLoss{true, k_lo * kLossStepDb};
}

CoinFlipResult coinflip_fairness(const CoinFlipParams& cf, double mu) {
  cf.validate();
  if (!(mu > 0.0)) throw ConfigError("coinflip_fairness: mu must be positive");

  auto cheat_prob = [&](double m) {
    const double p_det = std::min(1.0, m * cf.eta);
    const double p_m_det = std::min(1.0, multiphoton_prob(m, cf.g2) / p_det);
    const double k_eff = cf.k_rounds * std::min(1.0, p_det);
    const double p_multi = 1.0 - std::pow(1.0 - p_m_det, k_eff);
    return cf.a + (1.0 - cf.a) * p_multi;
  };

  CoinFlipResult res;
  res.p_cheat_bob = cheat_prob(mu);
  res.p_cheat_alice = cheat_prob(cf.mu_nominal);
  res.diff = res.p_cheat_bob - res.p_cheat_alice;
  return res;
}

std::vector<std::pair<double, double>> pnc_vs_area(
    std::span<const double> theta_rad, PncExcitation mode,
    const std::function<double(double)>& dynamics_hook) {
  std::vector<std::pair<double, double>> out;
  out.reserve(theta_rad.size());
  for (double th : theta_rad) {
    if (th < 0.0) throw ConfigError("pnc_vs_area: theta must be >= 0");
    double v;
    if (mode == PncExcitation::Resonant) {
      const double c = std::cos(0.5 * th);
      v = c * c;
    } else {
      if (!dynamics_hook)
        throw ConfigError("pnc_vs_area: chirped mode needs a dynamics hook");
      v = dynamics_hook(th);
    }
    out.emplace_back(th, v);
  }
  return out;
}

}  // namespace sarp::qkd
