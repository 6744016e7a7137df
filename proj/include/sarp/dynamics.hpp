#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sarp/constants.hpp"
#include "sarp/density_matrix.hpp"
#include "sarp/pulse.hpp"

namespace sarp {

struct QdParams {
  double binding_energy_mev = 4.0;   // E_B
  double gamma_xx = 1.0 / 120.0;     // XX radiative rate, 1/ps
  double gamma_x = 1.0 / 250.0;      // X radiative rate, 1/ps
  double x_wavelength_nm = 795.0;    // axis labeling only
  double tpe_wavelength_nm = 796.0;  // wavelength of E_XX/2

  // In-frame exciton detuning E_B / (2 hbar), rad/ps. The rotating frame sits
  // at half the biexciton energy, so the diagonal is (0, delta, delta, 0).
  double delta() const { return binding_energy_mev / (2.0 * kHbarMeVps); }

  // Laser wavelength -> detuning from the two-photon resonance, rad/ps.
  double detuning_from_wavelength(double lambda_nm) const {
    const double ev = kHcEvNm / lambda_nm - kHcEvNm / tpe_wavelength_nm;
    return ev * 1000.0 / kHbarMeVps;
  }

  void validate() const;
};

struct StimDrive {
  TemporalField field;  // carrier_offset already in frame units
  Pol pol = Pol::H;
};

struct DriveSet {
  TemporalField tpe;
  std::optional<StimDrive> stim;
};

struct SimOptions {
  TimeGrid grid;
  bool decay_enabled = false;
  double rel_tol = 1e-8;
  bool store_trajectory = false;
};

struct TrajectoryPoint {
  double t = 0.0;
  DensityMatrix4 rho;
};

struct EvolveResult {
  DensityMatrix4 rho;
  double integral_xh = 0.0;  // int rho_XH(t) dt over the window, ps
  double integral_xv = 0.0;
  std::vector<TrajectoryPoint> trajectory;
  long n_accepted = 0;
  long n_rejected = 0;
};

// Rotating-frame Hamiltonian at time t, rad/ps, exactly Hermitian.
// Throws if t lies outside the TPE drive grid.
Eigen::Matrix4cd build_hamiltonian(double t, const QdParams& params,
                                   const DriveSet& drives);

// Integrates d rho/dt = -i[H,rho] (+ radiative decay when enabled) over the
// options.grid window with an adaptive embedded Runge-Kutta (Dormand-Prince
// 5(4)) scheme. Decay channels: XX->X_H and XX->X_V at gamma_xx/2 each,
// X_H->g and X_V->g at gamma_x.
EvolveResult evolve(const DensityMatrix4& rho0, const QdParams& params,
                    const DriveSet& drives, const SimOptions& options);

// Pulse power of the first rho_XX maximum for the given unchirped resonant
// template, in units of the template energy ("power 1" == template as-is).
// Coarse scan plus golden-section refinement.
double calibrate_pi_power(const QdParams& params, const TemporalField& tpe_template,
                          double rel_tol = 1e-8);

// rho_XX after all drive supports, decay disabled (throws otherwise).
double prep_fidelity(const QdParams& params, const DriveSet& drives,
                     const SimOptions& options);

// Expected collected X photons per pulse. Decay-off mode: rho_Xpol + b*rho_XX
// after the drives with b = 1 when the stim targets the collection
// polarization, b = 1/2 otherwise. Decay-on mode: gamma_x * int rho_Xpol dt.
double x_counts(const QdParams& params, const DriveSet& drives,
                const SimOptions& options, Pol collection);

// Photon-number-coherence visibility |rho_{lower,upper}|^2 / rho_{upper,upper};
// zero for depleted upper level.
double pnc_visibility(const DensityMatrix4& rho, Level upper, Level lower);

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const std::string& path);

// ---------------------------------------------------------------------------
// Standard drive pipeline: 2 ps Gaussian -> spectral slit (solved for the
// target SLP duration) -> chirp -> power scaling, plus the optional
// XX->X stimulation pulse trailing the TPE peak.

struct DriveConfig {
  TimeGrid shaping_grid = TimeGrid::centered(150.0, 4096);
  double input_fwhm_ps = 2.0;
  double slp_fwhm_ps = 6.0;
  double shaper_sigma = 0.25;       // rad/ps
  double gdd_ps2 = 0.0;             // TPE chirp
  double slit_center_detuning = 0;  // rad/ps
  bool stim_enabled = false;
  double stim_delay_ps = 7.0;       // after the TPE peak
  double stim_fwhm_ps = 2.0;
  double stim_area_rad = 3.14159265358979323846;
  double stim_detuning = 0.0;  // from the XX->X transition
  Pol stim_pol = Pol::H;
  Pol collection_pol = Pol::H;
  int upsample_factor = 4;
  double rel_tol = 1e-8;
};

class DriveFactory {
 public:
  DriveFactory(const QdParams& params, const DriveConfig& cfg);

  const QdParams& params() const { return params_; }
  const DriveConfig& config() const { return cfg_; }
  double slit_halfwidth() const { return slit_halfwidth_; }
  double pi_power() const { return pi_power_; }
  double pi_pulse_energy() const { return pi_power_ * unit_energy_; }

  // TPE pulse at the given slit position and chirp, power in pi units.
  TemporalField tpe_pulse(double slit_center_detuning, double gdd_ps2,
                          double power_pi) const;
  DriveSet drives(double power_pi) const;
  DriveSet drives_at(double slit_center_detuning, double power_pi) const;

  // Integration window wrapping the drive supports (plus the radiative tail
  // when decay is on).
  SimOptions sim_options(const DriveSet& drives, bool decay) const;

 private:
  TemporalField shaped_unit_power(double slit_center_detuning,
                                  double gdd_ps2) const;

  QdParams params_;
  DriveConfig cfg_;
  double slit_halfwidth_ = 0.0;
  SpectralField seed_spectrum_;
  double unit_energy_ = 0.0;  // energy of the resonant unchirped SLP
  double pi_power_ = 0.0;
};

struct RabiPoint {
  double power_pi = 0.0;
  double x_counts = 0.0;
  double f_p = 0.0;
  double pnc_v = 0.0;
};

// One decay-off dynamics run per power (parallel over powers, deterministic).
std::vector<RabiPoint> rabi_trace(const DriveFactory& factory,
                                  std::span<const double> powers_pi);

}  // namespace sarp
