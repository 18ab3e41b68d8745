#pragma once

// Link-budget radiometry: in-band solar background photon number and the
// round-trip attenuation applied to the probe.
//
// The solar background entering the matched filter is
//   nbar_B = N_lambda * A_det * dlambda * T_p * lambda / (h c)
// with N_lambda the received in-band solar spectral flux density (a MODTRAN-
// style value for a sunlit scene within the receiver field of view), A_det
// the receiver area, dlambda the filter bandwidth matched to the transform-
// limited pulse, and T_p the integration (pulse) window.  The background is
// unpolarized and stationary, so it splits uniformly across the N temporal
// modes the sorter resolves.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qpms/constants.hpp"

namespace qpms {

struct SolarBackgroundParams {
  double spectral_flux_w_m2_nm = 7.49e-10;  // received in-band flux, W m^-2 nm^-1
  double receiver_radius_m = 0.5;
  double bandwidth_nm = 0.00708;            // matched filter width
  double integration_time_s = 200e-12;      // pulse-matched gate
  double wavelength_m = 1064e-9;
  double field_of_view_sr = 1.33e-8;        // metadata: FOV behind the flux value
  double surface_albedo = 0.3;              // metadata: scene albedo behind it

  void validate() const {
    if (spectral_flux_w_m2_nm < 0.0) throw std::invalid_argument("solar flux must be >= 0");
    if (!(receiver_radius_m > 0.0)) throw std::invalid_argument("receiver radius must be > 0");
    if (!(bandwidth_nm > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
    if (!(integration_time_s > 0.0)) throw std::invalid_argument("integration time must be > 0");
    if (!(wavelength_m > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  }
};

// Mean background photon number collected in one gate.
inline double solar_mean_photon_number(const SolarBackgroundParams& p) {
  p.validate();
  const double area = pi * p.receiver_radius_m * p.receiver_radius_m;
  const double energy = p.spectral_flux_w_m2_nm * area * p.bandwidth_nm * p.integration_time_s;
  const double photon = planck * speed_of_light / p.wavelength_m;
  return energy / photon;
}

// Uniform split of the stationary background across the mode basis.
inline std::vector<double> per_mode_background(double nbar_total, int n_modes) {
  if (nbar_total < 0.0) throw std::invalid_argument("nbar must be >= 0");
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  return std::vector<double>(n_modes, nbar_total / n_modes);
}

// Round-trip amplitude attenuation of the probe: eta = C_SMM * T_atm^2.
inline double link_attenuation(double c_smm, double t_atm) {
  if (c_smm < 0.0) throw std::invalid_argument("C_SMM must be >= 0");
  if (t_atm < 0.0 || t_atm > 1.0) throw std::invalid_argument("T_atm outside [0,1]");
  return c_smm * t_atm * t_atm;
}

struct ConventionalLidarParams {
  double alpha_c = 7.66e7;        // transmit coherent amplitude (|alpha_c|^2 photons/pulse)
  double delta_alpha_c = 0.0;     // received multiple-scattering amplitude added per mode
};

}  // namespace qpms
