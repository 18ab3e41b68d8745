#pragma once

// Layered atmospheric dispersion over a vertical double-pass path.
//
// The beam crosses 1 km layers (layer q spans [q-1, q] km, default q=5..100),
// each with refractive index n_q(omega) = 1 + refractivity(lambda) * rho_q
// where rho_q is the US Standard Atmosphere 1976 density ratio at the layer
// midpoint and refractivity(lambda) = A + B/lambda_um^2 is a two-term Cauchy
// model for standard air.  The accumulated double-pass phase is
//   phi(omega) = 2 Sum_q k_q(omega) L_q,   k_q = n_q(omega) omega / c.
//
// Because the Cauchy model makes phi(omega) a cubic polynomial,
//   phi(omega) = (2/c) [ L_tot w + P (A w + B' w^3) ],  P = Sum rho_q L_q,
// the Taylor residuals about omega0 have exact closed forms.  They are used
// directly: phi itself is ~1e12 rad, and forming residuals by subtracting
// huge phases would lose them to rounding (1e12 * eps ~ 1e-4 rad versus
// residuals of 1e-5..1e-9 rad).
//
// Mode-overlap matrices are evaluated in the frame with the constant and
// group-delay terms removed (detector gating absorbs the bulk delay; the raw
// delay of ~0.64 ms would displace any 200 ps pulse to zero overlap).  The
// compensated matrix additionally removes the quadratic (GDD) term:
// compensation applies  Delta_w * Sum (dk/dw) 2 L_q + Delta_w^2 * Sum
// (d2k/dw2) L_q, whose quadratic coefficient equals phi''/2 exactly (the
// Taylor 1/2 cancels the pass-doubling), i.e. exact second-order
// compensation.  A switch doubles the GDD term (2 L_q), which instead
// over-compensates by the same magnitude.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qpms/errors.hpp"
#include "qpms/hg_modes.hpp"
#include "qpms/parallel.hpp"

namespace qpms {

// ---------------------------------------------------------------------------
// US Standard Atmosphere 1976: density relative to sea level.
// Piecewise-linear temperature layers to 84.852 km, isothermal above.
inline double air_density_ratio(double altitude_m) {
  constexpr double base_km[] = {0.0, 11.0, 20.0, 32.0, 47.0, 51.0, 71.0, 84.852};
  constexpr double lapse[] = {-6.5, 0.0, 1.0, 2.8, 0.0, -2.8, -2.0};  // K/km
  constexpr double t0 = 288.15, p0 = 101325.0, rgas = 287.053, g0 = 9.80665;
  if (altitude_m < 0.0) throw std::invalid_argument("altitude must be >= 0");
  const double h = altitude_m / 1000.0;
  double t = t0, p = p0;
  for (int i = 0; i < 7; ++i) {
    if (h <= base_km[i]) break;
    const double seg = std::min(h, base_km[i + 1]) - base_km[i];  // km
    if (lapse[i] == 0.0) {
      p *= std::exp(-g0 * seg * 1000.0 / (rgas * t));
    } else {
      const double tn = t + lapse[i] * seg;
      p *= std::pow(tn / t, -g0 / (lapse[i] * 1e-3 * rgas));
      t = tn;
    }
  }
  if (h > base_km[7]) p *= std::exp(-g0 * (h - base_km[7]) * 1000.0 / (rgas * t));
  return (p / (rgas * t)) / (p0 / (rgas * t0));
}

// ---------------------------------------------------------------------------
// Two-term Cauchy refractivity of standard air, n - 1 = A + B/lambda_um^2,
// fitted to Edlen-type standard-air values at 532 nm and 1064 nm.
struct CauchyIndex {
  double a = 2.72577e-4;
  double b_um2 = 1.59625536e-6;  // um^2

  // refractivity at sea-level density
  double refractivity(double wavelength_m) const {
    const double lam_um = wavelength_m * 1e6;
    return a + b_um2 / (lam_um * lam_um);
  }
  // B expressed against angular frequency: refractivity = a + b_w2 * w^2
  double b_omega2() const {
    const double s = 2.0 * pi * speed_of_light * 1e6;  // w * lam_um = s
    return b_um2 / (s * s);
  }
};

struct AtmosphereLayer {
  double base_m = 0.0;
  double thickness_m = 0.0;
  double density_ratio = 0.0;  // rho/rho_sea at the layer midpoint
};

struct ProfileConfig {
  int lowest_layer = 5;     // first layer index q (layer spans [q-1, q] km)
  int highest_layer = 100;  // last layer index
};

struct AtmosphereProfile {
  CauchyIndex index;
  std::vector<AtmosphereLayer> layers;
  double build_wavelength_m = 0.0;  // wavelength the profile was requested for

  double total_path() const {
    double s = 0.0;
    for (const auto& l : layers) s += l.thickness_m;
    return s;
  }
  // density-weighted path P = Sum rho_q L_q (m of sea-level-equivalent air)
  double weighted_path() const {
    double s = 0.0;
    for (const auto& l : layers) s += l.density_ratio * l.thickness_m;
    return s;
  }
  double refractive_index(double wavelength_m, const AtmosphereLayer& layer) const {
    return 1.0 + index.refractivity(wavelength_m) * layer.density_ratio;
  }

  uint64_t hash() const {  // FNV-1a over the numeric content
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](double v) {
      uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
      }
    };
    mix(index.a);
    mix(index.b_um2);
    for (const auto& l : layers) {
      mix(l.base_m);
      mix(l.thickness_m);
      mix(l.density_ratio);
    }
    return h;
  }
};

// Stacks 1 km layers with midpoint-sampled density.  Valid for
// wavelengths inside the fitted band [0.4, 2.0] um.
inline AtmosphereProfile build_profile(double wavelength_m, const ProfileConfig& cfg = {}) {
  if (!(wavelength_m >= 0.4e-6 && wavelength_m <= 2.0e-6))
    throw std::invalid_argument("profile wavelength outside [0.4, 2.0] um");
  if (cfg.lowest_layer < 1 || cfg.highest_layer < cfg.lowest_layer)
    throw std::invalid_argument("bad layer index range");
  AtmosphereProfile p;
  p.build_wavelength_m = wavelength_m;
  p.layers.reserve(cfg.highest_layer - cfg.lowest_layer + 1);
  for (int q = cfg.lowest_layer; q <= cfg.highest_layer; ++q) {
    AtmosphereLayer l;
    l.base_m = (q - 1) * 1000.0;
    l.thickness_m = 1000.0;
    l.density_ratio = air_density_ratio(l.base_m + 500.0);
    p.layers.push_back(l);
  }
  return p;
}

// Same geometry with zero density: pure vacuum path (for reference tests).
inline AtmosphereProfile vacuum_profile(const ProfileConfig& cfg = {}) {
  AtmosphereProfile p = build_profile(1064e-9, cfg);
  for (auto& l : p.layers) l.density_ratio = 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Double-pass phase phi(omega) and its exact Taylor pieces about omega0.
struct DoublePassPhase {
  double l_total = 0.0;   // m
  double p_weighted = 0.0;  // m
  double a = 0.0;         // Cauchy A
  double b_w2 = 0.0;      // Cauchy B against omega^2, s^2
  double omega0 = 0.0;    // rad/s

  double phase(double omega) const {  // full phi, ~1e12 rad
    return (2.0 / speed_of_light) *
           (l_total * omega + p_weighted * (a * omega + b_w2 * omega * omega * omega));
  }
  double phase0() const { return phase(omega0); }
  double group_delay() const {  // phi'(omega0), s
    return (2.0 / speed_of_light) *
           (l_total + p_weighted * (a + 3.0 * b_w2 * omega0 * omega0));
  }
  double air_group_delay() const {  // excess over the vacuum path, s
    return (2.0 / speed_of_light) * p_weighted * (a + 3.0 * b_w2 * omega0 * omega0);
  }
  double gdd() const {  // phi''(omega0), s^2
    return (2.0 / speed_of_light) * p_weighted * 6.0 * b_w2 * omega0;
  }
  double third_order() const {  // phi'''(omega0), s^3
    return (2.0 / speed_of_light) * p_weighted * 6.0 * b_w2;
  }
  // phi with constant and linear terms removed (exact closed form):
  // (2/c) P B' (3 w0 + dw) dw^2
  double residual_after_gd(double dw) const {
    return (2.0 / speed_of_light) * p_weighted * b_w2 * (3.0 * omega0 + dw) * dw * dw;
  }
  // additionally remove (phi''/2) dw^2: (2/c) P B' dw^3
  double residual_after_gdd(double dw) const {
    return (2.0 / speed_of_light) * p_weighted * b_w2 * dw * dw * dw;
  }
  // doubled-GDD compensation removes phi'' dw^2 instead: (2/c) P B' (dw - 3 w0) dw^2
  double residual_after_doubled_gdd(double dw) const {
    return (2.0 / speed_of_light) * p_weighted * b_w2 * (dw - 3.0 * omega0) * dw * dw;
  }
};

inline DoublePassPhase make_double_pass_phase(const AtmosphereProfile& p, double omega0) {
  if (!(omega0 > 0.0)) throw std::invalid_argument("omega0 must be > 0");
  DoublePassPhase d;
  d.l_total = p.total_path();
  d.p_weighted = p.weighted_path();
  d.a = p.index.a;
  d.b_w2 = p.index.b_omega2();
  d.omega0 = omega0;
  return d;
}

// Multiplies by exp(-i phi(omega)).  Evaluated as
// exp(-i phi0) * exp(-i phi' dw) * exp(-i residual(dw)) so the
// detuning-dependent phase carries no 1e12-magnitude rounding jitter (the
// constant piece is a global phase).  Norm is preserved exactly.
inline SampledAmplitude apply_double_pass_dispersion(const SampledAmplitude& in,
                                                     const AtmosphereProfile& profile) {
  const DoublePassPhase ph = make_double_pass_phase(profile, in.grid.center);
  SampledAmplitude out = in;
  const std::complex<double> c0 = std::polar(1.0, -ph.phase0());
  const double gd = ph.group_delay();
  for (int i = 0; i < in.grid.samples; ++i) {
    const double dw = in.grid.detuning(i);
    out.values[i] *= c0 * std::polar(1.0, -(gd * dw + ph.residual_after_gd(dw)));
  }
  return out;
}

// Receiver-side compensation: multiplies by
// exp(+i [phi' dw + (phi''/2) dw^2])   (gdd term with L_q), or
// exp(+i [phi' dw + phi'' dw^2])       (doubled: gdd term with 2 L_q).
// Must use the profile the dispersion was applied with.
inline SampledAmplitude compensate(const SampledAmplitude& in,
                                   const AtmosphereProfile& profile,
                                   bool gdd_doubled = false) {
  const DoublePassPhase ph = make_double_pass_phase(profile, in.grid.center);
  SampledAmplitude out = in;
  const double gd = ph.group_delay();
  const double q = gdd_doubled ? ph.gdd() : 0.5 * ph.gdd();
  for (int i = 0; i < in.grid.samples; ++i) {
    const double dw = in.grid.detuning(i);
    out.values[i] *= std::polar(1.0, gd * dw + q * dw * dw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Overlap matrix c_{k,j} = overlap(f_k, dispersed-or-compensated f_j).
struct OverlapMatrix {
  Eigen::MatrixXcd c;                // N x N
  int n_modes = 0;
  double sigma = 0.0;                // rad/s
  double omega0 = 0.0;               // rad/s
  bool compensated = false;
  bool gdd_doubled = false;
  uint64_t profile_hash = 0;
  std::vector<double> column_norms;  // sum_k |c_kj|^2 per column

  double diagonal_power(int j) const { return std::norm(c(j, j)); }
};

// Builds the matrix in the group-delay-removed frame (uncompensated) or with
// the GDD term also compensated.  Columns are evaluated independently and may
// run concurrently; results are bitwise independent of the thread count.
inline OverlapMatrix overlap_matrix(const AtmosphereProfile& profile, int n_modes,
                                    double sigma, double omega0, bool compensated,
                                    bool gdd_doubled = false, int samples = 4096,
                                    int threads = 1) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  const FrequencyGrid grid = default_mode_grid(omega0, sigma, n_modes, samples);
  const DoublePassPhase ph = make_double_pass_phase(profile, omega0);

  // basis on the shared grid
  std::vector<SampledAmplitude> basis(n_modes);
  for (int j = 0; j < n_modes; ++j) basis[j] = hg_amplitude(j, sigma, grid);

  OverlapMatrix m;
  m.c.resize(n_modes, n_modes);
  m.n_modes = n_modes;
  m.sigma = sigma;
  m.omega0 = omega0;
  m.compensated = compensated;
  m.gdd_doubled = gdd_doubled;
  m.profile_hash = profile.hash();
  m.column_norms.resize(n_modes);

  parallel_for(n_modes, threads, [&](int j) {
    SampledAmplitude col = basis[j];
    for (int i = 0; i < grid.samples; ++i) {
      const double dw = grid.detuning(i);
      const double res = compensated
                             ? (gdd_doubled ? ph.residual_after_doubled_gdd(dw)
                                            : ph.residual_after_gdd(dw))
                             : ph.residual_after_gd(dw);
      col.values[i] *= std::polar(1.0, -res);
    }
    for (int k = 0; k < n_modes; ++k) m.c(k, j) = overlap(basis[k], col);
    double n2 = 0.0;
    for (int k = 0; k < n_modes; ++k) n2 += std::norm(m.c(k, j));
    m.column_norms[j] = n2;
  });

  // Quadrature sanity: truncation can only lose norm at high order, so any
  // column above 1+1e-4 or a low-order column below 1-1e-4 means the grid is
  // too coarse.
  for (int j = 0; j < n_modes; ++j) {
    if (m.column_norms[j] > 1.0 + 1e-4)
      throw precision_error("overlap_matrix: column " + std::to_string(j) +
                            " norm exceeds 1 (grid too coarse)");
    if (j <= 6 && m.column_norms[j] < 1.0 - 1e-4)
      throw precision_error("overlap_matrix: low-order column " + std::to_string(j) +
                            " lost norm (grid too coarse or too narrow)");
  }
  return m;
}

}  // namespace qpms
