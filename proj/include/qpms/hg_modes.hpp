#pragma once

// Temporal Hermite-Gauss (HG) mode basis on uniform angular-frequency grids.
//
// The transmit pulse occupies HG temporal mode j with spectral amplitude
//   f_j(omega) = sqrt(2*pi/sigma) * phi_j((omega - omega0)/sigma)
// where phi_j is the unit-norm Hermite function
//   phi_j(x) = H_j(x) exp(-x^2/2) / sqrt(j! sqrt(pi) 2^j).
// With the inner product (1/2pi) Int f_i* f_j domega the basis is
// orthonormal.  All quadrature is trapezoidal on the sampled grid.

#include <complex>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "qpms/constants.hpp"
#include "qpms/errors.hpp"

namespace qpms {

struct FrequencyGrid {
  double center = 0.0;     // rad/s
  double half_span = 0.0;  // rad/s
  int samples = 0;

  double spacing() const { return 2.0 * half_span / (samples - 1); }
  double omega(int i) const { return center - half_span + i * spacing(); }
  // offset from the center frequency (the grid is symmetric about it)
  double detuning(int i) const { return -half_span + i * spacing(); }

  bool operator==(const FrequencyGrid&) const = default;

  void validate() const {
    if (samples < 2) throw std::invalid_argument("frequency grid needs >= 2 samples");
    if (!(half_span > 0.0)) throw std::invalid_argument("frequency grid half_span must be > 0");
    if (!(center > half_span)) throw std::invalid_argument("frequency grid extends to non-positive omega");
  }
};

inline double trapezoid_weight(int i, int n) {
  return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

struct SampledAmplitude {
  FrequencyGrid grid;
  std::vector<std::complex<double>> values;

  // (1/2pi) Int |f|^2 domega
  double norm_squared() const {
    double s = 0.0;
    for (int i = 0; i < grid.samples; ++i)
      s += trapezoid_weight(i, grid.samples) * std::norm(values[i]);
    return s * grid.spacing() / (2.0 * pi);
  }
};

struct SpectralWidth {
  double sigma = 0.0;                  // rad/s
  double time_bandwidth = 0.0;         // the sigma*T_p constant used
  double bandwidth_wavelength = 0.0;   // equivalent width sigma*lambda^2/(2 pi c), m
};

// sigma = 2.356 / T_p; the wavelength only enters the reported equivalent
// bandwidth (used by the solar background radiometry).
inline SpectralWidth sigma_from_pulse_width(double pulse_width_s, double wavelength_m) {
  if (!(pulse_width_s > 0.0)) throw std::invalid_argument("pulse width must be > 0");
  if (!(wavelength_m > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  SpectralWidth w;
  w.sigma = time_bandwidth_product / pulse_width_s;
  w.time_bandwidth = time_bandwidth_product;
  w.bandwidth_wavelength = w.sigma * wavelength_m * wavelength_m / (2.0 * pi * speed_of_light);
  return w;
}

// Unit-norm Hermite function phi_j(x); stable normalized recurrence
// phi_{k+1} = x sqrt(2/(k+1)) phi_k - sqrt(k/(k+1)) phi_{k-1}, no factorial
// overflow at any order.
inline double hermite_function(int order, double x) {
  constexpr double inv_pi_quartic = 0.75112554446494248286;  // pi^{-1/4}
  double h0 = inv_pi_quartic * std::exp(-0.5 * x * x);
  if (order == 0) return h0;
  double h1 = std::sqrt(2.0) * x * h0;
  for (int k = 1; k < order; ++k) {
    double h2 = x * std::sqrt(2.0 / (k + 1)) * h1 - std::sqrt(double(k) / (k + 1)) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// Spectral amplitude of HG temporal mode `order` centered on grid.center.
// Throws precision_error if the grid clips the mode (discrete norm off by
// more than 1e-6).
inline SampledAmplitude hg_amplitude(int order, double sigma, const FrequencyGrid& grid) {
  if (order < 0) throw std::invalid_argument("mode order must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  grid.validate();
  SampledAmplitude a;
  a.grid = grid;
  a.values.resize(grid.samples);
  const double scale = std::sqrt(2.0 * pi / sigma);
  for (int i = 0; i < grid.samples; ++i)
    a.values[i] = scale * hermite_function(order, grid.detuning(i) / sigma);
  const double n2 = a.norm_squared();
  if (std::abs(n2 - 1.0) > 1e-6)
    throw precision_error("hg_amplitude: grid too narrow or too coarse for order " +
                          std::to_string(order) + " (|norm^2-1| = " +
                          std::to_string(std::abs(n2 - 1.0)) + ")");
  return a;
}

// (1/2pi) Int a*(omega) b(omega) domega on a shared grid.
inline std::complex<double> overlap(const SampledAmplitude& a, const SampledAmplitude& b) {
  if (!(a.grid == b.grid))
    throw std::invalid_argument("overlap: amplitudes sampled on different grids");
  std::complex<double> s = 0.0;
  for (int i = 0; i < a.grid.samples; ++i)
    s += trapezoid_weight(i, a.grid.samples) * std::conj(a.values[i]) * b.values[i];
  return s * (a.grid.spacing() / (2.0 * pi));
}

struct TimeGrid {
  double spacing = 0.0;  // s
  int samples = 0;
  double time(int i) const { return (i - samples / 2) * spacing; }
};

struct TimeSignal {
  TimeGrid grid;
  std::vector<std::complex<double>> values;

  // Int |g|^2 dt
  double norm_squared() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * grid.spacing;
  }
};

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// Baseband envelope g(t) = e^{+i omega0 t} (1/2pi) Int f(omega) e^{-i omega t} domega
// via FFT.  Unitary pair: Int|g|^2 dt equals (1/2pi) Int|f|^2 domega exactly
// (discrete Parseval), span 2pi/spacing, resolution 2pi/(N*spacing).
inline TimeSignal to_time_domain(const SampledAmplitude& a) {
  a.grid.validate();
  const int n = a.grid.samples;
  const double dw = a.grid.spacing();
  const double dt = 2.0 * pi / (n * dw);
  const double c = 0.5 * (n - 1);  // detuning index of the grid center

  std::vector<std::complex<double>> in(n), out(n);
  // e^{-i (m-c) dw t_k} with t_k = (k - n/2) dt  ->  DFT with twiddles
  for (int m = 0; m < n; ++m) {
    const double ph = pi * (m - c) * double(2 * (n / 2)) / n;  // (m-c) dw * (n/2) dt
    in[m] = a.values[m] * std::polar(1.0, ph);
  }
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  TimeSignal g;
  g.grid = TimeGrid{dt, n};
  g.values.resize(n);
  const double scale = dw / (2.0 * pi);
  for (int k = 0; k < n; ++k) {
    // undo the DFT's implicit m=0 origin: shift spectrum center to index c
    const double ph = 2.0 * pi * c * k / n;
    g.values[k] = scale * out[k] * std::polar(1.0, ph);
  }
  return g;
}

// Real time-domain HG envelope h_j(t) = sqrt(sigma) phi_j(sigma t), unit
// Int h^2 dt.  The physical envelope of mode j is (-i)^j h_j(t).
inline double hg_time_envelope(int order, double sigma, double t) {
  if (order < 0) throw std::invalid_argument("mode order must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  return std::sqrt(sigma) * hermite_function(order, sigma * t);
}

// Default analysis grid for an N-mode basis: +/- (6 + 2*(N-1)) sigma.
inline FrequencyGrid default_mode_grid(double omega0, double sigma, int n_modes,
                                       int samples = 4096) {
  return FrequencyGrid{omega0, (6.0 + 2.0 * (n_modes - 1)) * sigma, samples};
}

}  // namespace qpms
