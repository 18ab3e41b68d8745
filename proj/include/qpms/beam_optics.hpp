#pragma once

// Transmit/receive spatial mode matching for a monostatic link with a small
// retroreflecting target.
//
// The transmitted TEM00 beam (waist W0 at the transmitter) illuminates a
// circular reflector of radius R at range L; the masked, attenuated field
// diffracts back to the receiver plane (round trip 2L), where it is overlapped
// against the unmasked beam propagated the same distance:
//   C_SMM = | Int psi0*(rho) psi1(rho) dA |^2   over the receiver aperture.
// Both fields carry their true wavefront curvature (R_c(z) = z + z_R^2/z), so
// the quadratic receiver-plane phases cancel in the overlap and the R->inf,
// r_spec=1 limit reduces to the receiver-clipping-only value.
//
// Propagation uses the radially-symmetric Fresnel diffraction integral
//   psi(rho) = (k/(iL)) e^{ikL} e^{ik rho^2/2L}
//              Int psi_in(r) e^{ik r^2/2L} J0(k rho r / L) r dr
// evaluated by composite Simpson quadrature with sampling driven by the total
// quadratic + Bessel phase budget.  For reflectors beyond the first Fresnel
// zone (k R^2 / L > pi) the on-axis return oscillates with R (classic zone
// behavior), so C_SMM is monotone in R only in the sub-zone regime.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "qpms/constants.hpp"
#include "qpms/errors.hpp"
#include "qpms/parallel.hpp"

namespace qpms {

struct BeamGeometry {
  double wavelength = 1064e-9;  // m
  double waist = 6.77e-3;       // W0, m (waist at the transmitter)

  double wavenumber() const { return 2.0 * pi / wavelength; }
  double rayleigh() const { return pi * waist * waist / wavelength; }
  double width(double z) const {
    const double u = z / rayleigh();
    return waist * std::sqrt(1.0 + u * u);
  }
  double curvature_radius(double z) const {  // R_c(z); +inf at the waist
    if (z == 0.0) return std::numeric_limits<double>::infinity();
    return z + rayleigh() * rayleigh() / z;
  }
  double divergence() const { return wavelength / (pi * waist); }  // rad

  void validate() const {
    if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
    if (!(waist > 0.0)) throw std::invalid_argument("waist must be > 0");
  }
};

// Flat-phase far-field form of the beam at range z and radius r, unit total
// power: -i sqrt(2/pi)/W(z) e^{ikz} e^{-r^2/W(z)^2}.
inline std::complex<double> gaussian_at_range(const BeamGeometry& g, double z, double r) {
  g.validate();
  const double w = g.width(z);
  const double amp = std::sqrt(2.0 / pi) / w * std::exp(-(r * r) / (w * w));
  return std::complex<double>(0.0, -1.0) * std::polar(amp, g.wavenumber() * z);
}

struct ReflectorSpec {
  double radius = 100e-6;     // m
  double reflectivity = 0.05; // r_spec, fraction of power returned specularly
};

struct ReceiverSpec {
  double radius = 0.5;  // m
};

struct RadialField {
  std::vector<double> radii;                 // uniform, ascending, m
  std::vector<std::complex<double>> values;  // field at each radius
  double range_z = 0.0;                      // plane location, m

  // Int |psi|^2 2 pi r dr
  double power() const {
    const int n = int(radii.size());
    const double h = (radii.back() - radii.front()) / (n - 1);
    double s = 0.0;
    if (n % 2 == 1) {  // composite Simpson
      for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::norm(values[i]) * radii[i];
      }
      s *= h / 3.0;
    } else {
      for (int i = 0; i < n; ++i)
        s += (i == 0 || i == n - 1 ? 0.5 : 1.0) * std::norm(values[i]) * radii[i];
      s *= h;
    }
    return 2.0 * pi * s;
  }
};

struct PropagationResult {
  RadialField field;
  double fresnel_number = 0.0;  // a^2 / (lambda L), a = input grid extent
  bool fraunhofer_ok = false;   // advisory: the kernel keeps the quadratic
                                // phase, so results hold either way
};

namespace detail {

// composite Simpson weight (odd sample count), trapezoid otherwise
inline double quad_weight(int i, int n) {
  if (n % 2 == 1) return (i == 0 || i == n - 1) ? 1.0 / 3.0 : (i % 2 ? 4.0 / 3.0 : 2.0 / 3.0);
  return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

}  // namespace detail

// Fresnel-Hankel propagation of a radial field over `distance`, sampled at
// out_radii.  The input grid must be uniform and start at r = 0.
inline PropagationResult propagate_to_receiver(const RadialField& in, double distance,
                                               double wavelength,
                                               const std::vector<double>& out_radii,
                                               int threads = 1) {
  if (in.radii.size() < 3 || in.radii.size() != in.values.size())
    throw std::invalid_argument("propagate_to_receiver: bad input grid");
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be > 0");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  const int n = int(in.radii.size());
  const double h = (in.radii.back() - in.radii.front()) / (n - 1);
  const double k = 2.0 * pi / wavelength;

  // premultiplied source samples q(r) = psi_in(r) e^{ikr^2/2L} r w
  std::vector<std::complex<double>> q(n);
  for (int i = 0; i < n; ++i) {
    const double r = in.radii[i];
    q[i] = in.values[i] * std::polar(1.0, k * r * r / (2.0 * distance)) * r *
           detail::quad_weight(i, n) * h;
  }

  PropagationResult res;
  res.field.radii = out_radii;
  res.field.values.resize(out_radii.size());
  res.field.range_z = in.range_z + distance;
  const double a = in.radii.back();
  res.fresnel_number = a * a / (wavelength * distance);
  res.fraunhofer_ok = res.fresnel_number < 0.25;

  // (k/(iL)) e^{ikL}
  const std::complex<double> pref =
      std::complex<double>(0.0, -1.0) * (k / distance) * std::polar(1.0, k * distance);
  parallel_for(int(out_radii.size()), threads, [&](int j) {
    const double b = k * out_radii[j] / distance;
    std::complex<double> s = 0.0;
    for (int i = 0; i < n; ++i) s += q[i] * j0(b * in.radii[i]);
    const double rho = out_radii[j];
    res.field.values[j] = pref * std::polar(1.0, k * rho * rho / (2.0 * distance)) * s;
  });
  return res;
}

struct SmmConfig {
  double points_per_radian = 2.6;          // reflector-plane chirp sampling (~16/cycle)
  double receiver_points_per_radian = 1.3; // receiver-plane sampling (~8/cycle)
  int min_radial_samples = 4001;
  int min_receiver_samples = 257;
  double envelope_cutoff = 1e-6;           // truncate beam envelope below this amplitude
  double refine_tolerance = 1e-3;          // max relative change under grid doubling
  bool check_refinement = true;
  int threads = 1;
};

struct SmmResult {
  double c_smm = 0.0;
  double clipping_only = 0.0;   // analytic r_spec * (1 - e^{-2 r_ap^2 / W(2L)^2})^2
  double domain_radius = 0.0;   // reflector-plane integration extent, m
  int radial_samples = 0;
  int receiver_samples = 0;
  double refine_delta = 0.0;    // relative change under grid doubling
};

namespace detail {

inline double smm_overlap_squared(const BeamGeometry& g, const ReflectorSpec& refl,
                                  const ReceiverSpec& recv, double range, double r_dom,
                                  int n_r, int n_rho, int threads) {
  const double k = g.wavenumber();
  const double wl = g.width(range);
  const double w2 = g.width(2.0 * range);
  const double rc1 = g.curvature_radius(range);
  const double rc2 = g.curvature_radius(2.0 * range);
  // reflector-plane quadratic phase: kernel + incident wavefront curvature
  const double alpha_in = k / (2.0 * range) + k / (2.0 * rc1);

  const double hr = r_dom / (n_r - 1);
  std::vector<std::complex<double>> q(n_r);
  const double amp0 = std::sqrt(2.0 / pi) / wl * std::sqrt(refl.reflectivity);
  for (int i = 0; i < n_r; ++i) {
    const double r = i * hr;
    q[i] = std::polar(amp0 * std::exp(-(r * r) / (wl * wl)), alpha_in * r * r) * r *
           quad_weight(i, n_r) * hr;
  }

  const double hrho = recv.radius / (n_rho - 1);
  std::vector<std::complex<double>> integ(n_rho);
  parallel_for(n_rho, threads, [&](int j) {
    const double rho = j * hrho;
    const double b = k * rho / range;
    std::complex<double> s = 0.0;
    for (int i = 0; i < n_r; ++i) s += q[i] * j0(b * (i * hr));
    // psi1 phase: e^{ik rho^2/2L}; psi0*: conj of curved Gaussian at 2L
    const double phase = k * rho * rho / (2.0 * range) - k * rho * rho / (2.0 * rc2);
    const double psi0_amp = std::sqrt(2.0 / pi) / w2 * std::exp(-(rho * rho) / (w2 * w2));
    integ[j] = psi0_amp * std::polar(1.0, phase) * s * rho * quad_weight(j, n_rho) * hrho;
  });
  std::complex<double> ov = 0.0;
  for (const auto& v : integ) ov += v;
  ov *= 2.0 * pi * (k / range);
  return std::norm(ov);
}

}  // namespace detail

// Spatial mode-matching coefficient C_SMM of the masked return against the
// unmasked round-trip beam over the receiver aperture.
inline SmmResult smm_coefficient(const BeamGeometry& g, const ReflectorSpec& refl,
                                 const ReceiverSpec& recv, double range,
                                 const SmmConfig& cfg = {}) {
  g.validate();
  if (!(range > 0.0)) throw std::invalid_argument("range must be > 0");
  if (!(refl.radius > 0.0)) throw std::invalid_argument("reflector radius must be > 0");
  if (refl.reflectivity < 0.0 || refl.reflectivity > 1.0)
    throw std::invalid_argument("reflectivity outside [0,1]");
  if (!(recv.radius > 0.0)) throw std::invalid_argument("receiver radius must be > 0");

  const double k = g.wavenumber();
  const double wl = g.width(range);
  const double w2 = g.width(2.0 * range);
  const double rc1 = g.curvature_radius(range);
  const double alpha_in = k / (2.0 * range) + k / (2.0 * rc1);

  SmmResult res;
  res.domain_radius = std::min(refl.radius, wl * std::sqrt(std::log(1.0 / cfg.envelope_cutoff)));
  const double bessel_budget = k * recv.radius * res.domain_radius / range;
  const double chirp_budget = alpha_in * res.domain_radius * res.domain_radius;

  auto make_odd = [](long v) { return int(v | 1); };
  res.radial_samples = make_odd(std::max<long>(
      cfg.min_radial_samples,
      long(std::ceil(cfg.points_per_radian * (chirp_budget + bessel_budget)))));
  res.receiver_samples = make_odd(std::max<long>(
      cfg.min_receiver_samples,
      long(std::ceil(cfg.receiver_points_per_radian * bessel_budget))));
  if (res.radial_samples > (1 << 23))
    throw precision_error("smm_coefficient: phase budget needs " +
                          std::to_string(res.radial_samples) +
                          " samples; reflector too far into the Fresnel-zone regime");

  res.c_smm = detail::smm_overlap_squared(g, refl, recv, range, res.domain_radius,
                                          res.radial_samples, res.receiver_samples,
                                          cfg.threads);
  const double e = 1.0 - std::exp(-2.0 * recv.radius * recv.radius / (w2 * w2));
  res.clipping_only = refl.reflectivity * e * e;

  if (cfg.check_refinement) {
    const double fine = detail::smm_overlap_squared(
        g, refl, recv, range, res.domain_radius, 2 * res.radial_samples - 1,
        2 * res.receiver_samples - 1, cfg.threads);
    res.refine_delta = std::abs(fine - res.c_smm) /
                       std::max(fine, std::numeric_limits<double>::min());
    if (res.refine_delta > cfg.refine_tolerance)
      throw precision_error("smm_coefficient: value moved " +
                            std::to_string(res.refine_delta) +
                            " under grid doubling (needs finer sampling)");
    res.c_smm = fine;
  }
  return res;
}

struct SpecularRatio {
  double ratio = 0.0;        // specular-to-Lambertian received-power ratio
  double theta_div = 0.0;    // transmitter divergence lambda/(pi W0), rad
  double theta_diffr = 0.0;  // reflector diffraction spread 0.618 lambda/R, rad
  bool small_radius_warning = false;  // R <= 10 lambda: scalar diffraction dubious
};

// Received-power advantage of a flat specular micro-reflector over a
// Lambertian scatterer of the same area: 1 / (theta_div^2 + theta_diffr^2).
inline SpecularRatio specular_to_lambertian_ratio(const BeamGeometry& g, double reflector_radius) {
  g.validate();
  if (!(reflector_radius > 0.0)) throw std::invalid_argument("reflector radius must be > 0");
  SpecularRatio r;
  r.theta_div = g.divergence();
  r.theta_diffr = 0.618 * g.wavelength / reflector_radius;
  r.ratio = 1.0 / (r.theta_div * r.theta_div + r.theta_diffr * r.theta_diffr);
  r.small_radius_warning = reflector_radius <= 10.0 * g.wavelength;
  return r;
}

}  // namespace qpms
