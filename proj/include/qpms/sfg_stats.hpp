#pragma once

// Photon statistics through the parametric (SFG) mode sorter.
//
// The sorter's Green kernel is Schmidt-decomposed: each Schmidt mode n
// converts with amplitude lambda_n, acting on that mode as a beamsplitter of
// transmissivity lambda_n^2 into the detected sum-frequency band.  For an
// input mode with photon-number moments (<n>, <n^2>) the detected moments are
//   <n>_out  = lambda^2 <n>
//   <n^2>_out = lambda^4 <n^2> + lambda^2 (1 - lambda^2) <n>.
// The variance is propagated in the algebraically equivalent form
//   var_out = lambda^4 var_in + lambda^2 (1 - lambda^2) <n>,
// which stays exact when <n^2> ~ <n>^2 ~ 1e28 would cancel catastrophically.
//
// Gaussian inputs used by the detection chain are displaced thermal states
// with coherent part y = |mu|^2 and thermal occupation nbar:
//   <n> = y + nbar,  <n^2> = y(4 nbar + y) + 2 nbar^2 + <n>,
//   var = y(1 + 2 nbar) + nbar(1 + nbar).

#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qpms/errors.hpp"
#include "qpms/hg_modes.hpp"

namespace qpms {

struct SchmidtModel {
  Eigen::VectorXd lambdas;   // conversion amplitudes, one per mode
  Eigen::MatrixXcd mixing;   // optional input-side mode mixing (columns =
                             // Schmidt modes in the HG basis); empty = identity

  int modes() const { return int(lambdas.size()); }

  double sum_lambda_sq() const { return lambdas.squaredNorm(); }

  void validate() const {
    if (lambdas.size() < 1) throw std::invalid_argument("Schmidt model has no modes");
    for (int i = 0; i < lambdas.size(); ++i)
      if (!(lambdas[i] >= 0.0 && lambdas[i] <= 1.0))
        throw std::invalid_argument("Schmidt coefficient outside [0,1] at mode " +
                                    std::to_string(i));
    if (mixing.size() > 0) {
      if (mixing.cols() != lambdas.size())
        throw std::invalid_argument("mixing matrix column count != mode count");
      const Eigen::MatrixXcd gram =
          mixing.adjoint() * mixing - Eigen::MatrixXcd::Identity(mixing.cols(), mixing.cols());
      if (gram.cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("mixing matrix columns not orthonormal");
    }
  }
};

// Measured sorter spectrum: strong conversion on mode 3, weak sidebands.
inline SchmidtModel default_schmidt_model(int n_modes = 40) {
  if (n_modes < 7) throw std::invalid_argument("default Schmidt model needs >= 7 modes");
  SchmidtModel m;
  m.lambdas = Eigen::VectorXd::Zero(n_modes);
  m.lambdas[3] = 0.7;
  m.lambdas[2] = m.lambdas[4] = 0.07;
  m.lambdas[0] = m.lambdas[1] = m.lambdas[5] = m.lambdas[6] = 0.014;
  return m;
}

// Text format: one "order coefficient" pair per line, '#' comments.
// Unlisted orders are zero.
inline SchmidtModel load_schmidt_model(std::istream& in, int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  SchmidtModel m;
  m.lambdas = Eigen::VectorXd::Zero(n_modes);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int order;
    double lam;
    if (!(ls >> order)) continue;  // blank line
    if (!(ls >> lam))
      throw std::invalid_argument("Schmidt file line " + std::to_string(lineno) +
                                  ": missing coefficient");
    std::string extra;
    if (ls >> extra)
      throw std::invalid_argument("Schmidt file line " + std::to_string(lineno) +
                                  ": trailing content");
    if (order < 0 || order >= n_modes)
      throw std::invalid_argument("Schmidt file line " + std::to_string(lineno) +
                                  ": order outside [0," + std::to_string(n_modes - 1) + "]");
    m.lambdas[order] = lam;
  }
  m.validate();
  return m;
}

inline SchmidtModel load_schmidt_model_file(const std::string& path, int n_modes) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open Schmidt file: " + path);
  return load_schmidt_model(f, n_modes);
}

// Per-mode photon-number moments at the sorter input.
struct ModeMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;  // tracked analytically alongside the second moment
};

inline ModeMoments displaced_thermal_moments(double y, double nbar) {
  if (y < 0.0) throw std::invalid_argument("coherent power must be >= 0");
  if (nbar < 0.0) throw std::invalid_argument("thermal occupation must be >= 0");
  ModeMoments m;
  m.mean = y + nbar;
  m.second_moment = y * (4.0 * nbar + y) + 2.0 * nbar * nbar + m.mean;
  m.variance = y * (1.0 + 2.0 * nbar) + nbar * (1.0 + nbar);
  return m;
}

// Attenuated probe return in each HG mode k: coherent |c_k3 alpha|^2 * eta.
inline std::vector<ModeMoments> signal_input_moments(std::complex<double> alpha, double eta,
                                                     const Eigen::VectorXcd& c_column) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta outside [0,1]");
  std::vector<ModeMoments> out(c_column.size());
  for (int n = 0; n < c_column.size(); ++n)
    out[n] = displaced_thermal_moments(eta * std::norm(c_column[n] * alpha), 0.0);
  return out;
}

// Conventional-pulse leakage plus multiple scattering plus solar background.
// Each HG mode k sees the displaced thermal state with coherent amplitude
// sqrt(eta_c) c_k0 alpha_c + delta_alpha_c, i.e.
//   y_k = eta_c |c_k0 alpha_c|^2 + 2 sqrt(eta_c) Re[(c_k0 alpha_c)* delta] + |delta|^2
// (the expanded form keeps the eta_c -> 0 limit finite).
inline std::vector<ModeMoments> noise_input_moments(std::complex<double> alpha_c,
                                                    std::complex<double> delta_alpha_c,
                                                    double eta_c,
                                                    const Eigen::VectorXcd& c_column,
                                                    const std::vector<double>& nbar_modes) {
  if (eta_c < 0.0 || eta_c > 1.0) throw std::invalid_argument("eta_c outside [0,1]");
  if (size_t(c_column.size()) != nbar_modes.size())
    throw std::invalid_argument("column and background lengths differ");
  std::vector<ModeMoments> out(c_column.size());
  const double sq = std::sqrt(eta_c);
  for (int n = 0; n < c_column.size(); ++n) {
    const std::complex<double> probe = c_column[n] * alpha_c;
    const double y = eta_c * std::norm(probe) +
                     2.0 * sq * std::real(std::conj(probe) * delta_alpha_c) +
                     std::norm(delta_alpha_c);
    out[n] = displaced_thermal_moments(std::max(y, 0.0), nbar_modes[n]);
  }
  return out;
}

// Detected (post-sorter) statistics.
struct DetectionStats {
  std::vector<double> mode_mean;
  std::vector<double> mode_variance;
  double total_mean = 0.0;
  double total_std = 0.0;
};

// Applies the per-mode conversion beamsplitters.
inline DetectionStats convert(const std::vector<ModeMoments>& in, const SchmidtModel& model) {
  model.validate();
  if (int(in.size()) != model.modes())
    throw std::invalid_argument("moment vector length != Schmidt mode count");
  DetectionStats out;
  out.mode_mean.resize(in.size());
  out.mode_variance.resize(in.size());
  double vsum = 0.0;
  for (size_t n = 0; n < in.size(); ++n) {
    const double l2 = model.lambdas[int(n)] * model.lambdas[int(n)];
    const double mean = l2 * in[n].mean;
    double var = l2 * l2 * in[n].variance + l2 * (1.0 - l2) * in[n].mean;
    if (var < -1e-12 * std::max(1.0, l2 * l2 * in[n].second_moment))
      throw inconsistency_error("convert: negative variance at mode " + std::to_string(n));
    if (var < 0.0) var = 0.0;
    out.mode_mean[n] = mean;
    out.mode_variance[n] = var;
    out.total_mean += mean;
    vsum += var;
  }
  out.total_std = std::sqrt(vsum);
  return out;
}

// Rotates Gaussian inputs (coherent vector + per-mode thermal occupations in
// the HG basis) into the Schmidt basis defined by unitary columns V:
// beta = V^dagger alpha, nbar'_n = sum_j |V_jn|^2 nbar_j.
inline std::vector<ModeMoments> project_input_moments(const Eigen::VectorXcd& alphas,
                                                      const std::vector<double>& nbars,
                                                      const Eigen::MatrixXcd& v) {
  if (v.rows() != alphas.size() || size_t(v.rows()) != nbars.size())
    throw std::invalid_argument("projection dimensions disagree");
  const Eigen::MatrixXcd gram =
      v.adjoint() * v - Eigen::MatrixXcd::Identity(v.cols(), v.cols());
  if (gram.cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("projection columns not orthonormal");
  std::vector<ModeMoments> out(v.cols());
  for (int n = 0; n < v.cols(); ++n) {
    const std::complex<double> beta = v.col(n).dot(alphas);  // conj(V)^T alpha
    double nb = 0.0;
    for (int j = 0; j < v.rows(); ++j) nb += std::norm(v(j, n)) * nbars[j];
    out[n] = displaced_thermal_moments(std::norm(beta), nb);
  }
  return out;
}

// Schmidt decomposition of a sampled two-time Green kernel G(t, t').
struct KernelDecomposition {
  Eigen::VectorXd lambdas;       // singular values, descending
  Eigen::MatrixXcd input_modes;  // V: columns = input Schmidt modes in HG basis
  Eigen::MatrixXcd output_modes; // U
  double reconstruction_error = 0.0;  // kernel content outside the M-mode span
  bool truncation_warning = false;    // reconstruction_error > 0.05
};

// Projects G onto the first M time-domain HG envelopes h_j(t) (width 1/sigma)
// and takes the SVD of the projected matrix P = H^T W G W H.  Columns of V/U
// are phase-fixed so the largest entry of each V column is real positive.
inline KernelDecomposition decompose_green_kernel(const Eigen::MatrixXcd& kernel,
                                                  const TimeGrid& grid, double sigma,
                                                  int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (kernel.rows() != kernel.cols() || kernel.rows() != grid.samples)
    throw std::invalid_argument("kernel must be square on the supplied time grid");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");

  const int ns = grid.samples;
  Eigen::MatrixXd h(ns, n_modes);
  for (int j = 0; j < n_modes; ++j)
    for (int i = 0; i < ns; ++i)
      h(i, j) = hg_time_envelope(j, sigma, grid.time(i)) *
                std::sqrt(trapezoid_weight(i, ns) * grid.spacing);

  // the grid must support the requested basis
  const Eigen::MatrixXd basis_gram = h.transpose() * h - Eigen::MatrixXd::Identity(n_modes, n_modes);
  if (basis_gram.cwiseAbs().maxCoeff() > 1e-6)
    throw precision_error("decompose_green_kernel: time grid too narrow/coarse for " +
                          std::to_string(n_modes) + " modes");

  const Eigen::MatrixXcd p = h.transpose() * kernel * h;

  double kernel_norm_sq = 0.0;
  for (int i = 0; i < ns; ++i)
    for (int l = 0; l < ns; ++l)
      kernel_norm_sq += trapezoid_weight(i, ns) * trapezoid_weight(l, ns) *
                        std::norm(kernel(i, l));
  kernel_norm_sq *= grid.spacing * grid.spacing;
  if (!(kernel_norm_sq > 0.0)) throw std::invalid_argument("kernel is identically zero");

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
  KernelDecomposition d;
  d.lambdas = svd.singularValues();
  d.input_modes = svd.matrixV();
  d.output_modes = svd.matrixU();
  for (int n = 0; n < n_modes; ++n) {
    int imax = 0;
    double vmax = 0.0;
    for (int j = 0; j < n_modes; ++j)
      if (std::abs(d.input_modes(j, n)) > vmax) {
        vmax = std::abs(d.input_modes(j, n));
        imax = j;
      }
    if (vmax > 0.0) {
      const std::complex<double> rot =
          std::conj(d.input_modes(imax, n)) / vmax;  // e^{-i arg}
      d.input_modes.col(n) *= rot;
      d.output_modes.col(n) *= rot;
    }
  }
  const double captured = d.lambdas.squaredNorm();
  d.reconstruction_error =
      std::sqrt(std::max(0.0, kernel_norm_sq - captured) / kernel_norm_sq);
  d.truncation_warning = d.reconstruction_error > 0.05;
  return d;
}

}  // namespace qpms
