// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <fstream>
#include <numbers>
#include <vector>

#include "lmqc/errors.hpp"
#include "lmqc/wavepacket.hpp"

namespace lmqc {

using Matrix4cd = Eigen::Matrix4cd;
using Matrix4d = Eigen::Matrix4d;
using Vector4d = Eigen::Vector4d;

/// Two-qubit outcome probabilities in the order (gg, ge, eg, ee).
/// Readout-corrected vectors may slightly exit [0, 1]; raw ones must sum to 1.
struct TwoQubitProbVector {
  double p_gg = 1.0, p_ge = 0.0, p_eg = 0.0, p_ee = 0.0;

  Vector4d vec() const { return Vector4d(p_gg, p_ge, p_eg, p_ee); }
  static TwoQubitProbVector from_vec(const Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }
  double sum() const { return p_gg + p_ge + p_eg + p_ee; }

  void validate(bool corrected = false) const {
    const double lo = corrected ? -0.05 : -1e-9;
    const double hi = corrected ? 1.05 : 1.0 + 1e-9;
    for (double p : {p_gg, p_ge, p_eg, p_ee})
      if (p < lo || p > hi) throw ParameterError("TwoQubitProbVector: entry out of range");
    if (!corrected && std::abs(sum() - 1.0) > 1e-9)
      throw ParameterError("TwoQubitProbVector: raw vector must sum to 1");
  }
};

/// Column-stochastic readout confusion matrix: P_meas = V P_true, with
/// V(measured, prepared). Columns sum to 1.
class VisibilityMatrix {
public:
  explicit VisibilityMatrix(Matrix4d v) : v_(std::move(v)) {
    for (int j = 0; j < 4; ++j) {
      if (std::abs(v_.col(j).sum() - 1.0) > 1e-6)
        throw ParameterError("VisibilityMatrix: column " + std::to_string(j) +
                             " does not sum to 1");
      for (int i = 0; i < 4; ++i)
        if (v_(i, j) < 0.0) throw ParameterError("VisibilityMatrix: negative entry");
    }
  }

  const Matrix4d& matrix() const { return v_; }

  double condition_number() const {
    Eigen::JacobiSVD<Matrix4d> svd(v_);
    return svd.singularValues()(0) / svd.singularValues()(3);
  }

private:
  Matrix4d v_;
};

/// The readout matrix measured alongside the interference data. The publication
/// prints it with prepared-state rows; stored here column-stochastic
/// (V(measured, prepared)), so this is the transpose of the printed table.
inline VisibilityMatrix paper_visibility_matrix() {
  Matrix4d printed;
  printed << 0.9806, 0.0118, 0.0075, 0.0001, //
      0.0381, 0.9544, 0.0003, 0.0072,        //
      0.0431, 0.0006, 0.9451, 0.0112,        //
      0.0018, 0.042, 0.0408, 0.9154;
  return VisibilityMatrix(printed.transpose());
}

/// Forward readout corruption P_meas = V P_true.
inline TwoQubitProbVector apply_confusion(const TwoQubitProbVector& p_true,
                                          const VisibilityMatrix& v) {
  return TwoQubitProbVector::from_vec(v.matrix() * p_true.vec());
}

/// Measurement correction P_corr = V^{-1} P_meas. Rejects ill-conditioned matrices.
inline TwoQubitProbVector correct_readout(const TwoQubitProbVector& p_meas,
                                          const VisibilityMatrix& v) {
  const double cond = v.condition_number();
  if (!(cond < 1e6))
    throw ParameterError("correct_readout: visibility matrix condition number " +
                         std::to_string(cond));
  const Vector4d corr = v.matrix().partialPivLu().solve(p_meas.vec());
  return TwoQubitProbVector::from_vec(corr);
}

namespace detail {

inline const std::array<Eigen::Matrix2cd, 4>& pauli_matrices() {
  static const std::array<Eigen::Matrix2cd, 4> ops = [] {
    std::array<Eigen::Matrix2cd, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, cdouble(0, -1), cdouble(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  return ops;
}

inline Matrix4cd pauli_kron(int i, int j) {
  const auto& p = pauli_matrices();
  Matrix4cd out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out.block<2, 2>(2 * a, 2 * b) = p[static_cast<std::size_t>(i)](a, b) *
                                      p[static_cast<std::size_t>(j)];
  return out;
}

} // namespace detail

/// Two-qubit density matrix with the tomography bookkeeping the experiments need.
/// Basis order (gg, ge, eg, ee) with |g> = |0>.
struct DensityMatrix4 {
  Matrix4cd rho = Matrix4cd::Zero();
  double min_eigenvalue = 0.0;
  bool psd_projected = false;

  void validate() const {
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
      throw ParameterError("DensityMatrix4: trace must be 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
      throw ParameterError("DensityMatrix4: not Hermitian");
    if (min_eigenvalue < -0.05)
      throw ParameterError("DensityMatrix4: strongly non-physical spectrum");
  }
};

/// Full set of two-qubit Pauli expectation values <sigma_i x sigma_j>, indices
/// 0..3 = I, X, Y, Z. expectations(0,0) is forced to 1.
using PauliExpectations = Eigen::Matrix4d;

/// Exact Pauli expectations of a density matrix (the noiseless tomography input).
inline PauliExpectations pauli_expectations(const Matrix4cd& rho) {
  PauliExpectations e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      e(i, j) = (rho * detail::pauli_kron(i, j)).trace().real();
  return e;
}

/// Linear-inversion tomography: rho = 1/4 sum <sigma_i x sigma_j> sigma_i x sigma_j,
/// followed by Hermitization and trace renormalization. PSD projection is optional
/// and off by default (only Hermiticity is constrained, matching the experiment).
inline DensityMatrix4 tomography_reconstruct(const PauliExpectations& expectations,
                                             bool project_psd = false) {
  if (std::abs(expectations(0, 0) - 1.0) > 1e-9)
    throw ParameterError("tomography_reconstruct: <I x I> must be 1");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (!std::isfinite(expectations(i, j)))
        throw ParameterError("tomography_reconstruct: non-finite expectation value");

  Matrix4cd rho = Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      rho += expectations(i, j) * detail::pauli_kron(i, j);
  rho /= 4.0;
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  rho /= rho.trace().real();

  DensityMatrix4 out;
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  if (project_psd && out.min_eigenvalue < 0.0) {
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    out.psd_projected = true;
    out.min_eigenvalue = 0.0;
  }
  out.rho = rho;
  return out;
}

/// The Bell state (i|eg> + |ge>)/sqrt(2) produced by splitting a single phonon.
inline Matrix4cd bell_target_rho() {
  Eigen::Vector4cd psi;
  psi << 0.0, cdouble(1.0, 0.0), cdouble(0.0, 1.0), 0.0;
  psi /= std::sqrt(2.0);
  return psi * psi.adjoint();
}

/// Bell fidelity F = sqrt(Tr(|rho_target| . |rho|)) with elementwise moduli,
/// matching the presentation of the measured |rho| bars. Insensitive to the
/// global phase of the coherences.
inline double bell_fidelity(const DensityMatrix4& rho, const Matrix4cd& target) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) acc += std::abs(target(i, j)) * std::abs(rho.rho(j, i));
  return std::sqrt(acc);
}

/// Conventional overlap fidelity Tr(rho_target rho), reported as a secondary figure.
inline double trace_fidelity(const DensityMatrix4& rho, const Matrix4cd& target) {
  return (target * rho.rho).trace().real();
}

/// Least-squares cosine fit a + b cos(phi - phi0); visibility = b/a.
inline double fringe_visibility(const std::vector<double>& phases,
                                const std::vector<double>& values) {
  if (phases.size() != values.size() || phases.size() < 8)
    throw ParameterError("fringe_visibility: need at least 8 samples");
  const auto [mn, mx] = std::minmax_element(phases.begin(), phases.end());
  if (*mx - *mn < 2.0 * std::numbers::pi - 1e-9)
    throw ParameterError("fringe_visibility: phases must span at least 2 pi");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(phases.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < phases.size(); ++k) {
    m(static_cast<Eigen::Index>(k), 0) = 1.0;
    m(static_cast<Eigen::Index>(k), 1) = std::cos(phases[k]);
    m(static_cast<Eigen::Index>(k), 2) = std::sin(phases[k]);
    y[static_cast<Eigen::Index>(k)] = values[k];
  }
  const Eigen::Vector3d fit = (m.transpose() * m).ldlt().solve(m.transpose() * y);
  const double a = fit[0];
  const double b = std::hypot(fit[1], fit[2]);
  if (!(a > 0.0)) throw ParameterError("fringe_visibility: degenerate fit, a <= 0");
  return b / a;
}

/// Dip visibility (plateau - min)/plateau. The plateau is the mean of the samples
/// with |tau| above 5 max(sigma1, sigma2).
inline double dip_visibility(const std::vector<double>& delays,
                             const std::vector<double>& values, double sigma_max) {
  if (delays.size() != values.size() || delays.empty())
    throw ParameterError("dip_visibility: need matching nonempty samples");
  double plateau = 0.0;
  int n_plateau = 0;
  for (std::size_t k = 0; k < delays.size(); ++k) {
    if (std::abs(delays[k]) > 5.0 * sigma_max) {
      plateau += values[k];
      ++n_plateau;
    }
  }
  if (n_plateau == 0)
    throw ParameterError("dip_visibility: no plateau samples beyond 5 sigma");
  plateau /= n_plateau;
  const double vmin = *std::min_element(values.begin(), values.end());
  if (!(plateau > 0.0)) throw ParameterError("dip_visibility: zero plateau");
  return (plateau - vmin) / plateau;
}

/// Linear-interpolated full width at half maximum of a single dip or peak
/// relative to the given baseline.
inline double fwhm(const std::vector<double>& xs, const std::vector<double>& ys,
                   double baseline) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw ParameterError("fwhm: need at least 3 samples");
  std::size_t ext = 0;
  for (std::size_t k = 1; k < ys.size(); ++k)
    if (std::abs(ys[k] - baseline) > std::abs(ys[ext] - baseline)) ext = k;
  const double half = 0.5 * (baseline + ys[ext]);
  const bool dip = ys[ext] < baseline;

  auto crossing = [&](std::size_t from, int step) -> double {
    std::size_t k = from;
    while (true) {
      const auto next = static_cast<std::ptrdiff_t>(k) + step;
      if (next < 0 || next >= static_cast<std::ptrdiff_t>(ys.size()))
        throw ParameterError("fwhm: no half-level crossing on one flank");
      const auto kn = static_cast<std::size_t>(next);
      const bool below_k = dip ? ys[k] < half : ys[k] > half;
      const bool below_n = dip ? ys[kn] < half : ys[kn] > half;
      if (below_k && !below_n) {
        const double f = (half - ys[k]) / (ys[kn] - ys[k]);
        return xs[k] + f * (xs[kn] - xs[k]);
      }
      k = kn;
    }
  };

  const double left = crossing(ext, -1);
  const double right = crossing(ext, +1);
  return std::abs(right - left);
}

/// Row-major CSV of a complex 4x4 matrix as re/im column pairs.
inline void write_density_csv(const Matrix4cd& rho, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("write_density_csv: cannot open " + path);
  os.precision(17);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j) os << ',';
      os << rho(i, j).real() << ',' << rho(i, j).imag();
    }
    os << '\n';
  }
}

inline Matrix4cd read_density_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_density_csv: cannot open " + path);
  Matrix4cd rho;
  std::string line;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(is, line)) throw IoError("read_density_csv: truncated file");
    std::istringstream ls(line);
    std::string tok;
    for (int j = 0; j < 4; ++j) {
      double re, im;
      if (!std::getline(ls, tok, ',')) throw IoError("read_density_csv: short row");
      re = std::stod(tok);
      if (!std::getline(ls, tok, ',')) throw IoError("read_density_csv: short row");
      im = std::stod(tok);
      rho(i, j) = {re, im};
    }
  }
  return rho;
}

} // namespace lmqc
