// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <map>
#include <vector>

#include "lmqc/errors.hpp"
#include "lmqc/wavepacket.hpp"

namespace lmqc {

using MatrixXcd = Eigen::MatrixXcd;

/// Occupation-number basis for m bosonic modes truncated at total occupation n_max.
/// States are occupation vectors (n_0, ..., n_{m-1}) with sum n_i <= n_max, ordered
/// by total occupation, then lexicographically.
class FockBasis {
public:
  FockBasis(int n_modes, int n_max) : n_modes_(n_modes), n_max_(n_max) {
    if (n_modes < 1 || n_max < 0) throw ParameterError("FockBasis: bad dimensions");
    std::vector<int> occ(static_cast<std::size_t>(n_modes), 0);
    for (int total = 0; total <= n_max; ++total) enumerate(occ, 0, total);
    for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = i;
  }

  int n_modes() const { return n_modes_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<int>& state(std::size_t i) const { return states_[i]; }

  std::size_t index(const std::vector<int>& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) throw ParameterError("FockBasis: state outside truncation");
    return it->second;
  }

  bool operator==(const FockBasis& o) const {
    return n_modes_ == o.n_modes_ && n_max_ == o.n_max_;
  }

private:
  void enumerate(std::vector<int>& occ, int mode, int remaining) {
    if (mode == n_modes_ - 1) {
      occ[static_cast<std::size_t>(mode)] = remaining;
      states_.push_back(occ);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      occ[static_cast<std::size_t>(mode)] = k;
      enumerate(occ, mode + 1, remaining - k);
    }
  }

  int n_modes_;
  int n_max_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, std::size_t> index_;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

} // namespace detail

/// Lift an m x m single-particle mode transformation U to the truncated Fock space:
/// a_i^dag -> sum_k U_{ki} a_k^dag applied to each basis monomial.
inline MatrixXcd fock_lift(const FockBasis& basis, const MatrixXcd& u) {
  const int m = basis.n_modes();
  if (u.rows() != m || u.cols() != m) throw ParameterError("fock_lift: wrong U size");
  const auto dim = basis.size();
  MatrixXcd out = MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                  static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    const auto& occ = basis.state(col);
    // Expand prod_i (sum_k U_{ki} a_k^dag)^{n_i} |0> as monomial -> coefficient.
    std::map<std::vector<int>, cdouble> terms;
    terms[std::vector<int>(static_cast<std::size_t>(m), 0)] = cdouble(1.0, 0.0);
    double src_norm = 1.0;
    for (int i = 0; i < m; ++i) {
      const int ni = occ[static_cast<std::size_t>(i)];
      src_norm *= detail::factorial(ni);
      for (int rep = 0; rep < ni; ++rep) {
        std::map<std::vector<int>, cdouble> next;
        for (const auto& [mono, c] : terms) {
          for (int k = 0; k < m; ++k) {
            if (u(k, i) == cdouble(0.0, 0.0)) continue;
            std::vector<int> mk = mono;
            ++mk[static_cast<std::size_t>(k)];
            next[mk] += c * u(k, i);
          }
        }
        terms = std::move(next);
      }
    }
    // Monomial prod (a_k^dag)^{p_k}|0> = prod sqrt(p_k!) |p>.
    for (const auto& [mono, c] : terms) {
      double mono_norm = 1.0;
      for (int k = 0; k < m; ++k) mono_norm *= detail::factorial(mono[static_cast<std::size_t>(k)]);
      out(static_cast<Eigen::Index>(basis.index(mono)), static_cast<Eigen::Index>(col)) +=
          c * std::sqrt(mono_norm) / std::sqrt(src_norm);
    }
  }
  return out;
}

/// Density operator over a truncated few-mode Fock space.
class FockDensity {
public:
  FockDensity(FockBasis basis, MatrixXcd rho) : basis_(std::move(basis)), rho_(std::move(rho)) {
    if (rho_.rows() != static_cast<Eigen::Index>(basis_.size()) || rho_.rows() != rho_.cols())
      throw ParameterError("FockDensity: matrix does not match basis");
  }

  static FockDensity vacuum(const FockBasis& basis) {
    MatrixXcd rho = MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()),
                                    static_cast<Eigen::Index>(basis.size()));
    rho(0, 0) = 1.0;
    return FockDensity(basis, std::move(rho));
  }

  static FockDensity pure(const FockBasis& basis, const VectorXcd& psi) {
    if (psi.size() != static_cast<Eigen::Index>(basis.size()))
      throw ParameterError("FockDensity::pure: wrong vector size");
    return FockDensity(basis, psi * psi.adjoint());
  }

  static FockDensity fock_state(const FockBasis& basis, const std::vector<int>& occ) {
    VectorXcd psi = VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    psi[static_cast<Eigen::Index>(basis.index(occ))] = 1.0;
    return pure(basis, psi);
  }

  const FockBasis& basis() const { return basis_; }
  const MatrixXcd& matrix() const { return rho_; }
  MatrixXcd& matrix() { return rho_; }

  double trace() const { return rho_.trace().real(); }

  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es((rho_ + rho_.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
  }

  /// Conjugate by the Fock lift of a single-particle mode matrix.
  FockDensity transformed(const MatrixXcd& mode_matrix) const {
    const MatrixXcd uf = fock_lift(basis_, mode_matrix);
    return FockDensity(basis_, uf * rho_ * uf.adjoint());
  }

  /// Amplitude damping of one mode: transmission amplitude sqrt(s), environment
  /// traced out. Kraus elements lose j quanta with binomial weights.
  FockDensity damped(int mode, double survival) const {
    if (survival < 0.0 || survival > 1.0)
      throw ParameterError("FockDensity::damped: survival outside [0,1]");
    const auto dim = static_cast<Eigen::Index>(basis_.size());
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (int j = 0; j <= basis_.n_max(); ++j) {
      MatrixXcd kraus = MatrixXcd::Zero(dim, dim);
      bool nonzero = false;
      for (std::size_t col = 0; col < basis_.size(); ++col) {
        const auto& occ = basis_.state(col);
        const int n = occ[static_cast<std::size_t>(mode)];
        if (j > n) continue;
        std::vector<int> tgt = occ;
        tgt[static_cast<std::size_t>(mode)] = n - j;
        const double binom = detail::factorial(n) /
                             (detail::factorial(j) * detail::factorial(n - j));
        const double w = std::sqrt(binom * std::pow(survival, n - j) *
                                   std::pow(1.0 - survival, j));
        if (w == 0.0) continue;
        kraus(static_cast<Eigen::Index>(basis_.index(tgt)),
              static_cast<Eigen::Index>(col)) = w;
        nonzero = true;
      }
      if (nonzero) out += kraus * rho_ * kraus.adjoint();
    }
    return FockDensity(basis_, std::move(out));
  }

  /// Probability of the exact occupation vector.
  double probability(const std::vector<int>& occ) const {
    const auto i = static_cast<Eigen::Index>(basis_.index(occ));
    return rho_(i, i).real();
  }

  /// Expected occupation of one mode.
  double mean_occupation(int mode) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      acc += basis_.state(i)[static_cast<std::size_t>(mode)] * rho_(static_cast<Eigen::Index>(i),
                                                                    static_cast<Eigen::Index>(i)).real();
    return acc;
  }

private:
  FockBasis basis_;
  MatrixXcd rho_;
};

} // namespace lmqc
