// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "lmqc/beamsplitter.hpp"
#include "lmqc/fock.hpp"
#include "lmqc/wavepacket.hpp"

namespace lmqc::oracle {

/// Analytic packet descriptor for quadrature references. Supported families cover
/// everything the tests need: sech, Gaussian, and weighted time-bin combinations.
struct AnalyticPacket {
  enum class Family { kSech, kGaussian };

  struct Lobe {
    Family family = Family::kSech;
    double sigma = 1.0;    // ns; Gaussian sigma is the standard deviation
    double center = 0.0;   // ns
    cdouble weight{1.0, 0.0};
  };

  std::vector<Lobe> lobes;
  double detuning_mhz = 0.0; // multiplies by exp(-i 2 pi df t)

  static AnalyticPacket sech(double sigma, double center = 0.0) {
    AnalyticPacket p;
    p.lobes.push_back({Family::kSech, sigma, center, cdouble(1.0, 0.0)});
    return p;
  }

  static AnalyticPacket gaussian(double sigma, double center = 0.0) {
    AnalyticPacket p;
    p.lobes.push_back({Family::kGaussian, sigma, center, cdouble(1.0, 0.0)});
    return p;
  }

  cdouble value(double t) const {
    cdouble acc(0.0, 0.0);
    for (const auto& l : lobes) {
      double env;
      if (l.family == Family::kSech) {
        env = 1.0 / (std::cosh((t - l.center) / (2.0 * l.sigma)) * std::sqrt(4.0 * l.sigma));
      } else {
        const double x = (t - l.center) / l.sigma;
        env = std::exp(-0.25 * x * x) /
              std::sqrt(l.sigma * std::sqrt(2.0 * std::numbers::pi));
      }
      acc += l.weight * env;
    }
    if (detuning_mhz != 0.0) {
      const double w = 2.0 * std::numbers::pi * detuning_mhz * 1e-3;
      acc *= cdouble(std::cos(w * t), -std::sin(w * t));
    }
    return acc;
  }

  /// Support half-width that bounds the integrand tails below 1e-14.
  double support_halfwidth() const {
    double lo = 1e300, hi = -1e300;
    for (const auto& l : lobes) {
      const double ext = (l.family == Family::kSech) ? 70.0 * l.sigma : 10.0 * l.sigma;
      lo = std::min(lo, l.center - ext);
      hi = std::max(hi, l.center + ext);
    }
    return std::max(std::abs(lo), std::abs(hi));
  }
};

namespace detail {

inline cdouble simpson(double a, double b, cdouble fa, cdouble fm, cdouble fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline cdouble adaptive_simpson(const std::function<cdouble(double)>& f, double a, double b,
                                cdouble fa, cdouble fm, cdouble fb, cdouble whole,
                                double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const cdouble flm = f(lm), frm = f(rm);
  const cdouble left = simpson(a, m, fa, flm, fm);
  const cdouble right = simpson(m, b, fm, frm, fb);
  const cdouble delta = left + right - whole;
  if (depth <= 0) throw NumericalError("quadrature_overlap: did not converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline cdouble integrate(const std::function<cdouble(double)>& f, double a, double b,
                         double tol) {
  // split into segments so narrow features are not skipped by the first probe
  const int segments = 64;
  cdouble acc(0.0, 0.0);
  const double h = (b - a) / segments;
  for (int s = 0; s < segments; ++s) {
    const double sa = a + s * h, sb = sa + h, sm = 0.5 * (sa + sb);
    const cdouble fa = f(sa), fm = f(sm), fb = f(sb);
    acc += adaptive_simpson(f, sa, sb, fa, fm, fb, simpson(sa, sb, fa, fm, fb),
                            tol / segments, 48);
  }
  return acc;
}

} // namespace detail

/// Reference overlap integral <f|g> = integral conj(f) g dt by adaptive quadrature
/// to ~1e-10 relative tolerance, independent of any grid discretization.
inline cdouble quadrature_overlap(const AnalyticPacket& f, const AnalyticPacket& g) {
  const double half = std::max(f.support_halfwidth(), g.support_halfwidth());
  const auto integrand = [&](double t) { return std::conj(f.value(t)) * g.value(t); };
  const cdouble raw = detail::integrate(integrand, -half, half, 1e-12);
  // normalize by the packets' own quadrature norms so analytic prefactors drop out
  const auto nf = detail::integrate([&](double t) {
                    return cdouble(std::norm(f.value(t)), 0.0);
                  }, -half, half, 1e-12).real();
  const auto ng = detail::integrate([&](double t) {
                    return cdouble(std::norm(g.value(t)), 0.0);
                  }, -half, half, 1e-12).real();
  return raw / std::sqrt(nf * ng);
}

/// Exhaustive Fock-space computation of the two-phonon coincidence probability with
/// nonorthogonal temporal modes. Independent of the closed-form Eq. route: it
/// Gram-Schmidts the delayed pair into <= 2 orthonormal temporal modes, lifts the
/// beamsplitter to the 4-mode (2 spatial x 2 temporal) Fock space, and sums the
/// probability of exactly one phonon on each spatial side.
inline double brute_force_p11(const Wavepacket& phi1, const Wavepacket& phi2, double tau,
                              double eta) {
  const Wavepacket d1 = delayed(phi1, tau);
  const cdouble o = overlap(d1, phi2) / std::sqrt(d1.norm_squared() * phi2.norm_squared());
  const double rest2 = std::max(0.0, 1.0 - std::norm(o));

  const Beamsplitter bs(eta); // paper phase convention
  const MatrixXcd u2 = bs_mode_matrix(bs);

  if (rest2 < 1e-24) {
    // degenerate pair: both photons share one temporal mode
    FockBasis basis(2, 2);
    VectorXcd psi = VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    psi[static_cast<Eigen::Index>(basis.index({1, 1}))] = 1.0;
    const FockDensity out = FockDensity::pure(basis, psi).transformed(u2);
    return out.probability({1, 1});
  }

  // orthonormal temporal modes e1 = d1, e2 = (phi2 - o e1)/sqrt(1-|o|^2);
  // spatial A carries (1, 0), spatial B carries (o, sqrt(1-|o|^2)).
  const double c2 = std::sqrt(rest2);
  // mode order: (A,e1), (A,e2), (B,e1), (B,e2)
  FockBasis basis(4, 2);
  MatrixXcd u4 = MatrixXcd::Zero(4, 4);
  for (int te = 0; te < 2; ++te)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) u4(2 * s1 + te, 2 * s2 + te) = u2(s1, s2);

  // input state a^dag_{A,e1} (o b^dag_{B,e1} + c2 b^dag_{B,e2}) |0>
  VectorXcd psi = VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  psi[static_cast<Eigen::Index>(basis.index({1, 0, 1, 0}))] = o;
  psi[static_cast<Eigen::Index>(basis.index({1, 0, 0, 1}))] = c2;

  const FockDensity out = FockDensity::pure(basis, psi).transformed(u4);
  double p11 = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& occ = basis.state(i);
    const int na = occ[0] + occ[1];
    const int nb = occ[2] + occ[3];
    if (na == 1 && nb == 1)
      p11 += out.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  }
  return p11;
}

/// Binomial loss reference by explicit environment-mode construction: couple the
/// channel to a vacuum ancilla through a beamsplitter of transmission = survival,
/// then trace the ancilla. Returns the occupation distribution {k: P(k)}.
inline std::map<int, double> loss_trace_oracle(int n, double survival) {
  if (n < 0) throw ParameterError("loss_trace_oracle: negative occupation");
  if (survival < 0.0 || survival > 1.0)
    throw ParameterError("loss_trace_oracle: survival outside [0,1]");
  FockBasis basis(2, n); // (channel, ancilla)
  MatrixXcd u(2, 2);
  const double t = std::sqrt(survival), r = std::sqrt(1.0 - survival);
  u << t, -r, r, t;
  const FockDensity out = FockDensity::fock_state(basis, {n, 0}).transformed(u);
  std::map<int, double> dist;
  for (int k = 0; k <= n; ++k) {
    double p = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis.state(i)[0] == k)
        p += out.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    dist[k] = p;
  }
  return dist;
}

} // namespace lmqc::oracle
