// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numbers>
#include <vector>

#include "lmqc/wavepacket.hpp"

namespace lmqc {

/// Spectral amplitude Phi(omega) = integral phi(t) exp(-i omega t) dt, sampled on an
/// ascending angular-frequency axis (rad/ns). Parseval: sum |Phi|^2 domega/(2 pi) = 1.
struct SpectralAmplitude {
  std::vector<double> frequencies; // rad/ns, uniform and ascending
  VectorXcd amplitude;

  double d_omega() const {
    if (frequencies.size() < 2) throw ParameterError("SpectralAmplitude: too short");
    return frequencies[1] - frequencies[0];
  }

  double norm_squared() const {
    return amplitude.squaredNorm() * d_omega() / (2.0 * std::numbers::pi);
  }
};

/// Discrete Fourier transform of a packet with grid-consistent frequency axis.
/// The transform is zero-padded to a power of two; this refines the frequency
/// sampling without changing the underlying continuous transform.
inline SpectralAmplitude spectrum(const Wavepacket& p) {
  const TimeGrid& g = p.grid();
  const std::int64_t np = detail::next_pow2(g.n_samples);
  std::vector<cdouble> buf(static_cast<std::size_t>(np), cdouble(0.0, 0.0));
  for (std::int64_t k = 0; k < g.n_samples; ++k)
    buf[static_cast<std::size_t>(k)] = p.amplitude()[k];
  detail::fft_radix2(buf, -1);

  SpectralAmplitude out;
  out.frequencies.resize(static_cast<std::size_t>(np));
  out.amplitude.resize(np);
  const double dw = 2.0 * std::numbers::pi / (static_cast<double>(np) * g.dt);
  // fftshift so the axis ascends from -pi/dt
  for (std::int64_t i = 0; i < np; ++i) {
    const std::int64_t j = i - np / 2;                  // signed frequency index
    const std::int64_t src = (j + np) % np;             // position in DFT output
    const double w = static_cast<double>(j) * dw;
    out.frequencies[static_cast<std::size_t>(i)] = w;
    // Phi(w) = dt * exp(-i w t_start) * DFT[src]
    const cdouble ph(std::cos(w * g.t_start), -std::sin(w * g.t_start));
    out.amplitude[i] = g.dt * ph * buf[static_cast<std::size_t>(src)];
  }
  return out;
}

/// Overlap of two spectra with a relative-delay phase:
///   integral dw/(2 pi) conj(Phi1) Phi2 exp(+i w tau),
/// which equals the time-domain overlap(delayed(phi1, tau), phi2).
inline cdouble spectral_overlap(const SpectralAmplitude& s1, const SpectralAmplitude& s2,
                                double tau = 0.0) {
  if (s1.frequencies.size() != s2.frequencies.size() ||
      std::abs(s1.frequencies.front() - s2.frequencies.front()) > 1e-12 ||
      std::abs(s1.d_omega() - s2.d_omega()) > 1e-15)
    throw ParameterError("spectral_overlap: incompatible frequency axes");
  cdouble acc(0.0, 0.0);
  for (std::int64_t i = 0; i < s1.amplitude.size(); ++i) {
    const double w = s1.frequencies[static_cast<std::size_t>(i)];
    const cdouble ph(std::cos(w * tau), std::sin(w * tau));
    acc += std::conj(s1.amplitude[i]) * s2.amplitude[i] * ph;
  }
  return acc * s1.d_omega() / (2.0 * std::numbers::pi);
}

} // namespace lmqc
