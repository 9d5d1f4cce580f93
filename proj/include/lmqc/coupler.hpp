// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <sstream>

#include "lmqc/qubit.hpp"
#include "lmqc/wavepacket.hpp"

namespace lmqc {

using VectorXd = Eigen::VectorXd;

/// Default coupler cap: the fastest calibrated emission time is 14 ns.
inline constexpr double kDefaultKappaMax = 1.0 / 14.0; // ns^-1

/// Sampled time-dependent qubit-channel coupling rate, capped at kappa_max.
struct CouplerSchedule {
  TimeGrid grid;
  VectorXd kappa;     // ns^-1, >= 0
  double kappa_max = kDefaultKappaMax;

  CouplerSchedule(TimeGrid g, VectorXd k, double kmax)
      : grid(g), kappa(std::move(k)), kappa_max(kmax) {
    if (kappa.size() != grid.n_samples)
      throw ParameterError("CouplerSchedule: kappa length does not match grid");
    if (!(kappa_max > 0.0)) throw ParameterError("CouplerSchedule: kappa_max must be > 0");
    for (Eigen::Index i = 0; i < kappa.size(); ++i)
      if (kappa[i] < 0.0 || kappa[i] > kappa_max * (1.0 + 1e-12))
        throw ParameterError("CouplerSchedule: kappa outside [0, kappa_max]");
  }

  double total_integral() const { return kappa.sum() * grid.dt; }
};

namespace detail {

inline void require_real_envelope(const Wavepacket& phi, const char* who) {
  double max_im = 0.0, max_abs = 0.0;
  for (Eigen::Index k = 0; k < phi.amplitude().size(); ++k) {
    max_im = std::max(max_im, std::abs(phi.amplitude()[k].imag()));
    max_abs = std::max(max_abs, std::abs(phi.amplitude()[k]));
  }
  if (max_im > 1e-9 * max_abs)
    throw ParameterError(std::string(who) +
                         ": needs a real envelope (apply detuning after shaping)");
}

} // namespace detail

/// Coupling schedule that releases the target packet:
///   kappa(t) = |phi(t)|^2 / integral_t^inf |phi|^2,
/// clipped at kappa_max; the clipped tail is truncated where the remaining
/// population under the schedule falls below 1e-4. If more than 10% of the packet
/// cannot be emitted inside the grid window the schedule is rejected, with the
/// achievable fidelity reported.
inline CouplerSchedule kappa_for_emission(const Wavepacket& phi, double kappa_max) {
  if (!(kappa_max > 0.0)) throw ParameterError("kappa_for_emission: kappa_max must be > 0");
  detail::require_real_envelope(phi, "kappa_for_emission");
  const TimeGrid& g = phi.grid();
  const auto n = g.n_samples;

  // trapezoidal suffix sums of |phi|^2 dt (remaining target population from t_k on)
  VectorXd rem(n);
  double acc = 0.0;
  for (std::int64_t k = n - 1; k >= 0; --k) {
    const double cell = std::norm(phi.amplitude()[k]) * g.dt;
    rem[k] = acc + 0.5 * cell;
    acc += cell;
  }

  VectorXd kappa(n);
  double integral = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double p2 = std::norm(phi.amplitude()[k]);
    double kap = (rem[k] > 1e-300) ? p2 / rem[k] : kappa_max;
    kap = std::min(kap, kappa_max);
    if (std::exp(-integral) < 1e-4) kap = 0.0; // truncate the clipped tail
    kappa[k] = kap;
    integral += kap * g.dt;
  }

  const double emitted = 1.0 - std::exp(-integral);
  if (emitted < 0.9) {
    // achievable fidelity diagnostic: overlap of what this schedule can emit
    VectorXd psi(n);
    double i2 = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      psi[k] = std::sqrt(kappa[k]) * std::exp(-0.5 * (i2 + 0.5 * kappa[k] * g.dt));
      i2 += kappa[k] * g.dt;
    }
    const double pn = psi.norm() * std::sqrt(g.dt);
    double ov = 0.0;
    for (std::int64_t k = 0; k < n; ++k)
      ov += psi[k] * std::abs(phi.amplitude()[k]) * g.dt;
    std::ostringstream msg;
    msg << "kappa_for_emission: kappa_max too small, only " << emitted
        << " of the packet can be emitted in the window (achievable fidelity "
        << (pn > 0 ? ov / pn : 0.0) << ")";
    throw ParameterError(msg.str());
  }
  return CouplerSchedule(g, std::move(kappa), kappa_max);
}

/// Time-reversed rule for catching the packet:
///   kappa(t) = |phi(t)|^2 / integral_-inf^t |phi|^2,
/// clipped at kappa_max; the clipped head is truncated where the absorbable-mode
/// weight ahead of it falls below 1e-4.
inline CouplerSchedule kappa_for_catch(const Wavepacket& phi, double kappa_max) {
  if (!(kappa_max > 0.0)) throw ParameterError("kappa_for_catch: kappa_max must be > 0");
  detail::require_real_envelope(phi, "kappa_for_catch");
  const TimeGrid& g = phi.grid();
  const auto n = g.n_samples;

  VectorXd cum(n);
  double acc = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double cell = std::norm(phi.amplitude()[k]) * g.dt;
    cum[k] = acc + 0.5 * cell;
    acc += cell;
  }

  VectorXd kappa(n);
  for (std::int64_t k = 0; k < n; ++k) {
    const double p2 = std::norm(phi.amplitude()[k]);
    kappa[k] = std::min((cum[k] > 1e-300) ? p2 / cum[k] : kappa_max, kappa_max);
  }
  // truncate the clipped head: suffix integral of kappa beyond ln(1e4) absorbs
  // less than 1e-4 of the mode
  double suffix = 0.0;
  for (std::int64_t k = n - 1; k >= 0; --k) {
    if (suffix > std::log(1e4)) kappa[k] = 0.0;
    suffix += kappa[k] * g.dt;
  }
  const double total = kappa.sum() * g.dt;
  if (!(total > std::log(10.0)))
    throw ParameterError("kappa_for_catch: kappa_max too small to absorb the packet");
  return CouplerSchedule(g, std::move(kappa), kappa_max);
}

struct EmissionResult {
  Wavepacket waveform;      // renormalized emitted mode
  double emitted_fraction;  // 1 - exp(-integral kappa dt)
};

/// Single-excitation solution of decay with a time-dependent rate:
///   phi(t) = sqrt(kappa(t)) exp(-1/2 integral_t0^t kappa).
inline EmissionResult emitted_waveform(const CouplerSchedule& schedule) {
  const TimeGrid& g = schedule.grid;
  const auto n = g.n_samples;
  VectorXcd psi(n);
  double integral = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double kap = schedule.kappa[k];
    psi[k] = std::sqrt(kap) * std::exp(-0.5 * (integral + 0.5 * kap * g.dt));
    integral += kap * g.dt;
  }
  const double fraction = 1.0 - std::exp(-integral);
  if (fraction < 1e-12) throw ParameterError("emitted_waveform: schedule emits nothing");
  return {Wavepacket(g, std::move(psi)).normalized(), fraction};
}

/// Mode a catch schedule absorbs perfectly:
///   psi(t) = sqrt(kappa(t)) exp(-1/2 integral_t^end kappa)
/// (the time reverse of the emission solution).
inline EmissionResult absorbable_mode(const CouplerSchedule& schedule) {
  const TimeGrid& g = schedule.grid;
  const auto n = g.n_samples;
  VectorXcd psi(n);
  double suffix = 0.0;
  for (std::int64_t k = n - 1; k >= 0; --k) {
    const double kap = schedule.kappa[k];
    psi[k] = std::sqrt(kap) * std::exp(-0.5 * (suffix + 0.5 * kap * g.dt));
    suffix += kap * g.dt;
  }
  const double fraction = 1.0 - std::exp(-suffix);
  if (fraction < 1e-12) throw ParameterError("absorbable_mode: schedule absorbs nothing");
  return {Wavepacket(g, std::move(psi)).normalized(), fraction};
}

/// Single-excitation emission bookkeeping including qubit decay and dephasing.
struct EmissionDynamics {
  VectorXd population;       // P_e(t)
  double transmitted = 0.0;  // probability emitted into the channel
  Wavepacket coherent_mode;  // normalized coherent part of the emitted field
  double coherent_weight = 0.0;
};

/// Integrates P' = -(kappa + gamma1) P and the coherent amplitude
/// beta' = -((kappa + gamma1 + gamma_phi)/2) beta. The coherent emitted field is
/// sqrt(kappa) beta; dephased or relaxed amplitude is booked as loss.
/// The excitation pulse lands shortly before the release window opens, so the
/// intrinsic rates act only from then on.
inline EmissionDynamics emit_dynamics(const CouplerSchedule& schedule,
                                      const QubitParams& qubit,
                                      double initial_population = 1.0,
                                      double excitation_lead_ns = 20.0) {
  qubit.validate();
  const TimeGrid& g = schedule.grid;
  const auto n = g.n_samples;
  const double g1 = qubit.gamma1_per_ns();
  const double gphi = qubit.gamma_phi_per_ns();

  std::int64_t first_on = 0;
  for (std::int64_t k = 0; k < n; ++k)
    if (schedule.kappa[k] > 1e-3 * schedule.kappa_max) {
      first_on = k;
      break;
    }
  const auto excite_k = std::max<std::int64_t>(
      0, first_on - static_cast<std::int64_t>(excitation_lead_ns / g.dt));

  EmissionDynamics out{VectorXd(n), 0.0, Wavepacket(g, VectorXcd::Zero(n)), 0.0};
  double p = initial_population;
  double beta = std::sqrt(initial_population);
  VectorXcd mode(n);
  double transmitted = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (k < excite_k) {
      out.population[k] = 0.0;
      mode[k] = 0.0;
      continue;
    }
    const double kap = schedule.kappa[k];
    out.population[k] = p;
    // midpoint sampling keeps the emitted-fraction integral second-order accurate
    mode[k] = std::sqrt(kap) * beta * std::exp(-0.25 * (kap + g1 + gphi) * g.dt);
    transmitted += kap * p * std::exp(-0.5 * (kap + g1) * g.dt) * g.dt;
    // exact exponential step for the linear rates
    p *= std::exp(-(kap + g1) * g.dt);
    beta *= std::exp(-0.5 * (kap + g1 + gphi) * g.dt);
  }
  out.transmitted = transmitted;
  Wavepacket coh(g, std::move(mode));
  out.coherent_weight = coh.norm_squared();
  if (out.coherent_weight > 1e-12) out.coherent_mode = coh.normalized();
  return out;
}

/// Single-photon capture bookkeeping. The incoming field drives the coherent qubit
/// amplitude through the catch schedule; dephasing converts coherent amplitude into
/// excited population that no longer interferes with the field but stays captured
/// until it relaxes or leaks back through the coupler. `incoming` need not be
/// normalized (its norm is the occupation probability of the mode).
struct CaptureDynamics {
  VectorXd population;   // |beta(t)|^2 + incoherent part
  VectorXcd amplitudes;  // coherent amplitude beta(t)
  double captured = 0.0; // total excited population at the end of the window
  cdouble amplitude{0.0, 0.0}; // final coherent amplitude
};

inline CaptureDynamics capture_dynamics(const CouplerSchedule& schedule,
                                        const QubitParams& qubit,
                                        const Wavepacket& incoming) {
  qubit.validate();
  if (incoming.grid() != schedule.grid)
    throw ParameterError("capture_dynamics: incoming packet grid mismatch");
  const TimeGrid& g = schedule.grid;
  const auto n = g.n_samples;
  const double g1 = qubit.gamma1_per_ns();
  const double gphi = qubit.gamma_phi_per_ns();

  CaptureDynamics out{VectorXd(n), VectorXcd(n), 0.0, {0.0, 0.0}};
  cdouble beta(0.0, 0.0);
  double p_inc = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double kap = schedule.kappa[k];
    const double decay = 0.5 * (kap + g1 + gphi);
    const cdouble drive = -std::sqrt(kap) * std::conj(incoming.amplitude()[k]);
    // beta' = -decay beta + drive, exponential integrator step
    const double e = std::exp(-decay * g.dt);
    cdouble beta_next;
    if (decay > 1e-14) {
      beta_next = beta * e + drive * (1.0 - e) / decay;
    } else {
      beta_next = beta + drive * g.dt;
    }
    // p_inc' = gphi |beta|^2 - (kappa + g1) p_inc
    p_inc += (gphi * std::norm(beta) - (kap + g1) * p_inc) * g.dt;
    beta = beta_next;
    out.amplitudes[k] = beta;
    out.population[k] = std::norm(beta) + p_inc;
  }
  out.captured = std::norm(beta) + p_inc;
  out.amplitude = beta;
  return out;
}

} // namespace lmqc
