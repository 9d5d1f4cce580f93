// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "lmqc/errors.hpp"

namespace lmqc {

/// Transmon working point. Times in microseconds, frequency in GHz.
/// The pure-dephasing Lindblad rate is derived from the spin-echo time by default:
/// over the sub-microsecond single-shot sequences simulated here, the quasistatic
/// (Ramsey) component contributes a quadratic phase spread that an exponential
/// Lindblad term would grossly overstate.
struct QubitParams {
  double f_op_ghz = 3.925;
  double t1_us = 25.0;
  double t2_ramsey_us = 3.0;
  double t2_echo_us = 10.0;

  void validate() const {
    if (!(t1_us > 0.0)) throw ParameterError("QubitParams: T1 must be > 0");
    if (!(t2_ramsey_us > 0.0) || !(t2_echo_us > 0.0))
      throw ParameterError("QubitParams: T2 must be > 0");
    if (t2_ramsey_us > 2.0 * t1_us + 1e-12)
      throw ParameterError("QubitParams: T2_ramsey exceeds 2 T1");
    if (gamma_phi_ramsey_per_ns() < -1e-15 || gamma_phi_echo_per_ns() < -1e-15)
      throw ParameterError("QubitParams: negative pure-dephasing rate");
  }

  double gamma1_per_ns() const { return 1.0 / (t1_us * 1e3); }
  double gamma_phi_ramsey_per_ns() const {
    return std::max(0.0, 1.0 / (t2_ramsey_us * 1e3) - 0.5 * gamma1_per_ns());
  }
  double gamma_phi_echo_per_ns() const {
    return std::max(0.0, 1.0 / (t2_echo_us * 1e3) - 0.5 * gamma1_per_ns());
  }
  /// Rate used by the simulations.
  double gamma_phi_per_ns() const { return gamma_phi_echo_per_ns(); }
};

/// Device values for the two qubits.
inline QubitParams qubit1_defaults() { return {3.925, 26.7, 3.0, 11.2}; }
inline QubitParams qubit2_defaults() { return {3.925, 22.0, 3.4, 9.4}; }

/// One-way travel times between each qubit and the beamsplitter plus the lumped
/// itinerant-phonon lifetime. The defaults halve the observed round-trip echoes
/// at 0.45 us and 0.6 us.
struct ChannelGeometry {
  double t_travel_1_us = 0.225;
  double t_travel_2_us = 0.30;
  double tau_ph_us = 1.3;

  void validate() const {
    if (!(t_travel_1_us > 0.0) || !(t_travel_2_us > 0.0) || !(tau_ph_us > 0.0))
      throw ParameterError("ChannelGeometry: all times must be positive");
  }

  /// Probability that a phonon survives `t_us` of itinerant travel.
  double survival(double t_us) const { return std::exp(-t_us / tau_ph_us); }
  double survival_leg1() const { return survival(t_travel_1_us); }
  double survival_leg2() const { return survival(t_travel_2_us); }
};

} // namespace lmqc
