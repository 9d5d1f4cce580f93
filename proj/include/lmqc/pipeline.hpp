// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "lmqc/beamsplitter.hpp"
#include "lmqc/cascade.hpp"
#include "lmqc/coupler.hpp"
#include "lmqc/measure.hpp"
#include "lmqc/oracle.hpp"

namespace lmqc {

/// Parameters shared by the interference experiments. Defaults reproduce the
/// device working point.
struct ExperimentParams {
  double sigma1_ns = 8.4;
  double sigma2_ns = 8.3;
  double delta_f_mhz = 0.0; // detuning applied to the second emitter
  double eta = 0.611;
  double theta_r = std::numbers::pi / 2.0;
  double kappa_max = kDefaultKappaMax;
  QubitParams q1 = qubit1_defaults();
  QubitParams q2 = qubit2_defaults();
  ChannelGeometry geometry;
  double dt_ns = 0.1;
  bool lossless = false;     // disable channel loss and qubit decoherence
  double tau_abs_max = 150.0; // largest |tau| the scan timeline must accommodate
  double hold_margin_ns = 150.0; // settle time after the last transient

  double travel1_ns() const { return geometry.t_travel_1_us * 1e3; }
  double travel2_ns() const { return geometry.t_travel_2_us * 1e3; }
  double sigma_max() const { return std::max(sigma1_ns, sigma2_ns); }

  QubitParams effective_q1() const { return lossless ? QubitParams{3.925, 1e9, 1e9, 1e9} : q1; }
  QubitParams effective_q2() const { return lossless ? QubitParams{3.925, 1e9, 1e9, 1e9} : q2; }
  double survival(double t_ns) const {
    return lossless ? 1.0 : std::exp(-t_ns / (geometry.tau_ph_us * 1e3));
  }
};

struct HomPointResult {
  double p_q1 = 0.0;
  double p_q2 = 0.0;
  double p_ee = 0.0;
  double p11_ideal = 0.0; // lossless Eq.-route coincidence of the ideal packets
};

/// P_ee proxy: alpha * P11 with the empirical scale factor.
inline double pee_proxy(double p11, double alpha = 0.265) {
  if (p11 < 0.0 || p11 > 1.0) throw ParameterError("pee_proxy: p11 outside [0,1]");
  if (!(alpha > 0.0)) throw ParameterError("pee_proxy: alpha must be > 0");
  return alpha * p11;
}

namespace pipeline_detail {

/// Orthonormal temporal basis spanning two (possibly detuned, delayed) modes.
struct TemporalBasis {
  Wavepacket e1, e2;       // orthonormal on the shared grid
  Eigen::Vector2cd c_a;    // packet A in this basis
  Eigen::Vector2cd c_b;    // packet B in this basis
  bool degenerate = false; // |overlap| ~ 1: single mode suffices
};

inline TemporalBasis gram_schmidt_pair(const Wavepacket& a, const Wavepacket& b) {
  const cdouble o = overlap(a, b) / std::sqrt(a.norm_squared() * b.norm_squared());
  const double rest2 = std::max(0.0, 1.0 - std::norm(o));
  TemporalBasis out{a.normalized(), a.normalized(), {1.0, 0.0}, {o, 0.0}, true};
  if (rest2 < 1e-24) return out;
  const double c2 = std::sqrt(rest2);
  VectorXcd e2_amp =
      (b.normalized().amplitude() - o * out.e1.amplitude()) / c2;
  out.e2 = Wavepacket(a.grid(), std::move(e2_amp));
  out.c_b = {o, c2};
  out.degenerate = false;
  return out;
}

/// Occupation-resolved capture description of one qubit. The single-phonon
/// response is E = conj(a) a^T + diag(incoherent): a rank-one coherent kernel
/// plus captured-but-dephased population that no longer interferes.
struct CaptureModel {
  Eigen::Vector2cd amp{0.0, 0.0};   // coherent capture amplitude per basis mode
  Eigen::Vector2d incoherent{0.0, 0.0};
  double p_two_same[2] = {0.0, 0.0}; // P(e | 2 phonons in basis mode m)

  Eigen::Matrix2cd response() const {
    Eigen::Matrix2cd e = amp.conjugate() * amp.transpose();
    e(0, 0) += incoherent[0];
    e(1, 1) += incoherent[1];
    return e;
  }
};

/// Final excitation probabilities for the two qubits facing the two-channel
/// output state (basis: 2 spatial x 2 temporal modes, total occupation <= 2).
struct DetectionResult {
  double p_e1 = 0.0, p_e2 = 0.0, p_ee = 0.0;
};

inline DetectionResult detect(const FockDensity& rho, const CaptureModel& m1,
                              const CaptureModel& m2) {
  const FockBasis& basis = rho.basis(); // modes (A,e1),(A,e2),(B,e1),(B,e2)
  DetectionResult out;
  const Eigen::Matrix2cd e1 = m1.response();
  const Eigen::Matrix2cd e2 = m2.response();

  auto mode_of = [](const std::vector<int>& occ, int base) {
    if (occ[base] == 1 && occ[base + 1] == 0) return 0;
    if (occ[base] == 0 && occ[base + 1] == 1) return 1;
    return -1;
  };
  auto n_a = [](const std::vector<int>& occ) { return occ[0] + occ[1]; };
  auto n_b = [](const std::vector<int>& occ) { return occ[2] + occ[3]; };

  const auto dim = basis.size();
  for (std::size_t x = 0; x < dim; ++x) {
    const auto& ox = basis.state(x);
    const int max_ = mode_of(ox, 0), mbx = mode_of(ox, 2);
    // coincidence sector: exactly one phonon on each side
    if (max_ >= 0 && mbx >= 0) {
      for (std::size_t y = 0; y < dim; ++y) {
        const auto& oy = basis.state(y);
        const int may = mode_of(oy, 0), mby = mode_of(oy, 2);
        if (may < 0 || mby < 0) continue;
        // Tr[rho E]: sum rho_xy E1(may,max) E2(mby,mbx)
        out.p_ee += (rho.matrix()(static_cast<Eigen::Index>(x),
                                  static_cast<Eigen::Index>(y)) *
                     e1(may, max_) * e2(mby, mbx))
                        .real();
      }
    }
  }

  // singles: matrix-element forms over the n=1 sectors plus saturated n=2 terms
  auto singles = [&](bool channel_a) {
    const Eigen::Matrix2cd& e = channel_a ? e1 : e2;
    const CaptureModel& m = channel_a ? m1 : m2;
    const int base = channel_a ? 0 : 2;
    double p = 0.0;
    for (std::size_t x = 0; x < dim; ++x) {
      const auto& ox = basis.state(x);
      const int n_own = channel_a ? n_a(ox) : n_b(ox);
      if (n_own == 1) {
        const int mx = mode_of(ox, base);
        for (std::size_t y = 0; y < dim; ++y) {
          const auto& oy = basis.state(y);
          const bool other_match = channel_a ? (ox[2] == oy[2] && ox[3] == oy[3])
                                             : (ox[0] == oy[0] && ox[1] == oy[1]);
          if (!other_match) continue;
          if ((channel_a ? n_a(oy) : n_b(oy)) != 1) continue;
          const int my = mode_of(oy, base);
          p += (rho.matrix()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) *
                e(my, mx))
                   .real();
        }
      } else if (n_own == 2) {
        // non-number-resolving saturation, diagonal treatment
        double cond;
        if (ox[base] == 2) {
          cond = m.p_two_same[0];
        } else if (ox[base + 1] == 2) {
          cond = m.p_two_same[1];
        } else {
          const double qa = e(0, 0).real(), qb = e(1, 1).real();
          cond = 1.0 - (1.0 - qa) * (1.0 - qb);
        }
        p += rho.matrix()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)).real() *
             cond;
      }
    }
    return p;
  };
  out.p_e1 = singles(true);
  out.p_e2 = singles(false);
  return out;
}

/// P(e | two phonons in the given incoming mode) via a small input-output cascade
/// with a three-level flying mode.
inline double two_phonon_capture_prob(const CouplerSchedule& catch_schedule,
                                      const QubitParams& qubit, const Wavepacket& mode) {
  CascadeConfig cfg;
  cfg.q1 = CascadeStage{qubit, 0.0, catch_schedule, mode, std::nullopt};
  cfg.q1->input_cavity_state = [] {
    MatrixXcd r = MatrixXcd::Zero(3, 3);
    r(2, 2) = 1.0;
    return r;
  }();
  cfg.sample_stride = 100;
  return simulate_cascade(cfg).final_p_q1;
}

} // namespace pipeline_detail

/// Full two-phonon interference point: shaped emission from both qubits, channel
/// loss, two-temporal-mode beamsplitter scattering, and matched-filter capture of
/// each qubit's own reflected packet, measured at the end of the timeline.
inline HomPointResult hom_pipeline(const ExperimentParams& p, double tau,
                                   bool with_two_phonon_conditionals = true) {
  using namespace pipeline_detail;
  const double t1 = p.travel1_ns(), t2 = p.travel2_ns();
  const double smax = p.sigma_max();

  // timeline: packet centers meet the splitter around bs_time with offsets +/- tau/2
  const double bs_time = 16.0 * smax + std::max(t1, t2) + 0.5 * p.tau_abs_max;
  const double b1 = bs_time - 0.5 * tau;
  const double b2 = bs_time + 0.5 * tau;
  const double t_final = bs_time + 0.5 * p.tau_abs_max + std::max(t1, t2) + 16.0 * smax +
                         p.hold_margin_ns;
  const TimeGrid grid = TimeGrid::covering(0.0, t_final, p.dt_ns);

  // shaped emission (envelope at the emitter, travel delay to the splitter)
  auto emit1_target = make_sech(p.sigma1_ns, b1 - t1, grid);
  auto emit2_target = make_sech(p.sigma2_ns, b2 - t2, grid);
  auto sched1 = kappa_for_emission(emit1_target, p.kappa_max);
  auto sched2 = kappa_for_emission(emit2_target, p.kappa_max);
  auto dyn1 = emit_dynamics(sched1, p.effective_q1());
  auto dyn2 = emit_dynamics(sched2, p.effective_q2());

  // coherently emitted packets at the splitter
  auto at_bs_1 = delayed(dyn1.coherent_mode, t1);
  Wavepacket at_bs_2 = delayed(dyn2.coherent_mode, t2);
  if (p.delta_f_mhz != 0.0) at_bs_2 = detuned(at_bs_2, p.delta_f_mhz);

  const double pres_a = dyn1.coherent_weight * p.survival(t1);
  const double pres_b = dyn2.coherent_weight * p.survival(t2);

  // two-channel input state over the orthonormal temporal pair
  auto basis2 = gram_schmidt_pair(at_bs_1, at_bs_2);
  FockBasis basis(4, 2);
  VectorXcd amp_a = VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
  // pure components: vacuum, A only, B only, AB
  auto idx = [&](int a1, int a2, int b1i, int b2i) {
    return static_cast<Eigen::Index>(basis.index({a1, a2, b1i, b2i}));
  };
  MatrixXcd rho_in = MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()),
                                     static_cast<Eigen::Index>(basis.size()));
  {
    const double w00 = (1.0 - pres_a) * (1.0 - pres_b);
    const double w10 = pres_a * (1.0 - pres_b);
    const double w01 = (1.0 - pres_a) * pres_b;
    const double w11 = pres_a * pres_b;
    rho_in(idx(0, 0, 0, 0), idx(0, 0, 0, 0)) += w00;

    VectorXcd one_a = VectorXcd::Zero(rho_in.rows());
    one_a[idx(1, 0, 0, 0)] = basis2.c_a[0];
    one_a[idx(0, 1, 0, 0)] = basis2.c_a[1];
    rho_in += w10 * (one_a * one_a.adjoint());

    VectorXcd one_b = VectorXcd::Zero(rho_in.rows());
    one_b[idx(0, 0, 1, 0)] = basis2.c_b[0];
    one_b[idx(0, 0, 0, 1)] = basis2.c_b[1];
    rho_in += w01 * (one_b * one_b.adjoint());

    // a^dag_{A,ca} a^dag_{B,cb} |0>: the two phonons occupy disjoint mode sets
    VectorXcd both = VectorXcd::Zero(rho_in.rows());
    for (int ma = 0; ma < 2; ++ma)
      for (int mb = 0; mb < 2; ++mb) {
        const cdouble c = basis2.c_a[ma] * basis2.c_b[mb];
        if (c == cdouble(0.0, 0.0)) continue;
        std::vector<int> occ{0, 0, 0, 0};
        occ[ma] += 1;
        occ[2 + mb] += 1;
        both[static_cast<Eigen::Index>(basis.index(occ))] += c;
      }
    rho_in += w11 * (both * both.adjoint());
  }

  FockDensity state(basis, std::move(rho_in));

  // splitter acts identically on each temporal mode
  const Beamsplitter bs(p.eta, p.theta_r);
  MatrixXcd u2 = bs_mode_matrix(bs);
  MatrixXcd u4 = MatrixXcd::Zero(4, 4);
  for (int te = 0; te < 2; ++te)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) u4(2 * s1 + te, 2 * s2 + te) = u2(s1, s2);
  state = state.transformed(u4);

  // post-splitter travel loss per spatial channel
  state = state.damped(0, p.survival(t1)).damped(1, p.survival(t1));
  state = state.damped(2, p.survival(t2)).damped(3, p.survival(t2));

  // matched-filter capture of each qubit's own reflection; the catch is
  // calibrated against the actual (cap-limited) emitted envelope
  auto catch1 = kappa_for_catch(delayed(dyn1.coherent_mode, 2.0 * t1).normalized(),
                                p.kappa_max);
  auto catch2 = kappa_for_catch(delayed(dyn2.coherent_mode, 2.0 * t2).normalized(),
                                p.kappa_max);

  auto fill = [&](CaptureModel& m, const CouplerSchedule& sched, const QubitParams& q,
                  int mode, const Wavepacket& in) {
    auto dyn = capture_dynamics(sched, q, in);
    m.amp[mode] = dyn.amplitude;
    m.incoherent[mode] = std::max(0.0, dyn.captured - std::norm(dyn.amplitude));
  };
  CaptureModel m1, m2;
  fill(m1, catch1, p.effective_q1(), 0, delayed(basis2.e1, t1));
  fill(m2, catch2, p.effective_q2(), 0, delayed(basis2.e1, t2));
  if (!basis2.degenerate) {
    fill(m1, catch1, p.effective_q1(), 1, delayed(basis2.e2, t1));
    fill(m2, catch2, p.effective_q2(), 1, delayed(basis2.e2, t2));
  }

  if (with_two_phonon_conditionals) {
    // conditional excitation when two phonons arrive in one basis mode
    for (int m = 0; m < (basis2.degenerate ? 1 : 2); ++m) {
      const Wavepacket& em = (m == 0) ? basis2.e1 : basis2.e2;
      m1.p_two_same[m] =
          two_phonon_capture_prob(catch1, p.effective_q1(), delayed(em, t1));
      m2.p_two_same[m] =
          two_phonon_capture_prob(catch2, p.effective_q2(), delayed(em, t2));
    }
  } else {
    for (int m = 0; m < 2; ++m) {
      m1.p_two_same[m] = 1.0 - std::pow(1.0 - std::norm(m1.amp[m]), 2);
      m2.p_two_same[m] = 1.0 - std::pow(1.0 - std::norm(m2.amp[m]), 2);
    }
  }

  auto det = detect(state, m1, m2);

  HomPointResult out;
  out.p_q1 = det.p_e1;
  out.p_q2 = det.p_e2;
  out.p_ee = det.p_ee;
  // ideal lossless coincidence of the target packets for the proxy comparison
  auto ideal1 = make_sech(p.sigma1_ns, b1, grid);
  Wavepacket ideal2 = make_sech(p.sigma2_ns, b2, grid);
  if (p.delta_f_mhz != 0.0) ideal2 = detuned(ideal2, p.delta_f_mhz);
  const cdouble o = overlap(ideal1, ideal2);
  out.p11_ideal = std::clamp(1.0 - 2.0 * p.eta + 2.0 * p.eta * p.eta +
                                 (2.0 * p.eta * p.eta - 2.0 * p.eta) * std::norm(o),
                             0.0, 1.0);
  return out;
}

/// Exact Eq.-route coincidence for ideal sech packets at the experiment point.
inline double p11_exact(const ExperimentParams& p, double tau) {
  const double smax = p.sigma_max();
  const double half = 16.0 * smax + std::abs(tau);
  const TimeGrid grid = TimeGrid::covering(-half, half + std::abs(tau), p.dt_ns);
  auto p1 = make_sech(p.sigma1_ns, 0.0, grid);
  Wavepacket p2 = make_sech(p.sigma2_ns, 0.0, grid);
  if (p.delta_f_mhz != 0.0) p2 = detuned(p2, p.delta_f_mhz);
  return coincidence_probability_time(p1, p2, tau, p.eta);
}

struct MzPointResult {
  double p_q1 = 0.0;
  double p_q2 = 0.0;
};

/// Single-phonon Mach-Zehnder point: emit from Q1, split, capture on both qubits,
/// store, apply the control phase, re-release timed for simultaneous arrival at
/// the splitter, split again, capture, measure. Storage decoherence enters the
/// interference term through the qubits' dephasing rates.
inline MzPointResult mz_pipeline(const ExperimentParams& p, double delta_phi,
                                 double sigma = 17.9) {
  const double t1 = p.travel1_ns(), t2 = p.travel2_ns();
  const QubitParams q1 = p.effective_q1(), q2 = p.effective_q2();

  // timeline; window clearances use the same 16-sigma support the grids need
  const double e1c = 16.0 * sigma;           // emission center, qubit 1
  const double b1 = e1c + t1;                // first splitter passage
  const double c1 = b1 + t1;                 // capture centers
  const double c2 = b1 + t2;
  const double gap = 16.0 * sigma;           // release center clearance after capture
  const double b2nd = std::max(c1 + gap + t1, c2 + gap + t2);
  const double r1 = b2nd - t1, r2 = b2nd - t2; // re-release centers
  const double t_final = b2nd + std::max(t1, t2) + 16.0 * sigma + p.hold_margin_ns;
  const TimeGrid grid = TimeGrid::covering(0.0, t_final, p.dt_ns);

  // stage efficiencies from the component dynamics
  auto emit_target = make_sech(sigma, e1c, grid);
  auto dyn_e = emit_dynamics(kappa_for_emission(emit_target, p.kappa_max), q1);

  auto catch1 = kappa_for_catch(make_sech(sigma, c1, grid), p.kappa_max);
  auto catch2 = kappa_for_catch(make_sech(sigma, c2, grid), p.kappa_max);
  const Wavepacket arr_shape1 = delayed(dyn_e.coherent_mode, 2.0 * t1);
  const Wavepacket arr_shape2 = delayed(dyn_e.coherent_mode, t1 + t2);
  // capture split into the interfering coherent amplitude and the dephased
  // population, both read right after the catch window closes
  struct CapSplit {
    double coherent;   // |beta| at window close
    double incoherent; // captured population lacking phase coherence
  };
  auto cap_until = [&](const CouplerSchedule& sched, const QubitParams& q,
                       const Wavepacket& in) {
    auto dyn = capture_dynamics(sched, q, in.normalized());
    // window close: past this point the residual sech-tail rates are negligible
    Eigen::Index last = 0;
    for (Eigen::Index k = 0; k < sched.kappa.size(); ++k)
      if (sched.kappa[k] > 1e-3 * sched.kappa_max) last = k;
    const double pop = std::max(0.0, dyn.population[last]);
    const double coh2 = std::min(pop, std::norm(dyn.amplitudes[last]));
    return CapSplit{std::sqrt(coh2), pop - coh2};
  };
  const CapSplit q1_cap = cap_until(catch1, q1, arr_shape1);
  const CapSplit q2_cap = cap_until(catch2, q2, arr_shape2);

  auto rel1_target = make_sech(sigma, r1, grid);
  auto rel2_target = make_sech(sigma, r2, grid);
  auto dyn_r1 = emit_dynamics(kappa_for_emission(rel1_target, p.kappa_max), q1);
  auto dyn_r2 = emit_dynamics(kappa_for_emission(rel2_target, p.kappa_max), q2);

  // storage exposure between capture and re-release, center to center
  const double store1 = std::max(0.0, r1 - c1);
  const double store2 = std::max(0.0, r2 - c2);
  const double t1_decay1 = std::exp(-store1 * q1.gamma1_per_ns());
  const double t1_decay2 = std::exp(-store2 * q2.gamma1_per_ns());
  const double coh =
      std::exp(-store1 * q1.gamma_phi_per_ns() - store2 * q2.gamma_phi_per_ns());

  // single-excitation amplitudes reaching the second splitter
  const MatrixXcd u = bs_mode_matrix(Beamsplitter(p.eta, p.theta_r));
  const double sv1 = p.survival(t1), sv2 = p.survival(t2); // per-leg probabilities
  const double pre2 = dyn_e.coherent_weight * sv1;          // emitter to splitter

  const cdouble a1 = std::sqrt(pre2) * u(0, 0) * std::sqrt(sv1) * q1_cap.coherent *
                     std::sqrt(t1_decay1 * dyn_r1.coherent_weight) * std::sqrt(sv1) *
                     std::exp(cdouble(0.0, delta_phi));
  const cdouble a2 = std::sqrt(pre2) * u(1, 0) * std::sqrt(sv2) * q2_cap.coherent *
                     std::sqrt(t1_decay2 * dyn_r2.coherent_weight) * std::sqrt(sv2);

  // dephased stored population re-releases as a non-interfering background
  const double b1_pop =
      pre2 * std::norm(u(0, 0)) * sv1 * t1_decay1 * sv1 *
      (q1_cap.incoherent * dyn_r1.transmitted +
       q1_cap.coherent * q1_cap.coherent *
           std::max(0.0, dyn_r1.transmitted - dyn_r1.coherent_weight));
  const double b2_pop =
      pre2 * std::norm(u(1, 0)) * sv2 * t1_decay2 * sv2 *
      (q2_cap.incoherent * dyn_r2.transmitted +
       q2_cap.coherent * q2_cap.coherent *
           std::max(0.0, dyn_r2.transmitted - dyn_r2.coherent_weight));

  // second splitter pass; the dephasing factor damps only the cross term
  auto mixed_prob = [&](cdouble path1, cdouble path2) {
    return std::norm(path1) + std::norm(path2) +
           2.0 * coh * (path1 * std::conj(path2)).real();
  };
  const double p_to1 = mixed_prob(u(0, 0) * a1, u(0, 1) * a2) +
                       std::norm(u(0, 0)) * b1_pop + std::norm(u(0, 1)) * b2_pop;
  const double p_to2 = mixed_prob(u(1, 0) * a1, u(1, 1) * a2) +
                       std::norm(u(1, 0)) * b1_pop + std::norm(u(1, 1)) * b2_pop;

  // final capture and hold
  auto fcatch1 = kappa_for_catch(make_sech(sigma, b2nd + t1, grid), p.kappa_max);
  auto fcatch2 = kappa_for_catch(make_sech(sigma, b2nd + t2, grid), p.kappa_max);
  const Wavepacket fin_shape1 = delayed(dyn_r1.coherent_mode, 2.0 * t1);
  const Wavepacket fin_shape2 = delayed(dyn_r2.coherent_mode, 2.0 * t2);
  const double f1 = capture_dynamics(fcatch1, q1, fin_shape1.normalized()).captured;
  const double f2 = capture_dynamics(fcatch2, q2, fin_shape2.normalized()).captured;

  MzPointResult out;
  out.p_q1 = p_to1 * sv1 * f1;
  out.p_q2 = p_to2 * sv2 * f2;
  return out;
}

/// Two-qubit state after the single-phonon split-and-capture sequence (the Bell
/// generation experiment), from the analytic pipeline.
inline DensityMatrix4 bell_pipeline(const ExperimentParams& p, double sigma = 17.9) {
  const double t1 = p.travel1_ns(), t2 = p.travel2_ns();
  const QubitParams q1 = p.effective_q1(), q2 = p.effective_q2();

  const double e1c = 16.0 * sigma;
  const double b1 = e1c + t1;
  const double c1 = b1 + t1, c2 = b1 + t2;
  const double t_final = std::max(c1, c2) + 8.0 * sigma + p.hold_margin_ns;
  const TimeGrid grid = TimeGrid::covering(0.0, t_final, p.dt_ns);

  auto emit_target = make_sech(sigma, e1c, grid);
  auto dyn_e = emit_dynamics(kappa_for_emission(emit_target, p.kappa_max), q1);

  auto catch1 = kappa_for_catch(make_sech(sigma, c1, grid), p.kappa_max);
  auto catch2 = kappa_for_catch(make_sech(sigma, c2, grid), p.kappa_max);
  auto capd1 = capture_dynamics(catch1, q1, delayed(dyn_e.coherent_mode, 2.0 * t1));
  auto capd2 = capture_dynamics(catch2, q2, delayed(dyn_e.coherent_mode, t1 + t2));

  const MatrixXcd u = bs_mode_matrix(Beamsplitter(p.eta, p.theta_r));
  const double pre = dyn_e.coherent_weight * p.survival(t1);
  const double pop1 = pre * std::norm(u(0, 0)) * p.survival(t1) * capd1.captured;
  const double pop2 = pre * std::norm(u(1, 0)) * p.survival(t2) * capd2.captured;
  // coherence: amplitude product with the splitter phases and the coherent part
  // of each capture (the dephased captured population does not interfere)
  const cdouble coh = pre * u(0, 0) * std::conj(u(1, 0)) *
                      std::sqrt(p.survival(t1) * p.survival(t2)) * capd1.amplitude *
                      std::conj(capd2.amplitude);

  DensityMatrix4 out;
  // basis (gg, ge, eg, ee); phonon 1 captured by Q1 -> |eg>, by Q2 -> |ge>
  out.rho(0, 0) = 1.0 - pop1 - pop2;
  out.rho(2, 2) = pop1;
  out.rho(1, 1) = pop2;
  out.rho(2, 1) = coh;
  out.rho(1, 2) = std::conj(coh);
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(out.rho);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

struct TimeBinResult {
  double p_ee[2][2] = {{0.0, 0.0}, {0.0, 0.0}}; // [bin captured by Q1][bin by Q2]
};

/// Coupling schedule releasing |w1|^2 of the excitation in bin 1 and the rest in
/// bin 2. Rejects overlapping bins.
inline CouplerSchedule time_bin_schedule(const Wavepacket& bin1, const Wavepacket& bin2,
                                         cdouble w1, cdouble w2, double kappa_max) {
  if (std::abs(std::norm(w1) + std::norm(w2) - 1.0) > 1e-9)
    throw ParameterError("time_bin_schedule: |w1|^2 + |w2|^2 must be 1");
  if (std::abs(overlap(bin1, bin2)) > 1e-3)
    throw ParameterError("time_bin_schedule: bins overlap");
  auto target = compose_bins({bin1, bin2}, {w1, w2});
  return kappa_for_emission(target, kappa_max);
}

/// Two-phonon interference with each phonon distributed over two time bins; the
/// four pairwise coincidences are measured by retiming the catch windows.
inline TimeBinResult time_bin_pipeline(const ExperimentParams& p, double sigma = 8.4,
                                       double bin_gap_ns = 180.0) {
  using namespace pipeline_detail;
  const double t1 = p.travel1_ns(), t2 = p.travel2_ns();
  const double rsq = 1.0 / std::sqrt(2.0);

  const double bs_bin1 = 16.0 * sigma + std::max(t1, t2);
  const double bs_bin2 = bs_bin1 + bin_gap_ns;
  const double t_final = bs_bin2 + std::max(t1, t2) + 16.0 * sigma + p.hold_margin_ns;
  const TimeGrid grid = TimeGrid::covering(0.0, t_final, p.dt_ns);

  // emitters release half the population in each bin, timed for zero relative delay
  auto emit = [&](double travel, const QubitParams& q) {
    auto b1p = make_sech(sigma, bs_bin1 - travel, grid);
    auto b2p = make_sech(sigma, bs_bin2 - travel, grid);
    auto sched = time_bin_schedule(b1p, b2p, rsq, rsq, p.kappa_max);
    return emit_dynamics(sched, q);
  };
  auto dyn1 = emit(t1, p.effective_q1());
  auto dyn2 = emit(t2, p.effective_q2());

  const double pres_a = dyn1.coherent_weight * p.survival(t1);
  const double pres_b = dyn2.coherent_weight * p.survival(t2);

  // orthonormal bin basis at the splitter
  auto bin1_bs = make_sech(sigma, bs_bin1, grid);
  auto bin2_bs = make_sech(sigma, bs_bin2, grid);
  auto mode_a = delayed(dyn1.coherent_mode, t1);
  auto mode_b = delayed(dyn2.coherent_mode, t2);
  Eigen::Vector2cd ca{overlap(bin1_bs, mode_a), overlap(bin2_bs, mode_a)};
  Eigen::Vector2cd cb{overlap(bin1_bs, mode_b), overlap(bin2_bs, mode_b)};

  FockBasis basis(4, 2);
  MatrixXcd rho_in = MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()),
                                     static_cast<Eigen::Index>(basis.size()));
  {
    const double w00 = (1.0 - pres_a) * (1.0 - pres_b);
    const double w10 = pres_a * (1.0 - pres_b);
    const double w01 = (1.0 - pres_a) * pres_b;
    const double w11 = pres_a * pres_b;
    rho_in(0, 0) += w00; // vacuum is index 0 by construction
    VectorXcd va = VectorXcd::Zero(rho_in.rows());
    va[static_cast<Eigen::Index>(basis.index({1, 0, 0, 0}))] = ca[0];
    va[static_cast<Eigen::Index>(basis.index({0, 1, 0, 0}))] = ca[1];
    rho_in += w10 * (va * va.adjoint());
    VectorXcd vb = VectorXcd::Zero(rho_in.rows());
    vb[static_cast<Eigen::Index>(basis.index({0, 0, 1, 0}))] = cb[0];
    vb[static_cast<Eigen::Index>(basis.index({0, 0, 0, 1}))] = cb[1];
    rho_in += w01 * (vb * vb.adjoint());
    VectorXcd vab = VectorXcd::Zero(rho_in.rows());
    for (int ma = 0; ma < 2; ++ma)
      for (int mb = 0; mb < 2; ++mb) {
        std::vector<int> occ{0, 0, 0, 0};
        occ[ma] += 1;
        occ[2 + mb] += 1;
        vab[static_cast<Eigen::Index>(basis.index(occ))] += ca[ma] * cb[mb];
      }
    rho_in += w11 * (vab * vab.adjoint());
  }
  FockDensity state(basis, std::move(rho_in));

  const Beamsplitter bs(p.eta, p.theta_r);
  MatrixXcd u2 = bs_mode_matrix(bs);
  MatrixXcd u4 = MatrixXcd::Zero(4, 4);
  for (int te = 0; te < 2; ++te)
    for (int s1i = 0; s1i < 2; ++s1i)
      for (int s2i = 0; s2i < 2; ++s2i) u4(2 * s1i + te, 2 * s2i + te) = u2(s1i, s2i);
  state = state.transformed(u4);
  state = state.damped(0, p.survival(t1)).damped(1, p.survival(t1));
  state = state.damped(2, p.survival(t2)).damped(3, p.survival(t2));

  TimeBinResult out;
  for (int j1 = 0; j1 < 2; ++j1) {
    for (int j2 = 0; j2 < 2; ++j2) {
      const double arr1 = (j1 == 0 ? bs_bin1 : bs_bin2) + t1;
      const double arr2 = (j2 == 0 ? bs_bin1 : bs_bin2) + t2;
      auto catch1 = kappa_for_catch(make_sech(sigma, arr1, grid), p.kappa_max);
      auto catch2 = kappa_for_catch(make_sech(sigma, arr2, grid), p.kappa_max);
      CaptureModel m1, m2;
      auto fill = [&](CaptureModel& m, const CouplerSchedule& s, const QubitParams& q,
                      int mode, const Wavepacket& in) {
        auto dyn = capture_dynamics(s, q, in);
        m.amp[mode] = dyn.amplitude;
        m.incoherent[mode] = std::max(0.0, dyn.captured - std::norm(dyn.amplitude));
      };
      fill(m1, catch1, p.effective_q1(), 0, delayed(bin1_bs, t1));
      fill(m1, catch1, p.effective_q1(), 1, delayed(bin2_bs, t1));
      fill(m2, catch2, p.effective_q2(), 0, delayed(bin1_bs, t2));
      fill(m2, catch2, p.effective_q2(), 1, delayed(bin2_bs, t2));
      for (int m = 0; m < 2; ++m) {
        m1.p_two_same[m] = 1.0 - std::pow(1.0 - std::norm(m1.amp[m]), 2);
        m2.p_two_same[m] = 1.0 - std::pow(1.0 - std::norm(m2.amp[m]), 2);
      }
      out.p_ee[j1][j2] = detect(state, m1, m2).p_ee;
    }
  }
  return out;
}

/// Least-squares fit of the proxy scale alpha over plateau samples.
inline double fit_alpha(const std::vector<double>& p11, const std::vector<double>& pee,
                        const std::vector<double>& delays, double sigma_max) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < p11.size(); ++k) {
    if (std::abs(delays[k]) <= 5.0 * sigma_max) continue;
    num += pee[k] * p11[k];
    den += p11[k] * p11[k];
  }
  if (den <= 0.0) throw ParameterError("fit_alpha: no plateau samples");
  return num / den;
}

} // namespace lmqc
