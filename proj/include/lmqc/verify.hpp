// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iomanip>
#include <iostream>
#include <random>

#include "lmqc/pipeline.hpp"

namespace lmqc {

/// One verification check: |value - target| must stay within tol (or, for
/// threshold checks, value must exceed target).
struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool greater_is_pass = false; // true: pass when value >= target
  bool pass = false;
  std::string note;

  double margin() const {
    return greater_is_pass ? value - target : tol - std::abs(value - target);
  }
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void print(std::ostream& os) const {
    os << std::left;
    for (const auto& c : checks) {
      os << (c.pass ? "[PASS] " : "[FAIL] ") << std::setw(38) << c.name << " value="
         << std::setprecision(9) << c.value;
      if (c.greater_is_pass) {
        os << " threshold=" << c.target;
      } else {
        os << " target=" << c.target << " tol=" << c.tol;
      }
      os << " margin=" << std::setprecision(3) << c.margin();
      if (!c.note.empty()) os << "  (" << c.note << ")";
      os << '\n';
    }
  }
};

namespace verify_detail {

inline void add_abs(VerifyReport& rep, const std::string& name, double value, double target,
                    double tol, const std::string& note = {}) {
  VerifyCheck c{name, value, target, tol, false, std::abs(value - target) <= tol, note};
  rep.checks.push_back(std::move(c));
}

inline void add_min(VerifyReport& rep, const std::string& name, double value,
                    double threshold, const std::string& note = {}) {
  VerifyCheck c{name, value, threshold, 0.0, true, value >= threshold, note};
  rep.checks.push_back(std::move(c));
}

} // namespace verify_detail

/// Oracle-equivalence and invariant battery behind the CLI `verify` command.
/// `eq1_perturbation` exists for the mutation canary: a deliberately offset
/// reflectivity in the closed-form route must be flagged by the brute-force check.
inline VerifyReport verify(const std::string& filter = {},
                           double eq1_perturbation = 0.0, int n_random = 50) {
  using verify_detail::add_abs;
  using verify_detail::add_min;
  VerifyReport rep;

  auto wanted = [&](const std::string& name) {
    return filter.empty() || name.find(filter) != std::string::npos;
  };

  if (wanted("wavepacket_norms")) {
    double worst = 0.0;
    for (double sigma : {5.0, 8.4, 17.9, 43.3}) {
      auto p = make_sech(sigma, 0.0, sech_default_grid(sigma, 0.0));
      worst = std::max(worst, std::abs(p.norm_squared() - 1.0));
    }
    add_abs(rep, "wavepacket_norms", worst, 0.0, 1e-9, "max |norm-1| over sigma set");
  }

  if (wanted("bs_unitarity")) {
    double worst = 0.0;
    for (double eta : {0.0, 0.25, 0.5, 0.611, 1.0}) {
      auto u = bs_mode_matrix(Beamsplitter(eta));
      worst = std::max(worst,
                       (u.adjoint() * u - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff());
    }
    add_abs(rep, "bs_unitarity", worst, 0.0, 1e-12);
  }

  if (wanted("eq1_brute_force")) {
    std::mt19937_64 rng(987654321);
    std::uniform_real_distribution<double> us(5.0, 50.0), ut(-100.0, 100.0),
        ue(0.05, 0.95);
    double worst = 0.0;
    for (int it = 0; it < n_random; ++it) {
      const double s1 = us(rng), s2 = us(rng), tau = ut(rng), eta = ue(rng);
      const double smax = std::max(s1, s2);
      auto g = TimeGrid::covering(-16.0 * smax - 120.0, 16.0 * smax + 120.0, 0.1);
      auto p1 = make_sech(s1, 0.0, g);
      auto p2 = make_sech(s2, 0.0, g);
      const double a = oracle::brute_force_p11(p1, p2, tau, eta + eq1_perturbation);
      const double b = coincidence_probability_time(p1, p2, tau, eta);
      worst = std::max(worst, std::abs(a - b));
    }
    add_abs(rep, "eq1_brute_force", worst, 0.0, 1e-9,
            std::to_string(n_random) + " random (sigma1,sigma2,tau,eta) tuples");
  }

  if (wanted("p11_endpoints")) {
    const double eta = 0.611;
    auto g = sech_default_grid(17.9, 0.0);
    auto p = make_sech(17.9, 0.0, g);
    const double pfar = 1.0 - 2.0 * eta + 2.0 * eta * eta;
    const double pzero = coincidence_probability_time(p, p, 0.0, eta);
    add_abs(rep, "p11_far_plateau_vs_0.524", pfar, 0.524, 1e-3,
            "1 - 2 eta + 2 eta^2 at eta=0.611");
    add_abs(rep, "p11_zero_delay_vs_0.048", pzero, 0.048, 1.5e-3,
            "(1-2 eta)^2 = 0.049284 at eta=0.611; quoted 0.048 implies eta=0.6096");
  }

  if (wanted("time_freq_agreement")) {
    auto g = TimeGrid::covering(-400.0, 500.0, 0.1);
    auto p1 = make_sech(16.0, 0.0, g);
    auto p2 = detuned(make_sech(16.7, 0.0, g), 5.0);
    auto s1 = spectrum(p1), s2 = spectrum(p2);
    double worst = 0.0;
    for (double tau : {0.0, 20.0, 77.7})
      worst = std::max(worst, std::abs(coincidence_probability_freq(s1, s2, tau, 0.611) -
                                       coincidence_probability_time(p1, p2, tau, 0.611)));
    add_abs(rep, "time_freq_agreement", worst, 0.0, 1e-6);
  }

  if (wanted("parseval")) {
    auto p = make_sech(16.0, 0.0, sech_default_grid(16.0, 0.0));
    add_abs(rep, "parseval", spectrum(p).norm_squared(), 1.0, 1e-6);
  }

  if (wanted("loss_binomial")) {
    double worst = 0.0;
    for (double s : {0.3, 0.7074}) {
      for (int n = 0; n <= 2; ++n) {
        auto out = apply_loss(TwoModeFockDensity::fock(n, 0), LossChannel(s, 1.0));
        auto ref = oracle::loss_trace_oracle(n, s);
        for (int k = 0; k <= n; ++k)
          worst = std::max(worst, std::abs(out.probability(k, 0) - ref.at(k)));
      }
    }
    add_abs(rep, "loss_binomial", worst, 0.0, 1e-12);
  }

  if (wanted("trace_preservation")) {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int it = 0; it < 10; ++it) {
      FockBasis basis(2, 2);
      MatrixXcd a = MatrixXcd::Random(6, 6);
      MatrixXcd rho = a * a.adjoint();
      rho /= rho.trace();
      auto out = apply_bs_fock(TwoModeFockDensity{FockDensity(basis, rho)},
                               Beamsplitter(0.3 + 0.05 * it));
      worst = std::max(worst, std::abs(out.trace() - 1.0));
    }
    add_abs(rep, "trace_preservation", worst, 0.0, 1e-9);
  }

  if (wanted("emission_round_trip")) {
    auto g = sech_default_grid(17.9, 0.0);
    auto phi = make_sech(17.9, 0.0, g);
    auto res = emitted_waveform(kappa_for_emission(phi, kDefaultKappaMax));
    add_min(rep, "emission_round_trip", std::abs(overlap(res.waveform, phi)), 0.999);
  }

  if (wanted("catch_cascade")) {
    auto g = sech_default_grid(17.9, 0.0);
    auto phi = make_sech(17.9, 0.0, g);
    CascadeConfig cfg;
    cfg.q1 = CascadeStage{QubitParams{3.925, 1e9, 1e9, 1e9}, 0.0,
                          kappa_for_catch(phi, kDefaultKappaMax), phi, std::nullopt};
    cfg.sample_stride = 100;
    add_min(rep, "catch_cascade", simulate_cascade(cfg).final_p_q1, 0.999,
            "lossless capture of the matched packet");
  }

  if (wanted("readout_round_trip")) {
    auto v = paper_visibility_matrix();
    TwoQubitProbVector p{0.25, 0.3, 0.35, 0.1};
    auto round = correct_readout(apply_confusion(p, v), v);
    add_abs(rep, "readout_round_trip", (round.vec() - p.vec()).cwiseAbs().maxCoeff(), 0.0,
            1e-9);
  }

  return rep;
}

} // namespace lmqc
