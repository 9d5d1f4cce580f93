// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "lmqc/pipeline.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

namespace {

ExperimentParams lossless_params() {
  ExperimentParams p;
  p.lossless = true;
  p.sigma1_ns = 8.4;
  p.sigma2_ns = 8.4;
  p.eta = 0.5;
  return p;
}

ExperimentParams paper_params() {
  ExperimentParams p;
  p.sigma1_ns = 8.4;
  p.sigma2_ns = 8.3;
  p.eta = 0.611;
  return p;
}

} // namespace

TEST_CASE("pee_proxy reproduces the quoted product") {
  // 0.265 * 0.524 = 0.13886, consistent with the rounded 0.139
  REQUIRE_THAT(pee_proxy(0.524, 0.265), WithinAbs(0.139, 5e-4));
  REQUIRE_THAT(pee_proxy(0.0, 0.265), WithinAbs(0.0, 1e-12));
  REQUIRE_THROWS_AS(pee_proxy(1.2, 0.265), ParameterError);
}

TEST_CASE("ideal HOM: lossless balanced pipeline nulls the coincidence") {
  auto p = lossless_params();
  auto at_zero = hom_pipeline(p, 0.0, false);
  REQUIRE(at_zero.p_ee < 1e-6);
}

TEST_CASE("lossless far-delay pipeline approaches the reflection-only product") {
  auto p = lossless_params();
  p.eta = 0.611;
  auto far = hom_pipeline(p, 150.0, false);
  // each qubit catches its own reflection: eta^2 coincidence, everything else misses
  REQUIRE_THAT(far.p_ee, WithinAbs(0.611 * 0.611, 0.01));
  REQUIRE_THAT(far.p_q1, WithinAbs(0.611, 0.01));
  REQUIRE_THAT(far.p_q2, WithinAbs(0.611, 0.01));
  REQUIRE_THAT(far.p11_ideal, WithinAbs(1.0 - 2.0 * 0.611 + 2.0 * 0.611 * 0.611, 1e-3));
}

TEST_CASE("pipeline P_ee is symmetric in the delay") {
  auto p = paper_params();
  p.sigma2_ns = 8.4; // symmetric packets for the symmetry property
  for (double tau : {30.0, 75.0}) {
    auto plus = hom_pipeline(p, tau, false);
    auto minus = hom_pipeline(p, -tau, false);
    REQUIRE_THAT(plus.p_ee, WithinAbs(minus.p_ee, 5e-3));
  }
}

TEST_CASE("pipeline tracks the alpha-scaled Eq-route proxy across the scan") {
  auto p = paper_params();
  std::vector<double> taus, pee, p11;
  for (double tau = -150.0; tau <= 150.1; tau += 25.0) {
    auto r = hom_pipeline(p, tau, false);
    taus.push_back(tau);
    pee.push_back(r.p_ee);
    p11.push_back(r.p11_ideal);
  }
  const double alpha = fit_alpha(p11, pee, taus, p.sigma_max());
  // The proxy holds at the dip and on the plateau (the regions the experiment
  // quantifies). At intermediate delays the timed catch suppresses the
  // both-transmitted coincidences faster than the Eq-route P11; that deviation is
  // bounded but can exceed the plateau-fit tolerance.
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double atau = std::abs(taus[k]);
    if (atau <= 2.0 * p.sigma_max() || atau >= 10.0 * p.sigma_max())
      REQUIRE_THAT(pee[k], WithinAbs(alpha * p11[k], 0.01));
    else
      REQUIRE_THAT(pee[k], WithinAbs(alpha * p11[k], 0.035));
  }
}

TEST_CASE("pipeline spot-matches the cascaded master equation at zero delay") {
  // build the same physical point both ways: pipeline vs 36-dim joint capture
  auto p = paper_params();
  auto pt = hom_pipeline(p, 0.0, true);

  // cascade version: emitted coherent packets, splitter, loss, joint catch
  const double t1 = p.travel1_ns(), t2 = p.travel2_ns();
  const double smax = p.sigma_max();
  const double bs_time = 16.0 * smax + std::max(t1, t2) + 0.5 * p.tau_abs_max;
  const double t_final = bs_time + 0.5 * p.tau_abs_max + std::max(t1, t2) + 16.0 * smax +
                         p.hold_margin_ns;
  const TimeGrid grid = TimeGrid::covering(0.0, t_final, p.dt_ns);
  auto e1t = make_sech(p.sigma1_ns, bs_time - t1, grid);
  auto e2t = make_sech(p.sigma2_ns, bs_time - t2, grid);
  auto dyn1 = emit_dynamics(kappa_for_emission(e1t, p.kappa_max), p.q1);
  auto dyn2 = emit_dynamics(kappa_for_emission(e2t, p.kappa_max), p.q2);
  auto b1 = delayed(dyn1.coherent_mode, t1);
  auto b2 = delayed(dyn2.coherent_mode, t2);
  const double pa = dyn1.coherent_weight * p.survival(t1);
  const double pb = dyn2.coherent_weight * p.survival(t2);

  // common temporal mode (sigma 8.4 vs 8.3 are nearly identical): collapse onto
  // the symmetric mode for the joint-input construction
  const cdouble o = overlap(b1, b2);
  REQUIRE(std::abs(o) > 0.999);
  FockBasis mb(2, 2);
  MatrixXcd rho_modes = MatrixXcd::Zero(6, 6);
  const Beamsplitter bs(p.eta);
  MatrixXcd u = bs_mode_matrix(bs);
  // input (1,1) with presence probabilities, then the splitter lift
  {
    MatrixXcd rho_in = MatrixXcd::Zero(6, 6);
    auto ix = [&](int na, int nb) { return static_cast<Eigen::Index>(mb.index({na, nb})); };
    rho_in(ix(0, 0), ix(0, 0)) = (1 - pa) * (1 - pb);
    rho_in(ix(1, 0), ix(1, 0)) = pa * (1 - pb);
    rho_in(ix(0, 1), ix(0, 1)) = (1 - pa) * pb;
    rho_in(ix(1, 1), ix(1, 1)) = pa * pb;
    FockDensity st(mb, rho_in);
    st = st.transformed(u);
    st = st.damped(0, p.survival(t1)).damped(1, p.survival(t2));
    rho_modes = st.matrix();
  }

  const Wavepacket arr1 = delayed(b1, t1); // shared shape at each catch port
  const Wavepacket arr2 = delayed(b2, t2);
  CascadeConfig cfg;
  cfg.q1 = CascadeStage{p.q1, 0.0,
                        kappa_for_catch(make_sech(p.sigma1_ns, bs_time + t1, grid), p.kappa_max),
                        arr1.normalized(), std::nullopt};
  cfg.q2 = CascadeStage{p.q2, 0.0,
                        kappa_for_catch(make_sech(p.sigma2_ns, bs_time + t2, grid), p.kappa_max),
                        arr2.normalized(), std::nullopt};
  cfg.joint_input = FockDensity(mb, rho_modes);
  cfg.sample_stride = 200;
  auto cas = simulate_cascade(cfg);

  REQUIRE_THAT(pt.p_ee, WithinAbs(cas.final_p_ee, 0.02));
  REQUIRE_THAT(pt.p_q1, WithinAbs(cas.final_p_q1, 0.03));
  REQUIRE_THAT(pt.p_q2, WithinAbs(cas.final_p_q2, 0.03));
}

TEST_CASE("mz_pipeline: balanced lossless routing has unit visibility") {
  auto p = lossless_params();
  p.eta = 0.5;
  std::vector<double> phases, v1, v2;
  for (int k = 0; k < 16; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 15.0;
    auto r = mz_pipeline(p, phi);
    phases.push_back(phi);
    v1.push_back(r.p_q1);
    v2.push_back(r.p_q2);
  }
  REQUIRE_THAT(fringe_visibility(phases, v1), WithinAbs(1.0, 1e-6));
  REQUIRE_THAT(fringe_visibility(phases, v2), WithinAbs(1.0, 1e-6));
  // constructive/destructive routing at the fringe extremes
  auto r0 = mz_pipeline(p, 0.0);
  REQUIRE(r0.p_q1 < 1e-6);
  REQUIRE(r0.p_q2 > 0.95);
}

TEST_CASE("mz_pipeline with device parameters lands near the measured visibility") {
  ExperimentParams p; // paper defaults
  std::vector<double> phases, v2;
  for (int k = 0; k < 17; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 16.0;
    auto r = mz_pipeline(p, phi);
    phases.push_back(phi);
    v2.push_back(r.p_q2);
  }
  const double vis = fringe_visibility(phases, v2);
  REQUIRE(vis > 0.87);
  REQUIRE(vis < 0.95);
}

TEST_CASE("bell_pipeline approaches the ideal Bell state when lossless") {
  auto p = lossless_params();
  p.eta = 0.5;
  auto rho = bell_pipeline(p);
  REQUIRE_THAT(rho.rho(1, 1).real(), WithinAbs(0.5, 5e-3));
  REQUIRE_THAT(rho.rho(2, 2).real(), WithinAbs(0.5, 5e-3));
  REQUIRE_THAT(std::abs(rho.rho(2, 1)), WithinAbs(0.5, 5e-3));
  REQUIRE(bell_fidelity(rho, bell_target_rho()) > 0.99);
}

TEST_CASE("bell_pipeline with device parameters matches the quoted fidelity band") {
  ExperimentParams p;
  auto rho = bell_pipeline(p);
  const double f = bell_fidelity(rho, bell_target_rho());
  REQUIRE(f > 0.766);
  REQUIRE(f < 0.866);
}

TEST_CASE("time_bin_schedule releases half the population per bin") {
  auto grid = TimeGrid::covering(0.0, 700.0, 0.1);
  auto b1 = make_sech(8.4, 180.0, grid);
  auto b2 = make_sech(8.4, 420.0, grid);
  const double rsq = 1.0 / std::sqrt(2.0);
  auto sched = time_bin_schedule(b1, b2, rsq, rsq, kDefaultKappaMax);
  auto res = emitted_waveform(sched);
  auto target = compose_bins({b1, b2}, {rsq, rsq});
  REQUIRE(std::abs(overlap(res.waveform, target)) > 0.99);
  // population split: half emitted within each bin window (the coupler cap skews
  // the split by a few tenths of a percent at sigma = 8.4)
  REQUIRE_THAT(std::norm(overlap(b1, res.waveform)), WithinAbs(0.5, 1e-2));
  REQUIRE_THAT(std::norm(overlap(b2, res.waveform)), WithinAbs(0.5, 1e-2));
  // single-bin weights reduce to the plain schedule (cap-limited at sigma = 8.4)
  auto single = time_bin_schedule(b1, b2, 1.0, 0.0, kDefaultKappaMax);
  auto res1 = emitted_waveform(single);
  REQUIRE(std::abs(overlap(res1.waveform, b1)) > 0.99);
}

TEST_CASE("time_bin_schedule rejects overlapping bins and bad weights") {
  auto grid = TimeGrid::covering(0.0, 700.0, 0.1);
  auto b1 = make_sech(8.4, 300.0, grid);
  auto b2 = make_sech(8.4, 330.0, grid);
  const double rsq = 1.0 / std::sqrt(2.0);
  REQUIRE_THROWS_AS(time_bin_schedule(b1, b2, rsq, rsq, kDefaultKappaMax), ParameterError);
  auto b3 = make_sech(8.4, 540.0, grid);
  REQUIRE_THROWS_AS(time_bin_schedule(b1, b3, 0.9, 0.9, kDefaultKappaMax), ParameterError);
}

TEST_CASE("time-bin interference keeps all four coincidences suppressed") {
  ExperimentParams p; // paper parameters, eta = 0.611
  auto res = time_bin_pipeline(p);
  for (int j1 = 0; j1 < 2; ++j1)
    for (int j2 = 0; j2 < 2; ++j2) {
      REQUIRE(res.p_ee[j1][j2] < 0.006);
      REQUIRE(res.p_ee[j1][j2] > 0.0);
    }
}
