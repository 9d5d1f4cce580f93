// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "lmqc/measure.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

TEST_CASE("identity visibility matrix leaves probabilities unchanged") {
  VisibilityMatrix v{Matrix4d::Identity()};
  TwoQubitProbVector p{0.1, 0.2, 0.3, 0.4};
  auto c = correct_readout(p, v);
  REQUIRE_THAT((c.vec() - p.vec()).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-12));
}

TEST_CASE("paper visibility matrix columns are stochastic and well conditioned") {
  auto v = paper_visibility_matrix();
  for (int j = 0; j < 4; ++j)
    REQUIRE_THAT(v.matrix().col(j).sum(), WithinAbs(1.0, 1e-6));
  REQUIRE(v.condition_number() < 10.0);
  // V^-1 V = I within 1e-9
  const Matrix4d prod = v.matrix().inverse() * v.matrix();
  REQUIRE((prod - Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("correcting the prepared-|ee> measured column recovers (0,0,0,1)") {
  auto v = paper_visibility_matrix();
  TwoQubitProbVector meas = TwoQubitProbVector::from_vec(v.matrix().col(3));
  auto corr = correct_readout(meas, v);
  REQUIRE_THAT(corr.p_gg, WithinAbs(0.0, 1e-6));
  REQUIRE_THAT(corr.p_ge, WithinAbs(0.0, 1e-6));
  REQUIRE_THAT(corr.p_eg, WithinAbs(0.0, 1e-6));
  REQUIRE_THAT(corr.p_ee, WithinAbs(1.0, 1e-6));
}

TEST_CASE("correct_readout round trip on random stochastic matrices") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int it = 0; it < 50; ++it) {
    Matrix4d m;
    for (int j = 0; j < 4; ++j) {
      Vector4d col;
      for (int i = 0; i < 4; ++i) col[i] = (i == j) ? 10.0 + u(rng) : 0.3 * u(rng);
      m.col(j) = col / col.sum();
    }
    VisibilityMatrix v{m};
    Vector4d p;
    for (int i = 0; i < 4; ++i) p[i] = 0.05 + u(rng);
    p /= p.sum();
    auto round = correct_readout(apply_confusion(TwoQubitProbVector::from_vec(p), v), v);
    REQUIRE_THAT((round.vec() - p).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-9));
    REQUIRE_THAT(round.sum(), WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("tomography is exact on noiseless expectations") {
  // ideal Bell state
  auto rho_bell = bell_target_rho();
  auto rec = tomography_reconstruct(pauli_expectations(rho_bell));
  REQUIRE((rec.rho - rho_bell).cwiseAbs().maxCoeff() < 1e-12);
  rec.validate();

  // maximally mixed state
  auto rec2 = tomography_reconstruct(pauli_expectations(Matrix4cd::Identity() / 4.0));
  REQUIRE((rec2.rho - Matrix4cd::Identity() / 4.0).cwiseAbs().maxCoeff() < 1e-12);

  // random Hermitian trace-one matrices round-trip through the Pauli basis
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    Matrix4cd a;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = cdouble(nd(rng), nd(rng));
    Matrix4cd h = (a + a.adjoint()) / 2.0;
    h += Matrix4cd::Identity() * 2.0; // keep the trace away from zero
    h /= h.trace().real();
    auto rec3 = tomography_reconstruct(pauli_expectations(h));
    REQUIRE((rec3.rho - h).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tomography rejects inconsistent inputs") {
  PauliExpectations e = PauliExpectations::Zero();
  e(0, 0) = 0.7; // <II> must be 1
  REQUIRE_THROWS_AS(tomography_reconstruct(e), ParameterError);
  e(0, 0) = 1.0;
  e(1, 1) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(tomography_reconstruct(e), ParameterError);
}

TEST_CASE("tomography PSD projection clips negative eigenvalues when requested") {
  auto rho = bell_target_rho();
  auto e = pauli_expectations(rho);
  e(3, 3) -= 0.12; // inject inconsistency producing a slightly negative eigenvalue
  auto raw = tomography_reconstruct(e);
  auto proj = tomography_reconstruct(e, true);
  REQUIRE(raw.min_eigenvalue < 0.0);
  REQUIRE_FALSE(raw.psd_projected);
  REQUIRE(proj.psd_projected);
  REQUIRE(proj.min_eigenvalue >= -1e-12);
  REQUIRE_THAT(proj.rho.trace().real(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("bell_fidelity endpoints and invariances") {
  auto target = bell_target_rho();
  DensityMatrix4 ideal{target, 0.0, false};
  REQUIRE_THAT(bell_fidelity(ideal, target), WithinAbs(1.0, 1e-12));

  DensityMatrix4 mixed{Matrix4cd::Identity() / 4.0, 0.25, false};
  REQUIRE_THAT(bell_fidelity(mixed, target), WithinAbs(0.5, 1e-12));

  // global phase on the coherences does not change the fidelity
  Matrix4cd rot = target;
  rot(1, 2) *= std::exp(cdouble(0.0, 0.77));
  rot(2, 1) = std::conj(rot(1, 2));
  DensityMatrix4 rotated{rot, 0.0, false};
  REQUIRE_THAT(bell_fidelity(rotated, target), WithinAbs(1.0, 1e-12));

  REQUIRE_THAT(trace_fidelity(ideal, target), WithinAbs(1.0, 1e-12));
  REQUIRE(trace_fidelity(rotated, target) < 1.0);
}

TEST_CASE("fringe_visibility fits cosines") {
  std::vector<double> ph, v1, v0, voff;
  for (int k = 0; k < 16; ++k) {
    const double x = 2.0 * std::numbers::pi * k / 15.0;
    ph.push_back(x);
    v1.push_back(0.5 + 0.5 * std::cos(x));
    v0.push_back(0.37);
    voff.push_back(0.4 + 0.2 * std::cos(x - 1.234));
  }
  REQUIRE_THAT(fringe_visibility(ph, v1), WithinAbs(1.0, 1e-9));
  REQUIRE_THAT(fringe_visibility(ph, v0), WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(fringe_visibility(ph, voff), WithinAbs(0.5, 1e-9));
  // uniform scaling leaves the visibility unchanged
  auto scaled = voff;
  for (auto& y : scaled) y *= 3.3;
  REQUIRE_THAT(fringe_visibility(ph, scaled), WithinAbs(0.5, 1e-9));
}

TEST_CASE("fringe_visibility rejects bad inputs") {
  std::vector<double> few{0.0, 1.0, 2.0};
  REQUIRE_THROWS_AS(fringe_visibility(few, few), ParameterError);
  std::vector<double> ph, neg;
  for (int k = 0; k < 12; ++k) {
    ph.push_back(2.0 * std::numbers::pi * k / 11.0);
    neg.push_back(-1.0);
  }
  REQUIRE_THROWS_AS(fringe_visibility(ph, neg), ParameterError);
}

TEST_CASE("dip_visibility on a flat curve is zero") {
  std::vector<double> taus, flat;
  for (int k = -20; k <= 20; ++k) {
    taus.push_back(7.5 * k);
    flat.push_back(0.524);
  }
  REQUIRE_THAT(dip_visibility(taus, flat, 8.4), WithinAbs(0.0, 1e-12));
}

TEST_CASE("dip_visibility requires plateau samples") {
  std::vector<double> taus{-1.0, 0.0, 1.0}, v{0.5, 0.1, 0.5};
  REQUIRE_THROWS_AS(dip_visibility(taus, v, 8.4), ParameterError);
}

TEST_CASE("fwhm of a symmetric triangle dip equals its half-width") {
  std::vector<double> xs, ys;
  for (int k = -50; k <= 50; ++k) {
    const double x = 0.1 * k;
    xs.push_back(x);
    ys.push_back(1.0 - std::max(0.0, 1.0 - std::abs(x) / 2.0));
  }
  REQUIRE_THAT(fwhm(xs, ys, 1.0), WithinAbs(2.0, 1e-9));
}

TEST_CASE("fwhm of a gaussian matches 2.355 sigma") {
  const double s = 3.7;
  std::vector<double> xs, ys;
  for (int k = -400; k <= 400; ++k) {
    const double x = 0.05 * k;
    xs.push_back(x);
    ys.push_back(std::exp(-x * x / (2.0 * s * s)));
  }
  REQUIRE_THAT(fwhm(xs, ys, 0.0), WithinAbs(2.3548200450309493 * s, 0.01 * 2.3548 * s));
}

TEST_CASE("fwhm rejects curves with no crossings") {
  std::vector<double> xs{0, 1, 2, 3}, ys{1.0, 0.9, 0.8, 0.7};
  REQUIRE_THROWS_AS(fwhm(xs, ys, 0.9), ParameterError);
}

TEST_CASE("density matrix CSV round trip") {
  auto rho = bell_target_rho();
  write_density_csv(rho, "/tmp/lmqc_rho_test.csv");
  auto back = read_density_csv("/tmp/lmqc_rho_test.csv");
  REQUIRE((back - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("synthetic raw dip corrected through the paper matrix recovers the true visibility") {
  // Build true 4-vectors with experiment-scale singles, corrupt with V, correct back.
  auto v = paper_visibility_matrix();
  const double pq1 = 0.42, pq2 = 0.33, pee_max = 0.139;
  auto make_true = [&](double pee) {
    TwoQubitProbVector p;
    p.p_ee = pee;
    p.p_eg = pq1 - pee;
    p.p_ge = pq2 - pee;
    p.p_gg = 1.0 - p.p_ee - p.p_eg - p.p_ge;
    return p;
  };
  const double v_true = 0.91;
  std::vector<double> taus, truth, raw, corrected;
  for (int k = -20; k <= 20; ++k) {
    const double tau = 7.5 * k;
    const double x = tau / (2.0 * 8.4);
    const double o2 = (k == 0) ? 1.0 : std::pow(x / std::sinh(x), 2);
    const double pee = pee_max * (1.0 - v_true * o2);
    auto meas = apply_confusion(make_true(pee), v);
    taus.push_back(tau);
    truth.push_back(pee);
    raw.push_back(meas.p_ee);
    corrected.push_back(correct_readout(meas, v).p_ee);
  }
  const double v_ref = dip_visibility(taus, truth, 8.4);
  const double v_raw = dip_visibility(taus, raw, 8.4);
  const double v_corr = dip_visibility(taus, corrected, 8.4);
  REQUIRE(v_raw < v_ref - 0.02); // readout corruption lowers the dip contrast
  REQUIRE_THAT(v_corr, WithinAbs(v_ref, 1e-9)); // correction restores it exactly
}
