// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lmqc/oracle.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

TEST_CASE("quadrature_overlap equal-width sech endpoints") {
  auto f = oracle::AnalyticPacket::sech(10.0, 0.0);
  REQUIRE_THAT(std::abs(oracle::quadrature_overlap(f, f)), WithinAbs(1.0, 1e-9));
  auto g = oracle::AnalyticPacket::sech(10.0, 10.0);
  const double x = 0.5;
  REQUIRE_THAT(oracle::quadrature_overlap(f, g).real(), WithinAbs(x / std::sinh(x), 1e-9));
}

TEST_CASE("quadrature_overlap matches frozen scipy references") {
  // independent quadrature values computed with scipy.integrate.quad
  auto s88 = oracle::AnalyticPacket::sech(8.8, 0.0);
  REQUIRE_THAT(oracle::quadrature_overlap(s88, oracle::AnalyticPacket::sech(18.7, 0.0)).real(),
               WithinAbs(0.906776630293, 1e-9));
  REQUIRE_THAT(oracle::quadrature_overlap(s88, oracle::AnalyticPacket::sech(43.3, 0.0)).real(),
               WithinAbs(0.677495055, 1e-8));
}

TEST_CASE("quadrature_overlap agrees with grid overlap for detuned pairs") {
  auto ga = oracle::AnalyticPacket::sech(16.0, 0.0);
  auto gb = oracle::AnalyticPacket::sech(16.7, 0.0);
  gb.detuning_mhz = 6.0;
  const cdouble oq = oracle::quadrature_overlap(ga, gb);

  auto grid = TimeGrid::covering(-420.0, 420.0, 0.1);
  auto pa = make_sech(16.0, 0.0, grid);
  auto pb = detuned(make_sech(16.7, 0.0, grid), 6.0);
  const cdouble og = overlap(pa, pb);
  REQUIRE_THAT(std::abs(oq - og), WithinAbs(0.0, 1e-6));
}

TEST_CASE("quadrature_overlap handles gaussian packets") {
  auto f = oracle::AnalyticPacket::gaussian(5.0, 0.0);
  REQUIRE_THAT(std::abs(oracle::quadrature_overlap(f, f)), WithinAbs(1.0, 1e-10));
  // two gaussians separated by d: overlap exp(-d^2/(8 sigma^2))
  auto g = oracle::AnalyticPacket::gaussian(5.0, 7.0);
  REQUIRE_THAT(oracle::quadrature_overlap(f, g).real(),
               WithinAbs(std::exp(-49.0 / 200.0), 1e-9));
}

TEST_CASE("brute_force_p11 endpoints") {
  auto g = TimeGrid::covering(-500.0, 950.0, 0.1);
  auto p1 = make_sech(8.4, 0.0, g);
  auto p2 = make_sech(8.4, 0.0, g);
  // identical packets, balanced splitter: perfect HOM null
  REQUIRE_THAT(oracle::brute_force_p11(p1, p2, 0.0, 0.5), WithinAbs(0.0, 1e-12));
  // orthogonal packets: 1 - 2 eta + 2 eta^2 for any eta
  for (double eta : {0.3, 0.611}) {
    const double pfar = oracle::brute_force_p11(p1, p2, 420.0, eta);
    const double o = std::abs(overlap(delayed(p1, 420.0), p2));
    REQUIRE_THAT(pfar, WithinAbs(1.0 - 2.0 * eta + 2.0 * eta * eta, 4.0 * o * o + 1e-9));
  }
}

TEST_CASE("brute_force_p11 agrees with the Eq(1) implementation on random tuples") {
  std::mt19937_64 rng(20240613);
  std::uniform_real_distribution<double> us(5.0, 50.0), ut(-100.0, 100.0), ue(0.05, 0.95);
  for (int it = 0; it < 60; ++it) {
    const double s1 = us(rng), s2 = us(rng), tau = ut(rng), eta = ue(rng);
    const double smax = std::max(s1, s2);
    auto g = TimeGrid::covering(-16.0 * smax - 120.0, 16.0 * smax + 120.0, 0.1);
    auto p1 = make_sech(s1, 0.0, g);
    auto p2 = make_sech(s2, 0.0, g);
    const double a = oracle::brute_force_p11(p1, p2, tau, eta);
    const double b = coincidence_probability_time(p1, p2, tau, eta);
    REQUIRE_THAT(a, WithinAbs(b, 1e-9));
  }
}

TEST_CASE("brute_force_p11 detects a tampered coincidence formula") {
  // mutation canary: a slightly perturbed eta in the closed form must be flagged
  auto g = TimeGrid::covering(-300.0, 300.0, 0.1);
  auto p1 = make_sech(10.0, 0.0, g);
  auto p2 = make_sech(12.0, 0.0, g);
  const double eta = 0.611;
  const double good = coincidence_probability_time(p1, p2, 9.0, eta);
  const double tampered = coincidence_probability_time(p1, p2, 9.0, eta + 1e-3);
  const double ref = oracle::brute_force_p11(p1, p2, 9.0, eta);
  REQUIRE(std::abs(good - ref) < 1e-9);
  REQUIRE(std::abs(tampered - ref) > 1e-5);
}

TEST_CASE("loss_trace_oracle binomial distributions") {
  const double s = 0.37;
  auto d1 = oracle::loss_trace_oracle(1, s);
  REQUIRE_THAT(d1.at(1), WithinAbs(s, 1e-12));
  REQUIRE_THAT(d1.at(0), WithinAbs(1.0 - s, 1e-12));
  auto d2 = oracle::loss_trace_oracle(2, s);
  REQUIRE_THAT(d2.at(2), WithinAbs(s * s, 1e-12));
  REQUIRE_THAT(d2.at(1), WithinAbs(2.0 * s * (1.0 - s), 1e-12));
  REQUIRE_THAT(d2.at(0), WithinAbs((1.0 - s) * (1.0 - s), 1e-12));
  auto d3 = oracle::loss_trace_oracle(2, 1.0);
  REQUIRE_THAT(d3.at(2), WithinAbs(1.0, 1e-12));
}

TEST_CASE("apply_loss matches the environment-tracing oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int it = 0; it < 10; ++it) {
    const double s = u01(rng);
    for (int n = 0; n <= 2; ++n) {
      auto out = apply_loss(TwoModeFockDensity::fock(n, 0), LossChannel(s, 1.0));
      auto ref = oracle::loss_trace_oracle(n, s);
      for (int k = 0; k <= n; ++k)
        REQUIRE_THAT(out.probability(k, 0), WithinAbs(ref.at(k), 1e-12));
    }
  }
}
