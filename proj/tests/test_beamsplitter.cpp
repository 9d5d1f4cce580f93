// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include "lmqc/beamsplitter.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

TEST_CASE("bs_mode_matrix at eta=0.5, theta=pi/2 matches the paper transformations") {
  auto u = bs_mode_matrix(Beamsplitter(0.5));
  const double r = 1.0 / std::sqrt(2.0);
  REQUIRE_THAT(std::abs(u(0, 0) - cdouble(0.0, r)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(u(0, 1) - cdouble(r, 0.0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(u(1, 0) - cdouble(r, 0.0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(u(1, 1) - cdouble(0.0, r)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("bs_mode_matrix limiting case eta=1 is full reflection with phase") {
  auto u = bs_mode_matrix(Beamsplitter(1.0));
  REQUIRE_THAT(std::abs(u(0, 0) - cdouble(0.0, 1.0)), WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(std::abs(u(0, 1)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("bs_mode_matrix is unitary at the symmetric phase convention") {
  for (double eta : {0.0, 0.3, 0.5, 0.611, 0.95, 1.0}) {
    for (double th : {kPi / 2.0, -kPi / 2.0}) {
      auto u = bs_mode_matrix(Beamsplitter(eta, th));
      REQUIRE((u.adjoint() * u - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("apply_bs_fock splits a single phonon into the ideal superposition") {
  auto out = apply_bs_fock(TwoModeFockDensity::fock(1, 0), Beamsplitter(0.5));
  REQUIRE_THAT(out.probability(1, 0), WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(out.probability(0, 1), WithinAbs(0.5, 1e-12));
  // coherence of (i|10> + |01>)/sqrt(2): rho_{10,01} = i/2 * conj(1)/... check phase
  const auto& b = out.basis();
  const auto i10 = static_cast<Eigen::Index>(b.index({1, 0}));
  const auto i01 = static_cast<Eigen::Index>(b.index({0, 1}));
  REQUIRE_THAT(std::abs(out.matrix()(i10, i01) - cdouble(0.0, 0.5)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("apply_bs_fock HOM: |11> at eta=0.5 has zero coincidence") {
  auto out = apply_bs_fock(TwoModeFockDensity::fock(1, 1), Beamsplitter(0.5));
  REQUIRE_THAT(out.probability(1, 1), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(out.probability(2, 0), WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(out.probability(0, 2), WithinAbs(0.5, 1e-12));
  // i(|20> + |02>)/sqrt(2): equal positive coherence between |20> and |02>
  const auto& b = out.basis();
  const auto i20 = static_cast<Eigen::Index>(b.index({2, 0}));
  const auto i02 = static_cast<Eigen::Index>(b.index({0, 2}));
  REQUIRE_THAT(std::abs(out.matrix()(i20, i02) - cdouble(0.5, 0.0)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("apply_bs_fock preserves vacuum, trace, and total occupation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto vac = apply_bs_fock(TwoModeFockDensity(), Beamsplitter(0.611));
  REQUIRE_THAT(vac.probability(0, 0), WithinAbs(1.0, 1e-12));
  for (int it = 0; it < 20; ++it) {
    const double eta = u01(rng);
    FockBasis basis(2, 2);
    // random mixed state
    MatrixXcd a = MatrixXcd::Random(static_cast<Eigen::Index>(basis.size()),
                                    static_cast<Eigen::Index>(basis.size()));
    MatrixXcd rho = a * a.adjoint();
    rho /= rho.trace();
    TwoModeFockDensity st{FockDensity(basis, rho)};
    auto out = apply_bs_fock(st, Beamsplitter(eta));
    REQUIRE_THAT(out.trace(), WithinAbs(1.0, 1e-9));
    REQUIRE(out.state().min_eigenvalue() > -1e-9);
    REQUIRE_THAT(out.mean_total_occupation(), WithinAbs(st.mean_total_occupation(), 1e-9));
  }
}

TEST_CASE("coincidence_probability_time reproduces the quoted endpoints at eta") {
  const double sigma = 17.9;
  auto g = TimeGrid::covering(-18.0 * sigma, 43.0 * sigma, 0.1);
  auto p1 = make_sech(sigma, 0.0, g);
  auto p2 = make_sech(sigma, 0.0, g);
  const double eta = 0.611;
  // far plateau: 1 - 2 eta + 2 eta^2 = 0.524642
  REQUIRE_THAT(coincidence_probability_time(p1, p2, 25.0 * sigma, eta),
               WithinAbs(0.524642, 1e-4));
  // zero delay, identical packets: (1 - 2 eta)^2 = 0.049284
  REQUIRE_THAT(coincidence_probability_time(p1, p2, 0.0, eta), WithinAbs(0.049284, 1e-6));
  // balanced null
  REQUIRE_THAT(coincidence_probability_time(p1, p2, 0.0, 0.5), WithinAbs(0.0, 1e-9));
}

TEST_CASE("time- and frequency-domain P11 agree") {
  auto g = TimeGrid::covering(-400.0, 500.0, 0.1);
  auto p1 = make_sech(16.0, 0.0, g);
  auto p2 = detuned(make_sech(16.7, 0.0, g), 5.0);
  auto s1 = spectrum(p1);
  auto s2 = spectrum(p2);
  for (double tau : {0.0, 20.0, 77.7})
    for (double eta : {0.5, 0.611})
      REQUIRE_THAT(coincidence_probability_freq(s1, s2, tau, eta),
                   WithinAbs(coincidence_probability_time(p1, p2, tau, eta), 1e-6));
}

TEST_CASE("P11 is symmetric in tau for time-symmetric packets") {
  auto g = TimeGrid::covering(-500.0, 500.0, 0.1);
  auto p1 = make_sech(8.4, 0.0, g);
  auto p2 = make_sech(8.3, 0.0, g);
  for (double tau : {10.0, 42.0, 150.0})
    REQUIRE_THAT(coincidence_probability_time(p1, p2, tau, 0.611),
                 WithinAbs(coincidence_probability_time(p1, p2, -tau, 0.611), 1e-9));
}

TEST_CASE("hom_visibility endpoints") {
  REQUIRE_THAT(hom_visibility(0.524, 0.048), WithinAbs(0.908397, 1e-6));
  REQUIRE_THAT(hom_visibility(0.5, 0.5), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(hom_visibility(0.5, 0.0), WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(hom_visibility(0.0, 0.0), ParameterError);
}

TEST_CASE("mz_route balanced lossless routing") {
  auto [pa0, pb0] = mz_route(Beamsplitter(0.5), 0.0, LossChannel());
  REQUIRE_THAT(pa0, WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(pb0, WithinAbs(1.0, 1e-12));
  auto [pa1, pb1] = mz_route(Beamsplitter(0.5), kPi, LossChannel());
  REQUIRE_THAT(pa1, WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(pb1, WithinAbs(0.0, 1e-12));
}

TEST_CASE("mz_route matches the closed forms and conserves probability") {
  const double eta = 0.611;
  double pa_min = 1.0, pa_max = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double dphi = 2.0 * kPi * k / 64.0;
    auto [pa, pb] = mz_route(Beamsplitter(eta), dphi, LossChannel());
    const double pa_ref = eta * eta + (1.0 - eta) * (1.0 - eta) -
                          2.0 * eta * (1.0 - eta) * std::cos(dphi + kPi - kPi);
    const double pb_ref = 2.0 * eta * (1.0 - eta) * (1.0 + std::cos(dphi));
    REQUIRE_THAT(pa, WithinAbs(pa_ref, 1e-12));
    REQUIRE_THAT(pb, WithinAbs(pb_ref, 1e-12));
    REQUIRE_THAT(pa + pb, WithinAbs(1.0, 1e-12));
    pa_min = std::min(pa_min, pa);
    pa_max = std::max(pa_max, pa);
  }
  // brute-force fringe visibility of P_a over the scan: 2 eta(1-eta)/(eta^2+(1-eta)^2)
  REQUIRE_THAT((pa_max - pa_min) / (pa_max + pa_min), WithinAbs(0.906062, 1e-4));
}

TEST_CASE("mz_route with loss keeps P_a + P_b below the survival-weighted total") {
  auto [pa, pb] = mz_route(Beamsplitter(0.5), 0.7, LossChannel(0.8, 0.6));
  REQUIRE(pa + pb <= 1.0 + 1e-12);
  REQUIRE(pa + pb <= 0.8 + 1e-12); // bounded by the better arm
  auto [pa2, pb2] = mz_route(Beamsplitter(0.5), 0.7, LossChannel(1.0, 1.0));
  REQUIRE_THAT(pa2 + pb2, WithinAbs(1.0, 1e-12));
}

TEST_CASE("mz_route reflection-phase offset shifts the P_a fringe") {
  const double theta = 0.27 * kPi; // places the P_a maximum at dphi = 1.46 pi
  double best_phi = 0.0, best = -1.0;
  for (int k = 0; k < 2000; ++k) {
    const double dphi = 2.0 * kPi * k / 2000.0;
    auto [pa, pb] = mz_route(Beamsplitter(0.611, theta), dphi, LossChannel());
    if (pa > best) { best = pa; best_phi = dphi; }
  }
  REQUIRE_THAT(best_phi / kPi, WithinAbs(1.46, 0.01));
}

TEST_CASE("apply_loss acts as single-photon loss algebra") {
  auto id = apply_loss(TwoModeFockDensity::fock(1, 0), LossChannel(1.0, 1.0));
  REQUIRE_THAT(id.probability(1, 0), WithinAbs(1.0, 1e-12));
  const double s = 0.73;
  auto out = apply_loss(TwoModeFockDensity::fock(1, 0), LossChannel(s, 1.0));
  REQUIRE_THAT(out.probability(1, 0), WithinAbs(s, 1e-12));
  REQUIRE_THAT(out.probability(0, 0), WithinAbs(1.0 - s, 1e-12));
  REQUIRE_THAT(out.trace(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("apply_loss on |20> follows the binomial distribution") {
  const double s = 0.61;
  auto out = apply_loss(TwoModeFockDensity::fock(2, 0), LossChannel(s, 1.0));
  REQUIRE_THAT(out.probability(2, 0), WithinAbs(s * s, 1e-12));
  REQUIRE_THAT(out.probability(1, 0), WithinAbs(2.0 * s * (1.0 - s), 1e-12));
  REQUIRE_THAT(out.probability(0, 0), WithinAbs((1.0 - s) * (1.0 - s), 1e-12));
}

TEST_CASE("composing losses multiplies survivals") {
  const double s1 = 0.8, s2 = 0.7;
  auto once = apply_loss(apply_loss(TwoModeFockDensity::fock(1, 1), LossChannel(s1, s1)),
                         LossChannel(s2, s2));
  auto direct = apply_loss(TwoModeFockDensity::fock(1, 1), LossChannel(s1 * s2, s1 * s2));
  REQUIRE((once.matrix() - direct.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("loss commutes with the beamsplitter when both channels decay equally") {
  const double s = 0.55;
  auto in = TwoModeFockDensity::fock(1, 1);
  auto a = apply_loss(apply_bs_fock(in, Beamsplitter(0.611)), LossChannel(s, s));
  auto b = apply_bs_fock(apply_loss(in, LossChannel(s, s)), Beamsplitter(0.611));
  REQUIRE((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}
