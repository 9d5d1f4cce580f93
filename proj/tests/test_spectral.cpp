// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "lmqc/spectral.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

TEST_CASE("spectrum satisfies Parseval") {
  for (double sigma : {8.4, 16.0, 17.9}) {
    auto p = make_sech(sigma, 0.0, sech_default_grid(sigma, 0.0));
    auto s = spectrum(p);
    REQUIRE_THAT(s.norm_squared(), WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("sech spectrum is real-positive up to global phase when centered at 0") {
  auto p = make_sech(16.0, 0.0, sech_default_grid(16.0, 0.0));
  auto s = spectrum(p);
  // fix the global phase from the peak, then check imaginary residue
  Eigen::Index peak;
  s.amplitude.cwiseAbs().maxCoeff(&peak);
  const cdouble ph = s.amplitude[peak] / std::abs(s.amplitude[peak]);
  double max_im = 0.0, max_re = 0.0;
  for (Eigen::Index i = 0; i < s.amplitude.size(); ++i) {
    const cdouble v = s.amplitude[i] / ph;
    max_im = std::max(max_im, std::abs(v.imag()));
    max_re = std::max(max_re, v.real());
  }
  REQUIRE(max_im < 1e-6 * max_re);
}

TEST_CASE("time-domain and frequency-domain overlaps agree") {
  auto g = TimeGrid::covering(-400.0, 500.0, 0.1);
  auto p = make_sech(16.0, 0.0, g);
  auto q = detuned(make_sech(16.7, 20.0, g), 4.0);
  auto sp = spectrum(p);
  auto sq = spectrum(q);
  for (double tau : {0.0, 13.0, 55.5}) {
    const cdouble ot = overlap(delayed(p, tau, DelayMethod::kBandLimited), q);
    const cdouble of = spectral_overlap(sp, sq, tau);
    REQUIRE_THAT(std::abs(ot - of), WithinAbs(0.0, 1e-6));
  }
}

TEST_CASE("spectral_overlap rejects incompatible axes") {
  auto p = make_sech(16.0, 0.0, sech_default_grid(16.0, 0.0));
  auto q = make_sech(16.0, 0.0, sech_default_grid(16.0, 0.0, 0.05));
  REQUIRE_THROWS_AS(spectral_overlap(spectrum(p), spectrum(q)), ParameterError);
}
