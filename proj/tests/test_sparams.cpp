// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <sstream>

#include "lmqc/sparams.hpp"

using namespace lmqc;
using Catch::Matchers::WithinAbs;

namespace {

// Ideal symmetric beamsplitter embedded in a lossy measurement chain.
std::string synthetic_csv(double eta, double loss_amp = 0.1) {
  std::ostringstream os;
  os.precision(17);
  os << "freq_ghz,re_s11,im_s11,re_s21,im_s21,re_s22,im_s22,re_s12,im_s12\n";
  for (int k = 0; k <= 200; ++k) {
    const double f = 3.80 + 0.25 * k / 200.0;
    const double a = loss_amp * (1.0 + 0.2 * std::sin(40.0 * (f - 3.9)));
    const std::complex<double> r = std::complex<double>(0.0, 1.0) * std::sqrt(eta) * a;
    const std::complex<double> t = std::sqrt(1.0 - eta) * a;
    os << f << ',' << r.real() << ',' << r.imag() << ',' << t.real() << ',' << t.imag()
       << ',' << r.real() << ',' << r.imag() << ',' << t.real() << ',' << t.imag() << '\n';
  }
  return os.str();
}

} // namespace

TEST_CASE("eta extraction recovers the synthetic reflectivity") {
  std::istringstream is(synthetic_csv(0.612));
  bool flag = true;
  auto recs = read_sparams_csv(is, &flag);
  REQUIRE_FALSE(flag);
  auto r = eta_from_s_params(recs, 3.925, flag);
  REQUIRE_THAT(r.eta, WithinAbs(0.612, 1e-6));
  REQUIRE_THAT(r.theta1 + r.theta2, WithinAbs(std::numbers::pi, 1e-6));
  REQUIRE_FALSE(r.reciprocal_approximation);
}

TEST_CASE("equal powers give eta = 1/2") {
  std::istringstream is(synthetic_csv(0.5));
  auto recs = read_sparams_csv(is);
  REQUIRE_THAT(eta_from_s_params(recs, 3.9).eta, WithinAbs(0.5, 1e-9));
}

TEST_CASE("missing s22/s12 columns trigger the reciprocal approximation flag") {
  std::ostringstream os;
  os << "freq_ghz,re_s11,im_s11,re_s21,im_s21\n";
  os << "3.9,0.0,0.07,0.07,0.0\n3.95,0.0,0.07,0.07,0.0\n";
  std::istringstream is(os.str());
  bool flag = false;
  auto recs = read_sparams_csv(is, &flag);
  REQUIRE(flag);
  auto r = eta_from_s_params(recs, 3.92, flag);
  REQUIRE(r.reciprocal_approximation);
  REQUIRE_THAT(r.eta, WithinAbs(0.5, 1e-9));
  REQUIRE_THAT(r.theta1, WithinAbs(r.theta2, 1e-12));
}

TEST_CASE("eta extraction rejects out-of-range f0 and zero power") {
  std::istringstream is(synthetic_csv(0.6));
  auto recs = read_sparams_csv(is);
  REQUIRE_THROWS_AS(eta_from_s_params(recs, 5.0), ParameterError);
  std::vector<SParamRecord> zero{{3.9, {0, 0}, {0, 0}, {0, 0}, {0, 0}}};
  REQUIRE_THROWS_AS(eta_from_s_params(zero, 3.9), ParameterError);
}

TEST_CASE("malformed sparams files are rejected") {
  std::istringstream bad1("nope\n1,2\n");
  REQUIRE_THROWS_AS(read_sparams_csv(bad1), IoError);
  std::istringstream bad2("freq_ghz,re_s11,im_s11,re_s21,im_s21\n3.9,0.1\n");
  REQUIRE_THROWS_AS(read_sparams_csv(bad2), IoError);
}

TEST_CASE("passivity warning flag on hot records") {
  SParamRecord r{3.9, {1.2, 0.0}, {0.1, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  REQUIRE(r.passivity_violated());
  SParamRecord ok{3.9, {0.3, 0.0}, {0.1, 0.0}, {0.3, 0.0}, {0.1, 0.0}};
  REQUIRE_FALSE(ok.passivity_violated());
}
