// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lmqc/errors.hpp"

namespace lmqc {

/// One VNA grid point. Passive devices should have |s_ij| <= 1; raw lab data may
/// violate that marginally, so construction only flags it.
struct SParamRecord {
  double frequency_ghz = 0.0;
  std::complex<double> s11, s21, s22, s12;

  bool passivity_violated() const {
    const double tol = 1.0 + 1e-9;
    return std::abs(s11) > tol || std::abs(s21) > tol || std::abs(s22) > tol ||
           std::abs(s12) > tol;
  }
};

struct EtaExtraction {
  double eta = 0.0;
  double theta1 = 0.0; // arg s11 - arg s21
  double theta2 = 0.0; // arg s22 - arg s12
  double frequency_ghz = 0.0;
  bool reciprocal_approximation = false; // s22=s11, s12=s21 was substituted
};

/// Reads `freq_ghz,re_s11,im_s11,re_s21,im_s21[,re_s22,im_s22,re_s12,im_s12]`.
/// Missing s22/s12 columns fall back to the reciprocal approximation and are flagged.
inline std::vector<SParamRecord> read_sparams_csv(std::istream& is,
                                                  bool* reciprocal_flag = nullptr) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_sparams_csv: empty stream");
  std::vector<std::string> cols;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  if (cols.size() != 5 && cols.size() != 9)
    throw IoError("read_sparams_csv: expected 5 or 9 columns, got " +
                  std::to_string(cols.size()));
  if (cols[0] != "freq_ghz")
    throw IoError("read_sparams_csv: first column must be freq_ghz");
  const bool reciprocal = cols.size() == 5;
  if (reciprocal_flag) *reciprocal_flag = reciprocal;

  std::vector<SParamRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (std::getline(ls, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != cols.size())
      throw IoError("read_sparams_csv: malformed row '" + line + "'");
    SParamRecord r;
    r.frequency_ghz = v[0];
    r.s11 = {v[1], v[2]};
    r.s21 = {v[3], v[4]};
    if (reciprocal) {
      r.s22 = r.s11;
      r.s12 = r.s21;
    } else {
      r.s22 = {v[5], v[6]};
      r.s12 = {v[7], v[8]};
    }
    out.push_back(r);
  }
  if (out.empty()) throw IoError("read_sparams_csv: no data rows");
  return out;
}

inline std::vector<SParamRecord> read_sparams_csv(const std::string& path,
                                                  bool* reciprocal_flag = nullptr) {
  std::ifstream is(path);
  if (!is) throw IoError("read_sparams_csv: cannot open " + path);
  return read_sparams_csv(is, reciprocal_flag);
}

/// Room-temperature reflectivity extraction at the grid point nearest f0:
/// eta = |s11|^2 / (|s11|^2 + |s21|^2), with the two port phase differences.
inline EtaExtraction eta_from_s_params(const std::vector<SParamRecord>& records,
                                       double f0_ghz,
                                       bool reciprocal_approximation = false) {
  if (records.empty()) throw ParameterError("eta_from_s_params: no records");
  const auto [lo, hi] = std::minmax_element(
      records.begin(), records.end(),
      [](const SParamRecord& a, const SParamRecord& b) {
        return a.frequency_ghz < b.frequency_ghz;
      });
  if (f0_ghz < lo->frequency_ghz || f0_ghz > hi->frequency_ghz)
    throw ParameterError("eta_from_s_params: f0 outside the measured range");
  const auto& best = *std::min_element(
      records.begin(), records.end(),
      [f0_ghz](const SParamRecord& a, const SParamRecord& b) {
        return std::abs(a.frequency_ghz - f0_ghz) < std::abs(b.frequency_ghz - f0_ghz);
      });
  const double p11 = std::norm(best.s11);
  const double p21 = std::norm(best.s21);
  if (p11 + p21 <= 0.0) throw ParameterError("eta_from_s_params: zero total power at f0");
  EtaExtraction r;
  r.eta = p11 / (p11 + p21);
  r.theta1 = std::arg(best.s11) - std::arg(best.s21);
  r.theta2 = std::arg(best.s22) - std::arg(best.s12);
  r.frequency_ghz = best.frequency_ghz;
  r.reciprocal_approximation = reciprocal_approximation;
  return r;
}

} // namespace lmqc
