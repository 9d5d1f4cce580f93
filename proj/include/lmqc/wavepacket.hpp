// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lmqc/errors.hpp"
#include "lmqc/time_grid.hpp"

namespace lmqc {

using cdouble = std::complex<double>;
using VectorXcd = Eigen::VectorXcd;

/// Normalized complex temporal mode phi(t) on a uniform grid.
/// Units of the amplitude are ns^(-1/2); sum |phi|^2 dt = 1 after construction.
class Wavepacket {
public:
  Wavepacket(TimeGrid grid, VectorXcd amplitude, std::string label = {})
      : grid_(grid), amp_(std::move(amplitude)), label_(std::move(label)) {
    if (amp_.size() != grid_.n_samples)
      throw ParameterError("Wavepacket: amplitude length does not match grid");
    if (!amp_.allFinite()) throw ParameterError("Wavepacket: non-finite amplitude");
  }

  const TimeGrid& grid() const { return grid_; }
  const VectorXcd& amplitude() const { return amp_; }
  const std::string& label() const { return label_; }

  double norm_squared() const { return amp_.squaredNorm() * grid_.dt; }

  /// Rescale so that norm_squared() == 1.
  Wavepacket normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw ParameterError("Wavepacket: cannot normalize zero packet");
    Wavepacket out = *this;
    out.amp_ /= std::sqrt(n2);
    return out;
  }

private:
  TimeGrid grid_;
  VectorXcd amp_;
  std::string label_;
};

/// Inner product <p|q> = sum conj(p) q dt. Shared grid required.
inline cdouble overlap(const Wavepacket& p, const Wavepacket& q) {
  if (p.grid() != q.grid()) throw ParameterError("overlap: mismatched grids");
  return p.amplitude().dot(q.amplitude()) * p.grid().dt;
}

namespace detail {

// Truncated-norm deficit of the analytic sech packet outside [grid start, grid end].
// Tail mass of sech^2((t-tc)/2s)/(4s) beyond T on one side is (1 - tanh((T-tc)/2s))/2.
inline double sech_truncation_deficit(double sigma, double t_center, const TimeGrid& g) {
  const double left = (t_center - g.t_start) / (2.0 * sigma);
  const double right = (g.t_end() - t_center) / (2.0 * sigma);
  return 0.5 * (1.0 - std::tanh(left)) + 0.5 * (1.0 - std::tanh(right));
}

} // namespace detail

/// Width of grid support, in units of sigma, that make_sech grids use by default.
/// 16 sigma keeps the truncated tail mass below 1e-6 (12 sigma would leave ~1.2e-5).
inline constexpr double kSechGridHalfWidthSigmas = 16.0;

/// Default grid for a sech packet of width sigma centered at t_center.
inline TimeGrid sech_default_grid(double sigma, double t_center, double dt = 0.1) {
  const double half = kSechGridHalfWidthSigmas * sigma;
  return TimeGrid::covering(t_center - half, t_center + half, dt);
}

/// phi(t) = (4 sigma)^(-1/2) sech((t - t_center)/(2 sigma)), renormalized on the grid.
/// Rejects grids whose truncated-norm deficit exceeds 1e-6.
inline Wavepacket make_sech(double sigma, double t_center, const TimeGrid& grid,
                            std::string label = {}) {
  if (!(sigma > 0.0)) throw ParameterError("make_sech: sigma must be > 0");
  const double deficit = detail::sech_truncation_deficit(sigma, t_center, grid);
  if (deficit > 1e-6) {
    std::ostringstream msg;
    msg << "make_sech: grid too narrow, truncated norm deficit " << deficit
        << " > 1e-6 (need about +/-14.5 sigma of support)";
    throw ParameterError(msg.str());
  }
  VectorXcd amp(grid.n_samples);
  const double a = 1.0 / std::sqrt(4.0 * sigma);
  for (std::int64_t k = 0; k < grid.n_samples; ++k) {
    const double x = (grid.time(k) - t_center) / (2.0 * sigma);
    amp[k] = a / std::cosh(x);
  }
  return Wavepacket(grid, std::move(amp), std::move(label)).normalized();
}

enum class DelayMethod {
  kLinear,      // linear interpolation on the (oversampled) grid
  kBandLimited, // FFT fractional delay; exact for band-limited signals
};

namespace detail {

inline std::int64_t next_pow2(std::int64_t n) {
  std::int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 FFT (sign = -1 forward, +1 inverse, unnormalized).
inline void fft_radix2(std::vector<cdouble>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const cdouble wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cdouble w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        cdouble u = a[i + k];
        cdouble v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

} // namespace detail

/// Resample phi(t - tau) onto the same grid. Samples shifted off the grid are lost;
/// the packet is rejected if that truncated mass exceeds 1e-6. The result is not
/// renormalized; the shift preserves the norm up to interpolation error (below 1e-6
/// for the packet widths used here, exact at grid-aligned shifts, ~1e-9 for the
/// band-limited method).
inline Wavepacket delayed(const Wavepacket& p, double tau,
                          DelayMethod method = DelayMethod::kLinear) {
  const TimeGrid& g = p.grid();
  const auto n = g.n_samples;

  double truncated = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double t_shifted = g.time(k) + tau;
    if (t_shifted < g.t_start - 1e-12 || t_shifted > g.t_end() + 1e-12)
      truncated += std::norm(p.amplitude()[k]) * g.dt;
  }
  if (truncated > 1e-6) {
    std::ostringstream msg;
    msg << "delayed: shift by " << tau << " ns pushes norm " << truncated
        << " off the grid";
    throw ParameterError(msg.str());
  }

  VectorXcd out(n);
  if (method == DelayMethod::kLinear) {
    const double shift = tau / g.dt;
    for (std::int64_t k = 0; k < n; ++k) {
      const double s = static_cast<double>(k) - shift;
      const auto j = static_cast<std::int64_t>(std::floor(s));
      if (j < 0 || j + 1 >= n) {
        // allow exact hits on the last sample
        if (j == n - 1 && s == static_cast<double>(j)) {
          out[k] = p.amplitude()[j];
        } else {
          out[k] = 0.0;
        }
        continue;
      }
      const double f = s - static_cast<double>(j);
      out[k] = (1.0 - f) * p.amplitude()[j] + f * p.amplitude()[j + 1];
    }
  } else {
    // Zero-pad to 2x to suppress circular wrap-around, shift in frequency space.
    const std::int64_t np = detail::next_pow2(2 * n);
    std::vector<cdouble> buf(static_cast<std::size_t>(np), cdouble(0.0, 0.0));
    for (std::int64_t k = 0; k < n; ++k) buf[static_cast<std::size_t>(k)] = p.amplitude()[k];
    detail::fft_radix2(buf, -1);
    for (std::int64_t j = 0; j < np; ++j) {
      const std::int64_t jj = (j <= np / 2) ? j : j - np;
      const double w = 2.0 * std::numbers::pi * static_cast<double>(jj) /
                       (static_cast<double>(np) * g.dt);
      const cdouble ph(std::cos(w * tau), -std::sin(w * tau));
      buf[static_cast<std::size_t>(j)] *= ph;
    }
    detail::fft_radix2(buf, +1);
    for (std::int64_t k = 0; k < n; ++k)
      out[k] = buf[static_cast<std::size_t>(k)] / static_cast<double>(np);
  }
  return Wavepacket(g, std::move(out), p.label());
}

/// Multiply by exp(-i 2 pi delta_f t). delta_f in MHz, t in ns. Norm is unchanged.
inline Wavepacket detuned(const Wavepacket& p, double delta_f_mhz) {
  const double df_per_ns = delta_f_mhz * 1e-3; // cycles per ns
  if (std::abs(df_per_ns) > 0.5 / p.grid().dt)
    throw ParameterError("detuned: |delta_f| exceeds the grid Nyquist frequency");
  VectorXcd out(p.grid().n_samples);
  const double w = 2.0 * std::numbers::pi * df_per_ns;
  for (std::int64_t k = 0; k < p.grid().n_samples; ++k) {
    const double t = p.grid().time(k);
    out[k] = p.amplitude()[k] * cdouble(std::cos(w * t), -std::sin(w * t));
  }
  return Wavepacket(p.grid(), std::move(out), p.label());
}

/// Normalized superposition sum_i w_i phi_i(t). Packets must share a grid.
inline Wavepacket compose_bins(const std::vector<Wavepacket>& packets,
                               const std::vector<cdouble>& weights,
                               std::string label = {}) {
  if (packets.empty() || packets.size() != weights.size())
    throw ParameterError("compose_bins: need equally many packets and weights");
  const TimeGrid& g = packets.front().grid();
  VectorXcd acc = VectorXcd::Zero(g.n_samples);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (packets[i].grid() != g) throw ParameterError("compose_bins: mismatched grids");
    acc += weights[i] * packets[i].amplitude();
  }
  Wavepacket out(g, std::move(acc), std::move(label));
  if (out.norm_squared() < 1e-12)
    throw ParameterError("compose_bins: superposition has zero norm");
  return out.normalized();
}

/// CSV export with header "t_ns,re_amp,im_amp".
inline void write_wavepacket_csv(const Wavepacket& p, std::ostream& os) {
  os << "t_ns,re_amp,im_amp\n";
  os.precision(17);
  for (std::int64_t k = 0; k < p.grid().n_samples; ++k) {
    os << p.grid().time(k) << ',' << p.amplitude()[k].real() << ','
       << p.amplitude()[k].imag() << '\n';
  }
}

inline void write_wavepacket_csv(const Wavepacket& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("write_wavepacket_csv: cannot open " + path);
  write_wavepacket_csv(p, os);
}

/// CSV import; expects the header written by write_wavepacket_csv and a uniform
/// time column.
inline Wavepacket read_wavepacket_csv(std::istream& is, std::string label = {}) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_wavepacket_csv: empty stream");
  if (line.find("t_ns") == std::string::npos)
    throw IoError("read_wavepacket_csv: missing header row");
  std::vector<double> t;
  std::vector<cdouble> a;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double tv, re, im;
    char c1, c2;
    if (!(ls >> tv >> c1 >> re >> c2 >> im))
      throw IoError("read_wavepacket_csv: malformed row '" + line + "'");
    t.push_back(tv);
    a.emplace_back(re, im);
  }
  if (t.size() < 2) throw IoError("read_wavepacket_csv: need at least 2 samples");
  const double dt = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw IoError("read_wavepacket_csv: non-uniform time grid");
  }
  TimeGrid g(t[0], dt, static_cast<std::int64_t>(t.size()));
  VectorXcd amp(g.n_samples);
  for (std::int64_t k = 0; k < g.n_samples; ++k) amp[k] = a[static_cast<std::size_t>(k)];
  return Wavepacket(g, std::move(amp), std::move(label));
}

inline Wavepacket read_wavepacket_csv(const std::string& path, std::string label = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("read_wavepacket_csv: cannot open " + path);
  return read_wavepacket_csv(is, std::move(label));
}

} // namespace lmqc
