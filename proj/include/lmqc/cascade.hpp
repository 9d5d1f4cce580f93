// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "lmqc/coupler.hpp"
#include "lmqc/fock.hpp"
#include "lmqc/qubit.hpp"

namespace lmqc {

/// Time series of qubit populations from a master-equation integration.
struct SimulationTrace {
  std::vector<double> times;
  std::vector<double> p_q1, p_q2, p_ee;

  void validate() const {
    const auto n = times.size();
    if (p_q1.size() != n || p_q2.size() != n || p_ee.size() != n)
      throw ParameterError("SimulationTrace: ragged columns");
    for (std::size_t k = 0; k < n; ++k) {
      for (double p : {p_q1[k], p_q2[k], p_ee[k]})
        if (p < -1e-9 || p > 1.0 + 1e-9)
          throw ParameterError("SimulationTrace: probability out of range");
      if (p_ee[k] > std::min(p_q1[k], p_q2[k]) + 1e-9)
        throw ParameterError("SimulationTrace: p_ee exceeds a marginal");
    }
  }
};

namespace cascade_detail {

using CoeffFn = std::function<cdouble(double)>;

struct TimedOperator {
  MatrixXcd op;
  CoeffFn coeff; // nullptr means constant 1
};

struct Dissipator {
  std::vector<TimedOperator> parts; // L(t) = sum coeff_i(t) op_i
};

/// Constant local channels in closed form: diagonal anticommutator weights,
/// an elementwise dephasing mask, and strided jump maps for qubit relaxation.
struct FastLocals {
  Eigen::VectorXd k_diag;  // sum of L^dag L diagonals (real)
  Eigen::MatrixXd deph_mask; // sum of c^2 d_i d_j for diagonal jump parts
  struct Jump {
    double rate;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> map; // (from, to) basis pairs
  };
  std::vector<Jump> jumps;

  void init(Eigen::Index dim) {
    k_diag = Eigen::VectorXd::Zero(dim);
    deph_mask = Eigen::MatrixXd::Zero(dim, dim);
  }
};

struct LindbladSystem {
  Eigen::Index dim = 0;
  std::vector<TimedOperator> hamiltonian; // H(t) = sum coeff_i(t) op_i (+ its h.c. partner)
  std::vector<Dissipator> dissipators;    // time-dependent channels
  FastLocals locals;
};

inline MatrixXcd assemble(const std::vector<TimedOperator>& terms, Eigen::Index dim,
                          double t) {
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (const auto& term : terms)
    out += (term.coeff ? term.coeff(t) : cdouble(1.0, 0.0)) * term.op;
  return out;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Embed a local operator at position k of a kron-product space.
inline MatrixXcd embed(const std::vector<int>& dims, std::size_t k, const MatrixXcd& local) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i == k) {
      out = kron(out, local);
    } else {
      out = kron(out, MatrixXcd::Identity(dims[i], dims[i]));
    }
  }
  return out;
}

inline MatrixXcd boson_lowering(int levels) {
  MatrixXcd a = MatrixXcd::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

inline MatrixXcd qubit_lowering() {
  MatrixXcd s = MatrixXcd::Zero(2, 2);
  s(0, 1) = 1.0; // |g><e|
  return s;
}

inline MatrixXcd qubit_sz() {
  MatrixXcd s = MatrixXcd::Zero(2, 2);
  s(0, 0) = -1.0;
  s(1, 1) = 1.0;
  return s;
}

inline MatrixXcd qubit_pe() {
  MatrixXcd s = MatrixXcd::Zero(2, 2);
  s(1, 1) = 1.0;
  return s;
}

/// One emitter/absorber in a cascaded chain, ordered upstream to downstream.
struct ChainNode {
  MatrixXcd lowering;  // embedded lowering operator
  CoeffFn coeff;       // channel coupling amplitude c(t); L = c(t) A
  double link_survival_after = 1.0; // loss link between this node and the next
};

/// Cascaded master equation for a unidirectional chain with lossy links:
/// one line dissipator with downstream-attenuated couplings, one dissipator per
/// lossy link, and the cascade Hamiltonian
///   H_c = sum_{j<k} T(j,k) (i/2)(L_j^dag L_k - L_k^dag L_j).
inline LindbladSystem build_chain(Eigen::Index dim, const std::vector<ChainNode>& nodes) {
  LindbladSystem sys;
  sys.dim = dim;
  const std::size_t m = nodes.size();

  auto amp_between = [&](std::size_t j, std::size_t k) {
    double t = 1.0;
    for (std::size_t l = j; l < k; ++l) t *= std::sqrt(nodes[l].link_survival_after);
    return t;
  };

  Dissipator line;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = amp_between(j, m - 1);
    const auto cj = nodes[j].coeff;
    line.parts.push_back({nodes[j].lowering,
                          [cj, t](double s) { return t * (cj ? cj(s) : cdouble(1.0, 0.0)); }});
  }
  sys.dissipators.push_back(std::move(line));

  for (std::size_t l = 0; l + 1 < m; ++l) {
    const double s_l = nodes[l].link_survival_after;
    if (s_l >= 1.0 - 1e-15) continue;
    Dissipator leak;
    const double r = std::sqrt(1.0 - s_l);
    for (std::size_t j = 0; j <= l; ++j) {
      const double t = r * amp_between(j, l);
      const auto cj = nodes[j].coeff;
      leak.parts.push_back({nodes[j].lowering, [cj, t](double s) {
                              return t * (cj ? cj(s) : cdouble(1.0, 0.0));
                            }});
    }
    sys.dissipators.push_back(std::move(leak));
  }

  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j + 1; k < m; ++k) {
      const double t = amp_between(j, k);
      const MatrixXcd m1 = nodes[j].lowering.adjoint() * nodes[k].lowering;
      const auto cj = nodes[j].coeff;
      const auto ck = nodes[k].coeff;
      auto c1 = [cj, ck, t](double s) {
        const cdouble a = cj ? cj(s) : cdouble(1.0, 0.0);
        const cdouble b = ck ? ck(s) : cdouble(1.0, 0.0);
        return cdouble(0.0, 0.5) * t * std::conj(a) * b;
      };
      sys.hamiltonian.push_back({m1, c1});
      auto c2 = [cj, ck, t](double s) {
        const cdouble a = cj ? cj(s) : cdouble(1.0, 0.0);
        const cdouble b = ck ? ck(s) : cdouble(1.0, 0.0);
        return std::conj(cdouble(0.0, 0.5) * t * std::conj(a) * b);
      };
      sys.hamiltonian.push_back({m1.adjoint().eval(), c2});
    }
  }
  return sys;
}

struct RhsWorkspace {
  MatrixXcd h, l, t1, t2, out;
  void init(Eigen::Index dim) {
    h = l = t1 = t2 = out = MatrixXcd::Zero(dim, dim);
  }
};

/// rho is assumed Hermitian (preserved by the flow), which halves the products:
/// rho H = (H rho)^dag and rho L^dag L = (L^dag L rho)^dag.
inline const MatrixXcd& rhs(const LindbladSystem& sys, double t, const MatrixXcd& rho,
                            RhsWorkspace& ws) {
  ws.out.setZero();
  if (!sys.hamiltonian.empty()) {
    ws.h = assemble(sys.hamiltonian, sys.dim, t);
    ws.t1.noalias() = ws.h * rho;
    ws.out -= cdouble(0.0, 1.0) * ws.t1;
    ws.out += cdouble(0.0, 1.0) * ws.t1.adjoint();
  }
  for (const auto& d : sys.dissipators) {
    ws.l.setZero();
    for (const auto& part : d.parts)
      ws.l += (part.coeff ? part.coeff(t) : cdouble(1.0, 0.0)) * part.op;
    ws.t1.noalias() = ws.l * rho;
    ws.out.noalias() += ws.t1 * ws.l.adjoint();
    ws.t2.noalias() = ws.l.adjoint() * ws.t1;
    ws.out -= 0.5 * ws.t2;
    ws.out -= 0.5 * ws.t2.adjoint();
  }
  if (sys.locals.k_diag.size() == sys.dim) {
    for (Eigen::Index j = 0; j < sys.dim; ++j)
      for (Eigen::Index i = 0; i < sys.dim; ++i)
        ws.out(i, j) += (sys.locals.deph_mask(i, j) -
                         0.5 * (sys.locals.k_diag[i] + sys.locals.k_diag[j])) *
                        rho(i, j);
    for (const auto& jump : sys.locals.jumps)
      for (const auto& [fa, ta] : jump.map)
        for (const auto& [fb, tb] : jump.map)
          ws.out(ta, tb) += jump.rate * rho(fa, fb);
  }
  return ws.out;
}

struct Observable {
  std::string name;
  MatrixXcd op;
};

struct IntegrationResult {
  std::vector<double> times;
  std::vector<std::vector<double>> values; // one row per observable
  MatrixXcd final_rho;
};

/// Fixed-step RK4 with trace-drift monitoring. A drift above 1e-6 restarts the
/// integration with a halved step, up to three times.
inline IntegrationResult integrate(const LindbladSystem& sys, MatrixXcd rho0, double t0,
                                   double t1, double dt,
                                   const std::vector<Observable>& observables,
                                   int sample_stride = 10) {
  RhsWorkspace ws;
  ws.init(sys.dim);
  MatrixXcd k1(sys.dim, sys.dim), k2(sys.dim, sys.dim), k3(sys.dim, sys.dim),
      k4(sys.dim, sys.dim), stage(sys.dim, sys.dim);
  for (int attempt = 0;; ++attempt, dt *= 0.5, sample_stride *= 2) {
    IntegrationResult res;
    res.values.resize(observables.size());
    MatrixXcd rho = rho0;
    const auto n_steps = static_cast<std::int64_t>(std::ceil((t1 - t0) / dt));
    bool drifted = false;
    for (std::int64_t step = 0; step <= n_steps; ++step) {
      const double t = t0 + step * dt;
      if (step % sample_stride == 0 || step == n_steps) {
        res.times.push_back(t);
        for (std::size_t o = 0; o < observables.size(); ++o)
          res.values[o].push_back((observables[o].op * rho).trace().real());
      }
      if (step == n_steps) break;
      k1 = rhs(sys, t, rho, ws);
      stage = rho + 0.5 * dt * k1;
      k2 = rhs(sys, t + 0.5 * dt, stage, ws);
      stage = rho + 0.5 * dt * k2;
      k3 = rhs(sys, t + 0.5 * dt, stage, ws);
      stage = rho + dt * k3;
      k4 = rhs(sys, t + dt, stage, ws);
      rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (step % 200 == 0 && std::abs(rho.trace().real() - 1.0) > 1e-6) {
        drifted = true;
        break;
      }
    }
    if (!drifted) {
      if (std::abs(rho.trace().real() - 1.0) > 1e-6) {
        drifted = true;
      } else {
        res.final_rho = std::move(rho);
        return res;
      }
    }
    if (attempt >= 3)
      throw NumericalError("cascade: trace drift persists after step halving");
  }
}

/// Linear interpolation of a real schedule over its grid, zero outside.
inline std::function<double(double)> sampled_rate(const TimeGrid& g, const VectorXd& v) {
  return [g, v](double t) {
    const double s = (t - g.t_start) / g.dt;
    const auto j = static_cast<std::int64_t>(std::floor(s));
    if (j < 0 || j + 1 >= g.n_samples) {
      if (j == g.n_samples - 1 && s <= static_cast<double>(j) + 1e-9) return v[j];
      return 0.0;
    }
    const double f = s - static_cast<double>(j);
    return (1.0 - f) * v[j] + f * v[j + 1];
  };
}

inline std::function<cdouble(double)> sampled_amplitude(const TimeGrid& g,
                                                        const VectorXcd& v) {
  return [g, v](double t) {
    const double s = (t - g.t_start) / g.dt;
    const auto j = static_cast<std::int64_t>(std::floor(s));
    if (j < 0 || j + 1 >= g.n_samples) {
      if (j == g.n_samples - 1 && s <= static_cast<double>(j) + 1e-9) return v[j];
      return cdouble(0.0, 0.0);
    }
    const double f = s - static_cast<double>(j);
    return (1.0 - f) * v[j] + f * v[j + 1];
  };
}

/// Coupling that drains a source cavity so it emits the packet w(t):
/// g_u(t) = conj(w(t)) / sqrt(1 - integral_t0^t |w|^2), denominator clamped at 1e-6.
inline CoeffFn source_cavity_coupling(const Wavepacket& w) {
  const TimeGrid& g = w.grid();
  VectorXcd coeff(g.n_samples);
  double cum = 0.0;
  for (std::int64_t k = 0; k < g.n_samples; ++k) {
    const double denom = std::max(std::sqrt(std::max(1.0 - cum, 0.0)), 1e-6);
    coeff[k] = std::conj(w.amplitude()[k]) / denom;
    cum += std::norm(w.amplitude()[k]) * g.dt;
  }
  return sampled_amplitude(g, coeff);
}

/// Coupling that makes a sink cavity absorb the packet w(t):
/// g_v(t) = -conj(w(t)) / sqrt(integral_t0^t |w|^2), denominator clamped at 1e-6.
inline CoeffFn sink_cavity_coupling(const Wavepacket& w) {
  const TimeGrid& g = w.grid();
  VectorXcd coeff(g.n_samples);
  double cum = 0.0;
  for (std::int64_t k = 0; k < g.n_samples; ++k) {
    cum += std::norm(w.amplitude()[k]) * g.dt;
    const double denom = std::max(std::sqrt(cum), 1e-6);
    coeff[k] = -std::conj(w.amplitude()[k]) / denom;
  }
  return sampled_amplitude(g, coeff);
}

inline CoeffFn coupler_coupling(const CouplerSchedule& schedule) {
  VectorXd root = schedule.kappa.cwiseSqrt();
  auto fn = sampled_rate(schedule.grid, root);
  return [fn](double t) { return cdouble(fn(t), 0.0); };
}

/// Append the qubit's intrinsic relaxation and pure dephasing to the system's
/// constant-channel fast path.
inline void add_qubit_locals(LindbladSystem& sys, const std::vector<int>& dims,
                             std::size_t pos, const QubitParams& q) {
  if (sys.locals.k_diag.size() != sys.dim) sys.locals.init(sys.dim);
  const double g1 = q.gamma1_per_ns();
  const double gphi = q.gamma_phi_per_ns();

  const MatrixXcd pe = embed(dims, pos, qubit_pe());
  if (g1 > 0.0) {
    // L = sqrt(g1) |g><e|: L^dag L = g1 |e><e|; jump maps the e-block to the g-block
    sys.locals.k_diag += g1 * pe.diagonal().real();
    const MatrixXcd low = embed(dims, pos, qubit_lowering());
    FastLocals::Jump jump;
    jump.rate = g1;
    for (Eigen::Index j = 0; j < sys.dim; ++j)
      for (Eigen::Index i = 0; i < sys.dim; ++i)
        if (std::abs(low(i, j)) > 0.5) jump.map.emplace_back(j, i);
    sys.locals.jumps.push_back(std::move(jump));
  }
  if (gphi > 0.0) {
    // L = sqrt(gphi/2) sigma_z: L^dag L = gphi/2, jump part is diagonal
    const double c2 = gphi / 2.0;
    const Eigen::VectorXd dz = embed(dims, pos, qubit_sz()).diagonal().real();
    sys.locals.k_diag += Eigen::VectorXd::Constant(sys.dim, c2);
    sys.locals.deph_mask += c2 * (dz * dz.transpose());
  }
}

} // namespace cascade_detail

/// Reset one subsystem of a kron-product density matrix to its ground state,
/// leaving the marginals of every other subsystem untouched.
inline MatrixXcd thermal_dump(const MatrixXcd& rho, const std::vector<int>& dims,
                              std::size_t subsystem) {
  Eigen::Index dim = 1;
  for (int d : dims) dim *= d;
  if (rho.rows() != dim || rho.cols() != dim)
    throw ParameterError("thermal_dump: dimension mismatch");
  std::vector<Eigen::Index> strides(dims.size());
  Eigen::Index s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    strides[k] = s;
    s *= dims[k];
  }
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  const int ds = dims[subsystem];
  const Eigen::Index stride = strides[subsystem];
  for (Eigen::Index i = 0; i < dim; ++i) {
    const int si = static_cast<int>((i / stride) % ds);
    if (si != 0) continue; // build only rows with the subsystem in |0>
    for (Eigen::Index j = 0; j < dim; ++j) {
      const int sj = static_cast<int>((j / stride) % ds);
      if (sj != 0) continue;
      cdouble acc(0.0, 0.0);
      for (int a = 0; a < ds; ++a)
        acc += rho(i + a * stride, j + a * stride);
      out(i, j) = acc;
    }
  }
  return out;
}

/// Partial trace keeping the listed subsystems (in their original order).
inline MatrixXcd partial_trace_keep(const MatrixXcd& rho, const std::vector<int>& dims,
                                    const std::vector<std::size_t>& keep) {
  std::vector<Eigen::Index> strides(dims.size());
  Eigen::Index s = 1;
  for (std::size_t k = dims.size(); k-- > 0;) {
    strides[k] = s;
    s *= dims[k];
  }
  Eigen::Index keep_dim = 1;
  for (auto k : keep) keep_dim *= dims[k];
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) traced.push_back(k);
  Eigen::Index traced_dim = 1;
  for (auto k : traced) traced_dim *= dims[k];

  auto full_index = [&](Eigen::Index kept_flat, Eigen::Index traced_flat) {
    Eigen::Index idx = 0;
    Eigen::Index rem = kept_flat;
    for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
      idx += (rem % dims[*it]) * strides[*it];
      rem /= dims[*it];
    }
    rem = traced_flat;
    for (auto it = traced.rbegin(); it != traced.rend(); ++it) {
      idx += (rem % dims[*it]) * strides[*it];
      rem /= dims[*it];
    }
    return idx;
  };

  MatrixXcd out = MatrixXcd::Zero(keep_dim, keep_dim);
  for (Eigen::Index i = 0; i < keep_dim; ++i)
    for (Eigen::Index j = 0; j < keep_dim; ++j) {
      cdouble acc(0.0, 0.0);
      for (Eigen::Index a = 0; a < traced_dim; ++a)
        acc += rho(full_index(i, a), full_index(j, a));
      out(i, j) = acc;
    }
  return out;
}

/// One qubit's stage in a cascaded simulation.
struct CascadeStage {
  QubitParams qubit;
  double initial_excitation = 0.0;
  std::optional<CouplerSchedule> coupling;
  std::optional<Wavepacket> input_mode;   // incoming flying mode (3 levels)
  std::optional<Wavepacket> output_mode;  // outgoing flying mode to track (3 levels)
  // occupation of the input flying mode; default: |1> with the packet's norm
  std::optional<MatrixXcd> input_cavity_state;
};

/// Configuration of a cascaded run. The flying modes are truncated at three levels
/// (at most two phonons anywhere in the system). Travel delays are encoded in the
/// relative timing of the schedules; channel loss enters as link survivals.
struct CascadeConfig {
  std::optional<CascadeStage> q1, q2;
  // joint state of the two input flying modes; FockBasis(2 modes, n_max 2)
  std::optional<FockDensity> joint_input;
  double link_survival_1 = 1.0; // loss between input mode 1 (or emitter) and q1
  double link_survival_2 = 1.0;
  double dt_ns = 0.1;
  int sample_stride = 10;
};

struct CascadeResult {
  SimulationTrace trace;
  Eigen::Matrix4cd final_two_qubit = Eigen::Matrix4cd::Zero(); // (q1 x q2): gg,ge,eg,ee
  double final_p_q1 = 0.0, final_p_q2 = 0.0, final_p_ee = 0.0;
  double output_mode_population = 0.0; // v-cavity occupation, when tracked
};

namespace cascade_detail {

/// Map a FockDensity over two modes (n_max 2) onto the 3x3 kron space (m1 outer).
inline MatrixXcd embed_two_mode_density(const FockDensity& st) {
  if (st.basis().n_modes() != 2 || st.basis().n_max() > 2)
    throw ParameterError("embed_two_mode_density: need 2 modes, n_max <= 2");
  MatrixXcd out = MatrixXcd::Zero(9, 9);
  for (std::size_t i = 0; i < st.basis().size(); ++i)
    for (std::size_t j = 0; j < st.basis().size(); ++j) {
      const auto& oi = st.basis().state(i);
      const auto& oj = st.basis().state(j);
      out(3 * oi[0] + oi[1], 3 * oj[0] + oj[1]) =
          st.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  return out;
}

} // namespace cascade_detail

/// Integrate the cascaded Lindblad master equation for the configured stages.
/// Supported layouts:
///  - both stages with input modes: joint capture on (m1, q1, m2, q2);
///  - one stage with an input mode: capture chain (m, q);
///  - one stage with coupling and an output mode: emission chain (q, v);
///  - two stages with couplings and no input modes: emitter-to-catcher chain (q1, q2);
///  - one stage with coupling only: plain shaped decay.
inline CascadeResult simulate_cascade(const CascadeConfig& config) {
  using namespace cascade_detail;
  const bool has1 = config.q1.has_value(), has2 = config.q2.has_value();
  if (!has1 && !has2) throw ParameterError("simulate_cascade: no stages configured");

  const bool joint_capture =
      has1 && has2 && (config.joint_input.has_value() ||
                       (config.q1->input_mode && config.q2->input_mode));

  auto grid_of = [&]() -> TimeGrid {
    if (has1 && config.q1->coupling) return config.q1->coupling->grid;
    if (has2 && config.q2->coupling) return config.q2->coupling->grid;
    if (has1 && config.q1->input_mode) return config.q1->input_mode->grid();
    if (has2 && config.q2->input_mode) return config.q2->input_mode->grid();
    throw ParameterError("simulate_cascade: no schedule or mode to set the grid");
  };
  const TimeGrid grid = grid_of();

  std::vector<int> dims;
  LindbladSystem sys;
  MatrixXcd rho0;
  std::vector<Observable> obs;
  std::optional<std::size_t> v_pos;
  std::vector<std::size_t> qubit_pos;

  auto qubit_initial = [](const CascadeStage& st) {
    MatrixXcd r = MatrixXcd::Zero(2, 2);
    r(1, 1) = st.initial_excitation;
    r(0, 0) = 1.0 - st.initial_excitation;
    return r;
  };

  if (joint_capture) {
    dims = {3, 2, 3, 2}; // m1, q1, m2, q2
    qubit_pos = {1, 3};
    Eigen::Index dim = 36;
    std::vector<ChainNode> chain1{
        {embed(dims, 0, boson_lowering(3)), source_cavity_coupling(*config.q1->input_mode),
         config.link_survival_1},
        {embed(dims, 1, qubit_lowering()), coupler_coupling(*config.q1->coupling), 1.0}};
    std::vector<ChainNode> chain2{
        {embed(dims, 2, boson_lowering(3)), source_cavity_coupling(*config.q2->input_mode),
         config.link_survival_2},
        {embed(dims, 3, qubit_lowering()), coupler_coupling(*config.q2->coupling), 1.0}};
    sys = build_chain(dim, chain1);
    auto sys2 = build_chain(dim, chain2);
    for (auto& d : sys2.dissipators) sys.dissipators.push_back(std::move(d));
    for (auto& h : sys2.hamiltonian) sys.hamiltonian.push_back(std::move(h));
    add_qubit_locals(sys, dims, 1, config.q1->qubit);
    add_qubit_locals(sys, dims, 3, config.q2->qubit);

    MatrixXcd modes;
    if (config.joint_input) {
      modes = embed_two_mode_density(*config.joint_input);
    } else {
      // product of single-mode occupations from the two input packets' norms
      auto single = [](double p1) {
        MatrixXcd r = MatrixXcd::Zero(3, 3);
        r(1, 1) = p1;
        r(0, 0) = 1.0 - p1;
        return r;
      };
      modes = kron(single(config.q1->input_mode->norm_squared()),
                   single(config.q2->input_mode->norm_squared()));
    }
    // interleave to (m1, q1, m2, q2): start from (m1, m2) x (q1, q2) ordering
    // by building rho0 = sum over mode blocks; easier: build as m1 x q1 x m2 x q2
    // from modes (m1 x m2) and ground qubits via index mapping.
    rho0 = MatrixXcd::Zero(36, 36);
    MatrixXcd rq1 = qubit_initial(*config.q1), rq2 = qubit_initial(*config.q2);
    for (int m1i = 0; m1i < 3; ++m1i)
      for (int m2i = 0; m2i < 3; ++m2i)
        for (int m1j = 0; m1j < 3; ++m1j)
          for (int m2j = 0; m2j < 3; ++m2j)
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                  for (int d = 0; d < 2; ++d) {
                    const Eigen::Index i = ((m1i * 2 + a) * 3 + m2i) * 2 + b;
                    const Eigen::Index j = ((m1j * 2 + c) * 3 + m2j) * 2 + d;
                    rho0(i, j) += modes(3 * m1i + m2i, 3 * m1j + m2j) * rq1(a, c) * rq2(b, d);
                  }
  } else {
    // single-chain layouts
    const CascadeStage& st = has1 ? *config.q1 : *config.q2;
    const double link = has1 ? config.link_survival_1 : config.link_survival_2;
    std::vector<ChainNode> chain;
    std::vector<MatrixXcd> initials;

    if (st.input_mode) dims.push_back(3);
    dims.push_back(2);
    const bool two_qubits = has1 && has2 && !config.q1->input_mode && !config.q2->input_mode &&
                            config.q1->coupling && config.q2->coupling;
    if (two_qubits) dims.push_back(2);
    if (st.output_mode && !two_qubits) dims.push_back(3);

    std::size_t pos = 0;
    if (st.input_mode) {
      chain.push_back({embed(dims, pos, boson_lowering(3)),
                       source_cavity_coupling(*st.input_mode), link});
      if (st.input_cavity_state) {
        initials.push_back(*st.input_cavity_state);
      } else {
        MatrixXcd rm = MatrixXcd::Zero(3, 3);
        const double p1 = st.input_mode->norm_squared();
        rm(1, 1) = p1;
        rm(0, 0) = 1.0 - p1;
        initials.push_back(rm);
      }
      ++pos;
    }
    qubit_pos.push_back(pos);
    chain.push_back({embed(dims, pos, qubit_lowering()),
                     st.coupling ? coupler_coupling(*st.coupling) : CoeffFn(nullptr),
                     two_qubits ? (has1 ? config.link_survival_1 : config.link_survival_2)
                                : 1.0});
    initials.push_back(qubit_initial(st));
    ++pos;
    if (two_qubits) {
      qubit_pos.push_back(pos);
      chain.push_back({embed(dims, pos, qubit_lowering()),
                       coupler_coupling(*config.q2->coupling), 1.0});
      initials.push_back(qubit_initial(*config.q2));
      ++pos;
    } else if (st.output_mode) {
      v_pos = pos;
      chain.push_back({embed(dims, pos, boson_lowering(3)),
                       sink_cavity_coupling(*st.output_mode), 1.0});
      initials.push_back([] {
        MatrixXcd r = MatrixXcd::Zero(3, 3);
        r(0, 0) = 1.0;
        return r;
      }());
      ++pos;
    }

    Eigen::Index dim = 1;
    for (int d : dims) dim *= d;
    sys = build_chain(dim, chain);
    add_qubit_locals(sys, dims, qubit_pos[0], st.qubit);
    if (two_qubits) add_qubit_locals(sys, dims, qubit_pos[1], config.q2->qubit);

    rho0 = MatrixXcd::Identity(1, 1);
    for (const auto& r : initials) rho0 = kron(rho0, r);
  }

  // observables
  const std::size_t nq = qubit_pos.size();
  MatrixXcd pe1 = embed(dims, qubit_pos[0], cascade_detail::qubit_pe());
  obs.push_back({"p_q1", pe1});
  if (nq > 1) {
    MatrixXcd pe2 = embed(dims, qubit_pos[1], cascade_detail::qubit_pe());
    obs.push_back({"p_q2", pe2});
    obs.push_back({"p_ee", pe1 * pe2});
  }
  if (v_pos) {
    MatrixXcd num = MatrixXcd::Zero(3, 3);
    num(1, 1) = 1.0;
    num(2, 2) = 2.0;
    obs.push_back({"n_v", embed(dims, *v_pos, num)});
  }

  auto res = cascade_detail::integrate(sys, rho0, grid.t_start, grid.t_end(), config.dt_ns,
                                       obs, config.sample_stride);

  CascadeResult out;
  out.trace.times = res.times;
  out.trace.p_q1 = res.values[0];
  out.trace.p_q2 = (nq > 1) ? res.values[1] : std::vector<double>(res.times.size(), 0.0);
  out.trace.p_ee = (nq > 1) ? res.values[2] : std::vector<double>(res.times.size(), 0.0);
  out.final_p_q1 = out.trace.p_q1.back();
  out.final_p_q2 = out.trace.p_q2.back();
  out.final_p_ee = out.trace.p_ee.back();
  if (v_pos) out.output_mode_population = res.values.back().back();
  if (nq > 1) {
    const MatrixXcd red = partial_trace_keep(res.final_rho, dims,
                                             {qubit_pos[0], qubit_pos[1]});
    out.final_two_qubit = red;
  }
  return out;
}

} // namespace lmqc
