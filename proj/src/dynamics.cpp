#include "jclad/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

namespace jclad {

namespace {

using cplx = std::complex<double>;

constexpr int kPhasorResync = 512;
constexpr double kNormAbort = 1e-6;
// Row padding; a multiple of the widest SIMD register in doubles.
constexpr int kBlock = 8;

int channel_slot(DriveOperatorKind kind) { return static_cast<int>(kind); }

}  // namespace

StateVector basis_state(int n_max, DressedLabel label) {
  require(label.n() <= n_max, "label " + label.to_string() + " outside the truncation");
  StateVector psi = StateVector::Zero(dressed_dimension(n_max));
  psi(label.index()) = 1.0;
  return psi;
}

Propagator::Propagator(const SystemParams& params) : params_(params) {
  const auto states = dressed_eigensystem(params);
  const Eigen::MatrixXd v = dressed_vectors(states);
  const int dim = static_cast<int>(states.size());
  energies_.resize(dim);
  for (int j = 0; j < dim; ++j) energies_(j) = states[static_cast<std::size_t>(j)].energy - states[0].energy;
  padded_ = (dim + kBlock - 1) / kBlock * kBlock;

  for (DriveOperatorKind kind : {DriveOperatorKind::QubitTransverse, DriveOperatorKind::QubitLongitudinal,
                                 DriveOperatorKind::ResonatorPosition}) {
    const int slot = channel_slot(kind);
    Eigen::MatrixXd m = v.transpose() * drive_operator(params, kind) * v;
    m = 0.5 * (m + m.transpose());
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    m = (m.cwiseAbs().array() > 1e-14 * scale).select(m, 0.0);
    double gap = 0.0;
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        if (m(j, k) != 0.0) gap = std::max(gap, std::abs(energies_(j) - energies_(k)));
    padded_channels_[slot] = Eigen::MatrixXd::Zero(padded_, padded_);
    padded_channels_[slot].topLeftCorner(dim, dim) = m;
    dense_[slot] = std::move(m);
    max_gap_[slot] = gap;
  }
}

const Eigen::MatrixXd& Propagator::channel_matrix(DriveOperatorKind kind) const { return dense_[channel_slot(kind)]; }

double Propagator::max_step(std::span<const Pulse> pulses) const {
  double f_max = 0.0;
  for (const Pulse& pulse : pulses) {
    const double carrier = pulse.carriers().cwiseAbs().maxCoeff();
    f_max = std::max(f_max, carrier + max_gap_[channel_slot(pulse.channel)]);
  }
  if (f_max <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (50.0 * f_max * 1e-3);
}

template <typename Sink>
void Propagator::integrate(std::span<const Pulse> pulses, const StateVector& psi0, double T,
                           const SimulationConfig& config, Sink&& sink) const {
  const int dim = dimension();
  require(psi0.size() == dim, "initial state dimension does not match the truncation");
  require(std::abs(psi0.norm() - 1.0) < 1e-8, "initial state must be normalized");
  require(T >= 0.0 && std::isfinite(T), "propagation time must be non-negative");
  require(config.dt > 0.0, "time step must be positive");
  for (const Pulse& pulse : pulses) {
    pulse.validate();
    require(std::abs(pulse.duration - T) <= 1e-9 * std::max(1.0, T), "every pulse must last exactly T");
  }
  const double step_limit = max_step(pulses);
  if (config.dt > step_limit) {
    std::ostringstream msg;
    msg << "time step " << config.dt << " ns exceeds the resolution limit " << step_limit << " ns";
    throw InvalidArgument(msg.str());
  }

  if (T == 0.0) {
    sink(0, 0.0, psi0, true);
    return;
  }

  const long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(T / config.dt - 1e-9)));
  const double h = T / static_cast<double>(steps);
  const double half = 0.5 * h;

  std::vector<DriveSampler> samplers;
  samplers.reserve(pulses.size());
  for (const Pulse& pulse : pulses) samplers.emplace_back(pulse, half);
  // Pulses sharing a channel are summed into one drive value per channel.
  std::vector<int> active;
  std::vector<int> pulse_slot(pulses.size());
  for (std::size_t q = 0; q < pulses.size(); ++q) {
    const int slot = channel_slot(pulses[q].channel);
    auto it = std::find(active.begin(), active.end(), slot);
    pulse_slot[q] = static_cast<int>(it - active.begin());
    if (it == active.end()) active.push_back(slot);
  }
  const std::size_t nc = active.size();
  const double kappa = kRadPerMHzNs;
  const double sixth = h / 6.0;
  const long long stride = config.sample_stride > 0.0
                               ? std::max<long long>(1, std::llround(config.sample_stride / h))
                               : steps;

  // c = e^{i theta t} psi evolves only under the drive. The kernel is
  // instantiated for common padded widths so Eigen emits fixed-size vector
  // code; padding rows have zero energy and zero coupling and stay empty.
  auto run = [&](auto width) {
    constexpr int W = decltype(width)::value;
    using Vec = Eigen::Array<double, W, 1>;
    using Pair = Eigen::Matrix<double, W, 2>;  // columns: real, imaginary
    using Mat = Eigen::Matrix<double, W, W>;
    const int P = padded_;

    std::vector<Mat> mats;
    for (int slot : active) mats.emplace_back(padded_channels_[static_cast<std::size_t>(slot)]);
    Vec theta = Vec::Zero(P);
    theta.head(dim) = kRadPerMHzNs * energies_.array();
    const Vec step_re = (theta * half).cos();
    const Vec step_im = (theta * half).sin();

    Pair c = Pair::Zero(P, 2);
    c.col(0).head(dim) = psi0.real();
    c.col(1).head(dim) = psi0.imag();
    Vec p0_re(P), p0_im(P), p1_re(P), p1_im(P), p2_re(P), p2_im(P);
    Pair u(P, 2), w(P, 2), tmp(P, 2), k1(P, 2), k2(P, 2), k3(P, 2), k4(P, 2);

    std::vector<double> f0(nc), f1(nc), f2(nc);
    auto sample = [&](std::vector<double>& f) {
      std::fill(f.begin(), f.end(), 0.0);
      for (std::size_t q = 0; q < samplers.size(); ++q)
        f[static_cast<std::size_t>(pulse_slot[q])] += samplers[q].next();
    };
    auto rhs = [&](const Pair& state, const Vec& pr, const Vec& pi, const std::vector<double>& f, Pair& out) {
      u.col(0).array() = pr * state.col(0).array() + pi * state.col(1).array();
      u.col(1).array() = pr * state.col(1).array() - pi * state.col(0).array();
      w.setZero();
      for (std::size_t a = 0; a < nc; ++a)
        if (f[a] != 0.0) w.noalias() += f[a] * mats[a].lazyProduct(u);
      // out = -i kappa p w
      out.col(0).array() = kappa * (pr * w.col(1).array() + pi * w.col(0).array());
      out.col(1).array() = -kappa * (pr * w.col(0).array() - pi * w.col(1).array());
    };
    auto set_phasors = [&](double t) {
      p0_re = (theta * t).cos();
      p0_im = (theta * t).sin();
    };
    StateVector psi(dim);
    auto emit = [&](long long s, double t, bool last) {
      const auto re = c.col(0).head(dim).array();
      const auto im = c.col(1).head(dim).array();
      psi.real() = (p0_re.head(dim) * re + p0_im.head(dim) * im).matrix();
      psi.imag() = (p0_re.head(dim) * im - p0_im.head(dim) * re).matrix();
      sink(s, t, psi, last);
    };

    sample(f0);
    for (long long s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) * h;
      if (s % kPhasorResync == 0) set_phasors(t);
      if (s == 0) emit(0, 0.0, false);

      p1_re = p0_re * step_re - p0_im * step_im;
      p1_im = p0_re * step_im + p0_im * step_re;
      p2_re = p1_re * step_re - p1_im * step_im;
      p2_im = p1_re * step_im + p1_im * step_re;
      sample(f1);
      sample(f2);

      rhs(c, p0_re, p0_im, f0, k1);
      tmp = c + half * k1;
      rhs(tmp, p1_re, p1_im, f1, k2);
      tmp = c + half * k2;
      rhs(tmp, p1_re, p1_im, f1, k3);
      tmp = c + h * k3;
      rhs(tmp, p2_re, p2_im, f2, k4);
      c += sixth * (k1 + 2.0 * (k2 + k3) + k4);

      std::swap(p0_re, p2_re);
      std::swap(p0_im, p2_im);
      std::swap(f0, f2);
      const long long done = s + 1;
      if (done == steps) {
        set_phasors(T);
        const double drift = std::abs(c.norm() - 1.0);
        if (drift > kNormAbort) {
          std::ostringstream msg;
          msg << "norm drift " << drift << " after " << steps << " steps of " << h << " ns; reduce the time step";
          throw NumericalError(msg.str());
        }
        emit(done, T, true);
      } else if (done % stride == 0) {
        emit(done, static_cast<double>(done) * h, false);
      }
    }
  };
  switch (padded_) {
    case 8: run(std::integral_constant<int, 8>{}); break;
    case 16: run(std::integral_constant<int, 16>{}); break;
    case 24: run(std::integral_constant<int, 24>{}); break;
    case 32: run(std::integral_constant<int, 32>{}); break;
    default: run(std::integral_constant<int, Eigen::Dynamic>{}); break;
  }
}

Trajectory Propagator::propagate(std::span<const Pulse> pulses, const StateVector& psi0, double T,
                                 const SimulationConfig& config) const {
  Trajectory traj;
  integrate(pulses, psi0, T, config, [&](long long, double t, const StateVector& psi, bool) {
    traj.times.push_back(t);
    traj.states.push_back(psi);
  });
  traj.populations.resize(static_cast<Eigen::Index>(traj.states.size()), dimension());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    traj.populations.row(static_cast<Eigen::Index>(i)) = traj.states[i].cwiseAbs2().transpose();
  traj.final_norm_error = std::abs(traj.states.back().norm() - 1.0);
  return traj;
}

StateVector Propagator::evolve(std::span<const Pulse> pulses, const StateVector& psi0, double T,
                               const SimulationConfig& config) const {
  StateVector out;
  integrate(pulses, psi0, T, config, [&](long long, double, const StateVector& psi, bool last) {
    if (last) out = psi;
  });
  return out;
}

Trajectory propagate(const SystemParams& params, std::span<const Pulse> pulses, const StateVector& psi0, double T,
                     const SimulationConfig& config) {
  return Propagator(params).propagate(pulses, psi0, T, config);
}

double fidelity(const StateVector& psi, const StateVector& target) {
  require(psi.size() == target.size(), "fidelity of states with different dimensions");
  return std::norm(target.dot(psi));
}

double decoherence_fidelity(double T, int N, double Tq, double Tr) {
  require(Tq > 0.0 && Tr > 0.0, "lifetimes must be positive");
  require(T >= 0.0 && N >= 0, "time and photon number must be non-negative");
  return std::exp(-T / Tq) * std::exp(-static_cast<double>(N) * T / (2.0 * Tr));
}

TransferTimes transfer_time_bounds(int N, double omega_max) {
  require(N >= 1, "photon number must be >= 1");
  require(omega_max > 0.0, "amplitude bound must be positive");
  // pi / Omega_max with Omega_max = 2 pi omega_max, in ns.
  const double pi_time = 1.0 / (2.0 * omega_max * 1e-3);
  const Eigen::VectorXd ratios = cook_shore_amplitudes(N, 1.0);
  return {ratios.maxCoeff() * pi_time, (std::sqrt(2.0) + 2.0 * (N - 1)) * pi_time};
}

ConvergenceReport convergence_check(const SystemParams& params, std::span<const Pulse> pulses, const StateVector& psi0,
                                    DressedLabel target, double T, const SimulationConfig& config) {
  require(config.convergence_margin >= 1, "convergence margin must be at least one photon");
  SystemParams wider = params;
  wider.n_max = params.n_max + config.convergence_margin;
  // Dressed ordering is truncation independent, so zero padding embeds psi0.
  StateVector psi_wide = StateVector::Zero(dressed_dimension(wider.n_max));
  psi_wide.head(psi0.size()) = psi0;

  const StateVector narrow_end = Propagator(params).evolve(pulses, psi0, T, config);
  const StateVector wide_end = Propagator(wider).evolve(pulses, psi_wide, T, config);
  const double f_narrow = fidelity(narrow_end, basis_state(params.n_max, target));
  const double f_wide = fidelity(wide_end, basis_state(wider.n_max, target));
  const double delta = std::abs(f_narrow - f_wide);
  return {f_narrow, f_wide, delta, delta <= 1e-6};
}

}  // namespace jclad
