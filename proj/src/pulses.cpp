#include "jclad/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jclad {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr long long kResyncInterval = 1024;

}  // namespace

void Pulse::validate() const {
  require(duration > 0.0 && std::isfinite(duration), "pulse duration must be positive");
  require(!tones.empty(), "pulse needs at least one tone");
  for (const Tone& tone : tones) {
    require(std::isfinite(tone.carrier), "tone carrier must be finite");
    require(tone.a.size() == tone.b.size(), "cosine and sine coefficient lists must have equal length");
    require(tone.a.allFinite() && tone.b.allFinite(), "Fourier coefficients must be finite");
  }
  if (constant_amps) {
    require(constant_amps->size() == static_cast<Eigen::Index>(tones.size()),
            "constant amplitudes must match the tone count");
    require(constant_amps->allFinite(), "constant amplitudes must be finite");
    for (const Tone& tone : tones)
      require(tone.order() == 0, "constant-amplitude pulses cannot also carry Fourier envelopes");
  }
}

Eigen::VectorXd Pulse::carriers() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(tones.size()));
  for (std::size_t i = 0; i < tones.size(); ++i) out(static_cast<Eigen::Index>(i)) = tones[i].carrier;
  return out;
}

int Pulse::order() const {
  int m = 0;
  for (const Tone& tone : tones) m = std::max(m, tone.order());
  return m;
}

LadderBasis ladder_basis(int N) {
  require(N >= 1, "target level must be >= 1");
  LadderBasis basis{DressedLabel::ground()};
  for (int n = 1; n <= N; ++n) {
    // The last state is always |N,->; signs alternate going down.
    const bool minus = (N - n) % 2 == 0;
    basis.push_back(minus ? DressedLabel::minus(n) : DressedLabel::plus(n));
  }
  return basis;
}

Eigen::VectorXd cook_shore_amplitudes(int N, double omega0) {
  require(N >= 1, "target level must be >= 1");
  require(omega0 > 0.0, "base rate must be positive");
  Eigen::VectorXd amps(N);
  amps(0) = std::sqrt(2.0 * N) * omega0;
  for (int n = 2; n <= N; ++n) amps(n - 1) = 2.0 * std::sqrt(static_cast<double>(n) * (N + 1 - n)) * omega0;
  return amps;
}

Eigen::VectorXd zigzag_frequencies(const SystemParams& params, int N) {
  params.validate();
  require(N >= 1, "target level must be >= 1");
  require(N + 1 <= params.n_max, "truncation too small for the requested ladder");
  const LadderBasis basis = ladder_basis(N);
  Eigen::VectorXd carriers(N);
  for (int k = 1; k <= N; ++k)
    carriers(k - 1) = std::abs(dressed_energy(params, basis[k]) - dressed_energy(params, basis[k - 1]));
  return carriers;
}

Pulse cook_shore_pulse(const SystemParams& params, int N, double omega0) {
  const Eigen::VectorXd carriers = zigzag_frequencies(params, N);
  Pulse pulse;
  pulse.channel = DriveOperatorKind::QubitTransverse;
  pulse.duration = pi_pulse_duration(omega0);
  pulse.constant_amps = cook_shore_amplitudes(N, omega0);
  for (int k = 0; k < N; ++k) pulse.tones.push_back({carriers(k), Eigen::VectorXd(), Eigen::VectorXd()});
  return pulse;
}

Pulse chain_rotation_pulse(const SystemParams& params, const std::vector<DressedLabel>& path, double omega0,
                           DriveOperatorKind channel) {
  params.validate();
  require(path.size() >= 2, "rotation path needs at least two states");
  require(omega0 > 0.0, "base rate must be positive");
  for (const DressedLabel& label : path)
    require(label.n() <= params.n_max, "rotation path leaves the truncated ladder");
  const Eigen::MatrixXd elements = drive_matrix_elements(params, channel);
  const int bonds = static_cast<int>(path.size()) - 1;

  Pulse pulse;
  pulse.channel = channel;
  pulse.duration = pi_pulse_duration(omega0);
  Eigen::VectorXd amps(bonds);
  for (int k = 1; k <= bonds; ++k) {
    const double element = std::abs(elements(path[k].index(), path[k - 1].index()));
    if (element < 1e-9)
      throw InvalidArgument("channel " + to_string(channel) + " does not couple " + path[k - 1].to_string() + " and " +
                            path[k].to_string());
    // Rotating-wave coupling of a constant tone is element * amp / 2; the
    // spin-(L/2) generator needs (omega0 / 2) sqrt(k (L + 1 - k)) on bond k.
    amps(k - 1) = omega0 * std::sqrt(static_cast<double>(k) * (bonds + 1 - k)) / element;
    const double gap = std::abs(dressed_energy(params, path[k]) - dressed_energy(params, path[k - 1]));
    pulse.tones.push_back({gap, Eigen::VectorXd(), Eigen::VectorXd()});
  }
  pulse.constant_amps = amps;
  return pulse;
}

double evaluate_drive(const Pulse& pulse, double t) {
  require(t >= 0.0 && t <= pulse.duration, "drive evaluated outside [0, T]");
  const double phase = kTwoPi * t / pulse.duration;
  double f = 0.0;
  for (std::size_t n = 0; n < pulse.tones.size(); ++n) {
    const Tone& tone = pulse.tones[n];
    const double carrier_phase = kRadPerMHzNs * tone.carrier * t;
    double envelope_a = 0.0;
    double envelope_b = 0.0;
    if (pulse.constant_amps) {
      envelope_a = (*pulse.constant_amps)(static_cast<Eigen::Index>(n));
    } else {
      for (int k = 1; k <= tone.order(); ++k) {
        envelope_a += tone.a(k - 1) * (1.0 - std::cos(k * phase));
        envelope_b += tone.b(k - 1) * std::sin(k * phase);
      }
    }
    f += envelope_a * std::cos(carrier_phase) + envelope_b * std::sin(carrier_phase);
  }
  return f;
}

DriveSampler::DriveSampler(const Pulse& pulse, double step) : pulse_(&pulse), step_(step) {
  const std::size_t tones = pulse.tones.size();
  order_ = pulse.order();
  const std::size_t width = static_cast<std::size_t>(std::max(order_, 1));
  coeff_a_.assign(tones * width, 0.0);
  coeff_b_.assign(tones * width, 0.0);
  for (std::size_t n = 0; n < tones; ++n) {
    const Tone& tone = pulse.tones[n];
    if (pulse.constant_amps) coeff_a_[n] = (*pulse.constant_amps)(static_cast<Eigen::Index>(n));
    for (int k = 0; k < tone.order(); ++k) {
      coeff_a_[n * width + static_cast<std::size_t>(k)] = tone.a(k);
      coeff_b_[n * width + static_cast<std::size_t>(k)] = tone.b(k);
    }
  }
  carrier_re_.resize(tones);
  carrier_im_.resize(tones);
  step_re_.resize(tones);
  step_im_.resize(tones);
  for (std::size_t n = 0; n < tones; ++n) {
    const double angle = kRadPerMHzNs * pulse.tones[n].carrier * step;
    step_re_[n] = std::cos(angle);
    step_im_[n] = std::sin(angle);
  }
  envelope_step_ = std::polar(1.0, kTwoPi * step / pulse.duration);
  one_minus_cos_.resize(width);
  sin_.resize(width);
  resync();
}

void DriveSampler::resync() {
  const double t = static_cast<double>(k_) * step_;
  for (std::size_t n = 0; n < carrier_re_.size(); ++n) {
    const double angle = kRadPerMHzNs * pulse_->tones[n].carrier * t;
    carrier_re_[n] = std::cos(angle);
    carrier_im_[n] = std::sin(angle);
  }
  envelope_ = std::polar(1.0, kTwoPi * t / pulse_->duration);
}

double DriveSampler::next() {
  if (k_ % kResyncInterval == 0) resync();
  const std::size_t tones = carrier_re_.size();
  double f = 0.0;
  if (order_ == 0) {
    for (std::size_t n = 0; n < tones; ++n) f += coeff_a_[n] * carrier_re_[n];
  } else {
    const std::size_t width = static_cast<std::size_t>(order_);
    std::complex<double> harmonic = envelope_;
    for (std::size_t k = 0; k < width; ++k) {
      one_minus_cos_[k] = 1.0 - harmonic.real();
      sin_[k] = harmonic.imag();
      harmonic *= envelope_;
    }
    for (std::size_t n = 0; n < tones; ++n) {
      const double* a = coeff_a_.data() + n * width;
      const double* b = coeff_b_.data() + n * width;
      double envelope_a = 0.0;
      double envelope_b = 0.0;
      for (std::size_t k = 0; k < width; ++k) {
        envelope_a += a[k] * one_minus_cos_[k];
        envelope_b += b[k] * sin_[k];
      }
      f += envelope_a * carrier_re_[n] + envelope_b * carrier_im_[n];
    }
  }
  for (std::size_t n = 0; n < tones; ++n) {
    const double re = carrier_re_[n] * step_re_[n] - carrier_im_[n] * step_im_[n];
    carrier_im_[n] = carrier_re_[n] * step_im_[n] + carrier_im_[n] * step_re_[n];
    carrier_re_[n] = re;
  }
  envelope_ *= envelope_step_;
  ++k_;
  return f;
}

double rwa_transfer_fidelity(const Eigen::VectorXd& amplitudes, int N, double T) {
  require(T >= 0.0, "transfer time must be non-negative");
  const Eigen::MatrixXd h = rwa_hamiltonian<double>(amplitudes, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("RWA eigensolver failed");
  const Eigen::MatrixXd& v = solver.eigenvectors();
  std::complex<double> amplitude = 0.0;
  for (int j = 0; j <= N; ++j)
    amplitude += v(N, j) * std::polar(1.0, -kRadPerMHzNs * solver.eigenvalues()(j) * T) * v(0, j);
  return std::norm(amplitude);
}

}  // namespace jclad
