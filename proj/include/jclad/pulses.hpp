#ifndef JCLAD_PULSES_HPP
#define JCLAD_PULSES_HPP

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "jclad/jc_core.hpp"

namespace jclad {

/// One carrier with two-quadrature Fourier envelopes
///   A(t) = sum_k a_k (1 - cos(2 pi k t / T)),  B(t) = sum_k b_k sin(2 pi k t / T).
struct Tone {
  double carrier = 0.0;  ///< MHz
  Eigen::VectorXd a;     ///< cosine-quadrature coefficients, MHz
  Eigen::VectorXd b;     ///< sine-quadrature coefficients, MHz

  int order() const { return static_cast<int>(a.size()); }
};

/// A multi-tone drive f(t) = sum_n [A_n(t) cos(2 pi w_n t) + B_n(t) sin(2 pi w_n t)]
/// on one channel. When constant_amps is set every tone has A_n = Omega_n,
/// B_n = 0 for the whole duration.
struct Pulse {
  DriveOperatorKind channel = DriveOperatorKind::QubitTransverse;
  std::vector<Tone> tones;
  double duration = 0.0;  ///< ns
  std::optional<Eigen::VectorXd> constant_amps;

  void validate() const;
  Eigen::VectorXd carriers() const;
  /// Largest Fourier order over tones.
  int order() const;
};

using LadderBasis = std::vector<DressedLabel>;

/// Zig-zag ladder |0>, |1,->, |2,+>, ... (N odd) or |0>, |1,+>, |2,->, ...
/// (N even); always ends on |N,->.
LadderBasis ladder_basis(int N);

/// Simultaneous-drive amplitudes turning the rotating-frame Hamiltonian into
/// omega0 * Jx for spin N/2.
Eigen::VectorXd cook_shore_amplitudes(int N, double omega0);

/// Carrier k is the energy gap between consecutive ladder_basis states.
Eigen::VectorXd zigzag_frequencies(const SystemParams& params, int N);

/// Duration of a pi rotation at rate omega0 (MHz): T = pi / (2 pi omega0).
inline double pi_pulse_duration(double omega0) { return 1.0 / (2.0 * omega0 * 1e-3); }

/// Rate omega0 (MHz) whose pi rotation takes T ns.
inline double omega0_for_duration(double T) { return 1.0 / (2.0 * T * 1e-3); }

/// Constant-amplitude pulse with Cook-Shore amplitudes on the zig-zag
/// carriers, duration pi / omega0.
Pulse cook_shore_pulse(const SystemParams& params, int N, double omega0);

/// Constant-amplitude pulse that drives the dressed-state chain `path` as a
/// spin-(L/2) rotation, L = path.size() - 1, taking the coupling strength of
/// each bond from the numerically computed matrix elements of `channel`.
Pulse chain_rotation_pulse(const SystemParams& params, const std::vector<DressedLabel>& path, double omega0,
                           DriveOperatorKind channel = DriveOperatorKind::QubitTransverse);

double evaluate_drive(const Pulse& pulse, double t);

/// Streams f(t) on the uniform grid t_k = k * step without calling trig
/// functions per sample. Phasors are resynchronized periodically to bound
/// drift.
class DriveSampler {
 public:
  DriveSampler(const Pulse& pulse, double step);
  double next();

 private:
  void resync();

  const Pulse* pulse_;
  double step_;
  long long k_ = 0;
  int order_ = 0;
  std::vector<double> coeff_a_;  // tone-major, order_ per tone; constant amplitudes when order_ == 0
  std::vector<double> coeff_b_;
  std::vector<double> carrier_re_, carrier_im_;  // e^{i 2 pi w_n t}
  std::vector<double> step_re_, step_im_;        // e^{i 2 pi w_n step}
  std::complex<double> envelope_;                // e^{i 2 pi t / T}
  std::complex<double> envelope_step_;
  std::vector<double> one_minus_cos_, sin_;      // per harmonic
};

/// Rotating-wave Hamiltonian over ladder_basis(N), MHz.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> rwa_hamiltonian(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& amplitudes, int N) {
  require(N >= 1, "ladder length must be >= 1");
  require(amplitudes.size() == N, "need one amplitude per ladder bond");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(N + 1, N + 1);
  for (int n = 1; n <= N; ++n) {
    const Scalar coupling = n == 1 ? std::sqrt(Scalar(2)) * amplitudes(0) / Scalar(4) : amplitudes(n - 1) / Scalar(4);
    h(n - 1, n) = coupling;
    h(n, n - 1) = coupling;
  }
  return h;
}

/// |<N| exp(-i 2 pi H_rwa T) |0>|^2 by exact diagonalization.
double rwa_transfer_fidelity(const Eigen::VectorXd& amplitudes, int N, double T);

}  // namespace jclad

#endif  // JCLAD_PULSES_HPP
