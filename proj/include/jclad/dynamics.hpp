#ifndef JCLAD_DYNAMICS_HPP
#define JCLAD_DYNAMICS_HPP

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jclad/jc_core.hpp"
#include "jclad/pulses.hpp"

namespace jclad {

/// State amplitudes over the dressed basis (see DressedLabel::index()).
using StateVector = Eigen::VectorXcd;

StateVector basis_state(int n_max, DressedLabel label);

struct SimulationConfig {
  double dt = 2e-4;               ///< ns
  double sample_stride = 0.05;    ///< ns between stored samples; <= 0 keeps only the endpoints
  int convergence_margin = 2;     ///< extra photons for convergence_check
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  Eigen::MatrixXd populations;  ///< row per sample, column per dressed index
  double final_norm_error = 0.0;

  const StateVector& final_state() const { return states.back(); }
};

/// Integrates i dpsi/dt = 2 pi [diag(E) + sum_c f_c(t) M_c] psi in the dressed
/// basis with all counter-rotating terms retained. The diagonal part is
/// applied exactly (interaction picture); the drive part with classical RK4.
/// Reusable across many pulses for one set of system parameters.
class Propagator {
 public:
  explicit Propagator(const SystemParams& params);

  const SystemParams& params() const { return params_; }
  int dimension() const { return static_cast<int>(energies_.size()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& channel_matrix(DriveOperatorKind kind) const;

  /// Largest step allowed for these pulses: 1 / (50 f_max), where f_max is the
  /// largest carrier plus the largest dressed gap the drive couples.
  double max_step(std::span<const Pulse> pulses) const;

  Trajectory propagate(std::span<const Pulse> pulses, const StateVector& psi0, double T,
                       const SimulationConfig& config) const;

  /// Same integration, endpoints only.
  StateVector evolve(std::span<const Pulse> pulses, const StateVector& psi0, double T,
                     const SimulationConfig& config) const;

 private:
  template <typename Sink>
  void integrate(std::span<const Pulse> pulses, const StateVector& psi0, double T, const SimulationConfig& config,
                 Sink&& sink) const;

  SystemParams params_;
  Eigen::VectorXd energies_;
  std::array<Eigen::MatrixXd, 3> dense_;
  std::array<Eigen::MatrixXd, 3> padded_channels_;  ///< zero-padded to padded_ rows and columns
  int padded_ = 0;
  std::array<double, 3> max_gap_{};
};

Trajectory propagate(const SystemParams& params, std::span<const Pulse> pulses, const StateVector& psi0, double T,
                     const SimulationConfig& config = {});

/// |<target|psi>|^2.
double fidelity(const StateVector& psi, const StateVector& target);

/// exp(-T/Tq) exp(-N T / (2 Tr)).
double decoherence_fidelity(double T, int N, double Tq, double Tr);

struct TransferTimes {
  double single;  ///< ns, simultaneous Cook-Shore drive
  double multi;   ///< ns, sequential two-level steps
};

TransferTimes transfer_time_bounds(int N, double omega_max);

struct ConvergenceReport {
  double fidelity_at_nmax;
  double fidelity_at_nmax_plus_margin;
  double delta;
  bool converged;
};

/// Reruns the propagation with the truncation raised by
/// config.convergence_margin; delta > 1e-6 counts as unconverged.
ConvergenceReport convergence_check(const SystemParams& params, std::span<const Pulse> pulses, const StateVector& psi0,
                                    DressedLabel target, double T, const SimulationConfig& config = {});

}  // namespace jclad

#endif  // JCLAD_DYNAMICS_HPP
