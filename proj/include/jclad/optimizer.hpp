#ifndef JCLAD_OPTIMIZER_HPP
#define JCLAD_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jclad/dynamics.hpp"
#include "jclad/nelder_mead.hpp"
#include "jclad/pulses.hpp"

namespace jclad {

/// Search for N tones with M Fourier components each driving
/// initial_state -> target_state in time T.
struct OptimizationProblem {
  SystemParams params;
  int N = 4;
  double T = 50.0;  ///< ns
  int M = 1;
  DriveOperatorKind channel = DriveOperatorKind::QubitTransverse;
  DressedLabel initial_state = DressedLabel::ground();
  std::optional<DressedLabel> target_state;  ///< defaults to |N,->
  /// Replaces the analytic zig-zag seed (must have N tones on `channel`).
  std::optional<Pulse> seed_pulse;

  DressedLabel target() const { return target_state.value_or(DressedLabel::minus(N)); }
  int parameter_count() const { return N * (1 + 2 * M); }
  void validate() const;
};

struct RestartRecord {
  int restart_index = 0;
  Eigen::VectorXd parameters;
  double objective = 1.0;
  int iterations = 0;
  int evaluations = 0;
  bool completed = false;
  std::string diagnostic;
  std::vector<double> history;  ///< best objective after each iteration
};

struct OptimizerOptions {
  int max_iterations = 5000;  ///< simplex iterations per restart
  int round_iterations = 1000; ///< simplex iterations before the simplex is rebuilt
  int restarts = 8;
  std::uint64_t seed = 1;
  double tol_x = 1e-6;   ///< MHz
  double tol_f = 1e-12;
  double frequency_prior_halfwidth = 50.0;  ///< MHz, carrier spread
  double coeff_prior = 10.0;                ///< MHz, Fourier coefficient spread
  /// Step used while searching, capped at the resolution limit of each
  /// probe pulse; the winner is re-verified with `verify`.
  double search_dt = 1.4e-3;
  SimulationConfig verify;
  /// Extra starting point tried alongside the analytic seed in restart 0.
  std::optional<Pulse> warm_start;
  int threads = 1;
  /// Called after each restart finishes, in restart order (checkpointing).
  std::function<void(const RestartRecord&)> on_restart;
};


struct OptimizationResult {
  Pulse best_pulse;
  double infidelity = 1.0;  ///< verified with OptimizerOptions::verify
  int iterations = 0;
  int restart_index = 0;
  std::vector<double> objective_history;
  std::vector<RestartRecord> per_restart;
  ConvergenceReport truncation{};
  /// Largest Fourier coefficient exceeds the minimum carrier separation.
  bool exceeds_separation = false;
};

/// Parameter layout per tone: carrier, a_1..a_M, b_1..b_M.
Pulse pulse_from_parameters(const OptimizationProblem& problem, const Eigen::VectorXd& x);
Eigen::VectorXd parameters_from_pulse(const OptimizationProblem& problem, const Pulse& pulse);

/// Zig-zag carriers with a_n^(1) equal to the Cook-Shore amplitude for a
/// pi transfer in T (the 1 - cos envelope has unit mean); all else zero.
/// Uses problem.seed_pulse instead when it is set.
Eigen::VectorXd seed_from_analytic(const OptimizationProblem& problem);

/// 1 - F of the pulse encoded by x.
class FockObjective {
 public:
  FockObjective(const OptimizationProblem& problem, const SimulationConfig& config);
  double operator()(const Eigen::VectorXd& x) const;

 private:
  OptimizationProblem problem_;
  SimulationConfig config_;
  Propagator propagator_;
  StateVector psi0_;
  StateVector target_;
};

/// Multi-start simplex search. `previous` carries completed restarts from an
/// earlier run (resume); those are reused instead of recomputed.
OptimizationResult optimize_fock_pulse(const OptimizationProblem& problem, const OptimizerOptions& options,
                                       const std::vector<RestartRecord>& previous = {});

}  // namespace jclad

#endif  // JCLAD_OPTIMIZER_HPP
