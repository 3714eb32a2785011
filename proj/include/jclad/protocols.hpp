#ifndef JCLAD_PROTOCOLS_HPP
#define JCLAD_PROTOCOLS_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jclad/dynamics.hpp"
#include "jclad/optimizer.hpp"
#include "jclad/pulses.hpp"

namespace jclad {

/// Qudit level q is |0> for q = 0 and |q,-> otherwise.
DressedLabel qudit_label(int level);

enum class EdgeKind {
  Diagonal,   ///< multi-tone zig-zag chain through the |n,+> intermediates
  PlusMinus,  ///< single tone between neighbouring levels
};

std::string to_string(EdgeKind kind);
EdgeKind parse_edge_kind(const std::string& text);

struct GraphEdge {
  int j;
  int k;  ///< j < k
  EdgeKind kind;
  double pi_duration;  ///< ns, length of the stage realizing a rotation on this edge

  bool operator==(const GraphEdge&) const = default;
};

struct GraphTiming {
  /// Largest tone amplitude (MHz) a diagonal chain may use; sets its duration.
  double peak_amplitude = 10.0;
  /// Single-tone stages must resolve lines a few MHz apart.
  double plus_minus_duration = 500.0;
};

struct CouplingGraph {
  SystemParams params;
  int d = 0;
  std::vector<GraphEdge> edges;

  const GraphEdge* find(int a, int b) const;
  std::vector<int> neighbors(int node) const;
  bool connected() const;
};

/// Levels 0..d-1. Plus-minus edges join consecutive levels. Diagonal edges
/// join |0> to |n,-> for odd n >= 3 (chain 0, 1-, 2+, ..., n-) and |j,-> to
/// |k,-> for k - j >= 2 (chain j-, (j+1)+, ..., k-; an odd span ends with the
/// same-branch bond (k-1)- -> k-). Every rotation then compiles in at most
/// three steps.
CouplingGraph build_coupling_graph(const SystemParams& params, int d, const GraphTiming& timing = {});

/// Dressed states visited by the stage realizing `edge`.
std::vector<DressedLabel> edge_path(const GraphEdge& edge);

/// Diagonal edges realize only swaps (|theta| = pi); plus-minus edges any angle.
bool realizable(const GraphEdge& edge, double theta);

struct RotationStep {
  int j;
  int k;
  double angle;  ///< radians, in (-2 pi, 2 pi]
  Pulse realized_by;
};

/// Analytic pulse for a rotation by theta on `edge`.
Pulse rotation_pulse(const CouplingGraph& graph, const GraphEdge& edge, double theta);

/// R_{j,k}(theta) as one step on an edge or three steps S R S with pi swaps S.
/// Among three-step forms the shortest total duration wins, ties to smaller
/// intermediate level.
std::vector<RotationStep> compile_rotation(const CouplingGraph& graph, int j, int k, double theta);

/// Component of a (possibly two-mode) state: amplitude * |a> (x |b>).
struct StateTerm {
  DressedLabel a = DressedLabel::ground();
  DressedLabel b = DressedLabel::ground();
  std::complex<double> amplitude = 1.0;
};

enum class StageKind { Rotation, Pulse };

struct ProtocolStage {
  StageKind kind = StageKind::Pulse;
  std::optional<GraphEdge> edge;
  std::optional<double> angle;
  Pulse pulse;                   ///< on the single system, or on mode A
  std::optional<Pulse> pulse_b;  ///< mode B of a two-mode plan, when it differs from `pulse`
};

struct ProtocolPlan {
  bool two_mode = false;
  std::vector<ProtocolStage> stages;
  std::vector<StateTerm> initial;
  std::vector<StateTerm> target;

  double duration() const;
  void validate() const;
};

/// One stage: the Cook-Shore pulse |0> -> |N,-> at rate omega0 (MHz).
ProtocolPlan fock_prep_plan(const SystemParams& params, int N, double omega0);
/// One stage embedding an optimized pulse.
ProtocolPlan fock_prep_plan(const SystemParams& params, int N, const OptimizationResult& optimized);

/// Stages of compile_rotation applied to |j> (target: the state R_{j,k}(theta)
/// |j> ideally reaches, up to phases).
ProtocolPlan qudit_plan(const CouplingGraph& graph, int j, int k, double theta);

/// Replaces every pi swap of a qudit plan with an optimized pulse of the same
/// duration (Fourier order M). Other stages keep their analytic pulses.
ProtocolPlan optimize_qudit_stages(const CouplingGraph& graph, const ProtocolPlan& plan, int M,
                                   const OptimizerOptions& options);

/// Starts from (|1,+>|0> + |0>|1,+>)/sqrt(2). Even N: one stage |1,+> ->
/// |N,-> on both modes. Odd N: |1,+> -> |1,-> on the longitudinal channel,
/// then |1,-> -> |N,-> (skipped for N = 1). Chains run at rate omega0 (MHz).
ProtocolPlan noon_plan(const SystemParams& params_a, const SystemParams& params_b, int N, double omega0 = 1.0);

struct PlanSimulation {
  double fidelity = 0.0;
  /// Single system: one trajectory per stage. Two modes: the stages of mode A
  /// started from the first initial term.
  std::vector<Trajectory> stages;
  /// Final joint amplitudes C(a, b) of a two-mode plan; the final state of a
  /// single-system plan as one column.
  Eigen::MatrixXcd final_amplitudes;
};

PlanSimulation simulate_plan(const ProtocolPlan& plan, const SystemParams& params, const SimulationConfig& config = {});

/// Propagates each product branch separately (the modes do not interact).
PlanSimulation simulate_plan(const ProtocolPlan& plan, const SystemParams& params_a, const SystemParams& params_b,
                             const SimulationConfig& config = {});

}  // namespace jclad

#endif  // JCLAD_PROTOCOLS_HPP
