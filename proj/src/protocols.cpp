#include "jclad/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

namespace jclad {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_swap(double theta) { return std::abs(std::abs(theta) - kPi) < 1e-12; }

// Largest amplitude-to-rate ratio of a spin-(L/2) chain pulse on `path`.
double chain_amplitude_ratio(const Eigen::MatrixXd& elements, const std::vector<DressedLabel>& path) {
  const int bonds = static_cast<int>(path.size()) - 1;
  double ratio = 0.0;
  for (int k = 1; k <= bonds; ++k) {
    const double element = std::abs(elements(path[k].index(), path[k - 1].index()));
    require(element > 1e-9, "qubit line does not couple " + path[k - 1].to_string() + " and " + path[k].to_string());
    ratio = std::max(ratio, std::sqrt(static_cast<double>(k) * (bonds + 1 - k)) / element);
  }
  return ratio;
}

StateVector local_state(int n_max, const DressedLabel& label) { return basis_state(n_max, label); }

void require_rotation_angle(double theta) {
  require(std::isfinite(theta) && theta > -2.0 * kPi && theta <= 2.0 * kPi, "rotation angle must lie in (-2 pi, 2 pi]");
}

}  // namespace

DressedLabel qudit_label(int level) {
  require(level >= 0, "qudit level must be non-negative");
  return level == 0 ? DressedLabel::ground() : DressedLabel::minus(level);
}

std::string to_string(EdgeKind kind) { return kind == EdgeKind::Diagonal ? "diagonal" : "plus_minus"; }

EdgeKind parse_edge_kind(const std::string& text) {
  if (text == "diagonal") return EdgeKind::Diagonal;
  if (text == "plus_minus") return EdgeKind::PlusMinus;
  throw InvalidArgument("unknown edge kind '" + text + "'");
}

const GraphEdge* CouplingGraph::find(int a, int b) const {
  const int lo = std::min(a, b);
  const int hi = std::max(a, b);
  for (const GraphEdge& edge : edges)
    if (edge.j == lo && edge.k == hi) return &edge;
  return nullptr;
}

std::vector<int> CouplingGraph::neighbors(int node) const {
  std::vector<int> out;
  for (const GraphEdge& edge : edges) {
    if (edge.j == node) out.push_back(edge.k);
    if (edge.k == node) out.push_back(edge.j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool CouplingGraph::connected() const {
  if (d <= 1) return true;
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int count = 1;
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    for (int next : neighbors(node)) {
      if (seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = true;
      ++count;
      frontier.push(next);
    }
  }
  return count == d;
}

std::vector<DressedLabel> edge_path(const GraphEdge& edge) {
  std::vector<DressedLabel> path;
  if (edge.kind == EdgeKind::PlusMinus) return {qudit_label(edge.j), qudit_label(edge.k)};
  if (edge.j == 0) {
    // 0, 1-, 2+, 3-, ...: odd rungs on the minus branch.
    path.push_back(DressedLabel::ground());
    for (int n = 1; n <= edge.k; ++n) path.push_back(n % 2 == 1 ? DressedLabel::minus(n) : DressedLabel::plus(n));
  } else {
    // j-, (j+1)+, (j+2)-, ...; an odd span ends with the same-branch bond (k-1)- -> k-.
    const int zigzag_end = (edge.k - edge.j) % 2 == 0 ? edge.k : edge.k - 1;
    for (int n = edge.j; n <= zigzag_end; ++n)
      path.push_back((n - edge.j) % 2 == 0 ? DressedLabel::minus(n) : DressedLabel::plus(n));
    if (zigzag_end != edge.k) path.push_back(DressedLabel::minus(edge.k));
  }
  return path;
}

bool realizable(const GraphEdge& edge, double theta) { return edge.kind == EdgeKind::PlusMinus || is_swap(theta); }

CouplingGraph build_coupling_graph(const SystemParams& params, int d, const GraphTiming& timing) {
  params.validate();
  require(d >= 2, "a qudit needs at least two levels");
  require(d - 1 < params.n_max, "qudit levels must lie below the truncation");
  require(timing.peak_amplitude > 0.0 && timing.plus_minus_duration > 0.0, "graph timing must be positive");

  CouplingGraph graph;
  graph.params = params;
  graph.d = d;
  const Eigen::MatrixXd elements = drive_matrix_elements(params, DriveOperatorKind::QubitTransverse);
  auto add = [&](int j, int k, EdgeKind kind) {
    GraphEdge edge{j, k, kind, 0.0};
    const double ratio = chain_amplitude_ratio(elements, edge_path(edge));
    const double amplitude_limited = pi_pulse_duration(timing.peak_amplitude / ratio);
    // A same-branch bond sits a few MHz from its neighbouring lines and must be slow.
    const bool same_branch = kind == EdgeKind::PlusMinus || (j > 0 && (k - j) % 2 == 1);
    edge.pi_duration = same_branch ? std::max(amplitude_limited, timing.plus_minus_duration) : amplitude_limited;
    graph.edges.push_back(edge);
  };
  for (int n = 0; n + 1 < d; ++n) add(n, n + 1, EdgeKind::PlusMinus);
  for (int n = 3; n < d; n += 2) add(0, n, EdgeKind::Diagonal);
  for (int j = 1; j < d; ++j)
    for (int k = j + 2; k < d; ++k) add(j, k, EdgeKind::Diagonal);
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.j, a.k) < std::tie(b.j, b.k); });
  return graph;
}

Pulse rotation_pulse(const CouplingGraph& graph, const GraphEdge& edge, double theta) {
  require_rotation_angle(theta);
  const std::vector<DressedLabel> path = edge_path(edge);
  if (edge.kind == EdgeKind::Diagonal) {
    if (!is_swap(theta))
      throw InvalidArgument("diagonal edge (" + std::to_string(edge.j) + "," + std::to_string(edge.k) +
                            ") realizes only pi swaps");
    Pulse pulse = chain_rotation_pulse(graph.params, path, omega0_for_duration(edge.pi_duration));
    if (theta < 0.0) *pulse.constant_amps = -*pulse.constant_amps;
    return pulse;
  }
  // One tone with a 1 - cos envelope: the rotating-wave coupling integrates to
  // kappa * element * a * T / 2 = theta / 2.
  const Eigen::MatrixXd elements = drive_matrix_elements(graph.params, DriveOperatorKind::QubitTransverse);
  const double element = elements(path[1].index(), path[0].index());
  const double T = edge.pi_duration;
  Pulse pulse;
  pulse.channel = DriveOperatorKind::QubitTransverse;
  pulse.duration = T;
  const double carrier = dressed_energy(graph.params, path[1]) - dressed_energy(graph.params, path[0]);
  pulse.tones.push_back({carrier, Eigen::VectorXd::Constant(1, theta / (kRadPerMHzNs * element * T)),
                         Eigen::VectorXd::Zero(1)});
  return pulse;
}

std::vector<RotationStep> compile_rotation(const CouplingGraph& graph, int j, int k, double theta) {
  require(j != k, "rotation needs two distinct levels");
  require(j >= 0 && k >= 0 && j < graph.d && k < graph.d, "rotation levels outside the qudit");
  require_rotation_angle(theta);

  if (const GraphEdge* edge = graph.find(j, k); edge && realizable(*edge, theta))
    return {RotationStep{j, k, theta, rotation_pulse(graph, *edge, theta)}};

  // S R S: swap `pivot` with m, rotate (m, other) by theta, swap back. The
  // swap either moves j onto a neighbour of k or k onto a neighbour of j.
  struct Candidate {
    double duration;
    int m;
    int form;
    const GraphEdge* swap;
    const GraphEdge* rotation;
    int rot_a, rot_b;
  };
  std::optional<Candidate> best;
  auto consider = [&](int pivot, int other, int form) {
    for (int m : graph.neighbors(other)) {
      if (m == pivot) continue;
      const GraphEdge* swap = graph.find(pivot, m);
      const GraphEdge* rotation = graph.find(m, other);
      if (!swap || !rotation || !realizable(*rotation, theta)) continue;
      const Candidate c{2.0 * swap->pi_duration + rotation->pi_duration, m, form, swap, rotation,
                        form == 0 ? m : other, form == 0 ? other : m};
      if (!best || c.duration < best->duration - 1e-9 ||
          (std::abs(c.duration - best->duration) <= 1e-9 && std::tie(c.m, c.form) < std::tie(best->m, best->form)))
        best = c;
    }
  };
  consider(j, k, 0);
  consider(k, j, 1);
  if (!best)
    throw InvalidArgument("no three-step decomposition of R(" + std::to_string(j) + "," + std::to_string(k) +
                          ") at this angle");

  const int pivot = best->form == 0 ? j : k;
  const Pulse swap_pulse = rotation_pulse(graph, *best->swap, kPi);
  RotationStep swap_step{pivot, best->m, kPi, swap_pulse};
  return {swap_step, RotationStep{best->rot_a, best->rot_b, theta, rotation_pulse(graph, *best->rotation, theta)},
          swap_step};
}

double ProtocolPlan::duration() const {
  double total = 0.0;
  for (const ProtocolStage& stage : stages) total += stage.pulse.duration;
  return total;
}

void ProtocolPlan::validate() const {
  require(!initial.empty(), "plan needs an initial state");
  require(!target.empty(), "plan needs a target state");
  for (const ProtocolStage& stage : stages) {
    stage.pulse.validate();
    if (stage.pulse_b) {
      require(two_mode, "only two-mode plans carry a second pulse");
      stage.pulse_b->validate();
      require(std::abs(stage.pulse_b->duration - stage.pulse.duration) <= 1e-9 * std::max(1.0, stage.pulse.duration),
              "parallel pulses must have equal durations");
    }
    if (stage.kind == StageKind::Rotation) {
      require(stage.edge.has_value() && stage.angle.has_value(), "rotation stages need an edge and an angle");
      require_rotation_angle(*stage.angle);
    }
  }
}

ProtocolPlan fock_prep_plan(const SystemParams& params, int N, double omega0) {
  params.validate();
  require(N >= 1, "Fock number must be >= 1");
  require(N + 1 <= params.n_max, "truncation too small for the requested Fock state");
  ProtocolPlan plan;
  plan.stages.push_back({StageKind::Pulse, std::nullopt, std::nullopt, cook_shore_pulse(params, N, omega0), std::nullopt});
  plan.initial = {{DressedLabel::ground()}};
  plan.target = {{DressedLabel::minus(N)}};
  return plan;
}

ProtocolPlan fock_prep_plan(const SystemParams& params, int N, const OptimizationResult& optimized) {
  params.validate();
  require(N >= 1, "Fock number must be >= 1");
  require(N + 1 <= params.n_max, "truncation too small for the requested Fock state");
  optimized.best_pulse.validate();
  ProtocolPlan plan;
  plan.stages.push_back({StageKind::Pulse, std::nullopt, std::nullopt, optimized.best_pulse, std::nullopt});
  plan.initial = {{DressedLabel::ground()}};
  plan.target = {{DressedLabel::minus(N)}};
  return plan;
}

ProtocolPlan qudit_plan(const CouplingGraph& graph, int j, int k, double theta) {
  ProtocolPlan plan;
  for (RotationStep& step : compile_rotation(graph, j, k, theta)) {
    const GraphEdge* edge = graph.find(step.j, step.k);
    plan.stages.push_back({StageKind::Rotation, *edge, step.angle, std::move(step.realized_by), std::nullopt});
  }
  plan.initial = {{qudit_label(j)}};
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  if (std::abs(c) > 1e-12) plan.target.push_back({qudit_label(j), DressedLabel::ground(), c});
  if (std::abs(s) > 1e-12) plan.target.push_back({qudit_label(k), DressedLabel::ground(), std::complex<double>(0.0, -s)});
  return plan;
}

ProtocolPlan optimize_qudit_stages(const CouplingGraph& graph, const ProtocolPlan& plan, int M,
                                   const OptimizerOptions& options) {
  ProtocolPlan out = plan;
  std::vector<std::pair<GraphEdge, Pulse>> done;
  for (ProtocolStage& stage : out.stages) {
    if (stage.kind != StageKind::Rotation || !stage.angle || !is_swap(*stage.angle)) continue;
    const GraphEdge& edge = *stage.edge;
    auto cached = std::find_if(done.begin(), done.end(), [&](const auto& entry) { return entry.first == edge; });
    if (cached != done.end()) {
      stage.pulse = cached->second;
      continue;
    }
    const std::vector<DressedLabel> path = edge_path(edge);
    OptimizationProblem problem;
    problem.params = graph.params;
    problem.N = static_cast<int>(path.size()) - 1;
    problem.T = stage.pulse.duration;
    problem.M = M;
    problem.initial_state = path.front();
    problem.target_state = path.back();
    if (edge.kind == EdgeKind::PlusMinus || edge.j != 0) {
      Pulse seed = rotation_pulse(graph, edge, kPi);
      if (seed.constant_amps) {
        // Start the Fourier search from a 1 - cos envelope of equal mean.
        for (std::size_t n = 0; n < seed.tones.size(); ++n) {
          seed.tones[n].a = Eigen::VectorXd::Zero(M);
          seed.tones[n].b = Eigen::VectorXd::Zero(M);
          seed.tones[n].a(0) = (*seed.constant_amps)(static_cast<Eigen::Index>(n));
        }
        seed.constant_amps.reset();
      } else {
        for (Tone& tone : seed.tones) {
          tone.a.conservativeResize(M);
          tone.b.conservativeResize(M);
          if (M > 1) {
            tone.a.tail(M - 1).setZero();
            tone.b.tail(M - 1).setZero();
          }
        }
      }
      problem.seed_pulse = seed;
    }
    const OptimizationResult result = optimize_fock_pulse(problem, options);
    stage.pulse = result.best_pulse;
    done.emplace_back(edge, result.best_pulse);
  }
  return out;
}

ProtocolPlan noon_plan(const SystemParams& params_a, const SystemParams& params_b, int N, double omega0) {
  params_a.validate();
  params_b.validate();
  require(N >= 1, "NOON number must be >= 1");
  require(N + 1 <= std::min(params_a.n_max, params_b.n_max), "truncation too small for the NOON number");
  require(omega0 > 0.0, "chain rate must be positive");

  ProtocolPlan plan;
  plan.two_mode = true;
  const double r = 1.0 / std::sqrt(2.0);
  plan.initial = {{DressedLabel::plus(1), DressedLabel::ground(), r}, {DressedLabel::ground(), DressedLabel::plus(1), r}};
  plan.target = {{DressedLabel::minus(N), DressedLabel::ground(), r}, {DressedLabel::ground(), DressedLabel::minus(N), r}};

  auto parallel = [&](const std::vector<DressedLabel>& path, DriveOperatorKind channel) {
    ProtocolStage stage;
    stage.pulse = chain_rotation_pulse(params_a, path, omega0, channel);
    if (!(params_b == params_a)) stage.pulse_b = chain_rotation_pulse(params_b, path, omega0, channel);
    return stage;
  };
  auto chain_from = [&](DressedLabel start) {
    std::vector<DressedLabel> path{start};
    bool minus = start.kind() != DressedLabel::Kind::Minus;
    for (int n = start.n() + 1; n <= N; ++n, minus = !minus)
      path.push_back(minus ? DressedLabel::minus(n) : DressedLabel::plus(n));
    return path;
  };
  if (N % 2 == 0) {
    plan.stages.push_back(parallel(chain_from(DressedLabel::plus(1)), DriveOperatorKind::QubitTransverse));
  } else {
    plan.stages.push_back(parallel({DressedLabel::plus(1), DressedLabel::minus(1)}, DriveOperatorKind::QubitLongitudinal));
    if (N > 1) plan.stages.push_back(parallel(chain_from(DressedLabel::minus(1)), DriveOperatorKind::QubitTransverse));
  }
  return plan;
}

namespace {

// Runs `psi` through every stage, recording trajectories when `record` is set.
StateVector run_stages(const Propagator& propagator, const ProtocolPlan& plan, bool mode_b, StateVector psi,
                       const SimulationConfig& config, std::vector<Trajectory>* record) {
  for (const ProtocolStage& stage : plan.stages) {
    const Pulse& pulse = mode_b && stage.pulse_b ? *stage.pulse_b : stage.pulse;
    if (record) {
      Trajectory traj = propagator.propagate(std::span<const Pulse>(&pulse, 1), psi, pulse.duration, config);
      psi = traj.final_state();
      record->push_back(std::move(traj));
    } else {
      psi = propagator.evolve(std::span<const Pulse>(&pulse, 1), psi, pulse.duration, config);
    }
  }
  return psi;
}

}  // namespace

PlanSimulation simulate_plan(const ProtocolPlan& plan, const SystemParams& params, const SimulationConfig& config) {
  plan.validate();
  require(!plan.two_mode, "two-mode plans need parameters for both modes");
  params.validate();
  const int dim = dressed_dimension(params.n_max);
  StateVector psi = StateVector::Zero(dim);
  for (const StateTerm& term : plan.initial) psi += term.amplitude * local_state(params.n_max, term.a);
  require(std::abs(psi.norm() - 1.0) < 1e-9, "initial state must be normalized");
  StateVector target = StateVector::Zero(dim);
  for (const StateTerm& term : plan.target) target += term.amplitude * local_state(params.n_max, term.a);

  PlanSimulation out;
  const Propagator propagator(params);
  psi = run_stages(propagator, plan, false, psi, config, &out.stages);
  out.final_amplitudes = psi;
  out.fidelity = std::norm(target.normalized().dot(psi));
  return out;
}

PlanSimulation simulate_plan(const ProtocolPlan& plan, const SystemParams& params_a, const SystemParams& params_b,
                             const SimulationConfig& config) {
  plan.validate();
  require(plan.two_mode, "single-system plans take one parameter set");
  params_a.validate();
  params_b.validate();
  const Propagator prop_a(params_a);
  const Propagator prop_b(params_b);

  // Each distinct local input is propagated once per mode.
  auto propagate_inputs = [&](const Propagator& prop, bool mode_b, std::vector<Trajectory>* record) {
    std::vector<std::pair<DressedLabel, StateVector>> images;
    for (const StateTerm& term : plan.initial) {
      const DressedLabel label = mode_b ? term.b : term.a;
      if (std::any_of(images.begin(), images.end(), [&](const auto& entry) { return entry.first == label; })) continue;
      std::vector<Trajectory>* sink = record && images.empty() ? record : nullptr;
      images.emplace_back(label, run_stages(prop, plan, mode_b, local_state(prop.params().n_max, label), config, sink));
    }
    return images;
  };
  PlanSimulation out;
  const auto images_a = propagate_inputs(prop_a, false, &out.stages);
  const auto images_b = propagate_inputs(prop_b, true, nullptr);
  auto image = [](const auto& images, const DressedLabel& label) -> const StateVector& {
    return std::find_if(images.begin(), images.end(), [&](const auto& entry) { return entry.first == label; })->second;
  };

  double norm2 = 0.0;
  for (const StateTerm& term : plan.initial) norm2 += std::norm(term.amplitude);
  require(std::abs(norm2 - 1.0) < 1e-9, "initial state must be normalized");

  Eigen::MatrixXcd joint = Eigen::MatrixXcd::Zero(prop_a.dimension(), prop_b.dimension());
  for (const StateTerm& term : plan.initial)
    joint += term.amplitude * image(images_a, term.a) * image(images_b, term.b).transpose();

  std::complex<double> overlap = 0.0;
  double target_norm2 = 0.0;
  for (const StateTerm& term : plan.target) {
    require(term.a.n() <= params_a.n_max && term.b.n() <= params_b.n_max, "target outside the truncation");
    overlap += std::conj(term.amplitude) * joint(term.a.index(), term.b.index());
    target_norm2 += std::norm(term.amplitude);
  }
  out.fidelity = std::norm(overlap) / target_norm2;
  out.final_amplitudes = std::move(joint);
  return out;
}

}  // namespace jclad
