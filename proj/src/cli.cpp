#include "jclad/cli.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "jclad/dynamics.hpp"
#include "jclad/jc_core.hpp"
#include "jclad/optimizer.hpp"
#include "jclad/protocols.hpp"
#include "jclad/pulses.hpp"
#include "jclad/serialization.hpp"

namespace jclad {

namespace {

namespace fs = std::filesystem;

class StrictFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string command;
  std::string config_path;
  std::string input;
  std::string out;
  std::string csv;
  std::optional<double> T;
  std::optional<int> N;
  std::optional<int> M;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  bool resume = false;
};

struct Context {
  Flags flags;
  Json config = Json::object();
  std::ostream& out;
  std::ostream& err;

  SystemParams system() const {
    return config.contains("system") ? system_from_json(config.at("system")) : SystemParams{};
  }
  Json block(const char* name) const {
    if (!config.contains(name)) return Json::object();
    const Json& b = config.at(name);
    if (!b.is_object()) throw ParseError(std::string("'") + name + "' block must be an object");
    return b;
  }
};

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

// Writes the document to --out, or to stdout when no path was given.
void emit(Context& ctx, const Json& doc, const std::string& summary) {
  if (ctx.flags.out.empty()) {
    ctx.out << doc.dump(2) << '\n';
  } else {
    write_json_file(ctx.flags.out, doc);
    ctx.out << summary << '\n';
  }
}

void write_csv(const Context& ctx, const std::vector<Trajectory>& stages, int n_max, const LadderBasis& first) {
  if (ctx.flags.csv.empty()) return;
  // Stages are concatenated on one clock.
  Trajectory joined;
  double offset = 0.0;
  for (const Trajectory& stage : stages) {
    const std::size_t skip = joined.times.empty() ? 0 : 1;
    for (std::size_t s = skip; s < stage.times.size(); ++s) {
      joined.times.push_back(offset + stage.times[s]);
      joined.states.push_back(stage.states[s]);
    }
    if (!stage.times.empty()) offset += stage.times.back();
  }
  joined.populations.resize(static_cast<Eigen::Index>(joined.states.size()), dressed_dimension(n_max));
  for (std::size_t i = 0; i < joined.states.size(); ++i)
    joined.populations.row(static_cast<Eigen::Index>(i)) = joined.states[i].cwiseAbs2().transpose();
  std::ostringstream text;
  write_trajectory_csv(text, joined, n_max, first);
  write_text_file(ctx.flags.csv, text.str());
}

Json populations_json(const StateVector& psi) {
  Json j = Json::object();
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    j[DressedLabel::from_index(static_cast<int>(i)).to_string()] = std::norm(psi(i));
  return j;
}

Json convergence_json(const ConvergenceReport& report) {
  Json j = Json::object();
  j["fidelity_at_nmax"] = report.fidelity_at_nmax;
  j["fidelity_at_nmax_plus_margin"] = report.fidelity_at_nmax_plus_margin;
  j["delta"] = report.delta;
  j["converged"] = report.converged;
  return j;
}

void check_strict(const Context& ctx, const ConvergenceReport& report) {
  if (ctx.flags.strict && !report.converged) {
    std::ostringstream msg;
    msg << "truncation check failed: fidelity changes by " << report.delta << " when n_max grows";
    throw StrictFailure(msg.str());
  }
}

int cmd_spectrum(Context& ctx) {
  const SystemParams params = ctx.system();
  params.validate();
  Json records = Json::array();
  for (int n = 0; n < params.n_max; ++n) {
    const TransitionSet t = transition_frequencies(params, n);
    Json r = Json::object();
    r["n"] = n;
    r["E_minus"] = n == 0 ? 0.0 : dressed_energy(params, DressedLabel::minus(n));
    r["E_plus"] = n == 0 ? 0.0 : dressed_energy(params, DressedLabel::plus(n));
    r["w_plus"] = t.w_plus;
    r["w_minus"] = t.w_minus;
    r["w_up"] = t.w_up;
    r["w_down"] = t.w_down;
    records.push_back(std::move(r));
  }
  Json doc = Json::object();
  doc["system"] = to_json(params);
  doc["records"] = std::move(records);
  emit(ctx, doc, "spectrum: " + std::to_string(params.n_max) + " records");
  return kExitOk;
}

struct SinglePlanReport {
  Json doc;
  double fidelity;
};

SinglePlanReport run_single_plan(Context& ctx, const ProtocolPlan& plan, const SystemParams& params,
                                 const SimulationConfig& config, const LadderBasis& first) {
  const PlanSimulation sim = simulate_plan(plan, params, config);
  const StateVector final_state = sim.final_amplitudes.col(0);
  write_csv(ctx, sim.stages, params.n_max, first);
  Json doc = Json::object();
  doc["system"] = to_json(params);
  doc["plan"] = to_json(plan);
  doc["fidelity"] = sim.fidelity;
  doc["infidelity"] = 1.0 - sim.fidelity;
  doc["populations"] = populations_json(final_state);
  doc["final_amplitudes"] = amplitudes_to_json(final_state);
  return {std::move(doc), sim.fidelity};
}

SimulationConfig config_from(const Json& block) {
  SimulationConfig config;
  config.dt = get_or(block, "dt_ns", config.dt);
  config.sample_stride = get_or(block, "sample_stride_ns", config.sample_stride);
  config.convergence_margin = get_or(block, "convergence_margin", config.convergence_margin);
  return config;
}

int cmd_fock_prep(Context& ctx) {
  const Json block = ctx.block("fock");
  const SystemParams params = ctx.system();
  const int N = ctx.flags.N.value_or(get_or(block, "N", 4));
  const std::string source = get_or<std::string>(block, "source", "analytic");
  const SimulationConfig config = config_from(block);

  ProtocolPlan plan;
  if (source == "analytic") {
    double omega0 = get_or(block, "omega0_mhz", 1.0);
    if (ctx.flags.T) omega0 = omega0_for_duration(*ctx.flags.T);
    plan = fock_prep_plan(params, N, omega0);
  } else if (source == "optimized") {
    const std::string file = ctx.flags.input.empty() ? get_or<std::string>(block, "result_file", "") : ctx.flags.input;
    if (file.empty()) throw ParseError("optimized source needs a result file");
    plan = fock_prep_plan(params, N, result_from_json(read_json_file(file)));
  } else {
    throw ParseError("unknown pulse source '" + source + "'");
  }
  SinglePlanReport report = run_single_plan(ctx, plan, params, config, ladder_basis(N));
  const Pulse& pulse = plan.stages.front().pulse;
  const ConvergenceReport conv = convergence_check(params, std::span<const Pulse>(&pulse, 1),
                                                   basis_state(params.n_max, DressedLabel::ground()),
                                                   DressedLabel::minus(N), pulse.duration, config);
  report.doc["truncation"] = convergence_json(conv);
  std::ostringstream summary;
  summary << "fock-prep N=" << N << " 1-F=" << format_double(1.0 - report.fidelity);
  emit(ctx, report.doc, summary.str());
  check_strict(ctx, conv);
  return kExitOk;
}

int cmd_optimize(Context& ctx) {
  const Json block = ctx.block("optimize");
  OptimizationProblem problem;
  problem.params = ctx.system();
  problem = problem_from_json(block, problem);
  if (ctx.flags.N) problem.N = *ctx.flags.N;
  if (ctx.flags.T) problem.T = *ctx.flags.T;
  if (ctx.flags.M) problem.M = *ctx.flags.M;
  OptimizerOptions options = block.contains("optimizer") ? options_from_json(block.at("optimizer")) : OptimizerOptions{};
  if (ctx.flags.seed) options.seed = *ctx.flags.seed;
  if (block.contains("warm_start_file")) {
    const OptimizationResult warm = result_from_json(read_json_file(get_or<std::string>(block, "warm_start_file", "")));
    options.warm_start = warm.best_pulse;
  }
  problem.validate();

  std::vector<RestartRecord> previous;
  if (ctx.flags.resume) {
    if (ctx.flags.out.empty()) throw ParseError("--resume needs --out");
    if (fs::exists(ctx.flags.out)) {
      const Json saved = read_json_file(ctx.flags.out);
      if (!saved.contains("problem") || saved.at("problem") != to_json(problem))
        throw ParseError("--resume: " + ctx.flags.out + " belongs to a different problem");
      if (saved.contains("per_restart"))
        for (const Json& r : saved.at("per_restart")) previous.push_back(restart_from_json(r));
    }
  }
  std::vector<RestartRecord> finished = previous;
  if (!ctx.flags.out.empty()) {
    // Checkpoint finished restarts so an interrupted run can resume.
    options.on_restart = [&](const RestartRecord& record) {
      finished.push_back(record);
      Json doc = Json::object();
      doc["problem"] = to_json(problem);
      doc["options"] = to_json(options);
      doc["complete"] = false;
      Json restarts = Json::array();
      for (const RestartRecord& r : finished) restarts.push_back(to_json(r));
      doc["per_restart"] = std::move(restarts);
      write_json_file(ctx.flags.out, doc);
    };
  }

  const OptimizationResult result = optimize_fock_pulse(problem, options, previous);
  Json doc = result_to_json(problem, options, result);
  if (!ctx.flags.csv.empty()) {
    SimulationConfig verify = options.verify;
    const Trajectory traj = propagate(problem.params, std::span<const Pulse>(&result.best_pulse, 1),
                                      basis_state(problem.params.n_max, problem.initial_state), problem.T, verify);
    write_csv(ctx, {traj}, problem.params.n_max, problem.seed_pulse ? LadderBasis{} : ladder_basis(problem.N));
  }
  std::ostringstream summary;
  summary << "optimize N=" << problem.N << " T=" << format_double(problem.T) << " M=" << problem.M
          << " 1-F=" << format_double(result.infidelity) << " restart=" << result.restart_index;
  emit(ctx, doc, summary.str());
  check_strict(ctx, result.truncation);
  return kExitOk;
}

struct ReplayTarget {
  DressedLabel initial = DressedLabel::ground();
  DressedLabel target = DressedLabel::minus(4);
};

Json replay_pulse(const Context& ctx, const SystemParams& params, const Pulse& pulse, const ReplayTarget& states,
                  const SimulationConfig& config, ConvergenceReport& conv) {
  const std::span<const Pulse> pulses(&pulse, 1);
  const StateVector psi0 = basis_state(params.n_max, states.initial);
  SimulationConfig endpoints = config;
  const Trajectory traj = Propagator(params).propagate(pulses, psi0, pulse.duration, endpoints);
  const StateVector& final_state = traj.final_state();
  const double f = fidelity(final_state, basis_state(params.n_max, states.target));
  conv = convergence_check(params, pulses, psi0, states.target, pulse.duration, config);
  if (!ctx.flags.csv.empty()) {
    LadderBasis first;
    if (states.initial == DressedLabel::ground() && states.target.kind() == DressedLabel::Kind::Minus)
      first = ladder_basis(states.target.n());
    write_csv(ctx, {traj}, params.n_max, first);
  }
  Json row = Json::object();
  row["duration_ns"] = pulse.duration;
  row["infidelity"] = 1.0 - f;
  row["norm_error"] = traj.final_norm_error;
  row["truncation"] = convergence_json(conv);
  row["populations"] = populations_json(final_state);
  return row;
}

int cmd_replay(Context& ctx) {
  const Json block = ctx.block("replay");
  const std::string file = ctx.flags.input.empty() ? get_or<std::string>(block, "file", "") : ctx.flags.input;
  if (file.empty()) throw ParseError("replay needs a pulse, result or table file");
  const Json input = read_json_file(file);
  if (!input.is_object()) throw ParseError(file + ": expected a JSON object");
  SimulationConfig config = config_from(block);

  SystemParams params = ctx.system();
  if (!ctx.config.contains("system") && input.contains("system")) params = system_from_json(input.at("system"));
  ReplayTarget states;
  const int N = ctx.flags.N.value_or(get_or(block, "N", get_or(input, "N", 4)));
  states.target = DressedLabel::minus(N);
  auto read_label = [](const Json& j, const char* key, DressedLabel fallback) {
    if (!j.contains(key)) return fallback;
    try {
      return DressedLabel::parse(j.at(key).get<std::string>());
    } catch (const std::exception& e) {
      throw ParseError(std::string("field '") + key + "': " + e.what());
    }
  };
  states.initial = read_label(input, "initial_state", states.initial);
  states.target = read_label(input, "target_state", states.target);
  states.initial = read_label(block, "initial_state", states.initial);
  states.target = read_label(block, "target_state", states.target);

  Json doc = Json::object();
  doc["system"] = to_json(params);
  doc["initial_state"] = states.initial.to_string();
  doc["target_state"] = states.target.to_string();
  ConvergenceReport worst{1.0, 1.0, 0.0, true};
  std::ostringstream summary;
  summary << "replay";

  if (input.contains("rows")) {
    if (!input.at("rows").is_array()) throw ParseError(file + ": 'rows' must be an array");
    Json rows = Json::array();
    bool matched = false;
    for (const Json& r : input.at("rows")) {
      const double T = get_or(r, "T_ns", 0.0);
      if (ctx.flags.T && std::abs(T - *ctx.flags.T) > 1e-9) continue;
      matched = true;
      Json pulse_json = Json::object();
      pulse_json["channel"] = get_or<std::string>(input, "channel", "qubit_transverse");
      pulse_json["duration_ns"] = T;
      if (!r.contains("tones")) throw ParseError(file + ": row without tones");
      pulse_json["tones"] = r.at("tones");
      ConvergenceReport conv{};
      Json row = replay_pulse(ctx, params, pulse_from_json(pulse_json), states, config, conv);
      if (r.contains("published_infidelity")) row["published_infidelity"] = r.at("published_infidelity");
      summary << " T=" << format_double(T) << " 1-F=" << format_double(row["infidelity"].get<double>());
      if (!conv.converged) worst = conv;
      rows.push_back(std::move(row));
    }
    if (!matched) throw ParseError(file + ": no row with the requested duration");
    doc["rows"] = std::move(rows);
  } else {
    const Pulse pulse = input.contains("best_pulse") ? pulse_from_json(input.at("best_pulse")) : pulse_from_json(input);
    ConvergenceReport conv{};
    Json row = replay_pulse(ctx, params, pulse, states, config, conv);
    summary << " 1-F=" << format_double(row["infidelity"].get<double>());
    if (!conv.converged) worst = conv;
    doc["rows"] = Json::array({std::move(row)});
  }
  emit(ctx, doc, summary.str());
  check_strict(ctx, worst);
  return kExitOk;
}

int cmd_qudit(Context& ctx) {
  const Json block = ctx.block("qudit");
  const SystemParams params = ctx.system();
  GraphTiming timing;
  timing.peak_amplitude = get_or(block, "peak_amplitude_mhz", timing.peak_amplitude);
  timing.plus_minus_duration = get_or(block, "plus_minus_duration_ns", timing.plus_minus_duration);
  const int d = get_or(block, "d", 5);
  const int j = get_or(block, "j", 0);
  const int k = get_or(block, "k", 4);
  const double theta = get_or(block, "theta", std::numbers::pi);
  const std::string source = get_or<std::string>(block, "source", "analytic");

  const CouplingGraph graph = build_coupling_graph(params, d, timing);
  ProtocolPlan plan = qudit_plan(graph, j, k, theta);
  if (source == "optimized") {
    OptimizerOptions options = block.contains("optimizer") ? options_from_json(block.at("optimizer")) : OptimizerOptions{};
    if (ctx.flags.seed) options.seed = *ctx.flags.seed;
    plan = optimize_qudit_stages(graph, plan, ctx.flags.M.value_or(get_or(block, "M", 1)), options);
  } else if (source != "analytic") {
    throw ParseError("unknown pulse source '" + source + "'");
  }
  SinglePlanReport report = run_single_plan(ctx, plan, params, config_from(block), {});
  Json edges = Json::array();
  for (const GraphEdge& e : graph.edges) {
    Json je = Json::object();
    je["j"] = e.j;
    je["k"] = e.k;
    je["kind"] = to_string(e.kind);
    je["pi_duration_ns"] = e.pi_duration;
    edges.push_back(std::move(je));
  }
  report.doc["graph"] = std::move(edges);
  std::ostringstream summary;
  summary << "qudit R(" << j << "," << k << ") stages=" << plan.stages.size()
          << " 1-F=" << format_double(1.0 - report.fidelity);
  emit(ctx, report.doc, summary.str());
  return kExitOk;
}

int cmd_noon(Context& ctx) {
  const Json block = ctx.block("noon");
  const SystemParams params_a = ctx.system();
  const SystemParams params_b = block.contains("system_b") ? system_from_json(block.at("system_b")) : params_a;
  const int N = ctx.flags.N.value_or(get_or(block, "N", 2));
  double omega0 = get_or(block, "omega0_mhz", 1.0);
  if (ctx.flags.T) omega0 = omega0_for_duration(*ctx.flags.T);
  const ProtocolPlan plan = noon_plan(params_a, params_b, N, omega0);
  const PlanSimulation sim = simulate_plan(plan, params_a, params_b, config_from(block));
  write_csv(ctx, sim.stages, params_a.n_max, {});

  Json doc = Json::object();
  doc["system_a"] = to_json(params_a);
  doc["system_b"] = to_json(params_b);
  doc["plan"] = to_json(plan);
  doc["fidelity"] = sim.fidelity;
  doc["infidelity"] = 1.0 - sim.fidelity;
  std::ostringstream summary;
  summary << "noon N=" << N << " stages=" << plan.stages.size() << " 1-F=" << format_double(1.0 - sim.fidelity);
  emit(ctx, doc, summary.str());
  return kExitOk;
}

int cmd_simulate(Context& ctx) {
  const Json block = ctx.block("simulate");
  const std::string file = ctx.flags.input.empty() ? get_or<std::string>(block, "plan_file", "") : ctx.flags.input;
  if (file.empty()) throw ParseError("simulate needs a plan file");
  const Json input = read_json_file(file);
  const ProtocolPlan plan = plan_from_json(input.contains("plan") ? input.at("plan") : input);
  const SystemParams params = ctx.system();
  const SimulationConfig config = config_from(block);
  Json doc = Json::object();
  double f = 0.0;
  if (plan.two_mode) {
    const SystemParams params_b = block.contains("system_b") ? system_from_json(block.at("system_b")) : params;
    const PlanSimulation sim = simulate_plan(plan, params, params_b, config);
    write_csv(ctx, sim.stages, params.n_max, {});
    f = sim.fidelity;
    doc["system_a"] = to_json(params);
    doc["system_b"] = to_json(params_b);
    doc["fidelity"] = f;
    doc["infidelity"] = 1.0 - f;
  } else {
    SinglePlanReport report = run_single_plan(ctx, plan, params, config, {});
    doc = std::move(report.doc);
    f = report.fidelity;
  }
  emit(ctx, doc, "simulate stages=" + std::to_string(plan.stages.size()) + " 1-F=" + format_double(1.0 - f));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resonant control of a qubit-resonator ladder", "jclad"};
  app.require_subcommand(1);
  Flags flags;
  double T = 0.0;
  int N = 0;
  int M = 0;
  std::uint64_t seed = 0;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const Command commands[] = {
      {"spectrum", "Dressed energies and transition families", cmd_spectrum},
      {"fock-prep", "Single-step Fock state preparation", cmd_fock_prep},
      {"optimize", "Multi-start simplex pulse search", cmd_optimize},
      {"replay", "Simulate a stored pulse, result or table file", cmd_replay},
      {"qudit", "Compile and simulate a two-level qudit rotation", cmd_qudit},
      {"noon", "Two-resonator NOON state synthesis", cmd_noon},
      {"simulate", "Simulate a stored protocol plan", cmd_simulate},
  };
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("input", flags.input, "Input file (pulse, result, table or plan JSON)");
    sub->add_option("--config,-c", flags.config_path, "JSON run configuration");
    sub->add_option("--out,-o", flags.out, "Result JSON path (stdout when omitted)");
    sub->add_option("--csv", flags.csv, "Trajectory CSV path");
    sub->add_option("--T", T, "Duration override, ns");
    sub->add_option("--N", N, "Photon number override")->check(CLI::PositiveNumber);
    sub->add_option("--M", M, "Fourier order override")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed override");
    sub->add_flag("--strict", flags.strict, "Exit 4 when the truncation check fails");
    sub->add_flag("--resume", flags.resume, "Reuse finished restarts stored in --out");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  flags.command = chosen->get_name();
  if (chosen->count("--T")) flags.T = T;
  if (chosen->count("--N")) flags.N = N;
  if (chosen->count("--M")) flags.M = M;
  if (chosen->count("--seed")) flags.seed = seed;

  Context ctx{flags, Json::object(), out, err};
  try {
    if (!flags.config_path.empty()) {
      ctx.config = read_json_file(flags.config_path);
      if (!ctx.config.is_object()) throw ParseError(flags.config_path + ": configuration must be a JSON object");
    }
    for (const Command& c : commands)
      if (flags.command == c.name) return c.run(ctx);
    return kExitConfig;
  } catch (const StrictFailure& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitStrict;
  } catch (const IoError& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "jclad: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace jclad
