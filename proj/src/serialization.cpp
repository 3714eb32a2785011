#include "jclad/serialization.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace jclad {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const Json& j, const char* key) {
  const auto values = field<std::vector<double>>(j, key);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

DressedLabel label_from(const Json& j, const char* key) {
  try {
    return DressedLabel::parse(field<std::string>(j, key));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

DriveOperatorKind channel_from(const Json& j, const char* key) {
  try {
    return parse_drive_kind(field<std::string>(j, key));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Json term_json(const StateTerm& term, bool two_mode) {
  Json out = Json::object();
  out["a"] = term.a.to_string();
  if (two_mode) out["b"] = term.b.to_string();
  out["re"] = term.amplitude.real();
  out["im"] = term.amplitude.imag();
  return out;
}

StateTerm term_from(const Json& j) {
  require_object(j, "state term");
  StateTerm term;
  term.a = label_from(j, "a");
  if (j.contains("b")) term.b = label_from(j, "b");
  term.amplitude = {field_or<double>(j, "re", 1.0), field_or<double>(j, "im", 0.0)};
  return term;
}

}  // namespace

Json to_json(const SystemParams& params) {
  Json j = Json::object();
  j["omega_r_mhz"] = params.omega_r;
  j["delta_mhz"] = params.delta;
  j["g_mhz"] = params.g;
  j["n_max"] = params.n_max;
  return j;
}

SystemParams system_from_json(const Json& j) {
  require_object(j, "system block");
  SystemParams params;
  params.omega_r = field_or(j, "omega_r_mhz", params.omega_r);
  params.delta = field_or(j, "delta_mhz", params.delta);
  params.g = field_or(j, "g_mhz", params.g);
  params.n_max = field_or(j, "n_max", params.n_max);
  return params;
}

Json to_json(const Pulse& pulse) {
  Json j = Json::object();
  j["channel"] = to_string(pulse.channel);
  j["duration_ns"] = pulse.duration;
  Json tones = Json::array();
  for (const Tone& tone : pulse.tones) {
    Json t = Json::object();
    t["carrier_mhz"] = tone.carrier;
    t["a_mhz"] = vector_json(tone.a);
    t["b_mhz"] = vector_json(tone.b);
    tones.push_back(std::move(t));
  }
  j["tones"] = std::move(tones);
  if (pulse.constant_amps) j["constant_amps_mhz"] = vector_json(*pulse.constant_amps);
  return j;
}

Pulse pulse_from_json(const Json& j) {
  require_object(j, "pulse");
  Pulse pulse;
  pulse.channel = j.contains("channel") ? channel_from(j, "channel") : DriveOperatorKind::QubitTransverse;
  pulse.duration = field<double>(j, "duration_ns");
  if (!j.contains("tones") || !j.at("tones").is_array()) throw ParseError("pulse needs a 'tones' array");
  for (const Json& t : j.at("tones")) {
    require_object(t, "tone");
    Tone tone;
    tone.carrier = field<double>(t, "carrier_mhz");
    tone.a = t.contains("a_mhz") ? vector_from(t, "a_mhz") : Eigen::VectorXd();
    tone.b = t.contains("b_mhz") ? vector_from(t, "b_mhz") : Eigen::VectorXd::Zero(tone.a.size());
    pulse.tones.push_back(std::move(tone));
  }
  if (j.contains("constant_amps_mhz")) pulse.constant_amps = vector_from(j, "constant_amps_mhz");
  try {
    pulse.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid pulse: ") + e.what());
  }
  return pulse;
}

Json to_json(const OptimizationProblem& problem) {
  Json j = Json::object();
  j["system"] = to_json(problem.params);
  j["N"] = problem.N;
  j["T_ns"] = problem.T;
  j["M"] = problem.M;
  j["channel"] = to_string(problem.channel);
  j["initial_state"] = problem.initial_state.to_string();
  j["target_state"] = problem.target().to_string();
  if (problem.seed_pulse) j["seed_pulse"] = to_json(*problem.seed_pulse);
  return j;
}

OptimizationProblem problem_from_json(const Json& j, const OptimizationProblem& base) {
  require_object(j, "problem block");
  OptimizationProblem problem = base;
  if (j.contains("system")) problem.params = system_from_json(j.at("system"));
  problem.N = field_or(j, "N", problem.N);
  problem.T = field_or(j, "T_ns", problem.T);
  problem.M = field_or(j, "M", problem.M);
  if (j.contains("channel")) problem.channel = channel_from(j, "channel");
  if (j.contains("initial_state")) problem.initial_state = label_from(j, "initial_state");
  if (j.contains("target_state")) problem.target_state = label_from(j, "target_state");
  if (j.contains("seed_pulse")) problem.seed_pulse = pulse_from_json(j.at("seed_pulse"));
  return problem;
}

Json to_json(const OptimizerOptions& options) {
  Json j = Json::object();
  j["max_iterations"] = options.max_iterations;
  j["round_iterations"] = options.round_iterations;
  j["restarts"] = options.restarts;
  j["seed"] = options.seed;
  j["tol_x"] = options.tol_x;
  j["tol_f"] = options.tol_f;
  j["frequency_prior_halfwidth_mhz"] = options.frequency_prior_halfwidth;
  j["coeff_prior_mhz"] = options.coeff_prior;
  j["search_dt_ns"] = options.search_dt;
  j["verify_dt_ns"] = options.verify.dt;
  return j;
}

OptimizerOptions options_from_json(const Json& j, const OptimizerOptions& base) {
  require_object(j, "optimizer block");
  OptimizerOptions options = base;
  options.max_iterations = field_or(j, "max_iterations", options.max_iterations);
  options.round_iterations = field_or(j, "round_iterations", options.round_iterations);
  options.restarts = field_or(j, "restarts", options.restarts);
  options.seed = field_or(j, "seed", options.seed);
  options.tol_x = field_or(j, "tol_x", options.tol_x);
  options.tol_f = field_or(j, "tol_f", options.tol_f);
  options.frequency_prior_halfwidth = field_or(j, "frequency_prior_halfwidth_mhz", options.frequency_prior_halfwidth);
  options.coeff_prior = field_or(j, "coeff_prior_mhz", options.coeff_prior);
  options.search_dt = field_or(j, "search_dt_ns", options.search_dt);
  options.verify.dt = field_or(j, "verify_dt_ns", options.verify.dt);
  options.threads = field_or(j, "threads", options.threads);
  return options;
}

Json to_json(const RestartRecord& record) {
  Json j = Json::object();
  j["restart_index"] = record.restart_index;
  j["parameters"] = vector_json(record.parameters);
  j["objective"] = record.objective;
  j["iterations"] = record.iterations;
  j["evaluations"] = record.evaluations;
  j["completed"] = record.completed;
  if (!record.diagnostic.empty()) j["diagnostic"] = record.diagnostic;
  j["history"] = record.history;
  return j;
}

RestartRecord restart_from_json(const Json& j) {
  require_object(j, "restart record");
  RestartRecord record;
  record.restart_index = field<int>(j, "restart_index");
  record.parameters = vector_from(j, "parameters");
  record.objective = field<double>(j, "objective");
  record.iterations = field_or(j, "iterations", 0);
  record.evaluations = field_or(j, "evaluations", 0);
  record.completed = field_or(j, "completed", false);
  record.diagnostic = field_or<std::string>(j, "diagnostic", "");
  record.history = field_or<std::vector<double>>(j, "history", {});
  return record;
}

Json result_to_json(const OptimizationProblem& problem, const OptimizerOptions& options,
                    const OptimizationResult& result) {
  Json j = Json::object();
  j["problem"] = to_json(problem);
  j["options"] = to_json(options);
  j["best_pulse"] = to_json(result.best_pulse);
  j["infidelity"] = result.infidelity;
  j["iterations"] = result.iterations;
  j["restart_index"] = result.restart_index;
  Json truncation = Json::object();
  truncation["fidelity_at_nmax"] = result.truncation.fidelity_at_nmax;
  truncation["fidelity_at_nmax_plus_margin"] = result.truncation.fidelity_at_nmax_plus_margin;
  truncation["delta"] = result.truncation.delta;
  truncation["converged"] = result.truncation.converged;
  j["truncation"] = std::move(truncation);
  j["exceeds_separation"] = result.exceeds_separation;
  Json restarts = Json::array();
  for (const RestartRecord& record : result.per_restart) restarts.push_back(to_json(record));
  j["per_restart"] = std::move(restarts);
  j["objective_history"] = result.objective_history;
  return j;
}

OptimizationResult result_from_json(const Json& j) {
  require_object(j, "result");
  OptimizationResult result;
  if (!j.contains("best_pulse")) throw ParseError("missing field 'best_pulse'");
  result.best_pulse = pulse_from_json(j.at("best_pulse"));
  result.infidelity = field<double>(j, "infidelity");
  result.iterations = field_or(j, "iterations", 0);
  result.restart_index = field_or(j, "restart_index", 0);
  if (j.contains("truncation")) {
    const Json& t = j.at("truncation");
    result.truncation = {field<double>(t, "fidelity_at_nmax"), field<double>(t, "fidelity_at_nmax_plus_margin"),
                         field<double>(t, "delta"), field<bool>(t, "converged")};
  }
  result.exceeds_separation = field_or(j, "exceeds_separation", false);
  if (j.contains("per_restart"))
    for (const Json& r : j.at("per_restart")) result.per_restart.push_back(restart_from_json(r));
  result.objective_history = field_or<std::vector<double>>(j, "objective_history", {});
  return result;
}

Json to_json(const ProtocolPlan& plan) {
  Json j = Json::object();
  j["two_mode"] = plan.two_mode;
  j["duration_ns"] = plan.duration();
  Json stages = Json::array();
  for (const ProtocolStage& stage : plan.stages) {
    Json s = Json::object();
    s["kind"] = stage.kind == StageKind::Rotation ? "rotation" : "pulse";
    if (stage.edge) {
      Json e = Json::object();
      e["j"] = stage.edge->j;
      e["k"] = stage.edge->k;
      e["kind"] = to_string(stage.edge->kind);
      e["pi_duration_ns"] = stage.edge->pi_duration;
      s["edge"] = std::move(e);
    }
    if (stage.angle) s["angle"] = *stage.angle;
    s["pulse"] = to_json(stage.pulse);
    if (stage.pulse_b) s["pulse_b"] = to_json(*stage.pulse_b);
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  Json initial = Json::array();
  for (const StateTerm& term : plan.initial) initial.push_back(term_json(term, plan.two_mode));
  j["initial"] = std::move(initial);
  Json target = Json::array();
  for (const StateTerm& term : plan.target) target.push_back(term_json(term, plan.two_mode));
  j["target"] = std::move(target);
  return j;
}

ProtocolPlan plan_from_json(const Json& j) {
  require_object(j, "plan");
  ProtocolPlan plan;
  plan.two_mode = field_or(j, "two_mode", false);
  if (!j.contains("stages") || !j.at("stages").is_array()) throw ParseError("plan needs a 'stages' array");
  for (const Json& s : j.at("stages")) {
    require_object(s, "stage");
    ProtocolStage stage;
    const std::string kind = field<std::string>(s, "kind");
    if (kind == "rotation") {
      stage.kind = StageKind::Rotation;
    } else if (kind == "pulse") {
      stage.kind = StageKind::Pulse;
    } else {
      throw ParseError("unknown stage kind '" + kind + "'");
    }
    if (s.contains("edge")) {
      const Json& e = s.at("edge");
      require_object(e, "edge");
      EdgeKind edge_kind;
      try {
        edge_kind = parse_edge_kind(field<std::string>(e, "kind"));
      } catch (const InvalidArgument& err) {
        throw ParseError(err.what());
      }
      stage.edge = GraphEdge{field<int>(e, "j"), field<int>(e, "k"), edge_kind, field<double>(e, "pi_duration_ns")};
    }
    if (s.contains("angle")) stage.angle = field<double>(s, "angle");
    if (!s.contains("pulse")) throw ParseError("stage needs a 'pulse'");
    stage.pulse = pulse_from_json(s.at("pulse"));
    if (s.contains("pulse_b")) stage.pulse_b = pulse_from_json(s.at("pulse_b"));
    plan.stages.push_back(std::move(stage));
  }
  for (const char* key : {"initial", "target"}) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ParseError(std::string("plan needs a '") + key + "' array");
    for (const Json& t : j.at(key)) (std::string(key) == "initial" ? plan.initial : plan.target).push_back(term_from(t));
  }
  try {
    plan.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid plan: ") + e.what());
  }
  return plan;
}

Json amplitudes_to_json(const StateVector& psi) {
  Json j = Json::object();
  Json labels = Json::array();
  Json amps = Json::array();
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    labels.push_back(DressedLabel::from_index(static_cast<int>(i)).to_string());
    amps.push_back(Json::array({psi(i).real(), psi(i).imag()}));
  }
  j["labels"] = std::move(labels);
  j["amplitudes"] = std::move(amps);
  return j;
}

StateVector amplitudes_from_json(const Json& j) {
  require_object(j, "amplitudes");
  const auto pairs = field<std::vector<std::array<double, 2>>>(j, "amplitudes");
  StateVector psi(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) psi(static_cast<Eigen::Index>(i)) = {pairs[i][0], pairs[i][1]};
  return psi;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, int n_max, const LadderBasis& first) {
  std::vector<int> columns;
  for (const DressedLabel& label : first) {
    require(label.n() <= n_max, "ladder label outside the truncation");
    columns.push_back(label.index());
  }
  for (int i = 0; i < dressed_dimension(n_max); ++i)
    if (std::find(columns.begin(), columns.end(), i) == columns.end()) columns.push_back(i);

  out << "t_ns";
  for (int i : columns) out << ",p_" << DressedLabel::from_index(i).to_string();
  out << '\n';
  for (std::size_t s = 0; s < trajectory.times.size(); ++s) {
    out << format_double(trajectory.times[s]);
    for (int i : columns) out << ',' << format_double(trajectory.populations(static_cast<Eigen::Index>(s), i));
    out << '\n';
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(text.str());
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace jclad
