#include "jclad/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace jclad {

void OptimizationProblem::validate() const {
  params.validate();
  require(N >= 1, "need at least one tone");
  require(M >= 1, "need at least one Fourier component");
  require(T > 0.0, "pulse duration must be positive");
  require(initial_state.n() <= params.n_max && target().n() <= params.n_max,
          "initial or target state outside the truncation");
  if (seed_pulse) {
    require(seed_pulse->tones.size() == static_cast<std::size_t>(N), "seed pulse must have N tones");
    require(seed_pulse->channel == channel, "seed pulse channel differs from the problem channel");
  } else {
    require(N + 1 <= params.n_max, "truncation too small for the zig-zag seed");
  }
}

Pulse pulse_from_parameters(const OptimizationProblem& problem, const Eigen::VectorXd& x) {
  require(x.size() == problem.parameter_count(), "parameter vector has the wrong length");
  const int M = problem.M;
  Pulse pulse;
  pulse.channel = problem.channel;
  pulse.duration = problem.T;
  pulse.tones.reserve(static_cast<std::size_t>(problem.N));
  for (int n = 0; n < problem.N; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * (1 + 2 * M);
    pulse.tones.push_back({x(base), x.segment(base + 1, M), x.segment(base + 1 + M, M)});
  }
  return pulse;
}

Eigen::VectorXd parameters_from_pulse(const OptimizationProblem& problem, const Pulse& pulse) {
  require(pulse.tones.size() == static_cast<std::size_t>(problem.N), "pulse has the wrong tone count");
  const int M = problem.M;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.parameter_count());
  for (int n = 0; n < problem.N; ++n) {
    const Tone& tone = pulse.tones[static_cast<std::size_t>(n)];
    const Eigen::Index base = static_cast<Eigen::Index>(n) * (1 + 2 * M);
    x(base) = tone.carrier;
    if (pulse.constant_amps) {
      // A constant tone has the same mean drive as a 1 - cos envelope of
      // equal first coefficient.
      x(base + 1) = (*pulse.constant_amps)(n);
      continue;
    }
    const int keep = std::min(M, tone.order());
    x.segment(base + 1, keep) = tone.a.head(keep);
    x.segment(base + 1 + M, keep) = tone.b.head(keep);
  }
  return x;
}

Eigen::VectorXd seed_from_analytic(const OptimizationProblem& problem) {
  problem.validate();
  if (problem.seed_pulse) return parameters_from_pulse(problem, *problem.seed_pulse);
  const Eigen::VectorXd carriers = zigzag_frequencies(problem.params, problem.N);
  const Eigen::VectorXd amps = cook_shore_amplitudes(problem.N, omega0_for_duration(problem.T));
  const int M = problem.M;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.parameter_count());
  for (int n = 0; n < problem.N; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * (1 + 2 * M);
    x(base) = carriers(n);
    x(base + 1) = amps(n);
  }
  return x;
}

FockObjective::FockObjective(const OptimizationProblem& problem, const SimulationConfig& config)
    : problem_(problem),
      config_(config),
      propagator_(problem.params),
      psi0_(basis_state(problem.params.n_max, problem.initial_state)),
      target_(basis_state(problem.params.n_max, problem.target())) {
  config_.sample_stride = 0.0;
}

double FockObjective::operator()(const Eigen::VectorXd& x) const {
  const Pulse pulse = pulse_from_parameters(problem_, x);
  const std::span<const Pulse> pulses(&pulse, 1);
  // Carriers wander during a search; stay inside the resolution limit.
  SimulationConfig config = config_;
  config.dt = std::min(config.dt, propagator_.max_step(pulses));
  const StateVector out = propagator_.evolve(pulses, psi0_, problem_.T, config);
  return std::clamp(1.0 - fidelity(out, target_), 0.0, 1.0);
}

namespace {

constexpr double kMinRoundScale = 1e-6;

Eigen::VectorXd initial_steps(const OptimizationProblem& problem, const OptimizerOptions& options) {
  const int M = problem.M;
  Eigen::VectorXd steps(problem.parameter_count());
  for (int n = 0; n < problem.N; ++n) {
    const Eigen::Index base = static_cast<Eigen::Index>(n) * (1 + 2 * M);
    steps(base) = options.frequency_prior_halfwidth;
    steps.segment(base + 1, 2 * M).setConstant(options.coeff_prior);
  }
  return steps;
}

RestartRecord run_restart(const OptimizationProblem& problem, const OptimizerOptions& options, int index,
                          const Eigen::VectorXd& seed) {
  RestartRecord out;
  out.restart_index = index;
  SimulationConfig search;
  search.dt = options.search_dt;
  search.sample_stride = 0.0;
  const FockObjective objective(problem, search);

  std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  const Eigen::VectorXd spread = initial_steps(problem, options);
  Eigen::VectorXd start = seed;
  if (index > 0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += spread(i) * unit(rng);
  } else if (options.warm_start) {
    const Eigen::VectorXd warm = parameters_from_pulse(problem, *options.warm_start);
    if (objective(warm) < objective(start)) start = warm;
  }

  const Eigen::Index n = start.size();
  Eigen::VectorXd x = start;
  out.parameters = start;
  int budget = options.max_iterations;
  try {
    double best = objective(start);
    out.objective = best;
    ++out.evaluations;
    out.history.push_back(best);
    // Each round rebuilds the simplex around the incumbent along a fresh random
    // orthonormal frame scaled by the priors; a single axis-aligned simplex
    // stalls badly in a few dozen dimensions. The next scale follows the
    // length of the last accepted move.
    std::normal_distribution<double> gauss;
    const SimplexOptions simplex_base{0, options.tol_x / spread.maxCoeff(), options.tol_f};
    double scale = 1.0;
    while (budget > 0 && scale >= kMinRoundScale) {
      const Eigen::MatrixXd frame =
          Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::NullaryExpr(n, n, [&] { return gauss(rng); }))
              .householderQ();
      const Eigen::MatrixXd basis = spread.asDiagonal() * frame;
      const Eigen::VectorXd origin = x;
      const Objective in_frame = [&](const Eigen::VectorXd& y) { return objective(origin + basis * y); };
      SimplexOptions simplex = simplex_base;
      simplex.max_iterations = std::min(budget, options.round_iterations);
      const SimplexResult round = nelder_mead(in_frame, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, scale),
                                              simplex, [&](double f) { out.history.push_back(f); });
      budget -= round.iterations;
      out.iterations += round.iterations;
      out.evaluations += round.evaluations;
      if (round.iterations == 0) break;
      if (round.f < best) {
        best = round.f;
        x = origin + basis * round.x;
        const double moved = 2.0 * round.x.norm() / std::sqrt(static_cast<double>(n));
        scale = std::max(0.3 * scale, std::min(1.0, moved));
      } else {
        scale *= 0.5;
      }
    }
    out.parameters = x;
    out.objective = best;
    out.completed = true;
  } catch (const NonFiniteObjective& e) {
    out.diagnostic = e.what();
    out.completed = true;
    out.objective = 1.0;
  }
  return out;
}

}  // namespace

OptimizationResult optimize_fock_pulse(const OptimizationProblem& problem, const OptimizerOptions& options,
                                       const std::vector<RestartRecord>& previous) {
  problem.validate();
  require(options.restarts >= 1, "need at least one restart");
  require(options.tol_x > 0.0 && options.tol_f > 0.0, "tolerances must be positive");
  require(options.max_iterations >= 0, "iteration budget must be non-negative");
  require(options.search_dt > 0.0, "search step must be positive");
  require(options.round_iterations >= 1, "simplex rounds need at least one iteration");

  const Eigen::VectorXd seed = seed_from_analytic(problem);
  std::vector<RestartRecord> outcomes(static_cast<std::size_t>(options.restarts));
  std::vector<int> pending;
  for (int r = 0; r < options.restarts; ++r) {
    auto it = std::find_if(previous.begin(), previous.end(),
                           [&](const RestartRecord& rec) { return rec.restart_index == r && rec.completed; });
    if (it != previous.end() && it->parameters.size() == problem.parameter_count()) {
      outcomes[static_cast<std::size_t>(r)] = *it;
    } else {
      pending.push_back(r);
    }
  }

  const int threads = std::max(1, options.threads);
  for (std::size_t begin = 0; begin < pending.size(); begin += static_cast<std::size_t>(threads)) {
    const std::size_t end = std::min(pending.size(), begin + static_cast<std::size_t>(threads));
    if (threads == 1) {
      auto& slot = outcomes[static_cast<std::size_t>(pending[begin])];
      slot = run_restart(problem, options, pending[begin], seed);
      if (options.on_restart) options.on_restart(slot);
      continue;
    }
    std::vector<std::future<RestartRecord>> batch;
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(std::launch::async, run_restart, std::cref(problem), std::cref(options),
                                 pending[i], std::cref(seed)));
    for (std::size_t i = begin; i < end; ++i) {
      auto& slot = outcomes[static_cast<std::size_t>(pending[i])];
      slot = batch[i - begin].get();
      if (options.on_restart) options.on_restart(slot);
    }
  }

  OptimizationResult result;
  int best_index = 0;
  for (int r = 1; r < options.restarts; ++r)
    if (outcomes[static_cast<std::size_t>(r)].objective < outcomes[static_cast<std::size_t>(best_index)].objective)
      best_index = r;
  for (const RestartRecord& o : outcomes) result.per_restart.push_back(o);
  const RestartRecord& winner = outcomes[static_cast<std::size_t>(best_index)];
  result.restart_index = best_index;
  result.iterations = winner.iterations;
  result.objective_history = winner.history;
  result.best_pulse = pulse_from_parameters(problem, winner.parameters);

  SimulationConfig verify = options.verify;
  const StateVector psi0 = basis_state(problem.params.n_max, problem.initial_state);
  const std::span<const Pulse> pulses(&result.best_pulse, 1);
  verify.sample_stride = 0.0;
  const StateVector final_state = Propagator(problem.params).evolve(pulses, psi0, problem.T, verify);
  result.infidelity =
      std::clamp(1.0 - fidelity(final_state, basis_state(problem.params.n_max, problem.target())), 0.0, 1.0);
  result.truncation = convergence_check(problem.params, pulses, psi0, problem.target(), problem.T, verify);

  if (problem.N >= 2) {
    const Eigen::VectorXd carriers = result.best_pulse.carriers();
    const double separation = min_frequency_separation(std::span<const double>(carriers.data(), carriers.size()));
    double largest = 0.0;
    for (const Tone& tone : result.best_pulse.tones)
      largest = std::max({largest, tone.a.cwiseAbs().maxCoeff(), tone.b.cwiseAbs().maxCoeff()});
    result.exceeds_separation = largest > separation;
  }
  return result;
}

}  // namespace jclad
