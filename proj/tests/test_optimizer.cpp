#include <doctest.h>

#include <cmath>

#include "jclad/nelder_mead.hpp"
#include "jclad/optimizer.hpp"

using namespace jclad;

namespace {

// Cheap problem: one photon in a short window.
OptimizationProblem small_problem() {
  OptimizationProblem pr;
  pr.params.n_max = 3;
  pr.N = 1;
  pr.T = 20.0;
  pr.M = 1;
  return pr;
}

double verify(const OptimizationProblem& pr, const Pulse& pulse, const SimulationConfig& config) {
  const StateVector psi0 = basis_state(pr.params.n_max, pr.initial_state);
  SimulationConfig c = config;
  c.sample_stride = 0.0;
  const StateVector out = Propagator(pr.params).evolve(std::span<const Pulse>(&pulse, 1), psi0, pr.T, c);
  return 1.0 - fidelity(out, basis_state(pr.params.n_max, pr.target()));
}

}  // namespace

TEST_CASE("simplex on a quadratic bowl") {
  const Objective bowl = [](const Eigen::VectorXd& x) { return (x.array() - 1.0).square().sum(); };
  SimplexOptions options;
  options.max_iterations = 20000;
  options.tol_x = 1e-9;
  options.tol_f = 1e-18;
  const SimplexResult r = nelder_mead(bowl, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Constant(4, 0.5), options);
  CHECK((r.x.array() - 1.0).abs().maxCoeff() < 1e-6);
  CHECK(r.converged);
  CHECK(r.evaluations >= r.iterations);
}

TEST_CASE("simplex on a one-dimensional kink") {
  const Objective kink = [](const Eigen::VectorXd& x) { return std::abs(x(0)); };
  SimplexOptions options;
  options.tol_x = 1e-12;
  options.tol_f = 1e-14;
  const SimplexResult r = nelder_mead(kink, Eigen::VectorXd::Constant(1, 5.0), options);
  CHECK(r.f < 1e-8);
}

TEST_CASE("simplex reports non-finite objectives") {
  const Objective bad = [](const Eigen::VectorXd& x) { return x(0) > 0.5 ? std::nan("") : -x(0); };
  CHECK_THROWS_AS(nelder_mead(bad, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 1.0)), NonFiniteObjective);
}

TEST_CASE("problem validation") {
  OptimizationProblem pr;
  CHECK(pr.parameter_count() == 12);
  pr.M = 3;
  CHECK(pr.parameter_count() == 28);
  CHECK_NOTHROW(pr.validate());
  pr.M = 0;
  CHECK_THROWS_AS(pr.validate(), InvalidArgument);
  pr.M = 1;
  pr.T = 0.0;
  CHECK_THROWS_AS(pr.validate(), InvalidArgument);
  pr.T = 50.0;
  pr.N = 8;
  CHECK_THROWS_AS(pr.validate(), InvalidArgument);
  OptimizerOptions options;
  options.restarts = 0;
  CHECK_THROWS_AS(optimize_fock_pulse(small_problem(), options), InvalidArgument);
  options.restarts = 1;
  options.tol_x = 0.0;
  CHECK_THROWS_AS(optimize_fock_pulse(small_problem(), options), InvalidArgument);
}

TEST_CASE("analytic seed") {
  OptimizationProblem pr;
  pr.N = 1;
  pr.T = 500.0;
  pr.M = 3;
  const Pulse seed = pulse_from_parameters(pr, seed_from_analytic(pr));
  REQUIRE(seed.tones.size() == 1u);
  CHECK(seed.tones[0].carrier == doctest::Approx(5820.0));
  CHECK(seed.tones[0].a(0) == doctest::Approx(std::sqrt(2.0) * omega0_for_duration(500.0)));
  CHECK(seed.tones[0].a.tail(2).isZero(0.0));
  CHECK(seed.tones[0].b.isZero(0.0));

  pr.N = 4;
  pr.T = 50.0;
  const Pulse seed4 = pulse_from_parameters(pr, seed_from_analytic(pr));
  const double expected[] = {6180.0, 5565.4, 6566.3, 5328.2};
  for (int n = 0; n < 4; ++n) CHECK(std::abs(seed4.tones[std::size_t(n)].carrier - expected[n]) < 0.1);
}

TEST_CASE("parameter vector round trip") {
  OptimizationProblem pr;
  pr.M = 2;
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(pr.parameter_count(), -5.0, 5.0);
  for (int n = 0; n < pr.N; ++n) x(n * (1 + 2 * pr.M)) = 6000.0 + 100.0 * n;
  const Pulse pulse = pulse_from_parameters(pr, x);
  CHECK(pulse.duration == pr.T);
  CHECK(pulse.order() == 2);
  CHECK((parameters_from_pulse(pr, pulse) - x).norm() == 0.0);
  CHECK_THROWS_AS(pulse_from_parameters(pr, Eigen::VectorXd::Zero(3)), InvalidArgument);
}

TEST_CASE("zero iterations return the seed") {
  const OptimizationProblem pr = small_problem();
  OptimizerOptions options;
  options.restarts = 1;
  options.max_iterations = 0;
  const OptimizationResult r = optimize_fock_pulse(pr, options);
  const Eigen::VectorXd seed = seed_from_analytic(pr);
  CHECK((parameters_from_pulse(pr, r.best_pulse) - seed).norm() == 0.0);
  CHECK(r.infidelity == doctest::Approx(verify(pr, pulse_from_parameters(pr, seed), options.verify)).epsilon(1e-12));
  CHECK(r.iterations == 0);
}

TEST_CASE("search improves, is verified and is reproducible") {
  const OptimizationProblem pr = small_problem();
  OptimizerOptions options;
  options.restarts = 2;
  options.max_iterations = 60;
  options.seed = 3;
  const OptimizationResult r = optimize_fock_pulse(pr, options);
  CHECK(std::abs(r.infidelity - verify(pr, r.best_pulse, options.verify)) < 1e-10);
  CHECK(r.per_restart.size() == 2u);
  CHECK(r.per_restart[std::size_t(r.restart_index)].objective <= r.per_restart[std::size_t(1 - r.restart_index)].objective);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i)
    CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
  CHECK(r.objective_history.back() <= r.objective_history.front());

  const OptimizationResult again = optimize_fock_pulse(pr, options);
  CHECK(again.infidelity == r.infidelity);
  CHECK((parameters_from_pulse(pr, again.best_pulse) - parameters_from_pulse(pr, r.best_pulse)).norm() == 0.0);

  // Resuming with a finished restart reuses it and reaches the same answer.
  int calls = 0;
  OptimizerOptions resumed = options;
  resumed.on_restart = [&](const RestartRecord&) { ++calls; };
  const OptimizationResult third = optimize_fock_pulse(pr, resumed, {r.per_restart[0]});
  CHECK(calls == 1);
  CHECK(third.infidelity == r.infidelity);
}

TEST_CASE("warm start is used when it beats the seed") {
  OptimizationProblem pr = small_problem();
  OptimizerOptions options;
  options.restarts = 1;
  options.max_iterations = 80;
  const OptimizationResult m1 = optimize_fock_pulse(pr, options);
  pr.M = 2;
  options.max_iterations = 0;
  options.warm_start = m1.best_pulse;
  const OptimizationResult m2 = optimize_fock_pulse(pr, options);
  CHECK(m2.best_pulse.order() == 2);
  CHECK(m2.infidelity == doctest::Approx(m1.infidelity).epsilon(1e-9));
}
