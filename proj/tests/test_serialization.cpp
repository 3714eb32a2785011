#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "jclad/serialization.hpp"

using namespace jclad;

namespace {

Pulse random_pulse(std::mt19937& rng, int order) {
  std::uniform_real_distribution<double> coeff(-50.0, 50.0), carrier(4000.0, 8000.0);
  Pulse p;
  p.channel = order % 2 ? DriveOperatorKind::ResonatorPosition : DriveOperatorKind::QubitTransverse;
  p.duration = 12.5 + order;
  for (int n = 0; n < 3; ++n) {
    Tone t;
    t.carrier = carrier(rng);
    t.a = Eigen::VectorXd::NullaryExpr(order, [&] { return coeff(rng); });
    t.b = Eigen::VectorXd::NullaryExpr(order, [&] { return coeff(rng); });
    p.tones.push_back(t);
  }
  if (order == 0) p.constant_amps = Eigen::VectorXd::NullaryExpr(3, [&] { return coeff(rng); });
  return p;
}

bool same_pulse(const Pulse& x, const Pulse& y) {
  if (x.channel != y.channel || x.duration != y.duration || x.tones.size() != y.tones.size()) return false;
  for (std::size_t i = 0; i < x.tones.size(); ++i)
    if (x.tones[i].carrier != y.tones[i].carrier || x.tones[i].a != y.tones[i].a || x.tones[i].b != y.tones[i].b)
      return false;
  if (x.constant_amps.has_value() != y.constant_amps.has_value()) return false;
  return !x.constant_amps || *x.constant_amps == *y.constant_amps;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "jclad_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("pulse documents round trip exactly") {
  std::mt19937 rng(21);
  for (int order = 0; order <= 4; ++order) {
    const Pulse p = random_pulse(rng, order);
    const Json j = to_json(p);
    CHECK(j.at("channel").is_string());
    CHECK(same_pulse(pulse_from_json(j), p));
    CHECK(same_pulse(pulse_from_json(Json::parse(j.dump())), p));
  }
}

TEST_CASE("malformed pulse documents are rejected") {
  CHECK_THROWS_AS(pulse_from_json(Json::parse("[]")), ParseError);
  CHECK_THROWS_AS(pulse_from_json(Json::parse(R"({"duration_ns": 10})")), ParseError);
  CHECK_THROWS_AS(pulse_from_json(Json::parse(R"({"duration_ns": "x", "tones": []})")), ParseError);
  CHECK_THROWS_AS(pulse_from_json(Json::parse(
                      R"({"channel":"bogus","duration_ns":10,"tones":[{"carrier_mhz":6000,"a_mhz":[1],"b_mhz":[0]}]})")),
                  ParseError);
  CHECK_THROWS_AS(
      pulse_from_json(Json::parse(R"({"duration_ns":10,"tones":[{"carrier_mhz":6000,"a_mhz":[1,2],"b_mhz":[0]}]})")),
      std::exception);
}

TEST_CASE("system documents") {
  const SystemParams p{6100.0, -250.0, 95.0, 5};
  CHECK(system_from_json(to_json(p)) == p);
  CHECK(system_from_json(Json::object()) == SystemParams{});
  CHECK_THROWS_AS(system_from_json(Json::parse(R"({"g_mhz": "strong"})")), ParseError);
}

TEST_CASE("result documents") {
  OptimizationProblem pr;
  pr.M = 2;
  pr.T = 30.0;
  OptimizerOptions options;
  options.seed = 99;
  options.restarts = 3;
  OptimizationResult r;
  r.best_pulse = pulse_from_parameters(pr, seed_from_analytic(pr));
  r.infidelity = 0.0123456789012345;
  r.iterations = 77;
  r.restart_index = 1;
  r.objective_history = {0.5, 0.2, 0.0123};
  RestartRecord rec;
  rec.restart_index = 1;
  rec.parameters = seed_from_analytic(pr);
  rec.objective = 0.0123;
  rec.completed = true;
  rec.diagnostic = "none";
  r.per_restart = {rec};
  const Json j = result_to_json(pr, options, r);
  const OptimizationResult back = result_from_json(Json::parse(j.dump()));
  CHECK(back.infidelity == r.infidelity);
  CHECK(back.restart_index == 1);
  CHECK(same_pulse(back.best_pulse, r.best_pulse));
  REQUIRE(back.per_restart.size() == 1u);
  CHECK(back.per_restart[0].parameters == rec.parameters);
  CHECK(back.per_restart[0].diagnostic == "none");
  CHECK(problem_from_json(j.at("problem")).T == 30.0);
  CHECK(problem_from_json(j.at("problem")).M == 2);
  CHECK(options_from_json(j.at("options")).seed == 99u);
  CHECK(options_from_json(j.at("options")).restarts == 3);
  CHECK(result_to_json(pr, options, back).at("per_restart") == j.at("per_restart"));
  CHECK(result_to_json(pr, options, back).at("best_pulse") == j.at("best_pulse"));
}

TEST_CASE("plan documents") {
  const SystemParams p{6000.0, 0.0, 180.0, 6};
  SystemParams q = p;
  q.omega_r = 6050.0;
  const ProtocolPlan noon = noon_plan(p, q, 3, 2.0);
  const ProtocolPlan back = plan_from_json(Json::parse(to_json(noon).dump()));
  CHECK(back.two_mode);
  REQUIRE(back.stages.size() == 2u);
  CHECK(back.stages[1].pulse_b.has_value());
  CHECK(same_pulse(*back.stages[1].pulse_b, *noon.stages[1].pulse_b));
  CHECK(back.target.size() == 2u);
  CHECK(back.target[1].b == DressedLabel::minus(3));
  CHECK(back.duration() == doctest::Approx(noon.duration()));
  CHECK(to_json(back).dump() == to_json(noon).dump());

  const CouplingGraph g = build_coupling_graph(p, 5);
  const ProtocolPlan qudit = qudit_plan(g, 0, 4, 1.0);
  const ProtocolPlan qback = plan_from_json(to_json(qudit));
  REQUIRE(qback.stages.size() == 3u);
  CHECK(qback.stages[1].edge == qudit.stages[1].edge);
  CHECK(*qback.stages[1].angle == *qudit.stages[1].angle);
  CHECK(qback.target[1].amplitude == qudit.target[1].amplitude);
}

TEST_CASE("amplitude documents") {
  StateVector psi(3);
  psi << std::complex<double>(0.6, 0.0), std::complex<double>(0.0, -0.8), 0.0;
  const Json j = amplitudes_to_json(psi);
  CHECK(j.at("labels")[1] == "1-");
  CHECK(amplitudes_from_json(j) == psi);
}

TEST_CASE("trajectory CSV") {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.populations.resize(2, 5);
  traj.populations << 1, 0, 0, 0, 0, 0.25, 0.5, 0, 0, 0.25;
  std::ostringstream out;
  write_trajectory_csv(out, traj, 2, ladder_basis(2));
  const std::string text = out.str();
  CHECK(text.rfind("t_ns,p_0,p_1+,p_2-,p_1-,p_2+\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.find("0.5,0.25,0,0,0.5,0.25\n") != std::string::npos);
  std::ostringstream plain;
  write_trajectory_csv(plain, traj, 2);
  CHECK(plain.str().rfind("t_ns,p_0,p_1-,p_1+,p_2-,p_2+\n", 0) == 0);
}

TEST_CASE("shortest round-trip decimals") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(6180.0) == "6180");
}

TEST_CASE("files") {
  CHECK_THROWS_AS(read_json_file(scratch("missing.json")), IoError);
  {
    std::ofstream bad(scratch("bad.json"));
    bad << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(scratch("bad.json")), ParseError);
  Json doc = Json::object();
  doc["x"] = 1.5;
  write_json_file(scratch("good.json"), doc);
  CHECK(read_json_file(scratch("good.json")) == doc);
  CHECK_THROWS_AS(write_json_file(scratch("no_such_dir") / "x.json", doc), IoError);
}
