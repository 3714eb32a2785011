#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "jclad/cli.hpp"
#include "jclad/serialization.hpp"

using namespace jclad;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "jclad");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "jclad_cli_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kSmallOptimize =
    R"({"system": {"n_max": 3}, "optimize": {"N": 1, "T_ns": 20, "M": 1,
        "optimizer": {"restarts": 2, "max_iterations": 15, "seed": 5}}})";

}  // namespace

TEST_CASE("spectrum") {
  const Run r = run({"spectrum"});
  REQUIRE(r.code == 0);
  const Json doc = Json::parse(r.out);
  CHECK(doc.at("records").size() == 7u);
  CHECK(doc.at("records")[1].at("n") == 1);
  CHECK(std::abs(doc.at("records")[1].at("w_down").get<double>() - 5565.4) < 0.05);

  const fs::path cfg = write("nmax1.json", R"({"system": {"n_max": 1}})");
  const Run one = run({"spectrum", "--config", cfg.string()});
  REQUIRE(one.code == 0);
  CHECK(Json::parse(one.out).at("records").size() == 1u);
}

TEST_CASE("configuration and I/O errors") {
  const fs::path bad = write("bad.json", "{ \"system\": ");
  const fs::path out = scratch("never.json");
  CHECK(run({"spectrum", "--config", bad.string(), "--out", out.string()}).code == kExitConfig);
  CHECK_FALSE(fs::exists(out));
  const fs::path wrong = write("wrong.json", R"({"system": {"g_mhz": "big"}})");
  CHECK(run({"spectrum", "--config", wrong.string()}).code == kExitConfig);
  const fs::path invalid = write("invalid.json", R"({"system": {"g_mhz": -3}})");
  CHECK(run({"spectrum", "--config", invalid.string()}).code == kExitConfig);
  CHECK(run({"spectrum", "--config", scratch("absent.json").string()}).code == kExitIo);
  CHECK(run({"replay", scratch("absent.json").string()}).code == kExitIo);
  CHECK(run({"replay"}).code == kExitConfig);
  CHECK(run({"spectrum", "--bogus"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"spectrum", "--out", (scratch("missing_dir") / "x.json").string()}).code == kExitIo);
  CHECK(run({"optimize", "--N", "0"}).code == kExitConfig);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("optimize with no iterations reports the seed") {
  const fs::path cfg = write("noop.json", R"({"optimize": {"optimizer": {"restarts": 1, "max_iterations": 0}}})");
  const fs::path out = scratch("noop_out.json");
  const Run r = run({"optimize", "--config", cfg.string(), "--N", "4", "--T", "50", "--M", "1", "--out", out.string()});
  REQUIRE(r.code == 0);
  const Json doc = read_json_file(out);
  OptimizationProblem pr;
  const Pulse seed = pulse_from_parameters(pr, seed_from_analytic(pr));
  CHECK(doc.at("best_pulse") == to_json(seed));
  const StateVector psi = Propagator(pr.params).evolve(std::span<const Pulse>(&seed, 1),
                                                        basis_state(7, DressedLabel::ground()), 50.0, {2e-4, 0.0, 2});
  CHECK(doc.at("infidelity").get<double>() ==
        doctest::Approx(1.0 - fidelity(psi, basis_state(7, DressedLabel::minus(4)))).epsilon(1e-12));
}

TEST_CASE("optimize is deterministic and resumable") {
  const fs::path cfg = write("small.json", kSmallOptimize);
  const fs::path first = scratch("first.json"), second = scratch("second.json");
  REQUIRE(run({"optimize", "-c", cfg.string(), "--out", first.string()}).code == 0);
  REQUIRE(run({"optimize", "-c", cfg.string(), "--out", second.string()}).code == 0);
  CHECK(slurp(first) == slurp(second));
  CHECK(run({"optimize", "-c", cfg.string(), "--seed", "6", "--out", second.string()}).code == 0);
  CHECK(slurp(first) != slurp(second));

  // A checkpoint holding only the first restart resumes to the same result.
  Json partial = read_json_file(first);
  partial["per_restart"] = Json::array({partial["per_restart"][0]});
  const fs::path resumed = scratch("resumed.json");
  write_json_file(resumed, partial);
  REQUIRE(run({"optimize", "-c", cfg.string(), "--resume", "--out", resumed.string()}).code == 0);
  CHECK(slurp(resumed) == slurp(first));

  CHECK(run({"optimize", "-c", cfg.string(), "--resume", "--T", "25", "--out", resumed.string()}).code == kExitConfig);
  CHECK(run({"optimize", "-c", cfg.string(), "--resume"}).code == kExitConfig);
}

TEST_CASE("replay") {
  const Run table = run({"replay", std::string(JCLAD_DATA_DIR) + "/tableI.json", "--T", "50"});
  REQUIRE(table.code == 0);
  const Json doc = Json::parse(table.out);
  REQUIRE(doc.at("rows").size() == 1u);
  const double infidelity = doc.at("rows")[0].at("infidelity").get<double>();
  CHECK(infidelity >= 0.0017);
  CHECK(infidelity <= 0.015);
  CHECK(run({"replay", std::string(JCLAD_DATA_DIR) + "/tableI.json", "--T", "51"}).code == kExitConfig);

  const fs::path zero = write("zero.json", R"({"channel": "qubit_transverse", "duration_ns": 20,
      "tones": [{"carrier_mhz": 6180, "a_mhz": [0], "b_mhz": [0]}]})");
  const Run z = run({"replay", zero.string()});
  REQUIRE(z.code == 0);
  CHECK(Json::parse(z.out).at("rows")[0].at("infidelity").get<double>() == 1.0);

  const SystemParams p;
  const fs::path analytic = write("analytic.json", to_json(cook_shore_pulse(p, 4, 1.0)).dump());
  const fs::path csv = scratch("analytic.csv");
  const Run a = run({"replay", analytic.string(), "--csv", csv.string()});
  REQUIRE(a.code == 0);
  CHECK(Json::parse(a.out).at("rows")[0].at("infidelity").get<double>() < 0.01);
  const std::string text = slurp(csv);
  CHECK(text.rfind("t_ns,p_0,p_1+,p_2-,p_3+,p_4-,", 0) == 0);
}

TEST_CASE("strict mode fails on an unconverged truncation") {
  const SystemParams p{6000.0, 0.0, 180.0, 3};
  const fs::path strong = write("strong.json", to_json(cook_shore_pulse(p, 2, 400.0)).dump());
  const fs::path cfg = write("strong_cfg.json", R"({"system": {"n_max": 3}, "replay": {"N": 2}})");
  CHECK(run({"replay", strong.string(), "-c", cfg.string()}).code == 0);
  CHECK(run({"replay", strong.string(), "-c", cfg.string(), "--strict"}).code == kExitStrict);
}

TEST_CASE("protocol commands") {
  const fs::path cfg = write("proto.json", R"({"system": {"n_max": 3}, "noon": {"N": 2, "omega0_mhz": 10}})");
  const fs::path plan_out = scratch("noon.json");
  REQUIRE(run({"noon", "-c", cfg.string(), "--out", plan_out.string()}).code == 0);
  const Json noon = read_json_file(plan_out);
  CHECK(noon.at("plan").at("stages").size() == 1u);
  const Run sim = run({"simulate", plan_out.string(), "-c", cfg.string()});
  REQUIRE(sim.code == 0);
  CHECK(Json::parse(sim.out).at("fidelity").get<double>() == doctest::Approx(noon.at("fidelity").get<double>()));

  const fs::path fock = write("fock.json", R"({"system": {"n_max": 3}, "fock": {"N": 1, "omega0_mhz": 5}})");
  const Run f = run({"fock-prep", "-c", fock.string()});
  REQUIRE(f.code == 0);
  CHECK(Json::parse(f.out).at("fidelity").get<double>() > 0.99);

  const fs::path qcfg = write("qudit.json", R"({"system": {"n_max": 3}, "qudit": {"d": 3, "j": 0, "k": 2}})");
  const Run q = run({"qudit", "-c", qcfg.string()});
  REQUIRE(q.code == 0);
  CHECK(Json::parse(q.out).at("plan").at("stages").size() == 3u);
  const fs::path badq = write("badq.json", R"({"qudit": {"d": 3, "j": 0, "k": 5}})");
  CHECK(run({"qudit", "-c", badq.string()}).code == kExitConfig);
}
