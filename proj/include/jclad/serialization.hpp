#ifndef JCLAD_SERIALIZATION_HPP
#define JCLAD_SERIALIZATION_HPP

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "jclad/dynamics.hpp"
#include "jclad/optimizer.hpp"
#include "jclad/protocols.hpp"
#include "jclad/pulses.hpp"

namespace jclad {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(const SystemParams& params);
/// Missing fields keep their defaults.
SystemParams system_from_json(const Json& j);

Json to_json(const Pulse& pulse);
Pulse pulse_from_json(const Json& j);

Json to_json(const OptimizationProblem& problem);
/// Fields missing from `j` are taken from `base`.
OptimizationProblem problem_from_json(const Json& j, const OptimizationProblem& base = {});

Json to_json(const OptimizerOptions& options);
OptimizerOptions options_from_json(const Json& j, const OptimizerOptions& base = {});

Json to_json(const RestartRecord& record);
RestartRecord restart_from_json(const Json& j);

/// {problem, options, best_pulse, infidelity, iterations, per_restart, ...}
Json result_to_json(const OptimizationProblem& problem, const OptimizerOptions& options,
                    const OptimizationResult& result);
/// Reads back best_pulse, infidelity and the restart records.
OptimizationResult result_from_json(const Json& j);

Json to_json(const ProtocolPlan& plan);
ProtocolPlan plan_from_json(const Json& j);

/// {labels: [...], amplitudes: [[re, im], ...]} in dressed-basis order.
Json amplitudes_to_json(const StateVector& psi);
StateVector amplitudes_from_json(const Json& j);

/// Header t_ns,p_<label>,...: the labels of `first` in order, then every
/// other dressed state in basis order. LF line endings.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory, int n_max, const LadderBasis& first = {});

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace jclad

#endif  // JCLAD_SERIALIZATION_HPP
