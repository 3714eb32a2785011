#ifndef JCLAD_UNITS_HPP
#define JCLAD_UNITS_HPP

#include <numbers>
#include <stdexcept>
#include <string>

namespace jclad {

// Frequencies are ordinary frequencies in MHz, times are in ns.
// Phase accumulated by 1 MHz over 1 ns, in radians.
inline constexpr double kRadPerMHzNs = 2.0 * std::numbers::pi * 1e-3;

/// Raised for inputs that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails an internal consistency check.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace jclad

#endif  // JCLAD_UNITS_HPP
