#ifndef JCLAD_NELDER_MEAD_HPP
#define JCLAD_NELDER_MEAD_HPP

#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace jclad {

struct SimplexOptions {
  int max_iterations = 5000;
  double tol_x = 1e-6;   ///< max distance of any vertex from the best one
  double tol_f = 1e-12;  ///< max objective spread over the simplex
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Thrown when the objective returns NaN or infinity at a probe point.
class NonFiniteObjective : public std::runtime_error {
 public:
  NonFiniteObjective(const std::string& what, Eigen::VectorXd where)
      : std::runtime_error(what), point(std::move(where)) {}
  Eigen::VectorXd point;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Downhill simplex (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
/// The initial simplex is x0 plus steps(i) along each axis. `on_iteration`,
/// if set, receives the best objective after every iteration.
SimplexResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                          const SimplexOptions& options = {},
                          const std::function<void(double)>& on_iteration = {});

/// Initial steps of 5% of each coordinate, or 0.00025 for zero coordinates.
SimplexResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0, const SimplexOptions& options = {});

}  // namespace jclad

#endif  // JCLAD_NELDER_MEAD_HPP
