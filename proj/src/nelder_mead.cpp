#include "jclad/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "jclad/units.hpp"

namespace jclad {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

SimplexResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                          const SimplexOptions& options, const std::function<void(double)>& on_iteration) {
  const Eigen::Index n = x0.size();
  require(n >= 1, "simplex search needs at least one parameter");
  require(steps.size() == n, "one initial step per parameter");
  require(x0.allFinite(), "initial point must be finite");
  require(options.max_iterations >= 0, "iteration budget must be non-negative");

  SimplexResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = objective(x);
    ++result.evaluations;
    if (!std::isfinite(f)) throw NonFiniteObjective("objective is not finite at a probe point", x);
    return f;
  };

  std::vector<Eigen::VectorXd> vertex(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> value(static_cast<std::size_t>(n) + 1);
  value[0] = eval(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    vertex[i + 1](i) += steps(i) != 0.0 ? steps(i) : 0.00025;
    value[i + 1] = eval(vertex[i + 1]);
  }

  std::vector<std::size_t> order(vertex.size());
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable on ties so runs are reproducible.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    std::vector<Eigen::VectorXd> v2;
    std::vector<double> f2;
    v2.reserve(order.size());
    f2.reserve(order.size());
    for (std::size_t i : order) {
      v2.push_back(std::move(vertex[i]));
      f2.push_back(value[i]);
    }
    vertex = std::move(v2);
    value = std::move(f2);
  };

  auto converged = [&] {
    double spread_x = 0.0;
    for (std::size_t i = 1; i < vertex.size(); ++i)
      spread_x = std::max(spread_x, (vertex[i] - vertex[0]).cwiseAbs().maxCoeff());
    const double spread_f = value.back() - value.front();
    return spread_x <= options.tol_x && spread_f <= options.tol_f;
  };

  sort_vertices();
  const std::size_t worst = static_cast<std::size_t>(n);
  while (result.iterations < options.max_iterations) {
    if (converged()) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < worst; ++i) centroid += vertex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - vertex[worst]);
    const double f_reflected = eval(reflected);

    if (f_reflected < value[0]) {
      const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
    } else if (f_reflected < value[worst - 1]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
    } else {
      bool shrink = false;
      if (f_reflected < value[worst]) {
        const Eigen::VectorXd outside = centroid + kContract * (reflected - centroid);
        const double f_outside = eval(outside);
        if (f_outside <= f_reflected) {
          vertex[worst] = outside;
          value[worst] = f_outside;
        } else {
          shrink = true;
        }
      } else {
        const Eigen::VectorXd inside = centroid + kContract * (vertex[worst] - centroid);
        const double f_inside = eval(inside);
        if (f_inside < value[worst]) {
          vertex[worst] = inside;
          value[worst] = f_inside;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        for (std::size_t i = 1; i < vertex.size(); ++i) {
          vertex[i] = vertex[0] + kShrink * (vertex[i] - vertex[0]);
          value[i] = eval(vertex[i]);
        }
      }
    }
    sort_vertices();
    if (on_iteration) on_iteration(value[0]);
  }
  if (!result.converged) result.converged = converged();

  result.x = vertex[0];
  result.f = value[0];
  return result;
}

SimplexResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0, const SimplexOptions& options) {
  Eigen::VectorXd steps(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) steps(i) = x0(i) != 0.0 ? 0.05 * x0(i) : 0.00025;
  return nelder_mead(objective, x0, steps, options);
}

}  // namespace jclad
