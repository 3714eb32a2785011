#include "jclad/jc_core.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace jclad {

void SystemParams::validate() const {
  require(omega_r > 0.0, "resonator frequency must be positive");
  require(g > 0.0, "coupling strength must be positive");
  require(n_max >= 1, "photon truncation must be at least 1");
  require(std::isfinite(delta), "detuning must be finite");
}

DressedLabel DressedLabel::minus(int n) {
  require(n >= 1, "dressed doublet index must be >= 1");
  return DressedLabel(Kind::Minus, n);
}

DressedLabel DressedLabel::plus(int n) {
  require(n >= 1, "dressed doublet index must be >= 1");
  return DressedLabel(Kind::Plus, n);
}

DressedLabel DressedLabel::from_index(int index) {
  require(index >= 0, "dressed index must be non-negative");
  if (index == 0) return ground();
  const int n = (index + 1) / 2;
  return index % 2 == 1 ? minus(n) : plus(n);
}

std::string DressedLabel::to_string() const {
  switch (kind_) {
    case Kind::Ground:
      return "0";
    case Kind::Minus:
      return std::to_string(n_) + "-";
    case Kind::Plus:
      return std::to_string(n_) + "+";
  }
  return "?";
}

namespace {

int parse_level(std::string_view digits, std::string_view whole) {
  int n = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
    throw InvalidArgument("cannot parse dressed label '" + std::string(whole) + "'");
  return n;
}

}  // namespace

DressedLabel DressedLabel::parse(std::string_view text) {
  if (text == "0" || text == "ground" || text == "g") return ground();
  if (text.starts_with("minus:")) return minus(parse_level(text.substr(6), text));
  if (text.starts_with("plus:")) return plus(parse_level(text.substr(5), text));
  if (text.size() >= 2) {
    const char sign = text.back();
    const auto digits = text.substr(0, text.size() - 1);
    if (sign == '-') return minus(parse_level(digits, text));
    if (sign == '+') return plus(parse_level(digits, text));
  }
  throw InvalidArgument("cannot parse dressed label '" + std::string(text) + "'");
}

std::vector<DressedLabel> dressed_labels(int n_max) {
  std::vector<DressedLabel> labels;
  labels.reserve(dressed_dimension(n_max));
  for (int i = 0; i < dressed_dimension(n_max); ++i) labels.push_back(DressedLabel::from_index(i));
  return labels;
}

std::string to_string(DriveOperatorKind kind) {
  switch (kind) {
    case DriveOperatorKind::QubitTransverse:
      return "qubit_transverse";
    case DriveOperatorKind::QubitLongitudinal:
      return "qubit_longitudinal";
    case DriveOperatorKind::ResonatorPosition:
      return "resonator_position";
  }
  return "?";
}

DriveOperatorKind parse_drive_kind(std::string_view text) {
  if (text == "qubit_transverse" || text == "sigma_x") return DriveOperatorKind::QubitTransverse;
  if (text == "qubit_longitudinal" || text == "sigma_z") return DriveOperatorKind::QubitLongitudinal;
  if (text == "resonator_position" || text == "x") return DriveOperatorKind::ResonatorPosition;
  throw InvalidArgument("unknown drive channel '" + std::string(text) + "'");
}

Eigen::MatrixXd build_static_hamiltonian(const SystemParams& params) {
  params.validate();
  return static_hamiltonian<double>(params);
}

double dressed_energy(const SystemParams& params, DressedLabel label) {
  if (label.kind() == DressedLabel::Kind::Ground) return 0.0;
  const double n = label.n();
  const double root = std::sqrt(params.delta * params.delta + 4.0 * n * params.g * params.g);
  const double sign = label.kind() == DressedLabel::Kind::Plus ? 1.0 : -1.0;
  return n * params.omega_r + 0.5 * (params.delta + sign * root);
}

std::vector<DressedState> dressed_eigensystem(const SystemParams& params) {
  params.validate();
  const int n_max = params.n_max;
  const Eigen::MatrixXd h = static_hamiltonian<double>(params);
  const int dim = static_cast<int>(h.rows());

  std::vector<DressedState> states;
  states.reserve(dressed_dimension(n_max));

  Eigen::VectorXd ground = Eigen::VectorXd::Zero(dim);
  ground(product_index(0, 0, n_max)) = 1.0;
  states.push_back({DressedLabel::ground(), h(0, 0), ground});

  for (int n = 1; n <= n_max; ++n) {
    const int i0 = product_index(0, n, n_max);
    const int i1 = product_index(1, n - 1, n_max);
    Eigen::Matrix2d block;
    block << h(i0, i0), h(i0, i1), h(i1, i0), h(i1, i1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(block);
    if (solver.info() != Eigen::Success) throw NumericalError("2x2 eigensolver failed");

    for (int branch = 0; branch < 2; ++branch) {
      const DressedLabel label = branch == 0 ? DressedLabel::minus(n) : DressedLabel::plus(n);
      const double energy = solver.eigenvalues()(branch);
      const double expected = dressed_energy(params, label);
      const double scale = std::max({1.0, std::abs(expected), params.g});
      if (std::abs(energy - expected) > 1e-8 * scale)
        throw NumericalError("dressed eigenvalue " + label.to_string() + " does not match its closed form");

      Eigen::Vector2d v = solver.eigenvectors().col(branch);
      if (v(0) < 0.0) v = -v;
      Eigen::VectorXd amplitudes = Eigen::VectorXd::Zero(dim);
      amplitudes(i0) = v(0);
      amplitudes(i1) = v(1);
      states.push_back({label, energy, std::move(amplitudes)});
    }
  }
  return states;
}

Eigen::MatrixXd dressed_vectors(const std::vector<DressedState>& states) {
  require(!states.empty(), "empty dressed state list");
  Eigen::MatrixXd v(states.front().amplitudes.size(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = states[j].amplitudes;
  return v;
}

TransitionSet transition_frequencies(const SystemParams& params, int n) {
  params.validate();
  require(n >= 0, "ladder index must be non-negative");
  require(n + 1 <= params.n_max, "transition leaves the truncated ladder");
  const double d2 = params.delta * params.delta;
  const double g2 = params.g * params.g;
  const double upper = std::sqrt(d2 + 4.0 * (n + 1) * g2);
  const double lower = std::sqrt(d2 + 4.0 * n * g2);
  const double wr = params.omega_r;
  return {n, wr + 0.5 * (upper - lower), wr - 0.5 * (upper - lower), wr + 0.5 * (upper + lower),
          wr - 0.5 * (upper + lower)};
}

Eigen::MatrixXd drive_operator(const SystemParams& params, DriveOperatorKind kind) {
  require(params.n_max >= 0, "truncation must be non-negative");
  const int n_max = params.n_max;
  const int dim = 2 * (n_max + 1);
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(dim, dim);
  switch (kind) {
    case DriveOperatorKind::QubitTransverse:
      for (int n = 0; n <= n_max; ++n) {
        op(product_index(0, n, n_max), product_index(1, n, n_max)) = 1.0;
        op(product_index(1, n, n_max), product_index(0, n, n_max)) = 1.0;
      }
      break;
    case DriveOperatorKind::QubitLongitudinal:
      for (int n = 0; n <= n_max; ++n) op(product_index(1, n, n_max), product_index(1, n, n_max)) = 1.0;
      break;
    case DriveOperatorKind::ResonatorPosition:
      for (int q = 0; q < 2; ++q) {
        for (int n = 1; n <= n_max; ++n) {
          const double amp = std::sqrt(static_cast<double>(n));
          op(product_index(q, n - 1, n_max), product_index(q, n, n_max)) = amp;
          op(product_index(q, n, n_max), product_index(q, n - 1, n_max)) = amp;
        }
      }
      break;
  }
  return op;
}

Eigen::MatrixXd drive_matrix_elements(const SystemParams& params, DriveOperatorKind kind) {
  const Eigen::MatrixXd v = dressed_vectors(dressed_eigensystem(params));
  Eigen::MatrixXd m = v.transpose() * drive_operator(params, kind) * v;
  // Symmetrize away round-off so downstream consumers see an exactly
  // Hermitian matrix.
  return 0.5 * (m + m.transpose());
}

DispersiveEstimate dispersive_approximations(const SystemParams& params, int n) {
  params.validate();
  require(params.delta != 0.0, "dispersive expansion is singular at zero detuning");
  require(n >= 0, "ladder index must be non-negative");
  const double g2 = params.g * params.g;
  const double d = params.delta;
  const double kerr = g2 / d - (2.0 * n + 1.0) * g2 * g2 / (d * d * d);
  return {params.omega_q() + (2.0 * n + 1.0) * g2 / d, params.omega_r + kerr, params.omega_r - kerr};
}

double min_frequency_separation(std::span<const double> tones) {
  require(tones.size() >= 2, "frequency separation needs at least two tones");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tones.size(); ++i)
    for (std::size_t j = i + 1; j < tones.size(); ++j) best = std::min(best, std::abs(tones[i] - tones[j]));
  return best;
}

}  // namespace jclad
