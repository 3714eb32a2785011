#ifndef JCLAD_JC_CORE_HPP
#define JCLAD_JC_CORE_HPP

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "jclad/units.hpp"

namespace jclad {

/// Qubit coupled to a single resonator mode. All frequencies in MHz
/// (ordinary, not angular).
struct SystemParams {
  double omega_r = 6000.0;  ///< resonator frequency
  double delta = 0.0;       ///< qubit minus resonator frequency
  double g = 180.0;         ///< coupling strength
  int n_max = 7;            ///< highest excitation number kept

  double omega_q() const { return omega_r + delta; }
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// Identifies a dressed eigenstate: the ground state |0,0> or |n,-> / |n,+>.
class DressedLabel {
 public:
  enum class Kind { Ground, Minus, Plus };

  static DressedLabel ground() { return DressedLabel(Kind::Ground, 0); }
  static DressedLabel minus(int n);
  static DressedLabel plus(int n);

  Kind kind() const { return kind_; }
  int n() const { return n_; }

  /// Position in the dressed basis: ground, then (1-,1+), (2-,2+), ...
  int index() const { return kind_ == Kind::Ground ? 0 : 2 * n_ - (kind_ == Kind::Minus ? 1 : 0); }
  static DressedLabel from_index(int index);

  /// "0", "3-", "2+".
  std::string to_string() const;
  /// Accepts the to_string() forms plus "ground", "minus:3", "plus:2".
  static DressedLabel parse(std::string_view text);

  bool operator==(const DressedLabel&) const = default;

 private:
  DressedLabel(Kind kind, int n) : kind_(kind), n_(n) {}
  Kind kind_;
  int n_;
};

/// Number of dressed states for a truncation, 2 n_max + 1.
inline int dressed_dimension(int n_max) { return 2 * n_max + 1; }

/// All labels in dressed-basis order.
std::vector<DressedLabel> dressed_labels(int n_max);

struct DressedState {
  DressedLabel label;
  double energy;                  ///< MHz, ground at 0
  Eigen::VectorXd amplitudes;     ///< over the product basis |q,n>
};

struct TransitionSet {
  int n;
  double w_plus;   ///< |n,+> -> |n+1,+>
  double w_minus;  ///< |n,-> -> |n+1,->
  double w_up;     ///< |n,-> -> |n+1,+>
  double w_down;   ///< |n,+> -> |n+1,->
};

enum class DriveOperatorKind { QubitTransverse, QubitLongitudinal, ResonatorPosition };

std::string to_string(DriveOperatorKind kind);
DriveOperatorKind parse_drive_kind(std::string_view text);

/// Product-basis index of |q,n>, q in {0,1}, qubit-major.
inline int product_index(int q, int n, int n_max) { return q * (n_max + 1) + n; }

/// Static Jaynes-Cummings Hamiltonian H0/h over |q,n>, q in {0,1},
/// n = 0..n_max. Accepts n_max = 0 (bare qubit plus vacuum).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> static_hamiltonian(const SystemParams& params) {
  require(params.n_max >= 0, "truncation must be non-negative");
  require(params.g > 0.0 && params.omega_r > 0.0, "coupling and resonator frequency must be positive");
  const int n_max = params.n_max;
  const int dim = 2 * (n_max + 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
  const Scalar wr(params.omega_r);
  const Scalar wq(params.omega_q());
  const Scalar g(params.g);
  for (int n = 0; n <= n_max; ++n) {
    h(product_index(0, n, n_max), product_index(0, n, n_max)) = Scalar(n) * wr;
    h(product_index(1, n, n_max), product_index(1, n, n_max)) = wq + Scalar(n) * wr;
  }
  // g (a s+ + a^dag s-) couples |1,n-1> and |0,n>.
  for (int n = 1; n <= n_max; ++n) {
    const int i0 = product_index(0, n, n_max);
    const int i1 = product_index(1, n - 1, n_max);
    h(i1, i0) = g * std::sqrt(Scalar(n));
    h(i0, i1) = h(i1, i0);
  }
  return h;
}

/// Validated entry point; rejects n_max < 1.
Eigen::MatrixXd build_static_hamiltonian(const SystemParams& params);

/// Closed-form dressed energy (MHz) with the ground state at 0.
double dressed_energy(const SystemParams& params, DressedLabel label);

/// Numerically diagonalizes H0 excitation block by excitation block and
/// labels each eigenpair against the closed-form energies. Eigenvectors are
/// real with <0,n|n,+-> >= 0.
std::vector<DressedState> dressed_eigensystem(const SystemParams& params);

/// Columns are the dressed eigenvectors in dressed-basis order.
Eigen::MatrixXd dressed_vectors(const std::vector<DressedState>& states);

TransitionSet transition_frequencies(const SystemParams& params, int n);

/// Drive operator in the product basis.
Eigen::MatrixXd drive_operator(const SystemParams& params, DriveOperatorKind kind);

/// <j|O|k> between dressed states, computed from the numerical eigenvectors.
Eigen::MatrixXd drive_matrix_elements(const SystemParams& params, DriveOperatorKind kind);

struct DispersiveEstimate {
  double w_up;
  double w_plus;
  double w_minus;
};

/// Leading-order dispersive (|delta| >> g) forms of the Stark-shifted qubit
/// line and Kerr-shifted resonator lines.
DispersiveEstimate dispersive_approximations(const SystemParams& params, int n);

double min_frequency_separation(std::span<const double> tones);

}  // namespace jclad

#endif  // JCLAD_JC_CORE_HPP
