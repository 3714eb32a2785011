#ifndef JCLAD_TESTS_REFERENCE_HPP
#define JCLAD_TESTS_REFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "jclad/protocols.hpp"

namespace jclad::reference {

// Spin-j Jx in the |j,m> basis ordered m = -j..j, from the ladder elements.
inline Eigen::MatrixXd spin_jx(int N) {
  const double j = N / 2.0;
  Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int i = 0; i < N; ++i) {
    const double m = -j + i;
    const double element = 0.5 * std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    jx(i, i + 1) = element;
    jx(i + 1, i) = element;
  }
  return jx;
}

// Interaction-picture RK4 on the joint space of both modes, with the joint
// amplitudes held as a matrix C(a, b) and each mode driven by its own pulse;
// stages run on a local clock.
inline Eigen::MatrixXcd joint_propagation(const ProtocolPlan& plan, const SystemParams& pa, const SystemParams& pb,
                                          double dt) {
  using cd = std::complex<double>;
  const Propagator prop_a(pa), prop_b(pb);
  const int da = prop_a.dimension(), db = prop_b.dimension();
  Eigen::MatrixXd energy(da, db);
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b) energy(a, b) = prop_a.energies()(a) + prop_b.energies()(b);
  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(da, db);
  for (const StateTerm& t : plan.initial) psi(t.a.index(), t.b.index()) += t.amplitude;
  const double w = 2.0 * std::numbers::pi * 1e-3;
  for (const ProtocolStage& stage : plan.stages) {
    const Pulse& pulse_a = stage.pulse;
    const Pulse& pulse_b = stage.pulse_b ? *stage.pulse_b : stage.pulse;
    const Eigen::MatrixXcd va = prop_a.channel_matrix(pulse_a.channel).cast<cd>();
    const Eigen::MatrixXcd vb = prop_b.channel_matrix(pulse_b.channel).cast<cd>();
    Eigen::MatrixXcd c = psi;
    auto rhs = [&](double t, const Eigen::MatrixXcd& y) -> Eigen::MatrixXcd {
      Eigen::MatrixXcd phase(da, db);
      for (int a = 0; a < da; ++a)
        for (int b = 0; b < db; ++b) phase(a, b) = std::exp(cd(0.0, w * energy(a, b) * t));
      const Eigen::MatrixXcd lab = phase.conjugate().cwiseProduct(y);
      const Eigen::MatrixXcd hy =
          evaluate_drive(pulse_a, t) * (va * lab) + evaluate_drive(pulse_b, t) * (lab * vb.transpose());
      return cd(0.0, -w) * phase.cwiseProduct(hy);
    };
    const long long steps = std::llround(pulse_a.duration / dt);
    const double h = pulse_a.duration / steps;
    for (long long s = 0; s < steps; ++s) {
      const double t = s * h;
      const Eigen::MatrixXcd k1 = rhs(t, c);
      const Eigen::MatrixXcd k2 = rhs(t + h / 2, c + h / 2 * k1);
      const Eigen::MatrixXcd k3 = rhs(t + h / 2, c + h / 2 * k2);
      const Eigen::MatrixXcd k4 = rhs(std::min(t + h, pulse_a.duration), c + h * k3);
      c += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < db; ++b) psi(a, b) = std::exp(cd(0.0, -w * energy(a, b) * pulse_a.duration)) * c(a, b);
  }
  return psi;
}

}  // namespace jclad::reference

#endif  // JCLAD_TESTS_REFERENCE_HPP
