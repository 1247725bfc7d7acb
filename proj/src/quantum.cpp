#include "dibc/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dibc::quantum {
namespace {

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Matrix4 lift(int box, const Matrix2& op) {
  return box == 0 ? kron(op, Matrix2::Identity()) : kron(Matrix2::Identity(), op);
}

void check_box(int box) {
  if (box != 0 && box != 1) throw std::domain_error("box index must be 0 or 1");
}

void check_bit(int bit) {
  if (bit != 0 && bit != 1) throw std::domain_error("outcome must be 0 or 1");
}

}  // namespace

TwoQubitState TwoQubitState::from_matrix(const Matrix4& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kIdentityTolerance)
    throw std::domain_error("density matrix is not Hermitian");
  if (std::abs(rho.trace() - std::complex<double>(1.0, 0.0)) > kIdentityTolerance)
    throw std::domain_error("density matrix trace is not 1");
  const Matrix4 hermitian = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(hermitian, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPositivityTolerance)
    throw std::domain_error("density matrix has a negative eigenvalue " +
                            std::to_string(solver.eigenvalues().minCoeff()));
  return TwoQubitState(rho);
}

double TwoQubitState::purity() const { return (rho_ * rho_).trace().real(); }

Matrix2 ZxObservable::matrix() const {
  Matrix2 m;
  m << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
  return m;
}

// (I ± sigma_theta) / 2 in closed form.
Matrix2 ZxObservable::projector(int bit) const {
  check_bit(bit);
  const double sign = bit == 0 ? 1.0 : -1.0;
  return (Matrix2::Identity() + sign * matrix()) / 2.0;
}

TwoQubitState epr_state() {
  Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  return TwoQubitState::from_matrix(phi * phi.adjoint());
}

TwoQubitState werner_state(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::domain_error("Werner visibility must lie in [0, 1]");
  const Matrix4 rho = visibility * epr_state().matrix() + (1.0 - visibility) * Matrix4::Identity() / 4.0;
  return TwoQubitState::from_matrix(rho);
}

JointDistribution joint_distribution(const TwoQubitState& state, ZxObservable obs0, ZxObservable obs1) {
  JointDistribution out;
  for (int r0 = 0; r0 < 2; ++r0)
    for (int r1 = 0; r1 < 2; ++r1) {
      const double p = (state.matrix() * kron(obs0.projector(r0), obs1.projector(r1))).trace().real();
      out.p[2 * r0 + r1] = std::max(0.0, p);
    }
  return out;
}

double correlator(const TwoQubitState& state, ZxObservable obs0, ZxObservable obs1) {
  const JointDistribution d = joint_distribution(state, obs0, obs1);
  return d(0, 0) + d(1, 1) - d(0, 1) - d(1, 0);
}

double chsh_value(const TwoQubitState& state, const std::array<ZxObservable, 2>& settings0,
                  const std::array<ZxObservable, 2>& settings1) {
  return correlator(state, settings0[0], settings1[0]) + correlator(state, settings0[0], settings1[1]) +
         correlator(state, settings0[1], settings1[0]) - correlator(state, settings0[1], settings1[1]);
}

std::array<double, 2> local_distribution(const TwoQubitState& state, int box, ZxObservable obs) {
  check_box(box);
  std::array<double, 2> out{};
  for (int r = 0; r < 2; ++r) out[r] = std::max(0.0, (state.matrix() * lift(box, obs.projector(r))).trace().real());
  return out;
}

TwoQubitState collapse(const TwoQubitState& state, int box, ZxObservable obs, int bit) {
  check_box(box);
  const Matrix4 projector = lift(box, obs.projector(bit));
  const Matrix4 unnormalized = projector * state.matrix() * projector;
  const double p = unnormalized.trace().real();
  if (p <= 0.0) throw std::domain_error("cannot condition on a zero-probability outcome");
  Matrix4 rho = unnormalized / p;
  rho = (rho + rho.adjoint()) / 2.0;
  return TwoQubitState::from_matrix(rho);
}

}  // namespace dibc::quantum
