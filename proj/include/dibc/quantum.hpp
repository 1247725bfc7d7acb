#pragma once

#include <Eigen/Dense>
#include <array>

namespace dibc::quantum {

using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

inline constexpr double kIdentityTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

/// Two-qubit density matrix in the basis |00>, |01>, |10>, |11>. The first
/// tensor factor belongs to box 0; |0> and |1> are the +1 and -1 eigenstates
/// of sigma_z. Construction validates hermiticity, unit trace and positivity.
class TwoQubitState {
 public:
  /// Throws std::domain_error if `rho` is not a density matrix (to tolerance).
  static TwoQubitState from_matrix(const Matrix4& rho);

  const Matrix4& matrix() const { return rho_; }
  double purity() const;

 private:
  explicit TwoQubitState(const Matrix4& rho) : rho_(rho) {}
  Matrix4 rho_;
};

/// sigma_theta = cos(theta) sigma_z + sin(theta) sigma_x. Outcome bit 0 is the
/// +1 eigenspace, bit 1 the -1 eigenspace.
struct ZxObservable {
  double theta = 0.0;

  Matrix2 matrix() const;
  Matrix2 projector(int bit) const;
};

struct OutcomePair {
  int r0 = 0;
  int r1 = 0;
};

/// P(r0, r1) for one pair of measurements.
struct JointDistribution {
  std::array<double, 4> p{};

  double operator()(int r0, int r1) const { return p[2 * r0 + r1]; }
  double operator()(OutcomePair o) const { return (*this)(o.r0, o.r1); }
  double marginal0(int r0) const { return p[2 * r0] + p[2 * r0 + 1]; }
  double marginal1(int r1) const { return p[r1] + p[2 + r1]; }
};

TwoQubitState epr_state();

/// v |phi+><phi+| + (1 - v) I/4. Throws std::domain_error unless 0 <= v <= 1.
TwoQubitState werner_state(double visibility);

JointDistribution joint_distribution(const TwoQubitState& state, ZxObservable obs0, ZxObservable obs1);

double correlator(const TwoQubitState& state, ZxObservable obs0, ZxObservable obs1);

/// E(A0,B0) + E(A0,B1) + E(A1,B0) - E(A1,B1).
double chsh_value(const TwoQubitState& state, const std::array<ZxObservable, 2>& settings0,
                  const std::array<ZxObservable, 2>& settings1);

/// Outcome distribution of a single box measured on its own.
std::array<double, 2> local_distribution(const TwoQubitState& state, int box, ZxObservable obs);

/// Post-measurement state after `box` measured `obs` with result `bit`.
/// Throws std::domain_error if that result has probability zero.
TwoQubitState collapse(const TwoQubitState& state, int box, ZxObservable obs, int bit);

}  // namespace dibc::quantum
