#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "dibc/round_record.hpp"

namespace dibc::analysis {

inline constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;
/// Martingale increment bound |Z_{k+1} - Z_k| <= D.
inline constexpr double kAzumaD = 4.0 + 2.0 * std::numbers::sqrt2;
inline constexpr double kMaxCheatAngle = std::numbers::pi / 4.0;
/// Violations this far above 2*sqrt(2) are treated as 2*sqrt(2).
inline constexpr double kViolationSlack = 1e-9;

/// 4 * (-1)^(r0 xor r1 xor s0*s1). Throws UsageError unless all four fields
/// are present and the inputs are bits.
double chsh_indicator(const RoundRecord& record);

/// Mean CHSH indicator over a nonempty list of rounds.
double running_violation(std::span<const RoundRecord> rounds);

/// Angle phi maximizing the cheat violation at fixed theta in [0, pi/4].
double phi_opt(double theta);

/// 2 cos(2 theta - phi) - cos(4 theta - phi) + cos(phi).
double cheat_violation(double theta, double phi);

struct StrategyPoint {
  double violation;
  double control;
};

StrategyPoint strategy_point(double theta);

/// Alice's asymptotic control C(I): 1 for I <= 2, the inverse of the
/// strategy curve on [2, 2 sqrt 2]. Throws std::domain_error above 2 sqrt 2.
double control_of_violation(double violation);

/// Tabulated C(I), I ascending from 2 to 2 sqrt 2, linear interpolation.
class ControlCurve {
 public:
  static ControlCurve sample(std::size_t points);
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }
  double operator()(double violation) const;

 private:
  std::vector<std::pair<double, double>> samples_;
};

std::uint64_t k0(std::uint64_t n, double i_threshold);

/// exp(-k eps^2 / (2 D^2)).
double azuma_tail(std::uint64_t k, double epsilon);

/// sum_{k=K0}^{N-1} azuma_tail(k, eps) in closed form; N - K0 at eps = 0.
double q_epsilon(std::uint64_t n, std::uint64_t k0, double epsilon);

enum class ThresholdSchedule { caption, body };

/// caption: 2 sqrt2 (1 - 1/sqrt N); body: 2 sqrt2 - 1/sqrt N.
double schedule_threshold(std::uint64_t n, ThresholdSchedule schedule);

struct BoundInputs {
  std::uint64_t n = 1000;
  double i_threshold = kTsirelson;
  double grid_step = 1e-3;
  double tolerance = 1e-6;
};

struct BoundResult {
  double bound;
  double epsilon_star;
  std::uint64_t k0;
  /// (N-1)/N * min_eps[...] + 1/N before clamping to 1.
  double unclamped;
};

/// Finite-N upper bound on Alice's control, minimized over eps.
BoundResult pcont_bound(const BoundInputs& inputs);

/// The bracketed objective C(I_th - eps) + (1 - C(I_th - eps)) Q(eps).
double bound_objective(std::uint64_t n, std::uint64_t k0, double i_threshold, double epsilon);

/// (p + 1) / 2: control when Bob can only test half the reveals.
double free_reveal_control(double p);

/// Bipartite two-input two-output conditional distribution P(r0, r1 | s0, s1).
struct NsBox {
  std::array<double, 16> p{};

  static constexpr std::size_t index(int r0, int r1, int s0, int s1) {
    return static_cast<std::size_t>(8 * r0 + 4 * r1 + 2 * s0 + s1);
  }
  double operator()(int r0, int r1, int s0, int s1) const { return p[index(r0, r1, s0, s1)]; }
  double& at(int r0, int r1, int s0, int s1) { return p[index(r0, r1, s0, s1)]; }

  double marginal0(int r0, int s0, int s1) const { return (*this)(r0, 0, s0, s1) + (*this)(r0, 1, s0, s1); }
  double marginal1(int r1, int s0, int s1) const { return (*this)(0, r1, s0, s1) + (*this)(1, r1, s0, s1); }

  /// Nonnegative, normalized and no-signaling within `tolerance`.
  bool valid(double tolerance = 1e-12) const;
  bool local_deterministic() const;

  static NsBox uniform();
  friend bool operator==(const NsBox&, const NsBox&) = default;
};

/// 16 local deterministic boxes followed by the 8 PR-type boxes.
std::vector<NsBox> ns_vertices();

/// Bob's guessing probability with Alice's inputs {2, 3} relabeled {0, 1}
/// and Bob's (measurement, guess) as the second party.
double gain_objective(const NsBox& box);

/// Alice's control in the PR-box protocol.
double pr_control_objective(const NsBox& box);

struct ObjectiveMax {
  double value;
  NsBox argmax;
  std::vector<NsBox> maximizers;
};

ObjectiveMax maximize(std::span<const NsBox> boxes, const std::function<double(const NsBox&)>& objective);
ObjectiveMax max_gain_objective();
ObjectiveMax max_pr_control_objective();

/// Golden-section minimization of a unimodal f on [lo, hi].
std::pair<double, double> golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                                  double tolerance);

}  // namespace dibc::analysis
