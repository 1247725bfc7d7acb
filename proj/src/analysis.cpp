#include "dibc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dibc/errors.hpp"

namespace dibc::analysis {
namespace {

constexpr double kRootTolerance = 1e-10;

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= kMaxCheatAngle))
    throw std::domain_error("theta must lie in [0, pi/4], got " + std::to_string(theta));
}

bool is_bit(int v) { return v == 0 || v == 1; }

double control_at(double theta) {
  const double c = std::cos(theta / 2.0);
  return c * c;
}

}  // namespace

double chsh_indicator(const RoundRecord& record) {
  if (!record.complete()) throw UsageError("CHSH indicator needs s0, s1, r0 and r1");
  const int s0 = *record.s0, s1 = *record.s1, r0 = *record.r0, r1 = *record.r1;
  if (!is_bit(s0) || !is_bit(s1)) throw UsageError("CHSH indicator needs test inputs in {0, 1}");
  if (!is_bit(r0) || !is_bit(r1)) throw UsageError("outputs must be bits");
  return ((r0 ^ r1 ^ (s0 & s1)) == 0) ? 4.0 : -4.0;
}

double running_violation(std::span<const RoundRecord> rounds) {
  if (rounds.empty()) throw UsageError("running violation of an empty history");
  double sum = 0.0;
  for (const auto& r : rounds) sum += chsh_indicator(r);
  return sum / static_cast<double>(rounds.size());
}

double phi_opt(double theta) {
  check_theta(theta);
  const double s = std::sin(2.0 * theta);
  const double arg = 2.0 * (std::cos(2.0 * theta) + s * s) / std::sqrt(6.0 - 2.0 * std::cos(4.0 * theta));
  return std::acos(std::clamp(arg, -1.0, 1.0));
}

double cheat_violation(double theta, double phi) {
  return 2.0 * std::cos(2.0 * theta - phi) - std::cos(4.0 * theta - phi) + std::cos(phi);
}

StrategyPoint strategy_point(double theta) {
  return {cheat_violation(theta, phi_opt(theta)), control_at(theta)};
}

// I(theta) is strictly increasing on [0, pi/4], so bisection on theta inverts it.
double control_of_violation(double violation) {
  if (violation > kTsirelson + kViolationSlack)
    throw std::domain_error("violation " + std::to_string(violation) + " exceeds 2 sqrt 2");
  if (violation <= 2.0) return 1.0;
  if (violation >= strategy_point(kMaxCheatAngle).violation) return control_at(kMaxCheatAngle);
  double lo = 0.0, hi = kMaxCheatAngle;
  while (hi - lo > kRootTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (strategy_point(mid).violation < violation)
      lo = mid;
    else
      hi = mid;
  }
  return control_at(0.5 * (lo + hi));
}

ControlCurve ControlCurve::sample(std::size_t points) {
  if (points < 2) throw UsageError("control curve needs at least 2 points");
  ControlCurve curve;
  curve.samples_.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    const double v = i + 1 == points ? kTsirelson : 2.0 + t * (kTsirelson - 2.0);
    curve.samples_.emplace_back(v, control_of_violation(v));
  }
  return curve;
}

double ControlCurve::operator()(double violation) const {
  if (violation <= samples_.front().first) return samples_.front().second;
  if (violation >= samples_.back().first) return samples_.back().second;
  auto it = std::lower_bound(samples_.begin(), samples_.end(), violation,
                             [](const auto& s, double v) { return s.first < v; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (violation - x0) / (x1 - x0);
}

std::uint64_t k0(std::uint64_t n, double i_threshold) {
  if (n < 2) throw UsageError("N must exceed 1");
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(n - 1) * control_of_violation(i_threshold)));
}

double azuma_tail(std::uint64_t k, double epsilon) {
  if (k < 1) throw UsageError("azuma_tail needs k >= 1");
  if (epsilon < 0.0) throw std::domain_error("epsilon must be nonnegative");
  return std::exp(-static_cast<double>(k) * epsilon * epsilon / (2.0 * kAzumaD * kAzumaD));
}

// (e^{-K0 x} - e^{-N x}) / (1 - e^{-x}) with x = eps^2 / 2D^2, written with
// expm1 so the small-eps limit N - K0 is approached without cancellation.
double q_epsilon(std::uint64_t n, std::uint64_t k0_value, double epsilon) {
  if (k0_value < 1 || k0_value > n - 1) throw UsageError("q_epsilon needs 1 <= K0 <= N-1");
  if (epsilon < 0.0) throw std::domain_error("epsilon must be nonnegative");
  if (epsilon == 0.0) return static_cast<double>(n - k0_value);
  const double x = epsilon * epsilon / (2.0 * kAzumaD * kAzumaD);
  const double span = static_cast<double>(n - k0_value);
  return std::exp(-static_cast<double>(k0_value) * x) * -std::expm1(-span * x) / -std::expm1(-x);
}

double schedule_threshold(std::uint64_t n, ThresholdSchedule schedule) {
  const double root = std::sqrt(static_cast<double>(n));
  return schedule == ThresholdSchedule::caption ? kTsirelson * (1.0 - 1.0 / root) : kTsirelson - 1.0 / root;
}

double bound_objective(std::uint64_t n, std::uint64_t k0_value, double i_threshold, double epsilon) {
  const double c = control_of_violation(i_threshold - epsilon);
  return c + (1.0 - c) * q_epsilon(n, k0_value, epsilon);
}

std::pair<double, double> golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                                  double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

BoundResult pcont_bound(const BoundInputs& inputs) {
  const std::uint64_t n = inputs.n;
  if (n < 2) throw UsageError("N must exceed 1");
  if (inputs.i_threshold > kTsirelson + kViolationSlack)
    throw std::domain_error("I_th exceeds 2 sqrt 2");
  if (!(inputs.grid_step > 0.0) || !(inputs.tolerance > 0.0)) throw UsageError("eps grid must be nonempty");

  const std::uint64_t k = k0(n, inputs.i_threshold);
  auto objective = [&](double eps) { return bound_objective(n, k, inputs.i_threshold, eps); };

  // Past eps = I_th - 2 the control is clamped to 1 and the objective is 1.
  const double hi = std::max(0.0, inputs.i_threshold - 2.0);
  std::vector<double> grid;
  for (std::size_t i = 0; static_cast<double>(i) * inputs.grid_step < hi; ++i)
    grid.push_back(static_cast<double>(i) * inputs.grid_step);
  grid.push_back(hi);

  std::size_t best = 0;
  double best_value = objective(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  double eps_star = grid[best];
  if (grid.size() > 1) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double up = grid[std::min(best + 1, grid.size() - 1)];
    const auto [x, fx] = golden_section_minimize(objective, lo, up, inputs.tolerance);
    if (fx < best_value) {
      best_value = fx;
      eps_star = x;
    }
  }
  const double nd = static_cast<double>(n);
  const double unclamped = (nd - 1.0) / nd * best_value + 1.0 / nd;
  return {std::min(1.0, unclamped), eps_star, k, unclamped};
}

double free_reveal_control(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("control must lie in [0, 1]");
  return (p + 1.0) / 2.0;
}

bool NsBox::valid(double tolerance) const {
  for (double v : p)
    if (v < -tolerance) return false;
  for (int s0 = 0; s0 < 2; ++s0)
    for (int s1 = 0; s1 < 2; ++s1) {
      double total = 0.0;
      for (int r0 = 0; r0 < 2; ++r0)
        for (int r1 = 0; r1 < 2; ++r1) total += (*this)(r0, r1, s0, s1);
      if (std::abs(total - 1.0) > tolerance) return false;
    }
  for (int r = 0; r < 2; ++r)
    for (int s = 0; s < 2; ++s) {
      if (std::abs(marginal0(r, s, 0) - marginal0(r, s, 1)) > tolerance) return false;
      if (std::abs(marginal1(r, 0, s) - marginal1(r, 1, s)) > tolerance) return false;
    }
  return true;
}

bool NsBox::local_deterministic() const {
  return std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

NsBox NsBox::uniform() {
  NsBox box;
  box.p.fill(0.25);
  return box;
}

std::vector<NsBox> ns_vertices() {
  std::vector<NsBox> out;
  out.reserve(24);
  for (int code = 0; code < 16; ++code) {
    const int a[2] = {code & 1, (code >> 1) & 1};
    const int b[2] = {(code >> 2) & 1, (code >> 3) & 1};
    NsBox box;
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1) box.at(a[s0], b[s1], s0, s1) = 1.0;
    out.push_back(box);
  }
  // r0 xor r1 = s0 s1 xor alpha s0 xor beta s1 xor gamma
  for (int code = 0; code < 8; ++code) {
    const int alpha = code & 1, beta = (code >> 1) & 1, gamma = (code >> 2) & 1;
    NsBox box;
    for (int s0 = 0; s0 < 2; ++s0)
      for (int s1 = 0; s1 < 2; ++s1)
        for (int r0 = 0; r0 < 2; ++r0) {
          const int r1 = r0 ^ (s0 & s1) ^ (alpha & s0) ^ (beta & s1) ^ gamma;
          box.at(r0, r1, s0, s1) = 0.5;
        }
    out.push_back(box);
  }
  return out;
}

double gain_objective(const NsBox& b) {
  return 0.25 * (2.0 * b(0, 0, 0, 0) + 2.0 * b(1, 0, 0, 1) + b(0, 1, 1, 0) + b(1, 1, 1, 1) + b(0, 1, 1, 1) +
                 b(1, 1, 1, 0));
}

double pr_control_objective(const NsBox& b) {
  return 0.25 * (b.marginal1(0, 0, 0) + b.marginal1(0, 0, 1) + b(0, 0, 1, 0) + b(0, 1, 1, 1) + b(1, 1, 1, 0) +
                 b(1, 0, 1, 1));
}

ObjectiveMax maximize(std::span<const NsBox> boxes, const std::function<double(const NsBox&)>& objective) {
  if (boxes.empty()) throw UsageError("nothing to maximize over");
  std::vector<double> values;
  values.reserve(boxes.size());
  for (const auto& b : boxes) values.push_back(objective(b));
  const double best = *std::max_element(values.begin(), values.end());
  ObjectiveMax out{best, {}, {}};
  for (std::size_t i = 0; i < boxes.size(); ++i)
    if (values[i] >= best - 1e-12) out.maximizers.push_back(boxes[i]);
  out.argmax = out.maximizers.front();
  return out;
}

ObjectiveMax max_gain_objective() {
  const auto vertices = ns_vertices();
  return maximize(vertices, gain_objective);
}

ObjectiveMax max_pr_control_objective() {
  const auto vertices = ns_vertices();
  return maximize(vertices, pr_control_objective);
}

}  // namespace dibc::analysis
