#ifndef FBDETECT_NUMERIC_HPP
#define FBDETECT_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <tuple>
#include <utility>

namespace fbdetect::numeric {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log(sum_i exp(x_i)) with the max shifted out. Empty input gives -inf.
inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -kInf;
  const double top = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - top);
  return top + std::log(sum);
}

// Kahan-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  void scale(double factor) {
    sum_ *= factor;
    carry_ *= factor;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Streaming log-sum-exp: terms arrive as logarithms, the running sum is kept
// relative to the largest exponent seen so far and rescaled when it grows.
class LogSumAccumulator {
 public:
  void add(double log_term) {
    if (log_term == -kInf) return;
    if (log_term > shift_) {
      if (shift_ != -kInf) sum_.scale(std::exp(shift_ - log_term));
      shift_ = log_term;
    }
    sum_.add(std::exp(log_term - shift_));
  }
  double log_value() const {
    if (shift_ == -kInf) return -kInf;
    return shift_ + std::log(sum_.value());
  }
  double value() const { return std::exp(log_value()); }

 private:
  double shift_ = -kInf;
  CompensatedSum sum_;
};

struct ScalarMinimum {
  double argmin;
  double value;
};

// Golden-section search for the minimum of a unimodal f on [a, b].
template <typename F>
ScalarMinimum golden_section_minimize(F&& f, double a, double b, double tol = 1e-10,
                                      int max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iterations && (b - a) > tol; ++i) {
    if (fc <= fd) {
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
  const double fx = f(x);
  ScalarMinimum best{x, fx};
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

struct RootResult {
  double root;
  int iterations;
  bool converged;
};

// Root of a nondecreasing function on a bracket [lo, hi] with g(lo) <= 0 <= g(hi).
// `eval(x)` returns {g(x), g'(x)}. Newton steps are taken when they stay inside
// the bracket and shrink the residual; otherwise the bracket is bisected.
template <typename F>
RootResult safeguarded_newton(F&& eval, double lo, double hi, double tol = 1e-10,
                              int max_newton = 100, int max_total = 400) {
  double x = 0.5 * (lo + hi);
  auto [g, dg] = eval(x);
  int newton_steps = 0;
  for (int i = 0; i < max_total; ++i) {
    if (g == 0.0) return {x, i, true};
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= tol) return {0.5 * (lo + hi), i, true};
    double next = 0.5 * (lo + hi);
    if (newton_steps < max_newton && dg > 0.0 && std::isfinite(dg)) {
      const double candidate = x - g / dg;
      if (candidate > lo && candidate < hi) {
        next = candidate;
        ++newton_steps;
      }
    }
    const double prev_g = g;
    const double step = std::abs(next - x);
    x = next;
    std::tie(g, dg) = eval(x);
    // Newton has converged when the step is below tolerance and the residual shrank.
    if (step <= tol && std::abs(g) <= std::abs(prev_g)) return {x, i + 1, true};
  }
  return {x, max_total, false};
}

// Bisection for the sign change of a nonincreasing function on [lo, hi] with
// d(lo) > 0 >= d(hi). Runs until the bracket cannot shrink any further.
template <typename F>
std::pair<double, double> bisect_sign_change(F&& d, double lo, double hi, int max_iterations = 200) {
  for (int i = 0; i < max_iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (d(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace fbdetect::numeric

#endif  // FBDETECT_NUMERIC_HPP
