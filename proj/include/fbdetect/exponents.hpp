#ifndef FBDETECT_EXPONENTS_HPP
#define FBDETECT_EXPONENTS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "fbdetect/model.hpp"
#include "fbdetect/numeric.hpp"

namespace fbdetect {

// Log moment generating function of the message LLR Z under hypothesis j:
//   Lambda_j(s) = log E_j[exp(s Z)] = log sum_y q_j[y] exp(s llr[y]).
inline double log_mgf(const InducedModel& im, Hypothesis j, double s) {
  const auto& q = im.pmf(j);
  double top = -numeric::kInf;
  for (std::size_t y = 0; y < q.size(); ++y) top = std::max(top, std::log(q[y]) + s * im.llr[y]);
  double sum = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) sum += std::exp(std::log(q[y]) + s * im.llr[y] - top);
  return top + std::log(sum);
}

struct LogMgfDerivs {
  double value;  // Lambda(s)
  double first;  // Lambda'(s): mean of Z under the tilted law
  double second; // Lambda''(s): variance of Z under the tilted law
};

// Derivatives from the tilted law q_j[y] exp(s llr[y] - Lambda(s)).
inline LogMgfDerivs log_mgf_derivs(const InducedModel& im, Hypothesis j, double s) {
  const double lam = log_mgf(im, j, s);
  const auto& q = im.pmf(j);
  double mean = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) {
    mean += std::exp(std::log(q[y]) + s * im.llr[y] - lam) * im.llr[y];
  }
  double var = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) {
    const double dz = im.llr[y] - mean;
    var += std::exp(std::log(q[y]) + s * im.llr[y] - lam) * dz * dz;
  }
  return {lam, mean, var};
}

/// E_j[Z]; E_0[Z] = -D(q0||q1) <= 0 <= D(q1||q0) = E_1[Z].
inline double mean_llr(const InducedModel& im, Hypothesis j) {
  const auto& q = im.pmf(j);
  double mean = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) mean += q[y] * im.llr[y];
  return mean;
}

/// True when every message has the same LLR (then q0 == q1 and Z == 0).
inline bool is_degenerate(const InducedModel& im) {
  return im.max_llr() - im.min_llr() <= kLlrTieTolerance;
}

struct ChernoffResult {
  double value;  // min over s in [0,1] of Lambda_0(s), <= 0
  double s_star;
};

/// Chernoff exponent of one message: golden-section search on the convex
/// Lambda_0 over [0, 1].
inline ChernoffResult chernoff_exponent(const InducedModel& im, double tol = 1e-10) {
  if (is_degenerate(im)) return {0.0, 0.5};
  auto best = numeric::golden_section_minimize([&](double s) { return log_mgf(im, Hypothesis::H0, s); },
                                               0.0, 1.0, tol);
  return {std::min(best.value, 0.0), best.argmin};
}

struct RateFunctionValue {
  double t;
  double value;     // >= 0, possibly +inf
  double argmax_s;  // maximizing tilt; +-inf at (or beyond) the support endpoints
};

namespace detail {

// Total mass under q_j of the messages whose LLR ties with `z`.
inline double mass_at_llr(const InducedModel& im, Hypothesis j, double z) {
  const auto& q = im.pmf(j);
  double mass = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) {
    if (std::abs(im.llr[y] - z) <= kLlrTieTolerance) mass += q[y];
  }
  return mass;
}

// Solves Lambda_j'(s) = t on [lo, hi] (the caller guarantees the bracket).
inline double solve_tilt(const InducedModel& im, Hypothesis j, double t, double lo, double hi) {
  auto eval = [&](double s) {
    const auto d = log_mgf_derivs(im, j, s);
    return std::pair{d.first - t, d.second};
  };
  return numeric::safeguarded_newton(eval, lo, hi, 1e-10).root;
}

inline double solve_and_value(const InducedModel& im, Hypothesis j, double t, double lo, double hi) {
  const double s = solve_tilt(im, j, t, lo, hi);
  return std::max(s * t - log_mgf(im, j, s), 0.0);
}

}  // namespace detail

/// Fenchel-Legendre transform of the log-MGF:
///   Lambda_j^*(t) = sup_s { s t - Lambda_j(s) }.
/// Finite on the closed LLR support [min llr, max llr]; at an endpoint it is
/// -log P_j(Z = endpoint) and beyond the support it is +inf. A degenerate
/// model (Z == 0) has rate 0 at t = 0 and +inf elsewhere.
inline RateFunctionValue rate_function(const InducedModel& im, Hypothesis j, double t) {
  const double zmin = im.min_llr();
  const double zmax = im.max_llr();
  const double tol = kLlrTieTolerance * std::max(1.0, std::abs(t));
  if (t < zmin - tol) return {t, numeric::kInf, -numeric::kInf};
  if (t > zmax + tol) return {t, numeric::kInf, numeric::kInf};
  if (t >= zmax - tol) return {t, -std::log(detail::mass_at_llr(im, j, zmax)), numeric::kInf};
  if (t <= zmin + tol) return {t, -std::log(detail::mass_at_llr(im, j, zmin)), -numeric::kInf};

  // Interior: Lambda_j' increases from zmin to zmax; expand a bracket around 0.
  double lo = -1.0;
  double hi = 1.0;
  while (log_mgf_derivs(im, j, lo).first > t && lo > -1e12) lo *= 2.0;
  while (log_mgf_derivs(im, j, hi).first < t && hi < 1e12) hi *= 2.0;
  const double s = detail::solve_tilt(im, j, t, lo, hi);
  const double value = s * t - log_mgf(im, j, s);
  return {t, std::max(value, 0.0), s};
}

/// The transform with the tilt confined to the range between the two
/// hypotheses: s in [0, 1] under H0 and s in [-1, 0] under H1. It equals
/// rate_function(im, j, t) for t in [E_0 Z, E_1 Z]. Outside that range it is the
/// exponent of the optimal two-sided test rather than a one-sided tail, and it
/// is finite everywhere:
///   H0: 0 for t <= E_0 Z and t for t >= E_1 Z;
///   H1: -t for t <= E_0 Z and 0 for t >= E_1 Z.
/// Duality holds exactly as for the unrestricted transform:
/// chernoff_rate(H1, t) = chernoff_rate(H0, t) - t.
inline double chernoff_rate(const InducedModel& im, Hypothesis j, double t) {
  const double e0 = mean_llr(im, Hypothesis::H0);
  const double e1 = mean_llr(im, Hypothesis::H1);
  if (j == Hypothesis::H0) {
    if (t <= e0) return 0.0;
    if (t >= e1) return t;
    return detail::solve_and_value(im, j, t, 0.0, 1.0);
  }
  if (t >= e1) return 0.0;
  if (t <= e0) return -t;
  return detail::solve_and_value(im, j, t, -1.0, 0.0);
}

}  // namespace fbdetect

#endif  // FBDETECT_EXPONENTS_HPP
