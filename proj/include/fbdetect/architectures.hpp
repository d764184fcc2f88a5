#ifndef FBDETECT_ARCHITECTURES_HPP
#define FBDETECT_ARCHITECTURES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fbdetect/error.hpp"
#include "fbdetect/exponents.hpp"
#include "fbdetect/model.hpp"

namespace fbdetect {

enum class ArchitectureKind {
  Parallel1,
  Parallel2,
  SequentialFeedback2,
  FullFeedback2,
  RestrictedFeedback2,
  OneMsgSequential,
  DaisyFull,
  DaisyRestricted,
  Tree,
};

enum class Formulation { NeymanPearson, Bayesian };

inline std::string_view to_string(ArchitectureKind kind) {
  switch (kind) {
    case ArchitectureKind::Parallel1: return "parallel-1";
    case ArchitectureKind::Parallel2: return "parallel-2";
    case ArchitectureKind::SequentialFeedback2: return "seq-feedback";
    case ArchitectureKind::FullFeedback2: return "full-feedback";
    case ArchitectureKind::RestrictedFeedback2: return "restricted-feedback";
    case ArchitectureKind::OneMsgSequential: return "one-msg-sequential";
    case ArchitectureKind::DaisyFull: return "daisy-full";
    case ArchitectureKind::DaisyRestricted: return "daisy-restricted";
    case ArchitectureKind::Tree: return "tree";
  }
  return "unknown";
}

inline std::string_view to_string(Formulation f) {
  return f == Formulation::Bayesian ? "bayesian" : "neyman-pearson";
}

inline constexpr ArchitectureKind kAllArchitectures[] = {
    ArchitectureKind::Parallel1,           ArchitectureKind::Parallel2,
    ArchitectureKind::SequentialFeedback2, ArchitectureKind::FullFeedback2,
    ArchitectureKind::RestrictedFeedback2, ArchitectureKind::OneMsgSequential,
    ArchitectureKind::DaisyFull,           ArchitectureKind::DaisyRestricted,
    ArchitectureKind::Tree,
};

inline ArchitectureKind parse_architecture(std::string_view name) {
  for (auto kind : kAllArchitectures) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown architecture '" + std::string(name) + "'");
}

inline bool uses_stage_fraction(ArchitectureKind kind) {
  return kind == ArchitectureKind::DaisyRestricted || kind == ArchitectureKind::Tree;
}

inline bool sends_two_messages(ArchitectureKind kind) {
  return kind == ArchitectureKind::Parallel2 || kind == ArchitectureKind::SequentialFeedback2 ||
         kind == ArchitectureKind::FullFeedback2 || kind == ArchitectureKind::RestrictedFeedback2;
}

struct ArchitectureSpec {
  ArchitectureKind kind = ArchitectureKind::Parallel1;
  std::optional<double> r;  // first-stage fraction m/n, daisy-restricted and tree only
  int message_alphabet_size = 2;
  Formulation formulation = Formulation::Bayesian;
  QuantizerSearch search = QuantizerSearch::LlrMonotone;
};

inline void validate_spec(const ArchitectureSpec& spec) {
  if (spec.message_alphabet_size < 1) {
    throw Error(ErrorKind::InvalidArgument, "message alphabet size must be positive");
  }
  if (uses_stage_fraction(spec.kind)) {
    if (!spec.r) throw Error(ErrorKind::InvalidArgument, std::string(to_string(spec.kind)) + " requires r");
    if (!(*spec.r > 0.0 && *spec.r < 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1)");
  } else if (spec.r) {
    throw Error(ErrorKind::InvalidArgument, "r only applies to daisy-restricted and tree");
  }
}

/// Decay rates of the aggregator decision probabilities, e_ij for P_i(U = j).
struct DecayRateVector {
  double e01 = 0.0;
  double e10 = 0.0;
  double e00 = 0.0;
  double e11 = 0.0;
};

inline void validate_decay_rates(const DecayRateVector& e) {
  for (double v : {e.e01, e.e10, e.e00, e.e11}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, "decay rates must be finite and nonnegative");
    }
  }
  if (e.e01 > 0.0 && e.e00 > 0.0) throw Error(ErrorKind::InvalidArgument, "e01 and e00 cannot both be positive");
  if (e.e10 > 0.0 && e.e11 > 0.0) throw Error(ErrorKind::InvalidArgument, "e10 and e11 cannot both be positive");
}

struct ExponentReport {
  ArchitectureKind architecture = ArchitectureKind::Parallel1;
  Formulation formulation = Formulation::Bayesian;
  std::optional<double> r;
  double exponent = 0.0;  // <= 0, more negative is better
  std::optional<Quantizer> gamma;
  std::optional<Quantizer> delta0;  // second message (parallel-2) or second stage after U = 0
  std::optional<Quantizer> delta1;  // second stage after U = 1
  std::optional<double> t;          // first-stage LLR threshold
  std::optional<double> s_star;     // Chernoff tilt (Bayesian parallel)
  std::optional<DecayRateVector> decay_rates;
  std::vector<double> branch_values;
  bool t_at_boundary = false;
  std::string note;
};

// Tie gap; the lexicographically smaller canonical quantizer wins a tie.
inline constexpr double kTieTolerance = 1e-12;

namespace detail {

struct Candidate {
  Quantizer q;
  InducedModel im;
};

inline std::vector<Candidate> candidates(const HypothesisModel& m, int d, QuantizerSearch search) {
  std::vector<Candidate> out;
  for (auto& q : enumerate_quantizers(m, d, search)) {
    auto im = induce(m, q);
    out.push_back({std::move(q), std::move(im)});
  }
  return out;
}

}  // namespace detail

/// Parallel configuration without feedback. Neyman-Pearson: inf over
/// quantizers of E_0[log L_10] (minus the best KL divergence). Bayesian: inf of
/// the Chernoff exponent. With two messages per sensor the pair (gamma, delta)
/// is searched as a single quantizer into d*d messages.
inline ExponentReport exponent_parallel(const HypothesisModel& m, int d, int messages_per_sensor,
                                        Formulation formulation,
                                        QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  if (messages_per_sensor != 1 && messages_per_sensor != 2) {
    throw Error(ErrorKind::InvalidArgument, "messages per sensor must be 1 or 2");
  }
  const int levels = messages_per_sensor == 2 ? d * d : d;
  ExponentReport report;
  report.architecture = messages_per_sensor == 2 ? ArchitectureKind::Parallel2 : ArchitectureKind::Parallel1;
  report.formulation = formulation;
  bool first = true;
  Quantizer best_q;
  for (const auto& c : detail::candidates(m, levels, search)) {
    double value = 0.0;
    std::optional<double> s_star;
    if (formulation == Formulation::NeymanPearson) {
      value = mean_llr(c.im, Hypothesis::H0);
    } else {
      const auto ch = chernoff_exponent(c.im);
      value = ch.value;
      s_star = ch.s_star;
    }
    if (first || value < report.exponent - kTieTolerance) {
      first = false;
      report.exponent = value;
      report.s_star = s_star;
      best_q = c.q;
    }
  }
  report.exponent = std::min(report.exponent, 0.0);
  if (messages_per_sensor == 2) {
    auto [g, dl] = split_product(best_q, d);
    report.gamma = g;
    report.delta0 = dl;
  } else {
    report.gamma = best_q;
  }
  return report;
}

/// Feedback architectures, reported with the matching parallel exponent.
inline ExponentReport exponent_feedback_equivalent(const HypothesisModel& m, int d, ArchitectureKind kind,
                                                   Formulation formulation,
                                                   QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  ExponentReport report;
  switch (kind) {
    case ArchitectureKind::SequentialFeedback2:
      report = exponent_parallel(m, d, 2, formulation, search);
      report.note = "sequential feedback gives no exponent gain; equals the two-message parallel exponent";
      break;
    case ArchitectureKind::FullFeedback2:
      report = exponent_parallel(m, d, 2, formulation, search);
      report.note = "full feedback gives no exponent gain; equals the two-message parallel exponent";
      break;
    case ArchitectureKind::RestrictedFeedback2:
      report = exponent_parallel(m, d, 2, formulation, search);
      report.note = "restricted feedback gives no exponent gain; equals the two-message parallel exponent";
      break;
    case ArchitectureKind::OneMsgSequential:
      report = exponent_parallel(m, d, 1, formulation, search);
      report.note = "one-message sequential feedback equals the one-message parallel exponent";
      break;
    case ArchitectureKind::DaisyFull:
      report = exponent_parallel(m, d, 1, formulation, search);
      report.note = "a daisy chain whose fusion center sees every first-stage message equals the parallel exponent";
      break;
    default:
      throw Error(ErrorKind::InvalidArgument,
                  std::string(to_string(kind)) + " is not a feedback-equivalent architecture");
  }
  report.architecture = kind;
  return report;
}

/// Both sides of the min in the daisy-chain objective for a fixed strategy.
/// a = Lambda_1^*(gamma, t) and b = Lambda_0^*(gamma, t) are the first-stage
/// decay rates e10 and e01; branch0 uses delta0 after U = 0, branch1 uses
/// delta1 after U = 1. The exponent is -(1 - r) * min(branch0, branch1).
struct DaisyObjective {
  double branch0;
  double branch1;
  double e01;
  double e10;
  double value() const { return std::min(branch0, branch1); }
};

namespace detail {

inline double stage_ratio(double r) { return r / (1.0 - r); }

inline double branch0_value(const InducedModel& delta0, double ratio, double e10, double e00 = 0.0) {
  return chernoff_rate(delta0, Hypothesis::H0, ratio * (e10 - e00));
}

inline double branch1_value(const InducedModel& delta1, double ratio, double e01, double e11 = 0.0) {
  return chernoff_rate(delta1, Hypothesis::H1, -ratio * (e01 - e11));
}

}  // namespace detail

inline DaisyObjective evaluate_daisy_objective(const InducedModel& gamma, const InducedModel& delta0,
                                               const InducedModel& delta1, double r, double t) {
  const double ratio = detail::stage_ratio(r);
  const double e10 = rate_function(gamma, Hypothesis::H1, t).value;
  const double e01 = rate_function(gamma, Hypothesis::H0, t).value;
  return {detail::branch0_value(delta0, ratio, e10), detail::branch1_value(delta1, ratio, e01), e01, e10};
}

inline DaisyObjective evaluate_daisy_objective(const HypothesisModel& m, double r, const Quantizer& gamma,
                                               const Quantizer& delta0, const Quantizer& delta1, double t) {
  return evaluate_daisy_objective(induce(m, gamma), induce(m, delta0), induce(m, delta1), r, t);
}

struct HValue {
  double value;    // min(branch0, branch1)
  double branch0;  // (1-r) sup_delta0 rate0(delta0, r/(1-r)(e10-e00)) + r e00
  double branch1;  // (1-r) sup_delta1 rate1(delta1, -r/(1-r)(e01-e11)) + r e11
  Quantizer delta0;
  Quantizer delta1;
};

/// Exponent (as a positive decay rate) of the best second stage given the
/// first-stage decay-rate vector e.
inline HValue h_of_e(const HypothesisModel& m, double r, const DecayRateVector& e, int d,
                     QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  validate_decay_rates(e);
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1)");
  const double ratio = detail::stage_ratio(r);
  HValue out{0.0, -numeric::kInf, -numeric::kInf, {}, {}};
  for (const auto& c : detail::candidates(m, d, search)) {
    const double b0 = (1.0 - r) * detail::branch0_value(c.im, ratio, e.e10, e.e00) + r * e.e00;
    const double b1 = (1.0 - r) * detail::branch1_value(c.im, ratio, e.e01, e.e11) + r * e.e11;
    if (b0 > out.branch0 + kTieTolerance) {
      out.branch0 = b0;
      out.delta0 = c.q;
    }
    if (b1 > out.branch1 + kTieTolerance) {
      out.branch1 = b1;
      out.delta1 = c.q;
    }
  }
  out.value = std::min(out.branch0, out.branch1);
  return out;
}

namespace detail {

inline constexpr int kThresholdGridPoints = 401;

struct ThresholdOptimum {
  double t;
  double branch0;
  double branch1;
  bool at_boundary;
  double value() const { return std::min(branch0, branch1); }
};

// First-stage rate curves of one quantizer over t in [E_0 Z, E_1 Z]:
// a(t) = Lambda_1^*(t) nonincreasing, b(t) = Lambda_0^*(t) nondecreasing.
struct FirstStage {
  const Candidate* gamma;
  double lo;
  double hi;
  std::vector<double> ts;
  std::vector<double> a;
  std::vector<double> b;

  explicit FirstStage(const Candidate& g) : gamma(&g) {
    lo = mean_llr(g.im, Hypothesis::H0);
    hi = mean_llr(g.im, Hypothesis::H1);
    const int points = hi > lo ? kThresholdGridPoints : 1;
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
      ts.push_back(t);
      a.push_back(rate_a(t));
      b.push_back(rate_b(t));
    }
  }
  double rate_a(double t) const { return rate_function(gamma->im, Hypothesis::H1, t).value; }
  double rate_b(double t) const { return rate_function(gamma->im, Hypothesis::H0, t).value; }
};

// Maximizes min(branch0(t), branch1(t)) where branch0 is nonincreasing and
// branch1 nondecreasing in t: the optimum sits at their crossing, or at an
// end of the interval when they do not cross. The grid locates the bracket,
// bisection on branch0 - branch1 pins the crossing.
template <typename GridBranches, typename EvalBranches>
ThresholdOptimum maximize_over_threshold(const FirstStage& stage, GridBranches&& grid_branches,
                                         EvalBranches&& eval) {
  const std::size_t points = stage.ts.size();
  std::vector<std::pair<double, double>> values(points);
  for (std::size_t i = 0; i < points; ++i) values[i] = grid_branches(i);

  ThresholdOptimum best{stage.ts[0], values[0].first, values[0].second, false};
  for (std::size_t i = 1; i < points; ++i) {
    const double v = std::min(values[i].first, values[i].second);
    if (v > best.value()) best = {stage.ts[i], values[i].first, values[i].second, false};
  }
  auto diff = [](const std::pair<double, double>& v) { return v.first - v.second; };
  if (points > 1 && diff(values[0]) > 0.0 && diff(values[points - 1]) <= 0.0) {
    std::size_t i = 1;
    while (diff(values[i]) > 0.0) ++i;
    auto [lo, hi] = numeric::bisect_sign_change(
        [&](double t) {
          const auto v = eval(t);
          return v.first - v.second;
        },
        stage.ts[i - 1], stage.ts[i]);
    for (double t : {lo, hi}) {
      const auto v = eval(t);
      if (std::min(v.first, v.second) > best.value()) best = {t, v.first, v.second, false};
    }
  }
  best.at_boundary = points > 1 && (best.t == stage.lo || best.t == stage.hi);
  return best;
}

struct TreeChoice {
  std::size_t gamma;
  std::size_t delta;
  ThresholdOptimum opt;
};

inline std::vector<TreeChoice> best_tree_per_gamma(const std::vector<FirstStage>& stages,
                                                   const std::vector<Candidate>& deltas, double ratio) {
  std::vector<TreeChoice> out;
  for (std::size_t g = 0; g < stages.size(); ++g) {
    const auto& stage = stages[g];
    std::optional<TreeChoice> best;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const auto& im = deltas[k].im;
      auto branches = [&](double a, double b) {
        return std::pair{branch0_value(im, ratio, a), branch1_value(im, ratio, b)};
      };
      const auto opt = maximize_over_threshold(
          stage, [&](std::size_t i) { return branches(stage.a[i], stage.b[i]); },
          [&](double t) { return branches(stage.rate_a(t), stage.rate_b(t)); });
      if (!best || opt.value() > best->opt.value() + kTieTolerance) best = TreeChoice{g, k, opt};
    }
    out.push_back(*best);
  }
  return out;
}

// Per-branch argmax of (delta0, delta1) at a fixed first stage and threshold.
struct BranchMaxima {
  double branch0;
  double branch1;
  std::size_t delta0;
  std::size_t delta1;
};

inline BranchMaxima branch_maxima(const std::vector<Candidate>& deltas, double ratio, double a, double b) {
  BranchMaxima out{-numeric::kInf, -numeric::kInf, 0, 0};
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const double v0 = branch0_value(deltas[k].im, ratio, a);
    const double v1 = branch1_value(deltas[k].im, ratio, b);
    if (v0 > out.branch0 + kTieTolerance) {
      out.branch0 = v0;
      out.delta0 = k;
    }
    if (v1 > out.branch1 + kTieTolerance) {
      out.branch1 = v1;
      out.delta1 = k;
    }
  }
  return out;
}

inline void fill_two_stage_report(ExponentReport& report, double r, const FirstStage& stage,
                                  const Quantizer& delta0, const Quantizer& delta1,
                                  const ThresholdOptimum& opt) {
  report.r = r;
  report.formulation = Formulation::Bayesian;
  report.exponent = -(1.0 - r) * opt.value();
  if (report.exponent == 0.0) report.exponent = 0.0;  // no negative zero in reports
  report.gamma = stage.gamma->q;
  report.delta0 = delta0;
  report.delta1 = delta1;
  report.t = opt.t;
  report.decay_rates = DecayRateVector{stage.rate_b(opt.t), stage.rate_a(opt.t), 0.0, 0.0};
  report.branch_values = {opt.branch0, opt.branch1};
  report.t_at_boundary = opt.at_boundary;
}

inline void require_stage_fraction(double r) {
  if (!(r > 0.0 && r < 1.0)) throw Error(ErrorKind::InvalidArgument, "r must lie in (0, 1)");
}

struct TwoStageSearch {
  std::vector<Candidate> quantizers;
  std::vector<FirstStage> stages;
  std::vector<TreeChoice> tree;

  TwoStageSearch(const HypothesisModel& m, double r, int d, QuantizerSearch search)
      : quantizers(candidates(m, d, search)) {
    for (const auto& c : quantizers) stages.emplace_back(c);
    tree = best_tree_per_gamma(stages, quantizers, stage_ratio(r));
  }
};

inline ExponentReport tree_report(const TwoStageSearch& s, double r) {
  const TreeChoice* best = nullptr;
  for (const auto& c : s.tree) {
    if (!best || c.opt.value() > best->opt.value() + kTieTolerance) best = &c;
  }
  ExponentReport report;
  report.architecture = ArchitectureKind::Tree;
  const auto& delta = s.quantizers[best->delta].q;
  fill_two_stage_report(report, r, s.stages[best->gamma], delta, delta, best->opt);
  return report;
}

inline ExponentReport daisy_report(const TwoStageSearch& s, double r) {
  const double ratio = stage_ratio(r);
  std::optional<std::pair<std::size_t, ThresholdOptimum>> best;
  for (std::size_t g = 0; g < s.stages.size(); ++g) {
    const auto& stage = s.stages[g];
    auto maxima = [&](double a, double b) {
      const auto bm = branch_maxima(s.quantizers, ratio, a, b);
      return std::pair{bm.branch0, bm.branch1};
    };
    auto opt = maximize_over_threshold(
        stage, [&](std::size_t i) { return maxima(stage.a[i], stage.b[i]); },
        [&](double t) { return maxima(stage.rate_a(t), stage.rate_b(t)); });
    // tree threshold for this gamma as an extra candidate
    const double t_tree = s.tree[g].opt.t;
    const auto at_tree = maxima(stage.rate_a(t_tree), stage.rate_b(t_tree));
    if (std::min(at_tree.first, at_tree.second) > opt.value()) {
      opt = {t_tree, at_tree.first, at_tree.second, s.tree[g].opt.at_boundary};
    }
    if (!best || opt.value() > best->second.value() + kTieTolerance) best = {g, opt};
  }
  const auto& stage = s.stages[best->first];
  const auto& opt = best->second;
  const auto bm = branch_maxima(s.quantizers, ratio, stage.rate_a(opt.t), stage.rate_b(opt.t));
  ExponentReport report;
  report.architecture = ArchitectureKind::DaisyRestricted;
  fill_two_stage_report(report, r, stage, s.quantizers[bm.delta0].q, s.quantizers[bm.delta1].q, opt);
  return report;
}

}  // namespace detail

/// Bayesian exponent of the restricted-feedback daisy chain with first-stage
/// fraction r:
///   -(1-r) sup_{gamma, delta0, delta1, t} min{ Lambda_0^*(delta0, r/(1-r) Lambda_1^*(gamma, t)),
///                                           Lambda_1^*(delta1, -r/(1-r) Lambda_0^*(gamma, t)) }
/// with t ranging over [E_0 Z, E_1 Z] of gamma.
inline ExponentReport exponent_daisy_restricted(const HypothesisModel& m, double r, int d,
                                                QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  detail::require_stage_fraction(r);
  return detail::daisy_report(detail::TwoStageSearch(m, r, d, search), r);
}

/// Same objective with delta0 = delta1: second-stage sensors ignore U, which
/// makes the network a two-level tree.
inline ExponentReport exponent_tree(const HypothesisModel& m, double r, int d,
                                    QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  detail::require_stage_fraction(r);
  return detail::tree_report(detail::TwoStageSearch(m, r, d, search), r);
}

struct TwoStageExponents {
  ExponentReport daisy;
  ExponentReport tree;
};

/// Daisy-chain and tree exponents from one shared search.
inline TwoStageExponents exponent_two_stage(const HypothesisModel& m, double r, int d,
                                            QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  detail::require_stage_fraction(r);
  const detail::TwoStageSearch s(m, r, d, search);
  return {detail::daisy_report(s, r), detail::tree_report(s, r)};
}

/// Dispatches on the architecture kind.
inline ExponentReport exponent(const HypothesisModel& m, const ArchitectureSpec& spec) {
  validate_spec(spec);
  const int d = spec.message_alphabet_size;
  switch (spec.kind) {
    case ArchitectureKind::Parallel1:
      return exponent_parallel(m, d, 1, spec.formulation, spec.search);
    case ArchitectureKind::Parallel2:
      return exponent_parallel(m, d, 2, spec.formulation, spec.search);
    case ArchitectureKind::DaisyRestricted:
    case ArchitectureKind::Tree:
      if (spec.formulation != Formulation::Bayesian) {
        throw Error(ErrorKind::Unsupported, std::string(to_string(spec.kind)) +
                                                " is only characterized under the Bayesian formulation");
      }
      return spec.kind == ArchitectureKind::Tree ? exponent_tree(m, *spec.r, d, spec.search)
                                                 : exponent_daisy_restricted(m, *spec.r, d, spec.search);
    default:
      return exponent_feedback_equivalent(m, d, spec.kind, spec.formulation, spec.search);
  }
}

struct SymmetricRateReport {
  bool applies = false;
  Quantizer witness;         // delta achieving the tree optimum
  double common_value = 0.0; // -(1-r) sup_{gamma,delta} rate0(delta, r/(1-r) Lambda_1^*(gamma, 0)), if applies
  double daisy_exponent = 0.0;
  double tree_exponent = 0.0;
};

/// Tests whether the tree-optimal delta has sign-symmetric rate functions,
/// Lambda_1^*(delta, t) = Lambda_0^*(delta, -t) on a t-grid. When it does,
/// feedback cannot help and both exponents reduce to the common value.
inline SymmetricRateReport check_symmetric_rate_condition(const HypothesisModel& m, double r, int d,
                                                          QuantizerSearch search = QuantizerSearch::LlrMonotone,
                                                          double tol = 1e-9) {
  const auto both = exponent_two_stage(m, r, d, search);
  SymmetricRateReport out;
  out.daisy_exponent = both.daisy.exponent;
  out.tree_exponent = both.tree.exponent;
  out.witness = *both.tree.delta0;
  const auto im = induce(m, out.witness);
  const double span = std::max(std::abs(im.min_llr()), std::abs(im.max_llr())) + 1.0;
  out.applies = true;
  constexpr int kPoints = 201;
  for (int i = 0; i < kPoints && out.applies; ++i) {
    const double t = -span + 2.0 * span * i / (kPoints - 1);
    const double lhs = rate_function(im, Hypothesis::H1, t).value;
    const double rhs = rate_function(im, Hypothesis::H0, -t).value;
    const bool both_inf = std::isinf(lhs) && std::isinf(rhs);
    if (!both_inf && !(std::abs(lhs - rhs) <= tol)) out.applies = false;
  }
  if (out.applies) {
    const double ratio = detail::stage_ratio(r);
    double best = -numeric::kInf;
    const auto cands = detail::candidates(m, d, search);
    for (const auto& g : cands) {
      const double a0 = rate_function(g.im, Hypothesis::H1, 0.0).value;
      for (const auto& dl : cands) best = std::max(best, detail::branch0_value(dl.im, ratio, a0));
    }
    out.common_value = -(1.0 - r) * best;
    if (out.common_value == 0.0) out.common_value = 0.0;
  }
  return out;
}

inline bool is_degenerate(const HypothesisModel& m) {
  for (std::size_t x = 0; x < m.alphabet_size(); ++x) {
    if (std::abs(m.pmf0[x] - m.pmf1[x]) > kProbabilityTolerance) return false;
  }
  return true;
}

struct OrderingReport {
  double tree = 0.0;
  double daisy = 0.0;
  double parallel = 0.0;
  bool degenerate = false;
  bool holds = false;
};

inline constexpr double kStrictGap = 1e-9;

/// Checks tree >= daisy > parallel (strict by kStrictGap unless pmf0 == pmf1).
/// A violation means the search is broken, so it throws OrderingViolation.
inline OrderingReport check_ordering(const HypothesisModel& m, double r, int d,
                                     QuantizerSearch search = QuantizerSearch::LlrMonotone) {
  const auto both = exponent_two_stage(m, r, d, search);
  OrderingReport out;
  out.tree = both.tree.exponent;
  out.daisy = both.daisy.exponent;
  out.parallel = exponent_parallel(m, d, 1, Formulation::Bayesian, search).exponent;
  out.degenerate = is_degenerate(m);
  const bool weak = out.tree >= out.daisy && out.daisy >= out.parallel;
  out.holds = out.degenerate ? weak : (weak && out.daisy - out.parallel >= kStrictGap);
  if (!out.holds) {
    throw Error(ErrorKind::OrderingViolation,
                "expected tree >= daisy > parallel, got " + std::to_string(out.tree) + ", " +
                    std::to_string(out.daisy) + ", " + std::to_string(out.parallel));
  }
  return out;
}

}  // namespace fbdetect

#endif  // FBDETECT_ARCHITECTURES_HPP
