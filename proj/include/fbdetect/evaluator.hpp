#ifndef FBDETECT_EVALUATOR_HPP
#define FBDETECT_EVALUATOR_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fbdetect/architectures.hpp"
#include "fbdetect/error.hpp"
#include "fbdetect/exponents.hpp"
#include "fbdetect/model.hpp"
#include "fbdetect/numeric.hpp"

namespace fbdetect {

struct Priors {
  double pi0 = 0.5;
  double pi1 = 0.5;
};

inline void validate_priors(const Priors& p) {
  if (!(p.pi0 > 0.0 && p.pi1 > 0.0) || std::abs(p.pi0 + p.pi1 - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorKind::InvalidArgument, "priors must be positive and sum to 1");
  }
}

/// One concrete n-sensor strategy. All sensors of a stage share a quantizer.
///
/// Parallel kinds: every sensor uses `first_stage` (and `second_stage[0]` as
/// the second message for parallel-2); m == n.
/// Two-stage kinds (daisy-restricted, tree, daisy-full): sensors 1..m use
/// `first_stage`; the aggregator sets U = 1 iff the summed first-stage LLR
/// exceeds m * aggregator_threshold; sensors m+1..n use second_stage[U].
/// Feedback kinds: the feedback a sensor receives is summarized by the same
/// threshold rule applied to the first messages it is shown, and that bit
/// picks its second quantizer (one-message sequential: its only quantizer).
/// The fusion center always applies the Bayes-optimal LLR test.
struct Strategy {
  ArchitectureKind architecture = ArchitectureKind::Parallel1;
  int n = 1;
  int m = 1;
  Quantizer first_stage;
  std::array<Quantizer, 2> second_stage;
  double aggregator_threshold = 0.0;
  Priors priors;
};

inline Strategy parallel_strategy(const Quantizer& q, int n, Priors priors = {}) {
  Strategy s;
  s.architecture = ArchitectureKind::Parallel1;
  s.n = n;
  s.m = n;
  s.first_stage = q;
  s.second_stage = {q, q};
  s.priors = priors;
  return s;
}

inline Strategy two_stage_strategy(ArchitectureKind kind, int n, int m, const Quantizer& gamma,
                                   const Quantizer& delta0, const Quantizer& delta1, double t,
                                   Priors priors = {}) {
  Strategy s;
  s.architecture = kind;
  s.n = n;
  s.m = m;
  s.first_stage = gamma;
  s.second_stage = {delta0, delta1};
  s.aggregator_threshold = t;
  s.priors = priors;
  return s;
}

inline bool is_two_stage(ArchitectureKind kind) {
  return kind == ArchitectureKind::DaisyRestricted || kind == ArchitectureKind::Tree ||
         kind == ArchitectureKind::DaisyFull;
}

inline void validate_strategy(const HypothesisModel& model, const Strategy& s) {
  validate_priors(s.priors);
  if (s.n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  if (is_two_stage(s.architecture)) {
    if (s.m < 0 || s.m > s.n) throw Error(ErrorKind::InvalidArgument, "need 0 <= m <= n");
  } else if (s.m != s.n) {
    throw Error(ErrorKind::InvalidArgument, "m must equal n outside the two-stage architectures");
  }
  if (s.architecture == ArchitectureKind::Tree && s.second_stage[0] != s.second_stage[1]) {
    throw Error(ErrorKind::InvalidArgument, "tree second-stage sensors cannot depend on U");
  }
  for (const Quantizer* q : {&s.first_stage, &s.second_stage[0], &s.second_stage[1]}) {
    if (q->map.size() != model.alphabet_size()) {
      throw Error(ErrorKind::ShapeMismatch, "strategy quantizer does not match the model alphabet");
    }
  }
}

enum class EstimateMethod { Exact, MonteCarlo };

inline std::string_view to_string(EstimateMethod m) { return m == EstimateMethod::Exact ? "exact" : "monte_carlo"; }

struct ErrorEstimate {
  int n = 0;
  double p_e0 = 0.0;  // P_0(decide 1)
  double p_e1 = 0.0;  // P_1(decide 0)
  double p_e = 0.0;   // pi0 p_e0 + pi1 p_e1
  double log_p_e = 0.0;
  EstimateMethod method = EstimateMethod::Exact;
  double ci_halfwidth = 0.0;  // 95% normal approximation, Monte Carlo only
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;

  double log_pe_over_n() const { return log_p_e / n; }
};

inline constexpr double kClassBudget = 1e7;

/// Number of count vectors of n items over k cells, C(n + k - 1, k - 1).
inline double type_class_count(int n, std::size_t k) {
  if (k == 0) return n == 0 ? 1.0 : 0.0;
  return std::round(std::exp(std::lgamma(n + static_cast<double>(k)) - std::lgamma(n + 1.0) -
                             std::lgamma(static_cast<double>(k))));
}

/// Calls fn(counts) for each count vector of n items over k cells, in
/// lexicographic order of the counts.
template <typename F>
void for_each_type_class(int n, std::size_t k, F&& fn) {
  std::vector<int> counts(k, 0);
  if (k == 0) return;
  std::function<void(std::size_t, int)> rec = [&](std::size_t cell, int left) {
    if (cell + 1 == k) {
      counts[cell] = left;
      fn(static_cast<const std::vector<int>&>(counts));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[cell] = c;
      rec(cell + 1, left - c);
    }
  };
  rec(0, n);
}

namespace detail {

inline double log_multinomial(const std::vector<int>& counts) {
  int n = 0;
  double out = 0.0;
  for (int c : counts) {
    n += c;
    out -= std::lgamma(c + 1.0);
  }
  return out + std::lgamma(n + 1.0);
}

inline double class_log_prob(const std::vector<int>& counts, const std::vector<double>& log_q, double log_coef) {
  double out = log_coef;
  for (std::size_t y = 0; y < counts.size(); ++y) {
    if (counts[y] > 0) out += counts[y] * log_q[y];
  }
  return out;
}

inline std::vector<double> logs(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log(v[i]);
  return out;
}

inline double llr_sum(const std::vector<int>& counts, const std::vector<double>& llr) {
  double out = 0.0;
  for (std::size_t y = 0; y < counts.size(); ++y) {
    if (counts[y] > 0) out += counts[y] * llr[y];
  }
  return out;
}

inline void require_budget(double classes, int n, const std::string& what, std::size_t k) {
  if (classes <= kClassBudget) return;
  int max_n = 0;
  while (type_class_count(max_n + 1, k) <= kClassBudget) ++max_n;
  throw Error(ErrorKind::TooLarge, what + " at n=" + std::to_string(n) + " needs " +
                                       std::to_string(static_cast<long long>(classes)) +
                                       " type classes (budget 1e7); largest feasible n is " +
                                       std::to_string(max_n));
}

inline double log_prior_ratio(const Priors& p) { return std::log(p.pi0) - std::log(p.pi1); }

// Log-domain error accumulators for the two hypotheses.
struct ErrorSums {
  numeric::LogSumAccumulator miss0;  // mass of "decide 1" under H0
  numeric::LogSumAccumulator miss1;  // mass of "decide 0" under H1

  ErrorEstimate finish(int n, const Priors& pr) const {
    ErrorEstimate e;
    e.n = n;
    e.method = EstimateMethod::Exact;
    const double l0 = miss0.log_value();
    const double l1 = miss1.log_value();
    e.p_e0 = std::exp(l0);
    e.p_e1 = std::exp(l1);
    const std::array<double, 2> terms{std::log(pr.pi0) + l0, std::log(pr.pi1) + l1};
    e.log_p_e = numeric::log_sum_exp(terms);
    e.p_e = std::exp(e.log_p_e);
    return e;
  }
};

}  // namespace detail

/// Aggregator bit of a first stage: 1 iff the summed LLR of the messages
/// exceeds (number of messages) * t. Shared by the exact and sampled paths.
inline int aggregator_bit(const std::vector<int>& counts, const std::vector<double>& llr, double t) {
  int m = 0;
  for (int c : counts) m += c;
  return detail::llr_sum(counts, llr) > m * t ? 1 : 0;
}

/// Exact Bayes error of n sensors sharing quantizer q, by summing over the
/// multinomial type classes of the message counts.
inline ErrorEstimate exact_error_parallel(const HypothesisModel& model, const Quantizer& q, int n,
                                          Priors priors = {}) {
  validate_priors(priors);
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  const auto im = induce(model, q);
  detail::require_budget(type_class_count(n, im.size()), n, "parallel exact evaluation", im.size());
  const auto lq0 = detail::logs(im.q0);
  const auto lq1 = detail::logs(im.q1);
  const double threshold = detail::log_prior_ratio(priors);
  detail::ErrorSums sums;
  for_each_type_class(n, im.size(), [&](const std::vector<int>& c) {
    const double coef = detail::log_multinomial(c);
    if (detail::llr_sum(c, im.llr) > threshold) {
      sums.miss0.add(detail::class_log_prob(c, lq0, coef));
    } else {
      sums.miss1.add(detail::class_log_prob(c, lq1, coef));
    }
  });
  return sums.finish(n, priors);
}

namespace detail {

struct FirstStageLaw {
  // log P_j(U = u), indexed [j][u]
  std::array<std::array<double, 2>, 2> log_pu{};
};

inline FirstStageLaw first_stage_law(const InducedModel& gamma, int m, double t) {
  const auto lq0 = logs(gamma.q0);
  const auto lq1 = logs(gamma.q1);
  std::array<std::array<numeric::LogSumAccumulator, 2>, 2> acc;
  for_each_type_class(m, gamma.size(), [&](const std::vector<int>& c) {
    const double coef = log_multinomial(c);
    const int u = aggregator_bit(c, gamma.llr, t);
    acc[0][static_cast<std::size_t>(u)].add(class_log_prob(c, lq0, coef));
    acc[1][static_cast<std::size_t>(u)].add(class_log_prob(c, lq1, coef));
  });
  FirstStageLaw law;
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t u = 0; u < 2; ++u) law.log_pu[j][u] = acc[j][u].log_value();
  }
  return law;
}

// Fusion rule when only U and the second-stage counts reach the fusion center.
inline bool restricted_fusion_decides_one(const FirstStageLaw& law, int u, const std::vector<int>& counts,
                                          const InducedModel& delta, double log_prior_ratio) {
  const auto uu = static_cast<std::size_t>(u);
  return law.log_pu[1][uu] - law.log_pu[0][uu] + llr_sum(counts, delta.llr) > log_prior_ratio;
}

// Fusion rule when every first-stage message also reaches the fusion center.
inline bool full_fusion_decides_one(const std::vector<int>& first, const InducedModel& gamma,
                                    const std::vector<int>& second, const InducedModel& delta,
                                    double log_prior_ratio) {
  return llr_sum(first, gamma.llr) + llr_sum(second, delta.llr) > log_prior_ratio;
}

}  // namespace detail

/// Exact Bayes error of a two-stage strategy (daisy-restricted, tree, or
/// daisy-full). The law of U is computed from the first-stage type classes;
/// for each u the second stage is enumerated under second_stage[u]. With a
/// restricted aggregator the fusion LLR includes log P_1(U=u)/P_0(U=u).
inline ErrorEstimate exact_error_daisy(const HypothesisModel& model, const Strategy& s) {
  validate_strategy(model, s);
  if (!is_two_stage(s.architecture)) {
    throw Error(ErrorKind::InvalidArgument, "exact_error_daisy needs a two-stage strategy");
  }
  const auto gamma = induce(model, s.first_stage);
  const std::array<InducedModel, 2> deltas{induce(model, s.second_stage[0]), induce(model, s.second_stage[1])};
  const int l = s.n - s.m;
  const double first_classes = type_class_count(s.m, gamma.size());
  detail::require_budget(first_classes, s.m, "first-stage exact evaluation", gamma.size());
  for (const auto& d : deltas) {
    const double second = type_class_count(l, d.size());
    detail::require_budget(second, l, "second-stage exact evaluation", d.size());
    if (s.architecture == ArchitectureKind::DaisyFull) {
      detail::require_budget(first_classes * second, s.n, "daisy-full exact evaluation", d.size());
    }
  }
  const double threshold = detail::log_prior_ratio(s.priors);
  detail::ErrorSums sums;

  if (s.architecture == ArchitectureKind::DaisyFull) {
    const auto g0 = detail::logs(gamma.q0);
    const auto g1 = detail::logs(gamma.q1);
    for_each_type_class(s.m, gamma.size(), [&](const std::vector<int>& first) {
      const double coef = detail::log_multinomial(first);
      const double f0 = detail::class_log_prob(first, g0, coef);
      const double f1 = detail::class_log_prob(first, g1, coef);
      const auto& delta = deltas[static_cast<std::size_t>(aggregator_bit(first, gamma.llr, s.aggregator_threshold))];
      const auto d0 = detail::logs(delta.q0);
      const auto d1 = detail::logs(delta.q1);
      for_each_type_class(l, delta.size(), [&](const std::vector<int>& second) {
        const double c2 = detail::log_multinomial(second);
        if (detail::full_fusion_decides_one(first, gamma, second, delta, threshold)) {
          sums.miss0.add(f0 + detail::class_log_prob(second, d0, c2));
        } else {
          sums.miss1.add(f1 + detail::class_log_prob(second, d1, c2));
        }
      });
    });
    return sums.finish(s.n, s.priors);
  }

  const auto law = detail::first_stage_law(gamma, s.m, s.aggregator_threshold);
  for (int u = 0; u < 2; ++u) {
    const auto uu = static_cast<std::size_t>(u);
    if (law.log_pu[0][uu] == -numeric::kInf) continue;  // U never takes this value
    const auto& delta = deltas[uu];
    const auto d0 = detail::logs(delta.q0);
    const auto d1 = detail::logs(delta.q1);
    for_each_type_class(l, delta.size(), [&](const std::vector<int>& c) {
      const double coef = detail::log_multinomial(c);
      if (detail::restricted_fusion_decides_one(law, u, c, delta, threshold)) {
        sums.miss0.add(law.log_pu[0][uu] + detail::class_log_prob(c, d0, coef));
      } else {
        sums.miss1.add(law.log_pu[1][uu] + detail::class_log_prob(c, d1, coef));
      }
    });
  }
  return sums.finish(s.n, s.priors);
}

namespace detail {

// Message protocol of a strategy on one observation vector; returns the fusion decision.
class Protocol {
 public:
  Protocol(const HypothesisModel& model, const Strategy& s) : s_(s), threshold_(log_prior_ratio(s.priors)) {
    gamma_ = induce(model, s.first_stage);
    gamma_index_ = label_index(gamma_, s.first_stage);
    for (std::size_t u = 0; u < 2; ++u) {
      delta_[u] = induce(model, s.second_stage[u]);
      delta_index_[u] = label_index(delta_[u], s.second_stage[u]);
      pair_[u] = induce(model, product_quantizer(s.first_stage, s.second_stage[u]));
      pair_index_[u] = label_index(pair_[u], product_quantizer(s.first_stage, s.second_stage[u]));
    }
    if (s.architecture == ArchitectureKind::DaisyRestricted || s.architecture == ArchitectureKind::Tree) {
      law_ = first_stage_law(gamma_, s.m, s.aggregator_threshold);
    }
  }

  int decide(const std::vector<int>& xs) const {
    switch (s_.architecture) {
      case ArchitectureKind::Parallel1: return decide_parallel(xs);
      case ArchitectureKind::Parallel2: return decide_parallel_pairs(xs);
      case ArchitectureKind::DaisyRestricted:
      case ArchitectureKind::Tree:
      case ArchitectureKind::DaisyFull: return decide_two_stage(xs);
      case ArchitectureKind::SequentialFeedback2:
      case ArchitectureKind::FullFeedback2:
      case ArchitectureKind::RestrictedFeedback2: return decide_two_message_feedback(xs);
      case ArchitectureKind::OneMsgSequential: return decide_one_message_sequential(xs);
    }
    return 0;
  }

 private:
  // Position of each observation symbol's message inside the induced model.
  static std::vector<int> label_index(const InducedModel& im, const Quantizer& q) {
    std::vector<int> pos(static_cast<std::size_t>(q.message_alphabet_size), -1);
    for (std::size_t i = 0; i < im.labels.size(); ++i) pos[static_cast<std::size_t>(im.labels[i])] = static_cast<int>(i);
    std::vector<int> out(q.map.size(), -1);
    for (std::size_t x = 0; x < q.map.size(); ++x) out[x] = pos[static_cast<std::size_t>(q.map[x])];
    return out;
  }

  static void count(std::vector<int>& counts, const std::vector<int>& index, int x) {
    ++counts[static_cast<std::size_t>(index[static_cast<std::size_t>(x)])];
  }

  int decide_parallel(const std::vector<int>& xs) const {
    std::vector<int> c(gamma_.size(), 0);
    for (int x : xs) count(c, gamma_index_, x);
    return llr_sum(c, gamma_.llr) > threshold_ ? 1 : 0;
  }

  int decide_parallel_pairs(const std::vector<int>& xs) const {
    std::vector<int> c(pair_[0].size(), 0);
    for (int x : xs) count(c, pair_index_[0], x);
    return llr_sum(c, pair_[0].llr) > threshold_ ? 1 : 0;
  }

  int decide_two_stage(const std::vector<int>& xs) const {
    std::vector<int> first(gamma_.size(), 0);
    for (int k = 0; k < s_.m; ++k) count(first, gamma_index_, xs[static_cast<std::size_t>(k)]);
    const int u = aggregator_bit(first, gamma_.llr, s_.aggregator_threshold);
    const auto uu = static_cast<std::size_t>(u);
    std::vector<int> second(delta_[uu].size(), 0);
    for (int k = s_.m; k < s_.n; ++k) count(second, delta_index_[uu], xs[static_cast<std::size_t>(k)]);
    if (s_.architecture == ArchitectureKind::DaisyFull) {
      return full_fusion_decides_one(first, gamma_, second, delta_[uu], threshold_) ? 1 : 0;
    }
    return restricted_fusion_decides_one(law_, u, second, delta_[uu], threshold_) ? 1 : 0;
  }

  // Summary bit of a set of first messages given by their counts.
  int feedback_bit(const std::vector<int>& shown) const { return aggregator_bit(shown, gamma_.llr, s_.aggregator_threshold); }

  int decide_two_message_feedback(const std::vector<int>& xs) const {
    std::vector<int> all(gamma_.size(), 0);
    for (int x : xs) count(all, gamma_index_, x);
    std::array<std::vector<int>, 2> pairs{std::vector<int>(pair_[0].size(), 0), std::vector<int>(pair_[1].size(), 0)};
    std::vector<int> before(gamma_.size(), 0);
    for (int x : xs) {
      const auto y = static_cast<std::size_t>(gamma_index_[static_cast<std::size_t>(x)]);
      int w = 0;
      if (s_.architecture == ArchitectureKind::SequentialFeedback2) {
        w = feedback_bit(before);
      } else {
        auto others = all;
        --others[y];
        w = feedback_bit(others);
      }
      ++before[y];
      const auto ww = static_cast<std::size_t>(w);
      count(pairs[ww], pair_index_[ww], x);
    }
    const double llr = llr_sum(pairs[0], pair_[0].llr) + llr_sum(pairs[1], pair_[1].llr);
    return llr > threshold_ ? 1 : 0;
  }

  // Sensor k quantizes with second_stage[bit of the messages before it]; the
  // bit is computed from the LLRs of the messages as actually sent.
  int decide_one_message_sequential(const std::vector<int>& xs) const {
    std::array<std::vector<int>, 2> sent{std::vector<int>(delta_[0].size(), 0), std::vector<int>(delta_[1].size(), 0)};
    int shown = 0;
    for (int x : xs) {
      const double llr = llr_sum(sent[0], delta_[0].llr) + llr_sum(sent[1], delta_[1].llr);
      const auto w = static_cast<std::size_t>(llr > shown * s_.aggregator_threshold ? 1 : 0);
      count(sent[w], delta_index_[w], x);
      ++shown;
    }
    const double llr = llr_sum(sent[0], delta_[0].llr) + llr_sum(sent[1], delta_[1].llr);
    return llr > threshold_ ? 1 : 0;
  }

  const Strategy& s_;
  double threshold_;
  InducedModel gamma_;
  std::vector<int> gamma_index_;
  std::array<InducedModel, 2> delta_;
  std::array<std::vector<int>, 2> delta_index_;
  std::array<InducedModel, 2> pair_;
  std::array<std::vector<int>, 2> pair_index_;
  FirstStageLaw law_;
};

}  // namespace detail

/// Exact error of any architecture by enumerating every observation vector
/// (K^n of them) and running the message protocol. Intended for small n.
inline ErrorEstimate exact_error_enumerate(const HypothesisModel& model, const Strategy& s) {
  validate_strategy(model, s);
  const std::size_t k = model.alphabet_size();
  if (std::pow(static_cast<double>(k), s.n) > kClassBudget) {
    int feasible = 0;
    while (std::pow(static_cast<double>(k), feasible + 1) <= kClassBudget) ++feasible;
    throw Error(ErrorKind::TooLarge, "observation enumeration at n=" + std::to_string(s.n) +
                                         " exceeds 1e7 vectors; largest feasible n is " + std::to_string(feasible));
  }
  const detail::Protocol protocol(model, s);
  const auto l0 = detail::logs(model.pmf0);
  const auto l1 = detail::logs(model.pmf1);
  detail::ErrorSums sums;
  std::vector<int> xs(static_cast<std::size_t>(s.n), 0);
  while (true) {
    double p0 = 0.0;
    double p1 = 0.0;
    for (int x : xs) {
      p0 += l0[static_cast<std::size_t>(x)];
      p1 += l1[static_cast<std::size_t>(x)];
    }
    if (p0 != -numeric::kInf) {
      if (protocol.decide(xs) == 1) {
        sums.miss0.add(p0);
      } else {
        sums.miss1.add(p1);
      }
    }
    std::size_t pos = 0;
    while (pos < xs.size() && ++xs[pos] == static_cast<int>(k)) xs[pos++] = 0;
    if (pos == xs.size()) break;
  }
  return sums.finish(s.n, s.priors);
}

/// Exact error through the cheapest available route for the architecture.
inline ErrorEstimate exact_error(const HypothesisModel& model, const Strategy& s) {
  validate_strategy(model, s);
  switch (s.architecture) {
    case ArchitectureKind::Parallel1:
      return exact_error_parallel(model, s.first_stage, s.n, s.priors);
    case ArchitectureKind::Parallel2:
      return exact_error_parallel(model, product_quantizer(s.first_stage, s.second_stage[0]), s.n, s.priors);
    case ArchitectureKind::DaisyRestricted:
    case ArchitectureKind::Tree:
    case ArchitectureKind::DaisyFull:
      return exact_error_daisy(model, s);
    default:
      return exact_error_enumerate(model, s);
  }
}

/// Counter-based generator: the uniform for (seed, hypothesis, sample, sensor)
/// is a pure function of the key, so any batching of samples reproduces it.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double counter_uniform(std::uint64_t seed, int hypothesis, std::uint64_t sample, std::uint64_t sensor) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(hypothesis));
  h = mix64(h ^ sample);
  h = mix64(h ^ sensor);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Monte Carlo estimate of the error probabilities. Observations are drawn
/// i.i.d. per hypothesis by inverting the cdf of counter-based uniforms and
/// pushed through the full protocol of the strategy.
inline ErrorEstimate simulate(const HypothesisModel& model, const Strategy& s, std::uint64_t samples,
                              std::uint64_t seed) {
  validate_strategy(model, s);
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "samples must be at least 1");
  const detail::Protocol protocol(model, s);
  std::array<std::uint64_t, 2> errors{0, 0};
  std::vector<int> xs(static_cast<std::size_t>(s.n));
  for (int j = 0; j < 2; ++j) {
    const auto& pmf = model.pmf(static_cast<Hypothesis>(j));
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t x = 0; x < pmf.size(); ++x) {
      acc += pmf[x];
      cdf[x] = acc;
      if (pmf[x] > 0.0) last_positive = x;
    }
    for (std::uint64_t i = 0; i < samples; ++i) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double u = counter_uniform(seed, j, i, k);
        std::size_t x = 0;
        while (x < last_positive && (u >= cdf[x] || pmf[x] == 0.0)) ++x;
        xs[k] = static_cast<int>(x);
      }
      if (protocol.decide(xs) != j) ++errors[static_cast<std::size_t>(j)];
    }
  }
  ErrorEstimate e;
  e.n = s.n;
  e.method = EstimateMethod::MonteCarlo;
  e.seed = seed;
  e.samples = samples;
  const double count = static_cast<double>(samples);
  e.p_e0 = static_cast<double>(errors[0]) / count;
  e.p_e1 = static_cast<double>(errors[1]) / count;
  e.p_e = s.priors.pi0 * e.p_e0 + s.priors.pi1 * e.p_e1;
  e.log_p_e = std::log(e.p_e);
  const double var = s.priors.pi0 * s.priors.pi0 * e.p_e0 * (1.0 - e.p_e0) / count +
                     s.priors.pi1 * s.priors.pi1 * e.p_e1 * (1.0 - e.p_e1) / count;
  e.ci_halfwidth = 1.96 * std::sqrt(var);
  return e;
}

struct FitPoint {
  int n;
  ErrorEstimate estimate;
};

struct FitReport {
  std::vector<FitPoint> points;
  double last_log_pe_over_n = 0.0;
  double slope = 0.0;  // least-squares slope of log p_e against n
};

/// Exact (1/n) log p_e along an n-grid plus the least-squares slope of
/// log p_e versus n.
inline FitReport fit_exponent(const HypothesisModel& model, const std::function<Strategy(int)>& strategy_for_n,
                              const std::vector<int>& n_grid) {
  if (n_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty n grid");
  FitReport report;
  for (int n : n_grid) report.points.push_back({n, exact_error(model, strategy_for_n(n))});
  report.last_log_pe_over_n = report.points.back().estimate.log_pe_over_n();
  if (report.points.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : report.points) {
      mx += p.n;
      my += p.estimate.log_p_e;
    }
    mx /= static_cast<double>(report.points.size());
    my /= static_cast<double>(report.points.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& p : report.points) {
      sxy += (p.n - mx) * (p.estimate.log_p_e - my);
      sxx += (p.n - mx) * (p.n - mx);
    }
    report.slope = sxy / sxx;
  } else {
    report.slope = report.last_log_pe_over_n;
  }
  return report;
}

/// LLR law of the complete fusion-center observation of a strategy, as an
/// induced model over its atoms (type classes, paired with U when the fusion
/// center only sees the aggregator bit).
inline InducedModel full_llr_model(const HypothesisModel& model, const Strategy& s) {
  validate_strategy(model, s);
  std::vector<double> mass0;
  std::vector<double> mass1;
  auto push_classes = [&](const InducedModel& im, int n, double log_w0, double log_w1) {
    detail::require_budget(type_class_count(n, im.size()), n, "LLR law", im.size());
    const auto l0 = detail::logs(im.q0);
    const auto l1 = detail::logs(im.q1);
    for_each_type_class(n, im.size(), [&](const std::vector<int>& c) {
      const double coef = detail::log_multinomial(c);
      mass0.push_back(std::exp(log_w0 + detail::class_log_prob(c, l0, coef)));
      mass1.push_back(std::exp(log_w1 + detail::class_log_prob(c, l1, coef)));
    });
  };
  switch (s.architecture) {
    case ArchitectureKind::Parallel1:
      push_classes(induce(model, s.first_stage), s.n, 0.0, 0.0);
      break;
    case ArchitectureKind::Parallel2:
      push_classes(induce(model, product_quantizer(s.first_stage, s.second_stage[0])), s.n, 0.0, 0.0);
      break;
    case ArchitectureKind::DaisyRestricted:
    case ArchitectureKind::Tree: {
      const auto law = detail::first_stage_law(induce(model, s.first_stage), s.m, s.aggregator_threshold);
      for (std::size_t u = 0; u < 2; ++u) {
        if (law.log_pu[0][u] == -numeric::kInf) continue;
        push_classes(induce(model, s.second_stage[u]), s.n - s.m, law.log_pu[0][u], law.log_pu[1][u]);
      }
      break;
    }
    default:
      throw Error(ErrorKind::Unsupported, "LLR law not available for " + std::string(to_string(s.architecture)));
  }
  return InducedModel::from_masses(mass0, mass1);
}

struct SgbBound {
  double bound;    // lower bound on max(P_e0, P_e1) over every test
  double s_star;   // stationary point of Lambda in (0, 1)
  double lambda;   // Lambda(s*)
  double lambda2;  // Lambda''(s*)
  bool degenerate; // Z == 0: bound is exp(0) / 4
};

/// max(P_e0, P_e1) >= exp(Lambda(s*) - sqrt(2 Lambda''(s*))) / 4 where Lambda is
/// the log-MGF of the complete LLR under H0 and Lambda'(s*) = 0.
inline SgbBound sgb_lower_bound(const InducedModel& full) {
  if (is_degenerate(full)) return {0.25, 0.5, 0.0, 0.0, true};
  auto eval = [&](double s) {
    const auto d = log_mgf_derivs(full, Hypothesis::H0, s);
    return std::pair{d.first, d.second};
  };
  const double s_star = numeric::safeguarded_newton(eval, 0.0, 1.0, 1e-12).root;
  const auto d = log_mgf_derivs(full, Hypothesis::H0, s_star);
  return {0.25 * std::exp(d.value - std::sqrt(2.0 * d.second)), s_star, d.value, d.second, false};
}

inline bool satisfies_sgb(const SgbBound& b, const ErrorEstimate& e) {
  return std::max(e.p_e0, e.p_e1) >= b.bound;
}

}  // namespace fbdetect

#endif  // FBDETECT_EVALUATOR_HPP
