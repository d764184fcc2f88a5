#ifndef FBDETECT_MODEL_HPP
#define FBDETECT_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fbdetect/error.hpp"

namespace fbdetect {

enum class Hypothesis : int { H0 = 0, H1 = 1 };

/// Finite-alphabet binary hypothesis model: one pmf per hypothesis over the
/// same observation alphabet. Construct through `validate_model` (or
/// `HypothesisModel::make`) so the invariants below hold:
///   - each pmf is nonnegative and sums to one within 1e-12;
///   - pmf0[x] == 0 exactly when pmf1[x] == 0 (mutual absolute continuity).
struct HypothesisModel {
  std::vector<double> pmf0;
  std::vector<double> pmf1;

  std::size_t alphabet_size() const { return pmf0.size(); }
  const std::vector<double>& pmf(Hypothesis j) const { return j == Hypothesis::H0 ? pmf0 : pmf1; }

  static HypothesisModel make(std::vector<double> pmf0, std::vector<double> pmf1);
};

inline constexpr double kProbabilityTolerance = 1e-12;

inline HypothesisModel validate_model(const HypothesisModel& m) {
  if (m.pmf0.empty() || m.pmf0.size() != m.pmf1.size()) {
    throw Error(ErrorKind::ShapeMismatch, "pmf0 and pmf1 must be nonempty and of equal length");
  }
  for (int j = 0; j < 2; ++j) {
    const auto& p = j == 0 ? m.pmf0 : m.pmf1;
    double total = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if (!(p[x] >= 0.0) || !std::isfinite(p[x])) {
        throw Error(ErrorKind::NotAProbability,
                    "pmf" + std::to_string(j) + "[" + std::to_string(x) + "] is negative or not finite");
      }
      total += p[x];
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "pmf" << j << " sums to " << total << ", not 1";
      throw Error(ErrorKind::NotAProbability, os.str());
    }
  }
  for (std::size_t x = 0; x < m.pmf0.size(); ++x) {
    if ((m.pmf0[x] == 0.0) != (m.pmf1[x] == 0.0)) {
      throw Error(ErrorKind::SupportMismatch,
                  "H0 and H1 are not mutually absolutely continuous: symbol " + std::to_string(x) +
                      " has zero probability under exactly one hypothesis");
    }
  }
  return m;
}

inline HypothesisModel HypothesisModel::make(std::vector<double> pmf0, std::vector<double> pmf1) {
  return validate_model(HypothesisModel{std::move(pmf0), std::move(pmf1)});
}

/// Deterministic map from observation symbols to message labels.
struct Quantizer {
  std::vector<int> map;
  int message_alphabet_size = 2;

  std::size_t input_size() const { return map.size(); }
  int operator()(std::size_t x) const { return map[x]; }

  /// Number of distinct labels actually used.
  int cells() const {
    std::set<int> used(map.begin(), map.end());
    return static_cast<int>(used.size());
  }

  auto operator<=>(const Quantizer&) const = default;
  bool operator==(const Quantizer&) const = default;
};

inline Quantizer make_quantizer(std::vector<int> map, int message_alphabet_size) {
  if (message_alphabet_size < 1) {
    throw Error(ErrorKind::InvalidArgument, "message alphabet size must be positive");
  }
  for (int y : map) {
    if (y < 0 || y >= message_alphabet_size) {
      throw Error(ErrorKind::InvalidArgument, "quantizer label " + std::to_string(y) + " outside [0, " +
                                                  std::to_string(message_alphabet_size) + ")");
    }
  }
  return Quantizer{std::move(map), message_alphabet_size};
}

/// Relabels messages in first-use order, so quantizers that only differ by a
/// permutation of labels compare equal.
inline Quantizer canonical(const Quantizer& q) {
  std::vector<int> relabel(static_cast<std::size_t>(q.message_alphabet_size), -1);
  int next = 0;
  Quantizer out{std::vector<int>(q.map.size()), q.message_alphabet_size};
  for (std::size_t x = 0; x < q.map.size(); ++x) {
    int& label = relabel[static_cast<std::size_t>(q.map[x])];
    if (label < 0) label = next++;
    out.map[x] = label;
  }
  return out;
}

inline Quantizer identity_quantizer(std::size_t alphabet_size) {
  Quantizer q{std::vector<int>(alphabet_size), static_cast<int>(std::max<std::size_t>(alphabet_size, 1))};
  std::iota(q.map.begin(), q.map.end(), 0);
  return q;
}

/// Joint quantizer x -> (first(x), second(x)) encoded as first * d + second.
inline Quantizer product_quantizer(const Quantizer& first, const Quantizer& second) {
  if (first.map.size() != second.map.size()) {
    throw Error(ErrorKind::ShapeMismatch, "product of quantizers over different alphabets");
  }
  const int d = second.message_alphabet_size;
  Quantizer q{std::vector<int>(first.map.size()), first.message_alphabet_size * d};
  for (std::size_t x = 0; x < q.map.size(); ++x) q.map[x] = first.map[x] * d + second.map[x];
  return q;
}

/// Splits a quantizer into d*d labels back into its two d-ary components.
inline std::pair<Quantizer, Quantizer> split_product(const Quantizer& joint, int d) {
  Quantizer first{std::vector<int>(joint.map.size()), d};
  Quantizer second{std::vector<int>(joint.map.size()), d};
  for (std::size_t x = 0; x < joint.map.size(); ++x) {
    first.map[x] = joint.map[x] / d;
    second.map[x] = joint.map[x] % d;
  }
  return {canonical(first), canonical(second)};
}

/// Message distribution induced by a quantizer. Messages with zero mass under
/// both hypotheses are dropped; `labels[i]` is the original label of entry i.
struct InducedModel {
  std::vector<double> q0;
  std::vector<double> q1;
  std::vector<double> llr;  // log(q1 / q0)
  std::vector<int> labels;

  std::size_t size() const { return q0.size(); }
  const std::vector<double>& pmf(Hypothesis j) const { return j == Hypothesis::H0 ? q0 : q1; }

  double min_llr() const { return *std::min_element(llr.begin(), llr.end()); }
  double max_llr() const { return *std::max_element(llr.begin(), llr.end()); }

  /// Builds an induced model straight from paired masses (e.g. atoms of a
  /// multi-sensor observation). Zero/zero atoms are dropped.
  static InducedModel from_masses(const std::vector<double>& mass0, const std::vector<double>& mass1);
};

inline InducedModel InducedModel::from_masses(const std::vector<double>& mass0,
                                              const std::vector<double>& mass1) {
  if (mass0.size() != mass1.size()) throw Error(ErrorKind::ShapeMismatch, "mass vectors differ in length");
  InducedModel im;
  for (std::size_t y = 0; y < mass0.size(); ++y) {
    const bool zero0 = mass0[y] == 0.0;
    const bool zero1 = mass1[y] == 0.0;
    if (zero0 && zero1) continue;
    if (zero0 != zero1) {
      throw Error(ErrorKind::SupportMismatch,
                  "message " + std::to_string(y) + " has mass under exactly one hypothesis");
    }
    im.q0.push_back(mass0[y]);
    im.q1.push_back(mass1[y]);
    im.llr.push_back(std::log(mass1[y]) - std::log(mass0[y]));
    im.labels.push_back(static_cast<int>(y));
  }
  if (im.q0.empty()) throw Error(ErrorKind::NotAProbability, "induced model has no mass");
  return im;
}

inline InducedModel induce(const HypothesisModel& m, const Quantizer& q) {
  if (q.map.size() != m.alphabet_size()) {
    throw Error(ErrorKind::ShapeMismatch, "quantizer covers " + std::to_string(q.map.size()) +
                                              " symbols but the model has " +
                                              std::to_string(m.alphabet_size()));
  }
  std::vector<double> mass0(static_cast<std::size_t>(q.message_alphabet_size), 0.0);
  std::vector<double> mass1(mass0.size(), 0.0);
  for (std::size_t x = 0; x < q.map.size(); ++x) {
    const auto y = static_cast<std::size_t>(q.map[x]);
    if (y >= mass0.size()) throw Error(ErrorKind::InvalidArgument, "quantizer label out of range");
    mass0[y] += m.pmf0[x];
    mass1[y] += m.pmf1[x];
  }
  return InducedModel::from_masses(mass0, mass1);
}

/// E_0[phi(L)] with L = q1/q0 the likelihood ratio of a message.
inline double expected_phi_of_likelihood_ratio(const InducedModel& im, const std::function<double(double)>& phi) {
  double out = 0.0;
  for (std::size_t y = 0; y < im.size(); ++y) out += im.q0[y] * phi(std::exp(im.llr[y]));
  return out;
}

enum class QuantizerSearch { LlrMonotone, Exhaustive };

namespace detail {

// Restricted growth strings of length k with labels below d, in lexicographic order.
inline void restricted_growth(std::vector<int>& prefix, std::size_t k, int d, int used,
                              std::vector<Quantizer>& out) {
  if (prefix.size() == k) {
    out.push_back(Quantizer{prefix, d});
    return;
  }
  const int limit = std::min(d - 1, used);
  for (int label = 0; label <= limit; ++label) {
    prefix.push_back(label);
    restricted_growth(prefix, k, d, std::max(used, label + 1), out);
    prefix.pop_back();
  }
}

}  // namespace detail

inline constexpr double kLlrTieTolerance = 1e-12;

/// Candidate quantizers with at most d messages, canonical and sorted
/// lexicographically.
///
/// `Exhaustive` yields every canonical map (the d^K maps up to relabeling).
/// `LlrMonotone` yields the likelihood-ratio quantizers: the cells are
/// intervals of the sorted symbol LLRs and exactly min(d, K') messages are
/// used, where K' counts the symbols with positive mass. Symbols whose LLRs tie
/// may be split across neighbouring cells in every possible way. Zero-mass
/// symbols carry no information and are folded into message 0.
inline std::vector<Quantizer> enumerate_quantizers(const HypothesisModel& m, int d, QuantizerSearch mode) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "message alphabet size must be positive");
  const std::size_t k = m.alphabet_size();
  std::vector<Quantizer> out;
  if (mode == QuantizerSearch::Exhaustive) {
    std::vector<int> prefix;
    detail::restricted_growth(prefix, k, d, 0, out);
    return out;
  }

  std::vector<std::size_t> order;
  for (std::size_t x = 0; x < k; ++x) {
    if (m.pmf0[x] > 0.0) order.push_back(x);
  }
  if (order.empty()) throw Error(ErrorKind::NotAProbability, "model has no positive-mass symbol");
  auto llr = [&](std::size_t x) { return std::log(m.pmf1[x]) - std::log(m.pmf0[x]); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return llr(a) < llr(b); });

  // group[i] is the tie-group index of order[i]
  std::vector<int> group(order.size(), 0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const bool tied = std::abs(llr(order[i]) - llr(order[i - 1])) <= kLlrTieTolerance;
    group[i] = group[i - 1] + (tied ? 0 : 1);
  }
  const int target_cells = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(d), order.size()));

  std::set<Quantizer> found;
  std::vector<int> rank(order.size(), 0);
  // floor: highest rank used by strictly-smaller LLR groups; top: highest rank used so far
  std::function<void(std::size_t, int, int)> assign = [&](std::size_t i, int floor, int top) {
    if (i == order.size()) {
      if (top + 1 != target_cells) return;
      Quantizer q{std::vector<int>(k, 0), d};
      for (std::size_t p = 0; p < order.size(); ++p) q.map[order[p]] = rank[p];
      found.insert(canonical(q));
      return;
    }
    const int lower = (i > 0 && group[i] != group[i - 1]) ? top : floor;
    const int upper = std::min(d - 1, top + 1);
    for (int r = std::max(lower, 0); r <= upper; ++r) {
      rank[i] = r;
      assign(i + 1, lower, std::max(top, r));
    }
  };
  assign(0, 0, -1);
  out.assign(found.begin(), found.end());
  return out;
}

/// Reads the text model format:
///   line 1: "K D" (alphabet size, default message alphabet size)
///   line 2: K pmf0 entries
///   line 3: K pmf1 entries
struct ModelFile {
  HypothesisModel model;
  int message_alphabet_size;
};

inline ModelFile parse_model(std::istream& in) {
  long long k = 0;
  long long d = 0;
  if (!(in >> k >> d) || k <= 0 || d <= 0) {
    throw Error(ErrorKind::Io, "model header must be two positive integers 'K D'");
  }
  HypothesisModel m;
  m.pmf0.resize(static_cast<std::size_t>(k));
  m.pmf1.resize(static_cast<std::size_t>(k));
  for (auto& v : m.pmf0) {
    if (!(in >> v)) throw Error(ErrorKind::Io, "expected " + std::to_string(k) + " pmf0 entries");
  }
  for (auto& v : m.pmf1) {
    if (!(in >> v)) throw Error(ErrorKind::Io, "expected " + std::to_string(k) + " pmf1 entries");
  }
  return ModelFile{validate_model(m), static_cast<int>(d)};
}

inline ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file '" + path + "'");
  return parse_model(in);
}

}  // namespace fbdetect

#endif  // FBDETECT_MODEL_HPP
