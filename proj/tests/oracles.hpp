#ifndef FBDETECT_TESTS_ORACLES_HPP
#define FBDETECT_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "fbdetect/evaluator.hpp"

namespace fbdetect::oracle {

// Calls fn(tuple, p0, p1) for every message tuple of length n.
template <typename F>
void for_each_tuple(const InducedModel& im, int n, F&& fn) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    double p0 = 1.0;
    double p1 = 1.0;
    for (auto y : idx) {
      p0 *= im.q0[y];
      p1 *= im.q1[y];
    }
    fn(idx, p0, p1);
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == im.size()) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
}

inline double brute_parallel(const HypothesisModel& m, const Quantizer& q, int n, Priors pr = {}) {
  const auto im = induce(m, q);
  double pe = 0.0;
  for_each_tuple(im, n, [&](const auto&, double p0, double p1) { pe += std::min(pr.pi0 * p0, pr.pi1 * p1); });
  return pe;
}

inline double brute_two_stage(const HypothesisModel& model, const Strategy& s) {
  const auto g = induce(model, s.first_stage);
  const std::array<InducedModel, 2> ds{induce(model, s.second_stage[0]), induce(model, s.second_stage[1])};
  const auto& pr = s.priors;
  double pe = 0.0;
  if (s.architecture == ArchitectureKind::DaisyFull) {
    for_each_tuple(g, s.m, [&](const auto& first, double f0, double f1) {
      double llr = 0.0;
      for (auto y : first) llr += g.llr[y];
      const auto& d = ds[llr > s.m * s.aggregator_threshold ? 1 : 0];
      for_each_tuple(d, s.n - s.m, [&](const auto&, double p0, double p1) {
        pe += std::min(pr.pi0 * f0 * p0, pr.pi1 * f1 * p1);
      });
    });
    return pe;
  }
  double pu[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for_each_tuple(g, s.m, [&](const auto& first, double f0, double f1) {
    double llr = 0.0;
    for (auto y : first) llr += g.llr[y];
    const int u = llr > s.m * s.aggregator_threshold ? 1 : 0;
    pu[0][u] += f0;
    pu[1][u] += f1;
  });
  for (int u = 0; u < 2; ++u) {
    for_each_tuple(ds[u], s.n - s.m, [&](const auto&, double p0, double p1) {
      pe += std::min(pr.pi0 * pu[0][u] * p0, pr.pi1 * pu[1][u] * p1);
    });
  }
  return pe;
}

inline Quantizer random_quantizer(std::mt19937_64& rng, std::size_t k, int d) {
  std::uniform_int_distribution<int> label(0, d - 1);
  std::vector<int> map(k);
  for (auto& v : map) v = label(rng);
  return canonical(make_quantizer(map, d));
}


}  // namespace fbdetect::oracle

#endif  // FBDETECT_TESTS_ORACLES_HPP
