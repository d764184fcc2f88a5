#ifndef FBDETECT_FIXTURES_HPP
#define FBDETECT_FIXTURES_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "fbdetect/model.hpp"

namespace fbdetect {

/// Ternary model used by the example1 subcommand.
inline HypothesisModel ternary_model() { return HypothesisModel::make({0.8, 0.15, 0.05}, {0.05, 0.15, 0.8}); }

/// gamma_1 = (0,1,1) and gamma_2 = (0,0,1) on the ternary alphabet.
inline Quantizer ternary_gamma1() { return make_quantizer({0, 1, 1}, 2); }
inline Quantizer ternary_gamma2() { return make_quantizer({0, 0, 1}, 2); }

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t k, double floor = 0.02) {
  std::exponential_distribution<double> draw(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) {
    v = floor + draw(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

/// Random model with full support; the floor keeps every mass away from zero.
inline HypothesisModel random_model(std::mt19937_64& rng, std::size_t k, double floor = 0.02) {
  auto p0 = random_pmf(rng, k, floor);
  auto p1 = random_pmf(rng, k, floor);
  return HypothesisModel::make(std::move(p0), std::move(p1));
}

inline std::vector<HypothesisModel> random_models(std::uint64_t seed, std::size_t count, std::size_t k) {
  std::mt19937_64 rng(seed);
  std::vector<HypothesisModel> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_model(rng, k));
  return out;
}

}  // namespace fbdetect

#endif  // FBDETECT_FIXTURES_HPP
