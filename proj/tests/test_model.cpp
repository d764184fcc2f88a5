#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fbdetect/fixtures.hpp"
#include "fbdetect/model.hpp"

using namespace fbdetect;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

// Independent canonical-set oracle: every map in d^K, relabeled in first-use order.
std::set<std::vector<int>> all_canonical_maps(std::size_t k, int d) {
  std::set<std::vector<int>> out;
  std::vector<int> map(k, 0);
  while (true) {
    std::vector<int> relabel(static_cast<std::size_t>(d), -1);
    std::vector<int> canon(k);
    int next = 0;
    for (std::size_t x = 0; x < k; ++x) {
      auto& slot = relabel[static_cast<std::size_t>(map[x])];
      if (slot < 0) slot = next++;
      canon[x] = slot;
    }
    out.insert(canon);
    std::size_t pos = 0;
    while (pos < k && ++map[pos] == d) map[pos++] = 0;
    if (pos == k) break;
  }
  return out;
}

}  // namespace

TEST(ValidateModel, AcceptsTernary) {
  const auto m = validate_model({{0.8, 0.15, 0.05}, {0.05, 0.15, 0.8}});
  EXPECT_EQ(m.alphabet_size(), 3u);
}

TEST(ValidateModel, RejectsOneSidedZero) {
  EXPECT_EQ(kind_of([] { validate_model({{1.0, 0.0}, {0.5, 0.5}}); }), ErrorKind::SupportMismatch);
}

TEST(ValidateModel, SupportMismatchMessageNamesAbsoluteContinuity) {
  try {
    validate_model({{1.0, 0.0}, {0.5, 0.5}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("absolutely continuous"), std::string::npos);
  }
}

TEST(ValidateModel, RejectsBadSum) {
  EXPECT_EQ(kind_of([] { validate_model({{0.5, 0.6}, {0.5, 0.5}}); }), ErrorKind::NotAProbability);
}

TEST(ValidateModel, RejectsNegativeEntry) {
  EXPECT_EQ(kind_of([] { validate_model({{1.1, -0.1}, {0.5, 0.5}}); }), ErrorKind::NotAProbability);
}

TEST(ValidateModel, RejectsShapeMismatch) {
  EXPECT_EQ(kind_of([] { validate_model({{1.0}, {0.5, 0.5}}); }), ErrorKind::ShapeMismatch);
}

TEST(ValidateModel, SharedZeroIsAllowed) {
  EXPECT_NO_THROW(validate_model({{0.5, 0.0, 0.5}, {0.25, 0.0, 0.75}}));
}

TEST(ValidateModel, SumToleranceIsOneInTwelve) {
  EXPECT_NO_THROW(validate_model({{0.5 + 5e-13, 0.5}, {0.5, 0.5}}));
  EXPECT_THROW(validate_model({{0.5 + 5e-12, 0.5}, {0.5, 0.5}}), Error);
}

TEST(Induce, TernaryGammaTwo) {
  const auto im = induce(ternary_model(), ternary_gamma2());
  ASSERT_EQ(im.size(), 2u);
  EXPECT_NEAR(im.q0[0], 0.95, 1e-15);
  EXPECT_NEAR(im.q0[1], 0.05, 1e-15);
  EXPECT_NEAR(im.q1[0], 0.2, 1e-15);
  EXPECT_NEAR(im.q1[1], 0.8, 1e-15);
  EXPECT_NEAR(im.llr[1], std::log(0.8 / 0.05), 1e-14);
}

TEST(Induce, TernaryGammaOne) {
  const auto im = induce(ternary_model(), ternary_gamma1());
  EXPECT_NEAR(im.q0[0], 0.8, 1e-15);
  EXPECT_NEAR(im.q0[1], 0.2, 1e-15);
  EXPECT_NEAR(im.q1[0], 0.05, 1e-15);
  EXPECT_NEAR(im.q1[1], 0.95, 1e-15);
}

TEST(Induce, IdentityReproducesPmfs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    const auto m = random_model(rng, 4);
    const auto im = induce(m, identity_quantizer(4));
    EXPECT_EQ(im.q0, m.pmf0);
    EXPECT_EQ(im.q1, m.pmf1);
  }
}

TEST(Induce, ShapeMismatch) {
  EXPECT_EQ(kind_of([] { induce(ternary_model(), make_quantizer({0, 1}, 2)); }), ErrorKind::ShapeMismatch);
}

TEST(Induce, DropsMessagesWithoutMass) {
  const auto m = HypothesisModel::make({0.5, 0.0, 0.5}, {0.25, 0.0, 0.75});
  const auto im = induce(m, identity_quantizer(3));
  EXPECT_EQ(im.size(), 2u);
  EXPECT_EQ(im.labels, (std::vector<int>{0, 2}));
  const auto unused = induce(m, make_quantizer({0, 0, 0}, 3));
  EXPECT_EQ(unused.size(), 1u);
}

TEST(Induce, LlrConsistency) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_model(rng, 5);
    for (const auto& q : enumerate_quantizers(m, 3, QuantizerSearch::Exhaustive)) {
      const auto im = induce(m, q);
      double total = 0.0;
      for (std::size_t y = 0; y < im.size(); ++y) total += im.q0[y] * std::exp(im.llr[y]);
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Induce, RelabelInvariant) {
  std::mt19937_64 rng(13);
  const auto m = random_model(rng, 5);
  const auto q = make_quantizer({0, 1, 2, 1, 0}, 3);
  const auto relabeled = make_quantizer({2, 0, 1, 0, 2}, 3);
  EXPECT_EQ(canonical(q), canonical(relabeled));
  const auto a = induce(m, canonical(q));
  const auto b = induce(m, canonical(relabeled));
  EXPECT_EQ(a.q0, b.q0);
  EXPECT_EQ(a.q1, b.q1);
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(induce(m, q).llr), sorted(induce(m, relabeled).llr));
}

TEST(Quantizer, CanonicalFirstUseOrder) {
  EXPECT_EQ(canonical(make_quantizer({1, 1, 0}, 2)).map, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(canonical(make_quantizer({2, 0, 2, 1}, 3)).map, (std::vector<int>{0, 1, 0, 2}));
}

TEST(Quantizer, RejectsOutOfRangeLabel) {
  EXPECT_THROW(make_quantizer({0, 2}, 2), Error);
}

TEST(Quantizer, ProductSplitsBack) {
  const auto g = make_quantizer({0, 0, 1}, 2);
  const auto dl = make_quantizer({0, 1, 1}, 2);
  const auto joint = product_quantizer(g, dl);
  EXPECT_EQ(joint.message_alphabet_size, 4);
  const auto [a, b] = split_product(joint, 2);
  EXPECT_EQ(a, g);
  EXPECT_EQ(b, dl);
}

TEST(Enumerate, TernaryLlrMonotoneGivesTheTwoOneBitQuantizers) {
  const auto qs = enumerate_quantizers(ternary_model(), 2, QuantizerSearch::LlrMonotone);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0], ternary_gamma2());
  EXPECT_EQ(qs[1], ternary_gamma1());
}

TEST(Enumerate, SingleSymbolGivesConstant) {
  const auto m = HypothesisModel::make({1.0}, {1.0});
  for (auto mode : {QuantizerSearch::LlrMonotone, QuantizerSearch::Exhaustive}) {
    const auto qs = enumerate_quantizers(m, 2, mode);
    ASSERT_EQ(qs.size(), 1u);
    EXPECT_EQ(qs[0].map, (std::vector<int>{0}));
  }
}

TEST(Enumerate, ExhaustiveCountsFourSymbolsTwoLevels) {
  std::mt19937_64 rng(14);
  const auto qs = enumerate_quantizers(random_model(rng, 4), 2, QuantizerSearch::Exhaustive);
  EXPECT_EQ(qs.size(), 8u);
  const auto constant = std::count_if(qs.begin(), qs.end(), [](const Quantizer& q) { return q.cells() == 1; });
  EXPECT_EQ(constant, 1);
}

TEST(Enumerate, ExhaustiveMatchesBruteForceOracle) {
  std::mt19937_64 rng(15);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto m = random_model(rng, k);
    for (int d = 2; d <= 4; ++d) {
      std::set<std::vector<int>> got;
      for (const auto& q : enumerate_quantizers(m, d, QuantizerSearch::Exhaustive)) got.insert(q.map);
      EXPECT_EQ(got, all_canonical_maps(k, d)) << "k=" << k << " d=" << d;
    }
  }
}

TEST(Enumerate, LlrMonotoneCellsAreLlrIntervals) {
  std::mt19937_64 rng(16);
  for (int i = 0; i < 30; ++i) {
    const auto m = random_model(rng, 5);
    const auto full = induce(m, identity_quantizer(5));
    for (int d = 2; d <= 3; ++d) {
      for (const auto& q : enumerate_quantizers(m, d, QuantizerSearch::LlrMonotone)) {
        EXPECT_EQ(q.cells(), d);
        for (std::size_t a = 0; a < 5; ++a) {
          for (std::size_t b = 0; b < 5; ++b) {
            if (q.map[a] != q.map[b]) continue;
            for (std::size_t c = 0; c < 5; ++c) {
              const double lo = std::min(full.llr[a], full.llr[b]);
              const double hi = std::max(full.llr[a], full.llr[b]);
              if (full.llr[c] > lo && full.llr[c] < hi) {
                EXPECT_EQ(q.map[c], q.map[a]);
              }
            }
          }
        }
      }
    }
  }
}

TEST(Enumerate, TiedLlrSymbolsGetBothPlacements) {
  // symbols 1 and 2 share the LLR log(2)
  const auto m = HypothesisModel::make({0.5, 0.2, 0.1, 0.2}, {0.1, 0.4, 0.2, 0.3});
  const auto qs = enumerate_quantizers(m, 2, QuantizerSearch::LlrMonotone);
  std::set<std::vector<int>> maps;
  for (const auto& q : qs) maps.insert(q.map);
  EXPECT_TRUE(maps.count({0, 1, 0, 0}));
  EXPECT_TRUE(maps.count({0, 0, 1, 0}));
  EXPECT_TRUE(maps.count({0, 1, 1, 0}));
}

TEST(Enumerate, SortedAndUnique) {
  std::mt19937_64 rng(17);
  const auto qs = enumerate_quantizers(random_model(rng, 5), 3, QuantizerSearch::Exhaustive);
  EXPECT_TRUE(std::is_sorted(qs.begin(), qs.end()));
  EXPECT_TRUE(std::adjacent_find(qs.begin(), qs.end()) == qs.end());
}

TEST(DataProcessing, ConvexFunctionsOfTheLikelihoodRatioShrinkUnderQuantization) {
  const std::vector<std::function<double(double)>> phis = {
      [](double u) { return u * std::log(u); },
      [](double u) { return -std::sqrt(u); },
      [](double u) { return u * u; },
  };
  std::mt19937_64 rng(18);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_model(rng, 4);
    const auto full = induce(m, identity_quantizer(4));
    for (const auto& phi : phis) {
      const double base = expected_phi_of_likelihood_ratio(full, phi);
      for (const auto& q : enumerate_quantizers(m, 3, QuantizerSearch::Exhaustive)) {
        EXPECT_LE(expected_phi_of_likelihood_ratio(induce(m, q), phi), base + 1e-12);
      }
    }
    for (int s10 = 0; s10 <= 10; ++s10) {
      const double s = s10 / 10.0;
      const auto phi = [s](double u) { return -std::pow(u, s); };
      const double base = expected_phi_of_likelihood_ratio(full, phi);
      for (const auto& q : enumerate_quantizers(m, 2, QuantizerSearch::Exhaustive)) {
        EXPECT_LE(expected_phi_of_likelihood_ratio(induce(m, q), phi), base + 1e-12);
      }
    }
  }
}

TEST(ModelFile, ParsesHeaderAndPmfs) {
  std::istringstream in("3 2\n0.8 0.15 0.05\n0.05 0.15 0.8\n");
  const auto mf = parse_model(in);
  EXPECT_EQ(mf.message_alphabet_size, 2);
  EXPECT_EQ(mf.model.pmf1[2], 0.8);
}

TEST(ModelFile, RejectsTruncatedInput) {
  std::istringstream in("3 2\n0.8 0.15 0.05\n0.05 0.15\n");
  EXPECT_EQ(kind_of([&] { parse_model(in); }), ErrorKind::Io);
}

TEST(ModelFile, ValidatesContents) {
  std::istringstream in("2 2\n1 0\n0.5 0.5\n");
  EXPECT_EQ(kind_of([&] { parse_model(in); }), ErrorKind::SupportMismatch);
}

TEST(ModelFile, MissingFile) {
  EXPECT_EQ(kind_of([] { read_model_file("/nonexistent/model.txt"); }), ErrorKind::Io);
}

TEST(ModelFile, BundledTernary) {
  const auto mf = read_model_file(std::string(FBDETECT_DATA_DIR) + "/ternary.txt");
  EXPECT_EQ(mf.model.pmf0, ternary_model().pmf0);
}
