#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "respcal/clustering.hpp"
#include "respcal/error.hpp"
#include "test_util.hpp"

namespace respcal {
namespace {

using testing::make_record;

std::vector<std::size_t> all_up_to(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(Cluster, SingleCluster) {
  const auto r = make_record({"x", "x", "x", "x"});
  const auto a = cluster(r, *exact_oracle());
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(a.equivalents[m], all_up_to(4));
    EXPECT_EQ(a.frequencies[m], 1.0);
  }
}

TEST(Cluster, Singletons) {
  const auto r = make_record({"a", "b", "c", "d"});
  const auto a = cluster(r, *exact_oracle());
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(a.equivalents[m], std::vector<std::size_t>{m});
    EXPECT_EQ(a.frequencies[m], 0.25);
  }
}

TEST(Cluster, MixedCounts) {
  const auto r = make_record({"A", "A", "B", "A", "B"});
  const auto a = cluster(r, *exact_oracle());
  EXPECT_EQ(a.counts, (std::vector<std::size_t>{3, 3, 2, 3, 2}));
  EXPECT_EQ(a.frequencies, (std::vector<double>{0.6, 0.6, 0.4, 0.6, 0.4}));
  EXPECT_EQ(a.equivalents[2], (std::vector<std::size_t>{2, 4}));
}

TEST(Cluster, PrefixAndErrors) {
  const auto r = make_record({"A", "B", "A", "A"});
  const auto a = cluster(r, *exact_oracle(), 2);
  EXPECT_EQ(a.prefix_len(), 2u);
  EXPECT_EQ(a.frequencies, (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(cluster(r, *exact_oracle(), 5), Error);
  EXPECT_THROW(cluster(r, *exact_oracle(), 0), Error);
}

TEST(Cluster, EachUnorderedPairJudgedOnce) {
  testing::CountingOracle oracle;
  const auto r = make_record(std::vector<std::string>(12, "same"));
  cluster(r, oracle);
  EXPECT_EQ(oracle.calls.load(), 12 * 11 / 2);
}

TEST(Frequency, Examples) {
  ClusterAssignment a;
  a.equivalents.resize(10);
  a.counts = {4, 10, 1};
  a.frequencies = {0.4, 1.0, 0.1};
  EXPECT_EQ(frequency(a, 0), 0.4);
  EXPECT_EQ(frequency(a, 1), 1.0);
  const auto twenty = cluster(make_record({"x", "a", "b", "c", "d", "e", "f", "g", "h", "i",
                                            "j", "k", "l", "m", "n", "o", "p", "r", "s", "t"}),
                              *exact_oracle());
  EXPECT_EQ(frequency(twenty, 0), 0.05);
  EXPECT_THROW(frequency(twenty, 20), Error);
}

// Brute-force sum over every non-equivalent j of S(j, m) * F_j.
double diversity_oracle(const std::vector<std::string>& xs, const SimilarityFunction& sim,
                        std::size_t m) {
  const double M = static_cast<double>(xs.size());
  double total = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (xs[j] == xs[m]) {
      continue;
    }
    const double f = static_cast<double>(std::count(xs.begin(), xs.end(), xs[j])) / M;
    total += sim.similarity("q", xs[j], xs[m]) * f;
  }
  return total;
}

TEST(SemanticDiversity, IndicatorIsZero) {
  const auto r = make_record({"A", "B", "A", "C"});
  const auto a = cluster(r, *exact_oracle());
  auto sim = indicator_similarity(exact_oracle());
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(semantic_diversity(a, r, *sim, m), 0.0);
  }
}

TEST(SemanticDiversity, ConstantSimilarityMatchesBruteForce) {
  const std::vector<std::string> xs = {"A", "A", "B"};
  const auto r = make_record(xs);
  const auto a = cluster(r, *exact_oracle());
  testing::ConstantSimilarity half(0.5);
  const double got = semantic_diversity(a, r, half, 2);
  EXPECT_DOUBLE_EQ(got, diversity_oracle(xs, half, 2));
  EXPECT_DOUBLE_EQ(got, 2.0 / 3.0);
}

TEST(SemanticDiversity, SingleSampleIsZero) {
  const auto r = make_record({"A"});
  testing::ConstantSimilarity half(0.5);
  EXPECT_EQ(semantic_diversity(cluster(r, *exact_oracle()), r, half, 0), 0.0);
}

TEST(SemanticDiversity, RandomBruteForce) {
  Rng rng(3);
  testing::ConstantSimilarity c(0.3);
  auto lex = lexical_similarity();
  for (int i = 0; i < 200; ++i) {
    const auto xs = testing::random_answers(rng, 1 + rng.below(15));
    const auto r = make_record(xs);
    const auto a = cluster(r, *exact_oracle());
    for (std::size_t m = 0; m < xs.size(); ++m) {
      EXPECT_NEAR(semantic_diversity(a, r, c, m), diversity_oracle(xs, c, m), 1e-12);
      EXPECT_NEAR(semantic_diversity(a, r, *lex, m), diversity_oracle(xs, *lex, m), 1e-12);
    }
  }
}

TEST(Dedup, Examples) {
  const auto same = make_record({"A", "A", "A"});
  EXPECT_EQ(dedup(std::vector<std::size_t>{0, 1, 2}, same, *exact_oracle()),
            std::vector<std::size_t>{0});
  const auto distinct = make_record({"A", "B", "C"});
  EXPECT_EQ(dedup(std::vector<std::size_t>{0, 1, 2}, distinct, *exact_oracle()),
            (std::vector<std::size_t>{0, 1, 2}));
  const auto mixed = make_record({"A", "B", "A", "C", "B"});
  EXPECT_EQ(dedup(std::vector<std::size_t>{0, 1, 2, 3, 4}, mixed, *exact_oracle()),
            (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_TRUE(dedup(std::vector<std::size_t>{}, mixed, *exact_oracle()).empty());
}

// Partition induced by cluster() equals union-find over all pairs, and F is
// cluster size over M. Frequencies over distinct clusters sum to one.
TEST(ClusterProperty, MatchesUnionFind) {
  Rng rng(21);
  for (const auto& oracle : {exact_oracle(), normalized_oracle()}) {
    for (int i = 0; i < 300; ++i) {
      const auto xs = testing::random_answers(rng, 1 + rng.below(30));
      const auto a = cluster(make_record(xs), *oracle);
      const auto classes = testing::union_find_classes(xs, *oracle);
      const double M = static_cast<double>(xs.size());
      double mass = 0.0;
      for (std::size_t m = 0; m < xs.size(); ++m) {
        std::vector<std::size_t> expected;
        for (std::size_t j = 0; j < xs.size(); ++j) {
          if (classes[j] == classes[m]) {
            expected.push_back(j);
          }
        }
        ASSERT_EQ(a.equivalents[m], expected);
        ASSERT_EQ(a.frequencies[m], static_cast<double>(expected.size()) / M);
        if (classes[m] == m) {
          mass += a.frequencies[m];
        }
      }
      EXPECT_NEAR(mass, 1.0, 1e-12);
    }
  }
}

}  // namespace
}  // namespace respcal
