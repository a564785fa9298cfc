// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hpyp/eval.hh"

namespace {

hpyp::LdaEstimate uniform_model(std::size_t topics, std::size_t vocab) {
  hpyp::LdaEstimate m;
  m.shared.assign(topics + 1, 1.0 / static_cast<double>(topics));
  m.shared.back() = 0.0;
  m.topic_words.assign(topics, std::vector<double>(vocab, 1.0 / static_cast<double>(vocab)));
  m.unseen_word.assign(topics, 0.0);
  m.doc_level = {0.0, 1.0};
  return m;
}

TEST(Eval, PerplexityOfUniformModelIsVocabularySize) {
  hpyp::LdaEstimate m = uniform_model(3, 7);
  hpyp::Rng rng(1);
  std::vector<hpyp::TestDocument> docs(2);
  docs[0] = hpyp::split_alternating(std::vector<hpyp::Dish>{0, 1, 2, 3, 4});
  docs[1] = hpyp::split_alternating(std::vector<hpyp::Dish>{6, 6});
  EXPECT_NEAR(hpyp::perplexity(m, docs, {}, rng), 7.0, 1e-12);
}

TEST(Eval, PerplexityOfProbabilities) {
  std::vector<double> p{0.5, 0.125};
  EXPECT_NEAR(hpyp::perplexity(p), 4.0, 1e-14);
  EXPECT_THROW(hpyp::perplexity_from_log(0.0, 0), std::domain_error);
}

TEST(Eval, SplitAlternating) {
  auto t = hpyp::split_alternating(std::vector<hpyp::Dish>{5, 6, 7, 8, 9});
  EXPECT_EQ(t.observed, (std::vector<hpyp::Dish>{5, 7, 9}));
  EXPECT_EQ(t.held_out, (std::vector<hpyp::Dish>{6, 8}));
}

TEST(Eval, PurityExample) {
  // Clusters {a,b,c}, {d,e}; classes {a,b,d}, {c,e}.
  hpyp::ClusterAssignment x{{0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}};
  EXPECT_NEAR(hpyp::purity(x), 0.6, 1e-15);
}

TEST(Eval, PurityNeverDropsWhenClustersSplit) {
  hpyp::ClusterAssignment x{{0, 0, 1, 0, 1, 2, 2}, {0, 0, 0, 1, 1, 1, 1}};
  const double before = hpyp::purity(x);
  x.clusters = {0, 0, 2, 1, 1, 3, 3};
  EXPECT_GE(hpyp::purity(x), before);
  x.clusters = {0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(hpyp::purity(x), 1.0);
}

TEST(Eval, Nmi) {
  hpyp::ClusterAssignment same{{0, 0, 1, 1, 2}, {4, 4, 7, 7, 1}};
  EXPECT_NEAR(hpyp::nmi(same), 1.0, 1e-15);
  hpyp::ClusterAssignment x{{0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}};
  hpyp::ClusterAssignment relabelled{{1, 1, 0, 1, 0}, {5, 5, 5, 2, 2}};
  EXPECT_NEAR(hpyp::nmi(x), hpyp::nmi(relabelled), 1e-15);
  // Independent partitions of four items.
  hpyp::ClusterAssignment indep{{0, 0, 1, 1}, {0, 1, 0, 1}};
  EXPECT_NEAR(hpyp::nmi(indep), 0.0, 1e-15);
  hpyp::ClusterAssignment one{{0, 0, 0}, {3, 3, 3}};
  EXPECT_EQ(hpyp::nmi(one), 1.0);
  hpyp::ClusterAssignment flat{{0, 0, 1}, {3, 3, 3}};
  EXPECT_EQ(hpyp::nmi(flat), 0.0);
  EXPECT_THROW(hpyp::nmi({{0}, {}}), std::domain_error);
}

TEST(Eval, NmiHandComputed) {
  // Purity example: H(classes) = H(clusters) = H(0.6, 0.4); joint cells
  // (2,1,1,1)/5.
  hpyp::ClusterAssignment x{{0, 0, 1, 0, 1}, {0, 0, 0, 1, 1}};
  const double h = -(0.6 * std::log2(0.6) + 0.4 * std::log2(0.4));
  const double mi = 0.4 * std::log2(0.4 / (0.6 * 0.6)) + 0.2 * std::log2(0.2 / (0.6 * 0.4)) +
                    0.2 * std::log2(0.2 / (0.4 * 0.6)) + 0.2 * std::log2(0.2 / (0.4 * 0.4));
  EXPECT_NEAR(hpyp::nmi(x), mi / h, 1e-14);
}

TEST(Eval, DominantTopicTakesLowestIndexOnTies) {
  std::vector<double> a{0.2, 0.7, 0.1}, b{0.4, 0.2, 0.4};
  EXPECT_EQ(hpyp::dominant_topic(a), 1u);
  EXPECT_EQ(hpyp::dominant_topic(b), 0u);
  EXPECT_THROW(hpyp::dominant_topic(std::vector<double>{}), std::domain_error);
}

TEST(Eval, RestaurantMean) {
  std::vector<double> c{2.0, 1.0}, t{1.0, 0.5}, base{0.25, 0.25, 0.5};
  auto m = hpyp::restaurant_mean(c, t, {0.5, 1.0}, base);
  // new mass 1 + 0.75, divisor 4.
  EXPECT_NEAR(m[0], (1.75 * 0.25 + 1.5) / 4.0, 1e-15);
  EXPECT_NEAR(m[1], (1.75 * 0.25 + 0.75) / 4.0, 1e-15);
  EXPECT_NEAR(m[2], 1.75 * 0.5 / 4.0, 1e-15);
}

TEST(Eval, CompletionEdgeCases) {
  hpyp::Rng rng(2);
  hpyp::LdaEstimate m = uniform_model(2, 4);
  m.shared = {0.3, 0.5, 0.2};
  auto empty = hpyp::complete_document(m, {}, 20, rng);
  EXPECT_NEAR(empty[0], 0.375, 1e-15);
  EXPECT_NEAR(empty[1], 0.625, 1e-15);
  hpyp::LdaEstimate single = uniform_model(1, 4);
  std::vector<hpyp::Dish> obs{0, 1, 2};
  EXPECT_EQ(hpyp::complete_document(single, obs, 5, rng), std::vector<double>{1.0});
  EXPECT_THROW(hpyp::complete_document(m, obs, 0, rng), std::domain_error);
}

TEST(Eval, CompletionOfOneTokenMatchesHandComputation) {
  hpyp::LdaEstimate m = uniform_model(2, 2);
  m.shared = {0.6, 0.4, 0.0};
  m.topic_words = {{0.9, 0.1}, {0.2, 0.8}};
  m.doc_level = {0.5, 2.0};
  // Posterior of the token's topic, then the mean with c = 1, t = 1/2.
  const double p0 = 0.6 * 0.9 / (0.6 * 0.9 + 0.4 * 0.2);
  const double new_mass = 2.0 + 0.25;
  auto theta_given = [&](int k) {
    std::vector<double> th{new_mass * 0.6 / 3.0, new_mass * 0.4 / 3.0};
    th[k] += 0.75 / 3.0;
    return th;
  };
  const double want0 = p0 * theta_given(0)[0] + (1.0 - p0) * theta_given(1)[0];
  hpyp::Rng rng(3);
  std::vector<hpyp::Dish> obs{0};
  auto got = hpyp::complete_document(m, obs, 200000, rng);
  // Binomial standard error of the mixture weight, times the gap.
  EXPECT_NEAR(got[0], want0, 0.002);
  EXPECT_NEAR(got[0] + got[1], 1.0, 1e-12);
}

TEST(Eval, UnseenTokensUseUnseenMass) {
  hpyp::LdaEstimate m = uniform_model(2, 2);
  m.unseen_word = {0.01, 0.03};
  std::vector<double> theta{0.5, 0.5};
  EXPECT_NEAR(hpyp::token_probability(m, theta, 9), 0.02, 1e-15);
}

TEST(Eval, MetricsReport) {
  hpyp::MetricsReport r{hpyp::config_digest("a=1\n"), {}};
  r.add("perplexity", 12.5);
  r.add("nmi", 0.25);
  std::ostringstream text, json;
  r.write_text(text);
  EXPECT_EQ(text.str(), "perplexity\t12.5\t" + r.config_digest + "\nnmi\t0.25\t" + r.config_digest + "\n");
  r.write_json(json);
  EXPECT_NE(json.str().find("\"metric\": \"perplexity\""), std::string::npos);
  EXPECT_LT(json.str().find("perplexity"), json.str().find("nmi"));
  // FNV-1a test vectors.
  EXPECT_EQ(hpyp::config_digest(""), "cbf29ce484222325");
  EXPECT_EQ(hpyp::config_digest("a"), "af63dc4c8601ec8c");
}

TEST(Eval, WorkedExamples) {
  std::vector<double> ones{1.0, 1.0, 1.0};
  EXPECT_EQ(hpyp::perplexity(ones), 1.0);
  std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(hpyp::dominant_topic(uniform), 0u);
  std::vector<double> a{0.2, 0.7, 0.1}, scaled{2.0, 7.0, 1.0};
  EXPECT_EQ(hpyp::dominant_topic(a), hpyp::dominant_topic(scaled));
  hpyp::ClusterAssignment same{{0, 1, 1, 2}, {0, 1, 1, 2}};
  EXPECT_EQ(hpyp::purity(same), 1.0);
  EXPECT_NEAR(hpyp::nmi(same), 1.0, 1e-15);
}

TEST(Eval, PuritySplitPropertyOnRandomPartitions) {
  hpyp::Rng rng(9);
  std::uniform_int_distribution<std::size_t> label(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    hpyp::ClusterAssignment x;
    for (int i = 0; i < 30; ++i) {
      x.classes.push_back(label(rng));
      x.clusters.push_back(label(rng));
    }
    const double before = hpyp::purity(x);
    // Move half of cluster 0 into a fresh cluster.
    bool flip = false;
    for (auto& c : x.clusters)
      if (c == 0 && (flip = !flip)) c = 99;
    ASSERT_GE(hpyp::purity(x), before);
  }
}

}  // namespace
