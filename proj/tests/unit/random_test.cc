// Apache License, Version 2.0, refer to LICENSE.txt

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "hpyp/pyp_graph.hh"
#include "hpyp/random.hh"

namespace {

TEST(Random, LogAdd) {
  EXPECT_NEAR(hpyp::log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-14);
  EXPECT_EQ(hpyp::log_add(hpyp::kNegInf, 1.5), 1.5);
  std::vector<double> xs{std::log(1.0), std::log(2.0), hpyp::kNegInf};
  EXPECT_NEAR(hpyp::log_sum_exp(xs), std::log(3.0), 1e-14);
}

TEST(Random, GammaAndBetaMeans) {
  hpyp::Rng rng(3);
  const int n = 200000;
  double g = 0.0, b = 0.0, lb = 0.0;
  for (int i = 0; i < n; ++i) {
    g += hpyp::sample_gamma(2.5, 4.0, rng);
    b += hpyp::sample_beta(2.0, 3.0, rng);
    lb += std::exp(hpyp::sample_log_beta(2.0, 3.0, rng));
  }
  EXPECT_NEAR(g / n, 2.5 / 4.0, 0.005);
  EXPECT_NEAR(b / n, 0.4, 0.003);
  EXPECT_NEAR(lb / n, 0.4, 0.003);
}

TEST(Random, TinyShapeStaysFinite) {
  hpyp::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double x = hpyp::sample_log_gamma(1e-3, rng);
    EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(Random, Categorical) {
  hpyp::Rng rng(7);
  std::vector<double> lw{std::log(1.0), hpyp::kNegInf, std::log(3.0)};
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 40000; ++i) ++hits[hpyp::sample_log_categorical(lw, rng)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / 40000.0, 0.75, 0.01);
  std::vector<double> none{hpyp::kNegInf};
  EXPECT_ANY_THROW(hpyp::sample_log_categorical(none, rng));
}

TEST(Random, DirichletMeanAndDensity) {
  hpyp::Rng rng(9);
  std::vector<double> a{0.5, 1.5, 3.0};
  std::vector<double> mean(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto x = hpyp::sample_dirichlet(a, rng);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) mean[k] += x[k] / n;
  }
  EXPECT_NEAR(mean[0], 0.1, 0.003);
  EXPECT_NEAR(mean[2], 0.6, 0.003);
  // Uniform Dirichlet on the 2-simplex has density 2.
  std::vector<double> ones{1.0, 1.0, 1.0}, x{0.2, 0.3, 0.5};
  EXPECT_NEAR(hpyp::log_dirichlet_density(x, ones), std::log(2.0), 1e-12);
}

TEST(Random, StickBreakingSumsBelowOne) {
  hpyp::Rng rng(11);
  auto w = hpyp::sample_stick_breaking(0.5, 1.0, 50, rng);
  ASSERT_EQ(w.size(), 50u);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  EXPECT_LE(s, 1.0 + 1e-12);
  for (double x : w) EXPECT_GE(x, 0.0);
}

TEST(Random, StickBreakingFirstWeights) {
  hpyp::Rng rng(13);
  const int n = 100000;
  double p1 = 0.0, v1 = 0.0;
  for (int i = 0; i < n; ++i) {
    p1 += hpyp::sample_stick_breaking(0.0, 1.0, 1, rng)[0];
    v1 += hpyp::sample_stick_breaking(0.5, 0.5, 1, rng)[0];
  }
  EXPECT_NEAR(p1 / n, 0.5, 0.005);
  EXPECT_NEAR(v1 / n, 1.0 / 3.0, 0.005);
  EXPECT_THROW(hpyp::sample_stick_breaking(1.0, 1.0, 3, rng), std::domain_error);
  EXPECT_THROW(hpyp::sample_stick_breaking(0.5, -0.5, 3, rng), std::domain_error);
  EXPECT_THROW(hpyp::sample_stick_breaking(0.5, 1.0, 0, rng), std::domain_error);
}

}  // namespace
