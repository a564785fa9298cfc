// Apache License, Version 2.0, refer to LICENSE.txt

// Random-function network model over ordered author pairs. Link strengths Q
// get a Gaussian process prior whose mean is the cosine similarity of the
// authors' topic vectors and whose covariance is a squared exponential in
// that similarity; links are Bernoulli(sigmoid(Q)).

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "hpyp/random.hh"

namespace hpyp {

struct KernelParams {
  double s = 1.0;
  double l = 1.0;
  double sigma = 1.0;
};

using AuthorPair = std::pair<std::size_t, std::size_t>;

// Ordered pairs (i, j), row-major; the diagonal only when requested.
std::vector<AuthorPair> author_pairs(std::size_t authors, bool self_links);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct GpPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Throws std::domain_error for a zero-norm topic vector and NumericError
// for non-finite kernel entries.
GpPrior mean_and_covariance(const std::vector<std::vector<double>>& author_topics,
                            const std::vector<AuthorPair>& pairs, const KernelParams& kernel);

double log_sigmoid(double x);

// Sum over pairs of x log s(Q) + (1 - x) log(1 - s(Q)).
double network_loglik(const Eigen::VectorXd& q, std::span<const std::uint8_t> links);

// Cholesky factor of the covariance; NumericError when it is not positive
// definite.
Eigen::LLT<Eigen::MatrixXd> factorise(const Eigen::MatrixXd& cov);

double log_gaussian_density(const Eigen::VectorXd& q, const Eigen::VectorXd& mean,
                            const Eigen::LLT<Eigen::MatrixXd>& chol);

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::LLT<Eigen::MatrixXd>& chol,
                                Rng& rng);

struct EssStep {
  Eigen::VectorXd q;
  Eigen::VectorXd prior_draw;  // zero-mean draw spanning the ellipse
  double angle = 0.0;
  int evaluations = 0;
};

// One elliptical slice sampling transition for the density proportional to
// N(q; mean, cov) exp(loglik(q)).
EssStep elliptical_slice_sample(const Eigen::VectorXd& q, const Eigen::VectorXd& mean,
                                const Eigen::LLT<Eigen::MatrixXd>& chol,
                                const std::function<double(const Eigen::VectorXd&)>& loglik, Rng& rng);

struct GpNetworkState {
  KernelParams kernel;
  bool self_links = false;
  std::size_t authors = 0;
  std::vector<AuthorPair> pairs;
  std::vector<std::uint8_t> links;  // observed x per pair
  Eigen::VectorXd q;
  GpPrior prior;

  // Pairs and observed links from an edge list over `authors` authors.
  static GpNetworkState from_edges(std::size_t authors, const std::vector<AuthorPair>& edges,
                                   const KernelParams& kernel, bool self_links);
};

}  // namespace hpyp
