// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/gp_network.hh"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hpyp/errors.hh"

namespace hpyp {

std::vector<AuthorPair> author_pairs(std::size_t authors, bool self_links) {
  std::vector<AuthorPair> out;
  for (std::size_t i = 0; i < authors; ++i)
    for (std::size_t j = 0; j < authors; ++j)
      if (self_links || i != j) out.emplace_back(i, j);
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine similarity of vectors with different lengths");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw std::domain_error("cosine similarity of a zero vector");
  return ab / std::sqrt(aa * bb);
}

GpPrior mean_and_covariance(const std::vector<std::vector<double>>& author_topics,
                            const std::vector<AuthorPair>& pairs, const KernelParams& kernel) {
  for (std::size_t i = 0; i < author_topics.size(); ++i) {
    double norm = 0.0;
    for (double x : author_topics[i]) {
      if (x < 0.0) throw std::domain_error("author topic vectors must be nonnegative");
      norm += x * x;
    }
    if (norm == 0.0) throw std::domain_error("author " + std::to_string(i) + " has a zero topic vector");
  }
  const std::size_t n = pairs.size();
  GpPrior out;
  out.mean.resize(static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < n; ++p)
    out.mean[static_cast<Eigen::Index>(p)] =
        cosine_similarity(author_topics.at(pairs[p].first), author_topics.at(pairs[p].second));
  const double amp = kernel.s * kernel.s / 2.0;
  const double inv_two_l2 = 1.0 / (2.0 * kernel.l * kernel.l);
  const double jitter = kernel.sigma * kernel.sigma;
  out.cov.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(n); ++a) {
    out.cov(a, a) = amp + jitter;
    for (Eigen::Index b = 0; b < a; ++b) {
      const double diff = out.mean[a] - out.mean[b];
      const double v = amp * std::exp(-diff * diff * inv_two_l2);
      out.cov(a, b) = v;
      out.cov(b, a) = v;
    }
  }
  if (!out.mean.allFinite() || !out.cov.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite network kernel (s=" << kernel.s << ", l=" << kernel.l << ", sigma=" << kernel.sigma
        << ", pairs=" << n << ")";
    throw NumericError(msg.str());
  }
  return out;
}

double log_sigmoid(double x) {
  // log(1 / (1 + e^-x)) without overflow on either side.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double network_loglik(const Eigen::VectorXd& q, std::span<const std::uint8_t> links) {
  if (static_cast<std::size_t>(q.size()) != links.size())
    throw std::invalid_argument("link vector and Q differ in length");
  double out = 0.0;
  for (std::size_t p = 0; p < links.size(); ++p) {
    const double v = q[static_cast<Eigen::Index>(p)];
    out += links[p] ? log_sigmoid(v) : log_sigmoid(-v);
  }
  return out;
}

Eigen::LLT<Eigen::MatrixXd> factorise(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> chol(cov);
  if (chol.info() != Eigen::Success)
    throw NumericError("network covariance is not positive definite (" + std::to_string(cov.rows()) + " pairs)");
  return chol;
}

double log_gaussian_density(const Eigen::VectorXd& q, const Eigen::VectorXd& mean,
                            const Eigen::LLT<Eigen::MatrixXd>& chol) {
  const Eigen::VectorXd r = q - mean;
  const Eigen::VectorXd z = chol.matrixL().solve(r);
  const auto diag = chol.matrixLLT().diagonal();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) log_det += 2.0 * std::log(diag[i]);
  const double n = static_cast<double>(q.size());
  return -0.5 * (z.squaredNorm() + log_det + n * std::log(2.0 * std::numbers::pi));
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::LLT<Eigen::MatrixXd>& chol, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean + chol.matrixL() * z;
}

EssStep elliptical_slice_sample(const Eigen::VectorXd& q, const Eigen::VectorXd& mean,
                                const Eigen::LLT<Eigen::MatrixXd>& chol,
                                const std::function<double(const Eigen::VectorXd&)>& loglik, Rng& rng) {
  EssStep out;
  const Eigen::VectorXd f = q - mean;
  out.prior_draw = sample_gaussian(Eigen::VectorXd::Zero(mean.size()), chol, rng);
  const double current = loglik(q);
  if (!std::isfinite(current)) throw NumericError("slice sampler started at a point of zero likelihood");
  const double threshold = current + std::log(uniform01(rng));
  const double two_pi = 2.0 * std::numbers::pi;
  double angle = uniform01(rng) * two_pi;
  double lo = angle - two_pi, hi = angle;
  for (;;) {
    ++out.evaluations;
    Eigen::VectorXd proposal = mean + f * std::cos(angle) + out.prior_draw * std::sin(angle);
    if (loglik(proposal) > threshold) {
      out.q = std::move(proposal);
      out.angle = angle;
      return out;
    }
    if (angle < 0.0)
      lo = angle;
    else
      hi = angle;
    if (hi - lo < 1e-12) {
      // The bracket has collapsed onto the current point.
      out.q = q;
      out.angle = 0.0;
      return out;
    }
    angle = lo + uniform01(rng) * (hi - lo);
  }
}

GpNetworkState GpNetworkState::from_edges(std::size_t authors, const std::vector<AuthorPair>& edges,
                                          const KernelParams& kernel, bool self_links) {
  GpNetworkState s;
  s.kernel = kernel;
  s.self_links = self_links;
  s.authors = authors;
  s.pairs = author_pairs(authors, self_links);
  std::vector<std::uint8_t> dense(authors * authors, 0);
  for (const AuthorPair& e : edges) {
    if (e.first >= authors || e.second >= authors) throw std::invalid_argument("edge refers to an unknown author");
    dense[e.first * authors + e.second] = 1;
  }
  s.links.resize(s.pairs.size());
  for (std::size_t p = 0; p < s.pairs.size(); ++p) s.links[p] = dense[s.pairs[p].first * authors + s.pairs[p].second];
  s.q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.pairs.size()));
  return s;
}

}  // namespace hpyp
