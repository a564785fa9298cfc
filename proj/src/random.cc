// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/random.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpyp {

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

double uniform01(Rng& rng) {
  // (0, 1): never returns 0 so log(u) is finite.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x;
  do {
    x = u(rng);
  } while (x <= 0.0);
  return x;
}

double sample_log_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::domain_error("gamma shape must be positive");
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    double x = g(rng);
    while (x <= 0.0) x = g(rng);
    return std::log(x);
  }
  // G(a) = G(a + 1) * U^(1/a)
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  double x = g(rng);
  while (x <= 0.0) x = g(rng);
  return std::log(x) + std::log(uniform01(rng)) / shape;
}

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(rate > 0.0)) throw std::domain_error("gamma rate must be positive");
  return std::exp(sample_log_gamma(shape, rng)) / rate;
}

double sample_log_beta(double a, double b, Rng& rng) {
  double la = sample_log_gamma(a, rng);
  double lb = sample_log_gamma(b, rng);
  return la - log_add(la, lb);
}

double sample_beta(double a, double b, Rng& rng) {
  return std::exp(sample_log_beta(a, b, rng));
}

bool sample_bernoulli(double p, Rng& rng) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p;
}

std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
  double total = log_sum_exp(log_weights);
  if (total == kNegInf || std::isnan(total))
    throw std::domain_error("categorical with no positive weight");
  double u = std::log(uniform01(rng)) + total;
  double acc = kNegInf;
  std::size_t last = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (log_weights[i] == kNegInf) continue;
    acc = log_add(acc, log_weights[i]);
    last = i;
    if (u <= acc) return i;
  }
  return last;
}

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::domain_error("categorical with no positive weight");
  std::uniform_real_distribution<double> u(0.0, total);
  double r = u(rng);
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    r -= weights[i];
    if (r < 0.0) return i;
  }
  return last;
}

std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng) {
  std::vector<double> logs(concentration.size());
  for (std::size_t i = 0; i < logs.size(); ++i)
    logs[i] = sample_log_gamma(concentration[i], rng);
  double total = log_sum_exp(logs);
  std::vector<double> out(logs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out[i] = std::max(std::exp(logs[i] - total), std::numeric_limits<double>::min());
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

double log_dirichlet_density(std::span<const double> x, std::span<const double> concentration) {
  if (x.size() != concentration.size()) throw std::invalid_argument("dirichlet dimension mismatch");
  double total = 0.0;
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += concentration[i];
    out += (concentration[i] - 1.0) * std::log(x[i]) - std::lgamma(concentration[i]);
  }
  return out + std::lgamma(total);
}

}  // namespace hpyp
