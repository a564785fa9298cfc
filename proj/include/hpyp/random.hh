// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace hpyp {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with -inf handled as log 0.
double log_add(double a, double b);
double log_sum_exp(std::span<const double> xs);

double uniform01(Rng& rng);

// Log of a Gamma(shape, 1) draw. Stays finite for very small shapes, where
// a plain draw underflows to zero.
double sample_log_gamma(double shape, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);

double sample_beta(double a, double b, Rng& rng);
// log(omega) for omega ~ Beta(a, b).
double sample_log_beta(double a, double b, Rng& rng);

bool sample_bernoulli(double p, Rng& rng);

// Index drawn proportionally to exp(log_weights). Throws if every weight
// is -inf.
std::size_t sample_log_categorical(std::span<const double> log_weights, Rng& rng);
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

// Dirichlet draw; entries that would underflow are clamped to the smallest
// normal double before renormalising.
std::vector<double> sample_dirichlet(std::span<const double> concentration, Rng& rng);

double log_dirichlet_density(std::span<const double> x, std::span<const double> concentration);

}  // namespace hpyp
