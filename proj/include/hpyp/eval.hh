// Apache License, Version 2.0, refer to LICENSE.txt

// Held-out evaluation by document completion, plus clustering scores.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hpyp/hpyp_lda.hh"

namespace hpyp {

struct CompletionConfig {
  std::size_t replicates = 20;
};

// A test document cut in two: the first part estimates the topic vector,
// the second is scored.
struct TestDocument {
  std::vector<Dish> observed;
  std::vector<Dish> held_out;
};

// Even positions are observed, odd ones held out.
TestDocument split_alternating(std::span<const Dish> tokens);
std::vector<TestDocument> split_alternating(const std::vector<std::vector<Dish>>& docs);

// Posterior mean of a restaurant with per-dish customers c and tables t
// (both may be fractional) over the given base vector.
std::vector<double> restaurant_mean(std::span<const double> c, std::span<const double> t,
                                    const PypLevel& level, std::span<const double> base);

// Restricts a mean vector to its first k entries and renormalises.
std::vector<double> existing_topics(std::span<const double> v, std::size_t k);

// Sequential completion with fixed topics: every token draws a topic from
// theta_k * phi_{k,w}, bumps the customer count and sets the table count to
// half of it, then theta is re-estimated. Returns the mean over replicates.
std::vector<double> complete_document(const LdaEstimate& model, std::span<const Dish> observed,
                                      std::size_t replicates, Rng& rng);

// sum_k theta_k phi_{k,w}; tokens past the vocabulary get the unseen mass.
double token_probability(const LdaEstimate& model, std::span<const double> theta, Dish w);

double perplexity_from_log(double total_log_prob, std::size_t tokens);
double perplexity(std::span<const double> probs);
double perplexity(const LdaEstimate& model, const std::vector<TestDocument>& docs,
                  const CompletionConfig& config, Rng& rng);

// Index of the largest entry, lowest index on ties.
std::size_t dominant_topic(std::span<const double> theta);

// Hard clusterings as one label per document.
struct ClusterAssignment {
  std::vector<std::size_t> classes;
  std::vector<std::size_t> clusters;
};

double purity(const ClusterAssignment& a);
// Normalised mutual information with base-2 logs. When either side has zero
// entropy the score is 1 for identical partitions and 0 otherwise.
double nmi(const ClusterAssignment& a);

struct MetricsReport {
  std::string config_digest;
  std::vector<std::pair<std::string, double>> metrics;

  void add(const std::string& name, double value) { metrics.emplace_back(name, value); }
  void write_text(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

// 64-bit FNV-1a of the text, as 16 hex digits.
std::string config_digest(const std::string& text);

}  // namespace hpyp
