// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/eval.hh"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace hpyp {

TestDocument split_alternating(std::span<const Dish> tokens) {
  TestDocument out;
  for (std::size_t i = 0; i < tokens.size(); ++i) (i % 2 == 0 ? out.observed : out.held_out).push_back(tokens[i]);
  return out;
}

std::vector<TestDocument> split_alternating(const std::vector<std::vector<Dish>>& docs) {
  std::vector<TestDocument> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(split_alternating(d));
  return out;
}

std::vector<double> restaurant_mean(std::span<const double> c, std::span<const double> t,
                                    const PypLevel& level, std::span<const double> base) {
  std::vector<double> out(base.begin(), base.end());
  const double C = std::accumulate(c.begin(), c.end(), 0.0);
  if (C <= 0.0) return out;
  const double T = std::accumulate(t.begin(), t.end(), 0.0);
  const double a = level.discount, b = level.concentration;
  const double new_mass = a * T + b;
  for (std::size_t k = 0; k < out.size(); ++k) {
    double own = k < c.size() ? c[k] - a * t[k] : 0.0;
    out[k] = (new_mass * out[k] + own) / (b + C);
  }
  return out;
}

std::vector<double> existing_topics(std::span<const double> v, std::size_t k) {
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < k && i < v.size(); ++i) out[i] = v[i];
  double s = std::accumulate(out.begin(), out.end(), 0.0);
  if (s <= 0.0) throw std::domain_error("topic vector has no mass on existing topics");
  for (double& x : out) x /= s;
  return out;
}

namespace {

double word_prob(const LdaEstimate& m, std::size_t k, Dish w) {
  const auto& phi = m.topic_words[k];
  return w < phi.size() ? phi[w] : m.unseen_word[k];
}

}  // namespace

std::vector<double> complete_document(const LdaEstimate& model, std::span<const Dish> observed,
                                      std::size_t replicates, Rng& rng) {
  const std::size_t K = model.topic_words.size();
  if (K == 0) throw std::domain_error("model has no topics");
  if (replicates == 0) throw std::domain_error("at least one replicate is required");
  const std::vector<double> parent = existing_topics(model.shared, K);
  if (observed.empty()) return parent;

  std::vector<double> mean(K, 0.0), c(K), t(K), w(K);
  for (std::size_t r = 0; r < replicates; ++r) {
    std::fill(c.begin(), c.end(), 0.0);
    std::fill(t.begin(), t.end(), 0.0);
    for (Dish tok : observed) {
      std::vector<double> theta = restaurant_mean(c, t, model.doc_level, parent);
      for (std::size_t k = 0; k < K; ++k) w[k] = theta[k] * word_prob(model, k, tok);
      const std::size_t k = sample_categorical(w, rng);
      c[k] += 1.0;
      t[k] = c[k] / 2.0;
    }
    std::vector<double> theta = restaurant_mean(c, t, model.doc_level, parent);
    for (std::size_t k = 0; k < K; ++k) mean[k] += theta[k];
  }
  for (double& x : mean) x /= static_cast<double>(replicates);
  return mean;
}

double token_probability(const LdaEstimate& model, std::span<const double> theta, Dish w) {
  double p = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) p += theta[k] * word_prob(model, k, w);
  return p;
}

double perplexity_from_log(double total_log_prob, std::size_t tokens) {
  if (tokens == 0) throw std::domain_error("perplexity of an empty test set");
  return std::exp(-total_log_prob / static_cast<double>(tokens));
}

double perplexity(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) s += std::log(p);
  return perplexity_from_log(s, probs.size());
}

double perplexity(const LdaEstimate& model, const std::vector<TestDocument>& docs,
                  const CompletionConfig& config, Rng& rng) {
  double total = 0.0;
  std::size_t n = 0;
  for (const TestDocument& d : docs) {
    if (d.held_out.empty()) continue;
    std::vector<double> theta = complete_document(model, d.observed, config.replicates, rng);
    for (Dish w : d.held_out) total += std::log(token_probability(model, theta, w));
    n += d.held_out.size();
  }
  return perplexity_from_log(total, n);
}

std::size_t dominant_topic(std::span<const double> theta) {
  if (theta.empty()) throw std::domain_error("empty topic vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < theta.size(); ++k)
    if (theta[k] > theta[best]) best = k;
  return best;
}

namespace {

void check(const ClusterAssignment& a) {
  if (a.classes.size() != a.clusters.size()) throw std::domain_error("classes and clusters cover different documents");
  if (a.classes.empty()) throw std::domain_error("no documents to score");
}

std::map<std::pair<std::size_t, std::size_t>, double> joint(const ClusterAssignment& a) {
  std::map<std::pair<std::size_t, std::size_t>, double> out;
  for (std::size_t i = 0; i < a.classes.size(); ++i) out[{a.clusters[i], a.classes[i]}] += 1.0;
  return out;
}

std::map<std::size_t, double> sizes(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, double> out;
  for (std::size_t l : labels) out[l] += 1.0;
  return out;
}

double entropy(const std::map<std::size_t, double>& parts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : parts) h -= c / n * std::log2(c / n);
  return h;
}

bool same_partition(const ClusterAssignment& a) {
  std::map<std::size_t, std::size_t> fwd, back;
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    auto [f, fnew] = fwd.emplace(a.clusters[i], a.classes[i]);
    auto [b, bnew] = back.emplace(a.classes[i], a.clusters[i]);
    if (f->second != a.classes[i] || b->second != a.clusters[i]) return false;
  }
  return true;
}

}  // namespace

double purity(const ClusterAssignment& a) {
  check(a);
  std::map<std::size_t, double> best;
  for (const auto& [key, c] : joint(a)) best[key.first] = std::max(best[key.first], c);
  double s = 0.0;
  for (const auto& [_, c] : best) s += c;
  return s / static_cast<double>(a.classes.size());
}

double nmi(const ClusterAssignment& a) {
  check(a);
  const double n = static_cast<double>(a.classes.size());
  const auto cs = sizes(a.classes), rs = sizes(a.clusters);
  const double hs = entropy(cs, n), hr = entropy(rs, n);
  if (hs == 0.0 || hr == 0.0) return same_partition(a) ? 1.0 : 0.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint(a)) mi += c / n * std::log2(n * c / (rs.at(key.first) * cs.at(key.second)));
  return 2.0 * mi / (hs + hr);
}

void MetricsReport::write_text(std::ostream& out) const {
  for (const auto& [name, value] : metrics) out << name << '\t' << format_double(value) << '\t' << config_digest << '\n';
}

void MetricsReport::write_json(std::ostream& out) const {
  nlohmann::ordered_json j;
  j["config_digest"] = config_digest;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& [name, value] : metrics) list.push_back({{"metric", name}, {"value", value}});
  j["metrics"] = list;
  out << j.dump(2) << '\n';
}

std::string config_digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hpyp
