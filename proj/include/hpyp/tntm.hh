// Apache License, Version 2.0, refer to LICENSE.txt

// Topic model for tweets with authors, hashtags and a follower network.
//
// Topic side (dishes are topics):
//   global (GEM) -> misc, author_i
//   author_{a_d} -> tweet_d
//   {misc, tweet_d} -> tags_d                 hashtag topics
//   {tweet_d, tags_d} -> words_d              word topics
// Vocabulary side (dishes are tokens, shared by hashtags and words):
//   vocab (uniform) -> tag_topic_k, word_topic_k
//
// Once the network stage starts, the global and author nodes are replaced by
// explicit probability vectors that a Metropolis-Hastings step updates
// jointly with the Gaussian-process link strengths.

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hpyp/corpus.hh"
#include "hpyp/eval.hh"
#include "hpyp/gp_network.hh"
#include "hpyp/hpyp_lda.hh"
#include "hpyp/topic_space.hh"

namespace hpyp {

struct TntmAblation {
  bool authors = true;      // false: one shared author node
  bool hashtags = true;     // false: hashtags are read as words
  bool misc = true;         // false: hashtag topics draw from the tweet only
  bool tag_to_word = true;  // false: word topics draw from the tweet only
  bool power_law = true;    // false: every discount is zero
  bool network = true;      // false: text-only inference throughout
};

struct TntmConfig {
  PypLevel global{0.0, 0.5};
  PypLevel misc{0.0, 0.5};
  PypLevel author{0.0, 0.5};
  PypLevel tweet{0.0, 0.5};
  PypLevel tag_doc{0.0, 0.5};
  PypLevel word_doc{0.0, 0.5};
  PypLevel vocab_root{0.7, 0.5};
  PypLevel topic_tag{0.7, 0.5};
  PypLevel topic_word{0.7, 0.5};
  double lambda = 1.0;  // Dirichlet prior on both mixing weights
  HyperPrior prior{0.1, 0.1};
  KernelParams kernel;
  bool self_links = false;
  std::size_t initial_topics = 1;
  std::size_t max_topics = std::numeric_limits<std::size_t>::max();
  bool sample_concentrations = true;
  std::size_t iterations = 2000;
  std::size_t network_start = 1000;  // sweeps of text-only inference first
  NewSlotPolicy slot_policy = NewSlotPolicy::kRenormaliseRoot;
  TntmAblation ablate;

  // Applies the power-law switch.
  TntmConfig effective() const;
};

struct TntmTraceRow {
  TraceRow text;
  double network_loglik = 0.0;  // 0 before the network stage
  int accepted = -1;            // -1 when no network step ran
};

void write_tntm_trace_header(std::ostream& out);
void write_tntm_trace_row(std::ostream& out, const TntmTraceRow& row);

struct NetworkProposal {
  std::vector<double> global;
  std::vector<std::vector<double>> authors;
  Eigen::VectorXd q;
};

struct NetworkStep {
  bool accepted = false;
  double log_ratio = 0.0;
};

// Posterior means over existing topics (new-topic slot removed).
struct TntmEstimate {
  std::vector<double> global;
  std::vector<double> misc;  // empty when ablated
  std::vector<std::vector<double>> authors;
  std::vector<std::vector<double>> topic_tags;  // empty without hashtags
  std::vector<std::vector<double>> topic_words;
  std::vector<double> vocab_root;
  // Probability each topic gives a token outside the vocabulary; when empty
  // such tokens are rejected.
  std::vector<double> unseen_tag, unseen_word;
  PypLevel tweet, tag_doc, word_doc;  // averaged over trained tweets
  double lambda = 1.0;
  TntmAblation ablate;
};

struct TestTweet {
  std::size_t author = 0;
  TestDocument tags;
  TestDocument words;
};

std::vector<TestTweet> split_alternating(const TweetCorpus& corpus);

struct TopicLabel {
  std::vector<std::string> hashtags;
  std::vector<std::string> words;
};

class Tntm {
 public:
  static Tntm build(const TweetCorpus& corpus, const TntmConfig& config, Rng& rng);

  void resample_word(std::size_t d, std::size_t n, Rng& rng);
  void resample_hashtag(std::size_t d, std::size_t m, Rng& rng);
  // Words of every tweet, then hashtags, then (before the network stage)
  // topic compaction, then concentrations of every unfrozen node.
  void sweep(Rng& rng);

  // Freezes the global and author nodes at their posterior means and sets
  // the link strengths to the prior mean.
  void start_network();
  bool network_active() const { return network_active_; }
  bool has_network() const;
  NetworkProposal current() const;
  NetworkProposal propose(Rng& rng) const;
  double log_acceptance(const NetworkProposal& proposal) const;
  NetworkStep network_step(Rng& rng);

  // Runs the remaining schedule up to config().iterations.
  std::vector<TntmTraceRow> train(Rng& rng, const std::function<void(const TntmTraceRow&)>& on_row = {});
  std::size_t iteration() const { return iteration_; }

  TntmTraceRow trace_row(int accepted) const;
  double log_posterior() const { return space_.graph.log_joint(); }
  double network_loglik() const;
  std::size_t topics() const { return space_.alive_count(); }
  TntmEstimate recover() const;
  // Count invariants and token/count agreement; empty when consistent.
  std::vector<std::string> audit() const;
  std::vector<TopicLabel> topic_labels(std::size_t top_tags, std::size_t top_words) const;

  const TntmConfig& config() const { return config_; }
  const TweetCorpus& corpus() const { return corpus_; }
  const std::vector<std::vector<Dish>>& tag_assignments() const { return tag_z_; }
  const std::vector<std::vector<Dish>>& word_assignments() const { return word_z_; }
  const TopicSpace& space() const { return space_; }
  TopicSpace& space() { return space_; }
  const GpNetworkState& network() const { return net_; }

  NodeId global_node() const { return space_.topic_root; }
  NodeId misc_node() const { return misc_; }
  NodeId author_node(std::size_t a) const { return authors_.at(a); }
  NodeId tweet_node(std::size_t d) const { return tweet_.at(d); }
  NodeId tag_doc_node(std::size_t d) const { return tag_doc_.at(d); }
  NodeId word_doc_node(std::size_t d) const { return word_doc_.at(d); }
  NodeId vocab_root_node() const { return space_.families[0].root; }
  std::size_t word_family() const { return 0; }
  std::size_t tag_family() const { return 1; }

  void save(std::ostream& out) const;
  static Tntm load(std::istream& in);

 private:
  void compact();
  void fill_vocab_nodes();
  std::vector<double> global_exponents() const;
  std::vector<std::vector<double>> author_exponents() const;
  double network_log_posterior(const std::vector<std::vector<double>>& authors, const Eigen::VectorXd& q) const;
  std::vector<std::vector<double>> author_vectors() const;

  TntmConfig config_;
  TweetCorpus corpus_;
  std::vector<std::vector<Dish>> tag_z_, word_z_;
  TopicSpace space_;
  NodeId misc_ = kNoNode;
  std::vector<NodeId> authors_;
  std::vector<NodeId> tweet_, tag_doc_, word_doc_;

  bool network_active_ = false;
  GpNetworkState net_;
  std::size_t iteration_ = 0;
};

// Completion of one test tweet: hashtags first, then words. Returns the
// replicate means of the hashtag and word topic vectors.
std::pair<std::vector<double>, std::vector<double>> complete_tweet(const TntmEstimate& model,
                                                                   const TestTweet& tweet,
                                                                   std::size_t replicates, Rng& rng);

// Joint perplexity over held-out hashtags and words.
double tntm_perplexity(const TntmEstimate& model, const std::vector<TestTweet>& tweets,
                       const CompletionConfig& config, Rng& rng);

}  // namespace hpyp
