// Apache License, Version 2.0, refer to LICENSE.txt

// Three-layer hierarchical Pitman-Yor topic model:
//
//   root (GEM) -> shared -> one node per document      (topics)
//   vocabulary root (uniform) -> one node per topic    (words)

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hpyp/corpus.hh"
#include "hpyp/pyp_graph.hh"
#include "hpyp/topic_space.hh"

namespace hpyp {

struct LdaConfig {
  PypLevel root{0.0, 0.5};
  PypLevel shared{0.0, 0.5};
  PypLevel doc{0.0, 0.5};
  PypLevel vocab_root{0.7, 0.5};
  PypLevel topic_word{0.7, 0.5};
  HyperPrior prior{0.1, 0.1};
  std::size_t initial_topics = 1;
  std::size_t max_topics = std::numeric_limits<std::size_t>::max();
  bool sample_concentrations = true;
  NewSlotPolicy slot_policy = NewSlotPolicy::kRenormaliseRoot;

  // Same wiring with every discount at zero.
  LdaConfig as_dirichlet() const;
};

struct TraceRow {
  std::size_t iteration = 0;
  double log_posterior = 0.0;
  std::size_t topics = 0;
  std::vector<std::pair<std::string, double>> concentrations;
};

void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const TraceRow& row);

// Posterior means. Topic vectors have one entry per topic plus the
// new-topic slot; word vectors cover the vocabulary.
struct LdaEstimate {
  std::vector<double> root;
  std::vector<double> shared;
  std::vector<std::vector<double>> doc_topics;
  std::vector<std::vector<double>> topic_words;
  std::vector<double> vocab_root;
  // Probability each topic gives a token outside the vocabulary.
  std::vector<double> unseen_word;
  // Concentration and discount of the document level, used when completing
  // unseen documents.
  PypLevel doc_level;
};

class HpypLda {
 public:
  static HpypLda init(const Corpus& corpus, const LdaConfig& config, Rng& rng);

  void resample_token(std::size_t d, std::size_t n, Rng& rng);
  void sweep(Rng& rng);
  // Runs `iterations` sweeps; `on_row` sees the trace row after each one.
  std::vector<TraceRow> train(std::size_t iterations, Rng& rng,
                              const std::function<void(const TraceRow&)>& on_row = {});

  TraceRow trace_row(std::size_t iteration) const;
  double log_posterior() const { return space_.graph.log_joint(); }
  std::size_t topics() const { return space_.alive_count(); }
  LdaEstimate recover() const;
  LdaEstimate recover(NewSlotPolicy policy) const;
  // Count invariants and token/count agreement; empty when consistent.
  std::vector<std::string> audit() const;

  const LdaConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::vector<Dish>>& docs() const { return docs_; }
  const std::vector<std::vector<Dish>>& assignments() const { return z_; }
  const TopicSpace& space() const { return space_; }
  TopicSpace& space() { return space_; }
  NodeId root_node() const { return space_.topic_root; }
  NodeId shared_node() const { return shared_; }
  NodeId doc_node(std::size_t d) const { return docs_nodes_.at(d); }
  NodeId vocab_root_node() const { return space_.families[0].root; }
  NodeId topic_word_node(Dish k) const { return space_.vocab_node(0, k); }

  void save(std::ostream& out) const;
  static HpypLda load(std::istream& in);

 private:
  void compact();

  LdaConfig config_;
  Vocabulary vocab_;
  std::vector<std::vector<Dish>> docs_;
  std::vector<std::vector<Dish>> z_;
  TopicSpace space_;
  NodeId shared_ = kNoNode;
  std::vector<NodeId> docs_nodes_;
};

}  // namespace hpyp
