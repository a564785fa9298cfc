// Apache License, Version 2.0, refer to LICENSE.txt

// Collapsed blocked Gibbs machinery shared by the topic models.
//
// A topic space is a restaurant graph with one GEM-rooted family whose dishes
// are topics, plus one or more vocabulary families: a root with a uniform base
// and one child node per topic whose dishes are token ids. Resampling a token
// removes its customer from both sides, then draws the new topic jointly with
// the table-opening pattern along every ancestor path.

#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hpyp/pyp_graph.hh"

namespace hpyp {

// slot < 0 joins an existing table; otherwise a table is opened towards that
// parent slot.
struct PathStep {
  NodeId node;
  int slot;
};

inline constexpr int kMaxCover = 8;
using Cover = std::array<double, kMaxCover>;

// Memo buffers reused across tokens; stale entries are told apart by epoch.
struct PathScratch {
  std::uint64_t epoch = 0;
  std::vector<std::uint64_t> stamp;
  std::vector<Cover> memo;
};

// Sums over table-opening paths for one dish, indexed by how many broken
// entries the path reopens.
class PathEngine {
 public:
  explicit PathEngine(const Graph& graph) : graph_(graph), scratch_(&own_) {}
  PathEngine(const Graph& graph, PathScratch& scratch) : graph_(graph), scratch_(&scratch) {}

  void reset(std::span<const BrokenEntry> broken);
  void set_dish(Dish k);
  Dish dish() const { return dish_; }
  int broken_count() const { return static_cast<int>(broken_.size()); }

  // Log total weight of all ways to seat one more customer of the current
  // dish at `node`, split by the number of broken entries reopened.
  const Cover& sums(NodeId node);
  // Draws one path covering exactly `need` broken entries.
  void sample(NodeId node, int need, Rng& rng, std::vector<PathStep>& out);

 private:
  int broken_at(NodeId node) const;
  bool parent_is_terminal(const PypNode& n, std::size_t slot) const;

  void bump();

  const Graph& graph_;
  PathScratch own_;
  PathScratch* scratch_;
  std::vector<BrokenEntry> broken_;
  Dish dish_ = 0;
};

struct VocabFamily {
  std::string prefix;
  NodeId root = kNoNode;
  double discount = 0.0;
  double concentration = 0.5;
  std::vector<NodeId> nodes;  // per topic id; kNoNode when absent
};

// One token as the topic space sees it.
struct TokenRecord {
  NodeId leaf;
  std::size_t family;
  Dish word;
  Dish topic;
};

class TopicSpace {
 public:
  Graph graph;
  NodeId topic_root = kNoNode;
  std::vector<VocabFamily> families;
  std::size_t max_topics = std::numeric_limits<std::size_t>::max();
  bool allow_new_topics = true;

  // Dish ids the topic root knows about (alive or not).
  std::size_t capacity() const;
  bool alive(Dish k) const;
  std::size_t alive_count() const;
  // Nodes whose dishes are topics.
  std::vector<NodeId> topic_nodes() const;

  NodeId vocab_node(std::size_t family, Dish k) const;
  NodeId ensure_vocab_node(std::size_t family, Dish k);

  // One blocked Gibbs step for a token currently on topic `old_topic`, whose
  // observation sits at `leaf` (topic side) and is `word` in `family`.
  Dish resample(NodeId leaf, std::size_t family, Dish word, Dish old_topic, Rng& rng);

  // Unnormalised log weights of every candidate topic given the current
  // state, for a token that is not in the graph. Returns candidates in the
  // order they are considered.
  std::vector<std::pair<Dish, double>> candidate_weights(NodeId leaf, std::size_t family, Dish word);

  // Drops topics with no customers at the root and renumbers the rest
  // densely in increasing order. Returns old topic id -> new id (kNoNode
  // for retired ones) and old node id -> new node id through `node_map`.
  std::vector<Dish> compact(std::vector<NodeId>* node_map = nullptr);

  // Resamples the concentration of every unfrozen node.
  void sample_concentrations(const HyperPrior& prior, Rng& rng);

  // Graph invariants, plus agreement between the tokens and the observations
  // held at their leaves and vocabulary nodes. Empty when consistent.
  std::vector<std::string> audit(std::span<const TokenRecord> tokens) const;

 private:
  Dish new_topic_id() const;
  bool topic_candidates(std::vector<Dish>& out) const;

  PathScratch top_scratch_, voc_scratch_;
};

}  // namespace hpyp
