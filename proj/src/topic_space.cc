// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/topic_space.hh"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace hpyp {

void PathEngine::reset(std::span<const BrokenEntry> broken) {
  if (broken.size() >= static_cast<std::size_t>(kMaxCover))
    throw std::length_error("too many broken entries for one removal");
  broken_.assign(broken.begin(), broken.end());
  bump();
}

void PathEngine::set_dish(Dish k) {
  dish_ = k;
  bump();
}

void PathEngine::bump() {
  if (scratch_->stamp.size() < graph_.size()) {
    scratch_->stamp.resize(graph_.size(), 0);
    scratch_->memo.resize(graph_.size());
  }
  ++scratch_->epoch;
}

int PathEngine::broken_at(NodeId node) const {
  for (const BrokenEntry& b : broken_)
    if (b.node == node && b.dish == dish_) return 1;
  return 0;
}

bool PathEngine::parent_is_terminal(const PypNode& n, std::size_t slot) const {
  return n.is_root() || graph_.node(n.parents[slot]).frozen;
}

const Cover& PathEngine::sums(NodeId node) {
  auto& sc = *scratch_;
  if (sc.stamp[node] == sc.epoch) return sc.memo[node];
  Cover out;
  out.fill(kNegInf);
  const PypNode& n = graph_.node(node);
  const Dish k = dish_;
  const int here = broken_at(node);
  if (n.tables(k) >= 1) out[0] = graph_.log_f_ratio(node, k, 1, 0);
  const bool gem_full = n.is_root() && n.base == BaseKind::kGem && n.tables(k) >= 1;
  if (!gem_full) {
    const double open = graph_.log_f_ratio(node, k, 1, 1);
    for (std::size_t s = 0; s < n.slots(); ++s) {
      const double w = open + graph_.log_g_ratio(node, s) + graph_.log_base(node, s, k);
      if (w == kNegInf) continue;
      if (parent_is_terminal(n, s)) {
        out[here] = log_add(out[here], w);
        continue;
      }
      const Cover& up = sums(n.parents[s]);
      for (int j = 0; j + here < kMaxCover; ++j)
        if (up[j] != kNegInf) out[j + here] = log_add(out[j + here], w + up[j]);
    }
  }
  sc.memo[node] = out;
  sc.stamp[node] = sc.epoch;
  return sc.memo[node];
}

void PathEngine::sample(NodeId node, int need, Rng& rng, std::vector<PathStep>& out) {
  for (;;) {
    const PypNode& n = graph_.node(node);
    const Dish k = dish_;
    const int here = broken_at(node);
    // Option 0 joins an existing table; option s + 1 opens one towards slot s.
    double weights[16];
    const std::size_t options = n.slots() + 1;
    if (options > 16) throw std::length_error("too many parents");
    std::fill(weights, weights + options, kNegInf);
    if (need == 0 && n.tables(k) >= 1) weights[0] = graph_.log_f_ratio(node, k, 1, 0);
    const bool gem_full = n.is_root() && n.base == BaseKind::kGem && n.tables(k) >= 1;
    const int rest = need - here;
    if (!gem_full && rest >= 0) {
      const double open = graph_.log_f_ratio(node, k, 1, 1);
      for (std::size_t s = 0; s < n.slots(); ++s) {
        double w = open + graph_.log_g_ratio(node, s) + graph_.log_base(node, s, k);
        if (w == kNegInf) continue;
        if (parent_is_terminal(n, s))
          weights[s + 1] = rest == 0 ? w : kNegInf;
        else
          weights[s + 1] = w + sums(n.parents[s])[rest];
      }
    }
    std::size_t pick = sample_log_categorical(std::span<const double>(weights, options), rng);
    if (pick == 0) {
      out.push_back({node, -1});
      return;
    }
    const std::size_t s = pick - 1;
    out.push_back({node, static_cast<int>(s)});
    if (parent_is_terminal(n, s)) return;
    node = n.parents[s];
    need = rest;
  }
}

std::size_t TopicSpace::capacity() const {
  const PypNode& root = graph.node(topic_root);
  return root.frozen ? root.fixed.size() : root.dishes();
}

bool TopicSpace::alive(Dish k) const {
  const PypNode& root = graph.node(topic_root);
  if (root.frozen) return k < root.fixed.size();
  return root.cust(k) > 0;
}

std::size_t TopicSpace::alive_count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < capacity(); ++k) n += alive(static_cast<Dish>(k)) ? 1 : 0;
  return n;
}

std::vector<NodeId> TopicSpace::topic_nodes() const {
  std::vector<bool> topical(graph.size(), false);
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const PypNode& n = graph.node(static_cast<NodeId>(i));
    bool t = i == topic_root;
    for (NodeId p : n.parents) t = t || topical[p];
    topical[i] = t;
    if (t) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

NodeId TopicSpace::vocab_node(std::size_t family, Dish k) const {
  const VocabFamily& f = families.at(family);
  return k < f.nodes.size() ? f.nodes[k] : kNoNode;
}

NodeId TopicSpace::ensure_vocab_node(std::size_t family, Dish k) {
  VocabFamily& f = families.at(family);
  if (k < f.nodes.size() && f.nodes[k] != kNoNode) return f.nodes[k];
  NodeSpec spec;
  spec.name = f.prefix + std::to_string(k);
  spec.discount = f.discount;
  spec.concentration = f.concentration;
  spec.parents = {f.root};
  NodeId id = graph.add_node(spec);
  if (f.nodes.size() <= k) f.nodes.resize(static_cast<std::size_t>(k) + 1, kNoNode);
  f.nodes[k] = id;
  return id;
}

Dish TopicSpace::new_topic_id() const {
  const std::size_t cap = capacity();
  for (std::size_t k = 0; k < cap; ++k)
    if (!alive(static_cast<Dish>(k))) return static_cast<Dish>(k);
  return static_cast<Dish>(cap);
}

bool TopicSpace::topic_candidates(std::vector<Dish>& out) const {
  out.clear();
  const std::size_t cap = capacity();
  std::size_t live = 0;
  for (std::size_t k = 0; k < cap; ++k) {
    if (!alive(static_cast<Dish>(k))) continue;
    out.push_back(static_cast<Dish>(k));
    ++live;
  }
  const bool frozen_root = graph.node(topic_root).frozen;
  if (allow_new_topics && !frozen_root && live < max_topics) {
    out.push_back(new_topic_id());
    return true;
  }
  return false;
}

namespace {

struct Scored {
  std::vector<Dish> topics;
  std::vector<double> log_w;
};

// Both engines must already be reset with the broken entries of their side.
void score(TopicSpace& space, PathEngine& top, PathEngine& voc, NodeId leaf, std::size_t family,
           const std::vector<Dish>& candidates, Scored& out) {
  const VocabFamily& fam = space.families[family];
  out.topics = candidates;
  out.log_w.assign(candidates.size(), kNegInf);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Dish k = candidates[i];
    top.set_dish(k);
    double a = top.sums(leaf)[top.broken_count()];
    if (a == kNegInf) continue;
    NodeId vn = space.vocab_node(family, k);
    // A topic without a vocabulary node behaves as an empty one: the first
    // customer opens a table with ratio 1 and passes straight to the root.
    double b = vn != kNoNode ? voc.sums(vn)[voc.broken_count()] : voc.sums(fam.root)[voc.broken_count()];
    out.log_w[i] = a + b;
  }
}

void apply(Graph& graph, Dish k, const std::vector<PathStep>& path) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    const PathStep& st = path[i];
    NodeId next = graph.add_customer(st.node, k, st.slot >= 0, st.slot >= 0 ? st.slot : 0, i == 0);
    NodeId expected = i + 1 < path.size() ? path[i + 1].node : kNoNode;
    if (next != expected) throw std::logic_error("sampled path does not follow the graph");
  }
}

}  // namespace

std::vector<std::pair<Dish, double>> TopicSpace::candidate_weights(NodeId leaf, std::size_t family, Dish word) {
  PathEngine top(graph), voc(graph);
  top.reset({});
  voc.reset({});
  voc.set_dish(word);
  std::vector<Dish> cand;
  topic_candidates(cand);
  Scored s;
  score(*this, top, voc, leaf, family, cand, s);
  std::vector<std::pair<Dish, double>> out;
  for (std::size_t i = 0; i < cand.size(); ++i) out.emplace_back(cand[i], s.log_w[i]);
  return out;
}

Dish TopicSpace::resample(NodeId leaf, std::size_t family, Dish word, Dish old_topic, Rng& rng) {
  NodeId old_vn = vocab_node(family, old_topic);
  if (old_vn == kNoNode) throw std::logic_error("token topic has no vocabulary node");
  std::vector<BrokenEntry> broken_top = graph.remove_customer(leaf, old_topic, rng, true);
  std::vector<BrokenEntry> broken_voc = graph.remove_customer(old_vn, word, rng, true);

  std::vector<Dish> cand;
  bool forced = !broken_top.empty();
  for (const BrokenEntry& b : broken_voc) forced = forced || b.node == old_vn;
  if (forced)
    cand.push_back(old_topic);
  else
    topic_candidates(cand);

  PathEngine top(graph, top_scratch_), voc(graph, voc_scratch_);
  top.reset(broken_top);
  voc.reset(broken_voc);
  voc.set_dish(word);
  Scored s;
  score(*this, top, voc, leaf, family, cand, s);
  const std::size_t pick = sample_log_categorical(s.log_w, rng);
  const Dish k = s.topics[pick];

  std::vector<PathStep> path;
  top.set_dish(k);
  top.sample(leaf, top.broken_count(), rng, path);
  apply(graph, k, path);

  NodeId vn = vocab_node(family, k);
  if (vn == kNoNode) vn = ensure_vocab_node(family, k);
  PathEngine voc2(graph, voc_scratch_);
  voc2.reset(broken_voc);
  voc2.set_dish(word);
  path.clear();
  voc2.sample(vn, voc2.broken_count(), rng, path);
  apply(graph, word, path);
  return k;
}

std::vector<Dish> TopicSpace::compact(std::vector<NodeId>* node_map) {
  const std::size_t cap = capacity();
  std::vector<Dish> remap(cap, static_cast<Dish>(kNoNode));
  std::vector<NodeId> identity(graph.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<NodeId>(i);
  if (graph.node(topic_root).frozen) {
    for (std::size_t k = 0; k < cap; ++k) remap[k] = static_cast<Dish>(k);
    if (node_map) *node_map = identity;
    return remap;
  }
  Dish next = 0;
  for (std::size_t k = 0; k < cap; ++k)
    if (alive(static_cast<Dish>(k))) remap[k] = next++;
  const std::size_t live = next;
  graph.remap_dishes(topic_nodes(), remap, live);

  std::vector<NodeId> doomed;
  for (VocabFamily& f : families)
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
      if (f.nodes[k] == kNoNode) continue;
      bool keep = k < cap && remap[k] != static_cast<Dish>(kNoNode);
      if (keep) continue;
      if (graph.node(f.nodes[k]).total_c != 0)
        throw std::logic_error("retired topic still has vocabulary customers");
      doomed.push_back(f.nodes[k]);
    }
  std::vector<NodeId> ids = doomed.empty() ? identity : graph.erase_nodes(doomed);
  topic_root = ids[topic_root];
  for (VocabFamily& f : families) {
    f.root = ids[f.root];
    std::vector<NodeId> nodes(live, kNoNode);
    for (std::size_t k = 0; k < f.nodes.size(); ++k) {
      if (f.nodes[k] == kNoNode || k >= cap || remap[k] == static_cast<Dish>(kNoNode)) continue;
      nodes[remap[k]] = ids[f.nodes[k]];
    }
    f.nodes = std::move(nodes);
    for (std::size_t k = 0; k < f.nodes.size(); ++k)
      if (f.nodes[k] != kNoNode) graph.node(f.nodes[k]).name = f.prefix + std::to_string(k);
  }
  if (node_map) *node_map = std::move(ids);
  return remap;
}

std::vector<std::string> TopicSpace::audit(std::span<const TokenRecord> tokens) const {
  std::vector<std::string> report = graph.audit();
  std::map<std::pair<NodeId, Dish>, Count> expected;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const TokenRecord& r = tokens[i];
    const NodeId vn = r.family < families.size() ? vocab_node(r.family, r.topic) : kNoNode;
    if (r.leaf == kNoNode || r.leaf >= graph.size() || vn == kNoNode) {
      report.push_back("token " + std::to_string(i) + ": topic " + std::to_string(r.topic) + " has no node to hold it");
      continue;
    }
    ++expected[{r.leaf, r.topic}];
    ++expected[{vn, r.word}];
  }
  for (NodeId id = 0; id < graph.size(); ++id) {
    const PypNode& n = graph.node(id);
    for (std::size_t k = 0; k < n.d.size(); ++k) {
      const Dish dk = static_cast<Dish>(k);
      if (n.direct(dk) != 0 && !expected.count({id, dk}))
        report.push_back("node " + n.name + " dish " + std::to_string(k) + ": " + std::to_string(n.direct(dk)) +
                         " observations but no token");
    }
  }
  for (const auto& [key, count] : expected) {
    const PypNode& n = graph.node(key.first);
    if (n.direct(key.second) != count)
      report.push_back("node " + n.name + " dish " + std::to_string(key.second) + ": " +
                       std::to_string(n.direct(key.second)) + " observations for " + std::to_string(count) +
                       " tokens");
  }
  return report;
}

void TopicSpace::sample_concentrations(const HyperPrior& prior, Rng& rng) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    NodeId id = static_cast<NodeId>(i);
    if (graph.node(id).frozen) continue;
    graph.sample_concentration(id, prior, rng);
  }
}

}  // namespace hpyp
