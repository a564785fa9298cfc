// Apache License, Version 2.0, refer to LICENSE.txt

// Restaurant graph in the table-multiplicity representation. Each node keeps
// per-dish customer counts and, for every parent slot, per-dish table counts.
// A node's tables are its parent's customers. Roots draw new tables from a
// terminal base: GEM (every dish gets exactly one table) or a uniform
// distribution over a fixed vocabulary.
//
// A node can also be frozen to an explicit probability vector. Its counts stop
// changing and tables opened towards it pick up the vector entry as their base
// probability instead of recursing further.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hpyp/random.hh"
#include "hpyp/stirling.hh"

namespace hpyp {

using NodeId = std::uint32_t;
using Dish = std::uint32_t;
using Count = std::int32_t;

inline constexpr NodeId kNoNode = ~NodeId{0};

enum class BaseKind { kNone, kGem, kUniform };

struct HyperPrior {
  double shape = 0.1;
  double rate = 0.1;
};

struct NodeSpec {
  std::string name;
  double discount = 0.0;
  double concentration = 0.5;
  std::vector<NodeId> parents;
  // Dirichlet prior on the mixing weights; required with two or more parents.
  std::vector<double> lambda;
  BaseKind base = BaseKind::kNone;
  std::size_t base_size = 0;  // vocabulary size for a uniform base
};

struct PypNode {
  std::string name;
  double discount = 0.0;
  double concentration = 0.5;
  std::vector<NodeId> parents;
  std::vector<double> lambda;
  BaseKind base = BaseKind::kNone;
  std::size_t base_size = 0;
  std::shared_ptr<const StirlingCache> stirling;

  std::vector<Count> c;                // customers per dish
  std::vector<Count> d;                // direct observations per dish
  std::vector<Count> t;                // tables per dish, all slots
  std::vector<std::vector<Count>> tp;  // tables per slot per dish
  std::int64_t total_c = 0;
  std::int64_t total_t = 0;
  std::vector<std::int64_t> slot_t;  // tables per slot

  std::vector<double> fixed;  // explicit probabilities when frozen
  bool frozen = false;

  bool is_root() const { return parents.empty(); }
  std::size_t slots() const { return tp.size(); }
  std::size_t dishes() const { return c.size(); }
  Count cust(Dish k) const { return k < c.size() ? c[k] : 0; }
  Count tables(Dish k) const { return k < t.size() ? t[k] : 0; }
  Count tables_to(std::size_t slot, Dish k) const {
    return k < tp[slot].size() ? tp[slot][k] : 0;
  }
  Count direct(Dish k) const { return k < d.size() ? d[k] : 0; }
  void ensure_dish(Dish k);
};

// Nodes whose removal step dropped the last table of a dish that still has
// customers. The next addition has to reopen a table at each of them.
struct BrokenEntry {
  NodeId node;
  Dish dish;
};

enum class NewSlotPolicy { kKeep, kRenormaliseRoot, kDiscardAll };

class Graph {
 public:
  Graph() = default;

  // Parents must already exist, so node ids are a topological order.
  NodeId add_node(const NodeSpec& spec);
  std::size_t size() const { return nodes_.size(); }
  const PypNode& node(NodeId id) const { return nodes_.at(id); }
  PypNode& node(NodeId id) { return nodes_.at(id); }
  NodeId find(const std::string& name) const;

  // Adds one customer for dish k. With open_table the new table goes to
  // parent slot `slot` and the returned id is the node that receives the
  // matching customer (kNoNode when the slot leads to a base or a frozen
  // node). direct marks an observation rather than a child's table.
  NodeId add_customer(NodeId id, Dish k, bool open_table, std::size_t slot = 0,
                      bool direct = false);

  // Removes one customer of dish k at `id` and recursively at whichever
  // parent loses a table. Returns the entries left with customers but no
  // table.
  std::vector<BrokenEntry> remove_customer(NodeId id, Dish k, Rng& rng, bool direct = false);

  double log_f(NodeId id) const;
  // log f(after) - log f(before) for one customer (dc) and table (dt) more.
  // A dish with customers but no table contributes nothing to "before".
  double log_f_ratio(NodeId id, Dish k, int dc, int dt) const;
  double log_g(NodeId id) const;
  double log_g_ratio(NodeId id, std::size_t slot) const;
  // Log base probability of a table routed from `id` through `slot`:
  // uniform base, frozen parent entry, or 0 for GEM and interior parents.
  double log_base(NodeId id, std::size_t slot, Dish k) const;
  // Sum of log f, log g and base terms over the whole graph.
  double log_joint() const;

  // Number of entries in this node's mean vector: dish capacity of the GEM
  // family plus one new-dish slot, or the uniform base size.
  std::size_t mean_size(NodeId id) const;
  std::vector<double> posterior_mean(NodeId id, std::span<const double> base_mean) const;
  std::vector<std::vector<double>> posterior_means(NewSlotPolicy policy) const;
  // Mixing weights (T_i + lambda_i) / (T + sum lambda).
  std::vector<double> mixing_mean(NodeId id) const;

  double sample_concentration(NodeId id, const HyperPrior& prior, Rng& rng);

  // Direct observations are the only input; everything else is rebuilt by
  // seating ceil(c/2) tables per dish from the leaves up (one table per dish
  // at a GEM root). Multi-parent tables pick a parent uniformly at random.
  void add_observation(NodeId id, Dish k);
  void seat_from_observations(Rng& rng);

  void freeze(NodeId id, std::vector<double> probs);
  void unfreeze(NodeId id);

  std::vector<std::string> audit() const;

  // Removes nodes nobody points at. Returns old id -> new id (kNoNode for
  // erased ones).
  std::vector<NodeId> erase_nodes(const std::vector<NodeId>& doomed);
  // Renumbers dishes for the given nodes: dish k becomes remap[k], entries
  // mapped to kNoNode must be empty and are dropped.
  void remap_dishes(const std::vector<NodeId>& ids, const std::vector<Dish>& remap,
                    std::size_t new_size);

  void save(std::ostream& out) const;
  static Graph load(std::istream& in);

  std::shared_ptr<const StirlingCache> stirling_for(double discount);

 private:
  std::vector<PypNode> nodes_;
  std::map<double, std::shared_ptr<const StirlingCache>> caches_;
};

// Truncated stick-breaking draw of GEM(discount, concentration) weights.
std::vector<double> sample_stick_breaking(double discount, double concentration,
                                          std::size_t truncation, Rng& rng);

std::string format_double(double x);

}  // namespace hpyp
