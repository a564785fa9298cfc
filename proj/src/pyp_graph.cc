// Apache License, Version 2.0, refer to LICENSE.txt

#include "hpyp/pyp_graph.hh"

#include "text_io.hh"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hpyp {

using detail::TokenReader;
using detail::write_array;

namespace {

double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log of the rising factorial (x)_n = x (x+1) ... (x+n-1).
double log_rising(double x, std::int64_t n) {
  if (n == 0) return 0.0;
  return std::lgamma(x + static_cast<double>(n)) - std::lgamma(x);
}

// log of (x|y)_n = x (x+y) ... (x+(n-1)y).
double log_rising_step(double x, double y, std::int64_t n) {
  if (n == 0) return 0.0;
  if (y == 0.0) return static_cast<double>(n) * std::log(x);
  return static_cast<double>(n) * std::log(y) + log_rising(x / y, n);
}

const char* base_name(BaseKind b) {
  switch (b) {
    case BaseKind::kGem: return "gem";
    case BaseKind::kUniform: return "uniform";
    default: return "none";
  }
}

BaseKind parse_base(const std::string& s) {
  if (s == "gem") return BaseKind::kGem;
  if (s == "uniform") return BaseKind::kUniform;
  if (s == "none") return BaseKind::kNone;
  throw std::runtime_error("unknown base kind '" + s + "'");
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, p);
}

void PypNode::ensure_dish(Dish k) {
  if (k < c.size()) return;
  std::size_t n = static_cast<std::size_t>(k) + 1;
  c.resize(n, 0);
  d.resize(n, 0);
  t.resize(n, 0);
  for (auto& row : tp) row.resize(n, 0);
}

std::shared_ptr<const StirlingCache> Graph::stirling_for(double discount) {
  auto it = caches_.find(discount);
  if (it != caches_.end()) return it->second;
  auto cache = std::make_shared<const StirlingCache>(discount);
  caches_.emplace(discount, cache);
  return cache;
}

NodeId Graph::add_node(const NodeSpec& spec) {
  if (!(spec.discount >= 0.0 && spec.discount < 1.0))
    throw std::domain_error("node '" + spec.name + "': discount must lie in [0, 1)");
  if (!(spec.concentration > -spec.discount))
    throw std::domain_error("node '" + spec.name + "': concentration must exceed -discount");
  if (spec.name.empty() || spec.name.find_first_of(" \t\n") != std::string::npos)
    throw std::invalid_argument("node names must be non-empty and free of whitespace");
  if (find(spec.name) != kNoNode) throw std::invalid_argument("duplicate node name '" + spec.name + "'");
  for (NodeId p : spec.parents)
    if (p >= nodes_.size()) throw std::invalid_argument("node '" + spec.name + "': unknown parent");
  if (spec.parents.empty() && spec.base == BaseKind::kNone)
    throw std::invalid_argument("root node '" + spec.name + "' needs a base");
  if (!spec.parents.empty() && spec.base != BaseKind::kNone)
    throw std::invalid_argument("node '" + spec.name + "' has both parents and a base");
  if (spec.base == BaseKind::kUniform && spec.base_size == 0)
    throw std::invalid_argument("uniform base needs a positive size");
  if (spec.parents.size() >= 2) {
    if (spec.lambda.size() != spec.parents.size())
      throw std::invalid_argument("node '" + spec.name + "': one prior weight per parent required");
    for (double l : spec.lambda)
      if (!(l > 0.0)) throw std::domain_error("mixing prior weights must be positive");
  }

  PypNode n;
  n.name = spec.name;
  n.discount = spec.discount;
  n.concentration = spec.concentration;
  n.parents = spec.parents;
  if (spec.parents.size() >= 2) n.lambda = spec.lambda;
  n.base = spec.base;
  n.base_size = spec.base_size;
  n.stirling = stirling_for(spec.discount);
  std::size_t slots = std::max<std::size_t>(1, spec.parents.size());
  n.tp.assign(slots, {});
  n.slot_t.assign(slots, 0);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::find(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].name == name) return static_cast<NodeId>(i);
  return kNoNode;
}

NodeId Graph::add_customer(NodeId id, Dish k, bool open_table, std::size_t slot, bool direct) {
  PypNode& n = node(id);
  if (n.frozen) throw std::logic_error("cannot add customers to frozen node '" + n.name + "'");
  if (!open_table && n.tables(k) == 0)
    throw std::logic_error("node '" + n.name + "' dish " + std::to_string(k) +
                           ": joining a table that does not exist");
  if (open_table) {
    if (slot >= n.slots()) throw std::out_of_range("parent slot out of range");
    if (n.is_root() && n.base == BaseKind::kGem && n.tables(k) >= 1)
      throw std::logic_error("GEM root '" + n.name + "' holds at most one table per dish");
  }
  n.ensure_dish(k);
  ++n.c[k];
  ++n.total_c;
  if (direct) ++n.d[k];
  if (!open_table) return kNoNode;
  ++n.tp[slot][k];
  ++n.t[k];
  ++n.total_t;
  ++n.slot_t[slot];
  if (n.is_root()) return kNoNode;
  NodeId p = n.parents[slot];
  return nodes_[p].frozen ? kNoNode : p;
}

std::vector<BrokenEntry> Graph::remove_customer(NodeId id, Dish k, Rng& rng, bool direct) {
  std::vector<BrokenEntry> broken;
  while (id != kNoNode) {
    PypNode& n = node(id);
    if (n.frozen) throw std::logic_error("cannot remove customers from frozen node '" + n.name + "'");
    const Count ck = n.cust(k);
    if (ck == 0)
      throw std::logic_error("node '" + n.name + "' dish " + std::to_string(k) + ": no customer to remove");
    if (direct && n.d[k] == 0)
      throw std::logic_error("node '" + n.name + "' dish " + std::to_string(k) + ": no observation to remove");
    // Indicator drawn from the counts before the decrement: slot i with
    // probability t_i / c, nothing otherwise.
    std::uniform_int_distribution<Count> pick(0, ck - 1);
    Count u = pick(rng);
    std::size_t slot = n.slots();
    for (std::size_t s = 0; s < n.slots(); ++s) {
      Count ts = n.tp[s][k];
      if (u < ts) {
        slot = s;
        break;
      }
      u -= ts;
    }
    --n.c[k];
    --n.total_c;
    if (direct) --n.d[k];
    direct = false;
    if (slot == n.slots()) break;
    --n.tp[slot][k];
    --n.t[k];
    --n.total_t;
    --n.slot_t[slot];
    if (n.c[k] > 0 && n.t[k] == 0) broken.push_back({id, k});
    if (n.is_root()) break;
    NodeId p = n.parents[slot];
    id = nodes_[p].frozen ? kNoNode : p;
  }
  return broken;
}

double Graph::log_f(NodeId id) const {
  const PypNode& n = node(id);
  const double a = n.discount, b = n.concentration;
  double out = log_rising_step(b, a, n.total_t) - log_rising(b, n.total_c);
  for (std::size_t k = 0; k < n.dishes(); ++k) {
    if (n.c[k] == 0) continue;
    out += n.stirling->log_stirling(n.c[k], n.t[k]) - log_binom(n.c[k], n.t[k]);
  }
  return out;
}

double Graph::log_f_ratio(NodeId id, Dish k, int dc, int dt) const {
  if (dc < 0 || dc > 1 || dt < 0 || dt > 1 || dt > dc)
    throw std::domain_error("log_f_ratio: increments must be (0,0), (1,0) or (1,1)");
  if (dc == 0) return 0.0;
  const PypNode& n = node(id);
  const double a = n.discount, b = n.concentration;
  const Count c = n.cust(k), t = n.tables(k);
  const double cd = static_cast<double>(c), td = static_cast<double>(t);
  const double denom = std::log(b + static_cast<double>(n.total_c));
  if (t == 0 && c > 0) {
    if (dt == 0) throw std::domain_error("log_f_ratio: dish has customers but no table");
    return std::log(b + a * static_cast<double>(n.total_t)) - denom +
           n.stirling->log_stirling(c + 1, 1) - std::log(cd + 1.0);
  }
  if (dt == 0) {
    return -denom + n.stirling->log_stirling_ratio(c, t, 1, 0) + std::log((cd + 1.0 - td) / (cd + 1.0));
  }
  return std::log(b + a * static_cast<double>(n.total_t)) - denom +
         n.stirling->log_stirling_ratio(c, t, 1, 1) + std::log((td + 1.0) / (cd + 1.0));
}

double Graph::log_g(NodeId id) const {
  const PypNode& n = node(id);
  if (n.parents.size() < 2) throw std::domain_error("log_g needs a node with two or more parents");
  double total = 0.0, out = 0.0;
  for (std::size_t s = 0; s < n.slots(); ++s) {
    double x = n.lambda[s] + static_cast<double>(n.slot_t[s]);
    out += std::lgamma(x);
    total += x;
  }
  return out - std::lgamma(total);
}

double Graph::log_g_ratio(NodeId id, std::size_t slot) const {
  const PypNode& n = node(id);
  if (n.parents.size() < 2) return 0.0;
  double total = static_cast<double>(n.total_t);
  for (double l : n.lambda) total += l;
  return std::log((n.lambda[slot] + static_cast<double>(n.slot_t[slot])) / total);
}

double Graph::log_base(NodeId id, std::size_t slot, Dish k) const {
  const PypNode& n = node(id);
  if (n.is_root()) {
    if (n.base == BaseKind::kUniform) return -std::log(static_cast<double>(n.base_size));
    return 0.0;
  }
  const PypNode& p = nodes_[n.parents[slot]];
  if (!p.frozen) return 0.0;
  if (k >= p.fixed.size() || p.fixed[k] <= 0.0) return kNegInf;
  return std::log(p.fixed[k]);
}

double Graph::log_joint() const {
  double out = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const PypNode& n = nodes_[i];
    if (n.frozen) continue;
    const NodeId id = static_cast<NodeId>(i);
    out += log_f(id);
    if (n.parents.size() >= 2) out += log_g(id);
    for (std::size_t s = 0; s < n.slots(); ++s) {
      bool has_base = n.is_root() ? n.base == BaseKind::kUniform : nodes_[n.parents[s]].frozen;
      if (!has_base) continue;
      for (std::size_t k = 0; k < n.tp[s].size(); ++k)
        if (n.tp[s][k] > 0)
          out += static_cast<double>(n.tp[s][k]) * log_base(id, s, static_cast<Dish>(k));
    }
  }
  return out;
}

std::size_t Graph::mean_size(NodeId id) const {
  const PypNode& n = node(id);
  if (n.frozen) return n.fixed.size() + 1;
  if (n.is_root()) return n.base == BaseKind::kUniform ? n.base_size : n.dishes() + 1;
  std::size_t out = 0;
  for (NodeId p : n.parents) out = std::max(out, mean_size(p));
  return out;
}

std::vector<double> Graph::posterior_mean(NodeId id, std::span<const double> base_mean) const {
  const PypNode& n = node(id);
  std::vector<double> out(base_mean.begin(), base_mean.end());
  if (n.frozen) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < n.fixed.size() && k < out.size(); ++k) out[k] = n.fixed[k];
    return out;
  }
  if (n.dishes() > out.size())
    throw std::logic_error("node '" + n.name + "' has more dishes than its mean vector");
  if (n.total_c == 0) return out;
  const double a = n.discount, b = n.concentration;
  const double scale = 1.0 / (b + static_cast<double>(n.total_c));
  const double new_mass = a * static_cast<double>(n.total_t) + b;
  for (std::size_t k = 0; k < out.size(); ++k) {
    double own = k < n.dishes() ? n.c[k] - a * n.t[k] : 0.0;
    out[k] = (new_mass * out[k] + own) * scale;
  }
  return out;
}

std::vector<double> Graph::mixing_mean(NodeId id) const {
  const PypNode& n = node(id);
  if (n.parents.size() < 2) return {1.0};
  double total = static_cast<double>(n.total_t);
  for (double l : n.lambda) total += l;
  std::vector<double> out(n.slots());
  for (std::size_t s = 0; s < n.slots(); ++s)
    out[s] = (static_cast<double>(n.slot_t[s]) + n.lambda[s]) / total;
  return out;
}

std::vector<std::vector<double>> Graph::posterior_means(NewSlotPolicy policy) const {
  std::vector<std::vector<double>> means(nodes_.size());
  std::vector<bool> gem_family(nodes_.size(), false);
  auto drop_slot = [](std::vector<double>& v) {
    if (v.empty()) return;
    v.back() = 0.0;
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (s > 0.0)
      for (double& x : v) x /= s;
  };
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const PypNode& n = nodes_[i];
    const NodeId id = static_cast<NodeId>(i);
    std::size_t dim = mean_size(id);
    std::vector<double> base(dim, 0.0);
    if (n.frozen) {
      gem_family[i] = true;
    } else if (n.is_root()) {
      if (n.base == BaseKind::kUniform) {
        std::fill(base.begin(), base.end(), 1.0 / static_cast<double>(dim));
      } else {
        gem_family[i] = true;
        base.back() = 1.0;
      }
    } else {
      std::vector<double> rho = mixing_mean(id);
      for (std::size_t s = 0; s < n.slots(); ++s) {
        NodeId p = n.parents[s];
        gem_family[i] = gem_family[i] || gem_family[p];
        const auto& pm = means[p];
        for (std::size_t k = 0; k < pm.size() && k < dim; ++k) base[k] += rho[s] * pm[k];
      }
    }
    means[i] = posterior_mean(id, base);
    if (policy == NewSlotPolicy::kRenormaliseRoot && n.is_root() && !n.frozen &&
        n.base == BaseKind::kGem)
      drop_slot(means[i]);
  }
  if (policy == NewSlotPolicy::kDiscardAll)
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (gem_family[i]) drop_slot(means[i]);
  return means;
}

double Graph::sample_concentration(NodeId id, const HyperPrior& prior, Rng& rng) {
  PypNode& n = node(id);
  if (n.frozen) throw std::logic_error("cannot resample the concentration of a frozen node");
  double beta;
  if (n.total_c == 0) {
    beta = sample_gamma(prior.shape, prior.rate, rng);
  } else {
    const double b = n.concentration, a = n.discount;
    // log(1 - omega) with omega ~ Beta(C, beta).
    double log_one_minus = sample_log_beta(b, static_cast<double>(n.total_c), rng);
    double heads = 1.0;  // zeta_0 is always 1
    for (std::int64_t i = 1; i < n.total_t; ++i)
      if (sample_bernoulli(b / (b + static_cast<double>(i) * a), rng)) heads += 1.0;
    beta = sample_gamma(prior.shape + heads, prior.rate - log_one_minus, rng);
  }
  n.concentration = beta;
  return beta;
}

void Graph::add_observation(NodeId id, Dish k) {
  PypNode& n = node(id);
  n.ensure_dish(k);
  ++n.d[k];
}

void Graph::seat_from_observations(Rng& rng) {
  for (PypNode& n : nodes_) {
    if (n.frozen) continue;
    n.c = n.d;
    std::fill(n.t.begin(), n.t.end(), 0);
    for (auto& row : n.tp) std::fill(row.begin(), row.end(), 0);
    std::fill(n.slot_t.begin(), n.slot_t.end(), 0);
    n.total_t = 0;
  }
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    PypNode& n = nodes_[i];
    if (n.frozen) continue;
    std::uniform_int_distribution<std::size_t> pick(0, n.slots() - 1);
    for (std::size_t k = 0; k < n.dishes(); ++k) {
      Count tables = (n.c[k] + 1) / 2;
      if (n.is_root() && n.base == BaseKind::kGem) tables = std::min<Count>(tables, 1);
      for (Count j = 0; j < tables; ++j) {
        std::size_t s = n.slots() > 1 ? pick(rng) : 0;
        ++n.tp[s][k];
        ++n.t[k];
        ++n.slot_t[s];
        ++n.total_t;
        if (n.is_root()) continue;
        PypNode& p = nodes_[n.parents[s]];
        if (p.frozen) continue;
        p.ensure_dish(static_cast<Dish>(k));
        ++p.c[k];
      }
    }
  }
  for (PypNode& n : nodes_)
    if (!n.frozen) n.total_c = std::accumulate(n.c.begin(), n.c.end(), std::int64_t{0});
}

void Graph::freeze(NodeId id, std::vector<double> probs) {
  PypNode& n = node(id);
  n.fixed = std::move(probs);
  n.frozen = true;
}

void Graph::unfreeze(NodeId id) {
  PypNode& n = node(id);
  n.fixed.clear();
  n.frozen = false;
}

std::vector<std::string> Graph::audit() const {
  std::vector<std::string> report;
  auto where = [&](const PypNode& n, std::size_t k) {
    return "node " + n.name + " dish " + std::to_string(k) + ": ";
  };
  // Expected customers from children's tables plus direct observations.
  std::vector<std::vector<std::int64_t>> inflow(nodes_.size());
  for (const PypNode& n : nodes_) {
    if (n.is_root()) continue;
    for (std::size_t s = 0; s < n.slots(); ++s) {
      auto& in = inflow[n.parents[s]];
      if (in.size() < n.tp[s].size()) in.resize(n.tp[s].size(), 0);
      for (std::size_t k = 0; k < n.tp[s].size(); ++k) in[k] += n.tp[s][k];
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const PypNode& n = nodes_[i];
    if (n.frozen) continue;
    std::int64_t sum_c = 0, sum_t = 0;
    std::vector<std::int64_t> sum_slot(n.slots(), 0);
    std::size_t dishes = std::max(n.dishes(), inflow[i].size());
    for (std::size_t k = 0; k < dishes; ++k) {
      const Dish dk = static_cast<Dish>(k);
      const Count c = n.cust(dk), t = n.tables(dk), d = n.direct(dk);
      std::int64_t t_sum = 0;
      for (std::size_t s = 0; s < n.slots(); ++s) {
        Count ts = n.tables_to(s, dk);
        if (ts < 0) report.push_back(where(n, k) + "negative table count towards slot " + std::to_string(s));
        t_sum += ts;
        sum_slot[s] += ts;
      }
      if (c < 0 || t < 0 || d < 0) report.push_back(where(n, k) + "negative count");
      if (t > c) report.push_back(where(n, k) + "tables " + std::to_string(t) + " exceed customers " + std::to_string(c));
      if ((c >= 1) != (t >= 1))
        report.push_back(where(n, k) + "customers " + std::to_string(c) + " with tables " + std::to_string(t));
      if (t != t_sum) report.push_back(where(n, k) + "per-parent tables do not add up");
      if (d > c) report.push_back(where(n, k) + "observations exceed customers");
      if (n.is_root() && n.base == BaseKind::kGem && t > 1)
        report.push_back(where(n, k) + "GEM root with more than one table");
      std::int64_t expected = d + (k < inflow[i].size() ? inflow[i][k] : 0);
      if (c != expected)
        report.push_back(where(n, k) + "customers " + std::to_string(c) + " but children and data supply " +
                         std::to_string(expected));
      sum_c += c;
      sum_t += t;
    }
    if (sum_c != n.total_c) report.push_back("node " + n.name + ": customer total out of sync");
    if (sum_t != n.total_t) report.push_back("node " + n.name + ": table total out of sync");
    for (std::size_t s = 0; s < n.slots(); ++s)
      if (sum_slot[s] != n.slot_t[s])
        report.push_back("node " + n.name + ": table total for slot " + std::to_string(s) + " out of sync");
  }
  return report;
}

std::vector<NodeId> Graph::erase_nodes(const std::vector<NodeId>& doomed) {
  std::vector<bool> gone(nodes_.size(), false);
  for (NodeId id : doomed) gone.at(id) = true;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (gone[i]) continue;
    for (NodeId p : nodes_[i].parents)
      if (gone[p]) throw std::logic_error("cannot erase node '" + nodes_[p].name + "': it still has children");
  }
  std::vector<NodeId> remap(nodes_.size(), kNoNode);
  std::vector<PypNode> kept;
  kept.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (gone[i]) continue;
    remap[i] = static_cast<NodeId>(kept.size());
    kept.push_back(std::move(nodes_[i]));
  }
  for (PypNode& n : kept)
    for (NodeId& p : n.parents) p = remap[p];
  nodes_ = std::move(kept);
  return remap;
}

void Graph::remap_dishes(const std::vector<NodeId>& ids, const std::vector<Dish>& remap,
                         std::size_t new_size) {
  for (NodeId id : ids) {
    PypNode& n = node(id);
    std::vector<Count> c(new_size, 0), d(new_size, 0), t(new_size, 0);
    std::vector<std::vector<Count>> tp(n.slots(), std::vector<Count>(new_size, 0));
    for (std::size_t k = 0; k < n.dishes(); ++k) {
      Dish to = k < remap.size() ? remap[k] : static_cast<Dish>(kNoNode);
      if (to == static_cast<Dish>(kNoNode) || to >= new_size) {
        if (n.c[k] != 0 || n.t[k] != 0)
          throw std::logic_error("node '" + n.name + "': dropping dish " + std::to_string(k) + " with counts");
        continue;
      }
      c[to] = n.c[k];
      d[to] = n.d[k];
      t[to] = n.t[k];
      for (std::size_t s = 0; s < n.slots(); ++s) tp[s][to] = n.tp[s][k];
    }
    n.c = std::move(c);
    n.d = std::move(d);
    n.t = std::move(t);
    n.tp = std::move(tp);
    if (n.frozen) {
      std::vector<double> f(new_size, 0.0);
      for (std::size_t k = 0; k < n.fixed.size() && k < remap.size(); ++k)
        if (remap[k] < new_size) f[remap[k]] = n.fixed[k];
      n.fixed = std::move(f);
    }
  }
}

void Graph::save(std::ostream& out) const {
  out << "hpyp-graph 1\n";
  out << "nodes " << nodes_.size() << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const PypNode& n = nodes_[i];
    out << "node " << i << ' ' << n.name << '\n';
    out << "discount " << format_double(n.discount) << '\n';
    out << "concentration " << format_double(n.concentration) << '\n';
    out << "base " << base_name(n.base) << ' ' << n.base_size << '\n';
    write_array(out, "parents", n.parents);
    write_array(out, "lambda", n.lambda);
    out << "frozen " << (n.frozen ? 1 : 0) << '\n';
    write_array(out, "fixed", n.fixed);
    write_array(out, "c", n.c);
    write_array(out, "d", n.d);
    for (std::size_t s = 0; s < n.slots(); ++s) write_array(out, "t", n.tp[s]);
  }
  out << "end\n";
}

Graph Graph::load(std::istream& in) {
  TokenReader r(in, "graph snapshot");
  r.expect("hpyp-graph");
  if (r.integer() != 1) throw std::runtime_error("unsupported graph snapshot version");
  r.expect("nodes");
  std::size_t count = r.size();
  Graph g;
  for (std::size_t i = 0; i < count; ++i) {
    r.expect("node");
    if (r.size() != i) throw std::runtime_error("graph snapshot: node ids out of order");
    NodeSpec spec;
    spec.name = r.word();
    r.expect("discount");
    spec.discount = r.real();
    r.expect("concentration");
    spec.concentration = r.real();
    r.expect("base");
    spec.base = parse_base(r.word());
    spec.base_size = r.size();
    spec.parents = r.array<NodeId>("parents");
    spec.lambda = r.array<double>("lambda");
    NodeId id = g.add_node(spec);
    PypNode& n = g.node(id);
    r.expect("frozen");
    n.frozen = r.integer() != 0;
    n.fixed = r.array<double>("fixed");
    n.c = r.array<Count>("c");
    n.d = r.array<Count>("d");
    if (n.d.size() != n.c.size()) throw std::runtime_error("graph snapshot: count arrays disagree");
    n.t.assign(n.c.size(), 0);
    for (std::size_t s = 0; s < n.slots(); ++s) {
      n.tp[s] = r.array<Count>("t");
      if (n.tp[s].size() != n.c.size()) throw std::runtime_error("graph snapshot: count arrays disagree");
      for (std::size_t k = 0; k < n.c.size(); ++k) n.t[k] += n.tp[s][k];
      n.slot_t[s] = std::accumulate(n.tp[s].begin(), n.tp[s].end(), std::int64_t{0});
    }
    n.total_c = std::accumulate(n.c.begin(), n.c.end(), std::int64_t{0});
    n.total_t = std::accumulate(n.t.begin(), n.t.end(), std::int64_t{0});
  }
  r.expect("end");
  return g;
}

std::vector<double> sample_stick_breaking(double discount, double concentration,
                                          std::size_t truncation, Rng& rng) {
  if (!(discount >= 0.0 && discount < 1.0)) throw std::domain_error("stick-breaking discount must lie in [0, 1)");
  if (!(concentration > -discount)) throw std::domain_error("stick-breaking concentration must exceed -discount");
  if (truncation == 0) throw std::domain_error("stick-breaking truncation must be at least 1");
  std::vector<double> out(truncation);
  double log_rest = 0.0;
  for (std::size_t k = 0; k < truncation; ++k) {
    double a = 1.0 - discount;
    double b = concentration + static_cast<double>(k + 1) * discount;
    double la = sample_log_gamma(a, rng);
    double lb = sample_log_gamma(b, rng);
    double norm = log_add(la, lb);
    out[k] = std::exp(log_rest + la - norm);
    log_rest += lb - norm;
  }
  return out;
}

}  // namespace hpyp
