// Apache License, Version 2.0, refer to LICENSE.txt

// Brute-force reference computations on very small restaurant graphs. Kept
// free of the library so the samplers can be checked against them.
//
// Two independent routes to the probability of a sequence of observations,
// summing out all table structure:
//   * counts: every per-dish table count and parent split, weighted by
//     Pitman-Yor partition weights with generalised Stirling numbers;
//   * seating: every explicit seating arrangement built by sequential
//     Chinese restaurant predictives.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

enum class Base { kNone, kGem, kUniform };

struct ToyNode {
  std::vector<int> parents;  // lower ids only
  std::vector<double> lambda;
  double discount = 0.0;
  double concentration = 1.0;
  Base base = Base::kNone;
  int vocab = 0;
  // Explicit probability vector in place of a restaurant.
  std::vector<double> fixed;
};

struct ToyGraph {
  std::vector<ToyNode> nodes;
  int add(ToyNode n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }
};

// (node, dish) pairs in arrival order.
using Observations = std::vector<std::pair<int, int>>;

inline double log_add(double a, double b) {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (a == ninf) return b;
  if (b == ninf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Generalised Stirling numbers in plain double arithmetic; only small
// arguments are needed here.
inline double stirling(int n, int m, double a) {
  std::vector<std::vector<double>> s(n + 1, std::vector<double>(n + 1, 0.0));
  s[0][0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i + 1 && j <= n; ++j) {
      double v = 0.0;
      if (j >= 1) v += s[i][j - 1];
      if (j <= i) v += (i - j * a) * s[i][j];
      s[i + 1][j] = v;
    }
  return m <= n ? s[n][m] : 0.0;
}

inline double rising_step(double x, double y, int n) {
  double out = 1.0;
  for (int i = 0; i < n; ++i) out *= x + i * y;
  return out;
}

inline double multinomial(const std::vector<int>& parts) {
  double out = 1.0;
  int total = 0;
  for (int p : parts) {
    for (int i = 1; i <= p; ++i) out *= static_cast<double>(total + i) / i;
    total += p;
  }
  return out;
}

// One nonzero table count: tables at `node` for `dish` sent to parent `slot`.
struct TableEntry {
  int node, slot, dish, tables;
};

// Calls `visit` with the log weight and table counts of every count state.
inline void enumerate_count_states(const ToyGraph& g, const Observations& obs,
                                   const std::function<void(double, const std::vector<TableEntry>&)>& visit) {
  const int N = static_cast<int>(g.nodes.size());
  std::vector<std::map<int, int>> cust(N);
  for (auto [n, k] : obs) ++cust[n][k];
  std::vector<TableEntry> trail;

  // Node-level recursion from the highest id down; within a node, dish-level
  // recursion choosing the table count and its split over parents.
  std::function<void(int, double)> visit_node;
  visit_node = [&](int id, double log_w) {
    if (id < 0) {
      visit(log_w, trail);
      return;
    }
    const ToyNode& node = g.nodes[id];
    if (!node.fixed.empty()) {
      visit_node(id - 1, log_w);
      return;
    }
    std::vector<std::pair<int, int>> dishes(cust[id].begin(), cust[id].end());
    std::vector<std::vector<int>> split;  // per dish, tables per parent slot
    const int slots = std::max<int>(1, static_cast<int>(node.parents.size()));

    std::function<void(std::size_t, double)> visit_dish;
    visit_dish = [&](std::size_t di, double w) {
      if (di == dishes.size()) {
        int C = 0, T = 0;
        std::vector<int> slot_tables(slots, 0);
        double local = 0.0;
        for (std::size_t j = 0; j < dishes.size(); ++j) {
          int t = 0;
          for (int s = 0; s < slots; ++s) {
            t += split[j][s];
            slot_tables[s] += split[j][s];
          }
          C += dishes[j].second;
          T += t;
          local += std::log(stirling(dishes[j].second, t, node.discount));
          if (slots > 1) local += std::log(multinomial(split[j]));
        }
        local += std::log(rising_step(node.concentration, node.discount, T)) -
                 std::log(rising_step(node.concentration, 1.0, C));
        if (slots > 1) {
          double lam = 0.0;
          for (int s = 0; s < slots; ++s) {
            lam += node.lambda[s];
            local += std::lgamma(node.lambda[s] + slot_tables[s]) - std::lgamma(node.lambda[s]);
          }
          local += std::lgamma(lam) - std::lgamma(lam + T);
        }
        // Base terms and customers for the parents.
        struct Push {
          int node, dish, amount;
        };
        std::vector<Push> pushed;
        const std::size_t mark = trail.size();
        for (std::size_t j = 0; j < dishes.size(); ++j) {
          for (int s = 0; s < slots; ++s) {
            const int t = split[j][s];
            if (t == 0) continue;
            trail.push_back({id, s, dishes[j].first, t});
            if (node.parents.empty()) {
              if (node.base == Base::kUniform) local += t * std::log(1.0 / node.vocab);
              continue;
            }
            const ToyNode& p = g.nodes[node.parents[s]];
            if (!p.fixed.empty()) {
              local += t * std::log(p.fixed.at(dishes[j].first));
              continue;
            }
            cust[node.parents[s]][dishes[j].first] += t;
            pushed.push_back({node.parents[s], dishes[j].first, t});
          }
        }
        visit_node(id - 1, w + local);
        trail.resize(mark);
        for (const Push& q : pushed) {
          auto& slot = cust[q.node][q.dish];
          slot -= q.amount;
          if (slot == 0) cust[q.node].erase(q.dish);
        }
        return;
      }
      const int c = dishes[di].second;
      const int max_t = node.parents.empty() && node.base == Base::kGem ? 1 : c;
      // Every split of t in [1, max_t] tables over the parent slots.
      std::vector<int> parts(slots, 0);
      std::function<void(int, int)> place;
      place = [&](int s, int left) {
        if (s == slots - 1) {
          parts[s] = left;
          split.push_back(parts);
          visit_dish(di + 1, w);
          split.pop_back();
          return;
        }
        for (int x = 0; x <= left; ++x) {
          parts[s] = x;
          place(s + 1, left - x);
        }
      };
      for (int t = 1; t <= max_t; ++t) place(0, t);
    };
    visit_dish(0, log_w);
  };
  visit_node(N - 1, 0.0);
}

// Sum over all count states.
inline double log_marginal_counts(const ToyGraph& g, const Observations& obs) {
  double total = -std::numeric_limits<double>::infinity();
  enumerate_count_states(g, obs, [&](double w, const std::vector<TableEntry>&) { total = log_add(total, w); });
  return total;
}

// Sum over explicit seating arrangements, observation by observation.
inline double log_marginal_seating(const ToyGraph& g, const Observations& obs) {
  struct Table {
    int dish;
    int size;
    int slot;
  };
  using State = std::vector<std::vector<Table>>;
  const int N = static_cast<int>(g.nodes.size());

  // Calls `next` with (probability, state) for every way to seat one
  // customer of `dish` at `id`.
  std::function<void(int, int, State&, double, const std::function<void(double, State&)>&)> seat;
  seat = [&](int id, int dish, State& st, double p, const std::function<void(double, State&)>& next) {
    const ToyNode& node = g.nodes[id];
    if (!node.fixed.empty()) {
      next(p * node.fixed.at(dish), st);
      return;
    }
    auto& tables = st[id];
    int C = 0, T = 0;
    const int slots = std::max<int>(1, static_cast<int>(node.parents.size()));
    std::vector<int> slot_tables(slots, 0);
    bool dish_at_node = false;
    for (const Table& t : tables) {
      C += t.size;
      ++T;
      ++slot_tables[t.slot];
      dish_at_node = dish_at_node || t.dish == dish;
    }
    const double denom = node.concentration + C;
    for (std::size_t j = 0; j < tables.size(); ++j) {
      if (tables[j].dish != dish) continue;
      ++tables[j].size;
      next(p * (tables[j].size - 1 - node.discount) / denom, st);
      --tables[j].size;
    }
    const double open = (node.concentration + node.discount * T) / denom;
    if (node.parents.empty()) {
      if (node.base == Base::kGem && dish_at_node) return;
      const double base = node.base == Base::kUniform ? 1.0 / node.vocab : 1.0;
      tables.push_back({dish, 1, 0});
      next(p * open * base, st);
      st[id].pop_back();
      return;
    }
    double lam = 0.0;
    for (int s = 0; s < slots; ++s) lam += slots > 1 ? node.lambda[s] : 1.0;
    for (int s = 0; s < slots; ++s) {
      const double route = slots > 1 ? (node.lambda[s] + slot_tables[s]) / (lam + T) : 1.0;
      st[id].push_back({dish, 1, s});
      seat(node.parents[s], dish, st, p * open * route, next);
      st[id].pop_back();
    }
  };

  double total = 0.0;
  std::function<void(std::size_t, double, State&)> run;
  run = [&](std::size_t i, double p, State& st) {
    if (i == obs.size()) {
      total += p;
      return;
    }
    seat(obs[i].first, obs[i].second, st, p, [&](double q, State& s2) { run(i + 1, q, s2); });
  };
  State st(N);
  run(0, 1.0, st);
  return std::log(total);
}

// Relabels a topic assignment by order of first appearance.
inline std::vector<int> canonical(const std::vector<int>& z) {
  std::map<int, int> relabel;
  std::vector<int> out;
  for (int k : z) {
    auto it = relabel.find(k);
    if (it == relabel.end()) it = relabel.emplace(k, static_cast<int>(relabel.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// All canonical labellings of n items with at most max_labels labels.
inline std::vector<std::vector<int>> canonical_labellings(int n, int max_labels) {
  std::vector<std::vector<int>> out;
  std::vector<int> z;
  std::function<void(int)> rec = [&](int used) {
    if (static_cast<int>(z.size()) == n) {
      out.push_back(z);
      return;
    }
    for (int k = 0; k <= used && k < max_labels; ++k) {
      z.push_back(k);
      rec(std::max(used, k + 1));
      z.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace oracle
