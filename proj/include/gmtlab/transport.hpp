#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "gmtlab/error.hpp"

namespace gmtlab {

struct TransportSolution {
  double cost = 0.0;
  /// Node potentials: reduced cost of arc (i, j) is c(i, j) + source_pi[i] - sink_pi[j].
  std::vector<double> source_pi;
  std::vector<double> sink_pi;
  /// Most negative reduced cost over all arcs at termination (>= -tolerance).
  double min_reduced_cost = 0.0;
  std::size_t pivots = 0;
  /// Candidate-list extensions performed.
  std::size_t rounds = 0;
};

struct TransportOptions {
  /// Optional hub pair (source s*, sink t*). When every other source can ship
  /// its whole supply to t* and s* can cover every other sink, the simplex
  /// starts from the star-shaped basis through the hub instead of the
  /// artificial one.
  int hub_source = -1;
  int hub_sink = -1;
  /// Optional sparse arc set to price first. Optimality is still certified
  /// against the complete arc set.
  std::vector<std::pair<int, int>> candidate_arcs;
};

/// Primal network simplex for the uncapacitated transportation problem
///
///   min sum c(i, j) x_ij   s.t.  sum_j x_ij = supply_i,  sum_i x_ij = demand_j,  x >= 0
///
/// on the complete bipartite graph, with costs supplied by a callable so the
/// arc set is never materialized. Uses a big-M artificial start, block
/// pricing and Cunningham's strongly feasible leaving-arc rule.
class TransportSimplex {
 public:
  template <typename Cost>
  static TransportSolution solve(std::span<const double> supply, std::span<const double> demand, Cost&& cost,
                                 const TransportOptions& opt = {}) {
    TransportSimplex s(supply, demand);
    return s.run(cost, opt, supply, demand);
  }

 private:
  static constexpr int kArtificial = -1;

  TransportSimplex(std::span<const double> supply, std::span<const double> demand)
      : ns_(static_cast<int>(supply.size())), nt_(static_cast<int>(demand.size())), root_(ns_ + nt_) {
    double ts = 0.0, td = 0.0;
    for (double v : supply) {
      require(v >= 0.0 && std::isfinite(v), "transport: supplies must be nonnegative");
      ts += v;
    }
    for (double v : demand) {
      require(v >= 0.0 && std::isfinite(v), "transport: demands must be nonnegative");
      td += v;
    }
    require(std::abs(ts - td) <= 1e-9 * std::max(1.0, ts), "transport: unbalanced problem");
    const int n = root_ + 1;
    parent_.assign(n, root_);
    arc_src_.assign(n, kArtificial);
    arc_snk_.assign(n, kArtificial);
    flow_.assign(n, 0.0);
    up_.assign(n, 1);
    depth_.assign(n, 1);
    pi_.assign(n, 0.0);
    children_.assign(n, {});
    parent_[root_] = -1;
    depth_[root_] = 0;
    for (int i = 0; i < ns_; ++i) {
      flow_[i] = supply[i];
      up_[i] = 1;
      children_[root_].push_back(i);
    }
    for (int j = 0; j < nt_; ++j) {
      flow_[ns_ + j] = demand[j];
      // Zero-demand sinks point toward the root so the start is strongly feasible.
      up_[ns_ + j] = demand[j] > 0.0 ? 0 : 1;
      children_[root_].push_back(ns_ + j);
    }
    scale_ = std::max(1.0, ts);
  }

  // Rebuilds the tree as root -> t*, t* -> s*, t* -> other sources,
  // s* -> other sinks. Zero-flow arcs point toward the root.
  bool try_hub_start(const TransportOptions& opt, std::span<const double> supply, std::span<const double> demand) {
    const int hs = opt.hub_source, ht = opt.hub_sink;
    if (hs < 0 || ht < 0 || hs >= ns_ || ht >= nt_) return false;
    double other_demand = 0.0, other_supply = 0.0;
    for (int j = 0; j < nt_; ++j)
      if (j != ht) {
        if (!(demand[j] > 0.0)) return false;
        other_demand += demand[j];
      }
    for (int i = 0; i < ns_; ++i)
      if (i != hs) other_supply += supply[i];
    const double hub_flow = supply[hs] - other_demand;
    if (hub_flow < -1e-12 * scale_) return false;
    const int t = ns_ + ht;
    for (auto& c : children_) c.clear();
    parent_[t] = root_;
    arc_src_[t] = arc_snk_[t] = kArtificial;
    flow_[t] = 0.0;
    up_[t] = 1;
    children_[root_].push_back(t);
    auto attach = [&](int w, int par, int src, int snk, double f, char up) {
      parent_[w] = par;
      arc_src_[w] = src;
      arc_snk_[w] = snk;
      flow_[w] = f;
      up_[w] = up;
      children_[par].push_back(w);
    };
    attach(hs, t, hs, ht, std::max(0.0, hub_flow), 1);
    for (int i = 0; i < ns_; ++i)
      if (i != hs) attach(i, t, i, ht, supply[i], 1);
    for (int j = 0; j < nt_; ++j)
      if (j != ht) attach(ns_ + j, hs, hs, j, demand[j], 0);
    (void)other_supply;
    return true;
  }

  template <typename Cost>
  TransportSolution run(Cost& cost, const TransportOptions& opt, std::span<const double> supply,
                        std::span<const double> demand) {
    TransportSolution sol;
    if (ns_ == 0 || nt_ == 0) {
      sol.source_pi.assign(ns_, 0.0);
      sol.sink_pi.assign(nt_, 0.0);
      return sol;
    }
    double cmax = 0.0;
    for (int i = 0; i < ns_; ++i)
      for (int j = 0; j < nt_; ++j) {
        const double c = cost(i, j);
        require(c >= 0.0 && std::isfinite(c), "transport: costs must be finite and nonnegative");
        cmax = std::max(cmax, c);
      }
    big_m_ = 1.0 + (static_cast<double>(ns_ + nt_) + 1.0) * std::max(cmax, 1.0);
    eps_ = 64.0 * std::numeric_limits<double>::epsilon() * big_m_;
    if (try_hub_start(opt, supply, demand)) {
      refresh_subtree(ns_ + opt.hub_sink, cost);
    } else {
      for (int w = 0; w < root_; ++w) pi_[w] = up_[w] ? -big_m_ : big_m_;
    }

    // With a candidate list the simplex prices only those arcs; at its
    // optimum a full scan adds every violated arc and the solve resumes from
    // the current basis.
    std::vector<std::pair<int, int>> cand = opt.candidate_arcs;
    for (const auto& [i, j] : cand)
      require(i >= 0 && i < ns_ && j >= 0 && j < nt_, "transport: candidate arc out of range");
    const bool sparse = !cand.empty();
    const std::size_t dense_arcs = static_cast<std::size_t>(ns_) * nt_;
    const std::size_t max_pivots = 50 * dense_arcs + 100000;
    std::size_t next = 0;
    for (;;) {
      const std::size_t arcs = sparse ? cand.size() : dense_arcs;
      const std::size_t block = std::max<std::size_t>(32, static_cast<std::size_t>(std::sqrt(double(arcs))));
      if (next >= arcs) next = 0;
      for (;;) {
        // Block pricing: scan arcs in blocks starting where the last scan ended,
        // entering the most negative reduced cost of the first block that has one.
        int best_i = -1, best_j = -1;
        double best = -eps_;
        std::size_t scanned = 0, in_block = 0;
        while (scanned < arcs) {
          int i, j;
          if (sparse) {
            i = cand[next].first;
            j = cand[next].second;
          } else {
            i = static_cast<int>(next / nt_);
            j = static_cast<int>(next % nt_);
          }
          const double rc = cost(i, j) + pi_[i] - pi_[ns_ + j];
          if (rc < best) {
            best = rc;
            best_i = i;
            best_j = j;
          }
          ++scanned;
          if (++next == arcs) next = 0;
          if (++in_block == block) {
            if (best_i >= 0) break;
            in_block = 0;
          }
        }
        if (best_i < 0) break;
        pivot(best_i, best_j, cost);
        if (++sol.pivots > max_pivots) throw SolverError("transport: pivot limit exceeded");
      }
      if (!sparse) break;
      std::size_t added = 0;
      std::vector<std::pair<double, int>> viol;
      for (int i = 0; i < ns_; ++i) {
        viol.clear();
        for (int j = 0; j < nt_; ++j) {
          const double rc = cost(i, j) + pi_[i] - pi_[ns_ + j];
          if (rc < -eps_) viol.emplace_back(rc, j);
        }
        const std::size_t keep = std::min<std::size_t>(viol.size(), 8);
        std::partial_sort(viol.begin(), viol.begin() + keep, viol.end());
        for (std::size_t k = 0; k < keep; ++k) cand.emplace_back(i, viol[k].second);
        added += keep;
      }
      if (added == 0) break;
      ++sol.rounds;
    }

    double total = 0.0, artificial = 0.0;
    for (int v = 0; v < root_; ++v) {
      if (arc_src_[v] == kArtificial) {
        artificial += flow_[v];
      } else {
        total += flow_[v] * cost(arc_src_[v], arc_snk_[v]);
      }
    }
    if (artificial > 1e-9 * scale_) {
      throw SolverError("transport: artificial flow " + std::to_string(artificial) + " remains at optimum");
    }
    double minrc = 0.0;
    for (int i = 0; i < ns_; ++i)
      for (int j = 0; j < nt_; ++j) minrc = std::min(minrc, cost(i, j) + pi_[i] - pi_[ns_ + j]);
    sol.cost = total;
    sol.min_reduced_cost = minrc;
    sol.source_pi.assign(pi_.begin(), pi_.begin() + ns_);
    sol.sink_pi.assign(pi_.begin() + ns_, pi_.begin() + ns_ + nt_);
    return sol;
  }

  template <typename Cost>
  void pivot(int si, int tj, Cost& cost) {
    const int u = si, v = ns_ + tj;
    // Paths from both endpoints up to their common ancestor.
    path_u_.clear();
    path_v_.clear();
    int a = u, b = v;
    while (depth_[a] > depth_[b]) {
      path_u_.push_back(a);
      a = parent_[a];
    }
    while (depth_[b] > depth_[a]) {
      path_v_.push_back(b);
      b = parent_[b];
    }
    while (a != b) {
      path_u_.push_back(a);
      a = parent_[a];
      path_v_.push_back(b);
      b = parent_[b];
    }
    // Flow is pushed along u -> v, then from v up to the join and down to u.
    // On the v side an arc decreases when it points parent -> node, on the u
    // side when it points node -> parent.
    double delta = std::numeric_limits<double>::infinity();
    for (int w : path_v_)
      if (!up_[w]) delta = std::min(delta, flow_[w]);
    for (int w : path_u_)
      if (up_[w]) delta = std::min(delta, flow_[w]);
    if (!std::isfinite(delta)) throw SolverError("transport: unbounded pivot");

    // Last blocking arc in cycle order join -> u -> v -> join.
    int leave = -1;
    bool leave_on_v = false;
    for (auto it = path_v_.rbegin(); it != path_v_.rend(); ++it)
      if (!up_[*it] && flow_[*it] <= delta) {
        leave = *it;
        leave_on_v = true;
        break;
      }
    if (leave < 0) {
      for (int w : path_u_)
        if (up_[w] && flow_[w] <= delta) {
          leave = w;
          break;
        }
    }

    for (int w : path_v_) flow_[w] = clean(flow_[w] + (up_[w] ? delta : -delta));
    for (int w : path_u_) flow_[w] = clean(flow_[w] + (up_[w] ? -delta : delta));

    const int q = leave_on_v ? v : u;  // endpoint inside the detached subtree
    const int p = leave_on_v ? u : v;

    // Re-root the detached subtree at q by reversing the path q -> leave.
    detach(leave);
    int w = q;
    int prev = -1;
    int prev_src = si, prev_snk = tj;
    double prev_flow = delta;
    char prev_up = (q == u) ? 1 : 0;  // arc u -> v points from q to p iff q == u
    int prev_parent = p;
    for (;;) {
      const int old_parent = parent_[w];
      const int old_src = arc_src_[w], old_snk = arc_snk_[w];
      const double old_flow = flow_[w];
      const char old_up = up_[w];
      if (w != leave) remove_child(old_parent, w);
      parent_[w] = prev_parent;
      arc_src_[w] = prev_src;
      arc_snk_[w] = prev_snk;
      flow_[w] = prev_flow;
      up_[w] = prev_up;
      children_[prev_parent].push_back(w);
      if (w == leave) break;
      prev = w;
      prev_parent = w;
      prev_src = old_src;
      prev_snk = old_snk;
      prev_flow = old_flow;
      prev_up = static_cast<char>(!old_up);
      w = old_parent;
    }
    (void)prev;
    refresh_subtree(q, cost);
  }

  void detach(int w) { remove_child(parent_[w], w); }

  void remove_child(int parent, int child) {
    auto& c = children_[parent];
    auto it = std::find(c.begin(), c.end(), child);
    if (it != c.end()) {
      *it = c.back();
      c.pop_back();
    }
  }

  double clean(double f) const { return f < 1e-15 * scale_ ? 0.0 : f; }

  // Recomputes depth and potentials below q from the tree arcs, so reduced
  // costs of tree arcs are exactly zero and no drift accumulates.
  template <typename Cost>
  void refresh_subtree(int q, Cost& cost) {
    stack_.clear();
    stack_.push_back(q);
    while (!stack_.empty()) {
      const int w = stack_.back();
      stack_.pop_back();
      const int par = parent_[w];
      depth_[w] = depth_[par] + 1;
      if (arc_src_[w] == kArtificial) {
        pi_[w] = up_[w] ? pi_[root_] - big_m_ : pi_[root_] + big_m_;
      } else {
        const double c = cost(arc_src_[w], arc_snk_[w]);
        // c + pi[src] - pi[snk] = 0 on tree arcs.
        pi_[w] = w < ns_ ? pi_[par] - c : pi_[par] + c;
      }
      for (int ch : children_[w]) stack_.push_back(ch);
    }
  }

  int ns_, nt_, root_;
  double big_m_ = 1.0, eps_ = 0.0, scale_ = 1.0;
  std::vector<int> parent_, arc_src_, arc_snk_, depth_;
  std::vector<double> flow_, pi_;
  std::vector<char> up_;
  std::vector<std::vector<int>> children_;
  std::vector<int> path_u_, path_v_, stack_;
};

}  // namespace gmtlab
