#pragma once

// Dinic max-flow on real capacities, with the minimal source-side cut.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace polyrecon {

class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1) {}

  int num_nodes() const { return static_cast<int>(head_.size()); }

  void add_edge(int from, int to, double cap, double rev_cap = 0.0) {
    edges_.push_back({to, head_[from], cap});
    head_[from] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[to], rev_cap});
    head_[to] = static_cast<int>(edges_.size()) - 1;
    max_cap_ = std::max({max_cap_, cap, rev_cap});
  }

  double solve(int s, int t) {
    eps_ = 1e-13 * std::max(1.0, max_cap_);
    double flow = 0.0;
    while (bfs(s, t)) {
      iter_ = head_;
      while (double f = dfs(s, t, std::numeric_limits<double>::infinity())) flow += f;
    }
    return flow;
  }

  /// Nodes reachable from `s` in the residual graph after solve(): the
  /// smallest source set among all minimum cuts.
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int e = head_[u]; e >= 0; e = edges_[e].next) {
        if (edges_[e].cap > eps_ && !seen[edges_[e].to]) {
          seen[edges_[e].to] = 1;
          stack.push_back(edges_[e].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e = head_[u]; e >= 0; e = edges_[e].next) {
        if (edges_[e].cap > eps_ && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    for (int& e = iter_[u]; e >= 0; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap <= eps_ || level_[ed.to] != level_[u] + 1) continue;
      const double f = dfs(ed.to, t, std::min(pushed, ed.cap));
      if (f > 0.0) {
        ed.cap -= f;
        edges_[e ^ 1].cap += f;
        return f;
      }
    }
    return 0.0;
  }

  std::vector<int> head_;
  std::vector<Edge> edges_;
  std::vector<int> level_, iter_;
  double max_cap_ = 0.0;
  double eps_ = 0.0;
};

}  // namespace polyrecon
