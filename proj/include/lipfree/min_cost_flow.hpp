#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "lipfree/error.hpp"

namespace lipfree {

/// Successive shortest paths with Johnson potentials on a graph with real
/// capacities and nonnegative costs. Dijkstra runs in its dense O(V^2) form,
/// which suits the small complete transport graphs built here.
class MinCostFlow {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  explicit MinCostFlow(std::size_t nodes) : adjacency_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, double capacity, double cost) {
    if (from >= adjacency_.size() || to >= adjacency_.size())
      throw Error(ErrorCode::InvalidArgument, "arc endpoint out of range");
    if (cost < 0.0) throw Error(ErrorCode::InvalidArgument, "negative arc cost");
    const std::size_t id = arcs_.size();
    arcs_.push_back({to, capacity, cost});
    arcs_.push_back({from, 0.0, -cost});
    adjacency_[from].push_back(id);
    adjacency_[to].push_back(id + 1);
    return id;
  }

  /// Flow currently carried by the arc returned from add_arc.
  double flow(std::size_t arc) const { return arcs_[arc + 1].residual; }

  struct Result {
    double flow = 0.0;
    double cost = 0.0;
  };

  /// Sends up to `amount` units from source to sink at minimum cost.
  Result solve(std::size_t source, std::size_t sink, double amount) {
    const std::size_t n = adjacency_.size();
    const double eps = 1e-13 * std::max(1.0, amount);
    std::vector<double> potential(n, 0.0);
    std::vector<double> dist(n);
    std::vector<std::size_t> via(n);
    std::vector<char> done(n);
    Result result;
    while (amount - result.flow > eps) {
      std::fill(dist.begin(), dist.end(), kUnbounded);
      std::fill(done.begin(), done.end(), 0);
      dist[source] = 0.0;
      for (;;) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
          if (!done[v] && dist[v] < kUnbounded && (u == n || dist[v] < dist[u])) u = v;
        if (u == n) break;
        done[u] = 1;
        for (std::size_t id : adjacency_[u]) {
          const Arc& a = arcs_[id];
          if (a.residual <= eps || done[a.to]) continue;
          const double reduced = std::max(0.0, a.cost + potential[u] - potential[a.to]);
          if (dist[u] + reduced < dist[a.to]) {
            dist[a.to] = dist[u] + reduced;
            via[a.to] = id;
          }
        }
      }
      if (dist[sink] == kUnbounded) break;
      double reach = 0.0;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] < kUnbounded) reach = std::max(reach, dist[v]);
      for (std::size_t v = 0; v < n; ++v) potential[v] += dist[v] < kUnbounded ? dist[v] : reach;

      double push = amount - result.flow;
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to)
        push = std::min(push, arcs_[via[v]].residual);
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].residual -= push;
        arcs_[via[v] ^ 1].residual += push;
        result.cost += push * arcs_[via[v]].cost;
      }
      result.flow += push;
    }
    return result;
  }

 private:
  struct Arc {
    std::size_t to;
    double residual;
    double cost;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

}  // namespace lipfree
