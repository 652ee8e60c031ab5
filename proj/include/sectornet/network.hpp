#pragma once

// Network geometry and connectivity: random geometric graphs, lattice
// networks, cyclic incidence ordering by bearing, and the beamwidth
// threshold below which secondary interference cannot occur.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "sectornet/errors.hpp"
#include "sectornet/rng.hpp"

namespace sectornet {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected edge, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct NetworkGeometry {
  std::vector<Point> positions;
  double range_2r = 0.0;
  std::uint64_t seed = 0;
};

/// Bearing of `to` as seen from `from`, in degrees on [0, 360).
inline double bearing_degrees(Point from, Point to) {
  double deg = std::atan2(to.y - from.y, to.x - from.x) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

/// Undirected connectivity graph with each node's incident edges kept in
/// cyclic bearing order (delta(n)).
///
/// Directed links are derived: edge e = (a, b) with a < b yields link 2e
/// (a -> b) and link 2e + 1 (b -> a).
class ConnectivityGraph {
 public:
  ConnectivityGraph() = default;

  ConnectivityGraph(std::span<const Point> positions, std::vector<Edge> edges)
      : node_count_(static_cast<int>(positions.size())) {
    for (auto& e : edges) {
      require(e.a != e.b, ErrorCode::Precondition, "self-loop edge");
      require(e.a >= 0 && e.b >= 0 && e.a < node_count_ && e.b < node_count_,
              ErrorCode::Precondition, "edge endpoint out of range");
      if (e.a > e.b) std::swap(e.a, e.b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::vector<std::vector<std::pair<double, int>>> order(node_count_);
    for (int e = 0; e < edge_count(); ++e) {
      const auto [a, b] = edges_[e];
      order[a].push_back({bearing_degrees(positions[a], positions[b]), e});
      order[b].push_back({bearing_degrees(positions[b], positions[a]), e});
    }
    delta_offset_.assign(node_count_ + 1, 0);
    for (int n = 0; n < node_count_; ++n) {
      auto& inc = order[n];
      // Ties in bearing are broken by neighbour index.
      std::sort(inc.begin(), inc.end(), [&](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first < r.first;
        return neighbor(n, l.second) < neighbor(n, r.second);
      });
      delta_offset_[n + 1] = delta_offset_[n] + static_cast<int>(inc.size());
      for (const auto& [deg, e] : inc) {
        delta_.push_back(e);
        bearings_.push_back(deg);
      }
    }
  }

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int link_count() const { return 2 * edge_count(); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }

  /// Incident edge ids of n in increasing bearing order.
  std::span<const int> delta(int n) const {
    return {delta_.data() + delta_offset_[n], static_cast<std::size_t>(degree(n))};
  }
  std::span<const double> bearings(int n) const {
    return {bearings_.data() + delta_offset_[n], static_cast<std::size_t>(degree(n))};
  }
  int degree(int n) const { return delta_offset_[n + 1] - delta_offset_[n]; }

  int max_degree() const {
    int best = 0;
    for (int n = 0; n < node_count_; ++n) best = std::max(best, degree(n));
    return best;
  }

  int neighbor(int n, int e) const { return edges_[e].a == n ? edges_[e].b : edges_[e].a; }

  /// Edge id of {a, b}, or -1.
  int find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b});
    if (it == edges_.end() || *it != Edge{a, b}) return -1;
    return static_cast<int>(it - edges_.begin());
  }

  static int link_edge(int link) { return link / 2; }
  int link_tail(int link) const { return link % 2 == 0 ? edges_[link / 2].a : edges_[link / 2].b; }
  int link_head(int link) const { return link % 2 == 0 ? edges_[link / 2].b : edges_[link / 2].a; }

  /// Directed link from -> to, or -1.
  int find_link(int from, int to) const {
    const int e = find_edge(from, to);
    if (e < 0) return -1;
    return from < to ? 2 * e : 2 * e + 1;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> delta_offset_{0};
  std::vector<int> delta_;
  std::vector<double> bearings_;
};

struct Network {
  NetworkGeometry geometry;
  ConnectivityGraph graph;
};

/// Geometric graph on fixed positions: edge iff distance < range (strict).
inline Network geometric_network(std::vector<Point> positions, double range_2r,
                                 std::uint64_t seed = 0) {
  require(range_2r > 0.0, ErrorCode::Precondition, "communication range must be positive");
  for (const auto& p : positions) {
    require(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0, ErrorCode::Precondition,
            "node position outside the unit square");
  }
  std::vector<Edge> edges;
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::hypot(positions[i].x - positions[j].x, positions[i].y - positions[j].y) < range_2r)
        edges.push_back({i, j});
    }
  }
  Network net;
  net.graph = ConnectivityGraph(positions, std::move(edges));
  net.geometry = {std::move(positions), range_2r, seed};
  return net;
}

/// Nodes i.i.d. uniform on the unit square.
inline Network random_geometric(int n_nodes, double range_2r, std::uint64_t seed) {
  require(n_nodes >= 2, ErrorCode::Precondition, "need at least two nodes");
  require(range_2r > 0.0 && range_2r <= std::numbers::sqrt2, ErrorCode::Precondition,
          "communication range must lie in (0, sqrt(2)]");
  Rng rng(seed);
  std::vector<Point> positions(n_nodes);
  for (auto& p : positions) {
    p.x = rng.uniform();
    p.y = rng.uniform();
  }
  return geometric_network(std::move(positions), range_2r, seed);
}

/// Regular lattice scaled into the unit square; node id = row * cols + col.
inline Network grid_network(int rows, int cols, bool with_diagonals) {
  require(rows >= 1 && cols >= 1 && rows * cols >= 2, ErrorCode::Precondition,
          "grid needs at least two nodes");
  const double spacing = 1.0 / (std::max(rows, cols) - 1);
  std::vector<Point> positions;
  positions.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) positions.push_back({c * spacing, r * spacing});

  std::vector<Edge> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
      if (with_diagonals && r + 1 < rows) {
        if (c + 1 < cols) edges.push_back({id(r, c), id(r + 1, c + 1)});
        if (c > 0) edges.push_back({id(r, c), id(r + 1, c - 1)});
      }
    }
  }
  Network net;
  net.graph = ConnectivityGraph(positions, std::move(edges));
  // A range that reproduces exactly these edges under the strict predicate.
  net.geometry = {std::move(positions), spacing * (with_diagonals ? 1.5 : 1.2), 0};
  return net;
}

/// Smallest angular gap between cyclically consecutive incident edges of n;
/// +inf when n has fewer than two neighbours.
inline double node_min_gap(const ConnectivityGraph& g, int n) {
  const auto b = g.bearings(n);
  if (b.size() < 2) return std::numeric_limits<double>::infinity();
  double gap = 360.0 - b.back() + b.front();
  for (std::size_t i = 0; i + 1 < b.size(); ++i) gap = std::min(gap, b[i + 1] - b[i]);
  return gap;
}

/// Beamwidth threshold: minimum over nodes of node_min_gap.
inline double theta_threshold(const ConnectivityGraph& g) {
  double theta = std::numeric_limits<double>::infinity();
  for (int n = 0; n < g.node_count(); ++n) theta = std::min(theta, node_min_gap(g, n));
  return theta;
}

}  // namespace sectornet
