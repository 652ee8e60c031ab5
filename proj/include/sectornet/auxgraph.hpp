#pragma once

// Auxiliary graph of a sectorized network: one vertex per (node, sector)
// and one undirected edge per physical edge, joining the sectors that hold
// the edge at either end. Under primary interference a set of links is
// schedulable in one slot iff its edges form a matching here.
//
// Both directions of a physical edge occupy the same two sector-vertices,
// so the graph is stored undirected and the auxiliary edge id equals the
// physical edge id; the direction is chosen per slot by the scheduler.

#include <algorithm>
#include <array>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

struct SectorVertex {
  int node = 0;
  int slot = 0;
};

struct AuxComponent {
  std::vector<int> vertices;  // ascending
  std::vector<int> edges;     // ascending
  bool bipartite = true;
};

class AuxiliaryGraph {
 public:
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int edge_count() const { return static_cast<int>(endpoints_.size()); }

  const std::vector<SectorVertex>& vertices() const { return vertices_; }
  const SectorVertex& vertex(int v) const { return vertices_[v]; }
  int vertex_id(int node, int slot) const { return node_offset_[node] + slot; }

  const std::array<int, 2>& endpoints(int e) const { return endpoints_[e]; }
  std::span<const int> incident(int v) const { return incident_[v]; }
  bool isolated(int v) const { return incident_[v].empty(); }
  int non_isolated_count() const {
    int c = 0;
    for (const auto& inc : incident_) c += !inc.empty();
    return c;
  }

  /// Edge isomorphism: auxiliary edge <-> physical undirected edge.
  static int aux_edge_of(int physical_edge) { return physical_edge; }
  static int physical_edge_of(int aux_edge) { return aux_edge; }

  /// Connected components that contain at least one edge.
  const std::vector<AuxComponent>& components() const { return components_; }
  /// Component index per vertex; -1 for isolated sector-vertices.
  int component_of(int v) const { return component_of_[v]; }
  /// 2-colouring side per vertex; -1 for isolated vertices or vertices in a
  /// non-bipartite component.
  int side(int v) const { return side_[v]; }
  const std::vector<int>& sides() const { return side_; }

  bool bipartite() const {
    for (const auto& c : components_)
      if (!c.bipartite) return false;
    return true;
  }

  SectorizationKind kind() const { return kind_; }
  int even_k() const { return even_k_; }

  friend AuxiliaryGraph build_auxiliary(const ConnectivityGraph&, const NetworkSectorization&);

 private:
  void decompose() {
    const int nv = vertex_count();
    component_of_.assign(nv, -1);
    side_.assign(nv, -1);
    components_.clear();
    std::vector<int> queue;
    for (int root = 0; root < nv; ++root) {
      if (isolated(root) || component_of_[root] >= 0) continue;
      const int cid = static_cast<int>(components_.size());
      AuxComponent comp;
      queue.assign({root});
      component_of_[root] = cid;
      side_[root] = 0;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        comp.vertices.push_back(v);
        for (int e : incident_[v]) {
          const int w = endpoints_[e][0] == v ? endpoints_[e][1] : endpoints_[e][0];
          if (endpoints_[e][0] == v) comp.edges.push_back(e);
          if (component_of_[w] < 0) {
            component_of_[w] = cid;
            side_[w] = 1 - side_[v];
            queue.push_back(w);
          } else if (side_[w] == side_[v]) {
            comp.bipartite = false;
          }
        }
      }
      std::sort(comp.vertices.begin(), comp.vertices.end());
      std::sort(comp.edges.begin(), comp.edges.end());
      if (!comp.bipartite)
        for (int v : comp.vertices) side_[v] = -1;
      components_.push_back(std::move(comp));
    }
  }

  std::vector<SectorVertex> vertices_;
  std::vector<int> node_offset_;
  std::vector<std::array<int, 2>> endpoints_;
  std::vector<std::vector<int>> incident_;
  std::vector<AuxComponent> components_;
  std::vector<int> component_of_;
  std::vector<int> side_;
  SectorizationKind kind_ = SectorizationKind::General;
  int even_k_ = 0;
};

inline AuxiliaryGraph build_auxiliary(const ConnectivityGraph& g, const NetworkSectorization& sigma) {
  validate_sectorization(g, sigma);
  AuxiliaryGraph h;
  h.kind_ = sigma.kind;
  h.even_k_ = sigma.even_k;
  h.node_offset_.resize(g.node_count() + 1, 0);
  for (int n = 0; n < g.node_count(); ++n) {
    const auto& ns = sigma.per_node[n];
    h.node_offset_[n + 1] = h.node_offset_[n] + ns.sector_cap;
    for (int k = 0; k < ns.sector_cap; ++k) h.vertices_.push_back({n, k});
  }
  h.endpoints_.assign(g.edge_count(), {-1, -1});
  for (int n = 0; n < g.node_count(); ++n) {
    const auto& ns = sigma.per_node[n];
    const auto delta = g.delta(n);
    for (int p = 0; p < static_cast<int>(delta.size()); ++p) {
      const int e = delta[p];
      const int v = h.vertex_id(n, ns.slot_of_sector(ns.sector_of(p)));
      h.endpoints_[e][g.edge(e).a == n ? 0 : 1] = v;
    }
  }
  h.incident_.assign(h.vertices_.size(), {});
  for (int e = 0; e < h.edge_count(); ++e) {
    h.incident_[h.endpoints_[e][0]].push_back(e);
    h.incident_[h.endpoints_[e][1]].push_back(e);
  }
  h.decompose();
  return h;
}

/// Result of splitting the auxiliary graph into isolated pieces.
struct BipartiteDecomposition {
  std::vector<AuxComponent> components;
  bool all_bipartite = true;
  /// Even homogeneous only: every edge joins sector k to (k + K/2) mod K.
  bool pairing_consistent = true;
  /// Even homogeneous only: populated sector-pair classes (k, k + K/2),
  /// k < K/2, each with its edge ids. Each class is an isolated bipartite
  /// subgraph (possibly disconnected).
  std::vector<std::pair<int, int>> pair_classes;
  std::vector<std::vector<int>> pair_class_edges;
};

inline BipartiteDecomposition bipartite_decomposition(const AuxiliaryGraph& h) {
  BipartiteDecomposition out;
  out.components = h.components();
  out.all_bipartite = h.bipartite();
  if (h.kind() != SectorizationKind::EvenHomogeneous) return out;

  const int k = h.even_k();
  const int half = k / 2;
  std::vector<std::vector<int>> by_class(half);
  for (int e = 0; e < h.edge_count(); ++e) {
    const int s0 = h.vertex(h.endpoints(e)[0]).slot;
    const int s1 = h.vertex(h.endpoints(e)[1]).slot;
    if (s1 != (s0 + half) % k) out.pairing_consistent = false;
    by_class[std::min(s0, s1) % half].push_back(e);
  }
  for (int c = 0; c < half; ++c) {
    if (by_class[c].empty()) continue;
    out.pair_classes.push_back({c, c + half});
    out.pair_class_edges.push_back(std::move(by_class[c]));
  }
  return out;
}

/// True iff the directed links occupy every sector-vertex at most once.
inline bool schedule_is_matching(std::span<const int> links, const AuxiliaryGraph& h) {
  std::vector<char> used(h.vertex_count(), 0);
  for (int link : links) {
    if (link < 0 || link >= 2 * h.edge_count())
      throw Error(ErrorCode::UnknownLink, "link id " + std::to_string(link));
  }
  for (int link : links) {
    for (int v : h.endpoints(AuxiliaryGraph::aux_edge_of(link / 2))) {
      if (used[v]) return false;
      used[v] = 1;
    }
  }
  return true;
}

/// Graphviz rendering; vertices named n<node>_<slot>, filled by component,
/// shaped by bipartition side.
inline std::string to_dot(const AuxiliaryGraph& h) {
  static constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                             "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};
  std::ostringstream os;
  os << "graph auxiliary {\n  node [style=filled, fontcolor=white];\n";
  for (int v = 0; v < h.vertex_count(); ++v) {
    const auto& sv = h.vertex(v);
    os << "  n" << sv.node << "_" << sv.slot << " [";
    if (h.isolated(v)) {
      os << "fillcolor=\"#bab0ac\"";
    } else {
      os << "fillcolor=\"" << kPalette[h.component_of(v) % 8] << "\"";
    }
    os << ", shape=" << (h.side(v) == 1 ? "box" : "ellipse") << "];\n";
  }
  for (int e = 0; e < h.edge_count(); ++e) {
    const auto& a = h.vertex(h.endpoints(e)[0]);
    const auto& b = h.vertex(h.endpoints(e)[1]);
    os << "  n" << a.node << "_" << a.slot << " -- n" << b.node << "_" << b.slot << " [label=\"e" << e
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace sectornet
