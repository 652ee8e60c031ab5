#pragma once

// Sectorizations in cut form.
//
// Under primary interference only the partition of delta(n) into
// contiguous runs matters, not the exact axis angles, so a node's
// sectorization is the set of gaps of its cyclic incidence sequence that
// carry a sectoring axis. A cut at gap i separates delta(n)[i] from
// delta(n)[(i + 1) % |delta(n)|].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"

namespace sectornet {

struct NodeSectorization {
  /// Sorted, distinct gap indices in [0, |delta(n)|).
  std::vector<int> cuts;
  /// K_n: number of sector-vertices the node contributes to the auxiliary graph.
  int sector_cap = 1;
  /// Optional absolute sector label per cut-sector (angular sector index
  /// under even homogeneous sectorization). Empty means label == sector.
  std::vector<int> labels;

  int sector_count() const { return static_cast<int>(cuts.size()); }

  /// Sector index of the edge at position p of delta(n).
  int sector_of(int p) const {
    const int j = sector_count();
    const int below = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), p) - cuts.begin());
    return below % j;
  }

  /// Vertex slot in [0, sector_cap) used by sector s.
  int slot_of_sector(int s) const { return labels.empty() ? s : labels[s]; }

  friend bool operator==(const NodeSectorization&, const NodeSectorization&) = default;
};

enum class SectorizationKind { Unsectorized, General, EvenHomogeneous };

inline const char* to_string(SectorizationKind kind) {
  switch (kind) {
    case SectorizationKind::Unsectorized: return "unsectorized";
    case SectorizationKind::General: return "general";
    case SectorizationKind::EvenHomogeneous: return "even_homogeneous";
  }
  return "general";
}

struct NetworkSectorization {
  SectorizationKind kind = SectorizationKind::General;
  int even_k = 0;            // K when kind == EvenHomogeneous
  double axis_offset = 0.0;  // degrees, when kind == EvenHomogeneous
  std::vector<NodeSectorization> per_node;
};

/// Per-sector flow sums. Every sector is summed in ascending delta index,
/// so a sector's value depends only on its edge set.
inline std::vector<double> sector_sums(const NodeSectorization& ns, std::span<const double> flows) {
  const int d = static_cast<int>(flows.size());
  const int j = ns.sector_count();
  std::vector<double> sums(j, 0.0);
  std::size_t below = 0;  // cuts strictly before p
  for (int p = 0; p < d; ++p) {
    while (below < ns.cuts.size() && ns.cuts[below] < p) ++below;
    sums[below % j] += flows[p];
  }
  return sums;
}

inline double max_sector_sum(const NodeSectorization& ns, std::span<const double> flows) {
  double best = 0.0;
  for (double s : sector_sums(ns, flows)) best = std::max(best, s);
  return best;
}

/// Checks a node sectorization against a node of degree `degree`.
inline void validate_node_sectorization(const NodeSectorization& ns, int degree) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::SectorizationMismatch, msg); };
  if (ns.sector_cap < 1) fail("sector cap must be positive");
  if (degree == 0) {
    if (!ns.cuts.empty()) fail("node without edges cannot carry cuts");
    return;
  }
  if (ns.cuts.empty()) fail("node with edges needs at least one cut");
  if (ns.sector_count() > ns.sector_cap) fail("more sectors than the sector cap");
  for (std::size_t i = 0; i < ns.cuts.size(); ++i) {
    if (ns.cuts[i] < 0 || ns.cuts[i] >= degree) fail("cut index outside delta(n)");
    if (i > 0 && ns.cuts[i] <= ns.cuts[i - 1]) fail("cuts must be sorted and distinct");
  }
  if (!ns.labels.empty()) {
    if (ns.labels.size() != ns.cuts.size()) fail("one label per sector required");
    std::vector<int> seen(ns.labels);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) fail("duplicate sector label");
    for (int l : ns.labels)
      if (l < 0 || l >= ns.sector_cap) fail("sector label outside [0, K_n)");
  }
}

inline void validate_sectorization(const ConnectivityGraph& g, const NetworkSectorization& sigma) {
  require(static_cast<int>(sigma.per_node.size()) == g.node_count(),
          ErrorCode::SectorizationMismatch, "sectorization does not cover every node");
  for (int n = 0; n < g.node_count(); ++n) validate_node_sectorization(sigma.per_node[n], g.degree(n));
}

inline NodeSectorization unsectorized_node(int degree) {
  NodeSectorization ns;
  if (degree > 0) ns.cuts = {degree - 1};
  return ns;
}

inline NetworkSectorization unsectorized(const ConnectivityGraph& g) {
  NetworkSectorization sigma;
  sigma.kind = SectorizationKind::Unsectorized;
  sigma.per_node.reserve(g.node_count());
  for (int n = 0; n < g.node_count(); ++n) sigma.per_node.push_back(unsectorized_node(g.degree(n)));
  return sigma;
}

namespace detail {

inline double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

inline double cyclic_distance(double a, double b) {
  const double d = wrap360(a - b);
  return std::min(d, 360.0 - d);
}

constexpr double kAxisTolerance = 1e-9;  // degrees

}  // namespace detail

/// Converts angular sectoring axes into cut form.
///
/// A cut is placed at gap i iff some axis lies strictly inside the arc
/// from bearing i to bearing i + 1; several axes in one gap collapse into a
/// single cut. Sector labels record which axis arc (by index into `axes`,
/// the arc running counter-clockwise from that axis) holds each sector.
inline NodeSectorization axes_to_cuts(std::span<const double> bearings, std::span<const double> axes) {
  const int d = static_cast<int>(bearings.size());
  const int m = static_cast<int>(axes.size());
  std::vector<double> wrapped(m);
  for (int i = 0; i < m; ++i) wrapped[i] = detail::wrap360(axes[i]);
  for (int i = 0; i < m; ++i)
    for (int k = i + 1; k < m; ++k)
      require(detail::cyclic_distance(wrapped[i], wrapped[k]) > detail::kAxisTolerance,
              ErrorCode::Precondition, "axis bearings must be distinct modulo 360");

  NodeSectorization ns;
  ns.sector_cap = std::max(1, m);
  if (d == 0) return ns;
  if (m == 0) return unsectorized_node(d);

  for (double a : wrapped) {
    for (double b : bearings) {
      if (detail::cyclic_distance(a, b) <= detail::kAxisTolerance)
        throw Error(ErrorCode::AxisOnEdge, "sectoring axis at " + std::to_string(a) +
                                               " deg coincides with an incident edge");
    }
    for (int i = 0; i < d; ++i) {
      const double width = i + 1 < d ? bearings[i + 1] - bearings[i] : 360.0 - bearings[d - 1] + bearings[0];
      const double offset = detail::wrap360(a - bearings[i]);
      if (offset > 0.0 && offset < width) {
        ns.cuts.push_back(i);
        break;
      }
    }
  }
  std::sort(ns.cuts.begin(), ns.cuts.end());
  ns.cuts.erase(std::unique(ns.cuts.begin(), ns.cuts.end()), ns.cuts.end());

  // Label of a bearing: the axis with the smallest counter-clockwise offset
  // up to it.
  auto label_of = [&](double b) {
    int best = 0;
    double best_offset = 361.0;
    for (int i = 0; i < m; ++i) {
      const double off = detail::wrap360(b - wrapped[i]);
      if (off < best_offset) {
        best_offset = off;
        best = i;
      }
    }
    return best;
  };
  const int j = ns.sector_count();
  ns.labels.resize(j);
  for (int s = 0; s < j; ++s) {
    const int first = (ns.cuts[(s + j - 1) % j] + 1) % d;
    ns.labels[s] = label_of(bearings[first]);
  }
  return ns;
}

/// Every node split into K equal sectors by axes at offset + i * 360 / K,
/// parallel across nodes.
///
/// If an axis lands on an edge, the offset is shifted by 1e-3 degrees up to
/// 100 times before giving up.
inline NetworkSectorization even_homogeneous(const ConnectivityGraph& g, int k, double axis_offset) {
  require(k >= 2 && k % 2 == 0, ErrorCode::Precondition, "K must be even and at least 2");
  constexpr int kMaxShifts = 100;
  constexpr double kShift = 1e-3;
  for (int attempt = 0; attempt <= kMaxShifts; ++attempt) {
    const double offset = axis_offset + attempt * kShift;
    std::vector<double> axes(k);
    for (int i = 0; i < k; ++i) axes[i] = offset + i * 360.0 / k;
    NetworkSectorization sigma;
    sigma.kind = SectorizationKind::EvenHomogeneous;
    sigma.even_k = k;
    sigma.axis_offset = offset;
    sigma.per_node.reserve(g.node_count());
    try {
      for (int n = 0; n < g.node_count(); ++n) sigma.per_node.push_back(axes_to_cuts(g.bearings(n), axes));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AxisOnEdge) throw;
      continue;
    }
    return sigma;
  }
  throw Error(ErrorCode::AxisOnEdge, "no collision-free axis offset found near " + std::to_string(axis_offset));
}

/// Number of cut sets with 1..min(K, d) cuts: sum of binomials.
inline std::uint64_t count_node_sectorizations(int delta_size, int k_cap) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;  // C(d, j)
  for (int j = 1; j <= std::min(k_cap, delta_size); ++j) {
    binom = binom * static_cast<std::uint64_t>(delta_size - j + 1) / static_cast<std::uint64_t>(j);
    total += binom;
  }
  return total;
}

/// All cut sets of cardinality 1..min(K_n, delta_size), lexicographic
/// within each cardinality.
inline std::vector<std::vector<int>> enumerate_node_sectorizations(int delta_size, int k_cap) {
  require(delta_size >= 0 && k_cap >= 1, ErrorCode::Precondition, "invalid enumeration arguments");
  if (delta_size > 12 || k_cap > 6)
    throw Error(ErrorCode::SearchSpaceTooLarge, "node enumeration limited to |delta| <= 12 and K <= 6");
  std::vector<std::vector<int>> out;
  for (int j = 1; j <= std::min(k_cap, delta_size); ++j) {
    std::vector<int> comb(j);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      out.push_back(comb);
      int i = j - 1;
      while (i >= 0 && comb[i] == delta_size - j + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int t = i + 1; t < j; ++t) comb[t] = comb[t - 1] + 1;
    }
  }
  return out;
}

}  // namespace sectornet
