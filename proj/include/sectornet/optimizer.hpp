#pragma once

// Distributed sectorization optimizer.
//
// Each node independently minimises its largest per-sector flow sum over
// contiguous cyclic partitions of delta(n) into at most K_n runs. A greedy
// decision procedure answers "can every sector stay <= T?"; a binary search
// over T in [max_e f_e, sum_e f_e] finds the critical threshold. The
// resulting network sectorization maximises mu, which is within a factor
// 2/3 of the best achievable lambda.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sectornet/auxgraph.hpp"
#include "sectornet/capacity.hpp"
#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

/// Undirected flows on delta(n), in delta(n) order.
struct NodeFlowProfile {
  int node = -1;
  std::vector<int> edges;
  std::vector<double> flows;
};

inline NodeFlowProfile node_profile(const ConnectivityGraph& g, const FlowVector& f, int n) {
  require(f.edge_count() == g.edge_count(), ErrorCode::Precondition, "flow vector does not match the graph");
  NodeFlowProfile p;
  p.node = n;
  for (int e : g.delta(n)) {
    p.edges.push_back(e);
    p.flows.push_back(f.edge(e));
  }
  return p;
}

struct SectorDecision {
  bool yes = false;
  std::vector<int> cuts;  // sorted; empty on No
};

/// Greedy decision: is there a partition into <= k_cap contiguous sectors
/// with every sector sum <= t?
///
/// For each starting edge e the first cut goes right after e; the edges
/// after it are accumulated in cyclic order (ending with e itself) and a new
/// cut is opened before any edge that would push the running sum past t.
inline SectorDecision exist_sectorization_n(std::span<const double> flows, int k_cap, double t) {
  require(t >= 0.0, ErrorCode::Precondition, "threshold must be nonnegative");
  require(k_cap >= 1, ErrorCode::Precondition, "sector cap must be positive");
  const int d = static_cast<int>(flows.size());
  SectorDecision out;
  if (d == 0) {
    out.yes = true;
    return out;
  }
  std::vector<int> cuts;
  for (int start = 0; start < d; ++start) {
    cuts.assign({start});
    int sectors_needed = 1;
    double total = 0.0;
    for (int step = 1; step <= d; ++step) {
      const int idx = (start + step) % d;
      const double fe = flows[idx];
      if (fe > t) return out;
      total += fe;
      if (total > t) {
        ++sectors_needed;
        cuts.push_back((idx + d - 1) % d);
        total = fe;
      }
    }
    if (sectors_needed <= k_cap) {
      std::sort(cuts.begin(), cuts.end());
      out.yes = true;
      out.cuts = std::move(cuts);
      return out;
    }
  }
  return out;
}

struct SectorizeResult {
  NodeSectorization cuts;
  double t_crit = 0.0;   // achieved largest sector sum
  double t_upper = 0.0;  // upper end of the search bracket, before snapping
  int iterations = 0;
};

/// Default search tolerance: 1e-9 of the bracket width.
inline double default_epsilon(std::span<const double> flows) {
  double sum = 0.0;
  double mx = 0.0;
  for (double f : flows) {
    sum += f;
    mx = std::max(mx, f);
  }
  return 1e-9 * (sum - mx);
}

/// Binary search for the critical threshold, then one decision at the upper
/// end. t_crit is snapped to the largest sector sum of the returned cuts.
inline SectorizeResult sectorize_n(std::span<const double> flows, int k_cap, std::optional<double> epsilon = {}) {
  require(k_cap >= 1, ErrorCode::Precondition, "sector cap must be positive");
  double t_min = 0.0;
  double t_max = 0.0;
  for (double f : flows) {
    require(std::isfinite(f) && f >= 0.0, ErrorCode::Precondition, "flows must be finite and nonnegative");
    t_min = std::max(t_min, f);
    t_max += f;
  }
  require(t_min > 0.0, ErrorCode::ZeroFlow, "node carries no flow");
  if (epsilon) require(*epsilon > 0.0, ErrorCode::Precondition, "epsilon must be positive");
  const double eps = epsilon.value_or(default_epsilon(flows));

  SectorizeResult r;
  r.cuts.sector_cap = k_cap;
  while (t_max - t_min > eps) {
    const double mid = (t_min + t_max) / 2.0;
    if (mid <= t_min || mid >= t_max) break;  // bracket narrower than one ulp
    ++r.iterations;
    if (exist_sectorization_n(flows, k_cap, mid).yes) {
      t_max = mid;
    } else {
      t_min = mid;
    }
  }
  auto decision = exist_sectorization_n(flows, k_cap, t_max);
  // The running sums may differ from the total by rounding; nudge upward.
  for (int guard = 0; !decision.yes && guard < 4096; ++guard) {
    t_max = std::nextafter(t_max, std::numeric_limits<double>::infinity());
    decision = exist_sectorization_n(flows, k_cap, t_max);
  }
  require(decision.yes, ErrorCode::Precondition, "no feasible sectorization at the upper bound");
  r.cuts.cuts = std::move(decision.cuts);
  r.t_upper = t_max;
  r.t_crit = max_sector_sum(r.cuts, flows);
  return r;
}

struct NetworkSectorizeResult {
  NetworkSectorization sigma;
  std::vector<double> t_crit;  // per node; 0 for nodes without flow
  double mu_pi = 0.0;
};

/// Runs sectorize_n independently at every node. Nodes without edges get
/// no cuts; nodes whose incident flows are all zero stay unsectorized.
inline NetworkSectorizeResult sectorize_network(const ConnectivityGraph& g, const FlowVector& f,
                                                std::span<const int> k_caps,
                                                std::optional<double> epsilon = {}) {
  require(static_cast<int>(k_caps.size()) == g.node_count(), ErrorCode::Precondition,
          "one sector cap per node required");
  require(!f.is_zero(), ErrorCode::ZeroFlow, "flow is identically zero");
  NetworkSectorizeResult out;
  out.sigma.kind = SectorizationKind::General;
  out.sigma.per_node.resize(g.node_count());
  out.t_crit.assign(g.node_count(), 0.0);
  double worst = 0.0;
  for (int n = 0; n < g.node_count(); ++n) {
    const auto profile = node_profile(g, f, n);
    const bool has_flow = std::any_of(profile.flows.begin(), profile.flows.end(), [](double x) { return x > 0.0; });
    if (!has_flow) {
      out.sigma.per_node[n] = unsectorized_node(g.degree(n));
      out.sigma.per_node[n].sector_cap = k_caps[n];
      continue;
    }
    auto res = sectorize_n(profile.flows, k_caps[n], epsilon);
    out.sigma.per_node[n] = std::move(res.cuts);
    out.t_crit[n] = res.t_crit;
    worst = std::max(worst, res.t_crit);
  }
  out.mu_pi = 1.0 / worst;
  return out;
}

inline NetworkSectorizeResult sectorize_network(const ConnectivityGraph& g, const FlowVector& f, int k_cap,
                                                std::optional<double> epsilon = {}) {
  const std::vector<int> caps(g.node_count(), k_cap);
  return sectorize_network(g, f, caps, epsilon);
}

struct BruteForceResult {
  NetworkSectorization sigma_star;
  double lambda_star = 0.0;
  std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

/// Exhaustive maximisation of exact lambda over every product of node cut
/// sets. Test oracle only.
///
/// Candidates whose mu does not exceed the incumbent lambda are skipped
/// (lambda <= mu); ties keep the first optimum in enumeration order.
inline BruteForceResult brute_force_opt(const ConnectivityGraph& g, const FlowVector& f, int k_cap,
                                        int vertex_limit = kDefaultVertexLimit) {
  require(f.edge_count() == g.edge_count(), ErrorCode::Precondition, "flow vector does not match the graph");
  require(!f.is_zero(), ErrorCode::ZeroFlow, "flow is identically zero");
  const int n = g.node_count();
  std::uint64_t space = 1;
  for (int v = 0; v < n; ++v) {
    const std::uint64_t c = std::max<std::uint64_t>(1, count_node_sectorizations(g.degree(v), k_cap));
    if (space > kBruteForceLimit / c) throw Error(ErrorCode::SearchSpaceTooLarge, "sectorization space above 1e6");
    space *= c;
  }

  std::vector<std::vector<NodeSectorization>> options(n);
  std::vector<std::vector<double>> option_load(n);
  for (int v = 0; v < n; ++v) {
    const auto profile = node_profile(g, f, v);
    if (g.degree(v) == 0) {
      NodeSectorization ns;
      ns.sector_cap = k_cap;
      options[v].push_back(ns);
      option_load[v].push_back(0.0);
      continue;
    }
    for (auto& cuts : enumerate_node_sectorizations(g.degree(v), k_cap)) {
      NodeSectorization ns;
      ns.cuts = std::move(cuts);
      ns.sector_cap = k_cap;
      option_load[v].push_back(max_sector_sum(ns, profile.flows));
      options[v].push_back(std::move(ns));
    }
  }

  BruteForceResult best;
  best.lambda_star = -1.0;
  std::vector<std::size_t> choice(n, 0);
  NetworkSectorization sigma;
  sigma.kind = SectorizationKind::General;
  sigma.per_node.resize(n);
  while (true) {
    double worst = 0.0;
    for (int v = 0; v < n; ++v) worst = std::max(worst, option_load[v][choice[v]]);
    const double mu = 1.0 / worst;
    if (mu > best.lambda_star) {
      for (int v = 0; v < n; ++v) sigma.per_node[v] = options[v][choice[v]];
      const auto report = lambda_extension(build_auxiliary(g, sigma), f, vertex_limit);
      if (!report.exact) throw Error(ErrorCode::SearchSpaceTooLarge, "lambda not exact within the vertex limit");
      ++best.evaluated;
      if (report.lambda() > best.lambda_star) {
        best.lambda_star = report.lambda();
        best.sigma_star = sigma;
      }
    }
    int v = 0;
    while (v < n && ++choice[v] == options[v].size()) choice[v++] = 0;
    if (v == n) break;
  }
  return best;
}

}  // namespace sectornet
