#pragma once

// Flow-extension ratios of a sectorized network.
//
// For a flow f on the undirected edges of the auxiliary graph H:
//   mu(f)     = 1 / max_v sum_{e in delta(v)} f_e          (fractional polytope Q)
//   zeta(f)   = min over odd U of floor(|U|/2) / f(E(U))     (odd-set term)
//   lambda(f) = min(mu(f), zeta(f))                          (matching polytope P)
// with 2/3 mu <= lambda <= mu, and lambda == mu when H is bipartite.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sectornet/auxgraph.hpp"
#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

inline constexpr int kDefaultVertexLimit = 18;
inline constexpr double kRelativeTolerance = 1e-9;

/// Nonnegative flow per directed link (packets/slot). Link 2e is a -> b
/// and link 2e + 1 is b -> a for edge e = (a, b), a < b.
class FlowVector {
 public:
  FlowVector() = default;

  static FlowVector from_directed(std::vector<double> per_link) {
    require(per_link.size() % 2 == 0, ErrorCode::Precondition, "directed flow needs two entries per edge");
    for (double x : per_link)
      require(std::isfinite(x) && x >= 0.0, ErrorCode::Precondition, "flows must be finite and nonnegative");
    FlowVector f;
    f.links_ = std::move(per_link);
    return f;
  }

  /// Splits each undirected value evenly over the two directions.
  static FlowVector from_undirected(std::span<const double> per_edge) {
    std::vector<double> links(2 * per_edge.size());
    for (std::size_t e = 0; e < per_edge.size(); ++e) {
      require(std::isfinite(per_edge[e]) && per_edge[e] >= 0.0, ErrorCode::Precondition,
              "flows must be finite and nonnegative");
      links[2 * e] = links[2 * e + 1] = per_edge[e] / 2.0;
    }
    FlowVector f;
    f.links_ = std::move(links);
    return f;
  }

  int link_count() const { return static_cast<int>(links_.size()); }
  int edge_count() const { return link_count() / 2; }
  double link(int l) const { return links_[l]; }
  const std::vector<double>& links() const { return links_; }

  /// f_e = f_{e+} + f_{e-}.
  double edge(int e) const { return links_[2 * e] + links_[2 * e + 1]; }

  std::vector<double> undirected() const {
    std::vector<double> out(edge_count());
    for (int e = 0; e < edge_count(); ++e) out[e] = edge(e);
    return out;
  }

  double max_edge() const {
    double m = 0.0;
    for (int e = 0; e < edge_count(); ++e) m = std::max(m, edge(e));
    return m;
  }

  bool is_zero() const {
    return std::all_of(links_.begin(), links_.end(), [](double x) { return x == 0.0; });
  }

  FlowVector scaled(double c) const {
    FlowVector f = *this;
    for (double& x : f.links_) x *= c;
    return f;
  }

 private:
  std::vector<double> links_;
};

/// N x N arrival rates; entry (n, c) is the commodity-c rate entering at n.
struct ArrivalMatrix {
  int n = 0;
  std::vector<double> rates;

  static ArrivalMatrix zeros(int n) { return {n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)}; }

  static ArrivalMatrix uniform(int n, double alpha) {
    ArrivalMatrix a = zeros(n);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < n; ++c)
        if (i != c) a.at(i, c) = alpha;
    return a;
  }

  double& at(int node, int commodity) { return rates[static_cast<std::size_t>(node) * n + commodity]; }
  double at(int node, int commodity) const { return rates[static_cast<std::size_t>(node) * n + commodity]; }

  void validate() const {
    require(rates.size() == static_cast<std::size_t>(n) * n, ErrorCode::Precondition, "arrival matrix size");
    for (int i = 0; i < n; ++i) {
      require(at(i, i) == 0.0, ErrorCode::Precondition, "arrival matrix diagonal must be zero");
      for (int c = 0; c < n; ++c)
        require(std::isfinite(at(i, c)) && at(i, c) >= 0.0, ErrorCode::Precondition,
                "arrival rates must be finite and nonnegative");
    }
  }
};

namespace detail {

inline void check_flow_size(const AuxiliaryGraph& h, const FlowVector& f) {
  require(f.edge_count() == h.edge_count(), ErrorCode::Precondition, "flow vector does not match the graph");
}

struct OddSetMinimum {
  double ratio = std::numeric_limits<double>::infinity();
  std::vector<int> witness;
};

// Exhaustive minimum of floor(|U|/2) / x(E(U)) over odd U within `vertices`
// with |U| >= 3 and x(E(U)) > 0. Induced sums are built incrementally:
// x(E(U)) = x(E(U - v)) + x(edges from v into U - v), v = lowest member.
inline OddSetMinimum odd_set_minimum(const AuxiliaryGraph& h, std::span<const int> vertices,
                                     std::span<const double> x) {
  const int m = static_cast<int>(vertices.size());
  require(m <= 26, ErrorCode::SearchSpaceTooLarge, "odd-set enumeration limited to 26 vertices");
  std::vector<int> local(h.vertex_count(), -1);
  for (int i = 0; i < m; ++i) local[vertices[i]] = i;
  std::vector<std::vector<std::pair<int, double>>> adj(m);
  for (int i = 0; i < m; ++i) {
    for (int e : h.incident(vertices[i])) {
      const auto& ep = h.endpoints(e);
      const int other = ep[0] == vertices[i] ? ep[1] : ep[0];
      const int j = local[other];
      if (j >= 0) adj[i].push_back({j, x[e]});
    }
  }
  OddSetMinimum best;
  if (m < 3) return best;
  const std::uint32_t total = 1u << m;
  std::vector<double> induced(total, 0.0);
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    const int low = std::countr_zero(mask);
    const std::uint32_t rest = mask & (mask - 1);
    double s = induced[rest];
    for (const auto& [j, val] : adj[low])
      if (rest >> j & 1u) s += val;
    induced[mask] = s;
    const int pop = std::popcount(mask);
    if ((pop & 1) && pop >= 3 && s > 0.0) {
      const double ratio = static_cast<double>(pop / 2) / s;
      if (ratio < best.ratio) {
        best.ratio = ratio;
        best_mask = mask;
      }
    }
  }
  for (int i = 0; i < m; ++i)
    if (best_mask >> i & 1u) best.witness.push_back(vertices[i]);
  return best;
}

}  // namespace detail

/// Per sector-vertex load sum_{e in delta(v)} f_e.
inline std::vector<double> vertex_loads(const AuxiliaryGraph& h, const FlowVector& f) {
  detail::check_flow_size(h, f);
  std::vector<double> load(h.vertex_count(), 0.0);
  for (int e = 0; e < h.edge_count(); ++e) {
    const double fe = f.edge(e);
    load[h.endpoints(e)[0]] += fe;
    load[h.endpoints(e)[1]] += fe;
  }
  return load;
}

struct MuResult {
  double mu = 0.0;
  int witness_vertex = -1;
};

inline MuResult mu_extension(const AuxiliaryGraph& h, const FlowVector& f) {
  const auto load = vertex_loads(h, f);
  MuResult r;
  double worst = 0.0;
  for (int v = 0; v < h.vertex_count(); ++v) {
    if (load[v] > worst) {
      worst = load[v];
      r.witness_vertex = v;
    }
  }
  require(worst > 0.0, ErrorCode::ZeroFlow, "flow is identically zero");
  r.mu = 1.0 / worst;
  return r;
}

struct ZetaResult {
  bool known = false;
  double value = std::numeric_limits<double>::infinity();  // +inf: no odd set carries flow
  std::vector<int> witness;
};

/// Exact odd-set term over all odd subsets of the non-isolated vertices;
/// unknown when there are more than `vertex_limit` of them.
inline ZetaResult zeta_oddsets(const AuxiliaryGraph& h, const FlowVector& f,
                               int vertex_limit = kDefaultVertexLimit) {
  detail::check_flow_size(h, f);
  std::vector<int> verts;
  for (int v = 0; v < h.vertex_count(); ++v)
    if (!h.isolated(v)) verts.push_back(v);
  ZetaResult z;
  if (static_cast<int>(verts.size()) > vertex_limit) return z;
  const auto x = f.undirected();
  auto best = detail::odd_set_minimum(h, verts, x);
  z.known = true;
  z.value = best.ratio;
  z.witness = std::move(best.witness);
  return z;
}

struct ExtensionReport {
  double mu = 0.0;
  /// Odd-set term restricted to non-bipartite components (it coincides
  /// with the global term whenever that term is below mu). Unset when the
  /// bipartite short-circuit applies or enumeration was skipped.
  std::optional<double> zeta;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  bool exact = false;
  int witness_vertex = -1;
  std::vector<int> witness_odd_set;

  double lambda() const { return lambda_lo; }
};

/// Largest t with t * f in the matching polytope of H.
///
/// Odd sets are enumerated per non-bipartite connected component: an odd U
/// spanning several components splits into pieces whose ratios bound U's
/// from below, and even pieces never bind below mu, so min(mu, zeta) is
/// unchanged. Components larger than `vertex_limit` leave lambda as the
/// interval [2/3 mu, min(mu, zeta over the enumerated components)].
inline ExtensionReport lambda_extension(const AuxiliaryGraph& h, const FlowVector& f,
                                        int vertex_limit = kDefaultVertexLimit) {
  const auto mu = mu_extension(h, f);
  ExtensionReport r;
  r.mu = mu.mu;
  r.witness_vertex = mu.witness_vertex;
  if (h.bipartite()) {
    r.lambda_lo = r.lambda_hi = r.mu;
    r.exact = true;
    return r;
  }
  const auto x = f.undirected();
  bool complete = true;
  double zeta = std::numeric_limits<double>::infinity();
  for (const auto& comp : h.components()) {
    if (comp.bipartite) continue;
    if (static_cast<int>(comp.vertices.size()) > vertex_limit) {
      complete = false;
      continue;
    }
    auto best = detail::odd_set_minimum(h, comp.vertices, x);
    if (best.ratio < zeta) {
      zeta = best.ratio;
      r.witness_odd_set = std::move(best.witness);
    }
  }
  const double hi = std::min(r.mu, zeta);
  if (complete) {
    r.zeta = zeta;
    r.lambda_lo = r.lambda_hi = hi;
    r.exact = true;
  } else {
    r.lambda_lo = std::min(hi, 2.0 / 3.0 * r.mu);
    r.lambda_hi = hi;
  }
  return r;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool exact() const { return lo == hi; }
};

struct GainReport {
  Interval g_lambda;
  double g_mu = 0.0;
  ExtensionReport sectorized;
  ExtensionReport unsectorized;
};

/// Ratios of the sectorized extension ratios to the unsectorized ones.
inline GainReport gains(const ConnectivityGraph& g, const NetworkSectorization& sigma, const FlowVector& f,
                        int vertex_limit = kDefaultVertexLimit) {
  require(!f.is_zero(), ErrorCode::ZeroFlow, "flow is identically zero");
  GainReport r;
  r.sectorized = lambda_extension(build_auxiliary(g, sigma), f, vertex_limit);
  r.unsectorized = lambda_extension(build_auxiliary(g, unsectorized(g)), f, vertex_limit);
  r.g_mu = r.sectorized.mu / r.unsectorized.mu;
  r.g_lambda.lo = r.sectorized.lambda_lo / r.unsectorized.lambda_hi;
  r.g_lambda.hi = r.sectorized.lambda_hi / r.unsectorized.lambda_lo;
  if (r.sectorized.exact && r.unsectorized.exact) r.g_lambda.hi = r.g_lambda.lo;
  return r;
}

/// 1 / (1 + mu_pi * max_e f_e): lower bound on the approximation ratio.
inline double lb_bound(double mu_pi, const FlowVector& f) {
  require(mu_pi > 0.0, ErrorCode::Precondition, "mu must be positive");
  return 1.0 / (1.0 + mu_pi * f.max_edge());
}

enum class Polytope { Matching, Fractional };
enum class Membership { Inside, Outside, Unknown };

/// Membership of a per-edge vector in P (matching polytope) or Q
/// (fractional matching polytope) of H, with relative tolerance 1e-9.
inline Membership in_polytope(std::span<const double> x, const AuxiliaryGraph& h, Polytope which,
                              int vertex_limit = kDefaultVertexLimit) {
  require(static_cast<int>(x.size()) == h.edge_count(), ErrorCode::Precondition, "vector size mismatch");
  auto within = [](double value, double bound) { return value <= bound * (1.0 + kRelativeTolerance); };
  for (double v : x) {
    require(std::isfinite(v), ErrorCode::Precondition, "vector must be finite");
    if (v < 0.0) return Membership::Outside;
  }
  std::vector<double> load(h.vertex_count(), 0.0);
  for (int e = 0; e < h.edge_count(); ++e) {
    load[h.endpoints(e)[0]] += x[e];
    load[h.endpoints(e)[1]] += x[e];
  }
  for (double l : load)
    if (!within(l, 1.0)) return Membership::Outside;
  if (which == Polytope::Fractional) return Membership::Inside;

  bool unknown = false;
  for (const auto& comp : h.components()) {
    if (comp.bipartite) continue;
    if (static_cast<int>(comp.vertices.size()) > vertex_limit) {
      unknown = true;
      continue;
    }
    // Constraint x(E(U)) <= floor(|U|/2)  <=>  floor(|U|/2) / x(E(U)) >= 1.
    const auto best = detail::odd_set_minimum(h, comp.vertices, x);
    if (!within(1.0, best.ratio)) return Membership::Outside;
  }
  return unknown ? Membership::Unknown : Membership::Inside;
}

/// Per (link, commodity) flows: value(link, c) at index link * N + c.
struct MultiCommodityFlow {
  int node_count = 0;
  int link_count = 0;
  std::vector<double> values;

  double at(int link, int commodity) const {
    return values[static_cast<std::size_t>(link) * node_count + commodity];
  }
  double& at(int link, int commodity) { return values[static_cast<std::size_t>(link) * node_count + commodity]; }
};

struct ConservationReport {
  bool valid = true;
  std::string constraint;  // "nonnegativity", "node_balance", "sink_balance", "link_capacity"
  int node = -1;
  int commodity = -1;
  int link = -1;
  double residual = 0.0;
};

/// Checks a multi-commodity flow against arrival rates: node balance
/// (arrival = out - in for n != c), sink balance (total commodity-c arrival
/// equals inflow at c), nonnegativity and unit link capacity. Reports the
/// first violated constraint.
inline ConservationReport validate_flow_conservation(const ConnectivityGraph& g, const ArrivalMatrix& alpha,
                                                     const MultiCommodityFlow& flow, double tolerance = 1e-9) {
  const int n = g.node_count();
  require(alpha.n == n && flow.node_count == n && flow.link_count == g.link_count() &&
              flow.values.size() == static_cast<std::size_t>(g.link_count()) * n,
          ErrorCode::Precondition, "inconsistent dimensions");
  alpha.validate();
  ConservationReport rep;
  auto fail = [&](const char* what, int node, int c, int link, double residual) {
    rep.valid = false;
    rep.constraint = what;
    rep.node = node;
    rep.commodity = c;
    rep.link = link;
    rep.residual = residual;
    return rep;
  };
  for (int l = 0; l < g.link_count(); ++l)
    for (int c = 0; c < n; ++c)
      if (flow.at(l, c) < 0.0) return fail("nonnegativity", -1, c, l, -flow.at(l, c));

  for (int c = 0; c < n; ++c) {
    for (int v = 0; v < n; ++v) {
      if (v == c) continue;
      double out = 0.0;
      double in = 0.0;
      for (int e : g.delta(v)) {
        const int l_out = g.find_link(v, g.neighbor(v, e));
        out += flow.at(l_out, c);
        in += flow.at(l_out ^ 1, c);
      }
      const double residual = alpha.at(v, c) - (out - in);
      if (std::abs(residual) > tolerance) return fail("node_balance", v, c, -1, std::abs(residual));
    }
    double arriving = 0.0;
    for (int v = 0; v < n; ++v) arriving += alpha.at(v, c);
    double sink_in = 0.0;
    for (int e : g.delta(c)) sink_in += flow.at(g.find_link(g.neighbor(c, e), c), c);
    const double residual = arriving - sink_in;
    if (std::abs(residual) > tolerance) return fail("sink_balance", c, c, -1, std::abs(residual));
  }
  for (int l = 0; l < g.link_count(); ++l) {
    double total = 0.0;
    for (int c = 0; c < n; ++c) total += flow.at(l, c);
    if (total > 1.0 + tolerance) return fail("link_capacity", g.link_tail(l), -1, l, total - 1.0);
  }
  return rep;
}

}  // namespace sectornet
