#pragma once

// Slotted multi-commodity backpressure with max-weight scheduling on the
// auxiliary graph.
//
// Each slot: weights from the current backlogs, one max-weight matching per
// connected component of H (Hungarian on bipartite pieces, blossom
// otherwise), one packet served per activated link, then Bernoulli
// arrivals. Commodity c is the destination node c.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "sectornet/auxgraph.hpp"
#include "sectornet/capacity.hpp"
#include "sectornet/errors.hpp"
#include "sectornet/matching.hpp"
#include "sectornet/network.hpp"
#include "sectornet/optimizer.hpp"
#include "sectornet/rng.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

struct QueueState {
  int n = 0;
  std::vector<std::int64_t> q;  // q[node * n + commodity]
  std::int64_t slot = 0;

  explicit QueueState(int nodes = 0) : n(nodes), q(static_cast<std::size_t>(nodes) * nodes, 0) {}

  std::int64_t& at(int node, int commodity) { return q[static_cast<std::size_t>(node) * n + commodity]; }
  std::int64_t at(int node, int commodity) const { return q[static_cast<std::size_t>(node) * n + commodity]; }

  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : q) s += v;
    return s;
  }
};

/// Backpressure of one undirected edge: the best (direction, commodity).
struct EdgeWeight {
  std::int64_t weight = 0;
  int link = -1;  // -1 when weight == 0
  int commodity = -1;
};

/// D = max over both directions and all commodities of Q_tail - Q_head,
/// clamped at 0. Ties prefer the lower commodity, then link 2e (a -> b).
inline std::vector<EdgeWeight> backpressure_weights(const QueueState& s, const ConnectivityGraph& g) {
  require(s.n == g.node_count(), ErrorCode::Precondition, "queue state does not match the graph");
  std::vector<EdgeWeight> out(g.edge_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    const int a = g.edge(e).a;
    const int b = g.edge(e).b;
    auto& best = out[e];
    for (int c = 0; c < s.n; ++c) {
      const std::int64_t ab = s.at(a, c) - s.at(b, c);
      const std::int64_t ba = -ab;
      if (ab > best.weight) best = {ab, 2 * e, c};
      if (ba > best.weight) best = {ba, 2 * e + 1, c};
    }
  }
  return out;
}

struct Activation {
  int link = -1;
  int commodity = -1;
};

struct SlotSchedule {
  std::vector<Activation> activated;  // ascending link id
  double weight = 0.0;
};

/// Per-component view of an auxiliary graph, reused across slots.
class ComponentScheduler {
 public:
  explicit ComponentScheduler(const AuxiliaryGraph& h) : h_(&h), local_(h.vertex_count(), -1) {
    for (const auto& comp : h.components()) {
      for (std::size_t i = 0; i < comp.vertices.size(); ++i) local_[comp.vertices[i]] = static_cast<int>(i);
    }
  }

  const AuxiliaryGraph& graph() const { return *h_; }

  /// Max-weight schedule, component by component. Zero-weight edges are
  /// never activated.
  SlotSchedule schedule(const std::vector<EdgeWeight>& w) const {
    const auto& h = *h_;
    SlotSchedule out;
    std::vector<int> chosen;
    WeightedGraph sub;
    std::vector<int> ids;
    std::vector<int> side;
    for (const auto& comp : h.components()) {
      sub.vertex_count = static_cast<int>(comp.vertices.size());
      sub.edges.clear();
      ids.clear();
      for (int e : comp.edges) {
        if (w[e].weight <= 0) continue;
        const auto& ends = h.endpoints(e);
        sub.edges.push_back({local_[ends[0]], local_[ends[1]], static_cast<double>(w[e].weight)});
        ids.push_back(e);
      }
      if (ids.empty()) continue;
      Matching m;
      if (comp.bipartite) {
        side.resize(comp.vertices.size());
        for (std::size_t i = 0; i < comp.vertices.size(); ++i) side[i] = h.side(comp.vertices[i]);
        m = mwm_bipartite(sub, side);
      } else {
        m = mwm_general(sub);
      }
      for (int k : m.edges) chosen.push_back(ids[k]);
      out.weight += m.weight;
    }
    std::sort(chosen.begin(), chosen.end());
    for (int e : chosen) out.activated.push_back({w[e].link, w[e].commodity});
    return out;
  }

 private:
  const AuxiliaryGraph* h_;
  std::vector<int> local_;
};

inline SlotSchedule schedule_slot(const std::vector<EdgeWeight>& w, const AuxiliaryGraph& h) {
  require(static_cast<int>(w.size()) == h.edge_count(), ErrorCode::Precondition, "one weight per edge required");
  return ComponentScheduler(h).schedule(w);
}

/// Whole-graph blossom on H, ignoring the component structure.
inline Matching whole_graph_mwm(const std::vector<EdgeWeight>& w, const AuxiliaryGraph& h) {
  WeightedGraph g{h.vertex_count(), {}};
  std::vector<int> ids;
  for (int e = 0; e < h.edge_count(); ++e) {
    if (w[e].weight <= 0) continue;
    g.edges.push_back({h.endpoints(e)[0], h.endpoints(e)[1], static_cast<double>(w[e].weight)});
    ids.push_back(e);
  }
  auto m = mwm_general(g);
  for (int& k : m.edges) k = ids[k];
  std::sort(m.edges.begin(), m.edges.end());
  return m;
}

struct SlotStats {
  std::int64_t arrivals = 0;
  std::int64_t deliveries = 0;
  std::int64_t served = 0;
  std::int64_t empty_services = 0;
};

/// Serves every activated link once from the backlogs at the start of the
/// slot; packets move only after all departures are settled, so nothing
/// is forwarded twice in one slot. `served_links` receives 1 per link that
/// moved a packet.
inline SlotStats apply_service(QueueState& s, const ConnectivityGraph& g, const SlotSchedule& sched,
                               std::vector<char>* served_links = nullptr) {
  SlotStats st;
  std::vector<std::pair<int, int>> moved;
  moved.reserve(sched.activated.size());
  for (const auto& a : sched.activated) {
    const int tail = g.link_tail(a.link);
    auto& q = s.at(tail, a.commodity);
    if (q <= 0) {
      ++st.empty_services;
      continue;
    }
    --q;
    ++st.served;
    moved.push_back({g.link_head(a.link), a.commodity});
    if (served_links) (*served_links)[a.link] = 1;
  }
  for (const auto& [head, c] : moved) {
    if (head == c) {
      ++st.deliveries;
    } else {
      ++s.at(head, c);
    }
  }
  return st;
}

inline std::int64_t apply_arrivals(QueueState& s, const ArrivalMatrix& alpha, Rng& rng) {
  std::int64_t count = 0;
  for (int node = 0; node < s.n; ++node) {
    for (int c = 0; c < s.n; ++c) {
      if (c == node) continue;
      const double p = alpha.at(node, c);
      if (p > 0.0 && rng.bernoulli(p)) {
        ++s.at(node, c);
        ++count;
      }
    }
  }
  return count;
}

/// One slot: schedule on Q(t), serve, then add arrivals.
inline SlotStats step(QueueState& s, const ConnectivityGraph& g, const ComponentScheduler& sched,
                      const ArrivalMatrix& alpha, Rng& rng) {
  const auto w = backpressure_weights(s, g);
  const auto schedule = sched.schedule(w);
  auto st = apply_service(s, g, schedule);
  st.arrivals = apply_arrivals(s, alpha, rng);
  ++s.slot;
  return st;
}

struct SectorPolicy {
  enum class Mode { Fixed, Dynamic };
  Mode mode = Mode::Fixed;
  int period = 10'000;
  int k = 2;
  std::optional<double> epsilon;

  static SectorPolicy fixed() { return {}; }
  static SectorPolicy dynamic(int k, int period = 10'000) { return {Mode::Dynamic, period, k, {}}; }
};

struct SimConfig {
  std::int64_t horizon = 200'000;
  ArrivalMatrix alpha;
  SectorPolicy policy;
  std::uint64_t seed = 1;
  double beta = 1e-3;
  bool shadow_general = false;  // also time a whole-graph blossom every slot
  bool check_invariants = true;
  bool record_trace = true;
};

struct TraceRow {
  std::int64_t slot = 0;
  std::int64_t total_backlog = 0;
  double mwm_micros = 0.0;
  bool resectorized = false;
};

struct InvariantTally {
  std::int64_t infeasible_schedules = 0;
  std::int64_t conservation_breaks = 0;
  std::int64_t nonpositive_activations = 0;
  std::int64_t weight_mismatches = 0;  // component schedule vs whole-graph blossom

  std::int64_t total() const {
    return infeasible_schedules + conservation_breaks + nonpositive_activations + weight_mismatches;
  }
};

struct SimResult {
  std::vector<TraceRow> trace;
  std::vector<std::int64_t> backlog;  // total backlog after every slot
  std::int64_t arrivals = 0;
  std::int64_t deliveries = 0;
  std::int64_t empty_services = 0;
  double mwm_micros = 0.0;
  double shadow_micros = 0.0;
  int resectorizations = 0;
  InvariantTally violations;
  std::vector<double> served_rate;  // smoothed per link
  NetworkSectorization final_sigma;
  QueueState final_state;
};

/// Runs the slotted simulation for `cfg.horizon` slots from empty queues.
inline SimResult run(const SimConfig& cfg, const ConnectivityGraph& g, const NetworkSectorization& sigma0) {
  require(cfg.horizon >= 1, ErrorCode::Precondition, "horizon must be at least one slot");
  require(cfg.beta > 0.0 && cfg.beta < 1.0, ErrorCode::Precondition, "smoothing factor must lie in (0,1)");
  require(cfg.alpha.n == g.node_count(), ErrorCode::Precondition, "arrival matrix does not match the graph");
  cfg.alpha.validate();
  for (double p : cfg.alpha.rates)
    require(p <= 1.0, ErrorCode::Precondition, "arrival rates are Bernoulli probabilities");
  if (cfg.policy.mode == SectorPolicy::Mode::Dynamic)
    require(cfg.policy.period >= 1 && cfg.policy.k >= 1, ErrorCode::Precondition, "bad dynamic policy");

  using clock = std::chrono::steady_clock;
  SimResult r;
  r.final_sigma = sigma0;
  auto h = std::make_unique<AuxiliaryGraph>(build_auxiliary(g, sigma0));
  auto sched = std::make_unique<ComponentScheduler>(*h);
  QueueState s(g.node_count());
  Rng rng(cfg.seed);
  r.served_rate.assign(g.link_count(), 0.0);
  std::vector<char> served(g.link_count(), 0);
  std::vector<int> links;
  if (cfg.record_trace) r.trace.reserve(cfg.horizon);
  r.backlog.reserve(cfg.horizon);

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    bool resectorized = false;
    if (cfg.policy.mode == SectorPolicy::Mode::Dynamic && t > 0 && t % cfg.policy.period == 0) {
      const auto fhat = FlowVector::from_directed(r.served_rate);
      if (!fhat.is_zero()) {
        r.final_sigma = sectorize_network(g, fhat, cfg.policy.k, cfg.policy.epsilon).sigma;
        h = std::make_unique<AuxiliaryGraph>(build_auxiliary(g, r.final_sigma));
        sched = std::make_unique<ComponentScheduler>(*h);
        resectorized = true;
        ++r.resectorizations;
      }
    }

    const auto w = backpressure_weights(s, g);
    const auto t0 = clock::now();
    const auto schedule = sched->schedule(w);
    const double micros = std::chrono::duration<double, std::micro>(clock::now() - t0).count();
    r.mwm_micros += micros;

    if (cfg.shadow_general) {
      const auto t1 = clock::now();
      const auto whole = whole_graph_mwm(w, *h);
      r.shadow_micros += std::chrono::duration<double, std::micro>(clock::now() - t1).count();
      if (cfg.check_invariants && std::abs(whole.weight - schedule.weight) > 1e-9 * std::max(1.0, whole.weight))
        ++r.violations.weight_mismatches;
    }

    if (cfg.check_invariants) {
      links.clear();
      for (const auto& a : schedule.activated) {
        links.push_back(a.link);
        const int e = ConnectivityGraph::link_edge(a.link);
        const std::int64_t d = s.at(g.link_tail(a.link), a.commodity) - s.at(g.link_head(a.link), a.commodity);
        if (d <= 0 || d != w[e].weight) ++r.violations.nonpositive_activations;
      }
      if (!schedule_is_matching(links, *h)) ++r.violations.infeasible_schedules;
    }

    std::fill(served.begin(), served.end(), 0);
    const auto st = apply_service(s, g, schedule, &served);
    const auto arrived = apply_arrivals(s, cfg.alpha, rng);
    ++s.slot;
    r.arrivals += arrived;
    r.deliveries += st.deliveries;
    r.empty_services += st.empty_services;
    for (int l = 0; l < g.link_count(); ++l)
      r.served_rate[l] = (1.0 - cfg.beta) * r.served_rate[l] + cfg.beta * served[l];

    const std::int64_t backlog = s.total();
    if (cfg.check_invariants && r.arrivals != r.deliveries + backlog) ++r.violations.conservation_breaks;
    r.backlog.push_back(backlog);
    if (cfg.record_trace) r.trace.push_back({t, backlog, micros, resectorized});
  }
  r.final_state = std::move(s);
  return r;
}

/// Least-squares slope of the last `fraction` of the series, per slot.
inline double tail_slope(const std::vector<std::int64_t>& series, double fraction = 0.2) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::Precondition, "fraction must lie in (0,1]");
  const std::size_t n = series.size();
  const std::size_t m = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(fraction * n)));
  if (n < 2) return 0.0;
  const std::size_t start = n - std::min(m, n);
  const double count = static_cast<double>(n - start);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    sx += static_cast<double>(i);
    sy += static_cast<double>(series[i]);
  }
  const double mx = sx / count;
  const double my = sy / count;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxy += dx * (static_cast<double>(series[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline constexpr double kSlopeThreshold = 1e-2;

struct SweepPoint {
  double alpha = 0.0;
  std::int64_t final_backlog = 0;
  double slope = 0.0;
  bool stable = false;
  double mwm_micros = 0.0;
  double shadow_micros = 0.0;
  std::int64_t empty_services = 0;
  InvariantTally violations;
};

struct SweepOptions {
  std::int64_t horizon = 200'000;
  std::uint64_t seed = 1;
  SectorPolicy policy;
  bool shadow_general = false;
  double tail_fraction = 0.2;
  double slope_threshold = kSlopeThreshold;
  /// Stop after this many consecutive unstable rates; 0 runs the full grid.
  int patience = 2;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  /// Largest rate of the stable prefix; unset when the first rate is
  /// already unstable.
  std::optional<double> knee;
};

/// Uniform-rate stability sweep. Every rate uses the same seed so paired
/// sweeps see identical arrival draws.
inline SweepResult stability_sweep(const ConnectivityGraph& g, const NetworkSectorization& sigma,
                                   const std::vector<double>& alpha_grid, const SweepOptions& opt) {
  require(!alpha_grid.empty(), ErrorCode::Precondition, "alpha grid is empty");
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    require(alpha_grid[i] > alpha_grid[i - 1], ErrorCode::Precondition, "alpha grid must increase");
  SweepResult out;
  bool prefix = true;
  int unstable_run = 0;
  for (double a : alpha_grid) {
    SimConfig cfg;
    cfg.horizon = opt.horizon;
    cfg.alpha = ArrivalMatrix::uniform(g.node_count(), a);
    cfg.policy = opt.policy;
    cfg.seed = opt.seed;
    cfg.shadow_general = opt.shadow_general;
    cfg.record_trace = false;
    const auto r = run(cfg, g, sigma);
    SweepPoint p;
    p.alpha = a;
    p.final_backlog = r.backlog.back();
    p.slope = tail_slope(r.backlog, opt.tail_fraction);
    p.stable = p.slope < opt.slope_threshold;
    p.mwm_micros = r.mwm_micros;
    p.shadow_micros = r.shadow_micros;
    p.empty_services = r.empty_services;
    p.violations = r.violations;
    out.points.push_back(p);
    if (p.stable && prefix) out.knee = a;
    if (!p.stable) prefix = false;
    unstable_run = p.stable ? 0 : unstable_run + 1;
    if (opt.patience > 0 && unstable_run >= opt.patience) break;
  }
  return out;
}

}  // namespace sectornet
