// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "sectornet/sectornet.hpp"
#include "test_support.hpp"

using namespace sectornet;

namespace {

constexpr double kTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool le(double a, double b) { return a <= b * (1.0 + kTol) || a - b <= 1e-15; }

// ---------------------------------------------------------------- 1

Outcome optimizer_oracle() {
  Rng rng(101);
  int exact = 0, within = 0;
  double worst_gap = 0.0;
  const int total = 500;
  for (int i = 0; i < total; ++i) {
    const int d = 1 + static_cast<int>(rng.next() % 10);
    const int k = 1 + static_cast<int>(rng.next() % 5);
    std::vector<double> flows(d);
    for (auto& f : flows) f = 1.0 - rng.uniform();
    const double eps = default_epsilon(flows);
    const auto r = sectorize_n(flows, k);
    const double opt = oracle::brute_force_min_max_partition(flows, k);
    if (r.t_crit == opt) ++exact;
    const double gap = std::abs(r.t_upper - opt);
    worst_gap = std::max(worst_gap, gap / std::max(eps, 1e-300));
    // Upper end may exceed the optimum by eps plus the few ulps of the nudge.
    if (r.t_upper >= opt - 1e-12 * opt && r.t_upper - opt <= eps + 1e-12 * opt) ++within;
  }
  return {exact == total && within == total,
          fmt("%d/%d snapped exact, %d/%d pre-snap within eps (worst gap %.3g eps)", exact, total, within, total,
              worst_gap)};
}

// ---------------------------------------------------------------- 2

Outcome two_thirds_approximation() {
  Rng rng(202);
  int accepted = 0, skipped = 0, below = 0, above = 0, lb_fail = 0;
  double min_ratio = 1e9, max_ratio = 0.0;
  while (accepted < 200) {
    const auto g = oracle::small_network(rng, 8, 0.5).graph;
    if (g.edge_count() == 0) continue;
    const auto f = oracle::random_flows(rng, g);
    BruteForceResult star;
    try {
      star = brute_force_opt(g, f, 2);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SearchSpaceTooLarge) throw;
      ++skipped;
      continue;
    }
    const auto pi = sectorize_network(g, f, 2);
    const auto rep = lambda_extension(build_auxiliary(g, pi.sigma), f);
    if (!rep.exact) {
      ++skipped;
      continue;
    }
    ++accepted;
    const double ratio = rep.lambda() / star.lambda_star;
    min_ratio = std::min(min_ratio, ratio);
    max_ratio = std::max(max_ratio, ratio);
    if (!le(2.0 / 3.0, ratio)) ++below;
    if (!le(ratio, 1.0)) ++above;
    if (!le(lb_bound(pi.mu_pi, f), ratio)) ++lb_fail;
  }
  return {below == 0 && above == 0 && lb_fail == 0,
          fmt("%d networks (%d skipped over search limit), ratio in [%.4f, %.4f], %d below 2/3, %d above 1, "
              "%d below LB",
              accepted, skipped, min_ratio, max_ratio, below, above, lb_fail)};
}

// ---------------------------------------------------------------- 3, 4, 6

struct Triple {
  ConnectivityGraph g;
  NetworkSectorization sigma;
  FlowVector f;
};

std::vector<Triple> triple_suite() {
  Rng rng(303);
  std::vector<Triple> out;
  while (out.size() < 1000) {
    auto g = oracle::small_network(rng, 8, 0.5).graph;
    if (g.edge_count() == 0) continue;
    const int k_cap = 1 + static_cast<int>(rng.next() % 3);
    auto sigma = oracle::random_sectorization(rng, g, k_cap);
    if (build_auxiliary(g, sigma).vertex_count() > 16) continue;
    auto f = oracle::random_flows(rng, g);
    out.push_back({std::move(g), std::move(sigma), std::move(f)});
  }
  return out;
}

Outcome ratio_inequalities(const std::vector<Triple>& suite) {
  int fails = 0, oracle_mismatch = 0, inexact = 0;
  auto check = [&](const AuxiliaryGraph& h, const FlowVector& f, const ExtensionReport& r) {
    const auto x = f.undirected();
    const double ref = std::min(oracle::brute_force_mu(h, x), oracle::brute_force_zeta(h, x));
    if (std::abs(ref - r.lambda()) > kTol * ref) ++oracle_mismatch;
    if (!le(2.0 / 3.0 * r.mu, r.lambda()) || !le(r.lambda(), r.mu)) ++fails;
    if (!le(1.0 / r.lambda() - f.max_edge(), 1.0 / r.mu)) ++fails;
  };
  for (const auto& t : suite) {
    const auto hs = build_auxiliary(t.g, t.sigma);
    const auto hu = build_auxiliary(t.g, unsectorized(t.g));
    const auto gr = gains(t.g, t.sigma, t.f, 16);
    if (!gr.g_lambda.exact()) {
      ++inexact;
      continue;
    }
    check(hs, t.f, gr.sectorized);
    check(hu, t.f, gr.unsectorized);
    if (!le(2.0 / 3.0 * gr.g_mu, gr.g_lambda.lo) || !le(gr.g_lambda.lo, 1.5 * gr.g_mu)) ++fails;
  }

  // Triangle with uniform flow: lambda sits exactly at 2/3 mu.
  const auto tri = geometric_network({{0.3, 0.3}, {0.5, 0.3}, {0.4, 0.45}}, 0.3).graph;
  const auto tf = FlowVector::from_undirected(std::vector<double>(3, 1.0 / 3.0));
  const auto tr = lambda_extension(build_auxiliary(tri, unsectorized(tri)), tf);
  const bool tight = tri.edge_count() == 3 && tr.exact && std::abs(tr.lambda() - 2.0 / 3.0 * tr.mu) <= kTol;

  return {fails == 0 && oracle_mismatch == 0 && inexact == 0 && tight,
          fmt("%zu triples, %d inequality failures, %d oracle mismatches, %d inexact, triangle lambda/mu = %.6f",
              suite.size(), fails, oracle_mismatch, inexact, tr.lambda() / tr.mu)};
}

Outcome monotonicity(const std::vector<Triple>& suite) {
  int mu_fail = 0, lambda_fail = 0;
  for (const auto& t : suite) {
    const auto gr = gains(t.g, t.sigma, t.f, 16);
    if (gr.sectorized.mu < gr.unsectorized.mu) ++mu_fail;
    if (gr.sectorized.lambda() < gr.unsectorized.lambda()) ++lambda_fail;
  }
  return {mu_fail == 0 && lambda_fail == 0,
          fmt("%zu triples, %d mu decreases, %d lambda decreases", suite.size(), mu_fail, lambda_fail)};
}

Outcome boundary_probe(const std::vector<Triple>& suite) {
  int probed = 0, fails = 0;
  for (const auto& t : suite) {
    const auto h = build_auxiliary(t.g, t.sigma);
    const auto r = lambda_extension(h, t.f, 16);
    if (!r.exact) continue;
    ++probed;
    auto x = t.f.undirected();
    for (double& v : x) v *= r.lambda();
    if (in_polytope(x, h, Polytope::Matching, 16) != Membership::Inside) ++fails;
    for (double& v : x) v *= 1.000001;
    if (in_polytope(x, h, Polytope::Matching, 16) != Membership::Outside) ++fails;
  }
  return {probed == static_cast<int>(suite.size()) && fails == 0,
          fmt("%d exact instances probed, %d failures", probed, fails)};
}

// ---------------------------------------------------------------- 5

// Smallest floor(|U|/2) / x(E(U)) over odd U inside one component.
double component_odd_ratio(const AuxiliaryGraph& h, const AuxComponent& c, const std::vector<double>& x) {
  const int m = static_cast<int>(c.vertices.size());
  std::vector<int> pos(h.vertex_count(), -1);
  for (int i = 0; i < m; ++i) pos[c.vertices[i]] = i;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size < 3 || size % 2 == 0) continue;
    double inside = 0.0;
    for (int e : c.edges) {
      const int a = pos[h.endpoints(e)[0]];
      const int b = pos[h.endpoints(e)[1]];
      if ((mask >> a & 1u) && (mask >> b & 1u)) inside += x[e];
    }
    if (inside > 0.0) best = std::min(best, (size / 2) / inside);
  }
  return best;
}

bool two_colourable(const AuxiliaryGraph& h) {
  std::vector<std::vector<int>> adj(h.vertex_count());
  for (int e = 0; e < h.edge_count(); ++e) {
    adj[h.endpoints(e)[0]].push_back(h.endpoints(e)[1]);
    adj[h.endpoints(e)[1]].push_back(h.endpoints(e)[0]);
  }
  std::vector<int> colour(h.vertex_count(), -1);
  for (int s = 0; s < h.vertex_count(); ++s) {
    if (colour[s] >= 0) continue;
    colour[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (colour[v] < 0) {
          colour[v] = 1 - colour[u];
          q.push(v);
        } else if (colour[v] == colour[u]) {
          return false;
        }
      }
    }
  }
  return true;
}

Outcome even_homogeneous_structure() {
  Rng rng(505);
  int checked = 0, fails = 0, odd_checked = 0, lambda_fail = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = 10 + static_cast<int>(rng.next() % 31);
    const double range = rng.uniform(0.2, 0.45);
    const auto g = random_geometric(n, range, rng.next()).graph;
    if (g.edge_count() == 0) {
      --i;
      continue;
    }
    const auto f = oracle::random_flows(rng, g);
    const auto x = f.undirected();
    for (int k : {2, 4, 6, 8}) {
      ++checked;
      const auto h = build_auxiliary(g, even_homogeneous(g, k, rng.uniform(0.0, 360.0)));
      const auto dec = bipartite_decomposition(h);
      const int half = k / 2;
      bool paired = true;
      std::vector<char> used_class(half, 0);
      for (int e = 0; e < h.edge_count(); ++e) {
        const int a = h.vertex(h.endpoints(e)[0]).slot;
        const int b = h.vertex(h.endpoints(e)[1]).slot;
        if ((a + half) % k != b) paired = false;
        used_class[std::min(a, b) % half] = 1;
      }
      const int classes = std::accumulate(used_class.begin(), used_class.end(), 0);
      if (!two_colourable(h) || !dec.all_bipartite || !paired || !dec.pairing_consistent ||
          classes > half || static_cast<int>(dec.pair_classes.size()) != classes)
        ++fails;
      const auto r = lambda_extension(h, f);
      if (!r.exact || r.lambda() != r.mu) ++lambda_fail;
      for (const auto& c : h.components()) {
        if (c.vertices.size() < 3 || c.vertices.size() > 20) continue;
        ++odd_checked;
        if (!le(r.mu, component_odd_ratio(h, c, x))) ++lambda_fail;
      }
    }
  }
  return {fails == 0 && lambda_fail == 0,
          fmt("%d sectorizations on 200 graphs, %d structure failures, %d lambda != mu "
              "(%d components odd-set checked)",
              checked, fails, lambda_fail, odd_checked)};
}

// ---------------------------------------------------------------- 7

double enumerated_optimum(const WeightedGraph& g) {
  double best = 0.0;
  for (const auto& m : enumerate_matchings(g)) best = std::max(best, m.weight);
  return best;
}

Outcome mwm_oracle() {
  Rng rng(707);
  int general_fail = 0, bipartite_fail = 0;
  for (int i = 0; i < 200; ++i) {
    const auto g = oracle::random_weighted_graph(rng, 10, 20, 50);
    if (mwm_general(g).weight != enumerated_optimum(g)) ++general_fail;
    std::vector<int> side;
    const auto b = oracle::random_bipartite_graph(rng, 5, 20, 50, side);
    const double opt = enumerated_optimum(b);
    if (mwm_bipartite(b, side).weight != opt) ++bipartite_fail;
    if (mwm_general(b).weight != opt) ++general_fail;
  }
  return {general_fail == 0 && bipartite_fail == 0,
          fmt("200 general + 200 bipartite graphs, %d general mismatches, %d bipartite mismatches", general_fail,
              bipartite_fail)};
}

// ---------------------------------------------------------------- 8

Outcome theta_medians() {
  const auto series = theta_cdf(ThetaSpec{});
  const double target[] = {107.0, 6.7, 2.0};
  bool ok = true;
  std::string detail = "medians";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double m = series[i].median;
    const bool in = std::abs(m - target[i]) <= 0.2 * target[i];
    ok = ok && in;
    detail += fmt(" N=%d %.2f deg (band %.2f-%.2f)%s", series[i].nodes, m, 0.8 * target[i], 1.2 * target[i],
                  in ? "" : " OUT");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 9, 10, 11

Outcome grid_knee(const GridResult& r) {
  const auto u = r.unsectorized_sweep.knee;
  const auto s = r.sectorized_sweep.knee;
  if (!r.knee_ratio) return {false, "knee missing from a sweep"};
  const double q = *r.knee_ratio;
  return {q >= 1.35 && q <= 2.0, fmt("knee unsectorized %.3f, K=2 %.3f, ratio %.3f", *u, *s, q)};
}

Outcome mwm_timing(const GridResult& r) {
  double component = 0.0, whole = 0.0;
  for (const auto& p : r.sectorized_sweep.points) {
    component += p.mwm_micros;
    whole += p.shadow_micros;
  }
  const double speedup = component > 0.0 ? whole / component : 0.0;
  return {component < whole && speedup >= 1.2,
          fmt("per-component %.3f s, whole-graph %.3f s, speedup %.2fx", component * 1e-6, whole * 1e-6, speedup)};
}

Outcome conservation(const GridResult& r) {
  InvariantTally t;
  std::int64_t empty = 0;
  int runs = 0;
  for (const auto* sweep : {&r.unsectorized_sweep, &r.sectorized_sweep}) {
    for (const auto& p : sweep->points) {
      ++runs;
      t.infeasible_schedules += p.violations.infeasible_schedules;
      t.conservation_breaks += p.violations.conservation_breaks;
      t.nonpositive_activations += p.violations.nonpositive_activations;
      t.weight_mismatches += p.violations.weight_mismatches;
      empty += p.empty_services;
    }
  }
  return {t.total() == 0,
          fmt("%d runs, %lld infeasible, %lld conservation, %lld nonpositive, %lld weight mismatches "
              "(%lld empty services)",
              runs, static_cast<long long>(t.infeasible_schedules), static_cast<long long>(t.conservation_breaks),
              static_cast<long long>(t.nonpositive_activations), static_cast<long long>(t.weight_mismatches),
              static_cast<long long>(empty))};
}

// ---------------------------------------------------------------- 12

Outcome gain_shape() {
  GainSweepSpec spec;
  spec.nodes = {60};
  spec.ranges = {0.3};
  spec.phis = {10.0};
  spec.ks = {2, 3, 4, 5, 6, 7, 8};
  spec.instances = 100;
  spec.seed = 1;
  const auto res = gain_sweep(spec);
  bool ok = true;
  std::string detail = "mean g_mu";
  double prev = 0.0;
  for (const auto& row : res.rows) {
    const double m = row.g_mu.mean;
    if (m < prev || !le(m, row.k)) ok = false;
    prev = m;
    detail += fmt(" K=%d %.3f", row.k, m);
  }
  if (res.rows.front().g_mu.mean < 1.8) ok = false;
  return {ok, detail};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "optimizer matches brute-force partition", optimizer_oracle);
  report(2, "greedy sectorization within 2/3 of optimum", two_thirds_approximation);
  const auto suite = triple_suite();
  report(3, "extension ratio inequalities", [&] { return ratio_inequalities(suite); });
  report(4, "sectorization never lowers mu or lambda", [&] { return monotonicity(suite); });
  report(5, "even homogeneous structure and lambda = mu", even_homogeneous_structure);
  report(6, "matching polytope boundary probe", [&] { return boundary_probe(suite); });
  report(7, "matching solvers match enumeration", mwm_oracle);
  report(8, "beamwidth threshold medians", theta_medians);

  GridResult grid;
  bool grid_ok = true;
  std::string grid_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    grid = grid_capacity(GridSpec{});
  } catch (const std::exception& e) {
    grid_ok = false;
    grid_error = e.what();
  }
  const double grid_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("     grid sweeps finished in %.1f s\n", grid_secs);
  auto on_grid = [&](const std::function<Outcome(const GridResult&)>& fn) {
    return [&, fn] { return grid_ok ? fn(grid) : Outcome{false, "grid sweep threw: " + grid_error}; };
  };
  report(9, "grid capacity knee ratio", on_grid(grid_knee));
  report(10, "per-component scheduling is faster", on_grid(mwm_timing));
  report(11, "backpressure invariants hold every slot", on_grid(conservation));
  report(12, "gain sweep shape on the dense cell", gain_shape);

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
