#pragma once

// Monte Carlo experiment drivers: random flows, gain sweeps, theta
// statistics, approximation-bound sweeps, gain distributions, and the grid
// stability/timing study. Every instance is seeded from (base seed, cell,
// instance index) so results do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sectornet/auxgraph.hpp"
#include "sectornet/backpressure.hpp"
#include "sectornet/capacity.hpp"
#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"
#include "sectornet/optimizer.hpp"
#include "sectornet/rng.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = all
/// cores). The exception of the lowest failing index is rethrown.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

/// U[1, phi] per undirected edge, scaled to unit Euclidean norm; each value
/// is split evenly over the two directions.
inline FlowVector generate_flows(const ConnectivityGraph& g, double phi, std::uint64_t seed) {
  require(g.edge_count() > 0, ErrorCode::NoEdges, "graph has no edges");
  require(std::isfinite(phi) && phi >= 1.0, ErrorCode::Precondition, "phi must be >= 1");
  Rng rng(seed);
  std::vector<double> f(g.edge_count());
  double norm = 0.0;
  for (auto& x : f) {
    x = rng.uniform(1.0, phi);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : f) x /= norm;
  return FlowVector::from_undirected(f);
}

struct Instance {
  Network net;
  FlowVector flows;
};

/// Random network with at least one edge plus random flows. Edgeless draws
/// are redrawn with the next attempt index.
inline Instance sample_instance(int nodes, double range_2r, double phi, std::uint64_t seed) {
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    auto net = random_geometric(nodes, range_2r, derive_seed(seed, 0, attempt));
    if (net.graph.edge_count() == 0) continue;
    auto f = generate_flows(net.graph, phi, derive_seed(seed, 1, attempt));
    return {std::move(net), std::move(f)};
  }
  throw Error(ErrorCode::NoEdges, "no connected pair after 1000 draws");
}

/// Unsectorized mu and the sectorized mu of Sectorize-n for every K.
inline std::vector<double> mu_gains(const ConnectivityGraph& g, const FlowVector& f, const std::vector<int>& ks) {
  const double mu0 = mu_extension(build_auxiliary(g, unsectorized(g)), f).mu;
  std::vector<double> out;
  for (int k : ks) {
    const auto res = sectorize_network(g, f, k);
    out.push_back(mu_extension(build_auxiliary(g, res.sigma), f).mu / mu0);
  }
  return out;
}

struct Cell {
  int nodes = 40;
  double range = 0.3;
  double phi = 15.0;
};

inline std::vector<Cell> cell_grid(const std::vector<int>& nodes, const std::vector<double>& ranges,
                                   const std::vector<double>& phis) {
  std::vector<Cell> cells;
  for (int n : nodes)
    for (double r : ranges)
      for (double p : phis) cells.push_back({n, r, p});
  return cells;
}

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  if (xs.size() > 1) s.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

struct GainSweepSpec {
  std::vector<int> nodes{40};
  std::vector<double> ranges{0.3};
  std::vector<double> phis{15.0};
  std::vector<int> ks{1, 2, 3, 4, 5, 6, 7, 8};
  int instances = 100;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct GainRow {
  Cell cell;
  int k = 1;
  int instances = 0;
  Summary g_mu;
};

struct GainSweepResult {
  std::vector<GainRow> rows;
  /// samples[cell][k index][instance]
  std::vector<std::vector<std::vector<double>>> samples;
};

inline void validate(const GainSweepSpec& s) {
  require(!s.nodes.empty() && !s.ranges.empty() && !s.phis.empty() && !s.ks.empty(), ErrorCode::Precondition,
          "parameter grids must be nonempty");
  require(s.instances >= 1, ErrorCode::Precondition, "instance count must be positive");
  for (int k : s.ks) require(k >= 1, ErrorCode::Precondition, "sector counts must be positive");
}

inline GainSweepResult gain_sweep(const GainSweepSpec& spec) {
  validate(spec);
  const auto cells = cell_grid(spec.nodes, spec.ranges, spec.phis);
  GainSweepResult out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<std::vector<double>> per_instance(spec.instances);
    parallel_for(spec.instances, spec.threads, [&](std::size_t i) {
      const auto inst = sample_instance(cells[c].nodes, cells[c].range, cells[c].phi, derive_seed(spec.seed, c, i));
      per_instance[i] = mu_gains(inst.net.graph, inst.flows, spec.ks);
    });
    std::vector<std::vector<double>> by_k(spec.ks.size());
    for (const auto& row : per_instance)
      for (std::size_t j = 0; j < row.size(); ++j) by_k[j].push_back(row[j]);
    for (std::size_t j = 0; j < spec.ks.size(); ++j) {
      const auto s = summarize(by_k[j]);
      if (s.max > spec.ks[j] * (1.0 + kRelativeTolerance))
        throw Error(ErrorCode::InvariantViolation, "mu gain above K");
      out.rows.push_back({cells[c], spec.ks[j], spec.instances, s});
    }
    out.samples.push_back(std::move(by_k));
  }
  return out;
}

struct ThetaSpec {
  std::vector<int> nodes{20, 40, 60};
  double range = 0.1;
  int instances = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct ThetaSeries {
  int nodes = 0;
  std::vector<double> sorted;  // +inf when no node has two neighbours
  double median = 0.0;
};

inline double median_of_sorted(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::vector<ThetaSeries> theta_cdf(const ThetaSpec& spec) {
  require(!spec.nodes.empty(), ErrorCode::Precondition, "node grid is empty");
  require(spec.instances >= 1, ErrorCode::Precondition, "instance count must be positive");
  std::vector<ThetaSeries> out;
  for (std::size_t c = 0; c < spec.nodes.size(); ++c) {
    ThetaSeries s;
    s.nodes = spec.nodes[c];
    s.sorted.resize(spec.instances);
    parallel_for(spec.instances, spec.threads, [&](std::size_t i) {
      s.sorted[i] = theta_threshold(random_geometric(s.nodes, spec.range, derive_seed(spec.seed, c, i)).graph);
    });
    std::sort(s.sorted.begin(), s.sorted.end());
    s.median = median_of_sorted(s.sorted);
    out.push_back(std::move(s));
  }
  return out;
}

struct LbSweepSpec {
  std::vector<int> nodes{40};
  std::vector<double> ranges{0.3};
  std::vector<double> phis{1.0, 5.0, 15.0};
  std::vector<int> ks{2, 3, 4, 5, 6, 7, 8};
  int instances = 100;
  std::uint64_t seed = 1;
  int threads = 0;
  /// Also brute-force lambda* where the search space allows.
  bool brute_force = false;
};

struct LbRow {
  Cell cell;
  int k = 2;
  int instances = 0;
  Summary lb;
  int brute_forced = 0;
  Summary ratio;  // lambda_pi / lambda_star over brute-forced instances
  int bound_violations = 0;
};

inline std::vector<LbRow> lb_sweep(const LbSweepSpec& spec) {
  require(!spec.nodes.empty() && !spec.ranges.empty() && !spec.phis.empty() && !spec.ks.empty(),
          ErrorCode::Precondition, "parameter grids must be nonempty");
  require(spec.instances >= 1, ErrorCode::Precondition, "instance count must be positive");
  const auto cells = cell_grid(spec.nodes, spec.ranges, spec.phis);
  std::vector<LbRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    struct Sample {
      double lb;
      std::optional<double> ratio;
    };
    std::vector<std::vector<Sample>> samples(spec.instances);
    parallel_for(spec.instances, spec.threads, [&](std::size_t i) {
      const auto inst = sample_instance(cells[c].nodes, cells[c].range, cells[c].phi, derive_seed(spec.seed, c, i));
      const auto& g = inst.net.graph;
      for (int k : spec.ks) {
        const auto pi = sectorize_network(g, inst.flows, k);
        Sample s{lb_bound(pi.mu_pi, inst.flows), {}};
        if (spec.brute_force) {
          try {
            const auto star = brute_force_opt(g, inst.flows, k);
            const auto rep = lambda_extension(build_auxiliary(g, pi.sigma), inst.flows);
            if (rep.exact) s.ratio = rep.lambda() / star.lambda_star;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::SearchSpaceTooLarge) throw;
          }
        }
        samples[i].push_back(s);
      }
    });
    for (std::size_t j = 0; j < spec.ks.size(); ++j) {
      std::vector<double> lbs;
      std::vector<double> ratios;
      LbRow row{cells[c], spec.ks[j], spec.instances, {}, 0, {}, 0};
      for (const auto& inst : samples) {
        const auto& s = inst[j];
        lbs.push_back(s.lb);
        if (s.lb > 1.0) throw Error(ErrorCode::InvariantViolation, "approximation bound above 1");
        if (s.ratio) {
          ratios.push_back(*s.ratio);
          if (s.lb > *s.ratio * (1.0 + kRelativeTolerance)) ++row.bound_violations;
        }
      }
      row.lb = summarize(lbs);
      row.brute_forced = static_cast<int>(ratios.size());
      row.ratio = summarize(ratios);
      rows.push_back(row);
    }
  }
  return rows;
}

struct GainCdfSpec {
  int nodes = 20;
  double range = 0.3;
  double phi = 5.0;
  std::vector<int> ks{2, 4, 6, 8};
  int instances = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct GainCdfSeries {
  int k = 0;
  std::vector<double> sorted;
};

inline std::vector<GainCdfSeries> gain_cdf(const GainCdfSpec& spec) {
  GainSweepSpec sweep;
  sweep.nodes = {spec.nodes};
  sweep.ranges = {spec.range};
  sweep.phis = {spec.phi};
  sweep.ks = spec.ks;
  sweep.instances = spec.instances;
  sweep.seed = spec.seed;
  sweep.threads = spec.threads;
  auto res = gain_sweep(sweep);
  std::vector<GainCdfSeries> out;
  for (std::size_t j = 0; j < spec.ks.size(); ++j) {
    auto v = std::move(res.samples[0][j]);
    std::sort(v.begin(), v.end());
    out.push_back({spec.ks[j], std::move(v)});
  }
  return out;
}

struct GridSpec {
  int rows = 4;
  int cols = 4;
  bool diagonals = true;
  int k = 2;
  double axis_offset = 0.0;
  std::vector<double> alphas;  // empty: 0.005 to 0.040 in steps of 0.001
  std::int64_t horizon = 200'000;
  std::uint64_t seed = 1;
  int patience = 2;
  bool shadow_general = true;
};

inline std::vector<double> alpha_range(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, ErrorCode::Precondition, "bad alpha range");
  std::vector<double> out;
  const auto count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int i = 0; i <= count; ++i) out.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return out;
}

struct GridResult {
  Network net;
  NetworkSectorization sectorized;
  SweepResult unsectorized_sweep;
  SweepResult sectorized_sweep;
  std::optional<double> knee_ratio;
};

/// Paired stability sweeps on the grid: unsectorized versus even
/// homogeneous K. The whole-graph blossom shadow runs on the sectorized
/// sweep only.
inline GridResult grid_capacity(const GridSpec& spec) {
  require(spec.rows * spec.cols >= 2, ErrorCode::Precondition, "grid needs at least two nodes");
  GridResult r;
  r.net = grid_network(spec.rows, spec.cols, spec.diagonals);
  const auto& g = r.net.graph;
  r.sectorized = even_homogeneous(g, spec.k, spec.axis_offset);
  const auto alphas = spec.alphas.empty() ? alpha_range(0.005, 0.040, 0.001) : spec.alphas;
  SweepOptions opt;
  opt.horizon = spec.horizon;
  opt.seed = spec.seed;
  opt.patience = spec.patience;
  r.unsectorized_sweep = stability_sweep(g, unsectorized(g), alphas, opt);
  opt.shadow_general = spec.shadow_general;
  r.sectorized_sweep = stability_sweep(g, r.sectorized, alphas, opt);
  if (r.unsectorized_sweep.knee && r.sectorized_sweep.knee)
    r.knee_ratio = *r.sectorized_sweep.knee / *r.unsectorized_sweep.knee;
  return r;
}

struct TimingRow {
  double alpha = 0.0;
  double component_micros = 0.0;
  double whole_graph_micros = 0.0;
  double speedup = 0.0;
};

inline std::vector<TimingRow> timing_rows(const SweepResult& sweep) {
  std::vector<TimingRow> rows;
  for (const auto& p : sweep.points) {
    rows.push_back({p.alpha, p.mwm_micros, p.shadow_micros,
                    p.mwm_micros > 0.0 ? p.shadow_micros / p.mwm_micros : 0.0});
  }
  return rows;
}

}  // namespace sectornet
