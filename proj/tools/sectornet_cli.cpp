// Command-line front end for the sectornet library.
//
// Exit codes: 0 success, 2 bad input or arguments, 3 guard or invariant
// violation, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sectornet/sectornet.hpp"

namespace fs = std::filesystem;
using namespace sectornet;

namespace {

constexpr int kExitSpec = 2;
constexpr int kExitGuard = 3;

struct Globals {
  std::uint64_t seed = 1;
  int instances = 100;
  std::string out_dir = ".";
  int threads = 0;
};

std::string out_path(const Globals& g, const std::string& explicit_path, const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / default_name).string();
}

void save_table(const std::string& path, const Table& t) {
  write_text_file(path, to_csv(t));
  std::cout << "wrote " << path << " (" << t.rows.size() << " rows)\n";
}

Network parse_grid(const std::string& spec, bool diagonals) {
  const auto x = spec.find('x');
  require(x != std::string::npos, ErrorCode::Precondition, "grid must be RxC");
  try {
    return grid_network(std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1)), diagonals);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Precondition, "grid must be RxC");
  }
}

// ---- gen-network ----

struct GenArgs {
  int nodes = 0;
  double range = 0.0;
  std::string grid;
  bool diagonals = false;
  std::string out;
};

int cmd_gen_network(const Globals& g, const GenArgs& a) {
  require(a.grid.empty() != (a.nodes == 0), ErrorCode::Precondition, "give either --nodes/--range or --grid");
  const Network net = a.grid.empty() ? random_geometric(a.nodes, a.range, g.seed) : parse_grid(a.grid, a.diagonals);
  const auto path = out_path(g, a.out, "network.json");
  write_network(path, net);
  std::cout << "wrote " << path << ": " << net.graph.node_count() << " nodes, " << net.graph.edge_count()
            << " edges, theta_th " << theta_threshold(net.graph) << " deg\n";
  return 0;
}

// ---- sectorize ----

struct SectorizeArgs {
  std::string network;
  std::string flows;
  double phi = 0.0;
  int sectors = 2;
  std::optional<double> epsilon;
  std::string out;
  std::string dot;
};

int cmd_sectorize(const Globals& g, const SectorizeArgs& a) {
  const auto net = read_network(a.network);
  require(a.flows.empty() != (a.phi == 0.0), ErrorCode::Precondition, "give either --flows or --phi");
  const auto f = a.flows.empty() ? generate_flows(net.graph, a.phi, g.seed) : read_flows(a.flows, net.graph);
  const auto res = sectorize_network(net.graph, f, a.sectors, a.epsilon);
  const auto h = build_auxiliary(net.graph, res.sigma);
  const double mu_pi = mu_extension(h, f).mu;
  const double mu_0 = mu_extension(build_auxiliary(net.graph, unsectorized(net.graph)), f).mu;
  const auto path = out_path(g, a.out, "sigma.json");
  write_sectorization(path, res.sigma);
  if (!a.dot.empty()) write_text_file(a.dot, to_dot(h));
  ordered_json report;
  report["sigma"] = path;
  report["mu_pi"] = mu_pi;
  report["mu_unsectorized"] = mu_0;
  report["g_mu"] = mu_pi / mu_0;
  report["lb_pi"] = lb_bound(mu_pi, f);
  report["aux_components"] = h.components().size();
  report["aux_bipartite"] = h.bipartite();
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---- sweeps ----

struct SweepArgs {
  std::vector<int> nodes;
  std::vector<double> ranges;
  std::vector<double> phis;
  std::vector<int> ks;
  bool brute_force = false;
  std::string out;
};

int cmd_gain_sweep(const Globals& g, const SweepArgs& a) {
  GainSweepSpec s;
  if (!a.nodes.empty()) s.nodes = a.nodes;
  if (!a.ranges.empty()) s.ranges = a.ranges;
  if (!a.phis.empty()) s.phis = a.phis;
  if (!a.ks.empty()) s.ks = a.ks;
  s.instances = g.instances;
  s.seed = g.seed;
  s.threads = g.threads;
  const auto res = gain_sweep(s);
  Table t{{"nodes", "range", "phi", "k", "instances", "mean_g_mu", "stderr", "min_g_mu", "max_g_mu"}, {}};
  for (const auto& r : res.rows) {
    RowWriter w;
    w << r.cell.nodes << r.cell.range << r.cell.phi << r.k << r.instances << r.g_mu.mean << r.g_mu.stderr_
      << r.g_mu.min << r.g_mu.max;
    t.rows.push_back(w.take());
  }
  save_table(out_path(g, a.out, "gain_sweep.csv"), t);
  return 0;
}

int cmd_lb_sweep(const Globals& g, const SweepArgs& a) {
  LbSweepSpec s;
  if (!a.nodes.empty()) s.nodes = a.nodes;
  if (!a.ranges.empty()) s.ranges = a.ranges;
  if (!a.phis.empty()) s.phis = a.phis;
  if (!a.ks.empty()) s.ks = a.ks;
  s.instances = g.instances;
  s.seed = g.seed;
  s.threads = g.threads;
  s.brute_force = a.brute_force;
  const auto rows = lb_sweep(s);
  Table t{{"nodes", "range", "phi", "k", "instances", "mean_lb", "stderr", "min_lb", "brute_forced", "min_ratio",
           "bound_violations"},
          {}};
  int violations = 0;
  for (const auto& r : rows) {
    RowWriter w;
    w << r.cell.nodes << r.cell.range << r.cell.phi << r.k << r.instances << r.lb.mean << r.lb.stderr_ << r.lb.min
      << r.brute_forced << (r.brute_forced ? r.ratio.min : std::numeric_limits<double>::quiet_NaN())
      << r.bound_violations;
    t.rows.push_back(w.take());
    violations += r.bound_violations;
  }
  save_table(out_path(g, a.out, "lb_sweep.csv"), t);
  if (violations > 0) {
    std::cerr << "approximation ratio fell below the bound on " << violations << " instance(s)\n";
    return kExitGuard;
  }
  return 0;
}

struct ThetaArgs {
  std::vector<int> nodes{20, 40, 60};
  double range = 0.1;
  std::string out;
};

int cmd_theta_cdf(const Globals& g, const ThetaArgs& a) {
  ThetaSpec s;
  s.nodes = a.nodes;
  s.range = a.range;
  s.instances = g.instances;
  s.seed = g.seed;
  s.threads = g.threads;
  const auto series = theta_cdf(s);
  Table t{{"nodes", "rank", "theta", "cdf"}, {}};
  for (const auto& ser : series) {
    for (std::size_t i = 0; i < ser.sorted.size(); ++i) {
      RowWriter w;
      w << ser.nodes << static_cast<long long>(i + 1) << ser.sorted[i]
        << static_cast<double>(i + 1) / static_cast<double>(ser.sorted.size());
      t.rows.push_back(w.take());
    }
    std::cout << "N=" << ser.nodes << " median theta_th " << ser.median << " deg\n";
  }
  save_table(out_path(g, a.out, "theta_cdf.csv"), t);
  return 0;
}

struct GainCdfArgs {
  int nodes = 20;
  double range = 0.3;
  double phi = 5.0;
  std::vector<int> ks{2, 4, 6, 8};
  std::string out;
};

int cmd_gain_cdf(const Globals& g, const GainCdfArgs& a) {
  GainCdfSpec s;
  s.nodes = a.nodes;
  s.range = a.range;
  s.phi = a.phi;
  s.ks = a.ks;
  s.instances = g.instances;
  s.seed = g.seed;
  s.threads = g.threads;
  Table t{{"k", "rank", "g_mu", "cdf"}, {}};
  for (const auto& ser : gain_cdf(s)) {
    for (std::size_t i = 0; i < ser.sorted.size(); ++i) {
      RowWriter w;
      w << ser.k << static_cast<long long>(i + 1) << ser.sorted[i]
        << static_cast<double>(i + 1) / static_cast<double>(ser.sorted.size());
      t.rows.push_back(w.take());
    }
  }
  save_table(out_path(g, a.out, "gain_cdf.csv"), t);
  return 0;
}

// ---- grid ----

struct GridArgs {
  int rows = 4;
  int cols = 4;
  bool no_diagonals = false;
  int sectors = 2;
  double offset = 0.0;
  double alpha_min = 0.005;
  double alpha_max = 0.040;
  double alpha_step = 0.001;
  long long slots = 200'000;
  int patience = 2;
  std::string out;
};

GridResult run_grid(const Globals& g, const GridArgs& a) {
  GridSpec s;
  s.rows = a.rows;
  s.cols = a.cols;
  s.diagonals = !a.no_diagonals;
  s.k = a.sectors;
  s.axis_offset = a.offset;
  s.alphas = alpha_range(a.alpha_min, a.alpha_max, a.alpha_step);
  s.horizon = a.slots;
  s.seed = g.seed;
  s.patience = a.patience;
  return grid_capacity(s);
}

std::int64_t sweep_violations(const SweepResult& s) {
  std::int64_t v = 0;
  for (const auto& p : s.points) v += p.violations.total();
  return v;
}

std::string knee_text(const std::optional<double>& k) { return k ? detail::format_double(*k) : "below-range"; }

int cmd_grid_capacity(const Globals& g, const GridArgs& a) {
  const auto r = run_grid(g, a);
  Table t{{"policy", "alpha", "final_backlog", "slope", "stable", "empty_services"}, {}};
  auto add = [&](const char* policy, const SweepResult& sw) {
    for (const auto& p : sw.points) {
      RowWriter w;
      w << policy << p.alpha << static_cast<long long>(p.final_backlog) << p.slope << p.stable
        << static_cast<long long>(p.empty_services);
      t.rows.push_back(w.take());
    }
  };
  add("unsectorized", r.unsectorized_sweep);
  add("even_homogeneous", r.sectorized_sweep);
  save_table(out_path(g, a.out, "grid_capacity.csv"), t);
  std::cout << "knee unsectorized " << knee_text(r.unsectorized_sweep.knee) << ", even homogeneous K=" << a.sectors
            << " " << knee_text(r.sectorized_sweep.knee);
  if (r.knee_ratio) std::cout << ", ratio " << *r.knee_ratio;
  std::cout << "\n";
  return sweep_violations(r.unsectorized_sweep) + sweep_violations(r.sectorized_sweep) ? kExitGuard : 0;
}

int cmd_mwm_timing(const Globals& g, const GridArgs& a) {
  const auto r = run_grid(g, a);
  Table t{{"alpha", "component_micros", "whole_graph_micros", "speedup"}, {}};
  double comp = 0.0, whole = 0.0;
  for (const auto& row : timing_rows(r.sectorized_sweep)) {
    RowWriter w;
    w << row.alpha << row.component_micros << row.whole_graph_micros << row.speedup;
    t.rows.push_back(w.take());
    comp += row.component_micros;
    whole += row.whole_graph_micros;
  }
  save_table(out_path(g, a.out, "mwm_timing.csv"), t);
  std::cout << "cumulative scheduling time: per-component " << comp / 1e6 << " s, whole-graph blossom "
            << whole / 1e6 << " s, speedup " << (comp > 0 ? whole / comp : 0.0) << "\n";
  return sweep_violations(r.sectorized_sweep) ? kExitGuard : 0;
}

// ---- simulate ----

struct SimArgs {
  std::string network;
  std::string grid;
  bool diagonals = false;
  std::string sigma = "none";
  double alpha = 0.01;
  long long slots = 10'000;
  int period = 10'000;
  double beta = 1e-3;
  bool shadow = false;
  std::string trace;
};

int cmd_simulate(const Globals& g, const SimArgs& a) {
  require(a.network.empty() != a.grid.empty(), ErrorCode::Precondition, "give either --network or --grid");
  const auto net = a.network.empty() ? parse_grid(a.grid, a.diagonals) : read_network(a.network);
  const auto& graph = net.graph;
  SimConfig cfg;
  cfg.horizon = a.slots;
  cfg.alpha = ArrivalMatrix::uniform(graph.node_count(), a.alpha);
  cfg.seed = g.seed;
  cfg.beta = a.beta;
  cfg.shadow_general = a.shadow;
  NetworkSectorization sigma = unsectorized(graph);
  auto k_of = [&](std::size_t prefix) {
    try {
      return std::stoi(a.sigma.substr(prefix));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::Precondition, "bad --sigma " + a.sigma);
    }
  };
  if (a.sigma.rfind("even:", 0) == 0) {
    sigma = even_homogeneous(graph, k_of(5), 0.0);
  } else if (a.sigma.rfind("dynamic:", 0) == 0) {
    cfg.policy = SectorPolicy::dynamic(k_of(8), a.period);
  } else if (a.sigma != "none") {
    sigma = read_sectorization(a.sigma, graph);
  }
  const auto r = run(cfg, graph, sigma);
  if (!a.trace.empty()) save_table(a.trace, trace_table(r));
  ordered_json report;
  report["slots"] = cfg.horizon;
  report["final_backlog"] = r.backlog.back();
  report["tail_slope"] = tail_slope(r.backlog);
  report["arrivals"] = r.arrivals;
  report["deliveries"] = r.deliveries;
  report["empty_services"] = r.empty_services;
  report["mwm_micros"] = r.mwm_micros;
  if (a.shadow) report["whole_graph_micros"] = r.shadow_micros;
  report["resectorizations"] = r.resectorizations;
  report["violations"] = r.violations.total();
  std::cout << report.dump(2) << "\n";
  return r.violations.total() ? kExitGuard : 0;
}

// ---- chart ----

struct ChartArgs {
  std::string csv;
  std::string kind;
  std::string x;
  std::vector<std::string> y;
  std::vector<std::string> group;
  std::string title;
  std::string out;
};

int cmd_chart(const Globals& g, const ChartArgs& a) {
  ChartSpec spec;
  if (!a.kind.empty()) spec = chart_preset(a.kind);
  if (!a.x.empty()) spec.x = a.x;
  if (!a.y.empty()) spec.y = a.y;
  if (!a.group.empty()) spec.group = a.group;
  if (!a.title.empty()) spec.title = a.title;
  require(!spec.x.empty() && !spec.y.empty(), ErrorCode::Precondition, "give --kind or both --x and --y");
  const auto svg = chart_from_csv(read_text_file(a.csv), spec);
  const auto path = out_path(g, a.out, fs::path(a.csv).stem().string() + ".svg");
  write_text_file(path, svg);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::SearchSpaceTooLarge:
    case ErrorCode::InvariantViolation:
      return kExitGuard;
    default:
      return kExitSpec;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sectorized wireless network capacity toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--instances", g.instances, "Monte Carlo instances per cell")->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for default output files")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();

  int status = 0;

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-network", "random geometric or grid network");
  c_gen->add_option("--nodes", gen.nodes, "node count");
  c_gen->add_option("--range", gen.range, "communication range 2R");
  c_gen->add_option("--grid", gen.grid, "RxC lattice instead of random nodes");
  c_gen->add_flag("--diagonals", gen.diagonals, "grid: connect diagonal neighbours");
  c_gen->add_option("--out", gen.out, "output JSON");
  c_gen->callback([&] { status = cmd_gen_network(g, gen); });

  SectorizeArgs sec;
  auto* c_sec = app.add_subcommand("sectorize", "run the distributed sectorization optimizer");
  c_sec->add_option("--network", sec.network, "network JSON")->required();
  c_sec->add_option("--flows", sec.flows, "flow JSON");
  c_sec->add_option("--phi", sec.phi, "draw random flows with this uniformity instead");
  c_sec->add_option("--sectors", sec.sectors, "sectors per node K")->capture_default_str();
  c_sec->add_option("--epsilon", sec.epsilon, "binary search tolerance");
  c_sec->add_option("--out", sec.out, "output sectorization JSON");
  c_sec->add_option("--dot", sec.dot, "also write the auxiliary graph as DOT");
  c_sec->callback([&] { status = cmd_sectorize(g, sec); });

  SweepArgs gs;
  auto* c_gs = app.add_subcommand("gain-sweep", "mean mu gain over K per (N, 2R, phi) cell");
  c_gs->add_option("--nodes", gs.nodes)->delimiter(',');
  c_gs->add_option("--ranges", gs.ranges)->delimiter(',');
  c_gs->add_option("--phis", gs.phis)->delimiter(',');
  c_gs->add_option("--ks", gs.ks)->delimiter(',');
  c_gs->add_option("--out", gs.out, "output CSV");
  c_gs->callback([&] { status = cmd_gain_sweep(g, gs); });

  SweepArgs lb;
  auto* c_lb = app.add_subcommand("lb-sweep", "approximation lower bound over K per cell");
  c_lb->add_option("--nodes", lb.nodes)->delimiter(',');
  c_lb->add_option("--ranges", lb.ranges)->delimiter(',');
  c_lb->add_option("--phis", lb.phis)->delimiter(',');
  c_lb->add_option("--ks", lb.ks)->delimiter(',');
  c_lb->add_flag("--brute-force", lb.brute_force, "compare with the exhaustive optimum where feasible");
  c_lb->add_option("--out", lb.out, "output CSV");
  c_lb->callback([&] { status = cmd_lb_sweep(g, lb); });

  ThetaArgs th;
  auto* c_th = app.add_subcommand("theta-cdf", "empirical CDF of the beamwidth threshold");
  c_th->add_option("--nodes", th.nodes)->delimiter(',')->capture_default_str();
  c_th->add_option("--range", th.range)->capture_default_str();
  c_th->add_option("--out", th.out, "output CSV");
  c_th->callback([&] { status = cmd_theta_cdf(g, th); });

  GainCdfArgs gc;
  auto* c_gc = app.add_subcommand("gain-cdf", "distribution of the mu gain per K");
  c_gc->add_option("--nodes", gc.nodes)->capture_default_str();
  c_gc->add_option("--range", gc.range)->capture_default_str();
  c_gc->add_option("--phi", gc.phi)->capture_default_str();
  c_gc->add_option("--ks", gc.ks)->delimiter(',')->capture_default_str();
  c_gc->add_option("--out", gc.out, "output CSV");
  c_gc->callback([&] { status = cmd_gain_cdf(g, gc); });

  GridArgs grid;
  auto grid_options = [&](CLI::App* c) {
    c->add_option("--rows", grid.rows)->capture_default_str();
    c->add_option("--cols", grid.cols)->capture_default_str();
    c->add_flag("--no-diagonals", grid.no_diagonals);
    c->add_option("--sectors", grid.sectors, "even homogeneous K")->capture_default_str();
    c->add_option("--axis-offset", grid.offset, "degrees")->capture_default_str();
    c->add_option("--alpha-min", grid.alpha_min)->capture_default_str();
    c->add_option("--alpha-max", grid.alpha_max)->capture_default_str();
    c->add_option("--alpha-step", grid.alpha_step)->capture_default_str();
    c->add_option("--slots", grid.slots)->capture_default_str();
    c->add_option("--patience", grid.patience, "stop after this many unstable rates (0 = never)")
        ->capture_default_str();
    c->add_option("--out", grid.out, "output CSV");
  };
  auto* c_gcap = app.add_subcommand("grid-capacity", "stability knee of a grid, unsectorized vs even homogeneous");
  grid_options(c_gcap);
  c_gcap->callback([&] { status = cmd_grid_capacity(g, grid); });
  auto* c_tim = app.add_subcommand("mwm-timing", "per-component vs whole-graph scheduling time on the grid");
  grid_options(c_tim);
  c_tim->callback([&] { status = cmd_mwm_timing(g, grid); });

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "backpressure simulation with a trace");
  c_sim->add_option("--network", sim.network, "network JSON");
  c_sim->add_option("--grid", sim.grid, "RxC lattice instead of a file");
  c_sim->add_flag("--diagonals", sim.diagonals);
  c_sim->add_option("--sigma", sim.sigma, "none | even:K | dynamic:K | sectorization JSON")->capture_default_str();
  c_sim->add_option("--alpha", sim.alpha, "uniform Bernoulli arrival rate")->capture_default_str();
  c_sim->add_option("--slots", sim.slots)->capture_default_str();
  c_sim->add_option("--period", sim.period, "dynamic re-sectorization period")->capture_default_str();
  c_sim->add_option("--beta", sim.beta, "served-rate smoothing factor")->capture_default_str();
  c_sim->add_flag("--shadow", sim.shadow, "also time a whole-graph blossom every slot");
  c_sim->add_option("--trace", sim.trace, "output trace CSV");
  c_sim->callback([&] { status = cmd_simulate(g, sim); });

  ChartArgs ch;
  auto* c_ch = app.add_subcommand("chart", "SVG line chart from an experiment CSV");
  c_ch->add_option("--csv", ch.csv)->required();
  c_ch->add_option("--kind", ch.kind, "gain-sweep | theta-cdf | lb-sweep | gain-cdf | grid-capacity | mwm-timing | trace");
  c_ch->add_option("--x", ch.x);
  c_ch->add_option("--y", ch.y)->delimiter(',');
  c_ch->add_option("--group", ch.group)->delimiter(',');
  c_ch->add_option("--title", ch.title);
  c_ch->add_option("--out", ch.out, "output SVG");
  c_ch->callback([&] { status = cmd_chart(g, ch); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSpec;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return status;
}
