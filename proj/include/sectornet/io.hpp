#pragma once

// JSON and CSV serialization: networks, sectorizations, flows, traces and
// the plain tables the experiment drivers emit.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sectornet/backpressure.hpp"
#include "sectornet/capacity.hpp"
#include "sectornet/errors.hpp"
#include "sectornet/network.hpp"
#include "sectornet/sectorization.hpp"

namespace sectornet {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json parse_json(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::MalformedInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::MalformedInput, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), ErrorCode::MalformedInput, "write failed for " + path);
}

// ---- network ----

inline ordered_json network_to_json(const Network& net) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (std::size_t i = 0; i < net.geometry.positions.size(); ++i) {
    const auto& p = net.geometry.positions[i];
    j["nodes"].push_back({{"id", i}, {"x", p.x}, {"y", p.y}});
  }
  j["range_2R"] = net.geometry.range_2r;
  j["edges"] = ordered_json::array();
  for (const auto& e : net.graph.edges()) j["edges"].push_back({e.a, e.b});
  return j;
}

inline Network network_from_json(const ordered_json& j) {
  return detail::guarded([&] {
    std::vector<Point> pos(j.at("nodes").size());
    std::vector<char> seen(pos.size(), 0);
    for (const auto& node : j.at("nodes")) {
      const auto id = node.at("id").get<long long>();
      require(id >= 0 && id < static_cast<long long>(pos.size()) && !seen[id], ErrorCode::MalformedInput,
              "node ids must be 0..N-1 without repeats");
      seen[id] = 1;
      pos[id] = {node.at("x").get<double>(), node.at("y").get<double>()};
      require(pos[id].x >= 0.0 && pos[id].x <= 1.0 && pos[id].y >= 0.0 && pos[id].y <= 1.0,
              ErrorCode::MalformedInput, "node position outside the unit square");
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, ErrorCode::MalformedInput, "edges are [a, b] pairs");
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    Network net;
    net.geometry.positions = pos;
    net.geometry.range_2r = j.at("range_2R").get<double>();
    require(net.geometry.range_2r > 0.0, ErrorCode::MalformedInput, "range_2R must be positive");
    net.graph = ConnectivityGraph(std::move(pos), std::move(edges));
    return net;
  });
}

inline Network read_network(const std::string& path) { return network_from_json(detail::parse_json(read_text_file(path))); }

inline void write_network(const std::string& path, const Network& net) {
  write_text_file(path, network_to_json(net).dump(2) + "\n");
}

// ---- sectorization ----

inline ordered_json sectorization_to_json(const NetworkSectorization& sigma) {
  ordered_json j;
  j["kind"] = to_string(sigma.kind);
  if (sigma.kind == SectorizationKind::EvenHomogeneous) {
    j["K"] = sigma.even_k;
    j["axis_offset"] = sigma.axis_offset;
  }
  j["per_node"] = ordered_json::object();
  for (std::size_t n = 0; n < sigma.per_node.size(); ++n) {
    const auto& ns = sigma.per_node[n];
    j["per_node"][std::to_string(n)] = {{"cuts", ns.cuts}, {"sectors", ns.sector_cap}};
  }
  return j;
}

/// Even homogeneous input is rebuilt from (K, axis_offset) and must agree
/// with the listed cuts.
inline NetworkSectorization sectorization_from_json(const ordered_json& j, const ConnectivityGraph& g) {
  return detail::guarded([&] {
    const auto kind = j.at("kind").get<std::string>();
    const auto& per = j.at("per_node");
    require(per.is_object(), ErrorCode::MalformedInput, "per_node must be an object");
    NetworkSectorization sigma;
    if (kind == "even_homogeneous") {
      sigma = even_homogeneous(g, j.at("K").get<int>(), j.at("axis_offset").get<double>());
    } else {
      require(kind == "general" || kind == "unsectorized", ErrorCode::MalformedInput, "unknown kind " + kind);
      sigma.kind = kind == "general" ? SectorizationKind::General : SectorizationKind::Unsectorized;
      sigma.per_node.resize(g.node_count());
    }
    require(static_cast<int>(per.size()) == g.node_count(), ErrorCode::SectorizationMismatch,
            "per_node must list every node");
    for (int n = 0; n < g.node_count(); ++n) {
      const auto key = std::to_string(n);
      require(per.contains(key), ErrorCode::SectorizationMismatch, "missing node " + key);
      auto cuts = per.at(key).at("cuts").get<std::vector<int>>();
      const int sectors = per.at(key).contains("sectors") ? per.at(key).at("sectors").get<int>()
                                                          : std::max<int>(1, static_cast<int>(cuts.size()));
      if (sigma.kind == SectorizationKind::EvenHomogeneous) {
        require(cuts == sigma.per_node[n].cuts, ErrorCode::SectorizationMismatch,
                "cuts of node " + key + " disagree with the axes");
        continue;
      }
      sigma.per_node[n].cuts = std::move(cuts);
      sigma.per_node[n].sector_cap = sectors;
    }
    validate_sectorization(g, sigma);
    if (sigma.kind == SectorizationKind::Unsectorized) {
      for (int n = 0; n < g.node_count(); ++n)
        require(sigma.per_node[n].sector_count() <= 1, ErrorCode::SectorizationMismatch,
                "unsectorized nodes have one sector");
    }
    return sigma;
  });
}

inline NetworkSectorization read_sectorization(const std::string& path, const ConnectivityGraph& g) {
  return sectorization_from_json(detail::parse_json(read_text_file(path)), g);
}

inline void write_sectorization(const std::string& path, const NetworkSectorization& sigma) {
  write_text_file(path, sectorization_to_json(sigma).dump(2) + "\n");
}

// ---- flows ----

inline ordered_json flow_to_json(const FlowVector& f, const ConnectivityGraph& g) {
  ordered_json j;
  j["directed"] = ordered_json::object();
  for (int l = 0; l < g.link_count(); ++l)
    j["directed"][std::to_string(g.link_tail(l)) + "->" + std::to_string(g.link_head(l))] = f.link(l);
  return j;
}

namespace detail {

inline std::pair<int, int> parse_pair(const std::string& key, const std::string& sep) {
  const auto pos = key.find(sep);
  require(pos != std::string::npos, ErrorCode::MalformedInput, "bad link key " + key);
  try {
    std::size_t used_a = 0, used_b = 0;
    const auto a_text = key.substr(0, pos);
    const auto b_text = key.substr(pos + sep.size());
    const int a = std::stoi(a_text, &used_a);
    const int b = std::stoi(b_text, &used_b);
    require(used_a == a_text.size() && used_b == b_text.size(), ErrorCode::MalformedInput, "bad link key " + key);
    return {a, b};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::MalformedInput, "bad link key " + key);
  }
}

}  // namespace detail

/// Links or edges not listed carry zero flow.
inline FlowVector flow_from_json(const ordered_json& j, const ConnectivityGraph& g) {
  return detail::guarded([&] {
    const bool directed = j.contains("directed");
    require(directed != j.contains("undirected"), ErrorCode::MalformedInput,
            "flow file needs exactly one of 'directed' or 'undirected'");
    if (directed) {
      std::vector<double> links(g.link_count(), 0.0);
      for (const auto& [key, value] : j.at("directed").items()) {
        const auto [a, b] = detail::parse_pair(key, "->");
        const int l = g.find_link(a, b);
        if (l < 0) throw Error(ErrorCode::UnknownLink, key);
        links[l] = value.get<double>();
      }
      return FlowVector::from_directed(std::move(links));
    }
    std::vector<double> edges(g.edge_count(), 0.0);
    for (const auto& [key, value] : j.at("undirected").items()) {
      const auto [a, b] = detail::parse_pair(key, "-");
      const int e = g.find_edge(a, b);
      if (e < 0) throw Error(ErrorCode::UnknownLink, key);
      edges[e] = value.get<double>();
    }
    return FlowVector::from_undirected(edges);
  });
}

inline FlowVector read_flows(const std::string& path, const ConnectivityGraph& g) {
  return flow_from_json(detail::parse_json(read_text_file(path)), g);
}

inline void write_flows(const std::string& path, const FlowVector& f, const ConnectivityGraph& g) {
  write_text_file(path, flow_to_json(f, g).dump(2) + "\n");
}

// ---- tables ----

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

/// Row builder that formats numbers consistently.
class RowWriter {
 public:
  RowWriter& operator<<(const std::string& s) {
    cells_.push_back(s);
    return *this;
  }
  RowWriter& operator<<(const char* s) { return *this << std::string(s); }
  RowWriter& operator<<(double x) { return *this << detail::format_double(x); }
  RowWriter& operator<<(int x) { return *this << std::to_string(x); }
  RowWriter& operator<<(long x) { return *this << std::to_string(x); }
  RowWriter& operator<<(long long x) { return *this << std::to_string(x); }
  RowWriter& operator<<(bool x) { return *this << std::string(x ? "1" : "0"); }
  std::vector<std::string> take() { return std::move(cells_); }

 private:
  std::vector<std::string> cells_;
};

inline std::string to_csv(const Table& t) {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out.str();
}

/// Plain comma-separated values without quoting; every row must have the
/// header's width.
inline Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(ErrorCode::MalformedCsv, "row width " + std::to_string(cells.size()) + " != header width " +
                                               std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  require(!t.header.empty(), ErrorCode::MalformedCsv, "missing header");
  return t;
}

inline Table trace_table(const SimResult& r) {
  Table t{{"slot", "total_backlog", "mwm_micros", "resectorized_flag"}, {}};
  for (const auto& row : r.trace) {
    RowWriter w;
    w << static_cast<long long>(row.slot) << static_cast<long long>(row.total_backlog) << row.mwm_micros
      << row.resectorized;
    t.rows.push_back(w.take());
  }
  return t;
}

}  // namespace sectornet
