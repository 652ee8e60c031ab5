#include <gtest/gtest.h>

#include <filesystem>

#include "sectornet/chart.hpp"
#include "sectornet/io.hpp"
#include "test_support.hpp"

using namespace sectornet;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Precondition;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(NetworkJson, RoundTrip) {
  const auto net = random_geometric(25, 0.3, 8);
  const auto back = network_from_json(network_to_json(net));
  EXPECT_EQ(back.graph.edges(), net.graph.edges());
  EXPECT_EQ(back.geometry.range_2r, net.geometry.range_2r);
  for (int i = 0; i < 25; ++i) {
    EXPECT_EQ(back.geometry.positions[i].x, net.geometry.positions[i].x);
    EXPECT_EQ(back.geometry.positions[i].y, net.geometry.positions[i].y);
  }
  const auto dir = std::filesystem::temp_directory_path() / "sectornet_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "net.json").string();
  write_network(path, net);
  EXPECT_EQ(read_network(path).graph.edges(), net.graph.edges());
  std::filesystem::remove_all(dir);
}

TEST(NetworkJson, MalformedInput) {
  EXPECT_EQ(code_of([] { detail::parse_json("{\"nodes\": ["); }), ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] { network_from_json(ordered_json::parse(R"({"nodes": [], "edges": []})")); }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] {
              network_from_json(ordered_json::parse(
                  R"({"nodes": [{"id": 0, "x": 0.1, "y": 0.1}, {"id": 0, "x": 0.2, "y": 0.2}],
                      "range_2R": 0.5, "edges": []})"));
            }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] {
              network_from_json(ordered_json::parse(
                  R"({"nodes": [{"id": 0, "x": 1.5, "y": 0.1}], "range_2R": 0.5, "edges": []})"));
            }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] {
              network_from_json(ordered_json::parse(
                  R"({"nodes": [{"id": 0, "x": 0.1, "y": 0.1}, {"id": 1, "x": 0.2, "y": 0.2}],
                      "range_2R": 0.5, "edges": [[0]]})"));
            }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] { read_text_file("/nonexistent/sectornet.json"); }), ErrorCode::MalformedInput);
}

TEST(SectorizationJson, RoundTripGeneralAndEven) {
  Rng rng(51);
  const auto g = random_geometric(20, 0.35, 2).graph;
  const auto general = oracle::random_sectorization(rng, g, 3);
  const auto back = sectorization_from_json(sectorization_to_json(general), g);
  EXPECT_EQ(back.kind, SectorizationKind::General);
  for (int n = 0; n < g.node_count(); ++n) {
    EXPECT_EQ(back.per_node[n].cuts, general.per_node[n].cuts);
    EXPECT_EQ(back.per_node[n].sector_cap, 3);
  }
  const auto even = even_homogeneous(g, 4, 12.5);
  const auto again = sectorization_from_json(sectorization_to_json(even), g);
  EXPECT_EQ(again.kind, SectorizationKind::EvenHomogeneous);
  EXPECT_EQ(again.even_k, 4);
  for (int n = 0; n < g.node_count(); ++n) EXPECT_EQ(again.per_node[n], even.per_node[n]);
  const auto plain = sectorization_from_json(sectorization_to_json(unsectorized(g)), g);
  EXPECT_EQ(plain.kind, SectorizationKind::Unsectorized);
}

TEST(SectorizationJson, Mismatches) {
  const auto g = grid_network(3, 3, true).graph;
  auto j = sectorization_to_json(even_homogeneous(g, 2, 10.0));
  j["per_node"]["4"]["cuts"] = {0};
  EXPECT_EQ(code_of([&] { sectorization_from_json(j, g); }), ErrorCode::SectorizationMismatch);
  auto missing = sectorization_to_json(unsectorized(g));
  missing["per_node"].erase("3");
  EXPECT_EQ(code_of([&] { sectorization_from_json(missing, g); }), ErrorCode::SectorizationMismatch);
  auto bad_cut = sectorization_to_json(unsectorized(g));
  bad_cut["per_node"]["0"]["cuts"] = {99};
  EXPECT_EQ(code_of([&] { sectorization_from_json(bad_cut, g); }), ErrorCode::SectorizationMismatch);
  auto kind = sectorization_to_json(unsectorized(g));
  kind["kind"] = "spiral";
  EXPECT_EQ(code_of([&] { sectorization_from_json(kind, g); }), ErrorCode::MalformedInput);
}

TEST(FlowJson, DirectedRoundTripAndUndirectedSplit) {
  const auto g = random_geometric(15, 0.4, 6).graph;
  Rng rng(52);
  std::vector<double> links(g.link_count());
  for (auto& x : links) x = rng.uniform();
  const auto f = FlowVector::from_directed(links);
  EXPECT_EQ(flow_from_json(flow_to_json(f, g), g).links(), f.links());

  const auto path = geometric_network({{0.1, 0.5}, {0.3, 0.5}, {0.5, 0.5}}, 0.25).graph;
  const auto u = flow_from_json(ordered_json::parse(R"({"undirected": {"2-1": 0.4}})"), path);
  EXPECT_DOUBLE_EQ(u.edge(path.find_edge(1, 2)), 0.4);
  EXPECT_DOUBLE_EQ(u.link(path.find_link(2, 1)), 0.2);
  EXPECT_DOUBLE_EQ(u.edge(path.find_edge(0, 1)), 0.0);
}

TEST(FlowJson, Errors) {
  const auto g = geometric_network({{0.1, 0.5}, {0.3, 0.5}, {0.5, 0.5}}, 0.25).graph;
  EXPECT_EQ(code_of([&] { flow_from_json(ordered_json::parse(R"({"directed": {"0->2": 0.1}})"), g); }),
            ErrorCode::UnknownLink);
  EXPECT_EQ(code_of([&] { flow_from_json(ordered_json::parse(R"({"undirected": {"0-x": 0.1}})"), g); }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([&] { flow_from_json(ordered_json::parse(R"({"directed": {"0->1": "a"}})"), g); }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([&] {
              flow_from_json(ordered_json::parse(R"({"directed": {}, "undirected": {}})"), g);
            }),
            ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([&] { flow_from_json(ordered_json::parse(R"({"directed": {"0->1": -1}})"), g); }),
            ErrorCode::Precondition);
}

TEST(Csv, RoundTripAndRaggedRows) {
  Table t{{"a", "b"}, {}};
  RowWriter w;
  w << 0.1 << 3;
  t.rows.push_back(w.take());
  t.rows.push_back({"x", ""});
  const auto text = to_csv(t);
  EXPECT_EQ(text, "a,b\n0.1,3\nx,\n");
  const auto back = parse_csv(text);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("b"), 1);
  EXPECT_EQ(back.column("c"), -1);
  EXPECT_EQ(code_of([] { parse_csv("a,b\n1,2,3\n"); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([] { parse_csv(""); }), ErrorCode::MalformedCsv);
}

TEST(Csv, FormatDoubleRoundTrips) {
  Rng rng(53);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<int>(rng.next() % 20) - 10);
    EXPECT_EQ(std::strtod(detail::format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(detail::format_double(0.5), "0.5");
  EXPECT_EQ(detail::format_double(10.0), "10");
  EXPECT_EQ(detail::format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(TraceTable, ColumnsAndRows) {
  const auto g = grid_network(2, 2, true).graph;
  SimConfig cfg;
  cfg.horizon = 50;
  cfg.alpha = ArrivalMatrix::uniform(4, 0.05);
  const auto t = trace_table(run(cfg, g, unsectorized(g)));
  EXPECT_EQ(t.header, (std::vector<std::string>{"slot", "total_backlog", "mwm_micros", "resectorized_flag"}));
  ASSERT_EQ(t.rows.size(), 50u);
  EXPECT_EQ(t.rows[49][0], "49");
  EXPECT_EQ(t.rows[0][3], "0");
}

TEST(Chart, ThreePointSeries) {
  const std::string csv = "k,mean_g_mu,nodes,range,phi\n1,1,20,0.3,5\n2,1.8,20,0.3,5\n4,3.1,20,0.3,5\n";
  const auto svg = chart_from_csv(csv, chart_preset("gain-sweep"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  const auto points_at = svg.find("points=\"");
  ASSERT_NE(points_at, std::string::npos);
  const auto points = svg.substr(points_at + 8, svg.find('"', points_at + 8) - points_at - 8);
  EXPECT_EQ(count(points, ","), 3u);
}

TEST(Chart, OneSeriesPerGroupAndColumn) {
  const std::string csv = "nodes,theta,cdf\n20,10,0.5\n20,20,1\n40,5,0.5\n40,8,1\n60,2,0.5\n60,3,1\n";
  const auto svg = chart_from_csv(csv, chart_preset("theta-cdf"));
  EXPECT_EQ(count(svg, "<polyline"), 3u);
  EXPECT_NE(svg.find("nodes=40"), std::string::npos);
  const std::string timing = "alpha,component_micros,whole_graph_micros\n0.01,5,9\n0.02,6,11\n";
  EXPECT_EQ(count(chart_from_csv(timing, chart_preset("mwm-timing")), "<polyline"), 2u);
}

TEST(Chart, EmptyOrUnplottableInputRejected) {
  EXPECT_EQ(code_of([] { chart_from_csv("slot,total_backlog\n", chart_preset("trace")); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([] { chart_from_csv("slot,total_backlog\n1,inf\n", chart_preset("trace")); }),
            ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([] { chart_from_csv("slot,other\n1,2\n", chart_preset("trace")); }), ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([] { chart_from_csv("slot,total_backlog\n1,abc\n", chart_preset("trace")); }),
            ErrorCode::MalformedCsv);
  EXPECT_EQ(code_of([] { chart_preset("pie"); }), ErrorCode::Precondition);
}

TEST(Chart, EscapesTitles) {
  ChartSpec spec{"a < b & c", "x", {"y"}, {}, "", ""};
  const auto svg = chart_from_csv("x,y\n1,2\n2,3\n", spec);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
}
