#include "doctest.h"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace zonenet;

namespace {

std::size_t edge(const ZoneNetwork& net, const std::string& id) { return net.flow_edge_index(id); }

// Union-find check that `edges` connect all zones without a cycle.
bool spans_acyclically(const ZoneNetwork& net, const std::vector<std::size_t>& edges) {
  std::vector<std::size_t> parent(net.zone_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto e : edges) {
    const auto a = find(net.flow_edges()[e].from), b = find(net.flow_edges()[e].to);
    if (a == b) return false;
    parent[a] = b;
  }
  return edges.size() + 1 == net.zone_count();
}

}  // namespace

TEST_CASE("benchmark network has the documented shape") {
  const auto cfg = testkit::benchmark_config();
  const auto net = build_network(cfg.network);
  CHECK(net.zone_count() == 9);
  CHECK(net.flow_edges().size() == 13);
  CHECK(net.thermal_edges().size() == 19);
  CHECK(net.interior_zones().size() == 8);
  CHECK(independent_flow_count(net) == 5);
}

TEST_CASE("minimal network: one zone, ambient, one flow edge, one thermal edge") {
  NetworkConfig c;
  c.zones = {{"A", 10.0, ZoneKind::interior}, {"Atm", 0.0, ZoneKind::boundary}};
  c.flow_edges = {{"q", "Atm", "A"}};
  c.thermal_edges = {{"r", "Atm", "A"}};
  const auto net = build_network(c);
  CHECK(net.zone_count() == 2);
  CHECK(net.flow_edges().size() == 1);
}

TEST_CASE("network validation errors") {
  NetworkConfig base;
  base.zones = {{"A", 10.0, ZoneKind::interior}, {"B", 10.0, ZoneKind::interior}, {"Atm", 0.0, ZoneKind::boundary}};
  base.flow_edges = {{"AB", "A", "B"}, {"aA", "Atm", "A"}};
  base.thermal_edges = {{"AB", "A", "B"}, {"aA", "Atm", "A"}};
  CHECK_NOTHROW(build_network(base));

  SUBCASE("flow pair without thermal counterpart") {
    auto c = base;
    c.thermal_edges.pop_back();
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
  SUBCASE("duplicate zone id") {
    auto c = base;
    c.zones.push_back({"A", 5.0, ZoneKind::interior});
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
  SUBCASE("self-loop") {
    auto c = base;
    c.flow_edges.push_back({"AA", "A", "A"});
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
  SUBCASE("disconnected flow graph") {
    auto c = base;
    c.zones.push_back({"C", 5.0, ZoneKind::interior});
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
  SUBCASE("constrained boundary zone") {
    auto c = base;
    c.constrained = {"Atm"};
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
  SUBCASE("second edge on the same pair") {
    auto c = base;
    c.flow_edges.push_back({"BA", "B", "A"});
    CHECK_THROWS_AS(build_network(c), NetworkError);
  }
}

TEST_CASE("two-loop graph with all five nodes constrained: two independent flows") {
  NetworkConfig c;
  for (const char* id : {"n1", "n2", "n3", "n4", "n5"}) c.zones.push_back({id, 1.0, ZoneKind::interior});
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"n1", "n2"}, {"n2", "n3"}, {"n3", "n1"}, {"n3", "n4"}, {"n4", "n5"}, {"n5", "n3"}};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    c.flow_edges.push_back({"e" + std::to_string(k), pairs[k].first, pairs[k].second});
    c.thermal_edges.push_back({"e" + std::to_string(k), pairs[k].first, pairs[k].second});
  }
  c.constrained = {"n1", "n2", "n3", "n4", "n5"};
  const auto net = build_network(c);
  CHECK(independent_flow_count(net) == 2);
  const auto d = tree_cotree_decompose(net, find_cotree(net));
  CHECK(d.cotree_edges.size() == 2);
  CHECK(d.tree_edges.size() == 4);

  // A circulation around the n1-n2-n3 loop and the n3-n4-n5 loop.
  const auto f = solve_dependent_flows(d, net, std::vector<double>{0.3, -0.2});
  CHECK(max_mass_balance_residual(net, f) <= 1e-12);
}

TEST_CASE("benchmark decomposition with the boundary flows as cotree") {
  const auto cfg = testkit::benchmark_config();
  const auto net = build_network(cfg.network);
  const std::vector<std::string> preferred = {"Atm-A", "Atm-B", "Atm-C", "Atm-D", "Atm-E"};
  const auto d = tree_cotree_decompose(net, std::span<const std::string>(preferred));
  REQUIRE(d.cotree_edges.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(d.cotree_edges[k] == edge(net, preferred[k]));

  std::vector<std::size_t> expected_tree;
  for (const char* id : {"A-H1", "B-H1", "C-H2", "D-H2", "H1-E", "H2-F", "H1-H2", "F-Atm"})
    expected_tree.push_back(edge(net, id));
  auto tree = d.tree_edges;
  std::sort(tree.begin(), tree.end());
  std::sort(expected_tree.begin(), expected_tree.end());
  CHECK(tree == expected_tree);
  CHECK(spans_acyclically(net, d.tree_edges));

  SUBCASE("benchmark boundary flows resolve to the hand-eliminated dependents") {
    const auto f = solve_dependent_flows(d, net, std::vector<double>{0.01, 0.01, 0.01, 0.01, -0.01});
    for (const char* id : {"A-H1", "B-H1", "C-H2", "D-H2", "H1-E", "H1-H2"})
      CHECK(f.flow[edge(net, id)] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(f.flow[edge(net, "H2-F")] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(f.flow[edge(net, "F-Atm")] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(max_mass_balance_residual(net, f) <= 1e-12);
    // Cotree entries are passed through untouched.
    CHECK(f.flow[edge(net, "Atm-E")] == -0.01);
  }
  SUBCASE("zero independents give zero flows") {
    const auto f = solve_dependent_flows(d, net, std::vector<double>(5, 0.0));
    for (double q : f.flow) CHECK(q == 0.0);
  }
  SUBCASE("linearity") {
    const std::vector<double> x{0.013, -0.004, 0.02, 0.001, -0.017}, y{-0.003, 0.008, 0.0, 0.011, 0.005};
    std::vector<double> comb(5);
    for (int k = 0; k < 5; ++k) comb[k] = 2.0 * x[k] - 0.5 * y[k];
    const auto fx = solve_dependent_flows(d, net, x), fy = solve_dependent_flows(d, net, y),
               fc = solve_dependent_flows(d, net, comb);
    for (std::size_t e = 0; e < fc.flow.size(); ++e)
      CHECK(fc.flow[e] == doctest::Approx(2.0 * fx.flow[e] - 0.5 * fy.flow[e]).epsilon(1e-14));
  }
  SUBCASE("wrong preferred count is rejected") {
    const std::vector<std::string> four = {"Atm-A", "Atm-B", "Atm-C", "Atm-D"};
    CHECK_THROWS_AS(tree_cotree_decompose(net, std::span<const std::string>(four)), NetworkError);
  }
  SUBCASE("a preferred set leaving a zone without a dependent edge is singular") {
    // Zone A touches only Atm-A and A-H1.
    const std::vector<std::string> bad = {"Atm-A", "A-H1", "Atm-C", "Atm-D", "Atm-E"};
    CHECK_THROWS_AS(tree_cotree_decompose(net, std::span<const std::string>(bad)), NetworkError);
  }
}

TEST_CASE("random connected networks: count identity, mass balance and dense oracle") {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> n_int(2, 17), n_bnd(0, 3), n_extra(0, 8);
    const std::size_t interior = n_int(gen), boundary = n_bnd(gen);
    const auto cfg = testkit::random_network(gen, interior, boundary, n_extra(gen));
    const auto net = build_network(cfg);
    const auto d = tree_cotree_decompose(net, find_cotree(net));

    const std::size_t expected = boundary > 0 ? net.flow_edges().size() - interior
                                              : net.flow_edges().size() - net.zone_count() + 1;
    CHECK(d.cotree_edges.size() == expected);
    CHECK(d.tree_edges.size() + d.cotree_edges.size() == net.flow_edges().size());

    std::uniform_real_distribution<double> q(-0.05, 0.05);
    std::vector<double> indep(d.cotree_edges.size());
    for (auto& v : indep) v = q(gen);
    const auto f = solve_dependent_flows(d, net, indep);
    CHECK(max_mass_balance_residual(net, f) <= 1e-12);
    const auto oracle = testkit::dense_dependent_flows(net, d, indep);
    double worst = 0.0;
    for (std::size_t e = 0; e < oracle.size(); ++e) worst = std::max(worst, std::abs(oracle[e] - f.flow[e]));
    CHECK(worst <= 1e-10);
  }
}
