#include "zonenet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

namespace zonenet {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // False when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::pair<std::size_t, std::size_t> unordered(std::size_t a, std::size_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Unconstrained zones collapse into one ground node that absorbs any
// imbalance. With every zone constrained, zone 0 plays that role and its
// (redundant) balance equation is dropped.
struct GroundedGraph {
  std::vector<std::size_t> node_of;  // zone -> merged node
  std::size_t root = 0;
  std::size_t node_count = 0;
};

GroundedGraph ground(const ZoneNetwork& network) {
  GroundedGraph g;
  const std::size_t n = network.zone_count();
  g.node_of.assign(n, 0);
  const bool any_free = network.constrained_count() < n;
  if (!any_free) {
    std::iota(g.node_of.begin(), g.node_of.end(), 0);
    g.root = 0;
    g.node_count = n;
    return g;
  }
  g.root = 0;
  std::size_t next = 1;
  for (std::size_t z = 0; z < n; ++z) g.node_of[z] = network.is_constrained(z) ? next++ : g.root;
  g.node_count = next;
  return g;
}

}  // namespace

ZoneNetwork ZoneNetwork::build(const NetworkConfig& config) {
  ZoneNetwork net;
  if (config.zones.empty()) throw NetworkError("network has no zones");

  for (const auto& spec : config.zones) {
    if (spec.id.empty()) throw NetworkError("zone with empty id");
    if (!net.zone_ids_.emplace(spec.id, net.zones_.size()).second)
      throw NetworkError("duplicate zone id '" + spec.id + "'");
    if (spec.kind == ZoneKind::interior && !(spec.volume > 0.0))
      throw NetworkError("interior zone '" + spec.id + "' needs a positive volume");
    net.zones_.push_back({spec.id, spec.volume, spec.kind});
  }
  const std::size_t n = net.zones_.size();

  auto lookup = [&](const std::string& id, const std::string& what) {
    auto it = net.zone_ids_.find(id);
    if (it == net.zone_ids_.end())
      throw NetworkError(what + " references unknown zone '" + id + "'");
    return it->second;
  };

  std::set<std::pair<std::size_t, std::size_t>> flow_pairs, thermal_pairs;
  for (const auto& spec : config.flow_edges) {
    if (!net.flow_ids_.emplace(spec.id, net.flow_edges_.size()).second)
      throw NetworkError("duplicate flow edge id '" + spec.id + "'");
    const std::string what = "flow edge '" + spec.id + "'";
    FlowEdge e{spec.id, lookup(spec.from, what), lookup(spec.to, what)};
    if (e.from == e.to) throw NetworkError(what + " is a self-loop");
    if (!flow_pairs.insert(unordered(e.from, e.to)).second)
      throw NetworkError(what + " repeats an existing zone pair");
    net.flow_edges_.push_back(std::move(e));
  }
  for (const auto& spec : config.thermal_edges) {
    if (!net.thermal_ids_.emplace(spec.id, net.thermal_edges_.size()).second)
      throw NetworkError("duplicate thermal edge id '" + spec.id + "'");
    const std::string what = "thermal edge '" + spec.id + "'";
    ThermalEdge e{spec.id, lookup(spec.a, what), lookup(spec.b, what)};
    if (e.a == e.b) throw NetworkError(what + " is a self-loop");
    if (!thermal_pairs.insert(unordered(e.a, e.b)).second)
      throw NetworkError(what + " repeats an existing zone pair");
    net.thermal_edges_.push_back(std::move(e));
  }
  for (const auto& e : net.flow_edges_) {
    if (!thermal_pairs.count(unordered(e.from, e.to)))
      throw NetworkError("flow edge '" + e.id + "' has no thermal edge between '" +
                         net.zones_[e.from].id + "' and '" + net.zones_[e.to].id + "'");
  }

  DisjointSets components(n);
  std::size_t joined = 0;
  for (const auto& e : net.flow_edges_) joined += components.unite(e.from, e.to) ? 1 : 0;
  if (joined + 1 != n) throw NetworkError("flow graph is not connected");

  net.constrained_.assign(n, false);
  for (const auto& id : config.constrained) {
    const std::size_t z = lookup(id, "constrained list");
    if (net.zones_[z].kind == ZoneKind::boundary)
      throw NetworkError("boundary zone '" + id + "' cannot be constrained");
    if (net.constrained_[z]) throw NetworkError("zone '" + id + "' listed twice as constrained");
    net.constrained_[z] = true;
  }

  net.interior_slot_.assign(n, npos);
  net.boundary_slot_.assign(n, npos);
  for (std::size_t z = 0; z < n; ++z) {
    if (net.zones_[z].kind == ZoneKind::interior) {
      net.interior_slot_[z] = net.interior_.size();
      net.interior_.push_back(z);
    } else {
      net.boundary_slot_[z] = net.boundary_.size();
      net.boundary_.push_back(z);
    }
  }

  net.flow_adj_.assign(n, {});
  for (std::size_t k = 0; k < net.flow_edges_.size(); ++k) {
    const auto& e = net.flow_edges_[k];
    net.flow_adj_[e.from].push_back({k, e.to, +1.0});
    net.flow_adj_[e.to].push_back({k, e.from, -1.0});
  }
  net.thermal_adj_.assign(n, {});
  for (std::size_t k = 0; k < net.thermal_edges_.size(); ++k) {
    const auto& e = net.thermal_edges_[k];
    net.thermal_adj_[e.a].push_back({k, e.b});
    net.thermal_adj_[e.b].push_back({k, e.a});
  }
  return net;
}

std::size_t ZoneNetwork::zone_index(const std::string& id) const {
  auto it = zone_ids_.find(id);
  if (it == zone_ids_.end()) throw NetworkError("unknown zone '" + id + "'");
  return it->second;
}

std::size_t ZoneNetwork::flow_edge_index(const std::string& id) const {
  auto it = flow_ids_.find(id);
  if (it == flow_ids_.end()) throw NetworkError("unknown flow edge '" + id + "'");
  return it->second;
}

std::size_t ZoneNetwork::thermal_edge_index(const std::string& id) const {
  auto it = thermal_ids_.find(id);
  if (it == thermal_ids_.end()) throw NetworkError("unknown thermal edge '" + id + "'");
  return it->second;
}

std::size_t ZoneNetwork::constrained_count() const {
  return static_cast<std::size_t>(std::count(constrained_.begin(), constrained_.end(), true));
}

std::size_t independent_flow_count(const ZoneNetwork& network) {
  const std::size_t edges = network.flow_edges().size();
  const std::size_t c = network.constrained_count();
  if (c < network.zone_count()) return edges - c;
  return edges - network.zone_count() + 1;
}

TreeCotree tree_cotree_decompose(const ZoneNetwork& network,
                                 std::span<const std::size_t> preferred_independent) {
  const std::size_t m = network.flow_edges().size();
  const std::size_t expected = independent_flow_count(network);
  if (preferred_independent.size() != expected)
    throw NetworkError("expected " + std::to_string(expected) + " independent flow edges, got " +
                       std::to_string(preferred_independent.size()));

  std::vector<bool> independent(m, false);
  for (std::size_t e : preferred_independent) {
    if (e >= m) throw NetworkError("independent edge index out of range");
    if (independent[e]) throw NetworkError("independent edge '" + network.flow_edges()[e].id +
                                           "' listed twice");
    independent[e] = true;
  }

  const GroundedGraph g = ground(network);
  DisjointSets forest(g.node_count);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(g.node_count);  // (edge, node)
  for (std::size_t k = 0; k < m; ++k) {
    if (independent[k]) continue;
    const auto& e = network.flow_edges()[k];
    const std::size_t a = g.node_of[e.from], b = g.node_of[e.to];
    if (a == b || !forest.unite(a, b))
      throw NetworkError("independent edge choice leaves a cycle through edge '" + e.id +
                         "'; dependent flows would be singular");
    adj[a].push_back({k, b});
    adj[b].push_back({k, a});
  }

  // Count matches node_count - 1 and the tree is acyclic, so it spans.
  std::vector<std::size_t> order;
  std::vector<std::size_t> parent_edge(g.node_count, ZoneNetwork::npos);
  std::vector<bool> seen(g.node_count, false);
  std::queue<std::size_t> frontier;
  frontier.push(g.root);
  seen[g.root] = true;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    order.push_back(u);
    for (auto [edge, v] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      parent_edge[v] = edge;
      frontier.push(v);
    }
  }
  if (order.size() != g.node_count)
    throw NetworkError("dependent edges do not span the network; choice is singular");

  // merged node -> zone; only constrained zones are non-root nodes.
  std::vector<std::size_t> zone_of(g.node_count, ZoneNetwork::npos);
  for (std::size_t z = 0; z < network.zone_count(); ++z) zone_of[g.node_of[z]] = z;

  TreeCotree out;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (*it == g.root) continue;
    out.tree_edges.push_back(parent_edge[*it]);
    out.pivot_zones.push_back(zone_of[*it]);
  }
  out.cotree_edges.assign(preferred_independent.begin(), preferred_independent.end());
  return out;
}

TreeCotree tree_cotree_decompose(const ZoneNetwork& network,
                                 std::span<const std::string> preferred_independent) {
  std::vector<std::size_t> idx;
  idx.reserve(preferred_independent.size());
  for (const auto& id : preferred_independent) idx.push_back(network.flow_edge_index(id));
  return tree_cotree_decompose(network, std::span<const std::size_t>(idx));
}

std::vector<std::size_t> find_cotree(const ZoneNetwork& network) {
  const GroundedGraph g = ground(network);
  DisjointSets forest(g.node_count);
  std::vector<std::size_t> cotree;
  // Any spanning tree of the grounded graph works; take edges greedily in
  // declaration order.
  for (std::size_t k = 0; k < network.flow_edges().size(); ++k) {
    const auto& e = network.flow_edges()[k];
    if (!forest.unite(g.node_of[e.from], g.node_of[e.to])) cotree.push_back(k);
  }
  return cotree;
}

FlowAssignment solve_dependent_flows(const TreeCotree& decomp, const ZoneNetwork& network,
                                     std::span<const double> independent_flows) {
  if (independent_flows.size() != decomp.cotree_edges.size())
    throw NetworkError("expected " + std::to_string(decomp.cotree_edges.size()) +
                       " independent flows, got " + std::to_string(independent_flows.size()));
  FlowAssignment out;
  out.flow.assign(network.flow_edges().size(), 0.0);
  for (std::size_t i = 0; i < decomp.cotree_edges.size(); ++i)
    out.flow[decomp.cotree_edges[i]] = independent_flows[i];

  for (std::size_t k = 0; k < decomp.tree_edges.size(); ++k) {
    const std::size_t target = decomp.tree_edges[k];
    double known = 0.0;
    double target_sign = 0.0;
    for (const auto& inc : network.flow_incidence(decomp.pivot_zones[k])) {
      if (inc.edge == target)
        target_sign = inc.sign;
      else
        known += inc.sign * out.flow[inc.edge];
    }
    if (target_sign == 0.0) throw NetworkError("singular dependent-flow system");
    out.flow[target] = -known / target_sign;
  }
  return out;
}

double max_mass_balance_residual(const ZoneNetwork& network, const FlowAssignment& flows) {
  double worst = 0.0;
  for (std::size_t z = 0; z < network.zone_count(); ++z) {
    if (!network.is_constrained(z)) continue;
    double sum = 0.0;
    for (const auto& inc : network.flow_incidence(z)) sum += inc.sign * flows.flow[inc.edge];
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

}  // namespace zonenet
