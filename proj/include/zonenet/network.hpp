#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace zonenet {

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ZoneKind { interior, boundary };

// A well-mixed zone. Boundary zones have a prescribed state and no capacitance.
struct Zone {
  std::string id;
  double volume = 0.0;  // m^3
  ZoneKind kind = ZoneKind::interior;
};

// Oriented airflow path. A positive flow value runs from -> to.
struct FlowEdge {
  std::string id;
  std::size_t from = 0;
  std::size_t to = 0;
};

// Undirected conduction path.
struct ThermalEdge {
  std::string id;
  std::size_t a = 0;
  std::size_t b = 0;
};

// Structured description as it appears in a network config file.
struct NetworkConfig {
  struct ZoneSpec {
    std::string id;
    double volume = 0.0;
    ZoneKind kind = ZoneKind::interior;
  };
  struct FlowEdgeSpec {
    std::string id, from, to;
  };
  struct ThermalEdgeSpec {
    std::string id, a, b;
  };

  std::vector<ZoneSpec> zones;
  std::vector<FlowEdgeSpec> flow_edges;
  std::vector<ThermalEdgeSpec> thermal_edges;
  std::vector<std::string> constrained;
  std::vector<std::string> preferred_independent;
};

// Incidence of a flow edge seen from one zone. sign is +1 when the edge
// leaves the zone, -1 when it enters.
struct FlowIncidence {
  std::size_t edge;
  std::size_t neighbor;
  double sign;
};

struct ThermalIncidence {
  std::size_t edge;
  std::size_t neighbor;
};

class ZoneNetwork {
 public:
  // Validates the description; throws NetworkError on duplicate ids,
  // unknown references, self-loops, repeated zone pairs, flow pairs without a
  // thermal counterpart, a disconnected flow graph, non-positive interior
  // volumes and constrained boundary zones.
  static ZoneNetwork build(const NetworkConfig& config);

  const std::vector<Zone>& zones() const { return zones_; }
  const std::vector<FlowEdge>& flow_edges() const { return flow_edges_; }
  const std::vector<ThermalEdge>& thermal_edges() const { return thermal_edges_; }

  std::size_t zone_count() const { return zones_.size(); }
  std::size_t zone_index(const std::string& id) const;
  std::size_t flow_edge_index(const std::string& id) const;
  std::size_t thermal_edge_index(const std::string& id) const;

  bool is_boundary(std::size_t zone) const { return zones_[zone].kind == ZoneKind::boundary; }
  bool is_constrained(std::size_t zone) const { return constrained_[zone]; }
  std::size_t constrained_count() const;

  // Interior zones in declaration order; "per interior zone" vectors use this order.
  const std::vector<std::size_t>& interior_zones() const { return interior_; }
  const std::vector<std::size_t>& boundary_zones() const { return boundary_; }
  // Position of a zone in interior_zones() / boundary_zones(), or npos.
  std::size_t interior_slot(std::size_t zone) const { return interior_slot_[zone]; }
  std::size_t boundary_slot(std::size_t zone) const { return boundary_slot_[zone]; }

  std::span<const FlowIncidence> flow_incidence(std::size_t zone) const { return flow_adj_[zone]; }
  std::span<const ThermalIncidence> thermal_incidence(std::size_t zone) const {
    return thermal_adj_[zone];
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Zone> zones_;
  std::vector<FlowEdge> flow_edges_;
  std::vector<ThermalEdge> thermal_edges_;
  std::vector<bool> constrained_;
  std::vector<std::size_t> interior_, boundary_;
  std::vector<std::size_t> interior_slot_, boundary_slot_;
  std::vector<std::vector<FlowIncidence>> flow_adj_;
  std::vector<std::vector<ThermalIncidence>> thermal_adj_;
  std::unordered_map<std::string, std::size_t> zone_ids_, flow_ids_, thermal_ids_;
};

inline ZoneNetwork build_network(const NetworkConfig& config) { return ZoneNetwork::build(config); }

// Split of the flow edges into dependent (tree) and independent (cotree) edges.
// tree_edges is in elimination order: tree_edges[k] is fixed by the mass
// balance of pivot_zones[k] once every earlier entry is known.
struct TreeCotree {
  std::vector<std::size_t> tree_edges;
  std::vector<std::size_t> cotree_edges;
  std::vector<std::size_t> pivot_zones;
};

// Number of independent flows implied by the network's constraint set.
std::size_t independent_flow_count(const ZoneNetwork& network);

TreeCotree tree_cotree_decompose(const ZoneNetwork& network,
                                 std::span<const std::size_t> preferred_independent);
TreeCotree tree_cotree_decompose(const ZoneNetwork& network,
                                 std::span<const std::string> preferred_independent);

// Some valid cotree, found by a breadth-first spanning tree. Used when a
// config does not name its independent edges.
std::vector<std::size_t> find_cotree(const ZoneNetwork& network);

// Signed flow per flow edge, m^3/s, positive along the edge orientation.
struct FlowAssignment {
  std::vector<double> flow;
};

FlowAssignment solve_dependent_flows(const TreeCotree& decomp, const ZoneNetwork& network,
                                     std::span<const double> independent_flows);

// Largest |sum_j a_ij q_ij| over constrained zones.
double max_mass_balance_residual(const ZoneNetwork& network, const FlowAssignment& flows);

}  // namespace zonenet
