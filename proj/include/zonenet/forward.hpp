#pragma once

#include <Eigen/Core>

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "zonenet/network.hpp"

namespace zonenet {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AirKnowns {
  double q_exh = 1.0e-5;   // m^3/s exhaled per person
  double c_exh = 50000.0;  // ppm in exhaled air
};

struct ThermalKnowns {
  double cp_air = 1000.0;  // J/(kg K)
  double rho_air = 1.2;    // kg/m^3
  double q_ppl = 100.0;    // W sensible heat per person
};

struct Knowns {
  AirKnowns air;
  ThermalKnowns thermal;
};

// Prescribed states of the boundary zones, one row per boundary zone in
// ZoneNetwork::boundary_zones() order. Piecewise constant: the value at t is
// the last sample with time <= t; before the first sample the first value
// holds, after the last sample the last value holds.
struct BoundarySeries {
  std::vector<double> times;
  Eigen::MatrixXd co2;
  Eigen::MatrixXd temp;

  static BoundarySeries constant(std::size_t boundary_count, double co2_value, double temp_value);
  std::size_t sample_at(double t) const;
  double end_time() const { return times.empty() ? 0.0 : times.back(); }
};

// Occupancy per interior zone, piecewise constant and right-continuous from
// each breakpoint.
struct OccupancySchedule {
  std::vector<std::pair<double, Eigen::VectorXd>> breakpoints;
};

// Throws SimulationError when t precedes the first breakpoint.
const Eigen::VectorXd& occupancy_at(const OccupancySchedule& schedule, double t);

struct PhysicalParams {
  Eigen::VectorXd occupancy;          // persons per interior zone
  Eigen::VectorXd independent_flows;  // m^3/s per cotree edge
  Eigen::VectorXd resistances;        // K/W per thermal edge
  Eigen::VectorXd capacitances;       // J/K per interior zone
};

// Rows are all zones (boundary rows carry the prescribed series), columns
// are the sample times.
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd co2;
  Eigen::MatrixXd temp;
};

inline double macaulay(double x) { return x >= 0.0 ? x : 0.0; }

// dc/dt per interior zone (ppm/s). `state` holds every zone, boundary values
// included.
Eigen::VectorXd co2_rhs(const ZoneNetwork& network, const FlowAssignment& flows,
                        const PhysicalParams& params, const AirKnowns& knowns,
                        const Eigen::VectorXd& state);

// dT/dt per interior zone (K/s).
Eigen::VectorXd thermal_rhs(const ZoneNetwork& network, const FlowAssignment& flows,
                            const PhysicalParams& params, const ThermalKnowns& knowns,
                            const Eigen::VectorXd& state);

// Fixed-step RK4 integration of both fields. Flows are resolved once from
// params.independent_flows through the decomposition; CO2 and temperature
// are advanced as one state vector.
class ForwardModel {
 public:
  ForwardModel(const ZoneNetwork& network, const TreeCotree& decomp, Knowns knowns,
               double substep);

  const ZoneNetwork& network() const { return network_; }
  const TreeCotree& decomposition() const { return decomp_; }
  const Knowns& knowns() const { return knowns_; }
  double substep() const { return substep_; }

  // Initial vectors are per interior zone. When `schedule` is given it
  // overrides params.occupancy at each substep.
  Trajectory simulate(const PhysicalParams& params, const Eigen::VectorXd& co2_0,
                      const Eigen::VectorXd& temp_0, const BoundarySeries& boundary,
                      std::span<const double> times,
                      const OccupancySchedule* schedule = nullptr) const;

  // Same integration with the flows already resolved.
  Trajectory simulate(const FlowAssignment& flows, const PhysicalParams& params,
                      const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                      const BoundarySeries& boundary, std::span<const double> times,
                      const OccupancySchedule* schedule = nullptr) const;

 private:
  struct Link {
    std::size_t neighbor;
    std::size_t edge;
    double sign;
  };
  struct Conductor {
    std::size_t neighbor;
    std::size_t edge;
  };

  ZoneNetwork network_;
  TreeCotree decomp_;
  Knowns knowns_;
  double substep_;
  std::vector<std::vector<Link>> links_;            // per interior slot
  std::vector<std::vector<Conductor>> conductors_;  // per interior slot
};

Trajectory integrate(const ZoneNetwork& network, const TreeCotree& decomp, const Knowns& knowns,
                     const PhysicalParams& params, const Eigen::VectorXd& co2_0,
                     const Eigen::VectorXd& temp_0, const BoundarySeries& boundary,
                     std::span<const double> times, double substep,
                     const OccupancySchedule* schedule = nullptr);

// Forward maps for each field. Both integrate the coupled system since the
// thermal field shares flows and occupancy with CO2; each returns only its
// own field.
Eigen::MatrixXd forward_co2(const ZoneNetwork& network, const TreeCotree& decomp,
                            const Knowns& knowns, const PhysicalParams& params,
                            const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                            const BoundarySeries& boundary, std::span<const double> times,
                            double substep);
Eigen::MatrixXd forward_thermal(const ZoneNetwork& network, const TreeCotree& decomp,
                                const Knowns& knowns, const PhysicalParams& params,
                                const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                                const BoundarySeries& boundary, std::span<const double> times,
                                double substep);

}  // namespace zonenet
