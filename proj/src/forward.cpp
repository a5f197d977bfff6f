#include "zonenet/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zonenet {

BoundarySeries BoundarySeries::constant(std::size_t boundary_count, double co2_value,
                                        double temp_value) {
  BoundarySeries s;
  s.times = {0.0};
  s.co2 = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(boundary_count), 1, co2_value);
  s.temp = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(boundary_count), 1, temp_value);
  return s;
}

std::size_t BoundarySeries::sample_at(double t) const {
  if (times.empty()) throw SimulationError("boundary series has no samples");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
}

const Eigen::VectorXd& occupancy_at(const OccupancySchedule& schedule, double t) {
  const auto& bps = schedule.breakpoints;
  if (bps.empty() || t < bps.front().first)
    throw SimulationError("occupancy requested before the first schedule breakpoint");
  auto it = std::upper_bound(bps.begin(), bps.end(), t,
                             [](double v, const auto& bp) { return v < bp.first; });
  return std::prev(it)->second;
}

Eigen::VectorXd co2_rhs(const ZoneNetwork& network, const FlowAssignment& flows,
                        const PhysicalParams& params, const AirKnowns& knowns,
                        const Eigen::VectorXd& state) {
  const auto& interior = network.interior_zones();
  Eigen::VectorXd rate(static_cast<Eigen::Index>(interior.size()));
  for (std::size_t s = 0; s < interior.size(); ++s) {
    const std::size_t i = interior[s];
    double sum = 0.0;
    for (const auto& inc : network.flow_incidence(i)) {
      const double aq = inc.sign * flows.flow[inc.edge];
      sum += macaulay(-aq) * state[static_cast<Eigen::Index>(inc.neighbor)] -
             macaulay(aq) * state[static_cast<Eigen::Index>(i)];
    }
    sum += params.occupancy[static_cast<Eigen::Index>(s)] * knowns.q_exh * knowns.c_exh;
    rate[static_cast<Eigen::Index>(s)] = sum / network.zones()[i].volume;
  }
  return rate;
}

Eigen::VectorXd thermal_rhs(const ZoneNetwork& network, const FlowAssignment& flows,
                            const PhysicalParams& params, const ThermalKnowns& knowns,
                            const Eigen::VectorXd& state) {
  const auto& interior = network.interior_zones();
  Eigen::VectorXd rate(static_cast<Eigen::Index>(interior.size()));
  const double rho_cp = knowns.rho_air * knowns.cp_air;
  for (std::size_t s = 0; s < interior.size(); ++s) {
    const std::size_t i = interior[s];
    const double ti = state[static_cast<Eigen::Index>(i)];
    double conduction = 0.0;
    for (const auto& inc : network.thermal_incidence(i))
      conduction += (state[static_cast<Eigen::Index>(inc.neighbor)] - ti) /
                    params.resistances[static_cast<Eigen::Index>(inc.edge)];
    double convection = 0.0;
    for (const auto& inc : network.flow_incidence(i)) {
      const double aq = inc.sign * flows.flow[inc.edge];
      convection += macaulay(-aq) * state[static_cast<Eigen::Index>(inc.neighbor)] - macaulay(aq) * ti;
    }
    const double source = params.occupancy[static_cast<Eigen::Index>(s)] * knowns.q_ppl;
    rate[static_cast<Eigen::Index>(s)] =
        (conduction + rho_cp * convection + source) / params.capacitances[static_cast<Eigen::Index>(s)];
  }
  return rate;
}

ForwardModel::ForwardModel(const ZoneNetwork& network, const TreeCotree& decomp, Knowns knowns,
                           double substep)
    : network_(network), decomp_(decomp), knowns_(knowns), substep_(substep) {
  if (!(substep > 0.0)) throw SimulationError("substep must be positive");
  const auto& interior = network_.interior_zones();
  links_.resize(interior.size());
  conductors_.resize(interior.size());
  for (std::size_t s = 0; s < interior.size(); ++s) {
    for (const auto& inc : network_.flow_incidence(interior[s]))
      links_[s].push_back({inc.neighbor, inc.edge, inc.sign});
    for (const auto& inc : network_.thermal_incidence(interior[s]))
      conductors_[s].push_back({inc.neighbor, inc.edge});
  }
}

Trajectory ForwardModel::simulate(const PhysicalParams& params, const Eigen::VectorXd& co2_0,
                                  const Eigen::VectorXd& temp_0, const BoundarySeries& boundary,
                                  std::span<const double> times,
                                  const OccupancySchedule* schedule) const {
  const Eigen::VectorXd& q = params.independent_flows;
  const FlowAssignment flows =
      solve_dependent_flows(decomp_, network_, std::span<const double>(q.data(), q.size()));
  return simulate(flows, params, co2_0, temp_0, boundary, times, schedule);
}

namespace {

// Convective coefficients of one interior zone under fixed flows:
// rate contribution = sum_k inflow_k * x[source_k] - outflow * x[i].
struct ZoneTerms {
  std::vector<std::pair<std::size_t, double>> inflow;  // (zone, m^3/s)
  double outflow = 0.0;
  std::vector<std::pair<std::size_t, double>> conductance;  // (zone, W/K)
  double conductance_sum = 0.0;
};

}  // namespace

Trajectory ForwardModel::simulate(const FlowAssignment& flows, const PhysicalParams& params,
                                  const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                                  const BoundarySeries& boundary, std::span<const double> times,
                                  const OccupancySchedule* schedule) const {
  const auto& interior = network_.interior_zones();
  const auto& bzones = network_.boundary_zones();
  const auto n_int = static_cast<Eigen::Index>(interior.size());
  const auto n_all = static_cast<Eigen::Index>(network_.zone_count());

  if (times.empty()) throw SimulationError("empty time grid");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw SimulationError("time grid must be strictly increasing");
  if (co2_0.size() != n_int || temp_0.size() != n_int)
    throw SimulationError("initial state needs one value per interior zone");
  if (params.occupancy.size() != n_int || params.capacitances.size() != n_int ||
      params.resistances.size() != static_cast<Eigen::Index>(network_.thermal_edges().size()))
    throw SimulationError("parameter block sizes do not match the network");
  if (!bzones.empty() && (boundary.co2.rows() != static_cast<Eigen::Index>(bzones.size()) ||
                          boundary.temp.rows() != static_cast<Eigen::Index>(bzones.size()) ||
                          boundary.co2.cols() != static_cast<Eigen::Index>(boundary.times.size()) ||
                          boundary.temp.cols() != static_cast<Eigen::Index>(boundary.times.size())))
    throw SimulationError("boundary series does not match the boundary zones");

  std::vector<ZoneTerms> terms(interior.size());
  for (std::size_t s = 0; s < interior.size(); ++s) {
    for (const auto& link : links_[s]) {
      const double aq = link.sign * flows.flow[link.edge];
      if (aq < 0.0) terms[s].inflow.push_back({link.neighbor, macaulay(-aq)});
      terms[s].outflow += macaulay(aq);
    }
    for (const auto& c : conductors_[s]) {
      const double g = 1.0 / params.resistances[static_cast<Eigen::Index>(c.edge)];
      terms[s].conductance.push_back({c.neighbor, g});
      terms[s].conductance_sum += g;
    }
  }

  const double rho_cp = knowns_.thermal.rho_air * knowns_.thermal.cp_air;
  const double co2_source = knowns_.air.q_exh * knowns_.air.c_exh;
  Eigen::VectorXd inv_volume(n_int);
  for (Eigen::Index s = 0; s < n_int; ++s)
    inv_volume[s] = 1.0 / network_.zones()[interior[static_cast<std::size_t>(s)]].volume;
  const Eigen::VectorXd inv_cap = params.capacitances.cwiseInverse();

  // Full-zone scratch states; boundary entries are refreshed per substep.
  Eigen::VectorXd c_full = Eigen::VectorXd::Zero(n_all);
  Eigen::VectorXd t_full = Eigen::VectorXd::Zero(n_all);
  auto set_boundary = [&](double t) {
    if (bzones.empty()) return;
    const auto col = static_cast<Eigen::Index>(boundary.sample_at(t));
    for (std::size_t b = 0; b < bzones.size(); ++b) {
      c_full[static_cast<Eigen::Index>(bzones[b])] = boundary.co2(static_cast<Eigen::Index>(b), col);
      t_full[static_cast<Eigen::Index>(bzones[b])] = boundary.temp(static_cast<Eigen::Index>(b), col);
    }
  };

  const Eigen::VectorXd* occupancy = &params.occupancy;
  auto derivative = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& temp, Eigen::VectorXd& dc,
                        Eigen::VectorXd& dt) {
    for (Eigen::Index s = 0; s < n_int; ++s) {
      const auto z = static_cast<Eigen::Index>(interior[static_cast<std::size_t>(s)]);
      c_full[z] = c[s];
      t_full[z] = temp[s];
    }
    for (Eigen::Index s = 0; s < n_int; ++s) {
      const ZoneTerms& zt = terms[static_cast<std::size_t>(s)];
      double c_in = 0.0, t_in = 0.0;
      for (const auto& [src, rate] : zt.inflow) {
        c_in += rate * c_full[static_cast<Eigen::Index>(src)];
        t_in += rate * t_full[static_cast<Eigen::Index>(src)];
      }
      double cond = 0.0;
      for (const auto& [nb, g] : zt.conductance) cond += g * t_full[static_cast<Eigen::Index>(nb)];
      const double n_ppl = (*occupancy)[s];
      dc[s] = (c_in - zt.outflow * c[s] + n_ppl * co2_source) * inv_volume[s];
      dt[s] = (cond - zt.conductance_sum * temp[s] + rho_cp * (t_in - zt.outflow * temp[s]) +
               n_ppl * knowns_.thermal.q_ppl) *
              inv_cap[s];
    }
  };

  Trajectory out;
  out.times.assign(times.begin(), times.end());
  out.co2.resize(n_all, static_cast<Eigen::Index>(times.size()));
  out.temp.resize(n_all, static_cast<Eigen::Index>(times.size()));

  Eigen::VectorXd c = co2_0, temp = temp_0;
  Eigen::VectorXd k1c(n_int), k2c(n_int), k3c(n_int), k4c(n_int);
  Eigen::VectorXd k1t(n_int), k2t(n_int), k3t(n_int), k4t(n_int);
  Eigen::VectorXd cs(n_int), ts(n_int);

  auto record = [&](std::size_t col) {
    set_boundary(times[col]);
    for (Eigen::Index s = 0; s < n_int; ++s) {
      const auto z = static_cast<Eigen::Index>(interior[static_cast<std::size_t>(s)]);
      c_full[z] = c[s];
      t_full[z] = temp[s];
    }
    out.co2.col(static_cast<Eigen::Index>(col)) = c_full;
    out.temp.col(static_cast<Eigen::Index>(col)) = t_full;
  };
  record(0);

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double span = times[k] - times[k - 1];
    auto steps = static_cast<long>(std::llround(span / substep_));
    if (steps < 1 || std::abs(static_cast<double>(steps) * substep_ - span) > 1e-9 * span)
      steps = std::max(1L, static_cast<long>(std::ceil(span / substep_ - 1e-12)));
    const double h = span / static_cast<double>(steps);
    for (long j = 0; j < steps; ++j) {
      const double t0 = times[k - 1] + static_cast<double>(j) * h;
      set_boundary(t0);
      if (schedule) occupancy = &occupancy_at(*schedule, t0);
      derivative(c, temp, k1c, k1t);
      cs = c + 0.5 * h * k1c;
      ts = temp + 0.5 * h * k1t;
      derivative(cs, ts, k2c, k2t);
      cs = c + 0.5 * h * k2c;
      ts = temp + 0.5 * h * k2t;
      derivative(cs, ts, k3c, k3t);
      cs = c + h * k3c;
      ts = temp + h * k3t;
      derivative(cs, ts, k4c, k4t);
      c += (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
      temp += (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    }
    record(k);
  }
  return out;
}

Trajectory integrate(const ZoneNetwork& network, const TreeCotree& decomp, const Knowns& knowns,
                     const PhysicalParams& params, const Eigen::VectorXd& co2_0,
                     const Eigen::VectorXd& temp_0, const BoundarySeries& boundary,
                     std::span<const double> times, double substep,
                     const OccupancySchedule* schedule) {
  if (!(substep > 0.0)) throw SimulationError("substep must be positive");
  return ForwardModel(network, decomp, knowns, substep)
      .simulate(params, co2_0, temp_0, boundary, times, schedule);
}

Eigen::MatrixXd forward_co2(const ZoneNetwork& network, const TreeCotree& decomp,
                            const Knowns& knowns, const PhysicalParams& params,
                            const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                            const BoundarySeries& boundary, std::span<const double> times,
                            double substep) {
  return integrate(network, decomp, knowns, params, co2_0, temp_0, boundary, times, substep).co2;
}

Eigen::MatrixXd forward_thermal(const ZoneNetwork& network, const TreeCotree& decomp,
                                const Knowns& knowns, const PhysicalParams& params,
                                const Eigen::VectorXd& co2_0, const Eigen::VectorXd& temp_0,
                                const BoundarySeries& boundary, std::span<const double> times,
                                double substep) {
  return integrate(network, decomp, knowns, params, co2_0, temp_0, boundary, times, substep).temp;
}

}  // namespace zonenet
