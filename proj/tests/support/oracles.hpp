#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"

namespace testkit {

// Largest relative deviation of the integrator from the matrix exponential
// of a hand-assembled affine system on three_zone() with frozen flows.
inline double three_zone_expm_error() {
  const auto cfg = three_zone();
  const auto net = build_network(cfg);
  const auto d = tree_cotree_decompose(net, std::span<const std::string>(cfg.preferred_independent));
  const Knowns k;
  const double q1 = 0.012, q2 = 0.007;
  PhysicalParams p;
  p.occupancy = Eigen::Vector3d(1.0, 0.0, 2.5);
  p.independent_flows = Eigen::Vector2d(q1, q2);
  // Thermal edge order: aX, aY, XY, YZ, Za, XZ.
  p.resistances.resize(6);
  p.resistances << 2.0, 3.0, 1.5, 1.2, 2.5, 4.0;
  p.capacitances = Eigen::Vector3d(20000.0, 40000.0, 15000.0);
  const double ca = 410.0, ta = 18.0;
  const Eigen::Vector3d c0(500.0, 420.0, 450.0), t0(22.0, 19.0, 25.0);

  // Hand-assembled affine system x' = M x + b with x = (cX, cY, cZ, TX, TY, TZ).
  const double vx = 20.0, vy = 35.0, vz = 15.0, g = k.air.q_exh * k.air.c_exh;
  const double rc = k.thermal.rho_air * k.thermal.cp_air, qp = k.thermal.q_ppl;
  const auto& R = p.resistances;
  const auto& C = p.capacitances;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
  M(0, 0) = -q1 / vx;
  b[0] = (q1 * ca + p.occupancy[0] * g) / vx;
  M(1, 0) = q1 / vy;
  M(1, 1) = -(q1 + q2) / vy;
  b[1] = (q2 * ca + p.occupancy[1] * g) / vy;
  M(2, 1) = (q1 + q2) / vz;
  M(2, 2) = -(q1 + q2) / vz;
  b[2] = p.occupancy[2] * g / vz;
  // X: conduction to Atm (aX), Y (XY), Z (XZ); inflow q1 from Atm.
  M(3, 3) = (-1.0 / R[0] - 1.0 / R[2] - 1.0 / R[5] - rc * q1) / C[0];
  M(3, 4) = (1.0 / R[2]) / C[0];
  M(3, 5) = (1.0 / R[5]) / C[0];
  b[3] = (ta / R[0] + rc * q1 * ta + p.occupancy[0] * qp) / C[0];
  // Y: Atm (aY), X (XY), Z (YZ); inflow q1 from X and q2 from Atm.
  M(4, 3) = (1.0 / R[2] + rc * q1) / C[1];
  M(4, 4) = (-1.0 / R[1] - 1.0 / R[2] - 1.0 / R[3] - rc * (q1 + q2)) / C[1];
  M(4, 5) = (1.0 / R[3]) / C[1];
  b[4] = (ta / R[1] + rc * q2 * ta + p.occupancy[1] * qp) / C[1];
  // Z: Y (YZ), Atm (Za), X (XZ); inflow q1+q2 from Y.
  M(5, 3) = (1.0 / R[5]) / C[2];
  M(5, 4) = (1.0 / R[3] + rc * (q1 + q2)) / C[2];
  M(5, 5) = (-1.0 / R[3] - 1.0 / R[4] - 1.0 / R[5] - rc * (q1 + q2)) / C[2];
  b[5] = (ta / R[4] + p.occupancy[2] * qp) / C[2];

  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(7, 7);
  aug.topLeftCorner(6, 6) = M;
  aug.topRightCorner(6, 1) = b;
  Eigen::VectorXd x0(7);
  x0 << c0, t0, 1.0;

  const auto times = time_grid(7200.0, 300.0);
  const ForwardModel model(net, d, k, 10.0);
  const auto tr = model.simulate(p, c0, t0, BoundarySeries::constant(1, ca, ta), times);

  double worst = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Eigen::MatrixXd e = (aug * times[j]).exp();
    const Eigen::VectorXd x = e * x0;
    for (int z = 0; z < 3; ++z) {
      worst = std::max(worst, std::abs(tr.co2(z, static_cast<Eigen::Index>(j)) - x[z]) / std::abs(x[z]));
      worst = std::max(worst, std::abs(tr.temp(z, static_cast<Eigen::Index>(j)) - x[3 + z]) / std::abs(x[3 + z]));
    }
  }
  return worst;
}

struct SteadyErrors {
  double co2_rel = 0.0, temp_rel = 0.0;
  double co2_ss = 0.0, temp_ss = 0.0;
};

// Long integration of flushed_zone(30) against the closed-form steady states.
inline SteadyErrors flushed_steady_errors(double n, double q, double r, double cap) {
  const auto cfg = flushed_zone(30.0);
  const auto net = build_network(cfg);
  const auto d = tree_cotree_decompose(net, std::span<const std::string>(cfg.preferred_independent));
  const Knowns k;
  PhysicalParams p;
  p.occupancy = Eigen::VectorXd::Constant(1, n);
  p.independent_flows = Eigen::VectorXd::Constant(1, q);
  p.resistances = Eigen::VectorXd::Constant(2, 2.0 * r);
  p.capacitances = Eigen::VectorXd::Constant(1, cap);
  const ForwardModel model(net, d, k, 10.0);
  const auto tr = model.simulate(p, Eigen::VectorXd::Constant(1, 400.0), Eigen::VectorXd::Constant(1, 20.0),
                                 BoundarySeries::constant(2, 400.0, 20.0), time_grid(60000.0, 600.0));
  SteadyErrors e;
  e.co2_ss = 400.0 + n * k.air.q_exh * k.air.c_exh / q;
  e.temp_ss = 20.0 + n * k.thermal.q_ppl / (1.0 / r + k.thermal.rho_air * k.thermal.cp_air * q);
  e.co2_rel = std::abs(tr.co2(0, tr.co2.cols() - 1) - e.co2_ss) / e.co2_ss;
  e.temp_rel = std::abs(tr.temp(0, tr.temp.cols() - 1) - e.temp_ss) / e.temp_ss;
  return e;
}

}  // namespace testkit
