#include "zonenet/calibration.hpp"

#include <stdexcept>
#include <string>

namespace zonenet {

namespace {

std::vector<Eigen::Index> samples_in(const std::vector<double>& times, double t0, double t1) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= t0 && times[i] <= t1) idx.push_back(static_cast<Eigen::Index>(i));
  return idx;
}

Eigen::VectorXd offsets(const Eigen::MatrixXd& field, const std::vector<Eigen::Index>& idx,
                        const std::vector<bool>& use) {
  const Eigen::Index zones = field.rows();
  Eigen::VectorXd means = Eigen::VectorXd::Zero(zones);
  for (Eigen::Index z = 0; z < zones; ++z) {
    double s = 0.0;
    for (const auto i : idx) s += field(z, i);
    means[z] = s / static_cast<double>(idx.size());
  }
  double grand = 0.0;
  std::size_t count = 0;
  for (Eigen::Index z = 0; z < zones; ++z)
    if (use[static_cast<std::size_t>(z)]) grand += means[z], ++count;
  grand /= static_cast<double>(count);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(zones);
  for (Eigen::Index z = 0; z < zones; ++z)
    if (use[static_cast<std::size_t>(z)]) off[z] = means[z] - grand;
  return off;
}

}  // namespace

CalibrationResult offset_calibrate(const RawSensorTable& table, double t0, double t1,
                                   const std::vector<bool>& participating) {
  const auto zones = table.zones.size();
  std::vector<bool> use = participating.empty() ? std::vector<bool>(zones, true) : participating;
  if (use.size() != zones) throw std::invalid_argument("one participation flag per zone is required");
  bool any = false;
  for (const bool u : use) any = any || u;
  if (!any) throw std::invalid_argument("no zone takes part in the calibration");
  if (!(t1 >= t0)) throw std::invalid_argument("calibration baseline is reversed");

  const auto idx = samples_in(table.times, t0, t1);
  if (idx.size() < 2)
    throw std::invalid_argument("calibration baseline [" + std::to_string(t0) + ", " + std::to_string(t1) +
                                "] s holds " + std::to_string(idx.size()) + " samples; need at least 2");

  CalibrationResult r;
  r.co2_offsets = offsets(table.co2, idx, use);
  r.temp_offsets = offsets(table.temp, idx, use);
  r.table = table;
  r.table.co2.colwise() -= r.co2_offsets;
  r.table.temp.colwise() -= r.temp_offsets;
  return r;
}

RawSensorTable extract_interval(const RawSensorTable& table, double t0, double t1, bool rebase) {
  const auto idx = samples_in(table.times, t0, t1);
  if (idx.empty()) throw std::invalid_argument("extraction interval holds no samples");
  // samples_in yields a contiguous run on a strictly increasing axis.
  const Eigen::Index first = idx.front();
  const auto n = static_cast<Eigen::Index>(idx.size());
  RawSensorTable out;
  out.zones = table.zones;
  out.co2 = table.co2.middleCols(first, n);
  out.temp = table.temp.middleCols(first, n);
  const double origin = rebase ? table.times[static_cast<std::size_t>(first)] : 0.0;
  for (const auto i : idx) out.times.push_back(table.times[static_cast<std::size_t>(i)] - origin);
  return out;
}

}  // namespace zonenet
