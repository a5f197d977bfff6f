#include "zonenet/dataset.hpp"

#include <stdexcept>
#include <string>

namespace zonenet {

void Dataset::validate(const ZoneNetwork& network) const {
  const auto zones = static_cast<Eigen::Index>(network.zone_count());
  const auto n = static_cast<Eigen::Index>(times.size());
  auto check = [&](const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != zones || m.cols() != n)
      throw std::invalid_argument(std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()) + ", expected " +
                                  std::to_string(zones) + "x" + std::to_string(n));
  };
  check(co2, "co2");
  check(temp, "temp");
  if (noiseless_co2) check(*noiseless_co2, "noiseless co2");
  if (noiseless_temp) check(*noiseless_temp, "noiseless temp");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("time axis not strictly increasing at sample " + std::to_string(i));
}

BoundarySeries Dataset::boundary(const ZoneNetwork& network, std::size_t first, double origin) const {
  if (first >= times.size()) throw std::out_of_range("boundary slice starts past the data");
  const auto& bz = network.boundary_zones();
  const auto n = static_cast<Eigen::Index>(times.size() - first);
  BoundarySeries b;
  b.times.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = first; i < times.size(); ++i) b.times.push_back(times[i] - origin);
  b.co2.resize(static_cast<Eigen::Index>(bz.size()), n);
  b.temp.resize(static_cast<Eigen::Index>(bz.size()), n);
  for (std::size_t k = 0; k < bz.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(bz[k]);
    b.co2.row(static_cast<Eigen::Index>(k)) = co2.row(row).tail(n);
    b.temp.row(static_cast<Eigen::Index>(k)) = temp.row(row).tail(n);
  }
  return b;
}

Eigen::MatrixXd interior_rows(const ZoneNetwork& network, const Eigen::MatrixXd& m) {
  const auto& iz = network.interior_zones();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(iz.size()), m.cols());
  for (std::size_t s = 0; s < iz.size(); ++s)
    out.row(static_cast<Eigen::Index>(s)) = m.row(static_cast<Eigen::Index>(iz[s]));
  return out;
}

}  // namespace zonenet
