#include "zonenet/export.hpp"

#include <fstream>

#include "json.hpp"
#include "zonenet/csv.hpp"

namespace zonenet {

using nlohmann::json;

namespace {

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }

}  // namespace

void write_windows_csv(const std::filesystem::path& path, const std::vector<WindowResult>& results,
                       const Setup& setup) {
  const auto names = coordinate_names(setup.network, setup.decomp);
  std::vector<std::string> header{"window",   "start_index", "start_time",     "end_time",
                                  "acceptance", "failed",    "reinitialized", "log_post_at_mean"};
  for (const auto& n : names) header.push_back(n);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    std::vector<std::string> row{fmt(k),
                                 fmt(r.plan.start_index),
                                 fmt(r.start_time),
                                 fmt(r.end_time),
                                 fmt(r.acceptance_rate),
                                 r.failed ? "1" : "0",
                                 r.reinitialized ? "1" : "0",
                                 fmt(r.log_post_at_mean)};
    for (std::size_t i = 0; i < names.size(); ++i)
      row.push_back(r.failed ? "nan" : fmt(r.posterior_mean[static_cast<Eigen::Index>(i)]));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_tracks_csv(const std::filesystem::path& path, const std::vector<WindowResult>& results,
                      const Setup& setup) {
  const auto names = coordinate_names(setup.network, setup.decomp);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    if (r.failed) continue;
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      rows.push_back({fmt(k), fmt(r.start_time), block_name(setup.layout.block_of(j)), names[i],
                      fmt(r.posterior_mean[j]), fmt(r.lower_q[j]), fmt(r.upper_q[j])});
    }
  }
  write_csv(path, {"window", "start_time", "block", "coordinate", "mean", "q025", "q975"}, rows);
}

void write_predictive_csv(const std::filesystem::path& path, const WindowResult& result,
                          const ZoneNetwork& network) {
  const auto& p = result.predictive;
  std::vector<std::string> header{"time"};
  for (const char* field : {"co2", "temp"})
    for (const auto& z : network.zones())
      for (const char* stat : {"mean", "lower", "upper"})
        header.push_back(std::string(field) + "_" + stat + "_" + z.id);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t t = 0; t < p.times.size(); ++t) {
    const auto c = static_cast<Eigen::Index>(t);
    std::vector<std::string> row{fmt(result.start_time + p.times[t])};
    for (const auto* m : {&p.co2_mean, &p.temp_mean}) {
      const bool co2 = m == &p.co2_mean;
      const Eigen::MatrixXd& lo = co2 ? p.co2_lower : p.temp_lower;
      const Eigen::MatrixXd& hi = co2 ? p.co2_upper : p.temp_upper;
      for (Eigen::Index z = 0; z < m->rows(); ++z) {
        row.push_back(fmt((*m)(z, c)));
        row.push_back(fmt(lo(z, c)));
        row.push_back(fmt(hi(z, c)));
      }
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void save_results(const std::filesystem::path& path, const std::vector<WindowResult>& results) {
  json j;
  j["schema_version"] = 1;
  j["windows"] = json::array();
  for (const auto& r : results) {
    json w{{"start_index", r.plan.start_index},
           {"window_size", r.plan.window_size},
           {"step", r.plan.step},
           {"forecast_horizon", r.plan.forecast_horizon},
           {"start_time", r.start_time},
           {"end_time", r.end_time},
           {"acceptance", r.acceptance_rate},
           {"failed", r.failed}};
    w["posterior_mean"] = std::vector<double>(r.posterior_mean.data(), r.posterior_mean.data() + r.posterior_mean.size());
    j["windows"].push_back(w);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string(), 0, "", "cannot open file for writing");
  out << j.dump(1) << '\n';
}

std::vector<WindowResult> load_results(const std::filesystem::path& path, Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "", "cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string(), 0, "", std::string("not valid JSON: ") + e.what());
  }
  std::vector<WindowResult> out;
  try {
    for (const auto& w : j.at("windows")) {
      WindowResult r;
      r.plan.start_index = w.at("start_index").get<std::size_t>();
      r.plan.window_size = w.at("window_size").get<std::size_t>();
      r.plan.step = w.at("step").get<std::size_t>();
      r.plan.forecast_horizon = w.at("forecast_horizon").get<std::size_t>();
      r.start_time = w.at("start_time").get<double>();
      r.end_time = w.at("end_time").get<double>();
      r.acceptance_rate = w.at("acceptance").get<double>();
      r.failed = w.at("failed").get<bool>();
      const auto mean = w.at("posterior_mean").get<std::vector<double>>();
      if (!r.failed && static_cast<Eigen::Index>(mean.size()) != dim)
        throw DataError(path.string(), 0, "posterior_mean",
                        "has " + std::to_string(mean.size()) + " entries, expected " + std::to_string(dim));
      r.posterior_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string(), 0, "", std::string("malformed results: ") + e.what());
  }
  return out;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& cells) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : cells) {
    rows.push_back({fmt(c.window_size), fmt(c.sigma_co2), fmt(c.sigma_temp), "co2", fmt(c.nrmse_co2)});
    rows.push_back({fmt(c.window_size), fmt(c.sigma_co2), fmt(c.sigma_temp), "temp", fmt(c.nrmse_temp)});
  }
  write_csv(path, {"window_size", "sigma_co2", "sigma_temp", "field", "nrmse"}, rows);
}

void write_forecast_csv(const std::filesystem::path& path, const std::vector<ForecastRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    const std::string trunc = r.truncated ? "1" : "0";
    out.push_back({fmt(r.window_index), fmt(r.window_end_time), "co2", fmt(r.nrmse_co2), fmt(r.horizon_used), trunc});
    out.push_back({fmt(r.window_index), fmt(r.window_end_time), "temp", fmt(r.nrmse_temp), fmt(r.horizon_used), trunc});
  }
  write_csv(path, {"window", "window_end_time", "field", "nrmse", "horizon", "truncated"}, out);
}

void write_offsets_csv(const std::filesystem::path& path, const CalibrationResult& result) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t z = 0; z < result.table.zones.size(); ++z) {
    const auto k = static_cast<Eigen::Index>(z);
    rows.push_back({result.table.zones[z], fmt(result.co2_offsets[k]), fmt(result.temp_offsets[k])});
  }
  write_csv(path, {"zone", "co2_offset", "temp_offset"}, rows);
}

}  // namespace zonenet
