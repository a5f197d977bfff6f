#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "zonenet/dataset.hpp"
#include "zonenet/network.hpp"
#include "zonenet/setup.hpp"

namespace zonenet {

// Input problem with enough location detail to find it in the file.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& file, std::size_t row, const std::string& column,
            const std::string& message);
  const std::string& file() const { return file_; }
  std::size_t row() const { return row_; }  // 1-based line number, 0 when not row-specific
  const std::string& column() const { return column_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string file_, column_, detail_;
  std::size_t row_;
};

// 17 significant digits, enough to read back the identical double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  std::size_t column(const std::string& name) const;  // npos when absent
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Plain comma-separated text with a header row; no quoting. Blank lines are
// skipped; ragged rows are errors.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Sensor records for a set of zones. Matrices are zones x samples in the
// order of `zones`.
struct RawSensorTable {
  std::vector<double> times;  // s from the first row
  std::vector<std::string> zones;
  Eigen::MatrixXd co2;
  Eigen::MatrixXd temp;
};

RawSensorTable load_sensor_csv(const std::filesystem::path& path, const SensorSchema& schema,
                               const std::vector<std::string>& zones);
void write_sensor_csv(const std::filesystem::path& path, const RawSensorTable& table,
                      const SensorSchema& schema);

std::vector<std::string> zone_ids(const ZoneNetwork& network);

Dataset to_dataset(const RawSensorTable& table, const ZoneNetwork& network);
RawSensorTable to_table(const Dataset& dataset, const ZoneNetwork& network, bool noiseless = false);

}  // namespace zonenet
