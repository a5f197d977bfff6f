#include "zonenet/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zonenet {

namespace {

std::string describe(const std::string& file, std::size_t row, const std::string& column,
                     const std::string& message) {
  std::string s = file;
  if (row > 0) s += ":" + std::to_string(row);
  if (!column.empty()) s += " column '" + column + "'";
  return s + ": " + message;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& text, const std::string& file, std::size_t row,
                  const std::string& column) {
  if (text.empty()) throw DataError(file, row, column, "missing value");
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw DataError(file, row, column, "cannot parse '" + text + "' as a number");
  return v;
}

}  // namespace

DataError::DataError(const std::string& file, std::size_t row, const std::string& column,
                     const std::string& message)
    : std::runtime_error(describe(file, row, column, message)),
      file_(file),
      column_(column),
      detail_(message),
      row_(row) {}

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return npos;
}

CsvTable read_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) throw DataError(file, 0, "", "cannot open file");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      for (std::size_t i = 0; i < t.header.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (t.header[i] == t.header[j]) throw DataError(file, lineno, t.header[i], "duplicate column");
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError(file, lineno, "",
                      "expected " + std::to_string(t.header.size()) + " cells, found " +
                          std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) throw DataError(file, 0, "", "file is empty");
  return t;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string(), 0, "", "cannot open file for writing");
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw DataError(path.string(), 0, "", "write failed");
}

RawSensorTable load_sensor_csv(const std::filesystem::path& path, const SensorSchema& schema,
                               const std::vector<std::string>& zones) {
  const std::string file = path.string();
  const CsvTable csv = read_csv(path);
  auto need = [&](const std::string& name) {
    const std::size_t c = csv.column(name);
    if (c == CsvTable::npos) throw DataError(file, 1, name, "required column is missing");
    return c;
  };
  const std::size_t tcol = need(schema.time_column);
  std::vector<std::size_t> ccols, tcols;
  for (const auto& z : zones) {
    ccols.push_back(need(schema.co2_column(z)));
    tcols.push_back(need(schema.temp_column(z)));
  }

  const std::size_t n = csv.rows.size();
  if (n == 0) throw DataError(file, 0, "", "no data rows");
  RawSensorTable t;
  t.zones = zones;
  t.times.resize(n);
  t.co2.resize(static_cast<Eigen::Index>(zones.size()), static_cast<Eigen::Index>(n));
  t.temp.resize(static_cast<Eigen::Index>(zones.size()), static_cast<Eigen::Index>(n));
  double t0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = csv.rows[i];
    const std::size_t line = csv.lines[i];
    const double ts = parse_cell(r[tcol], file, line, schema.time_column);
    if (i == 0) t0 = ts;
    t.times[i] = ts - t0;
    if (i > 0 && !(t.times[i] > t.times[i - 1]))
      throw DataError(file, line, schema.time_column, "timestamps must be strictly increasing");
    for (std::size_t z = 0; z < zones.size(); ++z) {
      t.co2(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(i)) =
          parse_cell(r[ccols[z]], file, line, csv.header[ccols[z]]);
      t.temp(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(i)) =
          parse_cell(r[tcols[z]], file, line, csv.header[tcols[z]]);
    }
  }
  return t;
}

void write_sensor_csv(const std::filesystem::path& path, const RawSensorTable& table,
                      const SensorSchema& schema) {
  std::vector<std::string> header{schema.time_column};
  for (const auto& z : table.zones) header.push_back(schema.co2_column(z));
  for (const auto& z : table.zones) header.push_back(schema.temp_column(z));
  std::vector<std::vector<std::string>> rows(table.times.size());
  for (std::size_t i = 0; i < table.times.size(); ++i) {
    auto& r = rows[i];
    r.reserve(header.size());
    r.push_back(format_double(table.times[i]));
    const auto c = static_cast<Eigen::Index>(i);
    for (Eigen::Index z = 0; z < table.co2.rows(); ++z) r.push_back(format_double(table.co2(z, c)));
    for (Eigen::Index z = 0; z < table.temp.rows(); ++z) r.push_back(format_double(table.temp(z, c)));
  }
  write_csv(path, header, rows);
}

std::vector<std::string> zone_ids(const ZoneNetwork& network) {
  std::vector<std::string> ids;
  for (const auto& z : network.zones()) ids.push_back(z.id);
  return ids;
}

Dataset to_dataset(const RawSensorTable& table, const ZoneNetwork& network) {
  Dataset d;
  d.times = table.times;
  const auto n = static_cast<Eigen::Index>(table.times.size());
  d.co2.resize(static_cast<Eigen::Index>(network.zone_count()), n);
  d.temp.resize(static_cast<Eigen::Index>(network.zone_count()), n);
  std::vector<bool> seen(network.zone_count(), false);
  for (std::size_t k = 0; k < table.zones.size(); ++k) {
    const std::size_t z = network.zone_index(table.zones[k]);
    d.co2.row(static_cast<Eigen::Index>(z)) = table.co2.row(static_cast<Eigen::Index>(k));
    d.temp.row(static_cast<Eigen::Index>(z)) = table.temp.row(static_cast<Eigen::Index>(k));
    seen[z] = true;
  }
  for (std::size_t z = 0; z < seen.size(); ++z)
    if (!seen[z]) throw std::invalid_argument("sensor table has no data for zone " + network.zones()[z].id);
  d.validate(network);
  return d;
}

RawSensorTable to_table(const Dataset& dataset, const ZoneNetwork& network, bool noiseless) {
  if (noiseless && !(dataset.noiseless_co2 && dataset.noiseless_temp))
    throw std::invalid_argument("dataset has no noiseless twin");
  RawSensorTable t;
  t.times = dataset.times;
  t.zones = zone_ids(network);
  t.co2 = noiseless ? *dataset.noiseless_co2 : dataset.co2;
  t.temp = noiseless ? *dataset.noiseless_temp : dataset.temp;
  return t;
}

}  // namespace zonenet
