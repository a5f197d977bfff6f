#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "zonenet/benchmark.hpp"
#include "zonenet/calibration.hpp"
#include "zonenet/config.hpp"
#include "zonenet/csv.hpp"

using namespace zonenet;
namespace fs = std::filesystem;

namespace {

RawSensorTable two_zone_table(double a, double b, std::size_t n = 20) {
  RawSensorTable t;
  t.zones = {"X", "Y"};
  t.co2.resize(2, static_cast<Eigen::Index>(n));
  t.temp.resize(2, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    t.times.push_back(10.0 * static_cast<double>(i));
    t.co2(0, static_cast<Eigen::Index>(i)) = a;
    t.co2(1, static_cast<Eigen::Index>(i)) = b;
    t.temp(0, static_cast<Eigen::Index>(i)) = 21.0 + 0.01 * static_cast<double>(i);
    t.temp(1, static_cast<Eigen::Index>(i)) = 21.4 + 0.01 * static_cast<double>(i);
  }
  return t;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// Small well-formed sensor file for two zones.
std::string good_csv() {
  return "time,co2_X,temp_X,co2_Y,temp_Y\n"
         "0,400,21,410,21.5\n"
         "10,401,21.1,411,21.6\n"
         "20,402,21.2,412,21.7\n";
}

}  // namespace

TEST_CASE("offset calibration") {
  SUBCASE("two constant zones meet at the grand mean") {
    const auto cal = offset_calibrate(two_zone_table(400.0, 410.0), 0.0, 100.0);
    CHECK(cal.co2_offsets[0] == doctest::Approx(-5.0).epsilon(1e-15));
    CHECK(cal.co2_offsets[1] == doctest::Approx(5.0).epsilon(1e-15));
    CHECK((cal.table.co2.array() == 405.0).all());
    CHECK(cal.temp_offsets[0] == doctest::Approx(-0.2).epsilon(1e-12));
  }
  SUBCASE("identical zones are left alone") {
    auto t = two_zone_table(400.0, 400.0);
    t.temp.row(1) = t.temp.row(0);
    const auto cal = offset_calibrate(t, 0.0, 100.0);
    CHECK(cal.co2_offsets.isZero(0.0));
    CHECK(cal.temp_offsets.isZero(0.0));
    CHECK(cal.table.co2 == t.co2);
  }
  SUBCASE("idempotent, and only constant shifts outside the baseline") {
    auto t = two_zone_table(400.0, 410.0, 100);
    for (Eigen::Index i = 0; i < t.co2.cols(); ++i) t.co2(1, i) += std::sin(0.1 * static_cast<double>(i));
    const auto once = offset_calibrate(t, 0.0, 200.0);
    const auto twice = offset_calibrate(once.table, 0.0, 200.0);
    CHECK((twice.table.co2 - once.table.co2).cwiseAbs().maxCoeff() <= 1e-12);
    const auto ext_raw = extract_interval(t, 300.0, 900.0);
    const auto ext_cal = extract_interval(once.table, 300.0, 900.0);
    REQUIRE(ext_raw.times.size() == 61);
    CHECK(ext_raw.times.front() == 0.0);
    for (Eigen::Index z = 0; z < 2; ++z) {
      const Eigen::ArrayXd shift = (ext_raw.co2.row(z) - ext_cal.co2.row(z)).array();
      CHECK((shift - once.co2_offsets[z]).abs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("excluded zones keep their values") {
    const auto cal = offset_calibrate(two_zone_table(400.0, 410.0), 0.0, 100.0, {true, false});
    CHECK(cal.co2_offsets[1] == 0.0);
    CHECK(cal.co2_offsets[0] == 0.0);  // grand mean over the single participant is itself
  }
  SUBCASE("baseline needs two samples") {
    CHECK_THROWS(offset_calibrate(two_zone_table(400.0, 410.0), 0.0, 5.0));
    CHECK_THROWS(offset_calibrate(two_zone_table(400.0, 410.0), 1000.0, 2000.0));
  }
}

TEST_CASE("sensor CSV ingestion") {
  const auto dir = testkit::scratch_dir("ingest");
  const SensorSchema schema;
  const std::vector<std::string> zones = {"X", "Y"};

  SUBCASE("well-formed file") {
    write_text(dir / "ok.csv", good_csv());
    const auto t = load_sensor_csv(dir / "ok.csv", schema, zones);
    CHECK(t.times == std::vector<double>{0.0, 10.0, 20.0});
    CHECK(t.co2(1, 2) == 412.0);
    CHECK(t.temp(0, 1) == 21.1);
  }
  SUBCASE("timestamps are re-based to the first row") {
    write_text(dir / "late.csv", "time,co2_X,temp_X,co2_Y,temp_Y\n100,1,2,3,4\n110,1,2,3,4\n");
    CHECK(load_sensor_csv(dir / "late.csv", schema, zones).times == std::vector<double>{0.0, 10.0});
  }
  SUBCASE("361 rows from the stand-in generator") {
    Setup s(load_config(testkit::scaled_config_path()));
    const auto d = generate_synthetic(s.model, *s.truth, 3600.0, 10.0, NoiseSpec{5.0, 0.1, 1});
    write_sensor_csv(dir / "standin.csv", to_table(d, s.network), s.config.sensors);
    const auto t = load_sensor_csv(dir / "standin.csv", s.config.sensors, zone_ids(s.network));
    CHECK(t.times.size() == 361);
  }
  SUBCASE("missing column names the column") {
    write_text(dir / "missing.csv", "time,co2_X,temp_X,co2_Y\n0,1,2,3\n");
    try {
      load_sensor_csv(dir / "missing.csv", schema, zones);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(e.column() == "temp_Y");
    }
  }
  SUBCASE("duplicate timestamp reports the row") {
    write_text(dir / "dup.csv", "time,co2_X,temp_X,co2_Y,temp_Y\n0,1,2,3,4\n10,1,2,3,4\n10,1,2,3,4\n");
    try {
      load_sensor_csv(dir / "dup.csv", schema, zones);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(e.row() == 4);
      CHECK(std::string(e.what()).find("increas") != std::string::npos);
    }
  }
  SUBCASE("unparsable and empty cells report row and column") {
    write_text(dir / "bad.csv", "time,co2_X,temp_X,co2_Y,temp_Y\n0,1,2,3,4\n10,1,abc,3,4\n");
    try {
      load_sensor_csv(dir / "bad.csv", schema, zones);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(e.row() == 3);
      CHECK(e.column() == "temp_X");
    }
    write_text(dir / "gap.csv", "time,co2_X,temp_X,co2_Y,temp_Y\n0,1,2,3,4\n10,1,,3,4\n");
    CHECK_THROWS_AS(load_sensor_csv(dir / "gap.csv", schema, zones), DataError);
  }
  SUBCASE("ragged row") {
    write_text(dir / "ragged.csv", "time,co2_X,temp_X,co2_Y,temp_Y\n0,1,2,3\n");
    CHECK_THROWS_AS(load_sensor_csv(dir / "ragged.csv", schema, zones), DataError);
  }
}

TEST_CASE("CSV round trip is bit-exact") {
  const auto dir = testkit::scratch_dir("roundtrip");
  Setup s(testkit::benchmark_config());
  const auto d = generate_synthetic(s.model, *s.truth, 14400.0, 60.0, NoiseSpec{5.0, 0.1, 9});
  write_sensor_csv(dir / "a.csv", to_table(d, s.network), s.config.sensors);
  const auto back = to_dataset(load_sensor_csv(dir / "a.csv", s.config.sensors, zone_ids(s.network)), s.network);
  CHECK(back.co2 == d.co2);
  CHECK(back.temp == d.temp);
  CHECK(back.times == d.times);
  write_sensor_csv(dir / "b.csv", to_table(back, s.network), s.config.sensors);
  CHECK(testkit::slurp(dir / "a.csv") == testkit::slurp(dir / "b.csv"));

  for (double x : {0.1, 1.0 / 3.0, 400.00000000000006, -1e-300, 6.02214076e23})
    CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("config parsing") {
  const auto j = to_json(testkit::benchmark_config());
  CHECK(to_json(parse_config(j)) == j);
  const auto scaled = to_json(load_config(testkit::scaled_config_path()));
  CHECK(to_json(parse_config(scaled)) == scaled);

  SUBCASE("unknown key") {
    auto bad = j;
    bad["sampler"]["iteratoins"] = 5;
    try {
      parse_config(bad);
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.where().find("iteratoins") != std::string::npos);
    }
  }
  SUBCASE("wrong type") {
    auto bad = j;
    bad["substep"] = "ten";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }
  SUBCASE("schema version") {
    auto bad = j;
    bad.erase("schema_version");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }
}

TEST_CASE("command line") {
  const auto dir = testkit::scratch_dir("cli");
  const std::string cfg = "\"" + testkit::benchmark_config_path().string() + "\"";
  const auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };

  SUBCASE("simulate, infer, forecast") {
    auto r = testkit::run_cli("simulate --config " + cfg + " --out " + q(dir / "sim"), dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "sim" / "observed.csv"));
    CHECK(fs::exists(dir / "sim" / "noiseless.csv"));
    CHECK(fs::exists(dir / "sim" / "run_manifest.json"));

    r = testkit::run_cli("infer --data " + q(dir / "sim") + " --config " + cfg + " --out " + q(dir / "inf") +
                             " --iterations 400 --burn-in 200 --draws 20 --max-windows 2 --horizon 5",
                         dir);
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    for (const char* f : {"windows.csv", "tracks.csv", "predictive_0.csv", "predictive_1.csv", "results.json",
                          "config.json", "data.csv", "run_manifest.json"})
      CHECK(fs::exists(dir / "inf" / f));
    const auto manifest = nlohmann::json::parse(testkit::slurp(dir / "inf" / "run_manifest.json"));
    CHECK(manifest.contains("seed"));
    CHECK(manifest["command"] == "infer");
    CHECK(manifest["inputs"]["data"].get<std::string>().size() == 64);
    CHECK(manifest["inputs"]["config"].get<std::string>().size() == 64);

    r = testkit::run_cli("forecast --results " + q(dir / "inf") + " --horizon 20 --out " + q(dir / "fc"), dir);
    REQUIRE(r.exit_code == 0);
    const auto rows = read_csv(dir / "fc" / "forecast_eval.csv");
    CHECK(rows.rows.size() == 4);  // two windows, one row per field

    const std::string before = testkit::slurp(dir / "inf" / "run_manifest.json");
    r = testkit::run_cli("forecast --results " + q(dir / "inf") + " --horizon 20", dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "inf" / "forecast_eval.csv"));
    CHECK(fs::exists(dir / "inf" / "forecast_manifest.json"));
    CHECK(testkit::slurp(dir / "inf" / "run_manifest.json") == before);
  }
  SUBCASE("evaluate equal files") {
    write_text(dir / "p.csv", good_csv());
    const auto r = testkit::run_cli("evaluate --pred " + q(dir / "p.csv") + " --truth " + q(dir / "p.csv"), dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("0.0000%") != std::string::npos);
  }
  SUBCASE("corrupted data is a data error naming file and row") {
    auto r = testkit::run_cli("simulate --config " + cfg + " --out " + q(dir / "sim2"), dir);
    REQUIRE(r.exit_code == 0);
    std::string text = testkit::slurp(dir / "sim2" / "observed.csv");
    // Break the third data line (file line 4).
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) pos = text.find('\n', pos) + 1;
    text.replace(text.find(',', pos) + 1, 3, "x?z");
    write_text(dir / "corrupt.csv", text);
    r = testkit::run_cli("infer --data " + q(dir / "corrupt.csv") + " --config " + cfg + " --out " +
                             q(dir / "inf2") + " --iterations 400 --burn-in 200",
                         dir);
    CHECK(r.exit_code == 3);
    CHECK(r.err.rfind("zonenet: error kind=data", 0) == 0);
    CHECK(r.err.find("corrupt.csv") != std::string::npos);
    CHECK(r.err.find("row=4") != std::string::npos);
  }
  SUBCASE("usage and config errors") {
    auto r = testkit::run_cli("infer --config " + cfg, dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("zonenet: error kind=usage", 0) == 0);

    auto j = to_json(testkit::benchmark_config());
    j["bogus"] = 1;
    write_text(dir / "bad.json", j.dump());
    r = testkit::run_cli("simulate --config " + q(dir / "bad.json") + " --out " + q(dir / "x"), dir);
    CHECK(r.exit_code == 4);
    CHECK(r.err.find("kind=config") != std::string::npos);
  }
  SUBCASE("output directory from the environment") {
    const std::string env = "ZONENET_OUT_DIR=" + q(dir / "envout") + " ";
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = env + "\"" + ZONENET_CLI + "\" simulate --config " + cfg + " >" + q(out) + " 2>" + q(err);
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "envout" / "simulate" / "observed.csv"));
  }
}
