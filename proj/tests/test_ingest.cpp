#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <ftlearn/ingest.hpp>

#include "helpers.hpp"

using namespace ftlearn;
using testutil::TempDir;

namespace {

SchemaConfig two_sensor_schema() {
  SchemaConfig s;
  s.unit_column = "unit";
  s.date_column = "date";
  s.sensor_columns = {{"temp", Statistic::Min}, {"pressure", Statistic::Min}};
  s.failure_columns = {"boom"};
  return s;
}

Dataset load_text(const std::string& csv_text, const SchemaConfig& schema) {
  TempDir dir;
  const std::string path = dir.file("data.csv");
  testutil::write_file(path, csv_text);
  return load_csv(path, schema);
}

}  // namespace

TEST_CASE("load_csv reads a complete file", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,20.5,1.2,0\n"
      "h1,2020-01-02,21.5,1.3,1\n"
      "h2,2020-01-01,19.0,1.1,false\n",
      two_sensor_schema());
  REQUIRE(d.row_count() == 3);
  CHECK(d.keys()[0].unit == "h1");
  CHECK(d.keys()[2].date.to_string() == "2020-01-01");
  CHECK(d.find_sensor("temp")->values[1] == 21.5);
  CHECK(d.find_failure("boom")->values[1] == 1);
  CHECK(d.find_failure("boom")->values[2] == 0);
}

TEST_CASE("unparseable sensor cells become missing, rows are kept", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,abc,1.2,0\n"
      "h1,2020-01-02,,1.3,1\n",
      two_sensor_schema());
  REQUIRE(d.row_count() == 2);
  CHECK(is_missing(d.find_sensor("temp")->values[0]));
  CHECK(is_missing(d.find_sensor("temp")->values[1]));
  CHECK(d.find_sensor("pressure")->values[0] == 1.2);
}

TEST_CASE("schema errors name the missing column", "[ingest]") {
  CHECK_THROWS_WITH(load_text("unit,temp,pressure,boom\nh1,1,2,0\n", two_sensor_schema()),
                    Catch::Matchers::ContainsSubstring("date"));
}

TEST_CASE("malformed failure cells fail with a row number", "[ingest]") {
  CHECK_THROWS_WITH(load_text(
                        "unit,date,temp,pressure,boom\n"
                        "h1,2020-01-01,1,1,0\n"
                        "h1,2020-01-02,1,1,maybe\n",
                        two_sensor_schema()),
                    Catch::Matchers::ContainsSubstring("row 3") &&
                        Catch::Matchers::ContainsSubstring("malformed failure cell"));
}

TEST_CASE("empty failure cells read as no failure", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,1,1,\n",
      two_sensor_schema());
  CHECK(d.find_failure("boom")->values[0] == 0);
}

TEST_CASE("quoted fields survive commas and quotes", "[ingest]") {
  SchemaConfig s = two_sensor_schema();
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "\"heater, big\"\"one\"\"\",2020-01-01,1,1,0\n",
      s);
  CHECK(d.keys()[0].unit == "heater, big\"one\"");
}

TEST_CASE("deduplicate keeps the first record per key", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,1,1,0\n"
      "h1,2020-01-01,1,1,0\n"      // exact duplicate
      "h1,2020-01-02,2,1,0\n"
      "h1,2020-01-02,99,9,1\n"     // conflicting duplicate: first kept
      "h2,2020-01-01,3,1,0\n",
      two_sensor_schema());
  const Dataset out = deduplicate(d);
  REQUIRE(out.row_count() == 3);
  CHECK(out.find_sensor("temp")->values[1] == 2.0);
  CHECK(out.find_failure("boom")->values[1] == 0);

  // idempotent, and the identity when nothing repeats
  const Dataset again = deduplicate(out);
  CHECK(again.row_count() == out.row_count());
  CHECK(again.find_sensor("temp")->values == out.find_sensor("temp")->values);
  CHECK(again.keys() == out.keys());
}

TEST_CASE("filter_corrupt drops only configured out-of-range rows", "[ingest]") {
  SchemaConfig s = two_sensor_schema();
  s.plausibility_ranges["pressure"] = {0.0, 10.0};
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,20,-3,0\n"    // pressure out of range
      "h1,2020-01-02,327.67,1,0\n" // extreme but unconfigured: retained
      "h1,2020-01-03,21,2,1\n",
      s);
  const Dataset out = filter_corrupt(d, s);
  REQUIRE(out.row_count() == 2);
  CHECK(out.find_sensor("temp")->values[0] == 327.67);

  SchemaConfig none = two_sensor_schema();
  const Dataset unchanged = filter_corrupt(d, none);
  CHECK(unchanged.row_count() == d.row_count());
}

TEST_CASE("missing cells never trigger plausibility filtering", "[ingest]") {
  SchemaConfig s = two_sensor_schema();
  s.plausibility_ranges["pressure"] = {0.0, 10.0};
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,20,,0\n",
      s);
  CHECK(filter_corrupt(d, s).row_count() == 1);
}

TEST_CASE("balance pairs failures with the latest earlier normal record", "[ingest]") {
  SECTION("single normal before the failure") {
    const Dataset d = load_text(
        "unit,date,temp,pressure,boom\n"
        "A,2020-01-01,1,1,0\n"
        "A,2020-01-02,2,2,1\n",
        two_sensor_schema());
    const BalancedDataset b = balance(d, "boom");
    REQUIRE(b.base.row_count() == 2);
    REQUIRE(b.pairing.size() == 1);
    CHECK(b.dropped_failures == 0);
    CHECK(b.base.keys()[0].date.to_string() == "2020-01-02");  // failure first
    CHECK(b.base.keys()[1].date.to_string() == "2020-01-01");
    CHECK(b.base.failures().size() == 1);  // restricted to one failure column
  }
  SECTION("failure with no earlier normal is dropped") {
    const Dataset d = load_text(
        "unit,date,temp,pressure,boom\n"
        "A,2020-01-01,1,1,1\n"
        "A,2020-01-02,2,2,0\n"
        "A,2020-01-03,3,3,1\n",
        two_sensor_schema());
    const BalancedDataset b = balance(d, "boom");
    CHECK(b.pairing.size() == 1);
    CHECK(b.dropped_failures == 1);
    CHECK(b.base.row_count() == 2);
  }
  SECTION("the most recent of several normals is chosen") {
    const Dataset d = load_text(
        "unit,date,temp,pressure,boom\n"
        "A,2020-01-01,1,1,0\n"
        "A,2020-01-02,2,2,0\n"
        "A,2020-01-03,3,3,1\n",
        two_sensor_schema());
    const BalancedDataset b = balance(d, "boom");
    REQUIRE(b.base.row_count() == 2);
    CHECK(b.base.keys()[1].date.to_string() == "2020-01-02");
  }
  SECTION("a normal record may serve several failures, materialized per pair") {
    const Dataset d = load_text(
        "unit,date,temp,pressure,boom\n"
        "A,2020-01-01,1,1,0\n"
        "A,2020-01-02,2,2,1\n"
        "A,2020-01-03,3,3,1\n",
        two_sensor_schema());
    const BalancedDataset b = balance(d, "boom");
    REQUIRE(b.base.row_count() == 4);
    CHECK(b.base.keys()[1].date.to_string() == "2020-01-01");
    CHECK(b.base.keys()[3].date.to_string() == "2020-01-01");
  }
  SECTION("no positive examples is an error") {
    const Dataset d = load_text(
        "unit,date,temp,pressure,boom\n"
        "A,2020-01-01,1,1,0\n",
        two_sensor_schema());
    CHECK_THROWS_WITH(balance(d, "boom"),
                      Catch::Matchers::ContainsSubstring("no positive examples"));
    CHECK_THROWS_AS(balance(d, "nope"), DataError);
  }
}

TEST_CASE("balance pairing dates are strictly ordered and maximal", "[ingest]") {
  std::mt19937_64 rng(61);
  std::ostringstream csv;
  csv << "unit,date,temp,pressure,boom\n";
  for (int u = 0; u < 6; ++u) {
    for (int day = 1; day <= 28; ++day) {
      if (rng() % 3 == 0) continue;  // gaps
      char date[16];
      std::snprintf(date, sizeof date, "2020-01-%02d", day);
      csv << "u" << u << "," << date << "," << day << "," << (rng() % 5) << ","
          << (rng() % 4 == 0 ? 1 : 0) << "\n";
    }
  }
  const Dataset d = load_text(csv.str(), two_sensor_schema());
  const BalancedDataset b = balance(d, "boom");
  const FailureColumn* f = b.base.find_failure("boom");
  for (const auto& [fi, ni] : b.pairing) {
    CHECK(f->values[fi] == 1);
    CHECK(f->values[ni] == 0);
    CHECK(b.base.keys()[fi].unit == b.base.keys()[ni].unit);
    CHECK(b.base.keys()[ni].date < b.base.keys()[fi].date);
    // maximality: no normal row of this unit sits strictly between
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      if (d.keys()[r].unit != b.base.keys()[fi].unit) continue;
      if (d.find_failure("boom")->values[r]) continue;
      const Date date = d.keys()[r].date;
      CHECK_FALSE((b.base.keys()[ni].date < date && date < b.base.keys()[fi].date));
    }
  }
}

TEST_CASE("schema documents parse and validate", "[ingest]") {
  const std::string text = R"({
    "unit_column": "unit",
    "date_column": "date",
    "sensor_columns": [{"name": "temp", "statistic": "min"},
                        {"name": "pressure", "statistic": "range"}],
    "failure_columns": ["boom"],
    "plausibility_ranges": {"pressure": [0, 10]},
    "learner": {"max_inputs": 2, "min_top_significance": 0.25, "statistic": "range"}
  })";
  TempDir dir;
  const std::string path = dir.file("schema.json");
  testutil::write_file(path, text);
  const SchemaConfig s = load_schema(path);
  CHECK(s.sensor_columns.size() == 2);
  CHECK(s.sensor_columns[1].second == Statistic::Range);
  CHECK(s.plausibility_ranges.at("pressure") == std::pair{0.0, 10.0});
  CHECK(s.learner.max_inputs == 2);
  CHECK(s.learner.min_top_significance == 0.25);
  CHECK(s.learner.statistic == Statistic::Range);
  CHECK_FALSE(s.learner.random_seed.has_value());

  SchemaConfig overlapping = two_sensor_schema();
  overlapping.failure_columns.push_back("temp");
  CHECK_THROWS_AS(overlapping.check(), SchemaError);

  SchemaConfig bad_range = two_sensor_schema();
  bad_range.plausibility_ranges["temp"] = {5.0, 5.0};
  CHECK_THROWS_AS(bad_range.check(), SchemaError);
}

TEST_CASE("CRLF line endings parse like LF", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\r\n"
      "h1,2020-01-01,20.5,1.2,0\r\n"
      "h1,2020-01-02,21.5,1.3,1\r\n",
      two_sensor_schema());
  REQUIRE(d.row_count() == 2);
  CHECK(d.find_sensor("temp")->values[1] == 21.5);
  CHECK(d.find_failure("boom")->values[1] == 1);
}

TEST_CASE("the csv reader never crashes on garbage bytes", "[ingest]") {
  std::mt19937_64 rng(97);
  TempDir dir;
  const char alphabet[] = "ab,\"\n\r\\0912.-x\t";
  for (int iter = 0; iter < 200; ++iter) {
    std::string text;
    const std::size_t len = rng() % 200;
    for (std::size_t i = 0; i < len; ++i)
      text += alphabet[rng() % (sizeof alphabet - 1)];
    const std::string path = dir.file("fuzz.csv");
    testutil::write_file(path, text);
    try {
      const auto rows = detail::read_csv(path);
      for (const auto& row : rows) CHECK(!row.empty());
    } catch (const ParseError&) {
      // unterminated quotes and friends are fine, crashes are not
    }
  }
}

TEST_CASE("write_csv round-trips through load_csv", "[ingest]") {
  const Dataset d = load_text(
      "unit,date,temp,pressure,boom\n"
      "h1,2020-01-01,20.25,1.2,0\n"
      "h1,2020-01-02,,1.3,1\n",
      two_sensor_schema());
  std::ostringstream out;
  write_csv(d, out);

  TempDir dir;
  const std::string path = dir.file("roundtrip.csv");
  testutil::write_file(path, out.str());
  const Dataset back = load_csv(path, two_sensor_schema());
  REQUIRE(back.row_count() == d.row_count());
  CHECK(back.keys() == d.keys());
  CHECK(back.find_sensor("temp")->values[0] == 20.25);
  CHECK(is_missing(back.find_sensor("temp")->values[1]));
}
