#include <stdexcept>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "d2dcache/errors.hpp"
#include "d2dcache/results.hpp"

using namespace d2dcache;

TEST_CASE("number formatting uses 12 significant digits") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(4e-5) == "4e-05");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("empty table writes only the header") {
  ResultTable table({"sigma_m", "metric", "value"});
  std::ostringstream out;
  write_csv(table, out);
  CHECK(out.str() == "sigma_m,metric,value\n");
  std::ostringstream json;
  write_jsonl(table, json);
  CHECK(json.str().empty());
}

TEST_CASE("csv round trip at 12 significant digits") {
  ResultTable table({"x", "label", "trials", "seed", "empty"});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    values.push_back(v);
    table.add_row({v, std::string(i % 2 ? "a,\"quoted\"" : "plain"), std::uint64_t(1000),
                   std::uint64_t(0xFFFFFFFFFFFFFFFFULL), std::monostate{}});
  }
  std::stringstream buffer;
  write_csv(table, buffer);
  const auto back = read_csv(buffer);
  REQUIRE(back.size() == table.size());
  CHECK(back.columns() == table.columns());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double expected = std::stod(format_number(values[i]));
    const auto& cell = back.at(i, "x");
    // Integral values read back as unsigned; negatives and fractions as double.
    const double got = std::holds_alternative<std::uint64_t>(cell)
                           ? static_cast<double>(std::get<std::uint64_t>(cell))
                           : std::get<double>(cell);
    CHECK(got == expected);
    CHECK(std::get<std::string>(back.at(i, "label")) == std::get<std::string>(table.at(i, "label")));
    CHECK(std::get<std::uint64_t>(back.at(i, "seed")) == 0xFFFFFFFFFFFFFFFFULL);
    CHECK(std::holds_alternative<std::monostate>(back.at(i, "empty")));
  }
}

TEST_CASE("json lines") {
  ResultTable table({"beta", "policy", "value", "seed"});
  table.add_row({0.5, std::string("PC"), 1.0 / 3.0, std::monostate{}});
  std::ostringstream out;
  write_jsonl(table, out);
  const auto obj = nlohmann::json::parse(out.str());
  CHECK(obj["beta"] == 0.5);
  CHECK(obj["policy"] == "PC");
  CHECK(obj["value"].get<double>() == 0.333333333333);
  CHECK(obj["seed"].is_null());
}

TEST_CASE("table shape checks") {
  ResultTable table({"a", "b"});
  CHECK_THROWS_AS(table.add_row({1.0}), std::invalid_argument);
  auto row = table.blank_row();
  CHECK_THROWS_AS(table.set(row, "c", 1.0), std::out_of_range);
  table.set(row, "b", 2.0);
  table.add_row(row);
  CHECK(std::get<double>(table.at(0, "b")) == 2.0);
}

TEST_CASE("emit_results writes files and reports bad paths") {
  ResultTable table({"v"});
  table.add_row({1.5});
  const auto path = std::filesystem::temp_directory_path() / "d2dcache_results_test.csv";
  emit_results(table, OutputFormat::csv, path);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "v\n1.5\n");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(emit_results(table, OutputFormat::csv, "/nonexistent-dir/x.csv"), IoError);
}
