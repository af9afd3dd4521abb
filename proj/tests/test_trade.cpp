#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "capnet/random.hpp"
#include "capnet/trade.hpp"
#include "test_util.hpp"

using namespace capnet;
using test_util::TempDir;

TEST_CASE("parse_trade_csv reads well-formed rows", "[trade]") {
  TempDir dir;
  const auto path = dir.write("trade.csv", "country,product,value\nCHL,0711,100\nCHL,2601,50\n");
  const auto records = parse_trade_csv(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].country == "CHL");
  CHECK(records[0].product == "0711");
  CHECK(records[0].value == 100.0);
  CHECK_FALSE(records[0].year.has_value());
  CHECK(records[1].value == 50.0);
}

TEST_CASE("parse_trade_csv rejects negative values with the line number", "[trade]") {
  TempDir dir;
  const auto path = dir.write("trade.csv", "country,product,value\nCHL,0711,-3\n");
  CHECK_THROWS_MATCHES(parse_trade_csv(path), validation_error,
                       Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":2")));
}

TEST_CASE("parse_trade_csv rejects malformed rows instead of skipping", "[trade]") {
  TempDir dir;
  SECTION("non-numeric value") {
    const auto path = dir.write("a.csv", "country,product,value\nCHL,0711,abc\n");
    CHECK_THROWS_AS(parse_trade_csv(path), validation_error);
  }
  SECTION("empty country code") {
    const auto path = dir.write("b.csv", "country,product,value\n,0711,5\n");
    CHECK_THROWS_AS(parse_trade_csv(path), validation_error);
  }
  SECTION("ragged row") {
    const auto path = dir.write("c.csv", "country,product,value\nCHL,0711\n");
    CHECK_THROWS_MATCHES(parse_trade_csv(path), validation_error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":2")));
  }
}

TEST_CASE("parse_trade_csv missing file and missing column", "[trade]") {
  TempDir dir;
  CHECK_THROWS_AS(parse_trade_csv(dir.path() / "absent.csv"), validation_error);
  const auto path = dir.write("trade.csv", "country,value\nCHL,5\n");
  CHECK_THROWS_MATCHES(
      parse_trade_csv(path), validation_error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("product")));
}

TEST_CASE("parse_trade_csv year filter keeps only matching rows", "[trade]") {
  TempDir dir;
  const auto path = dir.write(
      "trade.csv", "country,product,value,year\nCHL,0711,100,2000\nCHL,0711,70,2005\nARG,2601,9,2005\n");
  const auto records = parse_trade_csv(path, 2005);
  REQUIRE(records.size() == 2);
  CHECK(records[0].value == 70.0);
  CHECK(records[1].country == "ARG");

  const auto no_year = dir.write("ny.csv", "country,product,value\nCHL,0711,100\n");
  CHECK_THROWS_AS(parse_trade_csv(no_year, 2005), validation_error);
}

TEST_CASE("aggregate sums duplicates and fills zeros", "[trade]") {
  SECTION("duplicate pairs") {
    const std::vector<TradeRecord> records{{"A", "p1", 10.0, {}}, {"A", "p1", 5.0, {}}};
    const ExportTable table = aggregate(records);
    REQUIRE(table.countries == std::vector<std::string>{"A"});
    REQUIRE(table.products == std::vector<std::string>{"p1"});
    CHECK(table.values(0, 0) == 15.0);
  }
  SECTION("off cells are zero") {
    const std::vector<TradeRecord> records{{"A", "p1", 10.0, {}}, {"B", "p2", 2.0, {}}};
    const ExportTable table = aggregate(records);
    REQUIRE(table.countries.size() == 2);
    REQUIRE(table.products.size() == 2);
    CHECK(table.values(0, 0) == 10.0);
    CHECK(table.values(0, 1) == 0.0);
    CHECK(table.values(1, 0) == 0.0);
    CHECK(table.values(1, 1) == 2.0);
  }
  SECTION("lexicographic label order") {
    const std::vector<TradeRecord> records{{"B", "p", 1.0, {}}, {"A", "p", 1.0, {}}};
    const ExportTable table = aggregate(records);
    CHECK(table.countries == std::vector<std::string>{"A", "B"});
  }
  SECTION("empty input") { CHECK_THROWS_AS(aggregate(std::vector<TradeRecord>{}), validation_error); }
}

TEST_CASE("aggregate conserves total value and ignores record order", "[trade]") {
  Rng rng(20240811);
  std::vector<TradeRecord> records;
  double total = 0.0;
  for (int i = 0; i < 300; ++i) {
    TradeRecord rec;
    rec.country = "C" + std::to_string(rng.below(12));
    rec.product = "P" + std::to_string(rng.below(25));
    rec.value = rng.next_double() * 1000.0;
    total += rec.value;
    records.push_back(rec);
  }
  const ExportTable table = aggregate(records);
  CHECK_THAT(table.values.total(), Catch::Matchers::WithinRel(total, 1e-12));

  std::vector<TradeRecord> shuffled = records;
  for (std::size_t k = shuffled.size(); k > 1; --k)
    std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
  const ExportTable again = aggregate(shuffled);
  REQUIRE(again.countries == table.countries);
  REQUIRE(again.products == table.products);
  for (std::size_t i = 0; i < table.countries.size(); ++i)
    for (std::size_t j = 0; j < table.products.size(); ++j)
      CHECK_THAT(again.values(i, j), Catch::Matchers::WithinRel(table.values(i, j), 1e-12));
}

TEST_CASE("export table round trip through CSV", "[trade]") {
  TempDir dir;
  const std::vector<TradeRecord> records{
      {"CHL", "0711", 100.5, {}}, {"ARG", "2601", 0.25, {}}, {"CHL", "2601", 3.0, {}}};
  const ExportTable table = aggregate(records);
  const auto path = dir.path() / "table.csv";
  write_export_table(path, table);
  const ExportTable back = read_export_table(path);
  CHECK(back.countries == table.countries);
  CHECK(back.products == table.products);
  CHECK(back.values == table.values);
}
