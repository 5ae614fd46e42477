#include <gtest/gtest.h>

#include <sstream>

#include "ewave/market_data.hpp"
#include "fixtures.hpp"

using namespace ewave;

namespace {

CandleSeries parse(const std::string& text, Interval interval = Interval::Daily) {
  std::istringstream in(text);
  return parse_csv(in, "T", interval);
}

std::optional<std::size_t> error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.line();
  }
  return std::nullopt;
}

}  // namespace

TEST(ParseCsv, ReadsRowsInOrder) {
  auto s = parse("timestamp,open,high,low,close,volume\n100,10,12,9,11,5\n200,11,13,10,12,6\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (Candle{100, 10, 12, 9, 11, 5}));
  EXPECT_EQ(s[1].close, 12);
  EXPECT_EQ(s.symbol(), "T");
}

TEST(ParseCsv, SortsOutOfOrderRows) {
  auto s = parse("timestamp,open,high,low,close,volume\n200,11,13,10,12,6\n100,10,12,9,11,5\n");
  EXPECT_EQ(s[0].timestamp, 100);
  EXPECT_EQ(s[1].timestamp, 200);
}

TEST(ParseCsv, ToleratesWhitespaceAndCrlf) {
  auto s = parse("timestamp,open,high,low,close,volume\r\n 100 , 10 ,12,9,11,5\r\n\r\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].open, 10);
}

TEST(ParseCsv, LowAboveHighNamesTheLine) {
  const std::string text = "timestamp,open,high,low,close,volume\n100,10,9,12,11,5\n";
  EXPECT_EQ(error_line(text), 2u);
  try {
    parse(text);
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("low>high"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseCsv, RejectsDuplicatesMalformedAndEmpty) {
  EXPECT_EQ(error_line("timestamp,open,high,low,close,volume\n100,10,12,9,11,5\n100,10,12,9,11,5\n"), 3u);
  EXPECT_EQ(error_line("timestamp,open,high,low,close,volume\n100,10,12,9\n"), 2u);
  EXPECT_EQ(error_line("timestamp,open,high,low,close,volume\n100,10,x,9,11,5\n"), 2u);
  EXPECT_EQ(error_line("timestamp,open,high,low,close,volume\n100,-1,12,9,11,5\n"), 2u);
  EXPECT_THROW(parse(""), DataError);
}

TEST(ParseCsv, RoundTripIsExact) {
  auto s = fixtures::random_walk(3, 200);
  std::stringstream buf;
  write_csv(buf, s);
  auto back = parse_csv(buf, s.symbol(), s.interval());
  EXPECT_EQ(back, s);
}

TEST(CandleSeries, RejectsNonIncreasingTimestamps) {
  std::vector<Candle> c{{100, 1, 1, 1, 1, 0}, {100, 1, 1, 1, 1, 0}};
  EXPECT_THROW(CandleSeries("T", Interval::Daily, c), DataError);
}

TEST(CandleSeries, PrefixIsLeadingCandles) {
  auto s = fixtures::random_walk(1, 50);
  auto p = s.prefix(10);
  ASSERT_EQ(p.size(), 10u);
  EXPECT_EQ(p[9], s[9]);
  EXPECT_EQ(s.prefix(999).size(), 50u);
}

TEST(Slice, InclusiveBounds) {
  auto s = fixtures::random_walk(1, 10);
  const auto day = interval_seconds(Interval::Daily);
  auto sub = slice(s, fixtures::kEpoch + 2 * day, fixtures::kEpoch + 4 * day);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub[0], s[2]);
  EXPECT_EQ(sub[2], s[4]);
  EXPECT_TRUE(slice(s, 0, 1).empty());
  EXPECT_THROW(slice(s, 5, 4), std::invalid_argument);
}

TEST(Resample, HourlyToDailyAggregates) {
  std::vector<Candle> c;
  for (int h = 0; h < 48; ++h) {
    const double base = 100 + h;
    c.push_back({fixtures::kEpoch + h * 3600, base, base + 2, base - 1, base + 1, 10});
  }
  CandleSeries hourly("T", Interval::Hourly, c);
  auto daily = resample(hourly, Interval::Daily);
  ASSERT_EQ(daily.size(), 2u);
  EXPECT_EQ(daily[0], (Candle{fixtures::kEpoch, 100, 125, 99, 124, 240}));
  EXPECT_EQ(daily[1].open, 124);
  EXPECT_EQ(daily[1].timestamp, fixtures::kEpoch + 86400);
}

TEST(Resample, BucketsByUtcDayNotFirstCandle) {
  std::vector<Candle> c{{fixtures::kEpoch + 20 * 3600, 1, 1, 1, 1, 1}, {fixtures::kEpoch + 26 * 3600, 2, 2, 2, 2, 1}};
  auto daily = resample(CandleSeries("T", Interval::Hourly, c), Interval::Daily);
  ASSERT_EQ(daily.size(), 2u);
  EXPECT_EQ(daily[1].timestamp, fixtures::kEpoch + 86400);
}

TEST(Resample, FinerTargetFailsAndEqualIsIdentity) {
  auto s = fixtures::random_walk(2, 20);
  EXPECT_THROW(resample(s, Interval::Hourly), DataError);
  EXPECT_EQ(resample(s, Interval::Daily), s);
}

TEST(Interval, ParseAndPrint) {
  EXPECT_EQ(parse_interval("hourly"), Interval::Hourly);
  EXPECT_EQ(parse_interval("daily"), Interval::Daily);
  EXPECT_FALSE(parse_interval("weekly"));
  EXPECT_EQ(to_string(Interval::Hourly), "hourly");
}
