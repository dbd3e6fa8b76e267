#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdi/core.hpp"
#include "sdi/errors.hpp"

using namespace sdi;

TEST_CASE("time stamp arithmetic wraps across year boundaries") {
    TimeStamp dec{1999, 12};
    CHECK(dec.plus_months(1) == TimeStamp{2000, 1});
    CHECK(dec.plus_months(-11) == TimeStamp{1999, 1});
    CHECK(dec.plus_months(25) == TimeStamp{2002, 1});
    CHECK(TimeStamp{1961, 7}.plus_months(0) == TimeStamp{1961, 7});
    CHECK(TimeStamp::from_linear(TimeStamp{2023, 4}.linear()) == TimeStamp{2023, 4});
}

TEST_CASE("time stamp ordering is year-major") {
    CHECK(TimeStamp{1990, 12} < TimeStamp{1991, 1});
    CHECK(TimeStamp{1990, 3} < TimeStamp{1990, 4});
    CHECK(TimeStamp{1990, 3} == TimeStamp{1990, 3});
}

TEST_CASE("time stamp formatting and parsing") {
    CHECK(to_string(TimeStamp{2005, 7}) == "2005-07");
    CHECK(to_string(TimeStamp{613, 11}) == "0613-11");
    CHECK(parse_time_stamp("1976-08") == TimeStamp{1976, 8});
    CHECK_THROWS_AS(parse_time_stamp("1976-13"), ParseError);
    CHECK_THROWS_AS(parse_time_stamp("1976-00"), ParseError);
    CHECK_THROWS_AS(parse_time_stamp("197608"), ParseError);
    CHECK_THROWS_AS(parse_time_stamp("abcd-ef"), ParseError);
}

TEST_CASE("make_stamps produces a gap-free run") {
    auto s = make_stamps({1999, 11}, 4);
    REQUIRE(s.size() == 4);
    CHECK(s[0] == TimeStamp{1999, 11});
    CHECK(s[1] == TimeStamp{1999, 12});
    CHECK(s[2] == TimeStamp{2000, 1});
    CHECK(s[3] == TimeStamp{2000, 2});
}

TEST_CASE("monthly series validates shape and contiguity") {
    auto stamps = make_stamps({2000, 1}, 3);
    CHECK_NOTHROW(MonthlyTimeSeries(stamps, {1.0, 2.0, 3.0}, "PRE"));

    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(MonthlyTimeSeries(stamps, {1.0, 2.0}, "PRE"), LengthMismatch);
    }
    SUBCASE("empty") {
        CHECK_THROWS_AS(MonthlyTimeSeries({}, {}, "PRE"), TooFewPoints);
    }
    SUBCASE("gap in the record") {
        auto gappy = stamps;
        gappy[2] = {2000, 4};
        CHECK_THROWS_AS(MonthlyTimeSeries(gappy, {1.0, 2.0, 3.0}, "PRE"), GapError);
    }
    SUBCASE("month out of range") {
        auto bad = stamps;
        bad[1] = {2000, 0};
        CHECK_THROWS_AS(MonthlyTimeSeries(bad, {1.0, 2.0, 3.0}, "PRE"), DomainError);
    }
    SUBCASE("non-finite value") {
        CHECK_THROWS_AS(MonthlyTimeSeries(stamps, {1.0, std::nan(""), 3.0}, "PRE"), DomainError);
    }
}

TEST_CASE("month partition distributes positions by calendar month") {
    SUBCASE("two full years have two entries per month") {
        std::vector<double> v(24, 0.0);
        MonthlyTimeSeries s(make_stamps({1980, 1}, 24), v, "PRE");
        auto part = month_partition(s);
        for (int m = 0; m < 12; ++m) {
            CHECK(part[m].month == m + 1);
            REQUIRE(part[m].indices.size() == 2);
            CHECK(part[m].indices[0] == static_cast<std::size_t>(m));
            CHECK(part[m].indices[1] == static_cast<std::size_t>(m + 12));
        }
    }
    SUBCASE("13 months starting January double up January only") {
        std::vector<double> v(13, 0.0);
        MonthlyTimeSeries s(make_stamps({1980, 1}, 13), v, "PRE");
        auto part = month_partition(s);
        CHECK(part[0].indices.size() == 2);
        for (int m = 1; m < 12; ++m) CHECK(part[m].indices.size() == 1);
    }
    SUBCASE("a single July observation leaves the rest empty") {
        MonthlyTimeSeries s(make_stamps({1980, 7}, 1), {3.3}, "PRE");
        auto part = month_partition(s);
        CHECK(part[6].indices == std::vector<std::size_t>{0});
        for (int m = 0; m < 12; ++m)
            if (m != 6) CHECK(part[m].indices.empty());
    }
}

TEST_CASE("column matrix rejects ragged input") {
    CHECK_THROWS_AS(ColumnMatrix({{1.0, 2.0}, {3.0}}), LengthMismatch);
    ColumnMatrix m({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 2);
    CHECK(m.column(1)[0] == 3.0);
}

TEST_CASE("pixel grid exposes per-pixel series") {
    PixelGrid grid;
    grid.stamps = make_stamps({2001, 1}, 2);
    grid.variables = {"PRE", "TMP"};
    grid.pixels = {{"p1", 10.0, 50.0}, {"p2", 10.5, 50.0}};
    grid.series = {{{1.0, 2.0}, {10.0, 11.0}}, {{3.0, 4.0}, {12.0, 13.0}}};

    CHECK(grid.variable_index("TMP") == 1);
    CHECK_THROWS_AS((void)grid.variable_index("VPD"), DomainError);
    auto s = grid.make_series(1, 0);
    CHECK(s.variable_id() == "PRE");
    CHECK(s.values() == std::vector<double>{3.0, 4.0});
    CHECK(s.stamps()[1] == TimeStamp{2001, 2});
}
