#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "sdi/errors.hpp"

namespace sdi {

/// A calendar month. `month` runs 1..12.
struct TimeStamp {
    int year = 0;
    int month = 1;

    /// Months since year 0, January = 0. Total order and arithmetic helper.
    [[nodiscard]] long linear() const { return static_cast<long>(year) * 12 + (month - 1); }
    [[nodiscard]] static TimeStamp from_linear(long n);
    [[nodiscard]] TimeStamp plus_months(long n) const { return from_linear(linear() + n); }

    friend auto operator<=>(const TimeStamp&, const TimeStamp&) = default;
};

/// Formats as "YYYY-MM".
std::string to_string(const TimeStamp& ts);

/// Parses "YYYY-MM"; throws ParseError on malformed input.
TimeStamp parse_time_stamp(const std::string& text);

/// `count` consecutive stamps starting at `start`.
std::vector<TimeStamp> make_stamps(TimeStamp start, std::size_t count);

/// A gap-free monthly series for one variable. Stamps are consecutive
/// calendar months; values are finite.
class MonthlyTimeSeries {
public:
    MonthlyTimeSeries(std::vector<TimeStamp> stamps, std::vector<double> values,
                      std::string variable_id);

    [[nodiscard]] const std::vector<TimeStamp>& stamps() const { return stamps_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] const std::string& variable_id() const { return variable_id_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }

private:
    std::vector<TimeStamp> stamps_;
    std::vector<double> values_;
    std::string variable_id_;
};

/// Positions (0-based) of one calendar month within a series.
struct MonthIndexSet {
    int month = 1;
    std::vector<std::size_t> indices;
};

/// Splits series positions into the twelve per-month index sets.
/// Sets may be empty when the record does not cover that month.
std::array<MonthIndexSet, 12> month_partition(const MonthlyTimeSeries& series);

/// Column-major matrix; every column has the same number of rows.
class ColumnMatrix {
public:
    ColumnMatrix() = default;
    explicit ColumnMatrix(std::vector<std::vector<double>> columns);

    [[nodiscard]] std::size_t rows() const { return columns_.empty() ? 0 : columns_[0].size(); }
    [[nodiscard]] std::size_t cols() const { return columns_.size(); }
    [[nodiscard]] const std::vector<double>& column(std::size_t j) const { return columns_.at(j); }
    [[nodiscard]] const std::vector<std::vector<double>>& columns() const { return columns_; }

private:
    std::vector<std::vector<double>> columns_;
};

/// Copula-scale observations (one column per variable, values in (0,1)):
/// the output of the per-variable marginal transform.
struct CopulaData {
    ColumnMatrix values;
};

/// Rosenblatt-transformed observations (one column per variable, values in
/// (0,1)). Kept as a distinct type: downstream operations that require the
/// dependence-adjusted data cannot be fed raw copula data by accident.
struct RosenblattData {
    ColumnMatrix values;
};

/// One pixel of a gridded dataset.
struct Pixel {
    std::string id;
    double lon = 0.0;
    double lat = 0.0;
};

/// Aligned multi-variable gridded monthly data. For every pixel and variable
/// there is one series over the shared stamp vector.
struct PixelGrid {
    std::vector<TimeStamp> stamps;
    std::vector<std::string> variables;
    std::vector<Pixel> pixels;
    /// series[pixel][variable][time]
    std::vector<std::vector<std::vector<double>>> series;

    [[nodiscard]] std::size_t variable_index(const std::string& name) const;
    [[nodiscard]] MonthlyTimeSeries make_series(std::size_t pixel, std::size_t variable) const;
};

}  // namespace sdi
