#include "sdi/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sdi {

TimeStamp TimeStamp::from_linear(long n) {
    long y = n / 12;
    long m = n % 12;
    if (m < 0) {
        m += 12;
        y -= 1;
    }
    return TimeStamp{static_cast<int>(y), static_cast<int>(m) + 1};
}

std::string to_string(const TimeStamp& ts) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", ts.year, ts.month);
    return buf;
}

TimeStamp parse_time_stamp(const std::string& text) {
    int y = 0;
    int m = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d%c", &y, &m, &tail) != 2 || m < 1 || m > 12)
        throw ParseError("bad time stamp '" + text + "', expected YYYY-MM");
    return TimeStamp{y, m};
}

std::vector<TimeStamp> make_stamps(TimeStamp start, std::size_t count) {
    std::vector<TimeStamp> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(start.plus_months(static_cast<long>(k)));
    return out;
}

MonthlyTimeSeries::MonthlyTimeSeries(std::vector<TimeStamp> stamps, std::vector<double> values,
                                     std::string variable_id)
    : stamps_(std::move(stamps)), values_(std::move(values)), variable_id_(std::move(variable_id)) {
    if (stamps_.size() != values_.size())
        throw LengthMismatch("series '" + variable_id_ + "': " + std::to_string(stamps_.size()) +
                             " stamps vs " + std::to_string(values_.size()) + " values");
    if (values_.empty()) throw TooFewPoints("series '" + variable_id_ + "' is empty");
    for (std::size_t k = 0; k < stamps_.size(); ++k) {
        if (stamps_[k].month < 1 || stamps_[k].month > 12)
            throw DomainError("series '" + variable_id_ + "': invalid month at position " +
                              std::to_string(k));
        if (k > 0 && stamps_[k].linear() != stamps_[k - 1].linear() + 1)
            throw GapError("series '" + variable_id_ + "': stamps not consecutive at " +
                           to_string(stamps_[k]));
        if (!std::isfinite(values_[k]))
            throw DomainError("series '" + variable_id_ + "': non-finite value at " +
                              to_string(stamps_[k]));
    }
}

std::array<MonthIndexSet, 12> month_partition(const MonthlyTimeSeries& series) {
    std::array<MonthIndexSet, 12> part;
    for (int m = 0; m < 12; ++m) part[m].month = m + 1;
    const auto& st = series.stamps();
    for (std::size_t k = 0; k < st.size(); ++k) part[st[k].month - 1].indices.push_back(k);
    return part;
}

ColumnMatrix::ColumnMatrix(std::vector<std::vector<double>> columns) : columns_(std::move(columns)) {
    for (const auto& c : columns_)
        if (c.size() != columns_[0].size())
            throw LengthMismatch("matrix columns have unequal lengths");
}

std::size_t PixelGrid::variable_index(const std::string& name) const {
    auto it = std::find(variables.begin(), variables.end(), name);
    if (it == variables.end()) throw DomainError("unknown variable '" + name + "'");
    return static_cast<std::size_t>(it - variables.begin());
}

MonthlyTimeSeries PixelGrid::make_series(std::size_t pixel, std::size_t variable) const {
    return MonthlyTimeSeries(stamps, series.at(pixel).at(variable), variables.at(variable));
}

}  // namespace sdi
