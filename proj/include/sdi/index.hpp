#pragma once

#include <span>
#include <string>
#include <vector>

#include "sdi/core.hpp"

namespace sdi {

/// Drought/wetness categories, driest to wettest.
enum class Category { D4, D3, D2, D1, D0, Normal, W0, W1, W2, W3, W4 };

std::string to_string(Category c);
Category parse_category(const std::string& text);

/// Maps an index value to its category. Boundaries belong to the category
/// whose interval they close from above: e.g. -1.64 is D3, -1.28 is D2.
Category classify(double value);

/// A standardized index series; the first l-1 values are undefined (NaN).
struct IndexSeries {
    std::vector<TimeStamp> stamps;
    std::vector<double> values;
    int scale = 1;

    [[nodiscard]] bool defined(std::size_t k) const;
};

/// Standardized index at time scale l from a standard-normal series:
/// SI_l(k) = sum of the l values ending at k, divided by sqrt(l).
IndexSeries si(std::span<const TimeStamp> stamps, std::span<const double> z, int l);

/// Multivariate index, joint method: row sums of weighted z-scores of the
/// Rosenblatt-transformed columns, aggregated like si with the weight norm
/// absorbed into the scaling. Weights must be positive, one per column.
IndexSeries smi_a(std::span<const TimeStamp> stamps, const RosenblattData& data,
                  std::span<const double> weights, int l);

/// Multivariate index, product method: per-row products of the Rosenblatt
/// columns are re-ranked to the uniform scale, mapped to z-scores and
/// aggregated like si. Weights are not supported by this method.
IndexSeries smi_m(std::span<const TimeStamp> stamps, const RosenblattData& data, int l);

/// Multivariate index, naive method: weighted z-score sums of the raw
/// copula-scale columns, standardized by the empirical standard deviation of
/// the row sums (uncentered, divisor T-1).
IndexSeries smi_n(std::span<const TimeStamp> stamps, const CopulaData& data,
                  std::span<const double> weights, int l);

}  // namespace sdi
