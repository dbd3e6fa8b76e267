#pragma once

#include <set>
#include <span>
#include <vector>

#include "sdi/core.hpp"
#include "sdi/index.hpp"

namespace sdi {

/// Fraction of pixels per stamp whose index falls in one of the given
/// categories. Pixels undefined at a stamp are excluded from both numerator
/// and denominator; a stamp with no defined pixel yields NaN.
struct AreaSeries {
    std::vector<TimeStamp> stamps;
    std::vector<double> fraction;
};

AreaSeries area_affected(std::span<const IndexSeries> pixels, const std::set<Category>& categories);

struct PeakExtent {
    TimeStamp stamp;
    double fraction = 0.0;
};

/// Stamp of maximal affected area inside [start, end] (inclusive); the
/// earliest stamp wins ties. Throws EmptyWindow when the window misses the
/// series or contains no defined value.
PeakExtent peak_extent(const AreaSeries& area, TimeStamp start, TimeStamp end);

/// Per-pixel Kendall tau between two index series over jointly defined
/// stamps. Pixels with fewer than two joint observations (or a constant
/// margin) yield NaN.
std::vector<double> tau_map(std::span<const IndexSeries> a, std::span<const IndexSeries> b);

}  // namespace sdi
