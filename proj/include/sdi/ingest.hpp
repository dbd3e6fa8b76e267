#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sdi/core.hpp"

namespace sdi {

/// Saturation vapour pressure (hPa) at air temperature (deg C), Magnus form
/// over water: 6.1078 * 10^(7.5 t / (t + 237.3)).
double svp(double tmp_celsius);

/// Vapour pressure deficit (hPa): svp(tmp) minus actual vapour pressure.
double vpd(double tmp_celsius, double vap_hpa);

/// Geographic selection, half-open: west <= lon < east, south <= lat < north.
struct BoundingBox {
    double west = -180.0;
    double east = 180.0;
    double south = -90.0;
    double north = 90.0;
};

struct DatasetSpec {
    std::vector<std::string> files;
    /// Requested variables; defines the column order of the loaded grid.
    std::vector<std::string> variables;
    std::optional<BoundingBox> bbox;
    /// Inclusive month range.
    std::optional<std::pair<TimeStamp, TimeStamp>> time_range;
};

/// Loads long-format CSV files with the exact header
/// `pixel_id,lon,lat,year,month,variable,value` into an aligned grid.
/// Rows outside the bounding box or time range are dropped. Every requested
/// variable must form a gap-free series sharing one stamp vector across all
/// pixels and variables (GapError / AlignmentError otherwise). When "VPD" is
/// requested but absent it is derived from TMP and VAP. Pixels are ordered
/// by id.
PixelGrid load_grid(const DatasetSpec& spec);

/// Writes a grid to one long-format CSV in the same layout load_grid reads.
void save_grid(const PixelGrid& grid, const std::string& path);

}  // namespace sdi
