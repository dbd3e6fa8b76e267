#pragma once

#include <string>
#include <vector>

#include "sdi/core.hpp"
#include "sdi/index.hpp"
#include "sdi/marginal.hpp"
#include "sdi/vine.hpp"

namespace sdi {

/// Shortest decimal form that round-trips to the same double; locale
/// independent. Non-finite values render as "NA".
std::string format_double(double v);

/// Inverse of format_double ("NA" yields NaN; anything else must be a
/// finite number).
double parse_double(const std::string& text);

/// Per-pixel index series keyed by pixel metadata; the on-disk format is
/// `pixel_id,lon,lat,year,month,value,category` with NA for undefined rows.
struct IndexFile {
    std::vector<Pixel> pixels;
    std::vector<IndexSeries> series;  // aligned with pixels
};

void write_index_csv(const IndexFile& data, const std::string& path);
IndexFile read_index_csv(const std::string& path);

// Model persistence as structured text. A marginal file carries the fitted
// transform stages plus the u/z series, so indices at further time scales
// can be computed without refitting.
void write_marginal_model(const MarginalModel& model, const std::string& path);
MarginalModel read_marginal_model(const std::string& path);

void write_vine_model(const VineModel& model, const std::string& path);
VineModel read_vine_model(const std::string& path);

}  // namespace sdi
