#include "sdi/analytics.hpp"

#include <cmath>
#include <limits>

#include "sdi/copula.hpp"

namespace sdi {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_aligned(std::span<const IndexSeries> pixels, const char* op) {
    if (pixels.empty()) throw EmptyGrid(std::string(op) + ": no pixels");
    const auto& ref = pixels.front();
    for (const auto& p : pixels) {
        if (p.stamps != ref.stamps)
            throw AlignmentError(std::string(op) + ": pixel series are not aligned");
        if (p.values.size() != p.stamps.size())
            throw LengthMismatch(std::string(op) + ": stamps and values differ in length");
    }
}
}  // namespace

AreaSeries area_affected(std::span<const IndexSeries> pixels, const std::set<Category>& categories) {
    check_aligned(pixels, "area_affected");
    const auto& stamps = pixels.front().stamps;
    AreaSeries out;
    out.stamps = stamps;
    out.fraction.assign(stamps.size(), kNaN);
    for (std::size_t k = 0; k < stamps.size(); ++k) {
        std::size_t defined = 0, hit = 0;
        for (const auto& p : pixels) {
            if (!p.defined(k)) continue;
            ++defined;
            if (categories.count(classify(p.values[k]))) ++hit;
        }
        if (defined > 0)
            out.fraction[k] = static_cast<double>(hit) / static_cast<double>(defined);
    }
    return out;
}

PeakExtent peak_extent(const AreaSeries& area, TimeStamp start, TimeStamp end) {
    if (start > end) throw EmptyWindow("peak_extent: window start is after its end");
    bool any = false;
    PeakExtent best;
    for (std::size_t k = 0; k < area.stamps.size(); ++k) {
        const TimeStamp& ts = area.stamps[k];
        if (ts < start || ts > end) continue;
        if (!std::isfinite(area.fraction[k])) continue;
        if (!any || area.fraction[k] > best.fraction) {
            any = true;
            best.stamp = ts;
            best.fraction = area.fraction[k];
        }
    }
    if (!any) throw EmptyWindow("peak_extent: no defined area value inside the window");
    return best;
}

std::vector<double> tau_map(std::span<const IndexSeries> a, std::span<const IndexSeries> b) {
    if (a.size() != b.size()) throw LengthMismatch("tau_map: pixel counts differ");
    check_aligned(a, "tau_map");
    check_aligned(b, "tau_map");
    if (a.front().stamps != b.front().stamps)
        throw AlignmentError("tau_map: the two index grids are not aligned");

    std::vector<double> out(a.size(), kNaN);
    for (std::size_t p = 0; p < a.size(); ++p) {
        std::vector<double> xa, xb;
        for (std::size_t k = 0; k < a[p].values.size(); ++k) {
            if (a[p].defined(k) && b[p].defined(k)) {
                xa.push_back(a[p].values[k]);
                xb.push_back(b[p].values[k]);
            }
        }
        if (xa.size() < 2) continue;  // NoOverlap: cell stays NaN
        try {
            out[p] = empirical_kendall_tau(xa, xb);
        } catch (const ConstantSample&) {
            // degenerate margin: leave the cell undefined
        }
    }
    return out;
}

}  // namespace sdi
