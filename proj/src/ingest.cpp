#include "sdi/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "sdi/io.hpp"

namespace sdi {

namespace {

const char* kHeader = "pixel_id,lon,lat,year,month,variable,value";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& where) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError(where + ": bad integer '" + s + "'");
    return v;
}

struct PixelAcc {
    double lon = 0.0;
    double lat = 0.0;
    // variable -> linear month -> value
    std::map<std::string, std::map<long, double>> data;
};

}  // namespace

double svp(double tmp_celsius) {
    if (tmp_celsius <= -237.3) throw DomainError("svp: temperature at or below -237.3 C");
    return 6.1078 * std::pow(10.0, 7.5 * tmp_celsius / (tmp_celsius + 237.3));
}

double vpd(double tmp_celsius, double vap_hpa) { return svp(tmp_celsius) - vap_hpa; }

PixelGrid load_grid(const DatasetSpec& spec) {
    if (spec.files.empty()) throw ParseError("load_grid: no input files");
    if (spec.variables.empty()) throw ParseError("load_grid: no variables requested");
    for (std::size_t i = 0; i < spec.variables.size(); ++i)
        for (std::size_t j = i + 1; j < spec.variables.size(); ++j)
            if (spec.variables[i] == spec.variables[j])
                throw ParseError("load_grid: duplicate variable '" + spec.variables[i] + "'");
    if (spec.time_range && spec.time_range->first > spec.time_range->second)
        throw ParseError("load_grid: time range start is after its end");
    if (spec.bbox && (!(spec.bbox->west < spec.bbox->east) || !(spec.bbox->south < spec.bbox->north)))
        throw ParseError("load_grid: empty bounding box");

    std::map<std::string, PixelAcc> acc;
    for (const std::string& path : spec.files) {
        std::ifstream in(path);
        if (!in) throw ParseError("load_grid: cannot open '" + path + "'");
        std::string line;
        std::size_t lineno = 0;
        if (!std::getline(in, line)) throw ParseError(path + ": empty file");
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != kHeader)
            throw ParseError(path + ": bad header, expected '" + std::string(kHeader) + "'");
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::string where = path + ":" + std::to_string(lineno);
            std::vector<std::string> f = split_csv(line);
            if (f.size() != 7) throw ParseError(where + ": expected 7 fields, got " +
                                                std::to_string(f.size()));
            if (f[0].empty()) throw ParseError(where + ": empty pixel id");
            double lon = parse_number(f[1], where);
            double lat = parse_number(f[2], where);
            int year = parse_int(f[3], where);
            int month = parse_int(f[4], where);
            if (month < 1 || month > 12) throw ParseError(where + ": month outside 1..12");
            if (f[5].empty()) throw ParseError(where + ": empty variable name");
            double value = parse_number(f[6], where);

            if (spec.bbox) {
                const BoundingBox& b = *spec.bbox;
                if (!(lon >= b.west && lon < b.east && lat >= b.south && lat < b.north)) continue;
            }
            TimeStamp ts{year, month};
            if (spec.time_range && (ts < spec.time_range->first || ts > spec.time_range->second))
                continue;

            auto [it, inserted] = acc.try_emplace(f[0]);
            PixelAcc& px = it->second;
            if (inserted) {
                px.lon = lon;
                px.lat = lat;
            } else if (px.lon != lon || px.lat != lat) {
                throw ParseError(where + ": pixel '" + f[0] + "' has conflicting coordinates");
            }
            auto [vit, fresh] = px.data[f[5]].try_emplace(ts.linear(), value);
            (void)vit;
            if (!fresh)
                throw ParseError(where + ": duplicate value for pixel '" + f[0] + "' variable '" +
                                 f[5] + "' at " + to_string(ts));
        }
    }
    if (acc.empty()) throw EmptyGrid("load_grid: no rows left after filtering");

    const bool want_vpd =
        std::find(spec.variables.begin(), spec.variables.end(), "VPD") != spec.variables.end();
    for (auto& [id, px] : acc) {
        if (want_vpd && !px.data.count("VPD") && px.data.count("TMP") && px.data.count("VAP")) {
            const auto& tmp = px.data.at("TMP");
            const auto& vap = px.data.at("VAP");
            std::map<long, double> derived;
            for (const auto& [ts, t] : tmp) {
                auto it = vap.find(ts);
                if (it != vap.end()) derived.emplace(ts, vpd(t, it->second));
            }
            px.data.emplace("VPD", std::move(derived));
        }
        for (const std::string& var : spec.variables) {
            auto it = px.data.find(var);
            if (it == px.data.end() || it->second.empty())
                throw AlignmentError("load_grid: pixel '" + id + "' has no data for variable '" +
                                     var + "'");
            const auto& m = it->second;
            long prev = m.begin()->first - 1;
            for (const auto& [ts, v] : m) {
                (void)v;
                if (ts != prev + 1)
                    throw GapError("load_grid: pixel '" + id + "' variable '" + var + "' missing " +
                                   to_string(TimeStamp::from_linear(prev + 1)));
                prev = ts;
            }
        }
    }

    // All series must share one stamp vector.
    const auto& ref_px = acc.begin()->second;
    const auto& ref_map = ref_px.data.at(spec.variables.front());
    const long ref_first = ref_map.begin()->first;
    const std::size_t ref_len = ref_map.size();
    for (const auto& [id, px] : acc)
        for (const std::string& var : spec.variables) {
            const auto& m = px.data.at(var);
            if (m.begin()->first != ref_first || m.size() != ref_len)
                throw AlignmentError("load_grid: pixel '" + id + "' variable '" + var +
                                     "' does not share the common stamp range");
        }

    PixelGrid grid;
    grid.stamps = make_stamps(TimeStamp::from_linear(ref_first), ref_len);
    grid.variables = spec.variables;
    for (const auto& [id, px] : acc) {
        grid.pixels.push_back(Pixel{id, px.lon, px.lat});
        std::vector<std::vector<double>> per_var;
        for (const std::string& var : spec.variables) {
            std::vector<double> vals;
            vals.reserve(ref_len);
            for (const auto& [ts, v] : px.data.at(var)) {
                (void)ts;
                vals.push_back(v);
            }
            per_var.push_back(std::move(vals));
        }
        grid.series.push_back(std::move(per_var));
    }
    return grid;
}

void save_grid(const PixelGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_grid: cannot open '" + path + "' for writing");
    out << kHeader << "\n";
    for (std::size_t p = 0; p < grid.pixels.size(); ++p) {
        const Pixel& px = grid.pixels[p];
        for (std::size_t v = 0; v < grid.variables.size(); ++v)
            for (std::size_t k = 0; k < grid.stamps.size(); ++k)
                out << px.id << ',' << format_double(px.lon) << ',' << format_double(px.lat) << ','
                    << grid.stamps[k].year << ',' << grid.stamps[k].month << ',' << grid.variables[v]
                    << ',' << format_double(grid.series[p][v][k]) << "\n";
    }
    if (!out) throw IoError("save_grid: write failed for '" + path + "'");
}

}  // namespace sdi
