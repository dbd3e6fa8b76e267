#include "sdi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>

namespace sdi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open '" + path + "'");
    }

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    std::string expect_line() {
        std::string line;
        if (!next(line)) fail("unexpected end of file");
        return line;
    }

    /// Next line must start with `key`; returns the remaining tokens.
    std::vector<std::string> expect(const std::string& key) {
        std::vector<std::string> t = split(expect_line(), ' ');
        if (t.empty() || t[0] != key) fail("expected '" + key + "' entry");
        t.erase(t.begin());
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t lineno_ = 0;
};

std::vector<double> parse_doubles(const std::vector<std::string>& tokens, std::size_t expected,
                                  LineReader& r) {
    if (tokens.size() != expected)
        r.fail("expected " + std::to_string(expected) + " values, got " +
               std::to_string(tokens.size()));
    std::vector<double> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(parse_double(t));
    return out;
}

long parse_long(const std::string& s, LineReader& r) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) r.fail("bad integer '" + s + "'");
    return v;
}

void write_values(std::ofstream& out, const char* key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << format_double(v);
    out << '\n';
}

}  // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

double parse_double(const std::string& text) {
    if (text == "NA") return kNaN;
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    // from_chars accepts "nan"/"inf" spellings; only "NA" may stand for a
    // missing value, and finite is the contract everywhere else.
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
        throw ParseError("bad number '" + text + "'");
    return v;
}

void write_index_csv(const IndexFile& data, const std::string& path) {
    if (data.pixels.size() != data.series.size())
        throw LengthMismatch("write_index_csv: pixels and series differ in length");
    std::ofstream out(path);
    if (!out) throw IoError("write_index_csv: cannot open '" + path + "' for writing");
    out << "pixel_id,lon,lat,year,month,value,category\n";
    for (std::size_t p = 0; p < data.pixels.size(); ++p) {
        const Pixel& px = data.pixels[p];
        const IndexSeries& s = data.series[p];
        for (std::size_t k = 0; k < s.stamps.size(); ++k) {
            out << px.id << ',' << format_double(px.lon) << ',' << format_double(px.lat) << ','
                << s.stamps[k].year << ',' << s.stamps[k].month << ',';
            if (s.defined(k))
                out << format_double(s.values[k]) << ',' << to_string(classify(s.values[k]));
            else
                out << "NA,NA";
            out << '\n';
        }
    }
    if (!out) throw IoError("write_index_csv: write failed for '" + path + "'");
}

IndexFile read_index_csv(const std::string& path) {
    LineReader r(path);
    std::string line = r.expect_line();
    if (line != "pixel_id,lon,lat,year,month,value,category")
        r.fail("bad index file header");

    IndexFile out;
    while (r.next(line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != 7) r.fail("expected 7 fields");
        TimeStamp ts{0, 0};
        ts.year = static_cast<int>(parse_long(f[3], r));
        ts.month = static_cast<int>(parse_long(f[4], r));
        if (ts.month < 1 || ts.month > 12) r.fail("month outside 1..12");
        double value = kNaN;
        try {
            value = parse_double(f[5]);
        } catch (const ParseError& e) {
            r.fail(e.what());
        }
        if (out.pixels.empty() || out.pixels.back().id != f[0]) {
            try {
                out.pixels.push_back(Pixel{f[0], parse_double(f[1]), parse_double(f[2])});
            } catch (const ParseError& e) {
                r.fail(e.what());
            }
            out.series.push_back(IndexSeries{});
        }
        out.series.back().stamps.push_back(ts);
        out.series.back().values.push_back(value);
    }
    if (out.pixels.empty()) throw ParseError(path + ": no data rows");
    for (IndexSeries& s : out.series) {
        std::size_t lead = 0;
        while (lead < s.values.size() && std::isnan(s.values[lead])) ++lead;
        s.scale = static_cast<int>(lead) + 1;
    }
    return out;
}

void write_marginal_model(const MarginalModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_marginal_model: cannot open '" + path + "'");
    out << "sdi_marginal_model 1\n";
    out << "variable " << m.variable_id << '\n';
    out << "orientation " << (m.orientation == Orientation::Negative ? "negative" : "positive")
        << '\n';
    out << "p " << m.arma.p << '\n';
    out << "q " << m.arma.q << '\n';
    write_values(out, "phi", m.arma.phi);
    write_values(out, "theta", m.arma.theta);
    out << "sigma2 " << format_double(m.arma.sigma2) << '\n';
    out << "loglik " << format_double(m.arma.loglik) << '\n';
    write_values(out, "lambda", m.lambda);
    write_values(out, "month_mean", m.month_mean);
    write_values(out, "month_sd", m.month_sd);
    out << "start " << (m.stamps.empty() ? std::string("NA") : to_string(m.stamps.front())) << '\n';
    out << "T " << m.stamps.size() << '\n';
    write_values(out, "u", m.u);
    write_values(out, "z", m.z);
    if (!out) throw IoError("write_marginal_model: write failed for '" + path + "'");
}

MarginalModel read_marginal_model(const std::string& path) {
    LineReader r(path);
    if (r.expect_line() != "sdi_marginal_model 1") r.fail("not a marginal model file");
    MarginalModel m;
    auto var = r.expect("variable");
    if (var.size() != 1) r.fail("bad variable entry");
    m.variable_id = var[0];
    auto ori = r.expect("orientation");
    if (ori.size() != 1 || (ori[0] != "positive" && ori[0] != "negative"))
        r.fail("bad orientation entry");
    m.orientation = ori[0] == "negative" ? Orientation::Negative : Orientation::Positive;
    auto pt = r.expect("p");
    if (pt.size() != 1) r.fail("bad p entry");
    m.arma.p = static_cast<int>(parse_long(pt[0], r));
    auto qt = r.expect("q");
    if (qt.size() != 1) r.fail("bad q entry");
    m.arma.q = static_cast<int>(parse_long(qt[0], r));
    if (m.arma.p < 0 || m.arma.q < 0) r.fail("negative ARMA order");
    m.arma.phi = parse_doubles(r.expect("phi"), static_cast<std::size_t>(m.arma.p), r);
    m.arma.theta = parse_doubles(r.expect("theta"), static_cast<std::size_t>(m.arma.q), r);
    auto s2 = r.expect("sigma2");
    if (s2.size() != 1) r.fail("bad sigma2 entry");
    m.arma.sigma2 = parse_double(s2[0]);
    auto ll = r.expect("loglik");
    if (ll.size() != 1) r.fail("bad loglik entry");
    m.arma.loglik = parse_double(ll[0]);
    auto lam = parse_doubles(r.expect("lambda"), 12, r);
    auto mm = parse_doubles(r.expect("month_mean"), 12, r);
    auto ms = parse_doubles(r.expect("month_sd"), 12, r);
    std::copy(lam.begin(), lam.end(), m.lambda.begin());
    std::copy(mm.begin(), mm.end(), m.month_mean.begin());
    std::copy(ms.begin(), ms.end(), m.month_sd.begin());
    auto st = r.expect("start");
    if (st.size() != 1) r.fail("bad start entry");
    auto tt = r.expect("T");
    if (tt.size() != 1) r.fail("bad T entry");
    long t_len = parse_long(tt[0], r);
    if (t_len < 0) r.fail("negative T");
    if (t_len > 0) {
        TimeStamp start;
        try {
            start = parse_time_stamp(st[0]);
        } catch (const ParseError& e) {
            r.fail(e.what());
        }
        m.stamps = make_stamps(start, static_cast<std::size_t>(t_len));
    }
    m.u = parse_doubles(r.expect("u"), static_cast<std::size_t>(t_len), r);
    m.z = parse_doubles(r.expect("z"), static_cast<std::size_t>(t_len), r);
    return m;
}

void write_vine_model(const VineModel& m, const std::string& path) {
    if (m.copulas.size() != m.structure.edges().size())
        throw LengthMismatch("write_vine_model: model has wrong number of pair copulas");
    std::ofstream out(path);
    if (!out) throw IoError("write_vine_model: cannot open '" + path + "'");
    const int d = m.structure.dim();
    out << "sdi_vine_model 1\n";
    out << "d " << d << '\n';
    out << "names " << m.variable_names.size();
    for (const auto& n : m.variable_names) out << ' ' << n;
    out << '\n';
    out << "matrix\n";
    for (int i = 1; i <= d; ++i) {
        for (int j = 1; j <= d; ++j) out << (j > 1 ? " " : "") << m.structure.at(i, j);
        out << '\n';
    }
    out << "edges " << m.copulas.size() << '\n';
    const auto& edges = m.structure.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        out << "edge " << edges[i].tree << ' ' << edges[i].column << ' '
            << to_string(m.copulas[i].tag) << ' ' << m.copulas[i].parameters.size();
        for (double p : m.copulas[i].parameters) out << ' ' << format_double(p);
        out << '\n';
    }
    if (!out) throw IoError("write_vine_model: write failed for '" + path + "'");
}

VineModel read_vine_model(const std::string& path) {
    LineReader r(path);
    if (r.expect_line() != "sdi_vine_model 1") r.fail("not a vine model file");
    auto dt = r.expect("d");
    if (dt.size() != 1) r.fail("bad d entry");
    long d = parse_long(dt[0], r);
    if (d < 1 || d > 10000) r.fail("implausible dimension");
    auto names = r.expect("names");
    if (names.empty()) r.fail("bad names entry");
    long n_names = parse_long(names[0], r);
    if (n_names != static_cast<long>(names.size()) - 1 || (n_names != 0 && n_names != d))
        r.fail("bad names entry");
    if (r.expect_line() != "matrix") r.fail("expected 'matrix'");
    std::vector<std::vector<int>> rows;
    for (long i = 0; i < d; ++i) {
        std::vector<std::string> t = split(r.expect_line(), ' ');
        if (static_cast<long>(t.size()) != d) r.fail("matrix row has wrong length");
        std::vector<int> row;
        for (const auto& s : t) row.push_back(static_cast<int>(parse_long(s, r)));
        rows.push_back(std::move(row));
    }
    VineModel m{RVineMatrix(std::move(rows)), {}, {}};
    for (std::size_t i = 1; i < names.size(); ++i) m.variable_names.push_back(names[i]);

    auto et = r.expect("edges");
    if (et.size() != 1) r.fail("bad edges entry");
    long n_edges = parse_long(et[0], r);
    if (n_edges != static_cast<long>(m.structure.edges().size()))
        r.fail("edge count does not match the structure");
    for (long i = 0; i < n_edges; ++i) {
        auto t = r.expect("edge");
        if (t.size() < 4) r.fail("bad edge entry");
        const VineEdge& e = m.structure.edges()[static_cast<std::size_t>(i)];
        if (parse_long(t[0], r) != e.tree || parse_long(t[1], r) != e.column)
            r.fail("edge order does not match the structure");
        FamilyTag tag;
        try {
            tag = parse_family_tag(t[2]);
        } catch (const ParseError& ex) {
            r.fail(ex.what());
        }
        long k = parse_long(t[3], r);
        if (k < 0 || static_cast<long>(t.size()) != 4 + k) r.fail("bad edge parameter count");
        std::vector<double> params;
        for (long j = 0; j < k; ++j) params.push_back(parse_double(t[static_cast<std::size_t>(4 + j)]));
        try {
            m.copulas.push_back(make_pair_copula(tag, std::move(params)));
        } catch (const DomainError& ex) {
            r.fail(ex.what());
        }
    }
    return m;
}

}  // namespace sdi
