#include "sdi/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdi/marginal.hpp"
#include "sdi/stats.hpp"

namespace sdi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_weights(std::span<const double> weights, std::size_t d) {
    if (weights.size() != d)
        throw BadWeights("expected " + std::to_string(d) + " weights, got " +
                         std::to_string(weights.size()));
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw BadWeights("weights must be positive and finite");
}

void check_scale(int l, std::size_t t_len) {
    if (l < 1 || static_cast<std::size_t>(l) > t_len)
        throw BadScale("time scale must lie in 1..T (got " + std::to_string(l) + ")");
}

void check_stamps(std::span<const TimeStamp> stamps, std::size_t t_len) {
    if (stamps.size() != t_len)
        throw LengthMismatch("stamp vector does not match data length");
}

IndexSeries aggregate(std::span<const TimeStamp> stamps, std::span<const double> score, int l,
                      double denom) {
    IndexSeries out;
    out.stamps.assign(stamps.begin(), stamps.end());
    out.scale = l;
    out.values.assign(score.size(), kNaN);
    for (std::size_t k = static_cast<std::size_t>(l) - 1; k < score.size(); ++k) {
        double s = 0.0;
        for (int j = 0; j < l; ++j) s += score[k - static_cast<std::size_t>(j)];
        out.values[k] = s / denom;
    }
    return out;
}

}  // namespace

std::string to_string(Category c) {
    switch (c) {
        case Category::D4:
            return "D4";
        case Category::D3:
            return "D3";
        case Category::D2:
            return "D2";
        case Category::D1:
            return "D1";
        case Category::D0:
            return "D0";
        case Category::Normal:
            return "Normal";
        case Category::W0:
            return "W0";
        case Category::W1:
            return "W1";
        case Category::W2:
            return "W2";
        case Category::W3:
            return "W3";
        case Category::W4:
            return "W4";
    }
    return "?";
}

Category parse_category(const std::string& text) {
    for (int c = static_cast<int>(Category::D4); c <= static_cast<int>(Category::W4); ++c)
        if (to_string(static_cast<Category>(c)) == text) return static_cast<Category>(c);
    throw ParseError("unknown category '" + text + "'");
}

Category classify(double value) {
    if (!std::isfinite(value)) throw DomainError("classify: value must be finite");
    if (value <= -2.05) return Category::D4;
    if (value <= -1.64) return Category::D3;
    if (value <= -1.28) return Category::D2;
    if (value <= -0.84) return Category::D1;
    if (value <= -0.52) return Category::D0;
    if (value <= 0.52) return Category::Normal;
    if (value <= 0.84) return Category::W0;
    if (value <= 1.28) return Category::W1;
    if (value <= 1.64) return Category::W2;
    if (value <= 2.05) return Category::W3;
    return Category::W4;
}

bool IndexSeries::defined(std::size_t k) const {
    return k < values.size() && std::isfinite(values[k]);
}

IndexSeries si(std::span<const TimeStamp> stamps, std::span<const double> z, int l) {
    check_scale(l, z.size());
    check_stamps(stamps, z.size());
    for (double v : z)
        if (!std::isfinite(v)) throw DomainError("si: z values must be finite");
    return aggregate(stamps, z, l, std::sqrt(static_cast<double>(l)));
}

IndexSeries smi_a(std::span<const TimeStamp> stamps, const RosenblattData& data,
                  std::span<const double> weights, int l) {
    const std::size_t d = data.values.cols();
    const std::size_t t_len = data.values.rows();
    if (d == 0 || t_len == 0) throw TooFewPoints("smi_a: empty data");
    check_weights(weights, d);
    check_scale(l, t_len);
    check_stamps(stamps, t_len);

    double wtw = 0.0;
    for (double w : weights) wtw += w * w;

    std::vector<double> score(t_len, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& col = data.values.column(j);
        for (std::size_t k = 0; k < t_len; ++k) {
            if (!(col[k] > 0.0 && col[k] < 1.0))
                throw OutOfRange("smi_a: data outside (0,1)");
            score[k] += weights[j] * normal_quantile(col[k]);
        }
    }
    return aggregate(stamps, score, l, std::sqrt(static_cast<double>(l) * wtw));
}

IndexSeries smi_m(std::span<const TimeStamp> stamps, const RosenblattData& data, int l) {
    const std::size_t d = data.values.cols();
    const std::size_t t_len = data.values.rows();
    if (d == 0 || t_len == 0) throw TooFewPoints("smi_m: empty data");
    check_scale(l, t_len);
    check_stamps(stamps, t_len);

    std::vector<double> prod(t_len, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& col = data.values.column(j);
        for (std::size_t k = 0; k < t_len; ++k) {
            if (!(col[k] > 0.0 && col[k] < 1.0))
                throw OutOfRange("smi_m: data outside (0,1)");
            prod[k] *= col[k];
        }
    }
    std::vector<double> u = empirical_pit(prod);
    std::vector<double> z = to_zscale(u);
    return aggregate(stamps, z, l, std::sqrt(static_cast<double>(l)));
}

IndexSeries smi_n(std::span<const TimeStamp> stamps, const CopulaData& data,
                  std::span<const double> weights, int l) {
    const std::size_t d = data.values.cols();
    const std::size_t t_len = data.values.rows();
    if (d == 0 || t_len == 0) throw TooFewPoints("smi_n: empty data");
    if (t_len < 2) throw TooFewPoints("smi_n: need at least 2 rows");
    check_weights(weights, d);
    check_scale(l, t_len);
    check_stamps(stamps, t_len);

    std::vector<double> score(t_len, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& col = data.values.column(j);
        for (std::size_t k = 0; k < t_len; ++k) {
            if (!(col[k] > 0.0 && col[k] < 1.0))
                throw OutOfRange("smi_n: data outside (0,1)");
            score[k] += weights[j] * normal_quantile(col[k]);
        }
    }
    double s2 = 0.0;
    for (double s : score) s2 += s * s;
    s2 /= static_cast<double>(t_len - 1);
    if (s2 < 1e-12) throw DegenerateVariance("smi_n: row-sum variance is degenerate");
    return aggregate(stamps, score, l, std::sqrt(static_cast<double>(l) * s2));
}

}  // namespace sdi
