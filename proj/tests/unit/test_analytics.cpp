#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sdi/analytics.hpp"
#include "sdi/errors.hpp"

using namespace sdi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

IndexSeries make_series(std::vector<double> values, int scale = 1) {
    IndexSeries s;
    s.stamps = make_stamps({1976, 1}, values.size());
    s.values = std::move(values);
    s.scale = scale;
    return s;
}

const std::set<Category> kDrought{Category::D3, Category::D4};

}  // namespace

TEST_CASE("area fraction counts pixels in the requested categories") {
    std::vector<IndexSeries> pixels;
    //            Jan    Feb    Mar   Apr
    pixels.push_back(make_series({0.0, -2.0, -2.0, -1.0}));
    pixels.push_back(make_series({0.0, -1.7, -2.2, 0.3}));
    pixels.push_back(make_series({0.1, 0.0, -1.9, 1.4}));
    pixels.push_back(make_series({-0.2, 0.4, -2.5, -0.3}));

    auto area = area_affected(pixels, kDrought);
    REQUIRE(area.fraction.size() == 4);
    CHECK(area.fraction[0] == doctest::Approx(0.0));
    CHECK(area.fraction[1] == doctest::Approx(0.5));
    CHECK(area.fraction[2] == doctest::Approx(1.0));
    CHECK(area.fraction[3] == doctest::Approx(0.0));
}

TEST_CASE("the boundary value -1.64 counts as extreme drought") {
    std::vector<IndexSeries> pixels{make_series({-1.64}), make_series({-1.64})};
    auto area = area_affected(pixels, kDrought);
    CHECK(area.fraction[0] == doctest::Approx(1.0));
    // One ulp wetter and the pixel drops out of D3.
    std::vector<IndexSeries> wetter{make_series({std::nextafter(-1.64, 0.0)})};
    CHECK(area_affected(wetter, kDrought).fraction[0] == doctest::Approx(0.0));
}

TEST_CASE("undefined pixels leave both numerator and denominator") {
    std::vector<IndexSeries> pixels;
    pixels.push_back(make_series({kNaN, -2.0, -2.0}, 2));
    pixels.push_back(make_series({-2.0, 0.0, -2.0}));
    pixels.push_back(make_series({0.0, 0.0, 0.0}));

    auto area = area_affected(pixels, kDrought);
    // Stamp 0: the first pixel is undefined, one of the two remaining breaches.
    CHECK(area.fraction[0] == doctest::Approx(0.5));
    CHECK(area.fraction[1] == doctest::Approx(1.0 / 3.0));
    CHECK(area.fraction[2] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("a stamp with no defined pixel yields an undefined fraction") {
    std::vector<IndexSeries> pixels{make_series({kNaN, -2.0}, 2), make_series({kNaN, 0.0}, 2)};
    auto area = area_affected(pixels, kDrought);
    CHECK(std::isnan(area.fraction[0]));
    CHECK(area.fraction[1] == doctest::Approx(0.5));
}

TEST_CASE("area alignment validation") {
    CHECK_THROWS_AS(area_affected(std::vector<IndexSeries>{}, kDrought), EmptyGrid);
    std::vector<IndexSeries> misaligned{make_series({0.0, 0.0})};
    IndexSeries other;
    other.stamps = make_stamps({1980, 1}, 2);
    other.values = {0.0, 0.0};
    misaligned.push_back(other);
    CHECK_THROWS_AS(area_affected(misaligned, kDrought), AlignmentError);
}

TEST_CASE("peak extent finds the argmax and keeps the earliest tie") {
    AreaSeries area;
    area.stamps = make_stamps({1976, 1}, 5);
    area.fraction = {0.1, 0.4, 0.3, 0.4, 0.2};

    auto peak = peak_extent(area, {1976, 1}, {1976, 3});
    CHECK(peak.stamp == TimeStamp{1976, 2});
    CHECK(peak.fraction == doctest::Approx(0.4));

    // Ties across the full window resolve to the earliest stamp.
    auto tie = peak_extent(area, {1976, 1}, {1976, 5});
    CHECK(tie.stamp == TimeStamp{1976, 2});

    AreaSeries flat;
    flat.stamps = make_stamps({1976, 1}, 3);
    flat.fraction = {0.25, 0.25, 0.25};
    CHECK(peak_extent(flat, {1976, 1}, {1976, 3}).stamp == TimeStamp{1976, 1});
}

TEST_CASE("peak extent window handling") {
    AreaSeries area;
    area.stamps = make_stamps({1976, 1}, 3);
    area.fraction = {kNaN, 0.2, 0.3};

    // The window is inclusive on both ends.
    auto only_feb = peak_extent(area, {1976, 2}, {1976, 2});
    CHECK(only_feb.fraction == doctest::Approx(0.2));

    CHECK_THROWS_AS(peak_extent(area, {1975, 1}, {1975, 12}), EmptyWindow);
    CHECK_THROWS_AS(peak_extent(area, {1976, 1}, {1976, 1}), EmptyWindow);  // only NaN inside
    CHECK_THROWS_AS(peak_extent(area, {1976, 3}, {1976, 1}), EmptyWindow);  // inverted
}

TEST_CASE("tau map on exact dependence patterns") {
    std::vector<IndexSeries> a{make_series({0.1, 0.5, -0.3, 0.9}),
                               make_series({1.0, 2.0, 3.0, 4.0})};
    std::vector<IndexSeries> same = a;
    auto ones = tau_map(a, same);
    CHECK(ones[0] == doctest::Approx(1.0));
    CHECK(ones[1] == doctest::Approx(1.0));

    std::vector<IndexSeries> negated = a;
    for (auto& s : negated)
        for (auto& v : s.values) v = -v;
    auto minus = tau_map(a, negated);
    CHECK(minus[0] == doctest::Approx(-1.0));
    CHECK(minus[1] == doctest::Approx(-1.0));
}

TEST_CASE("tau map restricts to jointly defined stamps") {
    // Joint support is {2,3}: two points, concordant.
    std::vector<IndexSeries> a{make_series({kNaN, 0.3, 0.1, 0.9}, 2)};
    std::vector<IndexSeries> b{make_series({kNaN, kNaN, 0.2, 0.5}, 3)};
    auto tau = tau_map(a, b);
    CHECK(tau[0] == doctest::Approx(1.0));

    // Only one joint stamp: undefined.
    std::vector<IndexSeries> c{make_series({kNaN, kNaN, kNaN, 0.5}, 4)};
    CHECK(std::isnan(tau_map(a, c)[0]));

    // A constant margin is undefined as well.
    std::vector<IndexSeries> flat{make_series({0.7, 0.7, 0.7, 0.7})};
    CHECK(std::isnan(tau_map(a, flat)[0]));
}

TEST_CASE("tau map validation") {
    std::vector<IndexSeries> a{make_series({0.1, 0.2})};
    std::vector<IndexSeries> two{make_series({0.1, 0.2}), make_series({0.3, 0.4})};
    CHECK_THROWS_AS(tau_map(a, two), LengthMismatch);

    IndexSeries other;
    other.stamps = make_stamps({1990, 1}, 2);
    other.values = {0.0, 0.1};
    std::vector<IndexSeries> b{other};
    CHECK_THROWS_AS(tau_map(a, b), AlignmentError);
}
