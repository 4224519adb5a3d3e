// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/rng.hpp"
#include "opclt/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace opclt;

namespace {

// Simpson integration of the density from 0 to z.
double cdf_oracle(double z)
{
    const int intervals = 20000;
    const double h = z / intervals;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * std::numbers::pi); };
    double s = pdf(0) + pdf(z);
    for (int i = 1; i < intervals; ++i)
        s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
    return 0.5 + s * h / 3.0;
}

std::vector<double> normals(std::uint64_t seed, std::uint64_t stream, int count, double sigma = 1.0)
{
    RngStream rng(seed, stream);
    std::vector<double> v(count);
    for (auto& x : v)
        x = sigma * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("normal_cdf")
{
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(40.0) == 1.0);
    CHECK(normal_cdf(-40.0) >= 0.0);
    CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-9));
    for (double z : {0.1, 0.5, 1.0, 2.0, 3.5})
        CHECK(std::abs(normal_cdf(z) - cdf_oracle(z)) <= 1e-12);
    for (double z : {0.3, 1.7, 4.0})
        CHECK(normal_cdf(-z) == doctest::Approx(1.0 - normal_cdf(z)).epsilon(1e-15));
}

TEST_CASE("ks_test examples and invariances")
{
    const std::vector<double> zeros(100, 0.0);
    CHECK(ks_test(zeros, 1.0).distance == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ks_test(zeros, 1.0).threshold == doctest::Approx(kKsCritical01 / 10.0));

    const auto xs = normals(1, 1, 5000);
    std::vector<double> mirror(xs.size());
    std::transform(xs.begin(), xs.end(), mirror.begin(), [](double x) { return -x; });
    CHECK(ks_test(mirror, 1.0).distance == doctest::Approx(ks_test(xs, 1.0).distance).epsilon(1e-12));

    std::vector<double> scaled(xs.size());
    std::transform(xs.begin(), xs.end(), scaled.begin(), [](double x) { return 3.0 * x; });
    CHECK(ks_test(scaled, 9.0).distance == doctest::Approx(ks_test(xs, 1.0).distance).epsilon(1e-12));

    // Order does not matter.
    std::vector<double> shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(5));
    CHECK(ks_test(shuffled, 1.0).distance == ks_test(xs, 1.0).distance);

    CHECK_THROWS_AS(ks_test(xs, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ks_test(xs, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(ks_test(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("ks_test against an exact two-point sample")
{
    // Samples {-1, 1}: the sup is at x -> 1 from below, |1/2 - Phi(1)| vs |1 - Phi(1)|.
    const std::vector<double> v = {-1.0, 1.0};
    const double want = std::max({normal_cdf(-1.0), 0.5 - normal_cdf(-1.0),
                                  normal_cdf(1.0) - 0.5, 1.0 - normal_cdf(1.0)});
    CHECK(ks_test(v, 1.0).distance == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("ks self-test rejects at most about 1% of true-null samples")
{
    int passed = 0;
    for (int run = 0; run < 100; ++run)
        passed += ks_test(normals(2, run, 100000, 2.0), 4.0).passed();
    CHECK(passed >= 95);

    // A 10% variance error at this sample size is detected.
    CHECK_FALSE(ks_test(normals(3, 0, 100000, std::sqrt(1.1)), 1.0).passed());
}

TEST_CASE("summarize")
{
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    const SampleStatistics s = summarize(v, 0.0);
    CHECK(s.count == 4);
    CHECK(s.mean == 2.5);
    CHECK(s.variance == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(s.skewness == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(s.excess_kurtosis == doctest::Approx(-1.36).epsilon(1e-12));
    CHECK(s.ks_distance == 0.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 4.0);

    const std::vector<double> skewed = {0.0, 0.0, 0.0, 1.0};
    CHECK(summarize(skewed, 0.0).skewness == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(summarize(std::vector<double>{1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("summarize on a million normals")
{
    const auto xs = normals(4, 4, 1000000);
    const SampleStatistics s = summarize(xs, 1.0);
    const double n = 1e6;
    CHECK(std::abs(s.mean) <= 4 / std::sqrt(n));
    CHECK(std::abs(s.variance - 1) <= 4 * std::sqrt(2 / n));
    CHECK(std::abs(s.skewness) <= 4 * std::sqrt(6 / n));
    CHECK(std::abs(s.excess_kurtosis) <= 4 * std::sqrt(24 / n));
    CHECK(s.ks_distance == ks_test(xs, 1.0).distance);

    std::vector<double> shuffled = xs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(9));
    const SampleStatistics t = summarize(shuffled, 1.0);
    CHECK(t.mean == doctest::Approx(s.mean).scale(1.0).epsilon(1e-12));
    CHECK(t.variance == doctest::Approx(s.variance).epsilon(1e-12));
    CHECK(t.skewness == doctest::Approx(s.skewness).scale(1.0).epsilon(1e-9));
    CHECK(t.excess_kurtosis == doctest::Approx(s.excess_kurtosis).scale(1.0).epsilon(1e-9));
    CHECK(t.ks_distance == s.ks_distance);
}

TEST_CASE("quantile")
{
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.9) == doctest::Approx(4.6));
    CHECK(quantile({7.0}, 0.3) == 7.0);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("fit_slope")
{
    for (double c : {-2.0, -1.0, -0.5, 0.0, 1.5}) {
        std::vector<std::pair<double, double>> pts;
        for (double n = 16; n <= 4096; n *= 2)
            pts.emplace_back(n, 3.0 * std::pow(n, c));
        const SlopeFit f = fit_slope(pts);
        CHECK(std::abs(f.slope - c) <= 1e-12);
        CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        CHECK(f.r_squared == doctest::Approx(1.0));
        CHECK(f.excluded == 0);
    }

    std::vector<std::pair<double, double>> noisy;
    for (double n = 16; n <= 4096; n *= 2)
        noisy.emplace_back(n, std::pow(n, -1.0) * (1 + 0.1 * std::sin(n)));
    CHECK(std::abs(fit_slope(noisy).slope + 1) <= 0.1);

    std::vector<std::pair<double, double>> with_zero = {{16, 1.0 / 16}, {32, 0.0}, {64, 1.0 / 64},
                                                        {128, 1.0 / 128}};
    const SlopeFit z = fit_slope(with_zero);
    CHECK(z.excluded == 1);
    CHECK(z.points.size() == 3);
    CHECK(z.slope == doctest::Approx(-1.0).epsilon(1e-12));

    const std::vector<std::pair<double, double>> two = {{16, 1.0}, {32, 2.0}};
    CHECK_THROWS_AS(fit_slope(two), std::invalid_argument);
    const std::vector<std::pair<double, double>> zeros = {{16, 0.0}, {32, 0.0}, {64, 0.0}};
    CHECK_THROWS_AS(fit_slope(zeros), std::invalid_argument);
}
