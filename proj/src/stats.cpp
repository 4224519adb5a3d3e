// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace opclt {

double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

KsResult ks_test(std::span<const double> samples, double sigma2)
{
    if (samples.empty())
        throw std::invalid_argument("ks_test: no samples");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("ks_test: reference variance must be positive");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double sigma = std::sqrt(sigma2);
    const double count = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i] / sigma);
        d = std::max({d, (i + 1) / count - f, f - i / count});
    }
    return {d, kKsCritical01 / std::sqrt(count)};
}

SampleStatistics summarize(std::span<const double> samples, double sigma2_ref)
{
    if (samples.size() < 2)
        throw std::invalid_argument("summarize: need at least two samples");
    // Central moments updated per sample (Terriberry's extension of Welford).
    double n = 0, mean = 0, m2 = 0, m3 = 0, m4 = 0;
    SampleStatistics s;
    s.min = samples.front();
    s.max = samples.front();
    for (double x : samples) {
        const double n1 = n;
        n += 1.0;
        const double delta = x - mean;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean += delta_n;
        m4 += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2 - 4 * delta_n * m3;
        m3 += term1 * delta_n * (n - 2) - 3 * delta_n * m2;
        m2 += term1;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.count = static_cast<long>(n);
    s.mean = mean;
    s.variance = m2 / (n - 1.0);
    if (m2 > 0.0) {
        s.skewness = std::sqrt(n) * m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = n * m4 / (m2 * m2) - 3.0;
    }
    if (sigma2_ref > 0.0)
        s.ks_distance = ks_test(samples, sigma2_ref).distance;
    return s;
}

double quantile(std::vector<double> samples, double q)
{
    if (samples.empty())
        throw std::invalid_argument("quantile: no samples");
    std::sort(samples.begin(), samples.end());
    const double pos = q * (samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    const double frac = pos - lo;
    return samples[lo] + frac * (samples[hi] - samples[lo]);
}

double median(std::vector<double> samples)
{
    return quantile(std::move(samples), 0.5);
}

SlopeFit fit_slope(std::span<const std::pair<double, double>> points)
{
    SlopeFit fit;
    for (const auto& [n, value] : points) {
        if (n > 0.0 && value > 0.0 && std::isfinite(value))
            fit.points.emplace_back(std::log(n), std::log(value));
        else
            ++fit.excluded;
    }
    if (fit.points.size() < 3)
        throw std::invalid_argument("fit_slope: fewer than 3 positive points");
    const double m = static_cast<double>(fit.points.size());
    double sx = 0, sy = 0;
    for (const auto& [lx, ly] : fit.points) {
        sx += lx;
        sy += ly;
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [lx, ly] : fit.points) {
        sxx += (lx - mx) * (lx - mx);
        sxy += (lx - mx) * (ly - my);
        syy += (ly - my) * (ly - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("fit_slope: abscissae are all equal");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return fit;
}

}  // namespace opclt
