// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

namespace opclt {

/// Asymptotic Kolmogorov-Smirnov critical constant at alpha = 0.01.
inline constexpr double kKsCritical01 = 1.628;

double normal_cdf(double z);

struct KsResult {
    double distance = 0;
    double threshold = 0;  // kKsCritical01 / sqrt(count)
    bool passed() const { return distance < threshold; }
};

/// One-sample KS test against N(0, sigma2); sigma2 must be positive.
KsResult ks_test(std::span<const double> samples, double sigma2);

struct SampleStatistics {
    long count = 0;
    double mean = 0;
    double variance = 0;  // unbiased
    double skewness = 0;
    double excess_kurtosis = 0;
    double ks_distance = 0;  // vs N(0, sigma2_ref); 0 when sigma2_ref <= 0
    double min = 0;
    double max = 0;
};

/// One-pass moments; KS against N(0, sigma2_ref) when sigma2_ref > 0.
SampleStatistics summarize(std::span<const double> samples, double sigma2_ref);

/// Empirical q-quantile with linear interpolation between order statistics.
double quantile(std::vector<double> samples, double q);
double median(std::vector<double> samples);

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    std::vector<std::pair<double, double>> points;  // (log n, log value)
    int excluded = 0;                               // non-positive values dropped
};

/// OLS on log-log axes over the positive-valued points.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

}  // namespace opclt
