// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "opclt/config.hpp"
#include "opclt/csv.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace opclt {

inline constexpr const char* kVersion = "0.1.0";

/// Pass/fail thresholds. All slopes are log-log OLS slopes over the n-grid.
namespace tolerance {
inline constexpr double kLemmaOuterSlope = -1.0, kLemmaOuterBand = 0.1;
inline constexpr double kLemmaInnerSlope = -2.0, kLemmaInnerBand = 0.1;
inline constexpr double kRemainderSlope = -0.5, kRemainderBand = 0.2;
inline constexpr double kDiffSqSlope = -2.0, kDiffSqBand = 0.3;
inline constexpr double kMnSqSlope = -1.0, kMnSqBand = 0.25;
inline constexpr double kMnSlope = -0.5, kMnBand = 0.2;
inline constexpr double kRiemannSlope = -1.0, kRiemannBand = 0.2;
inline constexpr double kApproxQuantileMaxSlope = -0.4;
inline constexpr double kZeroMeanSigmas = 4.0;
inline constexpr double kRouteAgreement = 1e-10;
inline constexpr double kDoublingStability = 1e-12;
inline constexpr double kShiftCovariance = 1e-10;
inline constexpr double kDoobIdentity = 1e-10;
inline constexpr double kDegenerateScale = 1e-11;  // |xi| <= sqrt(n) e^rho * this
inline constexpr double kBoundSlack = 1e-12;       // rounding allowance on norm bounds
}  // namespace tolerance

struct SuiteReport {
    std::string name;
    bool passed = false;
    std::string status;               // "pass", "fail" or "error"
    nlohmann::json measurements = nlohmann::json::object();
    nlohmann::json checks = nlohmann::json::array();  // {name, value, target, passed}
    std::vector<std::string> notes;
    std::vector<std::string> csv_files;
    double seconds = 0;
    Table table;

    void check(const std::string& what, const nlohmann::json& value, const std::string& target,
               bool ok);
};

struct RunReport {
    std::string version = kVersion;
    std::string config_digest;
    double norm_bound = 0;
    std::vector<SuiteReport> suites;

    bool all_passed() const;
    const SuiteReport* find(const std::string& name) const;
    nlohmann::json to_json() const;
};

struct RunOptions {
    int workers = 1;
    bool write_files = true;
};

/// Runs every requested suite. Suite failures are recorded, not thrown; only
/// I/O errors on the output directory propagate.
RunReport run(const ExperimentConfig& config, const RunOptions& opts);

/// Suite entry points, usable without writing files.
SuiteReport run_clt_suite(const ExperimentConfig& config, int workers);
SuiteReport run_lemma_speed_suite(const ExperimentConfig& config);
SuiteReport run_martingale_suite(const ExperimentConfig& config, int workers);
SuiteReport run_doob_suite(const ExperimentConfig& config);
SuiteReport run_covariance_suite(const ExperimentConfig& config);

}  // namespace opclt
