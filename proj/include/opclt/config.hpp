// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration. The file is JSON (comments allowed):
//
//   {
//     "ensemble": {"family": "two_point", "dim": 1, "a0": [[0]], "a1": [[1]], "p": 0.5},
//     "probes": "canonical",          // or {"x": [...], "y": [...]} or a list of those
//     "n_grid": [16, 32, 64],
//     "replicates": 1000,
//     "master_seed": 42,
//     "suites": ["clt", "lemma_speed", "martingale", "doob", "covariance"],
//     "output_dir": "out",
//     "options": {"clt_variance_tolerance": 0.05, "doob_k_max": 10,
//                 "martingale_mean_draws": 100000, "lindeberg_epsilon": 0.1}
//   }
//
// Families and their parameters:
//   two_point         a0, a1 (row-major nested arrays), p = P(a0)
//   finite_support    support (list of matrices), probabilities
//   diagonal_uniform  lo, hi
//   deterministic     matrix
//
// A probe given as the string "canonical" is e_1 for x and e_2 for y (e_1 when dim = 1).
#pragma once

#include "opclt/ensemble.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opclt {

inline const std::vector<std::string> kSuiteNames = {"clt", "lemma_speed", "martingale", "doob",
                                                     "covariance"};

/// Raised with every problem found, not just the first.
class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

  private:
    std::vector<std::string> problems_;
};

struct ProbePair {
    Vec x;
    Vec y;
};

struct ExperimentConfig {
    nlohmann::json ensemble_spec;  // as given, for the digest
    std::optional<Ensemble> ensemble;
    std::vector<ProbePair> probes;
    std::vector<int> n_grid;
    int replicates = 0;
    std::uint64_t master_seed = 0;
    std::vector<std::string> suites;
    std::filesystem::path output_dir = "opclt_out";

    double clt_variance_tolerance = 0.05;
    int doob_k_max = 10;
    long martingale_mean_draws = 100000;
    double lindeberg_epsilon = 0.1;

    const Ensemble& ens() const { return ensemble.value(); }
    bool runs(const std::string& suite) const;

    /// Canonical JSON of every field that affects results (excludes output_dir).
    nlohmann::json semantic_json() const;
    /// FNV-1a 64 of semantic_json().dump(), as 16 hex digits.
    std::string digest() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses a comma-separated suite list, rejecting unknown names.
std::vector<std::string> parse_suite_list(const std::string& csv);

}  // namespace opclt
