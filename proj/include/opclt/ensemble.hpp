// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Bounded random operators A with exact first and second moments.
#pragma once

#include "opclt/linalg.hpp"
#include "opclt/rng.hpp"

#include <span>
#include <string>
#include <vector>

namespace opclt {

enum class Family { two_point, finite_support, diagonal_uniform, deterministic };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// Immutable distribution over OperatorMatrix. two_point, finite_support and
/// deterministic are all stored as a finite support with probabilities;
/// diagonal_uniform draws i.i.d. diagonal entries on [lo, hi].
class Ensemble
{
  public:
    /// Draws `a0` with probability p, `a1` otherwise.
    static Ensemble two_point(OperatorMatrix a0, OperatorMatrix a1, double p);
    static Ensemble finite_support(std::vector<OperatorMatrix> support,
                                   std::vector<double> probabilities);
    static Ensemble diagonal_uniform(int dim, double lo, double hi);
    static Ensemble deterministic(OperatorMatrix m);

    Family family() const { return family_; }
    int dim() const { return dim_; }
    /// rho = sup ||A||, computed from the parameters.
    double norm_bound() const { return rho_; }

    bool has_finite_support() const { return family_ != Family::diagonal_uniform; }
    /// True when A = EA almost surely (zero central second moment).
    bool is_degenerate() const;
    /// True when every realization is diagonal.
    bool is_diagonal() const { return diagonal_; }
    std::span<const OperatorMatrix> support() const { return support_; }
    std::span<const double> probabilities() const { return probs_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    /// Support index of one draw; finite-support families only.
    std::size_t sample_index(RngStream& rng) const;
    OperatorMatrix sample(RngStream& rng) const;

    /// Exact E[A].
    const OperatorMatrix& mean() const { return mean_; }

    /// Exact E[(A - EA) (x) (A - EA)] as a d^2 x d^2 matrix.
    OperatorMatrix central_second_moment() const;

    /// <w (x) w, C (u (x) u)> for C the central second moment, without forming C.
    /// Equals E[<w, (A - EA) u>^2].
    double second_moment_form(const Vec& u, const Vec& w) const;

    /// The same family with every realization replaced by A + c I.
    Ensemble shifted(double c) const;

    /// Exact E[e^{tA}].
    OperatorMatrix mean_exponential(double t) const;

  private:
    Ensemble() = default;
    void finish();

    Family family_ = Family::deterministic;
    int dim_ = 0;
    std::vector<OperatorMatrix> support_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
    std::vector<OperatorMatrix> centered_;  // A^i - EA
    double lo_ = 0.0;
    double hi_ = 0.0;
    OperatorMatrix mean_;
    double rho_ = 0.0;
    bool diagonal_ = false;
};

/// Sample average of `reps` draws. Consistency oracle for Ensemble::mean.
OperatorMatrix estimate_mean_mc(const Ensemble& e, long reps, RngStream& rng);

}  // namespace opclt
