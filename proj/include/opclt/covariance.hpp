// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Limit covariance of the normalized product,
//
//   Sigma = int_0^1 (e^{EA s})^{(x)2} C (e^{EA (1-s)})^{(x)2} ds,
//   C = E[(A - EA)^{(x)2}],
//
// and its projections <y (x) y, Sigma (x (x) x)>. Three routes are provided:
// the materialized d^2 x d^2 quadrature, a matrix-free projected quadrature,
// and an entrywise closed form for diagonal ensembles.
#pragma once

#include "opclt/ensemble.hpp"
#include "opclt/linalg.hpp"

#include <functional>
#include <optional>

namespace opclt {

/// Largest dimension for which the d^4 matrix is materialized.
inline constexpr int kMaxFullCovarianceDim = 16;

class CovarianceOperator
{
  public:
    using Evaluator = std::function<double(const Vec& x, const Vec& y)>;

    CovarianceOperator(int dim, std::optional<OperatorMatrix> full, Evaluator evaluator)
        : dim_(dim), full_(std::move(full)), evaluator_(std::move(evaluator))
    {
    }

    int dim() const { return dim_; }
    bool materialized() const { return full_.has_value(); }
    const OperatorMatrix& full() const { return full_.value(); }

    /// <y (x) y, Sigma (x (x) x)>.
    double projected(const Vec& x, const Vec& y) const;

    /// ||Sigma - Sigma^T||_F; diagnostic only, requires the full matrix.
    double symmetry_defect() const;

  private:
    int dim_;
    std::optional<OperatorMatrix> full_;
    Evaluator evaluator_;
};

/// Explicit quadratic form (y (x) y)^T S (x (x) x).
double quadratic_form(const OperatorMatrix& s, const Vec& x, const Vec& y);

/// int_0^1 e^{alpha s} e^{beta (1 - s)} ds in closed form.
double exp_mix_integral(double alpha, double beta);

/// Integrand of the projected variance at s; nonnegative for every s.
double projected_integrand(const Ensemble& e, const Vec& x, const Vec& y, double s);

/// Full Sigma by adaptive Gauss-Legendre quadrature; d <= 16.
CovarianceOperator sigma_full(const Ensemble& e, const AdaptiveOptions& opts = {});
AdaptiveResult<OperatorMatrix> sigma_full_matrix(const Ensemble& e,
                                                 const AdaptiveOptions& opts = {});

/// Matrix-free projected variance; never allocates d^4 storage.
double sigma_projected(const Ensemble& e, const Vec& x, const Vec& y,
                       const AdaptiveOptions& opts = {});
AdaptiveResult<double> sigma_projected_detail(const Ensemble& e, const Vec& x, const Vec& y,
                                              const AdaptiveOptions& opts = {});

/// Closed-form Sigma for ensembles whose realizations are all diagonal.
CovarianceOperator sigma_commuting_oracle(const Ensemble& e);

}  // namespace opclt
