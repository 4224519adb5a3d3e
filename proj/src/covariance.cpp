// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace opclt {

double CovarianceOperator::projected(const Vec& x, const Vec& y) const
{
    if (x.size() != dim_ || y.size() != dim_)
        throw std::invalid_argument("CovarianceOperator: probe dimension mismatch");
    return evaluator_(x, y);
}

double CovarianceOperator::symmetry_defect() const
{
    const auto& s = full();
    return (s - s.transpose()).norm();
}

double quadratic_form(const OperatorMatrix& s, const Vec& x, const Vec& y)
{
    return kron2(y, y).dot(s * kron2(x, x));
}

double exp_mix_integral(double alpha, double beta)
{
    // e^beta * (e^{alpha - beta} - 1) / (alpha - beta), stable as alpha -> beta.
    const double delta = alpha - beta;
    if (delta == 0.0)
        return std::exp(alpha);
    return std::exp(beta) * std::expm1(delta) / delta;
}

double projected_integrand(const Ensemble& e, const Vec& x, const Vec& y, double s)
{
    const OperatorMatrix& mean = e.mean();
    const Vec u = mat_exp(mean * (1.0 - s)) * x;
    const Vec w = mat_exp(mean * s).transpose() * y;
    return e.second_moment_form(u, w);
}

AdaptiveResult<OperatorMatrix> sigma_full_matrix(const Ensemble& e, const AdaptiveOptions& opts)
{
    if (e.dim() > kMaxFullCovarianceDim)
        throw std::invalid_argument("sigma_full: dimension " + std::to_string(e.dim()) +
                                    " too large to materialize; use sigma_projected");
    const OperatorMatrix c = e.central_second_moment();
    const OperatorMatrix& mean = e.mean();
    auto integrand = [&](double s) -> OperatorMatrix {
        const OperatorMatrix left = mat_exp(mean * s);
        const OperatorMatrix right = mat_exp(mean * (1.0 - s));
        return kron2(left, left) * c * kron2(right, right);
    };
    return integrate_adaptive(std::function<OperatorMatrix(double)>(integrand), opts);
}

CovarianceOperator sigma_full(const Ensemble& e, const AdaptiveOptions& opts)
{
    OperatorMatrix full = sigma_full_matrix(e, opts).value;
    auto evaluator = [full](const Vec& x, const Vec& y) { return quadratic_form(full, x, y); };
    return CovarianceOperator(e.dim(), std::move(full), evaluator);
}

AdaptiveResult<double> sigma_projected_detail(const Ensemble& e, const Vec& x, const Vec& y,
                                              const AdaptiveOptions& opts)
{
    if (x.size() != e.dim() || y.size() != e.dim())
        throw std::invalid_argument("sigma_projected: probe dimension mismatch");
    require_finite(x, "sigma_projected");
    require_finite(y, "sigma_projected");
    auto integrand = [&](double s) { return projected_integrand(e, x, y, s); };
    return integrate_adaptive(std::function<double(double)>(integrand), opts);
}

double sigma_projected(const Ensemble& e, const Vec& x, const Vec& y, const AdaptiveOptions& opts)
{
    return sigma_projected_detail(e, x, y, opts).value;
}

CovarianceOperator sigma_commuting_oracle(const Ensemble& e)
{
    if (!e.is_diagonal())
        throw std::invalid_argument("sigma_commuting_oracle: ensemble has non-diagonal support");
    const int d = e.dim();
    const Eigen::VectorXd b = e.mean().diagonal();
    OperatorMatrix sigma = e.central_second_moment();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double& entry = sigma(i * d + j, k * d + l);
                    if (entry != 0.0)
                        entry *= exp_mix_integral(b(i) + b(j), b(k) + b(l));
                }
    std::optional<OperatorMatrix> full;
    if (d <= kMaxFullCovarianceDim)
        full = sigma;
    auto evaluator = [sigma](const Vec& x, const Vec& y) { return quadratic_form(sigma, x, y); };
    return CovarianceOperator(d, std::move(full), evaluator);
}

}  // namespace opclt
