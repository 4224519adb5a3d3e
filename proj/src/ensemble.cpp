// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opclt {

std::string to_string(Family f)
{
    switch (f) {
    case Family::two_point: return "two_point";
    case Family::finite_support: return "finite_support";
    case Family::diagonal_uniform: return "diagonal_uniform";
    case Family::deterministic: return "deterministic";
    }
    return "unknown";
}

Family family_from_string(const std::string& name)
{
    if (name == "two_point") return Family::two_point;
    if (name == "finite_support") return Family::finite_support;
    if (name == "diagonal_uniform") return Family::diagonal_uniform;
    if (name == "deterministic") return Family::deterministic;
    throw std::invalid_argument("unknown ensemble family '" + name + "'");
}

Ensemble Ensemble::two_point(OperatorMatrix a0, OperatorMatrix a1, double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("two_point: probability must lie in [0, 1]");
    Ensemble e = finite_support({std::move(a0), std::move(a1)}, {p, 1.0 - p});
    e.family_ = Family::two_point;
    return e;
}

Ensemble Ensemble::finite_support(std::vector<OperatorMatrix> support,
                                  std::vector<double> probabilities)
{
    if (support.empty())
        throw std::invalid_argument("finite_support: empty support");
    if (support.size() != probabilities.size())
        throw std::invalid_argument("finite_support: support and probability counts differ");
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("finite_support: probabilities must lie in [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("finite_support: probabilities must sum to 1");
    for (const auto& m : support)
        require_operator(m, "finite_support");
    const auto d = support.front().rows();
    for (const auto& m : support)
        if (m.rows() != d)
            throw std::invalid_argument("finite_support: support matrices differ in dimension");

    Ensemble e;
    e.family_ = Family::finite_support;
    e.dim_ = static_cast<int>(d);
    e.support_ = std::move(support);
    e.probs_ = std::move(probabilities);
    e.finish();
    return e;
}

Ensemble Ensemble::diagonal_uniform(int dim, double lo, double hi)
{
    if (dim < 1)
        throw std::invalid_argument("diagonal_uniform: dimension must be >= 1");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw std::invalid_argument("diagonal_uniform: need finite lo <= hi");
    Ensemble e;
    e.family_ = Family::diagonal_uniform;
    e.dim_ = dim;
    e.lo_ = lo;
    e.hi_ = hi;
    e.finish();
    return e;
}

Ensemble Ensemble::deterministic(OperatorMatrix m)
{
    Ensemble e = finite_support({std::move(m)}, {1.0});
    e.family_ = Family::deterministic;
    return e;
}

void Ensemble::finish()
{
    const auto d = dim_;
    if (family_ == Family::diagonal_uniform) {
        mean_ = OperatorMatrix::Identity(d, d) * (0.5 * (lo_ + hi_));
        rho_ = std::max(std::abs(lo_), std::abs(hi_));
        diagonal_ = true;
        return;
    }
    mean_ = OperatorMatrix::Zero(d, d);
    for (std::size_t i = 0; i < support_.size(); ++i)
        mean_ += probs_[i] * support_[i];
    cumulative_.resize(probs_.size());
    double acc = 0.0;
    rho_ = 0.0;
    diagonal_ = true;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        acc += probs_[i];
        cumulative_[i] = acc;
        rho_ = std::max(rho_, op_norm(support_[i]));
        diagonal_ = diagonal_ && opclt::is_diagonal(support_[i]);
        centered_.push_back(support_[i] - mean_);
    }
}

bool Ensemble::is_degenerate() const
{
    if (family_ == Family::diagonal_uniform)
        return lo_ == hi_;
    for (std::size_t i = 0; i < centered_.size(); ++i)
        if (probs_[i] > 0.0 && centered_[i].cwiseAbs().maxCoeff() != 0.0)
            return false;
    return true;
}

std::size_t Ensemble::sample_index(RngStream& rng) const
{
    if (!has_finite_support())
        throw std::logic_error("sample_index: ensemble has no finite support");
    if (support_.size() == 1)
        return 0;
    // First i with u < cumulative[i], counted without branches.
    const double u = rng.uniform();
    std::size_t i = 0;
    for (double c : cumulative_)
        i += static_cast<std::size_t>(u >= c);
    if (i < cumulative_.size())
        return i;
    // u landed above a cumulative sum rounded below 1: take the last atom with mass.
    for (std::size_t i = probs_.size(); i-- > 0;)
        if (probs_[i] > 0.0)
            return i;
    return probs_.size() - 1;
}

OperatorMatrix Ensemble::sample(RngStream& rng) const
{
    if (has_finite_support())
        return support_[sample_index(rng)];
    OperatorMatrix out = OperatorMatrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        out(i, i) = lo_ + (hi_ - lo_) * rng.uniform();
    return out;
}

OperatorMatrix Ensemble::central_second_moment() const
{
    const int d2 = dim_ * dim_;
    OperatorMatrix c = OperatorMatrix::Zero(d2, d2);
    if (family_ == Family::diagonal_uniform) {
        const double var = (hi_ - lo_) * (hi_ - lo_) / 12.0;
        for (int i = 0; i < dim_; ++i)
            c(i * dim_ + i, i * dim_ + i) = var;
        return c;
    }
    for (std::size_t i = 0; i < centered_.size(); ++i)
        c += probs_[i] * kron2(centered_[i], centered_[i]);
    return c;
}

double Ensemble::second_moment_form(const Vec& u, const Vec& w) const
{
    if (u.size() != dim_ || w.size() != dim_)
        throw std::invalid_argument("second_moment_form: probe dimension mismatch");
    if (family_ == Family::diagonal_uniform) {
        const double var = (hi_ - lo_) * (hi_ - lo_) / 12.0;
        return var * (u.cwiseProduct(w)).squaredNorm();
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < centered_.size(); ++i) {
        const double proj = w.dot(centered_[i] * u);
        acc += probs_[i] * proj * proj;
    }
    return acc;
}

OperatorMatrix Ensemble::mean_exponential(double t) const
{
    if (family_ == Family::diagonal_uniform) {
        // E e^{t a}, a ~ U[lo, hi]: e^{t lo} * expm1(t (hi - lo)) / (t (hi - lo)).
        const double span = t * (hi_ - lo_);
        const double factor = span == 0.0 ? 1.0 : std::expm1(span) / span;
        return OperatorMatrix::Identity(dim_, dim_) * (std::exp(t * lo_) * factor);
    }
    OperatorMatrix out = OperatorMatrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < support_.size(); ++i)
        out += probs_[i] * mat_exp(t * support_[i]);
    return out;
}

Ensemble Ensemble::shifted(double c) const
{
    if (family_ == Family::diagonal_uniform)
        return diagonal_uniform(dim_, lo_ + c, hi_ + c);
    std::vector<OperatorMatrix> support;
    for (const auto& a : support_)
        support.push_back(a + c * OperatorMatrix::Identity(dim_, dim_));
    Ensemble e = finite_support(std::move(support), probs_);
    e.family_ = family_;
    return e;
}

OperatorMatrix estimate_mean_mc(const Ensemble& e, long reps, RngStream& rng)
{
    if (reps < 1)
        throw std::invalid_argument("estimate_mean_mc: reps must be >= 1");
    // Running mean: identical draws leave it bit-exact.
    OperatorMatrix avg = e.sample(rng);
    for (long r = 1; r < reps; ++r)
        avg += (e.sample(rng) - avg) / static_cast<double>(r + 1);
    return avg;
}

}  // namespace opclt
