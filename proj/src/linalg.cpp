// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace opclt {

void require_operator(const OperatorMatrix& a, const char* what)
{
    if (a.rows() == 0 || a.rows() != a.cols())
        throw std::invalid_argument(std::string(what) + ": expected a non-empty square matrix, got " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    if (!a.allFinite())
        throw std::invalid_argument(std::string(what) + ": matrix has non-finite entries");
}

void require_finite(const Vec& v, const char* what)
{
    if (v.size() == 0 || !v.allFinite())
        throw std::invalid_argument(std::string(what) + ": vector must be non-empty and finite");
}

bool is_diagonal(const OperatorMatrix& a)
{
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j && a(i, j) != 0.0)
                return false;
    return true;
}

namespace {

double norm1(const OperatorMatrix& a)
{
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Pade coefficients b_0..b_m for degrees 3, 5, 7, 9 and 13.
constexpr std::array<double, 4> kPade3 = {120., 60., 12., 1.};
constexpr std::array<double, 6> kPade5 = {30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kPade7 = {17297280., 8648640., 1995840., 277200.,
                                          25200.,    1512.,    56.,      1.};
constexpr std::array<double, 10> kPade9 = {17643225600., 8821612800., 2075673600., 302702400.,
                                           30270240.,    2162160.,    110880.,     3960.,
                                           90.,          1.};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
    129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
    1323241920.,        40840800.,          960960.,           16380.,
    182.,               1.};

// Largest 1-norms for which each degree meets unit roundoff in double.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e+0;
constexpr double kTheta13 = 5.371920351148152e+0;

template <std::size_t N>
OperatorMatrix pade_low(const OperatorMatrix& a, const std::array<double, N>& b)
{
    const auto d = a.rows();
    const OperatorMatrix id = OperatorMatrix::Identity(d, d);
    const OperatorMatrix a2 = a * a;
    OperatorMatrix power = id;
    OperatorMatrix u_inner = OperatorMatrix::Zero(d, d);
    OperatorMatrix v = OperatorMatrix::Zero(d, d);
    for (std::size_t k = 0; k + 1 < N; k += 2) {
        v += b[k] * power;
        u_inner += b[k + 1] * power;
        power = power * a2;
    }
    const OperatorMatrix u = a * u_inner;
    return (v - u).partialPivLu().solve(v + u);
}

OperatorMatrix pade13(const OperatorMatrix& a)
{
    const auto& b = kPade13;
    const auto d = a.rows();
    const OperatorMatrix id = OperatorMatrix::Identity(d, d);
    const OperatorMatrix a2 = a * a;
    const OperatorMatrix a4 = a2 * a2;
    const OperatorMatrix a6 = a4 * a2;
    const OperatorMatrix u =
        a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 +
             b[1] * id);
    const OperatorMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                             b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

OperatorMatrix mat_exp(const OperatorMatrix& a)
{
    require_operator(a, "mat_exp");
    if (is_diagonal(a)) {
        OperatorMatrix out = OperatorMatrix::Zero(a.rows(), a.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out(i, i) = std::exp(a(i, i));
        return out;
    }

    const double norm = norm1(a);
    if (norm <= kTheta3)
        return pade_low(a, kPade3);
    if (norm <= kTheta5)
        return pade_low(a, kPade5);
    if (norm <= kTheta7)
        return pade_low(a, kPade7);
    if (norm <= kTheta9)
        return pade_low(a, kPade9);

    const int squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    OperatorMatrix r = pade13(std::ldexp(1.0, -squarings) * a);
    for (int i = 0; i < squarings; ++i)
        r = (r * r).eval();
    return r;
}

OperatorMatrix kron2(const OperatorMatrix& a, const OperatorMatrix& b)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("kron2: operands must be square with equal dimension");
    const auto d = a.rows();
    OperatorMatrix out(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            out.block(i * d, k * d, d, d) = a(i, k) * b;
    return out;
}

Vec kron2(const Vec& x, const Vec& y)
{
    if (x.size() != y.size())
        throw std::invalid_argument("kron2: vectors must have equal dimension");
    const auto d = x.size();
    Vec out(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        out.segment(i * d, d) = x(i) * y;
    return out;
}

double op_norm(const OperatorMatrix& a)
{
    if (a.size() == 0 || !a.allFinite())
        throw std::invalid_argument("op_norm: matrix must be non-empty and finite");
    if (a.rows() == a.cols() && is_diagonal(a))
        return a.diagonal().cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<OperatorMatrix> svd(a);
    return svd.singularValues()(0);
}

QuadratureRule gauss_legendre(int m)
{
    if (m < 1 || m > 512)
        throw std::out_of_range("gauss_legendre: node count must lie in [1, 512], got " +
                                std::to_string(m));

    // Newton iteration on P_m for the roots in (0, 1) of [-1, 1]; the rest by symmetry.
    std::vector<double> x(m), w(m);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            const double step = p1 / dp;
            z -= step;
            if (std::abs(step) < 1e-16)
                break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = z;
        for (int j = 2; j <= m; ++j) {
            const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (z * p1 - p0) / (z * z - 1.0);
        const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
        // Descending z for ascending i; store mirrored so nodes ascend.
        x[m - 1 - i] = z;
        x[i] = -z;
        w[m - 1 - i] = weight;
        w[i] = weight;
    }
    if (m % 2 == 1)
        x[m / 2] = 0.0;

    QuadratureRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        rule.nodes[i] = 0.5 * (1.0 + x[i]);
        rule.weights[i] = 0.5 * w[i];
    }
    return rule;
}

double pairwise_sum(const std::vector<double>& terms)
{
    auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 8) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i)
                s += terms[i];
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return self(self, lo, mid) + self(self, mid, hi);
    };
    return rec(rec, 0, terms.size());
}

namespace {

template <class T, class Eval, class Norm>
AdaptiveResult<T> integrate_doubling(Eval&& eval, Norm&& norm, const AdaptiveOptions& opts)
{
    if (opts.initial_nodes < 1 || opts.max_nodes < opts.initial_nodes)
        throw std::invalid_argument("integrate_adaptive: invalid node range");
    AdaptiveResult<T> res{eval(gauss_legendre(opts.initial_nodes)), opts.initial_nodes, 0.0, false};
    for (int m = 2 * opts.initial_nodes; m <= opts.max_nodes; m *= 2) {
        T next = eval(gauss_legendre(m));
        const double change = norm(next, res.value);
        const double scale = norm(next, T(next * 0.0));
        res.value = std::move(next);
        res.nodes = m;
        res.last_change = change;
        if (change <= opts.rel_tol * scale) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace

AdaptiveResult<double> integrate_adaptive(const std::function<double(double)>& f,
                                          const AdaptiveOptions& opts)
{
    auto eval = [&](const QuadratureRule& rule) {
        std::vector<double> terms(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i)
            terms[i] = rule.weights[i] * f(rule.nodes[i]);
        return pairwise_sum(terms);
    };
    auto norm = [](double a, double b) { return std::abs(a - b); };
    return integrate_doubling<double>(eval, norm, opts);
}

AdaptiveResult<OperatorMatrix> integrate_adaptive(const std::function<OperatorMatrix(double)>& f,
                                                  const AdaptiveOptions& opts)
{
    auto eval = [&](const QuadratureRule& rule) {
        OperatorMatrix sum = rule.weights[0] * f(rule.nodes[0]);
        for (std::size_t i = 1; i < rule.size(); ++i)
            sum += rule.weights[i] * f(rule.nodes[i]);
        return sum;
    };
    auto norm = [](const OperatorMatrix& a, const OperatorMatrix& b) { return (a - b).norm(); };
    return integrate_doubling<OperatorMatrix>(eval, norm, opts);
}

}  // namespace opclt
