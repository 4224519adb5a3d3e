// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/covariance.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace opclt;

namespace {

OperatorMatrix scalar(double a)
{
    OperatorMatrix m(1, 1);
    m(0, 0) = a;
    return m;
}

OperatorMatrix random_matrix(RngStream& rng, int d, double bound = 1.0)
{
    OperatorMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = 2.0 * rng.uniform() - 1.0;
    const double norm = op_norm(m);
    return norm > bound ? OperatorMatrix(m * (bound / norm)) : m;
}

OperatorMatrix random_diagonal(RngStream& rng, int d)
{
    OperatorMatrix m = OperatorMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        m(i, i) = 2.0 * rng.uniform() - 1.0;
    return m;
}

Vec random_vec(RngStream& rng, int d)
{
    Vec v(d);
    for (int i = 0; i < d; ++i)
        v(i) = rng.normal();
    return v;
}

// Composite Simpson on the explicit d^2 x d^2 integrand.
OperatorMatrix sigma_simpson(const Ensemble& e, int intervals)
{
    const OperatorMatrix c = e.central_second_moment();
    auto integrand = [&](double s) {
        const OperatorMatrix left = mat_exp(e.mean() * s);
        const OperatorMatrix right = mat_exp(e.mean() * (1.0 - s));
        return OperatorMatrix(kron2(left, left) * c * kron2(right, right));
    };
    const double h = 1.0 / intervals;
    OperatorMatrix sum = integrand(0.0) + integrand(1.0);
    for (int i = 1; i < intervals; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
    return sum * (h / 3.0);
}

}  // namespace

TEST_CASE("scalar coin: Sigma = e/4 on every route")
{
    const Ensemble coin = Ensemble::two_point(scalar(0), scalar(1), 0.5);
    const double want = std::numbers::e / 4.0;
    const CovarianceOperator full = sigma_full(coin);
    REQUIRE(full.materialized());
    CHECK(full.full()(0, 0) == doctest::Approx(want).epsilon(1e-14));
    Vec one(1);
    one << 1.0;
    CHECK(sigma_projected(coin, one, one) == doctest::Approx(want).epsilon(1e-14));
    CHECK(sigma_commuting_oracle(coin).full()(0, 0) == doctest::Approx(want).epsilon(1e-14));
    CHECK(full.symmetry_defect() == 0.0);
}

TEST_CASE("deterministic ensembles have Sigma = 0 exactly")
{
    RngStream rng(1, 1);
    const Ensemble det = Ensemble::deterministic(random_matrix(rng, 3));
    CHECK(sigma_full(det).full().cwiseAbs().maxCoeff() == 0.0);
    CHECK(sigma_projected(det, random_vec(rng, 3), random_vec(rng, 3)) == 0.0);
    const Ensemble det_diag = Ensemble::deterministic(random_diagonal(rng, 3));
    CHECK(sigma_commuting_oracle(det_diag).full().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exp_mix_integral closed form")
{
    CHECK(exp_mix_integral(0.0, 0.0) == 1.0);
    CHECK(exp_mix_integral(2.0, 0.0) == doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-15));
    CHECK(exp_mix_integral(0.0, 2.0) == doctest::Approx((std::exp(2.0) - 1.0) / 2.0).epsilon(1e-15));
    CHECK(exp_mix_integral(0.7, 0.7) == doctest::Approx(std::exp(0.7)).epsilon(1e-15));
    // Near-equal exponents stay accurate.
    CHECK(exp_mix_integral(0.3 + 1e-12, 0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-11));
    // Against Gauss-Legendre on the integrand itself.
    const QuadratureRule r = gauss_legendre(40);
    double s = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        s += r.weights[i] * std::exp(-1.3 * r.nodes[i]) * std::exp(0.4 * (1 - r.nodes[i]));
    CHECK(exp_mix_integral(-1.3, 0.4) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("zero probe gives zero variance")
{
    RngStream rng(2, 2);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.5);
    CHECK(sigma_projected(e, Vec::Zero(3), random_vec(rng, 3)) == 0.0);
    CHECK(sigma_projected(e, random_vec(rng, 3), Vec::Zero(3)) == 0.0);
}

TEST_CASE("full Sigma matches an independent Simpson integration")
{
    RngStream rng(3, 3);
    for (int d : {2, 3}) {
        const Ensemble e = Ensemble::two_point(random_matrix(rng, d), random_matrix(rng, d), 0.35);
        const OperatorMatrix want = sigma_simpson(e, 2000);
        const OperatorMatrix got = sigma_full(e).full();
        CHECK((got - want).norm() <= 1e-10 * want.norm());
    }
}

TEST_CASE("projected and full routes agree")
{
    RngStream rng(4, 4);
    for (int d : {1, 2, 4, 8}) {
        const Ensemble e = Ensemble::finite_support(
            {random_matrix(rng, d), random_matrix(rng, d), random_matrix(rng, d)}, {0.2, 0.5, 0.3});
        const CovarianceOperator full = sigma_full(e);
        for (int i = 0; i < 20; ++i) {
            const Vec x = random_vec(rng, d), y = random_vec(rng, d);
            const double a = sigma_projected(e, x, y);
            const double b = quadratic_form(full.full(), x, y);
            CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)));
            CHECK(full.projected(x, y) == b);
        }
    }
}

TEST_CASE("commuting oracle agrees with the full route on diagonal families")
{
    RngStream rng(5, 5);
    const std::vector<Ensemble> families = {
        Ensemble::two_point(random_diagonal(rng, 3), random_diagonal(rng, 3), 0.6),
        Ensemble::finite_support({random_diagonal(rng, 4), random_diagonal(rng, 4),
                                  random_diagonal(rng, 4)},
                                 {0.3, 0.3, 0.4}),
        Ensemble::diagonal_uniform(3, -1.0, 2.0)};
    for (const auto& e : families) {
        const OperatorMatrix oracle = sigma_commuting_oracle(e).full();
        const OperatorMatrix full = sigma_full(e).full();
        CHECK((oracle - full).norm() <= 1e-10 * oracle.norm());
    }
    const Ensemble dense = Ensemble::two_point(random_matrix(rng, 2), random_matrix(rng, 2), 0.5);
    CHECK_THROWS_AS(sigma_commuting_oracle(dense), std::invalid_argument);
}

TEST_CASE("integrand is nonnegative at every node and variances are nonnegative")
{
    RngStream rng(6, 6);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 4), random_matrix(rng, 4), 0.25);
    const QuadratureRule r = gauss_legendre(64);
    for (int i = 0; i < 100; ++i) {
        const Vec x = random_vec(rng, 4), y = random_vec(rng, 4);
        for (double s : r.nodes)
            CHECK(projected_integrand(e, x, y, s) >= 0.0);
        CHECK(sigma_projected(e, x, y) >= 0.0);
    }
}

TEST_CASE("node doubling beyond the adaptive stop changes little")
{
    RngStream rng(7, 7);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.5);
    for (int i = 0; i < 10; ++i) {
        const Vec x = random_vec(rng, 3), y = random_vec(rng, 3);
        const auto res = sigma_projected_detail(e, x, y);
        CHECK(res.converged);
        const QuadratureRule r = gauss_legendre(2 * res.nodes);
        std::vector<double> terms;
        for (std::size_t k = 0; k < r.size(); ++k)
            terms.push_back(r.weights[k] * projected_integrand(e, x, y, r.nodes[k]));
        CHECK(std::abs(pairwise_sum(terms) - res.value) < 1e-12 * std::abs(res.value));
    }
}

TEST_CASE("shift A -> A + cI scales the variance by e^{2c}")
{
    RngStream rng(8, 8);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.4);
    for (double c : {-1.0, 0.5}) {
        const Ensemble s = e.shifted(c);
        for (int i = 0; i < 5; ++i) {
            const Vec x = random_vec(rng, 3), y = random_vec(rng, 3);
            CHECK(sigma_projected(s, x, y) ==
                  doctest::Approx(std::exp(2 * c) * sigma_projected(e, x, y)).epsilon(1e-10));
        }
    }
}

TEST_CASE("symmetry defect is a diagnostic, nonzero for non-symmetric generators")
{
    RngStream rng(9, 9);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.5);
    CHECK(sigma_full(e).symmetry_defect() > 0.0);
    OperatorMatrix s0 = random_matrix(rng, 3), s1 = random_matrix(rng, 3);
    s0 = 0.5 * (s0 + s0.transpose()).eval();
    s1 = 0.5 * (s1 + s1.transpose()).eval();
    const CovarianceOperator sym = sigma_full(Ensemble::two_point(s0, s1, 0.5));
    CHECK(sym.symmetry_defect() >= 0.0);
}

TEST_CASE("input validation")
{
    RngStream rng(10, 10);
    const Ensemble e = Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.5);
    CHECK_THROWS_AS(sigma_projected(e, Vec::Zero(2), Vec::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(sigma_full(Ensemble::diagonal_uniform(17, 0.0, 1.0)), std::invalid_argument);
    // The projected route still works above the materialization threshold.
    const Ensemble big = Ensemble::diagonal_uniform(20, -0.5, 0.5);
    Vec x = Vec::Zero(20);
    x(0) = 1.0;
    CHECK(sigma_projected(big, x, x) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
}
