// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/ensemble.hpp"
#include "opclt/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace opclt;

namespace {

OperatorMatrix scalar(double a)
{
    OperatorMatrix m(1, 1);
    m(0, 0) = a;
    return m;
}

OperatorMatrix random_matrix(RngStream& rng, int d)
{
    OperatorMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = 2.0 * rng.uniform() - 1.0;
    return m;
}

Vec random_vec(RngStream& rng, int d)
{
    Vec v(d);
    for (int i = 0; i < d; ++i)
        v(i) = rng.normal();
    return v;
}

std::vector<Ensemble> sample_families()
{
    RngStream rng(99, 0);
    return {Ensemble::two_point(random_matrix(rng, 3), random_matrix(rng, 3), 0.3),
            Ensemble::finite_support({random_matrix(rng, 2), random_matrix(rng, 2),
                                      random_matrix(rng, 2)},
                                     {0.5, 0.2, 0.3}),
            Ensemble::diagonal_uniform(3, -2.0, 0.5),
            Ensemble::deterministic(random_matrix(rng, 4))};
}

}  // namespace

TEST_CASE("sampling examples")
{
    RngStream rng(1, 1);
    OperatorMatrix m(2, 2);
    m << 0.1, 0.2, -0.3, 0.4;
    const Ensemble det = Ensemble::deterministic(m);
    for (int i = 0; i < 10; ++i)
        CHECK(det.sample(rng) == m);

    const Ensemble sure = Ensemble::two_point(m, -m, 1.0);
    for (int i = 0; i < 1000; ++i)
        CHECK(sure.sample(rng) == m);
    const Ensemble never = Ensemble::two_point(m, -m, 0.0);
    for (int i = 0; i < 1000; ++i)
        CHECK(never.sample(rng) == -m);

    const Ensemble coin = Ensemble::two_point(scalar(0), scalar(2), 0.5);
    double sum = 0;
    const int count = 1000000;
    for (int i = 0; i < count; ++i)
        sum += coin.sample(rng)(0, 0);
    CHECK(std::abs(sum / count - 1.0) <= 0.01);
}

TEST_CASE("samples replay under identical streams")
{
    for (const auto& e : sample_families()) {
        RngStream a(5, 9), b(5, 9);
        for (int i = 0; i < 100; ++i)
            CHECK(e.sample(a) == e.sample(b));
    }
}

TEST_CASE("exact means")
{
    RngStream rng(2, 2);
    const OperatorMatrix a0 = random_matrix(rng, 3), a1 = random_matrix(rng, 3);
    const Ensemble tp = Ensemble::two_point(a0, a1, 0.3);
    CHECK((tp.mean() - (0.3 * a0 + 0.7 * a1)).norm() <= 1e-15);

    const Ensemble det = Ensemble::deterministic(a0);
    CHECK(det.mean() == a0);

    const Ensemble du = Ensemble::diagonal_uniform(4, -1.0, 3.0);
    CHECK(du.mean() == OperatorMatrix::Identity(4, 4));
}

TEST_CASE("central second moments")
{
    RngStream rng(3, 3);
    const OperatorMatrix a0 = random_matrix(rng, 3), a1 = random_matrix(rng, 3);
    const double p = 0.3;
    const Ensemble tp = Ensemble::two_point(a0, a1, p);
    const OperatorMatrix diff = a0 - a1;
    const OperatorMatrix want = p * (1 - p) * kron2(diff, diff);
    CHECK((tp.central_second_moment() - want).norm() <= 1e-14 * want.norm());

    CHECK(Ensemble::deterministic(a0).central_second_moment().cwiseAbs().maxCoeff() == 0.0);

    const Ensemble coin = Ensemble::two_point(scalar(0), scalar(1), 0.5);
    CHECK(coin.central_second_moment()(0, 0) == 0.25);

    const Ensemble du = Ensemble::diagonal_uniform(2, -1.0, 2.0);
    const OperatorMatrix c = du.central_second_moment();
    CHECK(c(0, 0) == doctest::Approx(0.75));
    CHECK(c(3, 3) == doctest::Approx(0.75));
    CHECK(c(1, 1) == 0.0);
    CHECK(c(0, 3) == 0.0);
}

TEST_CASE("second_moment_form agrees with the lifted matrix")
{
    RngStream rng(4, 4);
    for (const auto& e : sample_families()) {
        const int d = e.dim();
        const OperatorMatrix c = e.central_second_moment();
        for (int i = 0; i < 5; ++i) {
            const Vec u = random_vec(rng, d), w = random_vec(rng, d);
            const double lifted = kron2(w, w).dot(c * kron2(u, u));
            CHECK(e.second_moment_form(u, w) ==
                  doctest::Approx(lifted).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("Monte Carlo second moment matches within four standard errors")
{
    RngStream rng(5, 5);
    for (const auto& e : sample_families()) {
        const int d = e.dim();
        const Vec u = random_vec(rng, d);
        const Vec lifted = e.central_second_moment() * kron2(u, u);
        const int count = 100000;
        Vec sum = Vec::Zero(d * d), sum_sq = Vec::Zero(d * d);
        for (int r = 0; r < count; ++r) {
            const Vec v = (e.sample(rng) - e.mean()) * u;
            const Vec t = kron2(v, v);
            sum += t;
            sum_sq += t.cwiseProduct(t);
        }
        const Vec mean = sum / count;
        for (int i = 0; i < d * d; ++i) {
            const double var = sum_sq(i) / count - mean(i) * mean(i);
            const double se = std::sqrt(std::max(var, 0.0) / count);
            CHECK(std::abs(mean(i) - lifted(i)) <= 4 * se + 1e-14);
        }
    }
}

TEST_CASE("samples respect the norm bound")
{
    RngStream rng(6, 6);
    for (const auto& e : sample_families()) {
        double worst = 0;
        for (int i = 0; i < 10000; ++i)
            worst = std::max(worst, op_norm(e.sample(rng)));
        CHECK(worst <= e.norm_bound() * (1 + 1e-14));
    }
    CHECK(Ensemble::diagonal_uniform(2, -3.0, 1.0).norm_bound() == 3.0);
    OperatorMatrix m(2, 2);
    m << 0, 2, 0, 0;
    CHECK(Ensemble::deterministic(m).norm_bound() == doctest::Approx(2.0));
    CHECK(Ensemble::deterministic(OperatorMatrix::Zero(2, 2)).norm_bound() == 0.0);
}

TEST_CASE("mean lies in the convex hull for finite support")
{
    // Scalar check: the mean lies between the extreme atoms.
    const Ensemble e = Ensemble::finite_support({scalar(-1), scalar(4), scalar(2)}, {0.2, 0.3, 0.5});
    CHECK(e.mean()(0, 0) >= -1.0);
    CHECK(e.mean()(0, 0) <= 4.0);
    CHECK(e.mean()(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("estimate_mean_mc examples")
{
    RngStream rng(7, 7);
    OperatorMatrix m(2, 2);
    m << 0.1, 0.2, 0.3, 0.7;
    CHECK(estimate_mean_mc(Ensemble::deterministic(m), 12345, rng) == m);

    const Ensemble coin = Ensemble::two_point(scalar(0), scalar(2), 0.5);
    CHECK(std::abs(estimate_mean_mc(coin, 1000000, rng)(0, 0) - 1.0) <= 0.01);

    const Ensemble du = Ensemble::diagonal_uniform(3, -1.0, 1.0);
    CHECK(estimate_mean_mc(du, 1000000, rng).cwiseAbs().maxCoeff() <= 0.01);

    CHECK_THROWS_AS(estimate_mean_mc(coin, 0, rng), std::invalid_argument);
}

TEST_CASE("Monte Carlo mean error decays like reps^{-1/2}")
{
    const Ensemble coin = Ensemble::two_point(scalar(0), scalar(2), 0.5);
    std::vector<std::pair<double, double>> pts;
    for (long reps : {1000L, 10000L, 100000L, 1000000L}) {
        double ms = 0;
        const int streams = 20;
        for (int s = 0; s < streams; ++s) {
            RngStream rng = RngStream::derive(8, "mean_mc", reps, s);
            const double err = (estimate_mean_mc(coin, reps, rng) - coin.mean()).norm();
            ms += err * err / streams;
        }
        pts.emplace_back(static_cast<double>(reps), std::sqrt(ms));
    }
    CHECK(fit_slope(pts).slope == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("diagonal_uniform mean exponential has a closed form")
{
    const Ensemble du = Ensemble::diagonal_uniform(2, -0.5, 1.5);
    for (double t : {0.0, 0.01, 1.0}) {
        // Midpoint rule on a fine grid of the uniform density.
        const int m = 200000;
        double want = 0;
        for (int i = 0; i < m; ++i)
            want += std::exp(t * (-0.5 + 2.0 * (i + 0.5) / m)) / m;
        const OperatorMatrix got = du.mean_exponential(t);
        CHECK(got(0, 0) == doctest::Approx(want).epsilon(1e-9));
        CHECK(got(1, 1) == got(0, 0));
        CHECK(got(0, 1) == 0.0);
    }
}

TEST_CASE("shifted ensembles move every atom by cI")
{
    RngStream rng(9, 9);
    const OperatorMatrix a0 = random_matrix(rng, 2), a1 = random_matrix(rng, 2);
    const Ensemble e = Ensemble::two_point(a0, a1, 0.4).shifted(0.5);
    CHECK(e.family() == Family::two_point);
    CHECK((e.support()[0] - a0 - 0.5 * OperatorMatrix::Identity(2, 2)).norm() == 0.0);
    CHECK((e.central_second_moment() - Ensemble::two_point(a0, a1, 0.4).central_second_moment())
              .norm() <= 1e-15);
    const Ensemble du = Ensemble::diagonal_uniform(2, 0.0, 1.0).shifted(-1.0);
    CHECK(du.lo() == -1.0);
    CHECK(du.hi() == 0.0);
}

TEST_CASE("degeneracy")
{
    RngStream rng(10, 10);
    const OperatorMatrix a = random_matrix(rng, 2);
    CHECK(Ensemble::deterministic(a).is_degenerate());
    CHECK(Ensemble::two_point(a, a, 0.3).is_degenerate());
    CHECK(Ensemble::two_point(a, -a, 1.0).is_degenerate());
    CHECK_FALSE(Ensemble::two_point(a, -a, 0.5).is_degenerate());
    CHECK(Ensemble::diagonal_uniform(2, 0.3, 0.3).is_degenerate());
    CHECK_FALSE(Ensemble::diagonal_uniform(2, 0.3, 0.4).is_degenerate());
}

TEST_CASE("construction errors")
{
    const OperatorMatrix a = OperatorMatrix::Identity(2, 2);
    CHECK_THROWS_AS(Ensemble::two_point(a, a, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::two_point(a, a, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::two_point(a, OperatorMatrix::Identity(3, 3), 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::finite_support({a, a}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::finite_support({a}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::finite_support({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::diagonal_uniform(2, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::diagonal_uniform(0, 0.0, 1.0), std::invalid_argument);
    OperatorMatrix bad = a;
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(Ensemble::deterministic(bad), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble::deterministic(OperatorMatrix::Zero(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(family_from_string("gaussian"), std::invalid_argument);
    for (Family f : {Family::two_point, Family::finite_support, Family::diagonal_uniform,
                     Family::deterministic})
        CHECK(family_from_string(to_string(f)) == f);
}
