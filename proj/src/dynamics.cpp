// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/dynamics.hpp"

#include "opclt/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace opclt {

namespace {

// y = M x for a column-major d x d block.
inline void matvec(const double* m, const double* x, double* y, int d)
{
    for (int i = 0; i < d; ++i)
        y[i] = 0.0;
    for (int j = 0; j < d; ++j) {
        const double xj = x[j];
        const double* col = m + static_cast<std::ptrdiff_t>(j) * d;
        for (int i = 0; i < d; ++i)
            y[i] += col[i] * xj;
    }
}

Vec to_vec(const std::vector<double>& v)
{
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_probe(const Vec& v, int d, const char* what)
{
    if (v.size() != d)
        throw std::invalid_argument(std::string(what) + ": probe dimension " +
                                    std::to_string(v.size()) + " does not match " +
                                    std::to_string(d));
    require_finite(v, what);
}

}  // namespace

//---------------------------------------------------------------------------//
// PrecomputedKernel
//---------------------------------------------------------------------------//

PrecomputedKernel::PrecomputedKernel(const Ensemble& e, int n)
    : ensemble_(e), n_(n), dim_(e.dim())
{
    if (n < 1)
        throw std::invalid_argument("PrecomputedKernel: n must be >= 1");
    const double t = 1.0 / n;
    if (e.has_finite_support()) {
        step_exp_.reserve(e.support().size());
        for (const auto& a : e.support())
            step_exp_.push_back(mat_exp(t * a));
    }
    flow_.reserve(n + 1);
    for (int k = 0; k <= n; ++k)
        flow_.push_back(k == 0 ? OperatorMatrix::Identity(dim_, dim_)
                               : mat_exp(e.mean() * (static_cast<double>(k) / n)));
    mean_step_ = e.mean_exponential(t);
    step_power_.reserve(n + 1);
    step_power_.push_back(OperatorMatrix::Identity(dim_, dim_));
    for (int k = 1; k <= n; ++k)
        step_power_.push_back(step_power_.back() * mean_step_);
}

//---------------------------------------------------------------------------//
// ReplicateSampler
//---------------------------------------------------------------------------//

struct ReplicateSampler::Steps {
    std::vector<const double*> exp;      // E_k
    std::vector<const double*> s_term;   // e^{EA(k-1)/n} (A_k - EA) U_k
    std::vector<const double*> s_prime;  // (A_k - EA) V_k
    std::vector<double> d_norm;          // ||d_{n,k}||
    // Owned storage for families without step tables.
    std::vector<OperatorMatrix> own_exp;
    std::vector<Vec> own_s, own_sp;
};

ReplicateSampler::ReplicateSampler(const PrecomputedKernel& kern, Vec x, Vec y)
    : ReplicateSampler(kern, std::move(x), std::move(y), Options{})
{
}

ReplicateSampler::ReplicateSampler(const PrecomputedKernel& kern, Vec x, Vec y, Options opts)
    : kern_(kern), x_(std::move(x)), y_(std::move(y)), opts_(std::move(opts))
{
    const int n = kern_.n();
    const int d = kern_.dim();
    require_probe(x_, d, "ReplicateSampler");
    require_probe(y_, d, "ReplicateSampler");
    for (int k : opts_.diff_steps)
        if (k < 1 || k > n)
            throw std::invalid_argument("ReplicateSampler: diff step out of [1, n]");

    flow_x_ = kern_.mean_flow(n) * x_;
    forward_x_.reserve(n);
    power_x_.reserve(n);
    for (int k = 1; k <= n; ++k) {
        forward_x_.push_back(kern_.mean_flow(n - k) * x_);
        power_x_.push_back(kern_.mean_step_power(n - k) * x_);
    }

    const Ensemble& e = kern_.ensemble();
    if (!kern_.has_step_table())
        return;
    atoms_ = e.support().size();
    s_term_.resize(static_cast<std::size_t>(n) * atoms_);
    s_prime_term_.resize(s_term_.size());
    if (opts_.track_difference_norms)
        d_norm_.resize(s_term_.size());
    for (std::size_t i = 0; i < atoms_; ++i) {
        const OperatorMatrix centered = e.support()[i] - e.mean();
        for (int k = 1; k <= n; ++k) {
            const std::size_t at = static_cast<std::size_t>(k - 1) * atoms_ + i;
            s_term_[at] = kern_.mean_flow(k - 1) * (centered * forward_x_[k - 1]);
            s_prime_term_[at] = centered * power_x_[k - 1];
            if (opts_.track_difference_norms)
                d_norm_[at] = op_norm(martingale_difference(kern_, k, e.support()[i]));
        }
    }
}

void ReplicateSampler::fill_steps(RngStream& rng, Steps& st) const
{
    const int n = kern_.n();
    const Ensemble& e = kern_.ensemble();
    st.exp.resize(n);
    st.s_term.resize(n);
    st.s_prime.resize(n);
    if (opts_.track_difference_norms)
        st.d_norm.resize(n);

    if (kern_.has_step_table()) {
        for (int k = 1; k <= n; ++k) {
            const std::size_t i = e.sample_index(rng);
            const std::size_t at = static_cast<std::size_t>(k - 1) * atoms_ + i;
            st.exp[k - 1] = kern_.step_exponential(i).data();
            st.s_term[k - 1] = s_term_[at].data();
            st.s_prime[k - 1] = s_prime_term_[at].data();
            if (opts_.track_difference_norms)
                st.d_norm[k - 1] = d_norm_[at];
        }
        return;
    }

    st.own_exp.resize(n);
    st.own_s.resize(n);
    st.own_sp.resize(n);
    const double t = 1.0 / n;
    for (int k = 1; k <= n; ++k) {
        const OperatorMatrix a = e.sample(rng);
        const OperatorMatrix centered = a - e.mean();
        st.own_exp[k - 1] = mat_exp(t * a);
        st.own_s[k - 1] = kern_.mean_flow(k - 1) * (centered * forward_x_[k - 1]);
        st.own_sp[k - 1] = centered * power_x_[k - 1];
        st.exp[k - 1] = st.own_exp[k - 1].data();
        st.s_term[k - 1] = st.own_s[k - 1].data();
        st.s_prime[k - 1] = st.own_sp[k - 1].data();
        if (opts_.track_difference_norms)
            st.d_norm[k - 1] = op_norm(martingale_difference(kern_, k, a));
    }
}

ProofDiagnostics ReplicateSampler::evaluate(RngStream& rng, bool diagnostics) const
{
    const int n = kern_.n();
    const int d = kern_.dim();
    const double root_n = std::sqrt(static_cast<double>(n));

    Steps st;
    fill_steps(rng, st);

    // Right-to-left: v <- E_k v, and the Horner form of S_n' alongside it,
    // acc <- (A_k - EA) V_k + E_k acc, which sums L_{k-1} (A_k - EA) V_k.
    std::vector<double> v(x_.data(), x_.data() + d), tmp(d), acc(d, 0.0);
    for (int k = n; k >= 1; --k) {
        const double* ek = st.exp[k - 1];
        matvec(ek, v.data(), tmp.data(), d);
        std::swap(v, tmp);
        if (diagnostics) {
            matvec(ek, acc.data(), tmp.data(), d);
            const double* c = st.s_prime[k - 1];
            for (int i = 0; i < d; ++i)
                acc[i] = c[i] + tmp[i];
        }
    }

    std::vector<double> s(d, 0.0);
    for (int k = 1; k <= n; ++k) {
        const double* c = st.s_term[k - 1];
        for (int i = 0; i < d; ++i)
            s[i] += c[i];
    }

    ProofDiagnostics out;
    TrajectorySample& tr = out.trajectory;
    const Vec product_x = to_vec(v);
    tr.n = n;
    tr.xi_x = root_n * (product_x - flow_x_);
    tr.s_x = to_vec(s) / root_n;
    tr.diff_norm = (tr.xi_x - tr.s_x).norm();
    tr.projected_xi = y_.dot(tr.xi_x);
    tr.projected_s = y_.dot(tr.s_x);
    if (!diagnostics)
        return out;

    const Vec m_n = product_x - kern_.mean_step_power(n) * x_;
    out.m_norm = m_n.norm();
    out.s_prime_x = to_vec(acc) / root_n;
    out.r_norm = (root_n * m_n - out.s_prime_x).norm();

    for (int k : opts_.diff_steps) {
        // d'_{n,k} x = n^{-1/2} E_1 ... E_{k-1} (A_k - EA) V_k.
        std::vector<double> w(st.s_prime[k - 1], st.s_prime[k - 1] + d);
        for (int j = k - 1; j >= 1; --j) {
            matvec(st.exp[j - 1], w.data(), tmp.data(), d);
            std::swap(w, tmp);
        }
        const Vec d_x = Eigen::Map<const Vec>(st.s_term[k - 1], d) / root_n;
        out.diff_at.push_back(d_x - to_vec(w) / root_n);
    }

    if (opts_.track_difference_norms) {
        const double bound = martingale_difference_bound(kern_.ensemble().norm_bound(), n);
        for (double dn : st.d_norm) {
            out.max_dnk_norm = std::max(out.max_dnk_norm, dn);
            if (dn > opts_.lindeberg_epsilon)
                ++out.lindeberg_events;
        }
        out.max_dnk_ratio = bound > 0.0 ? out.max_dnk_norm / bound
                                        : (out.max_dnk_norm == 0.0
                                               ? 0.0
                                               : std::numeric_limits<double>::infinity());
    }
    return out;
}

TrajectorySample ReplicateSampler::sample(RngStream& rng) const
{
    return evaluate(rng, false).trajectory;
}

ProofDiagnostics ReplicateSampler::sample_diagnostics(RngStream& rng) const
{
    return evaluate(rng, true);
}

TrajectorySample sample_xi(const PrecomputedKernel& kern, const Vec& x, const Vec& y,
                           RngStream& rng)
{
    return ReplicateSampler(kern, x, y).sample(rng);
}

//---------------------------------------------------------------------------//
// Martingale differences
//---------------------------------------------------------------------------//

OperatorMatrix martingale_difference(const PrecomputedKernel& kern, int k, const OperatorMatrix& a_k)
{
    const int n = kern.n();
    if (k < 1 || k > n)
        throw std::invalid_argument("martingale_difference: k must lie in [1, n]");
    const OperatorMatrix centered = a_k - kern.ensemble().mean();
    return kern.mean_flow(k - 1) * centered * kern.mean_flow(n - k) /
           std::sqrt(static_cast<double>(n));
}

double martingale_difference_bound(double rho, int n)
{
    return 2.0 * rho / std::sqrt(static_cast<double>(n)) * std::exp(rho * (n - 1.0) / n);
}

MeanCheck martingale_mean_check(const PrecomputedKernel& kern, int k, long draws, RngStream& rng)
{
    if (draws < 2)
        throw std::invalid_argument("martingale_mean_check: need at least 2 draws");
    const Ensemble& e = kern.ensemble();
    std::vector<OperatorMatrix> table;
    if (e.has_finite_support())
        for (const auto& a : e.support())
            table.push_back(martingale_difference(kern, k, a));

    const int d = kern.dim();
    OperatorMatrix sum = OperatorMatrix::Zero(d, d);
    OperatorMatrix sum_sq = OperatorMatrix::Zero(d, d);
    for (long r = 0; r < draws; ++r) {
        const OperatorMatrix dk = table.empty() ? martingale_difference(kern, k, e.sample(rng))
                                                : table[e.sample_index(rng)];
        sum += dk;
        sum_sq += dk.cwiseProduct(dk);
    }
    const double count = static_cast<double>(draws);
    const OperatorMatrix mean = sum / count;
    // Total variance of the entries, unbiased.
    const double var = ((sum_sq / count - mean.cwiseProduct(mean)).sum()) * count / (count - 1.0);
    return {mean.norm(), std::sqrt(std::max(var, 0.0) / count)};
}

//---------------------------------------------------------------------------//
// Rate curves
//---------------------------------------------------------------------------//

namespace {

// ||X^k - Y^k|| through X^k - Y^k = sum_j X^{k-j-1} (X - Y) Y^j, which is
// exactly zero when X == Y and avoids cancellation between two O(1) powers.
double power_difference_norm(const std::vector<OperatorMatrix>& xp,
                             const std::vector<OperatorMatrix>& yp, const OperatorMatrix& diff,
                             int k)
{
    OperatorMatrix acc = OperatorMatrix::Zero(diff.rows(), diff.cols());
    for (int j = 0; j < k; ++j)
        acc += xp[k - j - 1] * diff * yp[j];
    return op_norm(acc);
}

}  // namespace

std::vector<SpeedPoint> lemma_speed_curve(const Ensemble& e, const std::vector<int>& n_grid)
{
    std::vector<SpeedPoint> out;
    const int d = e.dim();
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const int n = n_grid[g];
        if (n < 1 || (g > 0 && n <= n_grid[g - 1]))
            throw std::invalid_argument("lemma_speed_curve: grid must be increasing and >= 1");
        const double t = 1.0 / n;
        const OperatorMatrix x = e.mean_exponential(t);
        const OperatorMatrix y = mat_exp(t * e.mean());
        const OperatorMatrix diff = x - y;
        std::vector<OperatorMatrix> xp{OperatorMatrix::Identity(d, d)};
        std::vector<OperatorMatrix> yp{OperatorMatrix::Identity(d, d)};
        for (int k = 1; k <= n; ++k) {
            xp.push_back(xp.back() * x);
            yp.push_back(yp.back() * y);
        }
        SpeedPoint p;
        p.n = n;
        p.norm_inner = op_norm(diff);
        p.norm_outer = power_difference_norm(xp, yp, diff, n);
        for (int k : probe_steps(n))
            p.k_max_norm = std::max(p.k_max_norm, power_difference_norm(xp, yp, diff, k));
        out.push_back(p);
    }
    return out;
}

std::vector<int> probe_steps(int n)
{
    std::vector<int> ks{1, (n + 1) / 2, n};
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

XiPrimeDecomposition decompose_xi_prime(const PrecomputedKernel& kern,
                                        const std::vector<OperatorMatrix>& draws, const Vec& x)
{
    const int n = kern.n();
    const int d = kern.dim();
    if (static_cast<int>(draws.size()) != n)
        throw std::invalid_argument("decompose_xi_prime: need exactly n draws");
    require_probe(x, d, "decompose_xi_prime");
    const Ensemble& e = kern.ensemble();
    const double t = 1.0 / n;
    const double root_n = std::sqrt(static_cast<double>(n));

    Vec v = x;
    Vec telescoped = Vec::Zero(d);
    Vec s_prime = Vec::Zero(d);
    for (int k = n; k >= 1; --k) {
        const OperatorMatrix& a = draws[k - 1];
        require_operator(a, "decompose_xi_prime");
        const OperatorMatrix ek = mat_exp(t * a);
        const Vec vk = kern.mean_step_power(n - k) * x;
        v = ek * v;
        telescoped = (ek - kern.mean_step()) * vk + ek * telescoped;
        s_prime = (a - e.mean()) * vk + ek * s_prime;
    }
    XiPrimeDecomposition out;
    out.xi_prime_telescoped = root_n * telescoped;
    out.xi_prime_direct = root_n * (v - kern.mean_step_power(n) * x);
    out.s_prime_x = s_prime / root_n;
    out.r_norm = (out.xi_prime_direct - out.s_prime_x).norm();
    return out;
}

DoobDecomposition doob_decomposition(const PrecomputedKernel& kern,
                                     const std::vector<OperatorMatrix>& draws, const Vec& x)
{
    const int k = static_cast<int>(draws.size());
    if (k < 1 || k > kMaxDoobSteps)
        throw std::invalid_argument("doob_decomposition: k must lie in [1, " +
                                    std::to_string(kMaxDoobSteps) + "]");
    const int n = kern.n();
    const int d = kern.dim();
    require_probe(x, d, "doob_decomposition");
    const double t = 1.0 / n;
    const double rho = kern.ensemble().norm_bound();
    const OperatorMatrix& mean_step = kern.mean_step();

    std::vector<OperatorMatrix> step(k), centered(k);
    for (int j = 0; j < k; ++j) {
        require_operator(draws[j], "doob_decomposition");
        step[j] = mat_exp(t * draws[j]);
        centered[j] = step[j] - mean_step;
    }

    DoobDecomposition out;
    Vec product_x = x;
    for (int j = k - 1; j >= 0; --j)
        product_x = step[j] * product_x;
    OperatorMatrix mean_power = OperatorMatrix::Identity(d, d);
    for (int j = 0; j < k; ++j)
        mean_power = mean_power * mean_step;
    out.m_k = product_x - mean_power * x;

    out.d_list.assign(k, Vec::Zero(d));
    const double growth = std::exp(k * rho / n);
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        OperatorMatrix f = OperatorMatrix::Identity(d, d);
        for (int j = 0; j < k; ++j)
            f = f * ((mask >> j) & 1u ? centered[j] : mean_step);
        const int size = std::popcount(mask);
        const int max_elem = std::bit_width(mask);  // 1-based max of P
        out.d_list[max_elem - 1] += f * x;
        const double bound = std::pow(2.0 * rho / n, size) * growth;
        const double norm = op_norm(f);
        const double ratio = bound > 0.0 ? norm / bound
                                         : (norm == 0.0 ? 0.0
                                                        : std::numeric_limits<double>::infinity());
        out.max_subset_bound_ratio = std::max(out.max_subset_bound_ratio, ratio);
        ++out.subsets;
    }

    Vec total = Vec::Zero(d);
    for (const auto& dm : out.d_list)
        total += dm;
    const double scale = out.m_k.norm();
    const double residual = (out.m_k - total).norm();
    out.identity_residual = scale > 0.0 ? residual / scale : residual;
    return out;
}

std::vector<MomentPoint> mk_moment_curve(const Ensemble& e, const std::vector<int>& n_grid,
                                         const Vec& x, int reps, std::uint64_t seed, int workers)
{
    if (reps < 100)
        throw std::invalid_argument("mk_moment_curve: reps must be >= 100");
    std::vector<MomentPoint> out;
    for (int n : n_grid) {
        const PrecomputedKernel kern(e, n);
        const ReplicateSampler sampler(kern, x, x);
        const auto norms = map_replicates<double>(reps, workers, [&](std::size_t r) {
            RngStream rng = RngStream::derive(seed, "mk_moment", n, r);
            return sampler.sample_diagnostics(rng).m_norm;
        });
        MomentPoint p;
        p.n = n;
        for (double m : norms) {
            p.mean_norm += m;
            p.mean_norm_sq += m * m;
        }
        p.mean_norm /= reps;
        p.mean_norm_sq /= reps;
        out.push_back(p);
    }
    return out;
}

std::vector<DiffMomentPoint> diff_moment_curve(const Ensemble& e, const std::vector<int>& n_grid,
                                               const Vec& x, int reps, std::uint64_t seed,
                                               int workers)
{
    if (reps < 100)
        throw std::invalid_argument("diff_moment_curve: reps must be >= 100");
    std::vector<DiffMomentPoint> out;
    for (int n : n_grid) {
        const PrecomputedKernel kern(e, n);
        ReplicateSampler::Options opts;
        opts.diff_steps = probe_steps(n);
        const ReplicateSampler sampler(kern, x, x, opts);
        const auto diffs = map_replicates<std::vector<Vec>>(reps, workers, [&](std::size_t r) {
            RngStream rng = RngStream::derive(seed, "diff_moment", n, r);
            return sampler.sample_diagnostics(rng).diff_at;
        });

        DiffMomentPoint p;
        p.n = n;
        p.steps = opts.diff_steps;
        const std::size_t nk = p.steps.size();
        p.mean_sq_at.assign(nk, 0.0);
        for (const auto& rep : diffs)
            for (std::size_t a = 0; a < nk; ++a)
                p.mean_sq_at[a] += rep[a].squaredNorm() / reps;
        for (double v : p.mean_sq_at)
            p.mean_diff_sq += v / static_cast<double>(nk);

        for (std::size_t a = 0; a < nk; ++a)
            for (std::size_t b = a + 1; b < nk; ++b) {
                double sum = 0.0, sum_sq = 0.0;
                for (const auto& rep : diffs) {
                    const double ip = rep[a].dot(rep[b]);
                    sum += ip;
                    sum_sq += ip * ip;
                }
                const double mean = sum / reps;
                const double var = (sum_sq / reps - mean * mean) * reps / (reps - 1.0);
                const double se = std::sqrt(std::max(var, 0.0) / reps);
                const double z = se > 0.0 ? std::abs(mean) / se : (mean == 0.0 ? 0.0 : 1e300);
                p.max_orthogonality_z = std::max(p.max_orthogonality_z, z);
            }
        out.push_back(p);
    }
    return out;
}

double riemann_covariance_sum(const PrecomputedKernel& kern, const Vec& x, const Vec& y)
{
    const int n = kern.n();
    require_probe(x, kern.dim(), "riemann_covariance_sum");
    require_probe(y, kern.dim(), "riemann_covariance_sum");
    std::vector<double> terms(n);
    for (int k = 1; k <= n; ++k) {
        const Vec u = kern.mean_flow(n - k) * x;
        const Vec w = kern.mean_flow(k - 1).transpose() * y;
        terms[k - 1] = kern.ensemble().second_moment_form(u, w);
    }
    return pairwise_sum(terms) / n;
}

}  // namespace opclt
