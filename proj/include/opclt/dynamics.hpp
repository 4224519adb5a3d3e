// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sampling of the normalized product
//
//   xi_n = sqrt(n) (e^{A_1/n} ... e^{A_n/n} - e^{EA}),
//
// its martingale approximation
//
//   S_n = n^{-1/2} sum_k e^{EA (k-1)/n} (A_k - EA) e^{EA (n-k)/n}   (summands d_{n,k}),
//
// the telescoped form xi_n' = S_n' + R_n and the subset expansion of
// M_k = e^{A_1/n} ... e^{A_k/n} x - (E e^{A/n})^k x.
//
// Products are applied to the probe vector right to left; the n-fold matrix
// product is never formed.
#pragma once

#include "opclt/ensemble.hpp"
#include "opclt/linalg.hpp"
#include "opclt/rng.hpp"

#include <cstdint>
#include <vector>

namespace opclt {

/// Per-(ensemble, n) tables shared read-only by all replicates.
class PrecomputedKernel
{
  public:
    PrecomputedKernel(const Ensemble& e, int n);

    int n() const { return n_; }
    int dim() const { return dim_; }
    const Ensemble& ensemble() const { return ensemble_; }

    /// e^{A^i / n} for support atom i (finite-support families only).
    bool has_step_table() const { return !step_exp_.empty(); }
    const OperatorMatrix& step_exponential(std::size_t i) const { return step_exp_.at(i); }

    /// e^{EA k/n}, 0 <= k <= n.
    const OperatorMatrix& mean_flow(int k) const { return flow_.at(k); }
    /// E e^{A/n}.
    const OperatorMatrix& mean_step() const { return mean_step_; }
    /// (E e^{A/n})^k, 0 <= k <= n.
    const OperatorMatrix& mean_step_power(int k) const { return step_power_.at(k); }

  private:
    Ensemble ensemble_;
    int n_;
    int dim_;
    std::vector<OperatorMatrix> step_exp_;
    std::vector<OperatorMatrix> flow_;
    OperatorMatrix mean_step_;
    std::vector<OperatorMatrix> step_power_;
};

struct TrajectorySample {
    int n = 0;
    Vec xi_x;                 // xi_n x
    Vec s_x;                  // S_n x
    double diff_norm = 0;     // ||xi_n x - S_n x||
    double projected_xi = 0;  // <y, xi_n x>
    double projected_s = 0;   // <y, S_n x>
};

/// Everything the proof-rate suites read from one replicate.
struct ProofDiagnostics {
    TrajectorySample trajectory;
    Vec s_prime_x;                // S_n' x
    double r_norm = 0;            // ||xi_n' x - S_n' x||
    double m_norm = 0;            // ||M_n|| with M_n = product x - (E e^{A/n})^n x
    std::vector<Vec> diff_at;     // d_{n,k} x - d'_{n,k} x at the requested k
    double max_dnk_ratio = 0;     // max_k ||d_{n,k}|| / ((2 rho / sqrt n) e^{rho (n-1)/n})
    double max_dnk_norm = 0;      // max_k ||d_{n,k}||
    int lindeberg_events = 0;     // #{k : ||d_{n,k}|| > eps}
};

/// Samples replicates for fixed (ensemble, n, x, y). For finite-support
/// ensembles the per-step vectors are tabulated once, so a replicate costs one
/// table lookup and two d x d matrix-vector products per step.
class ReplicateSampler
{
  public:
    struct Options {
        std::vector<int> diff_steps;    // k values for d_{n,k} x - d'_{n,k} x
        double lindeberg_epsilon = 0.1;
        bool track_difference_norms = false;  // ||d_{n,k}|| per draw
    };

    ReplicateSampler(const PrecomputedKernel& kern, Vec x, Vec y);
    ReplicateSampler(const PrecomputedKernel& kern, Vec x, Vec y, Options opts);

    TrajectorySample sample(RngStream& rng) const;
    ProofDiagnostics sample_diagnostics(RngStream& rng) const;

    const PrecomputedKernel& kernel() const { return kern_; }

  private:
    struct Steps;
    void fill_steps(RngStream& rng, Steps& steps) const;
    ProofDiagnostics evaluate(RngStream& rng, bool diagnostics) const;

    const PrecomputedKernel& kern_;
    Vec x_, y_;
    Options opts_;
    Vec flow_x_;                    // e^{EA} x
    std::vector<Vec> forward_x_;    // U_k = e^{EA (n-k)/n} x, k = 1..n at [k-1]
    std::vector<Vec> power_x_;      // V_k = (E e^{A/n})^{n-k} x, k = 1..n at [k-1]
    // Finite-support tables, indexed [(k-1) * atoms + i].
    std::size_t atoms_ = 0;
    std::vector<Vec> s_term_;       // e^{EA(k-1)/n} (A^i - EA) U_k
    std::vector<Vec> s_prime_term_; // (A^i - EA) V_k
    std::vector<double> d_norm_;    // ||d_{n,k}|| for atom i
};

TrajectorySample sample_xi(const PrecomputedKernel& kern, const Vec& x, const Vec& y,
                           RngStream& rng);

/// d_{n,k} = n^{-1/2} e^{EA (k-1)/n} (A_k - EA) e^{EA (n-k)/n}.
OperatorMatrix martingale_difference(const PrecomputedKernel& kern, int k, const OperatorMatrix& a_k);

/// (2 rho / sqrt n) e^{rho (n-1)/n}.
double martingale_difference_bound(double rho, int n);

struct SpeedPoint {
    int n = 0;
    double norm_outer = 0;  // ||(E e^{A/n})^n - e^{EA}||
    double norm_inner = 0;  // ||E e^{A/n} - e^{EA/n}||
    double k_max_norm = 0;  // max over k in {1, n/2, n} of ||(E e^{A/n})^k - e^{EA k/n}||
};

/// Exact rate curve; needs a closed form for E e^{A/n}.
std::vector<SpeedPoint> lemma_speed_curve(const Ensemble& e, const std::vector<int>& n_grid);

struct XiPrimeDecomposition {
    Vec s_prime_x;           // S_n' x
    double r_norm = 0;       // ||xi_n' x - S_n' x||
    Vec xi_prime_telescoped; // sqrt n sum_k L_{k-1} (E_k - E e^{A/n}) (E e^{A/n})^{n-k} x
    Vec xi_prime_direct;     // sqrt n (E_1 ... E_n - (E e^{A/n})^n) x
};

XiPrimeDecomposition decompose_xi_prime(const PrecomputedKernel& kern,
                                        const std::vector<OperatorMatrix>& draws, const Vec& x);

struct DoobDecomposition {
    Vec m_k;
    std::vector<Vec> d_list;          // D_{k,m}, m = 1..k at [m-1]
    double identity_residual = 0;     // ||M_k - sum_m D_{k,m}|| / ||M_k|| (absolute when M_k = 0)
    double max_subset_bound_ratio = 0; // max_P ||F_{k,P}|| / ((2 rho/n)^{|P|} e^{k rho/n})
    std::size_t subsets = 0;
};

inline constexpr int kMaxDoobSteps = 12;

/// Brute-force subset expansion of M_k; k = draws.size() <= 12.
DoobDecomposition doob_decomposition(const PrecomputedKernel& kern,
                                     const std::vector<OperatorMatrix>& draws, const Vec& x);

struct MomentPoint {
    int n = 0;
    double mean_norm = 0;
    double mean_norm_sq = 0;
};

std::vector<MomentPoint> mk_moment_curve(const Ensemble& e, const std::vector<int>& n_grid,
                                         const Vec& x, int reps, std::uint64_t seed,
                                         int workers = 1);

struct DiffMomentPoint {
    int n = 0;
    std::vector<int> steps;            // k in {1, ceil(n/2), n}
    std::vector<double> mean_sq_at;    // mean ||d_{n,k} x - d'_{n,k} x||^2 per k
    double mean_diff_sq = 0;           // average over the k values
    double max_orthogonality_z = 0;    // max |mean <delta_k, delta_l>| / SE over k != l
};

std::vector<DiffMomentPoint> diff_moment_curve(const Ensemble& e, const std::vector<int>& n_grid,
                                               const Vec& x, int reps, std::uint64_t seed,
                                               int workers = 1);

/// {1, ceil(n/2), n} without duplicates.
std::vector<int> probe_steps(int n);

/// (1/n) sum_k <y^{(x)2}, (e^{EA(k-1)/n})^{(x)2} C (e^{EA(n-k)/n})^{(x)2} x^{(x)2}>.
double riemann_covariance_sum(const PrecomputedKernel& kern, const Vec& x, const Vec& y);

struct MeanCheck {
    double mean_norm = 0;  // ||average of d_{n,k}||_F
    double standard_error = 0;
};

/// Monte Carlo mean of d_{n,k} over independent draws of A_k.
MeanCheck martingale_mean_check(const PrecomputedKernel& kern, int k, long draws, RngStream& rng);

}  // namespace opclt
