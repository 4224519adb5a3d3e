// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense small-matrix numerics shared by every other module.
//
// Tensor convention: for d-vectors x, y the second lift is stored row-major,
//   (x (x) y)[i*d + j] = x[i] * y[j],
// and kron2(A, B) acts on it as (A (x) B)(x (x) y) = (Ax) (x) (By).
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace opclt {

/// Bounded operator on the truncated space; always square with finite entries.
using OperatorMatrix = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Throws std::invalid_argument unless `a` is square, non-empty and finite.
void require_operator(const OperatorMatrix& a, const char* what);
void require_finite(const Vec& v, const char* what);

bool is_diagonal(const OperatorMatrix& a);

/// e^A by scaling and squaring with Pade approximants (Higham 2005); the
/// diagonal case is evaluated entrywise.
OperatorMatrix mat_exp(const OperatorMatrix& a);

/// Kronecker product with the row-major tensor convention above.
OperatorMatrix kron2(const OperatorMatrix& a, const OperatorMatrix& b);

/// x (x) y as a d*d vector.
Vec kron2(const Vec& x, const Vec& y);

/// Spectral norm (largest singular value).
double op_norm(const OperatorMatrix& a);

struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, inside (0, 1)
    std::vector<double> weights;  // positive, sum to 1

    std::size_t size() const { return nodes.size(); }
};

/// m-node Gauss-Legendre rule on [0, 1], 1 <= m <= 512.
QuadratureRule gauss_legendre(int m);

/// Pairwise summation in index order; the result depends only on the input order.
double pairwise_sum(const std::vector<double>& terms);

struct AdaptiveOptions {
    int initial_nodes = 8;
    int max_nodes = 256;
    double rel_tol = 1e-12;
};

template <class T>
struct AdaptiveResult {
    T value;
    int nodes = 0;           // node count of the accepted rule
    double last_change = 0;  // |I_m - I_{m/2}| in the relevant norm
    bool converged = false;
};

/// Integrates f over [0, 1], doubling the node count until two successive
/// rules agree to `rel_tol` relative (or both vanish), capped at `max_nodes`.
AdaptiveResult<double> integrate_adaptive(const std::function<double(double)>& f,
                                          const AdaptiveOptions& opts = {});

/// Matrix-valued variant; convergence is measured in Frobenius norm.
AdaptiveResult<OperatorMatrix> integrate_adaptive(
    const std::function<OperatorMatrix(double)>& f, const AdaptiveOptions& opts = {});

}  // namespace opclt
