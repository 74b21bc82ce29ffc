#pragma once

// Small dense kernels: spectral norm by power iteration and a diagonally
// pivoted Cholesky factorization for positive-definiteness tests.

#include "nmvi/core.hpp"

#include <algorithm>
#include <vector>

namespace nmvi::linalg {

/// Largest singular value of `a`, via power iteration on a^T a. Stops once
/// the eigen-residual ||Bv - lambda v|| is below tol * lambda.
inline double spectral_norm(const Matrix& a, double tol = 1e-10, int max_iters = 200000) {
    if (a.size() == 0) {
        return 0.0;
    }
    const Matrix b = a.transpose() * a;
    if (b.cwiseAbs().maxCoeff() == 0.0) {
        return 0.0;
    }
    // Fixed pseudo-random start so no structured matrix can be orthogonal to it
    // by construction.
    Rng rng(0x5eedULL);
    Vector v(b.cols());
    for (Index i = 0; i < v.size(); ++i) {
        v[i] = 1.0 + rng.uniform();
    }
    v.normalize();
    double lambda = v.dot(b * v);
    for (int it = 0; it < max_iters; ++it) {
        Vector w = b * v;
        const double n = w.norm();
        if (n == 0.0) {
            return 0.0;
        }
        v = w / n;
        const Vector bv = b * v;
        lambda = v.dot(bv);
        if ((bv - lambda * v).norm() <= tol * lambda) {
            break;
        }
    }
    return std::sqrt(std::max(lambda, 0.0));
}

/// Outcome of a diagonally pivoted Cholesky factorization of a symmetric
/// positive semidefinite matrix.
struct PivotedCholesky {
    /// Pivots in elimination order (nonincreasing for a PSD input).
    std::vector<double> pivots;
    /// Largest diagonal entry of the input.
    double max_diagonal = 0.0;
    /// Number of pivots exceeding the threshold.
    Index rank = 0;

    double smallest_pivot() const {
        return pivots.empty() ? 0.0 : *std::min_element(pivots.begin(), pivots.end());
    }
};

/// Factorizes P G P^T = L L^T choosing the largest remaining diagonal as the
/// next pivot. Elimination stops at the first pivot <= rel_tol * max(1, max_diagonal);
/// that pivot is still recorded so callers see the failing value. The floor
/// of 1 keeps a numerically zero matrix from passing a purely relative test.
inline PivotedCholesky pivoted_cholesky(Matrix g, double rel_tol) {
    const Index n = g.rows();
    PivotedCholesky out;
    out.max_diagonal = n > 0 ? g.diagonal().maxCoeff() : 0.0;
    const double threshold = rel_tol * std::max(1.0, out.max_diagonal);
    for (Index k = 0; k < n; ++k) {
        Index p = k;
        for (Index i = k + 1; i < n; ++i) {
            // Strict comparison keeps the lowest index on ties.
            if (g(i, i) > g(p, p)) {
                p = i;
            }
        }
        if (p != k) {
            g.row(k).swap(g.row(p));
            g.col(k).swap(g.col(p));
        }
        const double pivot = g(k, k);
        out.pivots.push_back(pivot);
        if (!(pivot > threshold) || pivot <= 0.0) {
            return out;
        }
        ++out.rank;
        const double root = std::sqrt(pivot);
        g.col(k).tail(n - k - 1) /= root;
        for (Index j = k + 1; j < n; ++j) {
            for (Index i = j; i < n; ++i) {
                g(i, j) -= g(i, k) * g(j, k);
            }
            for (Index i = j; i < n; ++i) {
                g(j, i) = g(i, j);
            }
        }
    }
    return out;
}

} // namespace nmvi::linalg
