#pragma once

#include <cstddef>
#include <vector>

#include "matprop/matrix.hpp"

namespace matprop {

/// Relative cutoff for numerical rank over the reals: sigma_i > tol * sigma_1.
inline constexpr double kRealRankTolerance = 1e-9;

/// Sweep cap of the one-sided Jacobi SVD.
inline constexpr int kJacobiMaxSweeps = 100;

struct SpectralSummary {
    std::vector<double> singular_values;  // non-increasing
    double frobenius = 0.0;
    double operator_norm = 0.0;
};

/// Exact rank over GF(p) by Gaussian elimination; numerical rank over the reals.
std::size_t rank_exact(const DenseMatrix& m);

/// All min(n, m) singular values by one-sided Jacobi. Throws ConvergenceFailure
/// after kJacobiMaxSweeps sweeps.
SpectralSummary singular_values(const DenseMatrix& m);

/// sigma_1; cheaper call sites read it from singular_values().
double operator_norm(const DenseMatrix& m);

/// (sum sigma_i^p)^(1/p), p >= 1.
double schatten_norm(const DenseMatrix& m, double p);
double schatten_norm(const SpectralSummary& s, double p);

/// ||A||_F^2 / ||A||^2. Throws ZeroMatrix.
double stable_rank(const DenseMatrix& m);

/// SVD entropy in nats with weights sigma_i^2 / n^2, n = max(rows, cols):
///   H = -sum w_i ln w_i / sum w_i, with 0 ln 0 = 0. Throws ZeroMatrix.
double matrix_entropy(const DenseMatrix& m);
double matrix_entropy(const SpectralSummary& s, std::size_t n);

/// Numerical rank of already computed singular values.
std::size_t numerical_rank(const std::vector<double>& sigma, double tol = kRealRankTolerance);

}  // namespace matprop
