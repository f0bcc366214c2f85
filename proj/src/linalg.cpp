#include "matprop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "matprop/error.hpp"

namespace matprop {

namespace {

std::size_t rank_mod_p(const DenseMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    const std::uint64_t p = m.field().modulus();
    const PrimeField& field = m.field().prime_field();
    std::vector<std::uint32_t> a(m.size());
    std::transform(m.data().begin(), m.data().end(), a.begin(), [](double v) { return static_cast<std::uint32_t>(v); });

    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && a[pivot * cols + col] == 0) ++pivot;
        if (pivot == rows) continue;
        if (pivot != rank) {
            std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(pivot * cols),
                             a.begin() + static_cast<std::ptrdiff_t>((pivot + 1) * cols),
                             a.begin() + static_cast<std::ptrdiff_t>(rank * cols));
        }
        const std::uint64_t inv = field.inv(Fp{a[rank * cols + col]}).value;
        for (std::size_t j = col; j < cols; ++j) a[rank * cols + j] = static_cast<std::uint32_t>(a[rank * cols + j] * inv % p);
        for (std::size_t r = rank + 1; r < rows; ++r) {
            const std::uint64_t f = a[r * cols + col];
            if (f == 0) continue;
            for (std::size_t j = col; j < cols; ++j) {
                const std::uint64_t sub = f * a[rank * cols + j] % p;
                a[r * cols + j] = static_cast<std::uint32_t>((a[r * cols + j] + p - sub) % p);
            }
        }
        ++rank;
    }
    return rank;
}

// Hestenes one-sided Jacobi on the columns of a tall matrix stored column-major.
std::vector<double> jacobi_singular_values(std::vector<double> u, std::size_t rows, std::size_t cols) {
    const double tol = static_cast<double>(rows) * std::numeric_limits<double>::epsilon();
    std::vector<double> norm2(cols);
    auto column = [&](std::size_t j) { return u.data() + j * rows; };
    const double fro2 = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    // Columns this small are numerically zero; rotating them only churns roundoff.
    const double negligible = fro2 * std::numeric_limits<double>::epsilon() * std::numeric_limits<double>::epsilon();

    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double* c = column(j);
            norm2[j] = std::inner_product(c, c + rows, c, 0.0);
        }
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < cols; ++i) {
            for (std::size_t j = i + 1; j < cols; ++j) {
                const double alpha = norm2[i];
                const double beta = norm2[j];
                if (alpha <= negligible || beta <= negligible) continue;
                double* ci = column(i);
                double* cj = column(j);
                const double gamma = std::inner_product(ci, ci + rows, cj, 0.0);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < rows; ++k) {
                    const double x = ci[k];
                    const double y = cj[k];
                    ci[k] = c * x - s * y;
                    cj[k] = s * x + c * y;
                }
                norm2[i] = alpha - t * gamma;
                norm2[j] = beta + t * gamma;
            }
        }
        if (!rotated) {
            std::vector<double> sigma(cols);
            for (std::size_t j = 0; j < cols; ++j) {
                const double* c = column(j);
                sigma[j] = std::sqrt(std::inner_product(c, c + rows, c, 0.0));
            }
            std::sort(sigma.begin(), sigma.end(), std::greater<>());
            return sigma;
        }
    }
    throw ConvergenceFailure("one-sided Jacobi did not converge within " + std::to_string(kJacobiMaxSweeps) + " sweeps");
}

}  // namespace

std::size_t numerical_rank(const std::vector<double>& sigma, double tol) {
    if (sigma.empty() || sigma.front() == 0.0) return 0;
    const double cutoff = tol * sigma.front();
    return static_cast<std::size_t>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cutoff; }));
}

std::size_t rank_exact(const DenseMatrix& m) {
    if (m.size() == 0) return 0;
    if (m.field().is_prime()) return rank_mod_p(m);
    return numerical_rank(singular_values(m).singular_values);
}

SpectralSummary singular_values(const DenseMatrix& m) {
    if (!m.is_real()) throw InvalidArgument("singular values are defined for real matrices");
    SpectralSummary out;
    if (m.size() == 0) return out;

    // Column-major copy of the tall orientation.
    const bool tall = m.rows() >= m.cols();
    const std::size_t rows = tall ? m.rows() : m.cols();
    const std::size_t cols = tall ? m.cols() : m.rows();
    std::vector<double> u(rows * cols);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (tall) u[j * rows + i] = m(i, j);
            else u[i * rows + j] = m(i, j);
        }

    double fro2 = 0.0;
    for (double v : m.data()) fro2 += v * v;

    out.singular_values = jacobi_singular_values(std::move(u), rows, cols);
    out.frobenius = std::sqrt(fro2);
    out.operator_norm = out.singular_values.front();
    return out;
}

double operator_norm(const DenseMatrix& m) {
    if (m.size() == 0) return 0.0;
    return singular_values(m).operator_norm;
}

double schatten_norm(const SpectralSummary& s, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("Schatten-p norm needs p >= 1");
    if (s.singular_values.empty() || s.operator_norm == 0.0) return 0.0;
    const double top = s.operator_norm;
    double acc = 0.0;
    for (double sigma : s.singular_values) acc += std::pow(sigma / top, p);
    return top * std::pow(acc, 1.0 / p);
}

double schatten_norm(const DenseMatrix& m, double p) { return schatten_norm(singular_values(m), p); }

double stable_rank(const DenseMatrix& m) {
    if (m.is_zero()) throw ZeroMatrix("stable rank of the zero matrix is undefined");
    const SpectralSummary s = singular_values(m);
    return (s.frobenius * s.frobenius) / (s.operator_norm * s.operator_norm);
}

double matrix_entropy(const SpectralSummary& s, std::size_t n) {
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    double mass = 0.0;
    double acc = 0.0;
    for (double sigma : s.singular_values) {
        const double w = sigma * sigma / n2;
        if (w <= 0.0) continue;
        mass += w;
        acc -= w * std::log(w);
    }
    if (mass == 0.0) throw ZeroMatrix("entropy of the zero matrix is undefined");
    return acc / mass;
}

double matrix_entropy(const DenseMatrix& m) {
    if (m.is_zero()) throw ZeroMatrix("entropy of the zero matrix is undefined");
    return matrix_entropy(singular_values(m), std::max(m.rows(), m.cols()));
}

}  // namespace matprop
