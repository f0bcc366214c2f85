// Independent brute-force references used by the unit and acceptance tests.
// Nothing here calls into the library's algorithms beyond the matrix container.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "matprop/matrix.hpp"

namespace ref {

using Grid = std::vector<std::vector<long long>>;

inline long long mod(long long v, long long p) { return ((v % p) + p) % p; }

// Leibniz determinant modulo p.
inline long long det_mod(const Grid& a, long long p) {
    const std::size_t k = a.size();
    if (k == 0) return 1;
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    long long total = 0;
    do {
        long long term = 1;
        for (std::size_t i = 0; i < k; ++i) term = term * a[i][perm[i]] % p;
        int inversions = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (perm[i] > perm[j]) ++inversions;
        total = mod(total + (inversions % 2 ? -term : term), p);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

// Largest order of a nonzero minor.
inline std::size_t rank_by_minors(const Grid& a, long long p) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    for (std::size_t k = std::min(rows, cols); k > 0; --k) {
        for (const auto& rs : subsets(rows, k))
            for (const auto& cs : subsets(cols, k)) {
                Grid sub(k, std::vector<long long>(k));
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) sub[i][j] = a[rs[i]][cs[j]];
                if (det_mod(sub, p) != 0) return k;
            }
    }
    return 0;
}

inline Grid to_grid(const matprop::DenseMatrix& m) {
    Grid g(m.rows(), std::vector<long long>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) g[i][j] = static_cast<long long>(m(i, j));
    return g;
}

// Row-echelon rank modulo p, written independently of the library.
inline std::size_t rank_mod(Grid a, long long p) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        long long inv = 1;
        for (long long e = p - 2, b = a[r][c]; e > 0; e >>= 1, b = b * b % p)
            if (e & 1) inv = inv * b % p;
        for (std::size_t i = r + 1; i < rows; ++i) {
            const long long f = a[i][c] * inv % p;
            for (std::size_t j = c; j < cols; ++j) a[i][j] = mod(a[i][j] - f * a[r][j], p);
        }
        ++r;
    }
    return r;
}

// Minimum rank over every assignment of the unobserved cells.
inline std::size_t brute_min_completion(Grid a, const std::vector<std::vector<bool>>& observed, long long p) {
    std::vector<std::pair<std::size_t, std::size_t>> holes;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            if (!observed[i][j]) holes.emplace_back(i, j);
    std::size_t best = std::min(a.size(), a.empty() ? 0 : a[0].size());
    std::vector<long long> digits(holes.size(), 0);
    while (true) {
        for (std::size_t h = 0; h < holes.size(); ++h) a[holes[h].first][holes[h].second] = digits[h];
        best = std::min(best, rank_mod(a, p));
        std::size_t h = 0;
        while (h < digits.size() && ++digits[h] == p) digits[h++] = 0;
        if (h == digits.size()) break;
    }
    return best;
}

// Rigidity by breadth-first search over change-set sizes.
inline std::size_t rigidity_bfs(const Grid& a, std::size_t r, long long p) {
    const std::size_t rows = a.size();
    const std::size_t cols = rows ? a[0].size() : 0;
    if (rank_mod(a, p) <= r) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) cells.emplace_back(i, j);
    for (std::size_t k = 1; k <= cells.size(); ++k) {
        for (const auto& support : subsets(cells.size(), k)) {
            std::vector<std::vector<bool>> observed(rows, std::vector<bool>(cols, true));
            for (std::size_t s : support) observed[cells[s].first][cells[s].second] = false;
            if (brute_min_completion(a, observed, p) <= r) return k;
        }
    }
    return cells.size();
}

// Characteristic polynomial of a symmetric matrix (Faddeev-LeVerrier), highest
// degree first, in long double.
inline std::vector<long double> char_poly(const std::vector<std::vector<long double>>& b) {
    const std::size_t n = b.size();
    std::vector<long double> c(n + 1, 0.0L);
    c[0] = 1.0L;
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n, 0.0L));
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = B M_{k-1} + c_{k-1} I
        std::vector<std::vector<long double>> next(n, std::vector<long double>(n, 0.0L));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                long double acc = 0.0L;
                for (std::size_t l = 0; l < n; ++l) acc += b[i][l] * m[l][j];
                next[i][j] = acc + (i == j ? c[k - 1] : 0.0L);
            }
        m = next;
        long double tr = 0.0L;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) tr += b[i][l] * m[l][i];
        c[k] = -tr / static_cast<long double>(k);
    }
    return c;
}

inline long double poly_eval(const std::vector<long double>& c, long double x) {
    long double v = 0.0L;
    for (long double coef : c) v = v * x + coef;
    return v;
}

// Real roots of a polynomial whose roots are all real, by recursive isolation
// between the roots of its derivative. Ascending order.
inline std::vector<long double> real_roots(const std::vector<long double>& c) {
    const std::size_t deg = c.size() - 1;
    if (deg == 0) return {};
    if (deg == 1) return {-c[1] / c[0]};
    std::vector<long double> deriv(deg);
    for (std::size_t i = 0; i < deg; ++i) deriv[i] = c[i] * static_cast<long double>(deg - i);
    const std::vector<long double> crit = real_roots(deriv);
    long double bound = 1.0L;
    for (std::size_t i = 1; i <= deg; ++i) bound = std::max(bound, 1.0L + std::fabs(c[i] / c[0]));
    std::vector<long double> knots{-bound};
    knots.insert(knots.end(), crit.begin(), crit.end());
    knots.push_back(bound);
    std::vector<long double> roots;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        long double lo = knots[k];
        long double hi = knots[k + 1];
        long double flo = poly_eval(c, lo);
        const long double fhi = poly_eval(c, hi);
        if (flo == 0.0L) { roots.push_back(lo); continue; }
        if ((flo > 0) == (fhi > 0)) {
            // Double root at a critical point shows up as a tangency.
            const long double at = std::fabs(flo) < std::fabs(fhi) ? lo : hi;
            if (std::fabs(poly_eval(c, at)) < 1e-12L * std::pow(bound, static_cast<long double>(deg))) roots.push_back(at);
            continue;
        }
        for (int it = 0; it < 200; ++it) {
            const long double mid = 0.5L * (lo + hi);
            const long double fm = poly_eval(c, mid);
            if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; }
            else hi = mid;
        }
        roots.push_back(0.5L * (lo + hi));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Eigenvalues of A^T A for a real matrix, descending.
inline std::vector<double> gram_eigenvalues(const matprop::DenseMatrix& a) {
    const std::size_t n = a.cols();
    std::vector<std::vector<long double>> b(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < a.rows(); ++k) b[i][j] += static_cast<long double>(a(k, i)) * a(k, j);
    std::vector<long double> roots = real_roots(char_poly(b));
    std::vector<double> out(roots.rbegin(), roots.rend());
    return out;
}

// trace((A^T A)^k) by repeated multiplication.
inline double gram_power_trace(const matprop::DenseMatrix& a, int k) {
    const std::size_t n = a.cols();
    std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t r = 0; r < a.rows(); ++r) b[i][j] += a(r, i) * a(r, j);
    auto p = b;
    for (int step = 1; step < k; ++step) {
        std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t l = 0; l < n; ++l) next[i][j] += p[i][l] * b[l][j];
        p = next;
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += p[i][i];
    return tr;
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace ref
