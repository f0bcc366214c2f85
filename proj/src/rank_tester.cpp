#include "matprop/rank_tester.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"

namespace matprop {

namespace {

// Spanning set of prefix-restricted columns, with a transform back to the
// original columns: basis vector k equals sum_s t[k][s] * S_s.
class ModBasis {
public:
    ModBasis(std::size_t length, std::uint32_t p) : length_(length), p_(p), field_(p) {}

    std::size_t size() const { return vecs_.size(); }

    // Coefficients against the basis (reduced echelon form, so they are read
    // off the pivots) and the residual.
    bool express(std::span<const double> a, std::vector<double>& x) const {
        std::vector<std::uint64_t> r(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(length_));
        std::vector<std::uint64_t> coef(vecs_.size());
        for (std::size_t k = 0; k < vecs_.size(); ++k) {
            coef[k] = r[pivots_[k]];
            if (coef[k] == 0) continue;
            for (std::size_t i = 0; i < length_; ++i) r[i] = (r[i] + p_ - coef[k] * vecs_[k][i] % p_) % p_;
        }
        if (std::any_of(r.begin(), r.end(), [](std::uint64_t v) { return v != 0; })) return false;
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t k = 0; k < vecs_.size(); ++k) {
            if (coef[k] == 0) continue;
            for (std::size_t s = 0; s < transforms_[k].size(); ++s) {
                const std::uint64_t add = coef[k] * transforms_[k][s] % p_;
                x[s] = static_cast<double>((static_cast<std::uint64_t>(x[s]) + add) % p_);
            }
        }
        return true;
    }

    // Adds column `source` (with prefix a) if independent; returns whether it was added.
    bool add(std::span<const double> a, std::size_t source) {
        std::vector<std::uint64_t> r(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(length_));
        std::vector<std::uint64_t> t(source + 1, 0);
        t[source] = 1;
        for (std::size_t k = 0; k < vecs_.size(); ++k) {
            const std::uint64_t c = r[pivots_[k]];
            if (c == 0) continue;
            for (std::size_t i = 0; i < length_; ++i) r[i] = (r[i] + p_ - c * vecs_[k][i] % p_) % p_;
            for (std::size_t s = 0; s < transforms_[k].size(); ++s) t[s] = (t[s] + p_ - c * transforms_[k][s] % p_) % p_;
        }
        const auto piv_it = std::find_if(r.begin(), r.end(), [](std::uint64_t v) { return v != 0; });
        if (piv_it == r.end()) return false;
        const auto piv = static_cast<std::size_t>(piv_it - r.begin());
        const std::uint64_t inv = field_.inv(Fp{static_cast<std::uint32_t>(r[piv])}).value;
        for (auto& v : r) v = v * inv % p_;
        for (auto& v : t) v = v * inv % p_;
        for (std::size_t k = 0; k < vecs_.size(); ++k) {
            const std::uint64_t f = vecs_[k][piv];
            if (f == 0) continue;
            for (std::size_t i = 0; i < length_; ++i) vecs_[k][i] = (vecs_[k][i] + p_ - f * r[i] % p_) % p_;
            transforms_[k].resize(t.size(), 0);
            for (std::size_t s = 0; s < t.size(); ++s) transforms_[k][s] = (transforms_[k][s] + p_ - f * t[s] % p_) % p_;
        }
        vecs_.push_back(std::move(r));
        transforms_.push_back(std::move(t));
        pivots_.push_back(piv);
        return true;
    }

private:
    std::size_t length_;
    std::uint64_t p_;
    PrimeField field_;
    std::vector<std::vector<std::uint64_t>> vecs_;
    std::vector<std::vector<std::uint64_t>> transforms_;
    std::vector<std::size_t> pivots_;
};

// Orthonormal basis by modified Gram-Schmidt with one reorthogonalization pass.
class RealBasis {
public:
    explicit RealBasis(std::size_t length) : length_(length) {}

    std::size_t size() const { return vecs_.size(); }

    bool express(std::span<const double> a, std::vector<double>& x) const {
        std::vector<double> r(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(length_));
        const double norm_a = norm(r);
        std::vector<double> coef = project(r);
        if (norm(r) > kSpanTolerance * norm_a) return false;
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t k = 0; k < vecs_.size(); ++k)
            for (std::size_t s = 0; s < transforms_[k].size(); ++s) x[s] += coef[k] * transforms_[k][s];
        return true;
    }

    bool add(std::span<const double> a, std::size_t source, double keep_tol) {
        std::vector<double> r(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(length_));
        const double norm_a = norm(r);
        std::vector<double> coef = project(r);
        const double norm_r = norm(r);
        if (norm_r == 0.0 || norm_r <= keep_tol * norm_a) return false;
        std::vector<double> t(source + 1, 0.0);
        t[source] = 1.0;
        for (std::size_t k = 0; k < vecs_.size(); ++k)
            for (std::size_t s = 0; s < transforms_[k].size(); ++s) t[s] -= coef[k] * transforms_[k][s];
        for (auto& v : r) v /= norm_r;
        for (auto& v : t) v /= norm_r;
        vecs_.push_back(std::move(r));
        transforms_.push_back(std::move(t));
        return true;
    }

private:
    static double norm(const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); }

    std::vector<double> project(std::vector<double>& r) const {
        std::vector<double> coef(vecs_.size(), 0.0);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < vecs_.size(); ++k) {
                const double c = std::inner_product(r.begin(), r.end(), vecs_[k].begin(), 0.0);
                for (std::size_t i = 0; i < length_; ++i) r[i] -= c * vecs_[k][i];
                coef[k] += c;
            }
        }
        return coef;
    }

    std::size_t length_;
    std::vector<std::vector<double>> vecs_;
    std::vector<std::vector<double>> transforms_;
};

class PrefixBasis {
public:
    PrefixBasis(std::size_t length, const Field& field) {
        if (field.is_prime()) mod_.emplace(length, field.modulus());
        else real_.emplace(length);
    }
    bool express(std::span<const double> a, std::vector<double>& x) const {
        return mod_ ? mod_->express(a, x) : real_->express(a, x);
    }
    bool add(std::span<const double> a, std::size_t source, double keep_tol) {
        return mod_ ? mod_->add(a, source) : real_->add(a, source, keep_tol);
    }
    std::size_t size() const { return mod_ ? mod_->size() : real_->size(); }

private:
    std::optional<ModBasis> mod_;
    std::optional<RealBasis> real_;
};

constexpr double kKeepTolerance = 1e-12;

void check_completion_invariants(const std::vector<std::vector<double>>& basis_cols,
                                 const std::vector<std::vector<double>>& processed, std::size_t rows,
                                 const Field& field) {
    PrefixBasis full(rows, field);
    for (std::size_t s = 0; s < basis_cols.size(); ++s) {
        if (!full.add(basis_cols[s], s, kKeepTolerance)) throw std::logic_error("completion basis is not independent");
    }
    std::vector<double> x(basis_cols.size());
    for (const auto& col : processed) {
        if (!full.express(col, x)) throw std::logic_error("completed column outside the basis span");
    }
}

// Ceiling that ignores roundoff just above an integer (bisection leaves
// eta a few ulps off exact values such as 1/4).
double stable_ceil(double x) { return std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))); }

double size_log_factor(std::size_t d, double L) {
    return std::log2(static_cast<double>(d)) + std::log2(L) + 1.0;
}

}  // namespace

void RankTestConfig::validate() const {
    if (d < 1) throw InvalidArgument("rank test needs d >= 1");
    if (!(eps > 0.0 && eps <= kMaxRankEps)) throw OutOfRange("eps must lie in (0, " + std::to_string(kMaxRankEps) + "]");
    if (!(c_pattern > 0.0) || !std::isfinite(c_pattern)) throw InvalidArgument("c_pattern must be positive");
    if (amplification < 1) throw InvalidArgument("amplification must be >= 1");
}

double solve_eta(double eps) {
    if (!(eps > 0.0 && eps <= kMaxRankEps)) throw OutOfRange("eps must lie in (0, " + std::to_string(kMaxRankEps) + "]");
    auto f = [](double eta) { return -eta * std::log2(eta); };
    double lo = 0.0;
    double hi = 1.0 / std::numbers::e;
    for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (f(mid) < eps) lo = mid;
        else hi = mid;
    }
    return std::abs(f(lo) - eps) <= std::abs(f(hi) - eps) && lo > 0.0 ? lo : hi;
}

std::size_t SamplingPattern::observed_rows(std::size_t local_col) const {
    std::size_t observed = 0;
    for (std::size_t i = 0; i < levels; ++i)
        if (local_col < col_sizes[i]) observed = row_sizes[i];
    return observed;
}

std::vector<Index> SamplingPattern::query_set() const {
    std::vector<Index> q;
    q.reserve(nominal_queries());
    for (std::size_t j = 0; j < col_order.size(); ++j) {
        const std::size_t len = observed_rows(j);
        for (std::size_t i = 0; i < len; ++i) q.push_back({row_order[i], col_order[j]});
    }
    return q;
}

std::size_t SamplingPattern::nominal_queries() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < levels; ++i) total += row_sizes[i] * col_sizes[i];
    return total;
}

SamplingPattern build_pattern(std::size_t n, const RankTestConfig& cfg, Rng& rng) {
    return build_pattern(n, n, cfg, rng);
}

SamplingPattern build_pattern(std::size_t rows, std::size_t cols, const RankTestConfig& cfg, Rng& rng) {
    cfg.validate();
    if (rows == 0 || cols == 0) throw InvalidArgument("pattern needs a non-empty matrix");
    SamplingPattern pat;
    pat.rows = rows;
    pat.cols = cols;
    pat.eta = solve_eta(cfg.eps);
    const double L = std::log2(1.0 / pat.eta);
    pat.levels = static_cast<std::size_t>(stable_ceil(L));
    const double base = cfg.c_pattern * size_log_factor(cfg.d, L) * static_cast<double>(cfg.d) * L;

    for (std::size_t i = 1; i <= pat.levels; ++i) {
        const double two_i = std::ldexp(1.0, static_cast<int>(i));
        const double r = stable_ceil(base * two_i);
        const double c = stable_ceil(base / (two_i * pat.eta));
        pat.row_sizes.push_back(r >= static_cast<double>(rows) ? rows : static_cast<std::size_t>(r));
        pat.col_sizes.push_back(c >= static_cast<double>(cols) ? cols : static_cast<std::size_t>(c));
    }
    // Prefixes of one random permutation give nested uniform sets.
    pat.row_order = rng.sample_without_replacement(rows, pat.row_sizes.back());
    pat.col_order = rng.sample_without_replacement(cols, pat.col_sizes.front());
    return pat;
}

PartialMatrix observe_pattern(EntryOracle& oracle, const SamplingPattern& pattern) {
    const std::vector<Index> q = pattern.query_set();
    const std::vector<double> values = oracle.read_entries(q);
    PartialMatrix p(pattern.row_order.size(), pattern.col_order.size(), oracle.field());
    std::size_t k = 0;
    for (std::size_t j = 0; j < p.cols; ++j) {
        const std::size_t len = pattern.observed_rows(j);
        for (std::size_t i = 0; i < len; ++i) p.observe(i, j, values[k++]);
    }
    return p;
}

std::vector<std::size_t> staircase_profile(const PartialMatrix& p) {
    std::vector<std::size_t> prefix(p.cols, 0);
    for (std::size_t j = 0; j < p.cols; ++j) {
        std::size_t len = 0;
        while (len < p.rows && p.observed(len, j)) ++len;
        for (std::size_t i = len; i < p.rows; ++i) {
            if (p.observed(i, j)) {
                throw MaskNotStaircase("column " + std::to_string(j) + " has an observed entry below an unobserved one");
            }
        }
        prefix[j] = len;
    }
    return prefix;
}

CompletionResult complete_min_rank(const PartialMatrix& p, bool check_invariants) {
    const std::vector<std::size_t> prefix = staircase_profile(p);
    std::vector<std::size_t> order(p.cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prefix[a] > prefix[b]; });

    CompletionResult out;
    out.completed = DenseMatrix(p.rows, p.cols, p.field);
    std::vector<std::vector<double>> basis_cols;
    std::vector<std::vector<double>> processed;
    std::vector<double> column(p.rows);
    std::vector<double> x;
    const std::uint64_t modulus = p.field.modulus();

    std::size_t g = 0;
    while (g < order.size()) {
        const std::size_t len = prefix[order[g]];
        std::size_t g_end = g;
        while (g_end < order.size() && prefix[order[g_end]] == len) ++g_end;

        // Basis of the current completed columns restricted to this prefix.
        PrefixBasis basis(len, p.field);
        for (std::size_t s = 0; s < basis_cols.size(); ++s) basis.add(basis_cols[s], s, kKeepTolerance);

        for (; g < g_end; ++g) {
            const std::size_t j = order[g];
            for (std::size_t i = 0; i < len; ++i) column[i] = p.value(i, j);
            x.assign(basis_cols.size(), 0.0);
            if (basis.express(column, x)) {
                for (std::size_t i = len; i < p.rows; ++i) {
                    if (modulus != 0) {
                        std::uint64_t acc = 0;
                        for (std::size_t s = 0; s < basis_cols.size(); ++s) {
                            acc = (acc + static_cast<std::uint64_t>(x[s]) * static_cast<std::uint64_t>(basis_cols[s][i])) % modulus;
                        }
                        column[i] = static_cast<double>(acc);
                    } else {
                        double acc = 0.0;
                        for (std::size_t s = 0; s < basis_cols.size(); ++s) acc += x[s] * basis_cols[s][i];
                        column[i] = acc;
                    }
                }
            } else {
                for (std::size_t i = len; i < p.rows; ++i) column[i] = 1.0;
                basis_cols.push_back(column);
                out.basis_columns.push_back(j);
                if (!basis.add(column, basis_cols.size() - 1, kSpanTolerance)) {
                    throw std::logic_error("independent column rejected by the basis");
                }
            }
            for (std::size_t i = 0; i < p.rows; ++i) out.completed(i, j) = column[i];
            if (check_invariants) {
                processed.push_back(column);
                check_completion_invariants(basis_cols, processed, p.rows, p.field);
            }
        }
    }
    out.rank = basis_cols.size();
    return out;
}

std::size_t min_completion_rank(const PartialMatrix& p) { return complete_min_rank(p).rank; }

Verdict test_rank(EntryOracle& oracle, const RankTestConfig& cfg) {
    Rng rng(cfg.seed);
    return test_rank(oracle, cfg, rng);
}

Verdict test_rank(EntryOracle& oracle, const RankTestConfig& cfg, Rng& rng) {
    cfg.validate();
    Verdict v;
    v.seed = cfg.seed;
    const std::size_t rows = oracle.rows();
    const std::size_t cols = oracle.cols();

    if (std::min(rows, cols) < 2 * cfg.d) {
        // Outside the sublinear regime: read everything.
        std::vector<Index> all;
        all.reserve(rows * cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) all.push_back({i, j});
        oracle.seal(all);
        const std::vector<double> values = oracle.read_entries(all);
        const std::size_t r = rank_exact(DenseMatrix(rows, cols, values, oracle.field()));
        v.statistic = static_cast<double>(r);
        v.decision = r > cfg.d ? Decision::H1 : Decision::H0;
        v.queries_used = oracle.queries_used();
        v.stage_queries[0] = v.queries_used;
        return v;
    }

    std::vector<SamplingPattern> patterns;
    std::vector<Index> sealed;
    const std::uint64_t key = rng.next_u64();
    for (std::size_t k = 0; k < cfg.amplification; ++k) {
        Rng sub(key, k);
        patterns.push_back(build_pattern(rows, cols, cfg, sub));
        const std::vector<Index> q = patterns.back().query_set();
        sealed.insert(sealed.end(), q.begin(), q.end());
    }
    oracle.seal(sealed);

    std::size_t worst = 0;
    for (const SamplingPattern& pat : patterns) {
        worst = std::max(worst, min_completion_rank(observe_pattern(oracle, pat)));
        if (worst > cfg.d) break;
    }
    v.statistic = static_cast<double>(worst);
    v.decision = worst > cfg.d ? Decision::H1 : Decision::H0;
    v.queries_used = oracle.queries_used();
    v.stage_queries[0] = v.queries_used;
    return v;
}

Verdict test_rank_sensing(SensingOracle& oracle, std::size_t d, Rng& rng) {
    const std::size_t n_rows = oracle.rows();
    const std::size_t n_cols = oracle.cols();
    const std::size_t k = d + 1;
    const Field& field = oracle.field();
    const std::uint64_t p = field.modulus();
    auto draw = [&]() { return p != 0 ? static_cast<double>(rng.uniform_below(p)) : rng.normal(); };

    std::vector<std::vector<double>> left(k, std::vector<double>(n_rows));
    std::vector<std::vector<double>> right(k, std::vector<double>(n_cols));
    for (auto& s : left)
        for (auto& v : s) v = draw();
    for (auto& t : right)
        for (auto& v : t) v = draw();

    DenseMatrix sketch(k, k, field);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sketch(i, j) = oracle.sense_outer(left[i], right[j]);

    Verdict v;
    v.seed = rng.seed();
    const std::size_t r = rank_exact(sketch);
    v.statistic = static_cast<double>(r);
    v.decision = r == k ? Decision::H1 : Decision::H0;
    v.queries_used = oracle.queries_used();
    v.stage_queries[0] = v.queries_used;
    return v;
}

namespace {

// X = A[R, C]^{-1} A[R, :] over the matrix's field; throws NotFullRankBase.
std::vector<std::vector<double>> solve_base(const DenseMatrix& m, std::span<const std::size_t> R,
                                            std::span<const std::size_t> C) {
    const std::size_t t = R.size();
    const std::size_t n = m.cols();
    // Augmented [A[R,C] | A[R,:]] reduced by Gauss-Jordan.
    std::vector<std::vector<double>> a(t, std::vector<double>(t + n));
    for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < t; ++j) a[i][j] = m(R[i], C[j]);
        for (std::size_t j = 0; j < n; ++j) a[i][t + j] = m(R[i], j);
    }
    const std::uint64_t p = m.field().modulus();
    for (std::size_t col = 0; col < t; ++col) {
        std::size_t piv = col;
        if (p != 0) {
            while (piv < t && a[piv][col] == 0.0) ++piv;
        } else {
            for (std::size_t r = col + 1; r < t; ++r)
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        const double scale = std::max(1.0, m.max_abs());
        if (piv == t || (p == 0 && std::abs(a[piv][col]) <= 1e-12 * scale)) {
            throw NotFullRankBase("base submatrix is singular");
        }
        std::swap(a[piv], a[col]);
        if (p != 0) {
            const PrimeField& f = m.field().prime_field();
            const std::uint64_t inv = f.inv(Fp{static_cast<std::uint32_t>(a[col][col])}).value;
            for (auto& v : a[col]) v = static_cast<double>(static_cast<std::uint64_t>(v) * inv % p);
            for (std::size_t r = 0; r < t; ++r) {
                if (r == col || a[r][col] == 0.0) continue;
                const auto factor = static_cast<std::uint64_t>(a[r][col]);
                for (std::size_t j = 0; j < t + n; ++j) {
                    const std::uint64_t sub = factor * static_cast<std::uint64_t>(a[col][j]) % p;
                    a[r][j] = static_cast<double>((static_cast<std::uint64_t>(a[r][j]) + p - sub) % p);
                }
            }
        } else {
            const double inv = 1.0 / a[col][col];
            for (auto& v : a[col]) v *= inv;
            for (std::size_t r = 0; r < t; ++r) {
                if (r == col || a[r][col] == 0.0) continue;
                const double factor = a[r][col];
                for (std::size_t j = 0; j < t + n; ++j) a[r][j] -= factor * a[col][j];
            }
        }
    }
    std::vector<std::vector<double>> x(t, std::vector<double>(n));
    for (std::size_t i = 0; i < t; ++i) std::copy(a[i].begin() + static_cast<std::ptrdiff_t>(t), a[i].end(), x[i].begin());
    return x;
}

template <class Visit>
void for_each_augment(const DenseMatrix& m, std::span<const std::size_t> R, std::span<const std::size_t> C, Visit visit) {
    if (R.size() != C.size()) throw NotFullRankBase("base submatrix must be square");
    for (std::size_t r : R)
        if (r >= m.rows()) throw IndexOutOfRange("base row outside the matrix");
    for (std::size_t c : C)
        if (c >= m.cols()) throw IndexOutOfRange("base column outside the matrix");
    const auto x = solve_base(m, R, C);
    std::vector<std::uint8_t> in_r(m.rows(), 0);
    std::vector<std::uint8_t> in_c(m.cols(), 0);
    for (std::size_t r : R) in_r[r] = 1;
    for (std::size_t c : C) in_c[c] = 1;
    const std::uint64_t p = m.field().modulus();
    const double tol = 1e-9 * std::max(1.0, m.max_abs());
    const std::size_t t = R.size();
    // Schur complement A_rc - A[r, C] X[:, c] decides each pair.
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (in_r[r]) continue;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (in_c[c]) continue;
            bool augments;
            if (p != 0) {
                std::uint64_t acc = static_cast<std::uint64_t>(m(r, c));
                for (std::size_t k = 0; k < t; ++k) {
                    const std::uint64_t sub = static_cast<std::uint64_t>(m(r, C[k])) * static_cast<std::uint64_t>(x[k][c]) % p;
                    acc = (acc + p - sub) % p;
                }
                augments = acc != 0;
            } else {
                double acc = m(r, c);
                for (std::size_t k = 0; k < t; ++k) acc -= m(r, C[k]) * x[k][c];
                augments = std::abs(acc) > tol;
            }
            if (augments) visit(r, c);
        }
    }
}

}  // namespace

std::vector<Index> augment_set(const DenseMatrix& m, std::span<const std::size_t> R, std::span<const std::size_t> C) {
    std::vector<Index> out;
    for_each_augment(m, R, C, [&](std::size_t r, std::size_t c) { out.push_back({r, c}); });
    return out;
}

std::vector<std::size_t> augment_counts(const DenseMatrix& m, std::span<const std::size_t> R,
                                        std::span<const std::size_t> C) {
    std::vector<std::size_t> counts(m.rows(), 0);
    for_each_augment(m, R, C, [&](std::size_t r, std::size_t) { ++counts[r]; });
    return counts;
}

bool has_augment_pattern(const DenseMatrix& m, std::span<const std::size_t> R, std::span<const std::size_t> C,
                         std::size_t level, double eta) {
    if (level < 1) throw InvalidArgument("pattern levels start at 1");
    if (m.rows() == 0) return false;
    std::vector<std::size_t> counts = augment_counts(m, R, C);
    std::sort(counts.begin(), counts.end(), std::greater<>());
    const std::size_t n = m.rows();
    const double two_i = std::ldexp(1.0, static_cast<int>(level));
    const auto rank_pos = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / two_i));
    const double threshold = std::ldexp(1.0, static_cast<int>(level) - 1) * eta * static_cast<double>(n);
    return static_cast<double>(counts[rank_pos - 1]) >= threshold;
}

}  // namespace matprop
