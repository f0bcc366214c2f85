#include "matprop/instances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"

namespace matprop {

namespace {

constexpr std::array<std::pair<Family, const char*>, 11> kFamilyNames{{
    {Family::LowRankField, "low-rank-field"},
    {Family::UniformField, "uniform-field"},
    {Family::Planted, "planted"},
    {Family::GaussianPair, "gaussian-pair"},
    {Family::StableRankPair, "stable-rank-pair"},
    {Family::SchattenPair, "schatten-pair"},
    {Family::OrthogonalTrunc, "orthogonal-trunc"},
    {Family::RankOneSigned, "rank-one-signed"},
    {Family::RandomSign, "random-sign"},
    {Family::AllOnes, "all-ones"},
    {Family::Zero, "zero"},
}};

double field_draw(const Field& f, Rng& rng) {
    return f.is_real() ? 2.0 * rng.uniform() - 1.0 : static_cast<double>(rng.uniform_below(f.modulus()));
}

DenseMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (auto& v : m.data()) v = rng.normal();
    return m;
}

std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)))); }

bool needs_real(Family f) {
    switch (f) {
        case Family::GaussianPair:
        case Family::StableRankPair:
        case Family::SchattenPair:
        case Family::OrthogonalTrunc:
        case Family::RankOneSigned:
        case Family::RandomSign:
            return true;
        default:
            return false;
    }
}

}  // namespace

std::string to_string(Family f) {
    for (const auto& [fam, name] : kFamilyNames)
        if (fam == f) return name;
    return "unknown";
}

Family parse_family(const std::string& name) {
    for (const auto& [fam, token] : kFamilyNames)
        if (name == token) return fam;
    throw ConfigError("unknown instance family '" + name + "'");
}

void InstanceSpec::validate() const {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (member != 0 && member != 1) throw InvalidArgument("member must be 0 or 1");
    if (p != 0) (void)Field::prime(p);
    if (needs_real(family) && p != 0) throw InvalidArgument(to_string(family) + " is a real-valued family");
    switch (family) {
        case Family::LowRankField:
        case Family::GaussianPair:
            if (d > n) throw InvalidArgument("d must not exceed n");
            break;
        case Family::Planted:
            if (!(eps > 0.0 && eps <= 1.0)) throw OutOfRange("planted eps must lie in (0, 1]");
            break;
        case Family::StableRankPair:
            if (d < 4) throw InvalidArgument("stable-rank pair needs d >= 4");
            if (!(eps > 0.0 && eps < 1.0 / 3.0)) throw OutOfRange("stable-rank pair eps must lie in (0, 1/3)");
            break;
        case Family::SchattenPair:
            if (!(eta > 0.0 && eta < 0.5)) throw OutOfRange("eta must lie in (0, 1/2)");
            [[fallthrough]];
        case Family::OrthogonalTrunc:
            if (!(trunc_C > 0.0)) throw InvalidArgument("trunc_C must be positive");
            break;
        default:
            break;
    }
}

DenseMatrix generate(const InstanceSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const Field f = spec.field();
    switch (spec.family) {
        case Family::LowRankField:
            return gen_low_rank_field(spec.n, spec.d, f, rng);
        case Family::UniformField:
            return gen_uniform(spec.n, f, rng);
        case Family::Planted: {
            const std::size_t t = std::min(spec.n, ceil_count(std::sqrt(spec.eps) * static_cast<double>(spec.n)));
            const DenseMatrix inner =
                spec.member == 0 ? gen_low_rank_field(t, std::min(spec.d, t), f, rng) : gen_uniform(t, f, rng);
            return gen_planted(inner, spec.n, rng);
        }
        case Family::GaussianPair: {
            auto pr = gen_gaussian_pair(spec.n, spec.d, rng, spec.noise_exponent);
            return spec.member == 0 ? pr.first : pr.second;
        }
        case Family::StableRankPair: {
            auto pr = gen_stable_rank_pair(spec.d, spec.eps, rng);
            return spec.member == 0 ? pr.first : pr.second;
        }
        case Family::SchattenPair: {
            auto pr = gen_schatten_pair(spec.n, spec.eta, spec.trunc_C, rng);
            return spec.member == 0 ? pr.first : pr.second;
        }
        case Family::OrthogonalTrunc:
            return truncate_scaled(gen_random_orthogonal(spec.n, rng), spec.trunc_C);
        case Family::RankOneSigned:
            return gen_rank_one_signed(spec.n, rng);
        case Family::RandomSign:
            return gen_random_signs(spec.n, rng);
        case Family::AllOnes:
            return DenseMatrix::ones(spec.n, spec.n, f);
        case Family::Zero:
            return DenseMatrix(spec.n, spec.n, f);
    }
    throw InvalidArgument("unhandled family");
}

DenseMatrix gen_low_rank_field(std::size_t n, std::size_t d, const Field& f, Rng& rng) {
    if (d > n) throw InvalidArgument("d must not exceed n");
    DenseMatrix u(n, d, f), v(n, d, f);
    for (auto& x : u.data()) x = field_draw(f, rng);
    for (auto& x : v.data()) x = field_draw(f, rng);
    DenseMatrix out = multiply(u, v.transpose());
    if (f.is_real() && d > 0) out = out.scaled(1.0 / static_cast<double>(d));
    return out;
}

DenseMatrix gen_uniform(std::size_t n, const Field& f, Rng& rng) {
    DenseMatrix m(n, n, f);
    for (auto& x : m.data()) x = field_draw(f, rng);
    return m;
}

DenseMatrix gen_planted(const DenseMatrix& inner, std::size_t n, Rng& rng) {
    if (inner.rows() > n || inner.cols() > n) throw InvalidArgument("planted block larger than n");
    const auto rows = rng.sample_without_replacement(n, inner.rows());
    const auto cols = rng.sample_without_replacement(n, inner.cols());
    DenseMatrix out(n, n, inner.field());
    for (std::size_t a = 0; a < inner.rows(); ++a)
        for (std::size_t b = 0; b < inner.cols(); ++b) out(rows[a], cols[b]) = inner(a, b);
    return out;
}

std::pair<DenseMatrix, DenseMatrix> gen_gaussian_pair(std::size_t n, std::size_t d, Rng& rng, double noise_exponent) {
    if (d > n) throw InvalidArgument("d must not exceed n");
    const DenseMatrix u = gaussian(n, d, rng);
    const DenseMatrix v = gaussian(n, d, rng);
    DenseMatrix first = multiply(u, v.transpose());
    DenseMatrix second = first;
    const double scale = std::pow(static_cast<double>(n), -noise_exponent);
    for (auto& x : second.data()) x += scale * rng.normal();
    return {std::move(first), std::move(second)};
}

StableRankPair gen_stable_rank_pair(std::size_t d, double eps, Rng& rng, double C) {
    if (d < 4) throw InvalidArgument("stable-rank pair needs d >= 4");
    if (!(eps > 0.0 && eps < 1.0 / 3.0)) throw OutOfRange("eps must lie in (0, 1/3)");
    const std::size_t m = ceil_count(static_cast<double>(d) / (eps * eps));
    const double s1 = 3.0 * std::sqrt(eps / static_cast<double>(d));

    StableRankPair out;
    out.kappa = C / std::log2(static_cast<double>(d) / eps);
    out.first = gaussian(m, d, rng);
    out.second = gaussian(m, d, rng);
    std::vector<double> u(m), v(d);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d; ++j) out.second(i, j) += s1 * u[i] * v[j];

    for (DenseMatrix* mat : {&out.first, &out.second}) {
        for (auto& x : mat->data()) {
            x *= out.kappa;
            if (std::abs(x) > 1.0) {
                x = std::copysign(1.0, x);
                ++out.clamped;
            }
        }
    }
    out.srank_first = stable_rank(out.first);
    out.srank_second = stable_rank(out.second);
    return out;
}

DenseMatrix truncate_scaled(const DenseMatrix& m, double trunc_C) {
    if (!(trunc_C > 0.0)) throw InvalidArgument("trunc_C must be positive");
    const double root = std::sqrt(static_cast<double>(std::max(m.rows(), m.cols())));
    const double cap = trunc_C / root;
    DenseMatrix out = m;
    for (auto& x : out.data()) x = std::clamp(x, -cap, cap) / cap;
    return out;
}

std::pair<DenseMatrix, DenseMatrix> gen_schatten_pair(std::size_t n, double eta, double trunc_C, Rng& rng) {
    if (!(eta > 0.0 && eta < 0.5)) throw OutOfRange("eta must lie in (0, 1/2)");
    const double root = std::sqrt(static_cast<double>(n));
    DenseMatrix first = gaussian(n, n, rng).scaled((1.0 + eta) / root);
    DenseMatrix second = gen_random_orthogonal(n, rng);
    for (auto& x : second.data()) x += eta / root * rng.normal();
    return {truncate_scaled(first, trunc_C), truncate_scaled(second, trunc_C)};
}

DenseMatrix gen_random_orthogonal(std::size_t n, Rng& rng) {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    // Column-major work arrays; a holds the Gaussian matrix, reduced in place.
    std::vector<double> a(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) a[j * n + i] = rng.normal();

    std::vector<std::vector<double>> reflectors(n);
    std::vector<double> sign(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        double* x = &a[k * n + k];
        const std::size_t len = n - k;
        double norm = 0.0;
        for (std::size_t i = 0; i < len; ++i) norm += x[i] * x[i];
        norm = std::sqrt(norm);
        const double alpha = x[0] > 0.0 ? -norm : norm;
        sign[k] = alpha < 0.0 ? -1.0 : 1.0;
        std::vector<double> v(x, x + len);
        v[0] -= alpha;
        double vn = 0.0;
        for (double t : v) vn += t * t;
        vn = std::sqrt(vn);
        if (vn == 0.0) continue;
        for (double& t : v) t /= vn;
        for (std::size_t j = k; j < n; ++j) {
            double* col = &a[j * n + k];
            double dot = 0.0;
            for (std::size_t i = 0; i < len; ++i) dot += v[i] * col[i];
            for (std::size_t i = 0; i < len; ++i) col[i] -= 2.0 * dot * v[i];
        }
        reflectors[k] = std::move(v);
    }

    // Q = H_0 H_1 ... H_{n-1}, accumulated right to left on the identity.
    std::vector<double> q(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const auto& v = reflectors[k];
        if (v.empty()) continue;
        const std::size_t len = n - k;
        for (std::size_t j = 0; j < n; ++j) {
            double* col = &q[j * n + k];
            double dot = 0.0;
            for (std::size_t i = 0; i < len; ++i) dot += v[i] * col[i];
            if (dot == 0.0) continue;
            for (std::size_t i = 0; i < len; ++i) col[i] -= 2.0 * dot * v[i];
        }
    }
    DenseMatrix out(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) out(i, j) = q[j * n + i] * sign[j];
    return out;
}

DenseMatrix gen_rank_one_signed(std::size_t n, Rng& rng) {
    std::vector<double> u(n), v(n);
    for (auto& x : u) x = rng.sign();
    for (auto& x : v) x = rng.sign();
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u[i] * v[j];
    return m;
}

DenseMatrix gen_random_signs(std::size_t n, Rng& rng) {
    DenseMatrix m(n, n);
    for (auto& x : m.data()) x = rng.sign();
    return m;
}

std::size_t distance_to_rank(const DenseMatrix& m, std::size_t r) {
    const Field& f = m.field();
    if (f.is_real()) throw InvalidArgument("distance_to_rank needs a prime field");
    const std::uint32_t p = f.modulus();
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    if (p > 3 || rows > 6 || cols > 6) throw TooLarge("distance_to_rank is exhaustive: GF(2)/GF(3), at most 6 x 6");
    if (r >= std::min(rows, cols)) return 0;

    std::vector<std::vector<int>> column(cols, std::vector<int>(rows));
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) column[j][i] = static_cast<int>(m(i, j));
    if (r == 0) return m.nonzeros();

    // Every r-dimensional subspace of GF(p)^rows once, as a reduced echelon basis.
    std::size_t best = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> pivots(r);
    for (std::size_t k = 0; k < r; ++k) pivots[k] = k;
    for (;;) {
        std::vector<std::pair<std::size_t, std::size_t>> free_slots;  // (basis row, coordinate)
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t c = pivots[k] + 1; c < rows; ++c)
                if (!std::binary_search(pivots.begin(), pivots.end(), c)) free_slots.push_back({k, c});
        std::vector<int> digits(free_slots.size(), 0);
        for (;;) {
            std::vector<std::vector<int>> basis(r, std::vector<int>(rows, 0));
            for (std::size_t k = 0; k < r; ++k) basis[k][pivots[k]] = 1;
            for (std::size_t s = 0; s < free_slots.size(); ++s) basis[free_slots[s].first][free_slots[s].second] = digits[s];

            // Enumerate the p^r vectors of the span, keeping each column's nearest.
            std::size_t total = 0;
            std::vector<std::size_t> nearest(cols, rows + 1);
            std::vector<int> coef(r, 0);
            for (;;) {
                std::vector<int> vec(rows, 0);
                for (std::size_t k = 0; k < r; ++k)
                    if (coef[k])
                        for (std::size_t i = 0; i < rows; ++i) vec[i] = (vec[i] + coef[k] * basis[k][i]) % static_cast<int>(p);
                for (std::size_t j = 0; j < cols; ++j) {
                    std::size_t dist = 0;
                    for (std::size_t i = 0; i < rows; ++i) dist += vec[i] != column[j][i];
                    nearest[j] = std::min(nearest[j], dist);
                }
                std::size_t k = 0;
                while (k < r && ++coef[k] == static_cast<int>(p)) coef[k++] = 0;
                if (k == r) break;
            }
            for (std::size_t j = 0; j < cols; ++j) total += nearest[j];
            best = std::min(best, total);

            std::size_t s = 0;
            while (s < digits.size() && ++digits[s] == static_cast<int>(p)) digits[s++] = 0;
            if (s == digits.size()) break;
        }
        // Next pivot set in lexicographic order.
        std::size_t k = r;
        while (k > 0 && pivots[k - 1] == rows - r + k - 1) --k;
        if (k == 0) break;
        ++pivots[k - 1];
        for (std::size_t t = k; t < r; ++t) pivots[t] = pivots[t - 1] + 1;
    }
    return best;
}

double best_threshold_accuracy(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("both classes need samples");
    const std::size_t features = a.front().size();
    const double total = static_cast<double>(a.size() + b.size());
    double best = 0.5;
    for (std::size_t f = 0; f < features; ++f) {
        std::vector<std::pair<double, int>> pts;
        pts.reserve(a.size() + b.size());
        for (const auto& s : a) pts.push_back({s.at(f), 0});
        for (const auto& s : b) pts.push_back({s.at(f), 1});
        std::sort(pts.begin(), pts.end());
        // Rule "label 1 iff x > cut", swept over every cut between distinct values.
        double correct = static_cast<double>(b.size());
        best = std::max(best, std::max(correct, total - correct) / total);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            correct += pts[k].second == 0 ? 1.0 : -1.0;
            if (k + 1 < pts.size() && pts[k + 1].first == pts[k].first) continue;
            best = std::max(best, std::max(correct, total - correct) / total);
        }
    }
    return best;
}

IndistinguishabilityResult indistinguishability(std::size_t n, std::size_t d, std::uint32_t p, std::size_t support,
                                                std::size_t draws, Rng& rng) {
    if (support > n * n) throw InvalidArgument("support larger than the matrix");
    const Field f = Field::prime(p);
    const auto flat = rng.sample_without_replacement(n * n, support);
    auto features = [&](const DenseMatrix& m) {
        std::vector<double> x;
        double nz = 0.0;
        for (std::size_t k : flat) {
            x.push_back(m(k / n, k % n));
            nz += x.back() != 0.0;
        }
        x.push_back(nz);
        return x;
    };
    std::vector<std::vector<double>> low, uniform;
    for (std::size_t t = 0; t < draws; ++t) {
        low.push_back(features(gen_low_rank_field(n, d, f, rng)));
        uniform.push_back(features(gen_uniform(n, f, rng)));
    }
    return {best_threshold_accuracy(low, uniform), draws};
}

}  // namespace matprop
