#include "matprop/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"

namespace matprop {

namespace {

// Seal only an oracle nobody has touched; a tester that planned a larger
// superset has already sealed it.
void seal_if_fresh(EntryOracle& oracle, std::span<const Index> q) {
    if (!oracle.sealed() && oracle.queries_used() == 0) oracle.seal(q);
}

void require_real(const Field& f, const char* who) {
    if (!f.is_real()) throw InvalidArgument(std::string(who) + " needs a real matrix");
}

// Vose alias table for O(1) draws from a fixed discrete distribution.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) : prob_(weights.size()), alias_(weights.size()) {
        const std::size_t n = weights.size();
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        std::vector<double> scaled(n);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::size_t i : large) prob_[i] = 1.0;
        for (std::size_t i : small) prob_[i] = 1.0;
    }

    std::size_t draw(Rng& rng) const {
        const std::size_t col = rng.uniform_below(prob_.size());
        return rng.uniform() < prob_[col] ? col : alias_[col];
    }

private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
};

std::size_t derived_resample(std::size_t given, const SamplerParams& p, std::size_t n) {
    if (given != 0) return given;
    const double ln_n = std::log(std::max<double>(2.0, static_cast<double>(n)));
    return static_cast<std::size_t>(std::ceil(p.resample_factor * p.d_hint * ln_n / (p.tau * p.tau)));
}

std::vector<std::size_t> bernoulli_pool(std::size_t n, double rate, Rng& rng) {
    std::vector<std::size_t> pool;
    if (rate >= 1.0) {
        pool.resize(n);
        std::iota(pool.begin(), pool.end(), 0);
        return pool;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (rng.bernoulli(rate)) pool.push_back(i);
    return pool;
}

// Draws `count` items by weight and returns (item, multiplicity) in item order.
std::vector<std::pair<std::size_t, std::size_t>> resample(const std::vector<double>& weights, std::size_t count, Rng& rng) {
    const AliasTable table(weights);
    std::vector<std::size_t> hits(weights.size(), 0);
    for (std::size_t k = 0; k < count; ++k) ++hits[table.draw(rng)];
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < hits.size(); ++i)
        if (hits[i] != 0) out.emplace_back(i, hits[i]);
    return out;
}

}  // namespace

void SamplerParams::validate() const {
    if (!(tau > 0.0 && tau < 0.5)) throw OutOfRange("tau must lie in (0, 1/2)");
    if (!(d_hint > 0.0)) throw InvalidArgument("d_hint must be positive");
    if (N_cycles < 1 || q_cycle < 1 || k_sketch < 1) throw InvalidArgument("cycle and sketch counts must be >= 1");
    if (!(pool_factor > 0.0 && probe_factor > 0.0 && resample_factor > 0.0)) {
        throw InvalidArgument("sampling factors must be positive");
    }
}

std::vector<Index> plan_frobenius(std::size_t rows, std::size_t cols, std::size_t q0, Rng& rng) {
    if (q0 < 1) throw InvalidArgument("q0 must be >= 1");
    std::vector<Index> draws(q0);
    for (auto& ix : draws) ix = {rng.uniform_below(rows), rng.uniform_below(cols)};
    return draws;
}

namespace {

template <class Oracle>
EstimatorReport frobenius_from(Oracle& oracle, std::span<const Index> draws) {
    require_real(oracle.field(), "estimate_frobenius");
    const std::size_t before = oracle.queries_used();
    const std::vector<double> y = oracle.read_entries(draws);
    double sum = 0.0;
    for (double v : y) sum += v * v;
    EstimatorReport r;
    const double area = static_cast<double>(oracle.rows()) * static_cast<double>(oracle.cols());
    r.estimate = area / static_cast<double>(draws.size()) * sum;
    r.queries_used = oracle.queries_used() - before;
    r.nominal_samples = draws.size();
    return r;
}

template <class Oracle>
EstimatorReport screen_from(Oracle& oracle, const ScreenPlan& plan) {
    require_real(oracle.field(), "opnorm_screen");
    const auto q = plan.queries();
    const std::size_t before = oracle.queries_used();
    DenseMatrix block(plan.rows.size(), plan.cols.size(), oracle.read_entries(q));
    EstimatorReport r;
    r.estimate = operator_norm(block);
    r.queries_used = oracle.queries_used() - before;
    r.nominal_samples = q.size();
    r.aux["rows"] = static_cast<double>(plan.rows.size());
    r.aux["cols"] = static_cast<double>(plan.cols.size());
    return r;
}

}  // namespace

EstimatorReport estimate_frobenius_at(EntryOracle& oracle, std::span<const Index> draws) {
    seal_if_fresh(oracle, draws);
    return frobenius_from(oracle, draws);
}

EstimatorReport estimate_frobenius_at(SensingOracle& oracle, std::span<const Index> draws) {
    return frobenius_from(oracle, draws);
}

EstimatorReport estimate_frobenius(EntryOracle& oracle, std::size_t q0, Rng& rng) {
    const auto draws = plan_frobenius(oracle.rows(), oracle.cols(), q0, rng);
    return estimate_frobenius_at(oracle, draws);
}

std::vector<Index> ScreenPlan::queries() const {
    std::vector<Index> q;
    q.reserve(rows.size() * cols.size());
    for (std::size_t r : rows)
        for (std::size_t c : cols) q.push_back({r, c});
    return q;
}

ScreenPlan plan_screen(std::size_t rows, std::size_t cols, std::size_t q, Rng& rng) {
    if (q < 1) throw InvalidArgument("screen size must be >= 1");
    ScreenPlan p;
    p.rows = rng.sample_without_replacement(rows, q);
    p.cols = rng.sample_without_replacement(cols, q);
    return p;
}

EstimatorReport run_screen(EntryOracle& oracle, const ScreenPlan& plan) {
    seal_if_fresh(oracle, plan.queries());
    return screen_from(oracle, plan);
}

EstimatorReport run_screen(SensingOracle& oracle, const ScreenPlan& plan) { return screen_from(oracle, plan); }

EstimatorReport opnorm_screen(EntryOracle& oracle, std::size_t q, Rng& rng) {
    return run_screen(oracle, plan_screen(oracle.rows(), oracle.cols(), q, rng));
}

std::vector<Index> OpnormSamplingPlan::superset() const {
    std::vector<std::size_t> cols_touched;
    for (const auto& probes : row_probes) cols_touched.insert(cols_touched.end(), probes.begin(), probes.end());
    cols_touched.insert(cols_touched.end(), pool_cols.begin(), pool_cols.end());
    std::sort(cols_touched.begin(), cols_touched.end());
    cols_touched.erase(std::unique(cols_touched.begin(), cols_touched.end()), cols_touched.end());
    std::vector<Index> q;
    q.reserve(pool_rows.size() * cols_touched.size());
    for (std::size_t r : pool_rows)
        for (std::size_t c : cols_touched) q.push_back({r, c});
    return q;
}

OpnormSamplingPlan plan_opnorm_sampling(std::size_t rows, std::size_t cols, const SamplerParams& params, Rng& rng) {
    params.validate();
    OpnormSamplingPlan plan;
    plan.rows = rows;
    plan.cols = cols;
    plan.tau = params.tau;
    plan.probes = static_cast<std::size_t>(std::ceil(params.probe_factor / params.tau));
    plan.q_row = derived_resample(params.q_row, params, rows);
    plan.q_col = derived_resample(params.q_col, params, cols);

    // Fresh key per call, so repeated calls on one stream draw fresh pools.
    const std::uint64_t key = rng.next_u64();
    Rng pools(key, 1);
    plan.pool_rows = bernoulli_pool(rows, params.pool_factor / (static_cast<double>(rows) * params.tau), pools);
    if (plan.pool_rows.empty()) throw EmptyPool("row pool is empty");
    plan.pool_cols = bernoulli_pool(cols, params.pool_factor / (static_cast<double>(cols) * params.tau), pools);
    if (plan.pool_cols.empty()) throw EmptyPool("column pool is empty");

    Rng probes(key, 2);
    plan.row_probes.resize(plan.pool_rows.size());
    for (auto& p : plan.row_probes) {
        p.resize(plan.probes);
        for (auto& c : p) c = probes.uniform_below(cols);
    }
    plan.resample = Rng(key, 3);
    return plan;
}

RescaledSample run_opnorm_sampling(EntryOracle& oracle, OpnormSamplingPlan& plan) {
    require_real(oracle.field(), "estimate_opnorm_sampling");
    const double tau = plan.tau;
    const auto n_rows = static_cast<double>(plan.rows);
    const auto n_cols = static_cast<double>(plan.cols);

    // Row stage: probe every pooled row, weight r_i = max(tau n ||x||^2, tau n).
    std::vector<Index> probe_q;
    for (std::size_t k = 0; k < plan.pool_rows.size(); ++k)
        for (std::size_t c : plan.row_probes[k]) probe_q.push_back({plan.pool_rows[k], c});
    const std::vector<double> probe_v = oracle.read_entries(probe_q);
    std::vector<double> row_w(plan.pool_rows.size());
    for (std::size_t k = 0; k < plan.pool_rows.size(); ++k) {
        double x2 = 0.0;
        for (std::size_t t = 0; t < plan.probes; ++t) x2 += probe_v[k * plan.probes + t] * probe_v[k * plan.probes + t];
        row_w[k] = std::max(tau * n_cols * x2, tau * n_cols);
    }
    const double row_mass = std::accumulate(row_w.begin(), row_w.end(), 0.0);
    const auto row_hits = resample(row_w, plan.q_row, plan.resample);

    RescaledSample out;
    out.row_mass = row_mass;
    for (const auto& [k, mult] : row_hits) {
        const double p = row_w[k] / row_mass;
        const double s2 = n_rows / (static_cast<double>(plan.pool_rows.size()) * p * static_cast<double>(plan.q_row));
        out.rows.push_back(plan.pool_rows[k]);
        out.row_scale.push_back(std::sqrt(s2 * static_cast<double>(mult)));
    }

    // Column stage mirrors the row stage on the sampled rows (length q = |rows|).
    const double len = static_cast<double>(out.rows.size());
    std::vector<Index> col_q;
    for (std::size_t c : plan.pool_cols)
        for (std::size_t t = 0; t < plan.probes; ++t) col_q.push_back({out.rows[plan.resample.uniform_below(out.rows.size())], c});
    const std::vector<double> col_v = oracle.read_entries(col_q);
    std::vector<double> col_w(plan.pool_cols.size());
    for (std::size_t k = 0; k < plan.pool_cols.size(); ++k) {
        double x2 = 0.0;
        for (std::size_t t = 0; t < plan.probes; ++t) x2 += col_v[k * plan.probes + t] * col_v[k * plan.probes + t];
        col_w[k] = std::max(tau * len * x2, tau * len);
    }
    const double col_mass = std::accumulate(col_w.begin(), col_w.end(), 0.0);
    const auto col_hits = resample(col_w, plan.q_col, plan.resample);
    out.col_mass = col_mass;
    for (const auto& [k, mult] : col_hits) {
        const double p = col_w[k] / col_mass;
        const double s2 = n_cols / (static_cast<double>(plan.pool_cols.size()) * p * static_cast<double>(plan.q_col));
        out.cols.push_back(plan.pool_cols[k]);
        out.col_scale.push_back(std::sqrt(s2 * static_cast<double>(mult)));
    }

    std::vector<Index> final_q;
    final_q.reserve(out.rows.size() * out.cols.size());
    for (std::size_t r : out.rows)
        for (std::size_t c : out.cols) final_q.push_back({r, c});
    std::vector<double> vals = oracle.read_entries(final_q);
    for (std::size_t a = 0; a < out.rows.size(); ++a)
        for (std::size_t b = 0; b < out.cols.size(); ++b) vals[a * out.cols.size() + b] *= out.row_scale[a] * out.col_scale[b];
    out.matrix = DenseMatrix(out.rows.size(), out.cols.size(), std::move(vals));
    out.nominal_samples = probe_q.size() + col_q.size() + plan.q_row + plan.q_col;
    return out;
}

EstimatorReport estimate_opnorm_sampling(EntryOracle& oracle, const SamplerParams& params, Rng& rng) {
    require_real(oracle.field(), "estimate_opnorm_sampling");
    OpnormSamplingPlan plan = plan_opnorm_sampling(oracle.rows(), oracle.cols(), params, rng);
    const auto superset = plan.superset();
    seal_if_fresh(oracle, superset);
    const std::size_t before = oracle.queries_used();
    const RescaledSample s = run_opnorm_sampling(oracle, plan);
    EstimatorReport r;
    r.estimate = operator_norm(s.matrix);
    r.queries_used = oracle.queries_used() - before;
    r.nominal_samples = s.nominal_samples;
    r.aux["row_mass"] = s.row_mass;
    r.aux["col_mass"] = s.col_mass;
    r.aux["pool_rows"] = static_cast<double>(plan.pool_rows.size());
    r.aux["pool_cols"] = static_cast<double>(plan.pool_cols.size());
    r.aux["rows_sampled"] = static_cast<double>(s.rows.size());
    r.aux["cols_sampled"] = static_cast<double>(s.cols.size());
    r.aux["q_row"] = static_cast<double>(plan.q_row);
    r.aux["q_col"] = static_cast<double>(plan.q_col);
    return r;
}

double cycle_value(const DenseMatrix& a, const Cycle& c) {
    const std::size_t q = c.i.size();
    double v = 1.0;
    for (std::size_t l = 0; l < q; ++l) v *= a(c.i[l], c.j[l]) * a(c.i[(l + 1) % q], c.j[l]);
    return v;
}

double cycle_mean_exhaustive(const DenseMatrix& a, std::size_t q) {
    if (q < 1) throw InvalidArgument("cycle length must be >= 1");
    const double total = std::pow(static_cast<double>(a.rows()) * static_cast<double>(a.cols()), static_cast<double>(q));
    if (total > 1e8) throw TooLarge("exhaustive cycle enumeration over more than 1e8 cycles");
    Cycle c{std::vector<std::size_t>(q, 0), std::vector<std::size_t>(q, 0)};
    double sum = 0.0;
    while (true) {
        sum += cycle_value(a, c);
        std::size_t k = 0;
        for (; k < 2 * q; ++k) {
            std::size_t& digit = k < q ? c.i[k] : c.j[k - q];
            const std::size_t base = k < q ? a.rows() : a.cols();
            if (++digit < base) break;
            digit = 0;
        }
        if (k == 2 * q) break;
    }
    return sum / total;
}

std::vector<Cycle> plan_cycles(std::size_t rows, std::size_t cols, std::size_t q, std::size_t N, Rng& rng) {
    if (q < 1 || N < 1) throw InvalidArgument("cycle length and count must be >= 1");
    std::vector<Cycle> cycles(N);
    for (auto& c : cycles) {
        c.i.resize(q);
        c.j.resize(q);
        for (auto& v : c.i) v = rng.uniform_below(rows);
        for (auto& v : c.j) v = rng.uniform_below(cols);
    }
    return cycles;
}

EstimatorReport estimate_opnorm_cycles(EntryOracle& oracle, std::size_t q_cycle, std::size_t N, Rng& rng) {
    require_real(oracle.field(), "estimate_opnorm_cycles");
    const auto cycles = plan_cycles(oracle.rows(), oracle.cols(), q_cycle, N, rng);
    std::vector<Index> q;
    q.reserve(N * 2 * q_cycle);
    for (const auto& c : cycles)
        for (std::size_t l = 0; l < q_cycle; ++l) {
            q.push_back({c.i[l], c.j[l]});
            q.push_back({c.i[(l + 1) % q_cycle], c.j[l]});
        }
    seal_if_fresh(oracle, q);
    const std::size_t before = oracle.queries_used();
    const std::vector<double> v = oracle.read_entries(q);
    double sum = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        double prod = 1.0;
        for (std::size_t t = 0; t < 2 * q_cycle; ++t) prod *= v[k * 2 * q_cycle + t];
        sum += prod;
    }
    const double z = sum / static_cast<double>(N);
    EstimatorReport r;
    const double scale = std::sqrt(static_cast<double>(oracle.rows()) * static_cast<double>(oracle.cols()));
    r.estimate = std::pow(std::max(z, 0.0), 1.0 / (2.0 * static_cast<double>(q_cycle))) * scale;
    r.queries_used = oracle.queries_used() - before;
    r.nominal_samples = q.size();
    r.aux["Z"] = z;
    return r;
}

namespace {

std::vector<std::vector<std::size_t>> distinct_tuples(std::size_t k, std::size_t q) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    std::vector<bool> used(k, false);
    std::function<void()> rec = [&]() {
        if (cur.size() == q) {
            out.push_back(cur);
            return;
        }
        for (std::size_t v = 0; v < k; ++v) {
            if (used[v]) continue;
            used[v] = true;
            cur.push_back(v);
            rec();
            cur.pop_back();
            used[v] = false;
        }
    };
    rec();
    return out;
}

double falling_factorial(std::size_t k, std::size_t q) {
    double f = 1.0;
    for (std::size_t t = 0; t < q; ++t) f *= static_cast<double>(k - t);
    return f;
}

}  // namespace

double distinct_cycle_mean(const DenseMatrix& sketch, std::size_t q, std::size_t N, Rng& rng, std::size_t* cycles_used) {
    if (q < 1) throw InvalidArgument("cycle length must be >= 1");
    if (sketch.rows() < q || sketch.cols() < q) throw InsufficientSketch("sketch smaller than the cycle length");
    const double count = falling_factorial(sketch.rows(), q) * falling_factorial(sketch.cols(), q);
    double sum = 0.0;
    if (count <= static_cast<double>(kExhaustiveCycleLimit)) {
        const auto is = distinct_tuples(sketch.rows(), q);
        const auto js = distinct_tuples(sketch.cols(), q);
        for (const auto& i : is)
            for (const auto& j : js) sum += cycle_value(sketch, Cycle{i, j});
        if (cycles_used) *cycles_used = is.size() * js.size();
        return sum / count;
    }
    for (std::size_t k = 0; k < N; ++k) sum += cycle_value(sketch, Cycle{rng.sample_without_replacement(sketch.rows(), q),
                                                                        rng.sample_without_replacement(sketch.cols(), q)});
    if (cycles_used) *cycles_used = N;
    return sum / static_cast<double>(N);
}

EstimatorReport estimate_opnorm_sensing_with(SensingOracle& oracle, const DenseMatrix& G, const DenseMatrix& H,
                                             std::size_t q_cycle, std::size_t N, Rng& rng) {
    require_real(oracle.field(), "estimate_opnorm_sensing");
    if (G.cols() != oracle.rows() || H.cols() != oracle.cols()) throw ShapeMismatch("sketch matrices do not fit the hidden matrix");
    if (G.rows() < q_cycle || H.rows() < q_cycle) throw InsufficientSketch("sketch dimension below the cycle length");
    const std::size_t before = oracle.queries_used();
    DenseMatrix sketch(G.rows(), H.rows());
    for (std::size_t i = 0; i < G.rows(); ++i)
        for (std::size_t j = 0; j < H.rows(); ++j) sketch(i, j) = oracle.sense_outer(G.row(i), H.row(j));
    std::size_t used = 0;
    const double y = distinct_cycle_mean(sketch, q_cycle, N, rng, &used);
    EstimatorReport r;
    r.estimate = std::pow(std::max(y, 0.0), 1.0 / (2.0 * static_cast<double>(q_cycle)));
    r.queries_used = oracle.queries_used() - before;
    r.nominal_samples = G.rows() * H.rows();
    r.aux["Y"] = y;
    r.aux["cycles"] = static_cast<double>(used);
    return r;
}

EstimatorReport estimate_opnorm_sensing(SensingOracle& oracle, const SamplerParams& params, Rng& rng) {
    params.validate();
    if (params.k_sketch < params.q_cycle) throw InsufficientSketch("k_sketch must be at least q_cycle");
    DenseMatrix G(params.k_sketch, oracle.rows());
    DenseMatrix H(params.k_sketch, oracle.cols());
    for (auto& v : G.data()) v = rng.normal();
    for (auto& v : H.data()) v = rng.normal();
    return estimate_opnorm_sensing_with(oracle, G, H, params.q_cycle, params.N_cycles, rng);
}

}  // namespace matprop
