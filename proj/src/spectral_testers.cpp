#include "matprop/spectral_testers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"

namespace matprop {

namespace {

std::size_t ceil_count(double x) { return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)))); }

void validate_constants(const StageConstants& k) {
    if (!(k.k0 > 0.0 && k.k1 > 0.0 && k.C0 > 0.0 && k.c1 > 0.0 && k.tau_factor > 0.0)) {
        throw InvalidArgument("tester constants must be positive");
    }
    if (k.tau_override && !(*k.tau_override > 0.0 && *k.tau_override < 0.5)) {
        throw OutOfRange("tau override must lie in (0, 1/2)");
    }
    if (k.pool_retries < 1) throw InvalidArgument("pool_retries must be >= 1");
}

std::size_t square_side(std::size_t rows, std::size_t cols, const Field& f, const char* who) {
    if (!f.is_real()) throw InvalidArgument(std::string(who) + " needs a real matrix");
    if (rows != cols) throw ShapeMismatch(std::string(who) + " needs a square matrix");
    if (rows == 0) throw InvalidArgument(std::string(who) + " needs a nonempty matrix");
    return rows;
}

double ln_n(std::size_t n) { return std::log(std::max<double>(2.0, static_cast<double>(n))); }

// Stage-3 plan with fresh substreams whenever a pool comes out empty.
OpnormSamplingPlan plan_with_retries(std::size_t n, const SamplerParams& sp, std::uint64_t key, int retries) {
    for (int attempt = 0;; ++attempt) {
        Rng sub(key, 3 + static_cast<std::uint64_t>(attempt));
        try {
            return plan_opnorm_sampling(n, n, sp, sub);
        } catch (const EmptyPool&) {
            if (attempt + 1 >= retries) throw;
        }
    }
}

double srank_estimate(double X, double opnorm) {
    return opnorm > 0.0 ? X / (opnorm * opnorm) : std::numeric_limits<double>::infinity();
}

void append(std::vector<Index>& dst, const std::vector<Index>& src) { dst.insert(dst.end(), src.begin(), src.end()); }

}  // namespace

void StableRankConfig::validate() const {
    if (!(eps > 0.0 && eps < 1.0 / 3.0)) throw OutOfRange("eps must lie in (0, 1/3)");
    if (!(d >= 1.0)) throw InvalidArgument("d must be >= 1");
    validate_constants(k);
}

void SchattenConfig::validate() const {
    if (!(p > 2.0)) throw OutOfRange("p must exceed 2");
    if (!(c_threshold > 0.0 && c_threshold <= 1.0)) throw OutOfRange("c_threshold must lie in (0, 1]");
    if (!(eps > 0.0 && eps < 1.0)) throw OutOfRange("eps must lie in (0, 1)");
    validate_constants(k);
}

std::size_t stable_rank_q0(const StableRankConfig& cfg) {
    return ceil_count(cfg.k.k0 * std::sqrt(cfg.d) / std::pow(cfg.eps, 2.5));
}

std::size_t stable_rank_screen_size(const StableRankConfig& cfg, std::size_t n) {
    return std::min(n, ceil_count(cfg.k.k1 * cfg.d * ln_n(n) / cfg.eps));
}

double stable_rank_tau(const StableRankConfig& cfg, std::size_t n) {
    if (cfg.k.tau_override) return *cfg.k.tau_override;
    const double base = cfg.k.tau_factor * cfg.eps / std::pow(cfg.d, 0.25);
    return cfg.mode == QueryModel::Sensing ? base / std::sqrt(ln_n(n)) : base;
}

double stable_rank_mass_floor(const StableRankConfig& cfg, std::size_t n) {
    const double nn = static_cast<double>(n);
    return 0.9 * (1.0 - 1.0 / cfg.d) * cfg.eps * nn * nn;
}

std::size_t schatten_q0(const SchattenConfig& cfg) { return ceil_count(cfg.k.k0 / (cfg.eps * cfg.eps)); }

std::size_t schatten_screen_size(const SchattenConfig& cfg, std::size_t n) {
    return std::min(n, ceil_count(cfg.k.k1 * ln_n(n) / cfg.eps));
}

double schatten_tau(const SchattenConfig& cfg) {
    if (cfg.k.tau_override) return *cfg.k.tau_override;
    return std::pow(cfg.eps, cfg.p / (cfg.p - 2.0)) / cfg.p;
}

double schatten_sigma_cut(const SchattenConfig& cfg, std::size_t n) {
    return (1.0 + cfg.eps / (3.0 * cfg.p)) * static_cast<double>(n) *
           std::pow(cfg.c_threshold * cfg.eps / 3.0, 1.0 / (cfg.p - 2.0));
}

double thresholded_mass(const std::vector<double>& sigma, const SchattenConfig& cfg, std::size_t n) {
    const double cut = schatten_sigma_cut(cfg, n);
    double mass = 0.0;
    for (double s : sigma)
        if (s > cut) mass += std::pow(s, cfg.p);
    return mass;
}

bool screen_fires(double block_norm, double X, double slack, std::size_t q, std::size_t n, double C0) {
    const double bound = C0 * std::sqrt(std::max(X, 0.0) / slack) * static_cast<double>(q) / static_cast<double>(n);
    return block_norm <= bound;
}

Verdict decide_stable_rank(const StableRankStats& s, std::size_t n, const StableRankConfig& cfg) {
    Verdict v;
    v.seed = cfg.seed;
    if (s.X <= stable_rank_mass_floor(cfg, n)) {
        v.decision = Decision::H0;
        v.statistic = s.X;
        v.stage = 1;
        return v;
    }
    if (screen_fires(s.screen_norm, s.X, cfg.k.c1 * cfg.d, s.screen_size, n, cfg.k.C0)) {
        v.decision = Decision::H1;
        v.statistic = s.screen_norm;
        v.stage = 2;
        return v;
    }
    v.stage = 3;
    v.statistic = srank_estimate(s.X, s.opnorm);
    v.decision = s.opnorm * s.opnorm >= s.X / cfg.d ? Decision::H0 : Decision::H1;
    return v;
}

Verdict decide_schatten(const SchattenStats& s, std::size_t n, const SchattenConfig& cfg) {
    Verdict v;
    v.seed = cfg.seed;
    if (screen_fires(s.screen_norm, s.X, 1.0, s.screen_size, n, cfg.k.C0)) {
        v.decision = Decision::H1;
        v.statistic = s.screen_norm;
        v.stage = 2;
        return v;
    }
    const double scale = std::pow(static_cast<double>(n), cfg.p);
    v.stage = 3;
    v.statistic = thresholded_mass(s.sample_sigma, cfg, n) / scale;
    v.decision = v.statistic >= cfg.c_threshold ? Decision::H0 : Decision::H1;
    return v;
}

Verdict exact_stable_rank_verdict(const DenseMatrix& a, const StableRankConfig& cfg) {
    cfg.validate();
    const std::size_t n = square_side(a.rows(), a.cols(), a.field(), "exact_stable_rank_verdict");
    const SpectralSummary s = singular_values(a);
    return decide_stable_rank({s.frobenius * s.frobenius, s.operator_norm, n, s.operator_norm}, n, cfg);
}

Verdict exact_schatten_verdict(const DenseMatrix& a, const SchattenConfig& cfg) {
    cfg.validate();
    const std::size_t n = square_side(a.rows(), a.cols(), a.field(), "exact_schatten_verdict");
    const SpectralSummary s = singular_values(a);
    return decide_schatten({s.frobenius * s.frobenius, s.operator_norm, n, s.singular_values}, n, cfg);
}

Verdict test_stable_rank(EntryOracle& oracle, const StableRankConfig& cfg) {
    Rng rng(cfg.seed);
    return test_stable_rank(oracle, cfg, rng);
}

Verdict test_stable_rank(EntryOracle& oracle, const StableRankConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.mode != QueryModel::Sampling) throw InvalidArgument("sensing mode needs a SensingOracle");
    const std::size_t n = square_side(oracle.rows(), oracle.cols(), oracle.field(), "test_stable_rank");

    // Every stage is drawn before the first read.
    const std::uint64_t key = rng.next_u64();
    Rng s1(key, 1), s2(key, 2);
    const auto draws = plan_frobenius(n, n, stable_rank_q0(cfg), s1);
    const ScreenPlan screen = plan_screen(n, n, stable_rank_screen_size(cfg, n), s2);
    SamplerParams sp = cfg.sampler;
    sp.tau = stable_rank_tau(cfg, n);
    sp.d_hint = cfg.d;
    OpnormSamplingPlan plan = plan_with_retries(n, sp, key, cfg.k.pool_retries);
    if (!oracle.sealed() && oracle.queries_used() == 0) {
        std::vector<Index> all(draws.begin(), draws.end());
        append(all, screen.queries());
        append(all, plan.superset());
        oracle.seal(all);
    }

    const std::size_t start = oracle.queries_used();
    StableRankStats stats;
    Verdict v;
    stats.X = estimate_frobenius_at(oracle, draws).estimate;
    v.stage_queries[0] = oracle.queries_used() - start;
    if (stats.X > stable_rank_mass_floor(cfg, n)) {
        const std::size_t before2 = oracle.queries_used();
        stats.screen_norm = run_screen(oracle, screen).estimate;
        stats.screen_size = screen.rows.size();
        v.stage_queries[1] = oracle.queries_used() - before2;
        if (!screen_fires(stats.screen_norm, stats.X, cfg.k.c1 * cfg.d, stats.screen_size, n, cfg.k.C0)) {
            const std::size_t before3 = oracle.queries_used();
            stats.opnorm = operator_norm(run_opnorm_sampling(oracle, plan).matrix);
            v.stage_queries[2] = oracle.queries_used() - before3;
        }
    }
    const auto stage_queries = v.stage_queries;
    v = decide_stable_rank(stats, n, cfg);
    v.stage_queries = stage_queries;
    v.queries_used = oracle.queries_used() - start;
    return v;
}

Verdict test_stable_rank(SensingOracle& oracle, const StableRankConfig& cfg, Rng& rng) {
    cfg.validate();
    if (cfg.mode != QueryModel::Sensing) throw InvalidArgument("sampling mode needs an EntryOracle");
    const std::size_t n = square_side(oracle.rows(), oracle.cols(), oracle.field(), "test_stable_rank");

    const std::uint64_t key = rng.next_u64();
    Rng s1(key, 1), s2(key, 2), s3(key, 3);
    const auto draws = plan_frobenius(n, n, stable_rank_q0(cfg), s1);
    const ScreenPlan screen = plan_screen(n, n, stable_rank_screen_size(cfg, n), s2);
    SamplerParams sp = cfg.sampler;
    sp.tau = stable_rank_tau(cfg, n);
    sp.d_hint = cfg.d;
    sp.validate();

    const std::size_t start = oracle.queries_used();
    StableRankStats stats;
    Verdict v;
    stats.X = estimate_frobenius_at(oracle, draws).estimate;
    v.stage_queries[0] = oracle.queries_used() - start;
    if (stats.X > stable_rank_mass_floor(cfg, n)) {
        const std::size_t before2 = oracle.queries_used();
        stats.screen_norm = run_screen(oracle, screen).estimate;
        stats.screen_size = screen.rows.size();
        v.stage_queries[1] = oracle.queries_used() - before2;
        if (!screen_fires(stats.screen_norm, stats.X, cfg.k.c1 * cfg.d, stats.screen_size, n, cfg.k.C0)) {
            const std::size_t before3 = oracle.queries_used();
            stats.opnorm = estimate_opnorm_sensing(oracle, sp, s3).estimate;
            v.stage_queries[2] = oracle.queries_used() - before3;
        }
    }
    const auto stage_queries = v.stage_queries;
    v = decide_stable_rank(stats, n, cfg);
    v.stage_queries = stage_queries;
    v.queries_used = oracle.queries_used() - start;
    return v;
}

Verdict test_schatten(EntryOracle& oracle, const SchattenConfig& cfg) {
    Rng rng(cfg.seed);
    return test_schatten(oracle, cfg, rng);
}

Verdict test_schatten(EntryOracle& oracle, const SchattenConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t n = square_side(oracle.rows(), oracle.cols(), oracle.field(), "test_schatten");

    const std::uint64_t key = rng.next_u64();
    Rng s1(key, 1), s2(key, 2);
    const auto draws = plan_frobenius(n, n, schatten_q0(cfg), s1);
    const ScreenPlan screen = plan_screen(n, n, schatten_screen_size(cfg, n), s2);
    SamplerParams sp = cfg.sampler;
    sp.tau = schatten_tau(cfg);
    OpnormSamplingPlan plan = plan_with_retries(n, sp, key, cfg.k.pool_retries);
    if (!oracle.sealed() && oracle.queries_used() == 0) {
        std::vector<Index> all(draws.begin(), draws.end());
        append(all, screen.queries());
        append(all, plan.superset());
        oracle.seal(all);
    }

    const std::size_t start = oracle.queries_used();
    SchattenStats stats;
    Verdict v;
    stats.X = estimate_frobenius_at(oracle, draws).estimate;
    v.stage_queries[0] = oracle.queries_used() - start;
    const std::size_t before2 = oracle.queries_used();
    stats.screen_norm = run_screen(oracle, screen).estimate;
    stats.screen_size = screen.rows.size();
    v.stage_queries[1] = oracle.queries_used() - before2;
    if (!screen_fires(stats.screen_norm, stats.X, 1.0, stats.screen_size, n, cfg.k.C0)) {
        const std::size_t before3 = oracle.queries_used();
        stats.sample_sigma = singular_values(run_opnorm_sampling(oracle, plan).matrix).singular_values;
        v.stage_queries[2] = oracle.queries_used() - before3;
    }
    const auto stage_queries = v.stage_queries;
    v = decide_schatten(stats, n, cfg);
    v.stage_queries = stage_queries;
    v.queries_used = oracle.queries_used() - start;
    return v;
}

}  // namespace matprop
