#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"
#include "matprop/rank_tester.hpp"
#include "reference.hpp"

using namespace matprop;

namespace {

DenseMatrix random_over(std::size_t r, std::size_t c, const Field& f, Rng& rng) {
    DenseMatrix m(r, c, f);
    for (auto& v : m.data()) v = f.is_prime() ? static_cast<double>(rng.uniform_below(f.modulus())) : rng.normal();
    return m;
}

DenseMatrix low_rank(std::size_t n, std::size_t d, const Field& f, Rng& rng) {
    return multiply(random_over(n, d, f, rng), random_over(d, n, f, rng));
}

PartialMatrix partial_from_prefixes(const DenseMatrix& m, const std::vector<std::size_t>& prefix) {
    PartialMatrix p(m.rows(), m.cols(), m.field());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < prefix[j]; ++i) p.observe(i, j, m(i, j));
    return p;
}

}  // namespace

TEST(SolveEta, Examples) {
    EXPECT_NEAR(solve_eta(0.5), 0.25, 1e-12);
    const double eta = solve_eta(0.375);
    EXPECT_NEAR(eta * std::log2(1.0 / eta), 0.375, 1e-12);
    EXPECT_GT(solve_eta(0.4), solve_eta(0.3));
    EXPECT_LT(solve_eta(kMaxRankEps), 0.5);
    EXPECT_THROW(solve_eta(0.0), OutOfRange);
    EXPECT_THROW(solve_eta(0.6), OutOfRange);
    for (double eps : {1e-6, 1e-3, 0.05, 0.1, 1.0 / std::exp(1.0)}) {
        const double e = solve_eta(eps);
        EXPECT_NEAR(e * std::log2(1.0 / e), eps, 1e-12);
        EXPECT_GT(e, 0.0);
        EXPECT_LT(e, 0.5);
    }
}

TEST(BuildPattern, SizesFollowTheFormula) {
    RankTestConfig cfg;
    cfg.d = 1;
    cfg.eps = 0.5;  // eta = 1/4
    cfg.c_pattern = 1.0;
    Rng rng(1);
    const auto pat = build_pattern(1u << 20, cfg, rng);
    ASSERT_EQ(pat.levels, 2u);
    // c (log2 d + log2 log2(1/eta) + 1) d log2(1/eta) = 1 * (0 + 1 + 1) * 1 * 2 = 4
    EXPECT_EQ(pat.row_sizes, (std::vector<std::size_t>{8, 16}));
    EXPECT_EQ(pat.col_sizes, (std::vector<std::size_t>{8, 4}));
}

TEST(BuildPattern, NestedDistinctAndCapped) {
    Rng rng(2);
    RankTestConfig cfg;
    cfg.d = 2;
    cfg.eps = 0.05;
    cfg.c_pattern = 0.25;
    for (int t = 0; t < 20; ++t) {
        const auto pat = build_pattern(5000, cfg, rng);
        for (std::size_t i = 0; i + 1 < pat.levels; ++i) {
            EXPECT_LE(pat.row_sizes[i], pat.row_sizes[i + 1]);
            EXPECT_GE(pat.col_sizes[i], pat.col_sizes[i + 1]);
            const std::set<std::size_t> small(pat.R(i).begin(), pat.R(i).end());
            const std::set<std::size_t> big(pat.R(i + 1).begin(), pat.R(i + 1).end());
            EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
        }
        EXPECT_EQ(std::set<std::size_t>(pat.row_order.begin(), pat.row_order.end()).size(), pat.row_order.size());
        EXPECT_EQ(std::set<std::size_t>(pat.col_order.begin(), pat.col_order.end()).size(), pat.col_order.size());
        const auto q = pat.query_set();
        EXPECT_EQ(std::set<Index>(q.begin(), q.end()).size(), q.size());
        EXPECT_LE(q.size(), pat.nominal_queries());
    }
    cfg.c_pattern = 1000.0;
    const auto capped = build_pattern(4, cfg, rng);
    for (std::size_t i = 0; i < capped.levels; ++i) {
        EXPECT_EQ(capped.row_sizes[i], 4u);
        EXPECT_EQ(capped.col_sizes[i], 4u);
    }
}

TEST(BuildPattern, QuerySetIsUnionOfBlocks) {
    Rng rng(3);
    RankTestConfig cfg;
    cfg.d = 1;
    cfg.eps = 0.2;
    cfg.c_pattern = 0.5;
    const auto pat = build_pattern(300, cfg, rng);
    std::set<Index> blocks;
    for (std::size_t i = 0; i < pat.levels; ++i)
        for (std::size_t r : pat.R(i))
            for (std::size_t c : pat.C(i)) blocks.insert({r, c});
    const auto q = pat.query_set();
    EXPECT_EQ(std::set<Index>(q.begin(), q.end()), blocks);
}

TEST(MinCompletionRank, PaperExamples) {
    for (const Field& f : {Field::real(), Field::prime(2), Field::prime(7)}) {
        PartialMatrix p(2, 2, f);
        p.observe(0, 0, 0);
        p.observe(0, 1, 1);
        p.observe(1, 0, 1);
        EXPECT_EQ(min_completion_rank(p), 2u) << f.to_string();
    }
    PartialMatrix q(2, 2, Field::prime(2));
    q.observe(0, 0, 1);
    q.observe(0, 1, 1);
    q.observe(1, 0, 1);
    EXPECT_EQ(min_completion_rank(q), 1u);
}

TEST(MinCompletionRank, RejectsNonStaircaseMask) {
    PartialMatrix p(3, 2, Field::prime(3));
    p.observe(0, 0, 1);
    p.observe(2, 0, 1);
    EXPECT_THROW(min_completion_rank(p), MaskNotStaircase);
}

TEST(MinCompletionRank, MatchesBruteForceOverGF3) {
    Rng rng(31);
    int checked = 0;
    while (checked < 200) {
        const auto m = random_over(4, 4, Field::prime(3), rng);
        std::vector<std::size_t> prefix(4);
        std::size_t holes = 0;
        for (auto& len : prefix) {
            len = rng.uniform_below(5);
            holes += 4 - len;
        }
        if (holes > 8) continue;
        const auto p = partial_from_prefixes(m, prefix);
        std::vector<std::vector<bool>> obs(4, std::vector<bool>(4));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) obs[i][j] = i < prefix[j];
        ASSERT_EQ(min_completion_rank(p), ref::brute_min_completion(ref::to_grid(m), obs, 3));
        ++checked;
    }
}

TEST(MinCompletionRank, WitnessAgreesWithObservationsAndInvariants) {
    Rng rng(5);
    for (const Field& f : {Field::prime(2), Field::prime(65537), Field::real()}) {
        for (int t = 0; t < 30; ++t) {
            const std::size_t n = 6 + rng.uniform_below(6);
            const auto m = t % 2 ? low_rank(n, 1 + rng.uniform_below(3), f, rng) : random_over(n, n, f, rng);
            std::vector<std::size_t> prefix(n);
            for (auto& len : prefix) len = rng.uniform_below(n + 1);
            const auto p = partial_from_prefixes(m, prefix);
            const auto res = complete_min_rank(p, true);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t i = 0; i < prefix[j]; ++i) ASSERT_EQ(res.completed(i, j), m(i, j));
            EXPECT_EQ(rank_exact(res.completed), res.rank);
            // The true matrix is one completion, so it bounds the minimum.
            EXPECT_LE(res.rank, rank_exact(m));
        }
    }
}

TEST(MinCompletionRank, NeverExceedsRandomCompletions) {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        const auto m = random_over(5, 5, Field::prime(2), rng);
        std::vector<std::size_t> prefix(5);
        for (auto& len : prefix) len = rng.uniform_below(6);
        const auto p = partial_from_prefixes(m, prefix);
        const std::size_t best = min_completion_rank(p);
        for (int k = 0; k < 20; ++k) {
            DenseMatrix fill = m;
            for (std::size_t j = 0; j < 5; ++j)
                for (std::size_t i = prefix[j]; i < 5; ++i) fill(i, j) = static_cast<double>(rng.uniform_below(2));
            EXPECT_LE(best, rank_exact(fill));
        }
    }
}

TEST(TestRank, ZeroMatrixIsH0) {
    EntryOracle o(DenseMatrix(64, 64, Field::prime(2)));
    RankTestConfig cfg;
    cfg.d = 1;
    const auto v = test_rank(o, cfg);
    EXPECT_EQ(v.decision, Decision::H0);
    EXPECT_EQ(v.queries_used, o.queries_used());
}

TEST(TestRank, LowRankOverGF7NeverRejected) {
    Rng rng(77);
    RankTestConfig cfg;
    cfg.d = 3;
    cfg.eps = 0.1;
    for (int t = 0; t < 100; ++t) {
        EntryOracle o(low_rank(128, 3, Field::prime(7), rng));
        cfg.seed = static_cast<std::uint64_t>(t);
        const auto v = test_rank(o, cfg);
        ASSERT_EQ(v.decision, Decision::H0);
    }
}

TEST(TestRank, OneSidedOnManyLowRankInstances) {
    Rng rng(8);
    for (const Field& f : {Field::prime(2), Field::prime(7), Field::real()}) {
        for (int t = 0; t < 1000; ++t) {
            const std::size_t n = 8 + rng.uniform_below(24);
            const std::size_t d = 1 + rng.uniform_below(3);
            EntryOracle o(low_rank(n, d, f, rng));
            RankTestConfig cfg;
            cfg.d = d;
            cfg.eps = 0.05 + 0.3 * rng.uniform();
            cfg.c_pattern = 0.05 + rng.uniform();
            cfg.seed = static_cast<std::uint64_t>(t);
            ASSERT_EQ(test_rank(o, cfg).decision, Decision::H0) << f.to_string() << " trial " << t;
        }
    }
}

TEST(TestRank, ReadsOnlyThePatternAndCountsExactly) {
    const std::size_t n = 20000;
    EntryOracle o(ImplicitMatrix{n, n, Field::prime(2), [](std::size_t, std::size_t) { return 0.0; }});
    RankTestConfig cfg;
    cfg.d = 2;
    cfg.eps = 0.2;
    cfg.c_pattern = 0.25;
    cfg.seed = 4;
    Rng rng(cfg.seed);
    Rng replay = rng;
    const auto v = test_rank(o, cfg, rng);
    Rng sub(replay.next_u64(), 0);
    const auto pat = build_pattern(n, cfg, sub);
    EXPECT_TRUE(o.sealed());
    EXPECT_EQ(v.queries_used, o.log().size());
    EXPECT_EQ(v.queries_used, pat.query_set().size());
    EXPECT_LE(v.queries_used, pat.nominal_queries());
    EXPECT_LT(v.queries_used, n * n / 1000);
}

TEST(TestRank, DetectsFullRankIdentity) {
    EntryOracle o(DenseMatrix::identity(48, Field::prime(3)));
    RankTestConfig cfg;
    cfg.d = 2;
    cfg.eps = 0.3;
    EXPECT_EQ(test_rank(o, cfg).decision, Decision::H1);
}

TEST(TestRank, SmallMatrixReadsEverything) {
    EntryOracle o(DenseMatrix::identity(3, Field::prime(5)));
    RankTestConfig cfg;
    cfg.d = 2;
    const auto v = test_rank(o, cfg);
    EXPECT_EQ(v.decision, Decision::H1);
    EXPECT_EQ(v.statistic, 3.0);
    EXPECT_EQ(v.queries_used, 9u);
}

TEST(TestRank, AmplificationSealsTheUnion) {
    Rng rng(12);
    const auto m = random_over(400, 400, Field::prime(2), rng);
    RankTestConfig cfg;
    cfg.d = 1;
    cfg.eps = 0.3;
    cfg.c_pattern = 0.3;
    cfg.amplification = 3;
    EntryOracle o(m);
    const auto v = test_rank(o, cfg);
    EXPECT_EQ(v.decision, Decision::H1);
    EXPECT_EQ(v.queries_used, o.queries_used());
}

TEST(TestRank, ConfigValidation) {
    EntryOracle o(DenseMatrix::identity(8));
    RankTestConfig cfg;
    cfg.d = 0;
    EXPECT_THROW(test_rank(o, cfg), InvalidArgument);
    cfg.d = 1;
    cfg.eps = 0.9;
    EXPECT_THROW(test_rank(o, cfg), OutOfRange);
    cfg.eps = 0.1;
    cfg.c_pattern = -1.0;
    EXPECT_THROW(test_rank(o, cfg), InvalidArgument);
}

TEST(TestRankSensing, LowRankAndZeroAreH0) {
    Rng rng(9);
    for (int t = 0; t < 50; ++t) {
        SensingOracle o(low_rank(16, 3, Field::prime(65537), rng));
        EXPECT_EQ(test_rank_sensing(o, 3, rng).decision, Decision::H0);
        SensingOracle r(low_rank(16, 3, Field::real(), rng));
        EXPECT_EQ(test_rank_sensing(r, 3, rng).decision, Decision::H0);
    }
    SensingOracle z(DenseMatrix(16, 16, Field::prime(7)));
    EXPECT_EQ(test_rank_sensing(z, 2, rng).decision, Decision::H0);
}

TEST(TestRankSensing, IdentityDetectedWithExactProbeCount) {
    Rng rng(10);
    int hits = 0;
    for (int t = 0; t < 100; ++t) {
        SensingOracle o(DenseMatrix::identity(16, Field::prime(65537)));
        const auto v = test_rank_sensing(o, 3, rng);
        EXPECT_EQ(o.queries_used(), 16u);
        EXPECT_EQ(v.queries_used, 16u);
        hits += v.decision == Decision::H1;
    }
    EXPECT_GE(hits, 99);
}

TEST(AugmentSet, Examples) {
    const auto id = DenseMatrix::identity(2, Field::prime(5));
    const std::vector<std::size_t> none;
    EXPECT_EQ(augment_set(id, none, none), (std::vector<Index>{{0, 0}, {1, 1}}));
    const auto ones = DenseMatrix::ones(3, 3, Field::prime(2));
    const std::vector<std::size_t> zero{0};
    EXPECT_TRUE(augment_set(ones, zero, zero).empty());
    const auto sing = DenseMatrix::from_rows({{1, 1}, {1, 1}}, Field::prime(2));
    const std::vector<std::size_t> both{0, 1};
    EXPECT_THROW(augment_set(sing, both, both), NotFullRankBase);
    EXPECT_THROW(augment_set(sing, zero, both), NotFullRankBase);
}

TEST(AugmentSet, MatchesDirectRankChecks) {
    Rng rng(14);
    int checked = 0;
    while (checked < 100) {
        const auto m = random_over(5, 5, Field::prime(2), rng);
        const auto rs = rng.sample_without_replacement(5, 2);
        const auto cs = rng.sample_without_replacement(5, 2);
        const auto grid = ref::to_grid(m);
        auto sub_rank = [&](std::vector<std::size_t> r, std::vector<std::size_t> c) {
            ref::Grid g(r.size(), std::vector<long long>(c.size()));
            for (std::size_t i = 0; i < r.size(); ++i)
                for (std::size_t j = 0; j < c.size(); ++j) g[i][j] = grid[r[i]][c[j]];
            return ref::rank_mod(g, 2);
        };
        if (sub_rank(rs, cs) != 2) continue;
        std::set<Index> expected;
        for (std::size_t r = 0; r < 5; ++r)
            for (std::size_t c = 0; c < 5; ++c) {
                auto r2 = rs;
                auto c2 = cs;
                if (std::find(r2.begin(), r2.end(), r) == r2.end()) r2.push_back(r);
                if (std::find(c2.begin(), c2.end(), c) == c2.end()) c2.push_back(c);
                if (sub_rank(r2, c2) > 2) expected.insert({r, c});
            }
        const auto got = augment_set(m, rs, cs);
        EXPECT_EQ(std::set<Index>(got.begin(), got.end()), expected);
        ++checked;
    }
}

TEST(AugmentSet, RealBase) {
    const auto m = DenseMatrix::from_rows({{2, 1, 0}, {1, 1, 0}, {0, 0, 3}});
    const std::vector<std::size_t> r{0, 1};
    const std::vector<std::size_t> c{0, 1};
    EXPECT_EQ(augment_set(m, r, c), (std::vector<Index>{{2, 2}}));
}

TEST(HasAugmentPattern, DefinitionByHand) {
    const auto id = DenseMatrix::identity(8, Field::prime(2));
    const std::vector<std::size_t> none;
    // Every row has one augment; level i needs count >= 2^(i-1) * 0.25 * 8 >= 2.
    for (std::size_t i = 1; i <= 3; ++i) EXPECT_FALSE(has_augment_pattern(id, none, none, i, 0.25));
    // A smaller eta lets level 1 through: 1 >= 1 * 0.125 * 8.
    EXPECT_TRUE(has_augment_pattern(id, none, none, 1, 0.125));
    EXPECT_FALSE(has_augment_pattern(id, none, none, 2, 0.125));
    const DenseMatrix zero(8, 8, Field::prime(2));
    for (std::size_t i = 1; i <= 3; ++i) EXPECT_FALSE(has_augment_pattern(zero, none, none, i, 0.1));
    EXPECT_THROW(has_augment_pattern(id, none, none, 0, 0.25), InvalidArgument);
}

TEST(HasAugmentPattern, DenseAugmentsHitEveryLevel) {
    // All-ones over GF(2) with an empty base: every row has 8 augments.
    const auto ones = DenseMatrix::ones(8, 8, Field::prime(2));
    const std::vector<std::size_t> none;
    EXPECT_TRUE(has_augment_pattern(ones, none, none, 1, 0.25));
    EXPECT_TRUE(has_augment_pattern(ones, none, none, 3, 0.25));
    EXPECT_FALSE(has_augment_pattern(ones, none, none, 4, 0.5));
}
