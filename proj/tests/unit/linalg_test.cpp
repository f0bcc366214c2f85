#include <gtest/gtest.h>

#include <cmath>

#include "matprop/error.hpp"
#include "matprop/linalg.hpp"
#include "matprop/random.hpp"
#include "reference.hpp"

using namespace matprop;

namespace {

DenseMatrix random_mod(std::size_t r, std::size_t c, std::uint32_t p, Rng& rng) {
    DenseMatrix m(r, c, Field::prime(p));
    for (auto& v : m.data()) v = static_cast<double>(rng.uniform_below(p));
    return m;
}

DenseMatrix random_gaussian(std::size_t r, std::size_t c, Rng& rng) {
    DenseMatrix m(r, c);
    for (auto& v : m.data()) v = rng.normal();
    return m;
}

}  // namespace

TEST(RankExact, SmallExamples) {
    EXPECT_EQ(rank_exact(DenseMatrix::identity(3, Field::prime(2))), 3u);
    EXPECT_EQ(rank_exact(DenseMatrix::from_rows({{1, 1}, {1, 1}}, Field::prime(2))), 1u);
    EXPECT_EQ(rank_exact(DenseMatrix(4, 4)), 0u);
    EXPECT_EQ(rank_exact(DenseMatrix::ones(5, 3)), 1u);
}

TEST(RankExact, AllBinaryMatricesUpTo4x4MatchMinors) {
    for (std::size_t n = 1; n <= 4; ++n) {
        const std::size_t cells = n * n;
        for (std::uint32_t bits = 0; bits < (1u << cells); ++bits) {
            DenseMatrix m(n, n, Field::prime(2));
            for (std::size_t k = 0; k < cells; ++k) m.data()[k] = (bits >> k) & 1u;
            ASSERT_EQ(rank_exact(m), ref::rank_by_minors(ref::to_grid(m), 2)) << "bits=" << bits;
        }
    }
}

TEST(RankExact, RandomTernaryMatchMinors) {
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        const auto m = random_mod(4, 4, 3, rng);
        ASSERT_EQ(rank_exact(m), ref::rank_by_minors(ref::to_grid(m), 3));
    }
    for (int t = 0; t < 500; ++t) {
        // Low-rank products make rank-deficient cases common.
        const std::size_t k = 1 + rng.uniform_below(5);
        const auto m = multiply(random_mod(5, k, 3, rng), random_mod(k, 5, 3, rng));
        ASSERT_EQ(rank_exact(m), ref::rank_by_minors(ref::to_grid(m), 3));
    }
}

TEST(SingularValues, SmallExamples) {
    auto s = singular_values(DenseMatrix::from_rows({{3, 0}, {0, 4}}));
    ASSERT_EQ(s.singular_values.size(), 2u);
    EXPECT_NEAR(s.singular_values[0], 4.0, 1e-14);
    EXPECT_NEAR(s.singular_values[1], 3.0, 1e-14);
    s = singular_values(DenseMatrix::ones(2, 2));
    EXPECT_NEAR(s.singular_values[0], 2.0, 1e-14);
    EXPECT_NEAR(s.singular_values[1], 0.0, 1e-14);
    EXPECT_EQ(s.operator_norm, s.singular_values[0]);
    EXPECT_THROW(singular_values(DenseMatrix(2, 2, Field::prime(3))), InvalidArgument);
}

TEST(SingularValues, MatchCharacteristicPolynomialEigenvalues) {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_gaussian(6, 6, rng);
        const auto s = singular_values(a);
        const auto eig = ref::gram_eigenvalues(a);
        ASSERT_EQ(eig.size(), 6u);
        const double top = s.singular_values[0] * s.singular_values[0];
        for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s.singular_values[i] * s.singular_values[i], eig[i], 1e-8 * top);
    }
}

TEST(SingularValues, SummaryInvariants) {
    Rng rng(8);
    for (auto [r, c] : {std::pair{7, 3}, {3, 7}, {20, 20}, {1, 5}}) {
        const auto a = random_gaussian(r, c, rng);
        const auto s = singular_values(a);
        EXPECT_EQ(s.singular_values.size(), std::min<std::size_t>(r, c));
        EXPECT_TRUE(std::is_sorted(s.singular_values.rbegin(), s.singular_values.rend()));
        double sum2 = 0.0;
        for (double v : s.singular_values) sum2 += v * v;
        EXPECT_NEAR(sum2, s.frobenius * s.frobenius, 1e-8 * sum2);
        double max_col = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double cn = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) cn += a(i, j) * a(i, j);
            max_col = std::max(max_col, std::sqrt(cn));
        }
        EXPECT_GE(s.operator_norm, max_col / std::sqrt(static_cast<double>(c)) - 1e-12);
        EXPECT_NEAR(schatten_norm(s, 2.0), s.frobenius, 1e-10 * s.frobenius);
    }
}

TEST(SchattenNorm, Examples) {
    EXPECT_NEAR(schatten_norm(DenseMatrix::ones(2, 2), 4.0), 2.0, 1e-14);
    EXPECT_NEAR(schatten_norm(DenseMatrix::identity(2), 2.0), std::sqrt(2.0), 1e-14);
    EXPECT_THROW(schatten_norm(DenseMatrix::identity(2), 0.5), InvalidArgument);
}

TEST(SchattenNorm, SixNormMatchesGramTrace) {
    Rng rng(13);
    for (int t = 0; t < 10; ++t) {
        const auto a = random_gaussian(4, 4, rng);
        const double expected = std::pow(ref::gram_power_trace(a, 3), 1.0 / 6.0);
        EXPECT_NEAR(schatten_norm(a, 6.0), expected, 1e-10 * expected);
    }
}

TEST(StableRank, Examples) {
    EXPECT_NEAR(stable_rank(DenseMatrix::ones(5, 5)), 1.0, 1e-12);
    EXPECT_NEAR(stable_rank(DenseMatrix::identity(5)), 5.0, 1e-12);
    EXPECT_THROW(stable_rank(DenseMatrix(3, 3)), ZeroMatrix);
}

TEST(StableRank, RandomSignsAgainstEigenOracle) {
    Rng rng(1);
    DenseMatrix a(8, 8);
    for (auto& v : a.data()) v = rng.sign();
    const auto eig = ref::gram_eigenvalues(a);
    double fro2 = 0.0;
    for (double v : a.data()) fro2 += v * v;
    EXPECT_EQ(fro2, 64.0);
    double eig_sum = 0.0;
    for (double e : eig) eig_sum += e;
    EXPECT_NEAR(eig_sum, fro2, 1e-8 * fro2);
    EXPECT_NEAR(stable_rank(a), fro2 / eig[0], 1e-8 * (fro2 / eig[0]));
    const double sr = stable_rank(a);
    EXPECT_GE(sr, 1.0);
    EXPECT_LE(sr, static_cast<double>(rank_exact(a)) + 1e-9);
}

TEST(Entropy, RankOneIsZero) {
    EXPECT_NEAR(matrix_entropy(DenseMatrix::ones(6, 6)), 0.0, 1e-12);
    EXPECT_THROW(matrix_entropy(DenseMatrix(2, 2)), ZeroMatrix);
}

TEST(Entropy, ScaledIdentityIsLogN) {
    // sqrt(n) I has n unit-mass weights 1/n each.
    for (std::size_t n : {2u, 9u, 32u}) {
        const auto m = DenseMatrix::identity(n).scaled(std::sqrt(static_cast<double>(n)));
        EXPECT_NEAR(matrix_entropy(m), std::log(static_cast<double>(n)), 1e-10);
    }
}

TEST(Entropy, ScalingShiftsAdditively) {
    Rng rng(2);
    DenseMatrix a(12, 12);
    for (auto& v : a.data()) v = 2.0 * rng.uniform() - 1.0;
    const double h = matrix_entropy(a);
    for (double beta : {0.5, 0.25}) EXPECT_NEAR(matrix_entropy(a.scaled(beta)), h - std::log(beta * beta), 1e-8);
}

TEST(NumericalRank, ToleranceIsRelative) {
    EXPECT_EQ(numerical_rank({1.0, 1e-8, 1e-10}), 2u);
    EXPECT_EQ(numerical_rank({}), 0u);
    EXPECT_EQ(numerical_rank({0.0, 0.0}), 0u);
}

TEST(RankExact, RealLowRankProducts) {
    Rng rng(6);
    for (std::size_t d = 1; d <= 4; ++d) {
        const auto m = multiply(random_gaussian(30, d, rng), random_gaussian(d, 30, rng));
        EXPECT_EQ(rank_exact(m), d);
    }
}
