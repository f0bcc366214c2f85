#include <gtest/gtest.h>

#include "matprop/error.hpp"
#include "matprop/field.hpp"
#include "matprop/random.hpp"

using namespace matprop;

TEST(FieldInverse, SmallCases) {
    EXPECT_EQ(field_inverse(Fp{3}, PrimeField(7)).value, 5u);
    EXPECT_EQ(field_inverse(Fp{1}, PrimeField(2)).value, 1u);
    EXPECT_THROW(field_inverse(Fp{0}, PrimeField(5)), ZeroInverse);
}

TEST(PrimeField, RejectsNonPrimes) {
    EXPECT_THROW(PrimeField(0), InvalidArgument);
    EXPECT_THROW(PrimeField(1), InvalidArgument);
    EXPECT_THROW(PrimeField(9), InvalidArgument);
    EXPECT_THROW(PrimeField(2147483648ULL), InvalidArgument);
    EXPECT_NO_THROW(PrimeField(2147483647ULL));
}

TEST(PrimeField, MillerRabinMatchesTrialDivision) {
    auto trial = [](std::uint64_t n) {
        if (n < 2) return false;
        for (std::uint64_t d = 2; d * d <= n; ++d)
            if (n % d == 0) return false;
        return true;
    };
    for (std::uint64_t n = 0; n < 20000; ++n) EXPECT_EQ(is_prime(n), trial(n)) << n;
    EXPECT_TRUE(is_prime(65537));
    EXPECT_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to bases 2, 3, 5, 7
}

class FieldAxioms : public ::testing::TestWithParam<std::uint32_t> {};

TEST_P(FieldAxioms, Hold) {
    const PrimeField f(GetParam());
    const std::uint32_t p = GetParam();
    auto check = [&](Fp a, Fp b, Fp c) {
        ASSERT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        ASSERT_EQ(f.add(a, b), f.add(b, a));
        ASSERT_EQ(f.mul(a, b), f.mul(b, a));
        ASSERT_EQ(f.add(a, f.neg(a)), Fp{0});
        ASSERT_EQ(f.sub(a, b), f.add(a, f.neg(b)));
        if (a.value != 0) ASSERT_EQ(f.mul(a, f.inv(a)), Fp{1});
    };
    if (p <= 7) {
        for (std::uint32_t a = 0; a < p; ++a)
            for (std::uint32_t b = 0; b < p; ++b)
                for (std::uint32_t c = 0; c < p; ++c) check(Fp{a}, Fp{b}, Fp{c});
    } else {
        Rng rng(11);
        for (int t = 0; t < 10000; ++t) {
            check(Fp{static_cast<std::uint32_t>(rng.uniform_below(p))}, Fp{static_cast<std::uint32_t>(rng.uniform_below(p))},
                  Fp{static_cast<std::uint32_t>(rng.uniform_below(p))});
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Primes, FieldAxioms, ::testing::Values(2u, 3u, 5u, 7u, 65537u));

TEST(PrimeField, ElementReducesNegatives) {
    const PrimeField f(7);
    EXPECT_EQ(f.element(-1).value, 6u);
    EXPECT_EQ(f.element(15).value, 1u);
    EXPECT_EQ(f.pow(Fp{3}, 6).value, 1u);
}

TEST(Field, ParseRoundTrip) {
    EXPECT_TRUE(Field::parse("real").is_real());
    EXPECT_EQ(Field::parse("gf:7").modulus(), 7u);
    EXPECT_EQ(Field::prime(65537).to_string(), "gf:65537");
    EXPECT_THROW(Field::parse("gf:8"), FormatError);
    EXPECT_THROW(Field::parse("complex"), FormatError);
    EXPECT_THROW(Field::parse("gf:"), FormatError);
}
