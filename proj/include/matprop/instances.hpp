#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "matprop/matrix.hpp"
#include "matprop/random.hpp"

namespace matprop {

enum class Family {
    LowRankField,
    UniformField,
    Planted,
    GaussianPair,
    StableRankPair,
    SchattenPair,
    OrthogonalTrunc,
    RankOneSigned,
    RandomSign,
    AllOnes,
    Zero,
};

/// Kebab-case family names used by the CLI and configs ("low-rank-field", ...).
std::string to_string(Family f);
Family parse_family(const std::string& name);

struct InstanceSpec {
    Family family = Family::Zero;
    std::size_t n = 16;
    std::size_t d = 1;
    double eps = 0.1;
    /// Field modulus; 0 means the reals.
    std::uint32_t p = 0;
    double eta = 0.1;
    double trunc_C = 6.0;
    /// Pair families: 0 picks the first matrix, 1 the second.
    int member = 0;
    /// GaussianPair noise scale n^-noise_exponent.
    double noise_exponent = 14.0;
    std::uint64_t seed = 0;

    Field field() const { return p == 0 ? Field::real() : Field::prime(p); }
    void validate() const;
};

/// Deterministic in (spec, seed): equal specs give bit-identical matrices.
DenseMatrix generate(const InstanceSpec& spec);

/// U V^T with U, V (n x d) uniform over the field; over the reals entries of
/// U, V are uniform on [-1, 1] and the product is divided by d. d = 0 gives zero.
DenseMatrix gen_low_rank_field(std::size_t n, std::size_t d, const Field& f, Rng& rng);

/// Entries uniform over GF(p), or uniform on [-1, 1] over the reals.
DenseMatrix gen_uniform(std::size_t n, const Field& f, Rng& rng);

/// inner at uniformly chosen row and column positions of an n x n zero matrix.
DenseMatrix gen_planted(const DenseMatrix& inner, std::size_t n, Rng& rng);

/// (U V^T, U V^T + n^-noise_exponent G) with shared standard Gaussian U, V.
std::pair<DenseMatrix, DenseMatrix> gen_gaussian_pair(std::size_t n, std::size_t d, Rng& rng,
                                                      double noise_exponent = 14.0);

struct StableRankPair {
    DenseMatrix first;   // kappa G
    DenseMatrix second;  // kappa (G0 + s1 u v^T)
    double kappa = 0.0;
    double srank_first = 0.0;
    double srank_second = 0.0;
    /// Entries clipped to [-1, 1] across both matrices.
    std::size_t clamped = 0;
};

inline constexpr double kStableRankPairC = 1.5;

/// ceil(d / eps^2) x d Gaussian pair with spike s1 = 3 sqrt(eps / d), scaled by
/// kappa = C / log2(d / eps) and clipped to [-1, 1].
StableRankPair gen_stable_rank_pair(std::size_t d, double eps, Rng& rng, double C = kStableRankPairC);

/// ((1 + eta) G / sqrt n, O + eta G / sqrt n), each entry clipped to
/// +-C / sqrt n and then scaled by sqrt n / C.
std::pair<DenseMatrix, DenseMatrix> gen_schatten_pair(std::size_t n, double eta, double trunc_C, Rng& rng);

/// Haar orthogonal matrix: Householder QR of a Gaussian matrix with the
/// signs of R's diagonal moved into Q.
DenseMatrix gen_random_orthogonal(std::size_t n, Rng& rng);

/// x -> clamp(x, -C/sqrt n, C/sqrt n) * sqrt n / C, entrywise.
DenseMatrix truncate_scaled(const DenseMatrix& m, double trunc_C);

DenseMatrix gen_rank_one_signed(std::size_t n, Rng& rng);
DenseMatrix gen_random_signs(std::size_t n, Rng& rng);

/// Least number of entry changes that bring the rank to <= r (rigidity),
/// by enumerating r-dimensional column spaces. GF(2) or GF(3), at most 6 x 6;
/// TooLarge otherwise.
std::size_t distance_to_rank(const DenseMatrix& m, std::size_t r);

/// Best accuracy of a one-feature threshold rule separating samples a (label
/// 0) from samples b (label 1), over every feature column, cut point and
/// orientation. Samples are rows of equal length.
double best_threshold_accuracy(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

struct IndistinguishabilityResult {
    double accuracy = 0.0;
    std::size_t draws = 0;
};

/// Restricts U V^T (U, V uniform n x d over GF(p)) and a uniform matrix to one
/// fixed random set of `support` positions, `draws` times each, and reports the
/// best single-feature threshold accuracy. Features: each observed entry and
/// the count of nonzeros.
IndistinguishabilityResult indistinguishability(std::size_t n, std::size_t d, std::uint32_t p, std::size_t support,
                                                std::size_t draws, Rng& rng);

}  // namespace matprop
