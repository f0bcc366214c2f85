#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "matprop/matrix.hpp"
#include "matprop/oracle.hpp"
#include "matprop/random.hpp"
#include "matprop/verdict.hpp"

namespace matprop {

/// Largest eps accepted by solve_eta: the maximum of eta * log2(1/eta), reached at eta = 1/e.
inline constexpr double kMaxRankEps = std::numbers::log2e / std::numbers::e;

/// In-span cutoff of the real completion solver: residual <= tol * ||column||.
inline constexpr double kSpanTolerance = 1e-8;

struct RankTestConfig {
    std::size_t d = 1;
    double eps = 0.1;
    double c_pattern = 4.0;
    std::uint64_t seed = 0;
    /// Independent patterns per test; H1 if any of them says H1.
    std::size_t amplification = 1;

    /// Throws OutOfRange / InvalidArgument.
    void validate() const;
};

/// Nested sample blocks R_1 x C_1, ..., R_m x C_m.
///
/// R_i is the prefix of length row_sizes[i] of row_order and C_i the prefix of
/// length col_sizes[i] of col_order, so R_1 is the smallest row set and C_1 the
/// largest column set. Positions in row_order / col_order are the canonical
/// local indices: rows by the level at which they entered, columns starting
/// with C_m, which is observed on the most rows.
struct SamplingPattern {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double eta = 0.0;
    std::size_t levels = 0;
    std::vector<std::size_t> row_sizes;  // non-decreasing
    std::vector<std::size_t> col_sizes;  // non-increasing
    std::vector<std::size_t> row_order;  // R_m
    std::vector<std::size_t> col_order;  // C_1

    /// Levels are 0-based here: R(0) is the smallest row block.
    std::span<const std::size_t> R(std::size_t level) const { return {row_order.data(), row_sizes.at(level)}; }
    std::span<const std::size_t> C(std::size_t level) const { return {col_order.data(), col_sizes.at(level)}; }

    /// Number of observed local rows of local column j.
    std::size_t observed_rows(std::size_t local_col) const;
    /// The union Q of all blocks in original coordinates, column-grouped.
    std::vector<Index> query_set() const;
    /// sum_i |R_i| * |C_i|, an upper bound on |Q|.
    std::size_t nominal_queries() const;
};

/// Partially observed matrix. Unobserved entries hold 0 and are ignored.
struct PartialMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Field field = Field::real();
    std::vector<double> values;        // row-major
    std::vector<std::uint8_t> mask;    // 1 = observed

    PartialMatrix() = default;
    PartialMatrix(std::size_t r, std::size_t c, Field f)
        : rows(r), cols(c), field(f), values(r * c, 0.0), mask(r * c, 0) {}

    bool observed(std::size_t i, std::size_t j) const { return mask[i * cols + j] != 0; }
    double value(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    void observe(std::size_t i, std::size_t j, double v) {
        values[i * cols + j] = v;
        mask[i * cols + j] = 1;
    }
};

struct CompletionResult {
    std::size_t rank = 0;
    DenseMatrix completed;
    /// Columns of the completion that form the basis, in insertion order.
    std::vector<std::size_t> basis_columns;
};

/// eta in (0, 1/e] with eta * log2(1/eta) = eps, by bisection on the increasing
/// branch. Throws OutOfRange unless 0 < eps <= kMaxRankEps.
double solve_eta(double eps);

/// Draws the nested pattern for an n x n (or rows x cols) hidden matrix.
SamplingPattern build_pattern(std::size_t n, const RankTestConfig& cfg, Rng& rng);
SamplingPattern build_pattern(std::size_t rows, std::size_t cols, const RankTestConfig& cfg, Rng& rng);

/// Reads the pattern's entries into canonical local coordinates.
PartialMatrix observe_pattern(EntryOracle& oracle, const SamplingPattern& pattern);

/// Observed prefix length of each column. Throws MaskNotStaircase if some
/// column's observed rows are not a prefix.
std::vector<std::size_t> staircase_profile(const PartialMatrix& p);

/// Minimum rank over all completions of p (greedy column scan, longest
/// observed prefix first). Throws MaskNotStaircase.
std::size_t min_completion_rank(const PartialMatrix& p);

/// Same, also returning a witness completion. With check_invariants set, the
/// solver verifies after every column that all processed columns lie in the
/// span of the current basis and that the basis is independent (slow).
CompletionResult complete_min_rank(const PartialMatrix& p, bool check_invariants = false);

/// Non-adaptive rank test: all patterns are drawn and sealed before any read.
Verdict test_rank(EntryOracle& oracle, const RankTestConfig& cfg, Rng& rng);
Verdict test_rank(EntryOracle& oracle, const RankTestConfig& cfg);

/// (d+1)^2 bilinear probes s_i^T A t_j; H1 iff the sketch S A T has rank d+1.
Verdict test_rank_sensing(SensingOracle& oracle, std::size_t d, Rng& rng);

/// Pairs (r, c) whose addition raises the rank of the full-rank base A[R, C].
/// Throws NotFullRankBase.
std::vector<Index> augment_set(const DenseMatrix& m, std::span<const std::size_t> R, std::span<const std::size_t> C);

/// Augment count of every row, in row order.
std::vector<std::size_t> augment_counts(const DenseMatrix& m, std::span<const std::size_t> R,
                                        std::span<const std::size_t> C);

/// The level-i pattern test: with counts sorted non-increasingly, the
/// ceil(n / 2^i)-th largest count is at least 2^(i-1) * eta * n.
bool has_augment_pattern(const DenseMatrix& m, std::span<const std::size_t> R, std::span<const std::size_t> C,
                         std::size_t level, double eta);

}  // namespace matprop
