#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "matprop/matrix.hpp"

namespace matprop {

/// Entry provider for matrices too large to store densely; must be a pure
/// function of (row, col).
struct ImplicitMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Field field = Field::real();
    std::function<double(std::size_t, std::size_t)> entry;
};

/// Gated entry access to a hidden matrix.
///
/// Every distinct entry read is logged once; repeated reads of an index are
/// free. After seal(Q) any read outside Q raises NonAdaptivityViolation, which
/// is how testers prove that their whole query pattern was fixed before any
/// value was observed.
class EntryOracle {
public:
    explicit EntryOracle(DenseMatrix hidden, std::optional<std::size_t> budget = std::nullopt);
    explicit EntryOracle(ImplicitMatrix hidden, std::optional<std::size_t> budget = std::nullopt);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const Field& field() const noexcept { return field_; }

    /// Commits the query set. Throws AlreadyRead if anything was read before.
    void seal(std::span<const Index> query_set);
    bool sealed() const noexcept { return sealed_; }

    /// Values for each requested index, aligned with the request. The batch is
    /// validated as a whole before anything is logged.
    std::vector<double> read_entries(std::span<const Index> indices);
    double read(std::size_t row, std::size_t col);

    /// Distinct entries read so far.
    std::size_t queries_used() const noexcept { return log_.size(); }
    const std::vector<Index>& log() const noexcept { return log_; }
    std::optional<std::size_t> budget() const noexcept { return budget_; }

private:
    std::uint64_t key(std::size_t row, std::size_t col) const noexcept { return std::uint64_t{row} * cols_ + col; }

    std::size_t rows_;
    std::size_t cols_;
    Field field_;
    std::function<double(std::size_t, std::size_t)> fetch_;
    std::optional<std::size_t> budget_;

    bool sealed_ = false;
    std::unordered_set<std::uint64_t> sealed_set_;
    std::unordered_set<std::uint64_t> seen_;
    std::vector<Index> log_;
};

/// Trace inner-product access <X, A> = tr(X^T A). Each probe costs one query
/// regardless of how dense X is.
class SensingOracle {
public:
    explicit SensingOracle(DenseMatrix hidden, std::optional<std::size_t> budget = std::nullopt);

    std::size_t rows() const noexcept { return hidden_.rows(); }
    std::size_t cols() const noexcept { return hidden_.cols(); }
    const Field& field() const noexcept { return hidden_.field(); }

    /// sum_ij X_ij A_ij. Throws ShapeMismatch, BudgetExceeded.
    double sense(const DenseMatrix& probe);
    /// Probe X = left * right^T without materializing X: returns left^T A right.
    double sense_outer(std::span<const double> left, std::span<const double> right);
    /// Entry reads expressed as unit probes e_i e_j^T; one query per index.
    std::vector<double> read_entries(std::span<const Index> indices);

    std::size_t queries_used() const noexcept { return probes_; }
    std::optional<std::size_t> budget() const noexcept { return budget_; }

private:
    void charge(std::size_t count);

    DenseMatrix hidden_;
    std::optional<std::size_t> budget_;
    std::size_t probes_ = 0;
};

}  // namespace matprop
