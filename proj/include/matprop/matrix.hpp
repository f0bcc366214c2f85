#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matprop/field.hpp"

namespace matprop {

/// Row/column position of one matrix entry.
struct Index {
    std::size_t row = 0;
    std::size_t col = 0;

    friend bool operator==(const Index&, const Index&) = default;
    friend auto operator<=>(const Index&, const Index&) = default;
};

/// Dense row-major n x m matrix over the reals or GF(p).
///
/// Entries are stored as doubles. Over GF(p) every entry is an integer residue
/// in [0, p); p < 2^31 keeps residues exactly representable. The constructor
/// validates that invariant, so kernels may cast entries to integers directly.
class DenseMatrix {
public:
    DenseMatrix() : field_(Field::real()) {}
    DenseMatrix(std::size_t rows, std::size_t cols, Field field = Field::real());
    /// Throws ShapeMismatch on size mismatch, InvalidArgument on unreduced or
    /// non-finite entries.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data, Field field = Field::real());

    static DenseMatrix identity(std::size_t n, Field field = Field::real());
    static DenseMatrix ones(std::size_t rows, std::size_t cols, Field field = Field::real());
    /// Builds from nested rows; entries over GF(p) are reduced modulo p.
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows, Field field = Field::real());

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    const Field& field() const noexcept { return field_; }
    bool is_real() const noexcept { return field_.is_real(); }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const;

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    /// Sets entry (i, j); over GF(p) the value is reduced modulo p.
    void set(std::size_t i, std::size_t j, double value);

    DenseMatrix transpose() const;
    DenseMatrix submatrix(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;
    DenseMatrix scaled(double beta) const;

    bool is_zero() const noexcept;
    /// max |A_ij| <= 1; only meaningful over the reals.
    bool is_bounded_entry() const noexcept;
    double max_abs() const noexcept;
    std::size_t nonzeros() const noexcept;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Field field_;
    std::vector<double> data_;
};

/// Matrix product in the operands' common field.
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);

/// Reduces an integral double into [0, p).
double reduce_mod(double v, std::uint32_t p);

}  // namespace matprop
