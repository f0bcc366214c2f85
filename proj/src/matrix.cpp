#include "matprop/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matprop/error.hpp"

namespace matprop {

double reduce_mod(double v, std::uint32_t p) {
    double r = std::fmod(v, static_cast<double>(p));
    if (r < 0) r += p;
    return r;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Field field)
    : rows_(rows), cols_(cols), field_(field), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data, Field field)
    : rows_(rows), cols_(cols), field_(field), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeMismatch("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                            std::to_string(rows_ * cols_));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw InvalidArgument("matrix entries must be finite");
        if (field_.is_prime() && (v < 0 || v >= field_.modulus() || v != std::floor(v))) {
            throw InvalidArgument("GF(p) entry " + std::to_string(v) + " is not a reduced residue");
        }
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n, Field field) {
    DenseMatrix m(n, n, field);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::ones(std::size_t rows, std::size_t cols, Field field) {
    DenseMatrix m(rows, cols, field);
    std::fill(m.data_.begin(), m.data_.end(), 1.0);
    return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows, Field field) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.front().size();
    std::vector<double> data;
    data.reserve(n * m);
    for (const auto& r : rows) {
        if (r.size() != m) throw ShapeMismatch("ragged rows");
        for (double v : r) data.push_back(field.is_prime() ? reduce_mod(std::round(v), field.modulus()) : v);
    }
    return DenseMatrix(n, m, std::move(data), field);
}

double DenseMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) {
        throw IndexOutOfRange("index (" + std::to_string(i) + "," + std::to_string(j) + ") outside " +
                              std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    return (*this)(i, j);
}

void DenseMatrix::set(std::size_t i, std::size_t j, double value) {
    if (i >= rows_ || j >= cols_) throw IndexOutOfRange("set: index outside matrix");
    (*this)(i, j) = field_.is_prime() ? reduce_mod(std::round(value), field_.modulus()) : value;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_, field_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix DenseMatrix::submatrix(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
    DenseMatrix s(rows.size(), cols.size(), field_);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        if (rows[a] >= rows_) throw IndexOutOfRange("submatrix row index out of range");
        for (std::size_t b = 0; b < cols.size(); ++b) {
            if (cols[b] >= cols_) throw IndexOutOfRange("submatrix column index out of range");
            s(a, b) = (*this)(rows[a], cols[b]);
        }
    }
    return s;
}

DenseMatrix DenseMatrix::scaled(double beta) const {
    if (!is_real()) throw InvalidArgument("scaled() is defined for real matrices");
    DenseMatrix s = *this;
    for (double& v : s.data_) v *= beta;
    return s;
}

bool DenseMatrix::is_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool DenseMatrix::is_bounded_entry() const noexcept { return max_abs() <= 1.0; }

std::size_t DenseMatrix::nonzeros() const noexcept {
    return static_cast<std::size_t>(std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("multiply: inner dimensions differ");
    if (!(a.field() == b.field())) throw ShapeMismatch("multiply: operands live in different fields");
    DenseMatrix c(a.rows(), b.cols(), a.field());
    if (a.is_real()) {
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }
    const std::uint64_t p = a.field().modulus();
    std::vector<std::uint64_t> acc(b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const auto aik = static_cast<std::uint64_t>(a(i, k));
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                acc[j] = (acc[j] + aik * static_cast<std::uint64_t>(b(k, j))) % p;
            }
        }
        for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = static_cast<double>(acc[j]);
    }
    return c;
}

}  // namespace matprop
