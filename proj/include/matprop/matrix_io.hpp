#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "matprop/matrix.hpp"

namespace matprop {

/// Optional provenance line written after the header.
struct MatrixMeta {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> family;
};

struct MatrixFile {
    DenseMatrix matrix;
    MatrixMeta meta;
};

/// Text format:
///   matrix <rows> <cols> <real | gf:<p>>
///   # seed=<u64> family=<name>        (optional)
///   one line per row, whitespace-separated values
/// Reals are written in shortest round-trip form, so write/read is bit-exact.
void write_matrix(std::ostream& out, const DenseMatrix& m, const MatrixMeta& meta = {});
MatrixFile read_matrix(std::istream& in);

void save_matrix(const std::string& path, const DenseMatrix& m, const MatrixMeta& meta = {});
MatrixFile load_matrix(const std::string& path);

/// Shortest decimal that parses back to exactly v.
std::string format_real(double v);

}  // namespace matprop
