#include "matprop/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "matprop/error.hpp"

namespace matprop {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw FormatError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
}

template <class T>
bool parse_number(const std::string& tok, T& out) {
    const char* first = tok.data();
    const char* last = first + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && first != last;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_matrix(std::ostream& out, const DenseMatrix& m, const MatrixMeta& meta) {
    out << "matrix " << m.rows() << ' ' << m.cols() << ' ' << m.field().to_string() << '\n';
    if (meta.seed || meta.family) {
        out << '#';
        if (meta.seed) out << " seed=" << *meta.seed;
        if (meta.family) out << " family=" << *meta.family;
        out << '\n';
    }
    const bool real = m.field().is_real();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            if (real) {
                out << format_real(m(i, j));
            } else {
                out << static_cast<std::uint64_t>(m(i, j));
            }
        }
        out << '\n';
    }
}

MatrixFile read_matrix(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(lineno, "empty input");
    const auto head = split(line);
    std::size_t rows = 0, cols = 0;
    if (head.size() != 4 || head[0] != "matrix" || !parse_number(head[1], rows) || !parse_number(head[2], cols)) {
        fail(lineno, "expected 'matrix <rows> <cols> <field>'");
    }
    const Field field = [&] {
        try {
            return Field::parse(head[3]);
        } catch (const Error& e) {
            fail(lineno, e.what());
        }
    }();

    MatrixFile out;
    std::vector<double> data;
    data.reserve(rows * cols);
    bool first_body_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (first_body_line && !line.empty() && line[0] == '#') {
            first_body_line = false;
            for (const auto& tok : split(line.substr(1))) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) fail(lineno, "bad comment field '" + tok + "'");
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "seed") {
                    std::uint64_t s = 0;
                    if (!parse_number(val, s)) fail(lineno, "bad seed '" + val + "'");
                    out.meta.seed = s;
                } else if (key == "family") {
                    out.meta.family = val;
                } else {
                    fail(lineno, "unknown comment field '" + key + "'");
                }
            }
            continue;
        }
        first_body_line = false;
        const auto toks = split(line);
        if (toks.empty()) continue;
        if (toks.size() != cols) {
            fail(lineno, "expected " + std::to_string(cols) + " values, got " + std::to_string(toks.size()));
        }
        if (data.size() / std::max<std::size_t>(cols, 1) >= rows) fail(lineno, "more rows than declared");
        for (const auto& tok : toks) {
            if (field.is_real()) {
                double v = 0.0;
                if (!parse_number(tok, v)) fail(lineno, "bad real '" + tok + "'");
                data.push_back(v);
            } else {
                std::uint64_t v = 0;
                if (!parse_number(tok, v) || v >= field.modulus()) fail(lineno, "bad residue '" + tok + "'");
                data.push_back(static_cast<double>(v));
            }
        }
    }
    if (data.size() != rows * cols) {
        fail(lineno, "expected " + std::to_string(rows) + " rows, got " + std::to_string(cols ? data.size() / cols : 0));
    }
    out.matrix = DenseMatrix(rows, cols, std::move(data), field);
    return out;
}

void save_matrix(const std::string& path, const DenseMatrix& m, const MatrixMeta& meta) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
    write_matrix(f, m, meta);
    if (!f) throw InvalidArgument("write to '" + path + "' failed");
}

MatrixFile load_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open '" + path + "'");
    return read_matrix(f);
}

}  // namespace matprop
