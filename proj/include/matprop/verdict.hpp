#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace matprop {

/// H0: the matrix has the property. H1: it is far from having it.
enum class Decision { H0, H1 };

inline const char* to_string(Decision d) noexcept { return d == Decision::H0 ? "H0" : "H1"; }

struct Verdict {
    Decision decision = Decision::H0;
    double statistic = 0.0;
    std::size_t queries_used = 0;
    std::uint64_t seed = 0;
    /// Stage that produced the decision; single-stage testers report 1.
    int stage = 1;
    /// Distinct queries charged to each stage; staged testers fill all three.
    std::array<std::size_t, 3> stage_queries{};
};

}  // namespace matprop
