#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace matprop {

/// Residue class element of GF(p). Always reduced into [0, p).
struct Fp {
    std::uint32_t value = 0;

    friend bool operator==(Fp, Fp) = default;
};

/// Arithmetic in GF(p) for a prime p < 2^31, so every product fits in 64 bits.
class PrimeField {
public:
    /// Throws InvalidArgument unless p is a prime in [2, 2^31).
    explicit PrimeField(std::uint64_t p);

    std::uint32_t modulus() const noexcept { return p_; }

    Fp element(std::int64_t v) const noexcept;
    Fp add(Fp a, Fp b) const noexcept;
    Fp sub(Fp a, Fp b) const noexcept;
    Fp neg(Fp a) const noexcept;
    Fp mul(Fp a, Fp b) const noexcept;
    /// Throws ZeroInverse for a == 0.
    Fp inv(Fp a) const;
    Fp pow(Fp a, std::uint64_t e) const noexcept;

    friend bool operator==(const PrimeField&, const PrimeField&) = default;

private:
    std::uint32_t p_;
};

/// Deterministic Miller-Rabin, exact for n < 2^64.
bool is_prime(std::uint64_t n) noexcept;

/// Inverse of a in GF(p).
Fp field_inverse(Fp a, const PrimeField& field);

/// Scalar field descriptor of a matrix: the reals or a prime field.
class Field {
public:
    static Field real() { return Field{}; }
    static Field prime(std::uint64_t p) { return Field{PrimeField{p}}; }

    bool is_real() const noexcept { return !prime_.has_value(); }
    bool is_prime() const noexcept { return prime_.has_value(); }
    /// Precondition: is_prime().
    const PrimeField& prime_field() const { return *prime_; }
    std::uint32_t modulus() const noexcept { return prime_ ? prime_->modulus() : 0; }

    /// "real" or "gf:<p>", the token used in matrix files.
    std::string to_string() const;
    /// Parses "real" or "gf:<p>"; throws FormatError.
    static Field parse(const std::string& token);

    friend bool operator==(const Field&, const Field&) = default;

private:
    Field() = default;
    explicit Field(PrimeField f) : prime_(f) {}

    std::optional<PrimeField> prime_;
};

}  // namespace matprop
