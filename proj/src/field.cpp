#include "matprop/field.hpp"

#include <charconv>

#include "matprop/error.hpp"

namespace matprop {

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    a %= m;
    while (e > 0) {
        if (e & 1U) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1U;
    }
    return r;
}

}  // namespace

bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % small == 0) return n == small;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeField::PrimeField(std::uint64_t p) : p_(static_cast<std::uint32_t>(p)) {
    if (p < 2 || p >= (1ULL << 31) || !is_prime(p)) {
        throw InvalidArgument("GF(p) requires a prime 2 <= p < 2^31, got " + std::to_string(p));
    }
}

Fp PrimeField::element(std::int64_t v) const noexcept {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return Fp{static_cast<std::uint32_t>(r)};
}

Fp PrimeField::add(Fp a, Fp b) const noexcept {
    std::uint64_t s = std::uint64_t{a.value} + b.value;
    return Fp{static_cast<std::uint32_t>(s >= p_ ? s - p_ : s)};
}

Fp PrimeField::sub(Fp a, Fp b) const noexcept {
    return Fp{a.value >= b.value ? a.value - b.value : a.value + p_ - b.value};
}

Fp PrimeField::neg(Fp a) const noexcept { return Fp{a.value == 0 ? 0 : p_ - a.value}; }

Fp PrimeField::mul(Fp a, Fp b) const noexcept {
    return Fp{static_cast<std::uint32_t>(std::uint64_t{a.value} * b.value % p_)};
}

Fp PrimeField::pow(Fp a, std::uint64_t e) const noexcept {
    return Fp{static_cast<std::uint32_t>(powmod(a.value, e, p_))};
}

Fp PrimeField::inv(Fp a) const {
    if (a.value == 0) throw ZeroInverse("zero has no inverse in GF(" + std::to_string(p_) + ")");
    // Fermat: a^(p-2)
    return pow(a, p_ - 2);
}

Fp field_inverse(Fp a, const PrimeField& field) { return field.inv(a); }

std::string Field::to_string() const {
    if (is_real()) return "real";
    return "gf:" + std::to_string(prime_->modulus());
}

Field Field::parse(const std::string& token) {
    if (token == "real") return Field::real();
    if (token.rfind("gf:", 0) == 0) {
        std::uint64_t p = 0;
        const char* first = token.data() + 3;
        const char* last = token.data() + token.size();
        auto [ptr, ec] = std::from_chars(first, last, p);
        if (ec != std::errc{} || ptr != last || first == last) {
            throw FormatError("bad field token '" + token + "'");
        }
        try {
            return Field::prime(p);
        } catch (const InvalidArgument& e) {
            throw FormatError(e.what());
        }
    }
    throw FormatError("bad field token '" + token + "', expected 'real' or 'gf:<p>'");
}

}  // namespace matprop
