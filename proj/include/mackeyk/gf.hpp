#ifndef MACKEYK_GF_HPP
#define MACKEYK_GF_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mackeyk {

// A field element is a symbol: the index sum(c_i * p^i) of its coefficient
// vector (c_0..c_{m-1}) in the polynomial basis.  Symbol 0 is zero, symbol 1
// is one, and for prime fields the symbol equals the residue.
using Sym = std::uint16_t;

struct FieldSpec {
    std::uint32_t p = 2;
    std::uint32_t m = 1;
    // Monic modulus, m+1 coefficients low-to-high (leading 1 included).
    // Empty when m == 1.
    std::vector<std::uint32_t> modulus;

    bool operator==(const FieldSpec&) const = default;
};

// Exact arithmetic in F_{p^m}, table-backed.  Immutable after construction;
// all operations are pure and safe to call concurrently.
class Field {
public:
    static constexpr std::uint32_t max_degree = 4;
    static constexpr std::uint64_t max_order = 1024;

    // Deterministic modulus: the monic irreducible of degree m whose
    // non-leading coefficient vector has the smallest integer encoding.
    Field(std::uint32_t p, std::uint32_t m);
    // Explicit modulus (m+1 coefficients low-to-high), checked irreducible.
    Field(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus);
    explicit Field(const FieldSpec& spec);

    const FieldSpec& spec() const { return spec_; }
    std::uint32_t p() const { return spec_.p; }
    std::uint32_t m() const { return spec_.m; }
    std::uint64_t q() const { return q_; }

    Sym zero() const { return 0; }
    Sym one() const { return 1; }
    Sym add(Sym a, Sym b) const { return add_[a * q_ + b]; }
    Sym sub(Sym a, Sym b) const { return add_[a * q_ + neg_[b]]; }
    Sym mul(Sym a, Sym b) const { return mul_[a * q_ + b]; }
    Sym neg(Sym a) const { return neg_[a]; }
    Sym inv(Sym a) const; // throws std::domain_error when a == 0
    Sym pow(Sym a, std::uint64_t e) const;

    // Integer residue embedded via the prime subfield.
    Sym from_int(std::int64_t v) const;
    // Up to m coefficients, low-to-high, reduced mod p.
    Sym from_coeffs(std::span<const std::int64_t> coeffs) const;
    std::vector<std::uint32_t> coeffs(Sym a) const; // length m, in [0, p)

    // All q elements, ascending integer encoding.
    std::vector<Sym> enumerate() const;

    std::string to_string(Sym a) const;

    bool same(const Field& other) const { return spec_ == other.spec_; }

private:
    void build_tables();

    FieldSpec spec_;
    std::uint64_t q_ = 0;
    std::vector<Sym> add_, mul_; // q*q
    std::vector<Sym> neg_, inv_; // q
};

using FieldPtr = std::shared_ptr<const Field>;

FieldPtr make_field(std::uint32_t p, std::uint32_t m = 1);
FieldPtr make_field(const FieldSpec& spec);

bool is_prime(std::uint64_t n);

} // namespace mackeyk

#endif
