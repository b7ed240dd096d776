#include "mackeyk/gf.hpp"

#include <algorithm>
#include <stdexcept>

#include "mackeyk/errors.hpp"
#include "mackeyk/util.hpp"

namespace mackeyk {

namespace {

using Poly = std::vector<std::uint32_t>; // coefficients low-to-high, mod p

void trim(Poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

// Remainder of f modulo monic g.
Poly poly_rem(Poly f, const Poly& g, std::uint32_t p) {
    trim(f);
    while (f.size() >= g.size()) {
        std::uint32_t c = f.back(); // leading coefficient; g is monic
        std::size_t shift = f.size() - g.size();
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::uint64_t t = std::uint64_t(c) * g[i] % p;
            f[shift + i] = static_cast<std::uint32_t>((f[shift + i] + p - t) % p);
        }
        trim(f);
    }
    return f;
}

Poly poly_mul(const Poly& a, const Poly& b, std::uint32_t p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = static_cast<std::uint32_t>(
                (r[i + j] + std::uint64_t(a[i]) * b[j]) % p);
    return r;
}

// Decode the integer encoding into degree < m coefficients.
Poly decode(std::uint64_t idx, std::uint32_t p, std::uint32_t m) {
    Poly c(m, 0);
    for (std::uint32_t i = 0; i < m; ++i) {
        c[i] = static_cast<std::uint32_t>(idx % p);
        idx /= p;
    }
    return c;
}

std::uint64_t encode(const Poly& c, std::uint32_t p) {
    std::uint64_t idx = 0;
    for (std::size_t i = c.size(); i-- > 0;) idx = idx * p + c[i];
    return idx;
}

// Exhaustive trial division by every monic polynomial of degree 1..deg(f)/2.
bool poly_irreducible(const Poly& f, std::uint32_t p) {
    std::uint32_t deg = static_cast<std::uint32_t>(f.size()) - 1;
    for (std::uint32_t d = 1; d <= deg / 2; ++d) {
        std::uint64_t count = checked_pow(p, d);
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            Poly g = decode(idx, p, d);
            g.push_back(1); // monic
            if (poly_rem(f, g, p).empty()) return false;
        }
    }
    return true;
}

Poly smallest_irreducible(std::uint32_t p, std::uint32_t m) {
    std::uint64_t count = checked_pow(p, m);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        Poly f = decode(idx, p, m);
        f.push_back(1);
        if (poly_irreducible(f, p)) return f;
    }
    throw ConfigError("no irreducible polynomial found"); // unreachable
}

} // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

Field::Field(std::uint32_t p, std::uint32_t m) {
    if (!is_prime(p)) throw ConfigError("field characteristic must be prime");
    if (m < 1 || m > max_degree)
        throw ConfigError("extension degree must be in [1, 4]");
    spec_.p = p;
    spec_.m = m;
    q_ = checked_pow(p, m);
    if (q_ > max_order) throw ConfigError("field order exceeds 1024");
    if (m > 1) {
        Poly f = smallest_irreducible(p, m);
        spec_.modulus.assign(f.begin(), f.end());
    }
    build_tables();
}

Field::Field(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus) {
    if (!is_prime(p)) throw ConfigError("field characteristic must be prime");
    if (m < 1 || m > max_degree)
        throw ConfigError("extension degree must be in [1, 4]");
    spec_.p = p;
    spec_.m = m;
    q_ = checked_pow(p, m);
    if (q_ > max_order) throw ConfigError("field order exceeds 1024");
    if (m == 1) {
        if (!modulus.empty())
            throw ConfigError("modulus must be empty for prime fields");
    } else {
        if (modulus.size() != m + 1)
            throw ConfigError("modulus must list m+1 coefficients");
        for (auto& c : modulus) c %= p;
        if (modulus.back() != 1) throw ConfigError("modulus must be monic");
        if (!poly_irreducible(modulus, p))
            throw ConfigError("modulus is reducible over F_p");
        spec_.modulus = std::move(modulus);
    }
    build_tables();
}

Field::Field(const FieldSpec& spec)
    : Field(spec.p, spec.m, spec.modulus) {}

void Field::build_tables() {
    const std::uint32_t p = spec_.p;
    const std::uint32_t m = spec_.m;
    add_.assign(q_ * q_, 0);
    mul_.assign(q_ * q_, 0);
    neg_.assign(q_, 0);
    inv_.assign(q_, 0);
    Poly mod(spec_.modulus.begin(), spec_.modulus.end());
    std::vector<Poly> elems(q_);
    for (std::uint64_t i = 0; i < q_; ++i) elems[i] = decode(i, p, m);
    for (std::uint64_t a = 0; a < q_; ++a) {
        Poly na(m, 0);
        for (std::uint32_t i = 0; i < m; ++i) na[i] = (p - elems[a][i]) % p;
        neg_[a] = static_cast<Sym>(encode(na, p));
        for (std::uint64_t b = 0; b < q_; ++b) {
            Poly s(m, 0);
            for (std::uint32_t i = 0; i < m; ++i)
                s[i] = (elems[a][i] + elems[b][i]) % p;
            add_[a * q_ + b] = static_cast<Sym>(encode(s, p));
            Poly prod = (m == 1)
                            ? Poly{static_cast<std::uint32_t>(
                                  std::uint64_t(elems[a][0]) * elems[b][0] % p)}
                            : poly_rem(poly_mul(elems[a], elems[b], p), mod, p);
            prod.resize(m, 0);
            Sym prod_sym = static_cast<Sym>(encode(prod, p));
            mul_[a * q_ + b] = prod_sym;
            if (prod_sym == 1) inv_[a] = static_cast<Sym>(b);
        }
    }
}

Sym Field::inv(Sym a) const {
    if (a == 0) throw std::domain_error("division by zero in F_q");
    return inv_[a];
}

Sym Field::pow(Sym a, std::uint64_t e) const {
    Sym r = 1;
    Sym base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

Sym Field::from_int(std::int64_t v) const {
    std::int64_t p = spec_.p;
    return static_cast<Sym>(((v % p) + p) % p);
}

Sym Field::from_coeffs(std::span<const std::int64_t> coeffs) const {
    if (coeffs.size() > spec_.m)
        throw std::invalid_argument("coefficient list longer than degree m");
    std::uint64_t idx = 0;
    std::int64_t p = spec_.p;
    for (std::size_t i = coeffs.size(); i-- > 0;)
        idx = idx * spec_.p + static_cast<std::uint64_t>(((coeffs[i] % p) + p) % p);
    return static_cast<Sym>(idx);
}

std::vector<std::uint32_t> Field::coeffs(Sym a) const {
    return decode(a, spec_.p, spec_.m);
}

std::vector<Sym> Field::enumerate() const {
    std::vector<Sym> out(q_);
    for (std::uint64_t i = 0; i < q_; ++i) out[i] = static_cast<Sym>(i);
    return out;
}

std::string Field::to_string(Sym a) const {
    if (spec_.m == 1) return std::to_string(a);
    auto c = coeffs(a);
    std::string s = "[";
    for (std::uint32_t i = 0; i < spec_.m; ++i) {
        if (i) s += ",";
        s += std::to_string(c[i]);
    }
    return s + "]";
}

FieldPtr make_field(std::uint32_t p, std::uint32_t m) {
    return std::make_shared<const Field>(p, m);
}

FieldPtr make_field(const FieldSpec& spec) {
    return std::make_shared<const Field>(spec);
}

} // namespace mackeyk
