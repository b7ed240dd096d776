#ifndef MACKEYK_ALGEBRA_HPP
#define MACKEYK_ALGEBRA_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mackeyk/gf.hpp"
#include "mackeyk/linalg.hpp"

namespace mackeyk {

// A finite-dimensional associative unital algebra over F_q, presented by
// labeled basis and structure constants.  Immutable once built.
struct Algebra {
    FieldPtr field;
    std::size_t dim = 0;
    std::vector<std::string> labels;
    // Flattened: table[(i*dim + j)*dim + k] = coefficient of b_k in b_i*b_j.
    std::vector<Sym> table;
    Vec unit;

    const Sym* entry(std::size_t i, std::size_t j) const {
        return table.data() + (i * dim + j) * dim;
    }
    Vec entry_vec(std::size_t i, std::size_t j) const {
        const Sym* e = entry(i, j);
        return Vec(e, e + dim);
    }
    Vec basis_vec(std::size_t i) const {
        Vec v(dim, 0);
        v[i] = 1;
        return v;
    }

    // Bilinear extension of the table.
    Vec mul(const Vec& x, const Vec& y) const;
    Vec pow(const Vec& x, std::uint64_t e) const;
    // L with L * coords(y) = coords(x*y), columns indexed by y-basis.
    Mat left_regular(const Vec& x) const;
    Mat right_regular(const Vec& x) const;
    bool is_unit(const Vec& x) const;
    Vec inverse(const Vec& x) const; // throws std::domain_error on non-units
    bool is_idempotent(const Vec& x) const;

    // Mixed-radix element index over the field symbols, digit i weight q^i.
    std::uint64_t order() const; // q^dim
    std::uint64_t index_of(const Vec& x) const;
    Vec coords_of(std::uint64_t idx) const;

    std::string describe(const Vec& x) const;
};

using AlgebraPtr = std::shared_ptr<const Algebra>;

AlgebraPtr make_algebra(FieldPtr field, std::vector<std::string> labels,
                        std::vector<Sym> table, Vec unit);

// Element with its parent algebra, for checked arithmetic at API boundaries.
struct AlgElement {
    AlgebraPtr alg;
    Vec coords;

    AlgElement operator*(const AlgElement& o) const;
    AlgElement operator+(const AlgElement& o) const;
    bool operator==(const AlgElement& o) const;
};

// Associativity/unit audit.  Violations are data, not exceptions.
struct ValidationReport {
    bool ok = true;
    std::string message; // names the first violated triple or pair
};
ValidationReport validate_algebra(const Algebra& a);

// Echelonized two-sided ideal; closure under both one-sided basis
// multiplications is certified whenever one is constructed.
struct IdealBasis {
    AlgebraPtr alg;
    Mat rows;                        // reduced echelon form
    std::vector<std::size_t> pivots; // pivot columns

    std::size_t rank() const { return rows.rows; }
    bool contains(const Vec& v) const;
    Vec reduce(const Vec& v) const;
    std::vector<std::size_t> complement_columns() const; // non-pivot columns
};

// Certifies echelon form + two-sided closure of the given span.
IdealBasis ideal_from_rows(AlgebraPtr a, const std::vector<Vec>& rows);
// Smallest two-sided ideal containing gens (breadth-first saturation by
// generator, left multiplications before right).
IdealBasis generate_two_sided_ideal(AlgebraPtr a, const std::vector<Vec>& gens);

IdealBasis ideal_power(const IdealBasis& I, unsigned k);

struct Nilpotency {
    bool nilpotent = false;
    unsigned degree = 0; // least k with I^k = 0 when nilpotent
};
Nilpotency is_nilpotent_ideal(const IdealBasis& I);

// Unit- and multiplication-preserving linear map, certified at construction.
struct AlgebraHom {
    AlgebraPtr source;
    AlgebraPtr target;
    Mat matrix; // dim_source x dim_target; apply as row * matrix

    Vec apply(const Vec& x) const;
};

AlgebraHom make_hom(AlgebraPtr source, AlgebraPtr target, Mat matrix);
AlgebraHom identity_hom(AlgebraPtr a);
AlgebraHom compose(const AlgebraHom& f, const AlgebraHom& g); // f then g
IdealBasis kernel_ideal(const AlgebraHom& h);

// Quotient by a proper ideal; the complement basis is the set of non-pivot
// coordinates of the ideal's echelon form.
std::pair<AlgebraPtr, AlgebraHom> quotient_algebra(AlgebraPtr a,
                                                   const IdealBasis& I);

// Same labels and table with coefficients reinterpreted in the extension.
AlgebraPtr base_change(AlgebraPtr a, FieldPtr ext);

// Lifts an idempotent of the target back through a nilpotent-kernel
// surjection by Newton iteration x <- 3x^2 - 2x^3.
Vec lift_idempotent(const AlgebraHom& h, const Vec& e, unsigned kernel_degree);

// Complete orthogonal idempotent family of the chain's source, obtained by
// lifting the terminal algebra's coordinate idempotents.  chain[0].source is
// the algebra decomposed; the last target must be split commutative.
std::vector<Vec> primitive_orthogonal_decomposition(
    const std::vector<AlgebraHom>& chain);

// Certifies that every basis element is idempotent, pairwise products vanish
// and the basis sums to 1 (i.e. the algebra is F_q^{x dim} on the nose).
void certify_split_commutative(const Algebra& a);

enum class Tri { yes, no, undecided };

// Whether eA and fA are isomorphic projectives: some u in eAf, v in fAe with
// uv = e and vu = f.  Exhausts pairs within pair_budget, then falls back to
// enumerating one side with a linear solve for the other.
Tri projectives_isomorphic(const Algebra& a, const Vec& e, const Vec& f,
                           std::uint64_t pair_budget = (1ull << 20));

} // namespace mackeyk

#endif
