#include "mackeyk/algebra.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "mackeyk/errors.hpp"
#include "mackeyk/util.hpp"

namespace mackeyk {

Vec Algebra::mul(const Vec& x, const Vec& y) const {
    const Field& F = *field;
    Vec out(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < dim; ++j) {
            if (y[j] == 0) continue;
            Sym s = F.mul(x[i], y[j]);
            const Sym* e = entry(i, j);
            for (std::size_t k = 0; k < dim; ++k)
                if (e[k] != 0) out[k] = F.add(out[k], F.mul(s, e[k]));
        }
    }
    return out;
}

Vec Algebra::pow(const Vec& x, std::uint64_t e) const {
    Vec r = unit;
    Vec base = x;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

Mat Algebra::left_regular(const Vec& x) const {
    Mat L(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Vec col = mul(x, basis_vec(j));
        for (std::size_t i = 0; i < dim; ++i) L.at(i, j) = col[i];
    }
    return L;
}

Mat Algebra::right_regular(const Vec& x) const {
    Mat R(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Vec col = mul(basis_vec(j), x);
        for (std::size_t i = 0; i < dim; ++i) R.at(i, j) = col[i];
    }
    return R;
}

bool Algebra::is_unit(const Vec& x) const {
    return rank(*field, left_regular(x)) == dim;
}

Vec Algebra::inverse(const Vec& x) const {
    auto y = solve_right(*field, left_regular(x), unit);
    if (!y) throw std::domain_error("element is not invertible");
    return *y;
}

bool Algebra::is_idempotent(const Vec& x) const { return mul(x, x) == x; }

std::uint64_t Algebra::order() const {
    return checked_pow(field->q(), static_cast<std::uint32_t>(dim));
}

std::uint64_t Algebra::index_of(const Vec& x) const {
    std::uint64_t idx = 0;
    for (std::size_t i = dim; i-- > 0;) idx = idx * field->q() + x[i];
    return idx;
}

Vec Algebra::coords_of(std::uint64_t idx) const {
    Vec x(dim, 0);
    for (std::size_t i = 0; i < dim; ++i) {
        x[i] = static_cast<Sym>(idx % field->q());
        idx /= field->q();
    }
    return x;
}

std::string Algebra::describe(const Vec& x) const {
    std::string s;
    for (std::size_t i = 0; i < dim; ++i) {
        if (x[i] == 0) continue;
        if (!s.empty()) s += " + ";
        if (x[i] != 1 || field->m() > 1) s += field->to_string(x[i]) + "*";
        s += labels[i];
    }
    return s.empty() ? "0" : s;
}

AlgebraPtr make_algebra(FieldPtr field, std::vector<std::string> labels,
                        std::vector<Sym> table, Vec unit) {
    auto a = std::make_shared<Algebra>();
    a->field = std::move(field);
    a->dim = labels.size();
    a->labels = std::move(labels);
    if (table.size() != a->dim * a->dim * a->dim)
        throw std::invalid_argument("structure constant table has wrong size");
    if (unit.size() != a->dim)
        throw std::invalid_argument("unit vector has wrong size");
    a->table = std::move(table);
    a->unit = std::move(unit);
    return a;
}

AlgElement AlgElement::operator*(const AlgElement& o) const {
    if (alg != o.alg)
        throw std::invalid_argument("elements of different algebras");
    return {alg, alg->mul(coords, o.coords)};
}

AlgElement AlgElement::operator+(const AlgElement& o) const {
    if (alg != o.alg)
        throw std::invalid_argument("elements of different algebras");
    return {alg, vec_add(*alg->field, coords, o.coords)};
}

bool AlgElement::operator==(const AlgElement& o) const {
    return alg == o.alg && coords == o.coords;
}

ValidationReport validate_algebra(const Algebra& a) {
    const std::size_t n = a.dim;
    for (std::size_t i = 0; i < n; ++i) {
        Vec bi = a.basis_vec(i);
        if (a.mul(a.unit, bi) != bi)
            return {false, "unit fails on the left of basis " + a.labels[i]};
        if (a.mul(bi, a.unit) != bi)
            return {false, "unit fails on the right of basis " + a.labels[i]};
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Vec ij = a.entry_vec(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                Vec lhs = a.mul(ij, a.basis_vec(k));
                Vec rhs = a.mul(a.basis_vec(i), a.entry_vec(j, k));
                if (lhs != rhs)
                    return {false, "associativity fails on triple (" +
                                       a.labels[i] + ", " + a.labels[j] + ", " +
                                       a.labels[k] + ")"};
            }
        }
    return {true, "pass"};
}

bool IdealBasis::contains(const Vec& v) const {
    return is_zero(reduce(v));
}

Vec IdealBasis::reduce(const Vec& v) const {
    Rref span{rows, pivots};
    return reduce_row(*alg->field, span, v);
}

std::vector<std::size_t> IdealBasis::complement_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < alg->dim; ++c)
        if (!std::binary_search(pivots.begin(), pivots.end(), c))
            out.push_back(c);
    return out;
}

namespace {

// Closure certificate: row * basis and basis * row stay inside the span.
void certify_two_sided(const Algebra& a, const RowSpan& span) {
    Mat rows = span.to_mat();
    for (std::size_t r = 0; r < rows.rows; ++r) {
        Vec v = rows.row(r);
        for (std::size_t i = 0; i < a.dim; ++i) {
            Vec b = a.basis_vec(i);
            if (!span.contains(*a.field, a.mul(b, v)))
                throw CertificateError(
                    "ideal row span not closed under left multiplication by " +
                    a.labels[i]);
            if (!span.contains(*a.field, a.mul(v, b)))
                throw CertificateError(
                    "ideal row span not closed under right multiplication by " +
                    a.labels[i]);
        }
    }
}

IdealBasis from_span(AlgebraPtr a, const RowSpan& span, bool certify) {
    if (certify) certify_two_sided(*a, span);
    IdealBasis I;
    I.alg = std::move(a);
    I.rows = span.to_mat();
    if (I.rows.rows == 0) I.rows.cols = I.alg->dim;
    I.pivots = span.pivots();
    return I;
}

} // namespace

IdealBasis ideal_from_rows(AlgebraPtr a, const std::vector<Vec>& rows) {
    RowSpan span(a->dim);
    for (const Vec& r : rows) span.insert(*a->field, r);
    return from_span(std::move(a), span, true);
}

IdealBasis generate_two_sided_ideal(AlgebraPtr a, const std::vector<Vec>& gens) {
    const Field& F = *a->field;
    RowSpan span(a->dim);
    std::deque<Vec> work;
    for (const Vec& g : gens)
        if (span.insert(F, g)) work.push_back(g);
    // Breadth-first saturation; for each new element, left multiplications by
    // every basis vector are tried before right ones.
    while (!work.empty()) {
        Vec v = std::move(work.front());
        work.pop_front();
        for (std::size_t i = 0; i < a->dim; ++i) {
            Vec lv = a->mul(a->basis_vec(i), v);
            if (span.insert(F, lv)) work.push_back(std::move(lv));
        }
        for (std::size_t i = 0; i < a->dim; ++i) {
            Vec vr = a->mul(v, a->basis_vec(i));
            if (span.insert(F, vr)) work.push_back(std::move(vr));
        }
    }
    return from_span(std::move(a), span, true);
}

IdealBasis ideal_power(const IdealBasis& I, unsigned k) {
    if (k < 1) throw std::invalid_argument("ideal power needs k >= 1");
    const Field& F = *I.alg->field;
    RowSpan cur(I.alg->dim);
    for (std::size_t r = 0; r < I.rows.rows; ++r) cur.insert(F, I.rows.row(r));
    for (unsigned step = 1; step < k; ++step) {
        RowSpan next(I.alg->dim);
        Mat rows = cur.to_mat();
        for (std::size_t r = 0; r < rows.rows; ++r)
            for (std::size_t s = 0; s < I.rows.rows; ++s)
                next.insert(F, I.alg->mul(rows.row(r), I.rows.row(s)));
        cur = std::move(next);
    }
    return from_span(I.alg, cur, true);
}

Nilpotency is_nilpotent_ideal(const IdealBasis& I) {
    const Field& F = *I.alg->field;
    if (I.rank() == 0) return {true, 1};
    RowSpan cur(I.alg->dim);
    for (std::size_t r = 0; r < I.rows.rows; ++r) cur.insert(F, I.rows.row(r));
    std::size_t prev_dim = cur.dim();
    for (unsigned k = 2; k <= I.alg->dim + 1; ++k) {
        RowSpan next(I.alg->dim);
        Mat rows = cur.to_mat();
        for (std::size_t r = 0; r < rows.rows; ++r)
            for (std::size_t s = 0; s < I.rows.rows; ++s)
                next.insert(F, I.alg->mul(rows.row(r), I.rows.row(s)));
        if (next.dim() == 0) return {true, k};
        if (next.dim() == prev_dim) return {false, 0}; // stabilized nonzero
        prev_dim = next.dim();
        cur = std::move(next);
    }
    return {false, 0};
}

Vec AlgebraHom::apply(const Vec& x) const {
    return vec_mat(*source->field, x, matrix);
}

AlgebraHom make_hom(AlgebraPtr source, AlgebraPtr target, Mat matrix) {
    if (matrix.rows != source->dim || matrix.cols != target->dim)
        throw std::invalid_argument("hom matrix shape mismatch");
    if (!source->field->same(*target->field))
        throw std::invalid_argument("hom between different fields");
    AlgebraHom h{std::move(source), std::move(target), std::move(matrix)};
    const Field& F = *h.source->field;
    if (vec_mat(F, h.source->unit, h.matrix) != h.target->unit)
        throw CertificateError("hom does not preserve the unit");
    for (std::size_t i = 0; i < h.source->dim; ++i)
        for (std::size_t j = 0; j < h.source->dim; ++j) {
            Vec lhs = vec_mat(F, h.source->entry_vec(i, j), h.matrix);
            Vec rhs = h.target->mul(h.matrix.row(i), h.matrix.row(j));
            if (lhs != rhs)
                throw CertificateError("hom not multiplicative on (" +
                                       h.source->labels[i] + ", " +
                                       h.source->labels[j] + ")");
        }
    return h;
}

AlgebraHom identity_hom(AlgebraPtr a) {
    Mat I = Mat::identity(a->dim);
    return make_hom(a, a, std::move(I));
}

AlgebraHom compose(const AlgebraHom& f, const AlgebraHom& g) {
    if (f.target != g.source)
        throw std::invalid_argument("homs do not compose");
    return make_hom(f.source, g.target,
                    mat_mul(*f.source->field, f.matrix, g.matrix));
}

IdealBasis kernel_ideal(const AlgebraHom& h) {
    Mat ker = left_nullspace(*h.source->field, h.matrix);
    std::vector<Vec> rows;
    rows.reserve(ker.rows);
    for (std::size_t r = 0; r < ker.rows; ++r) rows.push_back(ker.row(r));
    return ideal_from_rows(h.source, rows);
}

std::pair<AlgebraPtr, AlgebraHom> quotient_algebra(AlgebraPtr a,
                                                   const IdealBasis& I) {
    if (I.alg != a) throw std::invalid_argument("ideal of a different algebra");
    if (is_zero(I.reduce(a->unit)))
        throw std::invalid_argument("ideal is improper (contains 1)");
    std::vector<std::size_t> comp = I.complement_columns();
    const std::size_t qdim = comp.size();

    auto project = [&](const Vec& v) {
        Vec r = I.reduce(v);
        Vec out(qdim, 0);
        for (std::size_t c = 0; c < qdim; ++c) out[c] = r[comp[c]];
        return out;
    };

    std::vector<std::string> labels(qdim);
    for (std::size_t c = 0; c < qdim; ++c) labels[c] = a->labels[comp[c]];
    std::vector<Sym> table(qdim * qdim * qdim, 0);
    for (std::size_t u = 0; u < qdim; ++u)
        for (std::size_t v = 0; v < qdim; ++v) {
            Vec prod = project(a->entry_vec(comp[u], comp[v]));
            std::copy(prod.begin(), prod.end(),
                      table.begin() + (u * qdim + v) * qdim);
        }
    AlgebraPtr quot =
        make_algebra(a->field, std::move(labels), std::move(table),
                     project(a->unit));
    ValidationReport rep = validate_algebra(*quot);
    if (!rep.ok)
        throw CertificateError("quotient algebra invalid: " + rep.message);

    Mat hm(a->dim, qdim);
    for (std::size_t i = 0; i < a->dim; ++i) {
        Vec pi = project(a->basis_vec(i));
        for (std::size_t c = 0; c < qdim; ++c) hm.at(i, c) = pi[c];
    }
    AlgebraHom h = make_hom(a, quot, std::move(hm));
    return {quot, std::move(h)};
}

AlgebraPtr base_change(AlgebraPtr a, FieldPtr ext) {
    if (a->field->p() != ext->p())
        throw ConfigError("base change must preserve the characteristic");
    if (a->field->same(*ext)) return a;
    if (a->field->m() != 1)
        throw ConfigError("base change is implemented from the prime field");
    for (Sym s : a->table)
        if (s >= ext->q())
            throw ConfigError("table coefficient outside the target field");
    auto b = std::make_shared<Algebra>(*a);
    b->field = std::move(ext);
    ValidationReport rep = validate_algebra(*b);
    if (!rep.ok)
        throw CertificateError("base-changed algebra invalid: " + rep.message);
    return b;
}

Vec lift_idempotent(const AlgebraHom& h, const Vec& e, unsigned kernel_degree) {
    const Algebra& S = *h.source;
    const Field& F = *S.field;
    if (!h.target->is_idempotent(e))
        throw std::invalid_argument("target element is not idempotent");
    auto x0 = solve_left(F, h.matrix, e);
    if (!x0) throw std::invalid_argument("idempotent has no preimage");
    Vec x = *x0;
    Sym three = F.from_int(3), two = F.from_int(2);
    unsigned bound = 1;
    while ((1u << bound) < std::max(kernel_degree, 2u)) ++bound;
    bound += 1;
    for (unsigned it = 0; it <= bound; ++it) {
        Vec x2 = S.mul(x, x);
        if (x2 == x) {
            if (h.apply(x) != e)
                throw CertificateError("idempotent lift left the fiber");
            return x;
        }
        Vec x3 = S.mul(x2, x);
        x = vec_sub(F, vec_scale(F, three, x2), vec_scale(F, two, x3));
    }
    throw CertificateError(
        "idempotent lifting did not converge (kernel not nilpotent?)");
}

void certify_split_commutative(const Algebra& a) {
    Vec sum(a.dim, 0);
    for (std::size_t i = 0; i < a.dim; ++i) {
        for (std::size_t j = 0; j < a.dim; ++j) {
            Vec prod = a.entry_vec(i, j);
            Vec expect(a.dim, 0);
            if (i == j) expect[i] = 1;
            if (prod != expect)
                throw CertificateError(
                    "terminal algebra is not split commutative on (" +
                    a.labels[i] + ", " + a.labels[j] + ")");
        }
        sum = vec_add(*a.field, sum, a.basis_vec(i));
    }
    if (sum != a.unit)
        throw CertificateError(
            "terminal algebra idempotents do not sum to the unit");
}

std::vector<Vec> primitive_orthogonal_decomposition(
    const std::vector<AlgebraHom>& chain) {
    if (chain.empty())
        throw std::invalid_argument("empty chain");
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        if (chain[i].target != chain[i + 1].source)
            throw std::invalid_argument("chain homs do not compose");
    const AlgebraPtr& terminal = chain.back().target;
    certify_split_commutative(*terminal);

    // Coordinate idempotents of the split algebra, lifted one hom at a time.
    std::vector<Vec> family(terminal->dim);
    for (std::size_t i = 0; i < terminal->dim; ++i)
        family[i] = terminal->basis_vec(i);

    for (std::size_t step = chain.size(); step-- > 0;) {
        const AlgebraHom& h = chain[step];
        const Algebra& S = *h.source;
        const Field& F = *S.field;
        IdealBasis ker = kernel_ideal(h);
        Nilpotency nil = is_nilpotent_ideal(ker);
        if (!nil.nilpotent)
            throw CertificateError("chain step kernel is not nilpotent");
        std::vector<Vec> lifted;
        Vec partial_sum(S.dim, 0);
        for (std::size_t i = 0; i + 1 < family.size(); ++i) {
            Vec x = lift_idempotent(h, family[i], nil.degree);
            // Orthogonalize against the previous lifts, then re-idempotize
            // within the nilpotent fiber.
            Vec one_minus = vec_sub(F, S.unit, partial_sum);
            Vec y = S.mul(one_minus, S.mul(x, one_minus));
            Sym three = F.from_int(3), two = F.from_int(2);
            for (unsigned it = 0; it <= S.dim + 2; ++it) {
                Vec y2 = S.mul(y, y);
                if (y2 == y) break;
                Vec y3 = S.mul(y2, y);
                y = vec_sub(F, vec_scale(F, three, y2), vec_scale(F, two, y3));
            }
            if (!S.is_idempotent(y))
                throw CertificateError("orthogonalized lift not idempotent");
            lifted.push_back(y);
            partial_sum = vec_add(F, partial_sum, y);
        }
        lifted.push_back(vec_sub(F, S.unit, partial_sum));
        family = std::move(lifted);
    }

    // Exact certificates: idempotence, pairwise orthogonality, sum = 1, and
    // each element still covers its coordinate idempotent downstairs.
    const Algebra& A = *chain.front().source;
    const Field& F = *A.field;
    Mat composite = chain.front().matrix;
    for (std::size_t i = 1; i < chain.size(); ++i)
        composite = mat_mul(F, composite, chain[i].matrix);
    Vec total(A.dim, 0);
    for (std::size_t i = 0; i < family.size(); ++i) {
        if (!A.is_idempotent(family[i]))
            throw CertificateError("decomposition element not idempotent");
        for (std::size_t j = 0; j < family.size(); ++j) {
            if (i == j) continue;
            if (!is_zero(A.mul(family[i], family[j])))
                throw CertificateError("decomposition not orthogonal");
        }
        if (vec_mat(F, family[i], composite) != terminal->basis_vec(i))
            throw CertificateError(
                "decomposition element does not project to its coordinate");
        total = vec_add(F, total, family[i]);
    }
    if (total != A.unit)
        throw CertificateError("decomposition does not sum to the unit");
    return family;
}

namespace {

// Echelonized basis of the subspace e * A * f.
std::vector<Vec> corner_space(const Algebra& a, const Vec& e, const Vec& f) {
    RowSpan span(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i)
        span.insert(*a.field, a.mul(e, a.mul(a.basis_vec(i), f)));
    Mat m = span.to_mat();
    std::vector<Vec> rows;
    rows.reserve(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) rows.push_back(m.row(r));
    return rows;
}

Vec combine(const Algebra& a, const std::vector<Vec>& basis,
            std::uint64_t idx) {
    const Field& F = *a.field;
    Vec v(a.dim, 0);
    for (const Vec& b : basis) {
        Sym c = static_cast<Sym>(idx % F.q());
        idx /= F.q();
        if (c != 0) v = vec_add(F, v, vec_scale(F, c, b));
    }
    return v;
}

} // namespace

Tri projectives_isomorphic(const Algebra& a, const Vec& e, const Vec& f,
                           std::uint64_t pair_budget) {
    if (!a.is_idempotent(e) || !a.is_idempotent(f))
        throw std::invalid_argument("projective comparison needs idempotents");
    if (e == f) return Tri::yes;
    const Field& F = *a.field;
    std::vector<Vec> eAf = corner_space(a, e, f);
    std::vector<Vec> fAe = corner_space(a, f, e);
    if (eAf.empty() || fAe.empty())
        return (is_zero(e) && is_zero(f)) ? Tri::yes : Tri::no;

    const double qd = static_cast<double>(F.q());
    double u_count = 1, v_count = 1;
    for (std::size_t i = 0; i < eAf.size(); ++i) u_count *= qd;
    for (std::size_t i = 0; i < fAe.size(); ++i) v_count *= qd;

    if (u_count * v_count <= static_cast<double>(pair_budget)) {
        std::uint64_t un = static_cast<std::uint64_t>(u_count);
        std::uint64_t vn = static_cast<std::uint64_t>(v_count);
        for (std::uint64_t iu = 0; iu < un; ++iu) {
            Vec u = combine(a, eAf, iu);
            for (std::uint64_t iv = 0; iv < vn; ++iv) {
                Vec v = combine(a, fAe, iv);
                if (a.mul(u, v) == e && a.mul(v, u) == f) return Tri::yes;
            }
        }
        return Tri::no;
    }

    // Enumerate the smaller corner, solve linearly for the other side.
    bool swap_roles = v_count < u_count;
    const std::vector<Vec>& enum_side = swap_roles ? fAe : eAf;
    const std::vector<Vec>& solve_side = swap_roles ? eAf : fAe;
    const Vec& first = swap_roles ? f : e;  // u*v = first
    const Vec& second = swap_roles ? e : f; // v*u = second
    double enum_count = swap_roles ? v_count : u_count;
    if (enum_count > static_cast<double>(pair_budget)) return Tri::undecided;

    std::uint64_t en = static_cast<std::uint64_t>(enum_count);
    for (std::uint64_t iu = 0; iu < en; ++iu) {
        Vec u = combine(a, enum_side, iu);
        // Unknown v = sum beta_j * basis_j; stack u*v = first, v*u = second.
        Mat sys(solve_side.size(), 2 * a.dim);
        for (std::size_t j = 0; j < solve_side.size(); ++j) {
            Vec uv = a.mul(u, solve_side[j]);
            Vec vu = a.mul(solve_side[j], u);
            for (std::size_t c = 0; c < a.dim; ++c) {
                sys.at(j, c) = uv[c];
                sys.at(j, a.dim + c) = vu[c];
            }
        }
        Vec rhs(2 * a.dim);
        for (std::size_t c = 0; c < a.dim; ++c) {
            rhs[c] = first[c];
            rhs[a.dim + c] = second[c];
        }
        if (solve_left(F, sys, rhs)) return Tri::yes;
    }
    return Tri::no;
}

} // namespace mackeyk
