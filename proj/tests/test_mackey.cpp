#include <doctest.h>

#include <map>

#include "mackeyk/errors.hpp"
#include "mackeyk/mackey.hpp"
#include "mackeyk/util.hpp"

using namespace mackeyk;

namespace {

const std::vector<GroupSpec> kSpecs = {
    {2, 1}, {3, 1}, {5, 1}, {2, 2}, {3, 2}};

// Independent dimension formulas.
std::size_t full_dim(const GroupSpec& g) {
    std::size_t d = 0;
    for (std::uint32_t a = 0; a <= g.n; ++a)
        for (std::uint32_t b = 0; b <= g.n; ++b)
            d += (std::min(a, b) + 1) * checked_pow(g.p, g.n - std::max(a, b));
    return d;
}

std::size_t coh_dim(const GroupSpec& g) {
    std::size_t d = 0;
    for (std::uint32_t a = 0; a <= g.n; ++a)
        for (std::uint32_t b = 0; b <= g.n; ++b)
            d += checked_pow(g.p, g.n - std::max(a, b));
    return d;
}

using SumMap = std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t,
                                   std::uint64_t>,
                        std::uint32_t>;

SumMap to_map(const SpanSum& s) {
    SumMap m;
    for (const auto& [l, c] : s) m[{l.left, l.mid, l.right, l.twist}] = c;
    return m;
}

// (x*y)*z compared against x*(y*z), expanding formal sums mod p.
void check_associative_triple(const GroupSpec& g, const SpanLabel& x,
                              const SpanLabel& y, const SpanLabel& z) {
    SumMap lhs, rhs;
    for (const auto& [w, c] : compose_spans(g, x, y))
        for (const auto& [v, d] : compose_spans(g, w, z)) {
            auto key = std::tuple(v.left, v.mid, v.right, v.twist);
            lhs[key] = (lhs[key] + c * d) % g.p;
        }
    for (const auto& [w, c] : compose_spans(g, y, z))
        for (const auto& [v, d] : compose_spans(g, x, w)) {
            auto key = std::tuple(v.left, v.mid, v.right, v.twist);
            rhs[key] = (rhs[key] + c * d) % g.p;
        }
    for (auto it = lhs.begin(); it != lhs.end();)
        it = (it->second == 0) ? lhs.erase(it) : std::next(it);
    for (auto it = rhs.begin(); it != rhs.end();)
        it = (it->second == 0) ? rhs.erase(it) : std::next(it);
    REQUIRE(lhs == rhs);
}

} // namespace

TEST_CASE("span basis counts match the closed formulas") {
    // Frozen values: full/cohomological/idle per group spec.
    std::map<std::pair<std::uint32_t, std::uint32_t>,
             std::tuple<std::size_t, std::size_t, std::size_t>>
        frozen = {{{2, 1}, {6, 5, 4}},
                  {{3, 1}, {7, 6, 4}},
                  {{5, 1}, {9, 8, 4}},
                  {{2, 2}, {21, 15, 9}},
                  {{3, 2}, {30, 23, 9}}};
    for (const GroupSpec& g : kSpecs) {
        auto [f, c, i] = frozen.at({g.p, g.n});
        CHECK(span_basis(g, Variant::full).size() == f);
        CHECK(span_basis(g, Variant::cohomological).size() == c);
        CHECK(span_basis(g, Variant::idle).size() == i);
        CHECK(full_dim(g) == f);
        CHECK(coh_dim(g) == c);
        CHECK((g.n + 1) * (g.n + 1) == i);
    }
}

TEST_CASE("cohomological basis for (3,1) is the documented list") {
    GroupSpec g{3, 1};
    std::vector<SpanLabel> expect = {
        {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 2}, // conjugations at level 0
        {0, 0, 1, 0},                             // restriction
        {1, 0, 0, 0},                             // transfer
        {1, 1, 1, 0},                             // identity at the top
    };
    CHECK(span_basis(g, Variant::cohomological) == expect);
}

TEST_CASE("identity law and the double coset formula") {
    GroupSpec g{3, 1};
    SpanLabel R{0, 0, 1, 0}, T{1, 0, 0, 0};
    SpanLabel id0{0, 0, 0, 0}, id1{1, 1, 1, 0};

    (void)id0;
    (void)id1;
    for (const SpanLabel& x : span_basis(g, Variant::full)) {
        // identity on the left
        SpanLabel idl{x.left, x.left, x.left, 0};
        SpanSum left = compose_spans(g, idl, x);
        REQUIRE(left.size() == 1);
        CHECK(left[0].first == x);
        CHECK(left[0].second == 1);
        // identity on the right
        SpanLabel idr{x.right, x.right, x.right, 0};
        SpanSum right = compose_spans(g, x, idr);
        REQUIRE(right.size() == 1);
        CHECK(right[0].first == x);
    }

    // res after tr through the trivial subgroup: sum of all conjugations.
    SpanSum rt = compose_spans(g, R, T);
    SumMap m = to_map(rt);
    CHECK(m.size() == 3);
    CHECK(m.at({0, 0, 0, 0}) == 1);
    CHECK(m.at({0, 0, 0, 1}) == 1);
    CHECK(m.at({0, 0, 0, 2}) == 1);

    // tr after res is a single middle-deficient loop in the full calculus.
    SpanSum tr = compose_spans(g, T, R);
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].first == SpanLabel{1, 0, 1, 0});
    CHECK(tr[0].second == 1);

    // Non-composable symbols multiply to zero.
    CHECK(compose_spans(g, T, T).empty());
}

TEST_CASE("span composition is associative (exhaustive per group)") {
    for (const GroupSpec& g : kSpecs) {
        std::vector<SpanLabel> basis = span_basis(g, Variant::full);
        for (const SpanLabel& x : basis)
            for (const SpanLabel& y : basis) {
                if (x.right != y.left) continue;
                for (const SpanLabel& z : basis) {
                    if (y.right != z.left) continue;
                    check_associative_triple(g, x, y, z);
                }
            }
    }
}

TEST_CASE("routes a and b agree on every tested group") {
    for (const GroupSpec& g : kSpecs) {
        FieldPtr F = make_field(g.p, 1);
        MackeyPresentation pres = build_mackey_algebra_checked(g, F);
        CHECK(pres.algebra->dim == coh_dim(g));
        CHECK(validate_algebra(*pres.algebra).ok);
    }
}

TEST_CASE("route comparison names the first differing product") {
    GroupSpec g{3, 1};
    MackeyPresentation a = build_mackey_algebra(g, make_field(3), Route::a);
    MackeyPresentation b = build_mackey_algebra(g, make_field(3), Route::b);
    compare_routes(a, b); // identical tables pass
    auto doctored = std::make_shared<Algebra>(*b.algebra);
    doctored->table[(3 * 6 + 4) * 6 + 0] =
        doctored->table[(3 * 6 + 4) * 6 + 0] ? 0 : 1;
    MackeyPresentation bad{g, Variant::cohomological, doctored, b.labels};
    CHECK_THROWS_AS(compare_routes(a, bad), RouteDisagreement);
    try {
        compare_routes(a, bad);
    } catch (const RouteDisagreement& e) {
        CHECK(std::string(e.what()).find("*") != std::string::npos);
        CHECK(e.kind() == ErrorKind::route_disagreement);
    }
}

TEST_CASE("error kinds map to the documented exit codes") {
    CHECK(static_cast<int>(ErrorKind::config) == 1);
    CHECK(static_cast<int>(ErrorKind::route_disagreement) == 2);
    CHECK(static_cast<int>(ErrorKind::certificate) == 3);
    CHECK(static_cast<int>(ErrorKind::budget) == 4);
}

TEST_CASE("defining relations inside mu_{F_3}(C_3)") {
    GroupSpec g{3, 1};
    MackeyPresentation mu = build_mackey_algebra_checked(g, make_field(3));
    const Algebra& A = *mu.algebra;
    auto idx = [&](const SpanLabel& l) {
        for (std::size_t i = 0; i < mu.labels.size(); ++i)
            if (mu.labels[i] == l) return i;
        FAIL("label not found");
        return std::size_t(0);
    };
    Vec R = A.basis_vec(idx({0, 0, 1, 0}));
    Vec T = A.basis_vec(idx({1, 0, 0, 0}));
    // Cohomological relation: T R = [C_3 : e] = 3 = 0.
    CHECK(is_zero(A.mul(T, R)));
    // Double coset: R T = c_e + c_g + c_{g^2}.
    Vec expect(A.dim, 0);
    expect[idx({0, 0, 0, 0})] = 1;
    expect[idx({0, 0, 0, 1})] = 1;
    expect[idx({0, 0, 0, 2})] = 1;
    CHECK(A.mul(R, T) == expect);

    // c_g = 1 + (c_g - 1) is a unit of multiplicative order 3.
    Vec c = A.basis_vec(idx({0, 0, 0, 1}));
    Vec c_full = vec_add(*A.field, c, A.basis_vec(idx({1, 1, 1, 0})));
    CHECK(A.is_unit(c_full));
    CHECK(A.pow(c_full, 3) == A.unit);
    CHECK(A.pow(c_full, 1) != A.unit);

    // R is not a unit (R^2 = 0 via non-composability).
    CHECK_FALSE(A.is_unit(R));
}

TEST_CASE("conjugation elements are central in the cohomological algebra") {
    for (const GroupSpec& g : kSpecs) {
        MackeyPresentation mu =
            build_mackey_algebra_checked(g, make_field(g.p));
        const Algebra& A = *mu.algebra;
        auto pos = [&](const SpanLabel& l) {
            for (std::size_t i = 0; i < mu.labels.size(); ++i)
                if (mu.labels[i] == l) return i;
            FAIL("label not found");
            return std::size_t(0);
        };
        std::uint64_t pn = checked_pow(g.p, g.n);
        for (std::uint64_t e = 0; e < pn; ++e) {
            // c_{g^e} spreads the exponent across all levels.
            Vec c(A.dim, 0);
            for (std::uint32_t a = 0; a <= g.n; ++a)
                c[pos({a, a, a, e % checked_pow(g.p, g.n - a)})] = 1;
            for (std::size_t j = 0; j < A.dim; ++j)
                CHECK(A.mul(c, A.basis_vec(j)) == A.mul(A.basis_vec(j), c));
        }
    }
}

TEST_CASE("idle algebra: dimension, relabeling, and the interval oracle") {
    for (const GroupSpec& g : kSpecs) {
        MackeyPresentation mu =
            build_mackey_algebra_checked(g, make_field(g.p));
        auto [nu, hom] = build_idle_algebra(mu);
        CHECK(nu.algebra->dim == (g.n + 1) * (g.n + 1));
        CHECK(nu.labels == span_basis(g, Variant::idle));
        CHECK(validate_algebra(*nu.algebra).ok);

        // Independent structure constants: nu_{a,b} nu_{b,c} = nu_{a,c}
        // exactly when min(a,c) <= b <= max(a,c), else 0.
        const Algebra& N = *nu.algebra;
        auto pos = [&](std::uint32_t a, std::uint32_t b) {
            SpanLabel l{a, std::min(a, b), b, 0};
            for (std::size_t i = 0; i < nu.labels.size(); ++i)
                if (nu.labels[i] == l) return i;
            FAIL("idle label missing");
            return std::size_t(0);
        };
        for (std::uint32_t a = 0; a <= g.n; ++a)
            for (std::uint32_t b = 0; b <= g.n; ++b)
                for (std::uint32_t b2 = 0; b2 <= g.n; ++b2)
                    for (std::uint32_t c = 0; c <= g.n; ++c) {
                        Vec prod =
                            N.mul(N.basis_vec(pos(a, b)),
                                  N.basis_vec(pos(b2, c)));
                        Vec expect(N.dim, 0);
                        if (b == b2 && std::min(a, c) <= b &&
                            b <= std::max(a, c))
                            expect[pos(a, c)] = 1;
                        CHECK(prod == expect);
                    }
    }
}

TEST_CASE("idlization kernel: dimension, degree, certificates") {
    struct Expect {
        std::uint32_t p, n;
        std::size_t dim;
        unsigned degree;
    };
    for (const Expect& e : std::vector<Expect>{
             {2, 1, 1, 2}, {3, 1, 2, 3}, {5, 1, 4, 5}, {2, 2, 6, 4},
             {3, 2, 14, 9}}) {
        GroupSpec g{e.p, e.n};
        MackeyPresentation mu =
            build_mackey_algebra_checked(g, make_field(g.p));
        KernelCertificate kc = idlization_kernel(mu);
        CHECK(kc.ideal.rank() == e.dim);
        CHECK(kc.nilpotency_degree == e.degree);
        CHECK(kc.nilpotency_degree <= checked_pow(g.p, g.n));
        // dim(cohomological) = dim(idle) + rank(kernel)
        auto [nu, hom] = build_idle_algebra(mu);
        CHECK(mu.algebra->dim == nu.algebra->dim + kc.ideal.rank());
        // I^{deg-1} != 0 from scratch
        if (e.degree > 1)
            CHECK(ideal_power(kc.ideal, e.degree - 1).rank() > 0);
        CHECK(ideal_power(kc.ideal, e.degree).rank() == 0);
    }
}

TEST_CASE("nilpotent filtration reaches the split diagonal") {
    struct Expect {
        std::uint32_t p, n;
        std::size_t steps;
    };
    for (const Expect& e : std::vector<Expect>{
             {2, 1, 2}, {3, 1, 2}, {5, 1, 2}, {2, 2, 6}, {3, 2, 6}}) {
        GroupSpec g{e.p, e.n};
        MackeyPresentation mu =
            build_mackey_algebra_checked(g, make_field(g.p));
        auto [nu, hom] = build_idle_algebra(mu);
        Filtration f = nilpotent_filtration(nu);
        CHECK(f.steps.size() == e.steps);
        CHECK(f.terminal->dim == g.n + 1);
        for (const auto& s : f.steps) {
            CHECK(s.nilpotency_degree <= 2);
            CHECK(s.ideal.rank() == 1);
        }
        certify_split_commutative(*f.terminal);
    }
}

TEST_CASE("filtration order for (2,2): max gap first, R before T") {
    GroupSpec g{2, 2};
    MackeyPresentation mu = build_mackey_algebra_checked(g, make_field(2));
    auto [nu, hom] = build_idle_algebra(mu);
    Filtration f = nilpotent_filtration(nu);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (const auto& s : f.steps) order.push_back({s.killed.left, s.killed.right});
    std::vector<std::pair<std::uint32_t, std::uint32_t>> expect = {
        {0, 2}, {2, 0}, {0, 1}, {1, 2}, {1, 0}, {2, 1}};
    CHECK(order == expect);
}

TEST_CASE("constant module check passes on all variants and specs") {
    for (const GroupSpec& g : kSpecs) {
        MackeyPresentation full = build_full_span_algebra(g);
        constant_module_check(full);
        MackeyPresentation mu =
            build_mackey_algebra_checked(g, make_field(g.p));
        constant_module_check(mu);
        auto [nu, hom] = build_idle_algebra(mu);
        constant_module_check(nu);
    }
    // Base-changed coefficients keep the action consistent.
    GroupSpec g21{2, 1};
    MackeyPresentation mu4 =
        build_mackey_algebra_checked(g21, make_field(2, 2));
    CHECK(mu4.algebra->field->q() == 4);
    constant_module_check(mu4);
}

TEST_CASE("constant module check catches a corrupted table") {
    GroupSpec g{3, 1};
    MackeyPresentation mu = build_mackey_algebra_checked(g, make_field(3));
    auto corrupted = std::make_shared<Algebra>(*mu.algebra);
    // Flip T*R from 0 to the top identity: pretends tr res = 1.
    std::size_t t = 4, r = 3, top = 5;
    corrupted->table[(t * corrupted->dim + r) * corrupted->dim + top] = 1;
    MackeyPresentation bad{g, Variant::cohomological, corrupted, mu.labels};
    CHECK_THROWS_AS(constant_module_check(bad), CertificateError);
}

TEST_CASE("base change to extension fields keeps dimensions") {
    GroupSpec g{2, 1};
    MackeyPresentation mu5 = build_mackey_algebra_checked(g, make_field(2, 2));
    CHECK(mu5.algebra->dim == 5);
    CHECK(mu5.algebra->field->q() == 4);
    GroupSpec g31{3, 1};
    MackeyPresentation mu9 =
        build_mackey_algebra_checked(g31, make_field(3, 2));
    CHECK(mu9.algebra->dim == 6);
    CHECK(mu9.algebra->field->q() == 9);
    CHECK_THROWS_AS(build_mackey_algebra(g31, make_field(2), Route::a),
                    ConfigError);
}

TEST_CASE("named ideals inside mu and nu at (3,1)") {
    GroupSpec g{3, 1};
    MackeyPresentation mu = build_mackey_algebra_checked(g, make_field(3));
    auto pos = [&](const std::vector<SpanLabel>& ls, const SpanLabel& l) {
        for (std::size_t i = 0; i < ls.size(); ++i)
            if (ls[i] == l) return i;
        FAIL("label not found");
        return std::size_t(0);
    };
    // (c_g - 1) generates the two-dimensional span {(c-1), (c-1)^2}.
    const Field& F = *mu.algebra->field;
    Vec gen(mu.algebra->dim, 0);
    gen[pos(mu.labels, {0, 0, 0, 1})] = F.one();
    gen[pos(mu.labels, {0, 0, 0, 0})] = F.neg(F.one());
    IdealBasis I = generate_two_sided_ideal(mu.algebra, {gen});
    CHECK(I.rank() == 2);
    CHECK(is_nilpotent_ideal(I).degree == 3);

    // In nu, the restriction class generates the one-dimensional ideal and
    // killing both off-diagonal classes leaves F_3 x F_3.
    auto [nu, hom] = build_idle_algebra(mu);
    Vec r = nu.algebra->basis_vec(pos(nu.labels, {0, 0, 1, 0}));
    IdealBasis J = generate_two_sided_ideal(nu.algebra, {r});
    CHECK(J.rank() == 1);
    CHECK(is_nilpotent_ideal(J).degree == 2);
    Vec t = nu.algebra->basis_vec(pos(nu.labels, {1, 0, 0, 0}));
    IdealBasis RT = generate_two_sided_ideal(nu.algebra, {r, t});
    auto [split, proj] = quotient_algebra(nu.algebra, RT);
    CHECK(split->dim == 2);
    certify_split_commutative(*split);
}

TEST_CASE("filtration on an already-terminal algebra is empty") {
    // Diagonal-only presentation: nothing to kill, certificates still run.
    GroupSpec g{2, 1};
    FieldPtr F = make_field(2);
    std::vector<Sym> table(8, 0);
    table[(0 * 2 + 0) * 2 + 0] = 1;
    table[(1 * 2 + 1) * 2 + 1] = 1;
    AlgebraPtr split =
        make_algebra(F, {"id_0", "id_1"}, std::move(table), {1, 1});
    MackeyPresentation pres{g, Variant::idle, split,
                            {{0, 0, 0, 0}, {1, 1, 1, 0}}};
    Filtration f = nilpotent_filtration(pres);
    CHECK(f.steps.empty());
    CHECK(f.terminal->dim == 2);
}

TEST_CASE("group validation") {
    CHECK_THROWS_AS(validate_group(GroupSpec{4, 1}), ConfigError);
    CHECK_THROWS_AS(validate_group(GroupSpec{2, 0}), ConfigError);
    CHECK_THROWS_AS(span_basis(GroupSpec{6, 1}, Variant::full), ConfigError);
}
