#include <doctest.h>

#include <set>

#include "mackeyk/errors.hpp"
#include "mackeyk/ktheory.hpp"

using namespace mackeyk;

namespace {

AlgebraPtr field_algebra(FieldPtr F) {
    return make_algebra(F, {"1"}, {1}, {1});
}

AlgebraPtr split_algebra(FieldPtr F, std::size_t k) {
    std::vector<std::string> labels;
    std::vector<Sym> table(k * k * k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        labels.push_back("e" + std::to_string(i));
        table[(i * k + i) * k + i] = 1;
    }
    return make_algebra(F, std::move(labels), std::move(table), Vec(k, 1));
}

struct BuiltPair {
    MackeyPresentation mu;
    MackeyPresentation nu;
    AlgebraHom hom;
    std::vector<AlgebraHom> mu_chain;
    std::vector<AlgebraHom> nu_chain;
};

BuiltPair build_pair(std::uint32_t p, std::uint32_t n) {
    GroupSpec g{p, n};
    MackeyPresentation mu = build_mackey_algebra_checked(g, make_field(p));
    auto [nu, hom] = build_idle_algebra(mu);
    BuiltPair b{mu, nu, hom, {}, {}};
    Filtration f = nilpotent_filtration(nu);
    for (auto& s : f.steps) b.nu_chain.push_back(s.hom);
    b.mu_chain.push_back(b.hom);
    for (const auto& h : b.nu_chain) b.mu_chain.push_back(h);
    return b;
}

} // namespace

TEST_CASE("invariant factor arithmetic") {
    CHECK(fin_ab({2, 6}).to_string() == "Z/2 + Z/6");
    CHECK(fin_ab({2, 6}).order() == 12);
    CHECK(fin_ab({}).trivial());
    CHECK(fin_ab_power(1, 3).trivial());
    CHECK(fin_ab_power(3, 2) == fin_ab({3, 3}));
    CHECK_THROWS_AS(fin_ab({6, 2}), ConfigError); // broken chain
    CHECK_THROWS_AS(fin_ab({1}), ConfigError);
}

TEST_CASE("quillen closed form") {
    CHECK(quillen_k(3, 1) == fin_ab({2}));
    CHECK(quillen_k(4, 3) == fin_ab({15}));
    CHECK(quillen_k(7, 0).free_rank == 1);
    CHECK(quillen_k(5, 2).trivial());
    CHECK(quillen_k(2, 1).trivial()); // K_1(F_2) = 0
    for (std::uint32_t j = 1; j <= 6; ++j) {
        std::uint64_t expect = 1;
        for (std::uint32_t t = 0; t < j; ++t) expect *= 3;
        CHECK(quillen_k(3, 2 * j - 1).order() == expect - 1);
    }
}

TEST_CASE("theorem-a calculator") {
    CHECK(theorem_a_groups(3, 1, 3, 0) == fin_ab({}, 2));
    CHECK(theorem_a_groups(3, 1, 3, 1) == fin_ab({2, 2}));
    CHECK(theorem_a_groups(3, 1, 3, 3) == fin_ab({8, 8}));
    CHECK(theorem_a_groups(3, 1, 3, 2).trivial());
    CHECK(theorem_a_groups(3, 1, 3, 4).trivial());
    CHECK(theorem_a_groups(2, 2, 4, 1) == fin_ab({3, 3, 3}));
    CHECK_THROWS_AS(theorem_a_groups(3, 1, 4, 1), ConfigError);
    // Torsion orders stay coprime to p.
    for (std::uint32_t i : {1u, 3u, 5u, 7u}) {
        FinAbGroup gr = theorem_a_groups(3, 2, 9, i);
        CHECK(gr.order() % 3 != 0);
    }
}

TEST_CASE("unit groups of small algebras") {
    Budgets b;
    UnitGroup u3 = unit_group(field_algebra(make_field(3)), b);
    CHECK(u3.order() == 2);
    UnitGroup u4 = unit_group(field_algebra(make_field(2, 2)), b);
    CHECK(u4.order() == 3);
}

TEST_CASE("unit group of mu and nu with two-way verification") {
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    UnitGroup umu = unit_group(pair.mu.algebra, b, &pair.mu_chain);
    CHECK(umu.order() == 324); // 4 * 3^4
    UnitGroup unu = unit_group(pair.nu.algebra, b, &pair.nu_chain);
    CHECK(unu.order() == 36); // 4 * 3^2
}

TEST_CASE("unit scan budget is enforced") {
    Budgets tiny;
    tiny.elements = 100;
    BuiltPair pair = build_pair(3, 1);
    CHECK_THROWS_AS(unit_group(pair.mu.algebra, tiny), BudgetExceeded);
}

TEST_CASE("vaserstein subgroup of a commutative algebra is trivial") {
    Budgets b;
    UnitGroup u = unit_group(split_algebra(make_field(5), 2), b);
    CHECK(u.order() == 16);
    VasersteinResult w = vaserstein_normal_subgroup(u, b);
    CHECK(w.exhaustive);
    CHECK(w.elements.size() == 1);
}

TEST_CASE("K1 of finite fields is the unit group") {
    Budgets b;
    CHECK(k1(field_algebra(make_field(3)), b).k1 == fin_ab({2}));
    CHECK(k1(field_algebra(make_field(5)), b).k1 == fin_ab({4}));
    CHECK(k1(field_algebra(make_field(2, 2)), b).k1 == fin_ab({3}));
    CHECK(k1(field_algebra(make_field(2)), b).k1.trivial());
}

TEST_CASE("K1 of mu_{F_3}(C_3) reproduces (Z/2)^2 x Z/3") {
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    K1Report r = k1(pair.mu.algebra, b, &pair.mu_chain, "mu(3,1,3)");
    CHECK(r.method == "exhaustive");
    CHECK(r.k1 == fin_ab({2, 6}));
    CHECK(r.unit_order == 324);
    CHECK(r.vaserstein_subgroup_order == 27);
    CHECK(r.k1.order() * r.vaserstein_subgroup_order == r.unit_order);
}

TEST_CASE("K1 of nu_{F_3}(C_3) reproduces (Z/2)^2") {
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    K1Report r = k1(pair.nu.algebra, b, &pair.nu_chain, "nu(3,1,3)");
    CHECK(r.k1 == fin_ab({2, 2}));
    CHECK(r.unit_order == 36);
    CHECK(r.vaserstein_subgroup_order == 9);
}

TEST_CASE("relative K1 of mu -> nu at (3,1) is Z/3") {
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    RelativeK1Report r =
        relative_k1(pair.hom, b, &pair.mu_chain, &pair.nu_chain);
    CHECK(r.relative == fin_ab({3}));
    CHECK(r.surjective);
    CHECK(r.k1_source == fin_ab({2, 6}));
    CHECK(r.k1_target == fin_ab({2, 2}));
    // Induced matrix has one row per source generator.
    CHECK(r.induced_matrix.size() == 2);
}

TEST_CASE("K1 and relative K1 vanish for (2,1)") {
    Budgets b;
    BuiltPair pair = build_pair(2, 1);
    K1Report r = k1(pair.mu.algebra, b, &pair.mu_chain, "mu(2,1,2)");
    CHECK(r.k1.trivial());
    RelativeK1Report rel =
        relative_k1(pair.hom, b, &pair.mu_chain, &pair.nu_chain);
    CHECK(rel.relative.trivial());
    CHECK(rel.surjective);
}

TEST_CASE("relative K1 along a zero-kernel hom is trivial") {
    Budgets b;
    AlgebraPtr S = split_algebra(make_field(3), 2);
    AlgebraHom id = identity_hom(S);
    RelativeK1Report r = relative_k1(id, b);
    CHECK(r.relative.trivial());
    CHECK(r.surjective);
    CHECK(r.k1_source == r.k1_target);
}

TEST_CASE("relative K1 orders are p-powers across acceptance pairs") {
    Budgets b;
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {2, 1}, {3, 1}}) {
        BuiltPair pair = build_pair(p, n);
        RelativeK1Report r =
            relative_k1(pair.hom, b, &pair.mu_chain, &pair.nu_chain);
        std::uint64_t o = r.relative.order();
        while (o % p == 0) o /= p;
        CHECK(o == 1);
    }
}

TEST_CASE("undecided harvest is reported, never silently accepted") {
    Budgets tiny;
    tiny.pairs = 50; // far below 81^2
    BuiltPair pair = build_pair(3, 1);
    K1Report r = k1(pair.nu.algebra, tiny, &pair.nu_chain, "nu-small-budget");
    CHECK(r.method == "undecided");
    // The truncated subgroup is a genuine lower bound.
    CHECK(r.vaserstein_subgroup_order <= 9);
    CHECK(r.unit_order == 36);
}

TEST_CASE("k0 rank equals n+1 with exact certificates") {
    Budgets b;
    for (auto [p, n] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
             {2, 1}, {3, 1}, {5, 1}, {2, 2}}) {
        BuiltPair pair = build_pair(p, n);
        K0Certificate mu_cert = k0_rank(pair.mu, pair.mu_chain, b);
        CHECK(mu_cert.rank == static_cast<int>(n + 1));
        CHECK(mu_cert.matches_expected);
        K0Certificate nu_cert = k0_rank(pair.nu, pair.nu_chain, b);
        CHECK(nu_cert.rank == static_cast<int>(n + 1));
    }
}

TEST_CASE("k0 rank is constant along a filtration step") {
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    K0Certificate before = k0_rank(pair.nu, pair.nu_chain, b);
    // One step down the chain: same group, same expected rank.
    Filtration f = nilpotent_filtration(pair.nu);
    MackeyPresentation mid{pair.nu.group, Variant::idle,
                           f.steps[0].hom.target, {}};
    std::vector<AlgebraHom> rest(f.steps.size() - 1);
    for (std::size_t i = 1; i < f.steps.size(); ++i)
        rest[i - 1] = f.steps[i].hom;
    K0Certificate after = k0_rank(mid, rest, b);
    CHECK(before.rank == after.rank);
}

TEST_CASE("conjecture check agrees on the known instances") {
    Budgets b;
    ConjectureReport r31 =
        conjecture_check_k1(GroupSpec{3, 1}, make_field(3), b);
    CHECK(r31.method == "exhaustive");
    CHECK(r31.agree);
    CHECK(r31.computed == fin_ab({2, 2}));

    ConjectureReport r21 =
        conjecture_check_k1(GroupSpec{2, 1}, make_field(2), b);
    CHECK(r21.agree);
    CHECK(r21.computed.trivial());
}

TEST_CASE("conjecture at (2,2): fresh exhaustive data point") {
    // 512-element idle algebra; the computed value is frozen from the
    // brute-force-validated pipeline.
    Budgets b;
    ConjectureReport r =
        conjecture_check_k1(GroupSpec{2, 2}, make_field(2), b);
    CHECK(r.method == "exhaustive");
    CHECK(r.computed.trivial());
    CHECK(r.agree);
}

TEST_CASE("k0 of a split algebra counts its coordinate idempotents") {
    Budgets b;
    AlgebraPtr S = split_algebra(make_field(3), 3);
    MackeyPresentation pres{GroupSpec{3, 2}, Variant::idle, S, {}};
    K0Certificate cert = k0_rank(pres, {}, b);
    CHECK(cert.rank == 3);
    CHECK(cert.matches_expected); // n + 1 = 3
}

TEST_CASE("pipeline harvest matches brute force over F_3") {
    // nu(3,1) runs the generic (mixed-radix) harvest kernel; recompute the
    // subgroup by direct algebra arithmetic.
    Budgets b;
    BuiltPair pair = build_pair(3, 1);
    const Algebra& N = *pair.nu.algebra;
    UnitGroup u = unit_group(pair.nu.algebra, b, &pair.nu_chain);
    VasersteinResult w = vaserstein_normal_subgroup(u, b);
    CHECK(w.exhaustive);

    std::set<std::uint64_t> gen_idx;
    for (std::uint64_t xi = 0; xi < N.order(); ++xi)
        for (std::uint64_t yi = 0; yi < N.order(); ++yi) {
            Vec x = N.coords_of(xi), y = N.coords_of(yi);
            Vec a = vec_add(*N.field, N.unit, N.mul(x, y));
            if (!N.is_unit(a)) continue;
            Vec bb = vec_add(*N.field, N.unit, N.mul(y, x));
            gen_idx.insert(N.index_of(N.mul(a, N.inverse(bb))));
        }
    for (std::uint64_t ui : u.elements)
        for (std::uint64_t vi : u.elements) {
            Vec uu = N.coords_of(ui), vv = N.coords_of(vi);
            gen_idx.insert(N.index_of(
                N.mul(N.mul(uu, vv), N.inverse(N.mul(vv, uu)))));
        }
    std::vector<Vec> gens;
    for (std::uint64_t gi : gen_idx) gens.push_back(N.coords_of(gi));
    std::set<std::uint64_t> closure{N.index_of(N.unit)};
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::uint64_t> cur(closure.begin(), closure.end());
        for (std::uint64_t wi : cur)
            for (const Vec& gv : gens) {
                std::uint64_t t = N.index_of(N.mul(N.coords_of(wi), gv));
                if (closure.insert(t).second) grew = true;
            }
    }
    std::vector<std::uint64_t> expect(closure.begin(), closure.end());
    CHECK(w.elements == expect);
}

TEST_CASE("k0 rank survives the linear-solve comparison fallback") {
    Budgets b;
    b.pairs = 4; // forces the one-sided enumeration + linear solve
    BuiltPair pair = build_pair(3, 1);
    K0Certificate cert = k0_rank(pair.mu, pair.mu_chain, b);
    CHECK(cert.rank == 2);
}

TEST_CASE("generic and bit-packed harvests agree over F_2") {
    Budgets b;
    // nu(2,2) has 512 elements: run the pipeline and re-derive the
    // Vaserstein subgroup with the generic kernel by faking q != 2 is not
    // possible, so compare against a from-scratch closure over the same
    // generators collected by brute force multiplication.
    BuiltPair pair = build_pair(2, 2);
    const Algebra& N = *pair.nu.algebra;
    UnitGroup u = unit_group(pair.nu.algebra, b, &pair.nu_chain);
    VasersteinResult w = vaserstein_normal_subgroup(u, b);
    CHECK(w.exhaustive);

    // Brute force: collect every (1+xy)(1+yx)^{-1} and all commutators by
    // direct algebra arithmetic, then close under multiplication.
    std::set<std::uint64_t> gen_idx;
    for (std::uint64_t xi = 0; xi < N.order(); ++xi)
        for (std::uint64_t yi = 0; yi < N.order(); ++yi) {
            Vec x = N.coords_of(xi), y = N.coords_of(yi);
            Vec a = vec_add(*N.field, N.unit, N.mul(x, y));
            if (!N.is_unit(a)) continue;
            Vec bb = vec_add(*N.field, N.unit, N.mul(y, x));
            gen_idx.insert(N.index_of(N.mul(a, N.inverse(bb))));
        }
    for (std::uint64_t ui : u.elements)
        for (std::uint64_t vi : u.elements) {
            Vec uu = N.coords_of(ui), vv = N.coords_of(vi);
            gen_idx.insert(N.index_of(
                N.mul(N.mul(uu, vv), N.inverse(N.mul(vv, uu)))));
        }
    std::vector<Vec> gens;
    for (std::uint64_t gi : gen_idx) gens.push_back(N.coords_of(gi));
    std::set<std::uint64_t> closure{N.index_of(N.unit)};
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::uint64_t> cur(closure.begin(), closure.end());
        for (std::uint64_t wi : cur)
            for (const Vec& gv : gens) {
                std::uint64_t t = N.index_of(N.mul(N.coords_of(wi), gv));
                if (closure.insert(t).second) grew = true;
            }
    }
    std::vector<std::uint64_t> expect(closure.begin(), closure.end());
    CHECK(w.elements == expect);
}
