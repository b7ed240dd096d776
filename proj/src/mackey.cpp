#include "mackeyk/mackey.hpp"

#include <algorithm>
#include <map>

#include "mackeyk/errors.hpp"
#include "mackeyk/util.hpp"

namespace mackeyk {

void validate_group(const GroupSpec& g) {
    if (!is_prime(g.p)) throw ConfigError("group parameter p must be prime");
    if (g.n < 1) throw ConfigError("group parameter n must be >= 1");
    if (checked_pow(g.p, g.n) > (1ull << 20))
        throw ConfigError("group order p^n exceeds 2^20");
}

std::string label_name(const SpanLabel& l) {
    std::string s;
    if (l.left > l.mid)
        s += "T^" + std::to_string(l.left) + "_" + std::to_string(l.mid);
    if (l.twist > 0) {
        if (!s.empty()) s += " ";
        s += "c_" + std::to_string(l.mid) + "^" + std::to_string(l.twist);
    }
    if (l.right > l.mid) {
        if (!s.empty()) s += " ";
        s += "R^" + std::to_string(l.right) + "_" + std::to_string(l.mid);
    }
    if (s.empty()) s = "id_" + std::to_string(l.left);
    return s;
}

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::full: return "full";
    case Variant::cohomological: return "cohomological";
    case Variant::idle: return "idle";
    }
    return "?";
}

std::vector<SpanLabel> span_basis(const GroupSpec& g, Variant variant) {
    validate_group(g);
    std::vector<SpanLabel> out;
    for (std::uint32_t a = 0; a <= g.n; ++a)
        for (std::uint32_t b = 0; b <= g.n; ++b) {
            std::uint64_t twists = checked_pow(g.p, g.n - std::max(a, b));
            std::uint32_t lo = std::min(a, b);
            switch (variant) {
            case Variant::full:
                for (std::uint32_t k = lo + 1; k-- > 0;)
                    for (std::uint64_t t = 0; t < twists; ++t)
                        out.push_back({a, k, b, t});
                break;
            case Variant::cohomological:
                for (std::uint64_t t = 0; t < twists; ++t)
                    out.push_back({a, lo, b, t});
                break;
            case Variant::idle:
                out.push_back({a, lo, b, 0});
                break;
            }
        }
    return out;
}

namespace {

void validate_label(const GroupSpec& g, const SpanLabel& l) {
    if (l.left > g.n || l.right > g.n || l.mid > std::min(l.left, l.right))
        throw ConfigError("span label out of range");
    if (l.twist >= checked_pow(g.p, g.n - std::max(l.left, l.right)))
        throw ConfigError("span label twist out of range");
}

} // namespace

SpanSum compose_spans(const GroupSpec& g, const SpanLabel& x,
                      const SpanLabel& y) {
    validate_group(g);
    validate_label(g, x);
    validate_label(g, y);
    if (x.right != y.left) return {}; // non-composable symbols
    const std::uint32_t a = x.left, b = x.right, c = y.right;
    const std::uint32_t k = x.mid, m = y.mid;
    const std::uint64_t pn = checked_pow(g.p, g.n);
    // Orbits of the middle pullback: [C_p^b : C_p^max(k,m)] of them, each of
    // type G/C_p^min(k,m); representatives step by p^{n-b} and twists add.
    const std::uint64_t orbits = checked_pow(g.p, b - std::max(k, m));
    const std::uint64_t step = checked_pow(g.p, g.n - b);
    const std::uint64_t twist_mod =
        checked_pow(g.p, g.n - std::max(a, c));
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t,
                        std::uint64_t>,
             std::uint32_t>
        acc;
    for (std::uint64_t i = 0; i < orbits; ++i) {
        std::uint64_t w = (x.twist + i * step + y.twist) % pn;
        std::uint64_t tw = w % twist_mod;
        auto key = std::tuple(a, c, std::min(k, m), tw);
        acc[key] = (acc[key] + 1) % g.p;
    }
    SpanSum out;
    for (const auto& [key, coeff] : acc) {
        if (coeff == 0) continue;
        out.push_back({SpanLabel{std::get<0>(key), std::get<2>(key),
                                 std::get<1>(key), std::get<3>(key)},
                       coeff});
    }
    return out;
}

namespace {

std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint64_t>,
         std::size_t>
index_labels(const std::vector<SpanLabel>& labels) {
    std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t,
                        std::uint64_t>,
             std::size_t>
        idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        idx[{labels[i].left, labels[i].mid, labels[i].right,
             labels[i].twist}] = i;
    return idx;
}

Vec unit_vector_for(const GroupSpec& g, const std::vector<SpanLabel>& labels) {
    Vec unit(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const SpanLabel& l = labels[i];
        if (l.left == l.right && l.mid == l.left && l.twist == 0) unit[i] = 1;
    }
    std::size_t ones = 0;
    for (Sym s : unit) ones += s;
    if (ones != g.n + 1)
        throw CertificateError("unit decomposition has the wrong size");
    return unit;
}

MackeyPresentation assemble(const GroupSpec& g, Variant variant, FieldPtr F,
                            std::vector<SpanLabel> labels,
                            std::vector<Sym> table) {
    std::vector<std::string> names(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        names[i] = label_name(labels[i]);
    Vec unit = unit_vector_for(g, labels);
    AlgebraPtr alg = make_algebra(std::move(F), std::move(names),
                                  std::move(table), std::move(unit));
    ValidationReport rep = validate_algebra(*alg);
    if (!rep.ok)
        throw CertificateError("span algebra failed validation: " +
                               rep.message);
    return {g, variant, std::move(alg), std::move(labels)};
}

} // namespace

MackeyPresentation build_full_span_algebra(const GroupSpec& g) {
    validate_group(g);
    FieldPtr F = make_field(g.p, 1);
    std::vector<SpanLabel> labels = span_basis(g, Variant::full);
    auto idx = index_labels(labels);
    const std::size_t dim = labels.size();
    std::vector<Sym> table(dim * dim * dim, 0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            for (const auto& [l, coeff] : compose_spans(g, labels[i], labels[j])) {
                auto it = idx.find({l.left, l.mid, l.right, l.twist});
                if (it == idx.end())
                    throw CertificateError(
                        "span composition left the full basis");
                table[(i * dim + j) * dim + it->second] =
                    static_cast<Sym>(coeff);
            }
        }
    return assemble(g, Variant::full, std::move(F), std::move(labels),
                    std::move(table));
}

namespace {

MackeyPresentation build_route_a(const GroupSpec& g) {
    FieldPtr F = make_field(g.p, 1);
    std::vector<SpanLabel> labels = span_basis(g, Variant::cohomological);
    auto idx = index_labels(labels);
    const std::size_t dim = labels.size();
    std::vector<Sym> table(dim * dim * dim, 0);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            for (const auto& [l, coeff] : compose_spans(g, labels[i], labels[j])) {
                // A product through a middle smaller than min(left, right)
                // is a multiple of a transfer-restriction loop, i.e. of the
                // index [min : mid] = 0; it reduces away.
                if (l.mid < std::min(l.left, l.right)) continue;
                auto it = idx.find({l.left, l.mid, l.right, l.twist});
                if (it == idx.end())
                    throw CertificateError(
                        "span composition left the cohomological basis");
                table[(i * dim + j) * dim + it->second] =
                    static_cast<Sym>(coeff);
            }
        }
    return assemble(g, Variant::cohomological, std::move(F), std::move(labels),
                    std::move(table));
}

MackeyPresentation build_route_b(const GroupSpec& g) {
    MackeyPresentation full = build_full_span_algebra(g);
    auto idx = index_labels(full.labels);
    // Relations T^H_K R^H_K = [H:K] = 0 for K < H (p = 0 is automatic).
    std::vector<Vec> gens;
    for (std::uint32_t l = 1; l <= g.n; ++l)
        for (std::uint32_t h = 0; h < l; ++h) {
            Vec v(full.algebra->dim, 0);
            v[idx.at({l, h, l, 0})] = 1;
            gens.push_back(std::move(v));
        }
    IdealBasis rel = generate_two_sided_ideal(full.algebra, gens);
    auto [quot, hom] = quotient_algebra(full.algebra, rel);
    // The relation ideal is spanned by the middle-deficient coordinates, so
    // the surviving complement must be exactly the cohomological basis.
    std::vector<std::size_t> comp = rel.complement_columns();
    std::vector<SpanLabel> expected = span_basis(g, Variant::cohomological);
    if (comp.size() != expected.size())
        throw CertificateError(
            "route b quotient dimension differs from the cohomological count");
    std::vector<SpanLabel> labels(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        labels[i] = full.labels[comp[i]];
        if (!(labels[i] == expected[i]))
            throw CertificateError(
                "route b quotient basis is not canonically matched at " +
                label_name(labels[i]));
    }
    return {g, Variant::cohomological, quot, std::move(labels)};
}

} // namespace

MackeyPresentation build_mackey_algebra(const GroupSpec& g, FieldPtr q,
                                        Route route) {
    validate_group(g);
    if (q->p() != g.p)
        throw ConfigError(
            "coefficient field characteristic must equal the group prime");
    MackeyPresentation pres =
        (route == Route::a) ? build_route_a(g) : build_route_b(g);
    pres.algebra = base_change(pres.algebra, std::move(q));
    return pres;
}

void compare_routes(const MackeyPresentation& a, const MackeyPresentation& b) {
    if (a.labels != b.labels)
        throw RouteDisagreement("construction routes disagree on the basis");
    if (a.algebra->table != b.algebra->table) {
        const std::size_t dim = a.algebra->dim;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                if (a.algebra->entry_vec(i, j) != b.algebra->entry_vec(i, j))
                    throw RouteDisagreement(
                        "construction routes disagree on " +
                        a.algebra->labels[i] + " * " + a.algebra->labels[j] +
                        ": route a gives " +
                        a.algebra->describe(a.algebra->entry_vec(i, j)) +
                        ", route b gives " +
                        b.algebra->describe(b.algebra->entry_vec(i, j)));
        throw RouteDisagreement("construction routes disagree");
    }
    if (a.algebra->unit != b.algebra->unit)
        throw RouteDisagreement("construction routes disagree on the unit");
}

MackeyPresentation build_mackey_algebra_checked(const GroupSpec& g,
                                                FieldPtr q) {
    MackeyPresentation a = build_mackey_algebra(g, q, Route::a);
    MackeyPresentation b = build_mackey_algebra(g, q, Route::b);
    compare_routes(a, b);
    return a;
}

namespace {

std::vector<Vec> idlization_generators(const MackeyPresentation& coh) {
    const GroupSpec& g = coh.group;
    auto idx = index_labels(coh.labels);
    std::vector<Vec> gens;
    for (std::uint32_t a = 0; a <= g.n; ++a) {
        std::uint64_t twists = checked_pow(g.p, g.n - a);
        for (std::uint64_t t = 1; t < twists; ++t) {
            Vec v(coh.algebra->dim, 0);
            const Field& F = *coh.algebra->field;
            v[idx.at({a, a, a, t})] = F.one();
            v[idx.at({a, a, a, 0})] = F.neg(F.one());
            gens.push_back(std::move(v));
        }
    }
    return gens;
}

void require_cohomological(const MackeyPresentation& pres) {
    if (pres.variant != Variant::cohomological)
        throw ConfigError("operation requires the cohomological variant");
}

} // namespace

std::pair<MackeyPresentation, AlgebraHom>
build_idle_algebra(const MackeyPresentation& coh) {
    require_cohomological(coh);
    const GroupSpec& g = coh.group;
    IdealBasis I =
        generate_two_sided_ideal(coh.algebra, idlization_generators(coh));
    auto [quot, hom] = quotient_algebra(coh.algebra, I);

    // All twists of one level pair must collapse onto a single class; the
    // surviving classes are relabeled with twist 0.
    auto idx = index_labels(coh.labels);
    for (std::uint32_t a = 0; a <= g.n; ++a)
        for (std::uint32_t b = 0; b <= g.n; ++b) {
            std::uint64_t twists = checked_pow(g.p, g.n - std::max(a, b));
            std::uint32_t lo = std::min(a, b);
            Vec base = hom.apply(
                coh.algebra->basis_vec(idx.at({a, lo, b, 0})));
            for (std::uint64_t t = 1; t < twists; ++t)
                if (hom.apply(coh.algebra->basis_vec(
                        idx.at({a, lo, b, t}))) != base)
                    throw CertificateError(
                        "twists of a level pair have distinct idle images");
        }
    std::vector<std::size_t> comp = I.complement_columns();
    std::vector<SpanLabel> expected = span_basis(g, Variant::idle);
    if (comp.size() != expected.size())
        throw CertificateError("idle dimension differs from the level-pair "
                               "count: got " +
                               std::to_string(comp.size()));
    std::vector<SpanLabel> labels(expected.size());
    std::vector<std::string> names(expected.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
        const SpanLabel& survivor = coh.labels[comp[i]];
        SpanLabel relabeled{survivor.left, survivor.mid, survivor.right, 0};
        if (!(relabeled == expected[i]))
            throw CertificateError("idle basis does not match level pairs");
        labels[i] = relabeled;
        names[i] = label_name(relabeled);
    }
    AlgebraPtr relabeled_alg = make_algebra(
        quot->field, std::move(names), std::vector<Sym>(quot->table),
        Vec(quot->unit));
    AlgebraHom hom2 = make_hom(coh.algebra, relabeled_alg, Mat(hom.matrix));
    return {{g, Variant::idle, relabeled_alg, std::move(labels)},
            std::move(hom2)};
}

KernelCertificate idlization_kernel(const MackeyPresentation& coh) {
    require_cohomological(coh);
    const GroupSpec& g = coh.group;
    const Algebra& A = *coh.algebra;
    auto idx = index_labels(coh.labels);
    // Each conjugation element c_{g^e} = sum over levels of the twist-e
    // class is central.  (The single-level pieces are not.)
    std::uint64_t pn = checked_pow(g.p, g.n);
    for (std::uint64_t e = 0; e < pn; ++e) {
        Vec c(A.dim, 0);
        for (std::uint32_t a = 0; a <= g.n; ++a) {
            std::uint64_t t = e % checked_pow(g.p, g.n - a);
            c[idx.at({a, a, a, t})] = 1;
        }
        for (std::size_t j = 0; j < A.dim; ++j) {
            Vec bj = A.basis_vec(j);
            if (A.mul(c, bj) != A.mul(bj, c))
                throw CertificateError("conjugation element c_g^" +
                                       std::to_string(e) + " is not central");
        }
    }
    IdealBasis I =
        generate_two_sided_ideal(coh.algebra, idlization_generators(coh));
    Nilpotency nil = is_nilpotent_ideal(I);
    if (!nil.nilpotent)
        throw CertificateError("idlization kernel is not nilpotent");
    std::uint64_t bound = checked_pow(g.p, g.n);
    if (nil.degree > bound)
        throw CertificateError("idlization kernel nilpotency degree " +
                               std::to_string(nil.degree) +
                               " exceeds the bound p^n");
    // Re-verify the degree from scratch.
    if (nil.degree > 1 && ideal_power(I, nil.degree - 1).rank() == 0)
        throw CertificateError("nilpotency degree certificate failed (low)");
    if (ideal_power(I, nil.degree).rank() != 0)
        throw CertificateError("nilpotency degree certificate failed (high)");
    return {std::move(I), nil.degree};
}

Filtration nilpotent_filtration(const MackeyPresentation& idle) {
    if (idle.variant != Variant::idle)
        throw ConfigError("filtration requires the idle variant");
    const GroupSpec& g = idle.group;
    Filtration out;
    AlgebraPtr cur = idle.algebra;
    std::vector<SpanLabel> labels = idle.labels;
    while (true) {
        // Surviving off-diagonal symbol of maximal index gap; restrictions
        // (left < right) before transfers, then lexicographic.
        std::size_t pick = labels.size();
        auto better = [&](const SpanLabel& cand, const SpanLabel& best) {
            auto gap = [](const SpanLabel& l) {
                return l.left > l.right ? l.left - l.right : l.right - l.left;
            };
            if (gap(cand) != gap(best)) return gap(cand) > gap(best);
            bool cand_r = cand.left < cand.right;
            bool best_r = best.left < best.right;
            if (cand_r != best_r) return cand_r;
            return std::tuple(cand.left, cand.right) <
                   std::tuple(best.left, best.right);
        };
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i].left == labels[i].right) continue;
            if (pick == labels.size() || better(labels[i], labels[pick]))
                pick = i;
        }
        if (pick == labels.size()) break;

        Vec gen = cur->basis_vec(pick);
        IdealBasis J = generate_two_sided_ideal(cur, {gen});
        Nilpotency nil = is_nilpotent_ideal(J);
        if (!nil.nilpotent || nil.degree > 2)
            throw CertificateError("filtration ideal at " +
                                   label_name(labels[pick]) +
                                   " does not square to zero");
        if (ideal_power(J, 2).rank() != 0)
            throw CertificateError("filtration J^2 = 0 re-check failed at " +
                                   label_name(labels[pick]));
        // The ideal must be spanned by basis coordinates so that the
        // quotient basis stays a subset of the surviving symbols.
        for (std::size_t r = 0; r < J.rows.rows; ++r) {
            Vec row = J.rows.row(r);
            std::size_t nonzero = 0;
            for (Sym s : row) nonzero += (s != 0);
            if (nonzero != 1)
                throw CertificateError(
                    "filtration ideal is not label-aligned at " +
                    label_name(labels[pick]));
        }
        auto [quot, hom] = quotient_algebra(cur, J);
        std::vector<std::size_t> comp = J.complement_columns();
        std::vector<SpanLabel> next_labels(comp.size());
        for (std::size_t i = 0; i < comp.size(); ++i)
            next_labels[i] = labels[comp[i]];
        out.steps.push_back(
            {labels[pick], std::move(J), nil.degree, std::move(hom)});
        cur = quot;
        labels = std::move(next_labels);
    }
    if (labels.size() != g.n + 1)
        throw CertificateError("filtration terminal has the wrong dimension");
    for (std::uint32_t a = 0; a <= g.n; ++a)
        if (!(labels[a] == SpanLabel{a, a, a, 0}))
            throw CertificateError(
                "filtration terminal basis is not the diagonal");
    certify_split_commutative(*cur);
    out.terminal = cur;
    out.terminal_labels = std::move(labels);
    return out;
}

std::vector<AlgebraHom> reduction_chain(const MackeyPresentation& pres) {
    std::vector<AlgebraHom> chain;
    if (pres.variant == Variant::cohomological) {
        auto [idle, hom] = build_idle_algebra(pres);
        chain.push_back(std::move(hom));
        Filtration f = nilpotent_filtration(idle);
        for (auto& s : f.steps) chain.push_back(std::move(s.hom));
    } else if (pres.variant == Variant::idle) {
        Filtration f = nilpotent_filtration(pres);
        for (auto& s : f.steps) chain.push_back(std::move(s.hom));
    } else {
        throw ConfigError("reduction chain needs cohomological or idle input");
    }
    return chain;
}

void constant_module_check(const MackeyPresentation& pres) {
    const GroupSpec& g = pres.group;
    const Algebra& A = *pres.algebra;
    const Field& F = *A.field;
    const std::size_t lv = g.n + 1;
    // Action of each basis symbol on the constant module: restrictions act
    // as the identity, transfers as multiplication by the index (= 0 in
    // characteristic p), conjugations as the identity.
    std::vector<Mat> rho(A.dim);
    for (std::size_t i = 0; i < A.dim; ++i) {
        const SpanLabel& l = pres.labels[i];
        rho[i] = Mat(lv, lv);
        if (l.mid == l.left) rho[i].at(l.left, l.right) = 1;
    }
    auto act = [&](const Vec& x) {
        Mat m(lv, lv);
        for (std::size_t i = 0; i < A.dim; ++i) {
            if (x[i] == 0) continue;
            for (std::size_t r = 0; r < lv; ++r)
                for (std::size_t c = 0; c < lv; ++c)
                    m.at(r, c) =
                        F.add(m.at(r, c), F.mul(x[i], rho[i].at(r, c)));
        }
        return m;
    };
    if (act(A.unit) != Mat::identity(lv))
        throw CertificateError("constant module: unit does not act as id");
    for (std::size_t i = 0; i < A.dim; ++i)
        for (std::size_t j = 0; j < A.dim; ++j) {
            Mat lhs = mat_mul(F, rho[i], rho[j]);
            Mat rhs = act(A.entry_vec(i, j));
            if (lhs != rhs)
                throw CertificateError(
                    "constant module action fails the structure constant (" +
                    A.labels[i] + ", " + A.labels[j] + ")");
        }
}

std::string presentation_id(const MackeyPresentation& pres) {
    std::string kind;
    switch (pres.variant) {
    case Variant::full: kind = "span"; break;
    case Variant::cohomological: kind = "mu"; break;
    case Variant::idle: kind = "nu"; break;
    }
    return kind + "(p=" + std::to_string(pres.group.p) +
           ",n=" + std::to_string(pres.group.n) +
           ",q=" + std::to_string(pres.algebra->field->q()) + ")";
}

} // namespace mackeyk
