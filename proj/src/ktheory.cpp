#include "mackeyk/ktheory.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_map>

#include "mackeyk/errors.hpp"
#include "mackeyk/util.hpp"

namespace mackeyk {

// ---------------------------------------------------------------------------
// FinAbGroup

std::uint64_t FinAbGroup::order() const {
    std::uint64_t o = 1;
    for (std::uint64_t d : invariant_factors) o *= d;
    return o;
}

std::string FinAbGroup::to_string() const {
    std::string s;
    if (free_rank > 0) s = "Z^" + std::to_string(free_rank);
    for (std::uint64_t d : invariant_factors) {
        if (!s.empty()) s += " + ";
        s += "Z/" + std::to_string(d);
    }
    return s.empty() ? "0" : s;
}

FinAbGroup fin_ab(std::vector<std::uint64_t> invariant_factors,
                  std::uint64_t free_rank) {
    for (std::size_t i = 0; i < invariant_factors.size(); ++i) {
        if (invariant_factors[i] < 2)
            throw ConfigError("invariant factors must be >= 2");
        if (i > 0 && invariant_factors[i] % invariant_factors[i - 1] != 0)
            throw ConfigError("invariant factors must form a divisibility chain");
    }
    return {std::move(invariant_factors), free_rank};
}

FinAbGroup fin_ab_power(std::uint64_t d, std::uint32_t copies) {
    if (d <= 1) return {};
    return fin_ab(std::vector<std::uint64_t>(copies, d));
}

namespace {

std::vector<std::pair<std::uint64_t, std::uint32_t>> factorize(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            std::uint32_t e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            out.push_back({p, e});
        }
    if (n > 1) out.push_back({n, 1});
    return out;
}

// ---------------------------------------------------------------------------
// Abstract finite abelian group: element ids with a multiplication oracle.

struct AbGroupView {
    std::vector<std::uint32_t> elems; // ids, identity included
    std::uint32_t identity = 0;
    std::function<std::uint32_t(std::uint32_t, std::uint32_t)> mul;

    std::uint32_t pow(std::uint32_t x, std::uint64_t e) const {
        std::uint32_t r = identity;
        std::uint32_t b = x;
        while (e) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    }
};

// Exponent partition per prime by counting elements of order dividing l^j;
// combined across primes into ascending invariant factors.
FinAbGroup invariants_by_order_counting(const AbGroupView& G) {
    const std::uint64_t N = G.elems.size();
    if (N == 1) return {};
    std::vector<std::vector<std::uint32_t>> exponents; // per prime, descending
    for (auto [ell, a] : factorize(N)) {
        std::vector<std::uint32_t> lambda; // lambda[j-1] = #parts >= j
        std::uint64_t prev = 1;
        std::uint64_t cap = checked_pow(ell, a);
        std::uint64_t ellj = 1;
        while (prev < cap) {
            ellj *= ell;
            std::uint64_t count = 0;
            for (std::uint32_t x : G.elems)
                if (G.pow(x, ellj) == G.identity) ++count;
            if (count % prev != 0 || (count / prev) == 0)
                throw CertificateError("order counting is inconsistent");
            std::uint64_t ratio = count / prev;
            if (ratio == 1)
                throw CertificateError(
                    "order counting stalled below the Sylow order");
            std::uint32_t lam = 0;
            while (ratio > 1) {
                if (ratio % ell != 0)
                    throw CertificateError("order counting is inconsistent");
                ratio /= ell;
                ++lam;
            }
            lambda.push_back(lam);
            prev = count;
        }
        std::vector<std::uint32_t> parts; // descending exponents
        if (!lambda.empty())
            for (std::uint32_t i = 1; i <= lambda[0]; ++i) {
                std::uint32_t e = 0;
                for (std::uint32_t lam : lambda)
                    if (lam >= i) ++e;
                parts.push_back(e);
            }
        exponents.push_back(std::move(parts));
    }
    std::size_t slots = 0;
    for (const auto& parts : exponents) slots = std::max(slots, parts.size());
    std::vector<std::uint64_t> factors; // descending
    auto primes = factorize(N);
    for (std::size_t i = 0; i < slots; ++i) {
        std::uint64_t d = 1;
        for (std::size_t pi = 0; pi < primes.size(); ++pi)
            if (i < exponents[pi].size())
                d *= checked_pow(primes[pi].first, exponents[pi][i]);
        factors.push_back(d);
    }
    std::reverse(factors.begin(), factors.end());
    return fin_ab(std::move(factors));
}

std::uint64_t element_order(const AbGroupView& G, std::uint32_t x,
                            std::uint64_t bound) {
    // bound = group order; the element order divides it.
    std::uint64_t ord = bound;
    for (auto [ell, a] : factorize(bound)) {
        (void)a;
        while (ord % ell == 0 && G.pow(x, ord / ell) == G.identity) ord /= ell;
    }
    return ord;
}

struct AbBasis {
    std::vector<std::uint32_t> gens;    // invariant-factor order (ascending)
    std::vector<std::uint64_t> orders;  // parallel, ascending divisibility
};

// Generator extraction per Sylow subgroup: greedily pick the element of
// maximal order modulo the span so far, then correct it to have that exact
// order.  Cross-checked against order counting by the caller.
AbBasis abelian_basis(const AbGroupView& G) {
    const std::uint64_t N = G.elems.size();
    AbBasis out;
    if (N == 1) return out;
    struct PrimeGens {
        std::uint64_t ell;
        std::vector<std::uint32_t> gens;   // orders descending
        std::vector<std::uint64_t> orders;
    };
    std::vector<PrimeGens> per_prime;
    for (auto [ell, a] : factorize(N)) {
        std::uint64_t sylow_order = checked_pow(ell, a);
        std::uint64_t cofactor = N / sylow_order;
        // Projection onto the Sylow subgroup.
        std::vector<std::uint32_t> sylow;
        {
            std::unordered_map<std::uint32_t, bool> mark;
            for (std::uint32_t x : G.elems) {
                std::uint32_t y = G.pow(x, cofactor);
                if (!mark.count(y)) {
                    mark[y] = true;
                    sylow.push_back(y);
                }
            }
        }
        if (sylow.size() != sylow_order)
            throw CertificateError("Sylow projection has the wrong size");

        PrimeGens pg{ell, {}, {}};
        // span: element -> exponent tuple over pg.gens.
        std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> span;
        span[G.identity] = {};
        auto rebuild_span = [&]() {
            span.clear();
            std::vector<std::uint64_t> t(pg.gens.size(), 0);
            while (true) {
                std::uint32_t e = G.identity;
                for (std::size_t i = 0; i < pg.gens.size(); ++i)
                    e = G.mul(e, G.pow(pg.gens[i], t[i]));
                if (!span.emplace(e, t).second)
                    throw CertificateError(
                        "generator span is not a direct sum");
                std::size_t i = 0;
                for (; i < t.size(); ++i) {
                    if (++t[i] < pg.orders[i]) break;
                    t[i] = 0;
                }
                if (i == t.size()) break;
            }
        };
        rebuild_span();
        while (span.size() < sylow_order) {
            std::uint32_t best = G.identity;
            std::uint64_t best_ord = 1;
            for (std::uint32_t x : sylow) {
                if (span.count(x)) continue;
                std::uint64_t o = ell;
                std::uint32_t y = G.pow(x, ell);
                while (!span.count(y)) {
                    o *= ell;
                    y = G.pow(y, ell);
                }
                if (o > best_ord) {
                    best_ord = o;
                    best = x;
                }
            }
            // Correct so that best^best_ord = 1 exactly.
            std::uint32_t tail = G.pow(best, best_ord);
            auto it = span.find(tail);
            if (it == span.end())
                throw CertificateError("basis correction lookup failed");
            std::uint32_t g = best;
            for (std::size_t i = 0; i < pg.gens.size(); ++i) {
                std::uint64_t c = it->second[i];
                if (c == 0) continue;
                if (c % best_ord != 0)
                    throw CertificateError("basis correction not divisible");
                std::uint64_t adj = pg.orders[i] - c / best_ord;
                g = G.mul(g, G.pow(pg.gens[i], adj));
            }
            if (element_order(G, g, sylow_order) != best_ord)
                throw CertificateError("corrected generator has wrong order");
            pg.gens.push_back(g);
            pg.orders.push_back(best_ord);
            rebuild_span();
        }
        per_prime.push_back(std::move(pg));
    }
    std::size_t slots = 0;
    for (const auto& pg : per_prime) slots = std::max(slots, pg.gens.size());
    // Slot i (0 = largest) multiplies the i-th generator of each prime.
    std::vector<std::uint32_t> gens;
    std::vector<std::uint64_t> orders;
    for (std::size_t i = 0; i < slots; ++i) {
        std::uint32_t g = G.identity;
        std::uint64_t d = 1;
        for (const auto& pg : per_prime)
            if (i < pg.gens.size()) {
                g = G.mul(g, pg.gens[i]);
                d *= pg.orders[i];
            }
        gens.push_back(g);
        orders.push_back(d);
    }
    std::reverse(gens.begin(), gens.end());
    std::reverse(orders.begin(), orders.end());
    out.gens = std::move(gens);
    out.orders = std::move(orders);
    return out;
}

// ---------------------------------------------------------------------------
// Unit-group machinery

constexpr std::uint32_t kNoRank = 0xffffffffu;
constexpr std::uint64_t kMaxUnitsForTable = 4096;

struct UnitContext {
    AlgebraPtr alg;
    std::uint32_t nunits = 0;
    std::vector<std::uint64_t> index_of_rank; // ascending element indices
    std::vector<std::uint32_t> rank_of_index; // element index -> rank
    std::vector<Vec> coords;                  // per rank
    std::vector<std::uint16_t> mult;          // rank x rank -> rank
    std::vector<std::uint16_t> inv;           // rank -> rank
    std::uint32_t one = 0;                    // rank of 1

    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        return mult[std::size_t(a) * nunits + b];
    }
};

UnitContext build_unit_context(AlgebraPtr a,
                               const std::vector<std::uint64_t>& unit_indices,
                               unsigned threads) {
    UnitContext ctx;
    ctx.alg = a;
    if (unit_indices.size() > kMaxUnitsForTable)
        throw BudgetExceeded("unit group too large for an exhaustive "
                             "presentation (order " +
                             std::to_string(unit_indices.size()) + ")");
    ctx.nunits = static_cast<std::uint32_t>(unit_indices.size());
    ctx.index_of_rank = unit_indices;
    ctx.rank_of_index.assign(a->order(), kNoRank);
    ctx.coords.resize(ctx.nunits);
    for (std::uint32_t r = 0; r < ctx.nunits; ++r) {
        ctx.rank_of_index[unit_indices[r]] = r;
        ctx.coords[r] = a->coords_of(unit_indices[r]);
    }
    std::uint64_t one_idx = a->index_of(a->unit);
    if (ctx.rank_of_index[one_idx] == kNoRank)
        throw CertificateError("unit group does not contain 1");
    ctx.one = ctx.rank_of_index[one_idx];

    const Field& F = *a->field;
    const std::size_t dim = a->dim;
    const bool gf2 = (F.q() == 2) && dim <= 32;
    ctx.mult.assign(std::size_t(ctx.nunits) * ctx.nunits, 0);
    std::atomic<bool> not_closed{false}; // workers must not throw
    parallel_for(ctx.nunits, threads, [&](std::uint64_t rb, std::uint64_t re) {
        std::vector<Vec> lcols(dim);
        std::vector<std::uint32_t> lmask(dim);
        for (std::uint64_t r = rb; r < re; ++r) {
            const Vec& x = ctx.coords[r];
            for (std::size_t j = 0; j < dim; ++j) {
                lcols[j] = a->mul(x, a->basis_vec(j));
                if (gf2)
                    lmask[j] =
                        static_cast<std::uint32_t>(a->index_of(lcols[j]));
            }
            for (std::uint32_t s = 0; s < ctx.nunits; ++s) {
                std::uint64_t prod_idx;
                if (gf2) {
                    std::uint32_t v =
                        static_cast<std::uint32_t>(ctx.index_of_rank[s]);
                    std::uint32_t acc = 0;
                    while (v) {
                        unsigned j = std::countr_zero(v);
                        acc ^= lmask[j];
                        v &= v - 1;
                    }
                    prod_idx = acc;
                } else {
                    const Vec& y = ctx.coords[s];
                    Vec out(dim, 0);
                    for (std::size_t j = 0; j < dim; ++j) {
                        if (y[j] == 0) continue;
                        for (std::size_t kk = 0; kk < dim; ++kk)
                            out[kk] =
                                F.add(out[kk], F.mul(y[j], lcols[j][kk]));
                    }
                    prod_idx = a->index_of(out);
                }
                std::uint32_t pr = ctx.rank_of_index[prod_idx];
                if (pr == kNoRank) {
                    not_closed.store(true);
                    return;
                }
                ctx.mult[std::size_t(r) * ctx.nunits + s] =
                    static_cast<std::uint16_t>(pr);
            }
        }
    });
    if (not_closed.load())
        throw CertificateError("unit group not closed under multiplication");
    ctx.inv.assign(ctx.nunits, 0);
    for (std::uint32_t r = 0; r < ctx.nunits; ++r) {
        bool found = false;
        for (std::uint32_t s = 0; s < ctx.nunits; ++s)
            if (ctx.mul(r, s) == ctx.one) {
                ctx.inv[r] = static_cast<std::uint16_t>(s);
                found = true;
                break;
            }
        if (!found)
            throw CertificateError("unit group not closed under inverse");
    }
    return ctx;
}

} // namespace

UnitGroup unit_group(AlgebraPtr a, const Budgets& budgets,
                     const std::vector<AlgebraHom>* chain) {
    std::uint64_t order;
    try {
        order = a->order();
    } catch (const ConfigError&) {
        throw BudgetExceeded("algebra too large to enumerate");
    }
    if (order > budgets.elements)
        throw BudgetExceeded(
            "element enumeration budget exceeded: |A| = " +
            std::to_string(order) + " > " + std::to_string(budgets.elements));
    unsigned threads = resolve_threads(budgets.threads);
    const Field& F = *a->field;
    AtomicBitset units(order);
    parallel_for(order, threads, [&](std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t i = b; i < e; ++i) {
            Vec x = a->coords_of(i);
            if (rank(F, a->left_regular(x)) == a->dim) units.set(i);
        }
    });
    UnitGroup U{a, units.to_indices()};

    if (chain) {
        // Units are precisely the preimages of units of the terminal split
        // algebra: lift each terminal unit, add every kernel combination.
        if (chain->front().source != a)
            throw std::invalid_argument("chain does not start at the algebra");
        Mat composite = chain->front().matrix;
        for (std::size_t i = 1; i < chain->size(); ++i)
            composite = mat_mul(F, composite, (*chain)[i].matrix);
        const AlgebraPtr& terminal = chain->back().target;
        certify_split_commutative(*terminal);
        Mat ker = left_nullspace(F, composite);
        std::uint64_t fiber = checked_pow(F.q(), static_cast<std::uint32_t>(ker.rows));
        std::uint64_t top_units = 1;
        for (std::size_t i = 0; i < terminal->dim; ++i)
            top_units *= (F.q() - 1);
        if (top_units * fiber != U.order())
            throw CertificateError(
                "unit count mismatch: scan found " +
                std::to_string(U.order()) + ", coset formula gives " +
                std::to_string(top_units * fiber));
        std::vector<std::uint64_t> coset_units;
        coset_units.reserve(top_units * fiber);
        // Enumerate terminal units as tuples of nonzero field entries.
        std::vector<Sym> tu(terminal->dim, 1);
        while (true) {
            Vec target(terminal->dim);
            for (std::size_t i = 0; i < terminal->dim; ++i) target[i] = tu[i];
            auto x0 = solve_left(F, composite, target);
            if (!x0)
                throw CertificateError("terminal unit has no preimage");
            for (std::uint64_t kidx = 0; kidx < fiber; ++kidx) {
                Vec x = *x0;
                std::uint64_t t = kidx;
                for (std::size_t r = 0; r < ker.rows; ++r) {
                    Sym c = static_cast<Sym>(t % F.q());
                    t /= F.q();
                    if (c != 0)
                        x = vec_add(F, x, vec_scale(F, c, ker.row(r)));
                }
                coset_units.push_back(a->index_of(x));
            }
            std::size_t i = 0;
            for (; i < tu.size(); ++i) {
                tu[i] = static_cast<Sym>(tu[i] + 1);
                if (tu[i] < F.q()) break;
                tu[i] = 1;
            }
            if (i == tu.size()) break;
        }
        std::sort(coset_units.begin(), coset_units.end());
        if (coset_units != U.elements)
            throw CertificateError(
                "unit sets from scan and coset construction differ");
    }
    return U;
}

namespace {

// Vaserstein generators (1+xy)(1+yx)^{-1} over x in [xb, xe), all y.
// The y loop walks a mixed-radix counter, updating x*y and y*x by one
// column per digit change.
void harvest_generic(const Algebra& A, const UnitContext& ctx,
                     const AtomicBitset& units, std::uint64_t xb,
                     std::uint64_t xe, std::vector<std::uint64_t>& gen_words,
                     bool& vaserstein_pairing_violated) {
    const Field& F = *A.field;
    const std::size_t dim = A.dim;
    const std::uint64_t q = F.q();
    const std::uint64_t total = A.order();
    std::vector<std::uint64_t> weight(dim);
    {
        std::uint64_t w = 1;
        for (std::size_t k = 0; k < dim; ++k) {
            weight[k] = w;
            w *= q;
        }
    }
    // Support of the unit vector: adding 1 shifts these coordinates.
    std::vector<std::pair<std::size_t, Sym>> unit_support;
    for (std::size_t k = 0; k < dim; ++k)
        if (A.unit[k] != 0) unit_support.push_back({k, A.unit[k]});
    auto plus_one = [&](const std::vector<Sym>& v, std::uint64_t idx) {
        for (auto [k, uk] : unit_support)
            idx += (std::uint64_t(F.add(v[k], uk)) - v[k]) * weight[k];
        return idx;
    };
    std::vector<Vec> lcol(dim), rcol(dim);
    std::vector<Sym> digits(dim), xy(dim), yx(dim);
    for (std::uint64_t xi = xb; xi < xe; ++xi) {
        Vec x = A.coords_of(xi);
        for (std::size_t j = 0; j < dim; ++j) {
            lcol[j] = A.mul(x, A.basis_vec(j));
            rcol[j] = A.mul(A.basis_vec(j), x);
        }
        std::fill(digits.begin(), digits.end(), 0);
        std::fill(xy.begin(), xy.end(), 0);
        std::fill(yx.begin(), yx.end(), 0);
        std::uint64_t idx_xy = 0, idx_yx = 0;
        for (std::uint64_t count = 0;; ++count) {
            std::uint64_t u_idx = plus_one(xy, idx_xy);
            if (units.test(u_idx)) {
                std::uint64_t v_idx = plus_one(yx, idx_yx);
                if (!units.test(v_idx)) {
                    vaserstein_pairing_violated = true;
                } else {
                    std::uint32_t ur = ctx.rank_of_index[u_idx];
                    std::uint32_t vr = ctx.rank_of_index[v_idx];
                    std::uint32_t g = ctx.mul(ur, ctx.inv[vr]);
                    gen_words[g >> 6] |= std::uint64_t(1) << (g & 63);
                }
            }
            if (count + 1 == total) break;
            std::size_t j = 0;
            while (true) {
                Sym old = digits[j];
                Sym next = (std::uint64_t(old) + 1 == q)
                               ? Sym(0)
                               : static_cast<Sym>(old + 1);
                digits[j] = next;
                Sym delta = F.sub(next, old);
                const Vec& lc = lcol[j];
                const Vec& rc = rcol[j];
                for (std::size_t k = 0; k < dim; ++k) {
                    if (lc[k] != 0) {
                        Sym o = xy[k];
                        Sym nv = F.add(o, F.mul(delta, lc[k]));
                        xy[k] = nv;
                        idx_xy += (std::uint64_t(nv) - o) * weight[k];
                    }
                    if (rc[k] != 0) {
                        Sym o = yx[k];
                        Sym nv = F.add(o, F.mul(delta, rc[k]));
                        yx[k] = nv;
                        idx_yx += (std::uint64_t(nv) - o) * weight[k];
                    }
                }
                if (next != 0) break;
                ++j;
            }
        }
    }
}

// Bit-packed variant for q = 2: an element index is its coordinate bitmask.
void harvest_gf2(const Algebra& A, const UnitContext& ctx,
                 const AtomicBitset& units, std::uint64_t xb, std::uint64_t xe,
                 std::vector<std::uint64_t>& gen_words,
                 bool& vaserstein_pairing_violated) {
    const std::size_t dim = A.dim;
    const std::uint64_t total = A.order();
    // Over F_2 element indices add by XOR, so +1 is one XOR with the unit.
    const std::uint32_t one_mask =
        static_cast<std::uint32_t>(A.index_of(A.unit));
    std::vector<std::uint32_t> lmask(dim), rmask(dim);
    for (std::uint64_t xi = xb; xi < xe; ++xi) {
        Vec x = A.coords_of(xi);
        for (std::size_t j = 0; j < dim; ++j) {
            lmask[j] = static_cast<std::uint32_t>(
                A.index_of(A.mul(x, A.basis_vec(j))));
            rmask[j] = static_cast<std::uint32_t>(
                A.index_of(A.mul(A.basis_vec(j), x)));
        }
        std::uint32_t xy = 0, yx = 0;
        for (std::uint64_t count = 0;; ++count) {
            std::uint32_t u_idx = xy ^ one_mask;
            if (units.test(u_idx)) {
                std::uint32_t v_idx = yx ^ one_mask;
                if (!units.test(v_idx)) {
                    vaserstein_pairing_violated = true;
                } else {
                    std::uint32_t ur = ctx.rank_of_index[u_idx];
                    std::uint32_t vr = ctx.rank_of_index[v_idx];
                    std::uint32_t g = ctx.mul(ur, ctx.inv[vr]);
                    gen_words[g >> 6] |= std::uint64_t(1) << (g & 63);
                }
            }
            if (count + 1 == total) break;
            std::uint64_t change = count ^ (count + 1);
            while (change) {
                unsigned j = std::countr_zero(change);
                xy ^= lmask[j];
                yx ^= rmask[j];
                change &= change - 1;
            }
        }
    }
}

std::vector<std::uint32_t> closure_in_ranks(const UnitContext& ctx,
                                            std::vector<std::uint32_t> gens) {
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    std::vector<bool> in(ctx.nunits, false);
    std::vector<std::uint32_t> members;
    std::vector<std::uint32_t> queue;
    in[ctx.one] = true;
    members.push_back(ctx.one);
    queue.push_back(ctx.one);
    while (!queue.empty()) {
        std::uint32_t w = queue.back();
        queue.pop_back();
        for (std::uint32_t g : gens) {
            std::uint32_t t = ctx.mul(w, g);
            if (!in[t]) {
                in[t] = true;
                members.push_back(t);
                queue.push_back(t);
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

struct K1Internal {
    UnitContext ctx;
    VasersteinResult w;
    std::vector<std::uint32_t> w_ranks;       // sorted
    std::vector<std::uint32_t> coset_of;      // rank -> coset id
    std::vector<std::uint32_t> rep_rank;      // coset id -> minimal rank
    std::uint32_t identity_coset = 0;
    FinAbGroup invariants;

    AbGroupView quotient_view() const {
        AbGroupView v;
        v.elems.resize(rep_rank.size());
        for (std::uint32_t i = 0; i < rep_rank.size(); ++i) v.elems[i] = i;
        v.identity = identity_coset;
        v.mul = [this](std::uint32_t a, std::uint32_t b) {
            return coset_of[ctx.mul(rep_rank[a], rep_rank[b])];
        };
        return v;
    }
};

K1Internal k1_internal(AlgebraPtr a, const Budgets& budgets,
                       const std::vector<AlgebraHom>* chain) {
    UnitGroup U = unit_group(a, budgets, chain);
    unsigned threads = resolve_threads(budgets.threads);
    K1Internal out;
    out.ctx = build_unit_context(a, U.elements, threads);
    const UnitContext& ctx = out.ctx;

    AtomicBitset units(a->order());
    for (std::uint64_t idx : U.elements) units.set(idx);

    const std::uint64_t order = a->order();
    std::uint64_t pair_total = 0;
    bool overflow = order > (1ull << 32);
    if (!overflow) pair_total = order * order;
    std::uint64_t x_limit = order;
    bool exhaustive = true;
    if (overflow || pair_total > budgets.pairs) {
        x_limit = budgets.pairs / order;
        exhaustive = false;
    }

    AtomicBitset gen_bits(ctx.nunits);
    std::atomic<bool> violated{false};
    parallel_for(x_limit, threads, [&](std::uint64_t b, std::uint64_t e) {
        std::vector<std::uint64_t> local((ctx.nunits + 63) / 64, 0);
        bool bad = false;
        if (a->field->q() == 2 && a->dim <= 32)
            harvest_gf2(*a, ctx, units, b, e, local, bad);
        else
            harvest_generic(*a, ctx, units, b, e, local, bad);
        if (bad) violated.store(true);
        for (std::uint64_t w = 0; w < local.size(); ++w) {
            std::uint64_t bits = local[w];
            while (bits) {
                unsigned bit = std::countr_zero(bits);
                gen_bits.set(w * 64 + bit);
                bits &= bits - 1;
            }
        }
    });
    if (violated.load())
        throw CertificateError(
            "1+xy invertible but 1+yx not: semilocal pairing violated");

    // Commutators of units; they make the closure normal and the quotient
    // abelian by construction.  Never truncated (|U|^2 is small).
    parallel_for(ctx.nunits, threads, [&](std::uint64_t b, std::uint64_t e) {
        std::vector<std::uint64_t> local((ctx.nunits + 63) / 64, 0);
        for (std::uint64_t u = b; u < e; ++u)
            for (std::uint32_t v = 0; v < ctx.nunits; ++v) {
                std::uint32_t uv = ctx.mul(static_cast<std::uint32_t>(u), v);
                std::uint32_t vu = ctx.mul(v, static_cast<std::uint32_t>(u));
                std::uint32_t g = ctx.mul(uv, ctx.inv[vu]);
                local[g >> 6] |= std::uint64_t(1) << (g & 63);
            }
        for (std::uint64_t w = 0; w < local.size(); ++w) {
            std::uint64_t bits = local[w];
            while (bits) {
                unsigned bit = std::countr_zero(bits);
                gen_bits.set(w * 64 + bit);
                bits &= bits - 1;
            }
        }
    });

    std::vector<std::uint32_t> gens;
    for (std::uint64_t i = 0; i < ctx.nunits; ++i)
        if (gen_bits.test(i)) gens.push_back(static_cast<std::uint32_t>(i));
    out.w_ranks = closure_in_ranks(ctx, std::move(gens));
    out.w.exhaustive = exhaustive;
    out.w.pairs_harvested = x_limit * order;
    out.w.elements.reserve(out.w_ranks.size());
    for (std::uint32_t r : out.w_ranks)
        out.w.elements.push_back(ctx.index_of_rank[r]);

    // Coset partition; the canonical representative is the smallest rank.
    out.coset_of.assign(ctx.nunits, kNoRank);
    for (std::uint32_t u = 0; u < ctx.nunits; ++u) {
        if (out.coset_of[u] != kNoRank) continue;
        std::uint32_t id = static_cast<std::uint32_t>(out.rep_rank.size());
        out.rep_rank.push_back(u);
        for (std::uint32_t w : out.w_ranks) out.coset_of[ctx.mul(u, w)] = id;
        if (out.coset_of[u] != id)
            throw CertificateError("coset partition is inconsistent");
    }
    out.identity_coset = out.coset_of[ctx.one];
    if (out.rep_rank.size() * out.w_ranks.size() != ctx.nunits)
        throw CertificateError("cosets do not partition the unit group");

    AbGroupView Q = out.quotient_view();
    // Abelian by construction (all commutators lie in W); re-verify when small.
    if (Q.elems.size() <= 512) {
        for (std::uint32_t x : Q.elems)
            for (std::uint32_t y : Q.elems)
                if (Q.mul(x, y) != Q.mul(y, x))
                    throw CertificateError("unit quotient is not abelian");
    }
    out.invariants = invariants_by_order_counting(Q);
    // Independent classifier: generator extraction must agree.
    AbBasis basis = abelian_basis(Q);
    if (basis.orders != out.invariants.invariant_factors)
        throw CertificateError(
            "order counting and basis extraction disagree on K1");
    return out;
}

} // namespace

VasersteinResult vaserstein_normal_subgroup(const UnitGroup& u,
                                            const Budgets& budgets) {
    K1Internal data = k1_internal(u.alg, budgets, nullptr);
    // The unit group passed in must agree with the recomputed one.
    if (data.ctx.index_of_rank != u.elements)
        throw CertificateError("unit group mismatch in Vaserstein harvest");
    return data.w;
}

K1Report k1(AlgebraPtr a, const Budgets& budgets,
            const std::vector<AlgebraHom>* chain,
            const std::string& algebra_id) {
    K1Internal data = k1_internal(a, budgets, chain);
    K1Report rep;
    rep.algebra_id = algebra_id;
    rep.method = data.w.exhaustive ? "exhaustive" : "undecided";
    rep.k1 = data.invariants;
    rep.unit_order = data.ctx.nunits;
    rep.vaserstein_subgroup_order = data.w.elements.size();
    if (data.w.exhaustive &&
        rep.k1.order() * rep.vaserstein_subgroup_order != rep.unit_order)
        throw CertificateError("|K1| * |W| != |units|");
    return rep;
}

RelativeK1Report relative_k1(const AlgebraHom& hom, const Budgets& budgets,
                             const std::vector<AlgebraHom>* source_chain,
                             const std::vector<AlgebraHom>* target_chain) {
    IdealBasis ker = kernel_ideal(hom);
    Nilpotency nil = is_nilpotent_ideal(ker);
    if (!nil.nilpotent)
        throw CertificateError("relative K1 requires a nilpotent kernel");
    K1Internal src = k1_internal(hom.source, budgets, source_chain);
    K1Internal tgt = k1_internal(hom.target, budgets, target_chain);
    if (!src.w.exhaustive || !tgt.w.exhaustive)
        throw BudgetExceeded("relative K1 requires exhaustive harvests");

    const Field& F = *hom.source->field;
    // Induced map on cosets.
    std::vector<std::uint32_t> image(src.rep_rank.size());
    for (std::uint32_t c = 0; c < src.rep_rank.size(); ++c) {
        const Vec& x = src.ctx.coords[src.rep_rank[c]];
        std::uint64_t idx = hom.target->index_of(vec_mat(F, x, hom.matrix));
        std::uint32_t r = tgt.ctx.rank_of_index[idx];
        if (r == kNoRank)
            throw CertificateError("unit does not map to a unit");
        image[c] = tgt.coset_of[r];
    }
    // Well-defined: W maps into W.
    for (std::uint32_t w : src.w_ranks) {
        const Vec& x = src.ctx.coords[w];
        std::uint64_t idx = hom.target->index_of(vec_mat(F, x, hom.matrix));
        std::uint32_t r = tgt.ctx.rank_of_index[idx];
        if (r == kNoRank || tgt.coset_of[r] != tgt.identity_coset)
            throw CertificateError(
                "Vaserstein subgroup does not map into the target's");
    }
    std::vector<bool> hit(tgt.rep_rank.size(), false);
    for (std::uint32_t c : image) hit[c] = true;
    bool surjective =
        std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
    if (!surjective)
        throw CertificateError(
            "induced K1 map along a nilpotent quotient is not surjective");

    // Kernel subgroup of the source quotient.
    AbGroupView Q = src.quotient_view();
    AbGroupView K;
    K.identity = src.identity_coset;
    K.mul = Q.mul;
    for (std::uint32_t c = 0; c < src.rep_rank.size(); ++c)
        if (image[c] == tgt.identity_coset) K.elems.push_back(c);

    RelativeK1Report rep;
    rep.relative = invariants_by_order_counting(K);
    rep.k1_source = src.invariants;
    rep.k1_target = tgt.invariants;
    rep.surjective = surjective;

    // The relative group must be a p-group.
    std::uint64_t ko = K.elems.size();
    std::uint32_t p = F.p();
    while (ko % p == 0) ko /= p;
    if (ko != 1)
        throw CertificateError("relative K1 order is not a power of p");

    // Induced matrix on invariant-factor generators.
    AbBasis src_basis = abelian_basis(Q);
    AbGroupView TQ = tgt.quotient_view();
    AbBasis tgt_basis = abelian_basis(TQ);
    std::unordered_map<std::uint32_t, std::vector<std::uint64_t>> tgt_log;
    {
        std::vector<std::uint64_t> t(tgt_basis.gens.size(), 0);
        while (true) {
            std::uint32_t e = TQ.identity;
            for (std::size_t i = 0; i < tgt_basis.gens.size(); ++i)
                e = TQ.mul(e, TQ.pow(tgt_basis.gens[i], t[i]));
            tgt_log.emplace(e, t);
            std::size_t i = 0;
            for (; i < t.size(); ++i) {
                if (++t[i] < tgt_basis.orders[i]) break;
                t[i] = 0;
            }
            if (i == t.size()) break;
        }
    }
    for (std::uint32_t g : src_basis.gens) {
        std::uint32_t img = image[g];
        auto it = tgt_log.find(img);
        if (it == tgt_log.end())
            throw CertificateError("image escapes the target generators");
        rep.induced_matrix.push_back(it->second);
    }
    return rep;
}

K0Certificate k0_rank(const MackeyPresentation& pres,
                      const std::vector<AlgebraHom>& chain,
                      const Budgets& budgets) {
    if (!chain.empty() && chain.front().source != pres.algebra)
        throw std::invalid_argument("chain does not start at the presentation");
    K0Certificate cert;
    if (chain.empty()) {
        certify_split_commutative(*pres.algebra);
        for (std::size_t i = 0; i < pres.algebra->dim; ++i)
            cert.idempotents.push_back(pres.algebra->basis_vec(i));
    } else {
        cert.idempotents = primitive_orthogonal_decomposition(chain);
    }
    const Algebra& A = *pres.algebra;
    const std::size_t k = cert.idempotents.size();
    cert.classes.assign(k, std::vector<Tri>(k, Tri::undecided));
    bool undecided = false;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            Tri t = projectives_isomorphic(A, cert.idempotents[i],
                                           cert.idempotents[j], budgets.pairs);
            cert.classes[i][j] = t;
            cert.classes[j][i] = t;
            if (t == Tri::undecided) undecided = true;
        }
    for (std::size_t i = 0; i < k; ++i)
        if (cert.classes[i][i] != Tri::yes)
            throw CertificateError("projective comparison is not reflexive");
    if (undecided) {
        cert.rank = -1;
        return cert;
    }
    // Count classes through union-find.
    std::vector<std::size_t> root(k);
    for (std::size_t i = 0; i < k; ++i) root[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
    };
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (cert.classes[i][j] == Tri::yes) root[find(i)] = find(j);
    std::size_t classes = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (find(i) == i) ++classes;
    cert.rank = static_cast<int>(classes);
    cert.matches_expected =
        (classes == static_cast<std::size_t>(pres.group.n) + 1);
    return cert;
}

FinAbGroup quillen_k(std::uint64_t q, std::uint32_t i) {
    if (q < 2) throw ConfigError("q must be a prime power >= 2");
    if (i == 0) return fin_ab({}, 1);
    if (i % 2 == 0) return {};
    std::uint32_t j = (i + 1) / 2;
    std::uint64_t d = checked_pow(q, j) - 1;
    return fin_ab_power(d, 1);
}

FinAbGroup theorem_a_groups(std::uint32_t p, std::uint32_t n, std::uint64_t q,
                            std::uint32_t i) {
    if (!is_prime(p)) throw ConfigError("p must be prime");
    if (n < 1) throw ConfigError("n must be >= 1");
    std::uint64_t t = q;
    while (t > 1 && t % p == 0) t /= p;
    if (t != 1 || q < 2) throw ConfigError("q must be a power of p");
    if (i == 0) return fin_ab({}, n + 1); // free over Z[1/p]
    if (i % 2 == 0) return {};
    std::uint32_t j = (i + 1) / 2;
    std::uint64_t d = checked_pow(q, j) - 1;
    return fin_ab_power(d, n + 1);
}

ConjectureReport conjecture_check_k1(const GroupSpec& g, FieldPtr q,
                                     const Budgets& budgets) {
    MackeyPresentation mu = build_mackey_algebra_checked(g, q);
    auto [nu, hom] = build_idle_algebra(mu);
    Filtration filt = nilpotent_filtration(nu);
    std::vector<AlgebraHom> chain;
    for (auto& s : filt.steps) chain.push_back(s.hom);
    ConjectureReport rep;
    rep.predicted = fin_ab_power(q->q() - 1, g.n + 1);
    K1Report r = k1(nu.algebra, budgets, chain.empty() ? nullptr : &chain,
                    presentation_id(nu));
    rep.computed = r.k1;
    rep.method = r.method;
    rep.agree = (r.method == "exhaustive") && (rep.computed == rep.predicted);
    return rep;
}

} // namespace mackeyk
