#ifndef MACKEYK_KTHEORY_HPP
#define MACKEYK_KTHEORY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mackeyk/algebra.hpp"
#include "mackeyk/mackey.hpp"

namespace mackeyk {

// Finite abelian group in invariant-factor form d_1 | d_2 | ... (each >= 2,
// ascending), plus a free rank for K_0-style answers.
struct FinAbGroup {
    std::vector<std::uint64_t> invariant_factors;
    std::uint64_t free_rank = 0;

    bool trivial() const { return invariant_factors.empty() && free_rank == 0; }
    std::uint64_t order() const; // torsion order (free_rank must be 0)
    std::string to_string() const;
    bool operator==(const FinAbGroup&) const = default;
};

// Validates the divisibility chain and entries >= 2.
FinAbGroup fin_ab(std::vector<std::uint64_t> invariant_factors,
                  std::uint64_t free_rank = 0);
// (Z/d)^{copies} in invariant-factor form; d == 1 collapses to trivial.
FinAbGroup fin_ab_power(std::uint64_t d, std::uint32_t copies);

struct Budgets {
    std::uint64_t elements = 1ull << 24; // element-enumeration budget
    std::uint64_t pairs = 1ull << 20;    // pair-harvest budget
    unsigned threads = 0;                // 0 = MACKEYK_THREADS or hardware
};

struct UnitGroup {
    AlgebraPtr alg;
    std::vector<std::uint64_t> elements; // ascending element indices
    std::uint64_t order() const { return elements.size(); }
};

// All invertible elements by exhaustive scan.  When a nilpotent reduction
// chain is supplied the group is recomputed as unit-fiber cosets and the two
// enumerations are certified equal.
UnitGroup unit_group(AlgebraPtr a, const Budgets& budgets,
                     const std::vector<AlgebraHom>* chain = nullptr);

struct VasersteinResult {
    std::vector<std::uint64_t> elements; // subgroup, ascending element indices
    bool exhaustive = true; // false: harvest truncated, subgroup is a lower bound
    std::uint64_t pairs_harvested = 0;
};

// Normal subgroup generated by (1+xy)(1+yx)^{-1} over all algebra pairs
// within budget, together with all unit commutators.
VasersteinResult vaserstein_normal_subgroup(const UnitGroup& u,
                                            const Budgets& budgets);

struct K1Report {
    std::string algebra_id;
    std::string method; // "exhaustive" | "undecided"
    FinAbGroup k1;
    std::uint64_t unit_order = 0;
    std::uint64_t vaserstein_subgroup_order = 0;
};

K1Report k1(AlgebraPtr a, const Budgets& budgets,
            const std::vector<AlgebraHom>* chain = nullptr,
            const std::string& algebra_id = "algebra");

// Induced-map data for K1 along a nilpotent-kernel surjection.
struct RelativeK1Report {
    FinAbGroup relative; // kernel of K1(source) -> K1(target)
    FinAbGroup k1_source;
    FinAbGroup k1_target;
    bool surjective = false;
    // matrix[i][j]: exponent of the j-th target generator in the image of
    // the i-th source generator (generators in invariant-factor order).
    std::vector<std::vector<std::uint64_t>> induced_matrix;
};

RelativeK1Report relative_k1(const AlgebraHom& hom, const Budgets& budgets,
                             const std::vector<AlgebraHom>* source_chain = nullptr,
                             const std::vector<AlgebraHom>* target_chain = nullptr);

struct K0Certificate {
    std::vector<Vec> idempotents;       // complete orthogonal family
    std::vector<std::vector<Tri>> classes; // pairwise isomorphism matrix
    int rank = -1;                      // -1 when undecided
    bool matches_expected = false;      // rank == n+1
};

K0Certificate k0_rank(const MackeyPresentation& pres,
                      const std::vector<AlgebraHom>& chain,
                      const Budgets& budgets);

// Closed forms: K_{2j-1}(F_q) = Z/(q^j - 1), K_0 = Z, K_{even > 0} = 0.
FinAbGroup quillen_k(std::uint64_t q, std::uint32_t i);

// Away-from-p K-groups of the constant functor: free of rank n+1 at i = 0
// (over Z[1/p]), (Z/(q^j - 1))^{n+1} at i = 2j-1, trivial otherwise.
FinAbGroup theorem_a_groups(std::uint32_t p, std::uint32_t n, std::uint64_t q,
                            std::uint32_t i);

struct ConjectureReport {
    FinAbGroup computed;  // K1 of the idle algebra
    FinAbGroup predicted; // (Z/(q-1))^{n+1}
    std::string method;   // "exhaustive" | "undecided"
    bool agree = false;
};

ConjectureReport conjecture_check_k1(const GroupSpec& g, FieldPtr q,
                                     const Budgets& budgets);

} // namespace mackeyk

#endif
