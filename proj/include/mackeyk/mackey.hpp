#ifndef MACKEYK_MACKEY_HPP
#define MACKEYK_MACKEY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mackeyk/algebra.hpp"
#include "mackeyk/gf.hpp"

namespace mackeyk {

// The ambient group C_{p^n}.  Subgroups form the chain C_{p^0} < ... <
// C_{p^n} and are referred to by their exponent 0..n.
struct GroupSpec {
    std::uint32_t p = 2;
    std::uint32_t n = 1;
    bool operator==(const GroupSpec&) const = default;
};
void validate_group(const GroupSpec& g);

// Basis symbol T^{C_p^left}_{C_p^mid} c_{g^twist} R^{C_p^right}_{C_p^mid}:
// the operation taking level-`right` values to level-`left` values.
// Composition is right to left.
struct SpanLabel {
    std::uint32_t left = 0;
    std::uint32_t mid = 0;
    std::uint32_t right = 0;
    std::uint64_t twist = 0; // residue mod p^{n - max(left, right)}

    bool operator==(const SpanLabel&) const = default;
    auto key() const { return std::tuple(left, right, mid, twist); }
};
std::string label_name(const SpanLabel& l);

enum class Variant { full, cohomological, idle };
std::string variant_name(Variant v);

// Deterministic basis order: by (left, right, mid descending, twist).
std::vector<SpanLabel> span_basis(const GroupSpec& g, Variant variant);

// Formal F_p-linear combination; coefficients are residues in [1, p).
using SpanSum = std::vector<std::pair<SpanLabel, std::uint32_t>>;

// Composition x . y in the span calculus of C_{p^n} (full variant): zero
// unless right(x) = left(y); otherwise the middle pullback decomposes into
// orbits indexed by coset representatives, twists adding along the way.
SpanSum compose_spans(const GroupSpec& g, const SpanLabel& x,
                      const SpanLabel& y);

struct MackeyPresentation {
    GroupSpec group;
    Variant variant = Variant::cohomological;
    AlgebraPtr algebra;
    std::vector<SpanLabel> labels; // parallel to algebra basis
};

enum class Route { a, b };

// Cohomological Mackey algebra of C_{p^n} over F_q (q a power of p).
// Route a: structure constants directly on the cohomological span basis.
// Route b: full span algebra, then quotient by the ideal generated by the
// transfer-restriction loops T^H_K R^H_K (K < H).
MackeyPresentation build_mackey_algebra(const GroupSpec& g, FieldPtr q,
                                        Route route);
// Builds both routes and fails with RouteDisagreement on the first
// differing product.
MackeyPresentation build_mackey_algebra_checked(const GroupSpec& g, FieldPtr q);

// Throws RouteDisagreement naming the first differing product.
void compare_routes(const MackeyPresentation& a, const MackeyPresentation& b);

// Full span algebra over F_p (route b's starting point; also used in tests).
MackeyPresentation build_full_span_algebra(const GroupSpec& g);

// Quotient by the two-sided ideal generated by all c_{g^t} - 1.
std::pair<MackeyPresentation, AlgebraHom>
build_idle_algebra(const MackeyPresentation& coh);

// Kernel of the idle projection with nilpotency and centrality certificates.
struct KernelCertificate {
    IdealBasis ideal;
    unsigned nilpotency_degree = 0;
};
KernelCertificate idlization_kernel(const MackeyPresentation& coh);

// One step of the reduction chain: kill a surviving off-diagonal symbol of
// maximal index gap (restrictions before transfers, then lexicographic).
struct FiltrationStep {
    SpanLabel killed;
    IdealBasis ideal;
    unsigned nilpotency_degree = 0;
    AlgebraHom hom;
};

struct Filtration {
    std::vector<FiltrationStep> steps;
    AlgebraPtr terminal; // certified split commutative, one idempotent per level
    std::vector<SpanLabel> terminal_labels;
};
Filtration nilpotent_filtration(const MackeyPresentation& idle);

// The homs of a filtration plus (for a cohomological presentation) the idle
// projection in front: a chain from pres.algebra down to F_q^{n+1}.
std::vector<AlgebraHom> reduction_chain(const MackeyPresentation& pres);

// Certifies that the constant module (each level F_q, restrictions identity,
// transfers zero, conjugations identity) is a genuine module: the action
// matrices respect every structure constant.  Throws CertificateError.
void constant_module_check(const MackeyPresentation& pres);

std::string presentation_id(const MackeyPresentation& pres);

} // namespace mackeyk

#endif
