#ifndef MACKEYK_SERIALIZE_HPP
#define MACKEYK_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "mackeyk/algebra.hpp"
#include "mackeyk/gf.hpp"
#include "mackeyk/ktheory.hpp"
#include "mackeyk/mackey.hpp"

namespace mackeyk {

using Json = nlohmann::json;

// {"p": int, "m": int, "modulus": [int]}
Json to_json(const FieldSpec& spec);
FieldSpec field_spec_from_json(const Json& j);

// {"field": FieldSpec, "dim": int, "labels": [string], "unit": [coeff],
//  "table": [[[coeff]]]} with coeff the m-entry coefficient vector of a
// field element.  Round trips are bit-exact; loading re-validates.
Json to_json(const Algebra& a);
AlgebraPtr algebra_from_json(const Json& j);

// Algebra JSON plus {"group": {"p","n"}, "variant", "labels_structured"}.
Json to_json(const MackeyPresentation& pres);
MackeyPresentation presentation_from_json(const Json& j);

Json to_json(const FinAbGroup& g);
FinAbGroup fin_ab_from_json(const Json& j);

Json to_json(const K1Report& r);

// Canonical dump (sorted keys, no whitespace variance) and its FNV-1a hash.
std::string canonical_dump(const Json& j);
std::string artifact_hash(const Json& j);

} // namespace mackeyk

#endif
