#include "mackeyk/serialize.hpp"

#include "mackeyk/errors.hpp"
#include "mackeyk/util.hpp"

namespace mackeyk {

namespace {

Json coeff_json(const Field& F, Sym s) {
    Json out = Json::array();
    for (std::uint32_t c : F.coeffs(s)) out.push_back(c);
    return out;
}

Sym coeff_from_json(const Field& F, const Json& j) {
    if (!j.is_array() || j.size() != F.m())
        throw ConfigError("coefficient vector must have length m");
    std::vector<std::int64_t> c;
    for (const auto& e : j) {
        std::int64_t v = e.get<std::int64_t>();
        if (v < 0 || v >= static_cast<std::int64_t>(F.p()))
            throw ConfigError("coefficient out of range [0, p)");
        c.push_back(v);
    }
    return F.from_coeffs(c);
}

} // namespace

Json to_json(const FieldSpec& spec) {
    return Json{{"p", spec.p}, {"m", spec.m}, {"modulus", spec.modulus}};
}

FieldSpec field_spec_from_json(const Json& j) {
    FieldSpec spec;
    spec.p = j.at("p").get<std::uint32_t>();
    spec.m = j.at("m").get<std::uint32_t>();
    spec.modulus = j.at("modulus").get<std::vector<std::uint32_t>>();
    return spec;
}

Json to_json(const Algebra& a) {
    const Field& F = *a.field;
    Json unit = Json::array();
    for (Sym s : a.unit) unit.push_back(coeff_json(F, s));
    Json table = Json::array();
    for (std::size_t i = 0; i < a.dim; ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < a.dim; ++j) {
            Json cell = Json::array();
            const Sym* e = a.entry(i, j);
            for (std::size_t k = 0; k < a.dim; ++k)
                cell.push_back(coeff_json(F, e[k]));
            row.push_back(std::move(cell));
        }
        table.push_back(std::move(row));
    }
    return Json{{"field", to_json(F.spec())},
                {"dim", a.dim},
                {"labels", a.labels},
                {"unit", std::move(unit)},
                {"table", std::move(table)}};
}

AlgebraPtr algebra_from_json(const Json& j) {
    FieldPtr F = make_field(field_spec_from_json(j.at("field")));
    std::size_t dim = j.at("dim").get<std::size_t>();
    auto labels = j.at("labels").get<std::vector<std::string>>();
    if (labels.size() != dim) throw ConfigError("labels/dim mismatch");
    const Json& ju = j.at("unit");
    if (!ju.is_array() || ju.size() != dim)
        throw ConfigError("unit/dim mismatch");
    Vec unit(dim);
    for (std::size_t k = 0; k < dim; ++k) unit[k] = coeff_from_json(*F, ju[k]);
    const Json& jt = j.at("table");
    if (!jt.is_array() || jt.size() != dim)
        throw ConfigError("table/dim mismatch");
    std::vector<Sym> table(dim * dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!jt[i].is_array() || jt[i].size() != dim)
            throw ConfigError("table/dim mismatch");
        for (std::size_t jj = 0; jj < dim; ++jj) {
            const Json& cell = jt[i][jj];
            if (!cell.is_array() || cell.size() != dim)
                throw ConfigError("table/dim mismatch");
            for (std::size_t k = 0; k < dim; ++k)
                table[(i * dim + jj) * dim + k] =
                    coeff_from_json(*F, cell[k]);
        }
    }
    AlgebraPtr a = make_algebra(std::move(F), std::move(labels),
                                std::move(table), std::move(unit));
    ValidationReport rep = validate_algebra(*a);
    if (!rep.ok)
        throw CertificateError("loaded algebra failed validation: " +
                               rep.message);
    return a;
}

Json to_json(const MackeyPresentation& pres) {
    Json j = to_json(*pres.algebra);
    j["group"] = Json{{"p", pres.group.p}, {"n", pres.group.n}};
    j["variant"] = variant_name(pres.variant);
    Json ls = Json::array();
    for (const SpanLabel& l : pres.labels)
        ls.push_back(Json{{"left", l.left},
                          {"mid", l.mid},
                          {"right", l.right},
                          {"twist", l.twist}});
    j["labels_structured"] = std::move(ls);
    return j;
}

MackeyPresentation presentation_from_json(const Json& j) {
    MackeyPresentation pres;
    pres.group.p = j.at("group").at("p").get<std::uint32_t>();
    pres.group.n = j.at("group").at("n").get<std::uint32_t>();
    std::string v = j.at("variant").get<std::string>();
    if (v == "full") pres.variant = Variant::full;
    else if (v == "cohomological") pres.variant = Variant::cohomological;
    else if (v == "idle") pres.variant = Variant::idle;
    else throw ConfigError("unknown variant: " + v);
    pres.algebra = algebra_from_json(j);
    for (const auto& l : j.at("labels_structured"))
        pres.labels.push_back({l.at("left").get<std::uint32_t>(),
                               l.at("mid").get<std::uint32_t>(),
                               l.at("right").get<std::uint32_t>(),
                               l.at("twist").get<std::uint64_t>()});
    if (pres.labels.size() != pres.algebra->dim)
        throw ConfigError("labels_structured/dim mismatch");
    return pres;
}

Json to_json(const FinAbGroup& g) {
    return Json{{"invariant_factors", g.invariant_factors},
                {"free_rank", g.free_rank},
                {"pretty", g.to_string()}};
}

FinAbGroup fin_ab_from_json(const Json& j) {
    return fin_ab(j.at("invariant_factors").get<std::vector<std::uint64_t>>(),
                  j.at("free_rank").get<std::uint64_t>());
}

Json to_json(const K1Report& r) {
    return Json{{"algebra", r.algebra_id},
                {"method", r.method},
                {"k1", to_json(r.k1)},
                {"unit_order", r.unit_order},
                {"vaserstein_subgroup_order", r.vaserstein_subgroup_order}};
}

std::string canonical_dump(const Json& j) { return j.dump(); }

std::string artifact_hash(const Json& j) {
    return hex64(fnv1a64(canonical_dump(j)));
}

} // namespace mackeyk
