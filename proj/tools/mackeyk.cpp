// mackeyk: builds cohomological Mackey / idle algebras of C_{p^n} over F_q,
// certifies their nilpotent reductions, and computes K-theory invariants.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mackeyk/errors.hpp"
#include "mackeyk/ktheory.hpp"
#include "mackeyk/mackey.hpp"
#include "mackeyk/serialize.hpp"
#include "mackeyk/util.hpp"

using namespace mackeyk;

namespace {

struct CommonOpts {
    std::uint32_t p = 3;
    std::uint32_t n = 1;
    std::uint64_t q = 0;   // prime power; 0 = p^{q_m}
    std::uint32_t q_m = 1; // extension degree
    std::string variant = "mackey";
    std::uint64_t budget_elems = 1ull << 24;
    std::uint64_t budget_pairs = 1ull << 20;
    unsigned threads = 0;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_variant = true) {
    cmd->add_option("--p", o.p, "prime p of C_{p^n}");
    cmd->add_option("--n", o.n, "exponent n of C_{p^n}");
    cmd->add_option("--q", o.q, "coefficient field order (a power of p)");
    cmd->add_option("--q-m", o.q_m, "coefficient field extension degree m");
    if (with_variant)
        cmd->add_option("--variant", o.variant, "mackey | idle")
            ->check(CLI::IsMember({"mackey", "idle"}));
    cmd->add_option("--budget-elems", o.budget_elems,
                    "element-enumeration budget");
    cmd->add_option("--budget-pairs", o.budget_pairs, "pair-harvest budget");
    cmd->add_option("--threads", o.threads,
                    "worker cap (0 = MACKEYK_THREADS or hardware)");
    cmd->add_option("--out", o.out, "output file (default: stdout)");
    cmd->add_option("--format", o.format, "json | markdown")
        ->check(CLI::IsMember({"json", "markdown"}));
}

FieldPtr coefficient_field(const CommonOpts& o) {
    std::uint32_t m = o.q_m;
    if (o.q != 0) {
        std::uint64_t t = o.q;
        std::uint32_t mm = 0;
        while (t > 1 && t % o.p == 0) {
            t /= o.p;
            ++mm;
        }
        if (t != 1 || mm == 0)
            throw ConfigError("--q must be a positive power of p");
        if (o.q_m != 1 && o.q_m != mm)
            throw ConfigError("--q and --q-m disagree");
        m = mm;
    }
    return make_field(o.p, m);
}

Budgets budgets_of(const CommonOpts& o) {
    if (o.budget_elems == 0 || o.budget_pairs == 0)
        throw ConfigError("budgets must be positive");
    return {o.budget_elems, o.budget_pairs, o.threads};
}

Json config_json(const CommonOpts& o, const FieldPtr& F) {
    return Json{{"p", o.p},
                {"n", o.n},
                {"q", F->q()},
                {"q_m", F->m()},
                {"variant", o.variant},
                {"budget_elems", o.budget_elems},
                {"budget_pairs", o.budget_pairs},
                {"threads", o.threads}};
}

void render_markdown(const Json& j, std::ostream& os, std::string prefix) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            render_markdown(it.value(), os,
                            prefix.empty() ? it.key() : prefix + "." + it.key());
    } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
        for (std::size_t i = 0; i < j.size(); ++i)
            render_markdown(j[i], os, prefix + "[" + std::to_string(i) + "]");
    } else {
        os << "| " << prefix << " | " << j.dump() << " |\n";
    }
}

void emit_report(const Json& report, const CommonOpts& o) {
    std::string text;
    if (o.format == "markdown") {
        std::ostringstream os;
        os << "| field | value |\n|---|---|\n";
        render_markdown(report, os, "");
        text = os.str();
    } else {
        text = report.dump(2) + "\n";
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw ConfigError("cannot open output file: " + o.out);
        f << text;
    }
    std::cout << text;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << text;
}

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

// Builds the requested variant with the dual-route cross-check.
struct Built {
    MackeyPresentation mu;
    MackeyPresentation pres; // the requested variant
    std::vector<AlgebraHom> chain; // pres.algebra -> F_q^{n+1}
};

Built build_variant(const CommonOpts& o, FieldPtr F) {
    GroupSpec g{o.p, o.n};
    Built b;
    b.mu = build_mackey_algebra_checked(g, F);
    if (o.variant == "idle") {
        auto [nu, hom] = build_idle_algebra(b.mu);
        b.pres = nu;
        Filtration filt = nilpotent_filtration(nu);
        for (auto& s : filt.steps) b.chain.push_back(std::move(s.hom));
    } else {
        b.pres = b.mu;
        b.chain = reduction_chain(b.mu);
    }
    return b;
}

int cmd_build(const CommonOpts& o, bool export_only) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    Built b = build_variant(o, F);
    Json pres_json = to_json(b.pres);
    std::string id = presentation_id(b.pres);
    if (export_only) {
        std::string text = pres_json.dump(2) + "\n";
        if (o.out.empty())
            std::cout << text;
        else
            write_file(o.out, text);
        return 0;
    }
    std::string path = o.out;
    if (path.empty()) {
        path = id + ".json";
        for (char& c : path)
            if (c == '(' || c == ')' || c == ',' || c == '=') c = '_';
    }
    write_file(path, pres_json.dump(2) + "\n");
    Json report{{"command", "build"},
                {"config", config_json(o, F)},
                {"results",
                 Json{{"id", id},
                      {"dim", b.pres.algebra->dim},
                      {"routes_agree", true},
                      {"file", path}}},
                {"artifacts", Json{{"algebra_hash", artifact_hash(pres_json)}}},
                {"timing_ms", t.ms()}};
    if (o.format == "markdown") {
        std::ostringstream os;
        os << "| field | value |\n|---|---|\n";
        render_markdown(report, os, "");
        std::cout << os.str();
    } else {
        std::cout << report.dump(2) << "\n";
    }
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    GroupSpec g{o.p, o.n};
    MackeyPresentation mu = build_mackey_algebra_checked(g, F);
    constant_module_check(mu);
    KernelCertificate kc = idlization_kernel(mu);
    auto [nu, hom] = build_idle_algebra(mu);
    constant_module_check(nu);
    Filtration filt = nilpotent_filtration(nu);
    Json steps = Json::array();
    for (const auto& s : filt.steps)
        steps.push_back(Json{{"killed", label_name(s.killed)},
                             {"ideal_dim", s.ideal.rank()},
                             {"nilpotency_degree", s.nilpotency_degree}});
    Json report{
        {"command", "verify"},
        {"config", config_json(o, F)},
        {"certificates",
         Json{{"mu_dim", mu.algebra->dim},
              {"nu_dim", nu.algebra->dim},
              {"constant_module", "pass"},
              {"idlization_kernel",
               Json{{"dim", kc.ideal.rank()},
                    {"nilpotency_degree", kc.nilpotency_degree},
                    {"bound_p_pow_n", checked_pow(o.p, o.n)}}},
              {"filtration",
               Json{{"steps", steps},
                    {"terminal_dim", filt.terminal->dim}}}}},
        {"artifacts",
         Json{{"mu_hash", artifact_hash(to_json(mu))},
              {"nu_hash", artifact_hash(to_json(nu))}}},
        {"timing_ms", t.ms()}};
    emit_report(report, o);
    return 0;
}

int cmd_k0(const CommonOpts& o) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    Built b = build_variant(o, F);
    K0Certificate cert = k0_rank(b.pres, b.chain, budgets_of(o));
    Json report{{"command", "k0"},
                {"config", config_json(o, F)},
                {"results",
                 Json{{"id", presentation_id(b.pres)},
                      {"k0_rank", cert.rank},
                      {"expected", o.n + 1},
                      {"matches_expected", cert.matches_expected},
                      {"idempotents", cert.idempotents.size()},
                      {"method",
                       cert.rank < 0 ? "undecided" : "exhaustive"}}},
                {"artifacts",
                 Json{{"algebra_hash", artifact_hash(to_json(b.pres))}}},
                {"timing_ms", t.ms()}};
    emit_report(report, o);
    return cert.rank < 0 ? 4 : 0;
}

int cmd_k1(const CommonOpts& o) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    Built b = build_variant(o, F);
    K1Report r = k1(b.pres.algebra, budgets_of(o),
                    b.chain.empty() ? nullptr : &b.chain,
                    presentation_id(b.pres));
    Json report{{"command", "k1"},
                {"config", config_json(o, F)},
                {"results", to_json(r)},
                {"artifacts",
                 Json{{"algebra_hash", artifact_hash(to_json(b.pres))}}},
                {"timing_ms", t.ms()}};
    emit_report(report, o);
    return r.method == "exhaustive" ? 0 : 4;
}

int cmd_relk1(const CommonOpts& o) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    GroupSpec g{o.p, o.n};
    MackeyPresentation mu = build_mackey_algebra_checked(g, F);
    auto [nu, hom] = build_idle_algebra(mu);
    std::vector<AlgebraHom> nu_chain;
    {
        Filtration filt = nilpotent_filtration(nu);
        for (auto& s : filt.steps) nu_chain.push_back(std::move(s.hom));
    }
    std::vector<AlgebraHom> mu_chain;
    mu_chain.push_back(hom);
    for (const auto& h : nu_chain) mu_chain.push_back(h);
    RelativeK1Report r = relative_k1(hom, budgets_of(o), &mu_chain, &nu_chain);
    Json matrix = Json::array();
    for (const auto& row : r.induced_matrix) matrix.push_back(row);
    Json report{{"command", "relk1"},
                {"config", config_json(o, F)},
                {"results",
                 Json{{"relative_k1", to_json(r.relative)},
                      {"k1_mu", to_json(r.k1_source)},
                      {"k1_nu", to_json(r.k1_target)},
                      {"surjective", r.surjective},
                      {"induced_matrix", matrix}}},
                {"artifacts",
                 Json{{"mu_hash", artifact_hash(to_json(mu))},
                      {"nu_hash", artifact_hash(to_json(nu))}}},
                {"timing_ms", t.ms()}};
    emit_report(report, o);
    return 0;
}

int cmd_theorem_a(const CommonOpts& o, std::uint32_t i) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    FinAbGroup g = theorem_a_groups(o.p, o.n, F->q(), i);
    Json report{{"command", "theorem-a"},
                {"config", config_json(o, F)},
                {"results",
                 Json{{"i", i},
                      {"group", to_json(g)},
                      {"ring", i == 0 ? "Z[1/" + std::to_string(o.p) + "]"
                                      : "Z"},
                      {"note", "orders q^j - 1 are coprime to p"}}},
                {"timing_ms", t.ms()}};
    emit_report(report, o);
    return 0;
}

int cmd_conjecture(const CommonOpts& o) {
    Timer t;
    FieldPtr F = coefficient_field(o);
    GroupSpec g{o.p, o.n};
    ConjectureReport r = conjecture_check_k1(g, F, budgets_of(o));
    Json report{{"command", "conjecture"},
                {"config", config_json(o, F)},
                {"results",
                 Json{{"computed", to_json(r.computed)},
                      {"predicted", to_json(r.predicted)},
                      {"method", r.method},
                      {"agree", r.agree}}},
                {"timing_ms", t.ms()}};
    emit_report(report, o);
    return r.method == "exhaustive" ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cohomological Mackey / idle algebra workbench for C_{p^n}"};
    app.require_subcommand(1);

    CommonOpts o;
    std::uint32_t theorem_i = 0;

    CLI::App* build = app.add_subcommand("build", "build an algebra (dual-route checked)");
    add_common(build, o);
    CLI::App* export_cmd = app.add_subcommand("export", "emit the algebra JSON");
    add_common(export_cmd, o);
    CLI::App* verify = app.add_subcommand("verify", "certify kernels and the filtration");
    add_common(verify, o, false);
    CLI::App* k0cmd = app.add_subcommand("k0", "K0 rank via idempotent classes");
    add_common(k0cmd, o);
    CLI::App* k1cmd = app.add_subcommand("k1", "K1 via units mod Vaserstein subgroup");
    add_common(k1cmd, o);
    CLI::App* relk1 = app.add_subcommand("relk1", "relative K1 of mu -> nu");
    add_common(relk1, o, false);
    CLI::App* ta = app.add_subcommand("theorem-a", "closed-form away-from-p K-groups");
    add_common(ta, o, false);
    ta->add_option("--i", theorem_i, "K-theory degree")->required();
    CLI::App* conj = app.add_subcommand("conjecture", "K1 of idle vs (Z/(q-1))^{n+1}");
    add_common(conj, o, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build(o, false);
        if (export_cmd->parsed()) return cmd_build(o, true);
        if (verify->parsed()) return cmd_verify(o);
        if (k0cmd->parsed()) return cmd_k0(o);
        if (k1cmd->parsed()) return cmd_k1(o);
        if (relk1->parsed()) return cmd_relk1(o);
        if (ta->parsed()) return cmd_theorem_a(o, theorem_i);
        if (conj->parsed()) return cmd_conjecture(o);
    } catch (const Error& e) {
        // Machine-readable witness on stdout, human line on stderr.
        const char* kind = "config";
        switch (e.kind()) {
        case ErrorKind::route_disagreement: kind = "route_disagreement"; break;
        case ErrorKind::certificate: kind = "certificate"; break;
        case ErrorKind::budget: kind = "budget"; break;
        default: break;
        }
        std::cout << Json{{"error", Json{{"kind", kind},
                                         {"message", e.what()}}}}
                         .dump(2)
                  << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cout << Json{{"error", Json{{"kind", "config"},
                                         {"message", e.what()}}}}
                         .dump(2)
                  << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
