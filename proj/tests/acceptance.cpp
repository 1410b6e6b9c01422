// Acceptance suite: runs every criterion end to end and prints one
// pass/fail line per criterion.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "bcontact/catalog.hpp"

using namespace bct;

namespace {

const double PI = 3.14159265358979323846;

struct Criterion {
    const char* label;
    bool pass = true;
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failures.push_back(what);
        }
        CHECK(ok);
    }
    ~Criterion() {
        std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", label);
        for (const auto& f : failures) std::printf("        %s\n", f.c_str());
        std::fflush(stdout);
    }
};

Expr random_coeff(std::mt19937& rng, const Chart& c) {
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<int> ci(0, c.dim() - 1);
    std::uniform_int_distribution<int> num(-2, 2);
    switch (pick(rng)) {
        case 0: return Expr::num(num(rng));
        case 1: return Expr::sym(c.coords()[ci(rng)]);
        case 2: return Expr::fn(K::Sin, Expr::sym(c.coords()[ci(rng)]));
        case 3: return Expr::fn(K::Cos, Expr::sym(c.coords()[ci(rng)]));
        case 4: return simplify(Expr::sym(c.coords()[ci(rng)]) * Expr::sym(c.coords()[ci(rng)]));
        default: return simplify(Expr::num(num(rng)) + Expr::sym(c.coords()[ci(rng)]));
    }
}

Alt random_form(std::mt19937& rng, const Chart& c, int deg) {
    Alt a(c, deg, Variance::Co);
    for (uint32_t m = 0; m < (1u << c.dim()); ++m) {
        if (std::popcount(m) != deg) continue;
        std::uniform_int_distribution<int> keep(0, 2);
        if (keep(rng) == 0) continue;
        a.add(m, random_coeff(rng, c));
    }
    a.simplify_inplace();
    return a;
}

Chart inv_chart() {
    return Chart({"t", "theta", "phi"}, {{-1, 1}, {0, 2 * PI}, {-PI / 2, 3 * PI / 2}});
}
BForm inv_form() { return parse_form("cos(phi)*D(t) + sin(phi)*D(theta)", inv_chart()); }

} // namespace

TEST_CASE("criterion 1: exterior calculus (d^2 = 0, decomposition round trip)") {
    Criterion cr{"criterion 1  exterior calculus: d^2 = 0 and decomposition round trip"};
    for (const auto& [name, a] : catalog_contact_forms()) {
        cr.require(alt_struct_zero(ext_d(ext_d(a))), "d^2 != 0 on " + name);
        auto [alpha, beta] = decompose(a);
        cr.require(alt_struct_zero(reassemble(alpha, beta) - a),
                   "decomposition round trip failed on " + name);
    }
    std::mt19937 rng(2026);
    Chart c({"t", "x", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    Chart c2({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 2);
    for (int i = 0; i < 50; ++i) {
        for (int deg : {1, 2}) {
            cr.require(alt_struct_zero(ext_d(ext_d(random_form(rng, c, deg)))),
                       "d^2 != 0 on a random form (m=1)");
            cr.require(alt_struct_zero(ext_d(ext_d(random_form(rng, c2, deg)))),
                       "d^2 != 0 on a random form (m=2)");
        }
    }
}

TEST_CASE("criterion 2: reeb closed forms and back-substitution") {
    Criterion cr{"criterion 2  Reeb closed forms and residual < 1e-8 on every catalog form"};
    GridCfg cfg;
    {
        const auto& e = catalog_get("extended_phase_space_n1");
        BMulti r = reeb(e.form(), cfg);
        cr.require(alt_struct_zero(r - parse_vector("V(t)", e.chart)), "Reeb != d/dt");
    }
    {
        const auto& e = catalog_get("darboux_singular");
        BMulti r = reeb(e.form(), cfg);
        cr.require(alt_struct_zero(r - parse_vector("Zv", e.chart)), "Reeb != zeta");
    }
    {
        const auto& e = catalog_get("s2xs1");
        BMulti r = reeb(e.form(), cfg);
        cr.require(
            alt_struct_zero(r - parse_vector("sin(phi)*V(theta) + cos(phi)*Zv", e.chart)),
            "Reeb != sin(phi) dtheta + cos(phi) h dh");
    }
    for (const auto& [name, a] : catalog_contact_forms()) {
        BMulti r = reeb(a, cfg);
        double worst = sup_on_grid(interior(r, ext_d(a)), cfg);
        auto rep = equal_on_grid(pairing(r, a), Expr::num(1), a.chart(), 200, 1e-8, cfg);
        worst = std::max(worst, rep.max_discrepancy);
        cr.require(worst < 1e-8, "back-substitution residual " + std::to_string(worst) +
                                     " on " + name);
    }
}

TEST_CASE("criterion 3: dimension-3 theorem") {
    Criterion cr{"criterion 3  Theta|_Z symplectic, i_R Theta = s du, two singular clusters"};
    GridCfg cfg;
    for (const auto& name : catalog_names()) {
        const auto& e = catalog_get(name);
        if (e.form_literal.empty() || e.chart.dim() != 3 || !e.chart.singular()) continue;
        auto t = theta_form(e.form(), cfg);
        cr.require(t.nondegenerate, "Theta|_Z degenerate on " + name);
        cr.require(t.hamiltonian_ok && t.sign != 0,
                   "i_R Theta != s du on " + name + " (residual " +
                       std::to_string(t.residual) + ")");
    }
    const auto& e = catalog_get("s2xs1");
    auto t = theta_form(e.form(), cfg);
    cr.require(struct_eq(t.theta_on_z.coeff(0b110), Expr::num(-1)),
               "Theta|_Z != dphi ^ dtheta on s2xs1");
    auto zc = reeb_zero_clusters_on_z(e.form(), 48, cfg);
    cr.require(zc.count >= 2, "fewer than two singular Reeb clusters on s2xs1");
}

TEST_CASE("criterion 4: jacobi verification") {
    Criterion cr{"criterion 4  Jacobi identities for every catalog form; lemma direction"};
    GridCfg cfg;
    for (const auto& [name, a] : catalog_contact_forms()) {
        auto J = jacobi_from_contact(a, cfg);
        cr.require(J.record.res_compat < 1e-7,
                   "compatibility residual " + std::to_string(J.record.res_compat) + " on " +
                       name);
        cr.require(J.record.res_invariance < 1e-7,
                   "invariance residual " + std::to_string(J.record.res_invariance) + " on " +
                       name);
    }
    // Appendix lemma direction: vanishing discriminant => identities hold
    {
        Chart c({"x1", "y1", "x2", "y2", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
                std::string("z"), 1);
        BForm a = parse_form("D(x1) + y1*B + x2*D(y2)", c);
        BMulti X = parse_vector("y1*V(y1) + y2*V(y2)", c);
        auto res = jacobi_via_liouville(a, X, cfg);
        cr.require(res.discriminant_sup < 1e-8, "discriminant does not vanish");
        cr.require(res.identities_hold, "identities fail with vanishing discriminant");
        cr.require(res.lemma_consistent, "lemma inconsistent");
    }
}

TEST_CASE("criterion 5: poissonization") {
    Criterion cr{"criterion 5  Poissonization identities and top power"};
    GridCfg cfg;
    for (const char* name : {"s2xs1", "extended_phase_space_n1", "darboux_singular"}) {
        auto J = jacobi_from_contact(catalog_get(name).form(), cfg);
        auto P = poissonize(J, cfg);
        cr.require(P.res_poisson < 1e-7,
                   std::string("[Pi,Pi] residual on ") + name + ": " +
                       std::to_string(P.res_poisson));
        cr.require(P.res_homogeneous < 1e-7,
                   std::string("homogeneity residual on ") + name + ": " +
                       std::to_string(P.res_homogeneous));
        cr.require(P.res_top_power < 1e-7,
                   std::string("top-power residual on ") + name + ": " +
                       std::to_string(P.res_top_power));
    }
}

TEST_CASE("criterion 6: b-jacobi transversality by order") {
    Criterion cr{"criterion 6  transversality holds exactly for m=1 pairs, fails for m=2"};
    GridCfg cfg;
    for (const auto& name : catalog_names()) {
        const auto& e = catalog_get(name);
        if (e.form_literal.empty() || !e.chart.singular()) continue;
        auto J = jacobi_from_contact(e.form(), cfg);
        auto t = bjacobi_transversality(J, cfg, 1e-6);
        if (e.chart.order() == 1)
            cr.require(t.transversal, "m=1 pair not transversal: " + name);
        else
            cr.require(!t.transversal, "m>=2 pair transversal: " + name);
    }
}

TEST_CASE("criterion 7: symplectization and contraction round trip") {
    Criterion cr{"criterion 7  R^4 slices, S^3 contraction, Reeb orthogonality"};
    GridCfg cfg;
    for (const char* name : {"r4_slice_regular", "r4_slice_singular", "s3_contraction"}) {
        auto rep = catalog_verify(name, cfg);
        cr.require(rep.all_pass, std::string("entry failed: ") + name);
    }
    auto S = symplectize(catalog_get("extended_phase_space_n1").form(), cfg);
    cr.require(S.closed && S.res_top_power < 1e-8 && S.res_liouville < 1e-8 && S.recovers_alpha,
               "symplectization checks failed");
}

TEST_CASE("criterion 8: desingularization of the m=2 torus form") {
    Criterion cr{"criterion 8  desingularization: contact, agreement, identity, convergence"};
    GridCfg cfg;
    BForm a = catalog_get("torus3_m2").form();
    for (double eps : {0.2, 0.1, 0.05}) {
        auto P = ProfileFn::build(ProfileKind::DesingEven, 1, eps);
        auto D = desingularize(a, P, cfg);
        cr.require(D.report.contact_verdict == ContactVerdict::Contact,
                   "alpha_eps not contact at eps = " + std::to_string(eps));
        cr.require(D.report.agreement_max < 1e-10,
                   "agreement beyond 2 eps fails at eps = " + std::to_string(eps));
        cr.require(D.report.identity_rel_max < 1e-8,
                   "c(alpha_eps) = f' z^2 c(alpha) fails at eps = " + std::to_string(eps));
    }
    auto conv = convergence_report(a, {0.2, 0.1, 0.05}, 0.05, cfg);
    cr.require(conv.monotone, "discrepancies not monotone");
    cr.require(conv.rows[0].sup_per_order[0] > conv.rows[1].sup_per_order[0] &&
                   conv.rows[1].sup_per_order[0] > conv.rows[2].sup_per_order[0],
               "C^0 discrepancies not strictly decreasing");
    cr.require(conv.rows[0].sup_per_order[1] > conv.rows[1].sup_per_order[1] &&
                   conv.rows[1].sup_per_order[1] > conv.rows[2].sup_per_order[1],
               "C^1 discrepancies not strictly decreasing");
    // at the default fixed region the forms coincide identically
    auto conv2 = convergence_report(a, {0.2, 0.1}, 0.5, cfg);
    for (const auto& r : conv2.rows)
        for (double v : r.sup_per_order)
            cr.require(v < 1e-12, "nonzero discrepancy on the coincidence region");
}

TEST_CASE("criterion 9: folded output of desing-odd") {
    Criterion cr{"criterion 9  desing-odd on an m=1 form: transversal fold at z = 0"};
    GridCfg cfg;
    BForm a = catalog_get("torus3_m1").form();
    auto P = ProfileFn::build(ProfileKind::DesingOdd, 0, 0.1);
    auto D = desingularize(a, P, cfg);
    cr.require(D.report.folded_ok, "folded_check failed");
    auto fr = folded_check(D.form, "z", cfg);
    cr.require(fr.folds.size() == 1, "expected one fold component");
    if (!fr.folds.empty()) {
        cr.require(std::abs(fr.folds[0].position) <= 2.0 * 2.0 / 96.0,
                   "fold locus not within one grid cell of z = 0");
        cr.require(fr.folds[0].min_grad >= 1e-6, "fold gradient below 1e-6");
    }
}

TEST_CASE("criterion 10: singularization") {
    Criterion cr{"criterion 10  sing-even / sing-odd outputs and the orientation obstruction"};
    GridCfg cfg;
    BForm a = inv_form();
    {
        auto P = ProfileFn::build(ProfileKind::SingEven, 1, 0.1);
        auto S = singularize(a, P, "t", cfg);
        cr.require(S.forms.size() == 1 && S.forms[0].first.order() == 2,
                   "sing-even output is not b^2");
        cr.require(S.contact[0].verdict == ContactVerdict::Contact,
                   "sing-even output not contact");
        cr.require(S.convexity.cls == ConvexityClass::Convex, "sing-even output not convex");
        cr.require(S.agreement_max < 1e-10, "sing-even output disagrees beyond 2 eps");
        cr.require(S.critical_positions.size() == 1 &&
                       std::abs(S.critical_positions[0]) < 0.01,
                   "critical set is not {t = 0}");
    }
    {
        double eps = 0.1;
        auto P = ProfileFn::build(ProfileKind::SingOdd, 0, eps);
        auto S = singularize(a, P, "t", cfg);
        cr.require(S.forms.size() == 2, "sing-odd must produce two sub-chart forms");
        for (const auto& r : S.contact)
            cr.require(r.verdict == ContactVerdict::Contact, "sing-odd output not contact");
        cr.require(S.critical_positions.size() == 2, "expected two critical components");
        if (S.critical_positions.size() == 2) {
            cr.require(std::abs(S.critical_positions[0] + 3 * eps / 8) < 0.01 &&
                           std::abs(S.critical_positions[1] - 3 * eps / 8) < 0.01,
                       "critical components not at +-3 eps / 8");
        }
    }
    cr.require(orientation_obstruction_check(1, 1, cfg).verdict ==
                   ObstructionVerdict::Obstructed,
               "(odd, one component) must be obstructed");
    cr.require(orientation_obstruction_check(2, 1, cfg).verdict ==
                   ObstructionVerdict::Admissible,
               "(even, one component) must be admissible");
    cr.require(orientation_obstruction_check(1, 2, cfg).verdict ==
                   ObstructionVerdict::Admissible,
               "(odd, two components) must be admissible");
    cr.require(orientation_obstruction_check(3, 1, cfg).verdict ==
                   ObstructionVerdict::Obstructed,
               "(m=3, one component) must be obstructed");
}

TEST_CASE("criterion 11: corollary pipeline") {
    Criterion cr{"criterion 11  sing-odd then desing-odd yields two fold components"};
    GridCfg cfg;
    double eps = 0.1;
    auto S = singularize(inv_form(), ProfileFn::build(ProfileKind::SingOdd, 0, eps), "t", cfg);
    cr.require(S.forms.size() == 2, "singularization did not produce two components");
    auto Pd = ProfileFn::build(ProfileKind::DesingOdd, 0, eps / 32);
    int folds = 0;
    for (const auto& [chart, form] : S.forms) {
        auto D = desingularize(form, Pd, cfg);
        cr.require(D.report.folded_ok, "component did not desingularize to a folded form");
        auto fr = folded_check(D.form, "t", cfg);
        folds += static_cast<int>(fr.folds.size());
    }
    cr.require(folds == 2, "expected exactly two fold components, got " + std::to_string(folds));
}

TEST_CASE("criterion 12: catalog regression") {
    Criterion cr{"criterion 12  catalog verify --all passes"};
    for (const auto& rep : catalog_verify_all(GridCfg{})) {
        for (const auto& c : rep.checks)
            cr.require(c.pass, rep.entry + ": " + c.name + " (" + c.detail + ")");
    }
}
