#include "bcontact/catalog.hpp"

#include <cmath>
#include <map>

namespace bct {

namespace {

const double PI = 3.14159265358979323846;

using Checks = std::vector<CheckOutcome>;

CheckOutcome chk(std::string name, bool pass, std::string detail = "") {
    return {std::move(name), pass, std::move(detail)};
}

std::string point_str(const Point& p) {
    std::string s = "(";
    for (const auto& [k, v] : p) s += k + "=" + std::to_string(v) + " ";
    s += ")";
    return s;
}

CheckOutcome expect_contact(const std::string& label, const BForm& a, const GridCfg& cfg) {
    auto r = is_contact(a, cfg);
    return chk(label, r.verdict == ContactVerdict::Contact,
               "verdict: " + to_string(r.verdict) + ", min |c| = " + std::to_string(r.min_off));
}

CheckOutcome expect_reeb(const BForm& a, const std::string& literal, const GridCfg& cfg) {
    BMulti r = reeb(a, cfg);
    BMulti expect = parse_vector(literal, a.chart());
    bool ok = alt_struct_zero(r - expect);
    return chk("reeb equals " + literal, ok, ok ? "" : "got " + to_literal(r));
}

CheckOutcome expect_reeb_residual(const BForm& a, const GridCfg& cfg) {
    BMulti r = reeb(a, cfg);
    BForm da = ext_d(a);
    double worst = sup_on_grid(interior(r, da), cfg);
    auto rep = equal_on_grid(pairing(r, a), Expr::num(1), a.chart(), cfg.n_off, 1e-8, cfg);
    worst = std::max(worst, rep.max_discrepancy);
    return chk("reeb back-substitution", worst < 1e-8, "residual " + std::to_string(worst));
}

CheckOutcome expect_class(const BForm& a, const Point& p, PointClassKind kind,
                          const GridCfg& cfg) {
    auto pc = classify_point(a, p, cfg);
    return chk("class " + to_string(kind) + " at " + point_str(p), pc.kind == kind,
               "got " + to_string(pc.kind));
}

CheckOutcome expect_jacobi(const BForm& a, const GridCfg& cfg) {
    auto J = jacobi_from_contact(a, cfg);
    bool ok = J.record.res_compat < 1e-7 && J.record.res_invariance < 1e-7;
    return chk("jacobi identities", ok,
               "compat " + std::to_string(J.record.res_compat) + ", invariance " +
                   std::to_string(J.record.res_invariance));
}

CheckOutcome expect_transversal(const BForm& a, bool expect, const GridCfg& cfg) {
    auto J = jacobi_from_contact(a, cfg);
    auto t = bjacobi_transversality(J, cfg);
    return chk(std::string("b-jacobi transversality ") + (expect ? "holds" : "fails"),
               t.transversal == expect, t.verdict);
}

CheckOutcome expect_theta(const BForm& a, const GridCfg& cfg) {
    auto t = theta_form(a, cfg);
    return chk("theta form symplectic and hamiltonian",
               t.nondegenerate && t.hamiltonian_ok && t.sign != 0,
               "sign " + std::to_string(t.sign) + ", residual " + std::to_string(t.residual));
}

// ---- the R^4 slice data shared by two entries ----
Chart w4_chart() {
    return Chart({"x", "y", "t", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm w4_omega() { return parse_form("W(B, D(t)) + W(D(x), D(y))", w4_chart()); }
BMulti w4_liouville() { return parse_vector("t*V(t) + x*V(x)", w4_chart()); }

// ---- Moebius ball data ----
Chart moebius_source() {
    return Chart({"r", "th", "w"}, {{-0.08, 0.08}, {1.2, 1.9}, {0.4, 1.2}}, std::string("r"), 1);
}
Chart moebius_target() {
    return Chart({"zz", "t", "a"}, {{-1, 1}, {-2, 2}, {-2, 2}}, std::string("zz"), 1);
}
ChartMap moebius_map() {
    Chart s = moebius_source();
    Expr r = Expr::sym("r"), th = Expr::sym("th"), w = Expr::sym("w");
    Expr one = Expr::num(1);
    Expr x1 = simplify((one - r) * Expr::fn(K::Cos, th));
    Expr x2 = simplify((one - r) * Expr::fn(K::Sin, th) * Expr::fn(K::Cos, w));
    Expr x3 = simplify((one - r) * Expr::fn(K::Sin, th) * Expr::fn(K::Sin, w));
    Expr den = simplify((x1 - one) * (x1 - one) + x2 * x2 + x3 * x3);
    Expr dinv = Expr::pow(den, -1);
    // 1 - |x|^2 = 1 - (1 - r)^2 = r (2 - r)
    Expr zz = simplify(r * (Expr::num(2) - r) * dinv);
    Expr t = simplify(Expr::num(2) * x2 * dinv);
    Expr a = simplify(Expr::num(2) * x3 * dinv);
    return ChartMap{s, moebius_target(), {zz, t, a}};
}

// ---- S^3 contraction data ----
Chart s3_ambient() {
    return Chart({"x1", "y1", "x2", "y2"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
                 std::string("x1"), 1);
}
Chart s3_chart() {
    return Chart({"a1", "a2", "a3"}, {{-0.8, 0.8}, {-0.8, 0.8}, {-0.8, 0.8}},
                 std::string("a1"), 1);
}
ChartMap s3_map() {
    Expr a1 = Expr::sym("a1"), a2 = Expr::sym("a2"), a3 = Expr::sym("a3");
    Expr r2 = simplify(a1 * a1 + a2 * a2 + a3 * a3);
    Expr dinv = Expr::pow(simplify(Expr::num(1) + r2), -1);
    return ChartMap{s3_chart(), s3_ambient(),
                    {simplify(Expr::num(2) * a1 * dinv), simplify(Expr::num(2) * a2 * dinv),
                     simplify(Expr::num(2) * a3 * dinv), simplify((Expr::num(1) - r2) * dinv)}};
}

std::map<std::string, CatalogEntry>& registry() {
    static std::map<std::string, CatalogEntry> reg = [] {
        std::map<std::string, CatalogEntry> r;
        auto add = [&](CatalogEntry e) { r.emplace(e.name, std::move(e)); };

        {
            Chart c({"t", "x1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "extended_phase_space_n1";
            e.note = "contact time direction over the singular cotangent line; the Reeb field "
                     "is regular on the critical slice";
            e.chart = c;
            e.form_literal = "D(t) + x1*B";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("D(t) + x1*B", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "V(t)", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_class(a, {{"t", 0.3}, {"x1", 0.0}, {"z", 0.0}},
                                           PointClassKind::RegularReebSingularXi, cfg));
                out.push_back(expect_class(a, {{"t", 0.3}, {"x1", 0.5}, {"z", 0.0}},
                                           PointClassKind::RegularReebRegularXi, cfg));
                out.push_back(expect_theta(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                out.push_back(expect_transversal(a, true, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"t", "x1", "x2", "y2", "z"},
                    {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "extended_phase_space_n2";
            e.note = "five-dimensional extended phase space with one smooth symplectic pair";
            e.chart = c;
            e.form_literal = "D(t) + x1*B + x2*D(y2)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("D(t) + x1*B + x2*D(y2)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "V(t)", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "darboux_singular";
            e.note = "singular Reeb local model; the kernel keeps full rank on the critical "
                     "slice, which is a single conformally symplectic leaf";
            e.chart = c;
            e.form_literal = "B + x1*D(y1)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("B + x1*D(y1)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "Zv", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_class(a, {{"x1", 0.4}, {"y1", -0.2}, {"z", 0.0}},
                                           PointClassKind::SingularReeb, cfg));
                out.push_back(expect_jacobi(a, cfg));
                out.push_back(expect_transversal(a, true, cfg));
                auto J = jacobi_from_contact(a, cfg);
                auto leaf = leaf_classify(J, {{"x1", 0.4}, {"y1", -0.7}, {"z", 0.0}});
                out.push_back(chk("LCS leaf on Z", leaf.cls == LeafClass::LCSLeaf,
                                  "residual " + std::to_string(leaf.residual)));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "darboux_regular_1a";
            e.note = "regular Reeb model whose kernel degenerates along {y1 = 0}; the leaf "
                     "type switches between contact and conformally symplectic there";
            e.chart = c;
            e.form_literal = "D(x1) + y1*B";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("D(x1) + y1*B", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "V(x1)", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_class(a, {{"x1", 0.1}, {"y1", 0.0}, {"z", 0.0}},
                                           PointClassKind::RegularReebSingularXi, cfg));
                out.push_back(expect_class(a, {{"x1", 0.1}, {"y1", 0.6}, {"z", 0.0}},
                                           PointClassKind::RegularReebRegularXi, cfg));
                out.push_back(expect_theta(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                auto J = jacobi_from_contact(a, cfg);
                auto l1 = leaf_classify(J, {{"x1", 0.3}, {"y1", 0.5}, {"z", 0.0}});
                out.push_back(chk("LCS leaf off {y1 = 0}", l1.cls == LeafClass::LCSLeaf,
                                  "residual " + std::to_string(l1.residual)));
                auto l2 = leaf_classify(J, {{"x1", 0.3}, {"y1", 0.0}, {"z", 0.0}});
                out.push_back(chk("contact leaf on {y1 = 0}", l2.cls == LeafClass::ContactLeaf,
                                  "residual " + std::to_string(l2.residual)));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "darboux_regular_1b";
            e.note = "regular Reeb model with regular kernel at the origin";
            e.chart = c;
            e.form_literal = "D(x1) + (1 + y1)*B";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("D(x1) + (1 + y1)*B", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_class(a, {{"x1", 0.0}, {"y1", 0.0}, {"z", 0.0}},
                                           PointClassKind::RegularReebRegularXi, cfg));
                out.push_back(expect_jacobi(a, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"theta", "phi", "h"}, {{0, 2 * PI}, {-PI / 2, 3 * PI / 2}, {-1, 1}},
                    std::string("h"), 1);
            CatalogEntry e;
            e.name = "s2xs1";
            e.note = "compact product example: height-angle data on the two-sphere times a "
                     "circle; both local models appear on one connected critical component";
            e.chart = c;
            e.form_literal = "sin(phi)*D(theta) + cos(phi)*B";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("sin(phi)*D(theta) + cos(phi)*B", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "sin(phi)*V(theta) + cos(phi)*Zv", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                auto t = theta_form(a, cfg);
                bool theta_ok = t.nondegenerate && t.hamiltonian_ok &&
                                struct_eq(t.theta_on_z.coeff(0b110), Expr::num(-1));
                out.push_back(chk("theta on Z equals dphi ^ dtheta", theta_ok,
                                  "sign " + std::to_string(t.sign)));
                auto zc = reeb_zero_clusters_on_z(a, 48, cfg);
                out.push_back(chk("two clusters of singular Reeb points", zc.count == 2,
                                  "clusters: " + std::to_string(zc.count)));
                out.push_back(expect_class(a, {{"theta", 1.0}, {"phi", PI / 2}, {"h", 0.0}},
                                           PointClassKind::RegularReebSingularXi, cfg));
                out.push_back(expect_class(a, {{"theta", 1.0}, {"phi", 0.0}, {"h", 0.0}},
                                           PointClassKind::SingularReeb, cfg));
                out.push_back(expect_jacobi(a, cfg));
                out.push_back(expect_transversal(a, true, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"y", "phi", "z"}, {{0, 2 * PI}, {0, 2 * PI}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "torus3_m1";
            e.note = "unit cotangent fibre data of the singular two-torus, chart-local "
                     "presentation with the defining coordinate replacing the angle whose "
                     "sine cuts the two critical circles (multi-component structure lives in "
                     "the other sub-chart)";
            e.chart = c;
            e.form_literal = "sin(phi)*B + cos(phi)*D(y)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("sin(phi)*B + cos(phi)*D(y)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "sin(phi)*Zv + cos(phi)*V(y)", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                out.push_back(expect_transversal(a, true, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"y", "phi", "z"}, {{0, 2 * PI}, {0, 2 * PI}, {-1, 1}}, std::string("z"), 2);
            CatalogEntry e;
            e.name = "torus3_m2";
            e.note = "order-2 variant of the chart-local torus data; the desingularization "
                     "and convergence sweeps run against this entry";
            e.chart = c;
            e.form_literal = "sin(phi)*B + cos(phi)*D(y)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("sin(phi)*B + cos(phi)*D(y)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                out.push_back(expect_transversal(a, false, cfg));
                auto conv = convexity_classify(a, cfg);
                out.push_back(chk("convex", conv.cls == ConvexityClass::Convex,
                                  to_string(conv.cls)));
                // the Reeb z-component is g / f' after desingularization, g = sin(phi)
                auto P = ProfileFn::build(ProfileKind::DesingEven, 1, 0.1);
                auto D = desingularize(a, P, cfg);
                BMulti Re = reeb(D.form, cfg);
                Expr fprime = Expr::hybrid(P, 0, 1, Expr::sym("z"));
                Expr expect_z = simplify(Expr::fn(K::Sin, Expr::sym("phi")) *
                                         Expr::pow(fprime, -1));
                Expr got = Re.coeff(1u << D.chart.index_of("z"));
                auto r = equal_on_grid(got, expect_z, D.chart, cfg.n_off, 1e-8, cfg,
                                       Regime::Plain);
                out.push_back(chk("desingularized reeb z-component is g / f'", r.equal,
                                  "max dev " + std::to_string(r.max_discrepancy)));
                return out;
            };
            add(e);
        }
        {
            CatalogEntry e;
            e.name = "moebius_ball";
            e.note = "ball model with the boundary sphere as critical set, produced by the "
                     "inverse generalized Moebius map from the half-space model (spherical "
                     "shell sub-chart; the puncture stays outside the box)";
            e.chart = moebius_source();
            e.run_checks = [](const GridCfg& cfg) {
                Checks out;
                ChartMap phi = moebius_map();
                BForm target = parse_form("D(t) + a*B", moebius_target());
                BForm pulled = pullback(phi, target);
                double mn = 1e300;
                for (Regime reg : {Regime::OffZ, Regime::OnZ}) {
                    Expr cc = contact_coeff(pulled);
                    for (const auto& p :
                         sample_points(phi.source, cfg, reg,
                                       reg == Regime::OffZ ? cfg.n_off : cfg.n_on)) {
                        try {
                            mn = std::min(mn, std::abs(eval(cc, p)));
                        } catch (const EvalError&) {
                        }
                    }
                }
                out.push_back(chk("pulled-back coefficient nonvanishing", mn > cfg.tol,
                                  "min |c| = " + std::to_string(mn)));
                BForm lhs = pullback(phi, ext_d(target));
                BForm rhs = ext_d(pulled);
                out.push_back(chk("pullback commutes with d",
                                  alt_equal_on_grid(lhs, rhs, 80, 1e-8, cfg),
                                  ""));
                out.push_back(expect_reeb_residual(pulled, cfg));
                return out;
            };
            add(e);
        }
        {
            CatalogEntry e;
            e.name = "s3_contraction";
            e.note = "three-sphere slice of the singular plane times a symplectic plane, "
                     "contracted along a radial Liouville field; stereographic chart with "
                     "the equatorial two-sphere as critical set";
            e.chart = s3_chart();
            e.run_checks = [](const GridCfg& cfg) {
                Checks out;
                BForm omega = parse_form("W(B, D(y1)) + W(D(x2), D(y2))", s3_ambient());
                BMulti X = parse_vector("1/2*Zv + y1*V(y1) + 1/2*x2*V(x2) + 1/2*y2*V(y2)",
                                        s3_ambient());
                auto res = liouville_contract(omega, X, s3_map(), cfg);
                out.push_back(chk("contracted form is contact",
                                  res.report.verdict == ContactVerdict::Contact,
                                  to_string(res.report.verdict)));
                auto orth = reeb_orthogonality_check(omega, X, s3_map(), cfg);
                out.push_back(chk("reeb orthogonality", orth.ok,
                                  "residual " + std::to_string(orth.residual)));
                return out;
            };
            add(e);
        }
        {
            CatalogEntry e;
            e.name = "r4_slice_regular";
            e.note = "hyperplane slice of the singular plane times a symplectic plane that "
                     "meets the regular local model";
            e.chart = Chart({"y", "t", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            e.run_checks = [e](const GridCfg& cfg) {
                Checks out;
                Chart h = e.chart;
                ChartMap phi{h, w4_chart(),
                             {Expr::num(1), Expr::sym("y"), simplify(-Expr::sym("t")),
                              Expr::sym("z")}};
                auto res = liouville_contract(w4_omega(), w4_liouville(), phi, cfg);
                BForm expect = parse_form("D(y) + t*B", h);
                out.push_back(chk("contraction equals D(y) + t*B",
                                  alt_struct_zero(res.alpha - expect),
                                  to_literal(res.alpha)));
                out.push_back(chk("contact", res.report.verdict == ContactVerdict::Contact,
                                  to_string(res.report.verdict)));
                auto orth = reeb_orthogonality_check(w4_omega(), w4_liouville(), phi, cfg);
                out.push_back(chk("reeb orthogonality", orth.ok,
                                  "residual " + std::to_string(orth.residual)));
                return out;
            };
            add(e);
        }
        {
            CatalogEntry e;
            e.name = "r4_slice_singular";
            e.note = "hyperplane slice of the same data meeting the singular local model";
            e.chart = Chart({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            e.run_checks = [e](const GridCfg& cfg) {
                Checks out;
                Chart h = e.chart;
                ChartMap phi{h, w4_chart(),
                             {Expr::sym("x"), Expr::sym("y"), Expr::num(-1), Expr::sym("z")}};
                auto res = liouville_contract(w4_omega(), w4_liouville(), phi, cfg);
                BForm expect = parse_form("B + x*D(y)", h);
                out.push_back(chk("contraction equals B + x*D(y)",
                                  alt_struct_zero(res.alpha - expect),
                                  to_literal(res.alpha)));
                out.push_back(chk("contact", res.report.verdict == ContactVerdict::Contact,
                                  to_string(res.report.verdict)));
                auto orth = reeb_orthogonality_check(w4_omega(), w4_liouville(), phi, cfg);
                out.push_back(chk("reeb orthogonality", orth.ok,
                                  "residual " + std::to_string(orth.residual)));
                return out;
            };
            add(e);
        }
        {
            Chart c({"t", "x1", "p", "q", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
                    std::string("z"), 1);
            CatalogEntry e;
            e.name = "product_contact_symplectic";
            e.note = "singular contact base times an exact symplectic factor, glued by "
                     "adding the primitive";
            e.chart = c;
            e.form_literal = "D(t) + x1*B + p*D(q)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("D(t) + x1*B + p*D(q)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                return out;
            };
            add(e);
        }
        {
            Chart c({"t", "x", "y"}, {{-1, 1}, {0.2, 1.2}, {-1, 1}});
            CatalogEntry e;
            e.name = "smooth_rotating";
            e.note = "smooth contact form with rotating coefficients; exercises the "
                     "smooth-chart code paths (no critical set)";
            e.chart = c;
            e.form_literal = "cos(x)*D(t) + sin(x)*D(y)";
            e.run_checks = [c](const GridCfg& cfg) {
                BForm a = parse_form("cos(x)*D(t) + sin(x)*D(y)", c);
                Checks out;
                out.push_back(expect_contact("contact", a, cfg));
                out.push_back(expect_reeb(a, "cos(x)*V(t) + sin(x)*V(y)", cfg));
                out.push_back(expect_reeb_residual(a, cfg));
                out.push_back(expect_jacobi(a, cfg));
                auto J = jacobi_from_contact(a, cfg);
                auto t = bjacobi_transversality(J, cfg);
                out.push_back(chk("no critical set", t.verdict == "no critical set", t.verdict));
                auto fr = folded_check(a, "x", cfg);
                out.push_back(chk("no fold", fr.verdict == "contact everywhere, no fold",
                                  fr.verdict));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x1", "x2"}, {{-1, 1}, {-1, 1}});
            CatalogEntry e;
            e.name = "appendixB_homogeneous_2q";
            e.note = "even-dimensional homogeneous Poisson block of the local splitting";
            e.chart = c;
            e.run_checks = [c](const GridCfg& cfg) {
                Checks out;
                BMulti L = parse_vector("W(V(x2), V(x1))", c);
                BMulti Z = parse_vector("x2*V(x2)", c);
                out.push_back(chk("poisson", sup_on_grid(schouten(L, L), cfg) < 1e-7, ""));
                out.push_back(chk("homogeneous",
                                  sup_on_grid(schouten(Z, L) + L, cfg) < 1e-7, ""));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x0", "x1", "x2"}, {{-1, 1}, {-1, 1}, {-1, 1}});
            CatalogEntry e;
            e.name = "appendixB_2q1_model";
            e.note = "odd-dimensional Jacobi block of the local splitting";
            e.chart = c;
            e.run_checks = [c](const GridCfg& cfg) {
                Checks out;
                BMulti L = parse_vector("x2*W(V(x0), V(x2)) - W(V(x1), V(x2))", c);
                BMulti R = parse_vector("V(x0)", c);
                auto rec = verify_jacobi(L, R, cfg);
                out.push_back(chk("jacobi identities",
                                  rec.res_compat < 1e-7 && rec.res_invariance < 1e-7,
                                  "compat " + std::to_string(rec.res_compat) + ", invariance " +
                                      std::to_string(rec.res_invariance)));
                return out;
            };
            add(e);
        }
        {
            Chart c({"x0", "x1", "x2", "y", "z"},
                    {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
            CatalogEntry e;
            e.name = "appendixB_assembled_2q1";
            e.note = "product assembly of the odd block with a singular homogeneous Poisson "
                     "factor; equals the Jacobi structure of the matching contact form";
            e.chart = c;
            e.form_literal = "D(x0) + y*B + x1*D(x2)";
            e.run_checks = [c](const GridCfg& cfg) {
                Checks out;
                BForm a = parse_form("D(x0) + y*B + x1*D(x2)", c);
                auto J = jacobi_from_contact(a, cfg);
                out.push_back(chk("jacobi identities of the assembled pair",
                                  J.record.res_compat < 1e-7 && J.record.res_invariance < 1e-7,
                                  "compat " + std::to_string(J.record.res_compat)));
                // assembled product formula: odd block + singular Poisson block + R ^ Z_N
                BMulti assembled = parse_vector(
                    "x1*W(V(x0), V(x1)) + W(V(x1), V(x2)) - W(Zv, V(y)) + y*W(V(x0), V(y))", c);
                out.push_back(chk("matches the splitting formula",
                                  alt_equal_on_grid(J.Lambda, assembled, 120, 1e-7, cfg),
                                  "got " + to_literal(J.Lambda)));
                return out;
            };
            add(e);
        }
        return r;
    }();
    return reg;
}

} // namespace

std::vector<std::string> catalog_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

const CatalogEntry& catalog_get(const std::string& name) {
    auto it = registry().find(name);
    if (it == registry().end()) throw Error("unknown catalog entry '" + name + "'");
    return it->second;
}

VerifyReport catalog_verify(const std::string& name, const GridCfg& cfg) {
    const CatalogEntry& e = catalog_get(name);
    VerifyReport rep;
    rep.entry = name;
    rep.checks = e.run_checks(cfg);
    for (const auto& c : rep.checks) rep.all_pass &= c.pass;
    return rep;
}

std::vector<VerifyReport> catalog_verify_all(const GridCfg& cfg) {
    std::vector<VerifyReport> out;
    for (const auto& n : catalog_names()) out.push_back(catalog_verify(n, cfg));
    return out;
}

std::vector<std::pair<std::string, BForm>> catalog_contact_forms() {
    std::vector<std::pair<std::string, BForm>> out;
    for (const auto& [name, e] : registry()) {
        if (!e.form_literal.empty()) out.push_back({name, e.form()});
    }
    // derived contact forms: the Moebius pullback and the S^3 contraction
    out.push_back({"moebius_ball(pulled back)",
                   pullback(moebius_map(), parse_form("D(t) + a*B", moebius_target()))});
    {
        BForm omega = parse_form("W(B, D(y1)) + W(D(x2), D(y2))", s3_ambient());
        BMulti X =
            parse_vector("1/2*Zv + y1*V(y1) + 1/2*x2*V(x2) + 1/2*y2*V(y2)", s3_ambient());
        out.push_back(
            {"s3(contracted)", liouville_contract(omega, X, s3_map(), GridCfg{}).alpha});
    }
    return out;
}

} // namespace bct
