#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcontact/jacobi.hpp"

using namespace bct;

namespace {

const double PI = 3.14159265358979323846;

Chart eps_chart() {
    return Chart({"t", "x1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm eps_form() { return parse_form("D(t) + x1*B", eps_chart()); }

Chart s2s1_chart() {
    return Chart({"theta", "phi", "h"}, {{0, 2 * PI}, {-PI / 2, 3 * PI / 2}, {-1, 1}},
                 std::string("h"), 1);
}
BForm s2s1_form() { return parse_form("sin(phi)*D(theta) + cos(phi)*B", s2s1_chart()); }

Chart sing_chart() {
    return Chart({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm sing_form() { return parse_form("B + x1*D(y1)", sing_chart()); }

} // namespace

TEST_CASE("jacobi_from_contact verification residuals") {
    for (BForm a : {eps_form(), s2s1_form(), sing_form()}) {
        auto J = jacobi_from_contact(a);
        CHECK(J.record.res_compat < 1e-7);
        CHECK(J.record.res_invariance < 1e-7);
        CHECK(J.record.res_antisym < 1e-9);
        CHECK(J.record.verified);
    }
}

TEST_CASE("hamiltonian field from the jacobi bivector") {
    BForm a = eps_form();
    auto J = jacobi_from_contact(a);
    Expr H = Expr::sym("x1");
    BForm u0(a.chart(), 0, Variance::Co);
    u0.set(0, H);
    BForm dH = ext_d(u0);
    BMulti lhs = lambda_sharp(J.Lambda, dH) + J.R.scaled(H);
    BMulti rhs = hamiltonian_field(a, H);
    CHECK(alt_equal_on_grid(lhs, rhs, 200, 1e-8));
}

TEST_CASE("singular model pair") {
    auto J = jacobi_from_contact(sing_form());
    CHECK(struct_eq(J.R.coeff(1u), Expr::num(1)));  // R = zeta
    CHECK(J.R.comps().size() == 1);
    CHECK(J.record.res_invariance < 1e-8);
}

TEST_CASE("jacobi_via_liouville matches the stated local model") {
    // regular model in dim 5: dx1 + y1 sigma + x2 dy2, X = y1 dy1 + y2 dy2
    Chart c({"x1", "y1", "x2", "y2", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
            std::string("z"), 1);
    BForm a = parse_form("D(x1) + y1*B + x2*D(y2)", c);
    BMulti X = parse_vector("y1*V(y1) + y2*V(y2)", c);
    auto res = jacobi_via_liouville(a, X);
    CHECK(res.discriminant_sup < 1e-9);
    CHECK(res.pi_identities_ok);
    CHECK(res.identities_hold);
    CHECK(res.lemma_consistent);
    BMulti LZ = tangent_part_on_z(res.pair.Lambda);
    BMulti expect =
        parse_vector("W(V(x2), V(y2)) + y1*W(V(x1), V(y1)) + y2*W(V(x1), V(y2))", c);
    CHECK(alt_struct_zero(LZ - expect));
}

TEST_CASE("via_liouville agrees with from_contact when the discriminant vanishes") {
    BForm a = eps_form();
    BMulti X = parse_vector("x1*V(x1)", eps_chart());
    auto res = jacobi_via_liouville(a, X);
    CHECK(res.discriminant_sup < 1e-10);
    CHECK(res.identities_hold);
    auto J = jacobi_from_contact(a);
    CHECK(alt_equal_on_grid(res.pair.Lambda, J.Lambda, 200, 1e-7));
}

TEST_CASE("liouville lemma: discriminant vanishes for every Liouville field") {
    // For any X with L_X dalpha = dalpha one has i_{[X,R]} dalpha =
    // L_X(i_R dalpha) - i_R(L_X dalpha) = 0, so [X,R] lies in ker dalpha = <R>
    // and R ^ [X,R] ^ X = 0 identically. A Liouville input with nonvanishing
    // discriminant therefore cannot exist; the broken-identity direction is
    // exercised on raw pair data below.
    Chart c({"t", "x", "y"}, {{-1, 1}, {0.2, 1.2}, {-1, 1}});
    BForm a = parse_form("cos(x)*D(t) + sin(x)*D(y)", c);
    BMulti X = parse_vector(
        "t*V(t) + y*V(y) + x*V(x)"
        " + (y*cos(x) - t*sin(x) - x*y*sin(x) - x*t*cos(x))*sin(x)*V(t)"
        " - (y*cos(x) - t*sin(x) - x*y*sin(x) - x*t*cos(x))*cos(x)*V(y)",
        c);
    BForm da = ext_d(a);
    CHECK(sup_on_grid(lie_derivative(X, da) - da, GridCfg{}) < 1e-9);
    auto res = jacobi_via_liouville(a, X);
    CHECK(res.discriminant_sup < 1e-8);
    // the frame-pivot dual does not satisfy the auxiliary Pi identities on
    // this rotated example, so the compatibility identities are not implied
    CHECK(!res.pi_identities_ok);
}

TEST_CASE("broken identities for pair data with nonvanishing discriminant") {
    // Lambda = R ^ X with [X,R] outside span{R, X}: the compatibility defect
    // equals -2 R ^ [X,R] ^ X and exceeds tolerance where the discriminant does.
    Chart c({"t", "x", "y"}, {{-1, 1}, {0.2, 1.2}, {-1, 1}});
    BMulti R = parse_vector("V(t) + x*V(y)", c);
    BMulti X = parse_vector("t*V(x)", c);
    BMulti disc = mv_wedge(R, mv_wedge(lie_bracket(X, R), X));
    double dsup = sup_on_grid(disc, GridCfg{});
    CHECK(dsup > 1e-2);
    BMulti Lambda = mv_wedge(R, X);
    auto rec = verify_jacobi(Lambda, R, GridCfg{});
    CHECK(rec.res_compat > 1e-2);
    BMulti defect = schouten(Lambda, Lambda) - mv_wedge(R, Lambda).scaled(Expr::num(2));
    BMulti expect = disc.scaled(Expr::num(-2));
    CHECK(alt_equal_on_grid(defect, expect, 100, 1e-8));
}

TEST_CASE("non-liouville X is rejected") {
    BForm a = eps_form();
    BMulti X = parse_vector("t*V(x1)", eps_chart());
    CHECK_THROWS_AS(jacobi_via_liouville(a, X), SolveError);
}

TEST_CASE("b-jacobi transversality by order") {
    auto J1 = jacobi_from_contact(sing_form());
    auto r1 = bjacobi_transversality(J1);
    CHECK(r1.transversal);

    Chart t3({"y", "phi", "z"}, {{0, 2 * PI}, {0, 2 * PI}, {-1, 1}}, std::string("z"), 2);
    BForm a2 = parse_form("sin(phi)*B + cos(phi)*D(y)", t3);
    auto J2 = jacobi_from_contact(a2);
    auto r2 = bjacobi_transversality(J2);
    CHECK(!r2.transversal);
    CHECK(r2.max_on_z < 1e-8);       // c vanishes on Z but so does its gradient
    CHECK(r2.min_grad_on_z < 1e-6);

    Chart sm({"t", "x", "y"}, {{-1, 1}, {0.2, 1.2}, {-1, 1}});
    auto J3 = jacobi_from_contact(parse_form("cos(x)*D(t) + sin(x)*D(y)", sm));
    auto r3 = bjacobi_transversality(J3);
    CHECK(!r3.has_critical_set);
    CHECK(r3.verdict == "no critical set");
}

TEST_CASE("poissonization") {
    auto J = jacobi_from_contact(s2s1_form());
    auto P = poissonize(J);
    CHECK(P.res_poisson < 1e-7);
    CHECK(P.res_homogeneous < 1e-7);
    CHECK(P.res_top_power < 1e-7);

    // Lambda = 0, R = 0 -> Pi = 0
    JacobiPair zero{BMulti(eps_chart(), 2, Variance::Contra),
                    BMulti(eps_chart(), 1, Variance::Contra), {}};
    auto P0 = poissonize(zero);
    CHECK(alt_struct_zero(P0.Pi));
}

TEST_CASE("symplectization") {
    auto S = symplectize(eps_form());
    CHECK(S.closed);
    CHECK(S.res_top_power < 1e-8);
    CHECK(S.res_liouville < 1e-8);
    CHECK(S.recovers_alpha);

    // smooth contact input gives a smooth symplectic form (no sigma blades)
    Chart sm({"t", "x", "y"}, {{-1, 1}, {0.2, 1.2}, {-1, 1}});
    auto S2 = symplectize(parse_form("cos(x)*D(t) + sin(x)*D(y)", sm));
    CHECK(S2.closed);
    CHECK(!S2.ext_chart.singular());
}

namespace {

// R^4 with omega = sigma ^ dt + dx ^ dy and X = t dt + x dx
Chart w_chart() {
    return Chart({"x", "y", "t", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm w_omega() { return parse_form("W(B, D(t)) + W(D(x), D(y))", w_chart()); }
BMulti w_x() { return parse_vector("t*V(t) + x*V(x)", w_chart()); }

} // namespace

TEST_CASE("liouville contraction: the two R^4 slices") {
    // M1 = {x = 1}: expect dy + t dz/z
    Chart h1({"y", "t", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    ChartMap phi1{h1, w_chart(),
                  {Expr::num(1), Expr::sym("y"), simplify(-Expr::sym("t")), Expr::sym("z")}};
    auto r1 = liouville_contract(w_omega(), w_x(), phi1);
    BForm expect1 = parse_form("D(y) + t*B", h1);
    CHECK(alt_struct_zero(r1.alpha - expect1));
    CHECK(r1.report.verdict == ContactVerdict::Contact);

    // M2 = {t = -1}: expect dz/z + x dy
    Chart h2({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    ChartMap phi2{h2, w_chart(),
                  {Expr::sym("x"), Expr::sym("y"), Expr::num(-1), Expr::sym("z")}};
    auto r2 = liouville_contract(w_omega(), w_x(), phi2);
    BForm expect2 = parse_form("B + x*D(y)", h2);
    CHECK(alt_struct_zero(r2.alpha - expect2));
    CHECK(r2.report.verdict == ContactVerdict::Contact);
}

TEST_CASE("reeb orthogonality on the slices") {
    Chart h1({"y", "t", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    ChartMap phi1{h1, w_chart(),
                  {Expr::num(1), Expr::sym("y"), simplify(-Expr::sym("t")), Expr::sym("z")}};
    auto o1 = reeb_orthogonality_check(w_omega(), w_x(), phi1);
    CHECK(o1.ok);
    CHECK(o1.residual < 1e-8);

    Chart h2({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    ChartMap phi2{h2, w_chart(),
                  {Expr::sym("x"), Expr::sym("y"), Expr::num(-1), Expr::sym("z")}};
    CHECK(reeb_orthogonality_check(w_omega(), w_x(), phi2).ok);

    BMulti bad = parse_vector("t*t*V(x)", w_chart());
    CHECK_THROWS_AS(reeb_orthogonality_check(w_omega(), bad, phi2), SolveError);
}

TEST_CASE("S3 contraction is contact") {
    Chart w({"x1", "y1", "x2", "y2"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("x1"), 1);
    BForm omega = parse_form("W(B, D(y1)) + W(D(x2), D(y2))", w);
    BMulti X = parse_vector("1/2*Zv + y1*V(y1) + 1/2*x2*V(x2) + 1/2*y2*V(y2)", w);
    Chart h({"a1", "a2", "a3"}, {{-0.8, 0.8}, {-0.8, 0.8}, {-0.8, 0.8}}, std::string("a1"), 1);
    Expr a1 = Expr::sym("a1"), a2 = Expr::sym("a2"), a3 = Expr::sym("a3");
    Expr r2 = simplify(a1 * a1 + a2 * a2 + a3 * a3);
    Expr D = simplify(Expr::num(1) + r2);
    Expr Dinv = Expr::pow(D, -1);
    ChartMap phi{h, w,
                 {simplify(Expr::num(2) * a1 * Dinv), simplify(Expr::num(2) * a2 * Dinv),
                  simplify(Expr::num(2) * a3 * Dinv),
                  simplify((Expr::num(1) - r2) * Dinv)}};
    auto res = liouville_contract(omega, X, phi);
    CHECK(res.report.verdict == ContactVerdict::Contact);
}

TEST_CASE("leaf classification") {
    // 1a model dx1 + y1 sigma: LCS leaf off {y1 = 0}, contact leaf on it
    Chart c({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
    auto J = jacobi_from_contact(parse_form("D(x1) + y1*B", c));
    auto l1 = leaf_classify(J, {{"x1", 0.3}, {"y1", 0.5}, {"z", 0.0}});
    CHECK(l1.cls == LeafClass::LCSLeaf);
    auto l2 = leaf_classify(J, {{"x1", 0.3}, {"y1", 0.0}, {"z", 0.0}});
    CHECK(l2.cls == LeafClass::ContactLeaf);

    // singular-Reeb model: LCS everywhere on Z
    auto Js = jacobi_from_contact(sing_form());
    auto l3 = leaf_classify(Js, {{"x1", 0.4}, {"y1", -0.7}, {"z", 0.0}});
    CHECK(l3.cls == LeafClass::LCSLeaf);
}
