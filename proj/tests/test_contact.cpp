#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcontact/contact.hpp"

using namespace bct;

namespace {

const double PI = 3.14159265358979323846;

// extended phase space, n = 1: dt + x1 dz/z on (t, x1, z)
Chart eps_chart() {
    return Chart({"t", "x1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm eps_form() { return parse_form("D(t) + x1*B", eps_chart()); }

// S^2 x S^1: sin(phi) dtheta + cos(phi) dh/h
Chart s2s1_chart() {
    return Chart({"theta", "phi", "h"}, {{0, 2 * PI}, {-PI / 2, 3 * PI / 2}, {-1, 1}},
                 std::string("h"), 1);
}
BForm s2s1_form() { return parse_form("sin(phi)*D(theta) + cos(phi)*B", s2s1_chart()); }

// singular Darboux model, n = 1: dz/z + x1 dy1
Chart sing_chart() {
    return Chart({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);
}
BForm sing_form() { return parse_form("B + x1*D(y1)", sing_chart()); }

} // namespace

TEST_CASE("contact coefficients") {
    CHECK(struct_eq(contact_coeff(eps_form()), Expr::num(1)));

    // 3-torus local model: sin(phi) sigma + cos(phi) dy on (y, phi, z), m = 2
    Chart t3({"y", "phi", "z"}, {{0, 2 * PI}, {0, 2 * PI}, {-1, 1}}, std::string("z"), 2);
    BForm a = parse_form("sin(phi)*B + cos(phi)*D(y)", t3);
    Expr c = contact_coeff(a);
    CHECK(std::abs(std::abs(eval(c, {{"y", 0.3}, {"phi", 1.0}, {"z", 0.2}})) - 1.0) < 1e-12);

    CHECK(struct_eq(contact_coeff(parse_form("D(t)", eps_chart())), Expr::num(0)));
}

TEST_CASE("is_contact verdicts") {
    auto r1 = is_contact(s2s1_form());
    CHECK(r1.verdict == ContactVerdict::Contact);
    CHECK(r1.min_off > 0.5);  // |c| = 1 everywhere here

    auto r2 = is_contact(eps_form());
    CHECK(r2.verdict == ContactVerdict::Contact);

    // u sigma with u = z: c = 0 identically in dim 3
    BForm degenerate = parse_form("z*B", sing_chart());
    auto r3 = is_contact(degenerate);
    CHECK(r3.verdict == ContactVerdict::NotContact);
}

TEST_CASE("reeb closed forms") {
    // extended phase space: R = d/dt
    BMulti r1 = reeb(eps_form());
    CHECK(struct_eq(r1.coeff(1u << 1), Expr::num(1)));  // t is slot 1
    CHECK(r1.comps().size() == 1);

    // singular model: R = zeta
    BMulti r2 = reeb(sing_form());
    CHECK(struct_eq(r2.coeff(1u), Expr::num(1)));
    CHECK(r2.comps().size() == 1);

    // S2 x S1: R = sin(phi) d/dtheta + cos(phi) zeta
    BMulti r3 = reeb(s2s1_form());
    Chart c = s2s1_chart();
    CHECK(struct_eq(r3.coeff(1u), parse_scalar("cos(phi)", c)));
    CHECK(struct_eq(r3.coeff(1u << 1), parse_scalar("sin(phi)", c)));
    CHECK(struct_eq(r3.coeff(1u << 2), Expr::num(0)));
}

TEST_CASE("reeb back-substitution residuals") {
    GridCfg cfg;
    for (auto [alpha, name] : {std::pair{eps_form(), "eps"}, {s2s1_form(), "s2s1"},
                               {sing_form(), "sing"}}) {
        BMulti R = reeb(alpha, cfg);
        BForm da = ext_d(alpha);
        BForm ra = interior(R, da);
        CHECK(alt_equal_on_grid(ra, BForm(alpha.chart(), 1, Variance::Co), 200, 1e-8));
        Expr one = pairing(R, alpha);
        auto rep = equal_on_grid(one, Expr::num(1), alpha.chart(), 200, 1e-8);
        CHECK(rep.equal);
    }
}

TEST_CASE("hamiltonian field") {
    BForm a = eps_form();
    // H = 1 reproduces the Reeb field
    BMulti x1 = hamiltonian_field(a, Expr::num(1));
    BMulti r = reeb(a);
    CHECK(alt_struct_zero(x1 - r));

    // H = 0 gives the zero field
    BMulti x0 = hamiltonian_field(a, Expr::num(0));
    CHECK(alt_struct_zero(x0));

    // H = x1: verify the defining equations on a grid
    Expr H = Expr::sym("x1");
    BMulti xh = hamiltonian_field(a, H);
    BForm da = ext_d(a);
    Expr pa = pairing(xh, a);
    CHECK(equal_on_grid(pa, H, a.chart(), 200, 1e-8).equal);
    BForm u0(a.chart(), 0, Variance::Co);
    u0.set(0, H);
    BForm dH = ext_d(u0);
    BForm rhs = dH.scaled(Expr::num(-1)) + a.scaled(field_apply(r, H));
    CHECK(alt_equal_on_grid(interior(xh, da), rhs, 200, 1e-8));
}

TEST_CASE("point classification") {
    // extended phase space: any Z-point with x1 = 0 is class 1a
    auto pc = classify_point(eps_form(), {{"t", 0.3}, {"x1", 0.0}, {"z", 0.0}});
    CHECK(pc.kind == PointClassKind::RegularReebSingularXi);
    auto pc2 = classify_point(eps_form(), {{"t", 0.3}, {"x1", 0.5}, {"z", 0.0}});
    CHECK(pc2.kind == PointClassKind::RegularReebRegularXi);

    // S2 x S1 at cos(phi) = 0: 1a; at sin(phi) = 0: singular Reeb
    auto pa = classify_point(s2s1_form(), {{"theta", 1.0}, {"phi", PI / 2}, {"h", 0.0}});
    CHECK(pa.kind == PointClassKind::RegularReebSingularXi);
    auto pb = classify_point(s2s1_form(), {{"theta", 1.0}, {"phi", 0.0}, {"h", 0.0}});
    CHECK(pb.kind == PointClassKind::SingularReeb);

    // singular model: class 2 everywhere on Z
    auto ps = classify_point(sing_form(), {{"x1", 0.4}, {"y1", -0.2}, {"z", 0.0}});
    CHECK(ps.kind == PointClassKind::SingularReeb);

    CHECK_THROWS_AS(classify_point(eps_form(), {{"t", 0}, {"x1", 0}, {"z", 0.5}}), ChartError);
}

TEST_CASE("1b classification is locally constant") {
    GridCfg cfg;
    BForm a = eps_form();
    Point p{{"t", 0.2}, {"x1", 0.5}, {"z", 0.0}};
    auto pc = classify_point(a, p);
    REQUIRE(pc.kind == PointClassKind::RegularReebRegularXi);
    for (int i = 0; i < 20; ++i) {
        Point q = p;
        double ang = 2 * PI * i / 20.0;
        q["t"] += 1e-2 * std::cos(ang);
        q["x1"] += 1e-2 * std::sin(ang);
        CHECK(classify_point(a, q).kind == PointClassKind::RegularReebRegularXi);
    }
}

TEST_CASE("theta form in dimension 3") {
    // S2 x S1: Theta|_Z = dphi ^ dtheta, Hamiltonian check with one sign
    auto rep = theta_form(s2s1_form());
    CHECK(rep.nondegenerate);
    CHECK(rep.hamiltonian_ok);
    // dphi ^ dtheta = -(dtheta ^ dphi): canonical coefficient is -1
    CHECK(struct_eq(rep.theta_on_z.coeff(0b110), Expr::num(-1)));
    CHECK(rep.sign == 1);
    CHECK(rep.residual < 1e-8);

    // extended phase space: Theta = dt ^ dx1 and i_{d/dt}(dt ^ dx1) = dx1 = +du
    auto rep2 = theta_form(eps_form());
    CHECK(rep2.nondegenerate);
    CHECK(rep2.hamiltonian_ok);
    CHECK(struct_eq(rep2.theta_on_z.coeff(0b110), Expr::num(1)));
    CHECK(rep2.sign == 1);
}

TEST_CASE("reeb zero clusters on Z") {
    auto zc = reeb_zero_clusters_on_z(s2s1_form());
    CHECK(zc.count == 2);

    // extended phase space: R|_Z = d/dt never vanishes
    auto zc2 = reeb_zero_clusters_on_z(eps_form());
    CHECK(zc2.count == 0);
}

TEST_CASE("convexity classification") {
    Chart c = s2s1_chart();
    // z-independent data is convex
    CHECK(convexity_classify(s2s1_form()).cls == ConvexityClass::Convex);

    Chart cz = sing_chart();
    BForm almost = parse_form("(1 + z)*B + x1*D(y1)", cz);
    auto r = convexity_classify(almost);
    CHECK(r.cls == ConvexityClass::AlmostConvex);

    BForm not_ac = parse_form("B + z*x1*D(y1)", cz);
    CHECK(convexity_classify(not_ac).cls == ConvexityClass::NotAlmostConvex);
}

TEST_CASE("verticalize") {
    Chart c({"t", "x", "y"}, {{-1, 1}, {-1, 1}, {-1, 1}});
    BForm inv = parse_form("cos(x)*D(t) + sin(x)*D(y)", c);
    BForm v = verticalize(inv, "t");
    CHECK(alt_struct_zero(v - inv));

    BForm scaled = parse_form("exp(t)*D(t) + exp(t)*x*D(y)", c);
    BForm v2 = verticalize(scaled, "t");
    BForm expect = parse_form("D(t) + x*D(y)", c);
    CHECK(alt_struct_zero(v2 - expect));

    BForm bad = parse_form("D(t) + t*x*D(y)", c);
    CHECK_THROWS(verticalize(bad, "t"));
}
