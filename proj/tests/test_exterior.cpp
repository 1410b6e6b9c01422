#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bcontact/exterior.hpp"

using namespace bct;

namespace {

Chart txz() { return Chart({"t", "x", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1); }

Expr random_coeff(std::mt19937& rng, const Chart& c) {
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<int> ci(0, c.dim() - 1);
    std::uniform_int_distribution<int> num(-2, 2);
    switch (pick(rng)) {
        case 0: return Expr::num(num(rng));
        case 1: return Expr::sym(c.coords()[ci(rng)]);
        case 2: return Expr::fn(K::Sin, Expr::sym(c.coords()[ci(rng)]));
        case 3: return Expr::fn(K::Cos, Expr::sym(c.coords()[ci(rng)]));
        case 4:
            return simplify(Expr::sym(c.coords()[ci(rng)]) * Expr::sym(c.coords()[ci(rng)]));
        default:
            return simplify(Expr::num(num(rng)) + Expr::sym(c.coords()[ci(rng)]));
    }
}

Alt random_alt(std::mt19937& rng, const Chart& c, int deg, Variance var) {
    Alt a(c, deg, var);
    for (uint32_t m = 0; m < (1u << c.dim()); ++m) {
        if (std::popcount(m) != deg) continue;
        std::uniform_int_distribution<int> keep(0, 2);
        if (keep(rng) == 0) continue;
        a.add(m, random_coeff(rng, c));
    }
    a.simplify_inplace();
    return a;
}

} // namespace

TEST_CASE("wedge basics and graded commutativity") {
    Chart c = txz();
    BForm sigma = parse_form("B", c);
    CHECK(alt_struct_zero(wedge(sigma, sigma)));

    BForm a = parse_form("D(t) + x*B", c);
    BForm b = parse_form("W(D(x), B)", c);
    BForm w = wedge(a, b);
    // dt^dx^sigma = -(sigma^dt^dx): canonical coefficient on full blade
    BForm expect(c, 3, Variance::Co);
    expect.set(0b111, Expr::num(1));
    CHECK(alt_struct_zero(w - expect));

    std::mt19937 rng(3);
    for (int i = 0; i < 20; ++i) {
        std::uniform_int_distribution<int> dd(0, 2);
        int k = dd(rng), l = dd(rng);
        Alt p = random_alt(rng, c, k, Variance::Co);
        Alt q = random_alt(rng, c, l, Variance::Co);
        int s = (k * l) % 2 == 0 ? 1 : -1;
        CHECK(alt_struct_zero(wedge(p, q) - wedge(q, p).scaled(Expr::num(s))));
    }
}

TEST_CASE("ext_d basics") {
    Chart c = txz();
    BForm sigma = parse_form("B", c);
    CHECK(alt_struct_zero(ext_d(sigma)));

    // d(u sigma + beta) = du ^ sigma + d beta for u = x, beta = t dx
    BForm w = parse_form("x*B + t*D(x)", c);
    BForm dw = ext_d(w);
    BForm expect = wedge(parse_form("D(x)", c), parse_form("B", c)) +
                   wedge(parse_form("D(t)", c), parse_form("D(x)", c));
    CHECK(alt_struct_zero(dw - expect));

    // dz embeds as z * sigma (m = 1) and is closed
    BForm dz = parse_form("D(z)", c);
    CHECK(struct_eq(dz.coeff(1u), Expr::sym("z")));
    CHECK(alt_struct_zero(ext_d(dz)));
}

TEST_CASE("d^2 = 0 symbolically on random forms") {
    std::mt19937 rng(17);
    Chart c = txz();
    Chart c2 = Chart({"x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 2);
    for (int i = 0; i < 50; ++i) {
        for (int deg : {1, 2}) {
            Alt w = random_alt(rng, c, deg, Variance::Co);
            CHECK(alt_struct_zero(ext_d(ext_d(w))));
            Alt w2 = random_alt(rng, c2, deg, Variance::Co);
            CHECK(alt_struct_zero(ext_d(ext_d(w2))));
        }
    }
}

TEST_CASE("decompose and reassemble") {
    Chart c = txz();
    BForm w = parse_form("x*B + t*D(x)", c);
    auto [alpha, beta] = decompose(w);
    CHECK(struct_eq(alpha.coeff(0), Expr::sym("x")));
    CHECK(struct_eq(beta.coeff(1u << 2), Expr::sym("t")));  // D(x) is slot 2 on (t,x,z)
    CHECK(alt_struct_zero(reassemble(alpha, beta) - w));

    BForm smooth = parse_form("W(D(t), D(x))", c);
    auto [a2, b2] = decompose(smooth);
    CHECK(alt_struct_zero(a2));
    CHECK(alt_struct_zero(b2 - smooth));
}

TEST_CASE("interior contraction") {
    Chart c = txz();
    BMulti zeta = parse_vector("Zv", c);
    BForm sigma = parse_form("B", c);
    CHECK(struct_eq(interior(zeta, sigma).coeff(0), Expr::num(1)));

    BMulti dt = parse_vector("V(t)", c);
    BForm a = parse_form("D(t) + x*B", c);
    CHECK(struct_eq(interior(dt, a).coeff(0), Expr::num(1)));

    std::mt19937 rng(5);
    for (int i = 0; i < 20; ++i) {
        BMulti X = random_alt(rng, c, 1, Variance::Contra);
        Alt w = random_alt(rng, c, 2, Variance::Co);
        CHECK(alt_struct_zero(interior(X, interior(X, w))));
        // graded antiderivation on products
        Alt e = random_alt(rng, c, 1, Variance::Co);
        Alt lhs = interior(X, wedge(w, e));
        Alt rhs = wedge(interior(X, w), e) + wedge(w, interior(X, e));
        CHECK(alt_equal_on_grid(lhs, rhs, 40, 1e-8));
    }
}

TEST_CASE("lie bracket closure and Jacobi") {
    Chart c = txz();
    BMulti zeta = parse_vector("Zv", c);
    BMulti dx = parse_vector("V(x)", c);
    CHECK(alt_struct_zero(lie_bracket(zeta, dx)));

    BMulti uz = parse_vector("x*Zv", c);
    BMulti br = lie_bracket(zeta, uz);
    // [zeta, u zeta] = (zeta u) zeta with u = x: zeta(x) = 0 -> zero
    CHECK(alt_struct_zero(br));
    BMulti uz2 = parse_vector("z*Zv", c);  // u = z: zeta(z) = z
    CHECK(alt_struct_zero(lie_bracket(zeta, uz2) - parse_vector("z*Zv", c)));

    std::mt19937 rng(9);
    for (int i = 0; i < 15; ++i) {
        BMulti X = random_alt(rng, c, 1, Variance::Contra);
        BMulti Y = random_alt(rng, c, 1, Variance::Contra);
        BMulti Z = random_alt(rng, c, 1, Variance::Contra);
        Alt jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) +
                  lie_bracket(Z, lie_bracket(X, Y));
        CHECK(alt_equal_on_grid(jac, Alt(c, 1, Variance::Contra), 60, 1e-8));
    }
}

TEST_CASE("schouten bracket properties") {
    Chart c = txz();
    std::mt19937 rng(13);

    // constant bivector has vanishing self-bracket
    BMulti pi = parse_vector("W(V(t), V(x))", c);
    CHECK(alt_struct_zero(schouten(pi, pi)));

    // reduces to the Lie bracket in degree (1,1)
    for (int i = 0; i < 10; ++i) {
        BMulti X = random_alt(rng, c, 1, Variance::Contra);
        BMulti Y = random_alt(rng, c, 1, Variance::Contra);
        CHECK(alt_struct_zero(schouten(X, Y) - lie_bracket(X, Y)));
    }

    // graded antisymmetry [P,Q] = -(-1)^((p-1)(q-1)) [Q,P]
    for (int i = 0; i < 15; ++i) {
        std::uniform_int_distribution<int> dd(1, 2);
        int p = dd(rng), q = dd(rng);
        Alt P = random_alt(rng, c, p, Variance::Contra);
        Alt Q = random_alt(rng, c, q, Variance::Contra);
        int s = ((p - 1) * (q - 1)) % 2 == 0 ? -1 : 1;
        CHECK(alt_equal_on_grid(schouten(P, Q), schouten(Q, P).scaled(Expr::num(s)), 40, 1e-7));
    }

    // universal identity behind the Liouville lemma:
    // [R^X, R^X] = -2 R ^ [X,R] ^ X in this bracket convention
    for (int i = 0; i < 10; ++i) {
        BMulti R = random_alt(rng, c, 1, Variance::Contra);
        BMulti X = random_alt(rng, c, 1, Variance::Contra);
        Alt RX = mv_wedge(R, X);
        Alt lhs = schouten(RX, RX);
        Alt rhs = mv_wedge(R, mv_wedge(lie_bracket(X, R), X)).scaled(Expr::num(-2));
        CHECK(alt_equal_on_grid(lhs, rhs, 60, 1e-7));
    }

    // graded Jacobi identity on degree triples (1,1,2) and (2,2,1)
    auto jacobi_residual = [&](const Alt& P, const Alt& Q, const Alt& R) {
        int p = P.degree(), q = Q.degree(), r = R.degree();
        auto sgn = [](int a, int b) { return ((a - 1) * (b - 1)) % 2 == 0 ? 1 : -1; };
        Alt t1 = schouten(schouten(P, Q), R).scaled(Expr::num(sgn(p, r)));
        Alt t2 = schouten(schouten(Q, R), P).scaled(Expr::num(sgn(q, p)));
        Alt t3 = schouten(schouten(R, P), Q).scaled(Expr::num(sgn(r, q)));
        return t1 + t2 + t3;
    };
    for (int i = 0; i < 8; ++i) {
        Alt X = random_alt(rng, c, 1, Variance::Contra);
        Alt Y = random_alt(rng, c, 1, Variance::Contra);
        Alt P = random_alt(rng, c, 2, Variance::Contra);
        Alt Q = random_alt(rng, c, 2, Variance::Contra);
        CHECK(alt_equal_on_grid(jacobi_residual(X, Y, P), Alt(c, 2, Variance::Contra), 40, 1e-7));
        CHECK(alt_equal_on_grid(jacobi_residual(P, Q, X), Alt(c, 3, Variance::Contra), 40, 1e-7));
    }
}

TEST_CASE("lie derivative via Cartan formula") {
    Chart c = Chart({"t", "x", "y", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), 1);

    // L_{d/dt}(e^t dt ^ alpha) = e^t dt ^ alpha for t-independent alpha
    BForm w = parse_form("exp(t) * W(D(t), D(x))", c);
    BMulti dt = parse_vector("V(t)", c);
    CHECK(alt_equal_on_grid(lie_derivative(dt, w), w, 60, 1e-8));

    // Liouville identity: L_X omega = omega for omega = sigma^dt + dx^dy,
    // X = (1/2)(zeta + 2t dt + x dx + y dy)
    BForm omega = parse_form("W(B, D(t)) + W(D(x), D(y))", c);
    BMulti X = parse_vector("1/2*Zv + t*V(t) + 1/2*x*V(x) + 1/2*y*V(y)", c);
    CHECK(alt_equal_on_grid(lie_derivative(X, omega), omega, 80, 1e-8));

    // derivation property on wedges
    std::mt19937 rng(21);
    for (int i = 0; i < 10; ++i) {
        BMulti V = random_alt(rng, c, 1, Variance::Contra);
        Alt a = random_alt(rng, c, 1, Variance::Co);
        Alt b = random_alt(rng, c, 1, Variance::Co);
        Alt lhs = lie_derivative(V, wedge(a, b));
        Alt rhs = wedge(lie_derivative(V, a), b) + wedge(a, lie_derivative(V, b));
        CHECK(alt_equal_on_grid(lhs, rhs, 40, 1e-8));
    }
}

TEST_CASE("pullback: identity, scaling, and naturality") {
    Chart c = txz();
    BForm w = parse_form("D(t) + x*B", c);

    ChartMap ident{c, c, {Expr::sym("t"), Expr::sym("x"), Expr::sym("z")}};
    CHECK(alt_struct_zero(pullback(ident, w) - w));

    // z -> 2z on the z-line: sigma is invariant (m = 1)
    Chart line = Chart({"z"}, {{-1, 1}}, std::string("z"), 1);
    ChartMap scale{line, line, {simplify(Expr::num(2) * Expr::sym("z"))}};
    BForm sig = parse_form("B", line);
    CHECK(alt_struct_zero(pullback(scale, sig) - sig));

    // pullback commutes with ext_d
    Chart src = Chart({"a", "b", "w"}, {{-0.5, 0.5}, {-1, 1}, {-1, 1}}, std::string("a"), 1);
    std::vector<Expr> imgs = {
        simplify(Expr::sym("b") * Expr::sym("b")),                      // t = b^2
        simplify(Expr::sym("w") + Expr::sym("b")),                      // x = w + b
        simplify(Expr::sym("a") * (Expr::num(1) + Expr::sym("w") * Expr::sym("w")))};  // z = a(1+w^2)
    ChartMap phi{src, c, {imgs[0], imgs[1], imgs[2]}};
    BForm pb_dw = pullback(phi, ext_d(w));
    BForm d_pbw = ext_d(pullback(phi, w));
    CHECK(alt_equal_on_grid(pb_dw, d_pbw, 80, 1e-8));
}

TEST_CASE("frame conversions") {
    Chart c = txz();
    // to_smooth_form requires divisibility
    BForm w = parse_form("z*B + t*D(x)", c);
    BForm sm = to_smooth_form(w);
    CHECK(!sm.chart().singular());
    CHECK(struct_eq(sm.coeff(1u << sm.smooth_index("z")), Expr::num(1)));
    BForm back = embed_in_bframe(sm, c);
    CHECK(alt_struct_zero(back - w));

    BForm bad = parse_form("t*B", c);
    CHECK_THROWS_AS(to_smooth_form(bad), ChartError);

    // vector frame change multiplies the zeta slot by z^m
    BMulti X = parse_vector("x*Zv + t*V(x)", c);
    BMulti Xs = to_smooth_frame(X);
    CHECK(struct_eq(Xs.coeff(1u << Xs.smooth_index("z")),
                    simplify(Expr::sym("x") * Expr::sym("z"))));
}

TEST_CASE("literal round trip and chart json") {
    Chart c = txz();
    BForm deg1 = parse_form("(1 + x)*D(t) - sin(t)*B", c);
    CHECK(alt_struct_zero(parse_form(to_literal(deg1), c) - deg1));

    BForm deg2 = parse_form("3/4*W(D(x), B) + z*W(D(t), D(x))", c);
    CHECK(alt_struct_zero(parse_form(to_literal(deg2), c) - deg2));

    Chart cj = chart_from_json(R"({"coords":["t","x","z"],"box":[[-1,1],[-1,1],[-1,1]],"z":"z","m":2})");
    CHECK(cj.singular());
    CHECK(cj.order() == 2);
    Chart cj2 = chart_from_json(chart_to_json(cj));
    CHECK(cj.same_as(cj2));
}
