#include "bcontact/jacobi.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace bct {

std::string to_string(LeafClass c) {
    return c == LeafClass::ContactLeaf ? "contact leaf" : "locally conformally symplectic leaf";
}

double sup_on_grid(const Alt& a, const GridCfg& cfg) {
    double worst = 0.0;
    auto scan = [&](Regime reg, int n) {
        auto pts = sample_points(a.chart(), cfg, reg, n);
        for (const auto& [m, c] : a.comps()) {
            for (const auto& p : pts) {
                try {
                    worst = std::max(worst, std::abs(eval(c, p)));
                } catch (const EvalError&) {
                }
            }
        }
    };
    scan(Regime::OffZ, cfg.n_off);
    if (a.chart().singular()) scan(Regime::OnZ, cfg.n_on);
    return worst;
}

BMulti lambda_sharp(const BMulti& Lambda, const BForm& gamma) {
    if (Lambda.degree() != 2 || gamma.degree() != 1)
        throw ChartError("lambda_sharp expects a bivector and a 1-form");
    BMulti out(Lambda.chart(), 1, Variance::Contra);
    for (const auto& [m, v] : Lambda.comps()) {
        uint32_t am = m & (~m + 1);
        uint32_t bm = m & ~am;
        out.add(bm, gamma.coeff(am) * v);
        out.add(am, Expr::num(-1) * gamma.coeff(bm) * v);
    }
    return out.simplify_inplace();
}

JacobiVerification verify_jacobi(const BMulti& Lambda, const BMulti& R, const GridCfg& cfg) {
    JacobiVerification v;
    BMulti compat = schouten(Lambda, Lambda) - mv_wedge(R, Lambda).scaled(Expr::num(2));
    v.res_compat = sup_on_grid(compat, cfg);
    v.res_invariance = sup_on_grid(schouten(Lambda, R), cfg);
    v.verified = v.res_compat <= 1e-7 && v.res_invariance <= 1e-7;
    return v;
}

namespace {

// right-hand side rows for i_Y dalpha = eta (contraction rows), alpha row last
std::vector<Expr> contraction_rhs(const BForm& eta, const Expr& alpha_row) {
    const int dim = eta.chart().dim();
    std::vector<Expr> rhs(dim + 1, Expr::num(0));
    for (int c = 0; c < dim; ++c) rhs[c] = eta.coeff(1u << c);
    rhs[dim] = alpha_row;
    return rhs;
}

BForm basis_covector(const Chart& c, int slot) {
    BForm g(c, 1, Variance::Co);
    g.set(1u << slot, Expr::num(1));
    return g;
}

} // namespace

JacobiPair jacobi_from_contact(const BForm& alpha, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    const int dim = c.dim();
    BForm da = ext_d(alpha);
    BMulti R = reeb(alpha, cfg);

    std::vector<BMulti> Y;
    Y.reserve(dim);
    for (int g = 0; g < dim; ++g) {
        // eta = -(gamma - gamma(R) alpha); gamma(R) = R^g
        BForm eta = alpha.scaled(R.coeff(1u << g)) - basis_covector(c, g);
        Y.push_back(solve_contact_system(alpha, da, contraction_rhs(eta, Expr::num(0)), cfg,
                                         "jacobi_from_contact"));
    }
    BMulti Lambda(c, 2, Variance::Contra);
    double antisym = 0.0;
    for (int g = 0; g < dim; ++g) {
        for (int h = g + 1; h < dim; ++h) {
            Expr v = Y[g].coeff(1u << h);
            if (!simplify(v).is_zero()) Lambda.add((1u << g) | (1u << h), v);
            Expr sym = simplify(Y[g].coeff(1u << h) + Y[h].coeff(1u << g));
            if (!sym.is_zero()) {
                auto r = equal_on_grid(sym, Expr::num(0), c, 40, 1e-9, cfg);
                antisym = std::max(antisym, r.max_discrepancy);
            }
        }
    }
    Lambda.simplify_inplace();
    JacobiPair out{Lambda, R, {}};
    out.record = verify_jacobi(Lambda, R, cfg);
    out.record.res_antisym = antisym;
    return out;
}

LiouvilleJacobiResult jacobi_via_liouville(const BForm& alpha, const BMulti& X,
                                           const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    const int dim = c.dim();
    BForm da = ext_d(alpha);

    // precondition: X is Liouville for dalpha
    double liouv = sup_on_grid(lie_derivative(X, da) - da, cfg);
    if (liouv > std::max(cfg.tol, 1e-7))
        throw SolveError("jacobi_via_liouville: X is not a Liouville field of dalpha (residual " +
                         std::to_string(liouv) + ")");

    BMulti R = reeb(alpha, cfg);

    // Reeb pivot slot: largest grid-min component
    int astar = -1;
    double best = -1.0;
    auto pts = sample_points(c, cfg, Regime::OffZ, 40);
    for (int g = 0; g < dim; ++g) {
        Expr comp = R.coeff(1u << g);
        if (simplify(comp).is_zero()) continue;
        double mn = 1e300;
        for (const auto& p : pts) {
            try {
                mn = std::min(mn, std::abs(eval(comp, p)));
            } catch (const EvalError&) {
                mn = 0.0;
                break;
            }
        }
        if (mn > best) {
            best = mn;
            astar = g;
        }
    }
    if (astar < 0 || best < 1e-7)
        throw SolveError("jacobi_via_liouville: no usable Reeb pivot component");

    Expr r_star_inv = simplify(Expr::pow(R.coeff(1u << astar), -1));

    // rows: contraction rows, then the pivot-slot normalization W^{astar} = 0
    auto M = contraction_matrix(da);
    std::vector<Expr> nrow(dim, Expr::num(0));
    nrow[astar] = Expr::num(1);
    M.push_back(nrow);

    std::vector<BMulti> W;
    W.reserve(dim);
    for (int g = 0; g < dim; ++g) {
        if (g == astar) {
            W.push_back(BMulti(c, 1, Variance::Contra));
            continue;
        }
        // gamma_tilde = gamma_g - R^g / R^astar * gamma_astar ; rhs = -gamma_tilde
        BForm gt = basis_covector(c, g) -
                   basis_covector(c, astar).scaled(simplify(R.coeff(1u << g) * r_star_inv));
        std::vector<Expr> rhs(dim + 1, Expr::num(0));
        for (int cc = 0; cc < dim; ++cc) rhs[cc] = simplify(Expr::num(-1) * gt.coeff(1u << cc));
        LinReport lrep;
        auto x = solve_linear(c, M, rhs, cfg, lrep);
        if (!x) throw SolveError("jacobi_via_liouville: dual solve failed (" + lrep.note + ")");
        BMulti w(c, 1, Variance::Contra);
        for (int a = 0; a < dim; ++a)
            if (!(*x)[a].is_zero()) w.add(1u << a, (*x)[a]);
        W.push_back(w.simplify_inplace());
    }

    BMulti Pi(c, 2, Variance::Contra);
    for (int g = 0; g < dim; ++g)
        for (int h = g + 1; h < dim; ++h) {
            Expr v = W[g].coeff(1u << h);
            if (!simplify(v).is_zero()) Pi.add((1u << g) | (1u << h), v);
        }
    Pi.simplify_inplace();

    LiouvilleJacobiResult out;
    out.pair.Lambda = Pi + mv_wedge(R, X);
    out.pair.R = R;
    out.pair.record = verify_jacobi(out.pair.Lambda, R, cfg);

    out.res_pi_poisson = sup_on_grid(schouten(Pi, Pi), cfg);
    out.res_pi_reeb = sup_on_grid(schouten(R, Pi), cfg);
    out.res_pi_liouville = sup_on_grid(schouten(X, Pi) + Pi, cfg);
    out.pi_identities_ok = out.res_pi_poisson <= 1e-7 && out.res_pi_reeb <= 1e-7 &&
                           out.res_pi_liouville <= 1e-7;

    BMulti disc = mv_wedge(R, mv_wedge(lie_bracket(X, R), X));
    out.discriminant_sup = sup_on_grid(disc, cfg);
    out.identities_hold = out.pair.record.verified;
    bool disc_zero = out.discriminant_sup <= 1e-7;
    out.lemma_consistent = (disc_zero == out.identities_hold);
    return out;
}

TransversalityReport bjacobi_transversality(const JacobiPair& J, const GridCfg& cfg,
                                            double grad_tol) {
    const Chart& c = J.Lambda.chart();
    if (c.dim() % 2 == 0) throw ChartError("bjacobi_transversality needs odd dimension");
    const int n = (c.dim() - 1) / 2;
    BMulti top = J.R;
    for (int i = 0; i < n; ++i) top = mv_wedge(top, J.Lambda);
    TransversalityReport rep;
    if (!c.singular()) {
        uint32_t full = (1u << c.dim()) - 1;
        Expr cc = top.coeff(full);
        double mn = 1e300;
        for (const auto& p : sample_points(c, cfg, Regime::Plain, cfg.n_off)) {
            try {
                mn = std::min(mn, std::abs(eval(cc, p)));
            } catch (const EvalError&) {
            }
        }
        rep.min_off_z = mn == 1e300 ? 0.0 : mn;
        rep.has_critical_set = rep.min_off_z < cfg.tol;
        rep.transversal = false;
        rep.verdict = rep.has_critical_set ? "degenerate" : "no critical set";
        return rep;
    }
    BMulti tops = to_smooth_frame(top);
    uint32_t full = (1u << c.dim()) - 1;
    Expr cc = tops.coeff(full);
    Expr dcc = diff(cc, c.z_name());
    double max_on = 0.0, min_grad = 1e300, min_off = 1e300;
    for (const auto& p : sample_points(c, cfg, Regime::OnZ, cfg.n_on)) {
        try {
            max_on = std::max(max_on, std::abs(eval(cc, p)));
            min_grad = std::min(min_grad, std::abs(eval(dcc, p)));
        } catch (const EvalError&) {
        }
    }
    for (const auto& p : sample_points(c, cfg, Regime::OffZ, cfg.n_off)) {
        try {
            min_off = std::min(min_off, std::abs(eval(cc, p)));
        } catch (const EvalError&) {
        }
    }
    rep.max_on_z = max_on;
    rep.min_grad_on_z = min_grad == 1e300 ? 0.0 : min_grad;
    rep.min_off_z = min_off == 1e300 ? 0.0 : min_off;
    rep.has_critical_set = true;
    rep.transversal =
        max_on <= cfg.tol && rep.min_grad_on_z >= grad_tol && rep.min_off_z > 0.0;
    rep.verdict = rep.transversal ? "transversal (b-Jacobi)" : "not transversal";
    return rep;
}

namespace {

// Reinterpret components on an extended chart (same leading basis slots).
Alt reinterpret_on(const Alt& a, const Chart& ext) {
    Alt r(ext, a.degree(), a.variance());
    for (const auto& [m, c] : a.comps()) r.set(m, c);
    return r;
}

} // namespace

PoissonizeResult poissonize(const JacobiPair& J, const GridCfg& cfg) {
    const Chart& c = J.Lambda.chart();
    PoissonizeResult out;
    out.ext_chart = c.extended("tau", {-1.0, 1.0});
    BMulti L = reinterpret_on(J.Lambda, out.ext_chart);
    BMulti R = reinterpret_on(J.R, out.ext_chart);
    const int tau_slot = out.ext_chart.dim() - 1;
    BMulti dtau(out.ext_chart, 1, Variance::Contra);
    dtau.set(1u << tau_slot, Expr::num(1));
    Expr decay = Expr::fn(K::Exp, Expr::neg(Expr::sym("tau")));
    out.Pi = (L + mv_wedge(dtau, R)).scaled(decay);

    out.res_poisson = sup_on_grid(schouten(out.Pi, out.Pi), cfg);
    out.res_homogeneous = sup_on_grid(schouten(dtau, out.Pi) + out.Pi, cfg);

    // Pi^{n+1} = (n+1) e^{-(n+1)tau} dtau ^ Lambda^n ^ R (binomial expansion:
    // Lambda^{n+1} = 0 on the M-slots and (dtau ^ R)^2 = 0).
    const int n = (c.dim() - 1) / 2;
    BMulti lhs = out.Pi;
    for (int i = 0; i < n; ++i) lhs = mv_wedge(lhs, out.Pi);
    BMulti rhs = mv_wedge(dtau, L);
    for (int i = 1; i < n; ++i) rhs = mv_wedge(rhs, L);
    rhs = mv_wedge(rhs, R);
    Expr scale = Expr::fn(K::Exp, simplify(Expr::num(-(n + 1)) * Expr::sym("tau")));
    rhs = rhs.scaled(simplify(Expr::num(n + 1) * scale));
    out.res_top_power = sup_on_grid(lhs - rhs, cfg);
    return out;
}

SymplectizeResult symplectize(const BForm& alpha, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    SymplectizeResult out;
    out.ext_chart = c.extended("t_symp", {-1.0, 1.0});
    BForm a = reinterpret_on(alpha, out.ext_chart);
    Expr et = Expr::fn(K::Exp, Expr::sym("t_symp"));
    out.omega = ext_d(a.scaled(et));
    out.closed = alt_struct_zero(ext_d(out.omega));

    const int n = (c.dim() - 1) / 2;
    BForm top = out.omega;
    for (int i = 0; i < n; ++i) top = wedge(top, out.omega);
    uint32_t full = (1u << out.ext_chart.dim()) - 1;
    Expr lhs = top.coeff(full);
    Rational fact(1);
    for (int i = 2; i <= n + 1; ++i) fact *= i;
    Expr rhs = simplify(Expr::num(fact) *
                        Expr::fn(K::Exp, simplify(Expr::num(n + 1) * Expr::sym("t_symp"))) *
                        reinterpret_on([&] {
                            BForm f(c, 0, Variance::Co);
                            f.set(0, contact_coeff(alpha));
                            return f;
                        }(), out.ext_chart).coeff(0));
    // compare magnitudes (orientation of the top blade is conventional)
    double worst = 0.0;
    auto scan = [&](Regime reg, int nn) {
        for (const auto& p : sample_points(out.ext_chart, cfg, reg, nn)) {
            try {
                worst = std::max(worst, std::abs(std::abs(eval(lhs, p)) - std::abs(eval(rhs, p))));
            } catch (const EvalError&) {
            }
        }
    };
    scan(Regime::OffZ, cfg.n_off);
    if (out.ext_chart.singular()) scan(Regime::OnZ, cfg.n_on);
    out.res_top_power = worst;

    const int t_slot = out.ext_chart.dim() - 1;
    BMulti dt(out.ext_chart, 1, Variance::Contra);
    dt.set(1u << t_slot, Expr::num(1));
    out.res_liouville = sup_on_grid(lie_derivative(dt, out.omega) - out.omega, cfg);

    BForm rec = interior(dt, out.omega);
    BForm rec0(out.ext_chart, 1, Variance::Co);
    for (const auto& [m, coef] : rec.comps())
        rec0.add(m, subst(coef, "t_symp", Expr::num(0)));
    rec0.simplify_inplace();
    out.recovers_alpha = alt_struct_zero(rec0 - a);
    return out;
}

namespace {

double transversality_min_det(const BForm& omega, const BMulti& X, const ChartMap& phi,
                              const GridCfg& cfg) {
    const Chart& H = phi.source;
    const Chart& Wc = phi.target;
    const int hw = H.dim(), ww = Wc.dim();
    if (ww != hw + 1) throw ChartError("hypersurface must have codimension 1");
    BMulti Xs = to_smooth_frame(X);
    // Jacobian d(image_i)/d(source_j) in smooth coordinates
    std::vector<std::vector<Expr>> Jac(ww, std::vector<Expr>(hw));
    for (int i = 0; i < ww; ++i)
        for (int j = 0; j < hw; ++j) Jac[i][j] = diff(phi.images[i], H.coords()[j]);
    double mn = 1e300;
    auto scan = [&](Regime reg, int n) {
        for (const auto& p : sample_points(H, cfg, reg, n)) {
            Point q;
            bool ok = true;
            for (int i = 0; i < ww; ++i) {
                try {
                    q[Wc.coords()[i]] = eval(phi.images[i], p);
                } catch (const EvalError&) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            Eigen::MatrixXd Mt(ww, ww);
            try {
                for (int i = 0; i < ww; ++i) {
                    for (int j = 0; j < hw; ++j) Mt(i, j) = eval(Jac[i][j], p);
                    int slot = Wc.singular() ? -1 : i;
                    (void)slot;
                }
                for (int i = 0; i < ww; ++i) {
                    // smooth-frame component of X along coordinate i at q
                    Expr comp = Xs.coeff(1u << i);
                    Mt(i, hw) = eval(comp, q);
                }
            } catch (const EvalError&) {
                continue;
            }
            mn = std::min(mn, std::abs(Mt.determinant()));
        }
    };
    scan(Regime::OffZ, std::min(cfg.n_off, 60));
    if (H.singular()) scan(Regime::OnZ, std::min(cfg.n_on, 30));
    return mn == 1e300 ? 0.0 : mn;
}

} // namespace

ContractResult liouville_contract(const BForm& omega, const BMulti& X, const ChartMap& phi,
                                  const GridCfg& cfg) {
    ContractResult out;
    out.liouville_residual = sup_on_grid(lie_derivative(X, omega) - omega, cfg);
    if (out.liouville_residual > std::max(cfg.tol, 1e-7))
        throw SolveError("liouville_contract: X is not a Liouville field (residual " +
                         std::to_string(out.liouville_residual) + ")");
    out.min_transversality = transversality_min_det(omega, X, phi, cfg);
    if (out.min_transversality < 1e-9)
        throw SolveError("liouville_contract: X is tangent to the hypersurface at a sample point");
    out.alpha = pullback(phi, interior(X, omega));
    out.report = is_contact(out.alpha, cfg);
    return out;
}

OrthogonalityReport reeb_orthogonality_check(const BForm& omega, const BMulti& X,
                                             const ChartMap& phi, const GridCfg& cfg) {
    ContractResult cr = liouville_contract(omega, X, phi, cfg);
    BMulti R = reeb(cr.alpha, cfg);
    BForm pb = pullback(phi, omega);
    OrthogonalityReport rep;
    rep.residual = sup_on_grid(interior(R, pb), cfg);
    rep.ok = rep.residual <= std::max(cfg.tol, 1e-8);
    return rep;
}

LeafReport leaf_classify(const JacobiPair& J, const Point& p, double tol) {
    const Chart& c = J.Lambda.chart();
    const int dim = c.dim();
    BMulti Ls = to_smooth_frame(J.Lambda);
    BMulti Rs = to_smooth_frame(J.R);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& [m, coef] : Ls.comps()) {
        int a = std::countr_zero(m);
        int b = std::countr_zero(m & (m - 1));
        double v = eval(coef, p);
        // Lambda#(gamma)^b = sum_a gamma_a Lambda^{ab}
        A(b, a) = v;   // column: gamma slot a feeding output slot b
        A(a, b) = -v;
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(dim);
    for (const auto& [m, coef] : Rs.comps()) r(std::countr_zero(m)) = eval(coef, p);
    Eigen::VectorXd eta = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(r);
    double residual = (A * eta - r).lpNorm<Eigen::Infinity>();
    LeafReport rep;
    rep.residual = residual;
    rep.cls = residual > tol ? LeafClass::ContactLeaf : LeafClass::LCSLeaf;
    return rep;
}

} // namespace bct
