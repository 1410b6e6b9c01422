#include "bcontact/contact.hpp"

#include <cmath>

namespace bct {

std::string to_string(ContactVerdict v) {
    switch (v) {
        case ContactVerdict::Contact: return "contact";
        case ContactVerdict::NotContact: return "not contact";
        case ContactVerdict::ContactAwayFromVanishingLocus:
            return "contact away from a vanishing locus";
    }
    return "?";
}

std::string to_string(PointClassKind k) {
    switch (k) {
        case PointClassKind::RegularReebSingularXi: return "1a (regular Reeb, singular xi)";
        case PointClassKind::RegularReebRegularXi: return "1b (regular Reeb, regular xi)";
        case PointClassKind::SingularReeb: return "2 (singular Reeb)";
    }
    return "?";
}

std::string to_string(ConvexityClass c) {
    switch (c) {
        case ConvexityClass::Convex: return "convex";
        case ConvexityClass::AlmostConvex: return "almost convex";
        case ConvexityClass::NotAlmostConvex: return "not almost convex";
    }
    return "?";
}

Expr contact_coeff(const BForm& alpha) {
    const Chart& c = alpha.chart();
    if (alpha.degree() != 1) throw ChartError("contact_coeff expects a degree-1 form");
    if (c.dim() % 2 == 0 || c.dim() < 3)
        throw ChartError("contact_coeff needs an odd chart dimension >= 3");
    const int n = (c.dim() - 1) / 2;
    BForm top = alpha;
    BForm da = ext_d(alpha);
    for (int i = 0; i < n; ++i) top = wedge(top, da);
    uint32_t full = (1u << c.dim()) - 1;
    return simplify(top.coeff(full));
}

ContactReport is_contact(const BForm& alpha, const GridCfg& cfg) {
    ContactReport rep;
    rep.cfg = cfg;
    rep.coefficient = contact_coeff(alpha);
    const Chart& c = alpha.chart();
    auto scan = [&](Regime reg, int n, double& mn, Point& arg) {
        mn = 1e300;
        for (const auto& p : sample_points(c, cfg, reg, n)) {
            double v;
            try {
                v = eval(rep.coefficient, p);
            } catch (const EvalError&) {
                continue;
            }
            rep.max_abs = std::max(rep.max_abs, std::abs(v));
            if (std::abs(v) < mn) {
                mn = std::abs(v);
                arg = p;
            }
        }
        if (mn == 1e300) mn = 0.0;
    };
    scan(Regime::OffZ, cfg.n_off, rep.min_off, rep.argmin_off);
    double overall_min = rep.min_off;
    if (c.singular()) {
        rep.has_on = true;
        scan(Regime::OnZ, cfg.n_on, rep.min_on, rep.argmin_on);
        overall_min = std::min(overall_min, rep.min_on);
    }
    if (overall_min >= cfg.tol) rep.verdict = ContactVerdict::Contact;
    else if (rep.max_abs <= cfg.tol) rep.verdict = ContactVerdict::NotContact;
    else rep.verdict = ContactVerdict::ContactAwayFromVanishingLocus;
    return rep;
}

BMulti reeb(const BForm& alpha, const GridCfg& cfg) {
    const int dim = alpha.chart().dim();
    BForm da = ext_d(alpha);
    std::vector<Expr> rhs(dim + 1, Expr::num(0));
    rhs[dim] = Expr::num(1);
    return solve_contact_system(alpha, da, rhs, cfg, "reeb");
}

BMulti hamiltonian_field(const BForm& alpha, const Expr& H, const GridCfg& cfg) {
    const int dim = alpha.chart().dim();
    BForm da = ext_d(alpha);
    BMulti R = reeb(alpha, cfg);
    Expr RH = field_apply(R, H);
    BForm dH = ext_d([&] {
        BForm f(alpha.chart(), 0, Variance::Co);
        f.set(0, H);
        return f;
    }());
    std::vector<Expr> rhs(dim + 1, Expr::num(0));
    for (int cslot = 0; cslot < dim; ++cslot)
        rhs[cslot] = simplify(Expr::num(-1) * dH.coeff(1u << cslot) +
                              RH * alpha.coeff(1u << cslot));
    rhs[dim] = H;
    return solve_contact_system(alpha, da, rhs, cfg, "hamiltonian_field");
}

PointClass classify_point(const BForm& alpha, const Point& p, const GridCfg& cfg,
                          double zero_tol) {
    const Chart& c = alpha.chart();
    if (!c.singular()) throw ChartError("classify_point needs a singular chart");
    auto it = p.find(c.z_name());
    if (it == p.end() || std::abs(it->second) > zero_tol)
        throw ChartError("point does not lie on the critical set");
    BMulti R = reeb(alpha, cfg);
    double rnorm = 0.0;
    for (const auto& [m, coef] : R.comps()) {
        Expr s = simplify(coef);
        if (s.is_zero()) continue;
        // zeta has no magnitude of its own on Z; use smooth-frame components
        double v = eval((m & 1u) ? simplify(s * Expr::pow(Expr::sym(c.z_name()), c.order())) : s,
                        p);
        rnorm = std::max(rnorm, std::abs(v));
    }
    auto [a_part, beta] = decompose(alpha);
    double u = eval(a_part.coeff(0), p);
    PointClass out{};
    out.reeb_norm = rnorm;
    out.u_value = u;
    if (rnorm <= zero_tol) out.kind = PointClassKind::SingularReeb;
    else if (std::abs(u) <= zero_tol) out.kind = PointClassKind::RegularReebSingularXi;
    else out.kind = PointClassKind::RegularReebRegularXi;
    return out;
}

ThetaReport theta_form(const BForm& alpha, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (c.dim() != 3) throw ChartError("theta_form needs chart dimension 3");
    if (!c.singular()) throw ChartError("theta_form needs a singular chart");
    auto [a_part, beta] = decompose(alpha);
    Expr u = a_part.coeff(0);
    BForm u0(c, 0, Variance::Co);
    u0.set(0, u);
    BForm du = ext_d(u0);
    BForm theta = wedge(BForm(c, 0, Variance::Co), beta);  // placeholder zero
    theta = ext_d(beta).scaled(u) + wedge(beta, du);
    ThetaReport rep;
    rep.theta_on_z = restrict_to_z(theta);

    uint32_t top = 0b110;  // the two non-defining slots
    Expr area = rep.theta_on_z.coeff(top);
    double mn = 1e300;
    auto on_pts = sample_points(c, cfg, Regime::OnZ, cfg.n_on);
    for (const auto& p : on_pts) {
        try {
            mn = std::min(mn, std::abs(eval(area, p)));
        } catch (const EvalError&) {
        }
    }
    rep.min_area = mn == 1e300 ? 0.0 : mn;
    rep.nondegenerate = rep.min_area >= cfg.tol;

    BMulti RZ = tangent_part_on_z(reeb(alpha, cfg));
    BForm lhs = interior(RZ, rep.theta_on_z);
    BForm du_z = restrict_to_z(du);
    auto residual_for = [&](int s) {
        BForm d = lhs - du_z.scaled(Expr::num(s));
        double worst = 0.0;
        for (const auto& [m, coef] : d.comps()) {
            for (const auto& p : on_pts) {
                try {
                    worst = std::max(worst, std::abs(eval(coef, p)));
                } catch (const EvalError&) {
                }
            }
        }
        return worst;
    };
    double rp = residual_for(1), rm = residual_for(-1);
    if (rp <= rm) {
        rep.sign = 1;
        rep.residual = rp;
    } else {
        rep.sign = -1;
        rep.residual = rm;
    }
    rep.hamiltonian_ok = rep.residual <= cfg.tol;
    if (!rep.hamiltonian_ok) rep.sign = 0;
    return rep;
}

ZeroClusters reeb_zero_clusters_on_z(const BForm& alpha, int n_axis, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (c.dim() != 3 || !c.singular())
        throw ChartError("reeb_zero_clusters_on_z needs a singular 3-chart");
    BMulti R = reeb(alpha, cfg);
    BMulti RZ = tangent_part_on_z(R);  // smooth tangent components on Z
    // also the zeta component vanishes on Z in the smooth frame; only the
    // tangent part decides zeros of R|_Z.
    std::vector<Expr> comps;
    for (const auto& [m, coef] : RZ.comps()) comps.push_back(coef);
    if (comps.empty()) {
        ZeroClusters out;
        out.count = 1;  // identically zero field: one big cluster
        return out;
    }
    // lattice over the two non-defining coordinates
    std::vector<int> axes;
    for (int d = 0; d < 3; ++d)
        if (d != c.z_index()) axes.push_back(d);
    const Interval& ia = c.interval(axes[0]);
    const Interval& ib = c.interval(axes[1]);
    auto value = [&](const Expr& e, int i, int j) {
        Point p;
        p[c.coords()[axes[0]]] = ia.lo + ia.width() * i / n_axis;
        p[c.coords()[axes[1]]] = ib.lo + ib.width() * j / n_axis;
        p[c.z_name()] = 0.0;
        return eval(e, p);
    };
    std::vector<std::vector<bool>> flag(n_axis, std::vector<bool>(n_axis, false));
    for (int i = 0; i < n_axis; ++i) {
        for (int j = 0; j < n_axis; ++j) {
            bool all_small_or_flip = true;
            for (const auto& e : comps) {
                double v00 = value(e, i, j), v10 = value(e, i + 1, j);
                double v01 = value(e, i, j + 1), v11 = value(e, i + 1, j + 1);
                double mn = std::min({std::abs(v00), std::abs(v10), std::abs(v01), std::abs(v11)});
                bool flip = (v00 < 0) != (v10 < 0) || (v00 < 0) != (v01 < 0) ||
                            (v00 < 0) != (v11 < 0);
                if (!(flip || mn <= 1e-9)) {
                    all_small_or_flip = false;
                    break;
                }
            }
            flag[i][j] = all_small_or_flip;
        }
    }
    // flood fill 4-connected
    ZeroClusters out;
    std::vector<std::vector<bool>> seen(n_axis, std::vector<bool>(n_axis, false));
    for (int i = 0; i < n_axis; ++i) {
        for (int j = 0; j < n_axis; ++j) {
            if (!flag[i][j] || seen[i][j]) continue;
            ++out.count;
            Point rep;
            rep[c.coords()[axes[0]]] = ia.lo + ia.width() * (i + 0.5) / n_axis;
            rep[c.coords()[axes[1]]] = ib.lo + ib.width() * (j + 0.5) / n_axis;
            rep[c.z_name()] = 0.0;
            out.representatives.push_back(rep);
            std::vector<std::pair<int, int>> stack{{i, j}};
            seen[i][j] = true;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int nx = x + dx[d], ny = y + dy[d];
                    if (nx < 0 || ny < 0 || nx >= n_axis || ny >= n_axis) continue;
                    if (!flag[nx][ny] || seen[nx][ny]) continue;
                    seen[nx][ny] = true;
                    stack.push_back({nx, ny});
                }
            }
        }
    }
    return out;
}

ConvexityReport convexity_classify(const BForm& alpha, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (!c.singular()) throw ChartError("convexity_classify needs a singular chart");
    auto [a_part, beta] = decompose(alpha);
    const std::string& z = c.z_name();
    ConvexityReport rep{};
    rep.cls = ConvexityClass::AlmostConvex;

    for (const auto& [m, coef] : beta.comps()) {
        Expr d = diff(coef, z);
        if (d.is_zero()) continue;
        for (Regime reg : {Regime::OffZ, Regime::OnZ}) {
            auto r = equal_on_grid(d, Expr::num(0), c, reg == Regime::OffZ ? cfg.n_off : cfg.n_on,
                                   cfg.tol, cfg, reg);
            rep.max_beta_dz = std::max(rep.max_beta_dz, r.max_discrepancy);
            if (!r.equal) {
                rep.cls = ConvexityClass::NotAlmostConvex;
                rep.offending = to_string(coef);
            }
        }
    }
    if (rep.cls == ConvexityClass::NotAlmostConvex) return rep;

    Expr du = diff(a_part.coeff(0), z);
    auto r = equal_on_grid(du, Expr::num(0), c, cfg.n_on, cfg.tol, cfg, Regime::OnZ);
    rep.max_u_dz_on_z = r.max_discrepancy;
    if (r.equal) rep.cls = ConvexityClass::Convex;
    else if (rep.offending.empty()) rep.offending = to_string(a_part.coeff(0));
    return rep;
}

BForm verticalize(const BForm& alpha, const std::string& t_name, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (c.singular()) throw ChartError("verticalize expects a smooth chart");
    int ti = c.index_of(t_name);
    if (ti < 0) throw ChartError("no coordinate '" + t_name + "'");
    auto rep = is_contact(alpha, cfg);
    if (rep.verdict != ContactVerdict::Contact)
        throw SolveError("verticalize: input is not contact");
    BMulti dt(c, 1, Variance::Contra);
    dt.set(1u << ti, Expr::num(1));
    BForm L = lie_derivative(dt, alpha);
    BMulti R = reeb(alpha, cfg);
    Expr lambda = interior(R, L).coeff(0);
    // proportionality check L = lambda * alpha
    BForm resid = L - alpha.scaled(lambda);
    for (const auto& [m, coef] : resid.comps()) {
        auto r = equal_on_grid(coef, Expr::num(0), c, cfg.n_off, cfg.tol, cfg, Regime::Plain);
        if (!r.equal)
            throw SolveError("verticalize: d/d" + t_name + " is not a contact vector field",
                             r.argmax);
    }
    Expr dl = diff(lambda, t_name);
    if (!dl.is_zero()) {
        auto r = equal_on_grid(dl, Expr::num(0), c, cfg.n_off, cfg.tol, cfg, Regime::Plain);
        if (!r.equal)
            throw SolveError("verticalize: the conformal factor is not t-invariant", r.argmax);
    }
    Expr divisor_inv = Expr::fn(K::Exp, simplify(Expr::num(-1) * lambda * Expr::sym(t_name)));
    BForm out = alpha.scaled(divisor_inv);
    out.simplify_inplace();
    for (const auto& [m, coef] : out.comps()) {
        Expr d = diff(coef, t_name);
        auto r = equal_on_grid(d, Expr::num(0), c, cfg.n_off, cfg.tol, cfg, Regime::Plain);
        if (!r.equal)
            throw SolveError("verticalize: normalized form is not t-invariant", r.argmax);
    }
    return out;
}

} // namespace bct
