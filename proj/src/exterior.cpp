#include "bcontact/exterior.hpp"

#include <bit>
#include <cctype>
#include <sstream>

#include <json.hpp>

namespace bct {

Alt::Alt(Chart chart, int degree, Variance var)
    : chart_(std::move(chart)), degree_(degree), var_(var) {
    if (degree_ < 0 || degree_ > chart_.dim())
        throw ChartError("form degree out of range for chart dimension");
}

Expr Alt::coeff(uint32_t mask) const {
    auto it = comps_.find(mask);
    return it == comps_.end() ? Expr::num(0) : it->second;
}

void Alt::add(uint32_t mask, const Expr& e) {
    if (std::popcount(mask) != degree_) throw ChartError("blade size does not match degree");
    if (mask >= (1u << chart_.dim())) throw ChartError("blade index out of range");
    auto it = comps_.find(mask);
    if (it == comps_.end()) comps_.emplace(mask, e);
    else it->second = it->second + e;
}

void Alt::set(uint32_t mask, const Expr& e) {
    if (std::popcount(mask) != degree_) throw ChartError("blade size does not match degree");
    comps_[mask] = e;
}

Alt& Alt::simplify_inplace() {
    for (auto it = comps_.begin(); it != comps_.end();) {
        it->second = simplify(it->second);
        if (it->second.is_zero()) it = comps_.erase(it);
        else ++it;
    }
    return *this;
}

bool Alt::is_zero() const {
    for (const auto& [m, c] : comps_)
        if (!simplify(c).is_zero()) return false;
    return true;
}

std::string Alt::basis_name(int i) const {
    if (chart_.singular()) {
        if (i == 0) return var_ == Variance::Co ? "B" : "Zv";
        int idx = 0;
        for (int d = 0; d < chart_.dim(); ++d) {
            if (d == chart_.z_index()) continue;
            if (++idx == i) return chart_.coords()[d];
        }
        throw ChartError("basis index out of range");
    }
    return chart_.coords().at(i);
}

int Alt::smooth_index(const std::string& coord) const {
    int ci = chart_.index_of(coord);
    if (ci < 0) throw ChartError("coordinate '" + coord + "' not in chart");
    if (!chart_.singular()) return ci;
    if (ci == chart_.z_index())
        throw ChartError("defining coordinate has no smooth basis slot");
    int idx = 0;
    for (int d = 0; d < chart_.dim(); ++d) {
        if (d == chart_.z_index()) continue;
        ++idx;
        if (d == ci) return idx;
    }
    throw ChartError("coordinate lookup failed");
}

std::string Alt::coord_of_index(int i) const {
    if (!chart_.singular()) return chart_.coords().at(i);
    if (i == 0) return chart_.z_name();
    int idx = 0;
    for (int d = 0; d < chart_.dim(); ++d) {
        if (d == chart_.z_index()) continue;
        if (++idx == i) return chart_.coords()[d];
    }
    throw ChartError("basis index out of range");
}

Alt operator+(const Alt& a, const Alt& b) {
    if (!a.chart_.same_as(b.chart_) || a.degree_ != b.degree_ || a.var_ != b.var_)
        throw ChartError("mismatched operands");
    Alt r = a;
    for (const auto& [m, c] : b.comps_) r.add(m, c);
    return r.simplify_inplace();
}

Alt operator-(const Alt& a, const Alt& b) { return a + b.scaled(Expr::num(-1)); }

Alt Alt::scaled(const Expr& s) const {
    Alt r(chart_, degree_, var_);
    for (const auto& [m, c] : comps_) r.set(m, simplify(c * s));
    return r.simplify_inplace();
}

int blade_sign(uint32_t a, uint32_t b) {
    int swaps = 0;
    for (uint32_t bb = b; bb;) {
        int j = std::countr_zero(bb);
        bb &= bb - 1;
        swaps += std::popcount(a >> (j + 1));
    }
    return (swaps % 2 == 0) ? 1 : -1;
}

Alt wedge(const Alt& a, const Alt& b) {
    if (!a.chart().same_as(b.chart()) || a.variance() != b.variance())
        throw ChartError("wedge operands on different charts");
    int deg = a.degree() + b.degree();
    Alt r(a.chart(), std::min(deg, a.chart().dim()), a.variance());
    if (deg > a.chart().dim()) return r;  // zero
    for (const auto& [ma, ca] : a.comps()) {
        for (const auto& [mb, cb] : b.comps()) {
            if (ma & mb) continue;
            int s = blade_sign(ma, mb);
            r.add(ma | mb, Expr::num(s) * ca * cb);
        }
    }
    return r.simplify_inplace();
}

BMulti mv_wedge(const BMulti& a, const BMulti& b) { return wedge(a, b); }

namespace {

// Exterior derivative of a scalar as a degree-1 form (dz -> z^m sigma).
BForm d_scalar(const Expr& f, const Chart& chart) {
    BForm r(chart, 1, Variance::Co);
    if (chart.singular()) {
        Expr dz = diff(f, chart.z_name());
        if (!dz.is_zero()) {
            Expr zm = Expr::pow(Expr::sym(chart.z_name()), chart.order());
            r.add(1u, simplify(dz * zm));
        }
        int slot = 0;
        for (int d = 0; d < chart.dim(); ++d) {
            if (d == chart.z_index()) continue;
            ++slot;
            Expr df = diff(f, chart.coords()[d]);
            if (!df.is_zero()) r.add(1u << slot, df);
        }
    } else {
        for (int d = 0; d < chart.dim(); ++d) {
            Expr df = diff(f, chart.coords()[d]);
            if (!df.is_zero()) r.add(1u << d, df);
        }
    }
    return r.simplify_inplace();
}

// zeta acts as z^m d/dz; smooth slots act as plain partials.
Expr slot_apply(const Chart& chart, int slot, const Expr& f) {
    if (chart.singular()) {
        if (slot == 0) {
            Expr zm = Expr::pow(Expr::sym(chart.z_name()), chart.order());
            return simplify(zm * diff(f, chart.z_name()));
        }
        int idx = 0;
        for (int d = 0; d < chart.dim(); ++d) {
            if (d == chart.z_index()) continue;
            if (++idx == slot) return diff(f, chart.coords()[d]);
        }
        throw ChartError("slot out of range");
    }
    return diff(f, chart.coords().at(slot));
}

} // namespace

BForm ext_d(const BForm& w) {
    if (w.variance() != Variance::Co) throw ChartError("ext_d expects a form");
    if (w.degree() >= w.chart().dim()) return BForm(w.chart(), w.chart().dim(), Variance::Co);
    BForm r(w.chart(), w.degree() + 1, Variance::Co);
    for (const auto& [mask, c] : w.comps()) {
        BForm dc = d_scalar(c, w.chart());
        for (const auto& [mb, cb] : dc.comps()) {
            if (mb & mask) continue;
            int s = blade_sign(mb, mask);
            r.add(mb | mask, Expr::num(s) * cb);
        }
    }
    return r.simplify_inplace();
}

std::pair<BForm, BForm> decompose(const BForm& w) {
    if (w.variance() != Variance::Co) throw ChartError("decompose expects a form");
    BForm alpha(w.chart(), std::max(w.degree() - 1, 0), Variance::Co);
    BForm beta(w.chart(), w.degree(), Variance::Co);
    if (!w.chart().singular()) {
        beta = w;
        return {alpha, beta};
    }
    for (const auto& [mask, c] : w.comps()) {
        if (mask & 1u) {
            if (w.degree() == 0) throw ChartError("degree-0 form cannot carry sigma");
            alpha.add(mask & ~1u, c);  // sigma is slot 0: no sign to strip it in front
        } else {
            beta.add(mask, c);
        }
    }
    alpha.simplify_inplace();
    beta.simplify_inplace();
    return {alpha, beta};
}

BForm reassemble(const BForm& alpha, const BForm& beta) {
    if (!alpha.chart().singular()) throw ChartError("reassemble needs a singular chart");
    BForm sigma(alpha.chart(), 1, Variance::Co);
    sigma.set(1u, Expr::num(1));
    return wedge(sigma, alpha) + beta;
}

BForm interior(const BMulti& X, const BForm& w) {
    if (X.variance() != Variance::Contra || X.degree() != 1)
        throw ChartError("interior expects a degree-1 multivector");
    if (w.variance() != Variance::Co) throw ChartError("interior expects a form");
    if (!X.chart().same_as(w.chart())) throw ChartError("chart mismatch in interior");
    if (w.degree() == 0) throw ChartError("interior of a degree-0 form");
    BForm r(w.chart(), w.degree() - 1, Variance::Co);
    for (const auto& [xm, xc] : X.comps()) {
        int a = std::countr_zero(xm);
        for (const auto& [mask, c] : w.comps()) {
            if (!(mask & xm)) continue;
            int below = std::popcount(mask & (xm - 1));
            int s = (below % 2 == 0) ? 1 : -1;
            r.add(mask & ~xm, Expr::num(s) * xc * c);
        }
        (void)a;
    }
    return r.simplify_inplace();
}

Expr pairing(const BMulti& X, const BForm& a) {
    if (X.degree() != 1 || a.degree() != 1) throw ChartError("pairing expects degree 1");
    Expr s = Expr::num(0);
    for (const auto& [m, c] : X.comps()) s = s + c * a.coeff(m);
    return simplify(s);
}

Expr field_apply(const BMulti& X, const Expr& f) {
    if (X.degree() != 1 || X.variance() != Variance::Contra)
        throw ChartError("field_apply expects a degree-1 multivector");
    Expr s = Expr::num(0);
    for (const auto& [m, c] : X.comps())
        s = s + c * slot_apply(X.chart(), std::countr_zero(m), f);
    return simplify(s);
}

BMulti lie_bracket(const BMulti& X, const BMulti& Y) {
    if (X.degree() != 1 || Y.degree() != 1) throw ChartError("lie_bracket expects degree 1");
    if (!X.chart().same_as(Y.chart())) throw ChartError("chart mismatch in lie_bracket");
    BMulti r(X.chart(), 1, Variance::Contra);
    for (int slot = 0; slot < X.chart().dim(); ++slot) {
        uint32_t m = 1u << slot;
        Expr c = field_apply(X, Y.coeff(m)) - field_apply(Y, X.coeff(m));
        c = simplify(c);
        if (!c.is_zero()) r.add(m, c);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Schouten-Nijenhuis bracket on degrees <= 2 over the commuting b-frame.
// ---------------------------------------------------------------------------

namespace {

struct Blade {
    Expr coeff;
    std::vector<int> idx;  // ascending slot indices
};

std::vector<Blade> alt_blades(const Alt& a) {
    std::vector<Blade> out;
    for (const auto& [m, c] : a.comps()) {
        Blade b;
        b.coeff = c;
        for (uint32_t mm = m; mm;) {
            b.idx.push_back(std::countr_zero(mm));
            mm &= mm - 1;
        }
        out.push_back(std::move(b));
    }
    return out;
}

Alt blades_to_alt(const Chart& chart, int deg, const std::vector<Blade>& blades) {
    Alt r(chart, deg, Variance::Contra);
    for (const auto& b : blades) {
        uint32_t m = 0;
        int sign = 1;
        // insertion sort computing permutation parity; repeated index -> zero
        std::vector<int> v = b.idx;
        for (size_t i = 1; i < v.size(); ++i)
            for (size_t j = i; j > 0 && v[j - 1] > v[j]; --j) {
                std::swap(v[j - 1], v[j]);
                sign = -sign;
            }
        bool dup = false;
        for (size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] == v[i + 1]) dup = true;
        if (dup) continue;
        for (int i : v) m |= 1u << i;
        r.add(m, Expr::num(sign) * b.coeff);
    }
    return r.simplify_inplace();
}

// Recursive Schouten bracket of scaled blades. Returns blades of degree p+q-1.
std::vector<Blade> sch_blade(const Chart& chart, const Blade& P, const Blade& Q) {
    const size_t p = P.idx.size(), q = Q.idx.size();
    std::vector<Blade> out;
    auto apply = [&](int slot, const Expr& f) { return slot_apply(chart, slot, f); };
    if (p == 0 && q == 0) return out;
    if (p == 1 && q == 0) {
        Expr c = simplify(P.coeff * apply(P.idx[0], Q.coeff));
        if (!c.is_zero()) out.push_back({c, {}});
        return out;
    }
    if (p == 0 && q == 1) {
        Expr c = simplify(Expr::num(-1) * Q.coeff * apply(Q.idx[0], P.coeff));
        if (!c.is_zero()) out.push_back({c, {}});
        return out;
    }
    if (p == 1 && q == 1) {
        Expr a = simplify(P.coeff * apply(P.idx[0], Q.coeff));
        Expr b = simplify(Expr::num(-1) * Q.coeff * apply(Q.idx[0], P.coeff));
        if (!a.is_zero()) out.push_back({a, {Q.idx[0]}});
        if (!b.is_zero()) out.push_back({b, {P.idx[0]}});
        return out;
    }
    if (q >= 2) {
        // Q = (g e_b0) ^ E_rest ; [P, Q1^R] = [P,Q1]^R + (-1)^(p-1) Q1^[P,R]
        Blade Q1{Q.coeff, {Q.idx[0]}};
        Blade R{Expr::num(1), std::vector<int>(Q.idx.begin() + 1, Q.idx.end())};
        for (const auto& t : sch_blade(chart, P, Q1)) {
            Blade w{t.coeff, t.idx};
            w.idx.insert(w.idx.end(), R.idx.begin(), R.idx.end());
            out.push_back(std::move(w));
        }
        int s = (p % 2 == 1) ? 1 : -1;  // (-1)^(p-1)
        for (const auto& t : sch_blade(chart, P, R)) {
            Blade w{simplify(Expr::num(s) * Q.coeff * t.coeff), {Q.idx[0]}};
            w.idx.insert(w.idx.end(), t.idx.begin(), t.idx.end());
            out.push_back(std::move(w));
        }
        return out;
    }
    // q <= 1, p >= 2: graded antisymmetry [P,Q] = -(-1)^((p-1)(q-1)) [Q,P]
    int s = (((p - 1) * (q == 0 ? 1 : 0)) % 2 == 0) ? -1 : 1;
    // note: (q-1) = -1 for q=0 has the same parity as 1
    for (const auto& t : sch_blade(chart, Q, P)) {
        out.push_back({simplify(Expr::num(s) * t.coeff), t.idx});
    }
    return out;
}

} // namespace

BMulti schouten(const BMulti& P, const BMulti& Q) {
    if (P.variance() != Variance::Contra || Q.variance() != Variance::Contra)
        throw ChartError("schouten expects multivectors");
    if (!P.chart().same_as(Q.chart())) throw ChartError("chart mismatch in schouten");
    if (P.degree() > 4 || Q.degree() > 4)
        throw ChartError("schouten: unsupported degree");
    int deg = P.degree() + Q.degree() - 1;
    if (deg < 0) deg = 0;
    if (deg > P.chart().dim())  // identically zero beyond the top degree
        return Alt(P.chart(), P.chart().dim(), Variance::Contra);
    std::vector<Blade> acc;
    for (const auto& pb : alt_blades(P))
        for (const auto& qb : alt_blades(Q))
            for (auto& t : sch_blade(P.chart(), pb, qb)) acc.push_back(std::move(t));
    Alt r = blades_to_alt(P.chart(), deg, acc);
    // Convention with [Lambda,Lambda] = 2R^Lambda for contact Jacobi pairs;
    // differs from the right-Leibniz recursion by (-1)^((p-1)(q-1)), which is
    // invisible in degrees (1,1), (1,2) and (2,1).
    if (((P.degree() - 1) * (Q.degree() - 1)) % 2 != 0) r = r.scaled(Expr::num(-1));
    return r;
}

BForm lie_derivative(const BMulti& X, const BForm& w) {
    BForm a = w.degree() > 0 ? interior(X, ext_d(w)) : BForm(w.chart(), 0, Variance::Co);
    if (w.degree() == 0) {
        BForm r(w.chart(), 0, Variance::Co);
        r.set(0, field_apply(X, w.coeff(0)));
        return r.simplify_inplace();
    }
    BForm b = ext_d(interior(X, w));
    return a + b;
}

BForm restrict_to_z(const BForm& w) {
    if (!w.chart().singular()) throw ChartError("restrict_to_z needs a singular chart");
    BForm r(w.chart(), w.degree(), Variance::Co);
    const std::string& z = w.chart().z_name();
    for (const auto& [mask, c] : w.comps()) {
        if (mask & 1u) continue;
        Expr c0 = subst(c, z, Expr::num(0));
        if (!c0.is_zero()) r.add(mask, c0);
    }
    return r.simplify_inplace();
}

BMulti tangent_part_on_z(const BMulti& X) {
    if (!X.chart().singular()) throw ChartError("tangent_part_on_z needs a singular chart");
    BMulti r(X.chart(), X.degree(), Variance::Contra);
    const std::string& z = X.chart().z_name();
    for (const auto& [mask, c] : X.comps()) {
        if (mask & 1u) continue;
        Expr c0 = subst(c, z, Expr::num(0));
        if (!c0.is_zero()) r.add(mask, c0);
    }
    return r.simplify_inplace();
}

// ---------------------------------------------------------------------------
// Frame changes between the b-basis and the smooth basis
// ---------------------------------------------------------------------------

namespace {

// Permutation taking singular-chart slots to smoothed-chart coordinate slots.
std::vector<int> slot_to_coord(const Chart& sing) {
    std::vector<int> map(sing.dim());
    map[0] = sing.z_index();
    int idx = 0;
    for (int d = 0; d < sing.dim(); ++d) {
        if (d == sing.z_index()) continue;
        map[++idx] = d;
    }
    return map;
}

std::pair<uint32_t, int> remap_mask(uint32_t mask, const std::vector<int>& perm) {
    std::vector<int> xs;
    for (uint32_t mm = mask; mm;) {
        xs.push_back(perm[std::countr_zero(mm)]);
        mm &= mm - 1;
    }
    int sign = 1;
    for (size_t i = 1; i < xs.size(); ++i)
        for (size_t j = i; j > 0 && xs[j - 1] > xs[j]; --j) {
            std::swap(xs[j - 1], xs[j]);
            sign = -sign;
        }
    uint32_t m = 0;
    for (int x : xs) m |= 1u << x;
    return {m, sign};
}

// Divide e by z^m structurally; false if some additive term lacks the factor.
bool divide_z_power(const Expr& e, const std::string& z, int m, Expr& out) {
    Expr zc = Expr::pow(Expr::sym(z), -m);
    Expr cand = simplify(zc * e);
    if (has_negative_power_of(cand, z)) return false;
    out = cand;
    return true;
}

} // namespace

BMulti to_smooth_frame(const BMulti& X) {
    if (!X.chart().singular()) return X;
    const Chart sm = X.chart().smoothed();
    auto perm = slot_to_coord(X.chart());
    Expr zm = Expr::pow(Expr::sym(X.chart().z_name()), X.chart().order());
    BMulti r(sm, X.degree(), Variance::Contra);
    for (const auto& [mask, c] : X.comps()) {
        auto [nm, sign] = remap_mask(mask, perm);
        Expr cc = (mask & 1u) ? simplify(c * zm) : c;
        r.add(nm, Expr::num(sign) * cc);
    }
    return r.simplify_inplace();
}

BForm to_smooth_form(const BForm& w) {
    if (!w.chart().singular()) return w;
    const Chart sm = w.chart().smoothed();
    auto perm = slot_to_coord(w.chart());
    BForm r(sm, w.degree(), Variance::Co);
    for (const auto& [mask, c] : w.comps()) {
        auto [nm, sign] = remap_mask(mask, perm);
        Expr cc = c;
        if (mask & 1u) {
            if (!divide_z_power(c, w.chart().z_name(), w.chart().order(), cc))
                throw ChartError("sigma-coefficient is not divisible by z^m: " + to_string(c));
        }
        r.add(nm, Expr::num(sign) * cc);
    }
    return r.simplify_inplace();
}

BForm embed_in_bframe(const BForm& w, const Chart& singular_chart) {
    if (!singular_chart.singular()) throw ChartError("embed_in_bframe needs a singular chart");
    if (w.chart().singular()) throw ChartError("embed_in_bframe expects a smooth-chart form");
    if (w.chart().coords() != singular_chart.coords())
        throw ChartError("coordinate mismatch in embed_in_bframe");
    auto perm = slot_to_coord(singular_chart);
    // invert: coordinate slot -> singular slot
    std::vector<int> inv(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
    Expr zm = Expr::pow(Expr::sym(singular_chart.z_name()), singular_chart.order());
    BForm r(singular_chart, w.degree(), Variance::Co);
    for (const auto& [mask, c] : w.comps()) {
        auto [nm, sign] = remap_mask(mask, inv);
        Expr cc = (nm & 1u) ? simplify(c * zm) : c;  // dz = z^m sigma
        r.add(nm, Expr::num(sign) * cc);
    }
    return r.simplify_inplace();
}

// ---------------------------------------------------------------------------
// Chart maps and pullback
// ---------------------------------------------------------------------------

Expr ChartMap::image_of(const std::string& target_coord) const {
    int i = target.index_of(target_coord);
    if (i < 0) throw ChartError("coordinate '" + target_coord + "' not in target chart");
    return images.at(i);
}

void ChartMap::verify_compatible(const GridCfg& cfg) const {
    if (images.size() != static_cast<size_t>(target.dim()))
        throw ChartError("chart map needs one image per target coordinate");
    for (const auto& e : images) check_symbols(e, source);
    if (!target.singular()) return;
    Expr zphi = image_of(target.z_name());
    if (!source.singular()) return;  // sigma pulls back via d(zphi)/zphi^m directly
    const std::string& zs = source.z_name();
    for (int e = 1; e <= 4; ++e) {
        Expr unit = simplify(zphi * Expr::pow(Expr::sym(zs), -e));
        if (has_negative_power_of(unit, zs)) continue;
        double mn = 1e300;
        bool ok = true;
        for (Regime reg : {Regime::OffZ, Regime::OnZ}) {
            auto pts = sample_points(source, cfg, reg, reg == Regime::OffZ ? cfg.n_off : cfg.n_on);
            for (const auto& p : pts) {
                double v;
                try {
                    v = eval(unit, p);
                } catch (const EvalError&) {
                    ok = false;
                    break;
                }
                mn = std::min(mn, std::abs(v));
            }
            if (!ok) break;
        }
        if (ok && mn > 1e-9) return;
    }
    throw ChartError("chart map violates defining-function compatibility (unit vanishes)");
}

namespace {

Expr subst_simultaneous(const Expr& e, const std::map<std::string, Expr>& repl) {
    switch (e.kind()) {
        case K::Num:
            return e;
        case K::Sym: {
            auto it = repl.find(e.node().sym);
            return it == repl.end() ? e : it->second;
        }
        case K::Pow:
            return Expr::pow(subst_simultaneous(e.node().kids[0], repl), e.node().expnt);
        case K::Hyb:
            return Expr::hybrid(e.node().hyb, e.node().hyb_fn, e.node().hyb_order,
                                subst_simultaneous(e.node().kids[0], repl));
        default: {
            Node n = e.node();
            for (auto& k : n.kids) k = subst_simultaneous(k, repl);
            return Expr(std::make_shared<const Node>(std::move(n)));
        }
    }
}

} // namespace

BForm pullback(const ChartMap& phi, const BForm& w) {
    if (!w.chart().same_as(phi.target)) throw ChartError("form does not live on the target chart");
    GridCfg cfg;
    phi.verify_compatible(cfg);
    std::map<std::string, Expr> repl;
    for (int i = 0; i < phi.target.dim(); ++i) repl[phi.target.coords()[i]] = phi.images[i];

    // pulled-back basis covectors of the target chart
    std::vector<BForm> basis;
    basis.reserve(phi.target.dim());
    for (int slot = 0; slot < phi.target.dim(); ++slot) {
        if (phi.target.singular() && slot == 0) {
            Expr zphi = phi.image_of(phi.target.z_name());
            BForm dz = d_scalar(zphi, phi.source);
            basis.push_back(dz.scaled(Expr::pow(zphi, -phi.target.order())));
        } else {
            std::string coord =
                BForm(phi.target, 0, Variance::Co).coord_of_index(slot);
            basis.push_back(d_scalar(phi.image_of(coord), phi.source));
        }
    }

    BForm result(phi.source, w.degree(), Variance::Co);
    for (const auto& [mask, c] : w.comps()) {
        BForm prod(phi.source, 0, Variance::Co);
        prod.set(0, simplify(subst_simultaneous(c, repl)));
        for (uint32_t mm = mask; mm;) {
            int slot = std::countr_zero(mm);
            mm &= mm - 1;
            prod = wedge(prod, basis[slot]);
        }
        result = result + prod;
    }
    result.simplify_inplace();
    if (phi.source.singular()) {
        for (const auto& [m, c] : result.comps())
            if (has_negative_power_of(c, phi.source.z_name()))
                throw ChartError("pullback produced a non-smooth coefficient: " + to_string(c));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Literals
// ---------------------------------------------------------------------------

namespace {

struct FParser {
    const std::string& s;
    size_t i = 0;
    const Chart& chart;
    Variance var;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    int col() const { return static_cast<int>(i) + 1; }
    bool accept(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c) {
        skip();
        if (i >= s.size() || s[i] != c)
            throw ParseError(std::string("expected '") + c + "' at column " + std::to_string(col()),
                             col());
        ++i;
    }
    bool peek_word(const char* w) {
        skip();
        size_t n = std::strlen(w);
        if (s.compare(i, n, w) != 0) return false;
        char after = i + n < s.size() ? s[i + n] : '\0';
        if (std::isalnum(static_cast<unsigned char>(after)) || after == '_') return false;
        return true;
    }
    bool accept_word(const char* w) {
        if (!peek_word(w)) return false;
        i += std::strlen(w);
        return true;
    }

    // value: either pure scalar (degree<0 marker) or an Alt
    struct Val {
        bool is_scalar = true;
        Expr scalar = Expr::num(1);
        Alt alt;
    };

    Val expr() {
        Val acc = term();
        while (true) {
            skip();
            if (accept('+')) acc = combine_add(acc, term(), false);
            else if (accept('-')) acc = combine_add(acc, term(), true);
            else break;
        }
        return acc;
    }

    Val combine_add(Val a, Val b, bool negate) {
        if (negate) {
            if (b.is_scalar) b.scalar = simplify(Expr::num(-1) * b.scalar);
            else b.alt = b.alt.scaled(Expr::num(-1));
        }
        if (a.is_scalar && b.is_scalar) {
            a.scalar = a.scalar + b.scalar;
            return a;
        }
        Alt aa = a.is_scalar ? scalar_as_alt(a.scalar) : a.alt;
        Alt bb = b.is_scalar ? scalar_as_alt(b.scalar) : b.alt;
        Val r;
        r.is_scalar = false;
        r.alt = aa + bb;
        return r;
    }

    Alt scalar_as_alt(const Expr& e) {
        Alt a(chart, 0, var);
        a.set(0, e);
        return a;
    }

    Val term() {
        Val acc = factor();
        while (true) {
            skip();
            if (accept('*')) acc = combine_mul(acc, factor(), false);
            else if (accept('/')) acc = combine_mul(acc, factor(), true);
            else break;
        }
        return acc;
    }

    Val combine_mul(Val a, Val b, bool divide) {
        if (divide) {
            if (!b.is_scalar)
                throw ParseError("cannot divide by a form/vector at column " + std::to_string(col()),
                                 col());
            b.scalar = Expr::pow(b.scalar, -1);
        }
        if (a.is_scalar && b.is_scalar) {
            a.scalar = a.scalar * b.scalar;
            return a;
        }
        if (!a.is_scalar && !b.is_scalar)
            throw ParseError("use W(...) to wedge covector atoms (column " + std::to_string(col()) +
                                 ")",
                             col());
        Val r;
        r.is_scalar = false;
        if (a.is_scalar) r.alt = b.alt.scaled(a.scalar);
        else r.alt = a.alt.scaled(b.scalar);
        return r;
    }

    Val factor() {
        Val b = base();
        skip();
        if (accept('^')) {
            if (!b.is_scalar)
                throw ParseError("cannot raise a form atom to a power (column " +
                                     std::to_string(col()) + ")",
                                 col());
            bool negative = accept('-');
            skip();
            long long v = 0;
            if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
                throw ParseError("expected integer exponent at column " + std::to_string(col()),
                                 col());
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                v = v * 10 + (s[i++] - '0');
            b.scalar = Expr::pow(b.scalar, negative ? -v : v);
        }
        return b;
    }

    int atom_slot_letter() {
        // parses one atom of the current variance, returns basis slot
        if (var == Variance::Co) {
            if (accept_word("D")) {
                expect('(');
                std::string name = ident();
                expect(')');
                return coord_slot(name);
            }
            if (accept_word("B")) return singular_slot();
        } else {
            if (accept_word("V")) {
                expect('(');
                std::string name = ident();
                expect(')');
                return coord_slot(name);
            }
            if (accept_word("Zv")) return singular_slot();
        }
        throw ParseError("expected a basis atom at column " + std::to_string(col()), col());
    }

    int singular_slot() {
        if (!chart.singular())
            throw ParseError("singular basis atom on a smooth chart (column " +
                                 std::to_string(col()) + ")",
                             col());
        return 0;
    }

    // returns -1 for the defining coordinate: handled by caller (D(z) = z^m B)
    int coord_slot(const std::string& name) {
        int ci = chart.index_of(name);
        if (ci < 0)
            throw ParseError("unknown coordinate '" + name + "' at column " + std::to_string(col()),
                             col());
        if (chart.singular() && ci == chart.z_index()) {
            if (var == Variance::Contra)
                throw ParseError("V(" + name + ") is not a b-field; use Zv (column " +
                                     std::to_string(col()) + ")",
                                 col());
            return -1;
        }
        Alt probe(chart, 0, var);
        return probe.smooth_index(name);
    }

    Val base() {
        skip();
        int c0 = col();
        if (i >= s.size()) throw ParseError("unexpected end of input", c0);
        char c = s[i];
        if (peek_word("W")) {
            i += 1;
            expect('(');
            Alt acc(chart, 0, var);
            acc.set(0, Expr::num(1));
            while (true) {
                Alt one = atom_alt();
                acc = wedge(acc, one);
                skip();
                if (accept(',')) continue;
                break;
            }
            expect(')');
            Val v;
            v.is_scalar = false;
            v.alt = acc;
            return v;
        }
        if (peek_word("D") || peek_word("B") || peek_word("V") || peek_word("Zv")) {
            Val v;
            v.is_scalar = false;
            v.alt = atom_alt();
            return v;
        }
        if (c == '(') {
            ++i;
            Val v = expr();
            expect(')');
            return v;
        }
        if (c == '-') {
            ++i;
            Val v = base();
            if (v.is_scalar) v.scalar = Expr::neg(v.scalar);
            else v.alt = v.alt.scaled(Expr::num(-1));
            return v;
        }
        // fall back to a scalar base: number / ident / function
        return scalar_base();
    }

    Alt atom_alt() {
        int slot = atom_slot_letter();
        Alt a(chart, 1, var);
        if (slot == -1) {
            // D(z) on a singular chart embeds as z^m * sigma
            a.set(1u, Expr::pow(Expr::sym(chart.z_name()), chart.order()));
        } else {
            a.set(1u << slot, Expr::num(1));
        }
        return a;
    }

    std::string ident() {
        skip();
        int c0 = col();
        std::string name;
        while (i < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) {
            name += s[i++];
        }
        if (name.empty()) throw ParseError("expected identifier at column " + std::to_string(c0), c0);
        return name;
    }

    Val scalar_base() {
        skip();
        int c0 = col();
        char c = s[i];
        Val v;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string digits;
            int frac = -1;
            while (i < s.size()) {
                char ch = s[i];
                if (std::isdigit(static_cast<unsigned char>(ch))) {
                    digits += ch;
                    if (frac >= 0) ++frac;
                    ++i;
                } else if (ch == '.' && frac < 0) {
                    frac = 0;
                    ++i;
                } else break;
            }
            Rational r{boost::multiprecision::cpp_int(digits)};
            if (frac > 0) {
                boost::multiprecision::cpp_int den = 1;
                for (int j = 0; j < frac; ++j) den *= 10;
                r /= Rational(den);
            }
            v.scalar = Expr::num(r);
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string name = ident();
            if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
                expect('(');
                Val a = expr();
                if (!a.is_scalar)
                    throw ParseError("function of a form atom at column " + std::to_string(c0), c0);
                expect(')');
                K k = name == "sin"   ? K::Sin
                      : name == "cos" ? K::Cos
                      : name == "exp" ? K::Exp
                                      : K::Log;
                v.scalar = Expr::fn(k, a.scalar);
                return v;
            }
            if (!chart.has_coord(name))
                throw ParseError("unknown identifier '" + name + "' at column " +
                                     std::to_string(c0),
                                 c0);
            v.scalar = Expr::sym(name);
            return v;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at column " +
                             std::to_string(c0),
                         c0);
    }
};

} // namespace

Alt parse_alt(const std::string& text, const Chart& chart, Variance var) {
    FParser p{text, 0, chart, var};
    auto v = p.expr();
    p.skip();
    if (p.i < p.s.size())
        throw ParseError("trailing input at column " + std::to_string(p.col()), p.col());
    Alt a = v.is_scalar ? p.scalar_as_alt(v.scalar) : v.alt;
    a.simplify_inplace();
    return a;
}

std::string to_literal(const Alt& a) {
    if (a.comps().empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [mask, c] : a.comps()) {
        if (!first) os << " + ";
        first = false;
        std::string cs = to_string(c);
        bool needs_parens = c.kind() == K::Add || cs.find(' ') != std::string::npos;
        if (mask == 0) {
            os << cs;
            continue;
        }
        os << (needs_parens ? "(" + cs + ")" : cs) << " * ";
        std::vector<int> slots;
        for (uint32_t mm = mask; mm;) {
            slots.push_back(std::countr_zero(mm));
            mm &= mm - 1;
        }
        auto atom = [&](int slot) {
            std::string n = a.basis_name(slot);
            if (n == "B" || n == "Zv") return n;
            return (a.variance() == Variance::Co ? "D(" : "V(") + n + ")";
        };
        if (slots.size() == 1) os << atom(slots[0]);
        else {
            os << "W(";
            for (size_t i = 0; i < slots.size(); ++i) {
                if (i) os << ", ";
                os << atom(slots[i]);
            }
            os << ")";
        }
    }
    return os.str();
}

Chart chart_from_json(const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    std::vector<std::string> coords = j.at("coords").get<std::vector<std::string>>();
    std::vector<Interval> box;
    for (const auto& iv : j.at("box")) box.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
    if (j.contains("z")) {
        int m = j.value("m", 1);
        return Chart(coords, box, j.at("z").get<std::string>(), m);
    }
    return Chart(coords, box);
}

std::string chart_to_json(const Chart& c) {
    nlohmann::json j;
    j["coords"] = c.coords();
    auto box = nlohmann::json::array();
    for (const auto& iv : c.box()) box.push_back({iv.lo, iv.hi});
    j["box"] = box;
    if (c.singular()) {
        j["z"] = c.z_name();
        j["m"] = c.order();
    }
    return j.dump();
}

bool alt_equal_on_grid(const Alt& a, const Alt& b, int n, double tol, const GridCfg& cfg,
                       Regime regime) {
    if (!a.chart().same_as(b.chart()) || a.degree() != b.degree()) return false;
    Alt d = a - b;
    for (const auto& [m, c] : d.comps()) {
        auto rep = equal_on_grid(c, Expr::num(0), a.chart(), n, tol, cfg, regime);
        if (!rep.equal) return false;
    }
    return true;
}

bool alt_struct_zero(const Alt& a) {
    for (const auto& [m, c] : a.comps())
        if (!simplify(c).is_zero()) return false;
    return true;
}

} // namespace bct
