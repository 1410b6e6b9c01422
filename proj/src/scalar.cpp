#include "bcontact/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace bct {

namespace {

std::shared_ptr<const Node> make_node(Node n) {
    return std::make_shared<const Node>(std::move(n));
}

int kind_rank(K k) { return static_cast<int>(k); }

} // namespace

std::shared_ptr<const Node> Expr::zero_node() {
    static std::shared_ptr<const Node> z = [] {
        Node n;
        n.kind = K::Num;
        n.num = 0;
        n.num_cache = 0.0;
        return make_node(std::move(n));
    }();
    return z;
}

Expr Expr::num(Rational r) {
    Node n;
    n.kind = K::Num;
    n.num_cache = r.convert_to<double>();
    n.num = std::move(r);
    return Expr(make_node(std::move(n)));
}

Expr Expr::sym(std::string name) {
    Node n;
    n.kind = K::Sym;
    n.sym = std::move(name);
    return Expr(make_node(std::move(n)));
}

Expr Expr::add(std::vector<Expr> ts) {
    if (ts.empty()) return num(0);
    if (ts.size() == 1) return ts[0];
    Node n;
    n.kind = K::Add;
    n.kids = std::move(ts);
    return Expr(make_node(std::move(n)));
}

Expr Expr::mul(std::vector<Expr> ts) {
    if (ts.empty()) return num(1);
    if (ts.size() == 1) return ts[0];
    Node n;
    n.kind = K::Mul;
    n.kids = std::move(ts);
    return Expr(make_node(std::move(n)));
}

Expr Expr::neg(Expr e) {
    Node n;
    n.kind = K::Neg;
    n.kids.push_back(std::move(e));
    return Expr(make_node(std::move(n)));
}

Expr Expr::pow(Expr base, long long k) {
    Node n;
    n.kind = K::Pow;
    n.kids.push_back(std::move(base));
    n.expnt = k;
    return Expr(make_node(std::move(n)));
}

Expr Expr::fn(K kind, Expr arg) {
    Node n;
    n.kind = kind;
    n.kids.push_back(std::move(arg));
    return Expr(make_node(std::move(n)));
}

Expr Expr::hybrid(std::shared_ptr<const HybridFn> h, int fn, int order, Expr arg) {
    Node n;
    n.kind = K::Hyb;
    n.hyb = std::move(h);
    n.hyb_fn = fn;
    n.hyb_order = order;
    n.kids.push_back(std::move(arg));
    return Expr(make_node(std::move(n)));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, Expr::neg(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator-(const Expr& a) { return Expr::neg(a); }

int compare(const Expr& a, const Expr& b) {
    if (a.ptr() == b.ptr()) return 0;
    const Node& x = a.node();
    const Node& y = b.node();
    if (x.kind != y.kind) return kind_rank(x.kind) < kind_rank(y.kind) ? -1 : 1;
    switch (x.kind) {
        case K::Num:
            if (x.num == y.num) return 0;
            return x.num < y.num ? -1 : 1;
        case K::Sym:
            return x.sym.compare(y.sym) < 0 ? -1 : (x.sym == y.sym ? 0 : 1);
        case K::Pow: {
            int c = compare(x.kids[0], y.kids[0]);
            if (c) return c;
            if (x.expnt == y.expnt) return 0;
            return x.expnt < y.expnt ? -1 : 1;
        }
        case K::Hyb: {
            std::string ix = x.hyb->hybrid_id(), iy = y.hyb->hybrid_id();
            if (ix != iy) return ix < iy ? -1 : 1;
            if (x.hyb_fn != y.hyb_fn) return x.hyb_fn < y.hyb_fn ? -1 : 1;
            if (x.hyb_order != y.hyb_order) return x.hyb_order < y.hyb_order ? -1 : 1;
            return compare(x.kids[0], y.kids[0]);
        }
        default: {
            if (x.kids.size() != y.kids.size())
                return x.kids.size() < y.kids.size() ? -1 : 1;
            for (size_t i = 0; i < x.kids.size(); ++i) {
                int c = compare(x.kids[i], y.kids[i]);
                if (c) return c;
            }
            return 0;
        }
    }
}

std::size_t node_count(const Expr& e) {
    std::size_t c = 1;
    for (const auto& k : e.node().kids) c += node_count(k);
    return c;
}

// ---------------------------------------------------------------------------
// Simplification: canonical sums/products with exact rational folding.
// ---------------------------------------------------------------------------

namespace {

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr simp(const Expr& e);

bool fits_fold(long long k) { return k >= -32 && k <= 32; }

Rational rational_pow(const Rational& q, long long k) {
    using boost::multiprecision::cpp_int;
    cpp_int num = boost::multiprecision::numerator(q);
    cpp_int den = boost::multiprecision::denominator(q);
    bool inv = k < 0;
    unsigned long long a = static_cast<unsigned long long>(inv ? -k : k);
    cpp_int pn = boost::multiprecision::pow(num, static_cast<unsigned>(a));
    cpp_int pd = boost::multiprecision::pow(den, static_cast<unsigned>(a));
    if (inv) {
        if (pn < 0) {
            pn = -pn;
            pd = -pd;
        }
        return Rational(pd, pn);
    }
    return Rational(pn, pd);
}

// Split a canonical term into rational coefficient and the rest.
std::pair<Rational, Expr> split_coeff(const Expr& t) {
    if (t.kind() == K::Num) return {t.node().num, Expr::num(1)};
    if (t.kind() == K::Mul) {
        const auto& ks = t.node().kids;
        if (!ks.empty() && ks[0].kind() == K::Num) {
            std::vector<Expr> rest(ks.begin() + 1, ks.end());
            return {ks[0].node().num, Expr::mul(std::move(rest))};
        }
    }
    return {Rational(1), t};
}

Expr with_coeff(const Rational& c, const Expr& rest) {
    if (c == 0) return Expr::num(0);
    if (rest.is_one()) return Expr::num(c);
    if (c == 1) return rest;
    if (rest.kind() == K::Mul) {
        std::vector<Expr> ks;
        ks.push_back(Expr::num(c));
        for (const auto& k : rest.node().kids) ks.push_back(k);
        return Expr::mul(std::move(ks));
    }
    return Expr::mul({Expr::num(c), rest});
}

// base -> exponent map for a canonical product body.
void collect_factors(const Expr& t, std::map<Expr, long long, ExprLess>& out) {
    if (t.kind() == K::Pow) {
        out[t.node().kids[0]] += t.node().expnt;
    } else if (t.kind() == K::Mul) {
        for (const auto& k : t.node().kids)
            if (k.kind() != K::Num) collect_factors(k, out);
    } else if (!t.is_one()) {
        out[t] += 1;
    }
}

Expr rebuild_pow(const Expr& base, long long k) {
    if (k == 0) return Expr::num(1);
    if (k == 1) return base;
    return Expr::pow(base, k);
}

Expr simp_add(std::vector<Expr> kids);

Expr simp_mul(std::vector<Expr> kids) {
    // Flatten, fold constants, combine identical bases, merge exp factors,
    // then distribute over sum factors (small positive exponents only).
    Rational coeff(1);
    std::map<Expr, long long, ExprLess> factors;
    std::vector<Expr> exp_args;
    std::vector<Expr> stack(kids.rbegin(), kids.rend());
    while (!stack.empty()) {
        Expr t = stack.back();
        stack.pop_back();
        switch (t.kind()) {
            case K::Num:
                coeff *= t.node().num;
                if (coeff == 0) return Expr::num(0);
                break;
            case K::Mul:
                for (auto it = t.node().kids.rbegin(); it != t.node().kids.rend(); ++it)
                    stack.push_back(*it);
                break;
            case K::Exp:
                exp_args.push_back(t.node().kids[0]);
                break;
            case K::Pow: {
                const Expr& b = t.node().kids[0];
                if (b.kind() == K::Exp) {
                    exp_args.push_back(simp(Expr::mul({Expr::num(t.node().expnt), b.node().kids[0]})));
                } else {
                    factors[b] += t.node().expnt;
                }
                break;
            }
            default:
                factors[t] += 1;
        }
    }
    std::vector<Expr> out;
    if (!exp_args.empty()) {
        Expr a = simp(Expr::add(std::move(exp_args)));
        if (a.is_num()) {
            if (!a.is_zero()) factors[Expr::fn(K::Exp, a)] += 1;  // exp(0) -> 1 dropped
        } else {
            factors[Expr::fn(K::Exp, a)] += 1;
        }
    }
    std::vector<const std::vector<Expr>*> sum_factors;  // term lists to distribute
    std::vector<Expr> sum_repeat;                       // owning copies
    size_t combos = 1;
    for (const auto& [base, k] : factors) {
        if (k == 0) continue;
        if (base.is_num() && fits_fold(k) && !(base.is_zero() && k < 0)) {
            coeff *= rational_pow(base.node().num, k);
            if (coeff == 0) return Expr::num(0);
            continue;
        }
        if (base.kind() == K::Add && k >= 1 && k <= 4) {
            size_t c = combos;
            for (long long r = 0; r < k; ++r) c *= base.node().kids.size();
            if (c <= 512) {
                for (long long r = 0; r < k; ++r) sum_repeat.push_back(base);
                combos = c;
                continue;
            }
        }
        out.push_back(rebuild_pow(base, k));
    }
    for (const auto& s : sum_repeat) sum_factors.push_back(&s.node().kids);

    std::sort(out.begin(), out.end(), ExprLess{});
    auto assemble = [&](const Rational& c, std::vector<Expr> fs) -> Expr {
        if (fs.empty()) return Expr::num(c);
        if (c != 1) {
            std::vector<Expr> withc;
            withc.push_back(Expr::num(c));
            for (auto& t : fs) withc.push_back(std::move(t));
            return Expr::mul(std::move(withc));
        }
        return Expr::mul(std::move(fs));
    };

    if (sum_factors.empty()) return assemble(coeff, out);

    // Distribute: one term from each sum factor per combination.
    std::vector<Expr> terms;
    std::vector<size_t> pick(sum_factors.size(), 0);
    while (true) {
        std::vector<Expr> fs;
        fs.push_back(Expr::num(coeff));
        for (const auto& f : out) fs.push_back(f);
        for (size_t i = 0; i < pick.size(); ++i) fs.push_back((*sum_factors[i])[pick[i]]);
        terms.push_back(simp_mul(std::move(fs)));
        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < sum_factors[i]->size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return simp_add(std::move(terms));
}

// Locate a sin(u)^2 (or cos(u)^2) factor inside a canonical term body;
// returns the argument and the cofactor with that square removed.
bool find_sin2(const Expr& rest, Expr& arg, Expr& cofactor, bool want_sin) {
    K fk = want_sin ? K::Sin : K::Cos;
    auto is_sq = [&](const Expr& f, Expr& a) {
        if (f.kind() == K::Pow && f.node().expnt == 2 && f.node().kids[0].kind() == fk) {
            a = f.node().kids[0].node().kids[0];
            return true;
        }
        return false;
    };
    if (is_sq(rest, arg)) {
        cofactor = Expr::num(1);
        return true;
    }
    if (rest.kind() == K::Mul) {
        const auto& ks = rest.node().kids;
        for (size_t i = 0; i < ks.size(); ++i) {
            if (is_sq(ks[i], arg)) {
                std::vector<Expr> rem;
                for (size_t j = 0; j < ks.size(); ++j)
                    if (j != i) rem.push_back(ks[j]);
                cofactor = Expr::mul(std::move(rem));
                return true;
            }
        }
    }
    return false;
}

Expr with_sq(const Expr& arg, const Expr& cofactor, K fk) {
    Expr c2 = Expr::pow(Expr::fn(fk, arg), 2);
    if (cofactor.is_one()) return c2;
    return simp_mul({cofactor, c2});
}

Expr simp_add(std::vector<Expr> kids) {
    std::map<Expr, Rational, ExprLess> terms;  // rest -> coefficient
    Rational constant(0);
    std::vector<Expr> stack(kids.rbegin(), kids.rend());
    while (!stack.empty()) {
        Expr t = stack.back();
        stack.pop_back();
        if (t.kind() == K::Add) {
            for (auto it = t.node().kids.rbegin(); it != t.node().kids.rend(); ++it)
                stack.push_back(*it);
            continue;
        }
        auto [c, rest] = split_coeff(t);
        if (rest.is_one()) constant += c;
        else {
            auto it = terms.find(rest);
            if (it == terms.end()) terms.emplace(rest, c);
            else {
                it->second += c;
                if (it->second == 0) terms.erase(it);
            }
        }
    }
    // Pythagorean cleanup: c*(K sin^2 + K cos^2) -> c*K, and the complement
    // K - K sin^2 -> K cos^2 (likewise for cos). Each rewrite removes a term.
    auto add_term = [&](const Expr& key, const Rational& c) {
        if (c == 0) return;
        if (key.is_one()) {
            constant += c;
            return;
        }
        auto kt = terms.find(key);
        if (kt == terms.end()) terms.emplace(key, c);
        else {
            kt->second += c;
            if (kt->second == 0) terms.erase(kt);
        }
    };
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 64) {
        changed = false;
        for (auto it = terms.begin(); it != terms.end(); ++it) {
            Expr arg, cof;
            bool is_sin = find_sin2(it->first, arg, cof, true);
            bool is_cos = !is_sin && find_sin2(it->first, arg, cof, false);
            if (!is_sin && !is_cos) continue;
            K other = is_sin ? K::Cos : K::Sin;
            Expr partner = with_sq(arg, cof, other);
            auto jt = terms.find(partner);
            if (jt != terms.end() && jt != it) {
                Rational moved = jt->second;  // moved*(sin^2+cos^2) -> moved
                Rational mine = it->second;
                terms.erase(jt);
                it->second = mine - moved;
                if (it->second == 0) terms.erase(it);
                add_term(cof, moved);
                changed = true;
                break;
            }
            // complement: c*K + (-c)*K*sin^2 -> c*K*cos^2
            Rational cof_coeff(0);
            bool have_cof = false;
            if (cof.is_one()) {
                cof_coeff = constant;
                have_cof = constant != 0;
            } else {
                auto kt = terms.find(cof);
                if (kt != terms.end()) {
                    cof_coeff = kt->second;
                    have_cof = true;
                }
            }
            if (have_cof && cof_coeff == -it->second) {
                Rational c = cof_coeff;
                if (cof.is_one()) constant = 0;
                else terms.erase(terms.find(cof));
                terms.erase(it);
                add_term(with_sq(arg, cof, other), c);
                changed = true;
                break;
            }
        }
    }
    std::vector<Expr> out;
    for (const auto& [rest, c] : terms) out.push_back(with_coeff(c, rest));
    if (constant != 0 || out.empty()) out.insert(out.begin(), Expr::num(constant));
    return Expr::add(std::move(out));
}

// Common monomial factor of a canonical sum (shared bases at min exponent).
bool extract_common_monomial(const Expr& addExpr, Expr& mono, Expr& reduced) {
    const auto& terms = addExpr.node().kids;
    if (terms.size() < 2) return false;
    std::map<Expr, long long, ExprLess> common;
    bool first = true;
    for (const auto& t : terms) {
        if (t.is_num()) return false;  // a bare constant shares no factor
        std::map<Expr, long long, ExprLess> fs;
        collect_factors(t, fs);
        if (first) {
            common = fs;
            first = false;
        } else {
            for (auto it = common.begin(); it != common.end();) {
                auto jt = fs.find(it->first);
                if (jt == fs.end()) it = common.erase(it);
                else {
                    it->second = std::min(it->second, jt->second);
                    ++it;
                }
            }
        }
        if (common.empty()) return false;
    }
    std::vector<Expr> mfs, inv;
    for (const auto& [b, k] : common) {
        if (k == 0) continue;
        mfs.push_back(rebuild_pow(b, k));
        inv.push_back(rebuild_pow(b, -k));
    }
    if (mfs.empty()) return false;
    mono = simp_mul(mfs);
    std::vector<Expr> red;
    for (const auto& t : terms) {
        std::vector<Expr> fs = inv;
        fs.push_back(t);
        red.push_back(simp_mul(std::move(fs)));
    }
    reduced = simp_add(std::move(red));
    return true;
}

Expr simp(const Expr& e) {
    switch (e.kind()) {
        case K::Num:
        case K::Sym:
            return e;
        case K::Neg:
            return simp_mul({Expr::num(-1), simp(e.node().kids[0])});
        case K::Add: {
            std::vector<Expr> ks;
            ks.reserve(e.node().kids.size());
            for (const auto& k : e.node().kids) ks.push_back(simp(k));
            return simp_add(std::move(ks));
        }
        case K::Mul: {
            std::vector<Expr> ks;
            ks.reserve(e.node().kids.size());
            for (const auto& k : e.node().kids) ks.push_back(simp(k));
            return simp_mul(std::move(ks));
        }
        case K::Pow: {
            Expr b = simp(e.node().kids[0]);
            long long k = e.node().expnt;
            if (k == 0) return Expr::num(1);
            if (k == 1) return b;
            if (b.is_num() && fits_fold(k) && !(b.is_zero() && k < 0))
                return Expr::num(rational_pow(b.node().num, k));
            if (b.kind() == K::Pow) return simp(Expr::pow(b.node().kids[0], b.node().expnt * k));
            if (b.kind() == K::Mul) {
                std::vector<Expr> fs;
                for (const auto& f : b.node().kids) fs.push_back(Expr::pow(f, k));
                return simp_mul(std::move(fs));
            }
            if (b.kind() == K::Add && k >= 2 && k <= 4) return simp_mul({Expr::pow(b, k)});
            if (b.kind() == K::Exp)
                return simp(Expr::fn(K::Exp, Expr::mul({Expr::num(k), b.node().kids[0]})));
            if (b.kind() == K::Add) {
                Expr mono, reduced;
                if (extract_common_monomial(b, mono, reduced))
                    return simp_mul({Expr::pow(mono, k), Expr::pow(reduced, k)});
            }
            return Expr::pow(b, k);
        }
        case K::Sin: {
            Expr a = simp(e.node().kids[0]);
            if (a.is_zero()) return Expr::num(0);
            return Expr::fn(K::Sin, a);
        }
        case K::Cos: {
            Expr a = simp(e.node().kids[0]);
            if (a.is_zero()) return Expr::num(1);
            return Expr::fn(K::Cos, a);
        }
        case K::Exp: {
            Expr a = simp(e.node().kids[0]);
            if (a.is_zero()) return Expr::num(1);
            return Expr::fn(K::Exp, a);
        }
        case K::Log: {
            Expr a = simp(e.node().kids[0]);
            if (a.is_one()) return Expr::num(0);
            return Expr::fn(K::Log, a);
        }
        case K::Hyb:
            return Expr::hybrid(e.node().hyb, e.node().hyb_fn, e.node().hyb_order,
                                simp(e.node().kids[0]));
    }
    return e;
}

} // namespace

Expr simplify(const Expr& e) { return simp(e); }

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

Expr diff_raw(const Expr& e, const std::string& x) {
    switch (e.kind()) {
        case K::Num:
            return Expr::num(0);
        case K::Sym:
            return Expr::num(e.node().sym == x ? 1 : 0);
        case K::Neg:
            return Expr::neg(diff_raw(e.node().kids[0], x));
        case K::Add: {
            std::vector<Expr> ts;
            for (const auto& k : e.node().kids) ts.push_back(diff_raw(k, x));
            return Expr::add(std::move(ts));
        }
        case K::Mul: {
            std::vector<Expr> ts;
            const auto& ks = e.node().kids;
            for (size_t i = 0; i < ks.size(); ++i) {
                std::vector<Expr> fs;
                for (size_t j = 0; j < ks.size(); ++j)
                    fs.push_back(j == i ? diff_raw(ks[j], x) : ks[j]);
                ts.push_back(Expr::mul(std::move(fs)));
            }
            return Expr::add(std::move(ts));
        }
        case K::Pow: {
            const Expr& b = e.node().kids[0];
            long long k = e.node().expnt;
            return Expr::mul({Expr::num(k), Expr::pow(b, k - 1), diff_raw(b, x)});
        }
        case K::Sin:
            return Expr::mul({Expr::fn(K::Cos, e.node().kids[0]), diff_raw(e.node().kids[0], x)});
        case K::Cos:
            return Expr::neg(
                Expr::mul({Expr::fn(K::Sin, e.node().kids[0]), diff_raw(e.node().kids[0], x)}));
        case K::Exp:
            return Expr::mul({e, diff_raw(e.node().kids[0], x)});
        case K::Log:
            return Expr::mul({Expr::pow(e.node().kids[0], -1), diff_raw(e.node().kids[0], x)});
        case K::Hyb: {
            const Node& n = e.node();
            if (n.hyb_order + 1 > n.hyb->hybrid_max_order())
                throw Error("hybrid node differentiated beyond its supported order: " +
                            n.hyb->hybrid_id());
            Expr up = Expr::hybrid(n.hyb, n.hyb_fn, n.hyb_order + 1, n.kids[0]);
            return Expr::mul({up, diff_raw(n.kids[0], x)});
        }
    }
    return Expr::num(0);
}

} // namespace

Expr diff(const Expr& e, const std::string& coord) { return simplify(diff_raw(e, coord)); }

namespace {

Expr subst_raw(const Expr& e, const std::string& x, const Expr& v) {
    switch (e.kind()) {
        case K::Num:
            return e;
        case K::Sym:
            return e.node().sym == x ? v : e;
        case K::Pow:
            return Expr::pow(subst_raw(e.node().kids[0], x, v), e.node().expnt);
        case K::Hyb:
            return Expr::hybrid(e.node().hyb, e.node().hyb_fn, e.node().hyb_order,
                                subst_raw(e.node().kids[0], x, v));
        default: {
            std::vector<Expr> ks;
            for (const auto& k : e.node().kids) ks.push_back(subst_raw(k, x, v));
            Node n = e.node();
            n.kids = std::move(ks);
            return Expr(std::make_shared<const Node>(std::move(n)));
        }
    }
}

} // namespace

Expr subst(const Expr& e, const std::string& coord, const Expr& value) {
    return simplify(subst_raw(e, coord, value));
}

bool contains_sym(const Expr& e, const std::string& coord) {
    if (e.kind() == K::Sym) return e.node().sym == coord;
    for (const auto& k : e.node().kids)
        if (contains_sym(k, coord)) return true;
    return false;
}

bool has_negative_power_of(const Expr& e, const std::string& coord) {
    // a pole along {coord = 0}: negative power whose base vanishes there
    if (e.kind() == K::Pow && e.node().expnt < 0 && contains_sym(e.node().kids[0], coord) &&
        subst(e.node().kids[0], coord, Expr::num(0)).is_zero())
        return true;
    for (const auto& k : e.node().kids)
        if (has_negative_power_of(k, coord)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_impl(const Expr& e, const Point& p, bool extended) {
    switch (e.kind()) {
        case K::Num:
            return e.node().num_cache;
        case K::Sym: {
            auto it = p.find(e.node().sym);
            if (it == p.end())
                throw EvalError("symbol '" + e.node().sym + "' has no value at this point",
                                e.node().sym);
            return it->second;
        }
        case K::Neg:
            return -eval_impl(e.node().kids[0], p, extended);
        case K::Add: {
            double s = 0.0;
            for (const auto& k : e.node().kids) s += eval_impl(k, p, extended);
            return s;
        }
        case K::Mul: {
            double s = 1.0;
            for (const auto& k : e.node().kids) s *= eval_impl(k, p, extended);
            return s;
        }
        case K::Pow: {
            double b = eval_impl(e.node().kids[0], p, extended);
            long long k = e.node().expnt;
            if (b == 0.0 && k < 0) {
                if (!extended)
                    throw EvalError("division by zero in " + to_string(e), to_string(e));
                double s = (k % 2 != 0 && std::signbit(b)) ? -1.0 : 1.0;
                return s * std::numeric_limits<double>::infinity();
            }
            return std::pow(b, static_cast<double>(k));
        }
        case K::Sin:
            return std::sin(eval_impl(e.node().kids[0], p, extended));
        case K::Cos:
            return std::cos(eval_impl(e.node().kids[0], p, extended));
        case K::Exp:
            return std::exp(eval_impl(e.node().kids[0], p, extended));
        case K::Log: {
            double a = eval_impl(e.node().kids[0], p, extended);
            if (a <= 0.0)
                throw EvalError("log of non-positive value in " + to_string(e), to_string(e));
            return std::log(a);
        }
        case K::Hyb:
            return e.node().hyb->hybrid_eval(e.node().hyb_fn, e.node().hyb_order,
                                             eval_impl(e.node().kids[0], p, extended));
    }
    return 0.0;
}

} // namespace

double eval(const Expr& e, const Point& p) { return eval_impl(e, p, false); }
double eval_extended(const Expr& e, const Point& p) { return eval_impl(e, p, true); }

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

enum Prec { P_ADD = 1, P_MUL = 2, P_POW = 3, P_ATOM = 4 };

std::string rat_str(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1)
        os << "/" << boost::multiprecision::denominator(r);
    return os.str();
}

std::string pr(const Expr& e, int prec);

std::string wrap(int outer, int inner, const std::string& s) {
    return inner < outer ? "(" + s + ")" : s;
}

// Print a term, splitting off a leading minus sign when negative.
std::pair<bool, std::string> pr_signed_term(const Expr& t) {
    auto [c, rest] = split_coeff(t);
    if (c < 0) {
        Expr flipped = with_coeff(-c, rest);
        return {true, pr(flipped, P_MUL)};
    }
    return {false, pr(t, P_MUL)};
}

std::string pr(const Expr& e, int prec) {
    switch (e.kind()) {
        case K::Num: {
            const Rational& r = e.node().num;
            std::string s = rat_str(r < 0 ? Rational(-r) : r);
            if (r < 0) return wrap(prec, P_ADD, "-" + s);
            if (boost::multiprecision::denominator(r) != 1) return wrap(prec, P_MUL, s);
            return s;
        }
        case K::Sym:
            return e.node().sym;
        case K::Neg:
            return wrap(prec, P_ADD, "-" + pr(e.node().kids[0], P_MUL));
        case K::Add: {
            std::string s;
            bool first = true;
            for (const auto& t : e.node().kids) {
                auto [negative, body] = pr_signed_term(t);
                if (first) {
                    s = (negative ? "-" : "") + body;
                    first = false;
                } else {
                    s += (negative ? " - " : " + ") + body;
                }
            }
            return wrap(prec, P_ADD, s);
        }
        case K::Mul: {
            std::string s;
            bool first = true;
            for (const auto& f : e.node().kids) {
                std::string body = pr(f, P_MUL + 1);
                if (first) {
                    s = body;
                    first = false;
                } else {
                    s += "*" + body;
                }
            }
            return wrap(prec, P_MUL, s);
        }
        case K::Pow: {
            std::string b = pr(e.node().kids[0], P_ATOM);
            return wrap(prec, P_POW, b + "^" + std::to_string(e.node().expnt));
        }
        case K::Sin:
            return "sin(" + pr(e.node().kids[0], P_ADD) + ")";
        case K::Cos:
            return "cos(" + pr(e.node().kids[0], P_ADD) + ")";
        case K::Exp:
            return "exp(" + pr(e.node().kids[0], P_ADD) + ")";
        case K::Log:
            return "log(" + pr(e.node().kids[0], P_ADD) + ")";
        case K::Hyb: {
            const Node& n = e.node();
            return "@" + n.hyb->hybrid_id() + ":" + std::to_string(n.hyb_fn) + ":" +
                   std::to_string(n.hyb_order) + "(" + pr(n.kids[0], P_ADD) + ")";
        }
    }
    return "?";
}

} // namespace

std::string to_string(const Expr& e) { return pr(e, P_ADD); }

// ---------------------------------------------------------------------------
// Parser (recursive descent over the scalar grammar)
// ---------------------------------------------------------------------------

namespace {

struct Lexer {
    const std::string& s;
    size_t i = 0;
    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    int col() const { return static_cast<int>(i) + 1; }
    bool eof() {
        skip();
        return i >= s.size();
    }
    char peek() {
        skip();
        return i < s.size() ? s[i] : '\0';
    }
    bool accept(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        skip();
        if (i >= s.size() || s[i] != c)
            throw ParseError(std::string("expected '") + c + "' (" + what + ") at column " +
                                 std::to_string(col()),
                             col());
        ++i;
    }
};

struct Parser {
    Lexer lx;
    const Chart& chart;

    Expr expr() {
        Expr acc = term();
        while (true) {
            if (lx.accept('+')) acc = acc + term();
            else if (lx.accept('-')) acc = acc - term();
            else break;
        }
        return acc;
    }

    Expr term() {
        Expr acc = factor();
        while (true) {
            if (lx.accept('*')) acc = acc * factor();
            else if (lx.accept('/')) acc = acc * Expr::pow(factor(), -1);
            else break;
        }
        return acc;
    }

    Expr factor() {
        Expr b = base();
        if (lx.accept('^')) {
            long long k = integer();
            return Expr::pow(b, k);
        }
        return b;
    }

    long long integer() {
        lx.skip();
        int c0 = lx.col();
        bool negative = lx.accept('-');
        lx.skip();
        if (lx.i >= lx.s.size() || !std::isdigit(static_cast<unsigned char>(lx.s[lx.i])))
            throw ParseError("expected integer exponent at column " + std::to_string(c0), c0);
        long long v = 0;
        while (lx.i < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.i]))) {
            v = v * 10 + (lx.s[lx.i] - '0');
            ++lx.i;
        }
        return negative ? -v : v;
    }

    Expr base() {
        lx.skip();
        int c0 = lx.col();
        if (lx.eof()) throw ParseError("unexpected end of input at column " + std::to_string(c0), c0);
        char c = lx.peek();
        if (c == '(') {
            lx.accept('(');
            Expr e = expr();
            lx.expect(')', "closing parenthesis");
            return e;
        }
        if (c == '-') {
            lx.accept('-');
            return Expr::neg(base());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(std::string("unexpected character '") + c + "' at column " +
                             std::to_string(c0),
                         c0);
    }

    Expr number() {
        lx.skip();
        int c0 = lx.col();
        std::string digits;
        int frac = -1;
        while (lx.i < lx.s.size()) {
            char c = lx.s[lx.i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits += c;
                if (frac >= 0) ++frac;
                ++lx.i;
            } else if (c == '.' && frac < 0) {
                frac = 0;
                ++lx.i;
            } else {
                break;
            }
        }
        if (digits.empty())
            throw ParseError("malformed number at column " + std::to_string(c0), c0);
        Rational r{boost::multiprecision::cpp_int(digits)};
        if (frac > 0) {
            boost::multiprecision::cpp_int den = 1;
            for (int j = 0; j < frac; ++j) den *= 10;
            r /= Rational(den);
        }
        return Expr::num(r);
    }

    Expr identifier() {
        lx.skip();
        int c0 = lx.col();
        std::string name;
        while (lx.i < lx.s.size()) {
            char c = lx.s[lx.i];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                name += c;
                ++lx.i;
            } else {
                break;
            }
        }
        if (name == "sin" || name == "cos" || name == "exp" || name == "log") {
            lx.expect('(', "function argument");
            Expr a = expr();
            lx.expect(')', "closing parenthesis");
            K k = name == "sin" ? K::Sin : name == "cos" ? K::Cos : name == "exp" ? K::Exp : K::Log;
            return Expr::fn(k, a);
        }
        if (!chart.has_coord(name))
            throw ParseError("unknown identifier '" + name + "' at column " + std::to_string(c0),
                             c0);
        return Expr::sym(name);
    }
};

} // namespace

Expr parse_scalar(const std::string& text, const Chart& chart) {
    Parser p{Lexer{text}, chart};
    Expr e = p.expr();
    if (!p.lx.eof())
        throw ParseError("trailing input at column " + std::to_string(p.lx.col()), p.lx.col());
    return simplify(e);
}

void check_symbols(const Expr& e, const Chart& chart) {
    if (e.kind() == K::Sym && !chart.has_coord(e.node().sym))
        throw ChartError("symbol '" + e.node().sym + "' is not a coordinate of the chart");
    for (const auto& k : e.node().kids) check_symbols(k, chart);
}

EqGridReport equal_on_grid(const Expr& e1, const Expr& e2, const Chart& chart, int n, double tol,
                           const GridCfg& cfg, Regime regime) {
    if (n < 1) throw Error("equal_on_grid needs n >= 1");
    EqGridReport rep;
    auto pts = sample_points(chart, cfg, regime, n);
    int evaluated = 0;
    for (const auto& p : pts) {
        double d;
        try {
            d = std::abs(eval(e1, p) - eval(e2, p));
        } catch (const EvalError&) {
            ++rep.skipped;
            if (rep.skipped_points.size() < 8) rep.skipped_points.push_back(p);
            continue;
        }
        ++evaluated;
        if (d > rep.max_discrepancy) {
            rep.max_discrepancy = d;
            rep.argmax = p;
        }
    }
    rep.equal = evaluated > 0 && rep.max_discrepancy <= tol;
    return rep;
}

} // namespace bct
