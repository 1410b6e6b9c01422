#include "bcontact/singular.hpp"

#include <cmath>
#include <sstream>

namespace bct {

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::DesingEven: return "desing-even";
        case ProfileKind::DesingOdd: return "desing-odd";
        case ProfileKind::SingEven: return "sing-even";
        case ProfileKind::SingOdd: return "sing-odd";
        case ProfileKind::SingOneSided: return "sing-onesided";
    }
    return "?";
}

namespace {

// order-9 smoothstep: S(0)=0, S(1)=1, S', .., S'''' vanish at both ends
const double kStep[] = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
// bump (u(1-u))^5: same vanishing order at the ends
const double kBump[] = {0, 0, 0, 0, 0, 1, -5, 10, -10, 5, -1};

double poly_deriv(const double* c, int n, int j, double u) {
    double acc = 0.0;
    for (int d = n; d >= j; --d) {
        double f = 1.0;
        for (int i = 0; i < j; ++i) f *= (d - i);
        acc = acc * u + c[d] * f;
    }
    return acc;
}

double chi(int j, double u) {  // 1 - S(u), derivatives in u
    double s = poly_deriv(kStep, 9, j, u);
    return j == 0 ? 1.0 - s : -s;
}

double bump(int j, double u) { return poly_deriv(kBump, 10, j, u); }

// d^j/dx^j of A x^e (integer e, possibly negative)
double mono(double A, int e, int j, double x) {
    double f = A;
    int ee = e;
    for (int i = 0; i < j; ++i) f *= ee--;
    if (f == 0.0) return 0.0;
    return f * std::pow(x, ee);
}

// d^j/dx^j of log|x|
double logd(int j, double x) {
    if (j == 0) return std::log(std::abs(x));
    double f = 1.0;
    for (int i = 1; i < j; ++i) f *= -i;
    return f * std::pow(x, -j);
}

// 20-point Gauss-Legendre nodes/weights on [0,1]
const double kGx[] = {0.0034357004074525, 0.0180140363610431, 0.0438827858743371,
                      0.0804415140888906, 0.1268340467699246, 0.1819731596367425,
                      0.2445664990245864, 0.3131469556422902, 0.3861070744291775,
                      0.4617367394332513, 0.5382632605667487, 0.6138929255708225,
                      0.6868530443577098, 0.7554335009754136, 0.8180268403632576,
                      0.8731659532300754, 0.9195584859111094, 0.9561172141256629,
                      0.9819859636389569, 0.9965642995925475};
const double kGw[] = {0.0088070035695761, 0.0203007149001935, 0.0313360241670545,
                      0.0416383707883524, 0.0509650599086202, 0.0590972659807592,
                      0.0658443192245883, 0.0710480546591910, 0.0745864932363019,
                      0.0763766935653629, 0.0763766935653629, 0.0745864932363019,
                      0.0710480546591910, 0.0658443192245883, 0.0590972659807592,
                      0.0509650599086202, 0.0416383707883524, 0.0313360241670545,
                      0.0203007149001935, 0.0088070035695761};

template <typename F>
double integrate(F&& f, double a, double b, int panels = 8) {
    double total = 0.0;
    double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * w;
        for (int i = 0; i < 20; ++i) total += w * kGw[i] * f(lo + w * kGx[i]);
    }
    return total;
}

struct ConstructionError : Error {
    using Error::Error;
};

} // namespace

ProfileFn::ProfileFn(ProfileKind kind, int k, double eps) : kind_(kind), k_(k), eps_(eps) {
    switch (kind_) {
        case ProfileKind::DesingEven:
        case ProfileKind::SingEven:
            m_ = 2 * k_;
            break;
        default:
            m_ = 2 * k_ + 1;
    }
    max_order_ = std::max(8, 2 * k_ + 6);
}

std::string ProfileFn::hybrid_id() const {
    std::ostringstream os;
    os << "profile[" << to_string(kind_) << ",k=" << k_ << ",eps=" << eps_ << "]";
    return os.str();
}

double ProfileFn::hybrid_eval(int fn, int order, double x) const {
    return fn == 0 ? deriv(order, x) : weight(order, x);
}

Expr ProfileFn::value_node(std::shared_ptr<const ProfileFn> self, const Expr& arg,
                           int order) const {
    return Expr::hybrid(std::move(self), 0, order, arg);
}

Expr ProfileFn::weight_node(std::shared_ptr<const ProfileFn> self, const Expr& arg,
                            int order) const {
    return Expr::hybrid(std::move(self), 1, order, arg);
}

// ---------------------------------------------------------------------------
// Base-variable evaluators (x >= 0); parity extensions and scaling on top.
// ---------------------------------------------------------------------------

namespace {
constexpr double kX0 = 0.4;  // desing-even inner/blend junction
}

double ProfileFn::base_deriv(int order, double x) const {
    const int j = order;
    switch (kind_) {
        case ProfileKind::DesingEven: {
            // f' = chi c0 + (1 - chi) x^{-2k} on [x0, 1]
            if (x <= kX0) {
                if (j == 0) return c0_ * x;
                return j == 1 ? c0_ : 0.0;
            }
            if (x >= 1.0) {
                if (j == 0) return mono(-1.0 / (2 * k_ - 1), -(2 * k_ - 1), 0, x) + 2.0;
                return mono(1.0, -2 * k_, j - 1, x);
            }
            const double w = 1.0 - kX0, u = (x - kX0) / w;
            if (j == 0)
                return c0_ * kX0 + integrate([&](double t) { return base_deriv(1, t); }, kX0, x);
            double acc = mono(1.0, -2 * k_, j - 1, x);
            for (int i = 0; i <= j - 1; ++i) {
                double binom = 1.0;
                for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                double rest = (j - 1 - i) == 0 ? c0_ - mono(1.0, -2 * k_, 0, x)
                                               : -mono(1.0, -2 * k_, j - 1 - i, x);
                acc += binom * chi(i, u) / std::pow(w, i) * rest;
            }
            return acc;
        }
        case ProfileKind::DesingOdd: {
            const int e = -(2 * k_ + 1);
            if (x <= 1.0) {
                if (j == 0) return s0_ * x * x - c1_;
                if (j == 1) return 2 * s0_ * x;
                return j == 2 ? 2 * s0_ : 0.0;
            }
            if (x >= 2.0) {
                if (j == 0)
                    return k_ == 0 ? logd(0, x) : mono(-1.0 / (2 * k_), -2 * k_, 0, x);
                return k_ == 0 ? logd(j, x) : mono(1.0, e, j - 1, x);
            }
            const double u = x - 1.0;
            if (j == 0)
                return (s0_ - c1_) + integrate([&](double t) { return base_deriv(1, t); }, 1.0, x);
            double acc = mono(1.0, e, j - 1, x);
            for (int i = 0; i <= j - 1; ++i) {
                double binom = 1.0;
                for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                int l = j - 1 - i;
                double rest = l == 0   ? 2 * s0_ * x - mono(1.0, e, 0, x)
                              : l == 1 ? 2 * s0_ - mono(1.0, e, 1, x)
                                       : -mono(1.0, e, l, x);
                acc += binom * chi(i, u) * rest;  // w = 1
            }
            return acc;
        }
        case ProfileKind::SingEven: {
            const int e = -(2 * k_ - 1);
            if (x <= eps_) {
                if (j == 0) return mono(-1.0, e, 0, x);
                return mono((2 * k_ - 1), -2 * k_, j - 1, x);
            }
            if (x >= 2 * eps_) {
                if (j == 0) return x;
                return j == 1 ? 1.0 : 0.0;
            }
            const double w = eps_, u = (x - eps_) / w;
            if (j == 0)
                return mono(-1.0, e, 0, eps_) +
                       integrate([&](double t) { return base_deriv(1, t); }, eps_, x);
            double acc = (j - 1 == 0) ? 1.0 : 0.0;
            for (int i = 0; i <= j - 1; ++i) {
                double binom = 1.0;
                for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                int l = j - 1 - i;
                double g1 = mono(2 * k_ - 1, -2 * k_, l, x);
                double rest = l == 0 ? g1 - 1.0 : g1;
                acc += binom * chi(i, u) / std::pow(w, i) * rest;
            }
            acc += bump_ * bump(j - 1, u) / std::pow(w, j - 1);
            return acc;
        }
        case ProfileKind::SingOdd: {
            const double t0 = 3 * eps_ / 8;
            auto g = [&](int l, double t) { return mono(1.0, -m_, l, t - t0); };
            if (x <= eps_ / 4) {
                const double w = eps_ / 4, u = x / w;
                if (j == 0) return integrate([&](double t) { return base_deriv(1, t); }, 0.0, x);
                double acc = g(j - 1, x);
                for (int i = 0; i <= j - 1; ++i) {
                    double binom = 1.0;
                    for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                    int l = j - 1 - i;
                    double rest = l == 0 ? d0_ - g(0, x) : -g(l, x);
                    acc += binom * chi(i, u) / std::pow(w, i) * rest;
                }
                return acc;
            }
            if (x <= eps_ / 2) {
                if (j == 0)
                    return k_ == 0 ? std::log(std::abs(x - t0))
                                   : mono(-1.0 / (2 * k_), -2 * k_, 0, x - t0);
                return g(j - 1, x);
            }
            if (x <= 3 * eps_ / 4) {
                const double w = eps_ / 4, u = (x - eps_ / 2) / w;
                if (j == 0)
                    return anchor_ +
                           integrate([&](double t) { return base_deriv(1, t); }, eps_ / 2, x);
                double acc = (j - 1 == 0) ? 1.0 : 0.0;
                for (int i = 0; i <= j - 1; ++i) {
                    double binom = 1.0;
                    for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                    int l = j - 1 - i;
                    double rest = l == 0 ? g(0, x) - 1.0 : g(l, x);
                    acc += binom * chi(i, u) / std::pow(w, i) * rest;
                }
                acc += bump_ * bump(j - 1, u) / std::pow(w, j - 1);
                return acc;
            }
            if (j == 0) return x;
            return j == 1 ? 1.0 : 0.0;
        }
        case ProfileKind::SingOneSided: {
            if (x <= eps_) {
                if (j == 0)
                    return k_ == 0 ? std::log(x) : mono(-1.0 / (2 * k_), -2 * k_, 0, x);
                return mono(1.0, -m_, j - 1, x);
            }
            if (x >= 2 * eps_) {
                if (j == 0) return x;
                return j == 1 ? 1.0 : 0.0;
            }
            const double w = eps_, u = (x - eps_) / w;
            if (j == 0) {
                double anchor = k_ == 0 ? std::log(eps_) : mono(-1.0 / (2 * k_), -2 * k_, 0, eps_);
                return anchor + integrate([&](double t) { return base_deriv(1, t); }, eps_, x);
            }
            double acc = (j - 1 == 0) ? 1.0 : 0.0;
            for (int i = 0; i <= j - 1; ++i) {
                double binom = 1.0;
                for (int l = 0; l < i; ++l) binom = binom * (j - 1 - l) / (l + 1);
                int l = j - 1 - i;
                double gl = mono(1.0, -m_, l, x);
                double rest = l == 0 ? gl - 1.0 : gl;
                acc += binom * chi(i, u) / std::pow(w, i) * rest;
            }
            acc += bump_ * bump(j - 1, u) / std::pow(w, j - 1);
            return acc;
        }
    }
    return 0.0;
}

double ProfileFn::deriv(int order, double x) const {
    if (order > max_order_) throw Error("profile derivative order beyond supported range");
    const bool desing = kind_ == ProfileKind::DesingEven || kind_ == ProfileKind::DesingOdd;
    const bool even_fn = kind_ == ProfileKind::DesingOdd || kind_ == ProfileKind::SingOneSided;
    double b, scale = 1.0;
    if (desing) {
        int pw = kind_ == ProfileKind::DesingEven ? 2 * k_ - 1 : 2 * k_;
        scale = std::pow(eps_, -pw - order);
        b = x / eps_;
    } else {
        b = x;
    }
    double sign = 1.0;
    if (b < 0) {
        b = -b;
        // even f: f^{(j)}(-x) = (-1)^j f^{(j)}(x); odd f: (-1)^{j+1}
        int flip = even_fn ? order : order + 1;
        sign = (flip % 2 == 0) ? 1.0 : -1.0;
    }
    return sign * scale * base_deriv(order, b);
}

double ProfileFn::weight_pos(int order, double t) const {
    const int j = order;
    switch (kind_) {
        case ProfileKind::SingEven:
            if (t <= eps_) return j == 0 ? (2 * k_ - 1) : 0.0;
            break;
        case ProfileKind::SingOneSided:
            if (t <= eps_) return j == 0 ? 1.0 : 0.0;
            break;
        default:
            throw Error("weight evaluator defined for sing-even and sing-onesided only");
    }
    // Leibniz on s'(t) * t^m
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) {
        double binom = 1.0;
        for (int l = 0; l < i; ++l) binom = binom * (j - l) / (l + 1);
        acc += binom * base_deriv(1 + i, t) * mono(1.0, m_, j - i, t);
    }
    return acc;
}

double ProfileFn::weight(int order, double t) const {
    // s' odd/even times t^m makes the weight an even function for both kinds
    double b = t < 0 ? -t : t;
    double sign = (t < 0 && order % 2 != 0) ? -1.0 : 1.0;
    return sign * weight_pos(order, b);
}

// ---------------------------------------------------------------------------
// Construction: solve the free constants, then verify the invariants.
// ---------------------------------------------------------------------------

void ProfileFn::construct_and_verify() {
    auto fail = [&](const std::string& clause) {
        throw ConstructionError("profile invariant violated (" + to_string(kind_) +
                                ", k=" + std::to_string(k_) + "): " + clause);
    };
    switch (kind_) {
        case ProfileKind::DesingEven: {
            if (k_ < 1) fail("k >= 1 required for even order");
            const double w = 1.0 - kX0;
            double Ichi = integrate([&](double x) { return chi(0, (x - kX0) / w); }, kX0, 1.0);
            double Ig = integrate(
                [&](double x) { return (1.0 - chi(0, (x - kX0) / w)) * std::pow(x, -2 * k_); },
                kX0, 1.0);
            double target = 2.0 - 1.0 / (2 * k_ - 1);
            c0_ = (target - Ig) / (kX0 + Ichi);
            if (!(c0_ > 0)) fail("positive inner slope");
            for (int i = 0; i <= 1000; ++i) {
                double x = -1.0 + 2.0 * i / 1000.0;
                if (!(deriv(1, x * eps_) > 0)) fail("derivative positive on [-eps, eps]");
            }
            break;
        }
        case ProfileKind::DesingOdd: {
            double Ichix =
                integrate([&](double x) { return chi(0, x - 1.0) * x; }, 1.0, 2.0);
            double Ig = integrate(
                [&](double x) { return (1.0 - chi(0, x - 1.0)) * std::pow(x, -(2 * k_ + 1)); },
                1.0, 2.0);
            if (k_ == 0) {
                s0_ = (std::log(2.0) - Ig) / (1.0 + 2 * Ichix);
                c1_ = 0.0;
            } else {
                double delta = (1.0 - std::pow(4.0, -k_)) / (2 * k_);
                s0_ = (delta - Ig) / (2 * Ichix);
                c1_ = s0_ + 1.0 / (2 * k_);
            }
            if (!(s0_ > 0)) fail("positive inner curvature");
            for (int i = 1; i <= 1000; ++i) {
                double x = 2.5 * i / 1000.0;
                if (!(base_deriv(1, x) > 0)) fail("derivative positive away from the origin");
            }
            // simple zero at 0: f'(x)/x bounded away from 0
            for (double x : {1e-3, 1e-2, 0.1}) {
                if (!(std::abs(base_deriv(1, x) / x) > 1e-6)) fail("simple derivative zero at 0");
            }
            break;
        }
        case ProfileKind::SingEven: {
            if (k_ < 1) fail("k >= 1 required for even order");
            const double a = eps_, b = 2 * eps_, w = eps_;
            double Ibase = integrate(
                [&](double t) {
                    double u = (t - a) / w;
                    return chi(0, u) * mono(2 * k_ - 1, -2 * k_, 0, t) + (1.0 - chi(0, u));
                },
                a, b);
            double IB = integrate([&](double t) { return bump(0, (t - a) / w); }, a, b);
            double delta = 2 * eps_ + std::pow(eps_, -(2 * k_ - 1));
            bump_ = (delta - Ibase) / IB;
            if (!(bump_ > -1e-12)) fail("nonnegative value-matching bump");
            for (int i = 1; i <= 1000; ++i) {
                double t = 3 * eps_ * i / 1000.0;
                if (!(base_deriv(1, t) > 0)) fail("derivative positive away from 0");
            }
            break;
        }
        case ProfileKind::SingOdd: {
            const double t0 = 3 * eps_ / 8;
            const double w0 = eps_ / 4;
            double v1 = k_ == 0 ? std::log(eps_ / 8.0)
                                : -1.0 / (2 * k_ * std::pow(eps_ / 8.0, 2 * k_));
            double Ichi0 = integrate([&](double t) { return chi(0, t / w0); }, 0.0, w0);
            double Ig0 = integrate(
                [&](double t) { return (1.0 - chi(0, t / w0)) * std::pow(t - t0, -m_); }, 0.0, w0);
            d0_ = (v1 - Ig0) / Ichi0;
            anchor_ = v1;  // s(eps/2) = s(eps/4) by symmetry of |t - t0|
            const double a = eps_ / 2, b = 3 * eps_ / 4, w = eps_ / 4;
            double Ibase = integrate(
                [&](double t) {
                    double u = (t - a) / w;
                    return chi(0, u) * std::pow(t - t0, -m_) + (1.0 - chi(0, u));
                },
                a, b);
            double IB = integrate([&](double t) { return bump(0, (t - a) / w); }, a, b);
            bump_ = (3 * eps_ / 4 - v1 - Ibase) / IB;
            for (int i = 0; i <= 1000; ++i) {
                double t = eps_ * i / 1000.0;
                if (std::abs(t - t0) < 1e-3 * eps_) continue;
                if (!(std::abs(base_deriv(1, t)) > 1e-12))
                    fail("derivative nonzero away from the singular points");
            }
            break;
        }
        case ProfileKind::SingOneSided: {
            const double a = eps_, b = 2 * eps_, w = eps_;
            double Ibase = integrate(
                [&](double t) {
                    double u = (t - a) / w;
                    return chi(0, u) * std::pow(t, -m_) + (1.0 - chi(0, u));
                },
                a, b);
            double IB = integrate([&](double t) { return bump(0, (t - a) / w); }, a, b);
            double sa = k_ == 0 ? std::log(eps_) : -1.0 / (2 * k_ * std::pow(eps_, 2 * k_));
            bump_ = (2 * eps_ - sa - Ibase) / IB;
            for (int i = 1; i <= 1000; ++i) {
                double t = 3 * eps_ * i / 1000.0;
                if (!(base_deriv(1, t) > 0)) fail("derivative positive for t > 0");
            }
            break;
        }
    }
    // parity
    for (double x : {0.3 * eps_, 0.9 * eps_, 1.7 * eps_}) {
        double lhs = deriv(0, -x);
        bool even_fn = kind_ == ProfileKind::DesingOdd || kind_ == ProfileKind::SingOneSided;
        double rhs = even_fn ? deriv(0, x) : -deriv(0, x);
        if (std::isfinite(lhs) && std::abs(lhs - rhs) > 1e-9 * (1 + std::abs(rhs)))
            fail("parity");
    }
    // join smoothness up to order min(4, 2k+1), one-sided comparison
    std::vector<double> junctions;
    switch (kind_) {
        case ProfileKind::DesingEven: junctions = {kX0 * eps_, 1.0 * eps_}; break;
        case ProfileKind::DesingOdd: junctions = {1.0 * eps_, 2.0 * eps_}; break;
        case ProfileKind::SingEven:
        case ProfileKind::SingOneSided: junctions = {eps_, 2 * eps_}; break;
        case ProfileKind::SingOdd:
            junctions = {eps_ / 4, eps_ / 2, 3 * eps_ / 4};
            break;
    }
    int jmax = std::min(4, 2 * k_ + 1);
    for (double xj : junctions) {
        for (int j = 0; j <= jmax; ++j) {
            double h = 1e-7 * eps_, H = 1e-2 * eps_;
            double lhs = deriv(j, xj - h), rhs = deriv(j, xj + h);
            // one-sided values drift by O(h f^{(j+1)}); compare the jump
            // against the derivative's scale probed at distance H >> h
            double scale = std::max({std::abs(lhs), std::abs(rhs), std::abs(deriv(j, xj - H)),
                                     std::abs(deriv(j, xj + H))});
            if (scale == 0.0) continue;
            if (std::abs(lhs - rhs) / scale > 2e-3)
                fail("C^" + std::to_string(j) + " continuity at junction " + std::to_string(xj));
        }
    }
}

std::shared_ptr<const ProfileFn> ProfileFn::build(ProfileKind kind, int k, double eps) {
    if (eps <= 0) throw Error("profile needs eps > 0");
    if (k < 0) throw Error("profile needs k >= 0");
    auto p = std::shared_ptr<ProfileFn>(new ProfileFn(kind, k, eps));
    p->construct_and_verify();
    return p;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

DesingResult desingularize(const BForm& alpha, std::shared_ptr<const ProfileFn> P,
                           const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (!c.singular()) throw ChartError("desingularize expects a b^m form");
    if (P->kind() != ProfileKind::DesingEven && P->kind() != ProfileKind::DesingOdd)
        throw Error("desingularize needs a desingularization profile");
    if (P->order() != c.order())
        throw Error("profile order " + std::to_string(P->order()) +
                     " does not match the chart order " + std::to_string(c.order()));
    auto conv = convexity_classify(alpha, cfg);
    if (conv.cls == ConvexityClass::NotAlmostConvex)
        throw SolveError("desingularize: form is not almost convex (offending coefficient " +
                         conv.offending + ")");

    auto [u_part, beta] = decompose(alpha);
    Expr u = u_part.coeff(0);
    DesingResult out;
    out.chart = c.smoothed();
    BForm beta_s = to_smooth_form(beta);
    Expr fprime = Expr::hybrid(P, 0, 1, Expr::sym(c.z_name()));
    BForm dz_part(out.chart, 1, Variance::Co);
    dz_part.set(1u << out.chart.index_of(c.z_name()), simplify(u * fprime));
    out.form = dz_part + beta_s;

    // agreement with alpha outside |z| > 2 eps, coefficientwise in the b-frame
    BForm emb = embed_in_bframe(out.form, c);
    BForm diffb = emb - alpha;
    const Interval& ziv = c.interval(c.z_index());
    double gap = 2 * P->eps() + 1e-9;
    double worst = 0.0;
    if (gap < 0.98 * std::max(ziv.hi, -ziv.lo)) {
        GridCfg far = cfg;
        far.z_margin = gap / ziv.width();
        for (const auto& [m, coef] : diffb.comps()) {
            for (const auto& p : sample_points(c, far, Regime::OffZ, cfg.n_off)) {
                try {
                    worst = std::max(worst, std::abs(eval(coef, p)));
                } catch (const EvalError&) {
                }
            }
        }
    }
    out.report.agreement_max = worst;

    // c(alpha_eps) = f'(z) z^m c(alpha) in the b-frame, relative on off-Z grid
    Expr c_eps = contact_coeff(emb);
    Expr c_b = contact_coeff(alpha);
    Expr zm = Expr::pow(Expr::sym(c.z_name()), c.order());
    Expr rhs = simplify(fprime * zm * c_b);
    double rel = 0.0;
    for (const auto& p : sample_points(c, cfg, Regime::OffZ, cfg.n_off)) {
        try {
            double l = eval(c_eps, p), r = eval(rhs, p);
            rel = std::max(rel, std::abs(l - r) / std::max({1.0, std::abs(l), std::abs(r)}));
        } catch (const EvalError&) {
        }
    }
    out.report.identity_rel_max = rel;

    if (P->kind() == ProfileKind::DesingEven) {
        out.report.contact_verdict = is_contact(out.form, cfg).verdict;
    } else {
        auto fr = folded_check(out.form, c.z_name(), cfg);
        out.report.folded_ok = fr.verdict == "folded";
    }
    return out;
}

FoldReport folded_check(const BForm& alpha, const std::string& axis, const GridCfg& cfg,
                        int slabs, double grad_tol) {
    const Chart& c = alpha.chart();
    if (c.singular()) throw ChartError("folded_check expects a smooth chart");
    if (c.dim() < 3 || c.dim() % 2 == 0)
        throw ChartError("folded_check needs odd chart dimension >= 3");
    FoldReport rep;
    rep.axis = axis.empty() ? (c.has_coord("z") ? "z" : c.coords().back()) : axis;
    int ai = c.index_of(rep.axis);
    if (ai < 0) throw ChartError("no axis coordinate '" + rep.axis + "'");

    Expr cc = contact_coeff(alpha);
    Expr dcc = diff(cc, rep.axis);

    // transverse sample set: low-discrepancy points in the other coordinates
    const int n_transverse = 24;
    Chart sub = c;  // reuse sampler and pin the axis coordinate per slab
    auto base_pts = sample_points(c, cfg, Regime::Plain, n_transverse);
    const Interval& iv = c.interval(ai);
    auto value_at = [&](int slab, const Point& base) {
        Point p = base;
        p[rep.axis] = iv.lo + iv.width() * (slab + 0.5) / slabs;
        return std::pair<double, Point>(eval(cc, p), p);
    };

    std::vector<int> crossing_slabs;
    double min_away = 1e300;
    for (int s = 0; s + 1 < slabs; ++s) {
        bool all_flip = true, any_flip = false;
        for (const auto& b : base_pts) {
            double v0 = value_at(s, b).first;
            double v1 = value_at(s + 1, b).first;
            bool flip = (v0 < 0) != (v1 < 0);
            all_flip &= flip;
            any_flip |= flip;
        }
        if (all_flip) {
            crossing_slabs.push_back(s);
        } else if (any_flip) {
            rep.transversal = false;  // partial crossing: not a graph over the slab
        }
    }
    // merge adjacent crossings and compute gradients at the located positions
    for (size_t i = 0; i < crossing_slabs.size(); ++i) {
        if (i > 0 && crossing_slabs[i] == crossing_slabs[i - 1] + 1) continue;
        FoldComponent fc;
        fc.position = iv.lo + iv.width() * (crossing_slabs[i] + 1.0) / slabs;
        fc.min_grad = 1e300;
        for (const auto& b : base_pts) {
            Point p = b;
            p[rep.axis] = fc.position;
            fc.min_grad = std::min(fc.min_grad, std::abs(eval(dcc, p)));
        }
        if (fc.min_grad < grad_tol) rep.transversal = false;
        rep.folds.push_back(fc);
    }
    for (int s = 0; s < slabs; ++s) {
        bool near = false;
        for (const auto& f : rep.folds) {
            double pos = iv.lo + iv.width() * (s + 0.5) / slabs;
            if (std::abs(pos - f.position) < 2.0 * iv.width() / slabs) near = true;
        }
        if (near) continue;
        for (const auto& b : base_pts) min_away = std::min(min_away, std::abs(value_at(s, b).first));
    }
    rep.min_abs_away = min_away == 1e300 ? 0.0 : min_away;

    if (rep.folds.empty())
        rep.verdict = rep.min_abs_away >= cfg.tol ? "contact everywhere, no fold" : "degenerate";
    else
        rep.verdict = (rep.transversal && rep.min_abs_away >= cfg.tol) ? "folded" : "degenerate";
    return rep;
}

SingularizeResult singularize(const BForm& alpha, std::shared_ptr<const ProfileFn> P,
                              const std::string& t_name, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (c.singular()) throw ChartError("singularize expects a smooth vertically invariant form");
    int ti = c.index_of(t_name);
    if (ti < 0) throw ChartError("no coordinate '" + t_name + "'");
    if (P->kind() != ProfileKind::SingEven && P->kind() != ProfileKind::SingOdd &&
        P->kind() != ProfileKind::SingOneSided)
        throw Error("singularize needs a singularization profile");

    // vertical invariance and the u dt + beta shape
    for (const auto& [m, coef] : alpha.comps()) {
        Expr d = diff(coef, t_name);
        auto r = equal_on_grid(d, Expr::num(0), c, cfg.n_off, cfg.tol, cfg, Regime::Plain);
        if (!r.equal)
            throw SolveError("singularize: input is not vertically invariant", r.argmax);
    }
    auto pre = is_contact(alpha, cfg);
    if (pre.verdict != ContactVerdict::Contact)
        throw SolveError("singularize: u dt + beta is not a contact form");

    Expr u = alpha.coeff(1u << ti);
    BForm beta(c, 1, Variance::Co);
    for (const auto& [m, coef] : alpha.comps())
        if (m != (1u << ti)) beta.add(m, coef);

    SingularizeResult out;
    const double e = P->eps();

    auto make_b_chart = [&](Interval t_iv) {
        auto coords = c.coords();
        auto box = c.box();
        box[ti] = t_iv;
        return Chart(coords, box, t_name, P->order());
    };
    auto beta_on = [&](const Chart& bc) {
        BForm b(bc, 1, Variance::Co);
        for (const auto& [m, coef] : beta.comps()) {
            int slot = std::countr_zero(m);
            b.add(1u << b.smooth_index(c.coords()[slot]), coef);
        }
        return b;
    };

    if (P->kind() == ProfileKind::SingOdd) {
        // two sub-charts centered at the singular points +-3 eps/8; on their
        // boxes s'(t0 + tau) tau^m = 1 exactly, so the forms carry no profile nodes
        Chart bc = make_b_chart({-e / 8, e / 8});
        for (int side = 0; side < 2; ++side) {
            BForm f(bc, 1, Variance::Co);
            f.set(1u, u);
            f = f + beta_on(bc);
            out.forms.push_back({bc, f});
            out.contact.push_back(is_contact(f, cfg));
        }
        out.critical_positions = {-3 * e / 8, 3 * e / 8};
    } else {
        Chart bc = make_b_chart(c.interval(ti));
        Expr w = Expr::hybrid(P, 1, 0, Expr::sym(t_name));
        BForm f(bc, 1, Variance::Co);
        f.set(1u, simplify(u * w));
        f = f + beta_on(bc);
        out.forms.push_back({bc, f});
        out.contact.push_back(is_contact(f, cfg));
        if (P->kind() == ProfileKind::SingEven)
            out.critical_positions = {0.0};
        else
            out.critical_positions = {0.0};
    }
    out.convexity = convexity_classify(out.forms[0].second, cfg);

    // agreement with the input where s is the identity
    {
        const Chart& bc = out.forms[0].first;
        double agree_from = P->kind() == ProfileKind::SingOdd ? e : 2 * e;
        double worst = 0.0;
        Expr tm = Expr::pow(Expr::sym(t_name), P->order());
        for (const auto& p : sample_points(c, cfg, Regime::Plain, cfg.n_off)) {
            double t = p.at(t_name);
            bool covered = P->kind() == ProfileKind::SingOneSided ? t > agree_from
                                                                  : std::abs(t) > agree_from;
            if (!covered) continue;
            try {
                // sigma-coefficient of the output vs u t^m (= u dt embedded)
                double lhs, rhs = eval(simplify(u * tm), p);
                if (P->kind() == ProfileKind::SingOdd)
                    lhs = eval(u, p) * std::pow(t, P->order()) * P->deriv(1, t);
                else
                    lhs = eval(simplify(u * Expr::hybrid(P, 1, 0, Expr::sym(t_name))), p);
                worst = std::max(worst, std::abs(lhs - rhs));
            } catch (const EvalError&) {
            }
        }
        out.agreement_max = worst;
        (void)bc;
    }

    if (P->kind() == ProfileKind::SingOneSided) {
        // the even extension disagrees with alpha for t < -2 eps
        double worst = 0.0;
        for (const auto& p : sample_points(c, cfg, Regime::Plain, cfg.n_off)) {
            double t = p.at(t_name);
            if (t >= -2 * e) continue;
            double lhs = eval(u, p) * P->deriv(1, t) * std::pow(t, P->order());
            double rhs = eval(u, p) * std::pow(t, P->order());
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        out.one_sided_mismatch = worst > cfg.tol;
    }

    // locate critical components from the smooth-frame data: zeros of 1/s'(t)
    {
        std::vector<double> found;
        const Interval& iv = c.interval(ti);
        const int N = 800;
        auto h = [&](double t) {
            double sp = P->deriv(1, t);
            return std::isfinite(sp) && sp != 0.0 ? 1.0 / sp : 0.0;
        };
        if (P->order() % 2 == 1) {
            // odd order: 1/s' crosses zero transversally at each critical point
            double prev_t = iv.lo, prev_v = h(iv.lo);
            for (int i = 1; i <= N; ++i) {
                double t = iv.lo + iv.width() * i / N;
                double v = h(t);
                if ((prev_v < 0) != (v < 0)) {
                    double root = prev_t + (t - prev_t) * prev_v / (prev_v - v);
                    found.push_back(root);
                }
                prev_t = t;
                prev_v = v;
            }
        } else {
            // even order: isolated graze of |1/s'| against zero
            double thresh = std::pow(2.0 * iv.width() / N, P->order());
            bool prev_small = false;
            double run_min_t = 0, run_best = 1e300;
            for (int i = 0; i <= N; ++i) {
                double t = iv.lo + iv.width() * i / N;
                double av = std::abs(h(t));
                bool small = av < thresh;
                if (small) {
                    if (!prev_small || av < run_best) {
                        run_best = av;
                        run_min_t = t;
                    }
                } else if (prev_small) {
                    found.push_back(run_min_t);
                }
                prev_small = small;
            }
            if (prev_small) found.push_back(run_min_t);
        }
        out.critical_positions = found;
    }
    return out;
}

ObstructionReport orientation_obstruction_check(int m, int components, const GridCfg& cfg) {
    ObstructionReport rep{};
    Chart c({"x1", "y1", "z"}, {{-1, 1}, {-1, 1}, {-1, 1}}, std::string("z"), m);
    BForm alpha = parse_form("B + x1*D(y1)", c);
    Expr cb = contact_coeff(alpha);
    // smooth-frame coefficient picks up z^{-m}: evaluate the sign on each side
    Point pl{{"x1", 0.3}, {"y1", 0.2}, {"z", -0.5}};
    Point pr{{"x1", 0.3}, {"y1", 0.2}, {"z", 0.5}};
    double sl = eval(cb, pl) * std::pow(-0.5, -m);
    double sr = eval(cb, pr) * std::pow(0.5, -m);
    rep.side_sign_product = (sl < 0 ? -1.0 : 1.0) * (sr < 0 ? -1.0 : 1.0);
    rep.verdict = (m % 2 == 1 && components == 1) ? ObstructionVerdict::Obstructed
                                                  : ObstructionVerdict::Admissible;
    (void)cfg;
    return rep;
}

ConvergenceReport convergence_report(const BForm& alpha, const std::vector<double>& eps_list,
                                     double kappa, const GridCfg& cfg) {
    const Chart& c = alpha.chart();
    if (!c.singular() || c.order() % 2 != 0)
        throw ChartError("convergence_report expects an even-order b^m form");
    const int k = c.order() / 2;
    auto conv = convexity_classify(alpha, cfg);
    if (conv.cls == ConvexityClass::NotAlmostConvex)
        throw SolveError("convergence_report: form is not almost convex");

    ConvergenceReport rep;
    rep.kappa = kappa;
    auto J = jacobi_from_contact(alpha, cfg);
    BMulti Ls = to_smooth_frame(J.Lambda);
    BMulti Rs = to_smooth_frame(J.R);

    GridCfg region = cfg;
    region.z_margin = kappa / c.interval(c.z_index()).width();
    auto pts = sample_points(c, region, Regime::OffZ, cfg.n_off);

    for (double e : eps_list) {
        auto P = ProfileFn::build(c.order() % 2 == 0 ? ProfileKind::DesingEven
                                                     : ProfileKind::DesingOdd,
                                  k, e);
        auto D = desingularize(alpha, P, cfg);
        auto Je = jacobi_from_contact(D.form, cfg);
        ConvergenceRow row;
        row.eps = e;
        row.sup_per_order.assign(2 * k, 0.0);
        auto scan = [&](const Alt& a, const Alt& b) {
            Alt d = a - b;
            for (const auto& [m, coef] : d.comps()) {
                Expr cur = coef;
                for (int j = 0; j < 2 * k; ++j) {
                    for (const auto& p : pts) {
                        try {
                            row.sup_per_order[j] =
                                std::max(row.sup_per_order[j], std::abs(eval(cur, p)));
                        } catch (const EvalError&) {
                        }
                    }
                    if (j + 1 < 2 * k) cur = diff(cur, c.z_name());
                }
            }
        };
        scan(Je.Lambda, Ls);
        scan(Je.R, Rs);
        rep.rows.push_back(std::move(row));
    }

    // monotone decrease (strict where distinguishable) and log-log slopes
    rep.monotone = true;
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        if (!(rep.rows[i].eps < rep.rows[i - 1].eps))
            throw Error("eps list must be strictly decreasing");
        for (size_t j = 0; j < rep.rows[i].sup_per_order.size(); ++j) {
            double prev = rep.rows[i - 1].sup_per_order[j];
            double cur = rep.rows[i].sup_per_order[j];
            if (cur > prev + 1e-14) rep.monotone = false;
            if (std::abs(cur - prev) > 1e-14 && !(cur < prev)) rep.monotone = false;
        }
    }
    int orders = rep.rows.empty() ? 0 : static_cast<int>(rep.rows[0].sup_per_order.size());
    for (int j = 0; j < orders; ++j) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (const auto& r : rep.rows) {
            if (r.sup_per_order[j] <= 0) continue;
            double x = std::log(r.eps), y = std::log(r.sup_per_order[j]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        rep.fitted_slopes.push_back(n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0);
    }
    return rep;
}

std::string convergence_csv(const ConvergenceReport& rep) {
    std::ostringstream os;
    os << "eps,j,sup_diff\n";
    for (const auto& r : rep.rows)
        for (size_t j = 0; j < r.sup_per_order.size(); ++j)
            os << r.eps << "," << j << "," << r.sup_per_order[j] << "\n";
    return os.str();
}

} // namespace bct
