#ifndef BCONTACT_SCALAR_HPP
#define BCONTACT_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <string>
#include <vector>

#include "bcontact/chart.hpp"

namespace bct {

using Rational = boost::multiprecision::cpp_rational;

/// Hook for hybrid (tabulated) function nodes: profile functions register an
/// evaluator so they can appear inside ScalarExpr trees. `fn` selects the
/// curve (0 = profile value, 1 = singular-frame weight s'(t)·t^m), `order`
/// the derivative order of that curve.
struct HybridFn {
    virtual ~HybridFn() = default;
    virtual double hybrid_eval(int fn, int order, double x) const = 0;
    virtual int hybrid_max_order() const = 0;
    virtual std::string hybrid_id() const = 0;  // stable identity for printing/compare
};

enum class K {
    Num,   // rational constant
    Sym,   // coordinate symbol
    Add,   // n-ary sum
    Mul,   // n-ary product
    Neg,   // negation (folded away by simplify)
    Pow,   // integer power, exponent != 0
    Sin, Cos, Exp, Log,
    Hyb,   // hybrid function node (profile value / weight, with derivative order)
};

class Expr;
struct Node {
    K kind;
    Rational num;                   // Num
    std::string sym;                // Sym
    std::vector<Expr> kids;         // Add/Mul/Neg/Pow/functions/Hyb(arg)
    long long expnt = 0;            // Pow
    std::shared_ptr<const HybridFn> hyb;  // Hyb
    int hyb_fn = 0, hyb_order = 0;        // Hyb
    double num_cache = 0.0;         // Num: cached double value
};

/// Immutable symbolic scalar expression over chart coordinates.
class Expr {
public:
    Expr() : n_(zero_node()) {}
    explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    const Node& node() const { return *n_; }
    K kind() const { return n_->kind; }
    const std::shared_ptr<const Node>& ptr() const { return n_; }

    bool is_zero() const { return kind() == K::Num && n_->num == 0; }
    bool is_one() const { return kind() == K::Num && n_->num == 1; }
    bool is_num() const { return kind() == K::Num; }

    static Expr num(Rational r);
    static Expr num(long long v) { return num(Rational(v)); }
    static Expr sym(std::string name);
    static Expr add(std::vector<Expr> ts);
    static Expr mul(std::vector<Expr> ts);
    static Expr neg(Expr e);
    static Expr pow(Expr base, long long k);
    static Expr fn(K kind, Expr arg);  // Sin/Cos/Exp/Log
    static Expr hybrid(std::shared_ptr<const HybridFn> h, int fn, int order, Expr arg);

private:
    static std::shared_ptr<const Node> zero_node();
    std::shared_ptr<const Node> n_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Total structural order; 0 iff structurally equal.
int compare(const Expr& a, const Expr& b);
inline bool struct_eq(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

std::size_t node_count(const Expr& e);

/// Canonicalizing simplification (fixed rewrite system; idempotent).
Expr simplify(const Expr& e);

/// Exact partial derivative with respect to a coordinate, simplified.
Expr diff(const Expr& e, const std::string& coord);

/// Substitute coord := value (an expression), then simplify.
Expr subst(const Expr& e, const std::string& coord, const Expr& value);

bool contains_sym(const Expr& e, const std::string& coord);
/// True if some Pow node with negative exponent has a base containing `coord`.
bool has_negative_power_of(const Expr& e, const std::string& coord);

struct EvalError : Error {
    EvalError(std::string msg, std::string offender)
        : Error(std::move(msg)), subexpr(std::move(offender)) {}
    std::string subexpr;
};

double eval(const Expr& e, const Point& p);
/// Extended evaluation: division by zero yields signed infinity instead of
/// throwing (log of non-positive still throws).
double eval_extended(const Expr& e, const Point& p);

std::string to_string(const Expr& e);

struct ParseError : Error {
    ParseError(std::string msg, int col) : Error(std::move(msg)), column(col) {}
    int column;  // 1-based
};

/// Parse the scalar grammar; identifiers must be chart coordinates.
Expr parse_scalar(const std::string& text, const Chart& chart);

/// Every coordinate symbol in e must belong to the chart.
void check_symbols(const Expr& e, const Chart& chart);

struct EqGridReport {
    bool equal = true;
    double max_discrepancy = 0.0;
    Point argmax;
    int skipped = 0;
    std::vector<Point> skipped_points;
};

/// |e1-e2| <= tol at n deterministic samples (domain-error points skipped
/// and reported). Off-Z sampling on singular charts unless regime says else.
EqGridReport equal_on_grid(const Expr& e1, const Expr& e2, const Chart& chart, int n,
                           double tol, const GridCfg& cfg = GridCfg{},
                           Regime regime = Regime::OffZ);

} // namespace bct

#endif
