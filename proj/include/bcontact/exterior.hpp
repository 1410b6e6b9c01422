#ifndef BCONTACT_EXTERIOR_HPP
#define BCONTACT_EXTERIOR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bcontact/chart.hpp"
#include "bcontact/scalar.hpp"

namespace bct {

/// Basis index convention: on a singular chart, index 0 is the singular
/// generator (sigma = dz/z^m on the covector side, zeta = z^m d/dz on the
/// vector side) followed by the smooth coordinates in chart order with the
/// defining coordinate skipped. On smooth charts all coordinates appear in
/// chart order. Component keys are bitmasks over these indices.
enum class Variance { Co, Contra };

class Alt {
public:
    Alt() = default;
    Alt(Chart chart, int degree, Variance var);

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    Variance variance() const { return var_; }
    int basis_size() const { return chart_.dim(); }

    const std::map<uint32_t, Expr>& comps() const { return comps_; }
    Expr coeff(uint32_t mask) const;
    /// Adds (accumulates) a coefficient on a basis blade.
    void add(uint32_t mask, const Expr& e);
    void set(uint32_t mask, const Expr& e);

    Alt& simplify_inplace();
    bool is_zero() const;  // after simplification: no nonzero components

    /// Name of basis element i ("B"/"Zv" for the singular slot, else coord).
    std::string basis_name(int i) const;
    /// Basis index of a smooth coordinate (throws for the defining coordinate
    /// of a singular chart — that direction is carried by the singular slot).
    int smooth_index(const std::string& coord) const;
    /// Coordinate name carried by basis index i (defining coordinate for 0
    /// on singular charts).
    std::string coord_of_index(int i) const;

    friend Alt operator+(const Alt& a, const Alt& b);
    friend Alt operator-(const Alt& a, const Alt& b);
    Alt scaled(const Expr& s) const;

private:
    Chart chart_;
    int degree_ = 0;
    Variance var_ = Variance::Co;
    std::map<uint32_t, Expr> comps_;
};

using BForm = Alt;
using BMulti = Alt;

int blade_sign(uint32_t a, uint32_t b);  // sign of e_a ^ e_b reordering

Alt wedge(const Alt& a, const Alt& b);

/// Extended exterior derivative: d(sigma) = 0, coefficients differentiate by
/// the graded Leibniz rule; dz rewrites as z^m * sigma. Covector side only.
BForm ext_d(const BForm& w);

/// w = sigma ^ alpha + beta with alpha, beta free of sigma.
std::pair<BForm, BForm> decompose(const BForm& w);
BForm reassemble(const BForm& alpha, const BForm& beta);

/// Contraction of a degree-1 multivector with a form (graded antiderivation).
BForm interior(const BMulti& X, const BForm& w);
/// Scalar pairing of a degree-1 multivector and a degree-1 form.
Expr pairing(const BMulti& X, const BForm& a);

/// Lie bracket of degree-1 b-multivectors (closed in the b-frame).
BMulti lie_bracket(const BMulti& X, const BMulti& Y);

/// The derivation action of a degree-1 field on a scalar (zeta acts as z^m d/dz).
Expr field_apply(const BMulti& X, const Expr& f);

/// Schouten-Nijenhuis bracket for degrees <= 2 ([X,Y] on vectors, graded
/// Leibniz extension; [P,Q] has degree p+q-1).
BMulti schouten(const BMulti& P, const BMulti& Q);

/// Cartan formula i_X dw + d i_X w.
BForm lie_derivative(const BMulti& X, const BForm& w);

/// Wedge of multivectors (same engine as forms).
BMulti mv_wedge(const BMulti& a, const BMulti& b);

/// Substitute z := 0 in all coefficients and drop blades containing the
/// singular slot (restriction of a form to the critical slice).
BForm restrict_to_z(const BForm& w);
BMulti tangent_part_on_z(const BMulti& X);

/// Re-express the components of a b-multivector in the smooth frame at
/// evaluation time: the zeta slot picks up a factor z^m.
BMulti to_smooth_frame(const BMulti& X);
/// Rewrite sigma-components c*sigma -> (c/z^m)*dz when every additive term of
/// c carries z^m; throws if divisibility fails. Result lives on the smoothed chart.
BForm to_smooth_form(const BForm& w);
/// Embed a form on the smoothed chart back into the b-frame (dz -> z^m sigma).
BForm embed_in_bframe(const BForm& w, const Chart& singular_chart);

struct ChartMap {
    Chart source;
    Chart target;
    std::vector<Expr> images;  // one per target coordinate, in target order

    /// Checks the defining-function compatibility z_target o phi = unit * z_source^e
    /// on a grid; returns the exponent e and the unit expression.
    void verify_compatible(const GridCfg& cfg) const;
    Expr image_of(const std::string& target_coord) const;
};

BForm pullback(const ChartMap& phi, const BForm& w);

/// Form/vector literal parsing: sums of `scalar * D(coord)`, `scalar * B`,
/// `scalar * W(atom, atom, ...)`; vectors use V(coord) and Zv.
Alt parse_alt(const std::string& text, const Chart& chart, Variance var);
inline BForm parse_form(const std::string& text, const Chart& chart) {
    return parse_alt(text, chart, Variance::Co);
}
inline BMulti parse_vector(const std::string& text, const Chart& chart) {
    return parse_alt(text, chart, Variance::Contra);
}
std::string to_literal(const Alt& a);

/// Chart JSON: {"coords":[...], "box":[[lo,hi],...], "z":"name", "m":2}.
Chart chart_from_json(const std::string& json_text);
std::string chart_to_json(const Chart& c);

bool alt_equal_on_grid(const Alt& a, const Alt& b, int n, double tol,
                       const GridCfg& cfg = GridCfg{}, Regime regime = Regime::OffZ);
bool alt_struct_zero(const Alt& a);

} // namespace bct

#endif
