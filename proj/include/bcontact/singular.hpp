#ifndef BCONTACT_SINGULAR_HPP
#define BCONTACT_SINGULAR_HPP

#include <memory>

#include "bcontact/jacobi.hpp"

namespace bct {

enum class ProfileKind { DesingEven, DesingOdd, SingEven, SingOdd, SingOneSided };
std::string to_string(ProfileKind k);

/// Piecewise profile: exact singular/identity pieces outside the joins,
/// derivative-blended joins (order-9 smoothstep partition of unity plus a
/// value-matching bump), values inside joins by Gauss-Legendre accumulation.
/// Exposed to ScalarExpr trees through the HybridFn hooks:
///   fn 0: the profile itself (f_eps or s_eps), order = derivative order;
///   fn 1: the singular-frame weight s'(t) t^m (sing kinds only).
class ProfileFn : public HybridFn {
public:
    static std::shared_ptr<const ProfileFn> build(ProfileKind kind, int k, double eps);

    ProfileKind kind() const { return kind_; }
    int k() const { return k_; }
    int order() const { return m_; }  // singularity order m
    double eps() const { return eps_; }

    /// Scaled profile value (f_eps / s_eps) and derivatives.
    double value(double x) const { return deriv(0, x); }
    double deriv(int order, double x) const;
    /// d^order/dt^order of s'(t) t^m (exact constant near t = 0).
    double weight(int order, double t) const;

    double hybrid_eval(int fn, int order, double x) const override;
    int hybrid_max_order() const override { return max_order_; }
    std::string hybrid_id() const override;

    /// Expression nodes for use in form coefficients.
    Expr value_node(std::shared_ptr<const ProfileFn> self, const Expr& arg, int order = 0) const;
    Expr weight_node(std::shared_ptr<const ProfileFn> self, const Expr& arg, int order = 0) const;

private:
    ProfileFn(ProfileKind kind, int k, double eps);
    void construct_and_verify();
    double base_deriv(int order, double x) const;  // base variable, x >= 0
    double base_value(double x) const;
    double weight_pos(int order, double t) const;  // t >= 0

    ProfileKind kind_;
    int k_;
    int m_;
    double eps_;
    int max_order_ = 8;
    // solved construction constants
    double c0_ = 0.0;   // desing-even inner slope
    double s0_ = 0.0;   // desing-odd inner quadratic coefficient
    double c1_ = 0.0;   // desing-odd inner shift
    double bump_ = 0.0; // sing joins value-matching bump
    double d0_ = 0.0;   // sing-odd inner slope near 0
    double anchor_ = 0.0;
};

struct DesingReport {
    double agreement_max = 0.0;    // coefficient deviation on |z| > 2 eps
    double identity_rel_max = 0.0; // c(alpha_eps) vs f' z^m c(alpha), relative
    ContactVerdict contact_verdict = ContactVerdict::NotContact;  // even m
    bool folded_ok = false;                                       // odd m
};

struct DesingResult {
    Chart chart;  // smoothed chart
    BForm form;
    DesingReport report;
};

/// u df_eps + beta on the smoothed chart; preconditions: almost convex input,
/// profile parity matches the chart order.
DesingResult desingularize(const BForm& alpha, std::shared_ptr<const ProfileFn> P,
                           const GridCfg& cfg = GridCfg{});

struct FoldComponent {
    double position = 0.0;   // axis value of the located crossing
    double min_grad = 0.0;   // min |dc/daxis| on the crossing plane
};

struct FoldReport {
    std::string axis;
    std::vector<FoldComponent> folds;
    double min_abs_away = 0.0;  // min |c| away from the crossings
    bool transversal = true;
    std::string verdict;        // "folded" / "contact everywhere, no fold" / "degenerate"
};

/// Locates transversal zero crossings of the contact coefficient along one
/// coordinate axis (smooth charts).
FoldReport folded_check(const BForm& alpha, const std::string& axis = "",
                        const GridCfg& cfg = GridCfg{}, int slabs = 96, double grad_tol = 1e-6);

struct SingularizeResult {
    std::vector<std::pair<Chart, BForm>> forms;  // one (two for sing-odd) b^m forms
    std::vector<ContactReport> contact;
    ConvexityReport convexity;            // of the first output form
    double agreement_max = 0.0;           // vs input where the profile is the identity
    std::vector<double> critical_positions;  // located in the t-axis
    bool one_sided_mismatch = false;      // sing-onesided: disagrees for t < -2 eps
};

/// u ds_eps + beta re-expressed in the b^m frame; input must be the
/// t-invariant output shape of verticalize.
SingularizeResult singularize(const BForm& alpha, std::shared_ptr<const ProfileFn> P,
                              const std::string& t_name, const GridCfg& cfg = GridCfg{});

enum class ObstructionVerdict { Obstructed, Admissible };

struct ObstructionReport {
    ObstructionVerdict verdict;
    double side_sign_product = 0.0;  // sign(c(-z0)) * sign(c(+z0)) of the witness
};

/// Odd order with a single critical component on a connected complement is
/// obstructed: the smooth-frame coefficient flips sign across Z.
ObstructionReport orientation_obstruction_check(int m, int components,
                                                const GridCfg& cfg = GridCfg{});

struct ConvergenceRow {
    double eps;
    std::vector<double> sup_per_order;  // C^j discrepancies, j = 0..2k-1
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;   // strictly decreasing eps
    std::vector<double> fitted_slopes;  // log-log regression per order
    bool monotone = false;  // non-increasing, strict where distinguishable
    double kappa = 0.5;
};

/// Jacobi data of the desingularization vs the original on |z| >= kappa,
/// tabulated over an eps sweep with z-derivatives up to order 2k-1.
ConvergenceReport convergence_report(const BForm& alpha, const std::vector<double>& eps_list,
                                     double kappa = 0.5, const GridCfg& cfg = GridCfg{});

std::string convergence_csv(const ConvergenceReport& rep);

} // namespace bct

#endif
