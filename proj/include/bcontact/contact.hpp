#ifndef BCONTACT_CONTACT_HPP
#define BCONTACT_CONTACT_HPP

#include <optional>
#include <string>

#include "bcontact/exterior.hpp"
#include "bcontact/linsolve.hpp"

namespace bct {

enum class ContactVerdict { Contact, NotContact, ContactAwayFromVanishingLocus };

struct ContactReport {
    Expr coefficient;        // alpha ^ (d alpha)^n on the top blade
    double min_off = 0.0;
    Point argmin_off;
    double min_on = 0.0;     // singular charts only
    Point argmin_on;
    bool has_on = false;
    double max_abs = 0.0;
    ContactVerdict verdict = ContactVerdict::NotContact;
    GridCfg cfg;
};

std::string to_string(ContactVerdict v);

/// Top coefficient of alpha ^ (d alpha)^n in the canonical basis.
Expr contact_coeff(const BForm& alpha);

ContactReport is_contact(const BForm& alpha, const GridCfg& cfg = GridCfg{});

/// Unique b-field with i_R dalpha = 0 and alpha(R) = 1 (symbolic solve,
/// back-substitution verified on grids).
BMulti reeb(const BForm& alpha, const GridCfg& cfg = GridCfg{});

/// Unique b-field with alpha(X) = H and i_X dalpha = -dH + R(H) alpha.
BMulti hamiltonian_field(const BForm& alpha, const Expr& H, const GridCfg& cfg = GridCfg{});

enum class PointClassKind {
    RegularReebSingularXi,  // 1a
    RegularReebRegularXi,   // 1b
    SingularReeb            // 2
};

struct PointClass {
    PointClassKind kind;
    double reeb_norm;   // max |R^a(p)|
    double u_value;     // sigma-coefficient at p
};

std::string to_string(PointClassKind k);

/// Classification of a critical-set point by the Reeb and sigma-coefficient
/// discriminants (zero tolerance 1e-9, symbolic vanishing checked first).
PointClass classify_point(const BForm& alpha, const Point& p, const GridCfg& cfg = GridCfg{},
                          double zero_tol = 1e-9);

struct ThetaReport {
    BForm theta_on_z;        // restriction of u d beta + beta ^ du
    double min_area = 0.0;   // min |top coefficient| on the on-Z grid
    int sign = 0;            // s with i_{R|Z} Theta = s * du, 0 if neither fits
    double residual = 0.0;   // residual of the best sign
    bool nondegenerate = false;
    bool hamiltonian_ok = false;
};

/// Dimension-3 critical-set form Theta = u d(beta) + beta ^ du, restricted to Z.
ThetaReport theta_form(const BForm& alpha, const GridCfg& cfg = GridCfg{});

/// Count of sign-change clusters of R|_Z on a regular lattice (dim 3).
struct ZeroClusters {
    int count = 0;
    std::vector<Point> representatives;
};
ZeroClusters reeb_zero_clusters_on_z(const BForm& alpha, int n_axis = 48,
                                     const GridCfg& cfg = GridCfg{});

enum class ConvexityClass { Convex, AlmostConvex, NotAlmostConvex };
std::string to_string(ConvexityClass c);

struct ConvexityReport {
    ConvexityClass cls;
    std::string offending;  // coefficient whose z-derivative fails, if any
    double max_beta_dz = 0.0;
    double max_u_dz_on_z = 0.0;
};

/// Almost convex: beta-coefficients z-independent (off-Z and on-Z grids);
/// convex additionally needs du/dz = 0 on the critical slice.
ConvexityReport convexity_classify(const BForm& alpha, const GridCfg& cfg = GridCfg{});

/// Normalize a smooth contact form with contact vector field d/dt to the
/// t-invariant shape u dt + beta (divides by exp(lambda t)).
BForm verticalize(const BForm& alpha, const std::string& t_name, const GridCfg& cfg = GridCfg{});

} // namespace bct

#endif
