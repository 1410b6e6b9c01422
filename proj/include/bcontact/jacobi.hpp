#ifndef BCONTACT_JACOBI_HPP
#define BCONTACT_JACOBI_HPP

#include "bcontact/contact.hpp"

namespace bct {

/// Sup of |coefficient| over off-Z (and on-Z, when singular) samples.
double sup_on_grid(const Alt& a, const GridCfg& cfg);

struct JacobiVerification {
    double res_compat = 0.0;   // [Lambda,Lambda] - 2 R^Lambda
    double res_invariance = 0.0;  // [Lambda, R]
    double res_antisym = 0.0;  // construction self-check
    bool verified = false;
};

struct JacobiPair {
    BMulti Lambda;
    BMulti R;
    JacobiVerification record;
};

/// Grid residuals of the two compatibility identities for a candidate pair.
JacobiVerification verify_jacobi(const BMulti& Lambda, const BMulti& R, const GridCfg& cfg);

/// Lambda#(gamma): the vector with delta(Lambda#(gamma)) = Lambda(gamma, delta).
BMulti lambda_sharp(const BMulti& Lambda, const BForm& gamma);

/// Canonical Jacobi structure of a contact form: Lambda(gamma,delta) =
/// delta(Y_gamma) with i_Y alpha = 0, i_Y dalpha = -(gamma - gamma(R) alpha).
JacobiPair jacobi_from_contact(const BForm& alpha, const GridCfg& cfg = GridCfg{});

struct LiouvilleJacobiResult {
    JacobiPair pair;
    double discriminant_sup = 0.0;  // sup |R ^ [X,R] ^ X|
    bool identities_hold = false;
    // residuals of the auxiliary dual identities the lemma presumes:
    // [Pi,Pi] = 0, L_R Pi = 0, L_X Pi = -Pi
    double res_pi_poisson = 0.0;
    double res_pi_reeb = 0.0;
    double res_pi_liouville = 0.0;
    bool pi_identities_ok = false;
    bool lemma_consistent = false;  // identities hold iff discriminant vanishes
                                    // (meaningful when pi_identities_ok)
};

/// Jacobi candidate Pi + R^X from a Liouville field X of dalpha, with the
/// compatibility lemma discriminant evaluated alongside.
LiouvilleJacobiResult jacobi_via_liouville(const BForm& alpha, const BMulti& X,
                                           const GridCfg& cfg = GridCfg{});

struct TransversalityReport {
    bool has_critical_set = false;
    bool transversal = false;
    double max_on_z = 0.0;    // |c| on Z (must vanish)
    double min_grad_on_z = 0.0;
    double min_off_z = 0.0;
    std::string verdict;
};

/// Top coefficient of Lambda^n ^ R in the smooth frame: vanishing on Z with
/// nonvanishing z-derivative and nonvanishing off Z.
TransversalityReport bjacobi_transversality(const JacobiPair& J, const GridCfg& cfg = GridCfg{},
                                            double grad_tol = 1e-6);

struct PoissonizeResult {
    Chart ext_chart;
    BMulti Pi;
    double res_poisson = 0.0;     // [Pi,Pi]
    double res_homogeneous = 0.0; // L_T Pi + Pi
    double res_top_power = 0.0;   // Pi^{n+1} + e^{-(n+1)tau} dtau ^ Lambda^n ^ R
};

PoissonizeResult poissonize(const JacobiPair& J, const GridCfg& cfg = GridCfg{});

struct SymplectizeResult {
    Chart ext_chart;
    BForm omega;
    bool closed = false;           // d omega = 0 structurally
    double res_top_power = 0.0;    // |omega^{n+1}| vs (n+1)! e^{(n+1)t} |c(alpha)|
    double res_liouville = 0.0;    // L_{d/dt} omega - omega
    bool recovers_alpha = false;   // i_{d/dt} omega at t = 0 equals alpha
};

SymplectizeResult symplectize(const BForm& alpha, const GridCfg& cfg = GridCfg{});

struct ContractResult {
    BForm alpha;
    ContactReport report;
    double liouville_residual = 0.0;
    double min_transversality = 0.0;  // min |det [dphi | X]| over samples
};

/// alpha = phi^*(i_X omega) on the hypersurface chart, with the Liouville and
/// transversality preconditions verified numerically.
ContractResult liouville_contract(const BForm& omega, const BMulti& X, const ChartMap& phi,
                                  const GridCfg& cfg = GridCfg{});

struct OrthogonalityReport {
    bool ok = false;
    double residual = 0.0;
};

/// i_R (phi^* omega) = 0 for the Reeb field of the contracted form.
OrthogonalityReport reeb_orthogonality_check(const BForm& omega, const BMulti& X,
                                             const ChartMap& phi, const GridCfg& cfg = GridCfg{});

enum class LeafClass { ContactLeaf, LCSLeaf };
std::string to_string(LeafClass c);

struct LeafReport {
    LeafClass cls;
    double residual;  // least-squares residual of Lambda#(eta) = R at p
};

/// Pointwise leaf type: even-dimensional (LCS) iff R lies in Im Lambda# at p,
/// decided in the smooth frame by least squares.
LeafReport leaf_classify(const JacobiPair& J, const Point& p, double tol = 1e-7);

} // namespace bct

#endif
