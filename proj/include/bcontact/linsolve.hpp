#ifndef BCONTACT_LINSOLVE_HPP
#define BCONTACT_LINSOLVE_HPP

#include <optional>
#include <string>
#include <vector>

#include "bcontact/exterior.hpp"

namespace bct {

struct SolveError : Error {
    SolveError(std::string msg, Point p = {}) : Error(std::move(msg)), point(std::move(p)) {}
    Point point;
};

struct LinReport {
    bool ok = false;
    double max_residual = 0.0;
    Point worst_point;
    std::string note;
};

/// Solve M x = b over the expression field by Gaussian elimination with
/// grid-certified pivots; the solution is verified by back-substitution into
/// every original equation on off-Z and on-Z grids. M is (rows x cols) with
/// rows >= cols; consistency of the extra rows is part of the verification.
std::optional<std::vector<Expr>> solve_linear(const Chart& chart,
                                              const std::vector<std::vector<Expr>>& M,
                                              const std::vector<Expr>& b, const GridCfg& cfg,
                                              LinReport& report);

/// dalpha(e_a, e_c) as a (dim x dim) matrix of expressions: mat[c][a].
std::vector<std::vector<Expr>> contraction_matrix(const BForm& dalpha);

/// The (dim+1) x dim contact system [i_X dalpha rows; alpha row].
/// Row c (c < dim): sum_a dalpha(e_a, e_c) X^a; row dim: sum_a alpha_a X^a.
std::vector<std::vector<Expr>> contact_system(const BForm& alpha, const BForm& dalpha);

/// Solve the contact system with given right-hand side (size dim+1).
BMulti solve_contact_system(const BForm& alpha, const BForm& dalpha, const std::vector<Expr>& rhs,
                            const GridCfg& cfg, const std::string& what);

} // namespace bct

#endif
