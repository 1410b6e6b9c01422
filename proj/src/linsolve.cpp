#include "bcontact/linsolve.hpp"

#include <algorithm>
#include <cmath>

namespace bct {

namespace {

constexpr std::size_t kNodeGuard = 200000;

struct PivotScore {
    bool constant = false;
    double grid_min = 0.0;  // min |value| over off-Z and on-Z samples
    std::size_t size = 0;
    bool usable(double tol) const { return constant || grid_min >= tol; }
};

PivotScore score_entry(const Expr& e, const std::vector<Point>& pts) {
    PivotScore s;
    s.size = node_count(e);
    if (e.is_num()) {
        s.constant = !e.is_zero();
        s.grid_min = std::abs(e.node().num_cache);
        return s;
    }
    if (e.is_zero()) return s;
    double mn = 1e300;
    for (const auto& p : pts) {
        double v;
        try {
            v = eval(e, p);
        } catch (const EvalError&) {
            mn = 0.0;
            break;
        }
        mn = std::min(mn, std::abs(v));
    }
    s.grid_min = mn == 1e300 ? 0.0 : mn;
    return s;
}

bool better(const PivotScore& a, const PivotScore& b) {
    if (a.constant != b.constant) return a.constant;
    if (a.constant) return a.size < b.size;
    if (std::abs(a.grid_min - b.grid_min) > 1e-12 * (a.grid_min + b.grid_min))
        return a.grid_min > b.grid_min;
    return a.size < b.size;
}

} // namespace

std::optional<std::vector<Expr>> solve_linear(const Chart& chart,
                                              const std::vector<std::vector<Expr>>& M0,
                                              const std::vector<Expr>& b0, const GridCfg& cfg,
                                              LinReport& report) {
    const int rows = static_cast<int>(M0.size());
    const int cols = rows ? static_cast<int>(M0[0].size()) : 0;
    if (rows < cols) throw SolveError("underdetermined system");

    std::vector<Point> pivot_pts = sample_points(chart, cfg, Regime::OffZ, 40);
    if (chart.singular()) {
        auto on = sample_points(chart, cfg, Regime::OnZ, 20);
        pivot_pts.insert(pivot_pts.end(), on.begin(), on.end());
    }
    const double piv_tol = 1e-7;

    auto M = M0;
    auto b = b0;
    std::vector<int> pivot_row_of_col(cols, -1);
    std::vector<bool> row_used(rows, false);

    for (int j = 0; j < cols; ++j) {
        int best = -1;
        PivotScore best_score;
        for (int i = 0; i < rows; ++i) {
            if (row_used[i]) continue;
            PivotScore s = score_entry(M[i][j], pivot_pts);
            if (!s.usable(piv_tol)) continue;
            if (best < 0 || better(s, best_score)) {
                best = i;
                best_score = s;
            }
        }
        if (best < 0) {
            report.note = "no certified pivot for column " + std::to_string(j);
            return std::nullopt;
        }
        row_used[best] = true;
        pivot_row_of_col[j] = best;
        Expr inv = simplify(Expr::pow(M[best][j], -1));
        for (int k = 0; k < cols; ++k) M[best][k] = simplify(M[best][k] * inv);
        b[best] = simplify(b[best] * inv);
        for (int i = 0; i < rows; ++i) {
            if (i == best) continue;
            Expr f = M[i][j];
            if (f.is_zero()) continue;
            for (int k = 0; k < cols; ++k) {
                M[i][k] = simplify(M[i][k] - f * M[best][k]);
                if (node_count(M[i][k]) > kNodeGuard) {
                    report.note = "expression growth guard tripped";
                    return std::nullopt;
                }
            }
            b[i] = simplify(b[i] - f * b[best]);
        }
    }

    std::vector<Expr> x(cols);
    for (int j = 0; j < cols; ++j) x[j] = b[pivot_row_of_col[j]];

    // Back-substitution into every original equation, off-Z and on-Z.
    report.max_residual = 0.0;
    auto verify = [&](Regime reg, int n) {
        auto pts = sample_points(chart, cfg, reg, n);
        for (const auto& p : pts) {
            for (int i = 0; i < rows; ++i) {
                double acc;
                try {
                    acc = -eval(b0[i], p);
                    for (int j = 0; j < cols; ++j) acc += eval(M0[i][j], p) * eval(x[j], p);
                } catch (const EvalError&) {
                    continue;  // singular sample of an intermediate expression
                }
                if (std::abs(acc) > report.max_residual) {
                    report.max_residual = std::abs(acc);
                    report.worst_point = p;
                }
            }
        }
    };
    verify(Regime::OffZ, std::min(cfg.n_off, 60));
    if (chart.singular()) verify(Regime::OnZ, std::min(cfg.n_on, 30));
    report.ok = report.max_residual <= std::max(cfg.tol, 1e-8);
    if (!report.ok) {
        report.note = "back-substitution residual " + std::to_string(report.max_residual);
        return std::nullopt;
    }
    return x;
}

std::vector<std::vector<Expr>> contraction_matrix(const BForm& dalpha) {
    const int dim = dalpha.chart().dim();
    std::vector<std::vector<Expr>> mat(dim, std::vector<Expr>(dim, Expr::num(0)));
    for (const auto& [mask, c] : dalpha.comps()) {
        // mask = {a < b}: dalpha(e_a, e_b) = c, dalpha(e_b, e_a) = -c
        int a = std::countr_zero(mask);
        int bslot = std::countr_zero(mask & (mask - 1));
        mat[bslot][a] = mat[bslot][a] + c;          // row c, column a: dalpha(e_a, e_bslot)
        mat[a][bslot] = mat[a][bslot] - c;
    }
    for (auto& row : mat)
        for (auto& e : row) e = simplify(e);
    return mat;
}

std::vector<std::vector<Expr>> contact_system(const BForm& alpha, const BForm& dalpha) {
    const int dim = alpha.chart().dim();
    auto M = contraction_matrix(dalpha);
    // matrix rows are i_X dalpha evaluated on e_c: sum_a X^a dalpha(e_a, e_c)
    std::vector<Expr> arow(dim, Expr::num(0));
    for (int a = 0; a < dim; ++a) arow[a] = alpha.coeff(1u << a);
    M.push_back(arow);
    return M;
}

BMulti solve_contact_system(const BForm& alpha, const BForm& dalpha, const std::vector<Expr>& rhs,
                            const GridCfg& cfg, const std::string& what) {
    auto M = contact_system(alpha, dalpha);
    LinReport rep;
    auto x = solve_linear(alpha.chart(), M, rhs, cfg, rep);
    if (!x)
        throw SolveError(what + ": symbolic solve failed (" + rep.note + ")", rep.worst_point);
    BMulti X(alpha.chart(), 1, Variance::Contra);
    for (int a = 0; a < alpha.chart().dim(); ++a)
        if (!(*x)[a].is_zero()) X.add(1u << a, (*x)[a]);
    X.simplify_inplace();
    return X;
}

} // namespace bct
