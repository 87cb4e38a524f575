#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cspsketch/common.hpp"

namespace cspsketch {

enum class Rel { LE, GE, EQ };

/// minimize c.x  subject to  rows (a.x REL b),  x >= 0.
struct LpProblem {
    int n = 0;
    std::vector<double> c;
    std::vector<std::vector<double>> a;
    std::vector<Rel> rel;
    std::vector<double> b;

    void add_row(std::vector<double> coeffs, Rel r, double rhs) {
        require(static_cast<int>(coeffs.size()) == n, "lp: row width mismatch");
        a.push_back(std::move(coeffs));
        rel.push_back(r);
        b.push_back(rhs);
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Two-phase dense tableau simplex. Dantzig pricing while the objective
/// moves, Bland's rule once it stalls (anti-cycling), plus a tiny
/// deterministic right-hand-side perturbation that breaks the heavy vertex
/// degeneracy of the distribution polytopes solved here. Intended for the
/// small dense programs in this project (hundreds of rows/columns).
class SimplexSolver {
public:
    explicit SimplexSolver(double eps = 1e-9, double perturb = 1e-10)
        : eps_(eps), perturb_(perturb) {}

    LpSolution solve(const LpProblem& p) {
        const int m = static_cast<int>(p.a.size());
        const int n = p.n;
        // columns: n structural | m slack/surplus (0 width for EQ) | artificials
        int n_slack = 0;
        for (Rel r : p.rel)
            if (r != Rel::EQ) ++n_slack;

        // Normalize to b >= 0 by flipping rows; perturb to break degeneracy.
        std::vector<std::vector<double>> A(m, std::vector<double>(n));
        std::vector<double> b(m);
        std::vector<Rel> rel(p.rel);
        for (int i = 0; i < m; ++i) {
            double rhs = p.b[i];
            if (rel[i] == Rel::LE) rhs += perturb_ * double(i + 1);
            else if (rel[i] == Rel::GE) rhs -= perturb_ * double(i + 1);
            double s = (rhs < 0) ? -1.0 : 1.0;
            for (int j = 0; j < n; ++j) A[i][j] = s * p.a[i][j];
            b[i] = s * rhs;
            if (s < 0) {
                if (rel[i] == Rel::LE) rel[i] = Rel::GE;
                else if (rel[i] == Rel::GE) rel[i] = Rel::LE;
            }
        }

        int total = n + n_slack + m;  // artificial per row (unused ones pruned by phase 1)
        tab_.assign(m + 1, std::vector<double>(total + 1, 0.0));
        basis_.assign(m, -1);
        ncols_ = total;

        int slack_at = n;
        std::vector<int> art_col(m, -1);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) tab_[i][j] = A[i][j];
            tab_[i][total] = b[i];
            if (rel[i] == Rel::LE) {
                tab_[i][slack_at] = 1.0;
                basis_[i] = slack_at++;
            } else if (rel[i] == Rel::GE) {
                tab_[i][slack_at] = -1.0;
                ++slack_at;
            }
        }
        int art_at = n + n_slack;
        for (int i = 0; i < m; ++i) {
            if (basis_[i] < 0) {
                tab_[i][art_at] = 1.0;
                art_col[i] = art_at;
                basis_[i] = art_at++;
            }
        }
        n_art_begin_ = n + n_slack;

        // Phase 1: minimize sum of artificials.
        auto& obj = tab_[m];
        for (int i = 0; i < m; ++i)
            if (art_col[i] >= 0) obj[art_col[i]] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (art_col[i] >= 0)
                for (int j = 0; j <= total; ++j) obj[j] -= tab_[i][j];
        }
        run(m);
        if (obj[total] < -1e-7) return {LpStatus::Infeasible, 0.0, {}};

        // Drive remaining artificials out of the basis (degenerate rows).
        for (int i = 0; i < m; ++i) {
            if (basis_[i] >= n_art_begin_) {
                int piv = -1;
                for (int j = 0; j < n_art_begin_; ++j)
                    if (std::fabs(tab_[i][j]) > eps_) {
                        piv = j;
                        break;
                    }
                if (piv >= 0) pivot(i, piv, m);
                // else: the row is all-zero in structural columns, harmless
            }
        }

        // Phase 2 objective.
        for (int j = 0; j <= total; ++j) obj[j] = 0.0;
        for (int j = 0; j < n; ++j) obj[j] = p.c[j];
        for (int i = 0; i < m; ++i) {
            int bc = basis_[i];
            if (bc < n && std::fabs(p.c[bc]) > 0.0) {
                double f = p.c[bc];
                for (int j = 0; j <= total; ++j) obj[j] -= f * tab_[i][j];
            }
        }
        forbid_artificials_ = true;
        bool ok = run(m);
        forbid_artificials_ = false;
        if (!ok) return {LpStatus::Unbounded, 0.0, {}};

        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.x.assign(n, 0.0);
        for (int i = 0; i < m; ++i)
            if (basis_[i] < n) sol.x[basis_[i]] = tab_[i][total];
        sol.objective = 0.0;
        for (int j = 0; j < n; ++j) sol.objective += p.c[j] * sol.x[j];
        return sol;
    }

private:
    // Returns false on unboundedness.
    bool run(int m) {
        int stall = 0;
        long pivots = 0;
        bool bland = false;  // sticky once degenerate stalling is detected
        double last_obj = tab_[m][ncols_];
        const int stall_limit = 2 * (m + ncols_) + 64;
        const long pivot_limit = 200L * (m + ncols_) + 20000;
        while (true) {
            int col = pick_column(bland);
            if (col < 0) return true;
            int row = ratio_test(m, col);
            if (row < 0) return false;
            pivot(row, col, m);
            double cur = tab_[m][ncols_];
            if (cur > last_obj + 1e-12) {
                stall = 0;
                last_obj = cur;
            } else if (++stall > stall_limit) {
                bland = true;
            }
            if (++pivots > pivot_limit) throw Error("simplex: pivot limit exceeded");
        }
    }

    int pick_column(bool bland) const {
        const auto& obj = tab_.back();
        int limit = forbid_artificials_ ? n_art_begin_ : ncols_;
        if (bland) {
            for (int j = 0; j < limit; ++j)
                if (obj[j] < -eps_) return j;
            return -1;
        }
        int best = -1;
        double best_v = -eps_;
        for (int j = 0; j < limit; ++j)
            if (obj[j] < best_v) {
                best_v = obj[j];
                best = j;
            }
        return best;
    }

    int ratio_test(int m, int col) const {
        int row = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double a = tab_[i][col];
            if (a > eps_) {
                // drift can leave b_i marginally negative; treat as degenerate 0
                double r = std::max(0.0, tab_[i][ncols_]) / a;
                // smallest ratio; ties to the smallest basis index (Bland)
                if (r < best - 1e-12 || (r < best + 1e-12 && (row < 0 || basis_[i] < basis_[row]))) {
                    best = r;
                    row = i;
                }
            }
        }
        return row;
    }

    void pivot(int row, int col, int m) {
        double p = tab_[row][col];
        for (int j = 0; j <= ncols_; ++j) tab_[row][j] /= p;
        tab_[row][col] = 1.0;
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            double f = tab_[i][col];
            if (std::fabs(f) < 1e-14) continue;
            for (int j = 0; j <= ncols_; ++j) tab_[i][j] -= f * tab_[row][j];
            tab_[i][col] = 0.0;
        }
        basis_[row] = col;
    }

    double eps_;
    double perturb_;
    int ncols_ = 0;
    int n_art_begin_ = 0;
    bool forbid_artificials_ = false;
    std::vector<std::vector<double>> tab_;
    std::vector<int> basis_;
};

inline LpSolution solve_lp(const LpProblem& p) { return SimplexSolver().solve(p); }

}  // namespace cspsketch
