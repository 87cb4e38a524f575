#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cspsketch/distribution.hpp"
#include "cspsketch/simplex_lp.hpp"
#include "cspsketch/simplex_opt.hpp"

namespace cspsketch {

/// Per-column distributions (P_sigma)_{sigma in [q]}; the random assignment
/// draws grid variable x_{i,sigma} independently from column sigma.
struct SymmetricProductAssignment {
    std::vector<std::vector<double>> cols;

    static SymmetricProductAssignment point_masses(int q, const std::vector<int>& tau) {
        SymmetricProductAssignment p;
        p.cols.assign(q, std::vector<double>(q, 0.0));
        for (int s = 0; s < q; ++s) p.cols[s][tau[s]] = 1.0;
        return p;
    }
    static SymmetricProductAssignment identity(int q) {
        std::vector<int> tau(q);
        for (int s = 0; s < q; ++s) tau[s] = s;
        return point_masses(q, tau);
    }
    static SymmetricProductAssignment all_equal(int q, std::vector<double> col) {
        SymmetricProductAssignment p;
        p.cols.assign(q, col);
        return p;
    }
    static SymmetricProductAssignment uniform(int q) {
        return all_equal(q, std::vector<double>(q, 1.0 / q));
    }
};

namespace detail {

struct PatternTable {
    int k = 0;
    std::vector<int> digits;  // digits[a*k + t], 0-based symbols
    explicit PatternTable(const ConstraintFamily& fam) : k(fam.k()) {
        digits.resize(fam.table_len() * fam.k());
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            std::vector<int> d = fam.pattern_of_index(a);
            for (int t = 0; t < fam.k(); ++t) digits[a * k + t] = d[t];
        }
    }
    int at(std::int64_t a, int t) const { return digits[a * k + t]; }
};

/// E_{b ~ P}[C(f,a)(b)] = sum_c f(c) prod_t P_{a_t}(c_t); position t reads
/// grid variable x_{t,a_t}, so the k draws are independent.
inline double atom_expectation(const ConstraintFamily& fam, const PatternTable& pt, int f,
                               std::int64_t a, const SymmetricProductAssignment& p) {
    const auto& table = fam.table(f);
    const int k = fam.k();
    double sum = 0.0;
    for (std::int64_t c = 0; c < fam.table_len(); ++c) {
        if (!table[c]) continue;
        double prod = 1.0;
        for (int t = 0; t < k; ++t) prod *= p.cols[pt.at(a, t)][pt.at(c, t)];
        sum += prod;
    }
    return sum;
}

/// Coefficient vector of D -> E_D[E_P[C(f,a)(b)]] over all atoms.
inline std::vector<double> cut_coefficients(const ConstraintFamily& fam, const PatternTable& pt,
                                            const SymmetricProductAssignment& p) {
    std::vector<double> c(fam.size() * fam.table_len());
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a)
            c[f * fam.table_len() + a] = atom_expectation(fam, pt, f, a, p);
    return c;
}

inline double eval_columns(const ConstraintDist& d, const PatternTable& pt,
                           const SymmetricProductAssignment& p) {
    const ConstraintFamily& fam = d.family();
    double sum = 0.0;
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            double pr = d.prob(f, a);
            if (pr > 0.0) sum += pr * atom_expectation(fam, pt, f, a, p);
        }
    return sum;
}

/// Probability that an i.i.d.-P assignment satisfies f.
inline double iid_satisfaction(const ConstraintFamily& fam, const PatternTable& pt, int f,
                               const std::vector<double>& p) {
    const auto& table = fam.table(f);
    double sum = 0.0;
    for (std::int64_t c = 0; c < fam.table_len(); ++c) {
        if (!table[c]) continue;
        double prod = 1.0;
        for (int t = 0; t < fam.k(); ++t) prod *= p[pt.at(c, t)];
        sum += prod;
    }
    return sum;
}

/// Objective restricted to one column with the others held fixed, collapsed
/// into monomials over that column's entries so grid scans are cheap.
struct ColumnPolynomial {
    double constant = 0.0;
    std::vector<std::pair<std::vector<int>, double>> terms;  // sorted symbol multiset -> coeff

    double eval(const std::vector<double>& col) const {
        double v = constant;
        for (const auto& [key, coef] : terms) {
            double prod = coef;
            for (int s : key) prod *= col[s];
            v += prod;
        }
        return v;
    }
};

inline ColumnPolynomial restrict_to_column(const ConstraintDist& d, const PatternTable& pt,
                                           const SymmetricProductAssignment& p, int col) {
    const ConstraintFamily& fam = d.family();
    const int k = fam.k();
    ColumnPolynomial poly;
    std::map<std::vector<int>, double> acc;
    std::vector<int> key;
    for (int f = 0; f < fam.size(); ++f) {
        const auto& table = fam.table(f);
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            double pr = d.prob(f, a);
            if (pr <= 0.0) continue;
            for (std::int64_t c = 0; c < fam.table_len(); ++c) {
                if (!table[c]) continue;
                double w = pr;
                key.clear();
                for (int t = 0; t < k; ++t) {
                    int at = pt.at(a, t);
                    if (at == col) key.push_back(pt.at(c, t));
                    else w *= p.cols[at][pt.at(c, t)];
                }
                if (w == 0.0) continue;
                if (key.empty()) {
                    poly.constant += w;
                } else {
                    std::sort(key.begin(), key.end());
                    acc[key] += w;
                }
            }
        }
    }
    poly.terms.assign(acc.begin(), acc.end());
    return poly;
}

}  // namespace detail

struct FeasConfig {
    double delta = 1e-4;       // three-valued verdict tolerance
    int grid_steps = 50;       // preferred simplex grid resolution (h = 1/steps)
    int ascent_starts = 20;
    int ascent_rounds = 8;
    int kelley_max_iters = 80;
    double kelley_gap = 1e-6;
    double cut_tol = 1e-9;
    int cut_pool_cap = 400;    // oldest non-seed cuts evicted beyond this
    std::uint64_t seed = 1;
    std::int64_t family_budget = 512;  // cap on |F| * q^k
    std::int64_t point_mass_budget = 50000;
};

inline void check_family_budget(const ConstraintFamily& fam, const FeasConfig& cfg) {
    if (fam.size() * fam.table_len() > cfg.family_budget)
        fail("feasibility: |F|*q^k = %lld exceeds budget %lld",
             static_cast<long long>(fam.size() * fam.table_len()),
             static_cast<long long>(cfg.family_budget));
}

/// E_{(f,a)~D}[C(f,a)(I)] = sum_D(f,a) f(a): the planted-assignment value.
inline double sy_value(const ConstraintDist& d) {
    const ConstraintFamily& fam = d.family();
    double s = 0.0;
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a)
            if (fam.table(f)[a]) s += d.prob(f, a);
    return s;
}

struct SnResult {
    double value = 0.0;
    SymmetricProductAssignment witness;
};

/// Best column-symmetric product assignment found for D: exhaustive point
/// masses, an equal-columns simplex grid, a joint grid at q=2, then
/// multistart coordinate ascent over single columns. Certified lower bound
/// on the true maximum.
inline SnResult sn_value(const ConstraintDist& d, const FeasConfig& cfg = {}) {
    const ConstraintFamily& fam = d.family();
    check_family_budget(fam, cfg);
    const int q = fam.q();
    detail::PatternTable pt(fam);
    SnResult best;
    best.value = -1.0;

    auto consider = [&](const SymmetricProductAssignment& p) {
        double v = detail::eval_columns(d, pt, p);
        if (v > best.value + 1e-15) best = {v, p};
        return v;
    };

    // all q^q deterministic column assignments (seeded subsample beyond budget)
    std::int64_t n_point = ipow(q, q);
    if (n_point <= cfg.point_mass_budget) {
        std::vector<int> tau(q, 0);
        while (true) {
            consider(SymmetricProductAssignment::point_masses(q, tau));
            int pos = q - 1;
            while (pos >= 0 && tau[pos] == q - 1) tau[pos--] = 0;
            if (pos < 0) break;
            ++tau[pos];
        }
    } else {
        auto rng = make_rng(cfg.seed ^ 0x9d);
        std::uniform_int_distribution<int> sym(0, q - 1);
        consider(SymmetricProductAssignment::identity(q));
        for (int it = 0; it < static_cast<int>(cfg.point_mass_budget); ++it) {
            std::vector<int> tau(q);
            for (int s = 0; s < q; ++s) tau[s] = sym(rng);
            consider(SymmetricProductAssignment::point_masses(q, tau));
        }
    }

    // equal columns: objective reduces to E_{f~D_F}[Pr_{a~P^k}[f(a)=1]]
    std::vector<double> df(fam.size(), 0.0);
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a) df[f] += d.prob(f, a);
    int diag_steps = adaptive_grid_steps(q, cfg.grid_steps, 25000);
    SimplexMaxResult diag = maximize_over_simplex(
        q,
        [&](const std::vector<double>& p) {
            double v = 0.0;
            for (int f = 0; f < fam.size(); ++f)
                if (df[f] > 0.0) v += df[f] * detail::iid_satisfaction(fam, pt, f, p);
            return v;
        },
        diag_steps, 4, child_seed(cfg.seed, 11));
    consider(SymmetricProductAssignment::all_equal(q, diag.x));

    // joint grid over both columns (affordable only at q = 2)
    if (q == 2) {
        int steps = cfg.grid_steps;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; j <= steps; ++j) {
                SymmetricProductAssignment p;
                p.cols = {{double(i) / steps, 1.0 - double(i) / steps},
                          {double(j) / steps, 1.0 - double(j) / steps}};
                consider(p);
            }
        }
    }

    // multistart projected coordinate ascent
    int col_steps = adaptive_grid_steps(q, cfg.grid_steps, 4000);
    auto rng = make_rng(child_seed(cfg.seed, 17));
    for (int start = 0; start < cfg.ascent_starts; ++start) {
        SymmetricProductAssignment p;
        if (start == 0) p = best.witness;
        else if (start == 1) p = SymmetricProductAssignment::uniform(q);
        else {
            p.cols.resize(q);
            for (int s = 0; s < q; ++s) p.cols[s] = random_simplex_point(rng, q);
        }
        double cur = detail::eval_columns(d, pt, p);
        for (int round = 0; round < cfg.ascent_rounds; ++round) {
            double before = cur;
            for (int s = 0; s < q; ++s) {
                detail::ColumnPolynomial poly = detail::restrict_to_column(d, pt, p, s);
                SimplexMaxResult colbest;
                enumerate_simplex_grid(q, col_steps, [&](const std::vector<double>& x) {
                    double v = poly.eval(x);
                    if (v > colbest.value) {
                        colbest.value = v;
                        colbest.x = x;
                    }
                });
                double v0 = poly.eval(p.cols[s]);
                if (v0 > colbest.value) {
                    colbest.value = v0;
                    colbest.x = p.cols[s];
                }
                polish_on_simplex(colbest.x, colbest.value,
                                  [&](const std::vector<double>& x) { return poly.eval(x); },
                                  1.0 / col_steps);
                if (colbest.value > cur + 1e-15) {
                    p.cols[s] = colbest.x;
                    cur = colbest.value;
                }
            }
            if (cur <= before + 1e-13) break;
        }
        if (cur > best.value + 1e-15) best = {cur, p};
    }
    return best;
}

/// Deduplicated pool of inner-maximizer cuts, shareable across gamma values.
/// Near-duplicate cuts are rejected; beyond the cap the oldest non-seed cut
/// is evicted (cuts only strengthen a relaxation, so dropping them is sound).
struct CutPool {
    std::vector<SymmetricProductAssignment> cuts;
    int seed_count = 0;

    bool add(const SymmetricProductAssignment& p, int cap = 1 << 20) {
        for (const auto& c : cuts) {
            double diff = 0.0;
            for (size_t s = 0; s < c.cols.size(); ++s)
                for (size_t g = 0; g < c.cols[s].size(); ++g)
                    diff = std::max(diff, std::fabs(c.cols[s][g] - p.cols[s][g]));
            if (diff < 1e-8) return false;
        }
        cuts.push_back(p);
        if (static_cast<int>(cuts.size()) > cap && cap > seed_count)
            cuts.erase(cuts.begin() + seed_count);
        return true;
    }

    static CutPool seeded(int q) {
        CutPool pool;
        pool.add(SymmetricProductAssignment::identity(q));
        pool.add(SymmetricProductAssignment::uniform(q));
        for (int t = 0; t < q; ++t) {
            std::vector<double> col(q, 0.0);
            col[t] = 1.0;
            pool.add(SymmetricProductAssignment::all_equal(q, col));
        }
        pool.seed_count = static_cast<int>(pool.cuts.size());
        return pool;
    }
};

enum class Verdict { Disjoint, Intersect, Undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Disjoint: return "DISJOINT";
        case Verdict::Intersect: return "INTERSECT";
        default: return "UNDECIDED";
    }
}

struct DecisionOutcome {
    Verdict verdict = Verdict::Undecided;
    std::optional<std::pair<ConstraintDist, ConstraintDist>> witness;  // (D_Y, D_N)
    double bound = 0.0;        // incumbent min-over-matched sn value
    double lower_bound = 0.0;  // certified relaxation value
    double delta = 0.0;
    std::string note;
};

namespace detail {

inline ConstraintDist clean_dist(const ConstraintFamily& fam, const double* x, std::int64_t m) {
    std::vector<double> p(x, x + m);
    double s = 0.0;
    for (double& v : p) {
        if (v < 0.0) v = 0.0;
        s += v;
    }
    require(s > 0.0, "feasibility: LP returned a zero distribution");
    for (double& v : p) v /= s;
    return ConstraintDist(fam, std::move(p));
}

struct KelleyState {
    bool feasible = true;
    bool converged = false;
    double lb = -std::numeric_limits<double>::infinity();
    double incumbent = std::numeric_limits<double>::infinity();
    std::optional<std::pair<ConstraintDist, ConstraintDist>> best_pair;
};

/// Kelley cutting planes for min { sn(D_N) : marginals match, sy(D_Y) >= gamma }.
/// The LP over the cut pool lower-bounds the objective; each iterate's inner
/// maximizer becomes a new cut.
inline KelleyState kelley_min_matched(const ConstraintFamily& fam, double gamma, CutPool& pool,
                                      const FeasConfig& cfg,
                                      double stop_lb_above = std::numeric_limits<double>::infinity(),
                                      double stop_inc_below = -std::numeric_limits<double>::infinity()) {
    const std::int64_t m = fam.size() * fam.table_len();
    const int q = fam.q(), k = fam.k();
    detail::PatternTable pt(fam);
    KelleyState st;

    for (int iter = 0; iter < cfg.kelley_max_iters; ++iter) {
        LpProblem lp;
        lp.n = static_cast<int>(2 * m + 1);
        lp.c.assign(lp.n, 0.0);
        lp.c[2 * m] = 1.0;
        {
            std::vector<double> row(lp.n, 0.0);
            for (std::int64_t i = 0; i < m; ++i) row[i] = 1.0;
            lp.add_row(row, Rel::EQ, 1.0);
            std::fill(row.begin(), row.end(), 0.0);
            for (std::int64_t i = 0; i < m; ++i) row[m + i] = 1.0;
            lp.add_row(row, Rel::EQ, 1.0);
        }
        for (int f = 0; f < fam.size(); ++f) {
            for (int i = 0; i < k; ++i) {
                for (int s = 0; s < q; ++s) {
                    std::vector<double> row(lp.n, 0.0);
                    for (std::int64_t a = 0; a < fam.table_len(); ++a) {
                        if (pt.at(a, i) == s) {
                            row[f * fam.table_len() + a] += 1.0;
                            row[m + f * fam.table_len() + a] -= 1.0;
                        }
                    }
                    lp.add_row(row, Rel::EQ, 0.0);
                }
            }
        }
        {
            std::vector<double> row(lp.n, 0.0);
            for (int f = 0; f < fam.size(); ++f)
                for (std::int64_t a = 0; a < fam.table_len(); ++a)
                    if (fam.table(f)[a]) row[f * fam.table_len() + a] = 1.0;
            lp.add_row(row, Rel::GE, gamma);
        }
        for (const auto& cut : pool.cuts) {
            std::vector<double> coeffs = detail::cut_coefficients(fam, pt, cut);
            std::vector<double> row(lp.n, 0.0);
            for (std::int64_t i = 0; i < m; ++i) row[m + i] = coeffs[i];
            row[2 * m] = -1.0;
            lp.add_row(row, Rel::LE, 0.0);
        }

        LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) {
            st.feasible = false;
            return st;
        }
        require(sol.status == LpStatus::Optimal, "feasibility: LP unbounded (internal)");
        st.lb = sol.objective;
        ConstraintDist dy = clean_dist(fam, sol.x.data(), m);
        ConstraintDist dn = clean_dist(fam, sol.x.data() + m, m);
        SnResult sn = sn_value(dn, cfg);
        if (sn.value < st.incumbent) {
            st.incumbent = sn.value;
            st.best_pair = std::make_pair(dy, dn);
        }
        if (st.lb > stop_lb_above) return st;
        if (st.incumbent < stop_inc_below) return st;
        if (sn.value <= st.lb + cfg.cut_tol || st.incumbent - st.lb <= cfg.kelley_gap) {
            st.converged = true;
            return st;
        }
        // a rejected (near-duplicate) cut cannot move the LP: the remaining
        // gap is below the separation oracle's resolution
        if (!pool.add(sn.witness, cfg.cut_pool_cap)) {
            st.converged = true;
            return st;
        }
    }
    return st;
}

}  // namespace detail

/// Decides K^Y_gamma(F) cap K^N_beta(F) = empty? numerically, with a
/// three-valued verdict at tolerance delta.
inline DecisionOutcome decide_intersection(const ConstraintFamily& fam, double gamma, double beta,
                                           const FeasConfig& cfg = {}, CutPool* shared_pool = nullptr) {
    require(beta >= 0.0 && gamma <= 1.0 && beta < gamma,
            "decide_intersection: need 0 <= beta < gamma <= 1");
    check_family_budget(fam, cfg);
    CutPool local = CutPool::seeded(fam.q());
    CutPool& pool = shared_pool ? *shared_pool : local;
    if (shared_pool && pool.cuts.empty()) pool = CutPool::seeded(fam.q());

    const double delta = cfg.delta;
    DecisionOutcome out;
    out.delta = delta;
    detail::KelleyState st =
        detail::kelley_min_matched(fam, gamma, pool, cfg, beta + delta, beta - delta);
    out.lower_bound = st.lb;
    out.bound = st.incumbent;
    if (!st.feasible) {
        out.verdict = Verdict::Disjoint;
        out.bound = std::numeric_limits<double>::infinity();
        out.lower_bound = std::numeric_limits<double>::infinity();
        out.note = "K^Y empty";
        return out;
    }
    if (st.lb > beta + delta) {
        out.verdict = Verdict::Disjoint;
        return out;
    }
    if (st.incumbent <= beta - delta + 1e-7 && st.best_pair) {
        // guard against an optimistic inner maximum: re-verify at a finer grid
        FeasConfig fine = cfg;
        fine.grid_steps = cfg.grid_steps * 4;
        fine.ascent_starts = cfg.ascent_starts + 8;
        SnResult check = sn_value(st.best_pair->second, fine);
        if (check.value <= beta + delta) {
            out.verdict = Verdict::Intersect;
            out.witness = st.best_pair;
            out.bound = check.value;
            return out;
        }
        out.note = "witness failed re-verification at finer grid";
        out.bound = check.value;
    }
    out.verdict = Verdict::Undecided;
    return out;
}

struct CurvePoint {
    double gamma = 0.0;
    double beta = 0.0;        // incumbent min-over-matched sn value
    double lower_bound = 0.0;
    bool feasible = true;     // K^Y_gamma nonempty
};

/// min beta with K^Y_gamma cap K^N_beta nonempty, per grid point. Cuts are
/// shared across grid points (they constrain D_N only).
inline std::vector<CurvePoint> hardness_curve(const ConstraintFamily& fam,
                                              const std::vector<double>& gamma_grid,
                                              const FeasConfig& cfg = {}) {
    check_family_budget(fam, cfg);
    for (double g : gamma_grid)
        require(g > 0.0 && g <= 1.0, "hardness_curve: grid values must lie in (0,1]");
    CutPool pool = CutPool::seeded(fam.q());
    std::vector<CurvePoint> out;
    for (double g : gamma_grid) {
        detail::KelleyState st = detail::kelley_min_matched(fam, g, pool, cfg);
        CurvePoint p;
        p.gamma = g;
        p.feasible = st.feasible;
        p.beta = st.feasible ? st.incumbent : std::numeric_limits<double>::infinity();
        p.lower_bound = st.feasible ? st.lb : std::numeric_limits<double>::infinity();
        out.push_back(p);
    }
    return out;
}

/// rho over a sub-family given by function indices (the full family when
/// empty): min over mixtures D_F of the best i.i.d. assignment value.
inline double rho_subfamily(const ConstraintFamily& fam, std::vector<int> indices,
                            const FeasConfig& cfg = {}) {
    check_family_budget(fam, cfg);
    if (indices.empty())
        for (int f = 0; f < fam.size(); ++f) indices.push_back(f);
    const int nf = static_cast<int>(indices.size());
    const int q = fam.q();
    detail::PatternTable pt(fam);

    auto inner_max = [&](const std::vector<double>& dfw) {
        int steps = adaptive_grid_steps(q, cfg.grid_steps, 25000);
        return maximize_over_simplex(
            q,
            [&](const std::vector<double>& p) {
                double v = 0.0;
                for (int i = 0; i < nf; ++i)
                    if (dfw[i] > 0.0) v += dfw[i] * detail::iid_satisfaction(fam, pt, indices[i], p);
                return v;
            },
            steps, 6, child_seed(cfg.seed, 23));
    };

    std::vector<std::vector<double>> cut_ps;  // inner maximizers seen so far
    cut_ps.push_back(std::vector<double>(q, 1.0 / q));
    for (int t = 0; t < q; ++t) {
        std::vector<double> col(q, 0.0);
        col[t] = 1.0;
        cut_ps.push_back(col);
    }
    double incumbent = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.kelley_max_iters; ++iter) {
        LpProblem lp;
        lp.n = nf + 1;
        lp.c.assign(lp.n, 0.0);
        lp.c[nf] = 1.0;
        lp.add_row([&] {
            std::vector<double> row(lp.n, 0.0);
            for (int i = 0; i < nf; ++i) row[i] = 1.0;
            return row;
        }(), Rel::EQ, 1.0);
        for (const auto& p : cut_ps) {
            std::vector<double> row(lp.n, 0.0);
            for (int i = 0; i < nf; ++i) row[i] = detail::iid_satisfaction(fam, pt, indices[i], p);
            row[nf] = -1.0;
            lp.add_row(row, Rel::LE, 0.0);
        }
        LpSolution sol = solve_lp(lp);
        require(sol.status == LpStatus::Optimal, "rho: LP solve failed");
        std::vector<double> dfw(sol.x.begin(), sol.x.begin() + nf);
        for (double& w : dfw) w = std::max(0.0, w);
        SimplexMaxResult mx = inner_max(dfw);
        incumbent = std::min(incumbent, mx.value);
        if (mx.value <= sol.objective + cfg.cut_tol || incumbent - sol.objective <= cfg.kelley_gap)
            break;
        cut_ps.push_back(mx.x);
    }
    return incumbent;
}

inline double rho(const ConstraintFamily& fam, const FeasConfig& cfg = {}) {
    return rho_subfamily(fam, {}, cfg);
}

struct ResistanceResult {
    Verdict status = Verdict::Undecided;
    bool resistant = false;
    double rho_value = 0.0;
    std::optional<std::pair<ConstraintDist, ConstraintDist>> witness;
    double witness_sy = 0.0;
    double witness_sn = 0.0;
    std::string note;
};

/// Approximation resistance for sketching algorithms: resistant iff
/// K^Y_1 cap K^N_rho(F) is nonempty, probed at rho +- delta.
inline ResistanceResult is_approx_resistant(const ConstraintFamily& fam, const FeasConfig& cfg = {}) {
    ResistanceResult res;
    res.rho_value = rho(fam, cfg);
    const double delta = cfg.delta;
    if (res.rho_value >= 1.0 - delta) {
        // every instance already achieves value ~1; the gap problem degenerates
        res.status = Verdict::Intersect;
        res.resistant = true;
        res.note = "rho ~ 1: trivial";
        return res;
    }
    CutPool pool = CutPool::seeded(fam.q());
    DecisionOutcome hi = decide_intersection(fam, 1.0, res.rho_value + delta, cfg, &pool);
    if (res.rho_value - delta > 0.0) {
        DecisionOutcome lo = decide_intersection(fam, 1.0, res.rho_value - delta, cfg, &pool);
        if (lo.verdict == Verdict::Intersect) {
            res.status = Verdict::Undecided;
            res.note = "inconsistent: intersection below rho";
            return res;
        }
    }
    if (hi.verdict == Verdict::Intersect && hi.witness) {
        res.witness_sy = sy_value(hi.witness->first);
        res.witness_sn = hi.bound;
        if (std::fabs(res.witness_sn - res.rho_value) <= 2 * delta) {
            res.status = Verdict::Intersect;
            res.resistant = true;
            res.witness = hi.witness;
            return res;
        }
        res.status = Verdict::Undecided;
        res.note = "witness sn not within 2*delta of rho";
        return res;
    }
    if (hi.verdict == Verdict::Disjoint) {
        res.status = Verdict::Disjoint;
        res.resistant = false;
        return res;
    }
    res.status = Verdict::Undecided;
    res.note = hi.note;
    return res;
}

struct AlphaResult {
    double value = 0.0;
    double error_bar = 0.0;
    std::vector<CurvePoint> curve;
};

/// Single-parameter approximability threshold: min over the gamma grid of
/// curve(gamma)/gamma, reported with the grid resolution as the error bar.
inline AlphaResult alpha(const ConstraintFamily& fam, double grid_step, const FeasConfig& cfg = {}) {
    require(grid_step > 0.0 && grid_step <= 0.1, "alpha: grid step must lie in (0, 0.1]");
    std::vector<double> grid;
    int n = static_cast<int>(std::round(1.0 / grid_step));
    for (int i = 1; i <= n; ++i) grid.push_back(std::min(1.0, i * grid_step));
    AlphaResult out;
    out.error_bar = grid_step;
    out.curve = hardness_curve(fam, grid, cfg);
    out.value = std::numeric_limits<double>::infinity();
    for (const CurvePoint& p : out.curve)
        if (p.feasible) out.value = std::min(out.value, p.beta / p.gamma);
    return out;
}

}  // namespace cspsketch
