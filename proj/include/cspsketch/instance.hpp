#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cspsketch/family.hpp"
#include "cspsketch/rng.hpp"

namespace cspsketch {

/// An application of family function `f_index` to k distinct variables.
/// Variable indices are 0-based internally; file formats are 1-based.
struct Constraint {
    int f_index = 0;
    std::vector<int> vars;
};

/// Assignment values are 0-based symbols (0..q-1).
struct Assignment {
    std::vector<int> values;
    int n() const { return static_cast<int>(values.size()); }
};

struct Instance {
    int n = 0;
    std::vector<Constraint> constraints;
    std::vector<double> weights;

    int m() const { return static_cast<int>(constraints.size()); }
    bool empty() const { return constraints.empty(); }
    double total_weight() const {
        double w = 0.0;
        for (double x : weights) w += x;
        return w;
    }
    void add(Constraint c, double w) {
        constraints.push_back(std::move(c));
        weights.push_back(w);
    }
};

inline void check_constraint(const ConstraintFamily& fam, const Constraint& c, int n) {
    if (c.f_index < 0 || c.f_index >= fam.size())
        fail("constraint: function index %d out of range (family size %d)", c.f_index, fam.size());
    if (static_cast<int>(c.vars.size()) != fam.k())
        fail("constraint: got %zu variables, arity is %d", c.vars.size(), fam.k());
    for (int t = 0; t < fam.k(); ++t) {
        if (c.vars[t] < 0 || c.vars[t] >= n)
            fail("constraint: variable index %d out of range for n=%d", c.vars[t] + 1, n);
        for (int s = t + 1; s < fam.k(); ++s)
            if (c.vars[t] == c.vars[s])
                fail("constraint: repeated variable index %d", c.vars[t] + 1);
    }
}

inline bool eval_constraint(const ConstraintFamily& fam, const Constraint& c, const Assignment& b) {
    check_constraint(fam, c, b.n());
    std::vector<int> a0(fam.k());
    for (int t = 0; t < fam.k(); ++t) a0[t] = b.values[c.vars[t]];
    return fam.eval(c.f_index, a0);
}

/// Weighted satisfied fraction val_Psi(b) in [0,1].
inline double value(const ConstraintFamily& fam, const Instance& psi, const Assignment& b) {
    require(!psi.empty(), "empty instance");
    double w_total = 0.0, w_sat = 0.0;
    for (int i = 0; i < psi.m(); ++i) {
        require(psi.weights[i] >= 0.0, "instance: negative weight");
        w_total += psi.weights[i];
        if (eval_constraint(fam, psi.constraints[i], b)) w_sat += psi.weights[i];
    }
    require(w_total > 0.0, "empty instance: total weight is zero");
    return w_sat / w_total;
}

enum class OptMode { Exact, Heuristic };

struct OptConfig {
    std::int64_t exact_budget = std::int64_t(1) << 24;  // max q^n for exact mode
    int restarts = 50;
    std::uint64_t seed = 1;
};

struct OptResult {
    double value = 0.0;
    Assignment witness;
};

namespace detail {

inline double value_unchecked(const ConstraintFamily& fam, const Instance& psi, const Assignment& b,
                              double w_total) {
    double w_sat = 0.0;
    std::vector<int> a0(fam.k());
    for (int i = 0; i < psi.m(); ++i) {
        const Constraint& c = psi.constraints[i];
        for (int t = 0; t < fam.k(); ++t) a0[t] = b.values[c.vars[t]];
        if (fam.eval(c.f_index, a0)) w_sat += psi.weights[i];
    }
    return w_sat / w_total;
}

}  // namespace detail

/// Exact mode enumerates [q]^n and returns the lexicographically smallest
/// maximizer; heuristic mode runs multistart greedy single-variable moves
/// (deterministic given the seed) and is a lower bound only.
inline OptResult opt_value(const ConstraintFamily& fam, const Instance& psi, OptMode mode,
                           const OptConfig& cfg = {}) {
    require(!psi.empty(), "empty instance");
    for (const Constraint& c : psi.constraints) check_constraint(fam, c, psi.n);
    double w_total = psi.total_weight();
    require(w_total > 0.0, "empty instance: total weight is zero");
    const int n = psi.n, q = fam.q();

    if (mode == OptMode::Exact) {
        double space = std::pow(double(q), double(n));
        if (space > double(cfg.exact_budget))
            fail("opt_value: q^n = %.3g exceeds exact budget %lld; use heuristic mode", space,
                 static_cast<long long>(cfg.exact_budget));
        Assignment b{std::vector<int>(n, 0)};
        OptResult best{-1.0, b};
        while (true) {
            double v = detail::value_unchecked(fam, psi, b, w_total);
            if (v > best.value + 1e-15) best = {v, b};
            // odometer, last variable fastest: lex order over assignments
            int pos = n - 1;
            while (pos >= 0 && b.values[pos] == q - 1) b.values[pos--] = 0;
            if (pos < 0) break;
            ++b.values[pos];
        }
        return best;
    }

    OptResult best{-1.0, Assignment{std::vector<int>(n, 0)}};
    for (int r = 0; r < cfg.restarts; ++r) {
        auto rng = make_rng(child_seed(cfg.seed, r));
        std::uniform_int_distribution<int> sym(0, q - 1);
        Assignment b{std::vector<int>(n)};
        for (int i = 0; i < n; ++i) b.values[i] = sym(rng);
        double cur = detail::value_unchecked(fam, psi, b, w_total);
        bool improved = true;
        while (improved) {
            improved = false;
            // best single-variable move; ties resolved by (variable, symbol)
            double best_gain = 1e-12;
            int best_var = -1, best_sym = -1;
            for (int i = 0; i < n; ++i) {
                int old = b.values[i];
                for (int s = 0; s < q; ++s) {
                    if (s == old) continue;
                    b.values[i] = s;
                    double v = detail::value_unchecked(fam, psi, b, w_total);
                    if (v - cur > best_gain) {
                        best_gain = v - cur;
                        best_var = i;
                        best_sym = s;
                    }
                }
                b.values[i] = old;
            }
            if (best_var >= 0) {
                b.values[best_var] = best_sym;
                cur += best_gain;
                improved = true;
            }
        }
        cur = detail::value_unchecked(fam, psi, b, w_total);
        if (cur > best.value + 1e-15 ||
            (cur > best.value - 1e-15 && b.values < best.witness.values))
            best = {cur, b};
    }
    return best;
}

/// Smallest sigma (1-based) such that every non-zero f has f(sigma^k)=1.
/// Vacuously sigma=1 when all functions are zero.
inline std::optional<int> constant_satisfiable(const ConstraintFamily& fam) {
    for (int s = 0; s < fam.q(); ++s) {
        bool ok = true;
        for (int f = 0; f < fam.size() && ok; ++f) {
            if (fam.is_zero_function(f)) continue;
            std::vector<int> a0(fam.k(), s);
            ok = fam.eval(f, a0);
        }
        if (ok) return s + 1;
    }
    return std::nullopt;
}

/// For constant-satisfiable families the optimum equals the weight fraction
/// of non-zero constraints; computable in one pass.
inline double exact_count_solver(const ConstraintFamily& fam, const Instance& psi) {
    require(constant_satisfiable(fam).has_value(),
            "exact_count_solver: family is not constant-satisfiable");
    require(!psi.empty(), "empty instance");
    double w_total = 0.0, w_nonzero = 0.0;
    for (int i = 0; i < psi.m(); ++i) {
        w_total += psi.weights[i];
        if (!fam.is_zero_function(psi.constraints[i].f_index)) w_nonzero += psi.weights[i];
    }
    require(w_total > 0.0, "empty instance: total weight is zero");
    return w_nonzero / w_total;
}

/// Instance file format:
///   n=<int>
///   c <f_name> <j1> ... <jk> <weight>
inline Instance parse_instance(std::istream& in, const ConstraintFamily& fam) {
    std::string line;
    int n = -1;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        if (line.rfind("n=", 0) != 0) throw Error("instance: expected header 'n=<int>', got: " + line);
        n = std::stoi(line.substr(2));
        break;
    }
    require(n > 0, "instance: missing header line");
    Instance psi;
    psi.n = n;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        if (tag != "c") throw Error("instance: expected 'c <f> <vars> <w>', got: " + line);
        Constraint c;
        c.f_index = fam.index_of(name);
        c.vars.resize(fam.k());
        for (int t = 0; t < fam.k(); ++t) {
            int j;
            if (!(ls >> j)) throw Error("instance: truncated constraint line: " + line);
            c.vars[t] = j - 1;
        }
        double w;
        if (!(ls >> w)) throw Error("instance: missing weight: " + line);
        require(w >= 0.0, "instance: negative weight in file");
        check_constraint(fam, c, n);
        psi.add(std::move(c), w);
    }
    return psi;
}

inline Instance load_instance(const std::string& path, const ConstraintFamily& fam) {
    std::ifstream in(path);
    if (!in) throw Error("instance: cannot open '" + path + "'");
    return parse_instance(in, fam);
}

inline void write_instance(std::ostream& out, const ConstraintFamily& fam, const Instance& psi) {
    out << "n=" << psi.n << "\n";
    for (int i = 0; i < psi.m(); ++i) {
        out << "c " << fam.name(psi.constraints[i].f_index);
        for (int v : psi.constraints[i].vars) out << ' ' << (v + 1);
        out << ' ' << format_exact(psi.weights[i]) << "\n";
    }
}

}  // namespace cspsketch
