#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cspsketch/instance.hpp"
#include "cspsketch/simplex_lp.hpp"

namespace cspsketch {

inline constexpr double kProbTol = 1e-9;

/// Marginal vector indexed (f, position i, symbol s), all 0-based,
/// idx = (f*k + i)*q + s. For a distribution, the entries of each position
/// block sum to 1 and the whole vector sums to k.
struct MarginalVector {
    int fcount = 0, k = 0, q = 0;
    std::vector<double> v;

    static int dim(int fcount, int k, int q) { return fcount * k * q; }
    double& at(int f, int i, int s) { return v[(f * k + i) * q + s]; }
    double at(int f, int i, int s) const { return v[(f * k + i) * q + s]; }
};

/// Dense probability vector over F x [q]^k, indexed f-major / pattern-minor.
/// Holds its family by value: distributions are freely copyable and never
/// dangle when the originating family goes out of scope.
class ConstraintDist {
public:
    ConstraintDist(const ConstraintFamily& fam, std::vector<double> probs)
        : fam_(fam), p_(std::move(probs)) {
        require(static_cast<std::int64_t>(p_.size()) == fam.size() * fam.table_len(),
                "distribution: wrong density length");
        double s = 0.0;
        for (double x : p_) {
            require(x >= -kProbTol, "distribution: negative probability");
            s += x;
        }
        require(std::fabs(s - 1.0) <= kProbTol, "distribution: probabilities sum to " +
                                                    format_exact(s) + ", expected 1");
    }

    static ConstraintDist uniform(const ConstraintFamily& fam) {
        std::vector<double> p(fam.size() * fam.table_len(),
                              1.0 / double(fam.size() * fam.table_len()));
        return ConstraintDist(fam, std::move(p));
    }

    /// Point-mass and sparse construction from (f, pattern of 1-based symbols).
    static ConstraintDist from_atoms(
        const ConstraintFamily& fam,
        const std::vector<std::pair<std::pair<int, std::vector<int>>, double>>& atoms) {
        std::vector<double> p(fam.size() * fam.table_len(), 0.0);
        for (const auto& [fa, prob] : atoms) {
            std::vector<int> a0(fam.k());
            for (int t = 0; t < fam.k(); ++t) a0[t] = fa.second[t] - 1;
            p[fa.first * fam.table_len() + fam.pattern_index(a0)] += prob;
        }
        return ConstraintDist(fam, std::move(p));
    }

    const ConstraintFamily& family() const { return fam_; }
    const std::vector<double>& probs() const { return p_; }
    double prob(int f, std::int64_t pattern) const { return p_[f * fam_.table_len() + pattern]; }
    int dim() const { return static_cast<int>(p_.size()); }

private:
    ConstraintFamily fam_;
    std::vector<double> p_;
};

inline MarginalVector marginals(const ConstraintDist& d) {
    const ConstraintFamily& fam = d.family();
    MarginalVector mu;
    mu.fcount = fam.size();
    mu.k = fam.k();
    mu.q = fam.q();
    mu.v.assign(MarginalVector::dim(mu.fcount, mu.k, mu.q), 0.0);
    for (int f = 0; f < fam.size(); ++f) {
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            double p = d.prob(f, a);
            if (p == 0.0) continue;
            std::vector<int> a0 = fam.pattern_of_index(a);
            for (int i = 0; i < fam.k(); ++i) mu.at(f, i, a0[i]) += p;
        }
    }
    return mu;
}

inline bool is_one_wise(const ConstraintDist& d, double tol = kProbTol) {
    MarginalVector mu = marginals(d);
    for (int f = 0; f < mu.fcount; ++f)
        for (int i = 0; i < mu.k; ++i)
            for (int s = 1; s < mu.q; ++s)
                if (std::fabs(mu.at(f, i, s) - mu.at(f, i, 0)) > tol) return false;
    return true;
}

/// Single-function distribution over [q]^k supported on f^{-1}(1) with
/// uniform marginals, when one exists. Tries the uniform distribution on the
/// support first (covers the symmetric families exactly), then an LP
/// feasibility problem over the support atoms.
inline std::optional<ConstraintDist> supports_one_wise(const ConstraintFamily& fam, int f) {
    require(!fam.is_zero_function(f), "supports_one_wise: zero function has empty support");
    const int q = fam.q(), k = fam.k();
    std::vector<std::int64_t> support;
    for (std::int64_t a = 0; a < fam.table_len(); ++a)
        if (fam.table(f)[a]) support.push_back(a);

    auto lift = [&](const std::vector<double>& w) {
        std::vector<double> p(fam.size() * fam.table_len(), 0.0);
        for (size_t s = 0; s < support.size(); ++s) p[f * fam.table_len() + support[s]] = w[s];
        return ConstraintDist(fam, std::move(p));
    };

    std::vector<double> unif(support.size(), 1.0 / double(support.size()));
    if (is_one_wise(lift(unif))) return lift(unif);

    LpProblem lp;
    lp.n = static_cast<int>(support.size());
    lp.c.assign(lp.n, 0.0);
    lp.add_row(std::vector<double>(lp.n, 1.0), Rel::EQ, 1.0);
    for (int i = 0; i < k; ++i) {
        for (int s = 0; s < q; ++s) {
            std::vector<double> row(lp.n, 0.0);
            for (int jj = 0; jj < lp.n; ++jj) {
                std::vector<int> a0 = fam.pattern_of_index(support[jj]);
                if (a0[i] == s) row[jj] = 1.0;
            }
            lp.add_row(std::move(row), Rel::EQ, 1.0 / q);
        }
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    for (double& w : sol.x) w = std::max(0.0, w);
    double s = 0.0;
    for (double w : sol.x) s += w;
    for (double& w : sol.x) w /= s;
    return lift(sol.x);
}

enum class OneWiseClass { Strong, Weak, None };

/// rho_fn must evaluate rho on any sub-family given by function indices.
inline OneWiseClass one_wise_class(
    const ConstraintFamily& fam,
    const std::function<double(const std::vector<int>&)>& rho_fn, double tol = 1e-4) {
    require(fam.size() <= 8, "one_wise_class: subset enumeration budget is |F| <= 8");
    std::vector<int> supporting;
    for (int f = 0; f < fam.size(); ++f) {
        if (!fam.is_zero_function(f) && supports_one_wise(fam, f).has_value())
            supporting.push_back(f);
    }
    if (static_cast<int>(supporting.size()) == fam.size()) return OneWiseClass::Strong;
    if (supporting.empty()) return OneWiseClass::None;

    std::vector<int> all(fam.size());
    for (int f = 0; f < fam.size(); ++f) all[f] = f;
    double rho_full = rho_fn(all);
    int ns = static_cast<int>(supporting.size());
    for (int mask = 1; mask < (1 << ns); ++mask) {
        std::vector<int> sub;
        for (int j = 0; j < ns; ++j)
            if (mask & (1 << j)) sub.push_back(supporting[j]);
        if (rho_fn(sub) <= rho_full + tol) return OneWiseClass::Weak;
    }
    return OneWiseClass::None;
}

/// D(Psi^b): sample constraint i with probability w_i/W, output (f_i, b|_{j(i)}).
inline ConstraintDist dist_of_instance(const ConstraintFamily& fam, const Instance& psi,
                                       const Assignment& b) {
    require(!psi.empty(), "empty instance");
    double w_total = psi.total_weight();
    require(w_total > 0.0, "empty instance: total weight is zero");
    std::vector<double> p(fam.size() * fam.table_len(), 0.0);
    std::vector<int> a0(fam.k());
    for (int i = 0; i < psi.m(); ++i) {
        const Constraint& c = psi.constraints[i];
        check_constraint(fam, c, b.n());
        for (int t = 0; t < fam.k(); ++t) a0[t] = b.values[c.vars[t]];
        p[c.f_index * fam.table_len() + fam.pattern_index(a0)] += psi.weights[i] / w_total;
    }
    return ConstraintDist(fam, std::move(p));
}

struct PaddedDecomposition {
    double tau = 0.0;
    ConstraintDist d0, dy_prime, dn_prime;
};

/// For q=k=2 and matching marginals, writes D_i = tau*D0 + (1-tau)*D'_i with
/// both remainders one-wise independent. Per function g the conditional
/// difference D_Y|g - D_N|g is delta_g * (+1,-1,-1,+1) on patterns
/// (11,12,21,22) and tau_g = 1 - 2|delta_g|; tau = E_g[tau_g].
inline PaddedDecomposition padded_one_wise_decomposition(const ConstraintDist& dy,
                                                         const ConstraintDist& dn) {
    const ConstraintFamily& fam = dy.family();
    require(fam == dn.family(),
            "padded decomposition: distributions over different families");
    require(fam.q() == 2 && fam.k() == 2, "padded decomposition: requires q=2, k=2");
    MarginalVector my = marginals(dy), mn = marginals(dn);
    for (size_t i = 0; i < my.v.size(); ++i)
        require(std::fabs(my.v[i] - mn.v[i]) <= kProbTol,
                "padded decomposition: marginals do not match");

    static const double kDiag[4] = {0.5, 0.0, 0.0, 0.5};
    static const double kAnti[4] = {0.0, 0.5, 0.5, 0.0};
    const std::int64_t L = fam.table_len();  // 4, patterns (11,12,21,22)
    std::vector<double> p0(fam.size() * L, 0.0), py(fam.size() * L, 0.0), pn(fam.size() * L, 0.0);
    double tau = 0.0;
    for (int g = 0; g < fam.size(); ++g) {
        double pg = 0.0;
        for (std::int64_t a = 0; a < L; ++a) pg += dy.prob(g, a);
        if (pg <= 0.0) continue;
        double cy[4], cn[4];
        for (int a = 0; a < 4; ++a) {
            cy[a] = dy.prob(g, a) / pg;
            cn[a] = dn.prob(g, a) / pg;
        }
        double delta = cy[0] - cn[0];
        double e = std::fabs(delta);
        double tau_g = 1.0 - 2.0 * e;
        tau += pg * tau_g;
        const double* base = (delta >= 0.0) ? cy : cn;
        const double* prime_y = (delta >= 0.0) ? kDiag : kAnti;
        const double* prime_n = (delta >= 0.0) ? kAnti : kDiag;
        if (tau_g > kProbTol) {
            // pg * tau_g * D_0|g  with  D_0|g = (b11-e, b12, b21, b22-e)/tau_g
            p0[g * L + 0] += pg * std::max(0.0, base[0] - e);
            p0[g * L + 1] += pg * base[1];
            p0[g * L + 2] += pg * base[2];
            p0[g * L + 3] += pg * std::max(0.0, base[3] - e);
        }
        for (int a = 0; a < 4; ++a) {
            py[g * L + a] += pg * (1.0 - tau_g) * prime_y[a];
            pn[g * L + a] += pg * (1.0 - tau_g) * prime_n[a];
        }
    }
    tau = std::min(1.0, std::max(0.0, tau));
    auto normalized = [&fam](std::vector<double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        for (double& x : v) x /= s;
        return ConstraintDist(fam, std::move(v));
    };
    PaddedDecomposition out{tau, ConstraintDist::uniform(fam), ConstraintDist::uniform(fam),
                            ConstraintDist::uniform(fam)};
    if (tau > kProbTol) out.d0 = normalized(std::move(p0));
    if (1.0 - tau > kProbTol) {
        out.dy_prime = normalized(std::move(py));
        out.dn_prime = normalized(std::move(pn));
    }
    return out;
}

/// Distribution file format:
///   family=<path>
///   p <f_name> <a1> ... <ak> <prob>         (1-based symbols; omitted atoms are 0)
struct DistFile {
    std::string family_path;
    ConstraintDist dist;
};

inline ConstraintDist parse_distribution(std::istream& in, const ConstraintFamily& fam) {
    std::string line;
    std::vector<double> p(fam.size() * fam.table_len(), 0.0);
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        if (!saw_header) {
            if (line.rfind("family=", 0) != 0)
                throw Error("distribution: expected header 'family=<path>', got: " + line);
            saw_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        if (tag != "p") throw Error("distribution: expected 'p <f> <pattern> <prob>': " + line);
        int f = fam.index_of(name);
        std::vector<int> a0(fam.k());
        for (int t = 0; t < fam.k(); ++t) {
            int s;
            if (!(ls >> s)) throw Error("distribution: truncated atom line: " + line);
            require(s >= 1 && s <= fam.q(), "distribution: symbol out of range in: " + line);
            a0[t] = s - 1;
        }
        double prob;
        if (!(ls >> prob)) throw Error("distribution: missing probability: " + line);
        p[f * fam.table_len() + fam.pattern_index(a0)] += prob;
    }
    require(saw_header, "distribution: missing 'family=' header");
    return ConstraintDist(fam, std::move(p));
}

inline std::string dist_family_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("distribution: cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        if (line.rfind("family=", 0) != 0)
            throw Error("distribution: expected header 'family=<path>', got: " + line);
        std::string p = line.substr(7);
        while (!p.empty() && isspace(static_cast<unsigned char>(p.back()))) p.pop_back();
        return p;
    }
    throw Error("distribution: missing 'family=' header in '" + path + "'");
}

inline ConstraintDist load_distribution(const std::string& path, const ConstraintFamily& fam) {
    std::ifstream in(path);
    if (!in) throw Error("distribution: cannot open '" + path + "'");
    return parse_distribution(in, fam);
}

inline void write_distribution(std::ostream& out, const ConstraintDist& d,
                               const std::string& family_path) {
    const ConstraintFamily& fam = d.family();
    out << "family=" << family_path << "\n";
    for (int f = 0; f < fam.size(); ++f) {
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            double p = d.prob(f, a);
            if (p == 0.0) continue;
            out << "p " << fam.name(f);
            for (int s : fam.pattern_of_index(a)) out << ' ' << (s + 1);
            out << ' ' << format_exact(p) << "\n";
        }
    }
}

}  // namespace cspsketch
