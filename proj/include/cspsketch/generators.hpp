#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cspsketch/distribution.hpp"
#include "cspsketch/instance.hpp"

namespace cspsketch {

struct SDParams {
    int n = 0;
    double alpha = 0.0;       // alpha*n hyperedges per block; alpha*n < n/k
    ConstraintDist dist_y, dist_n;
    std::uint64_t seed = 1;

    const ConstraintFamily& family() const { return dist_y.family(); }
    int edges() const { return static_cast<int>(std::llround(alpha * n)); }

    void validate() const {
        const ConstraintFamily& fam = family();
        require(fam == dist_n.family(), "sd: D_Y and D_N use different families");
        require(n >= fam.k(), "sd: need n >= k");
        double an = alpha * n;
        if (std::fabs(an - std::llround(an)) > 1e-9)
            fail("sd: alpha*n = %.6g is not an integer", an);
        if (!(an < double(n) / fam.k() - 1e-12))
            fail("sd: alpha*n = %.6g must be less than n/k = %.6g", an, double(n) / fam.k());
    }
};

struct PaddedStreamParams {
    SDParams sd;
    int blocks = 1;            // T
    double tau_pad = 0.0;      // tau in [0,1)
    ConstraintDist dist_0;

    int padding_count() const {
        require(tau_pad >= 0.0 && tau_pad < 1.0, "pssd: tau_pad must lie in [0,1)");
        return static_cast<int>(std::floor(tau_pad / (1.0 - tau_pad) * sd.alpha * sd.n * blocks));
    }
    void validate() const {
        sd.validate();
        require(blocks >= 0, "pssd: block count must be >= 0");
        require(tau_pad >= 0.0 && tau_pad < 1.0, "pssd: tau_pad must lie in [0,1)");
        require(sd.family() == dist_0.family(), "pssd: D_0 uses a different family");
    }
};

/// One generated tuple: hyperedge, function, and the match-indicator bit.
/// The sampled pattern is retained only when the debug channel is on.
struct GameRecord {
    std::vector<int> edge;  // k distinct 0-based variable indices
    int f_index = 0;
    bool z = false;
    std::vector<int> pattern;  // debug only; empty otherwise
};

struct GameInstance {
    Assignment x_star;
    std::vector<GameRecord> records;
    bool yes_case = true;
};

namespace detail {

inline std::pair<int, std::vector<int>> sample_atom(const ConstraintDist& d,
                                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    const ConstraintFamily& fam = d.family();
    double acc = 0.0;
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            acc += d.prob(f, a);
            if (u <= acc) return {f, fam.pattern_of_index(a)};
        }
    // numerical tail: return the last positive atom
    for (int f = fam.size() - 1; f >= 0; --f)
        for (std::int64_t a = fam.table_len() - 1; a >= 0; --a)
            if (d.prob(f, a) > 0.0) return {f, fam.pattern_of_index(a)};
    throw Error("sample_atom: empty distribution");
}

inline bool pattern_matches(const Assignment& x, const std::vector<int>& edge,
                            const std::vector<int>& pattern) {
    for (size_t t = 0; t < edge.size(); ++t)
        if (x.values[edge[t]] != pattern[t]) return false;
    return true;
}

/// One SD block: a uniform partial hypermatching read off a Fisher-Yates
/// permutation prefix in k-chunks, with patterns from `dist`.
inline void append_sd_block(std::vector<GameRecord>& out, const Assignment& x_star,
                            const ConstraintDist& dist, int n, int edges, bool debug,
                            std::mt19937_64& rng) {
    const int k = dist.family().k();
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng() % std::uint64_t(i + 1)]);
    for (int e = 0; e < edges; ++e) {
        GameRecord rec;
        rec.edge.assign(perm.begin() + e * k, perm.begin() + (e + 1) * k);
        auto [f, pattern] = sample_atom(dist, rng);
        rec.f_index = f;
        rec.z = pattern_matches(x_star, rec.edge, pattern);
        if (debug) rec.pattern = pattern;
        out.push_back(std::move(rec));
    }
}

}  // namespace detail

inline GameInstance gen_sd(const SDParams& p, bool yes_case, bool debug = false) {
    p.validate();
    auto rng = make_rng(p.seed);
    const int q = p.family().q();
    GameInstance g;
    g.yes_case = yes_case;
    g.x_star.values.resize(p.n);
    for (int i = 0; i < p.n; ++i) g.x_star.values[i] = int(rng() % std::uint64_t(q));
    detail::append_sd_block(g.records, g.x_star, yes_case ? p.dist_y : p.dist_n, p.n, p.edges(),
                            debug, rng);
    return g;
}

/// Padding block of uniform k-sets with D_0 patterns, then `blocks`
/// independent SD blocks conditioned on the shared hidden assignment.
inline GameInstance gen_pssd(const PaddedStreamParams& p, bool yes_case, bool debug = false) {
    p.validate();
    auto rng = make_rng(p.sd.seed);
    const ConstraintFamily& fam = p.sd.family();
    const int q = fam.q(), k = fam.k(), n = p.sd.n;
    GameInstance g;
    g.yes_case = yes_case;
    g.x_star.values.resize(n);
    for (int i = 0; i < n; ++i) g.x_star.values[i] = int(rng() % std::uint64_t(q));

    int pads = p.padding_count();
    for (int i = 0; i < pads; ++i) {
        GameRecord rec;
        while (static_cast<int>(rec.edge.size()) < k) {
            int v = int(rng() % std::uint64_t(n));
            if (std::find(rec.edge.begin(), rec.edge.end(), v) == rec.edge.end())
                rec.edge.push_back(v);
        }
        auto [f, pattern] = detail::sample_atom(p.dist_0, rng);
        rec.f_index = f;
        rec.z = detail::pattern_matches(g.x_star, rec.edge, pattern);
        if (debug) rec.pattern = pattern;
        g.records.push_back(std::move(rec));
    }
    for (int t = 0; t < p.blocks; ++t)
        detail::append_sd_block(g.records, g.x_star, yes_case ? p.sd.dist_y : p.sd.dist_n, n,
                                p.sd.edges(), debug, rng);
    return g;
}

/// Keeps exactly the z=1 records as unit-weight constraints.
inline Instance psi_of_stream(const std::vector<GameRecord>& records, int n) {
    Instance psi;
    psi.n = n;
    for (const GameRecord& r : records)
        if (r.z) psi.add(Constraint{r.f_index, r.edge}, 1.0);
    return psi;
}

struct ValueStats {
    std::vector<double> values;  // one per non-empty instance
    int trials = 0;
    int empty_instances = 0;
    bool heuristic_fallback = false;  // opt values are lower bounds only
    double min = 0.0, q10 = 0.0, median = 0.0, q90 = 0.0, max = 0.0, mean = 0.0;

    void finalize() {
        if (values.empty()) return;
        std::vector<double> v = values;
        std::sort(v.begin(), v.end());
        auto quant = [&](double p) { return v[std::min(v.size() - 1, size_t(p * v.size()))]; };
        min = v.front();
        max = v.back();
        q10 = quant(0.10);
        median = quant(0.50);
        q90 = quant(0.90);
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= double(v.size());
    }
};

/// Generates `trials` instances and reports the empirical distribution of
/// their values: the planted value in the YES case, the optimum (exact when
/// q^n fits the budget, heuristic lower bound otherwise) in the NO case.
inline ValueStats validate_instance_values(const PaddedStreamParams& params, bool yes_case,
                                           int trials, std::uint64_t seed,
                                           const OptConfig& opt_cfg = {}) {
    ValueStats stats;
    stats.trials = trials;
    const ConstraintFamily& fam = params.sd.family();
    bool exact_ok =
        std::pow(double(fam.q()), double(params.sd.n)) <= double(opt_cfg.exact_budget);
    for (int t = 0; t < trials; ++t) {
        PaddedStreamParams p = params;
        p.sd.seed = child_seed(seed, t);
        GameInstance g = gen_pssd(p, yes_case);
        Instance psi = psi_of_stream(g.records, p.sd.n);
        if (psi.empty()) {
            ++stats.empty_instances;
            continue;
        }
        if (yes_case) {
            stats.values.push_back(value(fam, psi, g.x_star));
        } else if (exact_ok) {
            stats.values.push_back(opt_value(fam, psi, OptMode::Exact, opt_cfg).value);
        } else {
            OptConfig oc = opt_cfg;
            oc.seed = child_seed(seed, 1000003 + t);
            stats.values.push_back(opt_value(fam, psi, OptMode::Heuristic, oc).value);
            stats.heuristic_fallback = true;
        }
    }
    stats.finalize();
    return stats;
}

struct AdvantageEstimate {
    double advantage = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // 95% CI for the advantage
    double yes_rate = 0.0, no_rate = 0.0;
    int trials = 0;
};

/// Baseline protocol: Alice reveals x*_1..x*_C; Bob scores every z=1 record
/// position whose variable is revealed with the log-likelihood ratio of the
/// two position marginals and answers YES on positive total score.
inline AdvantageEstimate counting_protocol_advantage(const SDParams& params, int revealed,
                                                     int trials, std::uint64_t seed) {
    params.validate();
    require(revealed >= 0 && revealed <= params.n,
            "counting_protocol_advantage: revealed count out of range");
    const ConstraintFamily& fam = params.family();
    MarginalVector mu_y = marginals(params.dist_y);
    MarginalVector mu_n = marginals(params.dist_n);
    const double eps = 1e-12;

    auto run_case = [&](bool yes_case, std::uint64_t case_salt) {
        int said_yes = 0;
        for (int t = 0; t < trials; ++t) {
            SDParams p = params;
            p.seed = child_seed(seed, case_salt + t);
            GameInstance g = gen_sd(p, yes_case);
            double llr = 0.0;
            for (const GameRecord& rec : g.records) {
                if (!rec.z) continue;
                for (int pos = 0; pos < fam.k(); ++pos) {
                    if (rec.edge[pos] >= revealed) continue;
                    int sym = g.x_star.values[rec.edge[pos]];  // = pattern symbol since z=1
                    llr += std::log((mu_y.at(rec.f_index, pos, sym) + eps) /
                                    (mu_n.at(rec.f_index, pos, sym) + eps));
                }
            }
            if (llr > 0.0) ++said_yes;
        }
        return double(said_yes) / double(trials);
    };

    AdvantageEstimate est;
    est.trials = trials;
    est.yes_rate = run_case(true, 0x100000);
    est.no_rate = run_case(false, 0x900000);
    double d = est.yes_rate - est.no_rate;
    double se = std::sqrt(est.yes_rate * (1 - est.yes_rate) / trials +
                          est.no_rate * (1 - est.no_rate) / trials);
    est.advantage = std::fabs(d);
    est.ci_low = std::fabs(d) - 1.96 * se;
    est.ci_high = std::fabs(d) + 1.96 * se;
    // a CI clipped at 0 still "contains 0" when the lower bound is <= 0
    if (est.ci_low < 0.0) est.ci_low = std::min(est.ci_low, 0.0);
    return est;
}

}  // namespace cspsketch
