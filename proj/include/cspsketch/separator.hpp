#pragma once

#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cspsketch/feasibility.hpp"

namespace cspsketch {

/// Non-negative separating functional over marginal space with thresholds
/// tau_y > tau_n: <lambda, mu> >= tau_y on K^Y_gamma and <= tau_n on K^N_beta.
struct SeparatorCertificate {
    int fcount = 0, k = 0, q = 0;
    std::vector<double> lambda;  // indexed (f*k + i)*q + s
    double tau_y = 0.0, tau_n = 0.0;
    double gamma = 0.0, beta = 0.0;
    double verified_margin = 0.0;

    double at(int f, int i, int s) const { return lambda[(f * k + i) * q + s]; }
};

struct SepConfig {
    FeasConfig feas;
    int max_rounds = 30;
    int y_samples = 12;
    int n_samples = 8;
    double margin_floor = 1e-6;
    std::uint64_t seed = 1;
};

namespace detail {

/// <lambda, mu(D)> as a linear functional of D: coefficient on atom (f,a)
/// is sum_i lambda_{f,i,a_i}.
inline std::vector<double> lambda_as_atom_objective(const ConstraintFamily& fam,
                                                    const PatternTable& pt,
                                                    const std::vector<double>& lambda) {
    std::vector<double> obj(fam.size() * fam.table_len(), 0.0);
    const int q = fam.q(), k = fam.k();
    for (int f = 0; f < fam.size(); ++f)
        for (std::int64_t a = 0; a < fam.table_len(); ++a) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += lambda[(f * k + i) * q + pt.at(a, i)];
            obj[f * fam.table_len() + a] = s;
        }
    return obj;
}

struct LinearOverSet {
    double value = 0.0;
    ConstraintDist dist;
    std::vector<double> mu;  // flattened marginal vector
};

/// Optimizes a linear functional of D over S^Y_gamma = {D : sy(D) >= gamma}.
inline std::optional<LinearOverSet> optimize_over_sy(const ConstraintFamily& fam, double gamma,
                                                     const std::vector<double>& atom_obj,
                                                     bool maximize) {
    const std::int64_t m = fam.size() * fam.table_len();
    LpProblem lp;
    lp.n = static_cast<int>(m);
    lp.c.assign(atom_obj.begin(), atom_obj.end());
    if (maximize)
        for (double& c : lp.c) c = -c;
    lp.add_row(std::vector<double>(lp.n, 1.0), Rel::EQ, 1.0);
    {
        std::vector<double> row(lp.n, 0.0);
        for (int f = 0; f < fam.size(); ++f)
            for (std::int64_t a = 0; a < fam.table_len(); ++a)
                if (fam.table(f)[a]) row[f * fam.table_len() + a] = 1.0;
        lp.add_row(row, Rel::GE, gamma);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    ConstraintDist d = clean_dist(fam, sol.x.data(), m);
    double v = 0.0;
    for (std::int64_t i = 0; i < m; ++i) v += atom_obj[i] * d.probs()[i];
    return LinearOverSet{v, d, marginals(d).v};
}

/// Maximizes a linear functional of D over S^N_beta by cutting planes: the
/// membership constraint sn(D) <= beta is enforced through inner-maximizer
/// cuts. Returns nullopt when the cuts prove S^N_beta empty.
inline std::optional<LinearOverSet> maximize_over_sn(const ConstraintFamily& fam, double beta,
                                                     const std::vector<double>& atom_obj,
                                                     CutPool& pool, const FeasConfig& cfg) {
    const std::int64_t m = fam.size() * fam.table_len();
    PatternTable pt(fam);
    for (int iter = 0; iter < cfg.kelley_max_iters; ++iter) {
        LpProblem lp;
        lp.n = static_cast<int>(m);
        lp.c.assign(atom_obj.begin(), atom_obj.end());
        for (double& c : lp.c) c = -c;  // maximize
        lp.add_row(std::vector<double>(lp.n, 1.0), Rel::EQ, 1.0);
        for (const auto& cut : pool.cuts) {
            std::vector<double> row = cut_coefficients(fam, pt, cut);
            lp.add_row(row, Rel::LE, beta);
        }
        LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) return std::nullopt;
        require(sol.status == LpStatus::Optimal, "separator: S^N attack LP failed");
        ConstraintDist d = clean_dist(fam, sol.x.data(), m);
        SnResult sn = sn_value(d, cfg);
        if (sn.value > beta + 10 * cfg.cut_tol) {
            pool.add(sn.witness);
            continue;
        }
        double v = 0.0;
        for (std::int64_t i = 0; i < m; ++i) v += atom_obj[i] * d.probs()[i];
        return LinearOverSet{v, d, marginals(d).v};
    }
    throw Error("separator: S^N attack did not converge");
}

}  // namespace detail

/// Computes the max-margin separator between sampled points of K^Y_gamma and
/// K^N_beta, hardens it by alternating adversarial attacks on both sets, and
/// shifts it to non-negative coefficients via <mu, 1> = k.
inline SeparatorCertificate separating_hyperplane(const ConstraintFamily& fam, double gamma,
                                                  double beta, const SepConfig& cfg = {}) {
    const int d = fam.size() * fam.k() * fam.q();
    const int k = fam.k();
    detail::PatternTable pt(fam);

    {
        DecisionOutcome pre = decide_intersection(fam, gamma, beta, cfg.feas);
        if (pre.verdict != Verdict::Disjoint)
            fail("separating_hyperplane: sets not certified disjoint at gamma=%g beta=%g (verdict %s)",
                 gamma, beta, to_string(pre.verdict));
    }

    CutPool sn_pool = CutPool::seeded(fam.q());
    auto rng = make_rng(cfg.seed);

    // Probe S^N for emptiness before anything else.
    std::vector<double> zero_obj(fam.size() * fam.table_len(), 0.0);
    if (!detail::maximize_over_sn(fam, beta, zero_obj, sn_pool, cfg.feas)) {
        // K^N empty: <1, mu> = k on all of K^Y, any tau_n < k works
        SeparatorCertificate cert;
        cert.fcount = fam.size();
        cert.k = fam.k();
        cert.q = fam.q();
        cert.lambda.assign(d, 1.0);
        cert.tau_y = double(k);
        cert.tau_n = double(k) - 1.0;
        cert.gamma = gamma;
        cert.beta = beta;
        cert.verified_margin = 0.5;
        return cert;
    }

    // (i) sample marginals from both sets via random objectives
    std::vector<std::vector<double>> mus_y, mus_n;
    std::uniform_int_distribution<int> coin(0, 1);
    auto random_atom_objective = [&]() {
        std::vector<double> obj(fam.size() * fam.table_len());
        for (double& x : obj) x = coin(rng) ? 1.0 : -1.0;
        return obj;
    };
    for (int s = 0; s < cfg.y_samples; ++s) {
        auto r = detail::optimize_over_sy(fam, gamma, random_atom_objective(), s % 2 == 0);
        require(r.has_value(), "separating_hyperplane: S^Y unexpectedly empty");
        mus_y.push_back(r->mu);
    }
    for (int s = 0; s < cfg.n_samples; ++s) {
        auto r = detail::maximize_over_sn(fam, beta, random_atom_objective(), sn_pool, cfg.feas);
        require(r.has_value(), "separating_hyperplane: S^N emptiness flip-flopped");
        mus_n.push_back(r->mu);
    }

    // (ii)+(iii) alternate max-margin fitting and adversarial attacks
    std::vector<double> lam(d, 0.0);
    double tau = 0.0, margin = 0.0;
    double min_y = 0.0, max_n = 0.0;
    for (int round = 0; round < cfg.max_rounds; ++round) {
        // margin LP over current samples: lambda' = u - v in [-1,1]^d
        LpProblem lp;
        lp.n = 2 * d + 3;  // u, v, tau+, tau-, margin
        lp.c.assign(lp.n, 0.0);
        lp.c[2 * d + 2] = -1.0;  // maximize margin
        for (int e = 0; e < d; ++e) {
            std::vector<double> row(lp.n, 0.0);
            row[e] = 1.0;
            lp.add_row(row, Rel::LE, 1.0);
            std::fill(row.begin(), row.end(), 0.0);
            row[d + e] = 1.0;
            lp.add_row(row, Rel::LE, 1.0);
        }
        for (const auto& mu : mus_y) {
            std::vector<double> row(lp.n, 0.0);
            for (int e = 0; e < d; ++e) {
                row[e] = mu[e];
                row[d + e] = -mu[e];
            }
            row[2 * d] = -1.0;
            row[2 * d + 1] = 1.0;
            row[2 * d + 2] = -1.0;
            lp.add_row(row, Rel::GE, 0.0);
        }
        for (const auto& mu : mus_n) {
            std::vector<double> row(lp.n, 0.0);
            for (int e = 0; e < d; ++e) {
                row[e] = -mu[e];
                row[d + e] = mu[e];
            }
            row[2 * d] = 1.0;
            row[2 * d + 1] = -1.0;
            row[2 * d + 2] = -1.0;
            lp.add_row(row, Rel::GE, 0.0);
        }
        LpSolution sol = solve_lp(lp);
        require(sol.status == LpStatus::Optimal, "separating_hyperplane: margin LP failed");
        for (int e = 0; e < d; ++e) lam[e] = sol.x[e] - sol.x[d + e];
        tau = sol.x[2 * d] - sol.x[2 * d + 1];
        margin = sol.x[2 * d + 2];

        // adversarial attacks with the current functional
        std::vector<double> atom_obj = detail::lambda_as_atom_objective(fam, pt, lam);
        auto ay = detail::optimize_over_sy(fam, gamma, atom_obj, false);
        require(ay.has_value(), "separating_hyperplane: S^Y attack failed");
        auto an = detail::maximize_over_sn(fam, beta, atom_obj, sn_pool, cfg.feas);
        require(an.has_value(), "separating_hyperplane: S^N attack failed");
        min_y = ay->value;
        max_n = an->value;
        bool violated = false;
        if (min_y < tau + margin - 1e-12) {
            mus_y.push_back(ay->mu);
            violated = true;
        }
        if (max_n > tau - margin + 1e-12) {
            mus_n.push_back(an->mu);
            violated = true;
        }
        if (!violated) break;
    }

    double gap = min_y - max_n;
    if (gap < cfg.margin_floor)
        fail("separation not certified: adversarial gap %.3g below %.3g", gap, cfg.margin_floor);

    // (iv) shift to non-negative coefficients using <mu, 1> = k
    double lam_min = lam[0];
    for (double x : lam) lam_min = std::min(lam_min, x);
    double shift = lam_min < 0.0 ? -lam_min : 0.0;
    SeparatorCertificate cert;
    cert.fcount = fam.size();
    cert.k = fam.k();
    cert.q = fam.q();
    cert.lambda = lam;
    for (double& x : cert.lambda) x += shift;
    cert.gamma = gamma;
    cert.beta = beta;
    cert.tau_y = (min_y + k * shift) - 0.25 * gap;
    cert.tau_n = (max_n + k * shift) + 0.25 * gap;
    cert.verified_margin = 0.25 * gap;
    return cert;
}

struct VerifyReport {
    bool pass = false;
    bool structural_ok = false;
    bool n_side_empty = false;
    double slack_y = 0.0;  // min over checks of <lambda,mu> - tau_y on K^Y
    double slack_n = 0.0;  // min over checks of tau_n - <lambda,mu> on K^N
    int checked_y = 0, checked_n = 0;
};

/// Adversarial audit of both certificate inequalities: exact LP minimization
/// over S^Y, cutting-plane maximization over S^N, plus random probes.
inline VerifyReport verify_hyperplane(const SeparatorCertificate& cert, const ConstraintFamily& fam,
                                      int trials = 16, std::uint64_t seed = 1,
                                      const FeasConfig& feas = {}) {
    VerifyReport rep;
    require(cert.fcount == fam.size() && cert.k == fam.k() && cert.q == fam.q(),
            "verify_hyperplane: certificate shape does not match family");
    rep.structural_ok = cert.tau_y > cert.tau_n;
    for (double x : cert.lambda)
        if (x < 0.0) rep.structural_ok = false;
    if (!rep.structural_ok) return rep;

    detail::PatternTable pt(fam);
    std::vector<double> atom_obj = detail::lambda_as_atom_objective(fam, pt, cert.lambda);
    auto dot_mu = [&](const std::vector<double>& mu) {
        double s = 0.0;
        for (size_t e = 0; e < mu.size(); ++e) s += cert.lambda[e] * mu[e];
        return s;
    };

    rep.slack_y = std::numeric_limits<double>::infinity();
    rep.slack_n = std::numeric_limits<double>::infinity();
    auto ymin = detail::optimize_over_sy(fam, cert.gamma, atom_obj, false);
    require(ymin.has_value(), "verify_hyperplane: S^Y empty");
    rep.slack_y = std::min(rep.slack_y, ymin->value - cert.tau_y);
    ++rep.checked_y;

    CutPool pool = CutPool::seeded(fam.q());
    auto nmax = detail::maximize_over_sn(fam, cert.beta, atom_obj, pool, feas);
    if (!nmax.has_value()) {
        rep.n_side_empty = true;
    } else {
        rep.slack_n = std::min(rep.slack_n, cert.tau_n - nmax->value);
        ++rep.checked_n;
    }

    auto rng = make_rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> obj(fam.size() * fam.table_len());
        for (double& x : obj) x = coin(rng) ? 1.0 : -1.0;
        auto ry = detail::optimize_over_sy(fam, cert.gamma, obj, t % 2 == 0);
        if (ry) {
            rep.slack_y = std::min(rep.slack_y, dot_mu(ry->mu) - cert.tau_y);
            ++rep.checked_y;
        }
        if (!rep.n_side_empty) {
            auto rn = detail::maximize_over_sn(fam, cert.beta, obj, pool, feas);
            if (rn) {
                rep.slack_n = std::min(rep.slack_n, cert.tau_n - dot_mu(rn->mu));
                ++rep.checked_n;
            }
        }
    }
    rep.pass = rep.slack_y >= -1e-6 && (rep.n_side_empty || rep.slack_n >= -1e-6);
    return rep;
}

/// Certificate file: header with the scalars, then one line per coefficient.
inline void write_certificate(std::ostream& out, const SeparatorCertificate& cert,
                              const ConstraintFamily& fam) {
    out << "tauY=" << format_exact(cert.tau_y) << " tauN=" << format_exact(cert.tau_n)
        << " gamma=" << format_exact(cert.gamma) << " beta=" << format_exact(cert.beta)
        << " margin=" << format_exact(cert.verified_margin) << "\n";
    for (int f = 0; f < fam.size(); ++f)
        for (int i = 0; i < fam.k(); ++i)
            for (int s = 0; s < fam.q(); ++s)
                out << "lambda " << fam.name(f) << ' ' << (i + 1) << ' ' << (s + 1) << ' '
                    << format_exact(cert.at(f, i, s)) << "\n";
}

inline SeparatorCertificate parse_certificate(std::istream& in, const ConstraintFamily& fam) {
    SeparatorCertificate cert;
    cert.fcount = fam.size();
    cert.k = fam.k();
    cert.q = fam.q();
    cert.lambda.assign(fam.size() * fam.k() * fam.q(), 0.0);
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        if (!saw_header) {
            std::istringstream hs(line);
            std::string tok;
            while (hs >> tok) {
                auto eat = [&](const char* key, double& dst) {
                    size_t n = std::strlen(key);
                    if (tok.rfind(key, 0) == 0) dst = std::stod(tok.substr(n));
                };
                eat("tauY=", cert.tau_y);
                eat("tauN=", cert.tau_n);
                eat("gamma=", cert.gamma);
                eat("beta=", cert.beta);
                eat("margin=", cert.verified_margin);
            }
            saw_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string tag, name;
        int i, s;
        double v;
        ls >> tag >> name >> i >> s >> v;
        if (tag != "lambda" || !ls) throw Error("certificate: bad line: " + line);
        int f = fam.index_of(name);
        require(i >= 1 && i <= fam.k() && s >= 1 && s <= fam.q(),
                "certificate: index out of range in: " + line);
        cert.lambda[(f * fam.k() + (i - 1)) * fam.q() + (s - 1)] = v;
    }
    require(saw_header, "certificate: missing header line");
    return cert;
}

inline SeparatorCertificate load_certificate(const std::string& path, const ConstraintFamily& fam) {
    std::ifstream in(path);
    if (!in) throw Error("certificate: cannot open '" + path + "'");
    return parse_certificate(in, fam);
}

inline void save_certificate(const std::string& path, const SeparatorCertificate& cert,
                             const ConstraintFamily& fam) {
    std::ofstream out(path);
    if (!out) throw Error("certificate: cannot write '" + path + "'");
    write_certificate(out, cert, fam);
}

}  // namespace cspsketch
