#include <doctest.h>

#include "cspsketch/feasibility.hpp"
#include "cspsketch/rng.hpp"

using namespace cspsketch;

namespace {

ConstraintDist random_dist(const ConstraintFamily& fam, std::mt19937_64& rng) {
    std::vector<double> p = random_simplex_point(rng, fam.size() * int(fam.table_len()));
    return ConstraintDist(fam, std::move(p));
}

FeasConfig fast_cfg() {
    FeasConfig cfg;
    cfg.ascent_starts = 8;
    return cfg;
}

}  // namespace

TEST_CASE("sy_value basics") {
    ConstraintFamily ones = make_const1(2, 2);
    CHECK(sy_value(ConstraintDist::uniform(ones)) == doctest::Approx(1.0));
    ConstraintFamily dicut = make_dicut();
    ConstraintDist ex1 = ConstraintDist::from_atoms(dicut, {{{0, {2, 1}}, 0.6}, {{0, {1, 2}}, 0.4}});
    CHECK(sy_value(ex1) == doctest::Approx(0.6));
    CHECK(sy_value(ConstraintDist::uniform(dicut)) == doctest::Approx(0.25));
}

TEST_CASE("sn_value on the worked examples") {
    FeasConfig cfg = fast_cfg();
    SUBCASE("point mass on dicut (2,1) reaches 1 at point-mass columns") {
        ConstraintFamily fam = make_dicut();
        ConstraintDist d = ConstraintDist::from_atoms(fam, {{{0, {2, 1}}, 1.0}});
        SnResult r = sn_value(d, cfg);
        CHECK(r.value == doctest::Approx(1.0));
        CHECK(r.witness.cols[1][1] == doctest::Approx(1.0));  // P_2 = delta_2
        CHECK(r.witness.cols[0][0] == doctest::Approx(1.0));  // P_1 = delta_1
    }
    SUBCASE("uniform over dicut patterns gives 1/4") {
        ConstraintFamily fam = make_dicut();
        CHECK(sn_value(ConstraintDist::uniform(fam), cfg).value == doctest::Approx(0.25));
    }
    SUBCASE("uniform over Max-CUT patterns gives 1/2") {
        ConstraintFamily fam = make_qcol(2);
        CHECK(sn_value(ConstraintDist::uniform(fam), cfg).value == doctest::Approx(0.5));
    }
    SUBCASE("uniform over Max-3Col patterns gives 2/3") {
        ConstraintFamily fam = make_qcol(3);
        CHECK(sn_value(ConstraintDist::uniform(fam), cfg).value == doctest::Approx(2.0 / 3.0));
    }
}

TEST_CASE("sn_value >= sy_value: the planted assignment is a point-mass column choice") {
    auto rng = make_rng(13);
    FeasConfig cfg = fast_cfg();
    cfg.ascent_starts = 2;
    for (const ConstraintFamily& fam : {make_dicut(), make_qcol(3), make_qug(2)}) {
        for (int t = 0; t < 8; ++t) {
            ConstraintDist d = random_dist(fam, rng);
            CHECK(sn_value(d, cfg).value >= sy_value(d) - 1e-9);
        }
    }
}

TEST_CASE("sn inner maximum matches an exhaustive 2-parameter grid at q=k=2") {
    // scale-invariance oracle: columns over [2] are 1-parameter each
    auto rng = make_rng(14);
    ConstraintFamily fam = make_dicut();
    FeasConfig cfg = fast_cfg();
    detail::PatternTable pt(fam);
    for (int t = 0; t < 4; ++t) {
        ConstraintDist d = random_dist(fam, rng);
        double oracle = -1.0;
        const int R = 1000;
        for (int i = 0; i <= R; ++i) {
            for (int j = 0; j <= R; ++j) {
                SymmetricProductAssignment p;
                p.cols = {{double(i) / R, 1.0 - double(i) / R},
                          {double(j) / R, 1.0 - double(j) / R}};
                oracle = std::max(oracle, detail::eval_columns(d, pt, p));
            }
        }
        SnResult r = sn_value(d, cfg);
        CHECK(r.value >= oracle - 1e-6);  // grid is only 1e-3 accurate itself
        CHECK(r.value <= oracle + 1e-3);
    }
}

TEST_CASE("sy and per-assignment objectives are linear in D") {
    ConstraintFamily fam = make_qcol(2);
    auto rng = make_rng(15);
    ConstraintDist d1 = random_dist(fam, rng), d2 = random_dist(fam, rng);
    double a = 0.4;
    std::vector<double> mix(d1.probs().size());
    for (size_t i = 0; i < mix.size(); ++i) mix[i] = a * d1.probs()[i] + (1 - a) * d2.probs()[i];
    ConstraintDist dm(fam, mix);
    CHECK(sy_value(dm) == doctest::Approx(a * sy_value(d1) + (1 - a) * sy_value(d2)));
    detail::PatternTable pt(fam);
    SymmetricProductAssignment p = SymmetricProductAssignment::uniform(2);
    CHECK(detail::eval_columns(dm, pt, p) ==
          doctest::Approx(a * detail::eval_columns(d1, pt, p) +
                          (1 - a) * detail::eval_columns(d2, pt, p)));
}

TEST_CASE("decide_intersection on the dicut example points") {
    ConstraintFamily fam = make_dicut();
    FeasConfig cfg = fast_cfg();
    SUBCASE("gamma=0.7, beta=0.5: intersects (curve value 0.4)") {
        DecisionOutcome out = decide_intersection(fam, 0.7, 0.5, cfg);
        CHECK(out.verdict == Verdict::Intersect);
        REQUIRE(out.witness.has_value());
        CHECK(sy_value(out.witness->first) >= 0.7 - 1e-7);
        CHECK(out.bound <= 0.5 + cfg.delta);
        MarginalVector my = marginals(out.witness->first), mn = marginals(out.witness->second);
        for (size_t i = 0; i < my.v.size(); ++i) CHECK(std::fabs(my.v[i] - mn.v[i]) <= 1e-7);
    }
    SUBCASE("gamma=0.7, beta=0.3: disjoint (curve value 0.4)") {
        DecisionOutcome out = decide_intersection(fam, 0.7, 0.3, cfg);
        CHECK(out.verdict == Verdict::Disjoint);
        CHECK(out.lower_bound > 0.3 + cfg.delta);
    }
    SUBCASE("constant-1 family at gamma=1, beta=0.5: K^N empty") {
        ConstraintFamily ones = make_const1(2, 2);
        DecisionOutcome out = decide_intersection(ones, 1.0, 0.5, cfg);
        CHECK(out.verdict == Verdict::Disjoint);
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(decide_intersection(fam, 0.5, 0.5, cfg), Error);
        CHECK_THROWS_AS(decide_intersection(fam, 0.3, 0.5, cfg), Error);
    }
}

TEST_CASE("decide_intersection verdict is monotone on a small dicut grid") {
    ConstraintFamily fam = make_dicut();
    FeasConfig cfg = fast_cfg();
    CutPool pool = CutPool::seeded(2);
    std::vector<double> gammas = {0.55, 0.7, 0.85};
    std::vector<double> betas = {0.15, 0.35, 0.55, 0.75};
    std::vector<std::vector<int>> verdicts(gammas.size());
    for (size_t gi = 0; gi < gammas.size(); ++gi)
        for (double b : betas) {
            if (b >= gammas[gi]) {
                verdicts[gi].push_back(1);  // beta >= gamma: trivially intersecting regime
                continue;
            }
            DecisionOutcome o = decide_intersection(fam, gammas[gi], b, cfg, &pool);
            verdicts[gi].push_back(o.verdict == Verdict::Intersect ? 1
                                   : o.verdict == Verdict::Disjoint ? -1 : 0);
        }
    // larger beta at fixed gamma: INTERSECT cannot turn into DISJOINT
    for (size_t gi = 0; gi < gammas.size(); ++gi)
        for (size_t bi = 1; bi < betas.size(); ++bi)
            if (verdicts[gi][bi - 1] == 1) CHECK(verdicts[gi][bi] == 1);
    // smaller gamma at fixed beta: INTERSECT persists
    for (size_t gi = 1; gi < gammas.size(); ++gi)
        for (size_t bi = 0; bi < betas.size(); ++bi)
            if (verdicts[gi][bi] == 1) CHECK(verdicts[gi - 1][bi] == 1);
}

TEST_CASE("hardness curve matches the dicut closed forms") {
    ConstraintFamily fam = make_dicut();
    FeasConfig cfg = fast_cfg();
    std::vector<double> grid = {0.55, 0.6, 2.0 / 3.0, 0.8, 1.0};
    std::vector<CurvePoint> curve = hardness_curve(fam, grid, cfg);
    auto closed = [](double g) {
        return (g <= 2.0 / 3.0) ? (1 - g) * (1 - g) / (3 - 4 * g) : 2 * g - 1;
    };
    for (const CurvePoint& p : curve) {
        CHECK(p.feasible);
        CHECK(p.beta == doctest::Approx(closed(p.gamma)).epsilon(1e-3));
    }
    // spot values of the closed form
    CHECK(curve[1].beta == doctest::Approx(4.0 / 15.0).epsilon(1e-3));   // gamma = 3/5
    CHECK(curve[2].beta == doctest::Approx(1.0 / 3.0).epsilon(1e-3));    // gamma = 2/3
    CHECK(curve[0].beta == doctest::Approx(0.2025 / 0.8).epsilon(1e-3)); // gamma = 0.55
    // below gamma = 1/2 the constraint is slack and the curve sits at 1/4
    std::vector<CurvePoint> low = hardness_curve(fam, {0.3}, cfg);
    CHECK(low[0].beta == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("rho on the example families") {
    FeasConfig cfg = fast_cfg();
    SUBCASE("dicut: independent 1-d grid oracle at resolution 1e-5") {
        double oracle = 0.0;
        for (int i = 0; i <= 100000; ++i) {
            double p = i / 100000.0;
            oracle = std::max(oracle, p * (1 - p));
        }
        CHECK(oracle == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(rho(make_dicut(), cfg) == doctest::Approx(oracle).epsilon(1e-4));
    }
    SUBCASE("Max-qCol: 1 - 1/q") {
        for (int q : {2, 3, 4})
            CHECK(rho(make_qcol(q), cfg) == doctest::Approx(1.0 - 1.0 / q).epsilon(1e-4));
    }
    SUBCASE("Max-qUG at q=2: 1/q") {
        CHECK(rho(make_qug(2), cfg) == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("approximation resistance classification") {
    FeasConfig cfg = fast_cfg();
    SUBCASE("Max-CUT is resistant with the uniform witness pair") {
        ResistanceResult r = is_approx_resistant(make_qcol(2), cfg);
        CHECK(r.resistant);
        REQUIRE(r.witness.has_value());
        CHECK(r.witness_sy == doctest::Approx(1.0));
        CHECK(r.witness_sn == doctest::Approx(0.5).epsilon(1e-6));
    }
    SUBCASE("dicut is not resistant") {
        ResistanceResult r = is_approx_resistant(make_dicut(), cfg);
        CHECK_FALSE(r.resistant);
        CHECK(r.status == Verdict::Disjoint);
    }
    SUBCASE("binary unique games are resistant at rho = 1/2") {
        ResistanceResult r = is_approx_resistant(make_qug(2), cfg);
        CHECK(r.resistant);
        CHECK(r.rho_value == doctest::Approx(0.5).epsilon(1e-4));
        REQUIRE(r.witness.has_value());
        CHECK(r.witness_sy == doctest::Approx(1.0));
        CHECK(r.witness_sn == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("4-coloring is resistant at rho = 3/4") {
        ResistanceResult r = is_approx_resistant(make_qcol(4), cfg);
        CHECK(r.resistant);
        CHECK(r.rho_value == doctest::Approx(0.75).epsilon(1e-4));
        REQUIRE(r.witness.has_value());
        CHECK(r.witness_sn == doctest::Approx(0.75).epsilon(2e-4));
    }
}

TEST_CASE("alpha on dicut") {
    FeasConfig cfg = fast_cfg();
    AlphaResult a = alpha(make_dicut(), 0.02, cfg);
    CHECK(a.value == doctest::Approx(4.0 / 9.0).epsilon(5e-3));
    CHECK_THROWS_AS(alpha(make_dicut(), 0.5, cfg), Error);
}

TEST_CASE("arity-1 families flow through the feasibility machinery") {
    // f(x) = [x = 1] over q = 3: planted atoms satisfy it, any point-mass
    // column assignment reaches 1
    ConstraintFamily fam(3, 1);
    fam.add_function("is1", {1, 0, 0});
    FeasConfig cfg = fast_cfg();
    CHECK(rho(fam, cfg) == doctest::Approx(1.0));  // P = delta_1 satisfies always
    ConstraintDist point = ConstraintDist::from_atoms(fam, {{{0, {2}}, 1.0}});
    CHECK(sy_value(point) == doctest::Approx(0.0));
    CHECK(sn_value(point, cfg).value == doctest::Approx(1.0));
}

TEST_CASE("family budget guard") {
    ConstraintFamily big(2, 2);
    // 2^(q^k) possible tables minus duplicates; 16 functions well under the
    // duplicate limit but |F|*q^k = 64 <= 512, so craft a tighter config.
    for (int i = 1; i < 16; ++i) {
        std::vector<std::uint8_t> t(4);
        for (int b = 0; b < 4; ++b) t[b] = (i >> b) & 1;
        big.add_function("f" + std::to_string(i), std::move(t));
    }
    FeasConfig cfg;
    cfg.family_budget = 16;
    CHECK_THROWS_AS(rho(big, cfg), Error);
}
