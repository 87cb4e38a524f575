#include <doctest.h>

#include <cstdio>

#include "cspsketch/sketch.hpp"

using namespace cspsketch;

namespace {

SeparatorCertificate toy_cert(const ConstraintFamily& fam, std::vector<double> lambda,
                              double tau_y, double tau_n) {
    SeparatorCertificate cert;
    cert.fcount = fam.size();
    cert.k = fam.k();
    cert.q = fam.q();
    cert.lambda = std::move(lambda);
    cert.tau_y = tau_y;
    cert.tau_n = tau_n;
    cert.gamma = 1.0;
    cert.beta = 0.0;
    return cert;
}

std::vector<StreamUpdate> random_stream(const ConstraintFamily& fam, int n, int inserts,
                                        std::mt19937_64& rng) {
    // insert/delete mix with non-negative final multiplicities
    std::vector<StreamUpdate> ups;
    std::vector<Constraint> alive;
    std::uniform_int_distribution<int> vpick(0, n - 1), fpick(0, fam.size() - 1);
    for (int i = 0; i < inserts; ++i) {
        if (!alive.empty() && rng() % 4 == 0) {
            size_t at = rng() % alive.size();
            ups.push_back({alive[at], -1});
            alive.erase(alive.begin() + at);
            continue;
        }
        Constraint c;
        c.f_index = fpick(rng);
        while (static_cast<int>(c.vars.size()) < fam.k()) {
            int v = vpick(rng);
            if (std::find(c.vars.begin(), c.vars.end(), v) == c.vars.end()) c.vars.push_back(v);
        }
        ups.push_back({c, +1});
        alive.push_back(c);
    }
    return ups;
}

}  // namespace

TEST_CASE("bias accumulator unrolled for a single constraint") {
    ConstraintFamily fam = make_dicut();
    // lambda rows: position 1 -> (0.3, 0.7), position 2 -> (0.2, 0.1)
    SeparatorCertificate cert = toy_cert(fam, {0.3, 0.7, 0.2, 0.1}, 1.0, 0.5);
    BiasSketch s(fam, cert, 3);
    s.update({Constraint{0, {0, 1}}, +1});
    CHECK(s.total_weight() == 1);
    std::vector<double> row0 = s.row_bias(0), row1 = s.row_bias(1), row2 = s.row_bias(2);
    CHECK(row0 == std::vector<double>{0.3, 0.7});
    CHECK(row1 == std::vector<double>{0.2, 0.1});
    CHECK(row2 == std::vector<double>{0.0, 0.0});
    // B = max(0.3,0.7) + max(0.2,0.1) = 0.9
    CHECK(b_lambda(s).value == doctest::Approx(0.9));
}

TEST_CASE("all-ones lambda gives B equal to k for one constraint") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {1, 1, 1, 1}, 2.0, 1.0);
    BiasSketch s(fam, cert, 5);
    s.update({Constraint{0, {2, 4}}, +1});
    CHECK(b_lambda(s).value == doctest::Approx(2.0));
}

TEST_CASE("insert then delete cancels to the zero state") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {0.3, 0.7, 0.2, 0.1}, 1.0, 0.5);
    BiasSketch s(fam, cert, 3);
    s.update({Constraint{0, {0, 1}}, +1});
    s.update({Constraint{0, {0, 1}}, -1});
    for (std::int64_t c : s.counts()) CHECK(c == 0);
    CHECK(s.total_weight() == 0);
    CHECK_THROWS_WITH_AS(b_lambda(s), "empty instance", Error);
}

TEST_CASE("negative intermediate weight is fine, negative final weight is not") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {0.3, 0.7, 0.2, 0.1}, 1.0, 0.5);
    BiasSketch s(fam, cert, 3);
    s.update({Constraint{0, {0, 1}}, -1});  // delete before insert
    CHECK(s.total_weight() == -1);
    s.update({Constraint{0, {0, 1}}, +1});
    s.update({Constraint{0, {1, 2}}, +1});
    CHECK(b_lambda(s).value > 0.0);
    s.update({Constraint{0, {1, 2}}, -1});
    s.update({Constraint{0, {0, 2}}, -1});
    CHECK_THROWS_WITH_AS(b_lambda(s),
                         doctest::Contains("end-of-stream non-negativity"), Error);
}

TEST_CASE("comp/comb laws hold byte-exactly on random dynamic streams") {
    ConstraintFamily fam = make_qug(2);
    SeparatorCertificate cert =
        toy_cert(fam, {0.11, 0.97, 0.55, 0.23, 0.78, 0.01, 0.64, 0.39}, 1.0, 0.5);
    auto rng = make_rng(77);
    for (int t = 0; t < 200; ++t) {
        std::vector<StreamUpdate> ups = random_stream(fam, 10, 24, rng);
        size_t split = rng() % (ups.size() + 1);
        std::vector<StreamUpdate> a(ups.begin(), ups.begin() + split);
        std::vector<StreamUpdate> b(ups.begin() + split, ups.end());
        BiasSketch whole = sketch_comp(fam, cert, 10, ups);
        BiasSketch merged = sketch_comb(sketch_comp(fam, cert, 10, a),
                                        sketch_comp(fam, cert, 10, b));
        CHECK(whole.counts() == merged.counts());
        CHECK(whole.total_weight() == merged.total_weight());
        // commutativity
        BiasSketch swapped = sketch_comb(sketch_comp(fam, cert, 10, b),
                                         sketch_comp(fam, cert, 10, a));
        CHECK(whole.counts() == swapped.counts());
        // order invariance
        std::vector<StreamUpdate> shuffled = ups;
        for (size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng() % i]);
        CHECK(sketch_comp(fam, cert, 10, shuffled).counts() == whole.counts());
    }
}

TEST_CASE("merging incompatible sketches is an error") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {1, 1, 1, 1}, 2.0, 1.0);
    BiasSketch a(fam, cert, 3), b(fam, cert, 4);
    CHECK_THROWS_AS(sketch_comb(a, b), Error);
    SketchConfig sampled;
    sampled.mode = SketchMode::Sampled;
    sampled.seed = 1;
    BiasSketch c(fam, cert, 3, sampled);
    CHECK_THROWS_AS(sketch_comb(a, c), Error);
}

TEST_CASE("bias equals the best-assignment marginal functional") {
    // B_lambda(Psi) = max_b <lambda, mu(D(Psi^b))>, checked by enumeration
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {0.15, 0.85, 0.4, 0.05}, 1.0, 0.5);
    auto rng = make_rng(123);
    for (int t = 0; t < 60; ++t) {
        const int n = 6;
        std::vector<StreamUpdate> ups;
        std::uniform_int_distribution<int> vpick(0, n - 1);
        int m = 2 + int(rng() % 8);
        for (int i = 0; i < m; ++i) {
            int a = vpick(rng), b = vpick(rng);
            while (b == a) b = vpick(rng);
            ups.push_back({Constraint{0, {a, b}}, +1});
        }
        BiasSketch s = sketch_comp(fam, cert, n, ups);
        double bias = b_lambda(s).value;

        Instance psi;
        psi.n = n;
        for (const auto& u : ups) psi.add(u.constraint, 1.0);
        double best = -1.0;
        Assignment asg{std::vector<int>(n, 0)};
        for (int mask = 0; mask < (1 << n); ++mask) {
            for (int i = 0; i < n; ++i) asg.values[i] = (mask >> i) & 1;
            MarginalVector mu = marginals(dist_of_instance(fam, psi, asg));
            double dot = 0.0;
            for (size_t e = 0; e < mu.v.size(); ++e) dot += cert.lambda[e] * mu.v[e];
            best = std::max(best, dot);
        }
        CHECK(bias == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("decide_stream threshold arithmetic") {
    ConstraintFamily fam = make_dicut();
    // tau_y = 0.6, tau_n = 0.4 -> eps = 0.1, cut at 0.44
    SUBCASE("estimate 0.45 answers YES") {
        SeparatorCertificate cert = toy_cert(fam, {0.45, 0.2, 0.0, 0.0}, 0.6, 0.4);
        BiasSketch s(fam, cert, 2);
        s.update({Constraint{0, {0, 1}}, +1});
        REQUIRE(b_lambda(s).value == doctest::Approx(0.45));
        CHECK(decide_stream(s) == StreamVerdict::Yes);
    }
    SUBCASE("estimate 0.44 answers NO (boundary is NO)") {
        SeparatorCertificate cert = toy_cert(fam, {0.44, 0.2, 0.0, 0.0}, 0.6, 0.4);
        BiasSketch s(fam, cert, 2);
        s.update({Constraint{0, {0, 1}}, +1});
        REQUIRE(b_lambda(s).value == doctest::Approx(0.44));
        CHECK(decide_stream(s) == StreamVerdict::No);
    }
}

TEST_CASE("sampled mode matches exact mode on its rows, bit for bit") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {0.3, 0.7, 0.2, 0.1}, 1.0, 0.5);
    auto rng = make_rng(5);
    SketchConfig scfg;
    scfg.mode = SketchMode::Sampled;
    scfg.sample_rate = 0.5;
    scfg.seed = 9;
    const int n = 20;
    std::vector<StreamUpdate> ups = random_stream(fam, n, 60, rng);
    BiasSketch exact = sketch_comp(fam, cert, n, ups);
    BiasSketch sampled = sketch_comp(fam, cert, n, ups, scfg);
    REQUIRE(sampled.sampled_rows().size() == 10);
    for (size_t idx = 0; idx < sampled.sampled_rows().size(); ++idx) {
        int row = sampled.sampled_rows()[idx];
        for (int f = 0; f < fam.size(); ++f)
            for (int t = 0; t < fam.k(); ++t)
                CHECK(sampled.counts()[(idx * fam.size() + f) * fam.k() + t] ==
                      exact.counts()[(size_t(row) * fam.size() + f) * fam.k() + t]);
    }
}

TEST_CASE("stream file and sketch binary round-trips") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert = toy_cert(fam, {0.3, 0.7, 0.2, 0.1}, 1.0, 0.5);
    std::vector<StreamUpdate> ups = {{Constraint{0, {0, 1}}, +1},
                                     {Constraint{0, {2, 1}}, +1},
                                     {Constraint{0, {0, 1}}, -1},
                                     {Constraint{0, {3, 4}}, +1}};
    std::ostringstream os;
    write_stream(os, fam, 5, "fam.txt", ups);
    std::istringstream is(os.str());
    StreamFile sf = parse_stream(is, fam);
    CHECK(sf.n == 5);
    CHECK(sf.family_path == "fam.txt");
    REQUIRE(sf.updates.size() == ups.size());
    for (size_t i = 0; i < ups.size(); ++i) {
        CHECK(sf.updates[i].delta == ups[i].delta);
        CHECK(sf.updates[i].constraint.vars == ups[i].constraint.vars);
    }

    BiasSketch s = sketch_comp(fam, cert, 5, ups);
    std::string path = "/tmp/cspsketch_test_sketch.bin";
    save_sketch(path, s);
    BiasSketch back = load_sketch(path, fam, cert);
    CHECK(back.counts() == s.counts());
    CHECK(back.total_weight() == s.total_weight());
    CHECK(b_lambda(back).value == b_lambda(s).value);
    std::remove(path.c_str());
}

TEST_CASE("streaming decision separates planted from dense dicut instances") {
    ConstraintFamily fam = make_dicut();
    SepConfig scfg;
    scfg.seed = 41;
    SeparatorCertificate cert = separating_hyperplane(fam, 0.7, 0.3, scfg);
    auto rng = make_rng(59);
    const int n = 10;
    SUBCASE("planted instances (value 1) answer YES") {
        for (int t = 0; t < 20; ++t) {
            // all constraints satisfied by a hidden b: pick (u,v) with b_u=2, b_v=1
            std::vector<int> b(n);
            for (int& x : b) x = int(rng() % 2);
            b[0] = 1;
            b[1] = 0;  // ensure both symbols occur
            std::vector<int> twos, ones;
            for (int i = 0; i < n; ++i) (b[i] == 1 ? twos : ones).push_back(i);
            std::vector<StreamUpdate> ups;
            for (int i = 0; i < 12; ++i) {
                int u = twos[rng() % twos.size()];
                int v = ones[rng() % ones.size()];
                ups.push_back({Constraint{0, {u, v}}, +1});
            }
            CHECK(decide_stream(sketch_comp(fam, cert, n, ups)) == StreamVerdict::Yes);
        }
    }
    SUBCASE("complete tournaments (value 0.28) answer NO") {
        std::vector<StreamUpdate> ups;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (u != v) ups.push_back({Constraint{0, {u, v}}, +1});
        CHECK(decide_stream(sketch_comp(fam, cert, n, ups)) == StreamVerdict::No);
    }
}

TEST_CASE("instance_of_stream refuses deletions") {
    ConstraintFamily fam = make_dicut();
    StreamFile sf;
    sf.n = 3;
    sf.updates = {{Constraint{0, {0, 1}}, -1}};
    CHECK_THROWS_AS(instance_of_stream(sf), Error);
}
