#include <doctest.h>

#include <sstream>

#include "cspsketch/separator.hpp"

using namespace cspsketch;

TEST_CASE("trivial certificate when the NO side is empty") {
    ConstraintFamily ones = make_const1(2, 2);
    SeparatorCertificate cert = separating_hyperplane(ones, 1.0, 0.5);
    CHECK(cert.tau_y == doctest::Approx(2.0));
    CHECK(cert.tau_n == doctest::Approx(1.0));
    for (double x : cert.lambda) CHECK(x == 1.0);
    VerifyReport rep = verify_hyperplane(cert, ones, 8, 1);
    CHECK(rep.pass);
    CHECK(rep.n_side_empty);
    CHECK(rep.slack_y >= -1e-9);
}

TEST_CASE("dicut certificate at (0.7, 0.3)") {
    ConstraintFamily fam = make_dicut();
    SepConfig cfg;
    cfg.seed = 5;
    SeparatorCertificate cert = separating_hyperplane(fam, 0.7, 0.3, cfg);
    CHECK(cert.verified_margin > 1e-4);
    CHECK(cert.tau_y > cert.tau_n);
    for (double x : cert.lambda) CHECK(x >= 0.0);
    VerifyReport rep = verify_hyperplane(cert, fam, 12, 99);
    CHECK(rep.pass);
    CHECK(rep.slack_y >= -1e-6);
    CHECK(rep.slack_n >= -1e-6);
}

TEST_CASE("separating_hyperplane refuses the intersecting regime") {
    ConstraintFamily fam = make_dicut();
    CHECK_THROWS_AS(separating_hyperplane(fam, 0.7, 0.5), Error);
}

TEST_CASE("margin floor guard") {
    ConstraintFamily fam = make_dicut();
    SepConfig cfg;
    cfg.margin_floor = 1e9;  // force the not-certified path
    CHECK_THROWS_WITH_AS(separating_hyperplane(fam, 0.7, 0.3, cfg),
                         doctest::Contains("separation not certified"), Error);
}

TEST_CASE("certificate construction is deterministic in seed and config") {
    ConstraintFamily fam = make_dicut();
    SepConfig cfg;
    cfg.seed = 17;
    SeparatorCertificate a = separating_hyperplane(fam, 0.8, 0.3, cfg);
    SeparatorCertificate b = separating_hyperplane(fam, 0.8, 0.3, cfg);
    std::ostringstream sa, sb;
    write_certificate(sa, a, fam);
    write_certificate(sb, b, fam);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("certificate file round-trips exactly") {
    ConstraintFamily fam = make_dicut();
    SepConfig cfg;
    cfg.seed = 3;
    SeparatorCertificate cert = separating_hyperplane(fam, 0.7, 0.3, cfg);
    std::ostringstream os;
    write_certificate(os, cert, fam);
    std::istringstream is(os.str());
    SeparatorCertificate back = parse_certificate(is, fam);
    CHECK(back.lambda == cert.lambda);
    CHECK(back.tau_y == cert.tau_y);
    CHECK(back.tau_n == cert.tau_n);
    CHECK(back.gamma == cert.gamma);
    CHECK(back.beta == cert.beta);
}

TEST_CASE("the all-ones direction pairs with <mu,1> = k") {
    // shifting lambda by c*1 moves <lambda,mu> by exactly c*k on every
    // distribution; this is what makes the non-negativity shift sound
    ConstraintFamily fam = make_qug(2);
    auto rng = make_rng(31);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> p = random_simplex_point(rng, fam.size() * int(fam.table_len()));
        MarginalVector mu = marginals(ConstraintDist(fam, std::move(p)));
        double dot = 0.0;
        for (double v : mu.v) dot += v;
        CHECK(dot == doctest::Approx(double(fam.k())).epsilon(1e-12));
    }
}

TEST_CASE("structurally broken certificates fail verification") {
    ConstraintFamily fam = make_dicut();
    SeparatorCertificate cert;
    cert.fcount = 1;
    cert.k = 2;
    cert.q = 2;
    cert.lambda = {1.0, 1.0, 1.0, 1.0};
    cert.gamma = 0.7;
    cert.beta = 0.3;
    cert.tau_y = 1.0;
    cert.tau_n = 1.5;  // tau_y <= tau_n
    VerifyReport rep = verify_hyperplane(cert, fam);
    CHECK_FALSE(rep.structural_ok);
    CHECK_FALSE(rep.pass);
    cert.tau_y = 2.0;
    cert.lambda[2] = -0.5;  // negative coefficient
    rep = verify_hyperplane(cert, fam);
    CHECK_FALSE(rep.structural_ok);
}
