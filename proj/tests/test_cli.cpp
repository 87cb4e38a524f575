#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cspsketch/family.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string out_file = (fs::temp_directory_path() / "cspsketch_cli_out.txt").string();
    std::string cmd = std::string(CSPSKETCH_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    std::ifstream f(out_file);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cspsketch_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content = "") const {
        fs::path p = path / name;
        if (!content.empty()) {
            std::ofstream f(p);
            f << content;
        }
        return p.string();
    }
};

const char* kDicutFam = "q=2 k=2\nf dicut 0 0 1 0\n";
const char* kMaxcutFam = "q=2 k=2\nf neq 0 1 1 0\n";

}  // namespace

TEST_CASE("cli: unknown commands and bad flags exit 2") {
    CHECK(run_cli("no-such-command").code == 2);
    CHECK(run_cli("classify --family missing.fam").code == 2);  // missing required flags
    CHECK(run_cli("--help").code == 0);
}

TEST_CASE("cli: missing input files exit 3 with a structured message") {
    RunResult r = run_cli("rho --family /nonexistent/f.fam");
    CHECK(r.code == 3);
    CHECK(r.out.find("error:") != std::string::npos);
}

TEST_CASE("cli: curve tsv carries version header and matches the closed form") {
    TempDir td;
    std::string fam = td.file("dicut.fam", kDicutFam);
    std::string out = td.file("curve.tsv");
    RunResult r = run_cli("curve --family " + fam + " --grid 0.5:0.05:1.0 --out " + out);
    REQUIRE(r.code == 0);
    std::ifstream f(out);
    std::string line;
    std::getline(f, line);
    CHECK(line.find("cspsketch curve") != std::string::npos);
    CHECK(line.find("v0.1.0") != std::string::npos);
    std::getline(f, line);
    CHECK(line == "gamma\tbeta\tlower_bound\tfeasible");
    int rows = 0;
    while (std::getline(f, line)) {
        double g, b, lb;
        int feas;
        REQUIRE(std::sscanf(line.c_str(), "%lf\t%lf\t%lf\t%d", &g, &b, &lb, &feas) == 4);
        double closed = (g <= 2.0 / 3.0) ? (1 - g) * (1 - g) / (3 - 4 * g) : 2 * g - 1;
        CHECK(std::fabs(b - closed) <= 1e-3);
        CHECK(feas == 1);
        ++rows;
    }
    CHECK(rows == 11);
}

TEST_CASE("cli: byte-identical outputs for identical invocations") {
    TempDir td;
    std::string fam = td.file("dicut.fam", kDicutFam);
    std::string cmd = "classify --family " + fam + " --gamma 0.7 --beta 0.3";
    RunResult a = run_cli(cmd), b = run_cli(cmd);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    std::string cert1 = td.file("c1.cert"), cert2 = td.file("c2.cert");
    run_cli("separate --family " + fam + " --gamma 0.7 --beta 0.3 --seed 5 --out " + cert1);
    run_cli("separate --family " + fam + " --gamma 0.7 --beta 0.3 --seed 5 --out " + cert2);
    std::ifstream f1(cert1), f2(cert2);
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(!s1.str().empty());
}

TEST_CASE("cli: gen/eval/run-stream workflow") {
    TempDir td;
    std::string fam = td.file("maxcut.fam", kMaxcutFam);
    std::string dy = td.file("dy.dist", "family=" + fam + "\np neq 1 2 0.5\np neq 2 1 0.5\n");
    std::string dn = td.file("dn.dist", "family=" + fam +
                                            "\np neq 1 1 0.25\np neq 1 2 0.25\n"
                                            "p neq 2 1 0.25\np neq 2 2 0.25\n");
    std::string stream = td.file("yes.stream");

    RunResult g = run_cli("gen --family " + fam + " --game pssd --case yes --disty " + dy +
                          " --distn " + dn + " --n 24 --alpha 0.25 --T 6 --seed 9 --out " +
                          stream);
    REQUIRE(g.code == 0);
    CHECK(g.out.find("seed=9") != std::string::npos);
    CHECK(fs::exists(stream + ".meta.json"));

    RunResult e = run_cli("eval --stream " + stream);
    REQUIRE(e.code == 0);
    CHECK(e.out.find("value=1 ") != std::string::npos);  // planted YES at gamma=1

    // Max-CUT at beta < 1/2 has an empty NO side: trivial certificate
    std::string cert = td.file("mc.cert");
    RunResult s = run_cli("separate --family " + fam +
                          " --gamma 0.9 --beta 0.3 --seed 2 --out " + cert);
    REQUIRE(s.code == 0);
    RunResult rs = run_cli("run-stream --cert " + cert + " --stream " + stream);
    CHECK(rs.code == 0);
    CHECK(rs.out.find("YES") != std::string::npos);
}

TEST_CASE("cli: run-stream NO path and empty stream") {
    TempDir td;
    std::string fam = td.file("dicut.fam", kDicutFam);
    std::string cert = td.file("d.cert");
    REQUIRE(run_cli("separate --family " + fam + " --gamma 0.7 --beta 0.3 --seed 5 --out " +
                    cert).code == 0);

    // dense dicut tournament on 8 variables has optimum 2/7 <= 0.3
    std::ostringstream body;
    body << "n=8 family=" << fam << "\n";
    for (int a = 1; a <= 8; ++a)
        for (int b = 1; b <= 8; ++b)
            if (a != b) body << "+ dicut " << a << ' ' << b << "\n";
    std::string no_stream = td.file("no.stream", body.str());
    RunResult rs = run_cli("run-stream --cert " + cert + " --stream " + no_stream);
    CHECK(rs.code == 1);
    CHECK(rs.out.find("NO") != std::string::npos);

    std::string empty = td.file("empty.stream", "n=4 family=" + fam + "\n");
    RunResult re = run_cli("run-stream --cert " + cert + " --stream " + empty);
    CHECK(re.code == 3);
    CHECK(re.out.find("empty instance") != std::string::npos);
}

TEST_CASE("cli: single-block sd generation and a multi-function family classify") {
    TempDir td;
    std::string fam = td.file("maxcut.fam", kMaxcutFam);
    std::string dy = td.file("dy.dist", "family=" + fam + "\np neq 1 2 0.5\np neq 2 1 0.5\n");
    std::string dn = td.file("dn.dist", "family=" + fam +
                                            "\np neq 1 1 0.25\np neq 1 2 0.25\n"
                                            "p neq 2 1 0.25\np neq 2 2 0.25\n");
    std::string stream = td.file("sd.stream");
    RunResult g = run_cli("gen --family " + fam + " --game sd --case no --disty " + dy +
                          " --distn " + dn + " --n 40 --alpha 0.25 --seed 3 --out " + stream);
    REQUIRE(g.code == 0);
    CHECK(g.out.find("records=10") != std::string::npos);

    // two bijections over [2]: the uniform-marginal witness sits at gamma=1
    std::string ug = td.file("ug2.fam", "q=2 k=2\nf id 1 0 0 1\nf swap 0 1 1 0\n");
    RunResult hi = run_cli("classify --family " + ug + " --gamma 1.0 --beta 0.52");
    CHECK(hi.code == 0);
    CHECK(hi.out.find("verdict=INTERSECT") != std::string::npos);
    RunResult lo = run_cli("classify --family " + ug + " --gamma 1.0 --beta 0.45");
    CHECK(lo.code == 0);
    CHECK(lo.out.find("verdict=DISJOINT") != std::string::npos);
}

TEST_CASE("cli: verify-cert and sampled run-stream") {
    TempDir td;
    std::string fam = td.file("dicut.fam", kDicutFam);
    std::string cert = td.file("d.cert");
    REQUIRE(run_cli("separate --family " + fam + " --gamma 0.7 --beta 0.3 --seed 5 --out " +
                    cert).code == 0);
    RunResult v = run_cli("verify-cert --family " + fam + " --cert " + cert + " --seed 11");
    CHECK(v.code == 0);
    CHECK(v.out.find("pass=yes") != std::string::npos);
    CHECK(v.out.find("seed=11") != std::string::npos);

    std::ostringstream body;
    body << "n=40 family=" << fam << "\n";
    for (int i = 1; i + 1 <= 40; i += 2) body << "+ dicut " << (i + 1) << ' ' << i << "\n";
    std::string stream = td.file("planted.stream", body.str());
    RunResult no_seed = run_cli("run-stream --cert " + cert + " --stream " + stream +
                                " --mode sampled --rate 0.5");
    CHECK(no_seed.code == 3);  // sampled mode requires a seed
    RunResult rs = run_cli("run-stream --cert " + cert + " --stream " + stream +
                           " --mode sampled --rate 0.5 --seed 13");
    CHECK(rs.out.find("seed=13") != std::string::npos);
    CHECK((rs.code == 0 || rs.code == 1));
    // the planted stream has value 1: exact mode must say YES
    RunResult ex = run_cli("run-stream --cert " + cert + " --stream " + stream);
    CHECK(ex.code == 0);
}

TEST_CASE("cli: randomized commands demand and echo their seed") {
    TempDir td;
    std::string fam = td.file("maxcut.fam", kMaxcutFam);
    std::string inst = td.file("i.inst", "n=4\nc neq 1 2 1.0\nc neq 2 3 1.0\n");
    RunResult no_seed = run_cli("eval --family " + fam + " --instance " + inst +
                                " --mode heuristic");
    CHECK(no_seed.code == 3);
    RunResult with_seed = run_cli("eval --family " + fam + " --instance " + inst +
                                  " --mode heuristic --seed 4");
    CHECK(with_seed.code == 0);
    CHECK(with_seed.out.find("seed=4") != std::string::npos);
}

TEST_CASE("cli: json meta sidecar records the resolved configuration") {
    TempDir td;
    std::string fam = td.file("dicut.fam", kDicutFam);
    std::string meta = td.file("meta.json");
    RunResult r = run_cli("--json-meta " + meta + " rho --family " + fam);
    REQUIRE(r.code == 0);
    std::ifstream f(meta);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str().find("\"command\": \"rho\"") != std::string::npos);
    CHECK(ss.str().find("\"version\": \"0.1.0\"") != std::string::npos);
}

TEST_CASE("cli: exactcheck and decompose-padded") {
    TempDir td;
    std::string fam = td.file("and.fam", "q=2 k=2\nf and2 0 0 0 1\n");
    std::string inst = td.file("a.inst", "n=4\nc and2 1 2 1.0\nc and2 3 4 1.0\n");
    RunResult r = run_cli("exactcheck --family " + fam + " --instance " + inst);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("constant_satisfiable=2") != std::string::npos);
    CHECK(r.out.find("value=1") != std::string::npos);

    std::string mc = td.file("maxcut.fam", kMaxcutFam);
    std::string dy = td.file("dy.dist",
                             "family=" + mc + "\np neq 1 1 0.4\np neq 1 2 0.1\n"
                                              "p neq 2 1 0.1\np neq 2 2 0.4\n");
    std::string dn = td.file("dn.dist",
                             "family=" + mc + "\np neq 1 1 0.3\np neq 1 2 0.2\n"
                                              "p neq 2 1 0.2\np neq 2 2 0.3\n");
    RunResult dec = run_cli("decompose-padded --disty " + dy + " --distn " + dn);
    REQUIRE(dec.code == 0);
    double tau = 0.0;
    REQUIRE(std::sscanf(dec.out.c_str(), "tau=%lf", &tau) == 1);
    CHECK(tau == doctest::Approx(0.8));
}
