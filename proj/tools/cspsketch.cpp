// Command-line front end for the sketching-approximability toolkit.
//
// Exit codes: 0 = YES/success, 1 = NO, 2 = usage error, 3 = runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "cspsketch/feasibility.hpp"
#include "cspsketch/generators.hpp"
#include "cspsketch/graded.hpp"
#include "cspsketch/separator.hpp"
#include "cspsketch/sketch.hpp"

using nlohmann::json;
using namespace cspsketch;

namespace {

std::string resolve_near(const std::string& path, const std::string& anchor_file) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    fs::path alt = fs::path(anchor_file).parent_path() / fs::path(path).filename();
    if (fs::exists(alt)) return alt.string();
    return path;  // let the loader produce the error
}

double env_delta() {
    if (const char* v = std::getenv("CSPSKETCH_TOL")) return std::stod(v);
    return 1e-4;
}

void write_json_meta(const std::string& path, const json& j) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw Error("cannot write json meta '" + path + "'");
    out << j.dump(2) << "\n";
}

std::ostream& tsv_header(std::ostream& os, const std::string& cmd, const std::string& columns) {
    os << "# cspsketch " << cmd << " v" << kVersion << "\n" << columns << "\n";
    return os;
}

/// Scalar results as either `k=v` pairs or a two-line tsv table.
void emit_kv(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv,
             const std::string& format) {
    if (format == "tsv") {
        std::ostringstream cols, row;
        for (size_t i = 0; i < kv.size(); ++i) {
            cols << (i ? "\t" : "") << kv[i].first;
            row << (i ? "\t" : "") << kv[i].second;
        }
        tsv_header(std::cout, cmd, cols.str());
        std::cout << row.str() << "\n";
    } else {
        for (size_t i = 0; i < kv.size(); ++i)
            std::cout << (i ? " " : "") << kv[i].first << "=" << kv[i].second;
        std::cout << "\n";
    }
}

std::vector<double> parse_grid(const std::string& spec) {
    // "<from>:<step>:<to>", inclusive of both ends
    double a, s, b;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &s, &b) != 3 || s <= 0)
        throw Error("grid: expected '<from>:<step>:<to>', got '" + spec + "'");
    std::vector<double> g;
    for (double x = a; x <= b + 1e-12; x += s) g.push_back(std::min(x, b));
    return g;
}

std::string dist_to_string(const ConstraintDist& d, const std::string& fam_path) {
    std::ostringstream os;
    write_distribution(os, d, fam_path);
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sketching-approximability dichotomy toolkit"};
    app.require_subcommand(1);
    std::function<int()> action;

    std::string json_meta;
    app.add_option("--json-meta", json_meta, "write resolved configuration to this JSON file");

    // ---- classify ------------------------------------------------------
    {
        auto* c = app.add_subcommand("classify", "decide K^Y_gamma vs K^N_beta intersection");
        auto fam_path = std::make_shared<std::string>();
        auto gamma = std::make_shared<double>(0.0);
        auto beta = std::make_shared<double>(0.0);
        auto delta = std::make_shared<double>(env_delta());
        auto witness_out = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("human");
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--gamma", *gamma, "YES threshold")->required();
        c->add_option("--beta", *beta, "NO threshold")->required();
        c->add_option("--delta", *delta, "verdict tolerance");
        c->add_option("--witness-out", *witness_out, "path prefix for witness distributions");
        c->add_option("--format", *format, "human|tsv")->check(CLI::IsMember({"human", "tsv"}));
        c->callback([&, fam_path, gamma, beta, delta, witness_out, format] {
            action = [&, fam_path, gamma, beta, delta, witness_out, format]() {
                ConstraintFamily fam = load_family(*fam_path);
                FeasConfig cfg;
                cfg.delta = *delta;
                DecisionOutcome out = decide_intersection(fam, *gamma, *beta, cfg);
                std::vector<std::pair<std::string, std::string>> kv = {
                    {"verdict", to_string(out.verdict)},
                    {"bound", format_exact(out.bound)},
                    {"lower_bound", format_exact(out.lower_bound)},
                    {"delta", format_exact(out.delta)}};
                if (!out.note.empty()) kv.push_back({"note", out.note});
                emit_kv("classify", kv, *format);
                if (out.witness && !witness_out->empty()) {
                    std::ofstream fy(*witness_out + ".yes.dist"), fn(*witness_out + ".no.dist");
                    write_distribution(fy, out.witness->first, *fam_path);
                    write_distribution(fn, out.witness->second, *fam_path);
                    std::cout << "witness=" << *witness_out << ".{yes,no}.dist\n";
                }
                write_json_meta(json_meta, json{{"command", "classify"},
                                                {"family", *fam_path},
                                                {"gamma", *gamma},
                                                {"beta", *beta},
                                                {"delta", *delta},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- curve ---------------------------------------------------------
    {
        auto* c = app.add_subcommand("curve", "hardness curve over a gamma grid (tsv)");
        auto fam_path = std::make_shared<std::string>();
        auto grid = std::make_shared<std::string>("0.5:0.025:1.0");
        auto out_path = std::make_shared<std::string>();
        auto delta = std::make_shared<double>(env_delta());
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--grid", *grid, "gamma grid '<from>:<step>:<to>'");
        c->add_option("--out", *out_path, "output tsv (default stdout)");
        c->add_option("--delta", *delta, "verdict tolerance");
        c->callback([&, fam_path, grid, out_path, delta] {
            action = [&, fam_path, grid, out_path, delta]() {
                ConstraintFamily fam = load_family(*fam_path);
                FeasConfig cfg;
                cfg.delta = *delta;
                std::vector<double> g = parse_grid(*grid);
                std::vector<CurvePoint> curve = hardness_curve(fam, g, cfg);
                std::ostringstream os;
                tsv_header(os, "curve", "gamma\tbeta\tlower_bound\tfeasible");
                for (const CurvePoint& p : curve)
                    os << format_exact(p.gamma) << '\t' << format_exact(p.beta) << '\t'
                       << format_exact(p.lower_bound) << '\t' << (p.feasible ? 1 : 0) << "\n";
                if (out_path->empty()) {
                    std::cout << os.str();
                } else {
                    std::ofstream f(*out_path);
                    if (!f) throw Error("cannot write '" + *out_path + "'");
                    f << os.str();
                }
                write_json_meta(json_meta, json{{"command", "curve"},
                                                {"family", *fam_path},
                                                {"grid", *grid},
                                                {"delta", *delta},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- rho -----------------------------------------------------------
    {
        auto* c = app.add_subcommand("rho", "trivial approximation threshold rho(F)");
        auto fam_path = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("human");
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--format", *format, "human|tsv")->check(CLI::IsMember({"human", "tsv"}));
        c->callback([&, fam_path, format] {
            action = [&, fam_path, format]() {
                ConstraintFamily fam = load_family(*fam_path);
                emit_kv("rho", {{"rho", format_exact(rho(fam))}}, *format);
                write_json_meta(json_meta, json{{"command", "rho"},
                                                {"family", *fam_path},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- resist --------------------------------------------------------
    {
        auto* c = app.add_subcommand("resist", "sketching approximation resistance");
        auto fam_path = std::make_shared<std::string>();
        auto witness_out = std::make_shared<std::string>();
        auto delta = std::make_shared<double>(env_delta());
        auto format = std::make_shared<std::string>("human");
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--witness-out", *witness_out, "path prefix for witness distributions");
        c->add_option("--delta", *delta, "verdict tolerance");
        c->add_option("--format", *format, "human|tsv")->check(CLI::IsMember({"human", "tsv"}));
        c->callback([&, fam_path, witness_out, delta, format] {
            action = [&, fam_path, witness_out, delta, format]() {
                ConstraintFamily fam = load_family(*fam_path);
                FeasConfig cfg;
                cfg.delta = *delta;
                ResistanceResult r = is_approx_resistant(fam, cfg);
                std::vector<std::pair<std::string, std::string>> kv = {
                    {"resistant", r.status == Verdict::Intersect
                                      ? "yes"
                                      : r.status == Verdict::Disjoint ? "no" : "undecided"},
                    {"rho", format_exact(r.rho_value)}};
                if (r.witness) {
                    kv.push_back({"witness_sy", format_exact(r.witness_sy)});
                    kv.push_back({"witness_sn", format_exact(r.witness_sn)});
                }
                if (!r.note.empty()) kv.push_back({"note", r.note});
                emit_kv("resist", kv, *format);
                if (r.witness && !witness_out->empty()) {
                    std::ofstream fy(*witness_out + ".yes.dist"), fn(*witness_out + ".no.dist");
                    write_distribution(fy, r.witness->first, *fam_path);
                    write_distribution(fn, r.witness->second, *fam_path);
                }
                write_json_meta(json_meta, json{{"command", "resist"},
                                                {"family", *fam_path},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- alpha ---------------------------------------------------------
    {
        auto* c = app.add_subcommand("alpha", "single-parameter approximability threshold");
        auto fam_path = std::make_shared<std::string>();
        auto step = std::make_shared<double>(0.01);
        auto delta = std::make_shared<double>(env_delta());
        auto format = std::make_shared<std::string>("human");
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--step", *step, "gamma grid step in (0, 0.1]");
        c->add_option("--delta", *delta, "verdict tolerance");
        c->add_option("--format", *format, "human|tsv")->check(CLI::IsMember({"human", "tsv"}));
        c->callback([&, fam_path, step, delta, format] {
            action = [&, fam_path, step, delta, format]() {
                ConstraintFamily fam = load_family(*fam_path);
                FeasConfig cfg;
                cfg.delta = *delta;
                AlphaResult a = alpha(fam, *step, cfg);
                emit_kv("alpha", {{"alpha", format_exact(a.value)},
                                  {"error_bar", format_exact(a.error_bar)}},
                        *format);
                write_json_meta(json_meta, json{{"command", "alpha"},
                                                {"family", *fam_path},
                                                {"step", *step},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- separate ------------------------------------------------------
    {
        auto* c = app.add_subcommand("separate", "compute a separating hyperplane certificate");
        auto fam_path = std::make_shared<std::string>();
        auto gamma = std::make_shared<double>(0.0);
        auto beta = std::make_shared<double>(0.0);
        auto out_path = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(1);
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--gamma", *gamma, "YES threshold")->required();
        c->add_option("--beta", *beta, "NO threshold")->required();
        c->add_option("--out", *out_path, "certificate file")->required();
        c->add_option("--seed", *seed, "sampling seed")->required();
        c->callback([&, fam_path, gamma, beta, out_path, seed] {
            action = [&, fam_path, gamma, beta, out_path, seed]() {
                ConstraintFamily fam = load_family(*fam_path);
                SepConfig cfg;
                cfg.seed = *seed;
                std::cout << "seed=" << *seed << "\n";
                SeparatorCertificate cert = separating_hyperplane(fam, *gamma, *beta, cfg);
                save_certificate(*out_path, cert, fam);
                std::cout << "certificate=" << *out_path
                          << " tauY=" << format_exact(cert.tau_y)
                          << " tauN=" << format_exact(cert.tau_n)
                          << " margin=" << format_exact(cert.verified_margin) << "\n";
                write_json_meta(json_meta, json{{"command", "separate"},
                                                {"family", *fam_path},
                                                {"gamma", *gamma},
                                                {"beta", *beta},
                                                {"seed", *seed},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- verify-cert ---------------------------------------------------
    {
        auto* c = app.add_subcommand("verify-cert", "adversarial audit of a certificate");
        auto fam_path = std::make_shared<std::string>();
        auto cert_path = std::make_shared<std::string>();
        auto trials = std::make_shared<int>(16);
        auto seed = std::make_shared<std::uint64_t>(1);
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--cert", *cert_path, "certificate file")->required();
        c->add_option("--trials", *trials, "random audit probes");
        c->add_option("--seed", *seed, "audit seed")->required();
        c->callback([&, fam_path, cert_path, trials, seed] {
            action = [&, fam_path, cert_path, trials, seed]() {
                ConstraintFamily fam = load_family(*fam_path);
                SeparatorCertificate cert = load_certificate(*cert_path, fam);
                std::cout << "seed=" << *seed << "\n";
                VerifyReport rep = verify_hyperplane(cert, fam, *trials, *seed);
                std::cout << "pass=" << (rep.pass ? "yes" : "no")
                          << " structural=" << (rep.structural_ok ? "ok" : "violated")
                          << " slack_y=" << format_exact(rep.slack_y)
                          << " slack_n=" << (rep.n_side_empty ? "inf" : format_exact(rep.slack_n))
                          << " checked_y=" << rep.checked_y << " checked_n=" << rep.checked_n
                          << "\n";
                write_json_meta(json_meta, json{{"command", "verify-cert"},
                                                {"family", *fam_path},
                                                {"cert", *cert_path},
                                                {"trials", *trials},
                                                {"seed", *seed},
                                                {"version", kVersion}});
                return rep.pass ? 0 : 1;
            };
        });
    }

    // ---- run-stream ----------------------------------------------------
    {
        auto* c = app.add_subcommand("run-stream", "run the streaming decision on a stream file");
        auto cert_path = std::make_shared<std::string>();
        auto stream_path = std::make_shared<std::string>();
        auto fam_path = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>("exact");
        auto rate = std::make_shared<double>(0.25);
        auto seed = std::make_shared<std::uint64_t>(1);
        c->add_option("--cert", *cert_path, "certificate file")->required();
        c->add_option("--stream", *stream_path, "stream file")->required();
        c->add_option("--family", *fam_path, "family file (default: stream header)");
        c->add_option("--mode", *mode, "exact|sampled")->check(CLI::IsMember({"exact", "sampled"}));
        c->add_option("--rate", *rate, "sampled mode row-sampling rate");
        auto* seed_opt = c->add_option("--seed", *seed, "sampled mode seed");
        c->callback([&, cert_path, stream_path, fam_path, mode, rate, seed, seed_opt] {
            action = [&, cert_path, stream_path, fam_path, mode, rate, seed, seed_opt]() {
                bool sampled = (*mode == "sampled");
                require(!sampled || seed_opt->count() > 0,
                        "run-stream: --seed is required in sampled mode");
                std::string fp = fam_path->empty()
                                     ? resolve_near(stream_family_path(*stream_path), *stream_path)
                                     : *fam_path;
                ConstraintFamily fam = load_family(fp);
                SeparatorCertificate cert = load_certificate(*cert_path, fam);
                StreamFile sf = load_stream(*stream_path, fam);
                SketchConfig cfg;
                cfg.mode = sampled ? SketchMode::Sampled : SketchMode::Exact;
                cfg.sample_rate = *rate;
                cfg.seed = *seed;
                if (sampled) std::cout << "seed=" << *seed << "\n";
                BiasSketch s = sketch_comp(fam, cert, sf.n, sf.updates, cfg);
                StreamVerdict v = decide_stream(s);
                std::cout << (v == StreamVerdict::Yes ? "YES" : "NO") << "\n";
                write_json_meta(json_meta, json{{"command", "run-stream"},
                                                {"cert", *cert_path},
                                                {"stream", *stream_path},
                                                {"mode", *mode},
                                                {"rate", *rate},
                                                {"seed", *seed},
                                                {"version", kVersion}});
                return v == StreamVerdict::Yes ? 0 : 1;
            };
        });
    }

    // ---- gen -----------------------------------------------------------
    {
        auto* c = app.add_subcommand("gen", "generate SD / padded-streaming-SD instances");
        auto fam_path = std::make_shared<std::string>();
        auto game = std::make_shared<std::string>("pssd");
        auto case_s = std::make_shared<std::string>();
        auto disty = std::make_shared<std::string>();
        auto distn = std::make_shared<std::string>();
        auto dist0 = std::make_shared<std::string>();
        auto taupad = std::make_shared<double>(0.0);
        auto n = std::make_shared<int>(0);
        auto alpha_d = std::make_shared<double>(0.0);
        auto blocks = std::make_shared<int>(1);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out_path = std::make_shared<std::string>();
        auto meta_path = std::make_shared<std::string>();
        auto debug = std::make_shared<bool>(false);
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--game", *game, "sd|pssd")->check(CLI::IsMember({"sd", "pssd"}));
        c->add_option("--case", *case_s, "yes|no")->required()->check(CLI::IsMember({"yes", "no"}));
        c->add_option("--disty", *disty, "YES distribution file")->required();
        c->add_option("--distn", *distn, "NO distribution file")->required();
        c->add_option("--dist0", *dist0, "padding distribution file (pssd)");
        c->add_option("--taupad", *taupad, "padding fraction tau in [0,1)");
        c->add_option("--n", *n, "variable count")->required();
        c->add_option("--alpha", *alpha_d, "matching density (alpha*n edges per block)")
            ->required();
        c->add_option("--T", *blocks, "block count (pssd)");
        c->add_option("--seed", *seed, "generation seed")->required();
        c->add_option("--out", *out_path, "output stream file")->required();
        c->add_option("--meta", *meta_path, "sidecar metadata file (default <out>.meta.json)");
        c->add_flag("--debug", *debug, "retain sampled patterns and planted assignment");
        c->callback([&, fam_path, game, case_s, disty, distn, dist0, taupad, n, alpha_d, blocks,
                     seed, out_path, meta_path, debug] {
            action = [&, fam_path, game, case_s, disty, distn, dist0, taupad, n, alpha_d, blocks,
                      seed, out_path, meta_path, debug]() {
                ConstraintFamily fam = load_family(*fam_path);
                ConstraintDist dy = load_distribution(*disty, fam);
                ConstraintDist dn = load_distribution(*distn, fam);
                std::cout << "seed=" << *seed << "\n";
                bool yes_case = (*case_s == "yes");
                int pad_count = 0;
                GameInstance g;
                if (*game == "sd") {
                    SDParams p{*n, *alpha_d, dy, dn, *seed};
                    g = gen_sd(p, yes_case, *debug);
                } else {
                    ConstraintDist d0 = dist0->empty() ? ConstraintDist::uniform(fam)
                                                       : load_distribution(*dist0, fam);
                    PaddedStreamParams p{SDParams{*n, *alpha_d, dy, dn, *seed}, *blocks, *taupad,
                                         d0};
                    pad_count = p.padding_count();
                    g = gen_pssd(p, yes_case, *debug);
                }
                std::vector<StreamUpdate> updates;
                for (const GameRecord& r : g.records)
                    if (r.z) updates.push_back(StreamUpdate{Constraint{r.f_index, r.edge}, 1});
                {
                    std::ofstream f(*out_path);
                    if (!f) throw Error("cannot write '" + *out_path + "'");
                    write_stream(f, fam, *n, *fam_path, updates);
                }
                json meta{{"command", "gen"},
                          {"game", *game},
                          {"case", *case_s},
                          {"family", *fam_path},
                          {"disty", *disty},
                          {"distn", *distn},
                          {"n", *n},
                          {"alpha", *alpha_d},
                          {"T", *blocks},
                          {"taupad", *taupad},
                          {"padding_count", pad_count},
                          {"seed", *seed},
                          {"records", g.records.size()},
                          {"kept", updates.size()},
                          {"version", kVersion}};
                if (*debug) {
                    json xs = json::array();
                    for (int v : g.x_star.values) xs.push_back(v + 1);
                    meta["x_star"] = xs;
                }
                std::string mp = meta_path->empty() ? (*out_path + ".meta.json") : *meta_path;
                write_json_meta(mp, meta);
                write_json_meta(json_meta, meta);
                std::cout << "stream=" << *out_path << " records=" << g.records.size()
                          << " kept=" << updates.size() << "\n";
                return 0;
            };
        });
    }

    // ---- eval ----------------------------------------------------------
    {
        auto* c = app.add_subcommand("eval", "optimum of an instance or stream file");
        auto fam_path = std::make_shared<std::string>();
        auto inst_path = std::make_shared<std::string>();
        auto stream_path = std::make_shared<std::string>();
        auto mode = std::make_shared<std::string>("exact");
        auto restarts = std::make_shared<int>(50);
        auto seed = std::make_shared<std::uint64_t>(1);
        auto budget = std::make_shared<std::int64_t>(std::int64_t(1) << 24);
        c->add_option("--family", *fam_path, "family file (default: stream header)");
        c->add_option("--instance", *inst_path, "instance file");
        c->add_option("--stream", *stream_path, "insert-only stream file");
        c->add_option("--mode", *mode, "exact|heuristic")
            ->check(CLI::IsMember({"exact", "heuristic"}));
        c->add_option("--restarts", *restarts, "heuristic restarts");
        auto* seed_opt = c->add_option("--seed", *seed, "heuristic seed");
        c->add_option("--budget", *budget, "exact enumeration budget on q^n");
        c->callback([&, fam_path, inst_path, stream_path, mode, restarts, seed, budget, seed_opt] {
            action = [&, fam_path, inst_path, stream_path, mode, restarts, seed, budget,
                      seed_opt]() {
                require(!inst_path->empty() || !stream_path->empty(),
                        "eval: need --instance or --stream");
                OptMode m = (*mode == "exact") ? OptMode::Exact : OptMode::Heuristic;
                require(m == OptMode::Exact || seed_opt->count() > 0,
                        "eval: --seed is required in heuristic mode");
                std::string fp = *fam_path;
                if (fp.empty()) {
                    require(!stream_path->empty(), "eval: --family required with --instance");
                    fp = resolve_near(stream_family_path(*stream_path), *stream_path);
                }
                ConstraintFamily fam = load_family(fp);
                Instance psi = !inst_path->empty()
                                   ? load_instance(*inst_path, fam)
                                   : instance_of_stream(load_stream(*stream_path, fam));
                OptConfig cfg;
                cfg.restarts = *restarts;
                cfg.seed = *seed;
                cfg.exact_budget = *budget;
                if (m == OptMode::Heuristic) std::cout << "seed=" << *seed << "\n";
                OptResult r = opt_value(fam, psi, m, cfg);
                std::cout << "value=" << format_exact(r.value) << " witness=";
                for (size_t i = 0; i < r.witness.values.size(); ++i)
                    std::cout << (i ? "," : "") << (r.witness.values[i] + 1);
                std::cout << "\n";
                write_json_meta(json_meta, json{{"command", "eval"},
                                                {"mode", *mode},
                                                {"value", r.value},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- polarize ------------------------------------------------------
    {
        auto* c = app.add_subcommand("polarize", "polarize a single-function distribution");
        auto dist_path = std::make_shared<std::string>();
        auto fam_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        c->add_option("--dist", *dist_path, "distribution file")->required();
        c->add_option("--family", *fam_path, "family file (default: dist header)");
        c->add_option("--out", *out_path, "write the polarized distribution here");
        c->callback([&, dist_path, fam_path, out_path] {
            action = [&, dist_path, fam_path, out_path]() {
                std::string fp = fam_path->empty()
                                     ? resolve_near(dist_family_path(*dist_path), *dist_path)
                                     : *fam_path;
                ConstraintFamily fam = load_family(fp);
                require(fam.size() == 1, "polarize: needs a single-function family");
                ConstraintDist d = load_distribution(*dist_path, fam);
                GradedFunction<double> g = graded_of_dist(d);
                PolarizeResult<double> r = polarize(g);
                for (const auto& step : r.trace) {
                    std::cout << "step u=";
                    for (size_t i = 0; i < step.u.size(); ++i)
                        std::cout << (i ? "," : "") << (step.u[i] + 1);
                    std::cout << " v=";
                    for (size_t i = 0; i < step.v.size(); ++i)
                        std::cout << (i ? "," : "") << (step.v[i] + 1);
                    std::cout << " eps=" << format_exact(step.eps);
                    if (step.loop >= 0)
                        std::cout << " loop=" << step.loop << " i=" << step.i << " j=" << step.j;
                    std::cout << "\n";
                }
                std::vector<double> probs(fam.table_len());
                for (std::int64_t a = 0; a < fam.table_len(); ++a)
                    probs[a] = std::max(0.0, r.out.values()[a]);
                double s = 0.0;
                for (double x : probs) s += x;
                for (double& x : probs) x /= s;
                ConstraintDist out_dist(fam, probs);
                std::cout << "steps=" << r.trace.size() << "\n";
                std::cout << dist_to_string(out_dist, fp);
                if (!out_path->empty()) {
                    std::ofstream f(*out_path);
                    if (!f) throw Error("cannot write '" + *out_path + "'");
                    write_distribution(f, out_dist, fp);
                }
                write_json_meta(json_meta, json{{"command", "polarize"},
                                                {"dist", *dist_path},
                                                {"steps", r.trace.size()},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- decompose-padded ------------------------------------------------
    {
        auto* c =
            app.add_subcommand("decompose-padded", "padded one-wise decomposition (q=2, k=2)");
        auto disty = std::make_shared<std::string>();
        auto distn = std::make_shared<std::string>();
        auto fam_path = std::make_shared<std::string>();
        auto out_prefix = std::make_shared<std::string>();
        c->add_option("--disty", *disty, "YES distribution file")->required();
        c->add_option("--distn", *distn, "NO distribution file")->required();
        c->add_option("--family", *fam_path, "family file (default: dist header)");
        c->add_option("--out", *out_prefix, "write components to <prefix>.{d0,dyp,dnp}.dist");
        c->callback([&, disty, distn, fam_path, out_prefix] {
            action = [&, disty, distn, fam_path, out_prefix]() {
                std::string fp = fam_path->empty()
                                     ? resolve_near(dist_family_path(*disty), *disty)
                                     : *fam_path;
                ConstraintFamily fam = load_family(fp);
                ConstraintDist dy = load_distribution(*disty, fam);
                ConstraintDist dn = load_distribution(*distn, fam);
                PaddedDecomposition pd = padded_one_wise_decomposition(dy, dn);
                std::cout << "tau=" << format_exact(pd.tau) << "\n";
                std::cout << "# D_0\n" << dist_to_string(pd.d0, fp);
                std::cout << "# D'_Y\n" << dist_to_string(pd.dy_prime, fp);
                std::cout << "# D'_N\n" << dist_to_string(pd.dn_prime, fp);
                if (!out_prefix->empty()) {
                    std::ofstream f0(*out_prefix + ".d0.dist"), fy(*out_prefix + ".dyp.dist"),
                        fn(*out_prefix + ".dnp.dist");
                    write_distribution(f0, pd.d0, fp);
                    write_distribution(fy, pd.dy_prime, fp);
                    write_distribution(fn, pd.dn_prime, fp);
                }
                write_json_meta(json_meta, json{{"command", "decompose-padded"},
                                                {"tau", pd.tau},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    // ---- exactcheck ------------------------------------------------------
    {
        auto* c = app.add_subcommand("exactcheck",
                                     "constant satisfiability and the exact count solver");
        auto fam_path = std::make_shared<std::string>();
        auto inst_path = std::make_shared<std::string>();
        c->add_option("--family", *fam_path, "family file")->required();
        c->add_option("--instance", *inst_path, "instance file (optional)");
        c->callback([&, fam_path, inst_path] {
            action = [&, fam_path, inst_path]() {
                ConstraintFamily fam = load_family(*fam_path);
                std::optional<int> sigma = constant_satisfiable(fam);
                if (sigma)
                    std::cout << "constant_satisfiable=" << *sigma << "\n";
                else
                    std::cout << "constant_satisfiable=none\n";
                if (!inst_path->empty()) {
                    Instance psi = load_instance(*inst_path, fam);
                    std::cout << "value=" << format_exact(exact_count_solver(fam, psi)) << "\n";
                }
                write_json_meta(json_meta, json{{"command", "exactcheck"},
                                                {"family", *fam_path},
                                                {"version", kVersion}});
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "run '" << (argc > 0 ? argv[0] : "cspsketch") << " --help' for usage\n";
        return 2;
    }

    try {
        return action();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
