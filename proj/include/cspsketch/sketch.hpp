#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cspsketch/instance.hpp"
#include "cspsketch/separator.hpp"

namespace cspsketch {

/// One dynamic-stream element: insert (+1) or delete (-1) of a constraint.
struct StreamUpdate {
    Constraint constraint;
    int delta = 1;  // must be +1 or -1
};

enum class SketchMode { Exact, Sampled };

struct SketchConfig {
    SketchMode mode = SketchMode::Exact;
    double sample_rate = 0.25;   // sampled mode: fraction of rows kept
    std::uint64_t seed = 1;      // sampled mode: row selection seed
};

/// Linear sketch of the lambda-bias matrix. State is a signed integer count
/// per (variable, function, position); integer arithmetic makes COMB exact
/// and order-invariant, and the n x q bias matrix is materialized only at
/// finalization. Sampled mode keeps the rows of a seeded fixed-size sample.
class BiasSketch {
public:
    BiasSketch(const ConstraintFamily& fam, const SeparatorCertificate& cert, int n,
               const SketchConfig& cfg = {})
        : fam_(fam), cert_(cert), n_(n), cfg_(cfg) {
        require(n >= 1, "sketch: need n >= 1");
        require(cert.fcount == fam.size() && cert.k == fam.k() && cert.q == fam.q(),
                "sketch: certificate shape does not match family");
        if (cfg_.mode == SketchMode::Exact) {
            rows_.resize(n_);
            for (int l = 0; l < n_; ++l) rows_[l] = l;
        } else {
            require(cfg_.sample_rate > 0.0 && cfg_.sample_rate <= 1.0,
                    "sketch: sample rate must lie in (0,1]");
            int target = std::max(1, static_cast<int>(std::llround(cfg_.sample_rate * n_)));
            std::vector<int> perm(n_);
            for (int l = 0; l < n_; ++l) perm[l] = l;
            auto rng = make_rng(cfg_.seed);
            for (int l = n_ - 1; l > 0; --l)
                std::swap(perm[l], perm[rng() % std::uint64_t(l + 1)]);
            rows_.assign(perm.begin(), perm.begin() + target);
            std::sort(rows_.begin(), rows_.end());
        }
        row_of_.assign(n_, -1);
        for (size_t idx = 0; idx < rows_.size(); ++idx) row_of_[rows_[idx]] = int(idx);
        counts_.assign(rows_.size() * fam_.size() * fam_.k(), 0);
    }

    const ConstraintFamily& family() const { return fam_; }
    const SeparatorCertificate& certificate() const { return cert_; }
    int n() const { return n_; }
    const SketchConfig& config() const { return cfg_; }
    std::int64_t total_weight() const { return w_; }
    const std::vector<int>& sampled_rows() const { return rows_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

    void update(const StreamUpdate& u) {
        require(u.delta == 1 || u.delta == -1, "sketch: delta must be +1 or -1");
        check_constraint(fam_, u.constraint, n_);
        for (int t = 0; t < fam_.k(); ++t) {
            int row = row_of_[u.constraint.vars[t]];
            if (row < 0) continue;  // unsampled row
            counts_[(std::int64_t(row) * fam_.size() + u.constraint.f_index) * fam_.k() + t] +=
                u.delta;
        }
        w_ += u.delta;
    }

    bool compatible(const BiasSketch& o) const {
        return cfg_.mode == o.cfg_.mode && n_ == o.n_ && fam_ == o.fam_ &&
               cert_.lambda == o.cert_.lambda && cert_.tau_y == o.cert_.tau_y &&
               cert_.tau_n == o.cert_.tau_n &&
               (cfg_.mode == SketchMode::Exact ||
                (cfg_.seed == o.cfg_.seed && cfg_.sample_rate == o.cfg_.sample_rate));
    }

    /// COMB: entrywise sum; exact in integer arithmetic.
    void merge(const BiasSketch& o) {
        require(compatible(o), "sketch: merging incompatible sketch states");
        for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
        w_ += o.w_;
    }

    /// Unnormalized bias-row values sum_{f,t} count * lambda_{f,t,s} for one
    /// tracked row, evaluated in a fixed (f,t) order.
    std::vector<double> row_bias(int row_idx) const {
        std::vector<double> out(fam_.q(), 0.0);
        for (int f = 0; f < fam_.size(); ++f)
            for (int t = 0; t < fam_.k(); ++t) {
                std::int64_t c =
                    counts_[(std::int64_t(row_idx) * fam_.size() + f) * fam_.k() + t];
                if (c == 0) continue;
                for (int s = 0; s < fam_.q(); ++s) out[s] += double(c) * cert_.at(f, t, s);
            }
        return out;
    }

    /// Restores serialized state; rows must match the seed-derived sample.
    void restore(std::vector<std::int64_t> counts, std::int64_t w,
                 const std::vector<int>& rows) {
        require(rows == rows_, "sketch: serialized rows disagree with seed-derived sample");
        require(counts.size() == counts_.size(), "sketch: serialized count matrix size mismatch");
        counts_ = std::move(counts);
        w_ = w;
    }

private:
    ConstraintFamily fam_;
    SeparatorCertificate cert_;
    int n_ = 0;
    SketchConfig cfg_;
    std::vector<int> rows_;            // tracked variable rows (all rows in exact mode)
    std::vector<int> row_of_;          // variable -> tracked index or -1
    std::vector<std::int64_t> counts_; // (row, f, t) -> signed count
    std::int64_t w_ = 0;
};

inline BiasSketch sketch_comp(const ConstraintFamily& fam, const SeparatorCertificate& cert, int n,
                              const std::vector<StreamUpdate>& updates,
                              const SketchConfig& cfg = {}) {
    BiasSketch s(fam, cert, n, cfg);
    for (const StreamUpdate& u : updates) s.update(u);
    return s;
}

inline BiasSketch sketch_comb(const BiasSketch& s1, const BiasSketch& s2) {
    BiasSketch out = s1;
    out.merge(s2);
    return out;
}

struct BiasEstimate {
    double value = 0.0;           // estimate of B_lambda(Psi)
    double standard_error = 0.0;  // sampled mode: finite-population SE of the estimator
};

/// B_lambda(Psi) = sum_l max_s bias_{l,s}. Exact mode is exact; sampled mode
/// scales the sampled row maxima by n/|sample| (unbiased over the row draw).
inline BiasEstimate b_lambda(const BiasSketch& s) {
    if (s.total_weight() == 0) throw Error("empty instance");
    if (s.total_weight() < 0)
        throw Error("stream violates end-of-stream non-negativity (total weight " +
                    std::to_string(s.total_weight()) + ")");
    const double w = double(s.total_weight());
    const size_t m = s.sampled_rows().size();
    double sum = 0.0, sumsq = 0.0;
    for (size_t idx = 0; idx < m; ++idx) {
        std::vector<double> row = s.row_bias(static_cast<int>(idx));
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        mx /= w;
        sum += mx;
        sumsq += mx * mx;
    }
    BiasEstimate est;
    if (s.config().mode == SketchMode::Exact) {
        est.value = sum;
        return est;
    }
    const double n = double(s.n());
    est.value = sum * n / double(m);
    if (m > 1) {
        double mean = sum / double(m);
        double var = (sumsq - double(m) * mean * mean) / double(m - 1);
        double fpc = (n - double(m)) / std::max(1.0, n - 1.0);
        est.standard_error = n * std::sqrt(std::max(0.0, var * fpc) / double(m));
    }
    return est;
}

enum class StreamVerdict { Yes, No };

/// Algorithm: epsilon = (tau_y - tau_n) / (2 (tau_y + tau_n)); answer NO iff
/// the bias estimate is <= tau_n (1 + epsilon).
inline StreamVerdict decide_stream(const BiasSketch& s) {
    const SeparatorCertificate& cert = s.certificate();
    require(cert.tau_y > cert.tau_n, "decide_stream: certificate has tau_y <= tau_n");
    require(cert.tau_y + cert.tau_n > 0.0, "decide_stream: thresholds must be positive");
    double eps = (cert.tau_y - cert.tau_n) / (2.0 * (cert.tau_y + cert.tau_n));
    double est = b_lambda(s).value;
    return est <= cert.tau_n * (1.0 + eps) ? StreamVerdict::No : StreamVerdict::Yes;
}

/// Stream file format:
///   n=<int> family=<path>
///   + <f_name> <j1> ... <jk>
///   - <f_name> <j1> ... <jk>
struct StreamFile {
    int n = 0;
    std::string family_path;
    std::vector<StreamUpdate> updates;
};

inline StreamFile parse_stream(std::istream& in, const ConstraintFamily& fam) {
    StreamFile sf;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        if (!saw_header) {
            std::istringstream hs(line);
            std::string tn, tf;
            hs >> tn >> tf;
            if (tn.rfind("n=", 0) != 0 || tf.rfind("family=", 0) != 0)
                throw Error("stream: expected header 'n=<int> family=<path>', got: " + line);
            sf.n = std::stoi(tn.substr(2));
            sf.family_path = tf.substr(7);
            saw_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        if (tag != "+" && tag != "-") throw Error("stream: expected '+'/'-' record: " + line);
        StreamUpdate u;
        u.delta = (tag == "+") ? 1 : -1;
        u.constraint.f_index = fam.index_of(name);
        u.constraint.vars.resize(fam.k());
        for (int t = 0; t < fam.k(); ++t) {
            int j;
            if (!(ls >> j)) throw Error("stream: truncated record: " + line);
            u.constraint.vars[t] = j - 1;
        }
        check_constraint(fam, u.constraint, sf.n);
        sf.updates.push_back(std::move(u));
    }
    require(saw_header, "stream: missing header line");
    return sf;
}

inline StreamFile load_stream(const std::string& path, const ConstraintFamily& fam) {
    std::ifstream in(path);
    if (!in) throw Error("stream: cannot open '" + path + "'");
    return parse_stream(in, fam);
}

inline std::string stream_family_path(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("stream: cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        std::istringstream hs(line);
        std::string tn, tf;
        hs >> tn >> tf;
        if (tn.rfind("n=", 0) != 0 || tf.rfind("family=", 0) != 0)
            throw Error("stream: expected header 'n=<int> family=<path>', got: " + line);
        return tf.substr(7);
    }
    throw Error("stream: missing header line in '" + path + "'");
}

inline void write_stream(std::ostream& out, const ConstraintFamily& fam, int n,
                         const std::string& family_path,
                         const std::vector<StreamUpdate>& updates) {
    out << "n=" << n << " family=" << family_path << "\n";
    for (const StreamUpdate& u : updates) {
        out << (u.delta > 0 ? "+ " : "- ") << fam.name(u.constraint.f_index);
        for (int v : u.constraint.vars) out << ' ' << (v + 1);
        out << "\n";
    }
}

/// Insert-only streams convert to unit-weight instances.
inline Instance instance_of_stream(const StreamFile& sf) {
    Instance psi;
    psi.n = sf.n;
    for (const StreamUpdate& u : sf.updates) {
        require(u.delta == 1, "instance_of_stream: stream contains deletions");
        psi.add(u.constraint, 1.0);
    }
    return psi;
}

/// Binary sketch serialization: a fixed header followed by the count matrix
/// as little-endian 64-bit floats (counts are integers, exactly representable).
inline void save_sketch(const std::string& path, const BiasSketch& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("sketch: cannot write '" + path + "'");
    auto put_u64 = [&](std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
        out.write(reinterpret_cast<const char*>(b), 8);
    };
    auto put_f64 = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(bits);
    };
    out.write("CSPSK1\n", 7);
    put_u64(s.config().mode == SketchMode::Exact ? 0 : 1);
    put_u64(std::uint64_t(s.n()));
    put_u64(std::uint64_t(s.family().q()));
    put_u64(std::uint64_t(s.family().size()));
    put_u64(std::uint64_t(s.family().k()));
    put_u64(s.config().seed);
    put_f64(s.config().sample_rate);
    put_f64(double(s.total_weight()));
    put_u64(s.sampled_rows().size());
    for (int r : s.sampled_rows()) put_u64(std::uint64_t(r));
    for (std::int64_t c : s.counts()) put_f64(double(c));
}

inline BiasSketch load_sketch(const std::string& path, const ConstraintFamily& fam,
                              const SeparatorCertificate& cert) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("sketch: cannot open '" + path + "'");
    auto get_u64 = [&]() {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (!in) throw Error("sketch: truncated file '" + path + "'");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    };
    auto get_f64 = [&]() {
        std::uint64_t bits = get_u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    };
    char magic[7];
    in.read(magic, 7);
    if (!in || std::memcmp(magic, "CSPSK1\n", 7) != 0)
        throw Error("sketch: bad magic in '" + path + "'");
    SketchConfig cfg;
    cfg.mode = get_u64() == 0 ? SketchMode::Exact : SketchMode::Sampled;
    int n = static_cast<int>(get_u64());
    std::uint64_t q = get_u64(), fcount = get_u64(), k = get_u64();
    require(int(q) == fam.q() && int(fcount) == fam.size() && int(k) == fam.k(),
            "sketch: file family shape does not match");
    cfg.seed = get_u64();
    cfg.sample_rate = get_f64();
    std::int64_t w = std::int64_t(std::llround(get_f64()));
    std::uint64_t nrows = get_u64();
    std::vector<int> rows(nrows);
    for (auto& r : rows) r = static_cast<int>(get_u64());
    BiasSketch s(fam, cert, n, cfg);
    std::vector<std::int64_t> counts(nrows * fam.size() * fam.k());
    for (auto& c : counts) c = std::int64_t(std::llround(get_f64()));
    s.restore(std::move(counts), w, rows);
    return s;
}

}  // namespace cspsketch
