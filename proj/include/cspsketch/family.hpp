#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cspsketch/common.hpp"

namespace cspsketch {

/// A family of constraint functions f : [q]^k -> {0,1}, each given by its
/// truth table. Tables are indexed row-major over patterns a in [q]^k with
/// a_1 most significant; symbol s in {1..q} maps to digit s-1.
class ConstraintFamily {
public:
    ConstraintFamily(int q, int k) : q_(q), k_(k) {
        require(q >= 2, "family: alphabet size q must be >= 2");
        require(k >= 1, "family: arity k must be >= 1");
        table_len_ = ipow(q, k);
    }

    int q() const { return q_; }
    int k() const { return k_; }
    std::int64_t table_len() const { return table_len_; }
    int size() const { return static_cast<int>(tables_.size()); }

    /// Adds a function; rejects duplicate tables so that distribution indices
    /// stay unambiguous.
    int add_function(const std::string& name, std::vector<std::uint8_t> table) {
        if (static_cast<std::int64_t>(table.size()) != table_len_)
            fail("family: table for '%s' has length %zu, expected %lld", name.c_str(),
                 table.size(), static_cast<long long>(table_len_));
        for (std::uint8_t b : table)
            require(b == 0 || b == 1, "family: table entries must be bits");
        for (int i = 0; i < size(); ++i) {
            if (tables_[i] == table)
                fail("family: function '%s' duplicates table of '%s'", name.c_str(),
                     names_[i].c_str());
            if (names_[i] == name) fail("family: duplicate function name '%s'", name.c_str());
        }
        tables_.push_back(std::move(table));
        names_.push_back(name);
        return size() - 1;
    }

    const std::vector<std::uint8_t>& table(int f) const {
        check_index(f);
        return tables_[f];
    }
    const std::string& name(int f) const {
        check_index(f);
        return names_[f];
    }
    int index_of(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (names_[i] == name) return i;
        fail("family: unknown function '%s'", name.c_str());
    }

    /// Pattern index of a point given 0-based symbols, row-major a_1 msb.
    std::int64_t pattern_index(const std::vector<int>& a0) const {
        std::int64_t idx = 0;
        for (int t = 0; t < k_; ++t) idx = idx * q_ + a0[t];
        return idx;
    }
    std::vector<int> pattern_of_index(std::int64_t idx) const {
        std::vector<int> a0(k_);
        for (int t = k_ - 1; t >= 0; --t) {
            a0[t] = static_cast<int>(idx % q_);
            idx /= q_;
        }
        return a0;
    }

    /// f applied to a pattern of 0-based symbols.
    bool eval(int f, const std::vector<int>& a0) const { return table(f)[pattern_index(a0)] != 0; }

    bool is_zero_function(int f) const {
        const auto& t = table(f);
        return std::all_of(t.begin(), t.end(), [](std::uint8_t b) { return b == 0; });
    }

    bool operator==(const ConstraintFamily& o) const {
        return q_ == o.q_ && k_ == o.k_ && tables_ == o.tables_ && names_ == o.names_;
    }

private:
    void check_index(int f) const {
        if (f < 0 || f >= size()) fail("family: function index %d out of range (size %d)", f, size());
    }

    int q_, k_;
    std::int64_t table_len_;
    std::vector<std::vector<std::uint8_t>> tables_;
    std::vector<std::string> names_;
};

namespace detail {
inline bool skip_line(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}
}  // namespace detail

/// Family file format:
///   q=<int> k=<int>
///   f <name> <q^k space-separated bits>
inline ConstraintFamily parse_family(std::istream& in) {
    std::string line;
    int q = -1, k = -1;
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        std::istringstream hs(line);
        std::string tq, tk;
        hs >> tq >> tk;
        if (tq.rfind("q=", 0) != 0 || tk.rfind("k=", 0) != 0)
            throw Error("family: expected header 'q=<int> k=<int>', got: " + line);
        q = std::stoi(tq.substr(2));
        k = std::stoi(tk.substr(2));
        break;
    }
    require(q > 0 && k > 0, "family: missing header line");
    ConstraintFamily fam(q, k);
    while (std::getline(in, line)) {
        if (detail::skip_line(line)) continue;
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        if (tag != "f") throw Error("family: expected 'f <name> <bits>', got: " + line);
        std::vector<std::uint8_t> bits;
        int b;
        while (ls >> b) bits.push_back(static_cast<std::uint8_t>(b));
        fam.add_function(name, std::move(bits));
    }
    require(fam.size() > 0, "family: no functions given");
    return fam;
}

inline ConstraintFamily load_family(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("family: cannot open '" + path + "'");
    return parse_family(in);
}

inline void write_family(std::ostream& out, const ConstraintFamily& fam) {
    out << "q=" << fam.q() << " k=" << fam.k() << "\n";
    for (int f = 0; f < fam.size(); ++f) {
        out << "f " << fam.name(f);
        for (std::uint8_t b : fam.table(f)) out << ' ' << int(b);
        out << "\n";
    }
}

inline void save_family(const std::string& path, const ConstraintFamily& fam) {
    std::ofstream out(path);
    if (!out) throw Error("family: cannot write '" + path + "'");
    write_family(out, fam);
}

// Families used throughout the examples and tests.

/// f(x,y)=1 iff x=2 and y=1 over [2]^2.
inline ConstraintFamily make_dicut() {
    ConstraintFamily fam(2, 2);
    fam.add_function("dicut", {0, 0, 1, 0});
    return fam;
}

/// Single inequality constraint x != y over [q]^2 (q=2 is Max-CUT).
inline ConstraintFamily make_qcol(int q) {
    ConstraintFamily fam(q, 2);
    std::vector<std::uint8_t> t(q * q, 0);
    for (int x = 0; x < q; ++x)
        for (int y = 0; y < q; ++y) t[x * q + y] = (x != y);
    fam.add_function("neq", std::move(t));
    return fam;
}

/// All q! bijection constraints f_pi(x,y)=1 iff y = pi(x) over [q]^2.
inline ConstraintFamily make_qug(int q) {
    ConstraintFamily fam(q, 2);
    std::vector<int> perm(q);
    for (int i = 0; i < q; ++i) perm[i] = i;
    int id = 0;
    do {
        std::vector<std::uint8_t> t(q * q, 0);
        for (int x = 0; x < q; ++x) t[x * q + perm[x]] = 1;
        fam.add_function("pi" + std::to_string(id++), std::move(t));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return fam;
}

/// Single constant-1 function over [q]^k.
inline ConstraintFamily make_const1(int q, int k) {
    ConstraintFamily fam(q, k);
    fam.add_function("one", std::vector<std::uint8_t>(ipow(q, k), 1));
    return fam;
}

/// f=1 iff every input equals sigma (1-based); "all-sigma AND".
inline ConstraintFamily make_all_equal_and(int q, int k, int sigma1) {
    ConstraintFamily fam(q, k);
    std::vector<std::uint8_t> t(ipow(q, k), 0);
    std::vector<int> a0(k, sigma1 - 1);
    t[fam.pattern_index(a0)] = 1;
    fam.add_function("and" + std::to_string(sigma1), std::move(t));
    return fam;
}

}  // namespace cspsketch
