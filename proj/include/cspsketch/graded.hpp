#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <type_traits>
#include <vector>

#include "cspsketch/common.hpp"
#include "cspsketch/distribution.hpp"

namespace cspsketch {

using Point = std::vector<int>;  // 0-based coordinates in a box

/// Non-negative function A : [q_1] x ... x [q_k] -> T. Distributions embed
/// with total mass 1. Values are stored row-major with the first coordinate
/// most significant.
template <typename T = double>
class GradedFunction {
public:
    GradedFunction(std::vector<int> dims, std::vector<T> values)
        : dims_(std::move(dims)), v_(std::move(values)) {
        std::int64_t len = 1;
        for (int d : dims_) {
            require(d >= 1, "graded: box dimension must be >= 1");
            len *= d;
        }
        require(static_cast<std::int64_t>(v_.size()) == len, "graded: wrong value count");
    }

    static GradedFunction zero(std::vector<int> dims) {
        std::int64_t len = 1;
        for (int d : dims) len *= d;
        return GradedFunction(std::move(dims), std::vector<T>(len, T(0)));
    }

    int k() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<T>& values() const { return v_; }

    std::int64_t index(const Point& p) const {
        std::int64_t idx = 0;
        for (int i = 0; i < k(); ++i) idx = idx * dims_[i] + p[i];
        return idx;
    }
    Point point(std::int64_t idx) const {
        Point p(k());
        for (int i = k() - 1; i >= 0; --i) {
            p[i] = static_cast<int>(idx % dims_[i]);
            idx /= dims_[i];
        }
        return p;
    }
    T& at(const Point& p) { return v_[index(p)]; }
    const T& at(const Point& p) const { return v_[index(p)]; }

    T total_mass() const {
        T s(0);
        for (const T& x : v_) s = s + x;
        return s;
    }

    /// mu_{i,s} = sum of A over points with coordinate i equal to s.
    std::vector<std::vector<T>> position_marginals() const {
        std::vector<std::vector<T>> mu(k());
        for (int i = 0; i < k(); ++i) mu[i].assign(dims_[i], T(0));
        for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(v_.size()); ++idx) {
            if (!(v_[idx] > T(0))) continue;
            Point p = point(idx);
            for (int i = 0; i < k(); ++i) mu[i][p[i]] = mu[i][p[i]] + v_[idx];
        }
        return mu;
    }

    std::vector<Point> support() const {
        std::vector<Point> s;
        for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(v_.size()); ++idx)
            if (v_[idx] > T(0)) s.push_back(point(idx));
        return s;
    }

private:
    std::vector<int> dims_;
    std::vector<T> v_;
};

inline bool point_leq(const Point& a, const Point& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}
inline bool points_comparable(const Point& a, const Point& b) {
    return point_leq(a, b) || point_leq(b, a);
}
inline Point point_meet(const Point& a, const Point& b) {
    Point m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = std::min(a[i], b[i]);
    return m;
}
inline Point point_join(const Point& a, const Point& b) {
    Point m(a.size());
    for (size_t i = 0; i < a.size(); ++i) m[i] = std::max(a[i], b[i]);
    return m;
}

template <typename T>
bool is_chain_supported(const GradedFunction<T>& a) {
    std::vector<Point> s = a.support();
    std::sort(s.begin(), s.end());
    for (size_t i = 1; i < s.size(); ++i)
        if (!point_leq(s[i - 1], s[i])) return false;
    return true;
}

/// Mass transfer from an incomparable pair {u,v} to {meet,join}; marginals
/// are unchanged. The transfer amount is min(A(u), A(v)).
template <typename T>
GradedFunction<T> polarize_step(const GradedFunction<T>& a, const Point& u, const Point& v) {
    require(u.size() == v.size() && static_cast<int>(u.size()) == a.k(),
            "polarize_step: point arity mismatch");
    require(!points_comparable(u, v), "polarize_step: points must be incomparable");
    GradedFunction<T> out = a;
    T eps = std::min(a.at(u), a.at(v));
    if (!(eps > T(0))) return out;
    out.at(u) = out.at(u) - eps;
    out.at(v) = out.at(v) - eps;
    Point lo = point_meet(u, v), hi = point_join(u, v);
    out.at(lo) = out.at(lo) + eps;
    out.at(hi) = out.at(hi) + eps;
    return out;
}

/// The unique chain-supported function with the given per-position marginals.
/// Recursion: put tau = min_i mu_{i,top} mass on the box top, peel the
/// argmin dimension (smallest index on ties), repeat on the remainder.
template <typename T>
GradedFunction<T> canonical_graded(const std::vector<int>& dims,
                                   std::vector<std::vector<T>> mu, T mass) {
    const int k = static_cast<int>(dims.size());
    require(static_cast<int>(mu.size()) == k, "canonical: marginal arity mismatch");
    for (int i = 0; i < k; ++i) {
        require(static_cast<int>(mu[i].size()) == dims[i], "canonical: marginal width mismatch");
        T s(0);
        for (const T& x : mu[i]) {
            require(!(x < T(0)), "canonical: negative marginal entry");
            s = s + x;
        }
        if constexpr (std::is_floating_point_v<T>) {
            require(std::fabs(s - mass) <= 1e-7, "canonical: marginal rows disagree on total mass");
        } else {
            require(s == mass, "canonical: marginal rows disagree on total mass");
        }
    }
    GradedFunction<T> out = GradedFunction<T>::zero(dims);
    T dust(0);
    if constexpr (std::is_floating_point_v<T>) dust = 1e-12 * (1.0 + std::fabs(mass));
    std::vector<int> top(k);
    std::vector<int> cur(dims);
    T remaining = mass;
    while (remaining > dust) {
        int h = 0;
        T tau = mu[0][cur[0] - 1];
        for (int i = 1; i < k; ++i) {
            if (mu[i][cur[i] - 1] < tau) {
                tau = mu[i][cur[i] - 1];
                h = i;
            }
        }
        if (tau < T(0)) tau = T(0);            // guard fp dust
        if (tau > remaining) tau = remaining;  // guard fp dust
        for (int i = 0; i < k; ++i) top[i] = cur[i] - 1;
        if (tau > T(0)) {
            out.at(top) = out.at(top) + tau;
            for (int i = 0; i < k; ++i) mu[i][cur[i] - 1] = mu[i][cur[i] - 1] - tau;
            remaining = remaining - tau;
        }
        if (!(remaining > dust)) break;
        require(cur[h] > 1, "canonical: inconsistent marginals (cannot peel further)");
        --cur[h];
    }
    return out;
}

template <typename T>
GradedFunction<T> canonical_of(const GradedFunction<T>& a) {
    return canonical_graded(a.dims(), a.position_marginals(), a.total_mass());
}

/// One mass move made by Polarize. Steps taken inside a while loop carry that
/// loop's id and the chain index pair (i,j); recursive/clean-up bookkeeping
/// steps carry loop = -1.
template <typename T>
struct PolarizeStep {
    Point u, v;
    T eps;
    int loop = -1;
    int i = -1, j = -1;
};

template <typename T>
struct PolarizeResult {
    GradedFunction<T> out;
    std::vector<PolarizeStep<T>> trace;
};

namespace detail {

struct BoxView {
    std::vector<int> lo, hi;  // inclusive, 0-based
    int ndims() const { return static_cast<int>(lo.size()); }
    int extent(int i) const { return hi[i] - lo[i] + 1; }
    bool contains(const Point& p) const {
        for (int i = 0; i < ndims(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
};

template <typename T>
std::vector<Point> support_in_box(const GradedFunction<T>& a, const BoxView& box) {
    std::vector<Point> s;
    for (const Point& p : a.support())
        if (box.contains(p)) s.push_back(p);
    std::sort(s.begin(), s.end());
    return s;
}

/// Extends a chain-sorted support to a maximal chain from box.lo to box.hi by
/// incrementing the smallest incrementable coordinate at each step.
inline std::vector<Point> supporting_chain(const std::vector<Point>& support, const BoxView& box) {
    for (size_t i = 1; i < support.size(); ++i)
        require(point_leq(support[i - 1], support[i]),
                "polarize: restriction support is not a chain");
    std::vector<Point> chain;
    Point cur = box.lo;
    chain.push_back(cur);
    auto walk_to = [&](const Point& target) {
        while (cur != target) {
            int r = -1;
            for (int i = 0; i < box.ndims(); ++i)
                if (cur[i] < target[i]) {
                    r = i;
                    break;
                }
            require(r >= 0, "polarize: chain walk stuck");
            ++cur[r];
            chain.push_back(cur);
        }
    };
    for (const Point& s : support) {
        require(point_leq(cur, s), "polarize: support point below chain cursor");
        walk_to(s);
    }
    walk_to(box.hi);
    return chain;
}

template <typename T>
void polarize_box(GradedFunction<T>& a, const BoxView& box, std::vector<PolarizeStep<T>>& trace,
                  int& next_loop_id) {
    int wide = 0;
    for (int i = 0; i < box.ndims(); ++i)
        if (box.extent(i) >= 2) ++wide;
    if (wide <= 1) return;  // one-dimensional boxes are totally ordered

    // relabeling freedom: act on the largest dimension of extent >= 2
    int d = -1;
    for (int i = box.ndims() - 1; i >= 0; --i)
        if (box.extent(i) >= 2) {
            d = i;
            break;
        }

    BoxView lower = box;
    lower.hi[d] -= 1;
    BoxView slice = box;
    slice.lo[d] = slice.hi[d];

    polarize_box(a, lower, trace, next_loop_id);
    polarize_box(a, slice, trace, next_loop_id);

    const int loop_id = next_loop_id++;
    int prev_i = -1, prev_j = -1;
    std::int64_t guard = 0;
    while (true) {
        std::vector<Point> achain = supporting_chain(support_in_box(a, lower), lower);
        std::vector<Point> bchain = supporting_chain(support_in_box(a, slice), slice);
        int found_i = -1, found_j = -1;
        for (int i = 0; i < static_cast<int>(achain.size()) && found_i < 0; ++i) {
            if (!(a.at(achain[i]) > T(0))) continue;
            for (int j = 0; j + 1 < static_cast<int>(bchain.size()); ++j) {
                if (!(a.at(bchain[j]) > T(0))) continue;
                if (point_join(achain[i], bchain[j]) == box.hi) {
                    found_i = i;
                    found_j = j;
                    break;
                }
            }
        }
        if (found_i < 0) break;
        if (std::make_pair(found_i, found_j) <= std::make_pair(prev_i, prev_j))
            throw Error("polarize: loop pair (i,j) failed to increase lexicographically");
        prev_i = found_i;
        prev_j = found_j;

        const Point u = achain[found_i], v = bchain[found_j];
        T eps = std::min(a.at(u), a.at(v));
        a.at(u) = a.at(u) - eps;
        a.at(v) = a.at(v) - eps;
        Point lo_pt = point_meet(u, v);
        a.at(lo_pt) = a.at(lo_pt) + eps;
        a.at(box.hi) = a.at(box.hi) + eps;
        trace.push_back(PolarizeStep<T>{u, v, eps, loop_id, found_i, found_j});

        polarize_box(a, lower, trace, next_loop_id);
        if (++guard > std::int64_t(achain.size()) * std::int64_t(bchain.size()) + 4)
            throw Error("polarize: while loop failed to terminate");
    }

    // clean-up: all support except the box top avoids q_l on some coordinate l
    std::vector<Point> supp = support_in_box(a, box);
    bool chain_already = true;
    for (size_t i = 1; i < supp.size(); ++i)
        if (!point_leq(supp[i - 1], supp[i])) chain_already = false;
    if (chain_already) return;
    int l = -1;
    for (int cand = 0; cand < box.ndims() && l < 0; ++cand) {
        if (box.extent(cand) < 2) continue;
        bool ok = true;
        for (const Point& p : supp)
            if (p != box.hi && p[cand] == box.hi[cand]) {
                ok = false;
                break;
            }
        if (ok) l = cand;
    }
    if (l < 0) throw Error("polarize: clean-up coordinate missing (internal invariant)");
    BoxView rest = box;
    rest.hi[l] -= 1;
    polarize_box(a, rest, trace, next_loop_id);
}

}  // namespace detail

/// Runs the full polarization algorithm: the output is chain-supported, has
/// the input's marginals and total mass, and equals canonical_of(input).
template <typename T>
PolarizeResult<T> polarize(const GradedFunction<T>& input) {
    int sum_q = 0;
    for (int d : input.dims()) sum_q += d;
    require(sum_q <= 16, "polarize: sum of box dimensions exceeds budget 16");
    PolarizeResult<T> res{input, {}};
    detail::BoxView box;
    box.lo.assign(input.k(), 0);
    box.hi.resize(input.k());
    for (int i = 0; i < input.k(); ++i) box.hi[i] = input.dims()[i] - 1;
    int next_loop_id = 0;
    detail::polarize_box(res.out, box, res.trace, next_loop_id);
    return res;
}

/// Embeds a single-function distribution as a graded function over [q]^k.
inline GradedFunction<double> graded_of_dist(const ConstraintDist& d, int f_index = 0) {
    const ConstraintFamily& fam = d.family();
    std::vector<int> dims(fam.k(), fam.q());
    std::vector<double> v(fam.table_len());
    for (std::int64_t a = 0; a < fam.table_len(); ++a) v[a] = d.prob(f_index, a);
    return GradedFunction<double>(std::move(dims), std::move(v));
}

/// Canonical distribution for the marginals of a single-function distribution.
inline ConstraintDist canonical_dist(const ConstraintDist& d, int f_index = 0) {
    require(d.family().size() == 1 || [&] {
        for (int f = 0; f < d.family().size(); ++f) {
            if (f == f_index) continue;
            for (std::int64_t a = 0; a < d.family().table_len(); ++a)
                if (d.prob(f, a) != 0.0) return false;
        }
        return true;
    }(), "canonical_dist: distribution must be concentrated on one function");
    GradedFunction<double> g = graded_of_dist(d, f_index);
    GradedFunction<double> c = canonical_of(g);
    std::vector<double> p(d.family().size() * d.family().table_len(), 0.0);
    for (std::int64_t a = 0; a < d.family().table_len(); ++a)
        p[f_index * d.family().table_len() + a] = std::max(0.0, c.values()[a]);
    double s = 0.0;
    for (double x : p) s += x;
    for (double& x : p) x /= s;
    return ConstraintDist(d.family(), std::move(p));
}

}  // namespace cspsketch
