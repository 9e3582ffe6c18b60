#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

// Inclusion-exclusion over clauses is 2^N; explicit cap, never silent truncation.
constexpr int kMaxRectClauses = 20;

// Upper rectangle on a coordinate subset: {x : x_j > threshold_j for all j in coords}.
// coords sorted ascending; thresholds parallel. Exact values drive analytic paths,
// double mirrors drive membership tests in sampling loops.
struct RectClause {
    std::vector<int> coords;
    std::vector<Rat> thresholds;
    std::vector<double> thresholds_d;
};

// Intersection of strict halfspaces {x : normal_r . x > offset_r for all r}.
struct HalfspaceClause {
    std::vector<std::vector<Rat>> normals;
    std::vector<Rat> offsets;
    std::vector<std::vector<double>> normals_d;
    std::vector<double> offsets_d;
};

enum class RiskSetKind { RectUnion, HalfspaceUnion };

// A tail event C in the cone {x : x^(k) > 0}, bounded away from the lower cone:
// a union of upper rectangles or a union of halfspace intersections.
struct RiskSet {
    int q = 0;
    int k = 1;
    RiskSetKind kind = RiskSetKind::RectUnion;
    std::vector<RectClause> rects;
    std::vector<HalfspaceClause> halfspaces;
    Rat declared_delta = 0;  // HalfspaceUnion only; audited, not derived.
};

namespace detail {

inline void fill_rect_mirror(RectClause& c) {
    c.thresholds_d.clear();
    for (const Rat& g : c.thresholds) c.thresholds_d.push_back(to_double(g));
}

inline void fill_halfspace_mirror(HalfspaceClause& c) {
    c.normals_d.clear();
    c.offsets_d.clear();
    for (const auto& row : c.normals) {
        std::vector<double> rd;
        rd.reserve(row.size());
        for (const Rat& v : row) rd.push_back(to_double(v));
        c.normals_d.push_back(std::move(rd));
    }
    for (const Rat& b : c.offsets) c.offsets_d.push_back(to_double(b));
}

}  // namespace detail

// Union of upper rectangles. Every clause must pin at least k coordinates to
// strictly positive thresholds, which keeps C inside {x^(k) > delta} for some
// delta > 0.
inline RiskSet rect_union(int q, int k, std::vector<RectClause> clauses) {
    if (q < 1 || k < 1 || k > q) throw validation_error("rect_union: need 1 <= k <= q");
    if (clauses.empty()) throw validation_error("rect_union: at least one clause required");
    for (RectClause& c : clauses) {
        if (c.coords.size() != c.thresholds.size())
            throw validation_error("rect_union: coords/thresholds size mismatch");
        if (static_cast<int>(c.coords.size()) < k)
            throw validation_error("rect_union: clause must constrain at least k coordinates");
        std::vector<std::size_t> idx(c.coords.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return c.coords[a] < c.coords[b]; });
        RectClause sorted;
        for (std::size_t i : idx) {
            sorted.coords.push_back(c.coords[i]);
            sorted.thresholds.push_back(c.thresholds[i]);
        }
        c = std::move(sorted);
        for (std::size_t i = 0; i < c.coords.size(); ++i) {
            if (c.coords[i] < 0 || c.coords[i] >= q)
                throw validation_error("rect_union: coordinate index out of range");
            if (i > 0 && c.coords[i] == c.coords[i - 1])
                throw validation_error("rect_union: duplicate coordinate in clause");
            if (c.thresholds[i] <= 0)
                throw validation_error("rect_union: thresholds must be strictly positive");
        }
        detail::fill_rect_mirror(c);
    }
    RiskSet s;
    s.q = q;
    s.k = k;
    s.kind = RiskSetKind::RectUnion;
    s.rects = std::move(clauses);
    return s;
}

// Union of halfspace intersections. delta is declared by the caller (the exact
// infimum of x^(k) over such a union is a combinatorial problem this library
// does not solve); delta(C) audits the declaration by sampling.
inline RiskSet halfspace_union(int q, int k, std::vector<HalfspaceClause> clauses, Rat declared_delta) {
    if (q < 1 || k < 1 || k > q) throw validation_error("halfspace_union: need 1 <= k <= q");
    if (clauses.empty()) throw validation_error("halfspace_union: at least one clause required");
    if (declared_delta <= 0) throw validation_error("halfspace_union: declared delta must be > 0");
    for (HalfspaceClause& c : clauses) {
        if (c.normals.empty()) throw validation_error("halfspace_union: empty clause");
        if (c.normals.size() != c.offsets.size())
            throw validation_error("halfspace_union: normals/offsets size mismatch");
        for (const auto& row : c.normals)
            if (static_cast<int>(row.size()) != q)
                throw validation_error("halfspace_union: normal dimension mismatch");
        detail::fill_halfspace_mirror(c);
    }
    RiskSet s;
    s.q = q;
    s.k = k;
    s.kind = RiskSetKind::HalfspaceUnion;
    s.halfspaces = std::move(clauses);
    s.declared_delta = std::move(declared_delta);
    return s;
}

// Strict membership: x lies in some clause.
inline bool contains(const RiskSet& C, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != C.q) throw validation_error("contains: dimension mismatch");
    if (C.kind == RiskSetKind::RectUnion) {
        for (const RectClause& c : C.rects) {
            bool ok = true;
            for (std::size_t i = 0; i < c.coords.size() && ok; ++i)
                ok = x[c.coords[i]] > c.thresholds_d[i];
            if (ok) return true;
        }
        return false;
    }
    for (const HalfspaceClause& c : C.halfspaces) {
        bool ok = true;
        for (std::size_t r = 0; r < c.normals_d.size() && ok; ++r) {
            double s = 0.0;
            const std::vector<double>& a = c.normals_d[r];
            for (int j = 0; j < C.q; ++j) s += a[j] * x[j];
            ok = s > c.offsets_d[r];
        }
        if (ok) return true;
    }
    return false;
}

// Exact inf of x^(k) over the closure, rectangle unions only: per clause, the
// k-th largest of (thresholds on coords, 0 elsewhere), minimized over clauses.
inline Rat delta_exact_rect(const RiskSet& C) {
    if (C.kind != RiskSetKind::RectUnion)
        throw validation_error("delta_exact_rect: rectangle unions only");
    bool first = true;
    Rat best = 0;
    for (const RectClause& c : C.rects) {
        std::vector<Rat> v(C.q, Rat(0));
        for (std::size_t i = 0; i < c.coords.size(); ++i) v[c.coords[i]] = c.thresholds[i];
        std::nth_element(v.begin(), v.begin() + (C.k - 1), v.end(), std::greater<Rat>());
        Rat kth = v[C.k - 1];
        if (first || kth < best) {
            best = kth;
            first = false;
        }
    }
    return best;
}

namespace detail {

// Best-effort audit of a declared delta: sample points, keep those in C, fail
// on any witness with x^(k) < delta. Fixed seed: the audit is deterministic.
inline void audit_declared_delta(const RiskSet& C) {
    const std::uint64_t kWanted = 100000, kBudget = 4000000;
    double delta = to_double(C.declared_delta);
    Rng rng(0x5eedau);
    std::vector<double> x(C.q);
    std::uint64_t kept = 0;
    for (std::uint64_t it = 0; it < kBudget && kept < kWanted; ++it) {
        for (int j = 0; j < C.q; ++j) {
            // Half the mass probes near the boundary scale, half probes far out.
            double u = rng.u01_open_closed();
            x[j] = rng.u01_half_open() < 0.5 ? 2.0 * delta * rng.u01_half_open() : delta * std::pow(u, -1.5);
        }
        if (!contains(C, x)) continue;
        ++kept;
        if (order_stat(x, C.k) < delta)
            throw validation_error("delta audit: sampled a member of C with x^(k) below the declared delta");
    }
}

}  // namespace detail

// Distance of C from the lower cone: exact for rectangle unions, declared (and
// audited) for halfspace unions.
inline double delta(const RiskSet& C) {
    if (C.kind == RiskSetKind::RectUnion) return to_double(delta_exact_rect(C));
    detail::audit_declared_delta(C);
    return to_double(C.declared_delta);
}

// tC = {tx : x in C}: thresholds and offsets scale by t, homogeneous parts unchanged.
inline RiskSet scale_exact(const RiskSet& C, const Rat& t) {
    if (t <= 0) throw validation_error("scale: t must be > 0");
    RiskSet s = C;
    for (RectClause& c : s.rects) {
        for (Rat& g : c.thresholds) g *= t;
        detail::fill_rect_mirror(c);
    }
    for (HalfspaceClause& c : s.halfspaces) {
        for (Rat& b : c.offsets) b *= t;
        detail::fill_halfspace_mirror(c);
    }
    s.declared_delta *= t;
    return s;
}

inline RiskSet scale(const RiskSet& C, double t) {
    if (!(t > 0.0)) throw validation_error("scale: t must be > 0");
    return scale_exact(C, rational_from_double(t));
}

// One signed term of an inclusion-exclusion expansion; measure(C) = sum of
// coeff * measure(rectangle).
struct SignedRect {
    std::vector<int> coords;
    std::vector<Rat> thresholds;
    std::vector<double> thresholds_d;
    long long coeff = 0;
};

// Inclusion-exclusion expansion of a rectangle union into disjoint-measure form.
// Intersections of upper rectangles are componentwise-max upper rectangles;
// identical intersections are merged by exact threshold key.
inline std::vector<SignedRect> disjointify(const RiskSet& C) {
    if (C.kind != RiskSetKind::RectUnion) throw validation_error("disjointify: rectangle unions only");
    int n = static_cast<int>(C.rects.size());
    if (n > kMaxRectClauses)
        throw capacity_error("disjointify: clause count exceeds " + std::to_string(kMaxRectClauses) +
                             " (2^N inclusion-exclusion terms)");
    std::map<std::vector<std::pair<int, Rat>>, long long> acc;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::map<int, Rat> inter;
        for (int c = 0; c < n; ++c) {
            if (!(mask & (1u << c))) continue;
            const RectClause& cl = C.rects[c];
            for (std::size_t i = 0; i < cl.coords.size(); ++i) {
                auto [it, fresh] = inter.emplace(cl.coords[i], cl.thresholds[i]);
                if (!fresh && it->second < cl.thresholds[i]) it->second = cl.thresholds[i];
            }
        }
        std::vector<std::pair<int, Rat>> key(inter.begin(), inter.end());
        long long sign = (std::popcount(mask) % 2 == 1) ? 1 : -1;
        acc[std::move(key)] += sign;
    }
    std::vector<SignedRect> out;
    for (const auto& [key, coeff] : acc) {
        if (coeff == 0) continue;
        SignedRect r;
        r.coeff = coeff;
        for (const auto& [j, g] : key) {
            r.coords.push_back(j);
            r.thresholds.push_back(g);
            r.thresholds_d.push_back(to_double(g));
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace heavytail
