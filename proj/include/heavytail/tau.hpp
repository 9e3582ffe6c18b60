#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

// Subset enumeration over columns is exponential; hard cap, never approximate.
constexpr int kMaxTauColumns = 22;

// Witness that the column set `columns` covers `covered_rows` (rows with a
// positive entry in some chosen column).
struct CoverCertificate {
    std::vector<int> columns;
    std::vector<int> covered_rows;
};

namespace detail {

inline void check_tau_args(const Matrix& A, int k, int i) {
    if (A.q < 1 || A.d < 1) throw validation_error("tau: empty matrix");
    if (A.d > kMaxTauColumns)
        throw capacity_error("tau: column count exceeds " + std::to_string(kMaxTauColumns));
    if (k < 1 || k > A.q) throw validation_error("tau: k out of range");
    if (i < 1 || i > A.d) throw validation_error("tau: i out of range");
    for (int r = 0; r < A.q; ++r) {
        bool nontrivial = false;
        for (int c = 0; c < A.d; ++c) {
            if (A(r, c) < 0.0) throw validation_error("tau: negative entry");
            if (A(r, c) > 0.0) nontrivial = true;
        }
        if (!nontrivial) throw validation_error("tau: trivial (all-zero) row");
    }
}

inline std::vector<int> rows_covered_by(const Matrix& A, const std::vector<int>& cols) {
    std::vector<int> rows;
    for (int r = 0; r < A.q; ++r)
        for (int c : cols)
            if (A(r, c) > 0.0) {
                rows.push_back(r);
                break;
            }
    return rows;
}

}  // namespace detail

// sup over z with z^(i) > 0 of (Az)^(k) / z^(i). Finite iff every column subset
// of size <= i-1 covers at most k-1 rows; the finite value is the max over such
// subsets S of the (k - cover(S))-th largest complement row sum (entries outside
// S) among rows not covered by S. Uncovered coordinates cap at the normalization
// level while covered rows escape with the amplified S-coordinates.
inline TauValue tau_matrix(const Matrix& A, int k, int i) {
    detail::check_tau_args(A, k, i);
    bool infinite = false;
    double best = 0.0;
    for_each_subset(A.d, 0, i - 1, [&](const std::vector<int>& S) {
        if (infinite) return;
        std::vector<int> covered = detail::rows_covered_by(A, S);
        int cov = static_cast<int>(covered.size());
        if (cov >= k) {
            infinite = true;
            return;
        }
        std::vector<double> sums;
        std::vector<bool> is_cov(A.q, false);
        for (int r : covered) is_cov[r] = true;
        for (int r = 0; r < A.q; ++r) {
            if (is_cov[r]) continue;
            double s = 0.0;
            for (int c = 0; c < A.d; ++c) s += A(r, c);
            for (int c : S) s -= A(r, c);
            sums.push_back(s);
        }
        best = std::max(best, order_stat(sums, k - cov));
    });
    return infinite ? TauValue::infinite() : TauValue::finite(best);
}

// Smallest number of columns covering at least k rows (the largest i with
// tau_matrix(A, k, i) finite), with a covering witness.
inline std::pair<int, CoverCertificate> critical_index(const Matrix& A, int k) {
    detail::check_tau_args(A, k, 1);
    for (int size = 1; size <= A.d; ++size) {
        CoverCertificate found;
        bool ok = false;
        for_each_subset(A.d, size, size, [&](const std::vector<int>& S) {
            if (ok) return;
            std::vector<int> rows = detail::rows_covered_by(A, S);
            if (static_cast<int>(rows.size()) >= k) {
                found.columns = S;
                found.covered_rows = std::move(rows);
                ok = true;
            }
        });
        if (ok) return {size, std::move(found)};
    }
    // Unreachable: all d columns cover every non-trivial row, so q >= k rows.
    throw validation_error("critical_index: internal cover search failed");
}

struct OracleReport {
    double lower_bound = 0.0;
    bool divergence = false;
};

// Randomized + structured search for lower bounds on tau. Probes live on the
// boundary z^(i) = 1: a subset of <= i-1 coordinates is amplified to level L,
// the rest stay in (0, 1] with one pinned at 1. The level ladder 1, 10, ...,
// 10^4 extends further until amplified rows fully dominate, so finite suprema
// saturate inside the ladder; the divergence flag fires when the per-level max
// is still growing at the top of the ladder or exceeds the row-sum cap that
// every finite value must respect.
inline OracleReport tau_oracle(const Matrix& A, int k, int i, std::uint64_t budget,
                               std::uint64_t seed = 0x0acc1eu) {
    detail::check_tau_args(A, k, i);
    if (budget < 1000) throw validation_error("tau_oracle: budget must be >= 1000");

    double max_entry = 0.0, min_pos = 0.0, max_row_sum = 0.0;
    for (int r = 0; r < A.q; ++r) {
        double s = 0.0;
        for (int c = 0; c < A.d; ++c) {
            double v = A(r, c);
            s += v;
            max_entry = std::max(max_entry, v);
            if (v > 0.0 && (min_pos == 0.0 || v < min_pos)) min_pos = v;
        }
        max_row_sum = std::max(max_row_sum, s);
    }
    double cap = A.d * max_entry;

    // Levels: at least the 1..10^4 ladder; extended until the second-to-last
    // level already lifts amplified rows well above every bounded row sum, so
    // finite suprema saturate strictly inside the ladder.
    std::vector<double> levels{1, 10, 100, 1000, 10000};
    while (levels.back() * min_pos < 1000.0 * max_row_sum && levels.size() < 40)
        levels.push_back(levels.back() * 10.0);

    std::vector<double> level_max(levels.size(), 0.0);
    Rng rng(seed);
    std::vector<double> z(A.d);
    std::vector<int> subset;

    auto probe = [&](const std::vector<int>& S, double L, bool corner) {
        for (int c = 0; c < A.d; ++c) z[c] = corner ? 1.0 : rng.u01_open_closed();
        if (!corner) {
            // Pin one unamplified coordinate to 1 so that z^(i) stays at scale 1.
            std::vector<int> free;
            for (int c = 0; c < A.d; ++c)
                if (std::find(S.begin(), S.end(), c) == S.end()) free.push_back(c);
            if (!free.empty()) z[free[rng.next_u64() % free.size()]] = 1.0;
        }
        for (int c : S) z[c] = L;
        double val = order_stat(matvec(A, z), k);
        return val;
    };

    // Structured corner probes: every subset when cheap, else random subsets.
    std::uint64_t corner_budget = budget / 2;
    bool enumerate_all = true;
    std::uint64_t count = 0;
    for (int s = 0; s <= i - 1 && enumerate_all; ++s) {
        count += binom(A.d, s);
        if (count * levels.size() > corner_budget) enumerate_all = false;
    }
    for (std::size_t li = 0; li < levels.size(); ++li) {
        double L = levels[li];
        if (enumerate_all) {
            for_each_subset(A.d, 0, i - 1, [&](const std::vector<int>& S) {
                level_max[li] = std::max(level_max[li], probe(S, L, true));
            });
        } else {
            for (std::uint64_t it = 0; it < corner_budget / levels.size(); ++it) {
                subset.clear();
                for (int c = 0; c < A.d; ++c)
                    if (static_cast<int>(subset.size()) < i - 1 && rng.u01_half_open() < 0.5)
                        subset.push_back(c);
                level_max[li] = std::max(level_max[li], probe(subset, L, true));
            }
        }
        // Randomized probes fill in non-corner boundary points.
        for (std::uint64_t it = 0; it < (budget - corner_budget) / levels.size(); ++it) {
            subset.clear();
            int want = i > 1 ? static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i)) : 0;
            while (static_cast<int>(subset.size()) < want) {
                int c = static_cast<int>(rng.next_u64() % A.d);
                if (std::find(subset.begin(), subset.end(), c) == subset.end()) subset.push_back(c);
            }
            level_max[li] = std::max(level_max[li], probe(subset, L, false));
        }
    }

    OracleReport rep;
    for (double m : level_max) rep.lower_bound = std::max(rep.lower_bound, m);
    std::size_t top = levels.size() - 1;
    bool growing_at_top = level_max[top] >= 10.0 * 0.5 * level_max[top - 1];
    rep.divergence = growing_at_top || rep.lower_bound > cap * (1.0 + 1e-9);
    return rep;
}

}  // namespace heavytail
