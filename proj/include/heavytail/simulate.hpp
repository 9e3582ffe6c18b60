#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "heavytail/asymptotics.hpp"
#include "heavytail/common.hpp"
#include "heavytail/margins.hpp"
#include "heavytail/matrixlaw.hpp"
#include "heavytail/risksets.hpp"
#include "heavytail/rng.hpp"

namespace heavytail {

constexpr std::uint64_t kMinEmpiricalSamples = 10000;

// A plain Monte Carlo probability estimate with a 95% interval; the interval
// switches to Wilson's form when fewer than 50 hits were seen.
struct McEstimate {
    double p_hat = 0.0;
    std::uint64_t n = 0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;
    bool wilson = false;
};

namespace detail {

inline McEstimate finish_estimate(std::uint64_t hits, std::uint64_t n, std::uint64_t seed) {
    McEstimate est;
    est.n = n;
    est.seed = seed;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(n);
    est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(n));
    const double z = 1.96;
    if (static_cast<double>(hits) < 50.0) {
        est.wilson = true;
        double nn = static_cast<double>(n);
        double denom = 1.0 + z * z / nn;
        double center = (est.p_hat + z * z / (2.0 * nn)) / denom;
        double half =
            z * std::sqrt(est.p_hat * (1.0 - est.p_hat) / nn + z * z / (4.0 * nn * nn)) / denom;
        est.ci_lo = center - half;
        est.ci_hi = center + half;
    } else {
        est.ci_lo = est.p_hat - z * est.stderr_;
        est.ci_hi = est.p_hat + z * est.stderr_;
    }
    if (est.ci_lo < 0.0) est.ci_lo = 0.0;
    if (est.ci_hi > 1.0) est.ci_hi = 1.0;
    return est;
}

}  // namespace detail

// Direct simulation of P(AZ in tC) with independent draws of A and Z.
inline McEstimate empirical_tail(const MarginalModel& model, const MatrixLaw& law,
                                 const RiskSet& c, double t, std::uint64_t n, std::uint64_t seed,
                                 int threads = 1) {
    if (law.d != model.dim())
        throw validation_error("empirical_tail: law dimension does not match the marginal model");
    if (law.q != c.q) throw validation_error("empirical_tail: law rows do not match the risk set");
    if (n < kMinEmpiricalSamples)
        throw validation_error("empirical_tail: need at least 10000 samples");
    if (!(t > 0.0)) throw validation_error("empirical_tail: t must be positive");
    RiskSet scaled = scale(c, t);
    std::uint64_t hits = run_chunks<std::uint64_t>(
        n, seed, threads,
        [&](Rng& rng, std::uint64_t count) {
            std::uint64_t h = 0;
            for (std::uint64_t s = 0; s < count; ++s) {
                Matrix a = sample_matrix(law, rng);
                std::vector<double> z = sample(model, rng);
                if (contains(scaled, matvec(a, z))) ++h;
            }
            return h;
        },
        [](std::uint64_t acc, std::uint64_t part) { return acc + part; }, std::uint64_t{0});
    return detail::finish_estimate(hits, n, seed);
}

// Per-order stratified estimates: index i carries masses[i] * P(AZ in tC | i_k(A) = i).
struct StratifiedTail {
    int k = 1;
    std::vector<McEstimate> per_i;  // index 0 unused
    std::vector<Rat> masses;        // exact stratum masses
    double total = 0.0;
    double total_stderr = 0.0;
};

// Conditional sampling inside each critical-index stratum with n samples per
// nonempty stratum; empty strata are exact zeros.
inline StratifiedTail stratified_tail(const MarginalModel& model, const MatrixLaw& law,
                                      const RiskSet& c, int k, double t, std::uint64_t n,
                                      std::uint64_t seed, int threads = 1) {
    if (law.d != model.dim())
        throw validation_error("stratified_tail: law dimension does not match the marginal model");
    if (law.q != c.q)
        throw validation_error("stratified_tail: law rows do not match the risk set");
    if (n < kMinEmpiricalSamples)
        throw validation_error("stratified_tail: need at least 10000 samples");
    if (!(t > 0.0)) throw validation_error("stratified_tail: t must be positive");
    std::vector<MatrixAtom> atoms = enumerate_support(law);

    StratifiedTail out;
    out.k = k;
    out.masses.assign(law.d + 1, Rat(0));
    std::vector<std::vector<const MatrixAtom*>> strata(law.d + 1);
    for (const MatrixAtom& at : atoms) {
        if (at.prob == 0) continue;
        int ik = critical_index(at.a, k).first;
        out.masses[ik] += at.prob;
        strata[ik].push_back(&at);
    }

    RiskSet scaled = scale(c, t);
    out.per_i.assign(law.d + 1, McEstimate{});
    double var = 0.0;
    for (int i = 1; i <= law.d; ++i) {
        if (strata[i].empty()) continue;
        double mass = to_double(out.masses[i]);
        std::vector<double> cum;
        double acc = 0.0;
        for (const MatrixAtom* at : strata[i]) {
            acc += to_double(at->prob) / mass;
            cum.push_back(acc);
        }
        std::uint64_t hits = run_chunks<std::uint64_t>(
            n, derive_seed(seed, 0x57a70000u + static_cast<std::uint64_t>(i)), threads,
            [&](Rng& rng, std::uint64_t count) {
                std::uint64_t h = 0;
                for (std::uint64_t s = 0; s < count; ++s) {
                    double u = rng.u01_half_open();
                    std::size_t pick = 0;
                    while (pick + 1 < cum.size() && u >= cum[pick]) ++pick;
                    std::vector<double> z = sample(model, rng);
                    if (contains(scaled, matvec(strata[i][pick]->a, z))) ++h;
                }
                return h;
            },
            [](std::uint64_t acc2, std::uint64_t part) { return acc2 + part; }, std::uint64_t{0});
        McEstimate est = detail::finish_estimate(hits, n, seed);
        // Scale the conditional estimate by the exact stratum mass.
        est.p_hat *= mass;
        est.stderr_ *= mass;
        est.ci_lo *= mass;
        est.ci_hi *= mass;
        out.per_i[i] = est;
        out.total += est.p_hat;
        var += est.stderr_ * est.stderr_;
    }
    out.total_stderr = std::sqrt(var);
    return out;
}

struct RatioRow {
    double t = 0.0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    double full_eval = 0.0;
    double leading_eval = 0.0;
    double ratio_full = 0.0;
    double ratio_leading = 0.0;
};

// Empirical tail against the expansion along a t grid; the diagnostic behind
// the convergence figures.
inline std::vector<RatioRow> ratio_table(const MarginalModel& model, const MatrixLaw& law,
                                         const RiskSet& c, const std::vector<double>& t_grid,
                                         std::uint64_t n, std::uint64_t seed, int threads = 1,
                                         std::uint64_t n_mc = 200000) {
    if (t_grid.empty()) throw validation_error("ratio_table: empty t grid");
    TailExpansion exp = expansion(model, law, c, c.k, n_mc, derive_seed(seed, 0xe4b), threads);
    std::vector<RatioRow> rows;
    for (std::size_t idx = 0; idx < t_grid.size(); ++idx) {
        RatioRow row;
        row.t = t_grid[idx];
        McEstimate est =
            empirical_tail(model, law, c, row.t, n, derive_seed(seed, 0x70000u + idx), threads);
        row.p_hat = est.p_hat;
        row.stderr_ = est.stderr_;
        EvalPair eval = evaluate(exp, row.t);
        row.full_eval = eval.full;
        row.leading_eval = eval.leading;
        row.ratio_full = eval.full > 0.0 ? est.p_hat / eval.full
                                         : std::numeric_limits<double>::quiet_NaN();
        row.ratio_leading = eval.leading > 0.0 ? est.p_hat / eval.leading
                                               : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace heavytail
