#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/margins.hpp"
#include "heavytail/matrixlaw.hpp"
#include "heavytail/measure.hpp"
#include "heavytail/risksets.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/tau.hpp"

namespace heavytail {

// One power-law term of the tail expansion: coefficient * t^(-exponent).
struct ExpansionTerm {
    int i = 0;
    double exponent = 0.0;
    double coefficient = 0.0;
    double stderr_ = 0.0;
    bool exact = false;
    Rat coefficient_exact = 0;
    std::string method;      // "analytic", "mc", or "mixed"
    bool near_zero = false;  // indistinguishable from zero at 3 standard errors
};

enum class AtomCheckStatus { VerifiedEmpty, VerifiedOneHot, Refuted, Inconclusive };

// Outcome of the empty-preimage hypothesis check for one atom below the
// resolved order.
struct AtomCheck {
    int atom = 0;
    int ik = 0;
    AtomCheckStatus status = AtomCheckStatus::Inconclusive;
};

struct TailExpansion {
    int k = 1;
    int i_star = 1;
    int iota_bar = 1;
    bool all_zero = false;
    bool refined_valid = true;
    std::vector<ExpansionTerm> terms;
    std::vector<AtomCheck> checks;
};

namespace detail {

inline bool is_onehot(const Matrix& a) {
    for (int r = 0; r < a.q; ++r) {
        int positives = 0;
        for (int c = 0; c < a.d; ++c) positives += a(r, c) > 0.0;
        if (positives != 1) return false;
    }
    return true;
}

// Proves A^-1(C) empty when every clause contains a halfspace row whose
// pullback normal A^T v has no positive component (so v.Az <= 0 < b always).
inline bool provably_empty_preimage(const Matrix& a, const RiskSet& c) {
    if (c.kind != RiskSetKind::HalfspaceUnion) return false;
    Mat<Rat> ar(a.q, a.d);
    for (std::size_t t = 0; t < a.a.size(); ++t) ar.a[t] = rational_from_double(a.a[t]);
    for (const HalfspaceClause& clause : c.halfspaces) {
        bool clause_impossible = false;
        for (std::size_t r = 0; r < clause.normals.size() && !clause_impossible; ++r) {
            if (clause.offsets[r] < 0) continue;
            bool nonpositive = true;
            for (int j = 0; j < a.d && nonpositive; ++j) {
                Rat pull = 0;
                for (int row = 0; row < a.q; ++row) pull += clause.normals[r][row] * ar(row, j);
                nonpositive = pull <= 0;
            }
            clause_impossible = nonpositive;
        }
        if (!clause_impossible) return false;
    }
    return true;
}

// Random membership probe over the positive orthant with amplitudes up to
// 10^6 and random sparsity patterns; finding a point certifies non-emptiness.
inline bool probe_nonempty(const Matrix& a, const RiskSet& c, std::uint64_t n,
                           std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x9705e));
    std::vector<double> z(a.d, 0.0);
    for (std::uint64_t s = 0; s < n; ++s) {
        std::uint64_t mask = rng.next_u64() % (std::uint64_t{1} << a.d);
        if (mask == 0) mask = (std::uint64_t{1} << a.d) - 1;
        for (int j = 0; j < a.d; ++j)
            z[j] = (mask >> j) & 1 ? std::pow(10.0, 6.0 * rng.u01_half_open()) : 0.0;
        if (contains(c, matvec(a, z))) return true;
    }
    return false;
}

}  // namespace detail

// Full power-law expansion of P(AZ in tC) over the critical-index partition:
// one term per order i, coefficient = order-statistic constant times the
// probability-weighted preimage mass at that order.
inline TailExpansion expansion(const MarginalModel& model, const MatrixLaw& law, const RiskSet& c,
                               int k, std::uint64_t n_mc = 200000, std::uint64_t seed = 1,
                               int threads = 1, std::uint64_t n_probe = 100000) {
    if (c.k != k) throw validation_error("expansion: risk set level does not match k");
    if (law.d != model.dim())
        throw validation_error("expansion: law dimension does not match the marginal model");
    if (law.q != c.q) throw validation_error("expansion: law rows do not match the risk set");
    std::vector<MatrixAtom> atoms = enumerate_support(law);

    std::vector<int> ik_of(atoms.size());
    int d = law.d;
    TailExpansion exp;
    exp.k = k;
    exp.i_star = d;
    for (std::size_t m = 0; m < atoms.size(); ++m) {
        ik_of[m] = critical_index(atoms[m].a, k).first;
        if (atoms[m].prob > 0 && ik_of[m] < exp.i_star) exp.i_star = ik_of[m];
    }

    for (int i = exp.i_star; i <= d; ++i) {
        OrderStatTail tail = order_stat_tail(model, i);
        LimitMeasure mu = limit_measure(model, i);
        ExpansionTerm term;
        term.i = i;
        term.exponent = tail.exponent;

        double value = 0.0;
        double var = 0.0;
        Rat value_exact = 0;
        bool all_analytic = true;
        bool any_analytic_positive = false;
        bool any_atom = false;
        for (std::size_t m = 0; m < atoms.size(); ++m) {
            if (ik_of[m] != i || atoms[m].prob == 0) continue;
            any_atom = true;
            MassEstimate est =
                mu_preimage(mu, atoms[m].a, c, n_mc, derive_seed(seed, m), threads);
            double qm = to_double(atoms[m].prob);
            value += qm * est.value;
            var += qm * qm * est.stderr_ * est.stderr_;
            if (est.method == "analytic") {
                if (est.value > 0.0) any_analytic_positive = true;
                if (est.exact) value_exact += atoms[m].prob * est.value_exact;
                all_analytic &= est.exact;
            } else {
                all_analytic = false;
            }
        }
        term.coefficient = tail.constant * value;
        term.stderr_ = tail.constant * std::sqrt(var);
        term.method = !any_atom || all_analytic ? "analytic"
                      : any_analytic_positive || value_exact > 0 ? "mixed"
                                                                 : "mc";
        term.exact = !any_atom || all_analytic;
        if (term.exact) term.coefficient_exact = tail.constant_exact * value_exact;
        bool positive = any_analytic_positive || (term.exact && term.coefficient_exact > 0) ||
                        term.coefficient > 3.0 * term.stderr_;
        term.near_zero = !positive;
        exp.terms.push_back(term);
    }

    exp.iota_bar = d;
    exp.all_zero = true;
    for (const ExpansionTerm& term : exp.terms)
        if (!term.near_zero) {
            exp.iota_bar = term.i;
            exp.all_zero = false;
            break;
        }

    // Hypothesis check: atoms ranked strictly below the resolved order must
    // have empty preimages for the refined limit to be justified.
    exp.refined_valid = true;
    for (std::size_t m = 0; m < atoms.size(); ++m) {
        if (atoms[m].prob == 0 || ik_of[m] >= exp.iota_bar) continue;
        AtomCheck check;
        check.atom = static_cast<int>(m);
        check.ik = ik_of[m];
        if (c.kind == RiskSetKind::RectUnion && detail::is_onehot(atoms[m].a)) {
            LimitMeasure mu = limit_measure(model, ik_of[m]);
            auto mass = mu_preimage_analytic(mu, atoms[m].a, c);
            check.status = mass && !(mass->value > 0.0) ? AtomCheckStatus::VerifiedOneHot
                                                        : AtomCheckStatus::Refuted;
        } else if (detail::provably_empty_preimage(atoms[m].a, c)) {
            check.status = AtomCheckStatus::VerifiedEmpty;
        } else if (detail::probe_nonempty(atoms[m].a, c, n_probe, derive_seed(seed, 0xbad0 + m))) {
            check.status = AtomCheckStatus::Refuted;
        } else {
            check.status = AtomCheckStatus::Inconclusive;
        }
        exp.refined_valid &= check.status == AtomCheckStatus::VerifiedEmpty ||
                             check.status == AtomCheckStatus::VerifiedOneHot;
        exp.checks.push_back(check);
    }
    return exp;
}

// The standalone hypothesis diagnostic: per-atom emptiness verdicts for all
// atoms ranked below the resolved order.
inline std::vector<AtomCheck> iota_check(const MarginalModel& model, const MatrixLaw& law,
                                         const RiskSet& c, int k, std::uint64_t n_mc = 200000,
                                         std::uint64_t seed = 1, int threads = 1) {
    return expansion(model, law, c, k, n_mc, seed, threads).checks;
}

// The dominant term (exponent, coefficient) at the resolved order.
inline std::pair<double, double> leading_order(const TailExpansion& exp) {
    if (exp.all_zero)
        throw validation_error("leading_order: no resolvable order, all coefficients are zero");
    for (const ExpansionTerm& term : exp.terms)
        if (term.i == exp.iota_bar) return {term.exponent, term.coefficient};
    throw validation_error("leading_order: malformed expansion");
}

struct EvalPair {
    double full = 0.0;
    double leading = 0.0;
};

// Evaluates the expansion at threshold t, clamped into [0,1].
inline EvalPair evaluate(const TailExpansion& exp, double t) {
    if (!(t > 0.0)) throw validation_error("evaluate: t must be positive");
    auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : v > 1.0 ? 1.0 : v; };
    EvalPair out;
    double full = 0.0;
    for (const ExpansionTerm& term : exp.terms)
        full += term.coefficient * std::pow(t, -term.exponent);
    out.full = clamp01(full);
    if (!exp.all_zero)
        for (const ExpansionTerm& term : exp.terms)
            if (term.i == exp.iota_bar)
                out.leading = clamp01(term.coefficient * std::pow(t, -term.exponent));
    return out;
}

}  // namespace heavytail
