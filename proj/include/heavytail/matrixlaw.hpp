#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/tau.hpp"

namespace heavytail {

// Enumeration beyond this atom count must go through the sampling paths.
constexpr std::uint64_t kMaxAtoms = 1000000;

struct MatrixAtom {
    Matrix a;
    Rat prob;
};

enum class MatrixLawKind { Explicit, OneHotUniform, BernoulliGraph };
enum class ExclusionRule { None, OwnIndex, Window };

// A finitely-supported distribution over non-negative q x d matrices with no
// all-zero rows. Probabilities are exact rationals end-to-end.
struct MatrixLaw {
    MatrixLawKind kind = MatrixLawKind::Explicit;
    int q = 0;
    int d = 0;

    std::vector<MatrixAtom> atoms;  // Explicit

    ExclusionRule exclusion = ExclusionRule::None;  // OneHotUniform
    int window = 0;                                 // Window(m) width
    Mat<Rat> weights;                               // entry placed at the chosen column
    bool unit_weights = true;

    Mat<Rat> bern_p;  // BernoulliGraph: connection probabilities
    Mat<Rat> bern_w;  // BernoulliGraph: weights on present edges
};

// Structured validation outcome; never throws for content problems.
struct LawReport {
    bool ok = true;
    std::vector<std::string> failures;
    std::string moment_status;
    Rat conditioning_prob = 1;  // BernoulliGraph: P(no trivial row) before conditioning
};

namespace detail {

inline std::vector<std::vector<int>> allowed_columns(const MatrixLaw& law) {
    std::vector<std::vector<int>> allowed(law.q);
    for (int r = 0; r < law.q; ++r)
        for (int c = 0; c < law.d; ++c) {
            bool excluded = false;
            if (law.exclusion == ExclusionRule::OwnIndex) excluded = r < law.d && c == r;
            if (law.exclusion == ExclusionRule::Window) {
                int off = (c - r + law.d) % law.d;
                excluded = off < law.window;
            }
            if (!excluded) allowed[r].push_back(c);
        }
    return allowed;
}

}  // namespace detail

inline MatrixLaw explicit_law(std::vector<MatrixAtom> atoms) {
    if (atoms.empty()) throw validation_error("explicit_law: no atoms");
    MatrixLaw law;
    law.kind = MatrixLawKind::Explicit;
    law.q = atoms[0].a.q;
    law.d = atoms[0].a.d;
    for (const MatrixAtom& at : atoms) {
        if (at.a.q != law.q || at.a.d != law.d)
            throw validation_error("explicit_law: inconsistent atom dimensions");
        if (at.prob < 0) throw validation_error("explicit_law: negative probability");
    }
    law.atoms = std::move(atoms);
    return law;
}

inline MatrixLaw point_mass(Matrix a) {
    return explicit_law({MatrixAtom{std::move(a), Rat(1)}});
}

// Each row independently places one positive entry, uniformly over its allowed
// columns. OwnIndex: row r < d may not choose column r. Window(m): q = d and
// row r may not choose the cyclic block {r, ..., r+m-1}.
inline MatrixLaw onehot_law(int q, int d, ExclusionRule rule, int window = 0,
                            Mat<Rat> weights = {}) {
    if (q < 1 || d < 1) throw validation_error("onehot_law: dimensions must be positive");
    if (rule == ExclusionRule::OwnIndex && (d < 2 || q < d))
        throw validation_error("onehot_law: OwnIndex requires q >= d >= 2");
    if (rule == ExclusionRule::Window) {
        if (q != d) throw validation_error("onehot_law: Window requires q = d");
        if (window < 1 || window > d - 1)
            throw validation_error("onehot_law: Window width must be in [1, d-1]");
    }
    MatrixLaw law;
    law.kind = MatrixLawKind::OneHotUniform;
    law.q = q;
    law.d = d;
    law.exclusion = rule;
    law.window = rule == ExclusionRule::Window ? window : 0;
    if (weights.q == 0) {
        law.unit_weights = true;
        law.weights = Mat<Rat>(q, d);
        for (Rat& w : law.weights.a) w = 1;
    } else {
        if (weights.q != q || weights.d != d)
            throw validation_error("onehot_law: weight matrix dimension mismatch");
        for (const Rat& w : weights.a)
            if (w <= 0) throw validation_error("onehot_law: weights must be positive");
        law.unit_weights = false;
        law.weights = std::move(weights);
    }
    return law;
}

// Independent edges: entry (r, c) equals w_rc with probability p_rc, else 0;
// conditioned on no trivial row.
inline MatrixLaw bernoulli_law(Mat<Rat> p, Mat<Rat> w) {
    if (p.q < 1 || p.d < 1) throw validation_error("bernoulli_law: dimensions must be positive");
    if (w.q != p.q || w.d != p.d) throw validation_error("bernoulli_law: p/w dimension mismatch");
    for (const Rat& v : p.a)
        if (v < 0 || v > 1) throw validation_error("bernoulli_law: probabilities must be in [0,1]");
    for (std::size_t i = 0; i < w.a.size(); ++i)
        if (p.a[i] > 0 && w.a[i] <= 0)
            throw validation_error("bernoulli_law: weights on possible edges must be positive");
    for (int r = 0; r < p.q; ++r) {
        bool possible = false;
        for (int c = 0; c < p.d; ++c) possible |= p(r, c) > 0;
        if (!possible) throw validation_error("bernoulli_law: a row has no possible edges");
    }
    MatrixLaw law;
    law.kind = MatrixLawKind::BernoulliGraph;
    law.q = p.q;
    law.d = p.d;
    law.bern_p = std::move(p);
    law.bern_w = std::move(w);
    return law;
}

// Exact support enumeration. Throws capacity_error when the atom count exceeds
// the cap; callers should fall back to sampling.
inline std::vector<MatrixAtom> enumerate_support(const MatrixLaw& law) {
    if (law.kind == MatrixLawKind::Explicit) return law.atoms;
    if (law.kind == MatrixLawKind::OneHotUniform) {
        std::vector<std::vector<int>> allowed = detail::allowed_columns(law);
        std::uint64_t count = 1;
        for (const auto& cols : allowed) {
            count *= cols.size();
            if (count > kMaxAtoms)
                throw capacity_error("enumerate_support: atom count exceeds cap; use sampling paths");
        }
        std::vector<MatrixAtom> out;
        out.reserve(count);
        std::vector<std::size_t> pick(law.q, 0);
        Rat prob = 1;
        for (const auto& cols : allowed) prob /= Rat(static_cast<long>(cols.size()));
        while (true) {
            Matrix a(law.q, law.d);
            for (int r = 0; r < law.q; ++r) {
                int c = allowed[r][pick[r]];
                a(r, c) = to_double(law.weights(r, c));
            }
            out.push_back(MatrixAtom{std::move(a), prob});
            int r = law.q - 1;
            while (r >= 0 && ++pick[r] == allowed[r].size()) pick[r--] = 0;
            if (r < 0) break;
        }
        return out;
    }
    // BernoulliGraph: all edge masks, trivial-row masks dropped, renormalized.
    int cells = law.q * law.d;
    if (cells > 20)
        throw capacity_error("enumerate_support: 2^(q*d) exceeds cap; use sampling paths");
    std::vector<MatrixAtom> out;
    Rat kept_total = 0;
    for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
        Rat prob = 1;
        Matrix a(law.q, law.d);
        bool possible = true;
        for (int idx = 0; idx < cells && possible; ++idx) {
            const Rat& p = law.bern_p.a[idx];
            if (mask & (1u << idx)) {
                prob *= p;
                a.a[idx] = to_double(law.bern_w.a[idx]);
            } else {
                prob *= 1 - p;
            }
            possible = prob != 0;
        }
        if (!possible) continue;
        bool trivial = false;
        for (int r = 0; r < law.q && !trivial; ++r) {
            bool any = false;
            for (int c = 0; c < law.d; ++c) any |= a(r, c) > 0.0;
            trivial = !any;
        }
        if (trivial) continue;
        kept_total += prob;
        out.push_back(MatrixAtom{std::move(a), prob});
    }
    if (out.empty()) throw validation_error("enumerate_support: conditioning event has probability 0");
    for (MatrixAtom& at : out) at.prob /= kept_total;
    return out;
}

// One draw from the law. BernoulliGraph rejects trivial-row outcomes.
inline Matrix sample_matrix(const MatrixLaw& law, Rng& rng) {
    if (law.kind == MatrixLawKind::Explicit) {
        double u = rng.u01_half_open();
        double acc = 0.0;
        for (const MatrixAtom& at : law.atoms) {
            acc += to_double(at.prob);
            if (u < acc) return at.a;
        }
        return law.atoms.back().a;
    }
    if (law.kind == MatrixLawKind::OneHotUniform) {
        std::vector<std::vector<int>> allowed = detail::allowed_columns(law);
        Matrix a(law.q, law.d);
        for (int r = 0; r < law.q; ++r) {
            int c = allowed[r][rng.next_u64() % allowed[r].size()];
            a(r, c) = to_double(law.weights(r, c));
        }
        return a;
    }
    std::vector<double> p(law.bern_p.a.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = to_double(law.bern_p.a[i]);
    while (true) {
        Matrix a(law.q, law.d);
        for (std::size_t i = 0; i < p.size(); ++i)
            if (rng.u01_half_open() < p[i]) a.a[i] = to_double(law.bern_w.a[i]);
        bool trivial = false;
        for (int r = 0; r < law.q && !trivial; ++r) {
            bool any = false;
            for (int c = 0; c < law.d; ++c) any |= a(r, c) > 0.0;
            trivial = !any;
        }
        if (!trivial) return a;
    }
}

// Masses of the critical-index partition at level k: masses[i] = P(i_k(A) = i).
struct PartitionReport {
    int k = 1;
    std::vector<Rat> masses;         // index 0 unused; 1..d
    std::vector<double> stderrs;     // sampled path only
    bool exact = true;
    int i_star = 0;                  // smallest i with positive mass
    std::vector<int> per_atom_ik;    // enumeration order; empty on sampled path
};

inline PartitionReport partition(const MatrixLaw& law, int k, std::uint64_t sample_fallback = 100000,
                                 std::uint64_t seed = 0x9a2770) {
    if (k < 1 || k > law.q) throw validation_error("partition: k out of range");
    PartitionReport rep;
    rep.k = k;
    rep.masses.assign(law.d + 1, Rat(0));
    try {
        std::vector<MatrixAtom> atoms = enumerate_support(law);
        for (const MatrixAtom& at : atoms) {
            int ik = critical_index(at.a, k).first;
            rep.per_atom_ik.push_back(ik);
            rep.masses[ik] += at.prob;
        }
        rep.exact = true;
    } catch (const capacity_error&) {
        rep.exact = false;
        rep.stderrs.assign(law.d + 1, 0.0);
        std::vector<std::uint64_t> counts(law.d + 1, 0);
        Rng rng(seed);
        for (std::uint64_t s = 0; s < sample_fallback; ++s) {
            Matrix a = sample_matrix(law, rng);
            ++counts[critical_index(a, k).first];
        }
        for (int i = 1; i <= law.d; ++i) {
            double phat = static_cast<double>(counts[i]) / static_cast<double>(sample_fallback);
            rep.masses[i] = rational_from_double(phat);
            rep.stderrs[i] = std::sqrt(phat * (1.0 - phat) / static_cast<double>(sample_fallback));
        }
    }
    for (int i = 1; i <= law.d; ++i)
        if (rep.masses[i] > 0) {
            rep.i_star = i;
            break;
        }
    return rep;
}

// Structured checks: normalization, weight positivity, trivial rows, and the
// finiteness status of the tau moment (automatic for finite support).
inline LawReport validate(const MatrixLaw& law) {
    LawReport rep;
    if (law.kind == MatrixLawKind::Explicit) {
        Rat total = 0;
        for (const MatrixAtom& at : law.atoms) total += at.prob;
        Rat gap = total - 1;
        if (gap < 0) gap = -gap;
        if (gap > Rat(1, 1000000000000LL)) {
            rep.ok = false;
            rep.failures.push_back("probabilities sum to " + rational_str(total) + ", not 1");
        }
        for (const MatrixAtom& at : law.atoms)
            for (int r = 0; r < at.a.q; ++r) {
                bool any = false;
                for (int c = 0; c < at.a.d; ++c) {
                    if (at.a(r, c) < 0.0) {
                        rep.ok = false;
                        rep.failures.push_back("negative entry in an atom");
                    }
                    any |= at.a(r, c) > 0.0;
                }
                if (!any && at.prob > 0) {
                    rep.ok = false;
                    rep.failures.push_back("atom with positive probability has a trivial row");
                }
            }
        rep.moment_status = "finite (finite support)";
        return rep;
    }
    if (law.kind == MatrixLawKind::BernoulliGraph) {
        for (int r = 0; r < law.q; ++r) {
            bool possible = false;
            for (int c = 0; c < law.d; ++c) possible |= law.bern_p(r, c) > 0;
            if (!possible) {
                rep.ok = false;
                rep.failures.push_back("row " + std::to_string(r) + " has no possible edges");
            }
        }
        // P(no trivial row) = prod_r (1 - prod_c (1 - p_rc)).
        Rat cond = 1;
        for (int r = 0; r < law.q; ++r) {
            Rat none = 1;
            for (int c = 0; c < law.d; ++c) none *= 1 - law.bern_p(r, c);
            cond *= 1 - none;
        }
        rep.conditioning_prob = cond;
        if (cond == 0 && rep.ok) {
            rep.ok = false;
            rep.failures.push_back("conditioning event (no trivial row) has probability 0");
        }
        rep.moment_status = "finite (finite support)";
        return rep;
    }
    rep.moment_status = "finite (finite support)";
    return rep;
}

}  // namespace heavytail
