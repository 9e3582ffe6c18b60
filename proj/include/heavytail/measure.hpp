#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/common.hpp"
#include "heavytail/margins.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/risksets.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/tau.hpp"

namespace heavytail {

// Minimum Monte Carlo sample count per measure component.
constexpr std::uint64_t kMinSamplesPerComponent = 10000;

// One summand of a limit measure: on the coordinate hyperplane spanned by
// `coords`, mass of the rectangle {z_j > u_j} is weight * prod u_j^(-alpha*emul_j).
struct MeasureComponent {
    std::vector<int> coords;
    Rat weight;
    std::vector<int> emul;
};

struct LimitMeasure {
    int i = 1;
    MarginalModel model;
    std::vector<MeasureComponent> components;
};

// The order-i limit measure of the marginal model, concentrated on the union
// of i-dimensional coordinate hyperplanes.
inline LimitMeasure limit_measure(const MarginalModel& model, int i) {
    int d = model.dim();
    if (i < 1 || i > d) throw validation_error("limit_measure: order out of range");
    order_stat_tail(model, i);  // rejects unsupported dependence parameters
    LimitMeasure mu;
    mu.i = i;
    mu.model = model;
    if (model.kind == MarginKind::DependentPareto && i == 3) {
        // Mass of a rectangle: sum over the doubled coordinate c of
        // (kappa_c / e1) * u_c^(-2 alpha) * prod_{j != c} u_j^(-alpha).
        Rat e1 = 0;
        for (const Rat& k : model.kappa) e1 += k;
        for (int c = 0; c < 3; ++c) {
            MeasureComponent comp;
            comp.coords = {0, 1, 2};
            comp.weight = model.kappa[c] / e1;
            comp.emul = {1, 1, 1};
            comp.emul[c] = 2;
            mu.components.push_back(std::move(comp));
        }
        return mu;
    }
    // Independent form: one component per i-subset with weight prod kappa / e_i.
    std::vector<Rat> e = kappa_subset_sums(model.kappa);
    for_each_subset(d, i, i, [&](const std::vector<int>& J) {
        MeasureComponent comp;
        comp.coords = J;
        comp.weight = 1;
        for (int j : J) comp.weight *= mu.model.kappa[j];
        comp.weight /= e[i];
        comp.emul.assign(J.size(), 1);
        mu.components.push_back(std::move(comp));
    });
    return mu;
}

// Exact mass of {z_j > u_j for j in J}; requires |J| = i and integer alpha.
inline Rat mu_rect_exact(const LimitMeasure& mu, const std::vector<int>& J,
                         const std::vector<Rat>& u) {
    if (static_cast<int>(J.size()) != mu.i)
        throw validation_error("mu_rect_exact: coordinate set size must equal the measure order");
    if (u.size() != J.size()) throw validation_error("mu_rect_exact: threshold count mismatch");
    if (!mu.model.alpha_integral())
        throw validation_error("mu_rect_exact: requires an integer tail index");
    for (const Rat& v : u)
        if (v <= 0) throw validation_error("mu_rect_exact: thresholds must be positive");
    long a = mu.model.alpha_int();
    Rat total = 0;
    for (const MeasureComponent& comp : mu.components) {
        if (comp.coords != J) continue;
        Rat mass = comp.weight;
        for (std::size_t t = 0; t < J.size(); ++t) mass *= pow_int(u[t], -a * comp.emul[t]);
        total += mass;
    }
    return total;
}

inline double mu_rect(const LimitMeasure& mu, const std::vector<int>& J,
                      const std::vector<double>& u) {
    if (static_cast<int>(J.size()) != mu.i)
        throw validation_error("mu_rect: coordinate set size must equal the measure order");
    if (u.size() != J.size()) throw validation_error("mu_rect: threshold count mismatch");
    for (double v : u)
        if (!(v > 0.0)) throw validation_error("mu_rect: thresholds must be positive");
    double a = mu.model.alpha;
    double total = 0.0;
    for (const MeasureComponent& comp : mu.components) {
        if (comp.coords != J) continue;
        double mass = to_double(comp.weight);
        for (std::size_t t = 0; t < J.size(); ++t) mass *= std::pow(u[t], -a * comp.emul[t]);
        total += mass;
    }
    return total;
}

// Result of a preimage-mass computation; exact when the analytic path applies
// and the tail index is an integer.
struct MassEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n = 0;
    bool exact = false;
    Rat value_exact = 0;
    std::string method;
};

namespace detail {

inline void check_preimage_args(const LimitMeasure& mu, const Matrix& a, const RiskSet& c) {
    if (a.d != mu.model.dim())
        throw validation_error("preimage: matrix column count must match the marginal dimension");
    if (a.q != c.q) throw validation_error("preimage: matrix row count must match the risk set");
}

}  // namespace detail

// Monte Carlo estimate of mu(A^-1(C)) by a change of measure on each
// component: the preimage lies inside {z_j > delta} with
// delta = delta(C)/tau, so conditional Pareto draws there are unbiased.
inline MassEstimate mu_set_mc(const LimitMeasure& mu, const Matrix& a, const RiskSet& c,
                              std::uint64_t n, std::uint64_t seed, int threads = 1) {
    detail::check_preimage_args(mu, a, c);
    TauValue tau = tau_matrix(a, c.k, mu.i);
    if (!tau.is_finite())
        throw validation_error("mu_set_mc: the preimage has an unbounded support cone");
    double dc = delta(c);
    if (!(dc > 0.0)) throw validation_error("mu_set_mc: risk set threshold level must be positive");
    std::uint64_t per = n / mu.components.size();
    if (per < kMinSamplesPerComponent)
        throw validation_error("mu_set_mc: fewer than 10000 samples per measure component");

    double alpha = mu.model.alpha;
    // Slightly below the sharp bound so boundary points stay inside the
    // sampling region despite rounding.
    double dshift = dc / tau.value() * (1.0 - 1e-9);

    MassEstimate est;
    est.method = "mc";
    est.n = per * mu.components.size();
    double var = 0.0;
    for (std::size_t ci = 0; ci < mu.components.size(); ++ci) {
        const MeasureComponent& comp = mu.components[ci];
        int esum = 0;
        for (int e : comp.emul) esum += e;
        double pref = to_double(comp.weight) * std::pow(dshift, -alpha * esum);
        std::uint64_t hits = run_chunks<std::uint64_t>(
            per, derive_seed(seed, 0xc0390000u + static_cast<std::uint64_t>(ci)), threads,
            [&](Rng& rng, std::uint64_t count) {
                std::uint64_t h = 0;
                std::vector<double> z(a.d, 0.0);
                for (std::uint64_t s = 0; s < count; ++s) {
                    for (std::size_t t = 0; t < comp.coords.size(); ++t) {
                        double u = rng.u01_open_closed();
                        z[comp.coords[t]] = dshift * std::pow(u, -1.0 / (alpha * comp.emul[t]));
                    }
                    if (contains(c, matvec(a, z))) ++h;
                    for (int j : comp.coords) z[j] = 0.0;
                }
                return h;
            },
            [](std::uint64_t acc, std::uint64_t part) { return acc + part; }, std::uint64_t{0});
        double phat = static_cast<double>(hits) / static_cast<double>(per);
        est.value += pref * phat;
        var += pref * pref * phat * (1.0 - phat) / static_cast<double>(per);
    }
    est.stderr_ = std::sqrt(var);
    return est;
}

namespace detail {

// Reduces A^-1(C) on the hyperplane of `coords` to a union of full-dimensional
// rectangles, when every clause row is either pinned to one coordinate or
// implied by the pinned thresholds. Returns nullopt when a clause genuinely
// needs a halfspace, which sends the caller to Monte Carlo.
inline std::optional<std::vector<std::vector<Rat>>> reduce_clauses_to_rects(
    const Mat<Rat>& a, const RiskSet& c, const std::vector<int>& coords) {
    std::vector<std::vector<Rat>> rects;
    for (const RectClause& clause : c.rects) {
        std::vector<Rat> t(coords.size(), Rat(0));
        std::vector<std::pair<int, Rat>> deferred;  // rows acting on several coordinates
        bool feasible = true;
        for (std::size_t ri = 0; ri < clause.coords.size() && feasible; ++ri) {
            int r = clause.coords[ri];
            const Rat& gamma = clause.thresholds[ri];
            int support = -1;
            int count = 0;
            for (std::size_t j = 0; j < coords.size(); ++j)
                if (a(r, coords[j]) > 0) {
                    support = static_cast<int>(j);
                    ++count;
                }
            if (count == 0) {
                feasible = false;  // row is identically zero here, threshold positive
            } else if (count == 1) {
                Rat lo = gamma / a(r, coords[support]);
                if (lo > t[support]) t[support] = lo;
            } else {
                deferred.emplace_back(r, gamma);
            }
        }
        if (!feasible) continue;
        for (const auto& [r, gamma] : deferred) {
            Rat reach = 0;
            for (std::size_t j = 0; j < coords.size(); ++j) reach += a(r, coords[j]) * t[j];
            if (reach < gamma) return std::nullopt;
        }
        for (const Rat& v : t)
            if (v == 0) return std::nullopt;  // unbounded rectangle; cone must be checked first
        bool dup = false;
        for (const auto& prev : rects) dup |= prev == t;
        if (!dup) rects.push_back(std::move(t));
    }
    if (rects.size() > static_cast<std::size_t>(kMaxRectClauses)) return std::nullopt;
    return rects;
}

// Exact measure of a finite union of full-dimensional rectangles on one
// hyperplane, by inclusion-exclusion; alpha must be an integer for Rat output.
template <typename S>
inline S union_mass_on_hyperplane(const LimitMeasure& mu, const std::vector<int>& coords,
                                  const std::vector<std::vector<Rat>>& rects) {
    S total = S(0);
    if (rects.empty()) return total;
    std::size_t m = rects.size();
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<Rat> u(coords.size(), Rat(0));
        int bits = 0;
        for (std::size_t r = 0; r < m; ++r)
            if (mask & (1u << r)) {
                ++bits;
                for (std::size_t j = 0; j < coords.size(); ++j)
                    if (rects[r][j] > u[j]) u[j] = rects[r][j];
            }
        S mass = S(0);
        for (const MeasureComponent& comp : mu.components) {
            if (comp.coords != coords) continue;
            if constexpr (std::is_same_v<S, Rat>) {
                Rat part = comp.weight;
                long a = mu.model.alpha_int();
                for (std::size_t j = 0; j < coords.size(); ++j)
                    part *= pow_int(u[j], -a * comp.emul[j]);
                mass += part;
            } else {
                double part = to_double(comp.weight);
                for (std::size_t j = 0; j < coords.size(); ++j)
                    part *= std::pow(to_double(u[j]), -mu.model.alpha * comp.emul[j]);
                mass += part;
            }
        }
        if (bits % 2 == 1)
            total += mass;
        else
            total -= mass;
    }
    return total;
}

// One halfspace clause pulled back to a coordinate hyperplane: per-coordinate
// lower thresholds plus at most one ratio bound z_winner > ratio * z_loser.
struct PulledWedge {
    bool infeasible = false;
    std::vector<Rat> thr;  // by plane-coordinate position; 0 = unconstrained
    int winner = -1;
    int loser = -1;
    Rat ratio = 0;
};

// Restricts every constraint of the clause to the hyperplane spanned by
// `coords` (all other coordinates zero). Returns nullopt when a constraint
// falls outside the threshold/ratio normal forms this reduction integrates.
inline std::optional<PulledWedge> pull_back_halfspaces(const Mat<Rat>& a,
                                                       const HalfspaceClause& clause,
                                                       const std::vector<int>& coords) {
    PulledWedge w;
    w.thr.assign(coords.size(), Rat(0));
    for (std::size_t r = 0; r < clause.normals.size(); ++r) {
        std::vector<Rat> coef(coords.size(), Rat(0));
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            Rat s = 0;
            for (int row = 0; row < a.q; ++row) s += clause.normals[r][row] * a(row, coords[j]);
            coef[j] = s;
            if (s != 0) nz.push_back(j);
        }
        const Rat& b = clause.offsets[r];
        if (nz.empty()) {
            if (b >= 0) {
                w.infeasible = true;
                return w;
            }
            continue;
        }
        if (nz.size() == 1) {
            std::size_t j = nz[0];
            if (coef[j] > 0) {
                if (b > 0) {
                    Rat lo = b / coef[j];
                    if (lo > w.thr[j]) w.thr[j] = lo;
                }
                continue;  // b <= 0 holds everywhere on the open plane
            }
            if (b >= 0) {
                w.infeasible = true;
                return w;
            }
            return std::nullopt;  // genuine upper bound: outside the normal form
        }
        if (nz.size() == 2 && b == 0) {
            std::size_t p = nz[0], s = nz[1];
            bool pp = coef[p] > 0, sp = coef[s] > 0;
            if (pp && sp) continue;  // positive combination, holds a.e.
            if (!pp && !sp) {
                w.infeasible = true;
                return w;
            }
            int win = static_cast<int>(pp ? p : s);
            int los = static_cast<int>(pp ? s : p);
            Rat ratio = Rat(-coef[los] / coef[win]);
            if (w.winner == -1) {
                w.winner = win;
                w.loser = los;
                w.ratio = ratio;
            } else if (w.winner == win && w.loser == los) {
                if (ratio > w.ratio) w.ratio = ratio;
            } else if (w.winner == los && w.loser == win) {
                if (w.ratio * ratio >= 1) {
                    w.infeasible = true;
                    return w;
                }
                return std::nullopt;  // two-sided sector, not integrated here
            } else {
                return std::nullopt;  // ratio chain across three coordinates
            }
            continue;
        }
        bool all_pos = true;
        for (std::size_t j : nz) all_pos &= coef[j] > 0;
        if (all_pos && b <= 0) continue;
        return std::nullopt;
    }
    return w;
}

// Component mass of a pulled-back wedge region: product of threshold factors
// with one pair integrated against the ratio bound. The loser threshold (and
// every unpaired threshold) must be positive or the mass diverges; the caller
// screens for that before calling.
template <typename S>
inline S wedge_mass_on_hyperplane(const LimitMeasure& mu, const std::vector<int>& coords,
                                  const PulledWedge& w) {
    S total = S(0);
    if (w.infeasible) return total;
    for (const MeasureComponent& comp : mu.components) {
        if (comp.coords != coords) continue;
        if constexpr (std::is_same_v<S, Rat>) {
            long a = mu.model.alpha_int();
            Rat part = comp.weight;
            for (std::size_t j = 0; j < coords.size(); ++j)
                if (static_cast<int>(j) != w.winner && static_cast<int>(j) != w.loser)
                    part *= pow_int(w.thr[j], -a * comp.emul[j]);
            if (w.winner >= 0) {
                long mw = a * comp.emul[w.winner];
                long ml = a * comp.emul[w.loser];
                const Rat& u = w.thr[w.loser];
                const Rat& v = w.thr[w.winner];
                Rat share(ml, ml + mw);
                if (v <= w.ratio * u) {
                    part *= pow_int(w.ratio, -mw) * share * pow_int(u, -(ml + mw));
                } else {
                    Rat zs = Rat(v / w.ratio);
                    part *= pow_int(v, -mw) * (pow_int(u, -ml) - pow_int(zs, -ml)) +
                            pow_int(w.ratio, -mw) * share * pow_int(zs, -(ml + mw));
                }
            }
            total += part;
        } else {
            double alpha = mu.model.alpha;
            double part = to_double(comp.weight);
            for (std::size_t j = 0; j < coords.size(); ++j)
                if (static_cast<int>(j) != w.winner && static_cast<int>(j) != w.loser)
                    part *= std::pow(to_double(w.thr[j]), -alpha * comp.emul[j]);
            if (w.winner >= 0) {
                double mw = alpha * comp.emul[w.winner];
                double ml = alpha * comp.emul[w.loser];
                double u = to_double(w.thr[w.loser]);
                double v = to_double(w.thr[w.winner]);
                double r = to_double(w.ratio);
                double share = ml / (ml + mw);
                if (v <= r * u) {
                    part *= std::pow(r, -mw) * share * std::pow(u, -(ml + mw));
                } else {
                    double zs = v / r;
                    part *= std::pow(v, -mw) * (std::pow(u, -ml) - std::pow(zs, -ml)) +
                            std::pow(r, -mw) * share * std::pow(zs, -(ml + mw));
                }
            }
            total += part;
        }
    }
    return total;
}

}  // namespace detail

// Attempts the exact preimage mass. Rectangle unions reduce clause by clause;
// a single halfspace clause reduces when its pullback is thresholds plus at
// most one ratio bound per hyperplane. nullopt when some clause resists.
inline std::optional<MassEstimate> mu_preimage_analytic(const LimitMeasure& mu, const Matrix& a,
                                                        const RiskSet& c) {
    detail::check_preimage_args(mu, a, c);
    bool rect_kind = c.kind == RiskSetKind::RectUnion;
    bool single_poly = c.kind == RiskSetKind::HalfspaceUnion && c.halfspaces.size() == 1;
    if (!rect_kind && !single_poly) return std::nullopt;
    TauValue tau = tau_matrix(a, c.k, mu.i);
    if (!tau.is_finite()) {
        if (rect_kind)
            throw validation_error("mu_preimage: the preimage has an unbounded support cone");
        return std::nullopt;
    }
    Mat<Rat> ar(a.q, a.d);
    for (std::size_t t = 0; t < a.a.size(); ++t) ar.a[t] = rational_from_double(a.a[t]);

    std::vector<std::vector<int>> planes;
    for (const MeasureComponent& comp : mu.components) {
        bool seen = false;
        for (const auto& p : planes) seen |= p == comp.coords;
        if (!seen) planes.push_back(comp.coords);
    }
    MassEstimate est;
    est.method = "analytic";
    est.exact = mu.model.alpha_integral();
    for (const std::vector<int>& coords : planes) {
        if (rect_kind) {
            auto rects = detail::reduce_clauses_to_rects(ar, c, coords);
            if (!rects) return std::nullopt;
            if (est.exact)
                est.value_exact += detail::union_mass_on_hyperplane<Rat>(mu, coords, *rects);
            else
                est.value += detail::union_mass_on_hyperplane<double>(mu, coords, *rects);
        } else {
            auto wedge = detail::pull_back_halfspaces(ar, c.halfspaces[0], coords);
            if (!wedge) return std::nullopt;
            if (!wedge->infeasible)
                for (std::size_t j = 0; j < coords.size(); ++j)
                    if (static_cast<int>(j) != wedge->winner && wedge->thr[j] == 0)
                        return std::nullopt;  // unconstrained direction, mass diverges
            if (est.exact)
                est.value_exact += detail::wedge_mass_on_hyperplane<Rat>(mu, coords, *wedge);
            else
                est.value += detail::wedge_mass_on_hyperplane<double>(mu, coords, *wedge);
        }
    }
    if (est.exact) est.value = to_double(est.value_exact);
    return est;
}

// Preimage mass mu(A^-1(C)): exact reduction when it applies, Monte Carlo
// change of measure otherwise.
inline MassEstimate mu_preimage(const LimitMeasure& mu, const Matrix& a, const RiskSet& c,
                                std::uint64_t n, std::uint64_t seed, int threads = 1) {
    std::optional<MassEstimate> exact = mu_preimage_analytic(mu, a, c);
    if (exact) return *exact;
    return mu_set_mc(mu, a, c, n, seed, threads);
}

}  // namespace heavytail
