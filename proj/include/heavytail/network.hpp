#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "heavytail/asymptotics.hpp"
#include "heavytail/common.hpp"
#include "heavytail/margins.hpp"
#include "heavytail/matrixlaw.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/risksets.hpp"

namespace heavytail {

// Agents exposed to heavy-tailed object risks through a (possibly random)
// weighted adjacency matrix: exposures are X = AZ.
struct NetworkModel {
    int q = 0;
    int d = 0;
    MatrixLaw law;
    MarginalModel margins;
};

inline NetworkModel network_model(MatrixLaw law, MarginalModel margins) {
    if (law.q < 1 || law.d < 1) throw validation_error("network_model: need q >= 1 and d >= 1");
    if (law.d != margins.dim())
        throw validation_error("network_model: law columns must match the marginal dimension");
    NetworkModel nm;
    nm.q = law.q;
    nm.d = law.d;
    nm.law = std::move(law);
    nm.margins = std::move(margins);
    return nm;
}

// Exact probability that a fixed i-column subset is exactly the set of columns
// used, under the own-index one-hot family (rows 1..d exclude their own column,
// rows d+1..q are uniform over all d columns).
inline Rat delta_coeff(int q, int d, int i) {
    if (!(2 <= i && i <= d && d <= q))
        throw validation_error("delta_coeff: need 2 <= i <= d <= q");
    if (d < 2) throw validation_error("delta_coeff: need d >= 2");
    Rat first = pow_int(Rat(i - 1, d - 1), i) * pow_int(Rat(i, d - 1), d - i) *
                pow_int(Rat(i, d), q - d);
    Rat second = Rat(i) * pow_int(Rat(i - 2, d - 1), i - 1) *
                 pow_int(Rat(i - 1, d - 1), d + 1 - i) * pow_int(Rat(i - 1, d), q - d);
    return first - second;
}

// Closed-form cumulative column-usage value for the cyclic-window one-hot
// family (row k excludes the m cyclically consecutive columns starting at k).
// Equals P(all rows land inside a fixed cyclic block of i consecutive columns)
// whenever i + m - 1 <= d; outside that range the display no longer tracks a
// probability, and callers relying on it must consult window_mass_report.
inline Rat q_coeff(int d, int m, int i) {
    if (!(1 <= m && m <= d - 1)) throw validation_error("q_coeff: need 1 <= m <= d-1");
    if (!(m + 1 <= i && i <= d)) throw validation_error("q_coeff: need m+1 <= i <= d");
    Rat num = pow_int(Rat(i), d - (i + m - 1)) * pow_int(Rat(i - m), i - m + 1);
    for (int l = 1; l <= m - 1; ++l) num *= Rat(i - l) * Rat(i - l);
    return num / pow_int(Rat(d - m), d);
}

// Closed-form constant tables for the two one-hot families.
struct ClosedFormConstants {
    std::map<int, Rat> delta;                  // i -> per-subset mass, own-index family
    std::map<std::pair<int, int>, Rat> qim;    // (m, i) -> cumulative window value
};

inline ClosedFormConstants closed_form_constants(int q, int d) {
    ClosedFormConstants out;
    for (int i = 2; i <= d; ++i) out.delta[i] = delta_coeff(q, d, i);
    if (q == d)
        for (int m = 1; m <= d - 1; ++m)
            for (int i = m + 1; i <= d; ++i) out.qim[{m, i}] = q_coeff(d, m, i);
    return out;
}

// One-hot family constructors used by the canned scenarios.
inline MatrixLaw build_onehot_law(int q, int d, ExclusionRule rule, int window = 0) {
    return onehot_law(q, d, rule, window);
}

// D_k = {x : k-th largest coordinate > threshold}, as a union of C(q,k)
// upper rectangles, one per k-subset of agents.
inline RiskSet dk_set(int q, int k, const Rat& threshold) {
    if (threshold <= 0) throw validation_error("dk_set: threshold must be > 0");
    std::vector<RectClause> clauses;
    for_each_subset(q, k, k, [&](const std::vector<int>& J) {
        RectClause c;
        c.coords = J;
        c.thresholds.assign(J.size(), threshold);
        c.thresholds_d.assign(J.size(), to_double(threshold));
        clauses.push_back(std::move(c));
    });
    return rect_union(q, k, std::move(clauses));
}

// Exact enumeration of column-usage masses versus closed-form predictions.
struct SubsetMass {
    std::vector<int> cols;
    Rat mass;       // enumerated P(exactly these columns are used)
    Rat predicted;  // closed-form prediction for this subset
    bool match = false;
};

struct MassReport {
    int q = 0;
    int d = 0;
    int m = 0;  // 0 marks the own-index family
    std::vector<SubsetMass> subsets;
    std::vector<Rat> stratum_mass;       // index i: total mass of atoms using i columns
    std::vector<Rat> stratum_predicted;  // index i: C(d,i) * per-subset prediction
    bool per_subset_match = true;
    std::vector<std::string> notes;
};

namespace detail {

// Column-usage key of an atom: sorted list of columns with a positive entry.
inline std::vector<int> used_columns(const Matrix& a) {
    std::vector<int> cols;
    for (int c = 0; c < a.d; ++c) {
        bool used = false;
        for (int r = 0; r < a.q; ++r)
            if (a(r, c) > 0.0) used = true;
        if (used) cols.push_back(c);
    }
    return cols;
}

inline std::map<std::vector<int>, Rat> column_usage_masses(const MatrixLaw& law) {
    std::map<std::vector<int>, Rat> masses;
    for (const MatrixAtom& at : enumerate_support(law)) masses[used_columns(at.a)] += at.prob;
    return masses;
}

}  // namespace detail

// Compares enumeration of the own-index family against delta_coeff per subset,
// and adjudicates the two circulating closed forms for the pair-subset mass.
inline MassReport onehot_mass_report(int q, int d) {
    MassReport rep;
    rep.q = q;
    rep.d = d;
    rep.m = 0;
    MatrixLaw law = onehot_law(q, d, ExclusionRule::OwnIndex);
    std::map<std::vector<int>, Rat> enumerated = detail::column_usage_masses(law);

    rep.stratum_mass.assign(d + 1, Rat(0));
    rep.stratum_predicted.assign(d + 1, Rat(0));
    Rat total(0);
    for_each_subset(d, 1, d, [&](const std::vector<int>& J) {
        int i = static_cast<int>(J.size());
        SubsetMass sm;
        sm.cols = J;
        auto it = enumerated.find(J);
        sm.mass = it == enumerated.end() ? Rat(0) : it->second;
        sm.predicted = i >= 2 ? delta_coeff(q, d, i) : Rat(0);
        sm.match = sm.mass == sm.predicted;
        if (!sm.match) rep.per_subset_match = false;
        rep.stratum_mass[i] += sm.mass;
        total += sm.mass;
        if (sm.mass != 0 || sm.predicted != 0) rep.subsets.push_back(std::move(sm));
    });
    for (int i = 2; i <= d; ++i)
        rep.stratum_predicted[i] = Rat(binom(d, i)) * delta_coeff(q, d, i);
    if (total != 1) rep.notes.push_back("warning: enumerated masses do not sum to 1");

    // Two closed forms are plausible for the pair-subset mass; enumeration decides.
    Rat pair_enum(0);
    for (const SubsetMass& sm : rep.subsets)
        if (sm.cols.size() == 2) {
            pair_enum = sm.mass;
            break;
        }
    Rat form_d = pow_int(Rat(2), q - 2) / (pow_int(Rat(d - 1), d) * pow_int(Rat(d), q - d));
    Rat form_q = pow_int(Rat(2), q - 2) / (pow_int(Rat(d - 1), q) * pow_int(Rat(d), q - d));
    rep.notes.push_back("pair-subset mass: enumeration " + rational_str(pair_enum) +
                        "; 2^(q-2)/((d-1)^d d^(q-d)) = " + rational_str(form_d) +
                        (form_d == pair_enum ? " (match)" : " (MISMATCH)") +
                        "; 2^(q-2)/((d-1)^q d^(q-d)) = " + rational_str(form_q) +
                        (form_q == pair_enum ? " (match)" : " (MISMATCH)"));
    return rep;
}

// Compares enumeration of the cyclic-window family against q_coeff differences
// per subset, and records what the closed form actually tracks (the cumulative
// mass of a fixed consecutive block).
inline MassReport window_mass_report(int d, int m) {
    MassReport rep;
    rep.q = d;
    rep.d = d;
    rep.m = m;
    MatrixLaw law = onehot_law(d, d, ExclusionRule::Window, m);
    std::map<std::vector<int>, Rat> enumerated = detail::column_usage_masses(law);

    rep.stratum_mass.assign(d + 1, Rat(0));
    rep.stratum_predicted.assign(d + 1, Rat(0));
    auto diff = [&](int i) {
        if (i < m + 1) return Rat(0);
        Rat hi = q_coeff(d, m, i);
        Rat lo = i - 1 >= m + 1 ? q_coeff(d, m, i - 1) : Rat(0);
        return Rat(hi - lo);
    };
    Rat total(0);
    for_each_subset(d, 1, d, [&](const std::vector<int>& J) {
        int i = static_cast<int>(J.size());
        SubsetMass sm;
        sm.cols = J;
        auto it = enumerated.find(J);
        sm.mass = it == enumerated.end() ? Rat(0) : it->second;
        sm.predicted = diff(i);
        sm.match = sm.mass == sm.predicted;
        if (!sm.match) rep.per_subset_match = false;
        rep.stratum_mass[i] += sm.mass;
        total += sm.mass;
        if (sm.mass != 0 || sm.predicted != 0) rep.subsets.push_back(std::move(sm));
    });
    for (int i = m + 1; i <= d; ++i) rep.stratum_predicted[i] = Rat(binom(d, i)) * diff(i);
    if (total != 1) rep.notes.push_back("warning: enumerated masses do not sum to 1");

    // Smallest observed column-usage size versus the claimed minimum m + 1.
    int observed_min = d;
    for (int i = 1; i <= d; ++i)
        if (rep.stratum_mass[i] > 0) {
            observed_min = i;
            break;
        }
    rep.notes.push_back("smallest column-usage size with positive mass: " +
                        std::to_string(observed_min) + " (closed form assumes " +
                        std::to_string(m + 1) + ")");

    // The display value itself tracks the cumulative mass of a consecutive block.
    for (int i = m + 1; i <= d; ++i) {
        std::vector<int> block(i);
        for (int j = 0; j < i; ++j) block[j] = j;
        Rat cum(0);
        for (const auto& [cols, mass] : enumerated) {
            bool inside = std::includes(block.begin(), block.end(), cols.begin(), cols.end());
            if (inside) cum += mass;
        }
        Rat display = q_coeff(d, m, i);
        rep.notes.push_back("cumulative mass of consecutive block size " + std::to_string(i) +
                            ": enumeration " + rational_str(cum) + "; closed form " +
                            rational_str(display) +
                            (cum == display ? " (match)" : " (MISMATCH)"));
    }
    return rep;
}

// A canned configuration: model, law, named risk sets, and closed-form
// leading-order reference values the engine output is compared against.
struct ExpectedLeading {
    std::string set_name;
    double exponent = 0.0;
    Rat constant = 0;
};

struct NetworkScenario {
    std::string name;
    MarginalModel margins;
    MatrixLaw law;
    std::vector<std::string> set_names;
    std::vector<RiskSet> sets;
    std::vector<ExpectedLeading> expected;
};

namespace detail {

// The three row types an investor can take: both products, first only, second only.
inline MatrixLaw investor_law(std::vector<Rat> weights) {
    const double kRows[3][2] = {{1, 1}, {1, 0}, {0, 1}};
    // Row-type index per matrix, in the reference ordering (0 = both, 1 = first, 2 = second).
    static const int kOrder[27][3] = {
        {0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {0, 2, 2},
        {2, 0, 2}, {2, 2, 0}, {0, 0, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 2}, {2, 0, 0},
        {0, 2, 0}, {0, 1, 2}, {1, 0, 2}, {1, 2, 0}, {0, 2, 1}, {2, 0, 1}, {2, 1, 0},
        {1, 1, 2}, {2, 1, 1}, {1, 2, 1}, {2, 2, 1}, {1, 2, 2}, {2, 1, 2}};
    if (weights.empty()) weights.assign(27, Rat(1, 27));
    if (weights.size() != 27)
        throw validation_error("investor_law: need exactly 27 weights");
    std::vector<MatrixAtom> atoms;
    for (int a = 0; a < 27; ++a) {
        std::vector<double> entries;
        for (int r = 0; r < 3; ++r) {
            entries.push_back(kRows[kOrder[a][r]][0]);
            entries.push_back(kRows[kOrder[a][r]][1]);
        }
        atoms.push_back(MatrixAtom{Matrix(3, 2, entries), weights[a]});
    }
    return explicit_law(std::move(atoms));
}

// Ordered-exposure set {x1 > x2 > x3 > 1} as a single halfspace clause.
inline RiskSet ordered_chain_set() {
    HalfspaceClause hc;
    auto row = [&](std::vector<Rat> normal, Rat offset) {
        std::vector<double> nd;
        for (const Rat& v : normal) nd.push_back(to_double(v));
        hc.normals.push_back(std::move(normal));
        hc.offsets.push_back(offset);
        hc.normals_d.push_back(std::move(nd));
        hc.offsets_d.push_back(to_double(offset));
    };
    row({1, -1, 0}, 0);
    row({0, 1, -1}, 0);
    row({0, 0, 1}, 1);
    return halfspace_union(3, 3, {hc}, Rat(1));
}

// The five-agent three-object weighted adjacency matrix.
inline Matrix five_agent_matrix() {
    return Matrix(5, 3,
                  {1, 0, 0,
                   0, 1, 0,
                   0, 0, 1,
                   2, 2, 0,
                   0, 3, 3});
}

inline Rat rat_min(const std::vector<Rat>& v) { return *std::min_element(v.begin(), v.end()); }
inline Rat rat_max(const std::vector<Rat>& v) { return *std::max_element(v.begin(), v.end()); }

// Closed-form five-agent leading constants; D2 uses the min-based form.
inline std::vector<ExpectedLeading> five_agent_expected(long a, bool dependent) {
    const Rat w11 = 1, w22 = 1, w33 = 1, w41 = 2, w42 = 2, w52 = 3, w53 = 3;
    const Rat k1 = 1, k2 = 2, k3 = 3;
    auto p = [&](const Rat& w) { return pow_int(w, a); };
    std::vector<ExpectedLeading> out;
    Rat d1 = k1 * p(rat_max({w11, w41})) + k2 * p(rat_max({w22, w42, w52})) +
             k3 * p(rat_max({w33, w53}));
    Rat d2 = k1 * p(rat_min({w11, w41})) + k2 * p(rat_min({w22, w42, w52})) +
             k3 * p(rat_min({w33, w53}));
    Rat d3 = k2 * p(rat_min({w22, w42, w52}));
    Rat d4 = k1 * k2 * p(w11) * p(rat_min({w22, w52})) + k2 * k3 * p(rat_min({w22, w42})) * p(w33) +
             k3 * k1 * p(rat_min({w33, w53})) * p(rat_min({w11, w41}));
    Rat d5 = k1 * k2 * k3 * p(w11) * p(w22) * p(w33);
    double alpha = static_cast<double>(a);
    out.push_back({"D1", alpha, d1});
    out.push_back({"D2", alpha, d2});
    out.push_back({"D3", alpha, d3});
    out.push_back({"D4", 2 * alpha, d4});
    if (dependent)
        out.push_back({"D5", 4 * alpha, d5 * (k1 * p(w11) + k2 * p(w22) + k3 * p(w33))});
    else
        out.push_back({"D5", 3 * alpha, d5});
    return out;
}

}  // namespace detail

// Canned configurations. Expected constants require an integer alpha, since
// they are carried exactly as rationals.
inline NetworkScenario scenario(const std::string& name, double alpha = 1.0) {
    if (!(alpha > 0.0)) throw validation_error("scenario: alpha must be > 0");
    bool integral = alpha == std::floor(alpha) && alpha <= 64;
    long a = integral ? static_cast<long>(alpha) : 0;
    NetworkScenario sc;
    sc.name = name;
    if (name == "taylor27") {
        sc.margins = iid_pareto(alpha, {Rat(1), Rat(1)});
        sc.law = detail::investor_law({});
        sc.set_names = {"C1", "C2"};
        sc.sets.push_back(dk_set(3, 3, Rat(1)));
        sc.sets.push_back(detail::ordered_chain_set());
        // Uniform investments: every row type is covered with weight 1/27 each.
        sc.expected.push_back({"C1", alpha, Rat(16, 27)});
        sc.expected.push_back({"C2", 2 * alpha, Rat(1, 27)});
    } else if (name == "det-independent" || name == "det-dependent") {
        bool dependent = name == "det-dependent";
        std::vector<Rat> kappa = {Rat(1), Rat(2), Rat(3)};
        sc.margins = dependent ? dependent_pareto(alpha, kappa, Rat(1), Rat(1))
                               : iid_pareto(alpha, kappa);
        sc.law = point_mass(detail::five_agent_matrix());
        for (int k = 1; k <= 5; ++k) {
            sc.set_names.push_back("D" + std::to_string(k));
            sc.sets.push_back(dk_set(5, k, Rat(1)));
        }
        if (integral) sc.expected = detail::five_agent_expected(a, dependent);
    } else if (name == "prop41") {
        sc.margins = iid_pareto(alpha, {Rat(1), Rat(1), Rat(1)});
        sc.law = onehot_law(5, 3, ExclusionRule::OwnIndex);
        sc.set_names = {"box"};
        sc.sets.push_back(dk_set(5, 5, Rat(1)));
        sc.expected.push_back({"box", 2 * alpha, Rat(3) * delta_coeff(5, 3, 2)});
    } else if (name == "prop42") {
        sc.margins = iid_pareto(alpha, {Rat(1), Rat(1), Rat(1), Rat(1)});
        sc.law = onehot_law(4, 4, ExclusionRule::Window, 1);
        sc.set_names = {"box"};
        sc.sets.push_back(dk_set(4, 4, Rat(1)));
        sc.expected.push_back({"box", 2 * alpha, Rat(6) * q_coeff(4, 1, 2)});
    } else {
        throw validation_error("scenario: unknown name '" + name + "'");
    }
    return sc;
}

// One grid point of the five-agent tail comparison: leading-order values of
// P(X in tD_k) under independent and dependent object risks.
struct Figure3Row {
    double t = 0.0;
    std::string set;
    double independent = 0.0;
    double dependent = 0.0;
};

inline std::vector<double> default_figure3_grid() {
    std::vector<double> grid;
    for (int t = 20; t <= 100; t += 5) grid.push_back(static_cast<double>(t));
    return grid;
}

// Evaluates the closed-form five-agent leading-order values on a t grid.
inline std::vector<Figure3Row> figure3_data(int alpha, std::vector<double> t_grid = {}) {
    if (alpha != 1 && alpha != 2) throw validation_error("figure3_data: alpha must be 1 or 2");
    if (t_grid.empty()) t_grid = default_figure3_grid();
    for (double t : t_grid)
        if (!(t > 0.0)) throw validation_error("figure3_data: grid points must be > 0");
    std::vector<ExpectedLeading> indep = detail::five_agent_expected(alpha, false);
    std::vector<ExpectedLeading> dep = detail::five_agent_expected(alpha, true);
    // Exponents are integer multiples of alpha and every double is an exact
    // rational, so each cell is evaluated exactly and rounded once.
    auto cell = [](const ExpectedLeading& e, double t) {
        Rat rt(t);
        return to_double(Rat(e.constant / pow_int(rt, std::llround(e.exponent))));
    };
    std::vector<Figure3Row> rows;
    for (double t : t_grid)
        for (std::size_t s = 0; s < indep.size(); ++s) {
            Figure3Row row;
            row.t = t;
            row.set = indep[s].set_name;
            row.independent = cell(indep[s], t);
            row.dependent = cell(dep[s], t);
            rows.push_back(std::move(row));
        }
    return rows;
}

// Writes fig3_alpha<alpha>.csv (header t,set,independent,dependent) into dir.
inline std::string write_figure3_csv(int alpha, const std::string& dir = ".") {
    std::vector<Figure3Row> rows = figure3_data(alpha);
    std::string path = dir + "/fig3_alpha" + std::to_string(alpha) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("write_figure3_csv: cannot open " + path);
    out << "t,set,independent,dependent\n";
    for (const Figure3Row& r : rows)
        out << format_double(r.t) << ',' << r.set << ',' << format_double(r.independent) << ','
            << format_double(r.dependent) << '\n';
    return path;
}

}  // namespace heavytail
