#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "heavytail/network.hpp"
#include "heavytail/simulate.hpp"

namespace ht = heavytail;

namespace {

const ht::ExpansionTerm& term_at(const ht::TailExpansion& exp, int i) {
    for (const auto& t : exp.terms)
        if (t.i == i) return t;
    throw std::logic_error("missing term");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool any_note_contains(const ht::MassReport& rep, const std::string& needle) {
    for (const std::string& n : rep.notes)
        if (n.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Network, ExactSubsetMassValues) {
    EXPECT_EQ(ht::delta_coeff(5, 3, 2), ht::Rat(1, 9));
    EXPECT_EQ(ht::delta_coeff(5, 3, 3), ht::Rat(2, 3));
    EXPECT_EQ(ht::delta_coeff(4, 3, 2), ht::Rat(1, 6));
    EXPECT_EQ(ht::delta_coeff(4, 3, 3), ht::Rat(1, 2));
    // The two-column value collapses to a single closed form for any q, d.
    for (auto [q, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {6, 4}, {7, 4}}) {
        ht::Rat direct = ht::pow_int(ht::Rat(2), q - 2) /
                         (ht::pow_int(ht::Rat(d - 1), d) * ht::pow_int(ht::Rat(d), q - d));
        EXPECT_EQ(ht::delta_coeff(q, d, 2), direct);
    }
    EXPECT_THROW(ht::delta_coeff(5, 3, 1), ht::validation_error);
    EXPECT_THROW(ht::delta_coeff(5, 3, 4), ht::validation_error);
    EXPECT_THROW(ht::delta_coeff(3, 4, 2), ht::validation_error);
}

TEST(Network, ExactWindowValues) {
    EXPECT_EQ(ht::q_coeff(4, 1, 2), ht::Rat(4, 81));
    EXPECT_EQ(ht::q_coeff(4, 1, 3), ht::Rat(8, 27));
    EXPECT_EQ(ht::q_coeff(4, 1, 4), ht::Rat(1));
    EXPECT_EQ(ht::q_coeff(5, 2, 3), ht::Rat(4, 81));
    EXPECT_EQ(ht::q_coeff(5, 2, 4), ht::Rat(8, 27));
    // At i = d the window formula leaves the probability range; the mass
    // report records that the enumeration disagrees there.
    EXPECT_EQ(ht::q_coeff(5, 2, 5), ht::Rat(16, 15));
    EXPECT_THROW(ht::q_coeff(4, 1, 1), ht::validation_error);
    EXPECT_THROW(ht::q_coeff(4, 1, 5), ht::validation_error);
    EXPECT_THROW(ht::q_coeff(4, 4, 5), ht::validation_error);
}

TEST(Network, ConstantsTable) {
    ht::ClosedFormConstants cf = ht::closed_form_constants(5, 3);
    EXPECT_EQ(cf.delta.at(2), ht::Rat(1, 9));
    EXPECT_EQ(cf.delta.at(3), ht::Rat(2, 3));
    EXPECT_TRUE(cf.qim.empty());
    ht::ClosedFormConstants cf2 = ht::closed_form_constants(4, 4);
    EXPECT_EQ(cf2.qim.at({1, 2}), ht::Rat(4, 81));
    EXPECT_EQ(cf2.qim.at({1, 4}), ht::Rat(1));
    // Nondecreasing in i for fixed m.
    EXPECT_LE(cf2.qim.at({1, 2}), cf2.qim.at({1, 3}));
    EXPECT_LE(cf2.qim.at({1, 3}), cf2.qim.at({1, 4}));
}

TEST(Network, OwnIndexEnumerationMatchesClosedForm) {
    for (auto [q, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}}) {
        ht::MassReport rep = ht::onehot_mass_report(q, d);
        EXPECT_TRUE(rep.per_subset_match) << "q=" << q;
        ht::Rat total(0);
        for (int i = 1; i <= d; ++i) total += rep.stratum_mass[i];
        EXPECT_EQ(total, ht::Rat(1));
        EXPECT_EQ(rep.stratum_mass[2], ht::Rat(3) * ht::delta_coeff(q, d, 2));
        EXPECT_EQ(rep.stratum_mass[3], ht::delta_coeff(q, d, 3));
        EXPECT_FALSE(any_note_contains(rep, "warning"));
    }
}

// The pair-mass note must adjudicate between the two candidate denominators:
// (d-1)^d matches enumeration, (d-1)^q does not when q != d.
TEST(Network, PairMassAdjudication) {
    ht::MassReport rep = ht::onehot_mass_report(5, 3);
    ASSERT_FALSE(rep.notes.empty());
    const std::string& note = rep.notes.back();
    EXPECT_NE(note.find("2^(q-2)/((d-1)^d d^(q-d)) = 1/9 (match)"), std::string::npos) << note;
    EXPECT_NE(note.find("2^(q-2)/((d-1)^q d^(q-d)) = 1/36 (MISMATCH)"), std::string::npos) << note;
}

TEST(Network, WindowEnumerationSingleExclusion) {
    ht::MassReport rep = ht::window_mass_report(4, 1);
    // Exact stratum masses from the 81-atom enumeration.
    EXPECT_EQ(rep.stratum_mass[1], ht::Rat(0));
    EXPECT_EQ(rep.stratum_mass[2], ht::Rat(24, 81));
    EXPECT_EQ(rep.stratum_mass[3], ht::Rat(48, 81));
    EXPECT_EQ(rep.stratum_mass[4], ht::Rat(9, 81));
    // Pair subsets match the difference form; larger subsets do not.
    for (const ht::SubsetMass& sm : rep.subsets) {
        if (sm.cols.size() == 2) {
            EXPECT_EQ(sm.mass, ht::Rat(4, 81));
            EXPECT_TRUE(sm.match);
        }
        if (sm.cols.size() == 3) {
            EXPECT_EQ(sm.mass, ht::Rat(12, 81));
            EXPECT_EQ(sm.predicted, ht::Rat(20, 81));
            EXPECT_FALSE(sm.match);
        }
    }
    EXPECT_FALSE(rep.per_subset_match);
    // The closed form does track the cumulative block masses here.
    EXPECT_TRUE(any_note_contains(rep, "block size 2: enumeration 4/81; closed form 4/81 (match)"));
    EXPECT_TRUE(any_note_contains(rep, "block size 4: enumeration 1; closed form 1 (match)"));
    EXPECT_TRUE(any_note_contains(rep, "smallest column-usage size with positive mass: 2"));
}

TEST(Network, WindowEnumerationDoubleExclusion) {
    ht::MassReport rep = ht::window_mass_report(5, 2);
    // Two columns can already carry every row, below the assumed minimum of 3.
    EXPECT_EQ(rep.stratum_mass[2], ht::Rat(10, 243));
    EXPECT_EQ(rep.stratum_mass[3], ht::Rat(110, 243));
    EXPECT_EQ(rep.stratum_mass[4], ht::Rat(110, 243));
    EXPECT_EQ(rep.stratum_mass[5], ht::Rat(13, 243));
    EXPECT_FALSE(rep.per_subset_match);
    EXPECT_TRUE(any_note_contains(
        rep, "smallest column-usage size with positive mass: 2 (closed form assumes 3)"));
    // Consecutive-block cumulatives match inside the derivation's range and
    // break at the full block.
    EXPECT_TRUE(
        any_note_contains(rep, "block size 3: enumeration 4/81; closed form 4/81 (match)"));
    EXPECT_TRUE(
        any_note_contains(rep, "block size 4: enumeration 8/27; closed form 8/27 (match)"));
    EXPECT_TRUE(
        any_note_contains(rep, "block size 5: enumeration 1; closed form 16/15 (MISMATCH)"));
    // Subset masses depend on geometry: consecutive triples carry 10/243,
    // the others 12/243.
    ht::Rat consecutive(10, 243), skewed(12, 243);
    int n_cons = 0, n_skew = 0;
    for (const ht::SubsetMass& sm : rep.subsets) {
        if (sm.cols.size() != 3) continue;
        if (sm.mass == consecutive) ++n_cons;
        if (sm.mass == skewed) ++n_skew;
    }
    EXPECT_EQ(n_cons, 5);
    EXPECT_EQ(n_skew, 5);
}

TEST(Network, OrderStatisticRiskSets) {
    EXPECT_EQ(ht::dk_set(5, 5, ht::Rat(1)).rects.size(), 1u);
    EXPECT_EQ(ht::dk_set(3, 2, ht::Rat(1)).rects.size(), 3u);
    EXPECT_EQ(ht::dk_set(5, 1, ht::Rat(1)).rects.size(), 5u);
    ht::RiskSet d3 = ht::dk_set(5, 3, ht::Rat(1));
    EXPECT_EQ(d3.k, 3);
    EXPECT_TRUE(ht::contains(d3, {2, 0, 2, 0, 2}));
    EXPECT_FALSE(ht::contains(d3, {2, 2, 0, 0, 0}));
    EXPECT_EQ(ht::delta(d3), 1.0);
    EXPECT_THROW(ht::dk_set(5, 3, ht::Rat(0)), ht::validation_error);
}

TEST(Network, InvestorScenarioLeadingConstants) {
    ht::NetworkScenario sc = ht::scenario("taylor27");
    ASSERT_EQ(sc.sets.size(), 2u);
    EXPECT_EQ(sc.law.q, 3);
    EXPECT_EQ(sc.law.d, 2);
    EXPECT_EQ(ht::enumerate_support(sc.law).size(), 27u);
    EXPECT_EQ(sc.expected[0].constant, ht::Rat(16, 27));
    EXPECT_EQ(sc.expected[1].constant, ht::Rat(1, 27));

    // Rectangular set: fully analytic, exact agreement with the reference value.
    ht::TailExpansion exp1 = ht::expansion(sc.margins, sc.law, sc.sets[0], sc.sets[0].k);
    auto [e1, c1] = ht::leading_order(exp1);
    EXPECT_EQ(e1, 1.0);
    ASSERT_TRUE(term_at(exp1, 1).exact);
    EXPECT_EQ(term_at(exp1, 1).coefficient_exact, ht::Rat(16, 27));

    // Ordered chain: Monte Carlo on the surviving pair stratum.
    ht::TailExpansion exp2 = ht::expansion(sc.margins, sc.law, sc.sets[1], sc.sets[1].k,
                                           200000, 99);
    auto [e2, c2] = ht::leading_order(exp2);
    EXPECT_EQ(e2, 2.0);
    const ht::ExpansionTerm& t2 = term_at(exp2, 2);
    EXPECT_NEAR(c2, 1.0 / 27.0, 3.0 * t2.stderr_);
    EXPECT_TRUE(exp2.refined_valid);
}

TEST(Network, FiveAgentScenarioEngineAgreement) {
    ht::NetworkScenario sc = ht::scenario("det-independent");
    ASSERT_EQ(sc.sets.size(), 5u);
    ASSERT_EQ(sc.expected.size(), 5u);
    std::vector<ht::Rat> engine(5);
    for (int k = 0; k < 5; ++k) {
        ht::TailExpansion exp = ht::expansion(sc.margins, sc.law, sc.sets[k], sc.sets[k].k);
        const ht::ExpansionTerm& lead = term_at(exp, exp.iota_bar);
        ASSERT_TRUE(lead.exact) << sc.set_names[k];
        EXPECT_EQ(lead.exponent, sc.expected[k].exponent) << sc.set_names[k];
        engine[k] = lead.coefficient_exact;
    }
    EXPECT_EQ(engine[0], ht::Rat(17));
    EXPECT_EQ(engine[2], ht::Rat(2));
    EXPECT_EQ(engine[3], ht::Rat(11));
    EXPECT_EQ(engine[4], ht::Rat(6));
    EXPECT_EQ(sc.expected[0].constant, ht::Rat(17));
    EXPECT_EQ(sc.expected[2].constant, ht::Rat(2));
    EXPECT_EQ(sc.expected[3].constant, ht::Rat(11));
    EXPECT_EQ(sc.expected[4].constant, ht::Rat(6));
    // The min-based reference form undercounts the second set: a column with
    // three positive entries only needs its two largest to clear the level.
    EXPECT_EQ(sc.expected[1].constant, ht::Rat(6));
    EXPECT_EQ(engine[1], ht::Rat(8));
}

TEST(Network, FiveAgentDependentScenario) {
    ht::NetworkScenario sc = ht::scenario("det-dependent");
    EXPECT_EQ(sc.margins.kind, ht::MarginKind::DependentPareto);
    ASSERT_EQ(sc.expected.size(), 5u);
    EXPECT_EQ(sc.expected[4].exponent, 4.0);
    EXPECT_EQ(sc.expected[4].constant, ht::Rat(36));
    for (int k = 0; k < 4; ++k)
        EXPECT_EQ(sc.expected[k].constant, ht::scenario("det-independent").expected[k].constant);
    ht::TailExpansion exp = ht::expansion(sc.margins, sc.law, sc.sets[4], sc.sets[4].k);
    const ht::ExpansionTerm& lead = term_at(exp, exp.iota_bar);
    ASSERT_TRUE(lead.exact);
    EXPECT_EQ(lead.exponent, 4.0);
    EXPECT_EQ(lead.coefficient_exact, ht::Rat(36));

    ht::NetworkScenario sc2 = ht::scenario("det-independent", 2.0);
    EXPECT_EQ(sc2.expected[0].constant, ht::Rat(49));
    EXPECT_EQ(sc2.expected[1].constant, ht::Rat(6));
    EXPECT_EQ(sc2.expected[4].exponent, 6.0);
}

TEST(Network, OneHotScenariosMatchEnumeration) {
    ht::NetworkScenario p41 = ht::scenario("prop41");
    EXPECT_EQ(p41.expected[0].constant, ht::Rat(1, 3));
    ht::TailExpansion exp41 =
        ht::expansion(p41.margins, p41.law, p41.sets[0], p41.sets[0].k);
    EXPECT_EQ(exp41.iota_bar, 2);
    ASSERT_TRUE(term_at(exp41, 2).exact);
    EXPECT_EQ(term_at(exp41, 2).coefficient_exact, ht::Rat(1, 3));
    EXPECT_EQ(term_at(exp41, 3).coefficient_exact, ht::Rat(2, 3));

    ht::NetworkScenario p42 = ht::scenario("prop42");
    EXPECT_EQ(p42.expected[0].constant, ht::Rat(8, 27));
    ht::TailExpansion exp42 =
        ht::expansion(p42.margins, p42.law, p42.sets[0], p42.sets[0].k);
    EXPECT_EQ(exp42.iota_bar, 2);
    ASSERT_TRUE(term_at(exp42, 2).exact);
    EXPECT_EQ(term_at(exp42, 2).coefficient_exact, ht::Rat(8, 27));

    EXPECT_THROW(ht::scenario("nope"), ht::validation_error);
}

TEST(Network, FigureGridValues) {
    std::vector<ht::Figure3Row> rows = ht::figure3_data(1);
    ASSERT_EQ(rows.size(), 17u * 5u);
    EXPECT_EQ(rows[0].t, 20.0);
    EXPECT_EQ(rows[0].set, "D1");
    EXPECT_NEAR(rows[0].independent, 17.0 / 20.0, 1e-15);
    for (const ht::Figure3Row& r : rows) {
        if (r.set == "D5") {
            EXPECT_NEAR(r.independent / r.dependent, r.t / 6.0, 1e-9 * r.t);
        } else {
            EXPECT_EQ(r.independent, r.dependent);
        }
    }
    const ht::Figure3Row& d5 = rows[4];
    EXPECT_EQ(d5.set, "D5");
    EXPECT_NEAR(d5.independent, 6.0 / 8000.0, 1e-15);
    EXPECT_NEAR(d5.dependent, 36.0 / 160000.0, 1e-15);
    EXPECT_THROW(ht::figure3_data(3), ht::validation_error);
}

TEST(Network, FigureCsvDeterministic) {
    std::string dir = ::testing::TempDir();
    std::string path = ht::write_figure3_csv(1, dir);
    std::string first = read_file(path);
    ht::write_figure3_csv(1, dir);
    EXPECT_EQ(read_file(path), first);
    ASSERT_FALSE(first.empty());
    EXPECT_EQ(first.substr(0, first.find('\n')), "t,set,independent,dependent");
    EXPECT_NE(first.find("20,D1,0.85,0.85"), std::string::npos);
    size_t lines = 0;
    for (char ch : first)
        if (ch == '\n') ++lines;
    EXPECT_EQ(lines, 86u);
    std::string path2 = ht::write_figure3_csv(2, dir);
    std::string second = read_file(path2);
    EXPECT_NE(second.find("20,D1,"), std::string::npos);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST(Network, ModelValidation) {
    ht::MatrixLaw law = ht::point_mass(ht::Matrix(2, 2, {1, 0, 0, 1}));
    ht::MarginalModel m3 = ht::iid_pareto(1.0, {ht::Rat(1), ht::Rat(1), ht::Rat(1)});
    EXPECT_THROW(ht::network_model(law, m3), ht::validation_error);
    ht::MarginalModel m2 = ht::iid_pareto(1.0, {ht::Rat(1), ht::Rat(1)});
    ht::NetworkModel nm = ht::network_model(law, m2);
    EXPECT_EQ(nm.q, 2);
    EXPECT_EQ(nm.d, 2);
}
