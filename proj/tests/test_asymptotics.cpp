#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "heavytail/asymptotics.hpp"

namespace ht = heavytail;

namespace {

ht::RectClause clause(std::vector<int> coords, std::vector<ht::Rat> thr) {
    ht::RectClause c;
    c.coords = std::move(coords);
    for (const ht::Rat& t : thr) {
        c.thresholds.push_back(t);
        c.thresholds_d.push_back(ht::to_double(t));
    }
    return c;
}

ht::RiskSet box_all(int q) {
    std::vector<int> coords(q);
    for (int j = 0; j < q; ++j) coords[j] = j;
    return ht::rect_union(q, q, {clause(coords, std::vector<ht::Rat>(q, ht::Rat(1)))});
}

ht::RiskSet at_least(int q, int k) {
    std::vector<ht::RectClause> clauses;
    ht::for_each_subset(q, k, k, [&](const std::vector<int>& J) {
        clauses.push_back(clause(J, std::vector<ht::Rat>(J.size(), ht::Rat(1))));
    });
    return ht::rect_union(q, k, clauses);
}

// x1 > x2 > x3 > 1 as a single halfspace clause.
ht::RiskSet ordered_chain() {
    std::vector<ht::HalfspaceClause> hs(1);
    auto row = [&](std::vector<ht::Rat> normal, ht::Rat offset) {
        hs[0].normals.push_back(normal);
        hs[0].offsets.push_back(offset);
        std::vector<double> nd;
        for (const ht::Rat& v : normal) nd.push_back(ht::to_double(v));
        hs[0].normals_d.push_back(nd);
        hs[0].offsets_d.push_back(ht::to_double(offset));
    };
    row({1, -1, 0}, 0);
    row({0, 1, -1}, 0);
    row({0, 0, 1}, 1);
    return ht::halfspace_union(3, 3, hs, ht::Rat(1));
}

ht::Matrix circ3() { return ht::Matrix(3, 3, {1, 1, 0, 0, 1, 1, 1, 0, 1}); }

ht::Matrix a16() { return ht::Matrix(3, 2, {1, 1, 1, 0, 0, 1}); }

ht::Matrix a17() { return ht::Matrix(3, 2, {1, 0, 1, 1, 0, 1}); }

ht::Matrix det53() {
    return ht::Matrix(5, 3,
                      {1, 0, 0,
                       0, 1, 0,
                       0, 0, 1,
                       2, 2, 0,
                       0, 3, 3});
}

// All 27 assignments of rows from {(1,1), (1,0), (0,1)}, uniformly weighted.
ht::MatrixLaw investors27() {
    const double rows[3][2] = {{1, 1}, {1, 0}, {0, 1}};
    std::vector<ht::MatrixAtom> atoms;
    for (int r0 = 0; r0 < 3; ++r0)
        for (int r1 = 0; r1 < 3; ++r1)
            for (int r2 = 0; r2 < 3; ++r2) {
                ht::Matrix a(3, 2,
                             {rows[r0][0], rows[r0][1], rows[r1][0], rows[r1][1], rows[r2][0],
                              rows[r2][1]});
                atoms.push_back(ht::MatrixAtom{std::move(a), ht::Rat(1, 27)});
            }
    return ht::explicit_law(std::move(atoms));
}

ht::MarginalModel unit_kappa(int d, double alpha = 1.0) {
    return ht::iid_pareto(alpha, std::vector<ht::Rat>(d, ht::Rat(1)));
}

const ht::ExpansionTerm& term_at(const ht::TailExpansion& exp, int i) {
    for (const auto& t : exp.terms)
        if (t.i == i) return t;
    throw std::logic_error("missing term");
}

}  // namespace

TEST(Asymptotics, CyclicOverlapSingleSurvivingTerm) {
    ht::TailExpansion exp =
        ht::expansion(unit_kappa(3), ht::point_mass(circ3()), box_all(3), 3);
    EXPECT_EQ(exp.i_star, 2);
    EXPECT_EQ(exp.iota_bar, 2);
    EXPECT_FALSE(exp.all_zero);
    EXPECT_TRUE(exp.refined_valid);
    ASSERT_EQ(exp.terms.size(), 2u);

    const ht::ExpansionTerm& t2 = term_at(exp, 2);
    ASSERT_TRUE(t2.exact);
    EXPECT_EQ(t2.coefficient_exact, ht::Rat(3));
    EXPECT_EQ(t2.exponent, 2.0);

    const ht::ExpansionTerm& t3 = term_at(exp, 3);
    ASSERT_TRUE(t3.exact);
    EXPECT_EQ(t3.coefficient_exact, ht::Rat(0));
    EXPECT_TRUE(t3.near_zero);

    auto [e, c] = ht::leading_order(exp);
    EXPECT_EQ(e, 2.0);
    EXPECT_EQ(c, 3.0);
    EXPECT_NEAR(ht::evaluate(exp, 10.0).full, 0.03, 1e-15);
    EXPECT_NEAR(ht::evaluate(exp, 10.0).leading, 0.03, 1e-15);
}

TEST(Asymptotics, InvestorsBoxExpansionIsExact) {
    ht::TailExpansion exp = ht::expansion(unit_kappa(2), investors27(), box_all(3), 3);
    EXPECT_EQ(exp.i_star, 1);
    EXPECT_EQ(exp.iota_bar, 1);
    EXPECT_TRUE(exp.refined_valid);
    EXPECT_TRUE(exp.checks.empty());

    const ht::ExpansionTerm& t1 = term_at(exp, 1);
    ASSERT_TRUE(t1.exact);
    EXPECT_EQ(t1.coefficient_exact, ht::Rat(16, 27));
    const ht::ExpansionTerm& t2 = term_at(exp, 2);
    ASSERT_TRUE(t2.exact);
    EXPECT_EQ(t2.coefficient_exact, ht::Rat(12, 27));

    double t = 10.0;
    EXPECT_NEAR(ht::evaluate(exp, t).full, 16.0 / 27 / t + 12.0 / 27 / (t * t), 1e-15);
    EXPECT_NEAR(ht::evaluate(exp, t).leading, 16.0 / 27 / t, 1e-15);
}

TEST(Asymptotics, InvestorsOrderedChainRefinedOrder) {
    ht::TailExpansion exp =
        ht::expansion(unit_kappa(2), investors27(), ordered_chain(), 3, 100000, 17);
    EXPECT_EQ(exp.i_star, 1);
    EXPECT_EQ(exp.iota_bar, 2);
    EXPECT_TRUE(exp.refined_valid);

    const ht::ExpansionTerm& t1 = term_at(exp, 1);
    EXPECT_EQ(t1.coefficient, 0.0);
    EXPECT_TRUE(t1.near_zero);
    EXPECT_EQ(t1.method, "analytic");

    // Only the two mixed-order atoms reach the chain, each through the exact
    // wedge reduction, so the coefficient is the rational 1/27.
    const ht::ExpansionTerm& t2 = term_at(exp, 2);
    EXPECT_EQ(t2.method, "analytic");
    EXPECT_FALSE(t2.near_zero);
    ASSERT_TRUE(t2.exact);
    EXPECT_EQ(t2.coefficient_exact, ht::Rat(1, 27));

    // All 15 first-order atoms are proved empty by the pullback criterion.
    ASSERT_EQ(exp.checks.size(), 15u);
    for (const ht::AtomCheck& chk : exp.checks) {
        EXPECT_EQ(chk.ik, 1);
        EXPECT_EQ(chk.status, ht::AtomCheckStatus::VerifiedEmpty);
    }

    auto [e, c] = ht::leading_order(exp);
    EXPECT_EQ(e, 2.0);
    EXPECT_NEAR(c, 1.0 / 27, 3.0 * t2.stderr_);
}

TEST(Asymptotics, FiveAgentLeadingConstants) {
    ht::MarginalModel m = ht::iid_pareto(1.0, {ht::Rat(1), ht::Rat(2), ht::Rat(3)});
    ht::MatrixLaw law = ht::point_mass(det53());

    ht::TailExpansion d1 = ht::expansion(m, law, at_least(5, 1), 1);
    ASSERT_TRUE(term_at(d1, 1).exact);
    EXPECT_EQ(term_at(d1, 1).coefficient_exact, ht::Rat(17));
    auto [e1, c1] = ht::leading_order(d1);
    EXPECT_EQ(e1, 1.0);
    EXPECT_EQ(c1, 17.0);

    ht::TailExpansion d4 = ht::expansion(m, law, at_least(5, 4), 4);
    EXPECT_EQ(d4.i_star, 2);
    auto [e4, c4] = ht::leading_order(d4);
    EXPECT_EQ(e4, 2.0);
    EXPECT_EQ(c4, 11.0);

    // Dependent margins lift the all-coordinates set to exponent 4.
    ht::MarginalModel dep = ht::dependent_pareto(1.0, {ht::Rat(1), ht::Rat(2), ht::Rat(3)}, 1.0, 1.0);
    ht::TailExpansion d5 = ht::expansion(dep, law, box_all(5), 5);
    EXPECT_EQ(d5.i_star, 3);
    ASSERT_EQ(d5.terms.size(), 1u);
    ASSERT_TRUE(d5.terms[0].exact);
    EXPECT_EQ(d5.terms[0].coefficient_exact, ht::Rat(36));
    EXPECT_EQ(d5.terms[0].exponent, 4.0);

    // Squared tail index: same structure, squared column maxima.
    ht::MarginalModel m2 = ht::iid_pareto(2.0, {ht::Rat(1), ht::Rat(2), ht::Rat(3)});
    ht::TailExpansion d1a2 = ht::expansion(m2, law, at_least(5, 1), 1);
    EXPECT_EQ(term_at(d1a2, 1).coefficient_exact, ht::Rat(49));
    EXPECT_EQ(term_at(d1a2, 1).exponent, 2.0);
}

TEST(Asymptotics, InconclusiveProbeBlocksRefinedClaim) {
    // The flat-pair matrix sends the chain to an empty set, but no single row
    // proves it and the probe cannot certify emptiness.
    ht::Matrix flat(3, 2, {2, 0, 1, 1, 2, 0});
    ht::MatrixLaw law = ht::explicit_law(
        {ht::MatrixAtom{flat, ht::Rat(1, 2)}, ht::MatrixAtom{a16(), ht::Rat(1, 2)}});
    ht::TailExpansion exp =
        ht::expansion(unit_kappa(2), law, ordered_chain(), 3, 60000, 5, 1, 20000);
    EXPECT_EQ(exp.i_star, 1);
    EXPECT_EQ(exp.iota_bar, 2);
    ASSERT_EQ(exp.checks.size(), 1u);
    EXPECT_EQ(exp.checks[0].status, ht::AtomCheckStatus::Inconclusive);
    EXPECT_FALSE(exp.refined_valid);
}

TEST(Asymptotics, ProbeAndEmptinessPrimitives) {
    ht::RiskSet chain = ordered_chain();
    EXPECT_TRUE(ht::detail::provably_empty_preimage(a17(), chain));
    EXPECT_FALSE(ht::detail::provably_empty_preimage(a16(), chain));
    EXPECT_TRUE(ht::detail::probe_nonempty(a16(), chain, 100000, 3));
    EXPECT_FALSE(ht::detail::probe_nonempty(a17(), chain, 100000, 3));
}

TEST(Asymptotics, AllZeroExpansionHasNoResolvableOrder) {
    ht::TailExpansion exp =
        ht::expansion(unit_kappa(2), ht::point_mass(a17()), ordered_chain(), 3, 50000, 2);
    EXPECT_TRUE(exp.all_zero);
    EXPECT_THROW(ht::leading_order(exp), ht::validation_error);
    EXPECT_EQ(ht::evaluate(exp, 10.0).full, 0.0);
    EXPECT_EQ(ht::evaluate(exp, 10.0).leading, 0.0);
}

TEST(Asymptotics, EvaluateClampsAndDecays) {
    ht::TailExpansion exp = ht::expansion(unit_kappa(2), investors27(), box_all(3), 3);
    EXPECT_EQ(ht::evaluate(exp, 0.01).full, 1.0);
    double prev = 1.0;
    for (double t = 2.0; t < 2000.0; t *= 2.0) {
        double cur = ht::evaluate(exp, t).full;
        EXPECT_LT(cur, prev);
        prev = cur;
    }
    EXPECT_THROW(ht::evaluate(exp, 0.0), ht::validation_error);
}

TEST(Asymptotics, ValidatesScenarioShapes) {
    EXPECT_THROW(ht::expansion(unit_kappa(2), investors27(), box_all(3), 2),
                 ht::validation_error);
    EXPECT_THROW(ht::expansion(unit_kappa(3), investors27(), box_all(3), 3),
                 ht::validation_error);
    EXPECT_THROW(ht::expansion(unit_kappa(2), ht::point_mass(a16()), box_all(5), 5),
                 ht::validation_error);
}
