#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "heavytail/common.hpp"
#include "heavytail/rational.hpp"
#include "heavytail/rng.hpp"

using namespace heavytail;

TEST(OrderStat, PicksKthLargest) {
    std::vector<double> x{3.0, 1.0, 4.0, 1.0, 5.0};
    EXPECT_EQ(order_stat(x, 1), 5.0);
    EXPECT_EQ(order_stat(x, 2), 4.0);
    EXPECT_EQ(order_stat(x, 3), 3.0);
    EXPECT_EQ(order_stat(x, 4), 1.0);
    EXPECT_EQ(order_stat(x, 5), 1.0);
    EXPECT_THROW(order_stat(x, 0), validation_error);
    EXPECT_THROW(order_stat(x, 6), validation_error);
    EXPECT_THROW(order_stat({}, 1), validation_error);
}

TEST(TauValue, FiniteAndInfiniteAreDistinctStates) {
    TauValue f = TauValue::finite(3.0);
    TauValue inf = TauValue::infinite();
    EXPECT_TRUE(f.is_finite());
    EXPECT_FALSE(inf.is_finite());
    EXPECT_EQ(f.value(), 3.0);
    EXPECT_THROW(inf.value(), validation_error);
    EXPECT_EQ(f.str(), "3");
    EXPECT_EQ(inf.str(), "INF");
    EXPECT_EQ(f, TauValue::finite(3.0));
    EXPECT_FALSE(f == inf);
    EXPECT_THROW(TauValue::finite(-1.0), validation_error);
    EXPECT_THROW(TauValue::finite(std::numeric_limits<double>::infinity()), validation_error);
}

TEST(FormatDouble, RoundTripsExactly) {
    for (double v : {0.1, 1.0 / 3.0, 2.0, 123456789.123456, 1e-300, 7.25}) {
        std::string s = format_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
        EXPECT_EQ(s.find(','), std::string::npos);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(2.0), "2");
}

TEST(Matrix, IndexingIsRowMajor) {
    Matrix a{2, 3, {1, 2, 3, 4, 5, 6}};
    EXPECT_EQ(a(0, 0), 1.0);
    EXPECT_EQ(a(0, 2), 3.0);
    EXPECT_EQ(a(1, 0), 4.0);
    std::vector<double> y = matvec(a, {1.0, 1.0, 1.0});
    EXPECT_EQ(y, (std::vector<double>{6.0, 15.0}));
}

TEST(Subsets, VisitsAllSizesInRange) {
    std::vector<std::vector<int>> seen;
    for_each_subset(4, 2, 2, [&](const std::vector<int>& s) { seen.push_back(s); });
    EXPECT_EQ(seen.size(), 6u);
    for (const auto& s : seen) EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    std::set<std::vector<int>> uniq(seen.begin(), seen.end());
    EXPECT_EQ(uniq.size(), 6u);

    int count = 0;
    for_each_subset(5, 0, 5, [&](const std::vector<int>&) { ++count; });
    EXPECT_EQ(count, 32);
}

TEST(Binom, SmallValues) {
    EXPECT_EQ(binom(5, 2), 10u);
    EXPECT_EQ(binom(27, 1), 27u);
    EXPECT_EQ(binom(6, 0), 1u);
    EXPECT_EQ(binom(3, 5), 0u);
}

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(parse_rational("3/4"), Rat(3) / 4);
    EXPECT_EQ(parse_rational("-7/2"), Rat(-7) / 2);
    EXPECT_EQ(parse_rational("5"), Rat(5));
    EXPECT_EQ(parse_rational("0.25"), Rat(1) / 4);
    EXPECT_EQ(parse_rational("1.5"), Rat(3) / 2);
    EXPECT_THROW(parse_rational("1/0"), validation_error);
    EXPECT_THROW(parse_rational("abc"), validation_error);
    EXPECT_EQ(rational_str(Rat(3) / 4), "3/4");
    EXPECT_EQ(rational_str(Rat(8) / 4), "2");
    EXPECT_EQ(rational_str(Rat(-1) / 3), "-1/3");
}

TEST(Rational, FromDoubleIsExactDyadic) {
    EXPECT_EQ(rational_from_double(0.5), Rat(1) / 2);
    EXPECT_EQ(rational_from_double(0.1) == Rat(1) / 10, false);
    EXPECT_EQ(to_double(rational_from_double(0.1)), 0.1);
}

TEST(Rational, PowIntHandlesNegativeExponents) {
    EXPECT_EQ(pow_int(Rat(2) / 3, 3), Rat(8) / 27);
    EXPECT_EQ(pow_int(Rat(2), -2), Rat(1) / 4);
    EXPECT_EQ(pow_int(Rat(5), 0), Rat(1));
    EXPECT_THROW(pow_int(Rat(0), -1), validation_error);
    EXPECT_EQ(pow_int(2.0, 10), 1024.0);
}

TEST(Rng, DeterministicAndInUnitInterval) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
    Rng c(42);
    for (int i = 0; i < 1000; ++i) {
        double u = c.u01_open_closed();
        EXPECT_GT(u, 0.0);
        EXPECT_LE(u, 1.0);
        double v = c.u01_half_open();
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, ChunkedRunsAreThreadCountInvariant) {
    auto body = [](Rng& rng, std::uint64_t n) {
        std::uint64_t acc = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (rng.u01_half_open() < 0.25) ++acc;
        return acc;
    };
    auto merge = [](std::uint64_t acc, std::uint64_t part) { return acc + part; };
    std::uint64_t n = 300000;
    std::uint64_t r1 = run_chunks<std::uint64_t>(n, 7, 1, body, merge, 0);
    std::uint64_t r4 = run_chunks<std::uint64_t>(n, 7, 4, body, merge, 0);
    std::uint64_t r3 = run_chunks<std::uint64_t>(n, 7, 3, body, merge, 0);
    EXPECT_EQ(r1, r4);
    EXPECT_EQ(r1, r3);
    EXPECT_NEAR(static_cast<double>(r1) / n, 0.25, 0.01);
    std::uint64_t other = run_chunks<std::uint64_t>(n, 8, 2, body, merge, 0);
    EXPECT_NE(r1, other);
}
