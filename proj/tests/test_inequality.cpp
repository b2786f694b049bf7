#include <gtest/gtest.h>

#include "support.hpp"

using namespace oonaudit;

namespace {

ExposureTable table_of(const std::string& id, GroupLabel g, std::vector<double> values) {
    ExposureTable t;
    t.monitor_id = id;
    t.group = g;
    t.total_tweets = 1000;
    for (std::size_t i = 0; i < values.size(); ++i) t.entries[testkit::Gen::author(static_cast<int>(i))] = values[i];
    return t;
}

}  // namespace

TEST(Gini, FixedCases) {
    EXPECT_EQ(gini(std::vector<double>{0, 0, 0, 1}), 0.75);
    EXPECT_EQ(gini(std::vector<double>{1, 2, 3, 4}), 0.25);
    for (double c : {0.1, 1.0, 7.5, 1e6}) EXPECT_NEAR(gini(std::vector<double>{c, c, c, c}), 0.0, 1e-15);
    EXPECT_EQ(gini(std::vector<double>{5}), 0.0);
}

TEST(Gini, Errors) {
    EXPECT_THROW(gini(std::vector<double>{0, 0}), AllZeroError);
    EXPECT_THROW(gini(std::vector<double>{}), AnalysisError);
    EXPECT_THROW(gini(std::vector<double>{1, -1}), AnalysisError);
    EXPECT_THROW(lorenz(std::vector<double>{0, 0}), AllZeroError);
}

TEST(Lorenz, FixedCases) {
    const auto c = lorenz(std::vector<double>{0, 0, 0, 1});
    const std::vector<std::pair<double, double>> expected = {{0, 0}, {0.25, 0}, {0.5, 0}, {0.75, 0}, {1, 1}};
    ASSERT_EQ(c.points.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_DOUBLE_EQ(c.points[i].x, expected[i].first);
        EXPECT_DOUBLE_EQ(c.points[i].y, expected[i].second);
    }
    const auto eq = lorenz(std::vector<double>{2, 2, 2, 2, 2});
    for (const auto& p : eq.points) EXPECT_NEAR(p.y, p.x, 1e-15);
}

TEST(GiniProperty, MatchesDoubleSum) {
    testkit::Gen gen(41);
    for (int i = 0; i < 1000; ++i) {
        const auto v = gen.exposures(static_cast<std::size_t>(gen.integer(1, 200)));
        EXPECT_NEAR(gini(v), testkit::gini_double_sum(v), 1e-12);
    }
}

TEST(GiniProperty, ScaleAndReplicationInvariance) {
    testkit::Gen gen(42);
    for (int i = 0; i < 300; ++i) {
        auto v = gen.exposures(static_cast<std::size_t>(gen.integer(1, 200)));
        const double g = gini(v);
        const double k = std::exp(gen.uniform(-5, 5));
        auto scaled = v;
        for (auto& x : scaled) x *= k;
        EXPECT_NEAR(gini(scaled), g, 1e-12);
        auto doubled = v;
        doubled.insert(doubled.end(), v.begin(), v.end());
        EXPECT_NEAR(gini(doubled), g, 1e-12);
        EXPECT_GE(g, 0.0);
        EXPECT_LT(g, 1.0);
    }
}

TEST(LorenzProperty, ShapeAndGiniConsistency) {
    testkit::Gen gen(43);
    for (int i = 0; i < 1000; ++i) {
        const auto v = gen.exposures(static_cast<std::size_t>(gen.integer(1, 200)));
        const auto c = lorenz(v);
        ASSERT_EQ(c.points.front().x, 0.0);
        ASSERT_EQ(c.points.front().y, 0.0);
        ASSERT_EQ(c.points.back().x, 1.0);
        ASSERT_EQ(c.points.back().y, 1.0);
        for (std::size_t j = 1; j < c.points.size(); ++j) {
            EXPECT_GT(c.points[j].x, c.points[j - 1].x);
            EXPECT_GE(c.points[j].y, c.points[j - 1].y);
            EXPECT_LE(c.points[j].y, c.points[j].x + 1e-12);
        }
        EXPECT_NEAR(1.0 - 2.0 * c.area(), gini(v), 1e-9);
    }
}

TEST(Lorenz, AverageOnGrid) {
    std::vector<LorenzCurve> curves = {lorenz(std::vector<double>{1, 1}), lorenz(std::vector<double>{0, 1})};
    const auto m = average_lorenz(curves);
    ASSERT_EQ(m.x.size(), kLorenzGridPoints);
    EXPECT_EQ(m.x.front(), 0.0);
    EXPECT_EQ(m.x.back(), 1.0);
    EXPECT_EQ(m.mean_y.back(), 1.0);
    EXPECT_EQ(m.sd_y.back(), 0.0);
    // at x = 0.5 the curves sit at 0.5 and 0, so mean 0.25 and population sd 0.25
    const auto mid = average_lorenz(curves, 3);
    EXPECT_DOUBLE_EQ(mid.mean_y[1], 0.25);
    EXPECT_DOUBLE_EQ(mid.sd_y[1], 0.25);
}

TEST(GiniDistributionTest, IdenticalGroupsAreNotSeparated) {
    std::vector<ExposureTable> t;
    const std::vector<std::vector<double>> base = {{1, 2, 3}, {1, 5, 9, 2}, {4, 4, 1}};
    for (GroupLabel g : {GroupLabel::Left, GroupLabel::Right}) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            t.push_back(table_of(std::string(to_string(g)) + std::to_string(i), g, base[i]));
        }
    }
    const auto d = group_gini_distribution(t);
    EXPECT_EQ(d.values(GroupLabel::Left), d.values(GroupLabel::Right));
    ASSERT_EQ(d.pairwise.size(), 1u);
    EXPECT_EQ(d.pairwise[0].test.p, 1.0);
}

TEST(GiniDistributionTest, SixPairsAndPrecondition) {
    std::vector<ExposureTable> t;
    testkit::Gen gen(44);
    for (GroupLabel g : kAllGroups) {
        for (int i = 0; i < 3; ++i) t.push_back(table_of(std::string(to_string(g)) + std::to_string(i), g, gen.exposures(20)));
    }
    EXPECT_EQ(group_gini_distribution(t).pairwise.size(), 6u);
    t.push_back(table_of("solo", GroupLabel::Neutral, {1, 2}));
    std::vector<ExposureTable> single = {table_of("x", GroupLabel::Left, {1, 2}), table_of("y", GroupLabel::Right, {1, 3})};
    EXPECT_THROW(group_gini_distribution(single), AnalysisError);
}
