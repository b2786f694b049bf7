#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "support.hpp"

using namespace oonaudit;

namespace {

SessionRecord filled(const std::string& monitor, GroupLabel g, int length, const std::map<int, std::string>& at,
                     const std::string& filler = "zz") {
    SessionRecord s;
    s.session_id = monitor + ".s0";
    s.monitor_id = monitor;
    s.group = g;
    for (int r = 1; r <= length; ++r) {
        TimelineEntry e;
        e.rank = r;
        e.tweet_id = "t" + std::to_string(r);
        auto it = at.find(r);
        e.author_id = e.displayed_author_id = it == at.end() ? filler : it->second;
        s.entries.push_back(e);
    }
    return s;
}

ExposureTable table_of(const std::string& id, GroupLabel g, std::map<AuthorId, double> entries) {
    ExposureTable t;
    t.monitor_id = id;
    t.group = g;
    t.total_tweets = 1000;
    t.entries = std::move(entries);
    return t;
}

}  // namespace

TEST(Metrics, AbsentAuthorIsZeroAndOmitted) {
    const std::vector<SessionRecord> s = {filled("m", GroupLabel::Neutral, 10, {{1, "a"}})};
    const auto m = calibrate(10, 0.2, 0.7);
    EXPECT_EQ(weighted_occurrence(s, m, "nobody"), 0.0);
    const auto t = build_exposure_table(s, m);
    EXPECT_EQ(t.entries.count("nobody"), 0u);
    EXPECT_EQ(t.exposure("nobody"), 0.0);
}

TEST(Metrics, SingleTopAppearanceInThousand) {
    const std::vector<SessionRecord> s = {filled("m", GroupLabel::Neutral, 1000, {{1, "a"}})};
    const auto m = calibrate(1000, 0.2, 0.7);
    EXPECT_NEAR(weighted_occurrence(s, m, "a"), 1.0, 1e-12);
}

TEST(Metrics, ReferenceExposureExample) {
    const std::vector<SessionRecord> s = {filled("m", GroupLabel::Neutral, 500, {{1, "a"}, {100, "a"}})};
    const auto m = fixed_decay(1.009, 0.0120, 500);
    const double expected = (1.009 * std::exp(-0.012) + 1.009 * std::exp(-1.2)) / 500.0 * 1000.0;
    EXPECT_NEAR(weighted_occurrence(s, m, "a"), expected, 1e-12);
    EXPECT_NEAR(weighted_occurrence(s, m, "a"), 2.6018, 1e-4);
}

TEST(Metrics, SingleAuthorTableAndNeutralScope) {
    testkit::Gen gen(3);
    std::vector<SessionRecord> one = {filled("m", GroupLabel::Neutral, 20, {}, "solo")};
    const auto m = calibrate(20, 0.2, 0.7);
    EXPECT_EQ(build_exposure_table(one, m).entries.size(), 1u);

    std::vector<SessionRecord> neutral;
    for (int i = 0; i < 3; ++i) neutral.push_back(gen.session("n", GroupLabel::Neutral, 30, 10, 0, i));
    ExposureOptions all;
    all.scope = Scope::All;
    EXPECT_EQ(build_exposure_table(neutral, m).entries, build_exposure_table(neutral, m, all).entries);
}

TEST(Metrics, ErrorsAndPreconditions) {
    const auto m = calibrate(10, 0.2, 0.7);
    std::vector<SessionRecord> none;
    EXPECT_THROW(build_exposure_table(none, m), EmptySessionsError);
    std::vector<SessionRecord> mixed = {filled("m1", GroupLabel::Left, 10, {}), filled("m2", GroupLabel::Left, 10, {})};
    EXPECT_THROW(build_exposure_table(mixed, m), AnalysisError);
    EXPECT_THROW(top_k(std::map<AuthorId, double>{{"a", 1}}, 0), ConfigError);
}

TEST(Metrics, AttributionPolicy) {
    auto s = filled("m", GroupLabel::Neutral, 10, {{1, "shown"}});
    s.entries[0].is_retweet = true;
    s.entries[0].author_id = "orig";
    const std::vector<SessionRecord> v = {s};
    const auto m = calibrate(10, 0.2, 0.7);
    EXPECT_GT(build_exposure_table(v, m).exposure("orig"), 0.0);
    EXPECT_EQ(build_exposure_table(v, m).exposure("shown"), 0.0);
    ExposureOptions d;
    d.attribution = Attribution::DisplayedAuthor;
    EXPECT_GT(build_exposure_table(v, m, d).exposure("shown"), 0.0);
    EXPECT_EQ(build_exposure_table(v, m, d).exposure("orig"), 0.0);
}

TEST(Metrics, PromotedExcludedFromNumeratorOnly) {
    auto s = filled("m", GroupLabel::Neutral, 10, {{1, "p"}, {2, "q"}});
    s.entries[0].is_promoted = true;
    const std::vector<SessionRecord> v = {s};
    const auto m = calibrate(10, 0.2, 0.7);
    ExposureOptions opt;
    opt.include_promoted = false;
    const auto with = build_exposure_table(v, m);
    const auto without = build_exposure_table(v, m, opt);
    EXPECT_GT(with.exposure("p"), 0.0);
    EXPECT_EQ(without.entries.count("p"), 0u);
    EXPECT_EQ(with.exposure("q"), without.exposure("q"));
    EXPECT_EQ(without.total_tweets, 10);
}

TEST(Metrics, TopKExamples) {
    const std::map<AuthorId, double> t = {{"a", 3}, {"b", 1}, {"c", 2}};
    const auto top = top_k(t, 2);
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0], (RankedExposure{"a", 3}));
    EXPECT_EQ(top[1], (RankedExposure{"c", 2}));
    const auto tie = top_k(std::map<AuthorId, double>{{"b", 1}, {"a", 1}}, 1);
    EXPECT_EQ(tie.front().author, "a");
    EXPECT_EQ(top_k(t, 10).size(), 3u);
}

TEST(Metrics, GroupAggregationCountsAbsentAsZero) {
    const std::vector<ExposureTable> g = {table_of("m1", GroupLabel::Left, {{"a", 2}}),
                                          table_of("m2", GroupLabel::Left, {{"a", 4}, {"b", 6}})};
    const auto means = group_mean_exposure(g);
    EXPECT_DOUBLE_EQ(means.at("a"), 3.0);
    EXPECT_DOUBLE_EQ(means.at("b"), 3.0);
    const auto top = top_k(means, 2);
    EXPECT_EQ(top[0].author, "a");
    EXPECT_EQ(top[1].author, "b");
}

TEST(Metrics, ExposureShares) {
    const LeanLabels labels = {{"a", LeanLabel::Left}, {"b", LeanLabel::Right}, {"c", LeanLabel::Right}};
    const std::map<AuthorId, double> t = {{"a", 2}, {"b", 2}};
    auto right = [](LeanLabel l) { return l == LeanLabel::Right; };
    EXPECT_DOUBLE_EQ(exposure_share(t, 2, labels, right), 0.5);
    EXPECT_DOUBLE_EQ(exposure_share(std::map<AuthorId, double>{{"b", 1}, {"c", 3}}, 2, labels, right), 1.0);
    // whole-table denominator includes authors outside the top k
    const std::map<AuthorId, double> w = {{"a", 1}, {"b", 3}, {"c", 4}};
    EXPECT_DOUBLE_EQ(exposure_share(w, 1, labels, right), 1.0);
    EXPECT_DOUBLE_EQ(exposure_share(w, 1, labels, right, ShareDenominator::WholeTable), 0.5);
    EXPECT_THROW(exposure_share(std::map<AuthorId, double>{{"a", 0}}, 1, labels, right), UndefinedShareError);
}

// Table totals equal a direct per-entry re-summation.
TEST(MetricsProperty, Conservation) {
    testkit::Gen gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SessionRecord> s;
        for (int i = 0; i < 3; ++i) s.push_back(gen.session("m", GroupLabel::Left, gen.integer(5, 120), 15, 4, i));
        const auto m = calibrate(60, 0.2, 0.7);
        ExposureOptions opt;
        opt.scope = gen.coin() ? Scope::All : Scope::OutOfNetworkOnly;
        const auto t = build_exposure_table(s, m, opt);
        double table_mass = 0.0;
        for (const auto& [_, e] : t.entries) table_mass += e * static_cast<double>(t.total_tweets) / 1000.0;
        double direct = 0.0;
        std::int64_t n = 0;
        std::map<AuthorId, double> per_author;
        for (const auto& x : s) {
            n += static_cast<std::int64_t>(x.entries.size());
            for (const auto& e : x.entries) {
                if (opt.scope == Scope::OutOfNetworkOnly && e.in_network) continue;
                const double w = m.amplitude * std::exp(-m.rate * e.rank);
                direct += w;
                per_author[e.author_id] += w;
            }
        }
        EXPECT_EQ(t.total_tweets, n);
        EXPECT_NEAR(table_mass, direct, 1e-12 * std::max(1.0, direct));
        for (const auto& [a, w] : per_author) {
            EXPECT_NEAR(t.exposure(a), w * 1000.0 / static_cast<double>(n), 1e-12);
            EXPECT_NEAR(weighted_occurrence(s, m, a, opt), t.exposure(a), 1e-12);
        }
    }
}

TEST(MetricsProperty, DuplicationLeavesExposureUnchanged) {
    testkit::Gen gen(32);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<SessionRecord> s;
        for (int i = 0; i < 4; ++i) s.push_back(gen.session("m", GroupLabel::Right, gen.integer(5, 80), 12, 3, i));
        auto twice = s;
        twice.insert(twice.end(), s.begin(), s.end());
        const auto m = calibrate(50, 0.2, 0.7);
        const auto a = build_exposure_table(s, m);
        const auto b = build_exposure_table(twice, m);
        EXPECT_EQ(b.total_tweets, 2 * a.total_tweets);
        ASSERT_EQ(a.entries.size(), b.entries.size());
        for (const auto& [k, v] : a.entries) EXPECT_NEAR(b.exposure(k), v, 1e-12);
    }
}

TEST(MetricsProperty, MovingAnAppearanceDownLowersOnlyThatAuthor) {
    testkit::Gen gen(33);
    const auto m = calibrate(100, 0.2, 0.7);
    for (int trial = 0; trial < 50; ++trial) {
        const int L = gen.integer(10, 100);
        const int r = gen.integer(1, L - 1);
        const int r2 = gen.integer(r + 1, L);
        // the moved author swaps slot with a filler author that stays put in exposure terms
        auto base = filled("m", GroupLabel::Neutral, L, {{r, "u"}});
        auto moved = filled("m", GroupLabel::Neutral, L, {{r2, "u"}});
        for (int i = 0; i < L; ++i) {
            if (i + 1 != r && i + 1 != r2) {
                base.entries[i].author_id = base.entries[i].displayed_author_id = testkit::Gen::author(i % 7);
                moved.entries[i].author_id = moved.entries[i].displayed_author_id = testkit::Gen::author(i % 7);
            }
        }
        base.entries[r2 - 1].author_id = base.entries[r2 - 1].displayed_author_id = "filler";
        moved.entries[r - 1].author_id = moved.entries[r - 1].displayed_author_id = "filler";
        const std::vector<SessionRecord> vb = {base}, vm = {moved};
        const auto tb = build_exposure_table(vb, m);
        const auto tm = build_exposure_table(vm, m);
        EXPECT_LT(tm.exposure("u"), tb.exposure("u"));
        for (int i = 0; i < 7; ++i) {
            const auto a = testkit::Gen::author(i);
            EXPECT_EQ(tm.exposure(a), tb.exposure(a));
        }
    }
}

TEST(MetricsProperty, ScopeAndSumBounds) {
    testkit::Gen gen(34);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SessionRecord> s;
        for (int i = 0; i < 3; ++i) s.push_back(gen.session("m", GroupLabel::Balanced, gen.integer(5, 200), 20, 6, i));
        const auto m = calibrate(gen.integer(5, 300), 0.2, 0.7);
        ExposureOptions all;
        all.scope = Scope::All;
        const auto scoped = build_exposure_table(s, m);
        const auto full = build_exposure_table(s, m, all);
        double sum = 0.0;
        for (const auto& [a, e] : full.entries) {
            EXPECT_GE(e, 0.0);
            EXPECT_LE(e, 1000.0);
            EXPECT_LE(scoped.exposure(a), e);
            sum += e;
        }
        EXPECT_LE(sum, 1000.0 + 1e-9);
    }
}

TEST(MetricsProperty, TopKIsSortedPrefix) {
    testkit::Gen gen(35);
    for (int trial = 0; trial < 100; ++trial) {
        std::map<AuthorId, double> t;
        const int n = gen.integer(1, 40);
        for (int i = 0; i < n; ++i) t[testkit::Gen::author(i)] = static_cast<double>(gen.integer(0, 5));
        const auto k = static_cast<std::size_t>(gen.integer(1, 50));
        const auto top = top_k(t, k);
        const auto all = top_k(t, 1000);
        ASSERT_EQ(top.size(), std::min<std::size_t>(k, t.size()));
        for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(top[i], all[i]);
        for (std::size_t i = 1; i < all.size(); ++i) {
            EXPECT_TRUE(all[i - 1].exposure > all[i].exposure ||
                        (all[i - 1].exposure == all[i].exposure && all[i - 1].author < all[i].author));
        }
    }
}
