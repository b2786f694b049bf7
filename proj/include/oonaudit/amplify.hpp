#pragma once

// Mean amplification ratio of partisan monitors against the balanced
// baseline: a_u = ((mean_g + 1) / (mean_balanced + 1) - 1) * 100.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "mann_whitney.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace oonaudit {

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw AnalysisError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double smoothed_ratio(double mean_partisan, double mean_baseline) {
    return (mean_partisan + 1.0) / (mean_baseline + 1.0);
}

inline double amplification_ratio(std::span<const double> partisan, std::span<const double> baseline) {
    if (partisan.empty() || baseline.empty()) {
        throw AnalysisError("amplification_ratio: both samples must be nonempty");
    }
    return (smoothed_ratio(mean_of(partisan), mean_of(baseline)) - 1.0) * 100.0;
}

struct AmplificationRow {
    AuthorId author;
    double mean_group = 0.0;
    double mean_balanced = 0.0;
    double ratio_pct = 0.0;
    double u = 0.0;
    double p = 1.0;
    bool significant = false;
};

struct AmplificationOptions {
    std::size_t top_k = 50;
    double alpha = 0.05;
    MwMethod method = MwMethod::Auto;
    // Authors observed in-network for any compared monitor have censored
    // out-of-network exposure in that monitor and are left out of the ranking.
    bool exclude_followed = true;
};

/// Per-monitor E values of `author`, zero where the author was not observed.
inline std::vector<double> exposure_sample(std::span<const ExposureTable* const> tables,
                                           const AuthorId& author) {
    std::vector<double> v;
    v.reserve(tables.size());
    for (const auto* t : tables) v.push_back(t->exposure(author));
    return v;
}

/// Rows for the top-k authors of `group` (by mean E in that group), each
/// compared against the balanced monitors; sorted by ratio descending.
inline std::vector<AmplificationRow> build_amplification_report(std::span<const ExposureTable> tables,
                                                                GroupLabel group,
                                                                const AmplificationOptions& opt = {}) {
    if (group != GroupLabel::Left && group != GroupLabel::Right) {
        throw ConfigError("amplify: group must be left or right");
    }
    if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("amplify: alpha must be in (0, 1)");
    const auto partisan = tables_in_group(tables, group);
    const auto baseline = tables_in_group(tables, GroupLabel::Balanced);
    if (partisan.empty() || baseline.empty()) throw AnalysisError("amplify: empty group");
    if (partisan.size() < 2 || baseline.size() < 2) {
        throw AnalysisError("amplify: need at least 2 monitors in each compared group");
    }

    std::set<AuthorId> excluded;
    if (opt.exclude_followed) {
        for (const auto* t : partisan) excluded.insert(t->in_network_authors.begin(), t->in_network_authors.end());
        for (const auto* t : baseline) excluded.insert(t->in_network_authors.begin(), t->in_network_authors.end());
    }

    std::map<AuthorId, double> means;
    for (const auto* t : partisan) {
        for (const auto& [a, e] : t->entries) {
            if (!excluded.count(a)) means[a] += e;
        }
    }
    for (auto& [_, v] : means) v /= static_cast<double>(partisan.size());

    std::vector<AmplificationRow> rows;
    if (means.empty()) return rows;
    for (const auto& r : top_k(means, opt.top_k)) {
        const auto sg = exposure_sample(partisan, r.author);
        const auto sb = exposure_sample(baseline, r.author);
        AmplificationRow row;
        row.author = r.author;
        row.mean_group = mean_of(sg);
        row.mean_balanced = mean_of(sb);
        row.ratio_pct = (smoothed_ratio(row.mean_group, row.mean_balanced) - 1.0) * 100.0;
        const auto test = mann_whitney_u(sg, sb, opt.method);
        row.u = test.u;
        row.p = test.p;
        row.significant = test.p < opt.alpha;
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const AmplificationRow& x, const AmplificationRow& y) {
        if (x.ratio_pct != y.ratio_pct) return x.ratio_pct > y.ratio_pct;
        return x.author < y.author;
    });
    return rows;
}

struct MagnitudeComparison {
    double mean_left = 0.0;   // mean |a_u| of the selected rows
    double mean_right = 0.0;
    std::size_t rows_left = 0;
    std::size_t rows_right = 0;
    MannWhitneyResult test;
};

struct GroupMagnitude {
    MagnitudeComparison amplification;
    std::optional<MagnitudeComparison> deamplification;  // absent when one side has none
};

namespace detail {

inline std::optional<MagnitudeComparison> compare_magnitudes(std::span<const AmplificationRow> left,
                                                             std::span<const AmplificationRow> right,
                                                             bool amplified) {
    std::vector<double> l, r;
    for (const auto& row : left) {
        if (amplified ? row.ratio_pct > 0.0 : row.ratio_pct < 0.0) l.push_back(std::abs(row.ratio_pct));
    }
    for (const auto& row : right) {
        if (amplified ? row.ratio_pct > 0.0 : row.ratio_pct < 0.0) r.push_back(std::abs(row.ratio_pct));
    }
    if (l.empty() || r.empty()) return std::nullopt;
    MagnitudeComparison c;
    c.mean_left = mean_of(l);
    c.mean_right = mean_of(r);
    c.rows_left = l.size();
    c.rows_right = r.size();
    c.test = mann_whitney_u(l, r);
    return c;
}

}  // namespace detail

/// Compares amplification magnitudes of amplified rows (a_u > 0) between
/// the left and right reports, and the same for de-amplified rows.
inline GroupMagnitude group_amplification_magnitude(std::span<const AmplificationRow> left,
                                                    std::span<const AmplificationRow> right) {
    auto amp = detail::compare_magnitudes(left, right, true);
    if (!amp) throw AnalysisError("magnitude: a report has no amplified rows");
    GroupMagnitude g;
    g.amplification = *amp;
    g.deamplification = detail::compare_magnitudes(left, right, false);
    return g;
}

}  // namespace oonaudit
