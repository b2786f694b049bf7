#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "mann_whitney.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace oonaudit {

namespace detail {

inline std::vector<double> sorted_exposures(std::span<const double> exposures, const char* who) {
    if (exposures.empty()) throw AnalysisError(std::string(who) + ": empty exposure list");
    std::vector<double> v(exposures.begin(), exposures.end());
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw AnalysisError(std::string(who) + ": exposures must be finite and nonnegative");
        }
    }
    std::sort(v.begin(), v.end());
    if (!(v.back() > 0.0)) throw AllZeroError(std::string(who) + ": all exposures are zero");
    return v;
}

}  // namespace detail

/// Population Gini coefficient (mean absolute difference over twice the
/// mean), evaluated through the ascending-order identity
/// G = 2 * sum(i * E_(i)) / (n * sum E) - (n + 1) / n.
inline double gini(std::span<const double> exposures) {
    const auto v = detail::sorted_exposures(exposures, "gini");
    const double n = static_cast<double>(v.size());
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        weighted += static_cast<double>(i + 1) * v[i];
        total += v[i];
    }
    const double g = 2.0 * weighted / (n * total) - (n + 1.0) / n;
    return std::max(0.0, g);  // rounding can leave -1e-17 on equal data
}

struct LorenzPoint {
    double x = 0.0;  // cumulative population share
    double y = 0.0;  // cumulative exposure share
};

struct LorenzCurve {
    std::vector<LorenzPoint> points;

    /// Trapezoid area under the curve.
    double area() const {
        double a = 0.0;
        for (std::size_t i = 1; i < points.size(); ++i) {
            a += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) / 2.0;
        }
        return a;
    }

    /// Linear interpolation of y at x in [0, 1].
    double at(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        auto it = std::lower_bound(points.begin(), points.end(), x,
                                   [](const LorenzPoint& p, double v) { return p.x < v; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        if (hi.x == x) return hi.y;
        return lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x);
    }
};

inline LorenzCurve lorenz(std::span<const double> exposures) {
    const auto v = detail::sorted_exposures(exposures, "lorenz");
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    const double n = static_cast<double>(v.size());
    LorenzCurve c;
    c.points.reserve(v.size() + 1);
    c.points.push_back({0.0, 0.0});
    double running = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        running += v[i];
        c.points.push_back({static_cast<double>(i + 1) / n, running / total});
    }
    c.points.back().y = 1.0;
    return c;
}

/// Pointwise mean and population standard deviation of several curves,
/// each resampled on `grid` uniformly spaced x values spanning [0, 1].
struct MeanLorenz {
    std::vector<double> x;
    std::vector<double> mean_y;
    std::vector<double> sd_y;
};

inline constexpr std::size_t kLorenzGridPoints = 100;

inline MeanLorenz average_lorenz(std::span<const LorenzCurve> curves,
                                 std::size_t grid = kLorenzGridPoints) {
    if (curves.empty()) throw AnalysisError("average_lorenz: no curves");
    if (grid < 2) throw ConfigError("average_lorenz: grid needs at least 2 points");
    MeanLorenz out;
    out.x.resize(grid);
    out.mean_y.assign(grid, 0.0);
    out.sd_y.assign(grid, 0.0);
    const double k = static_cast<double>(curves.size());
    for (std::size_t j = 0; j < grid; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(grid - 1);
        out.x[j] = x;
        double s = 0.0, ss = 0.0;
        for (const auto& c : curves) {
            const double y = c.at(x);
            s += y;
            ss += y * y;
        }
        const double mean = s / k;
        out.mean_y[j] = mean;
        out.sd_y[j] = std::sqrt(std::max(0.0, ss / k - mean * mean));
    }
    return out;
}

struct MonitorGini {
    std::string monitor_id;
    std::size_t authors = 0;
    double gini = 0.0;
};

struct PairwiseGiniTest {
    GroupLabel first = GroupLabel::Neutral;
    GroupLabel second = GroupLabel::Neutral;
    MannWhitneyResult test;
};

struct GiniDistribution {
    std::map<GroupLabel, std::vector<MonitorGini>> per_group;
    std::vector<PairwiseGiniTest> pairwise;

    std::vector<double> values(GroupLabel g) const {
        std::vector<double> v;
        if (auto it = per_group.find(g); it != per_group.end()) {
            for (const auto& m : it->second) v.push_back(m.gini);
        }
        return v;
    }
};

inline double median(std::vector<double> v) {
    if (v.empty()) throw AnalysisError("median: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// One Gini per monitor table plus a Mann-Whitney test for every pair of
/// groups present, in canonical group order.
inline GiniDistribution group_gini_distribution(std::span<const ExposureTable> tables,
                                                MwMethod method = MwMethod::Auto) {
    GiniDistribution d;
    for (const auto& t : tables) {
        const auto v = t.values();
        d.per_group[t.group].push_back({t.monitor_id, v.size(), gini(v)});
    }
    for (const auto& [g, list] : d.per_group) {
        if (list.size() < 2) {
            throw AnalysisError("group_gini_distribution: group " + std::string(to_string(g)) +
                                " needs at least 2 monitors");
        }
    }
    for (std::size_t i = 0; i < kAllGroups.size(); ++i) {
        for (std::size_t j = i + 1; j < kAllGroups.size(); ++j) {
            const GroupLabel a = kAllGroups[i], b = kAllGroups[j];
            if (!d.per_group.count(a) || !d.per_group.count(b)) continue;
            const auto va = d.values(a), vb = d.values(b);
            d.pairwise.push_back({a, b, mann_whitney_u(va, vb, method)});
        }
    }
    return d;
}

}  // namespace oonaudit
