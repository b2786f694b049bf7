#pragma once

// Shared helpers for the test suites: small generators built on std::mt19937_64
// and brute-force reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oonaudit/oonaudit.hpp"

namespace testkit {

using oonaudit::GroupLabel;
using oonaudit::SessionRecord;
using oonaudit::TimelineEntry;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin(double p = 0.5) { return uniform() < p; }

    // nonnegative vector with at least one positive value; sometimes sparse or heavy-tailed
    std::vector<double> exposures(std::size_t n) {
        std::vector<double> v(n);
        const int shape = integer(0, 3);
        for (auto& x : v) {
            switch (shape) {
                case 0: x = uniform(0.0, 10.0); break;
                case 1: x = coin(0.3) ? 0.0 : uniform(0.0, 1.0); break;
                case 2: x = std::exp(uniform(-6.0, 6.0)); break;
                default: x = static_cast<double>(integer(0, 5)); break;
            }
        }
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
        return v;
    }

    std::vector<double> distinct_sample(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform();
        return v;
    }

    // a random valid session over authors a00..a{pool-1}; follows are a00..a{followed-1}
    SessionRecord session(const std::string& monitor, GroupLabel g, int length, int pool, int followed,
                          int index) {
        SessionRecord s;
        s.session_id = monitor + ".s" + std::to_string(index);
        s.monitor_id = monitor;
        s.group = g;
        s.captured_at = 1727827200 + 3600LL * index;
        for (int r = 1; r <= length; ++r) {
            TimelineEntry e;
            e.rank = r;
            e.tweet_id = "t" + std::to_string(index) + "-" + std::to_string(r);
            const int shown = integer(0, pool - 1);
            e.displayed_author_id = author(shown);
            e.author_id = e.displayed_author_id;
            e.in_network = shown < followed;
            const double k = uniform();
            if (k < 0.1) {
                e.is_retweet = true;
                e.author_id = author(integer(0, pool - 1));
            } else if (k < 0.2) {
                e.is_quote = true;
            }
            e.is_promoted = coin(0.1);
            s.entries.push_back(e);
        }
        return s;
    }

    static std::string author(int i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "a%02d", i);
        return buf;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Mean-absolute-difference form, quadratic.
inline double gini_double_sum(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double s = 0.0;
    for (double x : v) {
        for (double y : v) s += std::abs(x - y);
    }
    return s / (2.0 * n * n * mean);
}

// Two-sided exact p by visiting every labelling of the pooled sample.
inline double mann_whitney_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::size_t n = a.size(), total = pooled.size();
    auto u_of = [&](const std::vector<char>& in_a) {
        double u = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            if (!in_a[i]) continue;
            for (std::size_t j = 0; j < total; ++j) {
                if (in_a[j]) continue;
                if (pooled[i] > pooled[j]) u += 1.0;
                else if (pooled[i] == pooled[j]) u += 0.5;
            }
        }
        return u;
    };
    std::vector<char> mask(total, 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), 1);
    const double observed = u_of(mask);
    double le = 0.0, ge = 0.0, count = 0.0;
    std::vector<char> perm(total, 0);
    std::fill(perm.end() - static_cast<std::ptrdiff_t>(n), perm.end(), 1);
    do {
        const double u = u_of(perm);
        count += 1.0;
        if (u <= observed + 1e-9) le += 1.0;
        if (u >= observed - 1e-9) ge += 1.0;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::min(1.0, 2.0 * std::min(le, ge) / count);
}

// Newton iteration on the attention constraint, independent of the bisection.
inline double newton_rate(int length, double top, double attention) {
    const double k = std::floor(top * length);
    const double l = static_cast<double>(length);
    double x = 1.0 / l;
    for (int i = 0; i < 100; ++i) {
        const double f = (1.0 - std::exp(-x * k)) / (1.0 - std::exp(-x * l)) - attention;
        const double h = 1e-7 * x;
        const double f2 = (1.0 - std::exp(-(x + h) * k)) / (1.0 - std::exp(-(x + h) * l)) - attention;
        const double step = f / ((f2 - f) / h);
        x -= step;
        if (std::abs(step) < 1e-16) break;
    }
    return x;
}

}  // namespace testkit
