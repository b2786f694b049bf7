#pragma once

// Two-sided Mann-Whitney U test with midrank tie handling.
//
// Exact mode counts, for every size-n subset of the pooled sample, the sum of
// its (doubled) midranks. Doubling keeps midranks integral so the null
// distribution is built by a subset-sum count that stays exact with ties.
// Normal mode uses the tie-adjusted variance and a 0.5 continuity correction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"

namespace oonaudit {

enum class MwMethod { Auto, Exact, Normal };

struct MannWhitneyResult {
    double u = 0.0;    // min(U_a, U_b)
    double u_a = 0.0;  // statistic of the first sample
    double p = 1.0;    // two-sided
    MwMethod method = MwMethod::Normal;
    bool has_ties = false;
};

inline constexpr double kExactMaxCombinations = 1e7;
inline constexpr std::size_t kExactMaxSampleSize = 8;

namespace detail {

struct PooledRanks {
    std::vector<int> doubled_rank;  // 2 * midrank, per pooled index (a first, then b)
    double tie_term = 0.0;          // sum of t^3 - t over tie groups
    bool has_ties = false;
};

inline PooledRanks pooled_ranks(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() + b.size();
    std::vector<double> v;
    v.reserve(n);
    v.insert(v.end(), a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });

    PooledRanks out;
    out.doubled_rank.assign(n, 0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        // ranks i+1 .. j+1 share midrank (i+j+2)/2
        const int doubled = static_cast<int>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) out.doubled_rank[order[k]] = doubled;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            out.tie_term += t * t * t - t;
            out.has_ties = true;
        }
        i = j + 1;
    }
    return out;
}

inline double combinations(std::size_t n, std::size_t k) {
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

}  // namespace detail

inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                        MwMethod method = MwMethod::Auto) {
    if (a.empty() || b.empty()) throw AnalysisError("mann_whitney_u: both samples must be nonempty");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t total = n + m;
    const auto ranks = detail::pooled_ranks(a, b);

    long doubled_sum_a = 0;
    for (std::size_t i = 0; i < n; ++i) doubled_sum_a += ranks.doubled_rank[i];
    const double nd = static_cast<double>(n);
    const double md = static_cast<double>(m);

    MannWhitneyResult r;
    r.has_ties = ranks.has_ties;
    r.u_a = 0.5 * static_cast<double>(doubled_sum_a) - nd * (nd + 1.0) / 2.0;
    r.u = std::min(r.u_a, nd * md - r.u_a);

    if (method == MwMethod::Auto) {
        method = (n <= kExactMaxSampleSize && m <= kExactMaxSampleSize && !ranks.has_ties)
                     ? MwMethod::Exact
                     : MwMethod::Normal;
    }
    r.method = method;

    if (method == MwMethod::Exact) {
        if (detail::combinations(total, n) > kExactMaxCombinations) {
            throw ExactInfeasibleError("mann_whitney_u: exact distribution exceeds 1e7 labelings");
        }
        const long max_sum = std::accumulate(ranks.doubled_rank.begin(), ranks.doubled_rank.end(), 0L);
        // ways[k][s]: subsets of size k with doubled-rank sum s
        std::vector<std::vector<double>> ways(n + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t item = 0; item < total; ++item) {
            const int w = ranks.doubled_rank[item];
            for (std::size_t k = std::min(n, item + 1); k >= 1; --k) {
                auto& dst = ways[k];
                const auto& src = ways[k - 1];
                for (long s = max_sum; s >= w; --s) dst[s] += src[s - w];
            }
        }
        double below = 0.0, above = 0.0, all = 0.0;
        for (long s = 0; s <= max_sum; ++s) {
            const double c = ways[n][s];
            all += c;
            if (s <= doubled_sum_a) below += c;
            if (s >= doubled_sum_a) above += c;
        }
        r.p = std::min(1.0, 2.0 * std::min(below, above) / all);
        return r;
    }

    const double mean = nd * md / 2.0;
    const double nn = static_cast<double>(total);
    const double var = nd * md / 12.0 * ((nn + 1.0) - ranks.tie_term / (nn * (nn - 1.0)));
    if (!(var > 0.0)) {
        r.p = 1.0;  // every value tied
        return r;
    }
    const double z = std::max(0.0, std::abs(r.u_a - mean) - 0.5) / std::sqrt(var);
    r.p = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
    return r;
}

}  // namespace oonaudit
