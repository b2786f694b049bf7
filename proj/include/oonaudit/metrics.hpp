#pragma once

// Weighted occurrence per 1,000 tweets: for each author, the sum of rank
// visibility weights over their appearances, scaled by 1000 / N where N is
// the total number of tweets a monitor was shown.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "decay.hpp"
#include "error.hpp"
#include "model.hpp"

namespace oonaudit {

enum class Attribution { OriginalAuthor, DisplayedAuthor };
enum class Scope { OutOfNetworkOnly, All };

inline std::string_view to_string(Attribution a) {
    return a == Attribution::OriginalAuthor ? "original-author" : "displayed-author";
}
inline std::string_view to_string(Scope s) {
    return s == Scope::OutOfNetworkOnly ? "out-of-network" : "all";
}
inline std::optional<Attribution> parse_attribution(std::string_view s) {
    if (s == "original-author" || s == "original") return Attribution::OriginalAuthor;
    if (s == "displayed-author" || s == "displayed") return Attribution::DisplayedAuthor;
    return std::nullopt;
}
inline std::optional<Scope> parse_scope(std::string_view s) {
    if (s == "out-of-network" || s == "oon") return Scope::OutOfNetworkOnly;
    if (s == "all") return Scope::All;
    return std::nullopt;
}

struct ExposureOptions {
    Attribution attribution = Attribution::OriginalAuthor;
    Scope scope = Scope::OutOfNetworkOnly;
    bool include_promoted = true;  // promoted entries always count towards N
};

struct ExposureTable {
    std::string monitor_id;
    GroupLabel group = GroupLabel::Neutral;
    std::int64_t total_tweets = 0;       // N
    std::map<AuthorId, double> entries;  // author -> E, observed authors only
    ExposureOptions options;
    // Displayed authors seen with in_network = true, i.e. observed follows.
    std::set<AuthorId> in_network_authors;

    double exposure(const AuthorId& author) const {
        auto it = entries.find(author);
        return it == entries.end() ? 0.0 : it->second;
    }

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(entries.size());
        for (const auto& [_, e] : entries) v.push_back(e);
        return v;
    }
};

namespace detail {

inline bool counts_towards_numerator(const TimelineEntry& e, const ExposureOptions& opt) {
    if (opt.scope == Scope::OutOfNetworkOnly && e.in_network) return false;
    if (!opt.include_promoted && e.is_promoted) return false;
    return true;
}

inline const AuthorId& attributed_author(const TimelineEntry& e, const ExposureOptions& opt) {
    return opt.attribution == Attribution::OriginalAuthor ? e.author_id : e.displayed_author_id;
}

inline void require_single_monitor(std::span<const SessionRecord> sessions) {
    for (const auto& s : sessions) {
        if (s.monitor_id != sessions.front().monitor_id) {
            throw AnalysisError("exposure: sessions span several monitors (" +
                                sessions.front().monitor_id + ", " + s.monitor_id + ")");
        }
    }
}

inline std::int64_t total_tweets(std::span<const SessionRecord> sessions) {
    std::int64_t n = 0;
    for (const auto& s : sessions) n += static_cast<std::int64_t>(s.entries.size());
    return n;
}

}  // namespace detail

inline double weighted_occurrence(std::span<const SessionRecord> sessions, const DecayModel& model,
                                  const AuthorId& author, const ExposureOptions& opt = {}) {
    detail::require_single_monitor(sessions);
    const std::int64_t n = detail::total_tweets(sessions);
    if (n == 0) throw EmptySessionsError("exposure: no tweets observed");
    double mass = 0.0;
    for (const auto& s : sessions) {
        for (const auto& e : s.entries) {
            if (detail::counts_towards_numerator(e, opt) && detail::attributed_author(e, opt) == author) {
                mass += model.visibility(e.rank);
            }
        }
    }
    return mass * 1000.0 / static_cast<double>(n);
}

inline ExposureTable build_exposure_table(std::span<const SessionRecord> sessions,
                                          const DecayModel& model, const ExposureOptions& opt = {}) {
    detail::require_single_monitor(sessions);
    ExposureTable t;
    t.options = opt;
    t.total_tweets = detail::total_tweets(sessions);
    if (t.total_tweets == 0) throw EmptySessionsError("exposure: no tweets observed");
    t.monitor_id = sessions.front().monitor_id;
    t.group = sessions.front().group;
    for (const auto& s : sessions) {
        for (const auto& e : s.entries) {
            if (e.in_network) t.in_network_authors.insert(e.displayed_author_id);
            if (!detail::counts_towards_numerator(e, opt)) continue;
            t.entries[detail::attributed_author(e, opt)] += model.visibility(e.rank);
        }
    }
    const double scale = 1000.0 / static_cast<double>(t.total_tweets);
    for (auto& [_, v] : t.entries) v *= scale;
    return t;
}

/// Groups sessions by monitor and builds one table per monitor, ordered by
/// monitor id. `model_for` supplies the decay model for each group.
inline std::vector<ExposureTable> build_exposure_tables(
    std::span<const SessionRecord> sessions,
    const std::function<const DecayModel&(GroupLabel)>& model_for, const ExposureOptions& opt = {}) {
    std::map<std::string, std::vector<SessionRecord>> by_monitor;
    for (const auto& s : sessions) by_monitor[s.monitor_id].push_back(s);
    std::vector<ExposureTable> out;
    out.reserve(by_monitor.size());
    for (const auto& [_, list] : by_monitor) {
        out.push_back(build_exposure_table(list, model_for(list.front().group), opt));
    }
    return out;
}

struct RankedExposure {
    AuthorId author;
    double exposure = 0.0;

    friend bool operator==(const RankedExposure&, const RankedExposure&) = default;
};

/// Descending by exposure, ties by ascending author id.
inline std::vector<RankedExposure> top_k(const std::map<AuthorId, double>& exposures, std::size_t k) {
    if (k == 0) throw ConfigError("top_k: k must be >= 1");
    std::vector<RankedExposure> all;
    all.reserve(exposures.size());
    for (const auto& [a, e] : exposures) all.push_back({a, e});
    auto cmp = [](const RankedExposure& x, const RankedExposure& y) {
        if (x.exposure != y.exposure) return x.exposure > y.exposure;
        return x.author < y.author;
    };
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), cmp);
    all.resize(n);
    return all;
}

inline std::vector<RankedExposure> top_k(const ExposureTable& table, std::size_t k) {
    return top_k(table.entries, k);
}

/// Mean E per author over the given monitors, counting absent authors as 0.
inline std::map<AuthorId, double> group_mean_exposure(std::span<const ExposureTable> tables) {
    std::map<AuthorId, double> sum;
    if (tables.empty()) return sum;
    for (const auto& t : tables) {
        for (const auto& [a, e] : t.entries) sum[a] += e;
    }
    for (auto& [_, v] : sum) v /= static_cast<double>(tables.size());
    return sum;
}

inline std::vector<const ExposureTable*> tables_in_group(std::span<const ExposureTable> tables,
                                                         GroupLabel g) {
    std::vector<const ExposureTable*> out;
    for (const auto& t : tables) {
        if (t.group == g) out.push_back(&t);
    }
    return out;
}

inline std::vector<ExposureTable> copy_group(std::span<const ExposureTable> tables, GroupLabel g) {
    std::vector<ExposureTable> out;
    for (const auto& t : tables) {
        if (t.group == g) out.push_back(t);
    }
    return out;
}

enum class ShareDenominator { TopK, WholeTable };

/// Share of summed E, among the top-k authors, held by authors whose lean
/// label satisfies `pred`. Unlabelled authors count as Unknown.
inline double exposure_share(const std::map<AuthorId, double>& exposures, std::size_t k,
                             const LeanLabels& labels, const std::function<bool(LeanLabel)>& pred,
                             ShareDenominator denominator = ShareDenominator::TopK) {
    const auto top = top_k(exposures, k);
    double hit = 0.0;
    double top_total = 0.0;
    for (const auto& r : top) {
        auto it = labels.find(r.author);
        const LeanLabel l = it == labels.end() ? LeanLabel::Unknown : it->second;
        if (pred(l)) hit += r.exposure;
        top_total += r.exposure;
    }
    double total = top_total;
    if (denominator == ShareDenominator::WholeTable) {
        total = 0.0;
        for (const auto& [_, e] : exposures) total += e;
    }
    if (!(total > 0.0)) throw UndefinedShareError("exposure_share: total exposure is zero");
    return hit / total;
}

inline double exposure_share(const ExposureTable& table, std::size_t k, const LeanLabels& labels,
                             const std::function<bool(LeanLabel)>& pred,
                             ShareDenominator denominator = ShareDenominator::TopK) {
    return exposure_share(table.entries, k, labels, pred, denominator);
}

}  // namespace oonaudit
