#pragma once

// Shared domain types: monitoring accounts, timeline observations and
// session records, plus the UTC timestamp helpers used by the log format.

#include <algorithm>
#include <array>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace oonaudit {

enum class GroupLabel { Neutral, Left, Right, Balanced };

inline constexpr std::array<GroupLabel, 4> kAllGroups = {
    GroupLabel::Neutral, GroupLabel::Left, GroupLabel::Right, GroupLabel::Balanced};

inline std::string_view to_string(GroupLabel g) {
    switch (g) {
    case GroupLabel::Neutral: return "neutral";
    case GroupLabel::Left: return "left";
    case GroupLabel::Right: return "right";
    case GroupLabel::Balanced: return "balanced";
    }
    return "?";
}

inline std::optional<GroupLabel> parse_group(std::string_view s) {
    for (GroupLabel g : kAllGroups) {
        if (to_string(g) == s) return g;
    }
    return std::nullopt;
}

/// Analysis-time annotation of an author. Never read by metric code.
enum class LeanLabel { Left, Right, Unknown };

inline std::string_view to_string(LeanLabel l) {
    switch (l) {
    case LeanLabel::Left: return "left";
    case LeanLabel::Right: return "right";
    case LeanLabel::Unknown: return "unknown";
    }
    return "unknown";
}

inline std::optional<LeanLabel> parse_lean_label(std::string_view s) {
    if (s == "left") return LeanLabel::Left;
    if (s == "right") return LeanLabel::Right;
    if (s == "unknown" || s.empty()) return LeanLabel::Unknown;
    return std::nullopt;
}

using AuthorId = std::string;
using LeanLabels = std::map<AuthorId, LeanLabel>;

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline std::string format_rfc3339(Timestamp t) {
    std::time_t tt = static_cast<std::time_t>(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Accepts the canonical `YYYY-MM-DDTHH:MM:SSZ` form only.
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != 'Z') {
        return std::nullopt;
    }
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto year = num(0, 4), month = num(5, 2), day = num(8, 2);
    auto hour = num(11, 2), minute = num(14, 2), second = num(17, 2);
    if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
    if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hour > 23 || *minute > 59 ||
        *second > 60) {
        return std::nullopt;
    }
    std::tm tm{};
    tm.tm_year = *year - 1900;
    tm.tm_mon = *month - 1;
    tm.tm_mday = *day;
    tm.tm_hour = *hour;
    tm.tm_min = *minute;
    tm.tm_sec = *second;
    Timestamp t = static_cast<Timestamp>(timegm(&tm));
    if (format_rfc3339(t) != s) return std::nullopt;  // rejects Feb 30 and friends
    return t;
}

struct MonitorAccount {
    std::string id;
    GroupLabel group = GroupLabel::Neutral;
    std::set<AuthorId> follows;
    Timestamp created_at = 0;
};

struct TimelineEntry {
    int rank = 1;  // 1-based
    std::string tweet_id;
    AuthorId author_id;
    AuthorId displayed_author_id;  // differs from author_id only for retweets
    bool is_retweet = false;
    bool is_quote = false;
    bool is_promoted = false;
    bool in_network = false;

    friend bool operator==(const TimelineEntry&, const TimelineEntry&) = default;
};

struct SessionRecord {
    std::string session_id;
    std::string monitor_id;
    GroupLabel group = GroupLabel::Neutral;
    Timestamp captured_at = 0;
    std::vector<TimelineEntry> entries;

    std::size_t length() const { return entries.size(); }

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Lists every invariant violation in `record`; an empty result means valid.
/// When `monitor` is given, in-network flags are checked against its follows.
/// Without it, only checks derivable from the record itself are made.
inline std::vector<std::string> validate_session(const SessionRecord& record,
                                                 const MonitorAccount* monitor = nullptr) {
    std::vector<std::string> out;
    if (record.entries.empty()) {
        out.emplace_back("empty session");
        return out;
    }

    std::vector<int> ranks;
    ranks.reserve(record.entries.size());
    for (const auto& e : record.entries) ranks.push_back(e.rank);
    if (!std::is_sorted(ranks.begin(), ranks.end())) out.emplace_back("entries not sorted by rank");
    std::sort(ranks.begin(), ranks.end());
    if (ranks.front() < 1) out.push_back("invalid rank " + std::to_string(ranks.front()));
    if (ranks.front() > 1) out.emplace_back("rank gap at 1");
    for (std::size_t i = 1; i < ranks.size(); ++i) {
        if (ranks[i] == ranks[i - 1]) {
            out.push_back("duplicate rank " + std::to_string(ranks[i]));
        } else if (ranks[i] > ranks[i - 1] + 1) {
            out.push_back("rank gap at " + std::to_string(ranks[i - 1] + 1));
        }
    }

    const bool known_empty_follows =
        (monitor != nullptr && monitor->follows.empty()) ||
        (monitor == nullptr && record.group == GroupLabel::Neutral);
    std::map<AuthorId, bool> seen_flag;
    bool reported_empty = false;
    for (const auto& e : record.entries) {
        if (e.in_network && known_empty_follows) {
            if (!reported_empty) out.emplace_back("in_network with empty follows");
            reported_empty = true;
            continue;
        }
        if (monitor != nullptr) {
            const bool followed = monitor->follows.count(e.displayed_author_id) > 0;
            if (followed != e.in_network) {
                out.push_back("in_network flag inconsistent with follows at rank " +
                              std::to_string(e.rank));
            }
        }
        auto [it, inserted] = seen_flag.emplace(e.displayed_author_id, e.in_network);
        if (!inserted && it->second != e.in_network) {
            out.push_back("inconsistent in_network for displayed author " + e.displayed_author_id);
            it->second = e.in_network;  // report once per flip
        }
    }
    return out;
}

}  // namespace oonaudit
