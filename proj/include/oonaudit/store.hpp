#pragma once

// Session log format: one timeline entry per line, tab separated, fields in
// this order:
//
//   session_id monitor_id group captured_at rank tweet_id author_id
//   displayed_author_id is_retweet is_quote is_promoted in_network
//
// captured_at is `YYYY-MM-DDTHH:MM:SSZ`, booleans are `true` / `false`.
// Lines of one session are contiguous and in ascending rank. Blank lines and
// lines starting with '#' are ignored.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "model.hpp"

namespace oonaudit {

inline constexpr std::size_t kLogFields = 12;

namespace detail {

inline void check_identifier(const std::string& s, const char* field) {
    if (s.empty()) throw DataError(std::string("serialize: empty ") + field);
    for (char c : s) {
        if (c == '\t' || c == '\n' || c == '\r') {
            throw DataError(std::string("serialize: ") + field + " contains a tab or newline");
        }
    }
}

inline const char* bool_text(bool b) { return b ? "true" : "false"; }

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto tab = line.find('\t', pos);
        if (tab == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    return out;
}

}  // namespace detail

/// Writes sessions in canonical form; returns the number of sessions written.
inline std::size_t write_sessions(std::span<const SessionRecord> sessions, std::ostream& out) {
    std::string line;
    for (const auto& s : sessions) {
        detail::check_identifier(s.session_id, "session_id");
        detail::check_identifier(s.monitor_id, "monitor_id");
        if (s.entries.empty()) throw DataError("serialize: session " + s.session_id + " is empty");
        const std::string head = s.session_id + '\t' + s.monitor_id + '\t' + std::string(to_string(s.group)) +
                                 '\t' + format_rfc3339(s.captured_at) + '\t';
        int previous = 0;
        for (const auto& e : s.entries) {
            if (e.rank <= previous) throw DataError("serialize: session " + s.session_id + " ranks not ascending");
            previous = e.rank;
            detail::check_identifier(e.tweet_id, "tweet_id");
            detail::check_identifier(e.author_id, "author_id");
            detail::check_identifier(e.displayed_author_id, "displayed_author_id");
            line.clear();
            line += head;
            line += std::to_string(e.rank);
            line += '\t';
            line += e.tweet_id;
            line += '\t';
            line += e.author_id;
            line += '\t';
            line += e.displayed_author_id;
            line += '\t';
            line += detail::bool_text(e.is_retweet);
            line += '\t';
            line += detail::bool_text(e.is_quote);
            line += '\t';
            line += detail::bool_text(e.is_promoted);
            line += '\t';
            line += detail::bool_text(e.in_network);
            line += '\n';
            out << line;
        }
    }
    if (!out) throw DataError("serialize: write failed");
    return sessions.size();
}

inline std::size_t write_sessions(std::span<const SessionRecord> sessions, const std::string& path,
                                  bool append = false) {
    std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    return write_sessions(sessions, out);
}

struct SessionFilter {
    std::optional<GroupLabel> group;
    std::optional<std::string> monitor_id;
    std::optional<Timestamp> from;   // inclusive
    std::optional<Timestamp> until;  // exclusive

    bool accepts(const SessionRecord& s) const {
        if (group && s.group != *group) return false;
        if (monitor_id && s.monitor_id != *monitor_id) return false;
        if (from && s.captured_at < *from) return false;
        if (until && s.captured_at >= *until) return false;
        return true;
    }
};

struct SkippedSession {
    std::string session_id;
    std::size_t first_line = 0;
    std::vector<std::string> violations;
};

struct ReadStats {
    std::size_t lines = 0;
    std::size_t sessions_in = 0;  // sessions passing the filter
    std::size_t sessions_valid = 0;
    std::size_t sessions_skipped = 0;
    std::vector<SkippedSession> skipped;
};

namespace detail {

inline bool parse_bool(std::string_view s, std::size_t line, const char* field) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError(line, std::string("field ") + field + " must be true or false");
}

inline int parse_rank(std::string_view s, std::size_t line) {
    if (s.empty() || s.size() > 9) throw ParseError(line, "rank must be a positive integer");
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw ParseError(line, "rank must be a positive integer");
        v = v * 10 + (c - '0');
    }
    return v;
}

}  // namespace detail

/// Streams sessions from `in`. Filtered-out sessions are dropped silently;
/// sessions failing validation are counted in the returned stats and skipped.
inline ReadStats read_sessions(std::istream& in, const std::function<void(SessionRecord&&)>& sink,
                               const SessionFilter& filter = {}) {
    ReadStats stats;
    SessionRecord current;
    std::size_t current_line = 0;
    bool open = false;
    auto flush = [&] {
        if (!open) return;
        open = false;
        if (!filter.accepts(current)) return;
        ++stats.sessions_in;
        auto violations = validate_session(current);
        if (!violations.empty()) {
            ++stats.sessions_skipped;
            stats.skipped.push_back({current.session_id, current_line, std::move(violations)});
            return;
        }
        ++stats.sessions_valid;
        sink(std::move(current));
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        ++stats.lines;
        const auto f = detail::split_tabs(line);
        if (f.size() != kLogFields) {
            throw ParseError(lineno, "expected " + std::to_string(kLogFields) + " fields, found " +
                                         std::to_string(f.size()));
        }
        const auto group = parse_group(f[2]);
        if (!group) throw ParseError(lineno, "unknown group '" + std::string(f[2]) + "'");
        const auto at = parse_rfc3339(f[3]);
        if (!at) throw ParseError(lineno, "captured_at is not a UTC RFC-3339 timestamp");
        for (std::size_t i : {0u, 1u, 5u, 6u, 7u}) {
            if (f[i].empty()) throw ParseError(lineno, "empty identifier field " + std::to_string(i + 1));
        }

        if (!open || current.session_id != f[0]) {
            flush();
            current = SessionRecord{};
            current.session_id = std::string(f[0]);
            current.monitor_id = std::string(f[1]);
            current.group = *group;
            current.captured_at = *at;
            current_line = lineno;
            open = true;
        } else if (current.monitor_id != f[1] || current.group != *group || current.captured_at != *at) {
            throw ParseError(lineno, "session header fields change within session " + current.session_id);
        }
        TimelineEntry e;
        e.rank = detail::parse_rank(f[4], lineno);
        e.tweet_id = std::string(f[5]);
        e.author_id = std::string(f[6]);
        e.displayed_author_id = std::string(f[7]);
        e.is_retweet = detail::parse_bool(f[8], lineno, "is_retweet");
        e.is_quote = detail::parse_bool(f[9], lineno, "is_quote");
        e.is_promoted = detail::parse_bool(f[10], lineno, "is_promoted");
        e.in_network = detail::parse_bool(f[11], lineno, "in_network");
        current.entries.push_back(std::move(e));
    }
    flush();
    return stats;
}

struct ReadResult {
    std::vector<SessionRecord> sessions;
    ReadStats stats;
};

inline ReadResult read_sessions(const std::string& path, const SessionFilter& filter = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    ReadResult r;
    r.stats = read_sessions(in, [&](SessionRecord&& s) { r.sessions.push_back(std::move(s)); }, filter);
    return r;
}

struct ShareSummary {
    double mean = 0.0;
    double sd = 0.0;  // population sd across monitors
};

struct GroupStats {
    std::size_t monitors = 0;
    std::size_t sessions = 0;
    std::size_t tweets = 0;
    double mean_session_length = 0.0;
    ShareSummary out_of_network, retweet, quote, promoted;
};

struct DatasetStats {
    std::map<GroupLabel, GroupStats> groups;  // groups with no sessions are absent
};

inline ShareSummary summarize(const std::vector<double>& v) {
    ShareSummary s;
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

/// Table-1 style proportions: shares are computed per monitor first, then
/// averaged per group.
inline DatasetStats dataset_stats(std::span<const SessionRecord> sessions) {
    struct Counts {
        GroupLabel group;
        std::size_t sessions = 0, tweets = 0, oon = 0, retweet = 0, quote = 0, promoted = 0;
    };
    std::map<std::string, Counts> per_monitor;
    for (const auto& s : sessions) {
        auto [it, _] = per_monitor.try_emplace(s.monitor_id, Counts{s.group});
        auto& c = it->second;
        ++c.sessions;
        for (const auto& e : s.entries) {
            ++c.tweets;
            c.oon += e.in_network ? 0 : 1;
            c.retweet += e.is_retweet;
            c.quote += e.is_quote;
            c.promoted += e.is_promoted;
        }
    }
    std::map<GroupLabel, std::vector<double>> oon, rt, qt, pr;
    DatasetStats out;
    for (const auto& [_, c] : per_monitor) {
        if (c.tweets == 0) continue;
        auto& g = out.groups[c.group];
        ++g.monitors;
        g.sessions += c.sessions;
        g.tweets += c.tweets;
        const double n = static_cast<double>(c.tweets);
        oon[c.group].push_back(static_cast<double>(c.oon) / n);
        rt[c.group].push_back(static_cast<double>(c.retweet) / n);
        qt[c.group].push_back(static_cast<double>(c.quote) / n);
        pr[c.group].push_back(static_cast<double>(c.promoted) / n);
    }
    for (auto& [g, st] : out.groups) {
        st.mean_session_length = st.sessions ? static_cast<double>(st.tweets) / static_cast<double>(st.sessions) : 0.0;
        st.out_of_network = summarize(oon[g]);
        st.retweet = summarize(rt[g]);
        st.quote = summarize(qt[g]);
        st.promoted = summarize(pr[g]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct ReportTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw AnalysisError("report: row width does not match header");
        rows.push_back(std::move(row));
    }
};

enum class ReportFormat { Csv, Json };

inline std::optional<ReportFormat> parse_format(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    return std::nullopt;
}

/// Six significant digits; non-finite values print as nan / inf / -inf.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return csv_field(v);
            } else if constexpr (std::is_same_v<T, double>) {
                return format_number(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return std::to_string(v);
            }
        },
        c);
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
                return std::strtod(format_number(v).c_str(), nullptr);
            } else {
                return v;
            }
        },
        c);
}

}  // namespace detail

inline std::string to_csv(const ReportTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += detail::csv_field(t.columns[i]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += detail::cell_text(row[i]);
        }
        out += '\n';
    }
    return out;
}

/// Array of row objects keyed by column name, in column order. Numbers carry
/// the same six-digit rounding as the CSV form.
inline nlohmann::ordered_json to_json(const ReportTable& t) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = detail::cell_json(row[i]);
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline std::string render(const ReportTable& t, ReportFormat format) {
    return format == ReportFormat::Csv ? to_csv(t) : to_json(t).dump(2) + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

inline void emit_report(const ReportTable& t, const std::string& path, ReportFormat format) {
    write_text(path, render(t, format));
}

}  // namespace oonaudit
