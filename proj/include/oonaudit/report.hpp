#pragma once

// Conversions from analysis results to report tables, plus the author
// label file (author_id, lean_label, ...) used to annotate reports.

#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "amplify.hpp"
#include "decay.hpp"
#include "inequality.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "simkit.hpp"
#include "store.hpp"

namespace oonaudit {

inline const std::vector<std::string> kAmplifyColumns = {
    "author_id", "lean_label", "mean_E_group", "mean_E_balanced", "ratio_pct", "U", "p", "significant"};

inline std::string label_of(const LeanLabels& labels, const AuthorId& a) {
    auto it = labels.find(a);
    return std::string(to_string(it == labels.end() ? LeanLabel::Unknown : it->second));
}

inline ReportTable calibration_table(const std::map<GroupLabel, DecayModel>& models) {
    ReportTable t{{"group", "reference_length", "top_fraction", "attention_fraction", "amplitude", "rate", "residual"}, {}};
    for (const auto& [g, m] : models) {
        t.add({std::string(to_string(g)), static_cast<std::int64_t>(m.reference_length), m.top_fraction,
               m.attention_fraction, m.amplitude, m.rate, calibration_residual(m)});
    }
    return t;
}

inline ReportTable stats_table(const DatasetStats& s) {
    ReportTable t{{"group", "monitors", "sessions", "tweets", "mean_session_length", "out_of_network_mean",
                   "out_of_network_sd", "retweet_mean", "retweet_sd", "quote_mean", "quote_sd", "promoted_mean",
                   "promoted_sd"},
                  {}};
    for (GroupLabel g : kAllGroups) {
        auto it = s.groups.find(g);
        if (it == s.groups.end()) continue;
        const auto& x = it->second;
        t.add({std::string(to_string(g)), static_cast<std::int64_t>(x.monitors), static_cast<std::int64_t>(x.sessions),
               static_cast<std::int64_t>(x.tweets), x.mean_session_length, x.out_of_network.mean, x.out_of_network.sd,
               x.retweet.mean, x.retweet.sd, x.quote.mean, x.quote.sd, x.promoted.mean, x.promoted.sd});
    }
    return t;
}

/// Plain-text rendering shaped like a dataset statistics table: percentages
/// with the across-monitor standard deviation in parentheses.
inline std::string stats_text(const DatasetStats& s) {
    std::ostringstream os;
    auto pct = [](const ShareSummary& x, bool with_sd) {
        char buf[64];
        if (with_sd) {
            std::snprintf(buf, sizeof buf, "%.2f%% (%.2f)", 100.0 * x.mean, 100.0 * x.sd);
        } else {
            std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x.mean);
        }
        return std::string(buf);
    };
    char line[256];
    std::snprintf(line, sizeof line, "%-22s", "statistic");
    os << line;
    for (const auto& [g, _] : s.groups) {
        std::snprintf(line, sizeof line, "%-18s", std::string(to_string(g)).c_str());
        os << line;
    }
    os << '\n';
    auto row = [&](const char* name, auto member) {
        std::snprintf(line, sizeof line, "%-22s", name);
        os << line;
        for (const auto& [g, x] : s.groups) {
            const auto& v = x.*member;
            std::snprintf(line, sizeof line, "%-18s", pct(v, v.sd > 0.0 || g != GroupLabel::Neutral).c_str());
            os << line;
        }
        os << '\n';
    };
    row("out-of-network tweet", &GroupStats::out_of_network);
    row("retweet", &GroupStats::retweet);
    row("quoted tweet", &GroupStats::quote);
    row("promoted tweet", &GroupStats::promoted);
    std::snprintf(line, sizeof line, "%-22s", "sessions");
    os << line;
    for (const auto& [_, x] : s.groups) {
        std::snprintf(line, sizeof line, "%-18zu", x.sessions);
        os << line;
    }
    os << '\n';
    std::snprintf(line, sizeof line, "%-22s", "tweets");
    os << line;
    for (const auto& [_, x] : s.groups) {
        std::snprintf(line, sizeof line, "%-18zu", x.tweets);
        os << line;
    }
    os << '\n';
    return os.str();
}

inline ReportTable exposure_report(std::span<const ExposureTable> tables) {
    ReportTable t{{"monitor_id", "author_id", "E", "scope", "policy"}, {}};
    for (const auto& x : tables) {
        for (const auto& [a, e] : x.entries) {
            t.add({x.monitor_id, a, e, std::string(to_string(x.options.scope)),
                   std::string(to_string(x.options.attribution))});
        }
    }
    return t;
}

/// Per-monitor Gini rows; monitors whose table is empty are reported with nan.
inline ReportTable gini_table(std::span<const ExposureTable> tables) {
    ReportTable t{{"monitor_id", "group", "authors", "gini"}, {}};
    for (const auto& x : tables) {
        const auto v = x.values();
        double g = std::numeric_limits<double>::quiet_NaN();
        if (!v.empty()) {
            try {
                g = gini(v);
            } catch (const AllZeroError&) {
            }
        }
        t.add({x.monitor_id, std::string(to_string(x.group)), static_cast<std::int64_t>(v.size()), g});
    }
    return t;
}

inline ReportTable gini_tests_table(const GiniDistribution& d, double alpha) {
    ReportTable t{{"group_a", "group_b", "median_a", "median_b", "U", "p", "significant"}, {}};
    for (const auto& pt : d.pairwise) {
        t.add({std::string(to_string(pt.first)), std::string(to_string(pt.second)), median(d.values(pt.first)),
               median(d.values(pt.second)), pt.test.u, pt.test.p, pt.test.p < alpha});
    }
    return t;
}

inline ReportTable lorenz_table(const MeanLorenz& m) {
    ReportTable t{{"x", "y", "sd"}, {}};
    for (std::size_t i = 0; i < m.x.size(); ++i) t.add({m.x[i], m.mean_y[i], m.sd_y[i]});
    return t;
}

inline ReportTable lorenz_curve_table(const LorenzCurve& c) {
    ReportTable t{{"x", "y"}, {}};
    for (const auto& p : c.points) t.add({p.x, p.y});
    return t;
}

inline void append_topk(ReportTable& t, GroupLabel g, std::span<const RankedExposure> ranked, const LeanLabels& labels) {
    std::int64_t rank = 0;
    for (const auto& r : ranked) {
        t.add({std::string(to_string(g)), ++rank, r.author, label_of(labels, r.author), r.exposure});
    }
}

inline ReportTable topk_header() { return ReportTable{{"group", "rank", "author_id", "lean_label", "mean_E"}, {}}; }

inline ReportTable amplify_table(std::span<const AmplificationRow> rows, const LeanLabels& labels) {
    ReportTable t{kAmplifyColumns, {}};
    for (const auto& r : rows) {
        t.add({r.author, label_of(labels, r.author), r.mean_group, r.mean_balanced, r.ratio_pct, r.u, r.p, r.significant});
    }
    return t;
}

inline ReportTable magnitude_table(const GroupMagnitude& m) {
    ReportTable t{{"direction", "mean_left", "mean_right", "rows_left", "rows_right", "U", "p"}, {}};
    auto add = [&](const char* dir, const MagnitudeComparison& c) {
        t.add({std::string(dir), c.mean_left, c.mean_right, static_cast<std::int64_t>(c.rows_left),
               static_cast<std::int64_t>(c.rows_right), c.test.u, c.test.p});
    };
    add("amplified", m.amplification);
    if (m.deamplification) add("deamplified", *m.deamplification);
    return t;
}

inline ReportTable authors_table(const SimWorld& w) {
    ReportTable t{{"author_id", "lean", "popularity", "post_rate", "lean_label"}, {}};
    for (const auto& a : w.authors) {
        t.add({a.id, a.lean, a.popularity, a.post_rate, std::string(to_string(lean_label_for(a.lean)))});
    }
    return t;
}

/// Reads a CSV with at least `author_id` and `lean_label` columns.
inline LeanLabels read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open labels file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("labels file " + path + " is empty");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string f;
        while (std::getline(ss, f, ',')) out.push_back(f);
        return out;
    };
    const auto header = split(line);
    std::size_t id_col = header.size(), label_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "author_id") id_col = i;
        if (header[i] == "lean_label") label_col = i;
    }
    if (id_col == header.size() || label_col == header.size()) {
        throw DataError("labels file needs author_id and lean_label columns");
    }
    LeanLabels out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() <= std::max(id_col, label_col)) throw ParseError(lineno, "labels row is too short");
        const auto l = parse_lean_label(f[label_col]);
        if (!l) throw ParseError(lineno, "unknown lean label '" + f[label_col] + "'");
        out[f[id_col]] = *l;
    }
    return out;
}

}  // namespace oonaudit
