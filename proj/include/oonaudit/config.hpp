#pragma once

// Declarative run configuration (JSON). Unknown keys are rejected; every
// value is range-checked and errors name the offending field.

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "decay.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "simkit.hpp"
#include "store.hpp"

namespace oonaudit {

using json = nlohmann::ordered_json;

struct AnalysisConfig {
    double top_fraction = 0.2;
    double attention_fraction = 0.7;
    std::optional<double> amplitude;  // unset: unit visibility at rank 1
    ExposureOptions exposure;
    std::size_t top = 20;             // top-k rankings and exposure shares
    std::size_t amplify_top = 50;
    double alpha = 0.05;              // amplification tests
    double gini_alpha = 0.001;        // pairwise Gini tests
    ShareDenominator share_denominator = ShareDenominator::TopK;
    bool magnitude_all = false;       // magnitude over all authors, not top rows
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    std::optional<std::string> input;   // skip simulation and read this log
    std::optional<std::string> labels;  // author lean labels for --input runs
    std::string out = "out";
    ReportFormat format = ReportFormat::Csv;
    WorldConfig world;
    RankerParams ranker;
    FleetConfig fleet;
    AnalysisConfig analysis;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError("config: " + path + " must be an object");
    for (const auto& [k, _] : obj.items()) {
        bool known = false;
        for (auto key : keys) known = known || key == k;
        if (!known) throw ConfigError("config: unknown key " + (path.empty() ? k : path + "." + k));
    }
}

inline std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline void read_number(const json& obj, const std::string& path, std::string_view key, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + join(path, key) + " must be a number");
    out = v.get<double>();
}

template <class Int>
inline void read_integer(const json& obj, const std::string& path, std::string_view key, Int& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError("config: " + join(path, key) + " must be an integer");
    if constexpr (std::is_unsigned_v<Int>) {
        if (v.is_number_unsigned()) {
            out = static_cast<Int>(v.get<std::uint64_t>());
            return;
        }
        if (v.get<std::int64_t>() < 0) throw ConfigError("config: " + join(path, key) + " must be >= 0");
    }
    out = static_cast<Int>(v.get<std::int64_t>());
}

inline void read_bool(const json& obj, const std::string& path, std::string_view key, bool& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError("config: " + join(path, key) + " must be true or false");
    out = v.get<bool>();
}

inline std::optional<std::string> read_string(const json& obj, const std::string& path, std::string_view key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError("config: " + join(path, key) + " must be a string");
    return v.get<std::string>();
}

template <class T>
inline void read_group_map(const json& obj, const std::string& path, std::string_view key,
                           std::map<GroupLabel, T>& out) {
    if (!obj.contains(key)) return;
    const auto& m = obj.at(key);
    const std::string p = join(path, key);
    reject_unknown(m, p, {"neutral", "left", "right", "balanced"});
    for (GroupLabel g : kAllGroups) {
        const auto name = to_string(g);
        if (!m.contains(name)) continue;
        if constexpr (std::is_integral_v<T>) {
            read_integer(m, p, name, out[g]);
        } else {
            read_number(m, p, name, out[g]);
        }
    }
}

template <class T>
inline json group_map_json(const std::map<GroupLabel, T>& m) {
    json j = json::object();
    for (GroupLabel g : kAllGroups) {
        if (auto it = m.find(g); it != m.end()) j[std::string(to_string(g))] = it->second;
    }
    return j;
}

}  // namespace detail

inline void validate(const AnalysisConfig& a) {
    if (!(a.top_fraction > 0.0 && a.top_fraction < 1.0)) throw ConfigError("config: analysis.top_fraction must be in (0, 1)");
    if (!(a.attention_fraction > a.top_fraction && a.attention_fraction < 1.0)) {
        throw ConfigError("config: analysis.attention_fraction must be in (top_fraction, 1)");
    }
    if (a.amplitude && !(*a.amplitude > 0.0)) throw ConfigError("config: analysis.amplitude must be > 0");
    if (a.top < 1) throw ConfigError("config: analysis.top must be >= 1");
    if (a.amplify_top < 1) throw ConfigError("config: analysis.amplify_top must be >= 1");
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConfigError("config: analysis.alpha must be in (0, 1)");
    if (!(a.gini_alpha > 0.0 && a.gini_alpha < 1.0)) throw ConfigError("config: analysis.gini_alpha must be in (0, 1)");
}

inline void validate(const PipelineConfig& c) {
    detail::validate(c.world);
    validate(c.ranker);
    validate(c.fleet);
    validate(c.analysis);
    if (c.out.empty()) throw ConfigError("config: out must be a nonempty path");
}

inline PipelineConfig parse_config(const json& j) {
    using namespace detail;
    PipelineConfig c;
    reject_unknown(j, "", {"seed", "input", "labels", "out", "format", "world", "ranker", "fleet", "analysis"});
    read_integer(j, "", "seed", c.seed);
    c.input = read_string(j, "", "input");
    c.labels = read_string(j, "", "labels");
    if (auto out = read_string(j, "", "out")) c.out = *out;
    if (auto f = read_string(j, "", "format")) {
        auto parsed = parse_format(*f);
        if (!parsed) throw ConfigError("config: format must be csv or json");
        c.format = *parsed;
    }

    if (j.contains("world")) {
        const auto& w = j.at("world");
        reject_unknown(w, "world", {"n_authors", "zipf_s", "post_rate", "lean"});
        read_integer(w, "world", "n_authors", c.world.n_authors);
        read_number(w, "world", "zipf_s", c.world.zipf_s);
        read_number(w, "world", "post_rate", c.world.post_rate);
        if (w.contains("lean")) {
            const auto& l = w.at("lean");
            reject_unknown(l, "world.lean",
                           {"kind", "left_weight", "right_weight", "mode", "spread", "center_spread", "point"});
            if (auto kind = read_string(l, "world.lean", "kind")) {
                if (*kind == "mixture") {
                    c.world.lean.kind = LeanDistribution::Kind::Mixture;
                } else if (*kind == "point") {
                    c.world.lean.kind = LeanDistribution::Kind::PointMass;
                } else {
                    throw ConfigError("config: world.lean.kind must be mixture or point");
                }
            }
            read_number(l, "world.lean", "left_weight", c.world.lean.left_weight);
            read_number(l, "world.lean", "right_weight", c.world.lean.right_weight);
            read_number(l, "world.lean", "mode", c.world.lean.mode);
            read_number(l, "world.lean", "spread", c.world.lean.spread);
            read_number(l, "world.lean", "center_spread", c.world.lean.center_spread);
            read_number(l, "world.lean", "point", c.world.lean.point);
        }
    }

    if (j.contains("ranker")) {
        const auto& r = j.at("ranker");
        reject_unknown(r, "ranker", {"gamma", "kappa", "delta", "oon_mix", "promoted_rate", "retweet_rate",
                                     "quote_rate", "engagement_sd", "rank_jitter"});
        read_number(r, "ranker", "gamma", c.ranker.gamma);
        read_number(r, "ranker", "kappa", c.ranker.kappa);
        read_number(r, "ranker", "delta", c.ranker.delta);
        read_group_map(r, "ranker", "oon_mix", c.ranker.oon_mix);
        read_number(r, "ranker", "promoted_rate", c.ranker.promoted_rate);
        read_number(r, "ranker", "retweet_rate", c.ranker.retweet_rate);
        read_number(r, "ranker", "quote_rate", c.ranker.quote_rate);
        read_number(r, "ranker", "engagement_sd", c.ranker.engagement_sd);
        read_number(r, "ranker", "rank_jitter", c.ranker.rank_jitter);
    }

    if (j.contains("fleet")) {
        const auto& f = j.at("fleet");
        reject_unknown(f, "fleet", {"monitors", "sessions_per_day", "duration_days", "session_length",
                                    "neutral_churn", "churn_days", "start"});
        read_group_map(f, "fleet", "monitors", c.fleet.monitors);
        read_integer(f, "fleet", "sessions_per_day", c.fleet.sessions_per_day);
        read_integer(f, "fleet", "duration_days", c.fleet.duration_days);
        read_group_map(f, "fleet", "session_length", c.fleet.session_length);
        read_bool(f, "fleet", "neutral_churn", c.fleet.neutral_churn);
        read_integer(f, "fleet", "churn_days", c.fleet.churn_days);
        if (auto s = read_string(f, "fleet", "start")) {
            auto t = parse_rfc3339(*s);
            if (!t) throw ConfigError("config: fleet.start must be YYYY-MM-DDTHH:MM:SSZ");
            c.fleet.start = *t;
        }
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        reject_unknown(a, "analysis", {"top_fraction", "attention_fraction", "amplitude", "attribution", "scope",
                                       "include_promoted", "top", "amplify_top", "alpha", "gini_alpha",
                                       "share_denominator", "magnitude_all"});
        read_number(a, "analysis", "top_fraction", c.analysis.top_fraction);
        read_number(a, "analysis", "attention_fraction", c.analysis.attention_fraction);
        if (a.contains("amplitude") && !a.at("amplitude").is_null()) {
            double amp = 0.0;
            read_number(a, "analysis", "amplitude", amp);
            c.analysis.amplitude = amp;
        }
        if (auto s = read_string(a, "analysis", "attribution")) {
            auto p = parse_attribution(*s);
            if (!p) throw ConfigError("config: analysis.attribution must be original-author or displayed-author");
            c.analysis.exposure.attribution = *p;
        }
        if (auto s = read_string(a, "analysis", "scope")) {
            auto p = parse_scope(*s);
            if (!p) throw ConfigError("config: analysis.scope must be out-of-network or all");
            c.analysis.exposure.scope = *p;
        }
        read_bool(a, "analysis", "include_promoted", c.analysis.exposure.include_promoted);
        read_integer(a, "analysis", "top", c.analysis.top);
        read_integer(a, "analysis", "amplify_top", c.analysis.amplify_top);
        read_number(a, "analysis", "alpha", c.analysis.alpha);
        read_number(a, "analysis", "gini_alpha", c.analysis.gini_alpha);
        if (auto s = read_string(a, "analysis", "share_denominator")) {
            if (*s == "top-k") {
                c.analysis.share_denominator = ShareDenominator::TopK;
            } else if (*s == "whole-table") {
                c.analysis.share_denominator = ShareDenominator::WholeTable;
            } else {
                throw ConfigError("config: analysis.share_denominator must be top-k or whole-table");
            }
        }
        read_bool(a, "analysis", "magnitude_all", c.analysis.magnitude_all);
    }
    validate(c);
    return c;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(j);
}

/// Full configuration as JSON; parse_config(to_json(c)) reproduces `c`.
inline json to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["input"] = c.input ? json(*c.input) : json(nullptr);
    j["labels"] = c.labels ? json(*c.labels) : json(nullptr);
    j["out"] = c.out;
    j["format"] = c.format == ReportFormat::Csv ? "csv" : "json";
    const auto& w = c.world;
    j["world"] = {{"n_authors", w.n_authors}, {"zipf_s", w.zipf_s}, {"post_rate", w.post_rate}};
    j["world"]["lean"] = {{"kind", w.lean.kind == LeanDistribution::Kind::Mixture ? "mixture" : "point"},
                          {"left_weight", w.lean.left_weight},
                          {"right_weight", w.lean.right_weight},
                          {"mode", w.lean.mode},
                          {"spread", w.lean.spread},
                          {"center_spread", w.lean.center_spread},
                          {"point", w.lean.point}};
    const auto& r = c.ranker;
    j["ranker"] = {{"gamma", r.gamma},
                   {"kappa", r.kappa},
                   {"delta", r.delta},
                   {"oon_mix", detail::group_map_json(r.oon_mix)},
                   {"promoted_rate", r.promoted_rate},
                   {"retweet_rate", r.retweet_rate},
                   {"quote_rate", r.quote_rate},
                   {"engagement_sd", r.engagement_sd},
                   {"rank_jitter", r.rank_jitter}};
    const auto& f = c.fleet;
    j["fleet"] = {{"monitors", detail::group_map_json(f.monitors)},
                  {"sessions_per_day", f.sessions_per_day},
                  {"duration_days", f.duration_days},
                  {"session_length", detail::group_map_json(f.session_length)},
                  {"neutral_churn", f.neutral_churn},
                  {"churn_days", f.churn_days},
                  {"start", format_rfc3339(f.start)}};
    const auto& a = c.analysis;
    j["analysis"] = {{"top_fraction", a.top_fraction},
                     {"attention_fraction", a.attention_fraction},
                     {"amplitude", a.amplitude ? json(*a.amplitude) : json(nullptr)},
                     {"attribution", std::string(to_string(a.exposure.attribution))},
                     {"scope", std::string(to_string(a.exposure.scope))},
                     {"include_promoted", a.exposure.include_promoted},
                     {"top", a.top},
                     {"amplify_top", a.amplify_top},
                     {"alpha", a.alpha},
                     {"gini_alpha", a.gini_alpha},
                     {"share_denominator", a.share_denominator == ShareDenominator::TopK ? "top-k" : "whole-table"},
                     {"magnitude_all", a.magnitude_all}};
    return j;
}

}  // namespace oonaudit
