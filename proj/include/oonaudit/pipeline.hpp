#pragma once

// End-to-end audit run: simulate (or read) sessions, calibrate decay per
// group from observed session lengths, build exposure tables and write every
// report plus a manifest describing the run.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "amplify.hpp"
#include "config.hpp"
#include "decay.hpp"
#include "inequality.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "simkit.hpp"
#include "store.hpp"

namespace oonaudit {

inline constexpr const char* kToolVersion = "0.3.0";

/// One decay model per group, calibrated at the group's rounded mean
/// session length.
inline std::map<GroupLabel, DecayModel> calibrate_per_group(const DatasetStats& stats, const AnalysisConfig& a) {
    std::map<GroupLabel, DecayModel> out;
    for (const auto& [g, s] : stats.groups) {
        const int length = static_cast<int>(std::lround(s.mean_session_length));
        if (length < 5) {
            throw AnalysisError("calibrate: group " + std::string(to_string(g)) + " mean session length below 5");
        }
        out[g] = calibrate(length, a.top_fraction, a.attention_fraction, a.amplitude);
    }
    return out;
}

struct AnalysisResult {
    DatasetStats stats;
    std::map<GroupLabel, DecayModel> models;
    std::vector<ExposureTable> tables;
    std::optional<GiniDistribution> gini;
    std::map<GroupLabel, MeanLorenz> lorenz;
    std::map<GroupLabel, std::vector<RankedExposure>> top;
    std::map<GroupLabel, std::vector<AmplificationRow>> amplification;  // left / right
    std::optional<GroupMagnitude> magnitude;
    std::vector<std::string> notes;  // analyses skipped for lack of data
};

inline std::vector<ExposureTable> exposure_tables(std::span<const SessionRecord> sessions,
                                                  const std::map<GroupLabel, DecayModel>& models,
                                                  const ExposureOptions& opt) {
    return build_exposure_tables(
        sessions, [&](GroupLabel g) -> const DecayModel& { return models.at(g); }, opt);
}

inline std::size_t monitors_in(std::span<const ExposureTable> tables, GroupLabel g) {
    return tables_in_group(tables, g).size();
}

inline AnalysisResult analyze(std::span<const SessionRecord> sessions, const AnalysisConfig& a) {
    if (sessions.empty()) throw DataError("analysis: no valid sessions");
    AnalysisResult r;
    r.stats = dataset_stats(sessions);
    r.models = calibrate_per_group(r.stats, a);
    r.tables = exposure_tables(sessions, r.models, a.exposure);

    bool gini_ok = true;
    for (const auto& [g, _] : r.stats.groups) {
        if (monitors_in(r.tables, g) < 2) {
            gini_ok = false;
            r.notes.push_back("pairwise gini tests skipped: group " + std::string(to_string(g)) + " has < 2 monitors");
        }
    }
    for (const auto& t : r.tables) {
        if (t.entries.empty()) {
            gini_ok = false;
            r.notes.push_back("pairwise gini tests skipped: monitor " + t.monitor_id + " has no in-scope exposure");
        }
    }
    if (gini_ok) r.gini = group_gini_distribution(r.tables);

    for (const auto& [g, _] : r.stats.groups) {
        std::vector<LorenzCurve> curves;
        for (const auto* t : tables_in_group(r.tables, g)) {
            const auto v = t->values();
            if (!v.empty()) curves.push_back(lorenz(v));
        }
        if (!curves.empty()) r.lorenz[g] = average_lorenz(curves);
        const auto group = copy_group(r.tables, g);
        r.top[g] = top_k(group_mean_exposure(group), a.top);
    }

    const bool have_balanced = monitors_in(r.tables, GroupLabel::Balanced) >= 2;
    for (GroupLabel g : {GroupLabel::Left, GroupLabel::Right}) {
        if (!have_balanced || monitors_in(r.tables, g) < 2) {
            r.notes.push_back("amplification for " + std::string(to_string(g)) +
                              " skipped: needs >= 2 monitors in the group and in balanced");
            continue;
        }
        AmplificationOptions opt;
        opt.top_k = a.amplify_top;
        opt.alpha = a.alpha;
        r.amplification[g] = build_amplification_report(r.tables, g, opt);
    }
    if (r.amplification.count(GroupLabel::Left) && r.amplification.count(GroupLabel::Right)) {
        std::vector<AmplificationRow> left = r.amplification[GroupLabel::Left];
        std::vector<AmplificationRow> right = r.amplification[GroupLabel::Right];
        if (a.magnitude_all) {
            AmplificationOptions opt;
            opt.top_k = std::numeric_limits<std::size_t>::max();
            opt.alpha = a.alpha;
            left = build_amplification_report(r.tables, GroupLabel::Left, opt);
            right = build_amplification_report(r.tables, GroupLabel::Right, opt);
        }
        try {
            r.magnitude = group_amplification_magnitude(left, right);
        } catch (const AnalysisError& e) {
            r.notes.push_back(std::string("magnitude comparison skipped: ") + e.what());
        }
    }
    return r;
}

inline std::string extension(ReportFormat f) { return f == ReportFormat::Csv ? ".csv" : ".json"; }

/// FNV-1a 64 digest of a file, as 16 hex digits.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

/// Writes every report of `r` into `dir`; returns the written file names.
inline std::vector<std::string> write_reports(const AnalysisResult& r, const LeanLabels& labels,
                                              const AnalysisConfig& a, ReportFormat format,
                                              const std::filesystem::path& dir) {
    std::vector<std::string> files;
    auto emit = [&](const std::string& stem, const ReportTable& t) {
        const std::string name = stem + extension(format);
        emit_report(t, (dir / name).string(), format);
        files.push_back(name);
    };
    emit("stats", stats_table(r.stats));
    emit("calibration", calibration_table(r.models));
    emit("exposure", exposure_report(r.tables));
    emit("gini", gini_table(r.tables));
    if (r.gini) emit("gini_tests", gini_tests_table(*r.gini, a.gini_alpha));
    for (const auto& [g, m] : r.lorenz) emit("lorenz_" + std::string(to_string(g)), lorenz_table(m));

    auto topk = topk_header();
    ReportTable shares{{"group", "k", "left_share", "right_share", "denominator"}, {}};
    for (const auto& [g, ranked] : r.top) {
        append_topk(topk, g, ranked, labels);
        const auto group = copy_group(r.tables, g);
        const auto means = group_mean_exposure(group);
        double left = std::numeric_limits<double>::quiet_NaN(), right = left;
        try {
            left = exposure_share(means, a.top, labels, [](LeanLabel l) { return l == LeanLabel::Left; },
                                  a.share_denominator);
            right = exposure_share(means, a.top, labels, [](LeanLabel l) { return l == LeanLabel::Right; },
                                   a.share_denominator);
        } catch (const UndefinedShareError&) {
        }
        shares.add({std::string(to_string(g)), static_cast<std::int64_t>(a.top), left, right,
                    std::string(a.share_denominator == ShareDenominator::TopK ? "top-k" : "whole-table")});
    }
    emit("topk", topk);
    emit("shares", shares);
    for (const auto& [g, rows] : r.amplification) emit("amplify_" + std::string(to_string(g)), amplify_table(rows, labels));
    if (r.magnitude) emit("magnitude", magnitude_table(*r.magnitude));
    return files;
}

struct PipelineOutcome {
    std::vector<std::string> files;  // relative to the output directory, manifest last
    std::size_t sessions = 0;
    ReadStats read;
    std::vector<std::string> notes;
};

/// Runs the whole workflow described by `c`. Output bytes depend only on
/// the configuration (and the input file when one is given).
inline PipelineOutcome run_pipeline(const PipelineConfig& c) {
    validate(c);
    namespace fs = std::filesystem;
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + c.out + ": " + ec.message());

    PipelineOutcome outcome;
    LeanLabels labels;
    std::vector<SessionRecord> sessions;
    std::vector<std::string> files;
    if (c.input) {
        auto rr = read_sessions(*c.input);
        sessions = std::move(rr.sessions);
        outcome.read = rr.stats;
        if (c.labels) labels = read_labels(*c.labels);
    } else {
        const auto world = build_world(c.world, c.seed);
        RankerParams params = c.ranker;
        params.seed = c.seed;
        sessions = run_fleet(world, c.fleet, params);
        write_sessions(sessions, (dir / "sessions.tsv").string());
        files.push_back("sessions.tsv");
        labels = world.labels();
        emit_report(authors_table(world), (dir / "authors.csv").string(), ReportFormat::Csv);
        files.push_back("authors.csv");
        outcome.read.sessions_in = outcome.read.sessions_valid = sessions.size();
    }
    outcome.sessions = sessions.size();

    const auto result = analyze(sessions, c.analysis);
    outcome.notes = result.notes;
    for (auto& f : write_reports(result, labels, c.analysis, c.format, dir)) files.push_back(std::move(f));

    json manifest;
    manifest["tool"] = "oonaudit";
    manifest["version"] = kToolVersion;
    manifest["config"] = to_json(c);
    json decay = json::object();
    for (const auto& [g, m] : result.models) {
        decay[std::string(to_string(g))] = {{"reference_length", m.reference_length},
                                           {"amplitude", m.amplitude},
                                           {"rate", m.rate},
                                           {"residual", calibration_residual(m)}};
    }
    manifest["decay"] = decay;
    if (!sessions.empty()) {
        Timestamp first = sessions.front().captured_at, last = first;
        for (const auto& s : sessions) {
            first = std::min(first, s.captured_at);
            last = std::max(last, s.captured_at);
        }
        manifest["data"] = {{"sessions", sessions.size()},
                            {"sessions_skipped", outcome.read.sessions_skipped},
                            {"first_capture", format_rfc3339(first)},
                            {"last_capture", format_rfc3339(last)}};
    }
    manifest["notes"] = result.notes;
    json outputs = json::array();
    for (const auto& f : files) outputs.push_back({{"file", f}, {"fnv1a64", file_digest((dir / f).string())}});
    manifest["outputs"] = outputs;
    write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    files.push_back("manifest.json");
    outcome.files = std::move(files);
    return outcome;
}

}  // namespace oonaudit
