// oonaudit: command-line front end for the exposure audit toolkit.
//
//   oonaudit calibrate --length 500
//   oonaudit simulate --seed 7 --out run/sessions.tsv
//   oonaudit stats --input run/sessions.tsv
//   oonaudit amplify --input run/sessions.tsv --labels run/sessions.tsv.authors.csv --group left
//   oonaudit pipeline --config run.json

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oonaudit/oonaudit.hpp"

namespace oa = oonaudit;

namespace {

struct CommonOptions {
    std::string input;
    std::string labels;
    std::string out;
    std::string config;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<std::size_t> top;
    std::string scope;
    std::string attribution;
    bool exclude_promoted = false;
    std::optional<double> amplitude;
};

void add_analysis_flags(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--input", o.input, "Session log to analyse")->required();
    cmd->add_option("--labels", o.labels, "CSV with author_id and lean_label columns");
    cmd->add_option("--config", o.config, "Run configuration whose analysis section supplies defaults");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "Output file or directory (default stdout)");
    cmd->add_option("--scope", o.scope, "out-of-network or all")->check(CLI::IsMember({"out-of-network", "all"}));
    cmd->add_option("--attribution", o.attribution, "original-author or displayed-author")
        ->check(CLI::IsMember({"original-author", "displayed-author"}));
    cmd->add_flag("--exclude-promoted", o.exclude_promoted, "Drop promoted entries from exposure sums");
    cmd->add_option("--amplitude", o.amplitude, "Explicit decay amplitude instead of unit visibility at rank 1");
}

oa::AnalysisConfig analysis_config(const CommonOptions& o) {
    oa::AnalysisConfig a;
    if (!o.config.empty()) a = oa::load_config(o.config).analysis;
    if (o.alpha) a.alpha = *o.alpha;
    if (o.top) a.top = a.amplify_top = *o.top;
    if (!o.scope.empty()) a.exposure.scope = *oa::parse_scope(o.scope);
    if (!o.attribution.empty()) a.exposure.attribution = *oa::parse_attribution(o.attribution);
    if (o.exclude_promoted) a.exposure.include_promoted = false;
    if (o.amplitude) a.amplitude = *o.amplitude;
    oa::validate(a);
    return a;
}

oa::ReportFormat format_of(const CommonOptions& o) { return *oa::parse_format(o.format); }

std::vector<oa::SessionRecord> load_sessions(const std::string& path) {
    auto r = oa::read_sessions(path);
    if (r.stats.sessions_skipped) {
        std::cerr << "skipped " << r.stats.sessions_skipped << " invalid session(s)\n";
    }
    return std::move(r.sessions);
}

oa::LeanLabels load_labels(const CommonOptions& o) {
    return o.labels.empty() ? oa::LeanLabels{} : oa::read_labels(o.labels);
}

void print(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
    } else {
        oa::write_text(out, text);
    }
}

struct Prepared {
    std::vector<oa::SessionRecord> sessions;
    oa::DatasetStats stats;
    std::map<oa::GroupLabel, oa::DecayModel> models;
    std::vector<oa::ExposureTable> tables;
};

Prepared prepare(const CommonOptions& o, const oa::AnalysisConfig& a) {
    Prepared p;
    p.sessions = load_sessions(o.input);
    if (p.sessions.empty()) throw oa::DataError("no valid sessions in " + o.input);
    p.stats = oa::dataset_stats(p.sessions);
    p.models = oa::calibrate_per_group(p.stats, a);
    p.tables = oa::exposure_tables(p.sessions, p.models, a.exposure);
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Out-of-network exposure audit: decay calibration, exposure, inequality and amplification"};
    app.require_subcommand(1);
    CommonOptions o;

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Calibrate the rank visibility decay");
    int cal_length = 500;
    double cal_top = 0.2, cal_attention = 0.7;
    cal->add_option("--length", cal_length, "Reference timeline length");
    cal->add_option("--top-fraction", cal_top, "Top share of ranks");
    cal->add_option("--attention-fraction", cal_attention, "Share of attention held by the top ranks");
    cal->add_option("--amplitude", o.amplitude, "Explicit amplitude");
    std::string text_format = "text";
    cal->add_option("--format", text_format, "text, csv or json")->check(CLI::IsMember({"text", "json", "csv"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic session log");
    oa::PipelineConfig simc;
    std::string sim_config, sim_out, sim_authors, sim_start;
    std::optional<int> monitors_all, length_all;
    std::map<oa::GroupLabel, std::optional<double>> oon_over;
    std::map<oa::GroupLabel, std::optional<int>> monitors_over, length_over;
    sim->add_option("--config", sim_config, "Run configuration (world, ranker, fleet sections)");
    sim->add_option("--seed", o.seed, "Random seed");
    sim->add_option("--out", sim_out, "Session log path")->required();
    sim->add_option("--authors-out", sim_authors, "Author table path (default <out>.authors.csv)");
    auto* n_authors = sim->add_option("--n-authors", simc.world.n_authors, "Number of authors");
    auto* zipf_s = sim->add_option("--zipf-s", simc.world.zipf_s, "Zipf popularity exponent");
    auto* post_rate = sim->add_option("--post-rate", simc.world.post_rate, "Posts per author per window");
    auto* gamma = sim->add_option("--gamma", simc.ranker.gamma, "Popularity concentration");
    auto* kappa = sim->add_option("--kappa", simc.ranker.kappa, "Alignment strength");
    auto* delta = sim->add_option("--delta", simc.ranker.delta, "Default lean of follow-less monitors");
    auto* promoted = sim->add_option("--promoted-rate", simc.ranker.promoted_rate, "Promoted share");
    auto* retweet = sim->add_option("--retweet-rate", simc.ranker.retweet_rate, "Retweet share");
    auto* quote = sim->add_option("--quote-rate", simc.ranker.quote_rate, "Quote share");
    auto* engagement = sim->add_option("--engagement-sd", simc.ranker.engagement_sd, "Shared post score noise");
    auto* jitter = sim->add_option("--rank-jitter", simc.ranker.rank_jitter, "Per-viewer score noise");
    auto* spd = sim->add_option("--sessions-per-day", simc.fleet.sessions_per_day, "Sessions per day");
    auto* days = sim->add_option("--days", simc.fleet.duration_days, "Simulated days");
    auto* churn = sim->add_flag("--churn", simc.fleet.neutral_churn, "Recreate neutral monitors periodically");
    auto* churn_days = sim->add_option("--churn-days", simc.fleet.churn_days, "Neutral monitor lifetime in days");
    sim->add_option("--start", sim_start, "First capture time, YYYY-MM-DDTHH:MM:SSZ");
    sim->add_option("--monitors", monitors_all, "Monitors per group");
    sim->add_option("--length", length_all, "Session length for every group");
    for (oa::GroupLabel g : oa::kAllGroups) {
        const std::string name(oa::to_string(g));
        sim->add_option("--oon-" + name, oon_over[g], "Out-of-network mix for " + name);
        sim->add_option("--monitors-" + name, monitors_over[g], "Monitors in " + name);
        sim->add_option("--length-" + name, length_over[g], "Session length for " + name);
    }

    // ingest, stats
    auto* ingest = app.add_subcommand("ingest", "Validate a session log and print dataset statistics");
    std::string ingest_path;
    ingest->add_option("path", ingest_path, "Session log")->required();
    ingest->add_option("--format", text_format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* stats = app.add_subcommand("stats", "Dataset statistics by group");
    stats->add_option("--input", o.input, "Session log")->required();
    stats->add_option("--format", text_format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
    stats->add_option("--out", o.out, "Output file");

    // analysis commands
    auto* gini = app.add_subcommand("gini", "Per-monitor Gini coefficients and pairwise group tests");
    add_analysis_flags(gini, o);
    gini->add_option("--alpha", o.alpha, "Significance level of the pairwise tests (default 0.001)");

    auto* lorenz = app.add_subcommand("lorenz", "Mean Lorenz curves per group");
    add_analysis_flags(lorenz, o);

    auto* topk = app.add_subcommand("topk", "Top recommended authors per group");
    add_analysis_flags(topk, o);
    topk->add_option("--top", o.top, "Number of authors");
    std::string topk_group;
    topk->add_option("--group", topk_group, "Restrict to one group")
        ->check(CLI::IsMember({"neutral", "left", "right", "balanced"}));

    auto* amplify = app.add_subcommand("amplify", "Amplification against the balanced baseline");
    add_analysis_flags(amplify, o);
    std::string amp_group = "left";
    bool amp_all = false;
    amplify->add_option("--group", amp_group, "left or right")->check(CLI::IsMember({"left", "right"}));
    amplify->add_option("--top", o.top, "Number of top authors (default 50)");
    amplify->add_option("--alpha", o.alpha, "Significance level (default 0.05)");
    amplify->add_flag("--all", amp_all, "Report every observed author");

    auto* report = app.add_subcommand("report", "Write every analysis report for a session log into a directory");
    add_analysis_flags(report, o);
    report->add_option("--alpha", o.alpha, "Significance level of amplification tests");
    report->add_option("--top", o.top, "Top-k size");

    auto* pipeline = app.add_subcommand("pipeline", "Simulate (or read), analyse and report in one run");
    std::string pipe_config;
    std::string pipe_input, pipe_out, pipe_format;
    pipeline->add_option("--config", pipe_config, "Run configuration")->required();
    pipeline->add_option("--input", pipe_input, "Analyse this log instead of simulating");
    pipeline->add_option("--labels", o.labels, "Author labels for --input");
    pipeline->add_option("--out", pipe_out, "Output directory");
    pipeline->add_option("--seed", o.seed, "Random seed");
    pipeline->add_option("--format", pipe_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    pipeline->add_option("--alpha", o.alpha, "Amplification significance level");
    pipeline->add_option("--top", o.top, "Top-k size");
    pipeline->add_option("--scope", o.scope, "out-of-network or all")->check(CLI::IsMember({"out-of-network", "all"}));
    pipeline->add_option("--attribution", o.attribution, "original-author or displayed-author")
        ->check(CLI::IsMember({"original-author", "displayed-author"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return oa::exit_code(oa::ErrorCategory::Config);
    }

    try {
        if (*cal) {
            const auto m = oa::calibrate(cal_length, cal_top, cal_attention, o.amplitude);
            if (text_format == "json") {
                oa::json j = {{"reference_length", m.reference_length}, {"top_fraction", m.top_fraction},
                              {"attention_fraction", m.attention_fraction}, {"amplitude", m.amplitude},
                              {"rate", m.rate}, {"residual", oa::calibration_residual(m)}};
                std::cout << j.dump(2) << "\n";
            } else if (text_format == "csv") {
                std::cout << oa::to_csv(oa::calibration_table({{oa::GroupLabel::Neutral, m}}));
            } else {
                std::printf("A = %.10g\nlambda = %.10g\nresidual = %.3e\n", m.amplitude, m.rate,
                            oa::calibration_residual(m));
            }
            return 0;
        }

        if (*sim) {
            oa::PipelineConfig base = sim_config.empty() ? oa::PipelineConfig{} : oa::load_config(sim_config);
            // command-line values override the file
            if (*n_authors) base.world.n_authors = simc.world.n_authors;
            if (*zipf_s) base.world.zipf_s = simc.world.zipf_s;
            if (*post_rate) base.world.post_rate = simc.world.post_rate;
            if (*gamma) base.ranker.gamma = simc.ranker.gamma;
            if (*kappa) base.ranker.kappa = simc.ranker.kappa;
            if (*delta) base.ranker.delta = simc.ranker.delta;
            if (*promoted) base.ranker.promoted_rate = simc.ranker.promoted_rate;
            if (*retweet) base.ranker.retweet_rate = simc.ranker.retweet_rate;
            if (*quote) base.ranker.quote_rate = simc.ranker.quote_rate;
            if (*engagement) base.ranker.engagement_sd = simc.ranker.engagement_sd;
            if (*jitter) base.ranker.rank_jitter = simc.ranker.rank_jitter;
            if (*spd) base.fleet.sessions_per_day = simc.fleet.sessions_per_day;
            if (*days) base.fleet.duration_days = simc.fleet.duration_days;
            if (*churn) base.fleet.neutral_churn = simc.fleet.neutral_churn;
            if (*churn_days) base.fleet.churn_days = simc.fleet.churn_days;
            if (!sim_start.empty()) {
                auto t = oa::parse_rfc3339(sim_start);
                if (!t) throw oa::ConfigError("--start must be YYYY-MM-DDTHH:MM:SSZ");
                base.fleet.start = *t;
            }
            for (oa::GroupLabel g : oa::kAllGroups) {
                if (monitors_all) base.fleet.monitors[g] = *monitors_all;
                if (length_all) base.fleet.session_length[g] = *length_all;
                if (monitors_over[g]) base.fleet.monitors[g] = *monitors_over[g];
                if (length_over[g]) base.fleet.session_length[g] = *length_over[g];
                if (oon_over[g]) base.ranker.oon_mix[g] = *oon_over[g];
            }
            if (o.seed) base.seed = *o.seed;
            base.ranker.seed = base.seed;
            oa::validate(base);
            const auto world = oa::build_world(base.world, base.seed);
            std::ofstream out(sim_out, std::ios::binary | std::ios::trunc);
            if (!out) throw oa::DataError("cannot open " + sim_out);
            std::size_t count = 0, lines = 0;
            oa::run_fleet(world, base.fleet, base.ranker, [&](oa::SessionRecord&& s) {
                lines += s.entries.size();
                count += oa::write_sessions(std::span<const oa::SessionRecord>(&s, 1), out);
            });
            const std::string authors = sim_authors.empty() ? sim_out + ".authors.csv" : sim_authors;
            oa::emit_report(oa::authors_table(world), authors, oa::ReportFormat::Csv);
            std::cout << "wrote " << count << " sessions (" << lines << " lines) to " << sim_out << "\n"
                      << "wrote author table to " << authors << "\n";
            return 0;
        }

        if (*ingest) {
            auto r = oa::read_sessions(ingest_path);
            const auto s = oa::dataset_stats(r.sessions);
            if (text_format == "json") {
                oa::json j;
                j["lines"] = r.stats.lines;
                j["sessions_in"] = r.stats.sessions_in;
                j["sessions_valid"] = r.stats.sessions_valid;
                j["sessions_skipped"] = r.stats.sessions_skipped;
                oa::json skipped = oa::json::array();
                for (const auto& k : r.stats.skipped) {
                    skipped.push_back({{"session_id", k.session_id}, {"line", k.first_line}, {"violations", k.violations}});
                }
                j["skipped"] = skipped;
                j["stats"] = oa::to_json(oa::stats_table(s));
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "lines: " << r.stats.lines << "\nsessions: " << r.stats.sessions_in
                          << " (valid " << r.stats.sessions_valid << ", skipped " << r.stats.sessions_skipped << ")\n";
                for (const auto& k : r.stats.skipped) {
                    std::cout << "  skipped " << k.session_id << " (line " << k.first_line << "):";
                    for (const auto& v : k.violations) std::cout << " " << v << ";";
                    std::cout << "\n";
                }
                std::cout << "\n" << oa::stats_text(s);
            }
            for (oa::GroupLabel g : oa::kAllGroups) {
                if (!s.groups.count(g)) std::cerr << "notice: no sessions for group " << oa::to_string(g) << "\n";
            }
            return 0;
        }

        if (*stats) {
            const auto sessions = load_sessions(o.input);
            const auto s = oa::dataset_stats(sessions);
            if (text_format == "text") {
                print(oa::stats_text(s), o.out);
            } else {
                print(oa::render(oa::stats_table(s), *oa::parse_format(text_format)), o.out);
            }
            return 0;
        }

        if (*gini) {
            auto a = analysis_config(o);
            if (!o.alpha) a.alpha = a.gini_alpha;
            const auto p = prepare(o, a);
            const auto monitors = oa::gini_table(p.tables);
            const auto dist = oa::group_gini_distribution(p.tables);
            const auto tests = oa::gini_tests_table(dist, o.alpha ? *o.alpha : a.gini_alpha);
            if (format_of(o) == oa::ReportFormat::Json) {
                oa::json j = {{"monitors", oa::to_json(monitors)}, {"tests", oa::to_json(tests)}};
                print(j.dump(2) + "\n", o.out);
            } else {
                print(oa::to_csv(monitors) + "\n" + oa::to_csv(tests), o.out);
            }
            return 0;
        }

        if (*lorenz) {
            const auto a = analysis_config(o);
            const auto p = prepare(o, a);
            const std::filesystem::path dir = o.out.empty() ? "." : o.out;
            std::filesystem::create_directories(dir);
            for (const auto& [g, _] : p.stats.groups) {
                std::vector<oa::LorenzCurve> curves;
                for (const auto* t : oa::tables_in_group(p.tables, g)) {
                    if (!t->entries.empty()) curves.push_back(oa::lorenz(t->values()));
                }
                if (curves.empty()) continue;
                const auto path = dir / ("lorenz_" + std::string(oa::to_string(g)) + oa::extension(format_of(o)));
                oa::emit_report(oa::lorenz_table(oa::average_lorenz(curves)), path.string(), format_of(o));
                std::cout << path.string() << "\n";
            }
            return 0;
        }

        if (*topk) {
            const auto a = analysis_config(o);
            const auto p = prepare(o, a);
            const auto labels = load_labels(o);
            auto t = oa::topk_header();
            for (const auto& [g, _] : p.stats.groups) {
                if (!topk_group.empty() && oa::to_string(g) != topk_group) continue;
                const auto group = oa::copy_group(p.tables, g);
                oa::append_topk(t, g, oa::top_k(oa::group_mean_exposure(group), a.top), labels);
            }
            print(oa::render(t, format_of(o)), o.out);
            return 0;
        }

        if (*amplify) {
            auto a = analysis_config(o);
            const auto p = prepare(o, a);
            oa::AmplificationOptions opt;
            opt.alpha = a.alpha;
            opt.top_k = amp_all ? std::numeric_limits<std::size_t>::max() : (o.top ? *o.top : a.amplify_top);
            const auto rows = oa::build_amplification_report(p.tables, *oa::parse_group(amp_group), opt);
            print(oa::render(oa::amplify_table(rows, load_labels(o)), format_of(o)), o.out);
            return 0;
        }

        if (*report) {
            const auto a = analysis_config(o);
            const auto sessions = load_sessions(o.input);
            const auto result = oa::analyze(sessions, a);
            const std::filesystem::path dir = o.out.empty() ? "report" : o.out;
            std::filesystem::create_directories(dir);
            for (const auto& f : oa::write_reports(result, load_labels(o), a, format_of(o), dir)) {
                std::cout << (dir / f).string() << "\n";
            }
            for (const auto& n : result.notes) std::cerr << "notice: " << n << "\n";
            return 0;
        }

        if (*pipeline) {
            auto c = oa::load_config(pipe_config);
            if (!pipe_input.empty()) c.input = pipe_input;
            if (!o.labels.empty()) c.labels = o.labels;
            if (!pipe_out.empty()) c.out = pipe_out;
            if (o.seed) c.seed = *o.seed;
            if (!pipe_format.empty()) c.format = *oa::parse_format(pipe_format);
            if (o.alpha) c.analysis.alpha = *o.alpha;
            if (o.top) c.analysis.top = *o.top;
            if (!o.scope.empty()) c.analysis.exposure.scope = *oa::parse_scope(o.scope);
            if (!o.attribution.empty()) c.analysis.exposure.attribution = *oa::parse_attribution(o.attribution);
            const auto outcome = oa::run_pipeline(c);
            for (const auto& f : outcome.files) std::cout << (std::filesystem::path(c.out) / f).string() << "\n";
            for (const auto& n : outcome.notes) std::cerr << "notice: " << n << "\n";
            return 0;
        }
    } catch (const oa::AuditError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oa::exit_code(e.category());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return oa::exit_code(oa::ErrorCategory::Data);
    }
    return 0;
}
