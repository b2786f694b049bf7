#pragma once

// Synthetic feed platform and monitoring fleet.
//
// Every session window the world draws a shared set of posts (each author
// posts Poisson(post_rate) times, each post has a shared engagement score).
// A monitor's timeline fills its slots from followed authors' posts
// (in-network) or from everyone else's (out-of-network). Out-of-network
// posts are drawn with weight
//     popularity^gamma * exp(kappa * align(viewer_lean, author_lean))
// and all slots are ranked by log-weight + engagement + per-viewer jitter.
// The viewer lean is the mean lean of followed authors, or `delta` for
// monitors that follow nobody.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace oonaudit {

inline constexpr double kLeanLabelThreshold = 0.3;

inline LeanLabel lean_label_for(double lean) {
    if (lean < -kLeanLabelThreshold) return LeanLabel::Left;
    if (lean > kLeanLabelThreshold) return LeanLabel::Right;
    return LeanLabel::Unknown;
}

struct SimAuthor {
    AuthorId id;
    double lean = 0.0;        // -1 hard left .. +1 hard right
    double popularity = 1.0;  // Zipf weight, mean 1 over the population
    double post_rate = 2.0;   // expected posts per session window
};

struct LeanDistribution {
    enum class Kind { Mixture, PointMass };
    Kind kind = Kind::Mixture;
    // Mixture: two partisan modes at +-mode with normal spread, remaining
    // mass centred on 0.
    double left_weight = 0.4;
    double right_weight = 0.4;
    double mode = 0.6;
    double spread = 0.15;
    double center_spread = 0.1;
    double point = 0.0;  // PointMass location
};

struct WorldConfig {
    int n_authors = 200;
    double zipf_s = 1.0;
    double post_rate = 2.0;
    LeanDistribution lean;
};

/// Follow targets keyed by role; indices into SimWorld::authors.
struct FollowPools {
    std::vector<std::size_t> left_entities, right_entities;  // entities[0] is the candidate
    std::vector<std::size_t> left_strong, right_strong;
    std::vector<std::size_t> left_moderate, right_moderate;
};

// Follow preset structure of the four monitor groups.
inline constexpr int kPartisanModerateMedia = 7;
inline constexpr int kPartisanStrongMedia = 3;
inline constexpr int kPartisanEntities = 4;
inline constexpr int kBalancedMediaPerSide = 5;
inline constexpr int kStrongPoolSize = 5;
inline constexpr int kModeratePoolSize = 10;
inline constexpr int kMinAuthors = 50;

struct SimWorld {
    WorldConfig config;
    std::uint64_t seed = 0;
    std::vector<SimAuthor> authors;
    FollowPools pools;

    LeanLabels labels() const {
        LeanLabels out;
        for (const auto& a : authors) out[a.id] = lean_label_for(a.lean);
        return out;
    }
};

namespace detail {

inline std::string padded(const char* prefix, std::size_t value, int width) {
    std::string digits = std::to_string(value);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

inline void validate(const WorldConfig& c) {
    if (c.n_authors < kMinAuthors) throw ConfigError("world: n_authors must be >= 50");
    if (!(c.zipf_s >= 0.0) || !std::isfinite(c.zipf_s)) throw ConfigError("world: zipf_s must be >= 0");
    if (!(c.post_rate > 0.0)) throw ConfigError("world: post_rate must be > 0");
    const auto& l = c.lean;
    if (l.kind == LeanDistribution::Kind::PointMass) {
        if (!(l.point >= -1.0 && l.point <= 1.0)) throw ConfigError("world: lean point must be in [-1, 1]");
        return;
    }
    if (!(l.left_weight >= 0.0 && l.right_weight >= 0.0 && l.left_weight + l.right_weight <= 1.0)) {
        throw ConfigError("world: lean mixture weights must be >= 0 and sum to <= 1");
    }
    if (!(l.mode >= 0.0 && l.mode <= 1.0)) throw ConfigError("world: lean mode must be in [0, 1]");
    if (!(l.spread >= 0.0 && l.center_spread >= 0.0)) throw ConfigError("world: lean spreads must be >= 0");
}

}  // namespace detail

inline SimWorld build_world(const WorldConfig& config, std::uint64_t seed) {
    detail::validate(config);
    SimWorld w;
    w.config = config;
    w.seed = seed;
    const auto n = static_cast<std::size_t>(config.n_authors);
    const int width = std::max(4, static_cast<int>(std::to_string(n).size()));

    Rng lean_rng(derive_seed(seed, {1}));
    Rng pop_rng(derive_seed(seed, {2}));
    std::vector<std::size_t> zipf_rank(n);
    for (std::size_t i = 0; i < n; ++i) zipf_rank[i] = i + 1;
    pop_rng.shuffle(zipf_rank);
    double pop_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) pop_total += std::pow(static_cast<double>(zipf_rank[i]), -config.zipf_s);
    const double pop_scale = static_cast<double>(n) / pop_total;

    const auto& ld = config.lean;
    w.authors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SimAuthor a;
        a.id = detail::padded("u", i + 1, width);
        if (ld.kind == LeanDistribution::Kind::PointMass) {
            a.lean = ld.point;
        } else {
            const double u = lean_rng.uniform();
            double lean;
            if (u < ld.left_weight) {
                lean = lean_rng.normal(-ld.mode, ld.spread);
            } else if (u < ld.left_weight + ld.right_weight) {
                lean = lean_rng.normal(ld.mode, ld.spread);
            } else {
                lean = lean_rng.normal(0.0, ld.center_spread);
            }
            a.lean = std::clamp(lean, -1.0, 1.0);
        }
        a.popularity = std::pow(static_cast<double>(zipf_rank[i]), -config.zipf_s) * pop_scale;
        a.post_rate = config.post_rate;
        w.authors.push_back(std::move(a));
    }

    // Follow pools: the most extreme authors on each side become political
    // entities and strongly biased outlets, the next band moderate outlets.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w.authors[a].lean < w.authors[b].lean; });
    Rng pool_rng(derive_seed(seed, {3}));
    auto fill_side = [&](auto begin, std::vector<std::size_t>& entities, std::vector<std::size_t>& strong,
                         std::vector<std::size_t>& moderate) {
        std::vector<std::size_t> extreme(begin, begin + kPartisanEntities + kStrongPoolSize);
        pool_rng.shuffle(extreme);
        entities.assign(extreme.begin(), extreme.begin() + kPartisanEntities);
        strong.assign(extreme.begin() + kPartisanEntities, extreme.end());
        const auto band = begin + kPartisanEntities + kStrongPoolSize;
        moderate.assign(band, band + kModeratePoolSize);
    };
    fill_side(order.begin(), w.pools.left_entities, w.pools.left_strong, w.pools.left_moderate);
    fill_side(order.rbegin(), w.pools.right_entities, w.pools.right_strong, w.pools.right_moderate);
    return w;
}

struct RankerParams {
    double gamma = 1.0;  // popularity concentration
    double kappa = 1.0;  // ideological alignment strength
    double delta = 0.0;  // default lean of monitors with no follows
    // Target out-of-network fraction per group (monitors without follows
    // are always fully out-of-network).
    std::map<GroupLabel, double> oon_mix = {{GroupLabel::Neutral, 1.0},
                                            {GroupLabel::Left, 0.5923},
                                            {GroupLabel::Right, 0.5588},
                                            {GroupLabel::Balanced, 0.6227}};
    double promoted_rate = 0.075;
    double retweet_rate = 0.025;
    double quote_rate = 0.10;
    double engagement_sd = 1.0;  // shared per-post ranking noise
    double rank_jitter = 0.3;    // per-viewer ranking noise
    std::uint64_t seed = 1;

    double oon_for(GroupLabel g) const {
        auto it = oon_mix.find(g);
        return it == oon_mix.end() ? 1.0 : it->second;
    }
};

inline void validate(const RankerParams& p) {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(p.gamma >= 0.0)) throw ConfigError("ranker: gamma must be >= 0");
    if (!(p.kappa >= 0.0)) throw ConfigError("ranker: kappa must be >= 0");
    if (!(p.delta >= -1.0 && p.delta <= 1.0)) throw ConfigError("ranker: delta must be in [-1, 1]");
    for (const auto& [g, v] : p.oon_mix) {
        if (!unit(v)) throw ConfigError("ranker: oon_mix." + std::string(to_string(g)) + " must be in [0, 1]");
    }
    if (!unit(p.promoted_rate)) throw ConfigError("ranker: promoted_rate must be in [0, 1]");
    if (!unit(p.retweet_rate)) throw ConfigError("ranker: retweet_rate must be in [0, 1]");
    if (!unit(p.quote_rate)) throw ConfigError("ranker: quote_rate must be in [0, 1]");
    if (p.retweet_rate + p.quote_rate > 1.0) throw ConfigError("ranker: retweet_rate + quote_rate must be <= 1");
    if (!(p.engagement_sd >= 0.0) || !(p.rank_jitter >= 0.0)) {
        throw ConfigError("ranker: engagement_sd and rank_jitter must be >= 0");
    }
}

struct FleetConfig {
    std::map<GroupLabel, int> monitors = {{GroupLabel::Neutral, 10},
                                          {GroupLabel::Left, 10},
                                          {GroupLabel::Right, 10},
                                          {GroupLabel::Balanced, 10}};
    int sessions_per_day = 4;
    int duration_days = 14;
    std::map<GroupLabel, int> session_length = {{GroupLabel::Neutral, 500},
                                                {GroupLabel::Left, 700},
                                                {GroupLabel::Right, 700},
                                                {GroupLabel::Balanced, 700}};
    bool neutral_churn = false;  // recreate neutral monitors every churn_days
    int churn_days = 7;
    Timestamp start = 1727827200;  // 2024-10-02T00:00:00Z

    int monitors_in(GroupLabel g) const {
        auto it = monitors.find(g);
        return it == monitors.end() ? 0 : it->second;
    }
    int length_for(GroupLabel g) const {
        auto it = session_length.find(g);
        return it == session_length.end() ? 500 : it->second;
    }
};

inline void validate(const FleetConfig& f) {
    for (const auto& [g, c] : f.monitors) {
        if (c < 1) throw ConfigError("fleet: monitors." + std::string(to_string(g)) + " must be >= 1");
    }
    if (f.sessions_per_day < 1) throw ConfigError("fleet: sessions_per_day must be >= 1");
    if (f.duration_days < 1) throw ConfigError("fleet: duration_days must be >= 1");
    for (const auto& [g, l] : f.session_length) {
        if (l < 10) throw ConfigError("fleet: session_length." + std::string(to_string(g)) + " must be >= 10");
    }
    if (f.churn_days < 1) throw ConfigError("fleet: churn_days must be >= 1");
}

/// Builds one monitor with follows drawn from the world's pools.
inline MonitorAccount make_monitor(const SimWorld& world, GroupLabel group, std::string id,
                                   Timestamp created_at, std::uint64_t seed) {
    MonitorAccount m;
    m.id = std::move(id);
    m.group = group;
    m.created_at = created_at;
    Rng rng(derive_seed(seed, {fnv1a(m.id)}));
    auto pick = [&](std::vector<std::size_t> pool, int count) {
        rng.shuffle(pool);
        for (int i = 0; i < count && i < static_cast<int>(pool.size()); ++i) {
            m.follows.insert(world.authors[pool[static_cast<std::size_t>(i)]].id);
        }
    };
    const auto& p = world.pools;
    switch (group) {
    case GroupLabel::Neutral: break;
    case GroupLabel::Left:
        pick(p.left_moderate, kPartisanModerateMedia);
        pick(p.left_strong, kPartisanStrongMedia);
        pick(p.left_entities, kPartisanEntities);
        break;
    case GroupLabel::Right:
        pick(p.right_moderate, kPartisanModerateMedia);
        pick(p.right_strong, kPartisanStrongMedia);
        pick(p.right_entities, kPartisanEntities);
        break;
    case GroupLabel::Balanced:
        pick(p.left_moderate, kBalancedMediaPerSide);
        pick(p.right_moderate, kBalancedMediaPerSide);
        m.follows.insert(world.authors[p.left_entities.front()].id);
        m.follows.insert(world.authors[p.right_entities.front()].id);
        break;
    }
    return m;
}

struct Post {
    std::size_t author = 0;
    std::string id;
    double engagement = 0.0;
};

/// Posts available to every monitor during one session window.
struct WindowPosts {
    std::size_t window = 0;
    std::vector<Post> posts;
};

inline WindowPosts window_posts(const SimWorld& world, const RankerParams& params, std::size_t window) {
    WindowPosts wp;
    wp.window = window;
    Rng rng(derive_seed(params.seed, {world.seed, 0x77, window}));
    const std::string prefix = detail::padded("w", window, 5) + "-";
    for (std::size_t a = 0; a < world.authors.size(); ++a) {
        const int count = rng.poisson(world.authors[a].post_rate);
        for (int k = 0; k < count; ++k) {
            Post p;
            p.author = a;
            p.id = prefix + world.authors[a].id + "-" + std::to_string(k);
            p.engagement = rng.normal(0.0, params.engagement_sd);
            wp.posts.push_back(std::move(p));
        }
    }
    return wp;
}

inline double alignment(double viewer_lean, double author_lean) { return 1.0 - std::abs(viewer_lean - author_lean); }

inline double effective_lean(const SimWorld& world, const MonitorAccount& monitor, const RankerParams& params) {
    if (monitor.follows.empty()) return params.delta;
    double s = 0.0;
    int n = 0;
    for (const auto& a : world.authors) {
        if (monitor.follows.count(a.id)) {
            s += a.lean;
            ++n;
        }
    }
    return n ? s / n : params.delta;
}

/// Generates one ranked session for `monitor` from the window's posts.
inline SessionRecord rank_timeline(const SimWorld& world, const MonitorAccount& monitor,
                                   const RankerParams& params, const WindowPosts& window, int length,
                                   std::string session_id, Timestamp captured_at) {
    if (length < 1) throw ConfigError("rank_timeline: length must be >= 1");
    Rng rng(derive_seed(params.seed, {world.seed, 0x5e, fnv1a(monitor.id), window.window}));
    const double viewer = effective_lean(world, monitor, params);

    std::vector<char> followed(world.authors.size(), 0);
    for (std::size_t a = 0; a < world.authors.size(); ++a) followed[a] = monitor.follows.count(world.authors[a].id) ? 1 : 0;

    std::vector<double> log_weight(world.authors.size());
    for (std::size_t a = 0; a < world.authors.size(); ++a) {
        const auto& au = world.authors[a];
        log_weight[a] = params.gamma * std::log(au.popularity) + params.kappa * alignment(viewer, au.lean);
    }
    std::vector<std::size_t> in_posts, out_posts;
    std::vector<double> in_w, out_w;
    for (std::size_t i = 0; i < window.posts.size(); ++i) {
        const std::size_t a = window.posts[i].author;
        const double w = std::exp(log_weight[a]);
        if (followed[a]) {
            in_posts.push_back(i);
            in_w.push_back(w);
        } else {
            out_posts.push_back(i);
            out_w.push_back(w);
        }
    }
    const WeightedSampler in_sampler(in_w), out_sampler(out_w);
    if (out_sampler.empty()) throw EmptyCandidatePoolError("rank_timeline: no out-of-network candidates");
    const double oon = monitor.follows.empty() ? 1.0 : params.oon_for(monitor.group);

    struct Slot {
        TimelineEntry entry;
        double score;
    };
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(length));
    for (int s = 0; s < length; ++s) {
        const bool in_network = !in_sampler.empty() && !rng.bernoulli(oon);
        const std::size_t post_index = in_network ? in_posts[in_sampler.draw(rng)] : out_posts[out_sampler.draw(rng)];
        const Post& post = window.posts[post_index];
        const auto& shown = world.authors[post.author];

        Slot slot;
        slot.entry.in_network = in_network;
        slot.entry.displayed_author_id = shown.id;
        slot.entry.author_id = shown.id;
        slot.entry.tweet_id = post.id;
        const double kind = rng.uniform();
        if (kind < params.retweet_rate) {
            const Post& original = window.posts[out_posts[out_sampler.draw(rng)]];
            slot.entry.is_retweet = true;
            slot.entry.author_id = world.authors[original.author].id;
            slot.entry.tweet_id = "rt." + shown.id + "." + original.id;
        } else if (kind < params.retweet_rate + params.quote_rate) {
            slot.entry.is_quote = true;
        }
        slot.entry.is_promoted = rng.bernoulli(params.promoted_rate);
        slot.score = log_weight[post.author] + post.engagement + rng.normal(0.0, params.rank_jitter);
        slots.push_back(std::move(slot));
    }
    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.score > b.score; });

    SessionRecord rec;
    rec.session_id = std::move(session_id);
    rec.monitor_id = monitor.id;
    rec.group = monitor.group;
    rec.captured_at = captured_at;
    rec.entries.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i].entry.rank = static_cast<int>(i + 1);
        rec.entries.push_back(std::move(slots[i].entry));
    }
    return rec;
}

/// Single-window convenience form.
inline SessionRecord rank_timeline(const SimWorld& world, const MonitorAccount& monitor,
                                   const RankerParams& params, int length) {
    const auto wp = window_posts(world, params, 0);
    return rank_timeline(world, monitor, params, wp, length, monitor.id + ".s0000", monitor.created_at);
}

inline constexpr int kSecondsPerDay = 86400;

/// Monitors of every group, ordered by id. With churn on, each neutral slot
/// yields one monitor per churn period.
inline std::vector<MonitorAccount> make_fleet(const SimWorld& world, const FleetConfig& fleet, std::uint64_t seed) {
    validate(fleet);
    std::vector<MonitorAccount> out;
    for (GroupLabel g : kAllGroups) {
        const int count = fleet.monitors_in(g);
        for (int i = 0; i < count; ++i) {
            const std::string base = detail::padded((std::string(to_string(g)) + "-").c_str(),
                                                    static_cast<std::size_t>(i + 1), 2);
            if (g == GroupLabel::Neutral && fleet.neutral_churn) {
                const int generations = (fleet.duration_days + fleet.churn_days - 1) / fleet.churn_days;
                for (int gen = 0; gen < generations; ++gen) {
                    out.push_back(make_monitor(world, g, base + "-g" + std::to_string(gen),
                                               fleet.start + static_cast<Timestamp>(gen) * fleet.churn_days * kSecondsPerDay,
                                               seed));
                }
            } else {
                out.push_back(make_monitor(world, g, base, fleet.start, seed));
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const MonitorAccount& a, const MonitorAccount& b) { return a.id < b.id; });
    return out;
}

/// Days [first, last) during which a monitor collects sessions.
inline std::pair<int, int> active_days(const MonitorAccount& m, const FleetConfig& fleet) {
    const int first = static_cast<int>((m.created_at - fleet.start) / kSecondsPerDay);
    if (m.group == GroupLabel::Neutral && fleet.neutral_churn) {
        return {first, std::min(fleet.duration_days, first + fleet.churn_days)};
    }
    return {first, fleet.duration_days};
}

/// Emits every session of the fleet in canonical order (monitor id, then
/// capture time). Output depends only on the world, configs and seed.
inline void run_fleet(const SimWorld& world, const FleetConfig& fleet, const RankerParams& params,
                      const std::function<void(SessionRecord&&)>& sink) {
    validate(params);
    const auto monitors = make_fleet(world, fleet, params.seed);
    std::map<std::size_t, WindowPosts> cache;
    auto window_for = [&](std::size_t w) -> const WindowPosts& {
        auto it = cache.find(w);
        if (it == cache.end()) it = cache.emplace(w, window_posts(world, params, w)).first;
        return it->second;
    };
    const Timestamp spacing = kSecondsPerDay / fleet.sessions_per_day;
    for (const auto& m : monitors) {
        const auto [first, last] = active_days(m, fleet);
        int index = 0;
        for (int day = first; day < last; ++day) {
            for (int j = 0; j < fleet.sessions_per_day; ++j) {
                const auto w = static_cast<std::size_t>(day * fleet.sessions_per_day + j);
                const Timestamp at = fleet.start + static_cast<Timestamp>(day) * kSecondsPerDay + j * spacing;
                sink(rank_timeline(world, m, params, window_for(w), fleet.length_for(m.group),
                                   m.id + ".s" + detail::padded("", static_cast<std::size_t>(index++), 4), at));
            }
        }
    }
}

inline std::vector<SessionRecord> run_fleet(const SimWorld& world, const FleetConfig& fleet,
                                            const RankerParams& params) {
    std::vector<SessionRecord> out;
    run_fleet(world, fleet, params, [&](SessionRecord&& s) { out.push_back(std::move(s)); });
    return out;
}

}  // namespace oonaudit
