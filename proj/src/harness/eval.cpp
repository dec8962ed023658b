#include "mmdr/harness/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace mmdr::harness {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void mean_std(const std::vector<double>& xs, double* mean, double* stddev) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    *mean = m;
    *stddev = xs.size() > 1
                  ? std::sqrt(ss / static_cast<double>(xs.size() - 1))
                  : 0.0;
}

}  // namespace

void EvalProtocol::validate() const {
    if (name.empty()) throw std::invalid_argument("protocol: empty name");
    if (injected_delay.lower < 0.0 ||
        injected_delay.upper < injected_delay.lower) {
        throw std::invalid_argument("protocol: bad injected_delay range");
    }
    if (moving_obstacles &&
        (obstacle_speed.upper <= 0.0 ||
         obstacle_speed.upper < obstacle_speed.lower)) {
        throw std::invalid_argument(
            "protocol: moving_obstacles needs a positive speed range");
    }
    if (episodes_per_seed <= 0) {
        throw std::invalid_argument("protocol: episodes_per_seed must be > 0");
    }
    if (seeds.size() < 3) {
        throw std::invalid_argument("protocol: need at least 3 seeds");
    }
}

EvalProtocol make_protocol(const std::string& name, const EvalConfig& eval,
                           std::vector<std::uint64_t> seeds) {
    EvalProtocol p;
    p.name = name;
    p.episodes_per_seed = eval.episodes_per_seed;
    if (!seeds.empty()) p.seeds = std::move(seeds);
    if (name == "train_env_random_delay") {
        p.injected_delay = eval.injected_delay;
    } else if (name == "moving_obstacles") {
        p.injected_delay = eval.injected_delay;
        p.moving_obstacles = true;
        p.obstacle_speed = eval.obstacle_speed;
    } else if (name == "zero_delay" || name == "ablation_k") {
        p.injected_delay = {0.0, 0.0};
    } else {
        throw std::invalid_argument("unknown eval protocol '" + name + "'");
    }
    p.validate();
    return p;
}

EvalReport evaluate(nn::Network& net, const nn::CheckpointMeta& meta,
                    const RunConfig& cfg, const EvalProtocol& proto) {
    proto.validate();
    cfg.validate();

    if (meta.pipeline_mode != pipeline_mode_name(cfg.env.pipeline.mode)) {
        throw std::runtime_error(
            "evaluate: checkpoint was trained with mode '" +
            meta.pipeline_mode + "' but the config says '" +
            pipeline_mode_name(cfg.env.pipeline.mode) + "'");
    }
    if (meta.k != cfg.env.pipeline.k) {
        throw std::runtime_error(
            "evaluate: checkpoint k=" + std::to_string(meta.k) +
            " does not match config k=" +
            std::to_string(cfg.env.pipeline.k));
    }
    const nn::ArchConfig want = arch_for(cfg);
    const nn::ArchConfig& got = net.arch();
    if (got.in_channels != want.in_channels || got.in_rows != want.in_rows ||
        got.in_cols != want.in_cols || got.proprio_dim != want.proprio_dim ||
        got.state_only != want.state_only ||
        got.action_dim != want.action_dim) {
        throw std::runtime_error(
            "evaluate: checkpoint architecture does not fit the "
            "environment's observation shape");
    }

    // The injected latency must still find old enough samples in the
    // buffers; refuse configs where it silently saturates instead.
    const ObservationPipelineConfig& pl = cfg.env.pipeline;
    const double frame_period = pl.control_dt;  // one latched frame per tick
    const double visual_capacity_s =
        (pl.visual_capacity() - 1) * frame_period;
    const double worst = proto.injected_delay.upper;
    if (worst > 0.0 && pl.mode != PipelineMode::StateOnly &&
        worst + (pl.selection_window() - 1) * frame_period >
            visual_capacity_s) {
        throw std::runtime_error(
            "evaluate: injected visual delay exceeds the buffer headroom");
    }

    EvalReport rep;
    rep.method = meta.pipeline_mode;
    rep.protocol = proto.name;

    EnvConfig env_cfg = cfg.env;
    if (proto.moving_obstacles) {
        env_cfg.world.obstacle_speed = proto.obstacle_speed;
    }

    for (std::uint64_t seed : proto.seeds) {
        Environment env(env_cfg, seed, /*env_index=*/0);
        for (int ep = 0; ep < proto.episodes_per_seed; ++ep) {
            Rng er = make_rng(seed, stream::kEval,
                              static_cast<std::uint64_t>(ep));
            DelayInjection inj;
            inj.proprio = uniform(er, proto.injected_delay.lower,
                                  proto.injected_delay.upper);
            inj.visual = uniform(er, proto.injected_delay.lower,
                                 proto.injected_delay.upper);

            Observation obs = env.reset(inj);
            EpisodeMetrics metrics;
            while (!env.episode_over()) {
                nn::PolicyOutput out = net.forward_one(obs.proprio, obs.depth);
                StepResult r =
                    env.step({out.mean[0], out.mean[1]});
                obs = std::move(r.obs);
                metrics = r.metrics;
            }

            EpisodeRow row;
            row.method = rep.method;
            row.protocol = rep.protocol;
            row.seed = seed;
            row.episode = ep;
            row.moving_distance = metrics.moving_distance;
            row.collision_steps = metrics.collision_steps;
            row.collision_count = metrics.collision_count;
            row.episode_length = env.steps();
            row.proprio_delay = inj.proprio;
            row.visual_delay = inj.visual;
            rep.rows.push_back(std::move(row));
        }
    }

    aggregate_report(&rep);
    return rep;
}

EvalReport evaluate(const std::string& checkpoint_path, const RunConfig& cfg,
                    const EvalProtocol& proto) {
    nn::CheckpointMeta meta;
    nn::Network net = nn::load_checkpoint(checkpoint_path, &meta);
    return evaluate(net, meta, cfg, proto);
}

void aggregate_report(EvalReport* report) {
    // Keyed by first appearance so the summary order follows the rows.
    std::vector<std::uint64_t> order;
    std::map<std::uint64_t, std::vector<const EpisodeRow*>> by_seed;
    for (const EpisodeRow& row : report->rows) {
        auto [it, fresh] = by_seed.try_emplace(row.seed);
        if (fresh) order.push_back(row.seed);
        it->second.push_back(&row);
    }

    report->seeds.clear();
    std::vector<double> dist_means, coll_means;
    for (std::uint64_t seed : order) {
        const auto& rows = by_seed[seed];
        SeedSummary s;
        s.seed = seed;
        for (const EpisodeRow* r : rows) {
            s.mean_distance += r->moving_distance;
            s.mean_collision_steps += static_cast<double>(r->collision_steps);
        }
        s.mean_distance /= static_cast<double>(rows.size());
        s.mean_collision_steps /= static_cast<double>(rows.size());
        report->seeds.push_back(s);
        dist_means.push_back(s.mean_distance);
        coll_means.push_back(s.mean_collision_steps);
    }

    mean_std(dist_means, &report->distance_mean, &report->distance_std);
    mean_std(coll_means, &report->collision_mean, &report->collision_std);
}

std::string report_rows_to_csv(const std::vector<EpisodeRow>& rows) {
    std::string out = kReportHeader;
    out += '\n';
    for (const EpisodeRow& r : rows) {
        out += r.method;
        out += ',';
        out += r.protocol;
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += std::to_string(r.episode);
        out += ',';
        out += fmt(r.moving_distance);
        out += ',';
        out += std::to_string(r.collision_steps);
        out += ',';
        out += std::to_string(r.collision_count);
        out += ',';
        out += std::to_string(r.episode_length);
        out += ',';
        out += fmt(r.proprio_delay);
        out += ',';
        out += fmt(r.visual_delay);
        out += '\n';
    }
    return out;
}

void write_report_csv(const std::string& path,
                      const std::vector<EpisodeRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("report: cannot write '" + path + "'");
    }
    out << report_rows_to_csv(rows);
    if (!out) {
        throw std::runtime_error("report: write to '" + path + "' failed");
    }
}

}  // namespace mmdr::harness
