#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmdr/harness/config.hpp"
#include "mmdr/nn/checkpoint.hpp"

namespace mmdr::harness {

// A named evaluation scenario. Every episode draws its injected latencies
// independently per modality from `injected_delay` (proprio first, then
// visual, from make_rng(seed, stream::kEval, episode)), so the two
// modalities are desynchronized the way real sensors are.
struct EvalProtocol {
    std::string name = "train_env_random_delay";
    Range injected_delay{0.04, 0.12};
    bool moving_obstacles = false;
    Range obstacle_speed{0.0, 0.0};
    int episodes_per_seed = 20;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

    void validate() const;  // throws std::invalid_argument (needs >= 3 seeds)
};

// Builds one of the stock protocols from the run's [eval] section:
//   train_env_random_delay  static training world + injected latency
//   moving_obstacles        drifting obstacles + injected latency
//   zero_delay              static world, nothing injected
//   ablation_k              alias of zero_delay (k-sweep comparisons)
// Pass empty `seeds` to keep the protocol default {1..5}.
EvalProtocol make_protocol(const std::string& name, const EvalConfig& eval,
                           std::vector<std::uint64_t> seeds = {});

struct EpisodeRow {
    std::string method;  // pipeline mode recorded in the checkpoint
    std::string protocol;
    std::uint64_t seed = 0;
    int episode = 0;
    double moving_distance = 0.0;
    std::int64_t collision_steps = 0;
    std::int64_t collision_count = 0;
    int episode_length = 0;     // control steps
    double proprio_delay = 0.0; // injected, s
    double visual_delay = 0.0;  // injected, s
};

struct SeedSummary {
    std::uint64_t seed = 0;
    double mean_distance = 0.0;
    double mean_collision_steps = 0.0;
};

// Aggregates are computed over the per-seed means; std is the sample
// standard deviation (n - 1 denominator, 0 when fewer than two seeds).
struct EvalReport {
    std::string method;
    std::string protocol;
    std::vector<EpisodeRow> rows;  // seeds * episodes_per_seed of them
    std::vector<SeedSummary> seeds;
    double distance_mean = 0.0;
    double distance_std = 0.0;
    double collision_mean = 0.0;  // collision steps per episode
    double collision_std = 0.0;
};

inline constexpr const char* kReportHeader =
    "method,protocol,seed,episode,moving_distance,collision_steps,"
    "collision_count,episode_length,proprio_delay,visual_delay";

// Runs the protocol with the deterministic policy (action = mean). The
// config must describe the run the checkpoint came from: its pipeline
// mode/k and observation shape are cross-checked against the checkpoint
// meta and architecture, and a mismatch throws std::runtime_error. The
// checkpoint file is only read, never written.
EvalReport evaluate(const std::string& checkpoint_path, const RunConfig& cfg,
                    const EvalProtocol& proto);

// Same, for an already-loaded network.
EvalReport evaluate(nn::Network& net, const nn::CheckpointMeta& meta,
                    const RunConfig& cfg, const EvalProtocol& proto);

// Recomputes the per-seed summaries and aggregate moments from raw rows;
// evaluate() uses this internally so reports are self-consistent by
// construction and tests can cross-check from the CSV alone.
void aggregate_report(EvalReport* report);

// kReportHeader line plus one row per episode; %.17g for the doubles so a
// rewrite of the same report is byte-identical.
void write_report_csv(const std::string& path,
                      const std::vector<EpisodeRow>& rows);
std::string report_rows_to_csv(const std::vector<EpisodeRow>& rows);

}  // namespace mmdr::harness
