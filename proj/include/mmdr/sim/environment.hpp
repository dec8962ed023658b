#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "mmdr/delay/pipeline.hpp"
#include "mmdr/rand/domain_rand.hpp"
#include "mmdr/sim/world.hpp"

namespace mmdr {

struct EnvConfig {
    WorldConfig world;
    ObservationPipelineConfig pipeline;
    RandomizationRanges randomization;
};

enum class TerminationReason {
    kNone,
    kHeadOn,
    kFallOver,
    kArenaExit,
    kStepBudget,
};

const char* termination_reason_name(TerminationReason r);

struct StepResult {
    Observation obs;
    std::vector<double> proprio;  // newest raw snapshot this tick
    bool frame_pushed = false;    // camera delivered a new frame this tick
    double reward = 0.0;
    bool terminated = false;  // fall-over / head-on / arena exit
    bool truncated = false;   // step budget reached
    TerminationReason reason = TerminationReason::kNone;
    EpisodeMetrics metrics;   // cumulative for the episode
};

// Reward per control step: clip(v, 0, v_target) + 0.1 if alive
// - 0.005 * |u|^2, with u the per-channel RMS of the normalized drive.
double compute_reward(double v, const std::array<double, 2>& u, bool alive,
                      const WorldConfig& cfg);

// One training/eval environment: world physics at sim_hz, policy interface
// at control_hz, camera at camera_hz feeding the delay pipeline. All
// per-episode randomness is derived from (run_seed, env_index, episode), so
// two modes trained with the same seed see identical worlds.
class Environment {
public:
    Environment(const EnvConfig& cfg, std::uint64_t run_seed, int env_index);

    // Starts a new episode (optionally with injected test-time latency) and
    // returns the first observation after buffer warm-up.
    Observation reset(const DelayInjection& injection = {});

    // Runs sim_hz/control_hz substeps holding the action. Throws
    // std::logic_error if the episode already ended.
    StepResult step(const std::array<double, 2>& action);

    bool episode_over() const { return terminated_ || truncated_; }
    int steps() const { return steps_; }
    double time() const { return world_.time(); }

    const World& world() const { return world_; }
    const ObservationPipeline& pipeline() const { return pipeline_; }
    const EpisodeRandomization& randomization() const { return er_; }
    const EpisodeMetrics& metrics() const { return world_.metrics(); }
    TerminationReason reason() const { return reason_; }

    std::size_t depth_size() const;    // stack_count * rows * cols
    std::size_t proprio_size() const;  // history * 8

    // Optional per-tick trace sink (tick,x,y,heading,reward,contact rows);
    // the caller owns the stream and writes any header.
    void set_trace(std::ostream* os) { trace_ = os; }

private:
    void capture_due_frames();

    EnvConfig cfg_;
    std::uint64_t run_seed_;
    int env_index_;
    std::uint64_t episode_ = 0;

    World world_;
    ObservationPipeline pipeline_;
    EpisodeRandomization er_;
    Rng corrupt_rng_;

    DepthImage latched_frame_;
    double latched_time_ = 0.0;
    bool latched_fresh_ = false;
    std::int64_t next_frame_ = 1;

    int steps_ = 0;
    bool terminated_ = false;
    bool truncated_ = false;
    TerminationReason reason_ = TerminationReason::kNone;
    std::ostream* trace_ = nullptr;
};

}  // namespace mmdr
