#include "mmdr/sim/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "mmdr/common/math.hpp"

namespace mmdr {

const char* termination_reason_name(TerminationReason r) {
    switch (r) {
        case TerminationReason::kNone: return "none";
        case TerminationReason::kHeadOn: return "head_on";
        case TerminationReason::kFallOver: return "fall_over";
        case TerminationReason::kArenaExit: return "arena_exit";
        case TerminationReason::kStepBudget: return "step_budget";
    }
    return "?";
}

double compute_reward(double v, const std::array<double, 2>& u, bool alive,
                      const WorldConfig& cfg) {
    const double forward = clamp(v, 0.0, cfg.target_velocity);
    const double energy = -(u[0] * u[0] + u[1] * u[1]);
    return forward + 0.1 * (alive ? 1.0 : 0.0) + 0.005 * energy;
}

Environment::Environment(const EnvConfig& cfg, std::uint64_t run_seed,
                         int env_index)
    : cfg_(cfg),
      run_seed_(run_seed),
      env_index_(env_index),
      world_(cfg.world),
      pipeline_(cfg.pipeline),
      corrupt_rng_(make_rng(0)) {
    cfg_.randomization.validate();
    const double control_dt = 1.0 / cfg_.world.control_hz;
    if (std::fabs(cfg_.pipeline.control_dt - control_dt) > 1e-12) {
        throw std::invalid_argument(
            "pipeline control_dt must match the world control rate");
    }
}

Observation Environment::reset(const DelayInjection& injection) {
    // Independent sub-streams per episode: physical randomization, latency
    // draws, obstacle layout, and depth holes never consume from each
    // other, so modes that draw different latency counts still see the
    // same worlds under the same seed.
    const std::uint64_t ep_seed = derive_seed(
        run_seed_, stream::kEnv,
        (static_cast<std::uint64_t>(env_index_) << 32) | episode_);
    ++episode_;
    Rng er_rng = make_rng(splitmix64(ep_seed ^ 1));
    Rng delay_rng = make_rng(splitmix64(ep_seed ^ 2));
    Rng world_rng = make_rng(splitmix64(ep_seed ^ 3));
    corrupt_rng_ = make_rng(splitmix64(ep_seed ^ 4));

    er_ = sample_episode_randomization(cfg_.randomization, er_rng);
    const EpisodeDelaySample delays =
        sample_episode_delays(cfg_.pipeline, delay_rng);
    pipeline_.begin_episode(delays, injection);
    world_.reset(er_, world_rng);

    steps_ = 0;
    terminated_ = truncated_ = false;
    reason_ = TerminationReason::kNone;
    next_frame_ = 1;
    latched_fresh_ = false;

    // Frame 0 and the initial proprio sample, both at t = 0.
    pipeline_.push_proprio(0.0, world_.proprio_snapshot());
    if (cfg_.pipeline.mode == PipelineMode::StateOnly) {
        // Shape carrier only; the assembled stack is zero in this mode.
        pipeline_.push_frame(
            0.0, DepthImage(static_cast<std::size_t>(cfg_.world.depth_rows *
                                                     cfg_.world.depth_cols),
                            0.0));
    } else {
        DepthImage frame0 = world_.render_depth();
        corrupt_depth(frame0, er_, corrupt_rng_);
        pipeline_.push_frame(0.0, frame0);
    }

    // Warm the buffers with the robot holding still (zero action commands
    // zero rates, so the pose provably stays put).
    const int substeps_per_tick = cfg_.world.sim_hz / cfg_.world.control_hz;
    const std::array<double, 2> hold{0.0, 0.0};
    for (int tick = 0; tick < 4000 && !pipeline_.warmed_up(world_.time());
         ++tick) {
        world_.begin_tick();
        for (int s = 0; s < substeps_per_tick; ++s) {
            world_.substep(hold);
            capture_due_frames();
            pipeline_.push_proprio(world_.time(), world_.proprio_snapshot());
        }
        if (latched_fresh_) {
            pipeline_.push_frame(latched_time_, latched_frame_);
            latched_fresh_ = false;
        }
        world_.end_tick();
    }
    if (!pipeline_.warmed_up(world_.time())) {
        throw std::logic_error("buffer warm-up failed to converge");
    }
    world_.zero_metrics();
    return pipeline_.assemble(world_.time());
}

void Environment::capture_due_frames() {
    if (cfg_.pipeline.mode == PipelineMode::StateOnly) return;
    // Frame f is due at the first substep S with S/sim_hz >= f/camera_hz.
    while (static_cast<std::int64_t>(cfg_.world.camera_hz) * world_.substeps() >=
           static_cast<std::int64_t>(cfg_.world.sim_hz) * next_frame_) {
        latched_frame_ = world_.render_depth();
        corrupt_depth(latched_frame_, er_, corrupt_rng_);
        latched_time_ =
            static_cast<double>(next_frame_) / cfg_.world.camera_hz;
        latched_fresh_ = true;
        ++next_frame_;
    }
}

StepResult Environment::step(const std::array<double, 2>& action) {
    if (terminated_ || truncated_) {
        throw std::logic_error("step called after the episode ended");
    }
    const int substeps_per_tick = cfg_.world.sim_hz / cfg_.world.control_hz;
    const double control_dt = 1.0 / cfg_.world.control_hz;
    const double x0 = world_.robot().x;

    world_.begin_tick();
    double drive_sq0 = 0.0;
    double drive_sq1 = 0.0;
    for (int s = 0; s < substeps_per_tick; ++s) {
        world_.substep(action);
        capture_due_frames();
        pipeline_.push_proprio(world_.time(), world_.proprio_snapshot());
        drive_sq0 += square(world_.robot().drive[0]);
        drive_sq1 += square(world_.robot().drive[1]);
    }
    StepResult out;
    if (latched_fresh_) {
        pipeline_.push_frame(latched_time_, latched_frame_);
        latched_fresh_ = false;
        out.frame_pushed = true;
    }
    world_.end_tick();
    ++steps_;

    const bool head_on = world_.tick_head_on();
    const bool fall = world_.fall_over();
    const bool exit = world_.out_of_arena();
    terminated_ = head_on || fall || exit;
    truncated_ = !terminated_ && steps_ >= cfg_.world.max_episode_steps;
    if (head_on) {
        reason_ = TerminationReason::kHeadOn;
    } else if (fall) {
        reason_ = TerminationReason::kFallOver;
    } else if (exit) {
        reason_ = TerminationReason::kArenaExit;
    } else if (truncated_) {
        reason_ = TerminationReason::kStepBudget;
    }

    const double v = (world_.robot().x - x0) / control_dt;
    const std::array<double, 2> u{
        std::sqrt(drive_sq0 / substeps_per_tick),
        std::sqrt(drive_sq1 / substeps_per_tick)};
    out.reward = compute_reward(v, u, !terminated_, cfg_.world);
    out.terminated = terminated_;
    out.truncated = truncated_;
    out.reason = reason_;
    out.metrics = world_.metrics();
    out.proprio = world_.proprio_snapshot();
    out.obs = pipeline_.assemble(world_.time());

    if (trace_ != nullptr) {
        *trace_ << steps_ << ',' << world_.robot().x << ',' << world_.robot().y
                << ',' << world_.robot().heading << ',' << out.reward << ','
                << (world_.tick_contact() ? 1 : 0) << '\n';
    }
    return out;
}

std::size_t Environment::depth_size() const {
    return static_cast<std::size_t>(cfg_.pipeline.stack_count) *
           static_cast<std::size_t>(cfg_.world.depth_rows) *
           static_cast<std::size_t>(cfg_.world.depth_cols);
}

std::size_t Environment::proprio_size() const {
    return static_cast<std::size_t>(cfg_.pipeline.proprio_history) * 8u;
}

}  // namespace mmdr
