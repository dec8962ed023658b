#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmdr/common/rng.hpp"
#include "mmdr/delay/sample_buffer.hpp"

namespace mmdr {

// How the delayed observation is put together from the raw sensor buffers.
//
//   MMDR         stack_count depth frames, one drawn uniformly from each
//                consecutive sub-buffer of k frames; proprio delayed by a
//                per-episode latency and read back via linear interpolation.
//   NoDelay      the stack_count newest frames, zero proprio latency.
//   FrameExtract frames at indices (0, k, 2k, ...), zero proprio latency.
//   FixedDelay   both modalities shifted by a constant `fixed_delay`.
//   Interpolation per-pixel lerp of the frames bracketing now - t_d, with
//                t_d drawn once per episode; proprio as in MMDR.
//   StateOnly    depth stack is all zeros; proprio as in MMDR.
enum class PipelineMode {
    MMDR,
    NoDelay,
    FrameExtract,
    FixedDelay,
    Interpolation,
    StateOnly,
};

const char* pipeline_mode_name(PipelineMode mode);
// Parses the names above (case-sensitive); throws std::invalid_argument.
PipelineMode parse_pipeline_mode(const std::string& name);

struct DelayDistribution {
    double lower = 0.0;
    double upper = 0.0;
};

struct ObservationPipelineConfig {
    PipelineMode mode = PipelineMode::MMDR;
    int k = 4;               // frames per visual sub-buffer
    int stack_count = 4;     // depth frames fed to the policy
    int proprio_history = 3; // stacked proprioceptive snapshots
    DelayDistribution proprio_delay_dist{0.0, 0.04};
    double fixed_delay = 0.04;             // FixedDelay mode
    DelayDistribution visual_delay_dist{0.0, 0.12};  // Interpolation mode
    // Freeze the MMDR frame indices for a whole episode instead of
    // redrawing them every control step (ablation knob).
    bool per_episode_indices = false;
    double control_dt = 0.04;  // spacing of stacked proprio snapshots
    // Physical frames kept beyond the stack_count*k selection window so a
    // test-time injected delay can still find old enough frames.
    int visual_headroom = 4;
    std::size_t proprio_capacity = 512;

    int selection_window() const { return stack_count * k; }
    int visual_capacity() const { return stack_count * k + visual_headroom; }
    void validate() const;  // throws std::invalid_argument
};

struct EpisodeDelaySample {
    double proprio_delay = 0.0;
    double visual_delay = 0.0;  // Interpolation / FixedDelay modes
    std::uint64_t visual_indices_seed = 0;
};

// Extra latency stacked on top of whatever the mode does, used to stress a
// trained policy with delays it never saw: the visual stream is shifted to
// the nearest frame at least `visual` old, proprio query times move back by
// `proprio`.
struct DelayInjection {
    double proprio = 0.0;
    double visual = 0.0;
};

struct Observation {
    std::vector<double> proprio;  // proprio_history snapshots, newest first
    std::vector<double> depth;    // stack_count frames, newest(-group) first
    std::size_t proprio_dim = 0;  // per-snapshot length
    std::size_t frame_dim = 0;    // per-frame pixel count
};

// One index per sub-buffer: i_j uniform on [j*k, (j+1)*k - 1], newest group
// first. k = 1 degenerates to (0, 1, ..., stack_count-1).
std::vector<int> mmdr_select_indices(int k, int stack_count, Rng& rng);

// Deterministic (0, k, 2k, ..., (stack_count-1)*k).
std::vector<int> frame_extract_indices(int k, int stack_count);

// Draws the per-episode latencies implied by cfg.mode. Modes without a
// proprio latency (NoDelay, FrameExtract) get 0; FixedDelay pins both
// modalities to cfg.fixed_delay.
EpisodeDelaySample sample_episode_delays(const ObservationPipelineConfig& cfg,
                                         Rng& rng);

// Builds the policy observation at time `now` from warmed-up buffers.
// `index_rng` feeds the MMDR frame draw (advanced once per call in MMDR
// mode). Throws std::logic_error when the buffers cannot serve the request
// yet (cold start) and std::invalid_argument on bad config.
Observation assemble_observation(const ObservationPipelineConfig& cfg,
                                 const SampleBuffer& proprio_buf,
                                 const SampleBuffer& visual_buf, double now,
                                 const EpisodeDelaySample& delays,
                                 Rng& index_rng,
                                 const DelayInjection& injection = {});

// Owns the two sensor buffers plus the episode delay state. The simulator
// pushes raw samples; assemble() produces what the policy actually sees.
class ObservationPipeline {
public:
    explicit ObservationPipeline(const ObservationPipelineConfig& cfg);

    // Clears both buffers and installs the episode's delays/injection.
    void begin_episode(const EpisodeDelaySample& delays,
                       const DelayInjection& injection = {});

    void push_proprio(double time, std::vector<double> state);
    void push_frame(double time, std::vector<double> depth);

    // True once both buffers can serve assemble() at time `now` without
    // clamping past the data they hold.
    bool warmed_up(double now) const;

    Observation assemble(double now);

    const ObservationPipelineConfig& config() const { return cfg_; }
    const EpisodeDelaySample& episode_delays() const { return delays_; }
    const DelayInjection& injection() const { return injection_; }
    const SampleBuffer& proprio_buffer() const { return proprio_buf_; }
    const SampleBuffer& visual_buffer() const { return visual_buf_; }

private:
    ObservationPipelineConfig cfg_;
    SampleBuffer proprio_buf_;
    SampleBuffer visual_buf_;
    EpisodeDelaySample delays_;
    DelayInjection injection_;
    Rng index_rng_;
};

}  // namespace mmdr
