#pragma once

#include <string>

#include "mmdr/nn/network.hpp"
#include "mmdr/ppo/trainer.hpp"
#include "mmdr/sim/environment.hpp"

namespace mmdr::harness {

// Evaluation-time knobs that are not part of the training environment.
struct EvalConfig {
    int episodes_per_seed = 20;
    // Test-time latency injected on top of whatever the mode does,
    // independently per modality and per episode.
    Range injected_delay{0.04, 0.12};
    // Obstacle speed range used by the moving-obstacles protocol.
    Range obstacle_speed{0.05, 0.2};

    void validate() const;  // throws std::invalid_argument
};

// Everything one training or evaluation run needs, in one bag. The network
// architecture is derived from the environment shape (see arch_for) rather
// than stored, so the INI cannot drift out of sync with the observation
// layout.
struct RunConfig {
    EnvConfig env;
    ppo::PPOConfig ppo;
    EvalConfig eval;

    void validate() const;
};

// Architecture matching cfg.env: stack_count input channels at the depth
// resolution, proprio_history * 8 proprioceptive inputs, StateOnly wired
// through to the zeroed-visual-branch variant.
nn::ArchConfig arch_for(const RunConfig& cfg);

// INI with sections [world], [pipeline], [randomization], [ppo], [eval].
// The literal path "default" yields RunConfig{}. Unknown sections or keys
// throw std::invalid_argument (catching typos beats silently ignoring
// them); missing keys keep their defaults. proprio_latency lives under
// [randomization] and is wired into the pipeline's per-episode draw, so the
// file has a single source of truth for that range.
RunConfig load_run_config(const std::string& path);

// Inverse of load_run_config: writes every key the loader understands.
void save_run_config(const std::string& path, const RunConfig& cfg);

// The same round-trip through strings (used by tests and `--dump-config`).
std::string run_config_to_string(const RunConfig& cfg);
RunConfig run_config_from_string(const std::string& text);

}  // namespace mmdr::harness
