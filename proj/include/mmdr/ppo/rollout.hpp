#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mmdr/common/rng.hpp"
#include "mmdr/nn/network.hpp"
#include "mmdr/sim/environment.hpp"

namespace mmdr::ppo {

struct PPOConfig {
    std::int64_t total_samples = 2'000'000;  // paper-scale is 1e7
    int batch_size = 16384;
    int minibatches = 16;
    int epochs = 4;
    double clip = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double value_coef = 0.5;
    double entropy_coef = 0.003;
    double lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int num_envs = 16;
    std::int64_t checkpoint_every = 0;  // samples between snapshots; 0 = final only

    void validate() const;
};

// One batch of on-policy experience, env-major: environment e owns the
// contiguous slice [e*steps, (e+1)*steps). Depth stacks are kept as f32 to
// halve the buffer (a full 16384-sample batch of 4x32x32 stacks); everything
// is widened back to f64 at minibatch gather.
struct RolloutBatch {
    int num_envs = 0;
    int steps = 0;  // per environment
    int proprio_dim = 0;
    int depth_dim = 0;
    int action_dim = 0;

    std::vector<double> proprio;
    std::vector<float> depth;
    std::vector<double> action;
    std::vector<double> log_prob;
    std::vector<double> reward;
    std::vector<double> value;
    std::vector<double> next_value;
    std::vector<std::uint8_t> terminated;
    std::vector<std::uint8_t> truncated;
    std::vector<std::int64_t> episode_id;
    std::vector<double> advantage;
    std::vector<double> returns;

    // Episodes that finished during collection, for logging.
    std::vector<double> episode_return;
    std::vector<double> episode_distance;
    std::vector<double> episode_collision_steps;

    int size() const { return num_envs * steps; }
    std::size_t index(int env, int t) const {
        return static_cast<std::size_t>(env) * steps + t;
    }
    void resize(const PPOConfig& ppo, int pdim, int ddim, int adim);
};

// Steps num_envs synchronized environments with the current policy. Each
// environment keeps its own action-noise stream, so a collector is fully
// reproducible from (run_seed, env_index).
class RolloutCollector {
public:
    RolloutCollector(const EnvConfig& env_cfg, const PPOConfig& ppo,
                     std::uint64_t run_seed);

    // Fills `out` with exactly batch_size transitions (batch_size/num_envs
    // per environment) sampled from net's Gaussian policy, then computes raw
    // GAE advantages/returns per environment segment.
    void collect(nn::Network& net, RolloutBatch& out);

    std::int64_t episodes_finished() const { return episodes_finished_; }

private:
    struct Slot {
        std::unique_ptr<Environment> env;
        Observation obs;
        Rng action_rng;
        double partial_return = 0.0;
        std::int64_t episode_id = 0;
    };

    PPOConfig ppo_;
    std::vector<Slot> slots_;
    std::int64_t next_episode_id_ = 0;
    std::int64_t episodes_finished_ = 0;
    std::vector<double> fwd_proprio_, fwd_depth_;  // batched forward staging
};

}  // namespace mmdr::ppo
