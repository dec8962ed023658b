#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mmdr/nn/checkpoint.hpp"
#include "mmdr/nn/network.hpp"
#include "mmdr/ppo/rollout.hpp"

namespace mmdr::ppo {

struct TrainStats {
    std::int64_t batch_index = 0;
    std::int64_t samples = 0;  // cumulative
    double mean_return = 0.0;
    double mean_moving_distance = 0.0;
    double mean_collision_steps = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double kl = 0.0;
    double clip_fraction = 0.0;
    double wall_seconds = 0.0;  // cumulative, this process
};

constexpr const char* kMetricsHeader =
    "batch_index,samples,mean_return,mean_moving_distance,"
    "mean_collision_steps,policy_loss,value_loss,kl,clip_fraction,"
    "wall_seconds";

// Clipped-surrogate PPO: alternates rollout collection and minibatch Adam
// updates until total_samples transitions are consumed. All randomness
// derives from the run seed, so a rerun reproduces the metrics CSV bitwise
// (wall_seconds aside).
class Trainer {
public:
    // out_dir may be empty: train without writing metrics or checkpoints
    // (tests use this).
    Trainer(const EnvConfig& env_cfg, const PPOConfig& ppo,
            const nn::ArchConfig& arch, std::uint64_t seed,
            const std::string& out_dir);

    // Collect + update one batch; appends a metrics row when out_dir is set.
    TrainStats train_one_batch();

    // Full loop: whole batches until total_samples is reached, then a final
    // checkpoint. Returns the last batch's stats.
    TrainStats run();

    // Mean losses over the whole batch at the current parameters, without
    // updating; used by descent checks and debugging.
    struct BatchLoss {
        double policy = 0.0, value = 0.0, entropy = 0.0, total = 0.0;
    };
    BatchLoss evaluate_loss(const RolloutBatch& batch);

    nn::Network& network() { return net_; }
    RolloutCollector& collector() { return collector_; }
    const PPOConfig& ppo() const { return ppo_; }
    std::int64_t samples_consumed() const { return samples_; }

    void update(RolloutBatch& batch, TrainStats& stats);  // advantage norm + epochs
    void save_checkpoint_file(const std::string& path) const;

private:
    void gather_minibatch(const RolloutBatch& batch,
                          const std::vector<int>& order, int start, int count);
    void append_metrics(const TrainStats& s);

    EnvConfig env_cfg_;
    PPOConfig ppo_;
    std::uint64_t seed_;
    nn::Network net_;
    RolloutCollector collector_;
    RolloutBatch batch_;
    Rng shuffle_rng_;
    std::string out_dir_;
    std::ofstream metrics_;
    std::int64_t batch_index_ = 0;
    std::int64_t samples_ = 0;
    double wall_accum_ = 0.0;

    // minibatch staging (f64)
    std::vector<double> mb_proprio_, mb_depth_, mb_action_, mb_logp_, mb_adv_,
        mb_ret_;
    std::vector<double> d_mean_, d_value_;
};

}  // namespace mmdr::ppo
