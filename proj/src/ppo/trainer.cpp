#include "mmdr/ppo/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "mmdr/delay/pipeline.hpp"
#include "mmdr/ppo/gae.hpp"

namespace mmdr::ppo {

namespace {

double mean_or_zero(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

Trainer::Trainer(const EnvConfig& env_cfg, const PPOConfig& ppo,
                 const nn::ArchConfig& arch, std::uint64_t seed,
                 const std::string& out_dir)
    : env_cfg_(env_cfg),
      ppo_(ppo),
      seed_(seed),
      net_(arch, seed),
      collector_(env_cfg, ppo, seed),
      shuffle_rng_(make_rng(seed, stream::kShuffle)),
      out_dir_(out_dir) {
    ppo_.validate();
    if (!out_dir_.empty()) {
        std::filesystem::create_directories(out_dir_);
        metrics_.open(out_dir_ + "/metrics.csv", std::ios::trunc);
        if (!metrics_)
            throw std::runtime_error("cannot write metrics in " + out_dir_);
        metrics_ << kMetricsHeader << "\n";
        metrics_.flush();
    }
}

void Trainer::gather_minibatch(const RolloutBatch& batch,
                               const std::vector<int>& order, int start,
                               int count) {
    const int pd = batch.proprio_dim;
    const int dd = batch.depth_dim;
    const int ad = batch.action_dim;
    mb_proprio_.resize(static_cast<std::size_t>(count) * pd);
    mb_depth_.resize(static_cast<std::size_t>(count) * dd);
    mb_action_.resize(static_cast<std::size_t>(count) * ad);
    mb_logp_.resize(count);
    mb_adv_.resize(count);
    mb_ret_.resize(count);
    for (int i = 0; i < count; ++i) {
        const std::size_t src = static_cast<std::size_t>(order[start + i]);
        std::copy_n(batch.proprio.data() + src * pd, pd,
                    mb_proprio_.data() + static_cast<std::size_t>(i) * pd);
        const float* d = batch.depth.data() + src * dd;
        double* dst = mb_depth_.data() + static_cast<std::size_t>(i) * dd;
        for (int j = 0; j < dd; ++j) dst[j] = static_cast<double>(d[j]);
        std::copy_n(batch.action.data() + src * ad, ad,
                    mb_action_.data() + static_cast<std::size_t>(i) * ad);
        mb_logp_[i] = batch.log_prob[src];
        mb_adv_[i] = batch.advantage[src];
        mb_ret_[i] = batch.returns[src];
    }
}

void Trainer::update(RolloutBatch& batch, TrainStats& stats) {
    normalize_advantages(batch.advantage);

    const int n = batch.size();
    const int mb_size = n / ppo_.minibatches;
    const int ad = batch.action_dim;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    double pol_sum = 0.0, val_sum = 0.0, kl_sum = 0.0, clip_sum = 0.0;
    int updates = 0;

    for (int epoch = 0; epoch < ppo_.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng_);
        for (int mb = 0; mb < ppo_.minibatches; ++mb) {
            gather_minibatch(batch, order, mb * mb_size, mb_size);
            auto fwd = net_.forward(mb_size, mb_proprio_.data(),
                                    mb_depth_.data(), true);

            std::array<double, 2> ls{net_.log_std(0), net_.log_std(1)};
            std::array<double, 2> inv_var{std::exp(-2.0 * ls[0]),
                                          std::exp(-2.0 * ls[1])};
            d_mean_.assign(static_cast<std::size_t>(mb_size) * ad, 0.0);
            d_value_.resize(mb_size);
            std::array<double, 2> d_ls{0.0, 0.0};

            const double inv_m = 1.0 / static_cast<double>(mb_size);
            double pol_loss = 0.0, val_loss = 0.0, kl = 0.0, clipped = 0.0;
            for (int b = 0; b < mb_size; ++b) {
                const double* mu = fwd.mean + static_cast<std::size_t>(b) * ad;
                const double* a =
                    mb_action_.data() + static_cast<std::size_t>(b) * ad;
                const double lp =
                    nn::gaussian_log_prob(mu, ls.data(), a, ad);
                const double ratio = std::exp(lp - mb_logp_[b]);
                const double adv = mb_adv_[b];
                const double s1 = ratio * adv;
                const double clip_ratio =
                    std::clamp(ratio, 1.0 - ppo_.clip, 1.0 + ppo_.clip);
                const double s2 = clip_ratio * adv;
                pol_loss -= std::min(s1, s2) * inv_m;
                kl += (mb_logp_[b] - lp) * inv_m;
                if (std::abs(ratio - 1.0) > ppo_.clip) clipped += inv_m;

                // The clipped branch is constant in theta wherever it wins.
                const double dlp =
                    s1 <= s2 ? -adv * ratio * inv_m : 0.0;
                for (int i = 0; i < ad; ++i) {
                    const double diff = a[i] - mu[i];
                    d_mean_[static_cast<std::size_t>(b) * ad + i] =
                        dlp * diff * inv_var[i];
                    d_ls[i] += dlp * (diff * diff * inv_var[i] - 1.0);
                }

                const double verr = fwd.value[b] - mb_ret_[b];
                val_loss += verr * verr * inv_m;
                d_value_[b] = ppo_.value_coef * 2.0 * verr * inv_m;
            }
            const double entropy = nn::gaussian_entropy(ls.data(), ad);
            const double total =
                pol_loss + ppo_.value_coef * val_loss - ppo_.entropy_coef * entropy;
            if (!std::isfinite(total)) {
                if (!out_dir_.empty())
                    save_checkpoint_file(out_dir_ + "/abort_dump.ckpt");
                throw std::runtime_error(
                    "non-finite loss in batch " + std::to_string(batch_index_) +
                    " (dump written)");
            }

            net_.zero_grad();
            net_.backward(mb_size, d_mean_.data(), d_value_.data());
            for (int i = 0; i < ad; ++i)
                net_.add_log_std_grad(i, d_ls[i] - ppo_.entropy_coef);
            net_.adam_step(ppo_.lr, ppo_.adam_beta1, ppo_.adam_beta2,
                           ppo_.adam_eps);

            pol_sum += pol_loss;
            val_sum += val_loss;
            kl_sum += kl;
            clip_sum += clipped;
            ++updates;
        }
    }
    stats.policy_loss = pol_sum / updates;
    stats.value_loss = val_sum / updates;
    stats.kl = kl_sum / updates;
    stats.clip_fraction = clip_sum / updates;
}

Trainer::BatchLoss Trainer::evaluate_loss(const RolloutBatch& batch) {
    const int n = batch.size();
    const int mb_size = n / ppo_.minibatches;
    const int ad = batch.action_dim;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    BatchLoss out;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::array<double, 2> ls{net_.log_std(0), net_.log_std(1)};
    for (int start = 0; start < n; start += mb_size) {
        const int count = std::min(mb_size, n - start);
        gather_minibatch(batch, order, start, count);
        auto fwd =
            net_.forward(count, mb_proprio_.data(), mb_depth_.data(), false);
        for (int b = 0; b < count; ++b) {
            const double* mu = fwd.mean + static_cast<std::size_t>(b) * ad;
            const double* a =
                mb_action_.data() + static_cast<std::size_t>(b) * ad;
            const double lp = nn::gaussian_log_prob(mu, ls.data(), a, ad);
            const double ratio = std::exp(lp - mb_logp_[b]);
            const double s1 = ratio * mb_adv_[b];
            const double s2 =
                std::clamp(ratio, 1.0 - ppo_.clip, 1.0 + ppo_.clip) * mb_adv_[b];
            out.policy -= std::min(s1, s2) * inv_n;
            const double verr = fwd.value[b] - mb_ret_[b];
            out.value += verr * verr * inv_n;
        }
    }
    out.entropy = nn::gaussian_entropy(ls.data(), ad);
    out.total = out.policy + ppo_.value_coef * out.value -
                ppo_.entropy_coef * out.entropy;
    return out;
}

TrainStats Trainer::train_one_batch() {
    const auto t0 = std::chrono::steady_clock::now();
    TrainStats stats;
    collector_.collect(net_, batch_);
    update(batch_, stats);

    samples_ += ppo_.batch_size;
    stats.batch_index = batch_index_++;
    stats.samples = samples_;
    stats.mean_return = mean_or_zero(batch_.episode_return);
    stats.mean_moving_distance = mean_or_zero(batch_.episode_distance);
    stats.mean_collision_steps = mean_or_zero(batch_.episode_collision_steps);
    wall_accum_ += std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    stats.wall_seconds = wall_accum_;

    if (metrics_.is_open()) append_metrics(stats);
    if (!out_dir_.empty() && ppo_.checkpoint_every > 0) {
        const std::int64_t prev = samples_ - ppo_.batch_size;
        if (samples_ / ppo_.checkpoint_every != prev / ppo_.checkpoint_every)
            save_checkpoint_file(out_dir_ + "/ckpt_" +
                                 std::to_string(samples_) + ".ckpt");
    }
    return stats;
}

TrainStats Trainer::run() {
    TrainStats last;
    while (samples_ < ppo_.total_samples) last = train_one_batch();
    if (!out_dir_.empty()) save_checkpoint_file(out_dir_ + "/final.ckpt");
    return last;
}

void Trainer::save_checkpoint_file(const std::string& path) const {
    nn::CheckpointMeta meta;
    meta.pipeline_mode = pipeline_mode_name(env_cfg_.pipeline.mode);
    meta.k = env_cfg_.pipeline.k;
    meta.seed = seed_;
    meta.samples = static_cast<std::uint64_t>(samples_);
    meta.adam_steps = net_.adam_steps();
    nn::save_checkpoint(path, net_, meta);
}

void Trainer::append_metrics(const TrainStats& s) {
    char line[512];
    std::snprintf(line, sizeof(line),
                  "%lld,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f",
                  static_cast<long long>(s.batch_index),
                  static_cast<long long>(s.samples), s.mean_return,
                  s.mean_moving_distance, s.mean_collision_steps,
                  s.policy_loss, s.value_loss, s.kl, s.clip_fraction,
                  s.wall_seconds);
    metrics_ << line << "\n";
    metrics_.flush();
}

}  // namespace mmdr::ppo
