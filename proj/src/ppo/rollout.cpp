#include "mmdr/ppo/rollout.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "mmdr/ppo/gae.hpp"

namespace mmdr::ppo {

void PPOConfig::validate() const {
    if (total_samples < 1) throw std::invalid_argument("total_samples < 1");
    if (batch_size < 1 || minibatches < 1 || epochs < 1 || num_envs < 1)
        throw std::invalid_argument("ppo sizes must be positive");
    if (batch_size % minibatches != 0)
        throw std::invalid_argument("batch_size must divide into minibatches");
    if (batch_size % num_envs != 0)
        throw std::invalid_argument("batch_size must divide across envs");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw std::invalid_argument("gae_lambda must be in [0, 1]");
    if (clip < 0.0 || lr < 0.0 || value_coef < 0.0 || entropy_coef < 0.0)
        throw std::invalid_argument("ppo coefficients must be non-negative");
}

void RolloutBatch::resize(const PPOConfig& ppo, int pdim, int ddim, int adim) {
    num_envs = ppo.num_envs;
    steps = ppo.batch_size / ppo.num_envs;
    proprio_dim = pdim;
    depth_dim = ddim;
    action_dim = adim;
    const std::size_t n = static_cast<std::size_t>(size());
    proprio.resize(n * pdim);
    depth.resize(n * ddim);
    action.resize(n * adim);
    log_prob.resize(n);
    reward.resize(n);
    value.resize(n);
    next_value.resize(n);
    terminated.assign(n, 0);
    truncated.assign(n, 0);
    episode_id.resize(n);
    advantage.resize(n);
    returns.resize(n);
    episode_return.clear();
    episode_distance.clear();
    episode_collision_steps.clear();
}

RolloutCollector::RolloutCollector(const EnvConfig& env_cfg,
                                   const PPOConfig& ppo, std::uint64_t run_seed)
    : ppo_(ppo) {
    ppo_.validate();
    slots_.reserve(static_cast<std::size_t>(ppo.num_envs));
    for (int e = 0; e < ppo.num_envs; ++e) {
        Slot slot;
        slot.env = std::make_unique<Environment>(env_cfg, run_seed, e);
        slot.obs = slot.env->reset();
        slot.action_rng = make_rng(run_seed, stream::kAction,
                                   static_cast<std::uint64_t>(e));
        slot.episode_id = next_episode_id_++;
        slots_.push_back(std::move(slot));
    }
}

void RolloutCollector::collect(nn::Network& net, RolloutBatch& out) {
    const int n_env = ppo_.num_envs;
    const int steps = ppo_.batch_size / n_env;
    const int pdim = static_cast<int>(slots_[0].env->proprio_size());
    const int ddim = static_cast<int>(slots_[0].env->depth_size());
    const int adim = net.arch().action_dim;
    if (net.arch().proprio_dim != pdim)
        throw std::invalid_argument("network/environment proprio size mismatch");
    out.resize(ppo_, pdim, ddim, adim);

    fwd_proprio_.resize(static_cast<std::size_t>(n_env) * pdim);
    fwd_depth_.resize(static_cast<std::size_t>(n_env) * ddim);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::array<double, 2> log_std{net.log_std(0), net.log_std(1)};

    auto stage_observations = [&]() {
        for (int e = 0; e < n_env; ++e) {
            const Observation& o = slots_[e].obs;
            std::memcpy(fwd_proprio_.data() + static_cast<std::size_t>(e) * pdim,
                        o.proprio.data(), sizeof(double) * pdim);
            std::memcpy(fwd_depth_.data() + static_cast<std::size_t>(e) * ddim,
                        o.depth.data(), sizeof(double) * ddim);
        }
    };

    for (int t = 0; t < steps; ++t) {
        stage_observations();
        auto fwd = net.forward(n_env, fwd_proprio_.data(), fwd_depth_.data(),
                               false);
        // The forward result views net workspace, which later forward_one
        // calls (truncation bootstraps) would clobber; copy what we need.
        std::vector<double> means(fwd.mean,
                                  fwd.mean + static_cast<std::size_t>(n_env) * adim);
        std::vector<double> values(fwd.value, fwd.value + n_env);

        for (int e = 0; e < n_env; ++e) {
            Slot& slot = slots_[e];
            const std::size_t idx = out.index(e, t);
            const double* mean = means.data() + static_cast<std::size_t>(e) * adim;

            std::array<double, 2> act{0.0, 0.0};
            for (int i = 0; i < adim; ++i)
                act[i] = mean[i] +
                         std::exp(log_std[i]) * unit_normal(slot.action_rng);

            std::memcpy(out.proprio.data() + idx * pdim,
                        fwd_proprio_.data() + static_cast<std::size_t>(e) * pdim,
                        sizeof(double) * pdim);
            const double* dsrc =
                fwd_depth_.data() + static_cast<std::size_t>(e) * ddim;
            float* ddst = out.depth.data() + idx * ddim;
            for (int i = 0; i < ddim; ++i) ddst[i] = static_cast<float>(dsrc[i]);
            for (int i = 0; i < adim; ++i) out.action[idx * adim + i] = act[i];
            out.log_prob[idx] =
                nn::gaussian_log_prob(mean, log_std.data(), act.data(), adim);
            out.value[idx] = values[e];
            out.episode_id[idx] = slot.episode_id;

            StepResult sr;
            try {
                sr = slot.env->step(act);
            } catch (const std::exception& ex) {
                throw std::runtime_error("rollout env " + std::to_string(e) +
                                         " step " + std::to_string(t) +
                                         " failed: " + ex.what());
            }
            out.reward[idx] = sr.reward;
            out.terminated[idx] = sr.terminated ? 1 : 0;
            out.truncated[idx] = sr.truncated ? 1 : 0;
            slot.partial_return += sr.reward;

            if (sr.terminated || sr.truncated) {
                // A truncated episode bootstraps from its final observation;
                // a terminated one bootstraps zero.
                out.next_value[idx] =
                    sr.truncated ? net.forward_one(sr.obs.proprio, sr.obs.depth).value
                                 : 0.0;
                out.episode_return.push_back(slot.partial_return);
                out.episode_distance.push_back(sr.metrics.moving_distance);
                out.episode_collision_steps.push_back(
                    static_cast<double>(sr.metrics.collision_steps));
                ++episodes_finished_;
                slot.partial_return = 0.0;
                slot.episode_id = next_episode_id_++;
                slot.obs = slot.env->reset();
            } else {
                out.next_value[idx] = 0.0;  // filled from value[t+1] below
                slot.obs = std::move(sr.obs);
            }
        }
    }

    // Bootstrap values: mid-segment steps take the next step's estimate; the
    // segment end (not an episode boundary) takes V of the live observation.
    stage_observations();
    auto tail = net.forward(n_env, fwd_proprio_.data(), fwd_depth_.data(),
                            false);
    for (int e = 0; e < n_env; ++e) {
        for (int t = 0; t < steps - 1; ++t) {
            const std::size_t idx = out.index(e, t);
            if (out.terminated[idx] == 0 && out.truncated[idx] == 0)
                out.next_value[idx] = out.value[idx + 1];
        }
        const std::size_t last = out.index(e, steps - 1);
        if (out.terminated[last] == 0 && out.truncated[last] == 0)
            out.next_value[last] = tail.value[e];
    }

    // Raw GAE per environment segment.
    std::vector<double> r(steps), v(steps), nv(steps);
    std::vector<std::uint8_t> term(steps), trunc(steps);
    for (int e = 0; e < n_env; ++e) {
        const std::size_t base = out.index(e, 0);
        for (int t = 0; t < steps; ++t) {
            r[t] = out.reward[base + t];
            v[t] = out.value[base + t];
            nv[t] = out.next_value[base + t];
            term[t] = out.terminated[base + t];
            trunc[t] = out.truncated[base + t];
        }
        GaeResult g = compute_gae(r, v, nv, term, trunc, ppo_.gamma,
                                  ppo_.gae_lambda);
        for (int t = 0; t < steps; ++t) {
            out.advantage[base + t] = g.advantages[t];
            out.returns[base + t] = g.returns[t];
        }
    }
}

}  // namespace mmdr::ppo
