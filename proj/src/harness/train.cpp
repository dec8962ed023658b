#include "mmdr/harness/train.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace mmdr::harness {

std::string run_training(const RunConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir, std::ostream* progress) {
    cfg.validate();
    if (out_dir.empty()) {
        throw std::invalid_argument("train: out_dir must not be empty");
    }
    std::filesystem::create_directories(out_dir);
    save_run_config(out_dir + "/config.ini", cfg);

    ppo::Trainer trainer(cfg.env, cfg.ppo, arch_for(cfg), seed, out_dir);
    if (progress) {
        *progress << "training " << pipeline_mode_name(cfg.env.pipeline.mode)
                  << " (k=" << cfg.env.pipeline.k << ", seed=" << seed
                  << ") for " << cfg.ppo.total_samples << " samples -> "
                  << out_dir << "\n"
                  << std::flush;
    }
    while (trainer.samples_consumed() < cfg.ppo.total_samples) {
        ppo::TrainStats s = trainer.train_one_batch();
        if (progress) {
            char line[256];
            std::snprintf(line, sizeof(line),
                          "batch %3lld  samples %9lld  return %8.2f  "
                          "dist %6.2f  coll %6.1f  kl %.4f  clip %.3f  "
                          "%.0fs\n",
                          static_cast<long long>(s.batch_index),
                          static_cast<long long>(s.samples), s.mean_return,
                          s.mean_moving_distance, s.mean_collision_steps,
                          s.kl, s.clip_fraction, s.wall_seconds);
            *progress << line << std::flush;
        }
    }
    const std::string final_path = out_dir + "/final.ckpt";
    trainer.save_checkpoint_file(final_path);
    return final_path;
}

}  // namespace mmdr::harness
