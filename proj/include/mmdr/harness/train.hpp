#pragma once

#include <ostream>
#include <string>

#include "mmdr/harness/config.hpp"

namespace mmdr::harness {

// Trains one run into `out_dir`: writes the resolved config.ini beside the
// checkpoints (evaluate/compare rebuild the environment from it), then runs
// PPO to cfg.ppo.total_samples. `progress`, when given, receives one line
// per batch. Returns the final checkpoint path.
std::string run_training(const RunConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir,
                         std::ostream* progress = nullptr);

}  // namespace mmdr::harness
