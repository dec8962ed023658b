#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mmdr/harness/config.hpp"
#include "mmdr/ppo/trainer.hpp"

namespace mmdr::harness {

// Wall-clock seconds of raw sensor history the visual selection window
// covers: stack_count sub-buffers of k frames, one frame arriving per
// control tick.
double visual_span_seconds(int stack_count, int k, int control_hz);

struct AblationPoint {
    int k = 0;
    bool randomization = true;
    double span_seconds = 0.0;
    std::string run_dir;
    ppo::TrainStats final_stats;
};

struct AblationResult {
    std::vector<AblationPoint> points;
    std::string curves_csv;  // merged per-run metrics, written to out_dir
};

// Trains base with pipeline.k swept over `ks` (and, when
// with_and_without_rand is set, the domain-randomization arm toggled as
// well), one run per point under out_dir/k<k>-<dr|nodr>-s<seed>. The merged
// learning curves land in out_dir/ablation_curves.csv with k and
// randomization prepended to the trainer's metrics columns.
AblationResult run_ablation_k(const RunConfig& base,
                              const std::vector<int>& ks,
                              bool with_and_without_rand, std::uint64_t seed,
                              const std::string& out_dir,
                              std::ostream* log = nullptr);

}  // namespace mmdr::harness
