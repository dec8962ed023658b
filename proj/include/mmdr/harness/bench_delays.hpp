#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "mmdr/delay/pipeline.hpp"

namespace mmdr::harness {

// Measured deployment latencies of the real pipeline: sensor inter-arrival
// jitter plus the compute/actuation tail that sits after the observation is
// assembled. Means and spreads in seconds; arrivals are drawn as
// max(interval/4, N(mean, std)) so a jittery clock can never run backwards.
struct LatencyProfile {
    double depth_interval_mean = 0.033;
    double depth_interval_std = 0.004;
    double proprio_interval_mean = 0.0025;
    double proprio_interval_std = 0.001;
    double inference_mean = 0.040;
    double inference_std = 0.009;
    double actuation_mean = 0.0025;
    double actuation_std = 0.001;
};

// How stale the assembled observation is under one pipeline mode, gathered
// over many control ticks. "Age" is control-tick time minus the capture
// time of the newest selected frame (or of the proprio query point);
// reaction adds the inference + actuation tail on top of the visual age.
struct ModeDelayStats {
    std::string mode;
    double visual_age_mean = 0.0;
    double visual_age_std = 0.0;
    double visual_age_max = 0.0;
    double stack_span_mean = 0.0;  // newest-to-oldest spread in the stack
    double proprio_age_mean = 0.0;
    double proprio_age_std = 0.0;
    double reaction_mean = 0.0;
};

struct BenchDelaysReport {
    LatencyProfile profile;
    int control_ticks = 0;
    double measured_depth_interval_mean = 0.0;
    double measured_depth_interval_std = 0.0;
    double measured_proprio_interval_mean = 0.0;
    double measured_proprio_interval_std = 0.0;
    std::vector<ModeDelayStats> modes;
};

// Streams timestamp-valued samples with the profile's jittered arrival
// times through each visual pipeline mode (StateOnly has no frames to age,
// so it is skipped) and reports the effective observation age per mode.
// The frame selection logic is the same code the simulator uses; only the
// arrival clock differs.
BenchDelaysReport run_bench_delays(const LatencyProfile& profile,
                                   const ObservationPipelineConfig& base,
                                   std::uint64_t seed, int control_ticks);

void print_bench_delays(const BenchDelaysReport& report, std::ostream& os);

}  // namespace mmdr::harness
