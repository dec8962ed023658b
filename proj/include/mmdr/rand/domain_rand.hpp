#pragma once

#include <vector>

#include "mmdr/common/rng.hpp"

namespace mmdr {

struct Range {
    double lower = 0.0;
    double upper = 0.0;
};

struct IntRange {
    int lower = 0;
    int upper = 0;
};

// Per-episode variability of the robot and its sensors. Scales apply to the
// nominal dynamics coefficients; kp/kd are absolute controller gains.
struct RandomizationRanges {
    Range mass_scale{0.8, 1.2};
    Range motor_friction{0.0, 0.05};      // drive deadband, Nm
    Range motor_strength_scale{0.8, 1.2};
    Range lateral_friction{0.5, 1.25};    // velocity damping, Ns/m
    Range inertia_scale{0.5, 1.5};
    Range proprio_latency{0.0, 0.04};     // s; consumed by the delay pipeline
    Range kp{40.0, 90.0};
    Range kd{0.4, 0.8};
    IntRange hole_pixels{3, 30};          // depth pixels blown to max range

    // When false every field collapses to its midpoint and depth frames are
    // left intact (the "w/o DR" ablation arm).
    bool enabled = true;

    void validate() const;  // throws std::invalid_argument
};

struct EpisodeRandomization {
    double mass_scale = 1.0;
    double motor_friction = 0.0;
    double motor_strength_scale = 1.0;
    double lateral_friction = 0.875;
    double inertia_scale = 1.0;
    double proprio_latency = 0.0;
    double kp = 65.0;
    double kd = 0.6;
    // Drawn per frame within [hole_pixels.lower, hole_pixels.upper] at
    // corruption time; stored here as the range bounds for the episode.
    IntRange hole_pixels{3, 30};
    bool corrupt_frames = true;
};

EpisodeRandomization sample_episode_randomization(
    const RandomizationRanges& ranges, Rng& rng);

// Punches n ~ UniformInt[lower, upper] distinct holes (pixels set to the
// 10 m max depth) into the frame, in place. No-op when the range is [0, 0]
// or corruption is disabled for the episode.
void corrupt_depth(std::vector<double>& image, const EpisodeRandomization& er,
                   Rng& rng);

inline constexpr double kMaxDepth = 10.0;
inline constexpr double kMinDepth = 0.3;

}  // namespace mmdr
