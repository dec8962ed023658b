#include "mmdr/rand/domain_rand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmdr {
namespace {

void check(const Range& r, const char* name) {
    if (!std::isfinite(r.lower) || !std::isfinite(r.upper) ||
        r.lower > r.upper) {
        throw std::invalid_argument(std::string("bad range for ") + name);
    }
}

double mid(const Range& r) { return 0.5 * (r.lower + r.upper); }

}  // namespace

void RandomizationRanges::validate() const {
    check(mass_scale, "mass_scale");
    check(motor_friction, "motor_friction");
    check(motor_strength_scale, "motor_strength_scale");
    check(lateral_friction, "lateral_friction");
    check(inertia_scale, "inertia_scale");
    check(proprio_latency, "proprio_latency");
    check(kp, "kp");
    check(kd, "kd");
    if (hole_pixels.lower < 0 || hole_pixels.lower > hole_pixels.upper) {
        throw std::invalid_argument("bad range for hole_pixels");
    }
}

EpisodeRandomization sample_episode_randomization(
    const RandomizationRanges& ranges, Rng& rng) {
    ranges.validate();
    EpisodeRandomization er;
    er.hole_pixels = ranges.hole_pixels;
    if (!ranges.enabled) {
        er.mass_scale = mid(ranges.mass_scale);
        er.motor_friction = mid(ranges.motor_friction);
        er.motor_strength_scale = mid(ranges.motor_strength_scale);
        er.lateral_friction = mid(ranges.lateral_friction);
        er.inertia_scale = mid(ranges.inertia_scale);
        er.proprio_latency = mid(ranges.proprio_latency);
        er.kp = mid(ranges.kp);
        er.kd = mid(ranges.kd);
        er.corrupt_frames = false;
        return er;
    }
    er.mass_scale = uniform(rng, ranges.mass_scale.lower, ranges.mass_scale.upper);
    er.motor_friction =
        uniform(rng, ranges.motor_friction.lower, ranges.motor_friction.upper);
    er.motor_strength_scale = uniform(rng, ranges.motor_strength_scale.lower,
                                      ranges.motor_strength_scale.upper);
    er.lateral_friction = uniform(rng, ranges.lateral_friction.lower,
                                  ranges.lateral_friction.upper);
    er.inertia_scale =
        uniform(rng, ranges.inertia_scale.lower, ranges.inertia_scale.upper);
    er.proprio_latency =
        uniform(rng, ranges.proprio_latency.lower, ranges.proprio_latency.upper);
    er.kp = uniform(rng, ranges.kp.lower, ranges.kp.upper);
    er.kd = uniform(rng, ranges.kd.lower, ranges.kd.upper);
    er.corrupt_frames = true;
    return er;
}

void corrupt_depth(std::vector<double>& image, const EpisodeRandomization& er,
                   Rng& rng) {
    if (!er.corrupt_frames || er.hole_pixels.upper <= 0) return;
    const int n = std::min(uniform_int(rng, er.hole_pixels.lower,
                                       er.hole_pixels.upper),
                           static_cast<int>(image.size()));
    // Floyd's sampling: n distinct positions without building a full
    // permutation of the image.
    const int total = static_cast<int>(image.size());
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(n));
    for (int j = total - n; j < total; ++j) {
        const int t = uniform_int(rng, 0, j);
        if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
            picked.push_back(t);
        } else {
            picked.push_back(j);
        }
    }
    for (int p : picked) image[static_cast<std::size_t>(p)] = kMaxDepth;
}

}  // namespace mmdr
