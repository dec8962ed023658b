#include "mmdr/harness/bench_delays.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mmdr::harness {
namespace {

// Box-Muller on the shared uniform helper keeps the draw sequence
// independent of the standard library's normal_distribution internals.
double gaussian(Rng& rng, double mean, double std) {
    if (std <= 0.0) return mean;
    double u1 = uniform(rng, 1e-12, 1.0);
    double u2 = uniform(rng, 0.0, 1.0);
    return mean + std * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * 3.141592653589793 * u2);
}

std::vector<double> arrival_times(Rng& rng, double mean, double std,
                                  double t_end) {
    std::vector<double> times;
    double t = 0.0;
    while (t <= t_end) {
        times.push_back(t);
        t += std::max(mean / 4.0, gaussian(rng, mean, std));
    }
    return times;
}

void interval_stats(const std::vector<double>& times, double* mean,
                    double* stddev) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < times.size(); ++i) {
        gaps.push_back(times[i] - times[i - 1]);
    }
    double m = 0.0;
    for (double g : gaps) m += g;
    m /= gaps.empty() ? 1.0 : static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - m) * (g - m);
    *mean = m;
    *stddev = gaps.size() > 1
                  ? std::sqrt(ss / static_cast<double>(gaps.size() - 1))
                  : 0.0;
}

struct Welford {
    long n = 0;
    double mean = 0.0, m2 = 0.0, max = 0.0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
        max = std::max(max, x);
    }
    double std() const {
        return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    }
};

}  // namespace

BenchDelaysReport run_bench_delays(const LatencyProfile& profile,
                                   const ObservationPipelineConfig& base,
                                   std::uint64_t seed, int control_ticks) {
    if (control_ticks <= 0) {
        throw std::invalid_argument("bench: control_ticks must be > 0");
    }
    base.validate();

    BenchDelaysReport rep;
    rep.profile = profile;
    rep.control_ticks = control_ticks;

    const double dt = base.control_dt;
    // Long enough to fill the visual ring before the first measured tick.
    const double warm =
        2.0 * base.visual_capacity() *
        std::max(profile.depth_interval_mean, dt);
    const double t_end = warm + (control_ticks + 1) * dt;

    // One shared set of arrival clocks and compute-tail draws so every mode
    // sees the same sensor streams.
    Rng clock_rng = make_rng(seed, stream::kEnv);
    std::vector<double> depth_times = arrival_times(
        clock_rng, profile.depth_interval_mean, profile.depth_interval_std,
        t_end);
    std::vector<double> proprio_times = arrival_times(
        clock_rng, profile.proprio_interval_mean, profile.proprio_interval_std,
        t_end);
    interval_stats(depth_times, &rep.measured_depth_interval_mean,
                   &rep.measured_depth_interval_std);
    interval_stats(proprio_times, &rep.measured_proprio_interval_mean,
                   &rep.measured_proprio_interval_std);

    Rng tail_rng = make_rng(seed, stream::kEval);
    std::vector<double> tail(control_ticks);
    for (int i = 0; i < control_ticks; ++i) {
        tail[i] =
            std::max(0.0, gaussian(tail_rng, profile.inference_mean,
                                   profile.inference_std)) +
            std::max(0.0, gaussian(tail_rng, profile.actuation_mean,
                                   profile.actuation_std));
    }

    const PipelineMode modes[] = {
        PipelineMode::MMDR, PipelineMode::NoDelay, PipelineMode::FrameExtract,
        PipelineMode::FixedDelay, PipelineMode::Interpolation};

    for (std::size_t mi = 0; mi < std::size(modes); ++mi) {
        ObservationPipelineConfig cfg = base;
        cfg.mode = modes[mi];

        SampleBuffer vis(static_cast<std::size_t>(cfg.visual_capacity()));
        SampleBuffer pro(cfg.proprio_capacity);

        Rng delay_rng = make_rng(seed, stream::kEval, 100 + mi);
        Rng index_rng = make_rng(seed, stream::kAction, mi);
        EpisodeDelaySample delays = sample_episode_delays(cfg, delay_rng);

        Welford vis_age, pro_age, span, reaction;
        std::size_t di = 0, pi = 0;
        for (int i = 0; i < control_ticks; ++i) {
            const double now = warm + i * dt;
            while (di < depth_times.size() && depth_times[di] <= now) {
                vis.push(depth_times[di], {depth_times[di]});
                ++di;
            }
            while (pi < proprio_times.size() && proprio_times[pi] <= now) {
                pro.push(proprio_times[pi], {proprio_times[pi]});
                ++pi;
            }

            Observation obs =
                assemble_observation(cfg, pro, vis, now, delays, index_rng);

            // Samples carry their capture time as their only element, so
            // age falls straight out of the assembled observation.
            const double newest = obs.depth[0];
            const double oldest = obs.depth[obs.depth.size() - 1];
            vis_age.add(now - newest);
            span.add(newest - oldest);
            pro_age.add(now - obs.proprio[0]);
            reaction.add(now - newest + tail[i]);
        }

        ModeDelayStats s;
        s.mode = pipeline_mode_name(cfg.mode);
        s.visual_age_mean = vis_age.mean;
        s.visual_age_std = vis_age.std();
        s.visual_age_max = vis_age.max;
        s.stack_span_mean = span.mean;
        s.proprio_age_mean = pro_age.mean;
        s.proprio_age_std = pro_age.std();
        s.reaction_mean = reaction.mean;
        rep.modes.push_back(std::move(s));
    }
    return rep;
}

void print_bench_delays(const BenchDelaysReport& rep, std::ostream& os) {
    char buf[256];
    const LatencyProfile& p = rep.profile;
    os << "latency profile (s):\n";
    std::snprintf(buf, sizeof(buf), "  depth interval    %.4g +/- %.4g\n",
                  p.depth_interval_mean, p.depth_interval_std);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  proprio interval  %.4g +/- %.4g\n",
                  p.proprio_interval_mean, p.proprio_interval_std);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  inference         %.4g +/- %.4g\n",
                  p.inference_mean, p.inference_std);
    os << buf;
    std::snprintf(buf, sizeof(buf), "  actuation         %.4g +/- %.4g\n",
                  p.actuation_mean, p.actuation_std);
    os << buf;

    std::snprintf(buf, sizeof(buf),
                  "simulated streams over %d control ticks:\n",
                  rep.control_ticks);
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "  depth stream interval mean %.4g s (std %.4g)\n",
                  rep.measured_depth_interval_mean,
                  rep.measured_depth_interval_std);
    os << buf;
    std::snprintf(buf, sizeof(buf),
                  "  proprio stream interval mean %.4g s (std %.4g)\n",
                  rep.measured_proprio_interval_mean,
                  rep.measured_proprio_interval_std);
    os << buf;

    os << "effective observation age per mode (s):\n";
    std::snprintf(buf, sizeof(buf),
                  "  %-14s %8s %8s %8s %8s %9s %8s %9s\n", "mode", "vis_age",
                  "age_std", "age_max", "span", "prop_age", "prop_std",
                  "reaction");
    os << buf;
    for (const ModeDelayStats& m : rep.modes) {
        std::snprintf(buf, sizeof(buf),
                      "  %-14s %8.4f %8.4f %8.4f %8.4f %9.4f %8.4f %9.4f\n",
                      m.mode.c_str(), m.visual_age_mean, m.visual_age_std,
                      m.visual_age_max, m.stack_span_mean, m.proprio_age_mean,
                      m.proprio_age_std, m.reaction_mean);
        os << buf;
    }
}

}  // namespace mmdr::harness
