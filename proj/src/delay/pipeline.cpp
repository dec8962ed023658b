#include "mmdr/delay/pipeline.hpp"

#include <stdexcept>

namespace mmdr {
namespace {

// Index (from newest) of the latest frame with time <= t, clamped to the
// oldest frame when everything is newer.
std::size_t newest_at_or_before(const SampleBuffer& buf, double t) {
    std::size_t i = 0;
    while (i + 1 < buf.size() && buf.from_newest(i).time > t) ++i;
    return i;
}

}  // namespace

const char* pipeline_mode_name(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::MMDR: return "MMDR";
        case PipelineMode::NoDelay: return "NoDelay";
        case PipelineMode::FrameExtract: return "FrameExtract";
        case PipelineMode::FixedDelay: return "FixedDelay";
        case PipelineMode::Interpolation: return "Interpolation";
        case PipelineMode::StateOnly: return "StateOnly";
    }
    return "?";
}

PipelineMode parse_pipeline_mode(const std::string& name) {
    if (name == "MMDR") return PipelineMode::MMDR;
    if (name == "NoDelay") return PipelineMode::NoDelay;
    if (name == "FrameExtract") return PipelineMode::FrameExtract;
    if (name == "FixedDelay") return PipelineMode::FixedDelay;
    if (name == "Interpolation") return PipelineMode::Interpolation;
    if (name == "StateOnly") return PipelineMode::StateOnly;
    throw std::invalid_argument("unknown pipeline mode '" + name + "'");
}

void ObservationPipelineConfig::validate() const {
    if (k != 1 && k != 4 && k != 8 && k != 16) {
        throw std::invalid_argument("pipeline k must be one of {1,4,8,16}");
    }
    if (stack_count < 1) throw std::invalid_argument("stack_count < 1");
    if (proprio_history < 1) throw std::invalid_argument("proprio_history < 1");
    if (proprio_delay_dist.lower < 0.0 ||
        proprio_delay_dist.upper < proprio_delay_dist.lower) {
        throw std::invalid_argument("bad proprio delay range");
    }
    if (visual_delay_dist.lower < 0.0 ||
        visual_delay_dist.upper < visual_delay_dist.lower) {
        throw std::invalid_argument("bad visual delay range");
    }
    if (fixed_delay < 0.0) throw std::invalid_argument("fixed_delay < 0");
    if (control_dt <= 0.0) throw std::invalid_argument("control_dt <= 0");
    if (visual_headroom < 0) throw std::invalid_argument("visual_headroom < 0");
    if (proprio_capacity == 0) throw std::invalid_argument("proprio_capacity == 0");
}

std::vector<int> mmdr_select_indices(int k, int stack_count, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(stack_count));
    for (int j = 0; j < stack_count; ++j) {
        idx[static_cast<std::size_t>(j)] = uniform_int(rng, j * k, (j + 1) * k - 1);
    }
    return idx;
}

std::vector<int> frame_extract_indices(int k, int stack_count) {
    std::vector<int> idx(static_cast<std::size_t>(stack_count));
    for (int j = 0; j < stack_count; ++j) {
        idx[static_cast<std::size_t>(j)] = j * k;
    }
    return idx;
}

EpisodeDelaySample sample_episode_delays(const ObservationPipelineConfig& cfg,
                                         Rng& rng) {
    EpisodeDelaySample s;
    s.visual_indices_seed = rng();
    switch (cfg.mode) {
        case PipelineMode::MMDR:
        case PipelineMode::StateOnly:
            s.proprio_delay = uniform(rng, cfg.proprio_delay_dist.lower,
                                      cfg.proprio_delay_dist.upper);
            break;
        case PipelineMode::Interpolation:
            s.proprio_delay = uniform(rng, cfg.proprio_delay_dist.lower,
                                      cfg.proprio_delay_dist.upper);
            s.visual_delay = uniform(rng, cfg.visual_delay_dist.lower,
                                     cfg.visual_delay_dist.upper);
            break;
        case PipelineMode::FixedDelay:
            s.proprio_delay = cfg.fixed_delay;
            s.visual_delay = cfg.fixed_delay;
            break;
        case PipelineMode::NoDelay:
        case PipelineMode::FrameExtract:
            break;
    }
    return s;
}

Observation assemble_observation(const ObservationPipelineConfig& cfg,
                                 const SampleBuffer& proprio_buf,
                                 const SampleBuffer& visual_buf, double now,
                                 const EpisodeDelaySample& delays,
                                 Rng& index_rng,
                                 const DelayInjection& injection) {
    Observation obs;

    if (proprio_buf.empty()) {
        throw std::logic_error("assemble_observation: proprio buffer is cold");
    }
    obs.proprio_dim = proprio_buf.from_newest(0).value.size();
    obs.proprio.reserve(obs.proprio_dim *
                        static_cast<std::size_t>(cfg.proprio_history));
    const double proprio_lat = delays.proprio_delay + injection.proprio;
    for (int j = 0; j < cfg.proprio_history; ++j) {
        const double q = now - proprio_lat - j * cfg.control_dt;
        const std::vector<double> v = proprio_buf.query_interpolated(q);
        obs.proprio.insert(obs.proprio.end(), v.begin(), v.end());
    }

    const std::size_t stack = static_cast<std::size_t>(cfg.stack_count);

    if (cfg.mode == PipelineMode::StateOnly) {
        obs.frame_dim =
            visual_buf.empty() ? 0 : visual_buf.from_newest(0).value.size();
        obs.depth.assign(stack * obs.frame_dim, 0.0);
        return obs;
    }

    const std::size_t window = static_cast<std::size_t>(cfg.selection_window());
    if (visual_buf.size() < window) {
        throw std::logic_error("assemble_observation: visual buffer is cold");
    }
    obs.frame_dim = visual_buf.from_newest(0).value.size();
    obs.depth.reserve(stack * obs.frame_dim);

    // Injected test-time delay shifts where "newest" effectively sits.
    std::size_t base = 0;
    if (injection.visual > 0.0) {
        base = newest_at_or_before(visual_buf, now - injection.visual);
        if (base + window > visual_buf.size()) base = visual_buf.size() - window;
    }

    auto append_frame = [&](std::size_t i) {
        const std::vector<double>& f = visual_buf.from_newest(i).value;
        obs.depth.insert(obs.depth.end(), f.begin(), f.end());
    };

    switch (cfg.mode) {
        case PipelineMode::MMDR: {
            const std::vector<int> idx =
                mmdr_select_indices(cfg.k, cfg.stack_count, index_rng);
            for (int i : idx) append_frame(base + static_cast<std::size_t>(i));
            break;
        }
        case PipelineMode::NoDelay: {
            for (std::size_t j = 0; j < stack; ++j) append_frame(base + j);
            break;
        }
        case PipelineMode::FrameExtract: {
            for (int i : frame_extract_indices(cfg.k, cfg.stack_count)) {
                append_frame(base + static_cast<std::size_t>(i));
            }
            break;
        }
        case PipelineMode::FixedDelay: {
            const double target = now - cfg.fixed_delay - injection.visual;
            std::size_t b = newest_at_or_before(visual_buf, target);
            if (b + stack > visual_buf.size()) b = visual_buf.size() - stack;
            for (std::size_t j = 0; j < stack; ++j) append_frame(b + j);
            break;
        }
        case PipelineMode::Interpolation: {
            const double q = now - delays.visual_delay - injection.visual;
            if (q >= visual_buf.newest_time()) {
                for (std::size_t j = 0; j < stack; ++j) append_frame(j);
                break;
            }
            std::size_t lo = newest_at_or_before(visual_buf, q);
            if (lo + stack > visual_buf.size()) lo = visual_buf.size() - stack;
            if (lo == 0) {
                for (std::size_t j = 0; j < stack; ++j) append_frame(j);
                break;
            }
            const double t_lo = visual_buf.from_newest(lo).time;
            const double t_hi = visual_buf.from_newest(lo - 1).time;
            double w = (q - t_lo) / (t_hi - t_lo);
            if (w < 0.0) w = 0.0;
            if (w > 1.0) w = 1.0;
            // Shift the whole stack by the episode delay: slot j blends the
            // pair of adjacent frames bracketing the delayed time, one frame
            // interval further back per slot.
            for (std::size_t j = 0; j < stack; ++j) {
                const std::vector<double>& a =
                    visual_buf.from_newest(lo + j).value;      // older
                const std::vector<double>& b =
                    visual_buf.from_newest(lo - 1 + j).value;  // newer
                for (std::size_t p = 0; p < obs.frame_dim; ++p) {
                    obs.depth.push_back(a[p] + w * (b[p] - a[p]));
                }
            }
            break;
        }
        case PipelineMode::StateOnly:
            break;  // handled above
    }
    return obs;
}

ObservationPipeline::ObservationPipeline(const ObservationPipelineConfig& cfg)
    : cfg_(cfg),
      proprio_buf_(cfg.proprio_capacity),
      visual_buf_(static_cast<std::size_t>(cfg.visual_capacity())),
      index_rng_(make_rng(0)) {
    cfg_.validate();
}

void ObservationPipeline::begin_episode(const EpisodeDelaySample& delays,
                                        const DelayInjection& injection) {
    proprio_buf_.clear();
    visual_buf_.clear();
    delays_ = delays;
    injection_ = injection;
    index_rng_ = make_rng(delays.visual_indices_seed);
}

void ObservationPipeline::push_proprio(double time, std::vector<double> state) {
    proprio_buf_.push(time, std::move(state));
}

void ObservationPipeline::push_frame(double time, std::vector<double> depth) {
    visual_buf_.push(time, std::move(depth));
}

bool ObservationPipeline::warmed_up(double now) const {
    const double oldest_query = now - delays_.proprio_delay -
                                injection_.proprio -
                                (cfg_.proprio_history - 1) * cfg_.control_dt;
    if (proprio_buf_.size() < 2 || proprio_buf_.oldest_time() > oldest_query) {
        return false;
    }

    if (cfg_.mode == PipelineMode::StateOnly) return !visual_buf_.empty();

    const std::size_t window = static_cast<std::size_t>(cfg_.selection_window());
    if (visual_buf_.size() < window) return false;

    if (injection_.visual > 0.0) {
        const double target = now - injection_.visual;
        if (visual_buf_.oldest_time() > target) return false;
        const std::size_t base = newest_at_or_before(visual_buf_, target);
        if (base + window > visual_buf_.size()) return false;
    }
    const std::size_t stack = static_cast<std::size_t>(cfg_.stack_count);
    if (cfg_.mode == PipelineMode::FixedDelay) {
        const double target = now - cfg_.fixed_delay - injection_.visual;
        if (visual_buf_.oldest_time() > target) return false;
        if (newest_at_or_before(visual_buf_, target) + stack >
            visual_buf_.size()) {
            return false;
        }
    }
    if (cfg_.mode == PipelineMode::Interpolation) {
        const double q = now - delays_.visual_delay - injection_.visual;
        if (visual_buf_.oldest_time() > q) return false;
        if (newest_at_or_before(visual_buf_, q) + stack > visual_buf_.size()) {
            return false;
        }
    }
    return true;
}

Observation ObservationPipeline::assemble(double now) {
    if (cfg_.per_episode_indices && cfg_.mode == PipelineMode::MMDR) {
        Rng frozen = make_rng(delays_.visual_indices_seed);
        return assemble_observation(cfg_, proprio_buf_, visual_buf_, now,
                                    delays_, frozen, injection_);
    }
    return assemble_observation(cfg_, proprio_buf_, visual_buf_, now, delays_,
                                index_rng_, injection_);
}

}  // namespace mmdr
