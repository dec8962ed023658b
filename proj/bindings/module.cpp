// Python surface: environment stepping, delay-pipeline index draws, policy
// inference from checkpoints, and the training/eval entry points. Arrays
// cross the boundary as copies — simulation state never aliases numpy
// memory.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "mmdr/common/math.hpp"
#include "mmdr/harness/ablation.hpp"
#include "mmdr/harness/bench_delays.hpp"
#include "mmdr/harness/compare.hpp"
#include "mmdr/harness/config.hpp"
#include "mmdr/harness/eval.hpp"
#include "mmdr/harness/train.hpp"
#include "mmdr/nn/checkpoint.hpp"

namespace py = pybind11;
using namespace mmdr;
using namespace mmdr::harness;

namespace {

// `config` is the literal "default", a path to an INI file, or raw INI text
// (recognized by the '=' it must contain; paths may not).
RunConfig resolve_config(const std::string& config) {
    if (config == "default" || config.empty()) {
        return load_run_config("default");
    }
    if (std::filesystem::is_regular_file(config)) {
        return load_run_config(config);
    }
    if (config.find('=') != std::string::npos) {
        return run_config_from_string(config);
    }
    throw std::invalid_argument("config '" + config +
                                "' is neither a file nor INI text");
}

RunConfig resolve_config(const std::string& config, const std::string& mode,
                         int k) {
    RunConfig cfg = resolve_config(config);
    if (!mode.empty()) cfg.env.pipeline.mode = parse_pipeline_mode(mode);
    if (k > 0) cfg.env.pipeline.k = k;
    cfg.validate();
    return cfg;
}

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(const py::array_t<double>& a) {
    py::array_t<double> c = py::array_t<double>::ensure(a);
    std::vector<double> v(c.size());
    std::copy(c.data(), c.data() + c.size(), v.begin());
    return v;
}

// Owns one environment plus the shape info needed to hand out numpy depth
// stacks of shape (stack_count, rows, cols).
class PyEnv {
public:
    PyEnv(const std::string& config, const std::string& mode, int k,
          std::uint64_t seed, int env_index)
        : cfg_(resolve_config(config, mode, k)),
          env_(cfg_.env, seed, env_index) {}

    py::tuple reset(double proprio_delay, double visual_delay) {
        DelayInjection inj{proprio_delay, visual_delay};
        Observation obs = env_.reset(inj);
        return py::make_tuple(to_array(obs.proprio), depth_array(obs));
    }

    py::tuple step(const py::array_t<double>& action) {
        std::vector<double> a = from_array(action);
        if (a.size() != 2) {
            throw std::invalid_argument("action must have 2 elements");
        }
        StepResult r = env_.step({a[0], a[1]});
        py::dict info;
        info["reason"] = termination_reason_name(r.reason);
        info["moving_distance"] = r.metrics.moving_distance;
        info["collision_steps"] = r.metrics.collision_steps;
        info["collision_count"] = r.metrics.collision_count;
        info["frame_pushed"] = r.frame_pushed;
        return py::make_tuple(to_array(r.obs.proprio), depth_array(r.obs),
                              r.reward, r.terminated, r.truncated, info);
    }

    bool episode_over() const { return env_.episode_over(); }
    int steps() const { return env_.steps(); }
    double time() const { return env_.time(); }
    std::size_t proprio_size() const { return env_.proprio_size(); }
    py::tuple depth_shape() const {
        return py::make_tuple(cfg_.env.pipeline.stack_count,
                              cfg_.env.world.depth_rows,
                              cfg_.env.world.depth_cols);
    }
    std::string mode() const {
        return pipeline_mode_name(cfg_.env.pipeline.mode);
    }

private:
    py::array_t<double> depth_array(const Observation& obs) const {
        py::array_t<double> out(
            {static_cast<py::ssize_t>(cfg_.env.pipeline.stack_count),
             static_cast<py::ssize_t>(cfg_.env.world.depth_rows),
             static_cast<py::ssize_t>(cfg_.env.world.depth_cols)});
        std::copy(obs.depth.begin(), obs.depth.end(), out.mutable_data());
        return out;
    }

    RunConfig cfg_;
    Environment env_;
};

// Deterministic inference on a stored checkpoint.
class PyPolicy {
public:
    explicit PyPolicy(const std::string& path)
        : net_(nn::load_checkpoint(path, &meta_)) {}

    py::tuple act(const py::array_t<double>& proprio,
                  const py::array_t<double>& depth) {
        nn::PolicyOutput out =
            net_.forward_one(from_array(proprio), from_array(depth));
        py::array_t<double> mean(2);
        mean.mutable_data()[0] = out.mean[0];
        mean.mutable_data()[1] = out.mean[1];
        return py::make_tuple(mean, out.value);
    }

    py::dict meta() const {
        py::dict d;
        d["pipeline_mode"] = meta_.pipeline_mode;
        d["k"] = meta_.k;
        d["seed"] = meta_.seed;
        d["samples"] = meta_.samples;
        d["adam_steps"] = meta_.adam_steps;
        return d;
    }

    std::size_t parameter_count() const { return net_.parameter_count(); }

    py::array_t<double> log_std() {
        py::array_t<double> out(2);
        out.mutable_data()[0] = net_.log_std(0);
        out.mutable_data()[1] = net_.log_std(1);
        return out;
    }

private:
    nn::CheckpointMeta meta_;
    nn::Network net_;
};

py::dict report_to_dict(const EvalReport& rep) {
    py::dict d;
    d["method"] = rep.method;
    d["protocol"] = rep.protocol;
    d["distance_mean"] = rep.distance_mean;
    d["distance_std"] = rep.distance_std;
    d["collision_mean"] = rep.collision_mean;
    d["collision_std"] = rep.collision_std;
    py::list seeds, seed_distance, seed_collisions;
    for (const SeedSummary& s : rep.seeds) {
        seeds.append(s.seed);
        seed_distance.append(s.mean_distance);
        seed_collisions.append(s.mean_collision_steps);
    }
    d["seeds"] = seeds;
    d["seed_distance"] = seed_distance;
    d["seed_collision_steps"] = seed_collisions;
    d["episodes"] = rep.rows.size();
    py::list rows;
    for (const EpisodeRow& r : rep.rows) {
        py::dict row;
        row["seed"] = r.seed;
        row["episode"] = r.episode;
        row["moving_distance"] = r.moving_distance;
        row["collision_steps"] = r.collision_steps;
        row["collision_count"] = r.collision_count;
        row["episode_length"] = r.episode_length;
        row["proprio_delay"] = r.proprio_delay;
        row["visual_delay"] = r.visual_delay;
        rows.append(row);
    }
    d["rows"] = rows;
    return d;
}

}  // namespace

PYBIND11_MODULE(_mmdr, m) {
    m.doc() =
        "Multi-modal delay randomization: delayed-observation pipeline, "
        "planar obstacle world, PPO training and the evaluation protocols";

    blas_set_single_thread();

    m.attr("__version__") = "0.1.0";

    m.def("list_modes", [] {
        return std::vector<std::string>{"MMDR",       "NoDelay",
                                        "FrameExtract", "FixedDelay",
                                        "Interpolation", "StateOnly"};
    });

    m.def("default_config_text",
          [] { return run_config_to_string(RunConfig{}); });

    m.def(
        "select_indices",
        [](int k, int stack_count, std::uint64_t seed, int draws) {
            Rng rng = make_rng(seed, stream::kAction);
            py::array_t<int> out({draws, stack_count});
            for (int d = 0; d < draws; ++d) {
                std::vector<int> idx = mmdr_select_indices(k, stack_count, rng);
                std::copy(idx.begin(), idx.end(),
                          out.mutable_data() + d * stack_count);
            }
            return out;
        },
        py::arg("k"), py::arg("stack_count") = 4, py::arg("seed") = 1,
        py::arg("draws") = 1,
        "Per-sub-buffer frame draws, one row per draw (newest group first)");

    m.def(
        "extract_indices",
        [](int k, int stack_count) {
            std::vector<int> idx = frame_extract_indices(k, stack_count);
            py::array_t<int> out(static_cast<py::ssize_t>(idx.size()));
            std::copy(idx.begin(), idx.end(), out.mutable_data());
            return out;
        },
        py::arg("k"), py::arg("stack_count") = 4);

    m.def("span_seconds", &visual_span_seconds, py::arg("stack_count"),
          py::arg("k"), py::arg("control_hz"),
          "Seconds of history covered by the visual selection window");

    py::class_<PyEnv>(m, "Env")
        .def(py::init<const std::string&, const std::string&, int,
                      std::uint64_t, int>(),
             py::arg("config") = "default", py::arg("mode") = "",
             py::arg("k") = 0, py::arg("seed") = 1, py::arg("env_index") = 0)
        .def("reset", &PyEnv::reset, py::arg("proprio_delay") = 0.0,
             py::arg("visual_delay") = 0.0,
             "Starts an episode, optionally with injected test-time latency; "
             "returns (proprio, depth)")
        .def("step", &PyEnv::step, py::arg("action"),
             "Returns (proprio, depth, reward, terminated, truncated, info)")
        .def("episode_over", &PyEnv::episode_over)
        .def_property_readonly("steps", &PyEnv::steps)
        .def_property_readonly("time", &PyEnv::time)
        .def_property_readonly("proprio_size", &PyEnv::proprio_size)
        .def_property_readonly("depth_shape", &PyEnv::depth_shape)
        .def_property_readonly("mode", &PyEnv::mode);

    py::class_<PyPolicy>(m, "Policy")
        .def(py::init<const std::string&>(), py::arg("checkpoint"))
        .def("act", &PyPolicy::act, py::arg("proprio"), py::arg("depth"),
             "Deterministic action (the Gaussian mean) and value estimate")
        .def("log_std", &PyPolicy::log_std)
        .def_property_readonly("meta", &PyPolicy::meta)
        .def_property_readonly("parameter_count", &PyPolicy::parameter_count);

    m.def(
        "train",
        [](const std::string& config, const std::string& mode, int k,
           std::uint64_t seed, std::int64_t samples,
           const std::string& out_dir, bool verbose) {
            RunConfig cfg = resolve_config(config, mode, k);
            if (samples > 0) cfg.ppo.total_samples = samples;
            std::ostringstream quiet;
            return run_training(cfg, seed, out_dir,
                                verbose ? &std::cout : nullptr);
        },
        py::arg("config") = "default", py::arg("mode") = "",
        py::arg("k") = 0, py::arg("seed") = 1, py::arg("samples") = 0,
        py::arg("out_dir"), py::arg("verbose") = false,
        py::call_guard<py::gil_scoped_release>(),
        "PPO-trains one run into out_dir, returns the final checkpoint path");

    m.def(
        "evaluate",
        [](const std::string& checkpoint, const std::string& config,
           const std::string& protocol, std::vector<std::uint64_t> seeds,
           int episodes) {
            std::string cfg_src = config;
            if (cfg_src.empty()) {
                cfg_src = (std::filesystem::path(checkpoint).parent_path() /
                           "config.ini")
                              .string();
            }
            RunConfig cfg = resolve_config(cfg_src);
            EvalProtocol proto =
                make_protocol(protocol, cfg.eval, std::move(seeds));
            if (episodes > 0) proto.episodes_per_seed = episodes;
            proto.validate();
            EvalReport rep = evaluate(checkpoint, cfg, proto);
            return report_to_dict(rep);
        },
        py::arg("checkpoint"), py::arg("config") = "",
        py::arg("protocol") = "train_env_random_delay",
        py::arg("seeds") = std::vector<std::uint64_t>{},
        py::arg("episodes") = 0,
        "Deterministic-policy evaluation under a delay protocol");

    m.def(
        "bench_delays",
        [](const std::string& config, std::uint64_t seed, int ticks) {
            RunConfig cfg = resolve_config(config);
            LatencyProfile profile;
            BenchDelaysReport rep =
                run_bench_delays(profile, cfg.env.pipeline, seed, ticks);
            py::dict d;
            d["depth_interval_mean"] = rep.measured_depth_interval_mean;
            d["proprio_interval_mean"] = rep.measured_proprio_interval_mean;
            py::dict modes;
            for (const ModeDelayStats& s : rep.modes) {
                py::dict e;
                e["visual_age_mean"] = s.visual_age_mean;
                e["visual_age_std"] = s.visual_age_std;
                e["visual_age_max"] = s.visual_age_max;
                e["stack_span_mean"] = s.stack_span_mean;
                e["proprio_age_mean"] = s.proprio_age_mean;
                e["reaction_mean"] = s.reaction_mean;
                modes[py::str(s.mode)] = e;
            }
            d["modes"] = modes;
            return d;
        },
        py::arg("config") = "default", py::arg("seed") = 1,
        py::arg("ticks") = 2000,
        "Observation staleness per pipeline mode under the measured "
        "deployment latency profile");
}
