#include "mmdr/harness/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mmdr::harness {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// section -> key -> value, insertion order not preserved (we don't need it).
using IniMap = std::map<std::string, std::map<std::string, std::string>>;

IniMap parse_ini(std::istream& in) {
    IniMap out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw std::invalid_argument("config line " +
                                            std::to_string(lineno) +
                                            ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            out[section];  // remember even if empty
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (section.empty()) {
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": key before any [section]");
        }
        if (key.empty()) {
            throw std::invalid_argument("config line " +
                                        std::to_string(lineno) +
                                        ": empty key");
        }
        out[section][key] = val;
    }
    return out;
}

// Pulls typed values out of one section, tracking which keys were consumed
// so leftovers can be reported as typos.
class Section {
public:
    Section(const IniMap& ini, const std::string& name) : name_(name) {
        auto it = ini.find(name);
        if (it != ini.end()) kv_ = it->second;
    }

    bool get(const std::string& key, double* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        consumed_.insert({key, true});
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            *out = v;
        } catch (const std::exception&) {
            fail(key, it->second, "a number");
        }
        return true;
    }

    bool get(const std::string& key, int* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        consumed_.insert({key, true});
        try {
            std::size_t pos = 0;
            long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            *out = static_cast<int>(v);
        } catch (const std::exception&) {
            fail(key, it->second, "an integer");
        }
        return true;
    }

    bool get(const std::string& key, std::int64_t* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        consumed_.insert({key, true});
        try {
            std::size_t pos = 0;
            long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            *out = v;
        } catch (const std::exception&) {
            fail(key, it->second, "an integer");
        }
        return true;
    }

    bool get(const std::string& key, bool* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        consumed_.insert({key, true});
        const std::string& v = it->second;
        if (v == "true" || v == "1") {
            *out = true;
        } else if (v == "false" || v == "0") {
            *out = false;
        } else {
            fail(key, v, "true/false");
        }
        return true;
    }

    bool get(const std::string& key, std::string* out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return false;
        consumed_.insert({key, true});
        *out = it->second;
        return true;
    }

    void get(const std::string& base, Range* r) {
        get(base + "_lower", &r->lower);
        get(base + "_upper", &r->upper);
    }

    void get(const std::string& base, IntRange* r) {
        get(base + "_lower", &r->lower);
        get(base + "_upper", &r->upper);
    }

    void finish() const {
        for (const auto& [key, val] : kv_) {
            if (!consumed_.count(key)) {
                throw std::invalid_argument("config: unknown key '" + key +
                                            "' in section [" + name_ + "]");
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& val,
                           const char* want) const {
        throw std::invalid_argument("config: [" + name_ + "] " + key + " = '" +
                                    val + "' is not " + want);
    }

    std::string name_;
    std::map<std::string, std::string> kv_;
    std::map<std::string, bool> consumed_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit(std::ostream& os, const char* key, double v) {
    os << key << " = " << fmt(v) << "\n";
}
void emit(std::ostream& os, const char* key, int v) {
    os << key << " = " << v << "\n";
}
void emit(std::ostream& os, const char* key, std::int64_t v) {
    os << key << " = " << v << "\n";
}
void emit(std::ostream& os, const char* key, bool v) {
    os << key << " = " << (v ? "true" : "false") << "\n";
}
void emit(std::ostream& os, const char* key, const std::string& v) {
    os << key << " = " << v << "\n";
}
void emit_range(std::ostream& os, const std::string& base, const Range& r) {
    os << base << "_lower = " << fmt(r.lower) << "\n";
    os << base << "_upper = " << fmt(r.upper) << "\n";
}
void emit_range(std::ostream& os, const std::string& base, const IntRange& r) {
    os << base << "_lower = " << r.lower << "\n";
    os << base << "_upper = " << r.upper << "\n";
}

}  // namespace

void EvalConfig::validate() const {
    if (episodes_per_seed <= 0) {
        throw std::invalid_argument("eval: episodes_per_seed must be > 0");
    }
    if (injected_delay.lower < 0.0 ||
        injected_delay.upper < injected_delay.lower) {
        throw std::invalid_argument("eval: bad injected_delay range");
    }
    if (obstacle_speed.lower < 0.0 ||
        obstacle_speed.upper < obstacle_speed.lower) {
        throw std::invalid_argument("eval: bad obstacle_speed range");
    }
}

void RunConfig::validate() const {
    env.world.validate();
    env.pipeline.validate();
    env.randomization.validate();
    ppo.validate();
    eval.validate();
    arch_for(*this).validate();
}

nn::ArchConfig arch_for(const RunConfig& cfg) {
    nn::ArchConfig a;
    a.in_channels = cfg.env.pipeline.stack_count;
    a.in_rows = cfg.env.world.depth_rows;
    a.in_cols = cfg.env.world.depth_cols;
    a.proprio_dim = cfg.env.pipeline.proprio_history * 8;
    a.state_only = cfg.env.pipeline.mode == PipelineMode::StateOnly;
    a.proprio_scale =
        nn::default_proprio_scale(cfg.env.pipeline.proprio_history);
    return a;
}

RunConfig run_config_from_string(const std::string& text) {
    std::istringstream in(text);
    IniMap ini = parse_ini(in);
    for (const auto& [name, kv] : ini) {
        if (name != "world" && name != "pipeline" && name != "randomization" &&
            name != "ppo" && name != "eval") {
            throw std::invalid_argument("config: unknown section [" + name +
                                        "]");
        }
    }

    RunConfig cfg;

    {
        Section s(ini, "world");
        WorldConfig& w = cfg.env.world;
        s.get("sim_hz", &w.sim_hz);
        s.get("control_hz", &w.control_hz);
        s.get("camera_hz", &w.camera_hz);
        s.get("arena_length", &w.arena_length);
        s.get("arena_width", &w.arena_width);
        s.get("obstacle_count", &w.obstacle_count);
        s.get("obstacle_size", &w.obstacle_size);
        s.get("obstacle_speed", &w.obstacle_speed);
        s.get("start_clearance", &w.start_clearance);
        s.get("target_velocity", &w.target_velocity);
        s.get("max_episode_steps", &w.max_episode_steps);
        s.get("depth_rows", &w.depth_rows);
        s.get("depth_cols", &w.depth_cols);
        s.finish();
    }
    {
        Section s(ini, "pipeline");
        ObservationPipelineConfig& p = cfg.env.pipeline;
        std::string mode;
        if (s.get("mode", &mode)) p.mode = parse_pipeline_mode(mode);
        s.get("k", &p.k);
        s.get("stack_count", &p.stack_count);
        s.get("proprio_history", &p.proprio_history);
        s.get("fixed_delay", &p.fixed_delay);
        s.get("visual_delay_lower", &p.visual_delay_dist.lower);
        s.get("visual_delay_upper", &p.visual_delay_dist.upper);
        s.get("per_episode_indices", &p.per_episode_indices);
        s.get("visual_headroom", &p.visual_headroom);
        s.finish();
    }
    {
        Section s(ini, "randomization");
        RandomizationRanges& r = cfg.env.randomization;
        s.get("enabled", &r.enabled);
        s.get("mass_scale", &r.mass_scale);
        s.get("motor_friction", &r.motor_friction);
        s.get("motor_strength_scale", &r.motor_strength_scale);
        s.get("lateral_friction", &r.lateral_friction);
        s.get("inertia_scale", &r.inertia_scale);
        s.get("proprio_latency", &r.proprio_latency);
        s.get("kp", &r.kp);
        s.get("kd", &r.kd);
        s.get("hole_pixels", &r.hole_pixels);
        s.finish();
    }
    {
        Section s(ini, "ppo");
        ppo::PPOConfig& p = cfg.ppo;
        s.get("total_samples", &p.total_samples);
        s.get("batch_size", &p.batch_size);
        s.get("minibatches", &p.minibatches);
        s.get("epochs", &p.epochs);
        s.get("clip", &p.clip);
        s.get("gamma", &p.gamma);
        s.get("gae_lambda", &p.gae_lambda);
        s.get("value_coef", &p.value_coef);
        s.get("entropy_coef", &p.entropy_coef);
        s.get("lr", &p.lr);
        s.get("num_envs", &p.num_envs);
        s.get("checkpoint_every", &p.checkpoint_every);
        s.finish();
    }
    {
        Section s(ini, "eval");
        EvalConfig& e = cfg.eval;
        s.get("episodes_per_seed", &e.episodes_per_seed);
        s.get("injected_delay", &e.injected_delay);
        s.get("obstacle_speed", &e.obstacle_speed);
        s.finish();
    }

    // Derived wiring: the INI owns one copy of each shared quantity.
    cfg.env.pipeline.control_dt = 1.0 / cfg.env.world.control_hz;
    cfg.env.pipeline.proprio_delay_dist = {
        cfg.env.randomization.proprio_latency.lower,
        cfg.env.randomization.proprio_latency.upper};
    cfg.env.world.gamma = cfg.ppo.gamma;

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    if (path == "default") {
        RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_config_from_string(ss.str());
}

std::string run_config_to_string(const RunConfig& cfg) {
    std::ostringstream os;
    const WorldConfig& w = cfg.env.world;
    os << "[world]\n";
    emit(os, "sim_hz", w.sim_hz);
    emit(os, "control_hz", w.control_hz);
    emit(os, "camera_hz", w.camera_hz);
    emit(os, "arena_length", w.arena_length);
    emit(os, "arena_width", w.arena_width);
    emit_range(os, "obstacle_count", w.obstacle_count);
    emit_range(os, "obstacle_size", w.obstacle_size);
    emit_range(os, "obstacle_speed", w.obstacle_speed);
    emit(os, "start_clearance", w.start_clearance);
    emit(os, "target_velocity", w.target_velocity);
    emit(os, "max_episode_steps", w.max_episode_steps);
    emit(os, "depth_rows", w.depth_rows);
    emit(os, "depth_cols", w.depth_cols);

    const ObservationPipelineConfig& p = cfg.env.pipeline;
    os << "\n[pipeline]\n";
    emit(os, "mode", std::string(pipeline_mode_name(p.mode)));
    emit(os, "k", p.k);
    emit(os, "stack_count", p.stack_count);
    emit(os, "proprio_history", p.proprio_history);
    emit(os, "fixed_delay", p.fixed_delay);
    emit(os, "visual_delay_lower", p.visual_delay_dist.lower);
    emit(os, "visual_delay_upper", p.visual_delay_dist.upper);
    emit(os, "per_episode_indices", p.per_episode_indices);
    emit(os, "visual_headroom", p.visual_headroom);

    const RandomizationRanges& r = cfg.env.randomization;
    os << "\n[randomization]\n";
    emit(os, "enabled", r.enabled);
    emit_range(os, "mass_scale", r.mass_scale);
    emit_range(os, "motor_friction", r.motor_friction);
    emit_range(os, "motor_strength_scale", r.motor_strength_scale);
    emit_range(os, "lateral_friction", r.lateral_friction);
    emit_range(os, "inertia_scale", r.inertia_scale);
    emit_range(os, "proprio_latency", r.proprio_latency);
    emit_range(os, "kp", r.kp);
    emit_range(os, "kd", r.kd);
    emit_range(os, "hole_pixels", r.hole_pixels);

    const ppo::PPOConfig& pp = cfg.ppo;
    os << "\n[ppo]\n";
    emit(os, "total_samples", pp.total_samples);
    emit(os, "batch_size", pp.batch_size);
    emit(os, "minibatches", pp.minibatches);
    emit(os, "epochs", pp.epochs);
    emit(os, "clip", pp.clip);
    emit(os, "gamma", pp.gamma);
    emit(os, "gae_lambda", pp.gae_lambda);
    emit(os, "value_coef", pp.value_coef);
    emit(os, "entropy_coef", pp.entropy_coef);
    emit(os, "lr", pp.lr);
    emit(os, "num_envs", pp.num_envs);
    emit(os, "checkpoint_every", pp.checkpoint_every);

    const EvalConfig& e = cfg.eval;
    os << "\n[eval]\n";
    emit(os, "episodes_per_seed", e.episodes_per_seed);
    emit_range(os, "injected_delay", e.injected_delay);
    emit_range(os, "obstacle_speed", e.obstacle_speed);
    return os.str();
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("config: cannot write '" + path + "'");
    }
    out << run_config_to_string(cfg);
    if (!out) {
        throw std::runtime_error("config: write to '" + path + "' failed");
    }
}

}  // namespace mmdr::harness
