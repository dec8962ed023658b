#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "mmdr/common/rng.hpp"
#include "mmdr/rand/domain_rand.hpp"

namespace mmdr {

// Row-major rows x cols grid of clipped depth values in meters.
using DepthImage = std::vector<double>;

struct WorldConfig {
    int sim_hz = 400;      // physics substeps per second
    int control_hz = 25;   // policy rate; sim_hz must be a multiple
    int camera_hz = 30;    // depth frame rate

    // Arena spans x in [-1, arena_length - 1], y in [-arena_width/2, +/2];
    // the robot starts at the origin heading +x.
    double arena_length = 9.0;
    double arena_width = 4.0;

    IntRange obstacle_count{8, 12};
    Range obstacle_size{0.15, 0.45};   // half-extent range per axis, m
    Range obstacle_speed{0.0, 0.0};    // m/s; upper 0 keeps the field static
    double start_clearance = 1.2;      // obstacle-free radius around start

    double target_velocity = 0.35;  // m/s
    int max_episode_steps = 500;    // horizon H in control steps

    int depth_rows = 32;
    int depth_cols = 32;
    double depth_min = 0.3;  // m, clip lower bound
    double depth_max = 10.0; // m, clip upper bound
    double hfov_deg = 90.0;
    double vfov_deg = 60.0;

    double gamma = 0.99;  // discount, consumed by the learner

    double robot_radius = 0.2;     // m
    double base_mass = 10.0;       // kg, scaled by mass_scale
    double base_inertia = 6.0;     // kg m^2, scaled by inertia_scale
    double max_speed_cmd = 1.0;    // m/s at action +1
    double max_yaw_cmd = 1.5;      // rad/s at action +1
    double max_drive = 100.0;      // actuator clamp, N / N m
    double drive_ref = 50.0;       // normalizer for the energy term
    double motor_friction_scale = 20.0;  // deadband = motor_friction * this
    double contact_drag = 6.0;           // 1/s, stumble while touching a box
    double fall_yaw_rate = 6.0;          // rad/s, spin limit
    double fall_speed_factor = 3.0;      // speed limit = factor * target

    void validate() const;  // throws std::invalid_argument
};

struct Obstacle {
    double cx = 0.0, cy = 0.0;  // center, m
    double hx = 0.1, hy = 0.1;  // half extents, m
    double vx = 0.0, vy = 0.0;  // m/s, reflected at arena walls
};

struct RobotState {
    double x = 0.0, y = 0.0;
    double heading = 0.0;        // wrapped to (-pi, pi]
    double forward_speed = 0.0;  // body-frame scalar; world velocity is
                                 // forward_speed * (cos, sin)(heading)
    double yaw_rate = 0.0;
    double accel_prev = 0.0;     // previous substep's dv/dt, for the D term
    double yaw_accel_prev = 0.0;
    std::array<double, 2> drive{0.0, 0.0};        // normalized actuator output
    std::array<double, 2> last_action{0.0, 0.0};  // clamped policy action

    double vx() const;
    double vy() const;
};

struct EpisodeMetrics {
    double moving_distance = 0.0;    // net displacement along +x, m
    std::int64_t collision_steps = 0; // control steps with any contact
    std::int64_t collision_count = 0; // distinct contact events
};

// Planar robot with a velocity-tracking low-level loop, integrated at
// sim_hz. Per substep (dt = 1/sim_hz), per channel, with e the rate error
// and all state read at the start of the substep (explicit Euler):
//
//   raw   = strength * (kp * e - kd * accel_prev)
//   drive = clamp(sign(raw) * max(0, |raw| - motor_friction * friction_scale),
//                 -max_drive, +max_drive)
//   accel = (drive - lateral_friction * rate) / (mass or inertia)
//   pose  += dt * old rates;  rates += dt * accel
//
// Contacts are resolved after the pose update by pushing the robot out of
// the box along the contact normal and projecting its velocity onto the
// tangent plane (re-expressed along the heading axis).
class World {
public:
    explicit World(const WorldConfig& cfg);

    // New episode: robot at the origin heading +x, obstacles re-sampled with
    // rejection so none encroaches on start_clearance. Throws
    // std::runtime_error if a crowded arena cannot be placed.
    void reset(const EpisodeRandomization& er, Rng& rng);

    // One physics step holding a clamped [-1,1]^2 action (target forward
    // speed, target yaw rate after scaling). Throws on non-finite input.
    void substep(const std::array<double, 2>& action);

    // Replaces the obstacle field with a scripted layout (tests, demos).
    void set_obstacles(std::vector<Obstacle> obstacles);

    // Control-tick bracketing for the per-tick contact latches and metrics.
    void begin_tick();
    void end_tick();

    DepthImage render_depth() const;

    // Instantaneous (contact, head_on) for the current state.
    std::pair<bool, bool> check_collision() const;

    // The 8-D snapshot fed to the observation pipeline:
    // (vx, vy, heading, yaw_rate, last_action[0], last_action[1],
    //  sin heading, cos heading).
    std::vector<double> proprio_snapshot() const;

    // Re-bases metrics at the current state (end of the warm-up phase).
    void zero_metrics();

    double time() const { return static_cast<double>(substeps_) / cfg_.sim_hz; }
    std::int64_t substeps() const { return substeps_; }

    bool tick_contact() const { return tick_contact_; }
    bool tick_head_on() const { return tick_head_on_; }
    bool out_of_arena() const;
    bool fall_over() const;

    const WorldConfig& config() const { return cfg_; }
    const RobotState& robot() const { return robot_; }
    const std::vector<Obstacle>& obstacles() const { return obstacles_; }
    const EpisodeRandomization& randomization() const { return er_; }
    const EpisodeMetrics& metrics() const { return metrics_; }

private:
    void resolve_contacts();
    void advance_obstacles(double dt);

    WorldConfig cfg_;
    EpisodeRandomization er_;
    RobotState robot_;
    std::vector<Obstacle> obstacles_;
    EpisodeMetrics metrics_;
    std::int64_t substeps_ = 0;
    double x_start_ = 0.0;
    bool tick_contact_ = false;
    bool tick_head_on_ = false;
    bool prev_tick_contact_ = false;
};

}  // namespace mmdr
