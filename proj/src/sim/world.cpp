#include "mmdr/sim/world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmdr/common/math.hpp"

namespace mmdr {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// First intersection parameter of a ray with an axis-aligned box, or +inf on
// a miss. Starting inside the box yields 0.
double ray_box(double ox, double oy, double dx, double dy, const Obstacle& b) {
    double tmin = 0.0;
    double tmax = kInf;
    const double o[2] = {ox, oy};
    const double d[2] = {dx, dy};
    const double lo[2] = {b.cx - b.hx, b.cy - b.hy};
    const double hi[2] = {b.cx + b.hx, b.cy + b.hy};
    for (int a = 0; a < 2; ++a) {
        if (std::fabs(d[a]) < 1e-12) {
            if (o[a] < lo[a] || o[a] > hi[a]) return kInf;
            continue;  // parallel inside the slab: unconstrained
        }
        double t1 = (lo[a] - o[a]) / d[a];
        double t2 = (hi[a] - o[a]) / d[a];
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > tmin) tmin = t1;
        if (t2 < tmax) tmax = t2;
    }
    return tmin <= tmax ? tmin : kInf;
}

struct Contact {
    bool touching = false;
    double nx = 0.0, ny = 0.0;  // unit normal, obstacle -> robot
    double depth = 0.0;         // penetration of the disc, m
};

// Disc-vs-box contact with normal. A center inside the box resolves toward
// the nearest face.
Contact disc_box_contact(double px, double py, double r, const Obstacle& b) {
    Contact c;
    const double qx = clamp(px, b.cx - b.hx, b.cx + b.hx);
    const double qy = clamp(py, b.cy - b.hy, b.cy + b.hy);
    const double ex = px - qx;
    const double ey = py - qy;
    const double d2 = ex * ex + ey * ey;
    if (d2 > r * r) return c;
    c.touching = true;
    if (d2 > 1e-24) {
        const double d = std::sqrt(d2);
        c.nx = ex / d;
        c.ny = ey / d;
        c.depth = r - d;
        return c;
    }
    // Center inside: push out along the axis with the smallest exit.
    const double exit_px = (b.cx + b.hx) - px;  // +x face
    const double exit_mx = px - (b.cx - b.hx);  // -x face
    const double exit_py = (b.cy + b.hy) - py;
    const double exit_my = py - (b.cy - b.hy);
    double best = exit_px;
    c.nx = 1.0;
    c.ny = 0.0;
    if (exit_mx < best) { best = exit_mx; c.nx = -1.0; c.ny = 0.0; }
    if (exit_py < best) { best = exit_py; c.nx = 0.0; c.ny = 1.0; }
    if (exit_my < best) { best = exit_my; c.nx = 0.0; c.ny = -1.0; }
    c.depth = best + r;
    return c;
}

}  // namespace

double RobotState::vx() const { return forward_speed * std::cos(heading); }
double RobotState::vy() const { return forward_speed * std::sin(heading); }

void WorldConfig::validate() const {
    if (sim_hz <= 0 || control_hz <= 0 || camera_hz <= 0) {
        throw std::invalid_argument("rates must be positive");
    }
    if (sim_hz % control_hz != 0) {
        throw std::invalid_argument("sim_hz must be a multiple of control_hz");
    }
    if (arena_length <= 2.0 * start_clearance || arena_width <= 0.0) {
        throw std::invalid_argument("arena too small");
    }
    if (obstacle_count.lower < 0 || obstacle_count.lower > obstacle_count.upper) {
        throw std::invalid_argument("bad obstacle_count range");
    }
    if (obstacle_size.lower <= 0.0 || obstacle_size.lower > obstacle_size.upper) {
        throw std::invalid_argument("bad obstacle_size range");
    }
    if (obstacle_speed.lower < 0.0 || obstacle_speed.lower > obstacle_speed.upper) {
        throw std::invalid_argument("bad obstacle_speed range");
    }
    if (depth_min <= 0.0 || depth_min >= depth_max) {
        throw std::invalid_argument("bad depth clip range");
    }
    if (depth_rows < 1 || depth_cols < 1) {
        throw std::invalid_argument("bad depth image size");
    }
    if (hfov_deg <= 0.0 || hfov_deg >= 180.0 || vfov_deg <= 0.0 ||
        vfov_deg >= 180.0) {
        throw std::invalid_argument("bad field of view");
    }
    if (target_velocity <= 0.0 || max_episode_steps < 1 || robot_radius <= 0.0 ||
        base_mass <= 0.0 || base_inertia <= 0.0 || max_drive <= 0.0 ||
        drive_ref <= 0.0 || contact_drag < 0.0) {
        throw std::invalid_argument("bad robot parameters");
    }
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("gamma must be in (0, 1)");
    }
}

World::World(const WorldConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void World::reset(const EpisodeRandomization& er, Rng& rng) {
    er_ = er;
    robot_ = RobotState{};
    metrics_ = EpisodeMetrics{};
    substeps_ = 0;
    x_start_ = 0.0;
    tick_contact_ = tick_head_on_ = prev_tick_contact_ = false;

    const double x_lo = -1.0;
    const double x_hi = cfg_.arena_length - 1.0;
    const double y_hi = 0.5 * cfg_.arena_width;
    const int count =
        uniform_int(rng, cfg_.obstacle_count.lower, cfg_.obstacle_count.upper);
    obstacles_.clear();
    obstacles_.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            Obstacle b;
            b.hx = uniform(rng, cfg_.obstacle_size.lower, cfg_.obstacle_size.upper);
            b.hy = uniform(rng, cfg_.obstacle_size.lower, cfg_.obstacle_size.upper);
            b.cx = uniform(rng, x_lo + b.hx, x_hi - b.hx);
            b.cy = uniform(rng, -y_hi + b.hy, y_hi - b.hy);
            // Keep the start area clear: nearest point of the box to the
            // origin must be outside the clearance radius.
            const double qx = clamp(0.0, b.cx - b.hx, b.cx + b.hx);
            const double qy = clamp(0.0, b.cy - b.hy, b.cy + b.hy);
            if (qx * qx + qy * qy < square(cfg_.start_clearance)) continue;
            if (cfg_.obstacle_speed.upper > 0.0) {
                const double speed = uniform(rng, cfg_.obstacle_speed.lower,
                                             cfg_.obstacle_speed.upper);
                const double ang = uniform(rng, 0.0, 2.0 * kPi);
                b.vx = speed * std::cos(ang);
                b.vy = speed * std::sin(ang);
            }
            obstacles_.push_back(b);
            placed = true;
        }
        if (!placed) {
            throw std::runtime_error(
                "obstacle placement failed; arena too crowded");
        }
    }
}

void World::set_obstacles(std::vector<Obstacle> obstacles) {
    obstacles_ = std::move(obstacles);
}

void World::advance_obstacles(double dt) {
    const double x_lo = -1.0;
    const double x_hi = cfg_.arena_length - 1.0;
    const double y_hi = 0.5 * cfg_.arena_width;
    for (Obstacle& b : obstacles_) {
        if (b.vx == 0.0 && b.vy == 0.0) continue;
        b.cx += dt * b.vx;
        b.cy += dt * b.vy;
        if (b.cx - b.hx < x_lo) { b.cx = x_lo + b.hx; b.vx = std::fabs(b.vx); }
        if (b.cx + b.hx > x_hi) { b.cx = x_hi - b.hx; b.vx = -std::fabs(b.vx); }
        if (b.cy - b.hy < -y_hi) { b.cy = -y_hi + b.hy; b.vy = std::fabs(b.vy); }
        if (b.cy + b.hy > y_hi) { b.cy = y_hi - b.hy; b.vy = -std::fabs(b.vy); }
    }
}

void World::substep(const std::array<double, 2>& action) {
    if (!std::isfinite(action[0]) || !std::isfinite(action[1])) {
        throw std::invalid_argument("non-finite action");
    }
    const double dt = 1.0 / cfg_.sim_hz;
    const double a0 = clamp(action[0], -1.0, 1.0);
    const double a1 = clamp(action[1], -1.0, 1.0);
    robot_.last_action = {a0, a1};

    const double deadband = er_.motor_friction * cfg_.motor_friction_scale;
    auto drive_for = [&](double cmd, double rate, double accel_prev) {
        double u = er_.motor_strength_scale *
                   (er_.kp * (cmd - rate) - er_.kd * accel_prev);
        const double mag = std::fabs(u) - deadband;
        u = mag > 0.0 ? std::copysign(mag, u) : 0.0;
        return clamp(u, -cfg_.max_drive, cfg_.max_drive);
    };

    const double drive_f = drive_for(a0 * cfg_.max_speed_cmd,
                                     robot_.forward_speed, robot_.accel_prev);
    const double drive_y =
        drive_for(a1 * cfg_.max_yaw_cmd, robot_.yaw_rate, robot_.yaw_accel_prev);
    robot_.drive = {drive_f / cfg_.drive_ref, drive_y / cfg_.drive_ref};

    const double mass = cfg_.base_mass * er_.mass_scale;
    const double inertia = cfg_.base_inertia * er_.inertia_scale;
    const double accel_f =
        (drive_f - er_.lateral_friction * robot_.forward_speed) / mass;
    const double accel_y =
        (drive_y - er_.lateral_friction * robot_.yaw_rate) / inertia;

    // Explicit Euler: pose from the old rates, then the rate update.
    robot_.x += dt * robot_.forward_speed * std::cos(robot_.heading);
    robot_.y += dt * robot_.forward_speed * std::sin(robot_.heading);
    robot_.heading = wrap_angle(robot_.heading + dt * robot_.yaw_rate);
    robot_.forward_speed += dt * accel_f;
    robot_.yaw_rate += dt * accel_y;
    robot_.accel_prev = accel_f;
    robot_.yaw_accel_prev = accel_y;

    advance_obstacles(dt);

    // Latch contacts before resolution, while the closing velocity is real.
    const auto [contact, head_on] = check_collision();
    tick_contact_ = tick_contact_ || contact;
    tick_head_on_ = tick_head_on_ || head_on;
    if (contact) resolve_contacts();

    ++substeps_;
}

std::pair<bool, bool> World::check_collision() const {
    bool contact = false;
    bool head_on = false;
    const double hx = std::cos(robot_.heading);
    const double hy = std::sin(robot_.heading);
    const double rvx = robot_.vx();
    const double rvy = robot_.vy();
    for (const Obstacle& b : obstacles_) {
        const Contact c =
            disc_box_contact(robot_.x, robot_.y, cfg_.robot_radius, b);
        if (!c.touching) continue;
        contact = true;
        // Head-on: facing the surface (normal within 45 degrees of the
        // heading) and actually closing on it.
        const double facing = -(hx * c.nx + hy * c.ny);
        const double closing = -((rvx - b.vx) * c.nx + (rvy - b.vy) * c.ny);
        if (facing >= std::cos(kPi / 4.0) && closing > 0.1) head_on = true;
    }
    return {contact, head_on};
}

void World::resolve_contacts() {
    const double hx = std::cos(robot_.heading);
    const double hy = std::sin(robot_.heading);
    const double dt = 1.0 / cfg_.sim_hz;
    for (const Obstacle& b : obstacles_) {
        const Contact c =
            disc_box_contact(robot_.x, robot_.y, cfg_.robot_radius, b);
        if (!c.touching) continue;
        robot_.x += c.nx * (c.depth + 1e-9);
        robot_.y += c.ny * (c.depth + 1e-9);
        // Kill the velocity component into the face; what survives is the
        // tangential part re-expressed along the heading axis.
        const double align = hx * c.nx + hy * c.ny;
        if (robot_.forward_speed * align < 0.0) {
            robot_.forward_speed *= 1.0 - align * align;
        }
        // Scraping a box is a stumble, not a free slide: while touching,
        // the gait loses speed at contact_drag per second, so sustained
        // grinding stalls the robot even when the face is glancing.
        robot_.forward_speed *=
            std::max(0.0, 1.0 - cfg_.contact_drag * dt);
    }
}

DepthImage World::render_depth() const {
    const int rows = cfg_.depth_rows;
    const int cols = cfg_.depth_cols;
    const double hfov = cfg_.hfov_deg * kPi / 180.0;
    const double vfov = cfg_.vfov_deg * kPi / 180.0;
    DepthImage img(static_cast<std::size_t>(rows * cols));
    std::vector<double> col_dist(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) {
        // Column 0 is the left edge of the image.
        const double phi = hfov * (0.5 - (c + 0.5) / cols);
        const double dx = std::cos(robot_.heading + phi);
        const double dy = std::sin(robot_.heading + phi);
        double best = kInf;
        for (const Obstacle& b : obstacles_) {
            const double t = ray_box(robot_.x, robot_.y, dx, dy, b);
            if (t < best) best = t;
        }
        col_dist[static_cast<std::size_t>(c)] = best;
    }
    for (int r = 0; r < rows; ++r) {
        const double psi = vfov * ((r + 0.5) / rows - 0.5);
        const double stretch = 1.0 / std::cos(psi);
        for (int c = 0; c < cols; ++c) {
            const double d = col_dist[static_cast<std::size_t>(c)] * stretch;
            img[static_cast<std::size_t>(r * cols + c)] =
                clamp(d, cfg_.depth_min, cfg_.depth_max);
        }
    }
    return img;
}

std::vector<double> World::proprio_snapshot() const {
    return {robot_.vx(),
            robot_.vy(),
            robot_.heading,
            robot_.yaw_rate,
            robot_.last_action[0],
            robot_.last_action[1],
            std::sin(robot_.heading),
            std::cos(robot_.heading)};
}

void World::begin_tick() {
    tick_contact_ = false;
    tick_head_on_ = false;
}

void World::end_tick() {
    metrics_.moving_distance = robot_.x - x_start_;
    if (tick_contact_) {
        ++metrics_.collision_steps;
        if (!prev_tick_contact_) ++metrics_.collision_count;
    }
    prev_tick_contact_ = tick_contact_;
}

void World::zero_metrics() {
    metrics_ = EpisodeMetrics{};
    x_start_ = robot_.x;
    tick_contact_ = tick_head_on_ = prev_tick_contact_ = false;
}

bool World::out_of_arena() const {
    return robot_.x < -1.0 || robot_.x > cfg_.arena_length - 1.0 ||
           std::fabs(robot_.y) > 0.5 * cfg_.arena_width;
}

bool World::fall_over() const {
    return std::fabs(robot_.yaw_rate) > cfg_.fall_yaw_rate ||
           std::fabs(robot_.forward_speed) >
               cfg_.fall_speed_factor * cfg_.target_velocity;
}

}  // namespace mmdr
