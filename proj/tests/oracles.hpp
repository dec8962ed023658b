#pragma once

// Independent reference implementations used to cross-check the production
// code. Everything here is deliberately written the slow, obvious way and
// shares no code with src/.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Piecewise-linear interpolation over (times, values) with clamping at both
// ends. times must be strictly increasing; values[i] belongs to times[i].
inline std::vector<double> piecewise_linear(
    const std::vector<double>& times,
    const std::vector<std::vector<double>>& values, double q) {
    if (times.empty() || times.size() != values.size()) {
        throw std::invalid_argument("piecewise_linear: bad inputs");
    }
    if (q <= times.front()) return values.front();
    if (q >= times.back()) return values.back();
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        if (q >= times[i] && q <= times[i + 1]) {
            const double w = (q - times[i]) / (times[i + 1] - times[i]);
            std::vector<double> out(values[i].size());
            for (std::size_t p = 0; p < out.size(); ++p) {
                out[p] = values[i][p] + w * (values[i + 1][p] - values[i][p]);
            }
            return out;
        }
    }
    throw std::logic_error("piecewise_linear: fell off the segment scan");
}

// Pearson chi-square statistic against per-cell expected counts.
inline double chi_square_stat(const std::vector<double>& observed,
                              const std::vector<double>& expected) {
    double s = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = observed[i] - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

// Upper 1% critical values of the chi-square distribution (reject uniformity
// when the statistic exceeds these; staying below them means p > 0.01).
inline constexpr double kChiSq99Df3 = 11.345;
inline constexpr double kChiSq99Df12 = 26.217;
inline constexpr double kChiSq99Df15 = 30.578;

inline double central_difference(const std::function<double(double)>& f,
                                 double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Central-difference gradient of a scalar function of a flat parameter
// vector. h is the absolute step per coordinate.
inline std::vector<double> central_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Generalized advantage estimation as an explicit O(T^2) discounted sum of
// TD residuals, one truncated geometric series per step. next_values[t] is
// V(s_{t+1}) (the bootstrap target at a truncation); terminated[t] zeroes
// the successor value, and either flag ends the credit chain.
inline std::vector<double> gae_quadratic(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<double>& next_values,
    const std::vector<unsigned char>& terminated,
    const std::vector<unsigned char>& truncated, double gamma, double lam) {
    const std::size_t T = rewards.size();
    std::vector<double> delta(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double vnext = terminated[t] ? 0.0 : next_values[t];
        delta[t] = rewards[t] + gamma * vnext - values[t];
    }
    std::vector<double> adv(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        double coef = 1.0;
        for (std::size_t l = t; l < T; ++l) {
            adv[t] += coef * delta[l];
            if (terminated[l] || truncated[l]) break;
            coef *= gamma * lam;
        }
    }
    return adv;
}

// First hit distance of a ray against a set of axis-aligned boxes by brute
// force marching; boxes are (cx, cy, hx, hy). Returns t_max on a miss.
struct Box {
    double cx, cy, hx, hy;
};

inline bool point_in_box(double x, double y, const Box& b) {
    return x >= b.cx - b.hx && x <= b.cx + b.hx && y >= b.cy - b.hy &&
           y <= b.cy + b.hy;
}

inline double ray_march(double ox, double oy, double dx, double dy,
                        const std::vector<Box>& boxes, double t_max,
                        double step) {
    for (double t = 0.0; t <= t_max; t += step) {
        const double x = ox + t * dx;
        const double y = oy + t * dy;
        for (const Box& b : boxes) {
            if (point_in_box(x, y, b)) {
                // Bisect the last step for a tighter hit estimate.
                double lo = t - step, hi = t;
                if (lo < 0.0) lo = 0.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    bool inside = false;
                    for (const Box& bb : boxes) {
                        if (point_in_box(ox + mid * dx, oy + mid * dy, bb)) {
                            inside = true;
                            break;
                        }
                    }
                    (inside ? hi : lo) = mid;
                }
                return hi;
            }
        }
    }
    return t_max;
}

// Composite Simpson quadrature on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace oracle
