#include "mmdr/ppo/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace mmdr::ppo {

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<double>& next_values,
                      const std::vector<std::uint8_t>& terminated,
                      const std::vector<std::uint8_t>& truncated,
                      double gamma, double lambda) {
    const std::size_t t_len = rewards.size();
    if (values.size() != t_len || next_values.size() != t_len ||
        terminated.size() != t_len || truncated.size() != t_len)
        throw std::invalid_argument("gae input length mismatch");

    GaeResult out;
    out.advantages.resize(t_len);
    out.returns.resize(t_len);
    double carry = 0.0;
    for (std::size_t i = t_len; i-- > 0;) {
        const bool done = terminated[i] != 0 || truncated[i] != 0;
        const double bootstrap = terminated[i] != 0 ? 0.0 : next_values[i];
        const double delta = rewards[i] + gamma * bootstrap - values[i];
        carry = delta + (done ? 0.0 : gamma * lambda * carry);
        out.advantages[i] = carry;
        out.returns[i] = carry + values[i];
    }
    return out;
}

void normalize_advantages(std::vector<double>& adv) {
    if (adv.empty()) return;
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= static_cast<double>(adv.size());
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(adv.size());
    const double std = std::sqrt(var);
    const double inv = std > 1e-8 ? 1.0 / std : 0.0;
    for (double& a : adv) a = (a - mean) * inv;
}

}  // namespace mmdr::ppo
