#pragma once

#include <cstdint>
#include <vector>

namespace mmdr::ppo {

struct GaeResult {
    std::vector<double> advantages;  // raw (not normalized)
    std::vector<double> returns;     // advantages + values
};

// Generalized advantage estimation over one contiguous trajectory segment,
// computed by the standard backward recursion
//   A[t] = delta[t] + gamma*lambda * A[t+1]   (chain cut at any episode end)
//   delta[t] = r[t] + gamma * V(s_{t+1}) - V(s_t)
// next_values[t] is the bootstrap V(s_{t+1}); a terminated step replaces it
// with zero, a truncated step keeps it (the episode was cut, not failed).
GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<double>& next_values,
                      const std::vector<std::uint8_t>& terminated,
                      const std::vector<std::uint8_t>& truncated,
                      double gamma, double lambda);

// In-place shift/scale to mean 0, std 1 (population std). A near-constant
// input just gets centered.
void normalize_advantages(std::vector<double>& adv);

}  // namespace mmdr::ppo
