#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace hjbport {

// Standard splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stateless counter-based generator: every draw is addressed by (key, counter)
// alone, so parallel workers produce identical streams regardless of scheduling
// or worker count. The simulator keys one stream per path and indexes counters
// by (rebalance step, lane).
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(splitmix64(splitmix64(seed) ^ (0xa5a5a5a55a5a5a5aULL + stream))) {}

    std::uint64_t word(std::uint64_t counter) const {
        return splitmix64(key_ ^ splitmix64(counter));
    }

    // Uniform draw on (0, 1]; never returns 0 so log() is safe.
    double uniform01(std::uint64_t counter) const {
        return (static_cast<double>(word(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    // Box-Muller pair from counters (2k, 2k+1).
    std::pair<double, double> normal_pair(std::uint64_t pair_index) const {
        const double u1 = uniform01(2 * pair_index);
        const double u2 = uniform01(2 * pair_index + 1);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

  private:
    std::uint64_t key_;
};

}  // namespace hjbport
