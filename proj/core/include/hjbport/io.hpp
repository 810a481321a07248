#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "hjbport/hjb.hpp"
#include "hjbport/policy.hpp"
#include "hjbport/sim.hpp"

namespace hjbport {

// Write `body` to `path` via a temporary file and rename, so a crash or error
// never leaves a partial file at the destination.
void atomic_write(const std::string& path, const std::string& body);

// Binary surface checkpoint (magic "HJBSRF01", little-endian fixed-width
// fields). Carries the config hash so downstream commands can verify they are
// fed the surface they expect.
void save_surface(const std::string& path, const ValueSurface& surface,
                  std::uint64_t config_hash);

struct LoadedSurface {
    ValueSurface surface;
    std::uint64_t config_hash = 0;
};

// Throws InputError for malformed files; hash checking is the caller's call.
LoadedSurface load_surface(const std::string& path);

std::string stats_to_csv(const SimStats& stats);
std::string histogram_to_csv(const Histogram& hist);
std::string weight_grid_to_csv(const WeightGrid& grid);
std::string solve_report_to_json(const SolveReport& report);

// Parsed back from stats_to_csv output (used by the report command).
struct StatsSeries {
    std::vector<double> time;
    std::vector<double> mean_wealth;
    std::vector<double> achievement_rate;
    std::vector<double> percentile_point;
    std::vector<double> target_level;
};

StatsSeries parse_stats_csv(const std::string& text);

}  // namespace hjbport
