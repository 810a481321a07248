#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjbport/hjb.hpp"
#include "hjbport/market.hpp"
#include "hjbport/sim.hpp"

namespace hjbport {

// Complete description of one experiment: market, target, discretization and
// simulation settings. Serializes to a schema-versioned JSON document.
struct ExperimentConfig {
    int schema_version = 1;
    std::string name = "custom";
    std::string output_dir = "out";
    MarketParams market;
    TargetSpec target;
    GridSpec grid;
    SimConfig sim;

    // Cross-field checks on top of the per-block validation: surface rows
    // must land on rebalance dates and the horizon must split into whole
    // rebalance intervals.
    void validate() const;

    // Steps between stored surface rows, so rows align with rebalance dates.
    long store_stride() const;
};

// Parse from JSON text; error messages carry the offending field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: sorted keys, shortest round-trip numbers. Parsing
// the output reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash over the canonical serialization of the blocks that
// determine the solved surface (market, target, grid, rebalance). Simulation
// seed and path count do not enter.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Built-in experiment presets, one per reference table row.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

}  // namespace hjbport
