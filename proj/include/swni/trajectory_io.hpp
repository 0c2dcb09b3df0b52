#pragma once

#include "swni/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace swni {

/// Metadata lines written as '#'-prefixed comments ahead of the CSV header.
struct TrajectoryMeta {
    std::string scenario_hash;
    std::vector<std::pair<std::string, std::string>> extra;
};

/// Writes the trajectory as a comma-separated table (full-precision decimal,
/// round-trips bit-exactly) with columns
///   t, <states>, <inputs>, <outputs>, <output rates>, mode, event
/// State columns use the model's state names when given.
void emit_trajectory(const Trajectory& traj, const std::filesystem::path& path,
                     const TrajectoryMeta& meta = {},
                     const std::vector<std::string>& state_names = {});

/// Reads a table written by emit_trajectory. Analytic state rates are not
/// serialized, so x_dot is left empty.
Trajectory load_trajectory(const std::filesystem::path& path);

/// Renders the state components over time as an SVG line plot with vertical
/// markers at switch events.
void emit_plot(const Trajectory& traj, const std::filesystem::path& path,
               const std::vector<std::string>& state_names = {},
               const std::string& title = "State trajectories");

/// FNV-1a 64-bit over the given bytes, as 16 hex digits. Used to stamp
/// outputs with the scenario they came from.
std::string content_hash(const std::string& bytes);

}  // namespace swni
