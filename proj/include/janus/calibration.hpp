#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "janus/energy.hpp"
#include "janus/simulator.hpp"

namespace janus {

/// One of the six measured operating points the current table is fit to.
struct ReferenceCase {
  std::string name;
  LatencyClass latency = LatencyClass::k2s;
  int neighbors = 0;
  double target_ma = 0.0;
};

std::vector<ReferenceCase> reference_cases();

/// Static cluster of neighbors + 1 tags, all within a 1.5 m radius. Energy is
/// measured over `measured` after a warm-up of four epochs.
Scenario reference_scenario(const ReferenceCase& c, std::uint64_t seed = 1, Span measured = minutes(15));

/// Per-state duty cycles averaged over every node of the run.
std::array<double, kPowerStates> mean_duty(const SimOutput& out);

/// Simulates all six cases.
std::vector<CalibrationPoint> reference_points(std::uint64_t seed = 1, Span measured = minutes(15));

/// Table obtained from reference_points(1) with the default baseline; used
/// by `run` when no table is supplied.
CurrentTable reference_current_table();

}  // namespace janus
