#include "janus/calibration.hpp"

#include <cmath>
#include <numbers>

namespace janus {

std::vector<ReferenceCase> reference_cases() {
  return {
      {"alone_2s", LatencyClass::k2s, 0, 1.88},
      {"alone_30s", LatencyClass::k30s, 0, 0.95},
      {"1_neighbor_2s", LatencyClass::k2s, 1, 2.33},
      {"1_neighbor_30s", LatencyClass::k30s, 1, 0.985},
      {"9_neighbors_2s", LatencyClass::k2s, 9, 5.28},
      {"9_neighbors_30s", LatencyClass::k30s, 9, 1.2},
  };
}

Scenario reference_scenario(const ReferenceCase& c, std::uint64_t seed, Span measured) {
  Scenario s;
  s.seed = seed;
  s.protocol = preset(c.latency);
  s.measure_from = s.protocol.epoch * 4;
  s.duration = s.measure_from + measured;
  const int n = c.neighbors + 1;
  for (int i = 0; i < n; ++i) {
    NodeSpec node;
    node.address = NodeAddress::from_u64(0xC0FFEE000000ULL + static_cast<std::uint64_t>(i));
    const double angle = 2.0 * std::numbers::pi * i / n;
    const double r = n > 1 ? 1.5 : 0.0;
    node.waypoints = {{Span{}, r * std::cos(angle), r * std::sin(angle)}};
    s.nodes.push_back(node);
  }
  return s;
}

std::array<double, kPowerStates> mean_duty(const SimOutput& out) {
  std::array<double, kPowerStates> sum{};
  for (const auto& e : out.energy) {
    const auto d = duty_cycles(e.ledger, e.elapsed);
    for (std::size_t k = 0; k < kPowerStates; ++k) sum[k] += d[k];
  }
  if (!out.energy.empty()) {
    for (auto& v : sum) v /= static_cast<double>(out.energy.size());
  }
  return sum;
}

std::vector<CalibrationPoint> reference_points(std::uint64_t seed, Span measured) {
  std::vector<CalibrationPoint> points;
  for (const auto& c : reference_cases()) {
    const SimOutput out = run(reference_scenario(c, seed, measured));
    points.push_back(CalibrationPoint{c.name, c.target_ma, mean_duty(out)});
  }
  return points;
}

CurrentTable reference_current_table() {
  CurrentTable t;
  t[PowerState::BleScan] = 8.368407440812828;
  t[PowerState::BleAdvTx] = 9.626831963490439;
  t[PowerState::UwbActive] = 132.93457138067507;
  t[PowerState::UwbWake] = 23.946554696883393;
  return t;
}

}  // namespace janus
