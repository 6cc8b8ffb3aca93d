#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "janus/time.hpp"

namespace janus {

enum class PowerState : std::uint8_t {
  Baseline,     // MCU and peripherals, radios idle; accrues always
  BleScan,
  BleAdvTx,
  UwbActive,    // TX/RX/listen during an exchange or an owned window
  UwbWake,      // deep-sleep resume
  UwbDeepSleep,
};

inline constexpr std::size_t kPowerStates = 6;
inline constexpr std::array<PowerState, kPowerStates> kAllPowerStates{
    PowerState::Baseline, PowerState::BleScan,   PowerState::BleAdvTx,
    PowerState::UwbActive, PowerState::UwbWake, PowerState::UwbDeepSleep};

const char* to_string(PowerState s);

inline constexpr double kBaselineCurrentMa = 0.72;
inline constexpr double kUwbDeepSleepCurrentMa = 5e-6;  // ~5 nA

/// Current draw per state in mA. Radio states add on top of the baseline.
struct CurrentTable {
  std::array<double, kPowerStates> ma{kBaselineCurrentMa, 0.0, 0.0, 0.0, 0.0, kUwbDeepSleepCurrentMa};

  [[nodiscard]] double operator[](PowerState s) const { return ma[static_cast<std::size_t>(s)]; }
  double& operator[](PowerState s) { return ma[static_cast<std::size_t>(s)]; }
  friend bool operator==(const CurrentTable&, const CurrentTable&) = default;
};

/// Time spent per state. Baseline equals elapsed time; the UWB states
/// (active, wake, deep sleep) partition it; BLE scan + adv never exceed it.
struct EnergyLedger {
  std::array<Span, kPowerStates> time{};
  std::uint64_t rangings = 0;
  std::uint64_t advertisements = 0;
  std::uint64_t scans = 0;

  [[nodiscard]] Span operator[](PowerState s) const { return time[static_cast<std::size_t>(s)]; }
  Span& operator[](PowerState s) { return time[static_cast<std::size_t>(s)]; }

  /// Sum of two ledgers (parallel runs or consecutive intervals).
  EnergyLedger& merge(const EnergyLedger& other);
  friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

struct Battery {
  double capacity_mah = 950.0;
};

/// BASELINE + sum over radio states of (duration / elapsed) * current.
double average_current(const EnergyLedger& ledger, const CurrentTable& table, Span elapsed);

/// Fraction of `elapsed` spent in each state.
std::array<double, kPowerStates> duty_cycles(const EnergyLedger& ledger, Span elapsed);
double average_current(const std::array<double, kPowerStates>& duty, const CurrentTable& table);

/// Hours: capacity / average current.
double lifetime_hours(double avg_ma, const Battery& battery = {});
/// Hours for a mix spending fraction p in contact.
double lifetime_mixed_hours(double p, double alone_ma, double contact_ma, const Battery& battery = {});
/// Calendar days when worn only `worn_hours_per_day`, drawing nothing when off.
double duty_hours_scale(double lifetime_24h_hours, double worn_hours_per_day);

inline double hours_to_days(double h) { return h / 24.0; }

// --- calibration ------------------------------------------------------------

struct CalibrationPoint {
  std::string name;
  double target_ma = 0.0;
  std::array<double, kPowerStates> duty{};
};

struct CalibrationResult {
  CurrentTable table;
  std::vector<double> modelled_ma;
  std::vector<double> relative_error;  // (modelled - target) / target
  double residual_sq = 0.0;            // sum of squared mA residuals
  [[nodiscard]] double max_relative_error() const;
};

class CalibrationInfeasible : public std::runtime_error {
 public:
  CalibrationInfeasible(const std::string& what, CalibrationResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  [[nodiscard]] const CalibrationResult& best() const { return best_; }

 private:
  CalibrationResult best_;
};

/// Non-negative least-squares fit of the BLE scan, BLE advertising, UWB
/// active and UWB wake currents; baseline and deep-sleep stay fixed.
/// Throws CalibrationInfeasible unless every modelled average is within
/// `tolerance` (relative) of its target.
CalibrationResult calibrate(std::span<const CalibrationPoint> points, double baseline_ma = kBaselineCurrentMa,
                            double tolerance = 0.10);

/// Squared residual of a given table over the points.
double calibration_residual(std::span<const CalibrationPoint> points, const CurrentTable& table);

}  // namespace janus
