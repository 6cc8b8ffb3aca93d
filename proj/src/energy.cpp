#include "janus/energy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace janus {

const char* to_string(PowerState s) {
  switch (s) {
    case PowerState::Baseline: return "BASELINE";
    case PowerState::BleScan: return "BLE_SCAN";
    case PowerState::BleAdvTx: return "BLE_ADV_TX";
    case PowerState::UwbActive: return "UWB_ACTIVE";
    case PowerState::UwbWake: return "UWB_WAKE";
    case PowerState::UwbDeepSleep: return "UWB_DEEPSLEEP";
  }
  return "?";
}

EnergyLedger& EnergyLedger::merge(const EnergyLedger& other) {
  for (std::size_t i = 0; i < kPowerStates; ++i) time[i] += other.time[i];
  rangings += other.rangings;
  advertisements += other.advertisements;
  scans += other.scans;
  return *this;
}

std::array<double, kPowerStates> duty_cycles(const EnergyLedger& ledger, Span elapsed) {
  if (elapsed <= Span{}) throw std::invalid_argument("elapsed must be positive");
  std::array<double, kPowerStates> d{};
  for (std::size_t i = 0; i < kPowerStates; ++i) {
    d[i] = static_cast<double>(ledger.time[i].ticks()) / static_cast<double>(elapsed.ticks());
  }
  return d;
}

double average_current(const std::array<double, kPowerStates>& duty, const CurrentTable& table) {
  double ma = table[PowerState::Baseline];
  for (auto s : kAllPowerStates) {
    if (s != PowerState::Baseline) ma += duty[static_cast<std::size_t>(s)] * table[s];
  }
  return ma;
}

double average_current(const EnergyLedger& ledger, const CurrentTable& table, Span elapsed) {
  return average_current(duty_cycles(ledger, elapsed), table);
}

double lifetime_hours(double avg_ma, const Battery& battery) {
  if (!(avg_ma > 0)) throw std::invalid_argument("average current must be positive");
  return battery.capacity_mah / avg_ma;
}

double lifetime_mixed_hours(double p, double alone_ma, double contact_ma, const Battery& battery) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("contact fraction must be in [0, 1]");
  return lifetime_hours((1.0 - p) * alone_ma + p * contact_ma, battery);
}

double duty_hours_scale(double lifetime_24h_hours, double worn_hours_per_day) {
  if (!(worn_hours_per_day > 0 && worn_hours_per_day <= 24)) {
    throw std::invalid_argument("worn hours per day must be in (0, 24]");
  }
  return lifetime_24h_hours / worn_hours_per_day;
}

double CalibrationResult::max_relative_error() const {
  double m = 0.0;
  for (double e : relative_error) m = std::max(m, std::abs(e));
  return m;
}

double calibration_residual(std::span<const CalibrationPoint> points, const CurrentTable& table) {
  double r = 0.0;
  for (const auto& p : points) {
    const double d = average_current(p.duty, table) - p.target_ma;
    r += d * d;
  }
  return r;
}

namespace {

constexpr std::array<PowerState, 4> kFree{PowerState::BleScan, PowerState::BleAdvTx, PowerState::UwbActive,
                                          PowerState::UwbWake};

}  // namespace

CalibrationResult calibrate(std::span<const CalibrationPoint> points, double baseline_ma, double tolerance) {
  if (points.empty()) throw std::invalid_argument("no calibration points");
  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(kFree.size()));
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& p = points[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < kFree.size(); ++c) {
      design(r, static_cast<Eigen::Index>(c)) = p.duty[static_cast<std::size_t>(kFree[c])];
    }
    rhs(r) = p.target_ma - baseline_ma -
             p.duty[static_cast<std::size_t>(PowerState::UwbDeepSleep)] * kUwbDeepSleepCurrentMa;
  }

  // Exact NNLS by enumerating active sets; four unknowns means 16 subsets.
  Eigen::VectorXd best = Eigen::VectorXd::Zero(design.cols());
  double best_cost = rhs.squaredNorm();
  for (unsigned mask = 1; mask < (1u << kFree.size()); ++mask) {
    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; c < kFree.size(); ++c) {
      if (mask & (1u << c)) cols.push_back(static_cast<Eigen::Index>(c));
    }
    Eigen::MatrixXd sub(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = design.col(cols[k]);
    const Eigen::VectorXd x = sub.colPivHouseholderQr().solve(rhs);
    if ((x.array() < 0.0).any() || !x.allFinite()) continue;
    const double cost = (sub * x - rhs).squaredNorm();
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best.setZero();
      for (std::size_t k = 0; k < cols.size(); ++k) best(cols[k]) = x(static_cast<Eigen::Index>(k));
    }
  }

  CalibrationResult result;
  result.table[PowerState::Baseline] = baseline_ma;
  for (std::size_t c = 0; c < kFree.size(); ++c) result.table[kFree[c]] = best(static_cast<Eigen::Index>(c));
  for (const auto& p : points) {
    const double m = average_current(p.duty, result.table);
    result.modelled_ma.push_back(m);
    result.relative_error.push_back((m - p.target_ma) / p.target_ma);
  }
  result.residual_sq = calibration_residual(points, result.table);
  if (result.max_relative_error() > tolerance) {
    throw CalibrationInfeasible("calibration misses a target by more than " +
                                    std::to_string(static_cast<int>(std::lround(tolerance * 100))) + "%",
                                result);
  }
  return result;
}

}  // namespace janus
