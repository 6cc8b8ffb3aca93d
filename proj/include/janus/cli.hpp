#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "janus/analysis.hpp"
#include "janus/energy.hpp"

namespace janus::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        // e.g. optimizer finds no feasible configuration
  kInvalidInput = 2,
  kIoFailure = 3,
  kCalibrationInfeasible = 4,
};

struct RunOptions {
  std::filesystem::path scenario;
  std::vector<std::uint64_t> seeds;  // empty: the scenario's own seed
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  std::optional<std::filesystem::path> currents;
};

struct CalibrateOptions {
  std::filesystem::path out = "currents.json";
  std::optional<std::filesystem::path> curve;
  double baseline_ma = kBaselineCurrentMa;
  std::uint64_t seed = 1;
};

struct AnalyzeOptions {
  std::filesystem::path samples;
  std::filesystem::path out_dir = "analysis";
  ContactParams contact;
  Span period = seconds(15);
  std::size_t participants = 0;
};

struct OptimizeOptions {
  double target_s = 2.0;
  int density = 10;
  int trials = 10'000;
  std::uint64_t seed = 0x4A414E5553ULL;
  double target_probability = 0.95;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_optimize(const OptimizeOptions& opts, std::ostream& out, std::ostream& err);

/// Reads either a bare state->mA object or a calibration report.
CurrentTable load_current_table(const std::filesystem::path& path);

/// Full command line, argv[0] included.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace janus::cli
