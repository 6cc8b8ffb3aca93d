#include "janus/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "janus/calibration.hpp"
#include "janus/discovery.hpp"
#include "janus/io.hpp"

namespace janus::cli {

using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::filesystem::path& path) {
  try {
    return read_file(path);
  } catch (const IoError& e) {
    throw InputError(e.what());
  }
}

json parse_json(const std::string& text, const std::filesystem::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ScenarioInvalid& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const MalformedInput& e) {
    err << "error: malformed input, " << e.what() << '\n';
    return kInvalidInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  }
}

void write_outputs(const std::filesystem::path& dir, RunManifest manifest) {
  for (const auto& f : manifest.files) write_file(dir / f.name, f.contents);
  write_file(dir / "manifest.json", to_json(manifest).dump(2) + "\n");
}

std::string options_text(std::uint64_t seed, const std::string& currents_bytes) {
  return "seed=" + std::to_string(seed) + ";currents=" + hex64(fnv1a64(currents_bytes));
}

}  // namespace

CurrentTable load_current_table(const std::filesystem::path& path) {
  const json j = parse_json(read_input(path), path);
  if (j.is_object() && j.contains("currents")) return current_table_from_json(j.at("currents"));
  return current_table_from_json(j);
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string bytes = read_input(opts.scenario);
    const Scenario base = scenario_from_json(parse_json(bytes, opts.scenario));
    CurrentTable table = reference_current_table();
    std::string currents_bytes;
    if (opts.currents) {
      currents_bytes = read_input(*opts.currents);
      table = load_current_table(*opts.currents);
    }

    std::vector<std::uint64_t> seeds = opts.seeds;
    if (seeds.empty()) seeds.push_back(base.seed);
    const bool nested = seeds.size() > 1;

    std::vector<int> codes(seeds.size(), kOk);
    std::vector<std::string> messages(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < seeds.size(); i = next++) {
        std::ostringstream diag;
        codes[i] = guarded(diag, [&] {
          Scenario sc = base;
          sc.seed = seeds[i];
          const SimOutput result = run(sc);

          RunManifest m;
          m.command = "run";
          m.input = opts.scenario.string();
          m.seed = sc.seed;
          m.config_hash = config_hash(bytes, options_text(sc.seed, currents_bytes));
          std::ostringstream ranges, rssi, events, energy, latency;
          write_ranges_csv(ranges, result.ranges);
          write_rssi_csv(rssi, result.rssi);
          write_events_csv(events, result.events);
          write_energy_csv(energy, result.energy, table);
          write_latency_csv(latency, result.latency);
          m.files = {{"ranges.csv", ranges.str()},
                     {"rssi.csv", rssi.str()},
                     {"events.csv", events.str()},
                     {"energy.csv", energy.str()},
                     {"latency.csv", latency.str()}};
          m.extra["uwb"] = json{{"scheduled", result.stats.scheduled},
                                {"succeeded", result.stats.succeeded},
                                {"slot_collisions", result.stats.slot_collisions}};
          const auto dir = nested ? opts.out_dir / ("seed-" + std::to_string(sc.seed)) : opts.out_dir;
          write_outputs(dir, m);
          return int{kOk};
        });
        messages[i] = diag.str();
      }
    };
    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(seeds.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kOk;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      err << messages[i];
      if (codes[i] != kOk && code == kOk) code = codes[i];
      if (codes[i] == kOk) out << "seed " << seeds[i] << ": ok\n";
    }
    return code;
  });
}

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto points = reference_points(opts.seed);
    CalibrationResult result;
    bool accepted = true;
    try {
      result = calibrate(points, opts.baseline_ma);
    } catch (const CalibrationInfeasible& e) {
      err << "error: " << e.what() << '\n';
      result = e.best();
      accepted = false;
    }

    json report{{"schema_version", kManifestSchemaVersion},
                {"tool_version", kToolVersion},
                {"seed", opts.seed},
                {"accepted", accepted},
                {"currents", to_json(result.table)},
                {"residual_sq", result.residual_sq},
                {"max_relative_error", result.max_relative_error()}};
    json rows = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
      json duty = json::object();
      for (auto s : kAllPowerStates) duty[to_string(s)] = points[i].duty[static_cast<std::size_t>(s)];
      rows.push_back(json{{"name", points[i].name},
                          {"target_ma", points[i].target_ma},
                          {"modelled_ma", result.modelled_ma[i]},
                          {"relative_error", result.relative_error[i]},
                          {"duty", duty}});
      out << points[i].name << ": target " << points[i].target_ma << " mA, modelled " << result.modelled_ma[i]
          << " mA (" << result.relative_error[i] * 100.0 << "%)\n";
    }
    report["points"] = rows;
    write_file(opts.out, report.dump(2) + "\n");

    if (opts.curve) {
      auto ma = [&](const std::string& name) {
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (points[i].name == name) return result.modelled_ma[i];
        }
        return 0.0;
      };
      std::ostringstream csv;
      write_lifetime_curve_csv(csv, {{"1_neighbor_2s", ma("alone_2s"), ma("1_neighbor_2s")},
                                     {"9_neighbors_2s", ma("alone_2s"), ma("9_neighbors_2s")},
                                     {"1_neighbor_30s", ma("alone_30s"), ma("1_neighbor_30s")},
                                     {"9_neighbors_30s", ma("alone_30s"), ma("9_neighbors_30s")}});
      write_file(*opts.curve, csv.str());
    }
    return accepted ? int{kOk} : int{kCalibrationInfeasible};
  });
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string bytes = read_input(opts.samples);
    std::istringstream in(bytes);
    const auto samples = read_range_samples(in);
    const auto contacts = extract_all_contacts(samples, opts.contact);
    const auto dyads = dyad_stats(contacts, opts.participants);

    std::set<NodeAddress> users;
    for (const auto& s : samples) {
      users.insert(s.pair.a);
      users.insert(s.pair.b);
    }
    const auto bands = default_bands();
    std::vector<Exposure> exposure;
    for (const auto& u : users) {
      auto e = cumulative_exposure(samples, u, opts.period, bands);
      exposure.insert(exposure.end(), e.begin(), e.end());
    }

    std::ostringstream c, d, x;
    write_contacts_csv(c, contacts);
    write_dyads_csv(d, dyads);
    write_exposure_csv(x, exposure, bands);

    char params[160];
    std::snprintf(params, sizeof params, "open=%.17g;tol=%.17g;gap=%lld;period=%lld;participants=%zu",
                  opts.contact.open_threshold_m, opts.contact.tolerance_m,
                  static_cast<long long>(opts.contact.close_gap.ticks()), static_cast<long long>(opts.period.ticks()),
                  opts.participants);
    RunManifest m;
    m.command = "analyze";
    m.input = opts.samples.string();
    m.config_hash = config_hash(bytes, params);
    m.files = {{"contacts.csv", c.str()}, {"dyads.csv", d.str()}, {"exposure.csv", x.str()}};
    std::set<Pair> reported;
    for (const auto& s : dyads.dyads) reported.insert(s.pair);
    m.extra["dyads"] = json{{"participants", dyads.participants},
                            {"possible", dyads.possible_dyads},
                            {"reported", reported.size()}};
    write_outputs(opts.out_dir, m);
    out << contacts.size() << " contacts, " << reported.size() << " of " << dyads.possible_dyads
        << " possible dyads\n";
    return int{kOk};
  });
}

int cmd_optimize(const OptimizeOptions& opts, std::ostream& out, std::ostream& err) {
  OptimizerOptions o;
  o.trials = opts.trials;
  o.seed = opts.seed;
  o.target_probability = opts.target_probability;
  try {
    const auto target = Span(static_cast<Span::rep>(std::llround(opts.target_s * 1e9)));
    const OptimizerResult r = optimize(target, opts.density, o);
    out << json{{"epoch_us", r.epoch.us()},
                {"scan_us", r.scan.us()},
                {"adv_interval_us", r.adv_interval.us()},
                {"discovery_probability", r.discovery_probability},
                {"duty_cycle", r.duty_cycle}}
               .dump(2)
        << '\n';
    return kOk;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const Infeasible& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contact detection protocol simulator and analysis tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write CSV traces");
  run_cmd->add_option("scenario", run_opts.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--seed", run_opts.seeds, "Seed(s); several seeds write seed-<n>/ subdirectories");
  run_cmd->add_option("--out-dir", run_opts.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--jobs", run_opts.jobs, "Seeds simulated in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--currents", run_opts.currents, "Current table JSON (default: built-in calibration)");

  CalibrateOptions cal_opts;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit the current table to the six reference measurements");
  cal_cmd->add_option("--out", cal_opts.out, "Report and table JSON")->capture_default_str();
  cal_cmd->add_option("--curve", cal_opts.curve, "Also write the lifetime-vs-contact curve CSV");
  cal_cmd->add_option("--baseline-ma", cal_opts.baseline_ma, "Radios-off current")->capture_default_str();
  cal_cmd->add_option("--seed", cal_opts.seed, "Seed of the reference simulations")->capture_default_str();

  AnalyzeOptions an_opts;
  double close_gap_s = 90.0;
  double period_s = 15.0;
  auto* an_cmd = app.add_subcommand("analyze", "Extract contacts, dyads and exposure from a ranges CSV");
  an_cmd->add_option("samples", an_opts.samples, "ranges.csv")->required();
  an_cmd->add_option("--out-dir", an_opts.out_dir, "Output directory")->capture_default_str();
  an_cmd->add_option("--open-threshold-m", an_opts.contact.open_threshold_m)->capture_default_str();
  an_cmd->add_option("--tolerance-m", an_opts.contact.tolerance_m)->capture_default_str();
  an_cmd->add_option("--close-gap-s", close_gap_s)->capture_default_str();
  an_cmd->add_option("--period-s", period_s, "Sampling period credited per sample")->capture_default_str();
  an_cmd->add_option("--participants", an_opts.participants, "Population size (default: nodes seen)");

  OptimizeOptions opt_opts;
  auto* opt_cmd = app.add_subcommand("optimize", "Minimum-duty scan/advertising parameters for a latency");
  opt_cmd->add_option("--latency-s", opt_opts.target_s, "Target discovery latency E")->capture_default_str();
  opt_cmd->add_option("--density", opt_opts.density, "Nodes in range, including self")->capture_default_str();
  opt_cmd->add_option("--trials", opt_opts.trials)->capture_default_str()->check(CLI::PositiveNumber);
  opt_cmd->add_option("--seed", opt_opts.seed)->capture_default_str();
  opt_cmd->add_option("--probability", opt_opts.target_probability)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }

  if (*run_cmd) return cmd_run(run_opts, out, err);
  if (*cal_cmd) return cmd_calibrate(cal_opts, out, err);
  if (*an_cmd) {
    if (!(close_gap_s > 0) || !(period_s > 0)) {
      err << "error: --close-gap-s and --period-s must be positive\n";
      return kInvalidInput;
    }
    an_opts.contact.close_gap = Span(static_cast<Span::rep>(std::llround(close_gap_s * 1e9)));
    an_opts.period = Span(static_cast<Span::rep>(std::llround(period_s * 1e9)));
    return cmd_analyze(an_opts, out, err);
  }
  return cmd_optimize(opt_opts, out, err);
}

}  // namespace janus::cli
