#include "janus/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace janus {

using nlohmann::json;

namespace {

using Setter = std::function<void(const json&)>;

void apply_fields(const json& j, const std::map<std::string, Setter>& fields, const std::string& where) {
  if (!j.is_object()) throw ScenarioInvalid(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ScenarioInvalid(where + ": unknown key \"" + key + "\"");
    try {
      it->second(value);
    } catch (const json::exception& e) {
      throw ScenarioInvalid(where + "." + key + ": " + e.what());
    }
  }
}

Setter us_field(Span& target) {
  return [&target](const json& v) { target = microseconds(v.get<std::int64_t>()); };
}

template <typename T>
Setter plain_field(T& target) {
  return [&target](const json& v) { target = v.get<T>(); };
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string peer_or_empty(const std::optional<NodeAddress>& a) { return a ? a->to_string() : std::string(); }

// Details never contain commas today; quote defensively if one appears.
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

json to_json(const ProtocolConfig& p) {
  return json{
      {"epoch_us", p.epoch.us()},
      {"scan_us", p.scan.us()},
      {"adv_duration_us", p.adv_duration.us()},
      {"adv_interval_us", p.adv_interval.us()},
      {"adv_delay_max_us", p.adv_delay_max.us()},
      {"packet_gap_us", p.packet_gap.us()},
      {"ranging_period_us", p.ranging_period.us()},
      {"jitter_us", p.jitter.us()},
      {"slot_us", p.slot.us()},
      {"expiry_epochs", p.expiry_epochs},
      {"standby_us", p.standby.us()},
      {"crowd_threshold", p.crowd_threshold},
      {"alert_distance_m", p.alert_distance_m},
      {"uwb_wake_lead_us", p.uwb_wake_lead.us()},
      {"poll_guard_us", p.poll_guard.us()},
      {"reply_delay_us", p.reply_delay.us()},
      {"placement_tries", p.placement_tries},
  };
}

ProtocolConfig protocol_from_json(const json& j, ProtocolConfig p) {
  apply_fields(j,
               {
                   {"epoch_us", us_field(p.epoch)},
                   {"scan_us", us_field(p.scan)},
                   {"adv_duration_us", us_field(p.adv_duration)},
                   {"adv_interval_us", us_field(p.adv_interval)},
                   {"adv_delay_max_us", us_field(p.adv_delay_max)},
                   {"packet_gap_us", us_field(p.packet_gap)},
                   {"ranging_period_us", us_field(p.ranging_period)},
                   {"jitter_us", us_field(p.jitter)},
                   {"slot_us", us_field(p.slot)},
                   {"expiry_epochs", plain_field(p.expiry_epochs)},
                   {"standby_us", us_field(p.standby)},
                   {"crowd_threshold", plain_field(p.crowd_threshold)},
                   {"alert_distance_m", plain_field(p.alert_distance_m)},
                   {"uwb_wake_lead_us", us_field(p.uwb_wake_lead)},
                   {"poll_guard_us", us_field(p.poll_guard)},
                   {"reply_delay_us", us_field(p.reply_delay)},
                   {"placement_tries", plain_field(p.placement_tries)},
               },
               "protocol");
  return p;
}

json to_json(const PhyConfig& p) {
  return json{
      {"ble_range_m", p.ble_range_m},
      {"uwb_range_m", p.uwb_range_m},
      {"uwb_sigma_m", p.uwb_sigma_m},
      {"rssi_p0_dbm", p.rssi.p0_dbm},
      {"rssi_path_loss_exponent", p.rssi.path_loss_exponent},
      {"rssi_shadowing_db", p.rssi.shadowing_db},
      {"propagation_speed", p.propagation_speed},
      {"clock_drift_ppm", p.clock_drift_ppm},
      {"ble_airtime_us", p.ble_airtime.us()},
      {"uwb_airtime_us", p.uwb_airtime.us()},
      {"loss_probability", p.loss_probability},
  };
}

PhyConfig phy_from_json(const json& j, PhyConfig p) {
  apply_fields(j,
               {
                   {"ble_range_m", plain_field(p.ble_range_m)},
                   {"uwb_range_m", plain_field(p.uwb_range_m)},
                   {"uwb_sigma_m", plain_field(p.uwb_sigma_m)},
                   {"rssi_p0_dbm", plain_field(p.rssi.p0_dbm)},
                   {"rssi_path_loss_exponent", plain_field(p.rssi.path_loss_exponent)},
                   {"rssi_shadowing_db", plain_field(p.rssi.shadowing_db)},
                   {"propagation_speed", plain_field(p.propagation_speed)},
                   {"clock_drift_ppm", plain_field(p.clock_drift_ppm)},
                   {"ble_airtime_us", us_field(p.ble_airtime)},
                   {"uwb_airtime_us", us_field(p.uwb_airtime)},
                   {"loss_probability", plain_field(p.loss_probability)},
               },
               "phy");
  return p;
}

json to_json(const Scenario& s) {
  json nodes = json::array();
  for (const auto& n : s.nodes) {
    json w = json::array();
    for (const auto& p : n.waypoints) w.push_back(json{{"t_us", p.time.us()}, {"x", p.x}, {"y", p.y}});
    json node{{"address", n.address.to_string()}, {"role", to_string(n.role)}, {"waypoints", w}};
    if (n.start_offset) node["start_offset_us"] = n.start_offset->us();
    if (n.initial_index) node["initial_index"] = *n.initial_index;
    if (n.protocol) node["protocol"] = to_json(*n.protocol);
    nodes.push_back(node);
  }
  return json{
      {"duration_us", s.duration.us()},
      {"seed", s.seed},
      {"measure_from_us", s.measure_from.us()},
      {"protocol", to_json(s.protocol)},
      {"phy", to_json(s.phy)},
      {"nodes", nodes},
  };
}

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ScenarioInvalid("scenario: expected an object");
  Scenario s;
  ProtocolConfig base;
  if (const auto it = j.find("latency_class"); it != j.end()) {
    const auto k = it->is_string() ? parse_latency_class(it->get<std::string>()) : std::nullopt;
    if (!k) throw ScenarioInvalid("latency_class: expected \"2s\", \"15s\" or \"30s\"");
    base = preset(*k);
  }
  s.protocol = base;
  const json* nodes = nullptr;
  apply_fields(j,
               {
                   {"duration_us", us_field(s.duration)},
                   {"seed", plain_field(s.seed)},
                   {"measure_from_us", us_field(s.measure_from)},
                   {"latency_class", [](const json&) {}},
                   {"protocol", [&](const json& v) { s.protocol = protocol_from_json(v, base); }},
                   {"phy", [&](const json& v) { s.phy = phy_from_json(v); }},
                   {"nodes", [&](const json& v) { nodes = &v; }},
               },
               "scenario");
  if (!nodes || !nodes->is_array()) throw ScenarioInvalid("scenario.nodes: expected an array");

  for (std::size_t i = 0; i < nodes->size(); ++i) {
    const json& jn = (*nodes)[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    NodeSpec n;
    bool has_address = false;
    apply_fields(jn,
                 {
                     {"address",
                      [&](const json& v) {
                        try {
                          n.address = NodeAddress::parse(v.get<std::string>());
                        } catch (const std::invalid_argument& e) {
                          throw ScenarioInvalid(where + ".address: " + e.what());
                        }
                        has_address = true;
                      }},
                     {"role",
                      [&](const json& v) {
                        const auto r = parse_role(v.get<std::string>());
                        if (!r) throw ScenarioInvalid(where + ".role: expected tag, inhibitor or fixed");
                        n.role = *r;
                      }},
                     {"start_offset_us", [&](const json& v) { n.start_offset = microseconds(v.get<std::int64_t>()); }},
                     {"initial_index", [&](const json& v) { n.initial_index = v.get<int>(); }},
                     {"protocol", [&](const json& v) { n.protocol = protocol_from_json(v, s.protocol); }},
                     {"waypoints",
                      [&](const json& v) {
                        for (const auto& w : v) {
                          Waypoint p;
                          apply_fields(w, {{"t_us", us_field(p.time)}, {"x", plain_field(p.x)}, {"y", plain_field(p.y)}},
                                       where + ".waypoints");
                          n.waypoints.push_back(p);
                        }
                      }},
                 },
                 where);
    if (!has_address) throw ScenarioInvalid(where + ": missing address");
    s.nodes.push_back(std::move(n));
  }
  try {
    validate_scenario(s);
  } catch (const std::out_of_range& e) {
    throw ScenarioInvalid(e.what());
  }
  return s;
}

json to_json(const CurrentTable& t) {
  json j = json::object();
  for (auto s : kAllPowerStates) j[to_string(s)] = t[s];
  return j;
}

CurrentTable current_table_from_json(const json& j) {
  CurrentTable t;
  if (!j.is_object()) throw ScenarioInvalid("current table: expected an object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (auto s : kAllPowerStates) {
      if (key == to_string(s)) {
        if (!value.is_number() || value.get<double>() < 0) throw ScenarioInvalid(key + ": expected a number >= 0");
        t[s] = value.get<double>();
        found = true;
      }
    }
    if (!found) throw ScenarioInvalid("current table: unknown state \"" + key + "\"");
  }
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

void write_ranges_csv(std::ostream& os, const std::vector<RangeSample>& ranges) {
  os << "initiator,responder,distance_m,time_us,success\n";
  for (const auto& r : ranges) {
    os << r.initiator.to_string() << ',' << r.responder.to_string() << ',' << fmt("%.3f", r.distance_m) << ','
       << r.time.us() << ',' << (r.success ? 1 : 0) << '\n';
  }
}

void write_rssi_csv(std::ostream& os, const std::vector<RssiSample>& rssi) {
  os << "receiver,sender,rssi_dbm,time_us,channel\n";
  for (const auto& r : rssi) {
    os << r.receiver.to_string() << ',' << r.sender.to_string() << ',' << fmt("%.2f", r.rssi_dbm) << ','
       << r.time.us() << ',' << r.channel << '\n';
  }
}

void write_events_csv(std::ostream& os, const std::vector<EventRecord>& events) {
  os << "time_us,node,event,peer,details\n";
  for (const auto& e : events) {
    os << e.time.us() << ',' << e.node.to_string() << ',' << to_string(e.type) << ',' << peer_or_empty(e.peer) << ','
       << csv_cell(e.details) << '\n';
  }
}

void write_energy_csv(std::ostream& os, const std::vector<NodeEnergy>& energy, const CurrentTable& table,
                      const Battery& battery) {
  os << "node,state,duration_us,avg_mA,lifetime_days\n";
  for (const auto& e : energy) {
    if (e.elapsed <= Span{}) continue;
    const double total = average_current(e.ledger, table, e.elapsed);
    const std::string days = fmt("%.3f", hours_to_days(lifetime_hours(total, battery)));
    const auto duty = duty_cycles(e.ledger, e.elapsed);
    for (auto s : kAllPowerStates) {
      const double contribution = duty[static_cast<std::size_t>(s)] * table[s];
      os << e.node.to_string() << ',' << to_string(s) << ',' << e.ledger[s].us() << ',' << fmt("%.6f", contribution)
         << ',' << days << '\n';
    }
    os << e.node.to_string() << ",TOTAL," << e.elapsed.us() << ',' << fmt("%.6f", total) << ',' << days << '\n';
  }
}

void write_latency_csv(std::ostream& os, const std::vector<LatencyRecord>& latency) {
  os << "node,neighbor,in_range_since_us,discovered_us,latency_us\n";
  for (const auto& l : latency) {
    os << l.node.to_string() << ',' << l.neighbor.to_string() << ',' << l.in_range_since.us() << ','
       << l.discovered.us() << ',' << l.latency().us() << '\n';
  }
}

void write_lifetime_curve_csv(std::ostream& os, const std::vector<LifetimeSeries>& series, const Battery& battery) {
  os << "p";
  for (const auto& s : series) os << ",days_" << s.name;
  os << '\n';
  for (int k = 0; k <= 20; ++k) {
    const double p = k / 20.0;
    os << fmt("%.2f", p);
    for (const auto& s : series) {
      os << ',' << fmt("%.3f", hours_to_days(lifetime_mixed_hours(p, s.alone_ma, s.contact_ma, battery)));
    }
    os << '\n';
  }
}

std::string pair_label(const Pair& p) { return p.a.to_string() + "-" + p.b.to_string(); }

void write_contacts_csv(std::ostream& os, const std::vector<ContactRecord>& contacts) {
  os << "pair,t_open_us,t_end_us,duration_s,avg_m,risk\n";
  for (const auto& c : contacts) {
    os << pair_label(c.pair) << ',' << c.t_open.us() << ',' << c.t_end.us() << ','
       << fmt("%.3f", c.duration().seconds()) << ',' << fmt("%.3f", c.avg_distance_m) << ',' << to_string(c.risk)
       << '\n';
  }
}

void write_dyads_csv(std::ostream& os, const DyadReport& report) {
  os << "pair,day,contacts,total_contact_min,avg_m\n";
  for (const auto& d : report.dyads) {
    os << pair_label(d.pair) << ',' << d.day << ',' << d.contacts << ','
       << fmt("%.3f", d.total_contact.seconds() / 60.0) << ',' << fmt("%.3f", d.avg_distance_m) << '\n';
  }
}

void write_exposure_csv(std::ostream& os, const std::vector<Exposure>& exposure, const std::vector<Band>& bands) {
  os << "user,neighbor,band_lo_m,band_hi_m,minutes\n";
  for (const auto& e : exposure) {
    for (std::size_t i = 0; i < bands.size(); ++i) {
      os << e.user.to_string() << ',' << e.neighbor.to_string() << ',' << fmt("%g", bands[i].lo) << ','
         << fmt("%g", bands[i].hi) << ',' << fmt("%.3f", e.per_band[i].seconds() / 60.0) << '\n';
    }
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed) {
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), seed);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t config_hash(std::string_view input_bytes, std::string_view options) {
  // Length prefix keeps (input, options) splits distinct.
  const std::string len = std::to_string(input_bytes.size()) + ":";
  return fnv1a64(options, fnv1a64(input_bytes, fnv1a64(len)));
}

json to_json(const RunManifest& m) {
  json files = json::array();
  for (const auto& f : m.files) {
    files.push_back(json{{"name", f.name}, {"bytes", f.contents.size()}, {"fnv1a64", hex64(fnv1a64(f.contents))}});
  }
  json j{
      {"schema_version", kManifestSchemaVersion},
      {"tool_version", kToolVersion},
      {"command", m.command},
      {"input", m.input},
      {"config_hash", hex64(m.config_hash)},
      {"seed", m.seed ? json(*m.seed) : json(nullptr)},
      {"files", files},
  };
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
  return j;
}

}  // namespace janus
