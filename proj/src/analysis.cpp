#include "janus/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace janus {

Pair Pair::of(const NodeAddress& x, const NodeAddress& y) {
  if (x == y) throw std::invalid_argument("a pair needs two distinct nodes");
  return x < y ? Pair{x, y} : Pair{y, x};
}

const char* to_string(Risk r) {
  switch (r) {
    case Risk::High:
      return "high";
    case Risk::Medium:
      return "medium";
    case Risk::Low:
      return "low";
  }
  return "?";
}

Risk classify(double avg, Span duration) {
  const Span five = minutes(5);
  const Span fifteen = minutes(15);
  if (avg < 2.0 && duration > fifteen) return Risk::High;
  if (avg < 4.0 && duration >= five && duration <= fifteen) return Risk::Medium;
  if (avg >= 2.0 && avg < 4.0 && duration > fifteen) return Risk::Medium;
  return Risk::Low;
}

std::vector<ContactRecord> extract_contacts(std::vector<Sample> samples, const ContactParams& params) {
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.time < y.time; });
  std::vector<ContactRecord> out;
  std::optional<ContactRecord> open;
  double sum = 0.0;

  auto close = [&] {
    open->avg_distance_m = sum / static_cast<double>(open->samples);
    open->risk = classify(*open);
    out.push_back(*open);
    open.reset();
  };

  for (const auto& s : samples) {
    const bool in = s.distance_m <= params.limit();
    if (open && s.time - open->t_end >= params.close_gap) close();
    if (!in) continue;
    if (!open) {
      open = ContactRecord{s.pair, s.time, s.time, 0.0, 0, Risk::Low};
      sum = 0.0;
    }
    open->t_end = s.time;
    sum += s.distance_m;
    ++open->samples;
  }
  if (open) close();
  return out;
}

std::vector<ContactRecord> extract_all_contacts(const std::vector<Sample>& samples, const ContactParams& params) {
  std::map<Pair, std::vector<Sample>> by_pair;
  for (const auto& s : samples) by_pair[s.pair].push_back(s);
  std::vector<ContactRecord> out;
  for (auto& [pair, list] : by_pair) {
    auto c = extract_contacts(std::move(list), params);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

DyadReport dyad_stats(const std::vector<ContactRecord>& contacts, std::size_t participants, Span day) {
  struct Acc {
    Span total;
    double weighted = 0.0;
    double plain = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<Pair, std::int64_t>, Acc> acc;
  std::set<NodeAddress> nodes;
  for (const auto& c : contacts) {
    nodes.insert(c.pair.a);
    nodes.insert(c.pair.b);
    Acc& a = acc[{c.pair, c.t_open.since_start() / day}];
    a.total += c.duration();
    a.weighted += c.avg_distance_m * c.duration().seconds();
    a.plain += c.avg_distance_m;
    ++a.n;
  }
  DyadReport r;
  r.participants = participants ? participants : nodes.size();
  r.possible_dyads = possible_dyads(r.participants);
  for (const auto& [key, a] : acc) {
    DyadStat d;
    d.pair = key.first;
    d.day = key.second;
    d.total_contact = a.total;
    d.contacts = a.n;
    d.avg_distance_m = a.total > Span{} ? a.weighted / a.total.seconds() : a.plain / static_cast<double>(a.n);
    r.dyads.push_back(d);
  }
  return r;
}

std::vector<Band> default_bands() { return {{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}, {3.0, 4.0}}; }

std::vector<Exposure> cumulative_exposure(const std::vector<Sample>& samples, const NodeAddress& user, Span period,
                                          const std::vector<Band>& bands) {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!(bands[i].lo < bands[i].hi)) throw BandOverlap("band " + std::to_string(i) + " is empty or inverted");
    if (i > 0 && bands[i].lo < bands[i - 1].hi) throw BandOverlap("bands " + std::to_string(i - 1) + " and " +
                                                                  std::to_string(i) + " overlap or are unordered");
  }
  std::map<NodeAddress, std::vector<Span>> totals;
  for (const auto& s : samples) {
    if (s.pair.a != user && s.pair.b != user) continue;
    const NodeAddress other = s.pair.a == user ? s.pair.b : s.pair.a;
    auto& t = totals.try_emplace(other, bands.size(), Span{}).first->second;
    for (std::size_t i = 0; i < bands.size(); ++i) {
      if (s.distance_m >= bands[i].lo && s.distance_m < bands[i].hi) {
        t[i] += period;
        break;
      }
    }
  }
  std::vector<Exposure> out;
  for (auto& [n, t] : totals) out.push_back(Exposure{user, n, std::move(t)});
  return out;
}

MalformedInput::MalformedInput(std::size_t row, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && p == end;
}

}  // namespace

std::vector<Sample> read_range_samples(std::istream& in) {
  std::vector<Sample> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1) {
      if (line.rfind("initiator,responder,distance_m,time_us", 0) != 0) throw MalformedInput(row, "unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) throw MalformedInput(row, "expected 5 fields, got " + std::to_string(f.size()));
    Sample s;
    NodeAddress a;
    NodeAddress b;
    try {
      a = NodeAddress::parse(f[0]);
      b = NodeAddress::parse(f[1]);
      s.pair = Pair::of(a, b);
    } catch (const std::exception& e) {
      throw MalformedInput(row, e.what());
    }
    std::int64_t t = 0;
    int ok = 0;
    if (!parse_number(f[2], s.distance_m) || !(s.distance_m >= 0.0)) throw MalformedInput(row, "bad distance");
    if (!parse_number(f[3], t) || t < 0) throw MalformedInput(row, "bad time");
    if (!parse_number(f[4], ok) || (ok != 0 && ok != 1)) throw MalformedInput(row, "bad success flag");
    if (!ok) continue;
    s.time = Instant::at_us(t);
    out.push_back(s);
  }
  if (row == 0) throw MalformedInput(1, "missing header");
  return out;
}

}  // namespace janus
