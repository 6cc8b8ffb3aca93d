#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "janus/core.hpp"

namespace janus {

/// Unordered pair of nodes; `a` is always the lower address.
struct Pair {
  NodeAddress a;
  NodeAddress b;

  static Pair of(const NodeAddress& x, const NodeAddress& y);
  friend auto operator<=>(const Pair&, const Pair&) = default;
};

struct Sample {
  Pair pair;
  double distance_m = 0.0;
  Instant time;
};

enum class Risk { High, Medium, Low };
const char* to_string(Risk r);

struct ContactRecord {
  Pair pair;
  Instant t_open;
  Instant t_end;  // last in-threshold sample
  double avg_distance_m = 0.0;
  std::size_t samples = 0;
  Risk risk = Risk::Low;

  [[nodiscard]] Span duration() const { return t_end - t_open; }
};

struct ContactParams {
  double open_threshold_m = 2.0;
  double tolerance_m = 0.2;
  Span close_gap = seconds(90);

  [[nodiscard]] double limit() const { return open_threshold_m + tolerance_m; }
};

Risk classify(double avg_distance_m, Span duration);
inline Risk classify(const ContactRecord& c) { return classify(c.avg_distance_m, c.duration()); }

/// Contacts of a single pair. Input need not be sorted; risk is filled in.
std::vector<ContactRecord> extract_contacts(std::vector<Sample> samples, const ContactParams& params = {});

/// Groups a mixed stream by pair and extracts each; output ordered by (pair, t_open).
std::vector<ContactRecord> extract_all_contacts(const std::vector<Sample>& samples, const ContactParams& params = {});

struct DyadStat {
  Pair pair;
  std::int64_t day = 0;
  Span total_contact;
  double avg_distance_m = 0.0;  // duration-weighted; plain mean when all durations are zero
  std::size_t contacts = 0;
};

struct DyadReport {
  std::vector<DyadStat> dyads;
  std::size_t participants = 0;
  std::uint64_t possible_dyads = 0;
};

inline std::uint64_t possible_dyads(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Per pair and calendar day of t_open (scenario time). `participants` is
/// the population size; 0 means count the nodes appearing in `contacts`.
DyadReport dyad_stats(const std::vector<ContactRecord>& contacts, std::size_t participants = 0,
                      Span day = Span(86'400'000'000'000));

struct Band {
  double lo = 0.0;
  double hi = 0.0;  // [lo, hi)
};

class BandOverlap : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<Band> default_bands();

struct Exposure {
  NodeAddress user;
  NodeAddress neighbor;
  std::vector<Span> per_band;
};

/// Sums `period` per sample into the band holding its distance, for every
/// neighbor of `user`. Samples outside all bands are ignored.
std::vector<Exposure> cumulative_exposure(const std::vector<Sample>& samples, const NodeAddress& user, Span period,
                                          const std::vector<Band>& bands);

class MalformedInput : public std::runtime_error {
 public:
  MalformedInput(std::size_t row, const std::string& what);
  [[nodiscard]] std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Reads the ranges CSV (header plus initiator,responder,distance_m,time_us,success).
/// Failed exchanges are skipped. Rows are numbered from 1 at the header.
std::vector<Sample> read_range_samples(std::istream& in);

}  // namespace janus
