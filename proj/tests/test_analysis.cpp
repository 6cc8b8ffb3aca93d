#include <doctest.h>

#include <sstream>

#include "contact_oracle.hpp"
#include "janus/analysis.hpp"

using namespace janus;

namespace {

const NodeAddress kA = NodeAddress::from_u64(0xA);
const NodeAddress kB = NodeAddress::from_u64(0xB);
const NodeAddress kC = NodeAddress::from_u64(0xC);

Sample at(double t_s, double d, const Pair& p = Pair::of(kA, kB)) {
  return Sample{p, d, Instant(milliseconds(static_cast<std::int64_t>(t_s * 1000)))};
}

ContactRecord contact(const Pair& p, double open_min, double minutes_long, double avg) {
  ContactRecord c;
  c.pair = p;
  c.t_open = Instant(seconds(static_cast<std::int64_t>(open_min * 60)));
  c.t_end = c.t_open + seconds(static_cast<std::int64_t>(minutes_long * 60));
  c.avg_distance_m = avg;
  return c;
}

}  // namespace

TEST_CASE("pairs are unordered") {
  CHECK(Pair::of(kA, kB) == Pair::of(kB, kA));
  CHECK(Pair::of(kB, kA).a == kA);
  CHECK_THROWS(Pair::of(kA, kA));
}

TEST_CASE("contact extraction examples") {
  CHECK(extract_contacts({}).empty());

  std::vector<Sample> steady;
  for (int t = 0; t <= 300; t += 15) steady.push_back(at(t, 1.0));
  const auto one = extract_contacts(steady);
  REQUIRE(one.size() == 1);
  CHECK(one[0].duration() == seconds(300));
  CHECK(one[0].avg_distance_m == doctest::Approx(1.0));

  std::vector<Sample> split;
  for (int t = 0; t <= 60; t += 15) split.push_back(at(t, 1.5));
  for (int t = 75; t <= 150; t += 15) split.push_back(at(t, 3.0));
  split.push_back(at(165, 1.0));
  const auto two = extract_contacts(split);
  REQUIRE(two.size() == 2);
  CHECK(two[0].t_open == Instant());
  CHECK(two[0].t_end == Instant(seconds(60)));
  CHECK(two[0].avg_distance_m == doctest::Approx(1.5));
  CHECK(two[1].t_open == Instant(seconds(165)));
  CHECK(two[1].duration() == Span{});
}

TEST_CASE("tolerance and gap boundaries") {
  const auto edge = extract_contacts({at(0, 2.2), at(10, 2.21)});
  REQUIRE(edge.size() == 1);
  CHECK(edge[0].samples == 1);

  CHECK(extract_contacts({at(0, 1), at(89, 1)}).size() == 1);
  CHECK(extract_contacts({at(0, 1), at(90, 1)}).size() == 2);

  ContactParams wide;
  wide.open_threshold_m = 3.0;
  CHECK(extract_contacts({at(0, 3.1)}, wide).size() == 1);
}

TEST_CASE("unsorted input is sorted first") {
  const auto c = extract_contacts({at(30, 1), at(0, 1), at(15, 1)});
  REQUIRE(c.size() == 1);
  CHECK(c[0].t_open == Instant());
  CHECK(c[0].t_end == Instant(seconds(30)));
}

TEST_CASE("extraction matches the reference on random streams") {
  std::mt19937_64 rng(99);
  const Pair p = Pair::of(kA, kB);
  for (int i = 0; i < 300; ++i) {
    const auto stream = testing::random_stream(rng, p);
    const auto got = extract_contacts(stream);
    CHECK(testing::same_contacts(got, testing::brute_force_contacts(stream, ContactParams{})));
    for (std::size_t k = 1; k < got.size(); ++k) CHECK(got[k].t_open - got[k - 1].t_end >= seconds(90));
  }
}

TEST_CASE("mixed stream grouped by pair") {
  std::vector<Sample> mix{at(0, 1), at(0, 1, Pair::of(kB, kC)), at(10, 1), at(500, 1, Pair::of(kC, kB))};
  const auto all = extract_all_contacts(mix);
  REQUIRE(all.size() == 3);
  CHECK(all[0].pair == Pair::of(kA, kB));
  CHECK(all[1].pair == Pair::of(kB, kC));
  CHECK(all[2].t_open == Instant(seconds(500)));
}

TEST_CASE("risk classes") {
  CHECK(classify(1.5, minutes(16)) == Risk::High);
  CHECK(classify(3.0, minutes(10)) == Risk::Medium);
  CHECK(classify(1.0, minutes(3)) == Risk::Low);
  CHECK(classify(1.0, minutes(15)) == Risk::Medium);
  CHECK(classify(1.0, minutes(5)) == Risk::Medium);
  CHECK(classify(2.0, minutes(20)) == Risk::Medium);
  CHECK(classify(4.0, minutes(10)) == Risk::Low);
  CHECK(classify(3.9, minutes(60)) == Risk::Medium);
  CHECK(std::string(to_string(Risk::High)) == "high");
}

TEST_CASE("dyad totals") {
  const Pair ab = Pair::of(kA, kB);
  const auto r = dyad_stats({contact(ab, 9 * 60, 6, 1.0), contact(ab, 14 * 60, 9, 2.0)});
  REQUIRE(r.dyads.size() == 1);
  CHECK(r.dyads[0].total_contact == minutes(15));
  CHECK(r.dyads[0].contacts == 2);
  CHECK(r.dyads[0].avg_distance_m == doctest::Approx((6 * 1.0 + 9 * 2.0) / 15));
  CHECK(r.possible_dyads == 1);

  CHECK(possible_dyads(30) == 435);
  const auto empty = dyad_stats({}, 30);
  CHECK(empty.dyads.empty());
  CHECK(empty.possible_dyads == 435);

  const auto split = dyad_stats({contact(ab, 60, 6, 1.0), contact(Pair::of(kB, kA), 24 * 60 + 60, 9, 1.0)});
  REQUIRE(split.dyads.size() == 2);
  CHECK(split.dyads[0].day == 0);
  CHECK(split.dyads[1].day == 1);
  CHECK(split.dyads[0].total_contact + split.dyads[1].total_contact == minutes(15));
}

TEST_CASE("cumulative exposure") {
  std::vector<Sample> s;
  for (int i = 0; i < 180; ++i) s.push_back(at(i * 15, 1.9));
  s.push_back(at(0, 2.0, Pair::of(kA, kC)));
  s.push_back(at(0, 9.0, Pair::of(kA, kC)));
  s.push_back(at(0, 1.0, Pair::of(kB, kC)));
  const auto bands = std::vector<Band>{{0, 2}, {2, 4}};
  const auto e = cumulative_exposure(s, kA, seconds(15), bands);
  REQUIRE(e.size() == 2);
  CHECK(e[0].neighbor == kB);
  CHECK(e[0].per_band[0] == minutes(45));
  CHECK(e[0].per_band[1] == Span{});
  CHECK(e[1].neighbor == kC);
  CHECK(e[1].per_band[0] == Span{});
  CHECK(e[1].per_band[1] == seconds(15));

  CHECK(cumulative_exposure({}, kA, seconds(15), bands).empty());
  CHECK_THROWS_AS(cumulative_exposure(s, kA, seconds(15), {{0, 2}, {1.5, 3}}), BandOverlap);
  CHECK(default_bands().size() == 4);
}

TEST_CASE("range sample CSV") {
  std::istringstream ok(
      "initiator,responder,distance_m,time_us,success\n"
      "00:00:00:00:00:0A,00:00:00:00:00:0B,1.250,1000000,1\n"
      "00:00:00:00:00:0B,00:00:00:00:00:0A,0.000,2000000,0\n");
  const auto v = read_range_samples(ok);
  REQUIRE(v.size() == 1);
  CHECK(v[0].pair == Pair::of(kA, kB));
  CHECK(v[0].distance_m == 1.25);
  CHECK(v[0].time == Instant(seconds(1)));

  std::ostringstream bad;
  bad << "initiator,responder,distance_m,time_us,success\n";
  for (int i = 2; i < 17; ++i) bad << "00:00:00:00:00:0A,00:00:00:00:00:0B,1.0," << i << ",1\n";
  bad << "00:00:00:00:00:0A,00:00:00:00:00:0B,oops,17,1\n";
  std::istringstream in(bad.str());
  try {
    read_range_samples(in);
    FAIL("expected MalformedInput");
  } catch (const MalformedInput& e) {
    CHECK(e.row() == 17);
    CHECK(std::string(e.what()).find("row 17") != std::string::npos);
  }
}
