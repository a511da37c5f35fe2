#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "camtrap/error.hpp"
#include "camtrap/estimators.hpp"
#include "camtrap/random.hpp"
#include "helpers.hpp"

using namespace camtrap;
using testutil::TempDir;
using testutil::add_full_uptime_deployment;
using testutil::make_deployment;
using testutil::make_sequence;

namespace {

constexpr UnixSeconds kT0 = 1672531200;  // 2023-01-01

// One camera, one 8-day fully-heartbeaten deployment, n agouti sequences.
ProjectStore agouti_store(const std::filesystem::path& root, int n_sequences) {
  auto store = ProjectStore::open(root);
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "m", {}});
  add_full_uptime_deployment(store, make_deployment("D1", "C1", "L1", kT0, 8.0));
  for (int i = 0; i < n_sequences; ++i) {
    const auto id = "D1-s" + std::to_string(i + 1);
    const UnixSeconds t = kT0 + 3600 + i * 7200;
    store.add_sequence(make_sequence(id, "D1", t, t + 20));
    store.add_image({"D1", t, Trigger::motion, id + "-f"});
    store.add_detection({id, "agouti", 1, ""});
  }
  return store;
}

stats::IncidenceMatrix make_incidence(std::vector<std::vector<int>> rows,
                                      std::vector<std::string> species) {
  stats::IncidenceMatrix inc;
  inc.species = std::move(species);
  inc.cells.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(inc.species.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    inc.deployments.push_back("D" + std::to_string(i + 1));
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      inc.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return inc;
}

}  // namespace

TEST_CASE("detection rate: 5 sequences over 8 camera-days is 0.625 per day") {
  TempDir tmp;
  auto store = agouti_store(tmp.path(), 5);
  const auto r = stats::detection_rate(store, "agouti");
  CHECK(r.y == 5);
  CHECK(r.t == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(r.rate == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("detection rate: absent species gives zero, zero effort throws") {
  TempDir tmp;
  auto store = agouti_store(tmp.path(), 5);
  const auto r = stats::detection_rate(store, "jaguar");
  CHECK(r.y == 0);
  CHECK(r.rate == 0.0);

  // A deployment with no heartbeats has zero effective days.
  TempDir tmp2;
  auto dead = ProjectStore::open(tmp2.path());
  dead.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  dead.add_camera({"C1", "m", {}});
  dead.add_deployment(make_deployment("D1", "C1", "L1", kT0, 8.0));
  CHECK_THROWS_AS(stats::detection_rate(dead, "agouti"), ValidationError);
  CHECK(stats::detection_rate(dead, "agouti", nullptr, stats::EffortBasis::nominal).rate == 0.0);
}

TEST_CASE("detection rate: flagged sequences are never counted") {
  TempDir tmp;
  auto store = agouti_store(tmp.path(), 5);
  const UnixSeconds t = kT0 + 86400;
  store.add_sequence(make_sequence("D1-f1", "D1", t, t + 10, 2, SequenceStatus::flagged));
  store.add_image({"D1", t, Trigger::motion, "D1-f1-f"});
  store.add_detection({"D1-f1", "agouti", 1, ""});
  CHECK(stats::detection_rate(store, "agouti").y == 5);

  // Resolved sequences are counted.
  store.add_sequence(
      make_sequence("D1-r1", "D1", t + 5000, t + 5010, 2, SequenceStatus::resolved_merge));
  store.add_image({"D1", t + 5000, Trigger::motion, "D1-r1-f"});
  store.add_detection({"D1-r1", "agouti", 1, ""});
  CHECK(stats::detection_rate(store, "agouti").y == 6);
}

TEST_CASE("detection rate: invariant under deployment reordering and splitting") {
  TempDir a, b;
  auto s1 = ProjectStore::open(a.path());
  auto s2 = ProjectStore::open(b.path());
  for (auto* s : {&s1, &s2}) {
    s->add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
    s->add_camera({"C1", "m", {}});
    s->add_camera({"C2", "m", {}});
  }
  // s1: one 8-day deployment on C1 plus one 4-day on C2.
  add_full_uptime_deployment(s1, make_deployment("D1", "C1", "L1", kT0, 8.0));
  add_full_uptime_deployment(s1, make_deployment("D2", "C2", "L1", kT0, 4.0));
  // s2: the C1 effort split into two back-to-back 4-day records, added in
  // reverse order.
  add_full_uptime_deployment(s2, make_deployment("D2", "C2", "L1", kT0, 4.0));
  add_full_uptime_deployment(s2, make_deployment("D1b", "C1", "L1", kT0 + 4 * 86400, 4.0));
  add_full_uptime_deployment(s2, make_deployment("D1a", "C1", "L1", kT0, 4.0));
  for (int i = 0; i < 6; ++i) {
    const UnixSeconds t = kT0 + 3600 + i * 86400;
    const auto id = "s" + std::to_string(i);
    s1.add_sequence(make_sequence(id, "D1", t, t + 10));
    s1.add_image({"D1", t, Trigger::motion, id});
    s1.add_detection({id, "agouti", 1, ""});
    const std::string dep = i < 4 ? "D1a" : "D1b";
    s2.add_sequence(make_sequence(id, dep, t, t + 10));
    s2.add_image({dep, t, Trigger::motion, id});
    s2.add_detection({id, "agouti", 1, ""});
  }
  const auto r1 = stats::detection_rate(s1, "agouti");
  const auto r2 = stats::detection_rate(s2, "agouti");
  CHECK(r1.rate == doctest::Approx(r2.rate).epsilon(1e-12));
  CHECK(r1.t == doctest::Approx(r2.t).epsilon(1e-12));
}

TEST_CASE("detection rates: sorted by rate, ties by code") {
  TempDir tmp;
  auto store = agouti_store(tmp.path(), 3);
  const UnixSeconds t = kT0 + 40 * 3600;
  store.add_sequence(make_sequence("sx", "D1", t, t + 10));
  store.add_image({"D1", t, Trigger::motion, "sx"});
  store.add_detection({"sx", "paca", 1, ""});
  store.add_detection({"sx", "peccary", 2, ""});
  const auto all = stats::detection_rates(store);
  REQUIRE(all.size() == 3);
  CHECK(all[0].species_code == "agouti");
  CHECK(all[1].species_code == "paca");  // tie with peccary, code order
  CHECK(all[2].species_code == "peccary");
}

TEST_CASE("detection history: day cells, downtime as missing") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "m", {}});
  const auto dep = make_deployment("D1", "C1", "L1", kT0, 8.0);
  store.add_deployment(dep);
  // Heartbeats stop after day 6: last proof of life at +6 d, so downtime
  // starts at +7 d (24 h grace) and day 8 has no effort at all.
  for (UnixSeconds t = dep.start; t <= dep.start + 6 * 86400; t += 12 * 3600)
    store.add_image({"D1", t, Trigger::timelapse, "hb" + std::to_string(t)});
  // Detections on day 2 and day 5.
  for (const auto day : {2, 5}) {
    const UnixSeconds t = kT0 + (day - 1) * 86400 + 600;
    const auto id = "s" + std::to_string(day);
    store.add_sequence(make_sequence(id, "D1", t, t + 10));
    store.add_image({"D1", t, Trigger::motion, id});
    store.add_detection({id, "agouti", 1, ""});
  }
  const auto hist = stats::detection_history(store, "agouti", 1);
  REQUIRE(hist.deployments.size() == 1);
  REQUIRE(hist.cells.cols() == 8);
  const std::vector<int> expect{0, 1, 0, 0, 1, 0, 0, -1};
  for (int j = 0; j < 8; ++j) CHECK(hist.cells(0, j) == expect[static_cast<std::size_t>(j)]);

  SUBCASE("weekly granularity folds days together") {
    const auto weekly = stats::detection_history(store, "agouti", 7);
    REQUIRE(weekly.cells.cols() == 2);
    CHECK(weekly.cells(0, 0) == 1);   // days 1-7 contain detections
    CHECK(weekly.cells(0, 1) == -1);  // the second bin is only the dark day 8
  }
}

TEST_CASE("detection history: empty store gives an empty matrix") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  const auto hist = stats::detection_history(store, "agouti", 1);
  CHECK(hist.deployments.empty());
  CHECK(hist.cells.rows() == 0);
}

TEST_CASE("detection history: deployments with no uptime are dropped") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "m", {}});
  store.add_camera({"C2", "m", {}});
  add_full_uptime_deployment(store, make_deployment("D1", "C1", "L1", kT0, 3.0));
  store.add_deployment(make_deployment("D2", "C2", "L1", kT0, 3.0));  // no heartbeats
  const auto hist = stats::detection_history(store, "agouti", 1);
  REQUIRE(hist.deployments.size() == 1);
  CHECK(hist.deployments[0] == "D1");
}

TEST_CASE("rarefaction: two-deployment exhaustive hand case") {
  const auto inc = make_incidence({{1, 0}, {1, 1}}, {"A", "B"});
  const auto curve = stats::rarefaction(inc, 100, 1);
  REQUIRE(curve.effort.size() == 2);
  CHECK(curve.exhaustive);
  CHECK(curve.n_resamples == 2);  // 2! orderings
  CHECK(curve.sobs_mean[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(curve.sobs_mean[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(curve.sobs_sd[1] == 0.0);
}

TEST_CASE("rarefaction: exhaustive 4x3 fixture matches enumeration") {
  // Frozen from independent enumeration of all 24 orderings (itertools):
  // per-prefix species counts and jack1 = sobs + q1 (k-1)/k, population SD.
  const auto inc = make_incidence({{1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}}, {"A", "B", "C"});
  const auto curve = stats::rarefaction(inc, 5, 99);
  REQUIRE(curve.effort == std::vector<int>{1, 2, 3, 4});
  CHECK(curve.exhaustive);
  CHECK(curve.n_resamples == 24);
  const double e = 1e-12;
  CHECK(curve.sobs_mean[0] == doctest::Approx(1.25).epsilon(e));
  CHECK(curve.sobs_sd[0] == doctest::Approx(0.4330127018922193).epsilon(e));
  CHECK(curve.jack1_mean[0] == doctest::Approx(1.25).epsilon(e));
  CHECK(curve.sobs_mean[1] == doctest::Approx(2.1666666666666665).epsilon(e));
  CHECK(curve.sobs_sd[1] == doctest::Approx(0.3726779962499649).epsilon(e));
  CHECK(curve.jack1_mean[1] == doctest::Approx(3.0833333333333335).epsilon(e));
  CHECK(curve.jack1_sd[1] == doctest::Approx(0.6718548123582125).epsilon(e));
  CHECK(curve.sobs_mean[2] == doctest::Approx(2.75).epsilon(e));
  CHECK(curve.jack1_mean[2] == doctest::Approx(3.9166666666666665).epsilon(e));
  CHECK(curve.jack1_sd[2] == doctest::Approx(1.1395661942647786).epsilon(e));
  CHECK(curve.sobs_mean[3] == doctest::Approx(3.0).epsilon(e));
  CHECK(curve.sobs_sd[3] == 0.0);
  CHECK(curve.jack1_mean[3] == doctest::Approx(3.75).epsilon(e));
  CHECK(curve.jack1_sd[3] == 0.0);
}

TEST_CASE("rarefaction: Monte Carlo curve properties hold for every seed") {
  // 12 deployments forces the Monte Carlo path (12! orderings).
  Rng gen(5);
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 12; ++i) {
    std::vector<int> row(6);
    for (auto& c : row) c = gen.uniform() < 0.35 ? 1 : 0;
    rows.push_back(row);
  }
  rows[0] = {1, 1, 1, 1, 1, 1};  // every species observed somewhere
  const auto inc = make_incidence(rows, {"a", "b", "c", "d", "e", "f"});
  for (std::uint64_t seed : {1ull, 2ull, 77ull}) {
    const auto curve = stats::rarefaction(inc, 300, seed);
    CHECK_FALSE(curve.exhaustive);
    for (std::size_t k = 1; k < curve.effort.size(); ++k)
      CHECK(curve.sobs_mean[k] >= curve.sobs_mean[k - 1] - 1e-12);
    for (std::size_t k = 0; k < curve.effort.size(); ++k)
      CHECK(curve.jack1_mean[k] >= curve.sobs_mean[k] - 1e-12);
    CHECK(curve.sobs_mean.back() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(curve.sobs_sd.back() == 0.0);
  }
}

TEST_CASE("rarefaction: deterministic and thread-count independent") {
  Rng gen(11);
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 15; ++i) {
    std::vector<int> row(8);
    for (auto& c : row) c = gen.uniform() < 0.3 ? 1 : 0;
    rows.push_back(row);
  }
  const auto inc = make_incidence(rows, {"a", "b", "c", "d", "e", "f", "g", "h"});
  const auto c1 = stats::rarefaction(inc, 400, 42, {}, 1);
  const auto c4 = stats::rarefaction(inc, 400, 42, {}, 4);
  const auto c1b = stats::rarefaction(inc, 400, 42, {}, 1);
  REQUIRE(c1.sobs_mean.size() == c4.sobs_mean.size());
  for (std::size_t k = 0; k < c1.sobs_mean.size(); ++k) {
    CHECK(c1.sobs_mean[k] == c4.sobs_mean[k]);
    CHECK(c1.jack1_sd[k] == c4.jack1_sd[k]);
    CHECK(c1.sobs_mean[k] == c1b.sobs_mean[k]);
  }
}

TEST_CASE("rarefaction: rejects effort beyond the deployment count") {
  const auto inc = make_incidence({{1, 0}, {1, 1}}, {"A", "B"});
  const std::vector<int> efforts{1, 3};
  CHECK_THROWS_AS(stats::rarefaction(inc, 10, 1, efforts), ValidationError);
}

TEST_CASE("jackknife1 hand cases") {
  // A in 3 deployments, B in 1, C in 1, n = 3.
  const auto inc = make_incidence({{1, 1, 0}, {1, 0, 1}, {1, 0, 0}}, {"A", "B", "C"});
  CHECK(stats::jackknife1(inc) == doctest::Approx(3.0 + 2.0 * 2.0 / 3.0).epsilon(1e-12));
  // No singletons.
  const auto inc2 = make_incidence({{1, 1}, {1, 1}}, {"A", "B"});
  CHECK(stats::jackknife1(inc2) == doctest::Approx(2.0).epsilon(1e-15));
  // Single deployment: (n-1)/n = 0.
  const auto inc3 = make_incidence({{1, 1}}, {"A", "B"});
  CHECK(stats::jackknife1(inc3) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("percentile: type-7 linear interpolation against numpy") {
  const std::vector<double> sorted{1, 1, 2, 3, 4, 5, 6, 9};
  CHECK(stats::percentile(sorted, 0.025) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(stats::percentile(sorted, 0.5) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(stats::percentile(sorted, 0.975) == doctest::Approx(8.475000000000001).epsilon(1e-15));
  CHECK(stats::percentile(sorted, 0.0) == 1.0);
  CHECK(stats::percentile(sorted, 1.0) == 9.0);
  CHECK(std::isnan(stats::percentile({}, 0.5)));
}

TEST_CASE("effort bands: degenerate rates collapse every band") {
  const std::vector<double> rates(10, 0.4);
  const std::vector<int> grid{1, 5, 10};
  const auto bands = stats::effort_bands(rates, grid, 200, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(bands.mean[i] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(bands.min[i] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(bands.max[i] == doctest::Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("effort bands: ordering invariant and thread independence") {
  Rng gen(8);
  std::vector<double> rates;
  for (int i = 0; i < 30; ++i) rates.push_back(gen.exponential() * 0.3);
  std::vector<int> grid(30);
  std::iota(grid.begin(), grid.end(), 1);
  const auto b1 = stats::effort_bands(rates, grid, 500, 17, 1);
  const auto b4 = stats::effort_bands(rates, grid, 500, 17, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(b1.min[i] <= b1.lo95[i] + 1e-12);
    CHECK(b1.lo95[i] <= b1.mean[i] + 1e-12);
    CHECK(b1.mean[i] <= b1.hi95[i] + 1e-12);
    CHECK(b1.hi95[i] <= b1.max[i] + 1e-12);
    CHECK(b1.mean[i] == b4.mean[i]);
    CHECK(b1.lo95[i] == b4.lo95[i]);
    CHECK(b1.hi95[i] == b4.hi95[i]);
  }
  CHECK_THROWS_AS(stats::effort_bands({}, grid, 10, 1), ValidationError);
}

TEST_CASE("effort bands: resample mean is unbiased over seeds") {
  Rng gen(21);
  std::vector<double> rates;
  for (int i = 0; i < 12; ++i) rates.push_back(gen.uniform(0.0, 1.0));
  const double sample_mean =
      std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  const std::vector<int> grid{6};
  double grand = 0.0;
  const int n_seeds = 60;
  for (int s = 0; s < n_seeds; ++s) grand += stats::effort_bands(rates, grid, 400, s).mean[0];
  grand /= n_seeds;
  CHECK(grand == doctest::Approx(sample_mean).epsilon(0.02));
}

TEST_CASE("effort bands: width shrinks from effort 5 to effort 20") {
  // CLT property quoted for Fig 5b-style data; checked across replicates.
  int narrower = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    Rng gen(1000 + rep);
    std::vector<double> rates;
    for (int i = 0; i < 40; ++i) rates.push_back(gen.exponential() * 0.25);
    const std::vector<int> grid{5, 20};
    const auto b = stats::effort_bands(rates, grid, 400, 7 + rep);
    if (b.hi95[1] - b.lo95[1] <= b.hi95[0] - b.lo95[0]) ++narrower;
  }
  CHECK(narrower >= 95);
}

TEST_CASE("activity histogram: nocturnal signature and totals") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "m", {}});
  add_full_uptime_deployment(store, make_deployment("D1", "C1", "L1", kT0, 30.0));
  Rng gen(3);
  int added = 0;
  for (int i = 0; i < 200; ++i) {
    // Start times 19:00-05:00 only.
    const int night_minute = static_cast<int>(gen.uniform_index(10 * 60));
    const int minute = (19 * 60 + night_minute) % 1440;
    const UnixSeconds t = kT0 + (i % 28) * 86400 + minute * 60;
    const auto id = "s" + std::to_string(i);
    store.add_sequence(make_sequence(id, "D1", t, t + 5));
    store.add_image({"D1", t, Trigger::motion, id});
    store.add_detection({id, "owl_monkey", 1, ""});
    ++added;
  }
  const auto h = stats::activity_histogram(store, "owl_monkey", 60);
  REQUIRE(h.counts.size() == 24);
  CHECK(h.total() == added);
  for (int hour = 6; hour < 18; ++hour) CHECK(h.counts[static_cast<std::size_t>(hour)] == 0);
  CHECK(h.counts[20] > 0);

  SUBCASE("bin width must divide the day") {
    CHECK_THROWS_AS(stats::activity_histogram(store, "owl_monkey", 7), ValidationError);
    CHECK(stats::activity_histogram(store, "owl_monkey", 1440).counts.size() == 1);
  }
}

TEST_CASE("activity histogram: uniform arrivals flatten as n grows") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "m", {}});
  add_full_uptime_deployment(store, make_deployment("D1", "C1", "L1", kT0, 365.0));
  Rng gen(9);
  for (int i = 0; i < 20000; ++i) {
    const UnixSeconds t = kT0 + static_cast<UnixSeconds>(gen.uniform() * 364.0 * 86400.0);
    const auto id = "s" + std::to_string(i);
    store.add_sequence(make_sequence(id, "D1", t, t));
    store.add_detection({id, "agouti", 1, ""});
  }
  const auto h = stats::activity_histogram(store, "agouti", 240);  // 6 wide bins
  std::int64_t mx = 0, mn = h.total();
  for (auto c : h.counts) {
    mx = std::max(mx, c);
    mn = std::min(mn, c);
  }
  CHECK(static_cast<double>(mx) / static_cast<double>(mn) < 1.15);
}

TEST_CASE("capture history: individual x occasion matrix") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  for (int i = 1; i <= 3; ++i) store.add_camera({"C" + std::to_string(i), "m", {}});
  for (int i = 1; i <= 3; ++i)
    add_full_uptime_deployment(
        store, make_deployment("D" + std::to_string(i), "C" + std::to_string(i), "L1",
                               kT0 + (i - 1) * 10 * 86400, 8.0));
  auto add_det = [&](const std::string& dep, int k, const std::string& ind) {
    const auto id = dep + "-s" + std::to_string(k);
    const UnixSeconds t = store.find_deployment(dep)->start + 3600 + k * 60;
    store.add_sequence(make_sequence(id, dep, t, t + 5));
    store.add_detection({id, "ocelot", 1, ind});
  };
  add_det("D1", 1, "O1");
  add_det("D3", 1, "O1");
  add_det("D2", 1, "O2");
  add_det("D2", 2, "");  // unidentified
  const auto ch = stats::capture_history_export(store, "ocelot");
  REQUIRE(ch.individuals == std::vector<std::string>{"O1", "O2"});
  REQUIRE(ch.occasions == std::vector<std::string>{"D1", "D2", "D3"});
  CHECK(ch.encounters(0, 0) == 1);
  CHECK(ch.encounters(0, 1) == 0);
  CHECK(ch.encounters(0, 2) == 1);
  CHECK(ch.encounters(1, 0) == 0);
  CHECK(ch.encounters(1, 1) == 1);
  CHECK(ch.encounters(1, 2) == 0);
  CHECK(ch.n_unidentified == 1);

  SUBCASE("species without any individual ids is an error") {
    store.add_detection({"D1-s1", "agouti", 1, ""});
    CHECK_THROWS_AS(stats::capture_history_export(store, "agouti"), ValidationError);
  }
}

TEST_CASE("failure summary: the 30% never-failed mix") {
  std::vector<Camera> cams;
  for (int i = 0; i < 20; ++i) {
    Camera c{"C" + std::to_string(i), "m", {}};
    if (i >= 6) {  // 14 of 20 fail at least once
      FailureCategory cat = i < 10 ? FailureCategory::lens_blur
                            : i < 16 ? FailureCategory::humidity_circuit
                                     : FailureCategory::other;
      c.failure_events.push_back({kT0, cat});
    }
    cams.push_back(std::move(c));
  }
  const auto s = stats::failure_summary(cams);
  CHECK(s.n_cameras == 20);
  CHECK(s.never_failed == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(s.n_failures == 14);
  CHECK(s.lens_blur == doctest::Approx(4.0 / 14.0).epsilon(1e-12));
  CHECK(s.humidity_circuit == doctest::Approx(6.0 / 14.0).epsilon(1e-12));
  CHECK(s.other == doctest::Approx(4.0 / 14.0).epsilon(1e-12));
  CHECK(s.lens_blur + s.humidity_circuit + s.other == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("all healthy") {
    std::vector<Camera> ok{{"A", "m", {}}, {"B", "m", {}}};
    CHECK(stats::failure_summary(ok).never_failed == 1.0);
  }
  SUBCASE("empty list rejected") {
    CHECK_THROWS_AS(stats::failure_summary({}), ValidationError);
  }
}

TEST_CASE("seasonal walk-test distances: monthly mean and SE") {
  std::vector<WalkTest> tests;
  // March: 10, 12, 11 -> mean 11, SE 0.5774 (frozen via numpy).
  tests.push_back({"D1", parse_date("2023-03-02"), 10.0});
  tests.push_back({"D2", parse_date("2023-03-10"), 12.0});
  tests.push_back({"D3", parse_date("2023-03-20"), 11.0});
  // July: single test.
  tests.push_back({"D4", parse_date("2023-07-08"), 6.5});
  const auto monthly = stats::seasonal_detection_distance(tests);
  REQUIRE(monthly.size() == 12);
  CHECK(monthly[2].month == 3);
  CHECK(monthly[2].n == 3);
  CHECK(monthly[2].mean_m == doctest::Approx(11.0).epsilon(1e-12));
  CHECK(monthly[2].se_m == doctest::Approx(0.5773502691896258).epsilon(1e-12));
  CHECK(monthly[6].n == 1);
  CHECK(monthly[6].mean_m == doctest::Approx(6.5).epsilon(1e-12));
  CHECK(std::isnan(monthly[6].se_m));
  CHECK(monthly[0].n == 0);
  CHECK(std::isnan(monthly[0].mean_m));

  SUBCASE("constant distances: zero SE everywhere populated") {
    std::vector<WalkTest> flat;
    for (int m = 1; m <= 12; ++m) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "2023-%02d-05", m);
      flat.push_back({"D1", parse_date(buf), 8.0});
      flat.push_back({"D2", parse_date(buf) + 86400, 8.0});
    }
    for (const auto& row : stats::seasonal_detection_distance(flat)) {
      CHECK(row.mean_m == doctest::Approx(8.0).epsilon(1e-15));
      CHECK(row.se_m == doctest::Approx(0.0).epsilon(1e-15));
    }
  }
}
