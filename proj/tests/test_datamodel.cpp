#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "camtrap/csv.hpp"
#include "camtrap/error.hpp"
#include "camtrap/random.hpp"
#include "camtrap/store.hpp"
#include "camtrap/time.hpp"
#include "helpers.hpp"

using namespace camtrap;
using testutil::TempDir;
using testutil::make_deployment;
using testutil::make_image;

namespace {

ProjectStore minimal_store(const std::filesystem::path& root) {
  auto store = ProjectStore::open(root);
  store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
  store.add_camera({"C1", "test-model", {}});
  return store;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("empty project opens with zero rows everywhere") {
  TempDir tmp;
  auto store = ProjectStore::open(tmp.path());
  CHECK(store.plots().empty());
  CHECK(store.locations().empty());
  CHECK(store.cameras().empty());
  CHECK(store.deployments().empty());
  CHECK(store.images().empty());
  CHECK(store.sequences().empty());
  CHECK(store.detections().empty());
  CHECK(store.walktests().empty());
  store.save();
  CHECK(std::filesystem::exists(tmp.path() / "project.json"));
  CHECK(std::filesystem::exists(tmp.path() / "deployments.csv"));
}

TEST_CASE("round-trip is the identity, byte for byte") {
  TempDir tmp;
  {
    auto store = minimal_store(tmp.path());
    store.add_plot({"P1", FruitClass::high, 1.0});
    for (int i = 0; i < 3; ++i)
      store.add_deployment(make_deployment("D" + std::to_string(i), "C1", "L1",
                                           1672531200 + i * 864000, 8.0));
    store.add_image(make_image("D0", 1672531200, Trigger::timelapse, "f0"));
    store.add_sequence(testutil::make_sequence("D0-s0001", "D0", 1672531300, 1672531330));
    store.add_detection({"D0-s0001", "agouti", 2, ""});
    store.add_walktest({"D0", 1672531200, 10.5});
    store.save();
  }
  const auto first = slurp(tmp.path() / "deployments.csv");
  {
    auto store = ProjectStore::open(tmp.path());
    REQUIRE(store.deployments().size() == 3);
    CHECK(store.deployments()[1].deployment_id == "D1");
    CHECK(store.deployments()[1].nominal_days == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(store.plots()[0].fruit_class == FruitClass::high);
    CHECK(store.detections()[0].group_count == 2);
    CHECK(store.walktests()[0].detection_distance_m == 10.5);
    store.save();
  }
  CHECK(slurp(tmp.path() / "deployments.csv") == first);
}

TEST_CASE("overlapping deployments of one camera are rejected, naming both") {
  TempDir tmp;
  auto store = minimal_store(tmp.path());
  store.add_deployment(make_deployment("DEP-A", "C1", "L1", 1672531200, 8.0));
  store.add_deployment(make_deployment("DEP-B", "C1", "L1", 1672531200 + 4 * 86400, 8.0));
  try {
    store.validate();
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("DEP-A") != std::string::npos);
    CHECK(msg.find("DEP-B") != std::string::npos);
  }
}

TEST_CASE("referential integrity failures are rejected at save") {
  TempDir tmp;
  SUBCASE("deployment referencing unknown camera") {
    auto store = ProjectStore::open(tmp.path());
    store.add_location({"L1", "", 0.0, 0.0, Placement::random, 20.0});
    store.add_deployment(make_deployment("D1", "nope", "L1", 1672531200, 8.0));
    CHECK_THROWS_AS(store.save(), ValidationError);
  }
  SUBCASE("image outside its deployment interval") {
    auto store = minimal_store(tmp.path());
    store.add_deployment(make_deployment("D1", "C1", "L1", 1672531200, 8.0));
    store.add_image(make_image("D1", 1672531200 - 1, Trigger::motion, "f"));
    CHECK_THROWS_AS(store.validate(), ValidationError);
  }
  SUBCASE("detection referencing unknown sequence") {
    auto store = minimal_store(tmp.path());
    store.add_detection({"ghost", "agouti", 1, ""});
    CHECK_THROWS_AS(store.validate(), ValidationError);
  }
  SUBCASE("duplicate (sequence, species) detection") {
    auto store = minimal_store(tmp.path());
    store.add_deployment(make_deployment("D1", "C1", "L1", 1672531200, 8.0));
    store.add_sequence(testutil::make_sequence("s1", "D1", 1672531300, 1672531330));
    store.add_detection({"s1", "agouti", 1, ""});
    store.add_detection({"s1", "agouti", 3, ""});
    CHECK_THROWS_AS(store.validate(), ValidationError);
  }
}

TEST_CASE("corrupt table reports the offending file") {
  TempDir tmp;
  {
    auto store = minimal_store(tmp.path());
    store.save();
  }
  std::ofstream(tmp.path() / "cameras.csv") << "camera_id,model\n";  // missing column
  try {
    ProjectStore::open(tmp.path());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("cameras.csv") != std::string::npos);
  }
}

TEST_CASE("effective days: full uptime equals nominal") {
  // 8-day deployment with 12 h heartbeats.
  const auto dep = make_deployment("D", "C", "L", 1672531200, 8.0);
  std::vector<ImageRecord> hb;
  for (UnixSeconds t = dep.start; t <= dep.end; t += 12 * 3600)
    hb.push_back(make_image("D", t, Trigger::timelapse, "h"));
  const auto up = effective_days(dep, hb);
  CHECK(up.days == doctest::Approx(8.0).epsilon(1e-12));
  CHECK_FALSE(up.no_heartbeats);
}

TEST_CASE("effective days: 72 h gap loses the excess over the 24 h grace") {
  const auto dep = make_deployment("D", "C", "L", 1672531200, 8.0);
  std::vector<ImageRecord> hb;
  const UnixSeconds gap_start = dep.start + 2 * 86400;
  for (UnixSeconds t = dep.start; t <= dep.end; t += 12 * 3600) {
    if (t > gap_start && t < gap_start + 72 * 3600) continue;
    hb.push_back(make_image("D", t, Trigger::timelapse, "h"));
  }
  const auto up = effective_days(dep, hb);
  CHECK(up.days == doctest::Approx(6.0).epsilon(1e-12));
  CHECK_FALSE(up.no_heartbeats);
}

TEST_CASE("effective days: no heartbeats means zero effort plus the warning flag") {
  const auto dep = make_deployment("D", "C", "L", 1672531200, 8.0);
  const auto up = effective_days(dep, {});
  CHECK(up.days == 0.0);
  CHECK(up.no_heartbeats);
}

TEST_CASE("effective days: motion triggers mixed into the heartbeat list are rejected") {
  const auto dep = make_deployment("D", "C", "L", 1672531200, 8.0);
  std::vector<ImageRecord> hb{make_image("D", dep.start, Trigger::motion, "m")};
  CHECK_THROWS_AS(effective_days(dep, hb), ValidationError);
}

TEST_CASE("effective days: monotone in gap length, never above nominal") {
  const auto dep = make_deployment("D", "C", "L", 1672531200, 16.0);
  double prev = 17.0;
  for (int gap_h = 0; gap_h <= 14 * 24; gap_h += 7) {
    std::vector<ImageRecord> hb;
    const UnixSeconds gap_start = dep.start + 86400;
    const UnixSeconds gap_end = gap_start + static_cast<UnixSeconds>(gap_h) * 3600;
    for (UnixSeconds t = dep.start; t <= dep.end; t += 12 * 3600) {
      if (t > gap_start && t < gap_end) continue;
      hb.push_back(make_image("D", t, Trigger::timelapse, "h"));
    }
    const auto up = effective_days(dep, hb);
    CHECK(up.days <= dep.nominal_days + 1e-12);
    CHECK(up.days <= prev + 1e-12);
    prev = up.days;
  }
}

TEST_CASE("downtime intervals cover exactly the uncredited time") {
  const auto dep = make_deployment("D", "C", "L", 1672531200, 8.0);
  std::vector<ImageRecord> hb;
  const UnixSeconds gap_start = dep.start + 2 * 86400;
  for (UnixSeconds t = dep.start; t <= dep.end; t += 12 * 3600) {
    if (t > gap_start && t < gap_start + 72 * 3600) continue;
    hb.push_back(make_image("D", t, Trigger::timelapse, "h"));
  }
  const auto down = downtime_intervals(dep, hb);
  REQUIRE(down.size() == 1);
  // 24 h grace after the last heartbeat before the gap, downtime until the
  // next heartbeat.
  CHECK(down[0].begin == gap_start + 24 * 3600);
  double down_days = 0.0;
  for (const auto& iv : down) down_days += static_cast<double>(iv.end - iv.begin) / 86400.0;
  const auto up = effective_days(dep, hb);
  CHECK(up.days == doctest::Approx(dep.nominal_days - down_days).epsilon(1e-12));
}

TEST_CASE("csv: quoting, embedded separators and newlines round-trip") {
  TempDir tmp;
  csv::Table t;
  t.header = {"a", "b"};
  t.rows.push_back({"plain", "with,comma"});
  t.rows.push_back({"with \"quotes\"", "line\nbreak"});
  t.rows.push_back({"", "trailing"});
  const auto p = tmp.path() / "t.csv";
  csv::write_file(p, t);
  const auto back = csv::read_file(p);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(back.rows[i] == t.rows[i]);
}

TEST_CASE("csv: doubles round-trip through shortest formatting") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    CHECK(std::stod(csv::format_double(v)) == v);
  }
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(1.0) == "1");
}

TEST_CASE("time: parse/format round trips and calendar helpers") {
  CHECK(parse_utc("2023-01-01T00:00:00Z") == 1672531200);
  CHECK(format_utc(1672531200) == "2023-01-01T00:00:00Z");
  CHECK(parse_date("2023-01-01") == 1672531200);
  CHECK(format_date(1672531200 + 3600) == "2023-01-01");
  CHECK(month_of(parse_date("2023-07-15")) == 7);
  CHECK(seconds_of_day(parse_utc("2023-03-05T06:30:15Z")) == 6 * 3600 + 30 * 60 + 15);
  CHECK(parse_utc("2024-02-29T12:00:00Z") == parse_date("2024-02-29") + 12 * 3600);
  CHECK_THROWS_AS(parse_utc("2023-02-29T00:00:00Z"), ValidationError);
  CHECK_THROWS_AS(parse_utc("not a date"), ValidationError);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto t = static_cast<UnixSeconds>(rng.uniform_index(4102444800ull));
    CHECK(parse_utc(format_utc(t)) == t);
  }
}

TEST_CASE("enum string conversions are inverses") {
  for (auto p : {Placement::random, Placement::trail})
    CHECK(placement_from_string(to_string(p)) == p);
  for (auto s : {SequenceStatus::auto_, SequenceStatus::flagged, SequenceStatus::resolved_merge,
                 SequenceStatus::resolved_split})
    CHECK(sequence_status_from_string(to_string(s)) == s);
  for (auto c : {FailureCategory::lens_blur, FailureCategory::humidity_circuit,
                 FailureCategory::other, FailureCategory::none})
    CHECK(failure_category_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(placement_from_string("roadside"), ValidationError);
}
