#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "camtrap/error.hpp"
#include "camtrap/ingest.hpp"
#include "camtrap/random.hpp"
#include "helpers.hpp"

using namespace camtrap;
using testutil::TempDir;
using testutil::make_deployment;
using testutil::make_image;

namespace {

const ingest::SegmentationPolicy kDefault{};

std::vector<ImageRecord> motion_at(std::initializer_list<UnixSeconds> offsets,
                                   UnixSeconds base = 1672531200) {
  std::vector<ImageRecord> v;
  std::size_t i = 0;
  for (auto o : offsets)
    v.push_back(make_image("D1", base + o, Trigger::motion, "f" + std::to_string(i++)));
  return v;
}

std::size_t total_images(const ingest::Segmentation& seg) {
  std::size_t n = 0;
  for (const auto& s : seg.sequences) n += static_cast<std::size_t>(s.image_count);
  return n;
}

}  // namespace

TEST_CASE("manifest: header-only file parses to nothing") {
  TempDir tmp;
  const auto p = tmp.path() / "m.csv";
  std::ofstream(p) << "deployment_id,timestamp,trigger,frame_ref\n";
  CHECK(ingest::parse_manifest(p).empty());
}

TEST_CASE("manifest: rows are typed, validated and sorted") {
  TempDir tmp;
  const auto p = tmp.path() / "m.csv";
  std::ofstream(p) << "deployment_id,timestamp,trigger,frame_ref\n"
                      "D2,2023-01-01T00:10:00Z,motion,c\n"
                      "D1,2023-01-01T00:05:00Z,Motion ,b\n"
                      "D1,2023-01-01T00:00:00Z,TIMELAPSE,a\n";
  const auto rows = ingest::parse_manifest(p);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].deployment_id == "D1");
  CHECK(rows[0].frame_ref == "a");
  CHECK(rows[0].trigger == Trigger::timelapse);
  CHECK(rows[1].trigger == Trigger::motion);  // "Motion " trimmed + folded
  CHECK(rows[2].deployment_id == "D2");
}

TEST_CASE("manifest: errors carry context") {
  TempDir tmp;
  const auto p = tmp.path() / "m.csv";
  SUBCASE("unknown column set") {
    std::ofstream(p) << "deployment_id,when,trigger,frame_ref\nD1,2023-01-01T00:00:00Z,motion,a\n";
    CHECK_THROWS_AS(ingest::parse_manifest(p), ValidationError);
  }
  SUBCASE("bad timestamp reports the file line") {
    std::ofstream(p) << "deployment_id,timestamp,trigger,frame_ref\n"
                        "D1,2023-01-01T00:00:00Z,motion,a\n"
                        "D1,yesterday,motion,b\n";
    try {
      ingest::parse_manifest(p);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("timestamp outside the deployment interval") {
    std::ofstream(p) << "deployment_id,timestamp,trigger,frame_ref\n"
                        "D1,2023-03-01T00:00:00Z,motion,a\n";
    const std::vector<Deployment> deps{make_deployment("D1", "C1", "L1", 1672531200, 8.0)};
    CHECK_THROWS_AS(ingest::parse_manifest(p, deps), ValidationError);
  }
  SUBCASE("unknown deployment id") {
    std::ofstream(p) << "deployment_id,timestamp,trigger,frame_ref\n"
                        "ghost,2023-01-01T00:00:00Z,motion,a\n";
    const std::vector<Deployment> deps{make_deployment("D1", "C1", "L1", 1672531200, 8.0)};
    CHECK_THROWS_AS(ingest::parse_manifest(p, deps), ValidationError);
  }
}

TEST_CASE("segmentation: gaps under 30 s merge") {
  const auto seg = ingest::segment_sequences(motion_at({0, 10, 20}), kDefault);
  REQUIRE(seg.sequences.size() == 1);
  CHECK(seg.sequences[0].image_count == 3);
  CHECK(seg.sequences[0].status == SequenceStatus::auto_);
  CHECK(seg.sequences[0].sequence_id == "D1-s0001");
  CHECK(seg.boundaries.empty());
}

TEST_CASE("segmentation: gaps over 40 min split cleanly") {
  const auto seg = ingest::segment_sequences(motion_at({0, 45 * 60}), kDefault);
  REQUIRE(seg.sequences.size() == 2);
  CHECK(seg.sequences[0].status == SequenceStatus::auto_);
  CHECK(seg.sequences[1].status == SequenceStatus::auto_);
  CHECK(seg.sequences[1].sequence_id == "D1-s0002");
  REQUIRE(seg.boundaries.size() == 1);
  CHECK_FALSE(seg.boundaries[0].flagged);
  CHECK(seg.boundaries[0].gap_s == doctest::Approx(2700.0));
}

TEST_CASE("segmentation: intermediate gaps flag both provisional sequences") {
  const auto seg = ingest::segment_sequences(motion_at({0, 5 * 60}), kDefault);
  REQUIRE(seg.sequences.size() == 2);
  CHECK(seg.sequences[0].status == SequenceStatus::flagged);
  CHECK(seg.sequences[1].status == SequenceStatus::flagged);
  REQUIRE(seg.boundaries.size() == 1);
  CHECK(seg.boundaries[0].gap_s == doctest::Approx(300.0));
}

TEST_CASE("segmentation: threshold ties go to flagged") {
  SUBCASE("exactly 30 s") {
    const auto seg = ingest::segment_sequences(motion_at({0, 30}), kDefault);
    REQUIRE(seg.sequences.size() == 2);
    CHECK(seg.sequences[0].status == SequenceStatus::flagged);
  }
  SUBCASE("exactly 2400 s") {
    const auto seg = ingest::segment_sequences(motion_at({0, 2400}), kDefault);
    REQUIRE(seg.sequences.size() == 2);
    CHECK(seg.sequences[0].status == SequenceStatus::flagged);
  }
  SUBCASE("29 s merges, 2401 s splits clean") {
    CHECK(ingest::segment_sequences(motion_at({0, 29}), kDefault).sequences.size() == 1);
    const auto seg = ingest::segment_sequences(motion_at({0, 2401}), kDefault);
    REQUIRE(seg.sequences.size() == 2);
    CHECK(seg.sequences[0].status == SequenceStatus::auto_);
  }
}

TEST_CASE("segmentation: input must be sorted motion images of one deployment") {
  auto imgs = motion_at({60, 0});
  CHECK_THROWS_AS(ingest::segment_sequences(imgs, kDefault), ValidationError);
  auto mixed = motion_at({0, 10});
  mixed[1].deployment_id = "D2";
  CHECK_THROWS_AS(ingest::segment_sequences(mixed, kDefault), ValidationError);
  auto lapse = motion_at({0, 10});
  lapse[0].trigger = Trigger::timelapse;
  CHECK_THROWS_AS(ingest::segment_sequences(lapse, kDefault), ValidationError);
}

TEST_CASE("segmentation: randomized fixture keeps the partition property") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ImageRecord> imgs;
    UnixSeconds t = 1672531200;
    const int n = 50 + static_cast<int>(rng.uniform_index(150));
    for (int i = 0; i < n; ++i) {
      t += static_cast<UnixSeconds>(1 + rng.uniform_index(4000));
      imgs.push_back(make_image("D1", t, Trigger::motion, "f" + std::to_string(i)));
    }
    const auto seg = ingest::segment_sequences(imgs, kDefault);
    CHECK(total_images(seg) == imgs.size());
    for (const auto& s : seg.sequences) {
      CHECK(s.image_count >= 1);
      CHECK(s.start <= s.end);
    }
    for (std::size_t i = 1; i < seg.sequences.size(); ++i)
      CHECK(seg.sequences[i - 1].end < seg.sequences[i].start);
  }
}

TEST_CASE("segmentation: raising the split threshold never adds sequences") {
  Rng rng(7);
  std::vector<ImageRecord> imgs;
  UnixSeconds t = 1672531200;
  for (int i = 0; i < 400; ++i) {
    t += static_cast<UnixSeconds>(1 + rng.uniform_index(5000));
    imgs.push_back(make_image("D1", t, Trigger::motion, "f" + std::to_string(i)));
  }
  std::size_t prev = imgs.size() + 1;
  for (double split : {600.0, 1200.0, 2400.0, 4800.0, 9600.0}) {
    const ingest::SegmentationPolicy policy{30.0, split};
    const auto n = ingest::segment_sequences(imgs, policy).sequences.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("segmentation is deterministic") {
  const auto imgs = motion_at({0, 25, 400, 500, 5000, 5010, 5040});
  const auto a = ingest::segment_sequences(imgs, kDefault);
  const auto b = ingest::segment_sequences(imgs, kDefault);
  REQUIRE(a.sequences.size() == b.sequences.size());
  for (std::size_t i = 0; i < a.sequences.size(); ++i) {
    CHECK(a.sequences[i].sequence_id == b.sequences[i].sequence_id);
    CHECK(a.sequences[i].start == b.sequences[i].start);
    CHECK(a.sequences[i].status == b.sequences[i].status);
  }
}

TEST_CASE("resolve: merge spans both ranges, split keeps both") {
  const auto seg = ingest::segment_sequences(motion_at({0, 10, 300, 310}), kDefault);
  REQUIRE(seg.sequences.size() == 2);
  const auto& a = seg.sequences[0];
  const auto& b = seg.sequences[1];

  SUBCASE("merge") {
    const auto merged = ingest::resolve_flagged(a, b, ingest::ResolveDecision::merge, kDefault);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].status == SequenceStatus::resolved_merge);
    CHECK(merged[0].start == a.start);
    CHECK(merged[0].end == b.end);
    CHECK(merged[0].image_count == a.image_count + b.image_count);
  }
  SUBCASE("split") {
    const auto split = ingest::resolve_flagged(a, b, ingest::ResolveDecision::split, kDefault);
    REQUIRE(split.size() == 2);
    CHECK(split[0].status == SequenceStatus::resolved_split);
    CHECK(split[1].status == SequenceStatus::resolved_split);
    CHECK(split[0].start == a.start);
    CHECK(split[1].end == b.end);
  }
  SUBCASE("already-resolved pair is rejected") {
    auto ra = a;
    ra.status = SequenceStatus::resolved_split;
    auto rb = b;
    rb.status = SequenceStatus::resolved_split;
    CHECK_THROWS_WITH_AS(
        ingest::resolve_flagged(ra, rb, ingest::ResolveDecision::merge, kDefault),
        doctest::Contains("not flagged"), ValidationError);
  }
  SUBCASE("non-adjacent pair is rejected") {
    auto far = b;
    far.start = a.end + 100000;
    far.end = far.start + 10;
    CHECK_THROWS_AS(ingest::resolve_flagged(a, far, ingest::ResolveDecision::merge, kDefault),
                    ValidationError);
  }
}

TEST_CASE("decision log: append, read back, replay onto fresh segmentation") {
  TempDir tmp;
  const auto log_path = tmp.path() / "decisions.csv";
  // Two flagged boundaries: s0001|s0002 (290 s) and s0003|s0004 (400 s),
  // separated by a clean split (8690 s).
  const auto imgs = motion_at({0, 10, 300, 310, 9000, 9400});
  auto seg = ingest::segment_sequences(imgs, kDefault);
  REQUIRE(seg.sequences.size() == 4);

  ingest::append_decision(log_path, {"D1-s0001", "D1-s0002", ingest::ResolveDecision::merge,
                                     "tester", "2023-02-01"});
  ingest::append_decision(log_path, {"D1-s0003", "D1-s0004", ingest::ResolveDecision::split,
                                     "tester", "2023-02-01"});
  const auto log = ingest::read_decision_log(log_path);
  REQUIRE(log.size() == 2);
  CHECK(log[0].decision == ingest::ResolveDecision::merge);
  CHECK(log[1].operator_name == "tester");

  auto seqs = seg.sequences;
  const auto applied = ingest::apply_decisions(seqs, log, kDefault);
  CHECK(applied == 2);
  REQUIRE(seqs.size() == 3);
  CHECK(seqs[0].status == SequenceStatus::resolved_merge);
  CHECK(seqs[0].image_count == 4);
  CHECK(seqs[1].status == SequenceStatus::resolved_split);
  CHECK(seqs[2].status == SequenceStatus::resolved_split);

  // replay is idempotent
  auto again = seg.sequences;
  ingest::apply_decisions(again, log, kDefault);
  const auto twice = ingest::apply_decisions(again, log, kDefault);
  CHECK(twice == 0);
}

TEST_CASE("decision log: stale entries are skipped on replay") {
  const auto imgs = motion_at({0, 10});
  auto seg = ingest::segment_sequences(imgs, kDefault);
  REQUIRE(seg.sequences.size() == 1);
  std::vector<ingest::DecisionRecord> log{
      {"D1-s0001", "D1-s0002", ingest::ResolveDecision::merge, "tester", "2023-02-01"}};
  auto seqs = seg.sequences;
  CHECK(ingest::apply_decisions(seqs, log, kDefault) == 0);
  CHECK(seqs.size() == 1);
}
