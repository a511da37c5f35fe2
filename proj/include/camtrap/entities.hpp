#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camtrap/time.hpp"

namespace camtrap {

enum class FruitClass { low, high };
enum class Placement { random, trail };
enum class Trigger { motion, timelapse };
enum class SequenceStatus { auto_, flagged, resolved_merge, resolved_split };
enum class FailureCategory { lens_blur, humidity_circuit, other, none };

std::string to_string(FruitClass v);
std::string to_string(Placement v);
std::string to_string(Trigger v);
std::string to_string(SequenceStatus v);
std::string to_string(FailureCategory v);

FruitClass fruit_class_from_string(const std::string& s);
Placement placement_from_string(const std::string& s);
Trigger trigger_from_string(const std::string& s);
SequenceStatus sequence_status_from_string(const std::string& s);
FailureCategory failure_category_from_string(const std::string& s);

/// 1-ha study plot with a fruit-abundance class.
struct Plot {
  std::string plot_id;
  FruitClass fruit_class = FruitClass::low;
  double area_ha = 1.0;
};

struct CameraLocation {
  std::string location_id;
  std::string plot_id;  // empty = outside any plot
  double easting_m = 0.0;
  double northing_m = 0.0;
  Placement placement = Placement::random;
  double mount_height_cm = 20.0;
};

struct FailureEvent {
  UnixSeconds date = 0;
  FailureCategory category = FailureCategory::none;
};

struct Camera {
  std::string camera_id;
  std::string model;
  std::vector<FailureEvent> failure_events;

  bool never_failed() const;
};

/// One camera at one location for a bounded interval; the unit of effort.
struct Deployment {
  std::string deployment_id;
  std::string camera_id;
  std::string location_id;
  UnixSeconds start = 0;
  UnixSeconds end = 0;
  double nominal_days = 0.0;

  static double nominal_days_of(UnixSeconds start, UnixSeconds end) {
    return static_cast<double>(end - start) / kSecondsPerDay;
  }
};

struct ImageRecord {
  std::string deployment_id;
  UnixSeconds timestamp = 0;
  Trigger trigger = Trigger::motion;
  std::string frame_ref;
};

/// Maximal run of trigger images attributed to one passage; the detection unit.
struct Sequence {
  std::string sequence_id;
  std::string deployment_id;
  UnixSeconds start = 0;
  UnixSeconds end = 0;
  int image_count = 0;
  SequenceStatus status = SequenceStatus::auto_;
};

struct Detection {
  std::string sequence_id;
  std::string species_code;
  int group_count = 1;
  std::string individual_id;  // only for pattern-identifiable species
};

struct WalkTest {
  std::string deployment_id;
  UnixSeconds date = 0;
  double detection_distance_m = 0.0;
};

/// Half-open interval of proven downtime within a deployment.
struct DowntimeInterval {
  UnixSeconds begin = 0;
  UnixSeconds end = 0;
};

/// Camera-days with downtime removed, plus the degenerate-input flag.
struct Uptime {
  double days = 0.0;
  bool no_heartbeats = false;
};

/// Downtime inferred from time-lapse heartbeats: within any gap between
/// consecutive proof-of-life points (deployment start, heartbeats, deployment
/// end) the first 24 h are credited as running and the excess is downtime.
/// With no heartbeats at all the whole deployment is downtime.
std::vector<DowntimeInterval> downtime_intervals(const Deployment& deployment,
                                                 std::span<const ImageRecord> heartbeats);

/// Effective camera-days for a deployment given its time-lapse heartbeats.
/// `heartbeats` must already be filtered to this deployment's time-lapse
/// records; motion triggers mixed in raise ValidationError.
Uptime effective_days(const Deployment& deployment,
                      std::span<const ImageRecord> heartbeats);

}  // namespace camtrap
