#include "camtrap/entities.hpp"

#include <algorithm>

#include "camtrap/error.hpp"

namespace camtrap {

namespace {
constexpr UnixSeconds kGraceSeconds = 24 * 3600;  // two missed 12 h heartbeats
}

std::string to_string(FruitClass v) { return v == FruitClass::low ? "low" : "high"; }

std::string to_string(Placement v) { return v == Placement::random ? "random" : "trail"; }

std::string to_string(Trigger v) { return v == Trigger::motion ? "motion" : "timelapse"; }

std::string to_string(SequenceStatus v) {
  switch (v) {
    case SequenceStatus::auto_: return "auto";
    case SequenceStatus::flagged: return "flagged";
    case SequenceStatus::resolved_merge: return "resolved_merge";
    case SequenceStatus::resolved_split: return "resolved_split";
  }
  return "auto";
}

std::string to_string(FailureCategory v) {
  switch (v) {
    case FailureCategory::lens_blur: return "lens_blur";
    case FailureCategory::humidity_circuit: return "humidity_circuit";
    case FailureCategory::other: return "other";
    case FailureCategory::none: return "none";
  }
  return "none";
}

namespace {
[[noreturn]] void bad_enum(const char* what, const std::string& s) {
  throw ValidationError(std::string("invalid ") + what + ": '" + s + "'");
}
}  // namespace

FruitClass fruit_class_from_string(const std::string& s) {
  if (s == "low") return FruitClass::low;
  if (s == "high") return FruitClass::high;
  bad_enum("fruit_class", s);
}

Placement placement_from_string(const std::string& s) {
  if (s == "random") return Placement::random;
  if (s == "trail") return Placement::trail;
  bad_enum("placement", s);
}

Trigger trigger_from_string(const std::string& s) {
  if (s == "motion") return Trigger::motion;
  if (s == "timelapse") return Trigger::timelapse;
  bad_enum("trigger", s);
}

SequenceStatus sequence_status_from_string(const std::string& s) {
  if (s == "auto") return SequenceStatus::auto_;
  if (s == "flagged") return SequenceStatus::flagged;
  if (s == "resolved_merge") return SequenceStatus::resolved_merge;
  if (s == "resolved_split") return SequenceStatus::resolved_split;
  bad_enum("sequence status", s);
}

FailureCategory failure_category_from_string(const std::string& s) {
  if (s == "lens_blur") return FailureCategory::lens_blur;
  if (s == "humidity_circuit") return FailureCategory::humidity_circuit;
  if (s == "other") return FailureCategory::other;
  if (s == "none") return FailureCategory::none;
  bad_enum("failure category", s);
}

bool Camera::never_failed() const {
  return std::none_of(failure_events.begin(), failure_events.end(),
                      [](const FailureEvent& e) { return e.category != FailureCategory::none; });
}

std::vector<DowntimeInterval> downtime_intervals(const Deployment& deployment,
                                                 std::span<const ImageRecord> heartbeats) {
  std::vector<UnixSeconds> points;
  points.reserve(heartbeats.size() + 2);
  points.push_back(deployment.start);
  for (const auto& hb : heartbeats) {
    if (hb.trigger != Trigger::timelapse) {
      throw ValidationError("effective_days: heartbeat list contains a motion trigger");
    }
    if (hb.deployment_id != deployment.deployment_id) {
      throw ValidationError("effective_days: heartbeat from deployment '" + hb.deployment_id +
                            "' passed for '" + deployment.deployment_id + "'");
    }
    points.push_back(hb.timestamp);
  }
  points.push_back(deployment.end);
  std::sort(points.begin(), points.end());

  std::vector<DowntimeInterval> out;
  if (heartbeats.empty()) {
    out.push_back({deployment.start, deployment.end});
    return out;
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    UnixSeconds gap = points[i + 1] - points[i];
    if (gap > kGraceSeconds) {
      out.push_back({points[i] + kGraceSeconds, points[i + 1]});
    }
  }
  return out;
}

Uptime effective_days(const Deployment& deployment,
                      std::span<const ImageRecord> heartbeats) {
  if (heartbeats.empty()) {
    return {0.0, true};
  }
  double down = 0.0;
  for (const auto& iv : downtime_intervals(deployment, heartbeats)) {
    down += static_cast<double>(iv.end - iv.begin) / kSecondsPerDay;
  }
  double days = deployment.nominal_days - down;
  return {days < 0.0 ? 0.0 : days, false};
}

}  // namespace camtrap
