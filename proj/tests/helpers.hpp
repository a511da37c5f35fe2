#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "camtrap/entities.hpp"
#include "camtrap/store.hpp"

namespace testutil {

// Fresh per-test-case directory under the system temp root, removed on exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto n = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("camtrap_test_" + std::to_string(::getpid()) + "_" + std::to_string(n));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline camtrap::Deployment make_deployment(const std::string& id, const std::string& camera,
                                           const std::string& location,
                                           camtrap::UnixSeconds start, double days) {
  camtrap::Deployment d;
  d.deployment_id = id;
  d.camera_id = camera;
  d.location_id = location;
  d.start = start;
  d.end = start + static_cast<camtrap::UnixSeconds>(days * 86400);
  d.nominal_days = camtrap::Deployment::nominal_days_of(d.start, d.end);
  return d;
}

inline camtrap::ImageRecord make_image(const std::string& dep, camtrap::UnixSeconds t,
                                       camtrap::Trigger trig, const std::string& frame) {
  return {dep, t, trig, frame};
}

// A deployment plus the 12-hourly heartbeats proving it ran the whole time.
inline void add_full_uptime_deployment(camtrap::ProjectStore& store,
                                       const camtrap::Deployment& d,
                                       double heartbeat_hours = 12.0) {
  store.add_deployment(d);
  const auto step = static_cast<camtrap::UnixSeconds>(heartbeat_hours * 3600);
  std::size_t k = 0;
  for (camtrap::UnixSeconds t = d.start; t <= d.end; t += step)
    store.add_image(make_image(d.deployment_id, t, camtrap::Trigger::timelapse,
                               d.deployment_id + "-hb" + std::to_string(k++)));
}

inline camtrap::Sequence make_sequence(const std::string& id, const std::string& dep,
                                       camtrap::UnixSeconds start, camtrap::UnixSeconds end,
                                       int images = 3,
                                       camtrap::SequenceStatus status =
                                           camtrap::SequenceStatus::auto_) {
  camtrap::Sequence s;
  s.sequence_id = id;
  s.deployment_id = dep;
  s.start = start;
  s.end = end;
  s.image_count = images;
  s.status = status;
  return s;
}

}  // namespace testutil
