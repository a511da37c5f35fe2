#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "camtrap/entities.hpp"

namespace camtrap {

/// Directory-backed project store: one CSV table per entity plus a versioned
/// project.json manifest. Single writer; loaded entities are immutable, so
/// concurrent readers may share a const handle.
class ProjectStore {
 public:
  static constexpr int kSchemaVersion = 1;

  /// Opens an existing project or creates an empty one (directory plus empty
  /// tables) if `root` does not contain project.json yet.
  static ProjectStore open(const std::filesystem::path& root);

  /// Validates and writes every table plus project.json.
  void save() const;

  const std::filesystem::path& root() const { return root_; }

  const std::vector<Plot>& plots() const { return plots_; }
  const std::vector<CameraLocation>& locations() const { return locations_; }
  const std::vector<Camera>& cameras() const { return cameras_; }
  const std::vector<Deployment>& deployments() const { return deployments_; }
  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<Sequence>& sequences() const { return sequences_; }
  const std::vector<Detection>& detections() const { return detections_; }
  const std::vector<WalkTest>& walktests() const { return walktests_; }

  void add_plot(Plot p);
  void add_location(CameraLocation l);
  void add_camera(Camera c);
  void add_deployment(Deployment d);
  void add_image(ImageRecord r);
  void add_sequence(Sequence s);
  void add_detection(Detection d);
  void add_walktest(WalkTest w);

  /// Replaces the whole table (used by re-runnable segmentation).
  void set_images(std::vector<ImageRecord> images);
  void set_sequences(std::vector<Sequence> sequences);

  /// Drops every table (the simulator regenerates stores from scratch).
  void clear();

  /// Cross-table invariants: uniqueness, referential integrity, interval
  /// containment, per-camera deployment non-overlap. Throws ValidationError
  /// naming the offending table and rows.
  void validate() const;

  const Deployment* find_deployment(const std::string& id) const;
  const CameraLocation* find_location(const std::string& id) const;
  const Sequence* find_sequence(const std::string& id) const;

  /// Time-lapse heartbeats of one deployment, in time order.
  std::vector<ImageRecord> heartbeats(const std::string& deployment_id) const;
  /// Motion-trigger images of one deployment, in time order.
  std::vector<ImageRecord> motion_images(const std::string& deployment_id) const;

  /// Effective camera-days for one deployment (see effective_days()).
  Uptime deployment_uptime(const Deployment& d) const;

 private:
  explicit ProjectStore(std::filesystem::path root) : root_(std::move(root)) {}
  void load();

  std::filesystem::path root_;
  std::vector<Plot> plots_;
  std::vector<CameraLocation> locations_;
  std::vector<Camera> cameras_;
  std::vector<Deployment> deployments_;
  std::vector<ImageRecord> images_;
  std::vector<Sequence> sequences_;
  std::vector<Detection> detections_;
  std::vector<WalkTest> walktests_;
};

}  // namespace camtrap
