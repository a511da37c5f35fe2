#include "camtrap/store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "camtrap/csv.hpp"
#include "camtrap/error.hpp"

namespace camtrap {

namespace fs = std::filesystem;
using csv::Table;

namespace {

[[noreturn]] void row_error(const Table& t, std::size_t row, const std::string& msg) {
  throw ValidationError(t.name + ": row " + std::to_string(row + 1) + ": " + msg);
}

std::string encode_failures(const std::vector<FailureEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += ';';
    out += format_date(e.date) + ':' + to_string(e.category);
  }
  return out;
}

std::vector<FailureEvent> decode_failures(const std::string& text) {
  std::vector<FailureEvent> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("failure_events entry '" + item + "' (expected DATE:category)");
    }
    FailureEvent e;
    e.date = parse_date(item.substr(0, colon));
    e.category = failure_category_from_string(item.substr(colon + 1));
    out.push_back(e);
  }
  return out;
}

Table expect_header(const fs::path& path, std::initializer_list<const char*> cols) {
  Table t = csv::read_file(path);
  std::vector<std::string> expected(cols.begin(), cols.end());
  if (t.header != expected) {
    std::string want;
    for (const auto& c : expected) {
      if (!want.empty()) want += ',';
      want += c;
    }
    throw ValidationError(t.name + ": unexpected header (expected '" + want + "')");
  }
  return t;
}

}  // namespace

ProjectStore ProjectStore::open(const fs::path& root) {
  std::error_code ec;
  if (!fs::exists(root)) {
    if (!fs::create_directories(root, ec) || ec) {
      throw ValidationError("cannot create project directory '" + root.string() + "'");
    }
  }
  if (!fs::is_directory(root)) {
    throw ValidationError("'" + root.string() + "' is not a directory");
  }
  ProjectStore store(root);
  if (!fs::exists(root / "project.json")) {
    store.save();  // empty tables + manifest
    return store;
  }
  store.load();
  return store;
}

void ProjectStore::load() {
  {
    std::ifstream in(root_ / "project.json");
    if (!in) throw ValidationError("cannot read '" + (root_ / "project.json").string() + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("project.json: " + std::string(e.what()));
    }
    int version = j.value("schema_version", -1);
    if (version != kSchemaVersion) {
      throw ValidationError("project.json: unsupported schema_version " +
                            std::to_string(version));
    }
  }

  {
    Table t = expect_header(root_ / "plots.csv", {"plot_id", "fruit_class", "area_ha"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      Plot p;
      p.plot_id = t.rows[i][0];
      p.fruit_class = fruit_class_from_string(t.rows[i][1]);
      p.area_ha = csv::to_double(t, i, 2);
      plots_.push_back(std::move(p));
    }
  }
  {
    Table t = expect_header(root_ / "locations.csv",
                            {"location_id", "plot_id", "easting_m", "northing_m",
                             "placement", "mount_height_cm"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CameraLocation l;
      l.location_id = t.rows[i][0];
      l.plot_id = t.rows[i][1];
      l.easting_m = csv::to_double(t, i, 2);
      l.northing_m = csv::to_double(t, i, 3);
      l.placement = placement_from_string(t.rows[i][4]);
      l.mount_height_cm = csv::to_double(t, i, 5);
      locations_.push_back(std::move(l));
    }
  }
  {
    Table t = expect_header(root_ / "cameras.csv", {"camera_id", "model", "failure_events"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      Camera c;
      c.camera_id = t.rows[i][0];
      c.model = t.rows[i][1];
      try {
        c.failure_events = decode_failures(t.rows[i][2]);
      } catch (const ValidationError& e) {
        row_error(t, i, e.what());
      }
      cameras_.push_back(std::move(c));
    }
  }
  {
    Table t = expect_header(root_ / "deployments.csv",
                            {"deployment_id", "camera_id", "location_id", "start", "end",
                             "nominal_days"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      Deployment d;
      d.deployment_id = t.rows[i][0];
      d.camera_id = t.rows[i][1];
      d.location_id = t.rows[i][2];
      try {
        d.start = parse_utc(t.rows[i][3]);
        d.end = parse_utc(t.rows[i][4]);
      } catch (const ValidationError& e) {
        row_error(t, i, e.what());
      }
      d.nominal_days = csv::to_double(t, i, 5);
      deployments_.push_back(std::move(d));
    }
  }
  {
    Table t = expect_header(root_ / "images.csv",
                            {"deployment_id", "timestamp", "trigger", "frame_ref"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      ImageRecord r;
      r.deployment_id = t.rows[i][0];
      try {
        r.timestamp = parse_utc(t.rows[i][1]);
        r.trigger = trigger_from_string(t.rows[i][2]);
      } catch (const ValidationError& e) {
        row_error(t, i, e.what());
      }
      r.frame_ref = t.rows[i][3];
      images_.push_back(std::move(r));
    }
  }
  {
    Table t = expect_header(root_ / "sequences.csv",
                            {"sequence_id", "deployment_id", "start", "end", "image_count",
                             "status"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      Sequence s;
      s.sequence_id = t.rows[i][0];
      s.deployment_id = t.rows[i][1];
      try {
        s.start = parse_utc(t.rows[i][2]);
        s.end = parse_utc(t.rows[i][3]);
        s.status = sequence_status_from_string(t.rows[i][5]);
      } catch (const ValidationError& e) {
        row_error(t, i, e.what());
      }
      s.image_count = static_cast<int>(csv::to_int(t, i, 4));
      sequences_.push_back(std::move(s));
    }
  }
  {
    Table t = expect_header(root_ / "detections.csv",
                            {"sequence_id", "species_code", "group_count", "individual_id"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      Detection d;
      d.sequence_id = t.rows[i][0];
      d.species_code = t.rows[i][1];
      d.group_count = static_cast<int>(csv::to_int(t, i, 2));
      d.individual_id = t.rows[i][3];
      detections_.push_back(std::move(d));
    }
  }
  {
    Table t = expect_header(root_ / "walktests.csv",
                            {"deployment_id", "date", "detection_distance_m"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      WalkTest w;
      w.deployment_id = t.rows[i][0];
      try {
        w.date = parse_date(t.rows[i][1]);
      } catch (const ValidationError& e) {
        row_error(t, i, e.what());
      }
      w.detection_distance_m = csv::to_double(t, i, 2);
      walktests_.push_back(std::move(w));
    }
  }
  validate();
}

void ProjectStore::save() const {
  validate();
  std::error_code ec;
  fs::create_directories(root_, ec);

  {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    std::ofstream out(root_ / "project.json", std::ios::binary);
    if (!out) throw ValidationError("cannot write project.json");
    out << j.dump(2) << '\n';
  }

  {
    Table t;
    t.header = {"plot_id", "fruit_class", "area_ha"};
    for (const auto& p : plots_) {
      t.rows.push_back({p.plot_id, to_string(p.fruit_class), csv::format_double(p.area_ha)});
    }
    csv::write_file(root_ / "plots.csv", t);
  }
  {
    Table t;
    t.header = {"location_id", "plot_id", "easting_m", "northing_m", "placement",
                "mount_height_cm"};
    for (const auto& l : locations_) {
      t.rows.push_back({l.location_id, l.plot_id, csv::format_double(l.easting_m),
                        csv::format_double(l.northing_m), to_string(l.placement),
                        csv::format_double(l.mount_height_cm)});
    }
    csv::write_file(root_ / "locations.csv", t);
  }
  {
    Table t;
    t.header = {"camera_id", "model", "failure_events"};
    for (const auto& c : cameras_) {
      t.rows.push_back({c.camera_id, c.model, encode_failures(c.failure_events)});
    }
    csv::write_file(root_ / "cameras.csv", t);
  }
  {
    Table t;
    t.header = {"deployment_id", "camera_id", "location_id", "start", "end", "nominal_days"};
    for (const auto& d : deployments_) {
      t.rows.push_back({d.deployment_id, d.camera_id, d.location_id, format_utc(d.start),
                        format_utc(d.end), csv::format_double(d.nominal_days)});
    }
    csv::write_file(root_ / "deployments.csv", t);
  }
  {
    Table t;
    t.header = {"deployment_id", "timestamp", "trigger", "frame_ref"};
    for (const auto& r : images_) {
      t.rows.push_back({r.deployment_id, format_utc(r.timestamp), to_string(r.trigger),
                        r.frame_ref});
    }
    csv::write_file(root_ / "images.csv", t);
  }
  {
    Table t;
    t.header = {"sequence_id", "deployment_id", "start", "end", "image_count", "status"};
    for (const auto& s : sequences_) {
      t.rows.push_back({s.sequence_id, s.deployment_id, format_utc(s.start),
                        format_utc(s.end), std::to_string(s.image_count),
                        to_string(s.status)});
    }
    csv::write_file(root_ / "sequences.csv", t);
  }
  {
    Table t;
    t.header = {"sequence_id", "species_code", "group_count", "individual_id"};
    for (const auto& d : detections_) {
      t.rows.push_back({d.sequence_id, d.species_code, std::to_string(d.group_count),
                        d.individual_id});
    }
    csv::write_file(root_ / "detections.csv", t);
  }
  {
    Table t;
    t.header = {"deployment_id", "date", "detection_distance_m"};
    for (const auto& w : walktests_) {
      t.rows.push_back({w.deployment_id, format_date(w.date),
                        csv::format_double(w.detection_distance_m)});
    }
    csv::write_file(root_ / "walktests.csv", t);
  }
}

void ProjectStore::validate() const {
  std::set<std::string> plot_ids;
  for (const auto& p : plots_) {
    if (!(p.area_ha > 0)) {
      throw ValidationError("plots.csv: plot '" + p.plot_id + "': area_ha must be > 0");
    }
    if (!plot_ids.insert(p.plot_id).second) {
      throw ValidationError("plots.csv: duplicate plot_id '" + p.plot_id + "'");
    }
  }

  std::set<std::string> location_ids;
  for (const auto& l : locations_) {
    if (!std::isfinite(l.easting_m) || !std::isfinite(l.northing_m)) {
      throw ValidationError("locations.csv: location '" + l.location_id +
                            "': coordinates must be finite");
    }
    if (!l.plot_id.empty() && !plot_ids.count(l.plot_id)) {
      throw ValidationError("locations.csv: location '" + l.location_id +
                            "' references unknown plot '" + l.plot_id + "'");
    }
    if (!location_ids.insert(l.location_id).second) {
      throw ValidationError("locations.csv: duplicate location_id '" + l.location_id + "'");
    }
  }

  std::set<std::string> camera_ids;
  for (const auto& c : cameras_) {
    if (!camera_ids.insert(c.camera_id).second) {
      throw ValidationError("cameras.csv: duplicate camera_id '" + c.camera_id + "'");
    }
    for (std::size_t i = 1; i < c.failure_events.size(); ++i) {
      if (c.failure_events[i].date < c.failure_events[i - 1].date) {
        throw ValidationError("cameras.csv: camera '" + c.camera_id +
                              "': failure events out of date order");
      }
    }
  }

  std::set<std::string> deployment_ids;
  std::map<std::string, std::vector<const Deployment*>> by_camera;
  for (const auto& d : deployments_) {
    if (d.end <= d.start) {
      throw ValidationError("deployments.csv: deployment '" + d.deployment_id +
                            "': end must be after start");
    }
    if (std::abs(d.nominal_days - Deployment::nominal_days_of(d.start, d.end)) > 1e-6) {
      throw ValidationError("deployments.csv: deployment '" + d.deployment_id +
                            "': nominal_days does not equal (end - start) in days");
    }
    if (!camera_ids.count(d.camera_id)) {
      throw ValidationError("deployments.csv: deployment '" + d.deployment_id +
                            "' references unknown camera '" + d.camera_id + "'");
    }
    if (!location_ids.count(d.location_id)) {
      throw ValidationError("deployments.csv: deployment '" + d.deployment_id +
                            "' references unknown location '" + d.location_id + "'");
    }
    if (!deployment_ids.insert(d.deployment_id).second) {
      throw ValidationError("deployments.csv: duplicate deployment_id '" + d.deployment_id +
                            "'");
    }
    by_camera[d.camera_id].push_back(&d);
  }
  for (auto& [camera, deps] : by_camera) {
    auto sorted = deps;
    std::sort(sorted.begin(), sorted.end(),
              [](const Deployment* a, const Deployment* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i]->start < sorted[i - 1]->end) {
        throw ValidationError("deployments.csv: camera '" + camera + "': deployments '" +
                              sorted[i - 1]->deployment_id + "' and '" +
                              sorted[i]->deployment_id + "' overlap in time");
      }
    }
  }

  std::map<std::string, const Deployment*> dep_by_id;
  for (const auto& d : deployments_) dep_by_id[d.deployment_id] = &d;

  for (const auto& r : images_) {
    auto it = dep_by_id.find(r.deployment_id);
    if (it == dep_by_id.end()) {
      throw ValidationError("images.csv: image references unknown deployment '" +
                            r.deployment_id + "'");
    }
    if (r.timestamp < it->second->start || r.timestamp > it->second->end) {
      throw ValidationError("images.csv: image at " + format_utc(r.timestamp) +
                            " outside deployment '" + r.deployment_id + "' interval");
    }
  }

  std::set<std::string> sequence_ids;
  std::map<std::string, std::vector<const Sequence*>> seq_by_dep;
  for (const auto& s : sequences_) {
    if (s.image_count < 1) {
      throw ValidationError("sequences.csv: sequence '" + s.sequence_id +
                            "': image_count must be >= 1");
    }
    if (s.end < s.start) {
      throw ValidationError("sequences.csv: sequence '" + s.sequence_id +
                            "': end before start");
    }
    if (!dep_by_id.count(s.deployment_id)) {
      throw ValidationError("sequences.csv: sequence '" + s.sequence_id +
                            "' references unknown deployment '" + s.deployment_id + "'");
    }
    if (!sequence_ids.insert(s.sequence_id).second) {
      throw ValidationError("sequences.csv: duplicate sequence_id '" + s.sequence_id + "'");
    }
    seq_by_dep[s.deployment_id].push_back(&s);
  }
  for (auto& [dep, seqs] : seq_by_dep) {
    auto sorted = seqs;
    std::sort(sorted.begin(), sorted.end(),
              [](const Sequence* a, const Sequence* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i]->start <= sorted[i - 1]->end) {
        throw ValidationError("sequences.csv: deployment '" + dep + "': sequences '" +
                              sorted[i - 1]->sequence_id + "' and '" +
                              sorted[i]->sequence_id + "' overlap in time");
      }
    }
  }

  std::set<std::pair<std::string, std::string>> det_keys;
  for (const auto& d : detections_) {
    if (d.group_count < 1) {
      throw ValidationError("detections.csv: sequence '" + d.sequence_id +
                            "': group_count must be >= 1");
    }
    if (!sequence_ids.count(d.sequence_id)) {
      throw ValidationError("detections.csv: detection references unknown sequence '" +
                            d.sequence_id + "'");
    }
    if (!det_keys.insert({d.sequence_id, d.species_code}).second) {
      throw ValidationError("detections.csv: duplicate (sequence, species) pair ('" +
                            d.sequence_id + "', '" + d.species_code + "')");
    }
  }

  std::set<std::string> walktest_deps;
  for (const auto& w : walktests_) {
    if (w.detection_distance_m < 0) {
      throw ValidationError("walktests.csv: deployment '" + w.deployment_id +
                            "': detection_distance_m must be >= 0");
    }
    if (!dep_by_id.count(w.deployment_id)) {
      throw ValidationError("walktests.csv: walk test references unknown deployment '" +
                            w.deployment_id + "'");
    }
    if (!walktest_deps.insert(w.deployment_id).second) {
      throw ValidationError("walktests.csv: more than one walk test for deployment '" +
                            w.deployment_id + "'");
    }
  }
}

void ProjectStore::add_plot(Plot p) { plots_.push_back(std::move(p)); }
void ProjectStore::add_location(CameraLocation l) { locations_.push_back(std::move(l)); }
void ProjectStore::add_camera(Camera c) { cameras_.push_back(std::move(c)); }
void ProjectStore::add_deployment(Deployment d) { deployments_.push_back(std::move(d)); }
void ProjectStore::add_image(ImageRecord r) { images_.push_back(std::move(r)); }
void ProjectStore::add_sequence(Sequence s) { sequences_.push_back(std::move(s)); }
void ProjectStore::add_detection(Detection d) { detections_.push_back(std::move(d)); }
void ProjectStore::add_walktest(WalkTest w) { walktests_.push_back(std::move(w)); }

void ProjectStore::set_images(std::vector<ImageRecord> images) { images_ = std::move(images); }
void ProjectStore::set_sequences(std::vector<Sequence> sequences) {
  sequences_ = std::move(sequences);
}

void ProjectStore::clear() {
  plots_.clear();
  locations_.clear();
  cameras_.clear();
  deployments_.clear();
  images_.clear();
  sequences_.clear();
  detections_.clear();
  walktests_.clear();
}

const Deployment* ProjectStore::find_deployment(const std::string& id) const {
  for (const auto& d : deployments_) {
    if (d.deployment_id == id) return &d;
  }
  return nullptr;
}

const CameraLocation* ProjectStore::find_location(const std::string& id) const {
  for (const auto& l : locations_) {
    if (l.location_id == id) return &l;
  }
  return nullptr;
}

const Sequence* ProjectStore::find_sequence(const std::string& id) const {
  for (const auto& s : sequences_) {
    if (s.sequence_id == id) return &s;
  }
  return nullptr;
}

std::vector<ImageRecord> ProjectStore::heartbeats(const std::string& deployment_id) const {
  std::vector<ImageRecord> out;
  for (const auto& r : images_) {
    if (r.deployment_id == deployment_id && r.trigger == Trigger::timelapse) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<ImageRecord> ProjectStore::motion_images(const std::string& deployment_id) const {
  std::vector<ImageRecord> out;
  for (const auto& r : images_) {
    if (r.deployment_id == deployment_id && r.trigger == Trigger::motion) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.timestamp < b.timestamp; });
  return out;
}

Uptime ProjectStore::deployment_uptime(const Deployment& d) const {
  auto hb = heartbeats(d.deployment_id);
  return effective_days(d, hb);
}

}  // namespace camtrap
