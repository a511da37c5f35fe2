// Command-line front end: every analysis writes tidy CSV (plus the occasional
// SVG) under <project>/analysis/ together with a run manifest, so results are
// auditable and reruns are byte-identical.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "camtrap/csv.hpp"
#include "camtrap/error.hpp"
#include "camtrap/estimators.hpp"
#include "camtrap/geometry.hpp"
#include "camtrap/glm.hpp"
#include "camtrap/ingest.hpp"
#include "camtrap/manifest.hpp"
#include "camtrap/parallel.hpp"
#include "camtrap/simulator.hpp"
#include "camtrap/spatial.hpp"
#include "camtrap/store.hpp"
#include "camtrap/svg.hpp"
#include "camtrap/version.hpp"

namespace fs = std::filesystem;
using namespace camtrap;

namespace {

constexpr const char* kTableFiles[] = {"plots.csv",     "locations.csv", "cameras.csv",
                                       "deployments.csv", "images.csv",    "sequences.csv",
                                       "detections.csv",  "walktests.csv"};

fs::path project_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CAMTRAP_PROJECT"); env && *env) return env;
  throw ValidationError("no project directory given: pass --project or set CAMTRAP_PROJECT");
}

fs::path analysis_dir(const fs::path& root) {
  const auto dir = root / "analysis";
  fs::create_directories(dir);
  return dir;
}

void hash_store_inputs(RunManifest& m, const fs::path& root) {
  for (const char* t : kTableFiles)
    if (fs::exists(root / t)) m.add_input(root / t, root);
}

void finish_manifest(RunManifest& m, const fs::path& root) {
  const auto path = analysis_dir(root) / (m.command + ".manifest.json");
  m.write(path);
}

std::string fmt(double v) { return csv::format_double(v); }

// NaN cells (undefined SE and the like) are written as NA.
std::string fmt_or_na(double v) { return std::isnan(v) ? "NA" : csv::format_double(v); }

void write_table(const fs::path& path, csv::Table& t) {
  t.name = path.filename().string();
  csv::write_file(path, t);
}

stats::EffortBasis basis_of(bool nominal) {
  return nominal ? stats::EffortBasis::nominal : stats::EffortBasis::effective;
}

// ---- init ----------------------------------------------------------------

int cmd_init(const std::string& project) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  store.save();
  RunManifest m;
  m.command = "init";
  for (const char* t : kTableFiles) m.add_output(root / t, root);
  finish_manifest(m, root);
  std::cerr << "initialized project store at " << root.string() << "\n";
  return 0;
}

// ---- ingest ----------------------------------------------------------------

int cmd_ingest(const std::string& project, const std::string& manifest_file) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  auto images = ingest::parse_manifest(fs::path(manifest_file), store.deployments());
  const auto n = images.size();
  store.set_images(std::move(images));
  store.save();

  RunManifest m;
  m.command = "ingest";
  m.add_input(manifest_file, root);
  m.add_output(root / "images.csv", root);
  finish_manifest(m, root);
  std::cerr << "ingested " << n << " image records\n";
  return 0;
}

// ---- sequences ----------------------------------------------------------------

int cmd_sequences(const std::string& project, double merge_s, double split_s) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const ingest::SegmentationPolicy policy{merge_s, split_s};
  policy.validate();

  std::vector<Sequence> all;
  std::size_t flagged = 0;
  for (const auto& dep : store.deployments()) {
    const auto motion = store.motion_images(dep.deployment_id);
    auto seg = ingest::segment_sequences(motion, policy);
    for (auto& s : seg.sequences) {
      if (s.status == SequenceStatus::flagged) ++flagged;
      all.push_back(std::move(s));
    }
  }

  std::size_t applied = 0;
  const auto log_path = root / "decisions.csv";
  if (fs::exists(log_path)) {
    const auto log = ingest::read_decision_log(log_path);
    applied = ingest::apply_decisions(all, log, policy);
  }
  const auto total = all.size();
  store.set_sequences(std::move(all));
  store.save();

  RunManifest m;
  m.command = "sequences";
  m.add_param("merge_s", fmt(merge_s));
  m.add_param("split_s", fmt(split_s));
  m.add_input(root / "images.csv", root);
  if (fs::exists(log_path)) m.add_input(log_path, root);
  m.add_output(root / "sequences.csv", root);
  finish_manifest(m, root);
  std::cerr << "segmented " << total << " sequences (" << flagged << " flagged, " << applied
            << " decisions replayed)\n";
  return 0;
}

// ---- resolve ----------------------------------------------------------------

int cmd_resolve(const std::string& project, const std::string& seq_a, const std::string& seq_b,
                const std::string& decision, const std::string& operator_name,
                const std::string& date, double merge_s, double split_s) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const ingest::SegmentationPolicy policy{merge_s, split_s};
  policy.validate();

  const Sequence* a = store.find_sequence(seq_a);
  const Sequence* b = store.find_sequence(seq_b);
  if (!a) throw ValidationError("unknown sequence '" + seq_a + "'");
  if (!b) throw ValidationError("unknown sequence '" + seq_b + "'");
  const auto dec = ingest::resolve_decision_from_string(decision);
  const auto replacement = ingest::resolve_flagged(*a, *b, dec, policy);

  std::vector<Sequence> updated;
  for (const auto& s : store.sequences()) {
    if (s.sequence_id == seq_a) {
      for (const auto& r : replacement) updated.push_back(r);
      continue;
    }
    if (s.sequence_id == seq_b) continue;
    updated.push_back(s);
  }
  store.set_sequences(std::move(updated));
  store.save();
  ingest::append_decision(root / "decisions.csv", {seq_a, seq_b, dec, operator_name, date});

  RunManifest m;
  m.command = "resolve";
  m.add_param("a", seq_a);
  m.add_param("b", seq_b);
  m.add_param("decision", decision);
  m.add_param("operator", operator_name);
  m.add_param("date", date);
  m.add_output(root / "sequences.csv", root);
  m.add_output(root / "decisions.csv", root);
  finish_manifest(m, root);
  std::cerr << "resolved " << seq_a << "/" << seq_b << " as " << decision << "\n";
  return 0;
}

// ---- rates ----------------------------------------------------------------

int cmd_rates(const std::string& project, const std::string& species, bool nominal,
              const std::string& placement) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);

  stats::DeploymentFilter filter;
  if (!placement.empty()) {
    const Placement want = placement_from_string(placement);
    filter = [&store, want](const Deployment& d) {
      const CameraLocation* loc = store.find_location(d.location_id);
      return loc && loc->placement == want;
    };
  }

  std::vector<stats::RateEstimate> rows;
  if (species.empty()) {
    rows = stats::detection_rates(store, filter, basis_of(nominal));
  } else {
    rows.push_back(stats::detection_rate(store, species, filter, basis_of(nominal)));
  }

  csv::Table t;
  t.header = {"species", "y", "t_days", "rate_per_camday"};
  for (const auto& r : rows)
    t.rows.push_back({r.species_code, std::to_string(r.y), fmt(r.t), fmt(r.rate)});
  const auto out = analysis_dir(root) / "rates.csv";
  write_table(out, t);

  RunManifest m;
  m.command = "rates";
  if (!species.empty()) m.add_param("species", species);
  if (!placement.empty()) m.add_param("placement", placement);
  m.add_param("basis", nominal ? "nominal" : "effective");
  hash_store_inputs(m, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "wrote " << t.rows.size() << " rate rows\n";
  return 0;
}

// ---- history ----------------------------------------------------------------

int cmd_history(const std::string& project, const std::string& species, int granularity) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto hist = stats::detection_history(store, species, granularity);

  csv::Table t;
  t.header.push_back("deployment_id");
  for (const auto& col : hist.species) t.header.push_back(col);
  for (std::size_t i = 0; i < hist.deployments.size(); ++i) {
    std::vector<std::string> row{hist.deployments[i]};
    for (Eigen::Index j = 0; j < hist.cells.cols(); ++j) {
      const int c = hist.cells(static_cast<Eigen::Index>(i), j);
      row.push_back(c < 0 ? "NA" : std::to_string(c));
    }
    t.rows.push_back(std::move(row));
  }
  const auto out = analysis_dir(root) / ("history_" + species + ".csv");
  write_table(out, t);

  RunManifest m;
  m.command = "history";
  m.add_param("species", species);
  m.add_param("granularity_days", std::to_string(granularity));
  hash_store_inputs(m, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "wrote detection history: " << hist.deployments.size() << " deployments x "
            << hist.species.size() << " bins\n";
  return 0;
}

// ---- accumulation ----------------------------------------------------------------

int cmd_accumulation(const std::string& project, int resamples, std::uint64_t seed,
                     unsigned threads) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto inc = stats::build_incidence(store);
  if (inc.deployments.empty()) throw ValidationError("accumulation: store has no deployments");
  const auto curve = stats::rarefaction(inc, resamples, seed, {}, threads);

  csv::Table t;
  t.header = {"effort", "sobs_mean", "sobs_sd", "jack1_mean", "jack1_sd"};
  for (std::size_t i = 0; i < curve.effort.size(); ++i)
    t.rows.push_back({std::to_string(curve.effort[i]), fmt(curve.sobs_mean[i]),
                      fmt(curve.sobs_sd[i]), fmt(curve.jack1_mean[i]), fmt(curve.jack1_sd[i])});
  const auto dir = analysis_dir(root);
  const auto out = dir / "accumulation.csv";
  write_table(out, t);

  svg::Series sobs{"Sobs", {}, {}}, jack{"Jack1", {}, {}};
  for (std::size_t i = 0; i < curve.effort.size(); ++i) {
    sobs.x.push_back(curve.effort[i]);
    sobs.y.push_back(curve.sobs_mean[i]);
    jack.x.push_back(curve.effort[i]);
    jack.y.push_back(curve.jack1_mean[i]);
  }
  const auto chart = dir / "accumulation.svg";
  svg::write_line_chart(chart, "Species accumulation", "deployments", "species", {sobs, jack});

  RunManifest m;
  m.command = "accumulation";
  m.seed = seed;
  m.add_param("resamples", std::to_string(resamples));
  m.add_param("exhaustive", curve.exhaustive ? "true" : "false");
  hash_store_inputs(m, root);
  m.add_output(out, root);
  m.add_output(chart, root);
  finish_manifest(m, root);
  std::cerr << "accumulation over " << inc.deployments.size() << " deployments, "
            << curve.n_resamples << (curve.exhaustive ? " orderings (exhaustive)" : " resamples")
            << "\n";
  return 0;
}

// ---- effort ----------------------------------------------------------------

int cmd_effort(const std::string& project, const std::string& species, std::string grid_arg,
               int resamples, std::uint64_t seed, bool nominal, unsigned threads) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto rates = stats::per_deployment_rates(store, species, basis_of(nominal));
  if (rates.empty()) throw ValidationError("effort: no deployments with positive effort");

  std::vector<int> grid;
  if (grid_arg.empty()) {
    grid.resize(rates.size());
    std::iota(grid.begin(), grid.end(), 1);
  } else {
    std::stringstream ss(grid_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stoi(tok));
  }
  const auto bands = stats::effort_bands(rates, grid, resamples, seed, threads);

  csv::Table t;
  t.header = {"effort", "mean", "min", "max", "lo95", "hi95"};
  for (std::size_t i = 0; i < bands.effort.size(); ++i)
    t.rows.push_back({std::to_string(bands.effort[i]), fmt(bands.mean[i]), fmt(bands.min[i]),
                      fmt(bands.max[i]), fmt(bands.lo95[i]), fmt(bands.hi95[i])});
  const auto dir = analysis_dir(root);
  const auto out = dir / ("effort_" + species + ".csv");
  write_table(out, t);

  svg::Series mean{"mean", {}, {}}, lo{"lo95", {}, {}}, hi{"hi95", {}, {}};
  for (std::size_t i = 0; i < bands.effort.size(); ++i) {
    mean.x.push_back(bands.effort[i]);
    mean.y.push_back(bands.mean[i]);
    lo.x.push_back(bands.effort[i]);
    lo.y.push_back(bands.lo95[i]);
    hi.x.push_back(bands.effort[i]);
    hi.y.push_back(bands.hi95[i]);
  }
  const auto chart = dir / ("effort_" + species + ".svg");
  svg::write_line_chart(chart, "Detection rate vs effort (" + species + ")", "deployments",
                        "rate per camera-day", {mean, lo, hi});

  RunManifest m;
  m.command = "effort";
  m.seed = seed;
  m.add_param("species", species);
  m.add_param("resamples", std::to_string(resamples));
  m.add_param("basis", nominal ? "nominal" : "effective");
  if (!grid_arg.empty()) m.add_param("grid", grid_arg);
  hash_store_inputs(m, root);
  m.add_output(out, root);
  m.add_output(chart, root);
  finish_manifest(m, root);
  std::cerr << "effort bands over " << rates.size() << " deployments\n";
  return 0;
}

// ---- activity ----------------------------------------------------------------

int cmd_activity(const std::string& project, const std::string& species, int bin_minutes) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto hist = stats::activity_histogram(store, species, bin_minutes);

  csv::Table t;
  t.header = {"bin_start_min", "bin_end_min", "count"};
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    t.rows.push_back({std::to_string(i * static_cast<std::size_t>(bin_minutes)),
                      std::to_string((i + 1) * static_cast<std::size_t>(bin_minutes)),
                      std::to_string(hist.counts[i])});
  const auto dir = analysis_dir(root);
  const auto out = dir / ("activity_" + species + ".csv");
  write_table(out, t);

  svg::Series s{species, {}, {}};
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    s.x.push_back((static_cast<double>(i) + 0.5) * bin_minutes / 60.0);
    s.y.push_back(static_cast<double>(hist.counts[i]));
  }
  const auto chart = dir / ("activity_" + species + ".svg");
  svg::write_line_chart(chart, "Daily activity (" + species + ")", "hour of day (UTC)",
                        "sequences", {s});

  RunManifest m;
  m.command = "activity";
  m.add_param("species", species);
  m.add_param("bin_minutes", std::to_string(bin_minutes));
  hash_store_inputs(m, root);
  m.add_output(out, root);
  m.add_output(chart, root);
  finish_manifest(m, root);
  std::cerr << "activity histogram: " << hist.total() << " sequences\n";
  return 0;
}

// ---- trailbias ----------------------------------------------------------------

int cmd_trailbias(const std::string& project, const std::string& species, int min_detections,
                  bool nominal) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);

  // Per-deployment, per-species counts over non-flagged sequences.
  std::map<std::string, std::map<std::string, std::int64_t>> y_by_species;
  {
    std::map<std::string, std::string> dep_of;
    for (const auto& s : store.sequences())
      if (s.status != SequenceStatus::flagged) dep_of[s.sequence_id] = s.deployment_id;
    for (const auto& det : store.detections()) {
      auto it = dep_of.find(det.sequence_id);
      if (it != dep_of.end()) ++y_by_species[det.species_code][it->second];
    }
  }

  // The shared design: one row per deployment with positive effort.
  std::vector<std::string> dep_ids;
  std::vector<double> efforts, trail;
  int n_random = 0, n_trail = 0;
  for (const auto& d : store.deployments()) {
    const double t = nominal ? d.nominal_days : store.deployment_uptime(d).days;
    if (t <= 0.0) continue;
    const CameraLocation* loc = store.find_location(d.location_id);
    const bool is_trail = loc && loc->placement == Placement::trail;
    dep_ids.push_back(d.deployment_id);
    efforts.push_back(t);
    trail.push_back(is_trail ? 1.0 : 0.0);
    (is_trail ? n_trail : n_random)++;
  }
  if (n_random == 0 || n_trail == 0)
    throw ValidationError("trailbias: needs deployments in both placements");

  const auto n = static_cast<Eigen::Index>(dep_ids.size());
  VecXd offset(n);
  MatXd full(n, 2), reduced(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    offset[i] = std::log(efforts[static_cast<std::size_t>(i)]);
    full(i, 0) = 1.0;
    full(i, 1) = trail[static_cast<std::size_t>(i)];
    reduced(i, 0) = 1.0;
  }

  std::vector<std::string> tested;
  if (!species.empty()) {
    tested.push_back(species);
  } else {
    for (const auto& [code, per_dep] : y_by_species) {
      std::int64_t total = 0;
      for (const auto& [dep, c] : per_dep) total += c;
      if (total >= min_detections) tested.push_back(code);
    }
    if (tested.empty())
      throw ValidationError("trailbias: no species reaches " +
                            std::to_string(min_detections) + " detections");
  }

  csv::Table t;
  t.header = {"species", "n_random", "n_trail", "rate_ratio", "F", "p"};
  for (const auto& code : tested) {
    VecXd yv = VecXd::Zero(n);
    const auto it_sp = y_by_species.find(code);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (it_sp == y_by_species.end()) break;
      auto it = it_sp->second.find(dep_ids[static_cast<std::size_t>(i)]);
      if (it != it_sp->second.end()) yv[i] = static_cast<double>(it->second);
    }
    const auto fit_full = glm::fit_quasipoisson(yv, full, offset);
    const auto fit_reduced = glm::fit_quasipoisson(yv, reduced, offset);
    const auto test = glm::f_test(fit_full, fit_reduced);
    const double ratio = glm::rate_ratio(fit_full);
    t.rows.push_back({code, std::to_string(n_random), std::to_string(n_trail), fmt(ratio),
                      fmt(test.F), fmt(test.p_value)});
    std::cerr << code << ": rate ratio " << fmt(ratio) << " (F=" << fmt(test.F)
              << ", p=" << fmt(test.p_value) << ")\n";
  }
  const auto out = analysis_dir(root) /
                   (species.empty() ? std::string("trailbias.csv")
                                    : "trailbias_" + species + ".csv");
  write_table(out, t);

  RunManifest m;
  m.command = "trailbias";
  if (!species.empty()) m.add_param("species", species);
  m.add_param("min_detections", std::to_string(min_detections));
  m.add_param("basis", nominal ? "nominal" : "effective");
  hash_store_inputs(m, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  return 0;
}

// ---- semivariogram ----------------------------------------------------------------

int cmd_semivariogram(const std::string& project, const std::string& species, int window_days,
                      double bin_width, double max_dist) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  if (bin_width <= 0.0 || max_dist <= bin_width)
    throw ValidationError("semivariogram: need bin width > 0 and max distance > bin width");
  std::vector<std::pair<double, double>> bins;
  for (double lo = 0.0; lo + bin_width <= max_dist + 1e-9; lo += bin_width)
    bins.emplace_back(lo, lo + bin_width);

  spatial::WindowSpec window;
  window.window_days = window_days;
  const auto results = spatial::windowed_semivariogram(store, species, window, bins);

  csv::Table t;
  t.header = {"window_start", "window_end", "bin_lower_m", "bin_upper_m",
              "n_pairs",      "mean",       "se",          "sd"};
  csv::Table thresholds;
  thresholds.header = {"window_start", "window_end", "threshold_m"};
  for (const auto& w : results) {
    if (w.skipped) {
      std::cerr << "window " << format_utc(w.window_start) << " skipped: " << w.note << "\n";
      continue;
    }
    for (const auto& b : w.variogram.bins)
      t.rows.push_back({format_utc(w.window_start), format_utc(w.window_end), fmt(b.lower_m),
                        fmt(b.upper_m), std::to_string(b.n_pairs), fmt_or_na(b.mean),
                        fmt_or_na(b.se), fmt_or_na(b.sd)});
    try {
      const double thr = spatial::independence_threshold(w.variogram.bins);
      thresholds.rows.push_back(
          {format_utc(w.window_start), format_utc(w.window_end), fmt(thr)});
    } catch (const ValidationError& e) {
      std::cerr << "window " << format_utc(w.window_start) << ": " << e.what() << "\n";
    }
  }
  const auto dir = analysis_dir(root);
  const auto out = dir / ("semivariogram_" + species + ".csv");
  const auto out_thr = dir / ("semivariogram_thresholds_" + species + ".csv");
  write_table(out, t);
  write_table(out_thr, thresholds);

  RunManifest m;
  m.command = "semivariogram";
  m.add_param("species", species);
  m.add_param("window_days", std::to_string(window_days));
  m.add_param("bin_width_m", fmt(bin_width));
  m.add_param("max_dist_m", fmt(max_dist));
  hash_store_inputs(m, root);
  m.add_output(out, root);
  m.add_output(out_thr, root);
  finish_manifest(m, root);
  std::cerr << "semivariogram rows: " << t.rows.size() << " across " << results.size()
            << " windows\n";
  return 0;
}

// ---- calibrate ----------------------------------------------------------------

int cmd_calibrate(const std::string& project, const std::string& points_file) {
  const auto root = project_root(project);
  const auto table = csv::read_file(points_file);
  const auto cu = table.column("u"), cv = table.column("v");
  const auto cx = table.column("X_m"), cy = table.column("Y_m");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  MatXd pixels(n, 2), ground(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    pixels(i, 0) = csv::to_double(table, r, cu);
    pixels(i, 1) = csv::to_double(table, r, cv);
    ground(i, 0) = csv::to_double(table, r, cx);
    ground(i, 1) = csv::to_double(table, r, cy);
  }
  const auto model = geom::fit_homography(pixels, ground);

  nlohmann::json j;
  j["H"] = {{model.H(0, 0), model.H(0, 1), model.H(0, 2)},
            {model.H(1, 0), model.H(1, 1), model.H(1, 2)},
            {model.H(2, 0), model.H(2, 1), model.H(2, 2)}};
  j["rmse_m"] = model.rmse_m;
  j["n_points"] = model.n_points;
  j["ground_side_sign"] = model.ground_side_sign;
  const auto out = analysis_dir(root) / "calibration.json";
  std::ofstream os(out, std::ios::binary);
  os << j.dump(2) << '\n';
  os.close();

  RunManifest m;
  m.command = "calibrate";
  m.add_input(points_file, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "calibrated from " << n << " points, rmse " << fmt(model.rmse_m) << " m\n";
  return 0;
}

geom::CalibrationModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open calibration model: " + path.string());
  nlohmann::json j;
  in >> j;
  geom::CalibrationModel model;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      model.H(r, c) = j.at("H").at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c))
                          .get<double>();
  model.rmse_m = j.at("rmse_m").get<double>();
  model.n_points = j.at("n_points").get<int>();
  model.ground_side_sign = j.at("ground_side_sign").get<double>();
  return model;
}

// ---- speed ----------------------------------------------------------------

int cmd_speed(const std::string& project, const std::string& tracks_file,
              const std::string& model_file) {
  const auto root = project_root(project);
  const auto model_path = model_file.empty() ? analysis_dir(root) / "calibration.json"
                                             : fs::path(model_file);
  const auto model = load_model(model_path);
  const auto table = csv::read_file(tracks_file);
  const auto cid = table.column("track_id"), ct = table.column("time_s");
  const auto cu = table.column("u"), cv = table.column("v");

  std::vector<std::string> order;
  std::map<std::string, std::vector<geom::TrackPoint>> tracks;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& id = table.rows[r][cid];
    if (!tracks.count(id)) order.push_back(id);
    tracks[id].push_back({csv::to_double(table, r, ct), csv::to_double(table, r, cu),
                          csv::to_double(table, r, cv)});
  }

  csv::Table t;
  t.header = {"track_id", "n_points", "path_length_m", "avg_speed_m_s", "max_speed_m_s",
              "entry_angle_rad"};
  for (const auto& id : order) {
    const auto est = geom::estimate_speed(tracks[id], model);
    t.rows.push_back({id, std::to_string(tracks[id].size()), fmt(est.path_length_m),
                      fmt(est.avg_speed_m_s), fmt(est.max_speed_m_s), fmt(est.entry_angle_rad)});
  }
  const auto out = analysis_dir(root) / "speeds.csv";
  write_table(out, t);

  RunManifest m;
  m.command = "speed";
  m.add_input(tracks_file, root);
  m.add_input(model_path, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "estimated speeds for " << order.size() << " tracks\n";
  return 0;
}

// ---- zone ----------------------------------------------------------------

int cmd_zone(const std::string& project, const std::string& firstdetect_file) {
  const auto root = project_root(project);
  const auto path = firstdetect_file.empty() ? analysis_dir(root) / "firstdetect.csv"
                                             : fs::path(firstdetect_file);
  const auto table = csv::read_file(path);
  const auto cr = table.column("r_m"), ca = table.column("a_rad");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  VecXd r(n), a(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    r[i] = csv::to_double(table, row, cr);
    a[i] = csv::to_double(table, row, ca);
  }
  const auto zone = geom::fit_detection_zone(r, a);
  if (zone.degenerate_angles)
    std::cerr << "warning: all detection angles are zero; effective angle is degenerate\n";

  nlohmann::json j;
  j["sigma_r_m"] = zone.sigma_r_m;
  j["sigma_a_rad"] = zone.sigma_a_rad;
  j["r_eff_m"] = zone.r_eff_m;
  j["theta_eff_rad"] = zone.theta_eff_rad;
  j["degenerate_angles"] = zone.degenerate_angles;
  j["n_points"] = static_cast<std::int64_t>(n);
  const auto out = analysis_dir(root) / "zone.json";
  std::ofstream os(out, std::ios::binary);
  os << j.dump(2) << '\n';
  os.close();

  RunManifest m;
  m.command = "zone";
  m.add_input(path, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "fitted zone: r_eff " << fmt(zone.r_eff_m) << " m, theta_eff "
            << fmt(zone.theta_eff_rad) << " rad from " << n << " detections\n";
  return 0;
}

// ---- rem ----------------------------------------------------------------

int cmd_rem(const std::string& project, const std::string& species,
            const std::string& zone_file, double speed_km_day, bool nominal) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto zone_path =
      zone_file.empty() ? analysis_dir(root) / "zone.json" : fs::path(zone_file);
  std::ifstream in(zone_path);
  if (!in) throw ValidationError("cannot open zone file: " + zone_path.string());
  nlohmann::json j;
  in >> j;
  geom::DetectionZone zone;
  zone.sigma_r_m = j.at("sigma_r_m").get<double>();
  zone.sigma_a_rad = j.at("sigma_a_rad").get<double>();
  zone.r_eff_m = j.at("r_eff_m").get<double>();
  zone.theta_eff_rad = j.at("theta_eff_rad").get<double>();

  const auto rate = stats::detection_rate(store, species, nullptr, basis_of(nominal));
  geom::RemInputs inputs;
  inputs.y = rate.y;
  inputs.t_days = rate.t;
  inputs.v_m_per_day = speed_km_day * 1000.0;
  inputs.zone = zone;
  const double density = geom::rem_density(inputs);

  csv::Table t;
  t.header = {"species", "y",       "t_days",        "v_km_day",
              "r_eff_m", "theta_eff_rad", "density_per_km2"};
  t.rows.push_back({species, std::to_string(rate.y), fmt(rate.t), fmt(speed_km_day),
                    fmt(zone.r_eff_m), fmt(zone.theta_eff_rad), fmt(density)});
  const auto out = analysis_dir(root) / ("rem_" + species + ".csv");
  write_table(out, t);

  RunManifest m;
  m.command = "rem";
  m.add_param("species", species);
  m.add_param("speed_km_day", fmt(speed_km_day));
  m.add_param("basis", nominal ? "nominal" : "effective");
  m.add_input(zone_path, root);
  hash_store_inputs(m, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "REM density " << fmt(density) << " per km^2\n";
  return 0;
}

// ---- walktests ----------------------------------------------------------------

int cmd_walktests(const std::string& project) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto monthly = stats::seasonal_detection_distance(store.walktests());

  csv::Table t;
  t.header = {"month", "n", "mean_m", "se_m"};
  for (const auto& m : monthly)
    t.rows.push_back(
        {std::to_string(m.month), std::to_string(m.n), fmt_or_na(m.mean_m), fmt_or_na(m.se_m)});
  const auto dir = analysis_dir(root);
  const auto out = dir / "walktests.csv";
  write_table(out, t);

  svg::Series s{"mean distance", {}, {}};
  for (const auto& m : monthly) {
    s.x.push_back(m.month);
    s.y.push_back(m.mean_m);
  }
  const auto chart = dir / "walktests.svg";
  svg::write_line_chart(chart, "Walk-test detection distance by month", "month", "meters", {s});

  RunManifest m;
  m.command = "walktests";
  hash_store_inputs(m, root);
  m.add_output(out, root);
  m.add_output(chart, root);
  finish_manifest(m, root);
  std::cerr << "seasonal walk-test summary over " << store.walktests().size() << " tests\n";
  return 0;
}

// ---- failures ----------------------------------------------------------------

int cmd_failures(const std::string& project) {
  const auto root = project_root(project);
  ProjectStore store = ProjectStore::open(root);
  const auto s = stats::failure_summary(store.cameras());

  csv::Table t;
  t.header = {"n_cameras", "never_failed", "n_failures",
              "lens_blur", "humidity_circuit", "other"};
  t.rows.push_back({std::to_string(s.n_cameras), fmt(s.never_failed),
                    std::to_string(s.n_failures), fmt(s.lens_blur), fmt(s.humidity_circuit),
                    fmt(s.other)});
  const auto out = analysis_dir(root) / "failures.csv";
  write_table(out, t);

  RunManifest m;
  m.command = "failures";
  hash_store_inputs(m, root);
  m.add_output(out, root);
  finish_manifest(m, root);
  std::cerr << "failure summary: " << fmt(s.never_failed * 100.0) << "% never failed\n";
  return 0;
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string project;
  double density = 10.0;
  double speed_km_day = 1.0;
  double r_eff_m = 5.0;
  double theta_eff_rad = 0.2;
  int cameras = 20;
  int deployments_per_camera = 1;
  double days = 30.0;
  double spacing_m = 50.0;
  double trail_fraction = 0.0;
  double trail_multiplier = 1.0;
  int n_species = 1;
  double geometric_ratio = 0.75;
  bool identifiable = false;
  std::string start_date = "2023-01-01";
  std::string monthly;  // 12 comma-separated multipliers
  double hazard_lens = 0.0;
  double hazard_humidity = 0.0;
  double hazard_other = 0.0;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto root = project_root(a.project);
  ProjectStore store = ProjectStore::open(root);
  store.clear();

  sim::SimConfig cfg;
  cfg.density_per_km2 = a.density;
  cfg.speed_km_day = a.speed_km_day;
  cfg.zone = sim::zone_from_effective(a.r_eff_m, a.theta_eff_rad);
  cfg.n_cameras = a.cameras;
  cfg.deployments_per_camera = a.deployments_per_camera;
  cfg.days_per_deployment = a.days;
  cfg.camera_spacing_m = a.spacing_m;
  cfg.trail_fraction = a.trail_fraction;
  cfg.start_time = parse_date(a.start_date);
  cfg.hazards = {a.hazard_lens, a.hazard_humidity, a.hazard_other};
  cfg.seed = a.seed;
  if (!a.monthly.empty()) {
    std::stringstream ss(a.monthly);
    std::string tok;
    std::size_t i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= 12) throw ValidationError("simulate: expected 12 monthly multipliers");
      cfg.monthly_r_multiplier[i++] = std::stod(tok);
    }
    if (i != 12) throw ValidationError("simulate: expected 12 monthly multipliers");
  }

  sim::CommunitySpec community = a.n_species <= 1
                                     ? sim::CommunitySpec::single("sp01")
                                     : sim::CommunitySpec::geometric(a.n_species,
                                                                     a.geometric_ratio);
  for (auto& sp : community.species) sp.trail_multiplier = a.trail_multiplier;
  if (a.identifiable) community.species.front().identifiable = true;

  std::vector<sim::FirstDetection> first;
  const auto truth = sim::simulate_community(store, cfg, community, &first);
  store.save();

  const auto dir = analysis_dir(root);
  csv::Table fd;
  fd.header = {"r_m", "a_rad"};
  for (const auto& f : first) fd.rows.push_back({fmt(f.r_m), fmt(f.a_rad)});
  const auto fd_path = dir / "firstdetect.csv";
  write_table(fd_path, fd);

  nlohmann::json j;
  j["density_per_km2"] = cfg.density_per_km2;
  j["speed_km_day"] = cfg.speed_km_day;
  j["r_eff_m"] = cfg.zone.r_eff_m;
  j["theta_eff_rad"] = cfg.zone.theta_eff_rad;
  j["encounter_rate_per_camday"] = truth.encounter_rate_per_camday;
  j["n_passages"] = truth.n_passages;
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& [sp, rate] : truth.rate_by_species) rates[sp] = rate;
  j["rate_by_species"] = rates;
  const auto truth_path = dir / "truth.json";
  std::ofstream os(truth_path, std::ios::binary);
  os << j.dump(2) << '\n';
  os.close();

  RunManifest m;
  m.command = "simulate";
  m.seed = a.seed;
  m.add_param("density_per_km2", fmt(a.density));
  m.add_param("speed_km_day", fmt(a.speed_km_day));
  m.add_param("r_eff_m", fmt(a.r_eff_m));
  m.add_param("theta_eff_rad", fmt(a.theta_eff_rad));
  m.add_param("cameras", std::to_string(a.cameras));
  m.add_param("deployments_per_camera", std::to_string(a.deployments_per_camera));
  m.add_param("days", fmt(a.days));
  m.add_param("spacing_m", fmt(a.spacing_m));
  m.add_param("trail_fraction", fmt(a.trail_fraction));
  m.add_param("trail_multiplier", fmt(a.trail_multiplier));
  m.add_param("n_species", std::to_string(a.n_species));
  m.add_param("geometric_ratio", fmt(a.geometric_ratio));
  m.add_param("identifiable", a.identifiable ? "true" : "false");
  m.add_param("start_date", a.start_date);
  if (!a.monthly.empty()) m.add_param("monthly_r_multiplier", a.monthly);
  m.add_param("hazard_lens", fmt(a.hazard_lens));
  m.add_param("hazard_humidity", fmt(a.hazard_humidity));
  m.add_param("hazard_other", fmt(a.hazard_other));
  for (const char* t : kTableFiles) m.add_output(root / t, root);
  m.add_output(fd_path, root);
  m.add_output(truth_path, root);
  finish_manifest(m, root);
  std::cerr << "simulated " << truth.n_passages << " passages across "
            << store.deployments().size() << " deployments (expected rate "
            << fmt(truth.encounter_rate_per_camday) << "/cam-day)\n";
  return 0;
}

// ---- report ----------------------------------------------------------------

int cmd_report(const std::string& project) {
  const auto root = project_root(project);
  const auto dir = analysis_dir(root);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".csv" || name == "report.csv") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("report: no analysis CSVs found under " + dir.string());

  // Plain concatenation with a source column; no recomputation.
  csv::Table out;
  out.header = {"source", "line"};
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.rows.push_back({f.filename().string(), line});
    }
  }
  const auto out_path = dir / "report.csv";
  write_table(out_path, out);

  RunManifest m;
  m.command = "report";
  for (const auto& f : files) m.add_input(f, root);
  m.add_output(out_path, root);
  finish_manifest(m, root);
  std::cerr << "report over " << files.size() << " analysis files\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camera-trap monitoring toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // --project/--threads may follow the subcommand

  std::string project;
  app.add_option("--project", project, "project directory (or CAMTRAP_PROJECT)");
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "worker threads (results do not depend on this)");

  int rc = 0;
  const auto run = [&rc](auto fn) {
    return [&rc, fn]() { rc = fn(); };
  };

  // init
  auto* c_init = app.add_subcommand("init", "create an empty project store");
  c_init->callback(run([&]() { return cmd_init(project); }));

  // ingest
  std::string manifest_file;
  auto* c_ingest = app.add_subcommand("ingest", "load an image-metadata manifest");
  c_ingest->add_option("--manifest", manifest_file, "manifest CSV")->required();
  c_ingest->callback(run([&]() { return cmd_ingest(project, manifest_file); }));

  // sequences
  double merge_s = 30.0, split_s = 2400.0;
  auto* c_seq = app.add_subcommand("sequences", "segment motion images into passage sequences");
  c_seq->add_option("--merge-s", merge_s, "merge gaps below this (seconds)");
  c_seq->add_option("--split-s", split_s, "split gaps above this (seconds)");
  c_seq->callback(run([&]() { return cmd_sequences(project, merge_s, split_s); }));

  // resolve
  std::string seq_a, seq_b, decision, operator_name, date;
  auto* c_res = app.add_subcommand("resolve", "resolve one flagged sequence boundary");
  c_res->add_option("--a", seq_a, "first sequence id")->required();
  c_res->add_option("--b", seq_b, "second sequence id")->required();
  c_res->add_option("--decision", decision, "merge or split")->required();
  c_res->add_option("--operator", operator_name, "who decided")->required();
  c_res->add_option("--date", date, "decision date YYYY-MM-DD")->required();
  c_res->add_option("--merge-s", merge_s, "merge threshold (seconds)");
  c_res->add_option("--split-s", split_s, "split threshold (seconds)");
  c_res->callback(run([&]() {
    return cmd_resolve(project, seq_a, seq_b, decision, operator_name, date, merge_s, split_s);
  }));

  // rates
  std::string species, placement;
  bool nominal = false;
  auto* c_rates = app.add_subcommand("rates", "detection rates per species");
  c_rates->add_option("--species", species, "restrict to one species");
  c_rates->add_option("--placement", placement, "restrict to random or trail placements");
  c_rates->add_flag("--nominal", nominal, "use nominal instead of effective camera-days");
  c_rates->callback(run([&]() { return cmd_rates(project, species, nominal, placement); }));

  // history
  std::string h_species;
  int granularity = 1;
  auto* c_hist = app.add_subcommand("history", "per-day detection history for one species");
  c_hist->add_option("--species", h_species, "species code")->required();
  c_hist->add_option("--granularity-days", granularity, "days per occasion bin");
  c_hist->callback(run([&]() { return cmd_history(project, h_species, granularity); }));

  // accumulation
  int resamples = 1000;
  std::uint64_t seed = 1;
  auto* c_acc = app.add_subcommand("accumulation", "species accumulation by rarefaction");
  c_acc->add_option("--resamples", resamples, "Monte Carlo resamples");
  c_acc->add_option("--seed", seed, "RNG seed");
  c_acc->callback(run([&]() { return cmd_accumulation(project, resamples, seed, threads); }));

  // effort
  std::string e_species, grid;
  int e_resamples = 1000;
  std::uint64_t e_seed = 1;
  bool e_nominal = false;
  auto* c_eff = app.add_subcommand("effort", "bootstrap rate bands vs number of deployments");
  c_eff->add_option("--species", e_species, "species code")->required();
  c_eff->add_option("--grid", grid, "comma-separated effort levels (default 1..n)");
  c_eff->add_option("--resamples", e_resamples, "bootstrap resamples");
  c_eff->add_option("--seed", e_seed, "RNG seed");
  c_eff->add_flag("--nominal", e_nominal, "use nominal camera-days");
  c_eff->callback(run([&]() {
    return cmd_effort(project, e_species, grid, e_resamples, e_seed, e_nominal, threads);
  }));

  // activity
  std::string a_species;
  int bin_minutes = 60;
  auto* c_act = app.add_subcommand("activity", "time-of-day activity histogram");
  c_act->add_option("--species", a_species, "species code")->required();
  c_act->add_option("--bin-minutes", bin_minutes, "bin width in minutes (divides 1440)");
  c_act->callback(run([&]() { return cmd_activity(project, a_species, bin_minutes); }));

  // trailbias
  std::string t_species;
  int min_detections = 10;
  bool t_nominal = false;
  auto* c_trail = app.add_subcommand("trailbias",
                                     "trail vs random placement rate ratio (quasi-Poisson)");
  c_trail->add_option("--species", t_species, "restrict to one species");
  c_trail->add_option("--min-detections", min_detections,
                      "test every species with at least this many detections");
  c_trail->add_flag("--nominal", t_nominal, "use nominal camera-days");
  c_trail->callback(run([&]() {
    return cmd_trailbias(project, t_species, min_detections, t_nominal);
  }));

  // semivariogram
  std::string s_species;
  int window_days = 61;
  double bin_width = 25.0, max_dist = 300.0;
  auto* c_svar = app.add_subcommand("semivariogram",
                                    "windowed semivariograms of per-location rates");
  c_svar->add_option("--species", s_species, "species code")->required();
  c_svar->add_option("--window-days", window_days, "time window length");
  c_svar->add_option("--bin-width", bin_width, "distance class width (meters)");
  c_svar->add_option("--max-dist", max_dist, "largest class upper bound (meters)");
  c_svar->callback(run([&]() {
    return cmd_semivariogram(project, s_species, window_days, bin_width, max_dist);
  }));

  // calibrate
  std::string points_file;
  auto* c_cal = app.add_subcommand("calibrate", "fit the image-to-ground homography");
  c_cal->add_option("--points", points_file, "calibration points CSV (u,v,X_m,Y_m)")
      ->required();
  c_cal->callback(run([&]() { return cmd_calibrate(project, points_file); }));

  // speed
  std::string tracks_file, model_file;
  auto* c_speed = app.add_subcommand("speed", "animal speed from pixel tracks");
  c_speed->add_option("--tracks", tracks_file, "tracks CSV (track_id,time_s,u,v)")->required();
  c_speed->add_option("--model", model_file, "calibration model JSON (default from calibrate)");
  c_speed->callback(run([&]() { return cmd_speed(project, tracks_file, model_file); }));

  // zone
  std::string firstdetect_file;
  auto* c_zone = app.add_subcommand("zone", "fit the effective detection zone");
  c_zone->add_option("--firstdetect", firstdetect_file,
                     "first-detection CSV (r_m,a_rad; default analysis/firstdetect.csv)");
  c_zone->callback(run([&]() { return cmd_zone(project, firstdetect_file); }));

  // rem
  std::string r_species, zone_file;
  double speed_km_day = 1.0;
  bool r_nominal = false;
  auto* c_rem = app.add_subcommand("rem", "random-encounter-model density");
  c_rem->add_option("--species", r_species, "species code")->required();
  c_rem->add_option("--zone", zone_file, "zone JSON (default analysis/zone.json)");
  c_rem->add_option("--speed-km-day", speed_km_day, "day range in km/day")->required();
  c_rem->add_flag("--nominal", r_nominal, "use nominal camera-days");
  c_rem->callback(run([&]() {
    return cmd_rem(project, r_species, zone_file, speed_km_day, r_nominal);
  }));

  // walktests
  auto* c_walk = app.add_subcommand("walktests", "seasonal walk-test distance summary");
  c_walk->callback(run([&]() { return cmd_walktests(project); }));

  // failures
  auto* c_fail = app.add_subcommand("failures", "camera failure summary");
  c_fail->callback(run([&]() { return cmd_failures(project); }));

  // simulate
  SimulateArgs sa;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic survey store");
  c_sim->add_option("--density", sa.density, "animals per km^2 (community total)");
  c_sim->add_option("--speed-km-day", sa.speed_km_day, "day range km/day");
  c_sim->add_option("--r-eff", sa.r_eff_m, "effective detection radius (m)");
  c_sim->add_option("--theta-eff", sa.theta_eff_rad, "effective detection angle (rad)");
  c_sim->add_option("--cameras", sa.cameras, "number of cameras");
  c_sim->add_option("--deployments-per-camera", sa.deployments_per_camera, "per camera");
  c_sim->add_option("--days", sa.days, "days per deployment");
  c_sim->add_option("--spacing", sa.spacing_m, "camera grid spacing (m)");
  c_sim->add_option("--trail-fraction", sa.trail_fraction, "fraction of locations on trails");
  c_sim->add_option("--trail-multiplier", sa.trail_multiplier, "rate multiplier on trails");
  c_sim->add_option("--species", sa.n_species, "community size (1 = single species)");
  c_sim->add_option("--geometric-ratio", sa.geometric_ratio, "abundance decay per rank");
  c_sim->add_flag("--identifiable", sa.identifiable, "first species carries individual ids");
  c_sim->add_option("--start-date", sa.start_date, "first deployment date (YYYY-MM-DD)");
  c_sim->add_option("--monthly-multipliers", sa.monthly,
                    "12 comma-separated radius multipliers in (0,1]");
  c_sim->add_option("--hazard-lens", sa.hazard_lens, "per-deployment lens failure probability");
  c_sim->add_option("--hazard-humidity", sa.hazard_humidity,
                    "per-deployment humidity failure probability");
  c_sim->add_option("--hazard-other", sa.hazard_other, "per-deployment other failures");
  c_sim->add_option("--seed", sa.seed, "RNG seed");
  c_sim->callback(run([&]() {
    sa.project = project;
    return cmd_simulate(sa);
  }));

  // report
  auto* c_rep = app.add_subcommand("report", "concatenate analysis CSVs into one file");
  c_rep->callback(run([&]() { return cmd_report(project); }));

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
