#include "camtrap/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>

#include "camtrap/csv.hpp"
#include "camtrap/error.hpp"

namespace camtrap::ingest {

void SegmentationPolicy::validate() const {
  if (!(merge_below_s > 0.0) || !(merge_below_s < split_above_s)) {
    throw ValidationError("segmentation policy requires 0 < merge_below_s < split_above_s");
  }
}

namespace {

std::string normalize_token(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

const std::vector<std::string> kManifestColumns = {"deployment_id", "timestamp", "trigger",
                                                   "frame_ref"};

}  // namespace

std::vector<ImageRecord> parse_manifest(std::istream& in, const std::string& name) {
  csv::Table t = csv::read_stream(in, name);

  // Bit-exact column set; order free.
  for (const auto& col : t.header) {
    if (std::find(kManifestColumns.begin(), kManifestColumns.end(), col) ==
        kManifestColumns.end()) {
      throw ValidationError(name + ": unknown column '" + col + "'");
    }
  }
  for (const auto& col : kManifestColumns) {
    if (!t.has_column(col)) {
      throw ValidationError(name + ": missing column '" + col + "'");
    }
  }

  const std::size_t c_dep = t.column("deployment_id");
  const std::size_t c_ts = t.column("timestamp");
  const std::size_t c_trig = t.column("trigger");
  const std::size_t c_ref = t.column("frame_ref");

  std::vector<ImageRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    ImageRecord r;
    r.deployment_id = t.rows[i][c_dep];
    if (r.deployment_id.empty()) {
      throw ValidationError(name + ": line " + std::to_string(i + 2) +
                            ": empty deployment_id");
    }
    try {
      r.timestamp = parse_utc(t.rows[i][c_ts]);
      r.trigger = trigger_from_string(normalize_token(t.rows[i][c_trig]));
    } catch (const ValidationError& e) {
      throw ValidationError(name + ": line " + std::to_string(i + 2) + ": " + e.what());
    }
    r.frame_ref = t.rows[i][c_ref];
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const ImageRecord& a, const ImageRecord& b) {
    if (a.deployment_id != b.deployment_id) return a.deployment_id < b.deployment_id;
    return a.timestamp < b.timestamp;
  });
  return out;
}

std::vector<ImageRecord> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return parse_manifest(in, path.filename().string());
}

std::vector<ImageRecord> parse_manifest(const std::filesystem::path& path,
                                        std::span<const Deployment> deployments) {
  auto records = parse_manifest(path);
  std::map<std::string, const Deployment*> by_id;
  for (const auto& d : deployments) by_id[d.deployment_id] = &d;
  for (const auto& r : records) {
    auto it = by_id.find(r.deployment_id);
    if (it == by_id.end()) {
      throw ValidationError(path.filename().string() + ": unknown deployment '" +
                            r.deployment_id + "'");
    }
    if (r.timestamp < it->second->start || r.timestamp > it->second->end) {
      throw ValidationError(path.filename().string() + ": image at " +
                            format_utc(r.timestamp) + " outside deployment '" +
                            r.deployment_id + "' interval [" + format_utc(it->second->start) +
                            ", " + format_utc(it->second->end) + "]");
    }
  }
  return records;
}

Segmentation segment_sequences(std::span<const ImageRecord> images,
                               const SegmentationPolicy& policy) {
  policy.validate();
  Segmentation out;
  if (images.empty()) return out;

  const std::string& dep = images.front().deployment_id;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].trigger != Trigger::motion) {
      throw ValidationError("segment_sequences: input contains a non-motion trigger");
    }
    if (images[i].deployment_id != dep) {
      throw ValidationError("segment_sequences: images from multiple deployments ('" + dep +
                            "' and '" + images[i].deployment_id + "')");
    }
    if (i > 0 && images[i].timestamp < images[i - 1].timestamp) {
      throw ValidationError("segment_sequences: input not sorted by timestamp");
    }
  }

  // First pass: cut at every gap >= merge_below_s, remembering whether the
  // cut is a clean split (> split_above_s) or a flagged boundary.
  struct Cut {
    std::size_t first;  // index of first image
    std::size_t last;   // inclusive
  };
  std::vector<Cut> runs;
  std::vector<bool> flagged_after;  // boundary between runs[i] and runs[i+1]
  std::size_t first = 0;
  for (std::size_t i = 1; i < images.size(); ++i) {
    double gap = static_cast<double>(images[i].timestamp - images[i - 1].timestamp);
    if (gap < policy.merge_below_s) continue;
    runs.push_back({first, i - 1});
    flagged_after.push_back(gap <= policy.split_above_s);
    first = i;
  }
  runs.push_back({first, images.size() - 1});

  char idbuf[24];
  for (std::size_t k = 0; k < runs.size(); ++k) {
    Sequence s;
    std::snprintf(idbuf, sizeof(idbuf), "-s%04zu", k + 1);
    s.sequence_id = dep + idbuf;
    s.deployment_id = dep;
    s.start = images[runs[k].first].timestamp;
    s.end = images[runs[k].last].timestamp;
    s.image_count = static_cast<int>(runs[k].last - runs[k].first + 1);
    bool flagged = (k > 0 && flagged_after[k - 1]) || (k < flagged_after.size() && flagged_after[k]);
    s.status = flagged ? SequenceStatus::flagged : SequenceStatus::auto_;
    out.sequences.push_back(std::move(s));
  }
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    double gap = static_cast<double>(images[runs[k + 1].first].timestamp -
                                     images[runs[k].last].timestamp);
    out.boundaries.push_back({k, k + 1, gap, flagged_after[k]});
  }
  return out;
}

ResolveDecision resolve_decision_from_string(const std::string& s) {
  if (s == "merge") return ResolveDecision::merge;
  if (s == "split") return ResolveDecision::split;
  throw ValidationError("invalid decision: '" + s + "' (expected merge or split)");
}

std::string to_string(ResolveDecision d) {
  return d == ResolveDecision::merge ? "merge" : "split";
}

std::vector<Sequence> resolve_flagged(const Sequence& seq_a, const Sequence& seq_b,
                                      ResolveDecision decision,
                                      const SegmentationPolicy& policy) {
  policy.validate();
  if (seq_a.deployment_id != seq_b.deployment_id || seq_a.end > seq_b.start) {
    throw ValidationError("resolve_flagged: sequences '" + seq_a.sequence_id + "' and '" +
                          seq_b.sequence_id + "' are not adjacent");
  }
  double gap = static_cast<double>(seq_b.start - seq_a.end);
  bool in_band = gap >= policy.merge_below_s && gap <= policy.split_above_s;
  bool both_flagged = seq_a.status == SequenceStatus::flagged &&
                      seq_b.status == SequenceStatus::flagged;
  if (!in_band || !both_flagged) {
    throw ValidationError("resolve_flagged: boundary not flagged between '" +
                          seq_a.sequence_id + "' and '" + seq_b.sequence_id + "'");
  }
  if (decision == ResolveDecision::merge) {
    Sequence merged = seq_a;
    merged.end = seq_b.end;
    merged.image_count = seq_a.image_count + seq_b.image_count;
    merged.status = SequenceStatus::resolved_merge;
    return {merged};
  }
  Sequence a = seq_a;
  Sequence b = seq_b;
  a.status = SequenceStatus::resolved_split;
  b.status = SequenceStatus::resolved_split;
  return {a, b};
}

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path) {
  std::vector<DecisionRecord> out;
  if (!std::filesystem::exists(path)) return out;
  csv::Table t = csv::read_file(path);
  std::vector<std::string> expected = {"sequence_a", "sequence_b", "decision", "operator",
                                       "date"};
  if (t.header != expected) {
    throw ValidationError(t.name + ": unexpected header (expected "
                          "'sequence_a,sequence_b,decision,operator,date')");
  }
  for (const auto& row : t.rows) {
    DecisionRecord r;
    r.sequence_a = row[0];
    r.sequence_b = row[1];
    r.decision = resolve_decision_from_string(row[2]);
    r.operator_name = row[3];
    r.date = row[4];
    out.push_back(std::move(r));
  }
  return out;
}

void append_decision(const std::filesystem::path& path, const DecisionRecord& record) {
  csv::Table t;
  t.name = path.filename().string();
  t.header = {"sequence_a", "sequence_b", "decision", "operator", "date"};
  if (std::filesystem::exists(path)) {
    t.rows.reserve(16);
    for (const auto& r : read_decision_log(path)) {
      t.rows.push_back({r.sequence_a, r.sequence_b, to_string(r.decision), r.operator_name,
                        r.date});
    }
  }
  t.rows.push_back({record.sequence_a, record.sequence_b, to_string(record.decision),
                    record.operator_name, record.date});
  csv::write_file(path, t);
}

std::size_t apply_decisions(std::vector<Sequence>& sequences,
                            std::span<const DecisionRecord> log,
                            const SegmentationPolicy& policy) {
  std::size_t applied = 0;
  for (const auto& rec : log) {
    auto it_a = std::find_if(sequences.begin(), sequences.end(), [&](const Sequence& s) {
      return s.sequence_id == rec.sequence_a;
    });
    auto it_b = std::find_if(sequences.begin(), sequences.end(), [&](const Sequence& s) {
      return s.sequence_id == rec.sequence_b;
    });
    if (it_a == sequences.end() || it_b == sequences.end()) continue;
    // The pair must be consecutive in time within its deployment.
    bool intervening = std::any_of(sequences.begin(), sequences.end(), [&](const Sequence& s) {
      return s.deployment_id == it_a->deployment_id && s.start > it_a->end &&
             s.end < it_b->start;
    });
    if (intervening) continue;
    std::vector<Sequence> replacement;
    try {
      replacement = resolve_flagged(*it_a, *it_b, rec.decision, policy);
    } catch (const ValidationError&) {
      continue;  // already resolved or no longer flagged: replay is a no-op
    }
    // Indices may shift; recompute after the erase.
    std::size_t pos = static_cast<std::size_t>(it_a - sequences.begin());
    sequences.erase(std::remove_if(sequences.begin(), sequences.end(),
                                   [&](const Sequence& s) {
                                     return s.sequence_id == rec.sequence_a ||
                                            s.sequence_id == rec.sequence_b;
                                   }),
                    sequences.end());
    sequences.insert(sequences.begin() + static_cast<std::ptrdiff_t>(pos),
                     replacement.begin(), replacement.end());
    ++applied;
  }
  return applied;
}

}  // namespace camtrap::ingest
