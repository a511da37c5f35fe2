#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "camtrap/entities.hpp"

namespace camtrap::ingest {

/// Gap thresholds for passage segmentation, in seconds. Consecutive motion
/// images closer than merge_below_s belong to one passage; gaps wider than
/// split_above_s separate passages; anything between is flagged for manual
/// review. Ties on either threshold go to the flagged side.
struct SegmentationPolicy {
  double merge_below_s = 30.0;
  double split_above_s = 2400.0;

  void validate() const;
};

/// Parses an image-metadata manifest (columns deployment_id,timestamp,
/// trigger,frame_ref in any order). Rows come back typed, trigger strings
/// trimmed and case-folded, sorted by (deployment_id, timestamp). Errors
/// report the offending line.
std::vector<ImageRecord> parse_manifest(const std::filesystem::path& path);
std::vector<ImageRecord> parse_manifest(std::istream& in, const std::string& name);

/// Variant that also checks every record against its deployment interval.
std::vector<ImageRecord> parse_manifest(const std::filesystem::path& path,
                                        std::span<const Deployment> deployments);

/// Boundary between two consecutive sequences of one deployment.
struct Boundary {
  std::size_t left;   // index into sequences
  std::size_t right;  // left + 1
  double gap_s;
  bool flagged;
};

struct Segmentation {
  std::vector<Sequence> sequences;
  std::vector<Boundary> boundaries;
};

/// Splits the motion images of a single deployment into passage sequences.
/// Input must be time-sorted motion triggers of one deployment. Sequence ids
/// are deterministic: "<deployment_id>-s0001", ...
Segmentation segment_sequences(std::span<const ImageRecord> images,
                               const SegmentationPolicy& policy);

enum class ResolveDecision { merge, split };

ResolveDecision resolve_decision_from_string(const std::string& s);
std::string to_string(ResolveDecision d);

/// Resolves one flagged boundary: merge returns the spanning sequence,
/// split returns both with status resolved_split. The pair must be adjacent
/// sequences of one deployment whose gap lies in the flagged band.
std::vector<Sequence> resolve_flagged(const Sequence& seq_a, const Sequence& seq_b,
                                      ResolveDecision decision,
                                      const SegmentationPolicy& policy);

/// One row of the append-only curation log (decisions.csv).
struct DecisionRecord {
  std::string sequence_a;
  std::string sequence_b;
  ResolveDecision decision = ResolveDecision::split;
  std::string operator_name;
  std::string date;  // YYYY-MM-DD, informational
};

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path);
void append_decision(const std::filesystem::path& path, const DecisionRecord& record);

/// Re-applies a decision log to a fresh segmentation. Decisions whose pair is
/// no longer present or no longer flagged are skipped, which makes replay
/// idempotent. Returns the number of decisions applied.
std::size_t apply_decisions(std::vector<Sequence>& sequences,
                            std::span<const DecisionRecord> log,
                            const SegmentationPolicy& policy);

}  // namespace camtrap::ingest
