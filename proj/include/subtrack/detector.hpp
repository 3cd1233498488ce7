#pragma once

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include "subtrack/netdata.hpp"
#include "subtrack/spectral.hpp"
#include "subtrack/statistics.hpp"
#include "subtrack/types.hpp"

// Two-stage change point detector: a threshold-triggered coarse scan over
// both sliding-window statistics, then per-point refinement that localizes
// each trigger by comparing adjacent segment ranks.

namespace subtrack {

struct DetectorConfig {
  Index window = 0;            // L, layers per window
  double threshold = 0.0;      // b, eigenvalue threshold
  bool auto_tune = true;       // derive window/threshold from (n, T, rho_check)
  double proj_multiplier = 1.0 + std::numbers::sqrt2;
  Index refresh_interval = 64;  // aggregator from-scratch cadence
};

// Default tuning: L = floor(T/20) clamped to >= 1, and
// b = (L n rho² + sqrt(L) n rho sqrt(max(50, n rho))) log(n+T) / 30,
// with the plug-in sparsity estimate substituted for rho throughout.
DetectorConfig default_config(Index n, Index T, double rho_check);

// Retained basis, eigenvalues and rank from one estimation window.
struct SubspaceEstimate {
  SubspaceBasis basis;
  Vector eigenvalues;
  Index rank = 0;
};

// Thresholded subspace of the window [start+L, start+2L-1]. Throws
// DegenerateRankError when nothing survives the threshold.
SubspaceEstimate estimate_subspace(const WindowSource& source, Index start, Index L, double b);

// Sorted change point times with the estimated rank of every segment
// (ranks.size() == points.size() + 1 when all estimates were available).
struct ChangePointSet {
  std::vector<Index> points;
  std::vector<Index> ranks;
};

enum class RefineCase { rank_up, rank_down, rank_equal, unresolved };

const char* refine_case_name(RefineCase c);

struct ScanResult {
  ChangePointSet coarse;
  StatTrace trace;
  std::vector<SubspaceEstimate> subspaces;  // one per segment seen
  std::vector<std::string> warnings;
};

// Coarse scan: seed the subspace from [L+1, 2L], then walk l upward testing
// the backward-window projection statistic and the forward-window eigenvalue
// statistic; each trigger records l, re-estimates from [l+L, l+2L-1] and
// resumes at l+2L. Requires T >= 3L+1.
ScanResult scan(const WindowSource& source, const DetectorConfig& config);

struct Refinement {
  ChangePointSet refined;
  std::vector<RefineCase> cases;
  std::vector<std::array<Index, 2>> intervals;  // argmax search range per point
  std::vector<std::string> warnings;
};

// Case split on rank(V̂^(m)) vs rank(V̂^(m+1)): argmax of pi_ref1 over
// [tau-L+1, tau] when rank rises, argmax of pi_ref2 over [tau, tau+L-1] when
// it falls, and a backward search for the trigger onset followed by a
// pi_ref1 argmax when it is unchanged. Ties break to the smallest l and all
// intervals are clipped to [L+1, T-L+1].
Refinement refine(const WindowSource& source, const ScanResult& scan_result,
                  const DetectorConfig& config);

struct DetectionReport {
  DetectorConfig config;
  ChangePointSet coarse;
  ChangePointSet refined;
  std::vector<RefineCase> cases;
  std::vector<std::array<Index, 2>> intervals;
  StatTrace trace;
  std::vector<std::string> warnings;
  std::string trace_csv_path;  // set by callers that export the trace
};

// Full pipeline over any window source; config must be concrete.
DetectionReport detect(const WindowSource& source, const DetectorConfig& config);

// Observed-data entry point; auto-tunes via the plug-in sparsity estimate
// unless the config carries explicit window/threshold values.
DetectionReport detect(const GraphSequence& g,
                       const DetectorConfig& config = DetectorConfig{});

// subtrack-report-v1 JSON.
std::string report_to_json(const DetectionReport& report);

}  // namespace subtrack
