#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subtrack/generator.hpp"
#include "subtrack/netdata.hpp"
#include "subtrack/spectral.hpp"
#include "subtrack/types.hpp"

// Metrics and the replication harness: count error and Hausdorff distance
// between change point sets, seeded Monte-Carlo benchmark runs over the
// scenario grids, and the post-hoc community summaries.

namespace subtrack {

struct HausdorffResult {
  double value = 0.0;
  bool empty_penalty = false;  // exactly one side was empty
};

// max over both directions of the nearest-neighbor distance. Conventions for
// empty inputs: both empty -> 0; exactly one empty -> max(horizon-1, 1) with
// the penalty flagged.
HausdorffResult hausdorff(const std::vector<Index>& a, const std::vector<Index>& b,
                          Index horizon);

Index count_error(const std::vector<Index>& a, const std::vector<Index>& b);

struct MetricRow {
  std::string scenario;
  std::string param_name;
  double param_value = 0.0;
  std::string method;  // "coarse" or "refined"
  double count_mean = 0.0;
  double count_se = 0.0;
  double haus_mean = 0.0;
  double haus_se = 0.0;
  Index reps = 0;      // replications aggregated
  Index failures = 0;  // replications excluded due to detector errors
};

// One benchmark scenario: fixed sizes, one varying parameter.
struct ReplicationPlan {
  std::string scenario;
  std::string param_name;  // "s", "q" or "rho"
  ScenarioParams base;
  std::vector<double> param_values;
};

// Presets: scenario 1 varies s in {1/10, 1/15, 1/20}; scenario 2 varies q in
// {0.3, 0.2, 0.1}; scenario 3 varies rho in {80/n, 50/n, 30/n}.
ReplicationPlan scenario_plan(int scenario_number, Index n, Index T);

// Runs generate -> detect -> metrics R times per grid cell with independent
// substream seeds and aggregates mean and standard error (sample sd / sqrt(R);
// zero when R == 1). Two rows per cell: coarse and refined.
std::vector<MetricRow> run_replications(const ReplicationPlan& plan, Index R,
                                        std::uint64_t master_seed);

std::string metrics_to_csv(const std::vector<MetricRow>& rows);
std::string metrics_to_json(const std::vector<MetricRow>& rows);

// Average internal density per community over layers [t0, t1): total intra-
// community edge indicators over ordered pairs, normalized by pair count and
// interval length, so a complete community scores 1.
std::vector<double> internal_density(const GraphSequence& g, const std::vector<Index>& labels,
                                     Index t0, Index t1);

struct KappaResult {
  std::vector<std::vector<double>> per_community;  // one multiset per community
  Index skipped = 0;  // pairs with undefined kappa (no expected-agreement variance)
};

// Cohen's kappa between the neighborhood indicator vectors of every
// intra-community node pair, coordinates (t, v) with v excluding both nodes.
KappaResult cohen_kappa_pairs(const GraphSequence& g, const std::vector<Index>& labels,
                              Index t0, Index t1);

// k-partition of the nodes by iterative centroid assignment on the basis
// rows: seeded random initialization, at most 100 iterations, ties to the
// lowest centroid index, up to 10 restarts on an empty cluster.
std::vector<Index> cluster_memberships(const SubspaceBasis& basis, Index k,
                                       std::uint64_t seed);

}  // namespace subtrack
