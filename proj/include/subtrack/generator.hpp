#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "subtrack/netdata.hpp"
#include "subtrack/spectral.hpp"
#include "subtrack/types.hpp"

// Dynamic stochastic block model simulator with ground truth: the three
// benchmark scenarios (varying minimum segment length, change magnitude and
// sparsity) plus a four-segment toy sequence whose ranks fall, rise and then
// hold while the basis moves.

namespace subtrack {

struct ScenarioParams {
  Index n = 100;
  Index T = 200;
  double s = 0.1;   // first change at floor(s*T); s in (0, 1/4]
  double q = 0.5;   // fraction of nodes reassigned at the first change
  double rho = 1.0; // global sparsity scale, in (0, 1]
  std::uint64_t seed = 0;
};

// Everything the evaluation harness needs about a generated sequence: the
// population model, per-segment community labels and the per-layer
// connectivity coin.
struct GroundTruth {
  SegmentModel model;
  std::vector<std::vector<Index>> memberships;  // per segment: label per node
  std::vector<int> b_choice;                    // per layer: 0/1, -1 if n/a

  const std::vector<Index>& change_points() const { return model.change_points(); }
  std::vector<Index> segment_ranks() const;
};

// The two 3x3 connectivity matrices (which == 0 or 1); the middle scenario
// segment uses their upper-left 2x2 blocks.
Matrix scenario_connectivity(int which);

// Orthonormal basis of a one-hot membership: indicator columns scaled by
// 1/sqrt(cluster size). Throws ValidationError on an empty cluster.
SubspaceBasis membership_basis(const std::vector<Index>& labels, Index cluster_count);

// Samples every layer of the model edgewise: independent Bernoulli(P_t(i,j))
// for i < j, symmetrized, hollow. One RNG substream per layer.
GraphSequence sample_sequence(const SegmentModel& model, std::uint64_t seed);

// Three change points at {floor(sT), floor(T/2), floor(3T/4)}; memberships
// move 1 -> 2 by reassigning a q-fraction of nodes, 2 -> 3 by dissolving the
// smallest cluster, and segment 4 restores the segment-2 membership.
std::pair<GroundTruth, GraphSequence> build_scenario(const ScenarioParams& params);

// Four-segment block model with ranks 3/2/3/3 and changes at
// {T/4+1, T/2+1, 3T/4+1}: the first two clusters merge, then split along a
// shifted partition, then the partition shifts again at equal rank. Block
// densities drift sinusoidally so P_t changes every layer. Requires n
// divisible by 20.
std::pair<GroundTruth, GraphSequence> build_toy(std::uint64_t seed = 0, Index n = 100,
                                                Index T = 400);

// Σ_{t=last-L+1}^{last} P_t² from the ground-truth model.
SymMatrix population_window(const GroundTruth& truth, Index last, Index L);

}  // namespace subtrack
