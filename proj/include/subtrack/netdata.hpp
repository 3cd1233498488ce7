#pragma once

#include <iosfwd>
#include <vector>

#include "subtrack/spectral.hpp"
#include "subtrack/types.hpp"

// Dynamic-network data: adjacency sequences, the DNET v1 text format, and
// the piecewise low-rank population model behind them.
//
// Node and time indices are 1-based in files and in every time-indexed API;
// matrix storage is 0-based.

namespace subtrack {

// Undirected edge of layer t between nodes i and j, all 1-based.
struct Edge {
  Index t;
  Index i;
  Index j;
};

// Ordered sequence of symmetric binary hollow adjacency matrices on a fixed
// node set. Immutable after construction.
class GraphSequence {
 public:
  // Validates and symmetrizes; duplicate edges are idempotent. Throws
  // ValidationError on self-loops or out-of-range indices.
  GraphSequence(Index n, Index T, const std::vector<Edge>& edges);

  // Adopts prebuilt layers; each must be n x n, binary, symmetric, hollow.
  explicit GraphSequence(std::vector<AdjLayer> layers);

  Index node_count() const { return n_; }
  Index layer_count() const { return static_cast<Index>(layers_.size()); }

  // t is 1-based.
  const AdjLayer& layer(Index t) const;

  // Edges sorted by (t, i, j) with i < j, 1-based.
  std::vector<Edge> canonical_edges() const;

 private:
  Index n_;
  std::vector<AdjLayer> layers_;
};

// Parses the DNET v1 text format:
//   dnet v1 n=<int> T=<int>
//   <t> <i> <j>
// Comment lines start with '#'; blank lines are ignored; LF or CRLF.
GraphSequence parse_graph_sequence(std::istream& input);

// Canonical DNET v1 serialization (header + edges sorted by (t, i, j)).
void serialize_graph_sequence(const GraphSequence& g, std::ostream& out);

// Plug-in sparsity estimate: max over node pairs i < j of the time-averaged
// edge indicator.
double sequence_sparsity_estimate(const GraphSequence& g);

// Piecewise low-rank population model: P_t = rho * V^(k) M_t (V^(k))ᵀ on the
// segment [tau_{k-1}, tau_k), with the subspace V^(k) fixed per segment and
// the full-rank core M_t free to drift every layer.
class SegmentModel {
 public:
  // change_points: strictly increasing, interior to (1, T), 1-based; each is
  // the first layer of its new segment. bases: one per segment. cores: one
  // symmetric full-rank R_k x R_k matrix per layer t in [1, T].
  SegmentModel(Index n, Index T, double rho, std::vector<Index> change_points,
               std::vector<SubspaceBasis> bases, std::vector<Matrix> cores);

  Index node_count() const { return n_; }
  Index layer_count() const { return T_; }
  double rho() const { return rho_; }
  const std::vector<Index>& change_points() const { return change_points_; }
  Index segment_count() const { return static_cast<Index>(bases_.size()); }

  // 0-based segment index of 1-based layer t.
  Index segment_of(Index t) const;

  const SubspaceBasis& basis(Index segment) const { return bases_.at(segment); }
  Index segment_rank(Index segment) const { return bases_.at(segment).rank(); }
  const Matrix& core(Index t) const;

  // rho * V M_t Vᵀ; entries are guaranteed to lie in [0,1].
  Matrix prob_matrix(Index t) const;

  // P_t² = rho² V M_t² Vᵀ.
  SymMatrix prob_square(Index t) const;

  // Σ_{t=last-L+1}^{last} P_t², grouped by segment so each segment costs one
  // n x R product chain.
  SymMatrix population_window(Index last, Index L) const;

 private:
  Index n_;
  Index T_;
  double rho_;
  std::vector<Index> change_points_;
  std::vector<SubspaceBasis> bases_;
  std::vector<Matrix> cores_;
};

}  // namespace subtrack
