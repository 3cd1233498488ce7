#pragma once

#include <iosfwd>
#include <vector>

#include "subtrack/netdata.hpp"
#include "subtrack/spectral.hpp"
#include "subtrack/types.hpp"

// Detection statistics over sliding windows of aggregated layer signal.
//
// The per-layer aggregand is A_t² - D_t for observed data (the debiased
// squared adjacency, D_t = diag(A_t 1)) and P_t² in population mode, so the
// same statistics serve both noisy detection and noiseless oracle tests.

namespace subtrack {

// A_t² - diag(A_t 1). For binary hollow A the diagonal cancels exactly.
SymMatrix debiased_square(const AdjLayer& a);

// Source of per-layer window terms; window(last, L) sums layers
// [last-L+1, last] and range-checks against [1, T].
class WindowSource {
 public:
  virtual ~WindowSource() = default;
  virtual Index node_count() const = 0;
  virtual Index layer_count() const = 0;
  virtual SymMatrix layer_term(Index t) const = 0;
  SymMatrix window(Index last, Index L) const;
};

class EmpiricalWindows final : public WindowSource {
 public:
  explicit EmpiricalWindows(const GraphSequence& g) : g_(&g) {}
  Index node_count() const override { return g_->node_count(); }
  Index layer_count() const override { return g_->layer_count(); }
  SymMatrix layer_term(Index t) const override { return debiased_square(g_->layer(t)); }

 private:
  const GraphSequence* g_;
};

class PopulationWindows final : public WindowSource {
 public:
  explicit PopulationWindows(const SegmentModel& model) : model_(&model) {}
  Index node_count() const override { return model_->node_count(); }
  Index layer_count() const override { return model_->layer_count(); }
  SymMatrix layer_term(Index t) const override { return model_->prob_square(t); }
  SymMatrix window(Index last, Index L) const { return model_->population_window(last, L); }

 private:
  const SegmentModel* model_;
};

// Σ_{t=last-L+1}^{last} (A_t² - D_t).
SymMatrix window_sum(const GraphSequence& g, Index last, Index L);

// Sliding window sum maintained incrementally (add newest term, drop oldest),
// with a from-scratch refresh every refresh_interval slides to cap drift.
class WindowAggregator {
 public:
  WindowAggregator(const WindowSource& source, Index L, Index refresh_interval = 64);

  // Positions the window at [last-L+1, last], summing from scratch.
  void seed(Index last);

  // Slides the window forward by one layer.
  void advance();

  Index position() const { return last_; }
  Index length() const { return L_; }
  const SymMatrix& value() const;

 private:
  const WindowSource* source_;
  Index L_;
  Index refresh_interval_;
  Index last_ = 0;
  Index slides_ = 0;
  Matrix sum_;
  mutable SymMatrix cached_;
  mutable bool cache_valid_ = false;
};

// ‖(V̂⊥)ᵀ W‖₂ for the backward-window statistic.
double pi_proj_hat(const SymMatrix& window, const SubspaceBasis& basis);

// rank-th largest eigenvalue of the forward window, rank 1-based in [1, n].
double pi_eig_hat(const SymMatrix& window, Index rank);

// Low-rank window estimate P̄ via eigenvalue thresholding at b.
UevtResult pbar(const SymMatrix& window, double b);

// Refinement statistics. Both need windows [l-L, l-1] and [l, l+L-1] in
// range, i.e. l in [L+1, T-L+1].
//
// pi_ref1: trace of the forward low-rank estimate outside the backward
// window's retained subspace; pi_ref2 is the mirror image.
double pi_ref1(const WindowSource& source, Index l, Index L, double b);
double pi_ref2(const WindowSource& source, Index l, Index L, double b);
double pi_ref1(const GraphSequence& g, Index l, Index L, double b);
double pi_ref2(const GraphSequence& g, Index l, Index L, double b);

struct StatRecord {
  Index l;
  double pi_proj;
  double pi_eig;
  Index segment;
  Index rank;
};

// Per-l record of both scan statistics, in scan order.
class StatTrace {
 public:
  void add(StatRecord record);
  const std::vector<StatRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  // CSV with header "l,pi_proj,pi_eig,segment,rank".
  void write_csv(std::ostream& out) const;

 private:
  std::vector<StatRecord> records_;
};

}  // namespace subtrack
