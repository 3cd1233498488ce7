#include "subtrack/statistics.hpp"

#include <ostream>
#include <string>
#include <utility>

#include "subtrack/errors.hpp"
#include "subtrack/io_util.hpp"

namespace subtrack {

SymMatrix debiased_square(const AdjLayer& a) {
  const Matrix dense = a.cast<double>();
  Matrix squared = dense * dense;
  squared.diagonal() -= dense.rowwise().sum();
  return SymMatrix(std::move(squared));
}

SymMatrix WindowSource::window(Index last, Index L) const {
  const Index first = last - L + 1;
  if (L < 1 || first < 1 || last > layer_count()) {
    throw RangeError("window: [" + std::to_string(first) + "," + std::to_string(last) +
                     "] out of [1," + std::to_string(layer_count()) + "]");
  }
  Matrix sum = Matrix::Zero(node_count(), node_count());
  for (Index t = first; t <= last; ++t) {
    sum += layer_term(t).dense();
  }
  return SymMatrix(std::move(sum));
}

SymMatrix window_sum(const GraphSequence& g, Index last, Index L) {
  return EmpiricalWindows(g).window(last, L);
}

WindowAggregator::WindowAggregator(const WindowSource& source, Index L, Index refresh_interval)
    : source_(&source),
      L_(L),
      refresh_interval_(refresh_interval),
      cached_(SymMatrix::zero(source.node_count())) {
  if (L < 1) {
    throw ValidationError("WindowAggregator: window length must be >= 1");
  }
  if (refresh_interval_ < 1) {
    refresh_interval_ = 1;
  }
}

void WindowAggregator::seed(Index last) {
  sum_ = source_->window(last, L_).dense();
  last_ = last;
  slides_ = 0;
  cache_valid_ = false;
}

void WindowAggregator::advance() {
  if (last_ == 0) {
    throw ValidationError("WindowAggregator: advance before seed");
  }
  const Index next = last_ + 1;
  if (next > source_->layer_count()) {
    throw RangeError("WindowAggregator: slid past the last layer");
  }
  ++slides_;
  if (slides_ % refresh_interval_ == 0) {
    seed(next);
    return;
  }
  sum_ += source_->layer_term(next).dense();
  sum_ -= source_->layer_term(next - L_).dense();
  last_ = next;
  cache_valid_ = false;
}

const SymMatrix& WindowAggregator::value() const {
  if (last_ == 0) {
    throw ValidationError("WindowAggregator: value before seed");
  }
  if (!cache_valid_) {
    cached_ = SymMatrix(sum_);
    cache_valid_ = true;
  }
  return cached_;
}

double pi_proj_hat(const SymMatrix& window, const SubspaceBasis& basis) {
  return proj_residual_norm(basis, window);
}

double pi_eig_hat(const SymMatrix& window, Index rank) {
  if (rank < 1 || rank > window.n()) {
    throw ValidationError("pi_eig_hat: rank " + std::to_string(rank) + " out of [1," +
                          std::to_string(window.n()) + "]");
  }
  return sym_eigenvalues(window)(rank - 1);
}

UevtResult pbar(const SymMatrix& window, double b) { return uevt(window, b); }

namespace {

void check_refine_range(const WindowSource& source, Index l, Index L) {
  if (l - L < 1 || l + L - 1 > source.layer_count()) {
    throw RangeError("refinement statistic at l=" + std::to_string(l) +
                     " needs layers [l-L, l+L-1] within [1," +
                     std::to_string(source.layer_count()) + "]");
  }
}

}  // namespace

double pi_ref1(const WindowSource& source, Index l, Index L, double b) {
  check_refine_range(source, l, L);
  const UevtResult backward = uevt(source.window(l - 1, L), b);
  const UevtResult forward_est = pbar(source.window(l + L - 1, L), b);
  return proj_residual_trace(backward.basis, forward_est.approx);
}

double pi_ref2(const WindowSource& source, Index l, Index L, double b) {
  check_refine_range(source, l, L);
  const UevtResult forward = uevt(source.window(l + L - 1, L), b);
  const UevtResult backward_est = pbar(source.window(l - 1, L), b);
  return proj_residual_trace(forward.basis, backward_est.approx);
}

double pi_ref1(const GraphSequence& g, Index l, Index L, double b) {
  return pi_ref1(EmpiricalWindows(g), l, L, b);
}

double pi_ref2(const GraphSequence& g, Index l, Index L, double b) {
  return pi_ref2(EmpiricalWindows(g), l, L, b);
}

void StatTrace::add(StatRecord record) {
  if (!records_.empty() && record.l <= records_.back().l) {
    throw ValidationError("StatTrace: l values must be strictly increasing");
  }
  records_.push_back(record);
}

void StatTrace::write_csv(std::ostream& out) const {
  out << "l,pi_proj,pi_eig,segment,rank\n";
  for (const StatRecord& r : records_) {
    out << r.l << "," << format_double(r.pi_proj) << "," << format_double(r.pi_eig) << ","
        << r.segment << "," << r.rank << "\n";
  }
}

}  // namespace subtrack
