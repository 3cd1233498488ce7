#include "subtrack/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "subtrack/errors.hpp"

namespace subtrack {

namespace {

void require_concrete(const DetectorConfig& config, const WindowSource& source) {
  if (config.window < 1) {
    throw ValidationError("detector: window length must be >= 1");
  }
  if (!(config.threshold >= 0.0) || !std::isfinite(config.threshold)) {
    throw ValidationError("detector: threshold must be finite and >= 0");
  }
  if (config.proj_multiplier < 1.0) {
    throw ValidationError("detector: proj_multiplier must be >= 1");
  }
  if (source.layer_count() < 3 * config.window + 1) {
    throw ValidationError("detector: need T >= 3L+1 layers, got T=" +
                          std::to_string(source.layer_count()) + " with L=" +
                          std::to_string(config.window));
  }
}

}  // namespace

DetectorConfig default_config(Index n, Index T, double rho_check) {
  if (n < 2 || T < 1) {
    throw ValidationError("default_config: need n >= 2 and T >= 1");
  }
  if (!(rho_check >= 0.0 && rho_check <= 1.0)) {
    throw ValidationError("default_config: rho_check must lie in [0,1]");
  }
  DetectorConfig config;
  config.window = std::max<Index>(1, T / 20);
  const double nd = static_cast<double>(n);
  const double L = static_cast<double>(config.window);
  config.threshold = (L * nd * rho_check * rho_check +
                      std::sqrt(L) * nd * rho_check * std::sqrt(std::max(50.0, nd * rho_check))) *
                     std::log(static_cast<double>(n + T)) / 30.0;
  config.auto_tune = false;
  return config;
}

SubspaceEstimate estimate_subspace(const WindowSource& source, Index start, Index L, double b) {
  const SymMatrix window = source.window(start + 2 * L - 1, L);
  const EigenDecomp decomp = sym_eig(window);
  Index kept = 0;
  while (kept < decomp.values.size() && decomp.values(kept) > b) {
    ++kept;
  }
  if (kept == 0) {
    throw DegenerateRankError("subspace estimate over [" + std::to_string(start + L) + "," +
                              std::to_string(start + 2 * L - 1) +
                              "] retained rank 0 at threshold " + std::to_string(b));
  }
  return SubspaceEstimate{SubspaceBasis(decomp.vectors.leftCols(kept)),
                          decomp.values.head(kept), kept};
}

const char* refine_case_name(RefineCase c) {
  switch (c) {
    case RefineCase::rank_up:
      return "rank-up";
    case RefineCase::rank_down:
      return "rank-down";
    case RefineCase::rank_equal:
      return "rank-equal";
    default:
      return "unresolved";
  }
}

ScanResult scan(const WindowSource& source, const DetectorConfig& config) {
  require_concrete(config, source);
  const Index L = config.window;
  const double b = config.threshold;
  const Index T = source.layer_count();

  ScanResult result;
  result.subspaces.push_back(estimate_subspace(source, 1, L, b));

  WindowAggregator backward(source, L, config.refresh_interval);
  WindowAggregator forward(source, L, config.refresh_interval);

  Index l = 2 * L + 1;
  bool reseed = true;
  while (l <= T - L) {
    if (reseed) {
      backward.seed(l);
      forward.seed(l + L - 1);
      reseed = false;
    }
    const SubspaceEstimate& current = result.subspaces.back();
    const Index segment = static_cast<Index>(result.subspaces.size()) - 1;
    // Eigenvalue drop is evaluated before the projection rise; the trigger
    // itself is the disjunction, recorded once.
    const double eig_stat = pi_eig_hat(forward.value(), current.rank);
    const double proj_stat = pi_proj_hat(backward.value(), current.basis);
    result.trace.add(StatRecord{l, proj_stat, eig_stat, segment, current.rank});
    const bool triggered = (eig_stat < b) || (proj_stat > config.proj_multiplier * b);
    if (triggered) {
      result.coarse.points.push_back(l);
      if (l + 2 * L - 1 > T) {
        result.warnings.push_back(
            "trigger at l=" + std::to_string(l) +
            " left fewer than 2L layers; scan terminated without re-estimating");
        break;
      }
      result.subspaces.push_back(estimate_subspace(source, l, L, b));
      l += 2 * L;
      reseed = true;
    } else {
      ++l;
      if (l <= T - L) {
        backward.advance();
        forward.advance();
      }
    }
  }

  result.coarse.ranks.reserve(result.subspaces.size());
  for (const SubspaceEstimate& estimate : result.subspaces) {
    result.coarse.ranks.push_back(estimate.rank);
  }
  return result;
}

namespace {

template <typename Stat>
Index argmax_smallest(Index lo, Index hi, Stat&& stat) {
  Index best_l = lo;
  double best = -std::numeric_limits<double>::infinity();
  for (Index l = lo; l <= hi; ++l) {
    const double value = stat(l);
    if (value > best) {
      best = value;
      best_l = l;
    }
  }
  return best_l;
}

}  // namespace

Refinement refine(const WindowSource& source, const ScanResult& scan_result,
                  const DetectorConfig& config) {
  require_concrete(config, source);
  const Index L = config.window;
  const double b = config.threshold;
  const Index T = source.layer_count();
  const Index lo_clip = L + 1;
  const Index hi_clip = T - L + 1;

  Refinement refinement;
  refinement.refined.ranks = scan_result.coarse.ranks;

  Index prev_refined = 0;
  for (std::size_t m = 0; m < scan_result.coarse.points.size(); ++m) {
    const Index tau = scan_result.coarse.points[m];
    if (m + 1 >= scan_result.subspaces.size()) {
      // Scan terminated before the post-change subspace could be estimated.
      refinement.refined.points.push_back(tau);
      refinement.cases.push_back(RefineCase::unresolved);
      refinement.intervals.push_back({tau, tau});
      refinement.warnings.push_back("no post-change subspace for point at l=" +
                                    std::to_string(tau) + "; kept the coarse estimate");
      prev_refined = tau;
      continue;
    }
    const SubspaceEstimate& before = scan_result.subspaces[m];
    const SubspaceEstimate& after = scan_result.subspaces[m + 1];

    Index lo = 0;
    Index hi = 0;
    RefineCase refine_case;
    bool use_ref1 = true;
    if (before.rank < after.rank) {
      refine_case = RefineCase::rank_up;
      lo = tau - L + 1;
      hi = tau;
    } else if (before.rank > after.rank) {
      refine_case = RefineCase::rank_down;
      lo = tau;
      hi = tau + L - 1;
      use_ref1 = false;
    } else {
      refine_case = RefineCase::rank_equal;
      // Walk backward to the first l where the forward window still projects
      // outside the post-change subspace; the change onset lies at or after it.
      Index onset = 0;
      const Index floor_l = std::max<Index>(prev_refined + 1, 1);
      for (Index l = tau - 1; l >= floor_l; --l) {
        const double stat = pi_proj_hat(source.window(l + L - 1, L), after.basis);
        if (stat > config.proj_multiplier * b) {
          onset = l;
          break;
        }
      }
      if (onset == 0) {
        onset = std::max<Index>(prev_refined + 1, tau - 2 * L + 1);
        refinement.warnings.push_back("backward search below l=" + std::to_string(tau) +
                                      " found no onset; falling back to l=" +
                                      std::to_string(onset));
      }
      lo = onset;
      hi = tau;
    }

    lo = std::max(lo, lo_clip);
    hi = std::min(hi, hi_clip);
    if (lo > hi) {
      lo = hi = std::clamp(tau, lo_clip, hi_clip);
    }
    const Index refined_tau =
        use_ref1 ? argmax_smallest(lo, hi, [&](Index l) { return pi_ref1(source, l, L, b); })
                 : argmax_smallest(lo, hi, [&](Index l) { return pi_ref2(source, l, L, b); });
    refinement.refined.points.push_back(refined_tau);
    refinement.cases.push_back(refine_case);
    refinement.intervals.push_back({lo, hi});
    prev_refined = refined_tau;
  }
  return refinement;
}

DetectionReport detect(const WindowSource& source, const DetectorConfig& config) {
  ScanResult scanned = scan(source, config);
  Refinement refinement = refine(source, scanned, config);

  DetectionReport report;
  report.config = config;
  report.coarse = std::move(scanned.coarse);
  report.refined = std::move(refinement.refined);
  report.cases = std::move(refinement.cases);
  report.intervals = std::move(refinement.intervals);
  report.trace = std::move(scanned.trace);
  report.warnings = std::move(scanned.warnings);
  report.warnings.insert(report.warnings.end(), refinement.warnings.begin(),
                         refinement.warnings.end());
  return report;
}

DetectionReport detect(const GraphSequence& g, const DetectorConfig& config) {
  DetectorConfig effective = config;
  if (config.auto_tune) {
    const DetectorConfig tuned =
        default_config(g.node_count(), g.layer_count(), sequence_sparsity_estimate(g));
    effective.window = tuned.window;
    effective.threshold = tuned.threshold;
    effective.auto_tune = false;
  }
  return detect(EmpiricalWindows(g), effective);
}

std::string report_to_json(const DetectionReport& report) {
  nlohmann::json j;
  j["schema"] = "subtrack-report-v1";
  j["config"] = {{"window", report.config.window},
                 {"threshold", report.config.threshold},
                 {"auto_tune", report.config.auto_tune},
                 {"proj_multiplier", report.config.proj_multiplier},
                 {"refresh_interval", report.config.refresh_interval}};
  // Changes inside [1, 2L] precede the first testable window.
  j["blind_spot_end"] = 2 * report.config.window;
  j["coarse_points"] = report.coarse.points;
  j["refined_points"] = report.refined.points;
  j["segment_ranks"] = report.refined.ranks;
  std::vector<std::string> case_names;
  case_names.reserve(report.cases.size());
  for (RefineCase c : report.cases) {
    case_names.emplace_back(refine_case_name(c));
  }
  j["cases"] = case_names;
  j["search_intervals"] = report.intervals;
  j["warnings"] = report.warnings;
  if (!report.trace_csv_path.empty()) {
    j["trace_csv_path"] = report.trace_csv_path;
  }
  return j.dump(2) + "\n";
}

}  // namespace subtrack
