#include "subtrack/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "subtrack/detector.hpp"
#include "subtrack/errors.hpp"
#include "subtrack/io_util.hpp"
#include "subtrack/rng.hpp"

namespace subtrack {

HausdorffResult hausdorff(const std::vector<Index>& a, const std::vector<Index>& b,
                          Index horizon) {
  if (a.empty() && b.empty()) {
    return {0.0, false};
  }
  if (a.empty() || b.empty()) {
    return {static_cast<double>(std::max<Index>(horizon - 1, 1)), true};
  }
  Index worst = 0;
  for (const Index x : a) {
    Index nearest = std::numeric_limits<Index>::max();
    for (const Index y : b) {
      nearest = std::min(nearest, std::abs(x - y));
    }
    worst = std::max(worst, nearest);
  }
  for (const Index y : b) {
    Index nearest = std::numeric_limits<Index>::max();
    for (const Index x : a) {
      nearest = std::min(nearest, std::abs(x - y));
    }
    worst = std::max(worst, nearest);
  }
  return {static_cast<double>(worst), false};
}

Index count_error(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::abs(static_cast<Index>(a.size()) - static_cast<Index>(b.size()));
}

ReplicationPlan scenario_plan(int scenario_number, Index n, Index T) {
  ReplicationPlan plan;
  plan.base.n = n;
  plan.base.T = T;
  plan.base.s = 0.25;
  plan.base.q = 0.5;
  plan.base.rho = 1.0;
  switch (scenario_number) {
    case 1:
      plan.scenario = "I";
      plan.param_name = "s";
      plan.param_values = {1.0 / 10.0, 1.0 / 15.0, 1.0 / 20.0};
      break;
    case 2:
      plan.scenario = "II";
      plan.param_name = "q";
      plan.param_values = {0.3, 0.2, 0.1};
      break;
    case 3:
      plan.scenario = "III";
      plan.param_name = "rho";
      plan.param_values = {80.0 / static_cast<double>(n), 50.0 / static_cast<double>(n),
                           30.0 / static_cast<double>(n)};
      break;
    default:
      throw ValidationError("scenario_plan: scenario must be 1, 2 or 3");
  }
  return plan;
}

namespace {

struct Accumulator {
  std::vector<double> counts;
  std::vector<double> distances;

  void add(double count, double distance) {
    counts.push_back(count);
    distances.push_back(distance);
  }
};

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) {
    return 0.0;
  }
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Standard error: sample sd / sqrt(R); zero by convention when R <= 1.
double se_of(const std::vector<double>& xs) {
  const std::size_t r = xs.size();
  if (r <= 1) {
    return 0.0;
  }
  const double mean = mean_of(xs);
  double ss = 0.0;
  for (const double x : xs) {
    ss += (x - mean) * (x - mean);
  }
  const double var = ss / static_cast<double>(r - 1);
  return std::sqrt(var / static_cast<double>(r));
}

MetricRow make_row(const ReplicationPlan& plan, double value, const std::string& method,
                   const Accumulator& acc, Index failures) {
  MetricRow row;
  row.scenario = plan.scenario;
  row.param_name = plan.param_name;
  row.param_value = value;
  row.method = method;
  row.count_mean = mean_of(acc.counts);
  row.count_se = se_of(acc.counts);
  row.haus_mean = mean_of(acc.distances);
  row.haus_se = se_of(acc.distances);
  row.reps = static_cast<Index>(acc.counts.size());
  row.failures = failures;
  return row;
}

}  // namespace

std::vector<MetricRow> run_replications(const ReplicationPlan& plan, Index R,
                                        std::uint64_t master_seed) {
  if (R < 1) {
    throw ValidationError("run_replications: need R >= 1");
  }
  std::vector<MetricRow> rows;
  for (std::size_t cell = 0; cell < plan.param_values.size(); ++cell) {
    const double value = plan.param_values[cell];
    ScenarioParams params = plan.base;
    if (plan.param_name == "s") {
      params.s = value;
    } else if (plan.param_name == "q") {
      params.q = value;
    } else if (plan.param_name == "rho") {
      params.rho = value;
    } else {
      throw ValidationError("run_replications: unknown parameter " + plan.param_name);
    }

    Accumulator coarse_acc;
    Accumulator refined_acc;
    Index failures = 0;
    for (Index rep = 0; rep < R; ++rep) {
      params.seed = child_seed(master_seed, (static_cast<std::uint64_t>(cell) << 32) |
                                                static_cast<std::uint64_t>(rep));
      try {
        const auto [truth, sequence] = build_scenario(params);
        const DetectionReport report = detect(sequence);
        const std::vector<Index>& target = truth.change_points();
        coarse_acc.add(
            static_cast<double>(count_error(report.coarse.points, target)),
            hausdorff(report.coarse.points, target, sequence.layer_count()).value);
        refined_acc.add(
            static_cast<double>(count_error(report.refined.points, target)),
            hausdorff(report.refined.points, target, sequence.layer_count()).value);
      } catch (const Error&) {
        ++failures;
      }
    }
    rows.push_back(make_row(plan, value, "coarse", coarse_acc, failures));
    rows.push_back(make_row(plan, value, "refined", refined_acc, failures));
  }
  return rows;
}

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "param,method,count_mean,count_se,haus_mean,haus_se,R,failures\n";
  for (const MetricRow& row : rows) {
    out << format_double(row.param_value) << "," << row.method << ","
        << format_double(row.count_mean) << "," << format_double(row.count_se) << ","
        << format_double(row.haus_mean) << "," << format_double(row.haus_se) << "," << row.reps
        << "," << row.failures << "\n";
  }
  return out.str();
}

std::string metrics_to_json(const std::vector<MetricRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const MetricRow& row : rows) {
    j.push_back({{"scenario", row.scenario},
                 {"param_name", row.param_name},
                 {"param_value", row.param_value},
                 {"method", row.method},
                 {"count_mean", row.count_mean},
                 {"count_se", row.count_se},
                 {"haus_mean", row.haus_mean},
                 {"haus_se", row.haus_se},
                 {"R", row.reps},
                 {"failures", row.failures}});
  }
  return j.dump(2) + "\n";
}

namespace {

void check_interval(const GraphSequence& g, Index t0, Index t1) {
  if (t0 < 1 || t1 <= t0 || t1 > g.layer_count() + 1) {
    throw RangeError("interval [" + std::to_string(t0) + "," + std::to_string(t1) +
                     ") out of [1,T]");
  }
}

void check_labels(const GraphSequence& g, const std::vector<Index>& labels) {
  if (static_cast<Index>(labels.size()) != g.node_count()) {
    throw DimensionError("labels must cover all nodes");
  }
}

}  // namespace

std::vector<double> internal_density(const GraphSequence& g, const std::vector<Index>& labels,
                                     Index t0, Index t1) {
  check_interval(g, t0, t1);
  check_labels(g, labels);
  const Index communities = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> intra(static_cast<std::size_t>(communities), 0.0);
  std::vector<Index> sizes(static_cast<std::size_t>(communities), 0);
  for (const Index label : labels) {
    if (label < 0) {
      throw ValidationError("internal_density: negative label");
    }
    ++sizes[static_cast<std::size_t>(label)];
  }
  for (Index k = 0; k < communities; ++k) {
    const Index m = sizes[static_cast<std::size_t>(k)];
    if (m < 2) {
      throw ValidationError("internal_density: community " + std::to_string(k) +
                            " has fewer than two nodes");
    }
  }
  const Index n = g.node_count();
  for (Index t = t0; t < t1; ++t) {
    const AdjLayer& a = g.layer(t);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] &&
            a(i, j) != 0) {
          // Ordered pairs: each undirected edge counts twice.
          intra[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 2.0;
        }
      }
    }
  }
  std::vector<double> acc(static_cast<std::size_t>(communities));
  const double span = static_cast<double>(t1 - t0);
  for (Index k = 0; k < communities; ++k) {
    const double m = static_cast<double>(sizes[static_cast<std::size_t>(k)]);
    acc[static_cast<std::size_t>(k)] = intra[static_cast<std::size_t>(k)] / (m * (m - 1) * span);
  }
  return acc;
}

KappaResult cohen_kappa_pairs(const GraphSequence& g, const std::vector<Index>& labels,
                              Index t0, Index t1) {
  check_interval(g, t0, t1);
  check_labels(g, labels);
  const Index communities = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  KappaResult result;
  result.per_community.assign(static_cast<std::size_t>(communities), {});
  const Index n = g.node_count();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) {
        continue;
      }
      // Neighborhood indicators over coordinates (t, v), v excluding i and j.
      double total = 0.0;
      double agree = 0.0;
      double ones_i = 0.0;
      double ones_j = 0.0;
      for (Index t = t0; t < t1; ++t) {
        const AdjLayer& a = g.layer(t);
        for (Index v = 0; v < n; ++v) {
          if (v == i || v == j) {
            continue;
          }
          const int xi = a(i, v);
          const int xj = a(j, v);
          total += 1.0;
          agree += xi == xj ? 1.0 : 0.0;
          ones_i += xi;
          ones_j += xj;
        }
      }
      if (total == 0.0) {
        ++result.skipped;
        continue;
      }
      const double pi1 = ones_i / total;
      const double pj1 = ones_j / total;
      const double po = agree / total;
      const double pe = pi1 * pj1 + (1.0 - pi1) * (1.0 - pj1);
      if (1.0 - pe <= 1e-12) {
        ++result.skipped;
        continue;
      }
      result.per_community[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])]
          .push_back((po - pe) / (1.0 - pe));
    }
  }
  return result;
}

std::vector<Index> cluster_memberships(const SubspaceBasis& basis, Index k,
                                       std::uint64_t seed) {
  const Index n = basis.n();
  if (k < 1 || k > n) {
    throw ValidationError("cluster_memberships: need 1 <= k <= n");
  }
  const Matrix& rows = basis.columns();
  Philox rng(seed, stream_id(3));

  for (int restart = 0; restart < 10; ++restart) {
    std::vector<Index> pick(static_cast<std::size_t>(n));
    std::iota(pick.begin(), pick.end(), Index{0});
    rng.shuffle(pick);
    Matrix centroids(k, rows.cols());
    for (Index c = 0; c < k; ++c) {
      centroids.row(c) = rows.row(pick[static_cast<std::size_t>(c)]);
    }

    std::vector<Index> assignment(static_cast<std::size_t>(n), 0);
    bool degenerate = false;
    for (int iteration = 0; iteration < 100; ++iteration) {
      bool changed = false;
      for (Index i = 0; i < n; ++i) {
        Index best = 0;
        double best_dist = (rows.row(i) - centroids.row(0)).squaredNorm();
        for (Index c = 1; c < k; ++c) {
          const double dist = (rows.row(i) - centroids.row(c)).squaredNorm();
          if (dist < best_dist) {
            best_dist = dist;
            best = c;
          }
        }
        if (assignment[static_cast<std::size_t>(i)] != best) {
          assignment[static_cast<std::size_t>(i)] = best;
          changed = true;
        }
      }
      std::vector<Index> counts(static_cast<std::size_t>(k), 0);
      Matrix sums = Matrix::Zero(k, rows.cols());
      for (Index i = 0; i < n; ++i) {
        ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
        sums.row(assignment[static_cast<std::size_t>(i)]) += rows.row(i);
      }
      degenerate = false;
      for (Index c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          degenerate = true;
          break;
        }
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
      if (degenerate || !changed) {
        break;
      }
    }
    if (!degenerate) {
      return assignment;
    }
  }
  throw ClusteringError("cluster_memberships: empty cluster after 10 restarts");
}

}  // namespace subtrack
