#include "subtrack/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "subtrack/errors.hpp"
#include "subtrack/rng.hpp"

namespace subtrack {

namespace {

// RNG stream tags.
constexpr std::uint64_t kMembershipStream = 0;
constexpr std::uint64_t kCoinStream = 1;
constexpr std::uint64_t kEdgeStream = 2;

std::vector<Index> cluster_sizes(const std::vector<Index>& labels, Index cluster_count) {
  std::vector<Index> sizes(static_cast<std::size_t>(cluster_count), 0);
  for (Index label : labels) {
    ++sizes.at(static_cast<std::size_t>(label));
  }
  return sizes;
}

Matrix size_scaled_core(const Matrix& b, const std::vector<Index>& sizes) {
  Vector root(static_cast<Index>(sizes.size()));
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    root(static_cast<Index>(k)) = std::sqrt(static_cast<double>(sizes[k]));
  }
  return root.asDiagonal() * b * root.asDiagonal();
}

}  // namespace

std::vector<Index> GroundTruth::segment_ranks() const {
  std::vector<Index> ranks;
  ranks.reserve(static_cast<std::size_t>(model.segment_count()));
  for (Index k = 0; k < model.segment_count(); ++k) {
    ranks.push_back(model.segment_rank(k));
  }
  return ranks;
}

Matrix scenario_connectivity(int which) {
  const double r6 = std::sqrt(6.0) / 4.0;
  const double r2 = std::sqrt(2.0) / 2.0;
  Matrix w(3, 3);
  Vector d(3);
  if (which == 0) {
    w << 0.75, 0.25, r6,
         0.50, 0.75, -r6,
         r6, -r6, -0.50;
    d << 1.0, 0.5, 0.5;
  } else if (which == 1) {
    w << 0.5, 0.5, -r2,
         0.5, 0.5, r2,
         r2, -r2, 0.0;
    d << 1.0, 0.5, -0.5;
  } else {
    throw ValidationError("scenario_connectivity: which must be 0 or 1");
  }
  return w * d.asDiagonal() * w.transpose();
}

SubspaceBasis membership_basis(const std::vector<Index>& labels, Index cluster_count) {
  const Index n = static_cast<Index>(labels.size());
  const std::vector<Index> sizes = cluster_sizes(labels, cluster_count);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (sizes[k] == 0) {
      throw ValidationError("membership_basis: cluster " + std::to_string(k) + " is empty");
    }
  }
  Matrix columns = Matrix::Zero(n, cluster_count);
  for (Index i = 0; i < n; ++i) {
    const Index k = labels[static_cast<std::size_t>(i)];
    columns(i, k) = 1.0 / std::sqrt(static_cast<double>(sizes[static_cast<std::size_t>(k)]));
  }
  return SubspaceBasis(std::move(columns));
}

GraphSequence sample_sequence(const SegmentModel& model, std::uint64_t seed) {
  const Index n = model.node_count();
  const Index T = model.layer_count();
  std::vector<AdjLayer> layers;
  layers.reserve(static_cast<std::size_t>(T));
  for (Index t = 1; t <= T; ++t) {
    Philox rng(seed, stream_id(kEdgeStream, static_cast<std::uint64_t>(t)));
    const Matrix p = model.prob_matrix(t);
    AdjLayer a = AdjLayer::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double prob = std::clamp(p(i, j), 0.0, 1.0);
        if (rng.bernoulli(prob)) {
          a(i, j) = 1;
          a(j, i) = 1;
        }
      }
    }
    layers.push_back(std::move(a));
  }
  return GraphSequence(std::move(layers));
}

std::pair<GroundTruth, GraphSequence> build_scenario(const ScenarioParams& params) {
  const Index n = params.n;
  const Index T = params.T;
  if (n < 10 || T < 8) {
    throw ValidationError("build_scenario: need n >= 10 and T >= 8");
  }
  if (!(params.s > 0.0 && params.s <= 0.25)) {
    throw ValidationError("build_scenario: s must lie in (0, 1/4]");
  }
  if (!(params.q >= 0.0 && params.q <= 1.0)) {
    throw ValidationError("build_scenario: q must lie in [0,1]");
  }
  if (!(params.rho > 0.0 && params.rho <= 1.0)) {
    throw ValidationError("build_scenario: rho must lie in (0,1]");
  }
  const Index tau1 = static_cast<Index>(std::floor(params.s * static_cast<double>(T)));
  const Index tau2 = T / 2;
  const Index tau3 = (3 * T) / 4;
  if (tau1 < 2 || tau1 >= tau2 || tau2 >= tau3 || tau3 >= T) {
    throw ValidationError("build_scenario: change points must be strictly increasing interior");
  }

  Philox member_rng(params.seed, stream_id(kMembershipStream));

  // Z1: random assignment into clusters of 0.3n, 0.3n and the remainder.
  const Index r = static_cast<Index>(std::llround(0.3 * static_cast<double>(n)));
  if (r < 1 || n - 2 * r < 1) {
    throw ValidationError("build_scenario: cluster sizes must be positive");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  member_rng.shuffle(order);
  std::vector<Index> z1(static_cast<std::size_t>(n));
  for (Index pos = 0; pos < n; ++pos) {
    const Index node = order[static_cast<std::size_t>(pos)];
    z1[static_cast<std::size_t>(node)] = pos < r ? 0 : (pos < 2 * r ? 1 : 2);
  }

  // Z2: reassign a q-fraction of the nodes, each to one of the other two
  // clusters uniformly.
  std::vector<Index> movers(order);
  member_rng.shuffle(movers);
  const Index move_count = static_cast<Index>(std::llround(params.q * static_cast<double>(n)));
  std::vector<Index> z2(z1);
  for (Index idx = 0; idx < move_count; ++idx) {
    const Index node = movers[static_cast<std::size_t>(idx)];
    const Index old_label = z2[static_cast<std::size_t>(node)];
    const Index step = static_cast<Index>(member_rng.below(2)) + 1;
    z2[static_cast<std::size_t>(node)] = (old_label + step) % 3;
  }

  // Z3: dissolve the smallest cluster of Z2 (ties to the lowest label) into
  // the remaining two.
  const std::vector<Index> sizes2 = cluster_sizes(z2, 3);
  Index smallest = 0;
  for (Index k = 1; k < 3; ++k) {
    if (sizes2[static_cast<std::size_t>(k)] < sizes2[static_cast<std::size_t>(smallest)]) {
      smallest = k;
    }
  }
  std::vector<Index> keep;
  for (Index k = 0; k < 3; ++k) {
    if (k != smallest) {
      keep.push_back(k);
    }
  }
  std::vector<Index> z3(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index old_label = z2[static_cast<std::size_t>(i)];
    if (old_label == smallest) {
      z3[static_cast<std::size_t>(i)] = static_cast<Index>(member_rng.below(2));
    } else {
      z3[static_cast<std::size_t>(i)] = old_label == keep[0] ? 0 : 1;
    }
  }

  const std::vector<std::vector<Index>> memberships = {z1, z2, z3, z2};
  const std::vector<Index> ranks = {3, 3, 2, 3};

  const Matrix b_full[2] = {scenario_connectivity(0), scenario_connectivity(1)};
  for (const Matrix& b : b_full) {
    if (params.rho * b.maxCoeff() > 1.0 + 1e-12) {
      throw ValidationError("build_scenario: infeasible probability entries");
    }
  }

  std::vector<SubspaceBasis> bases;
  for (std::size_t k = 0; k < 4; ++k) {
    bases.push_back(membership_basis(memberships[k], ranks[k]));
  }

  Philox coin_rng(params.seed, stream_id(kCoinStream));
  std::vector<int> b_choice(static_cast<std::size_t>(T));
  std::vector<Index> taus = {tau1, tau2, tau3};
  std::vector<Matrix> cores;
  cores.reserve(static_cast<std::size_t>(T));
  for (Index t = 1; t <= T; ++t) {
    const int choice = static_cast<int>(coin_rng.below(2));
    b_choice[static_cast<std::size_t>(t - 1)] = choice;
    const Index k = static_cast<Index>(std::upper_bound(taus.begin(), taus.end(), t) -
                                       taus.begin());
    const std::vector<Index> sizes = cluster_sizes(memberships[static_cast<std::size_t>(k)],
                                                   ranks[static_cast<std::size_t>(k)]);
    if (ranks[static_cast<std::size_t>(k)] == 2) {
      cores.push_back(size_scaled_core(b_full[choice].topLeftCorner(2, 2), sizes));
    } else {
      cores.push_back(size_scaled_core(b_full[choice], sizes));
    }
  }

  SegmentModel model(n, T, params.rho, taus, std::move(bases), std::move(cores));
  GraphSequence sequence = sample_sequence(model, params.seed);
  return {GroundTruth{std::move(model), memberships, std::move(b_choice)}, std::move(sequence)};
}

std::pair<GroundTruth, GraphSequence> build_toy(std::uint64_t seed, Index n, Index T) {
  if (n < 20 || n % 20 != 0) {
    throw ValidationError("build_toy: n must be a positive multiple of 20");
  }
  if (T < 40 || T % 4 != 0) {
    throw ValidationError("build_toy: T must be a multiple of 4, at least 40");
  }
  const Index tau1 = T / 4 + 1;
  const Index tau2 = T / 2 + 1;
  const Index tau3 = (3 * T) / 4 + 1;

  // Contiguous base partition of sizes 0.3n / 0.3n / 0.4n; later segments
  // shift it around the node circle, which keeps all probability entries
  // nonnegative while moving the subspace.
  const auto shifted_partition = [n](Index shift) {
    std::vector<Index> labels(static_cast<std::size_t>(n));
    const Index b1 = (3 * n) / 10;
    const Index b2 = (6 * n) / 10;
    for (Index i = 0; i < n; ++i) {
      const Index pos = (i + shift) % n;
      labels[static_cast<std::size_t>(i)] = pos < b1 ? 0 : (pos < b2 ? 1 : 2);
    }
    return labels;
  };

  const std::vector<Index> part_a = shifted_partition(0);
  std::vector<Index> part_merged(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    part_merged[static_cast<std::size_t>(i)] =
        part_a[static_cast<std::size_t>(i)] == 2 ? 1 : 0;
  }
  const std::vector<Index> part_c = shifted_partition(n / 2);
  const std::vector<Index> part_d = shifted_partition((3 * n) / 4);

  const std::vector<std::vector<Index>> memberships = {part_a, part_merged, part_c, part_d};
  const std::vector<Index> ranks = {3, 2, 3, 3};

  std::vector<SubspaceBasis> bases;
  for (std::size_t k = 0; k < 4; ++k) {
    bases.push_back(membership_basis(memberships[k], ranks[k]));
  }

  // Block densities drift sinusoidally within [0.35, 0.55], with staggered
  // phases so the cores stay full rank at every layer.
  const auto density = [](Index t, Index block) {
    return 0.45 + 0.10 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 60.0 +
                                  2.0 * std::numbers::pi * static_cast<double>(block) / 3.0);
  };

  std::vector<Index> taus = {tau1, tau2, tau3};
  std::vector<Matrix> cores;
  cores.reserve(static_cast<std::size_t>(T));
  for (Index t = 1; t <= T; ++t) {
    const Index k = static_cast<Index>(std::upper_bound(taus.begin(), taus.end(), t) -
                                       taus.begin());
    const std::vector<Index> sizes = cluster_sizes(memberships[static_cast<std::size_t>(k)],
                                                   ranks[static_cast<std::size_t>(k)]);
    Matrix core = Matrix::Zero(ranks[static_cast<std::size_t>(k)],
                               ranks[static_cast<std::size_t>(k)]);
    for (Index block = 0; block < core.rows(); ++block) {
      core(block, block) =
          static_cast<double>(sizes[static_cast<std::size_t>(block)]) * density(t, block);
    }
    cores.push_back(std::move(core));
  }

  SegmentModel model(n, T, 1.0, taus, std::move(bases), std::move(cores));
  GraphSequence sequence = sample_sequence(model, seed);
  return {GroundTruth{std::move(model), memberships, std::vector<int>(static_cast<std::size_t>(T), -1)},
          std::move(sequence)};
}

SymMatrix population_window(const GroundTruth& truth, Index last, Index L) {
  return truth.model.population_window(last, L);
}

}  // namespace subtrack
