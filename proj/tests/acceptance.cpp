// Acceptance suite: runs every shipping criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "subtrack/detector.hpp"
#include "subtrack/errors.hpp"
#include "subtrack/evaluation.hpp"
#include "subtrack/generator.hpp"
#include "subtrack/rng.hpp"
#include "subtrack/spectral.hpp"
#include "subtrack/statistics.hpp"

namespace fs = std::filesystem;
using namespace subtrack;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- criterion 1: subspace inequality property suite ----------------------

Outcome subspace_inequality_suite() {
  std::mt19937 gen(20240501);
  const Index n = 50;
  int violations = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const Index ru = 1 + static_cast<Index>(gen() % 5);
    const Index rv = 1 + static_cast<Index>(gen() % 5);
    const Matrix u = oracles::random_orthonormal(gen, n, ru);
    const Matrix v = oracles::random_orthonormal(gen, n, rv);
    const Matrix u_perp = oracles::gs_complement(u);
    const double dist_sq = (u * u.transpose() - v * v.transpose()).squaredNorm();
    const double bound =
        (static_cast<double>(rv - ru) + dist_sq) / (2.0 * static_cast<double>(rv));

    Eigen::BDCSVD<Matrix> svd1(u_perp.transpose() * v);
    const double lhs1 = svd1.singularValues()(0);
    if (lhs1 * lhs1 < bound - 1e-10) {
      ++violations;
    }

    const Matrix q = oracles::random_symmetric(gen, rv);
    Eigen::BDCSVD<Matrix> svd_q(q);
    const double sigma_min = svd_q.singularValues()(rv - 1);
    Eigen::BDCSVD<Matrix> svd2(u_perp.transpose() * v * q * v.transpose());
    if (svd2.singularValues()(0) < sigma_min * std::sqrt(std::max(0.0, bound)) - 1e-10) {
      ++violations;
    }
  }
  return {violations == 0,
          "both inequalities, 500 random triples at n=50: " + std::to_string(violations) +
              " violations"};
}

// ---- criterion 2: spectral operation oracles -------------------------------

Outcome spectral_oracles() {
  std::mt19937 gen(20240502);
  int failures = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 2 + static_cast<Index>(gen() % 11);  // n <= 12
    const Matrix m = oracles::random_symmetric(gen, n);
    const auto [oracle_values, oracle_vectors] = oracles::jacobi_eig(m);

    const EigenDecomp decomp = sym_eig(SymMatrix(m));
    for (Index i = 0; i < n; ++i) {
      if (std::abs(decomp.values(i) - oracle_values(i)) > 1e-8) {
        ++failures;
        break;
      }
    }

    const Index split = static_cast<Index>(gen() % n);
    const double h = split + 1 < n ? 0.5 * (oracle_values(split) + oracle_values(split + 1))
                                   : oracle_values(n - 1) - 1.0;
    Matrix expected = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      if (oracle_values(i) > h) {
        expected += oracle_values(i) * oracle_vectors.col(i) * oracle_vectors.col(i).transpose();
      }
    }
    const UevtResult thresholded = uevt(SymMatrix(m), h);
    if ((thresholded.approx.dense() - expected).norm() > 1e-8) {
      ++failures;
    }

    const Index r = 1 + static_cast<Index>(gen() % std::max<Index>(1, n - 1));
    const Matrix basis = oracles::random_orthonormal(gen, n, r);
    const Matrix complement = oracles::gs_complement(basis);
    const Matrix product = complement.transpose() * m;
    const auto [sq_values, sq_vectors] = oracles::jacobi_eig(product * product.transpose());
    const double expected_norm = std::sqrt(std::max(0.0, sq_values(0)));
    if (std::abs(proj_residual_norm(SubspaceBasis(basis), SymMatrix(m)) - expected_norm) >
        1e-8) {
      ++failures;
    }

    const Matrix other = oracles::random_orthonormal(gen, n, 1 + static_cast<Index>(gen() % n));
    const double expected_dist =
        (basis * basis.transpose() - other * other.transpose()).squaredNorm();
    if (std::abs(subspace_distance_sq(SubspaceBasis(basis), SubspaceBasis(other)) -
                 expected_dist) > 1e-8) {
      ++failures;
    }
  }
  return {failures == 0,
          "sym_eig/uevt/proj_residual_norm/subspace_distance_sq on 200 instances: " +
              std::to_string(failures) + " mismatches"};
}

// ---- criterion 3: noiseless dichotomy --------------------------------------

Outcome noiseless_dichotomy() {
  const auto [truth, sequence] = build_toy(0);
  const SegmentModel& model = truth.model;
  const Index T = model.layer_count();
  const Index L = 20;

  // Population analogue of the plug-in sparsity estimate.
  Matrix mean_prob = Matrix::Zero(model.node_count(), model.node_count());
  for (Index t = 1; t <= T; ++t) {
    mean_prob += model.prob_matrix(t);
  }
  mean_prob /= static_cast<double>(T);
  double rho_pop = 0.0;
  for (Index i = 0; i < model.node_count(); ++i) {
    for (Index j = i + 1; j < model.node_count(); ++j) {
      rho_pop = std::max(rho_pop, mean_prob(i, j));
    }
  }
  const double b = default_config(model.node_count(), T, rho_pop).threshold;

  // Flatness inside every segment.
  double worst_inside = 0.0;
  std::vector<Index> starts = {1};
  for (const Index tau : model.change_points()) {
    starts.push_back(tau);
  }
  std::vector<Index> ends;
  for (const Index tau : model.change_points()) {
    ends.push_back(tau - 1);
  }
  ends.push_back(T);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const Index lo = std::max(starts[k] + L - 1, L);
    for (Index l = lo; l <= ends[k]; ++l) {
      const double stat =
          pi_proj_hat(model.population_window(l, L), model.basis(static_cast<Index>(k)));
      worst_inside = std::max(worst_inside, stat);
    }
  }
  if (worst_inside > 1e-8) {
    return {false, "pi_proj inside segments reached " + std::to_string(worst_inside)};
  }

  // Projection statistic after the rank-nondecreasing changes (old basis).
  double min_peak = std::numeric_limits<double>::infinity();
  for (const std::size_t k : {1u, 2u}) {  // changes at tau_2 (rank up), tau_3 (rank equal)
    const Index tau = model.change_points()[k];
    double peak = 0.0;
    for (Index l = tau; l <= std::min<Index>(tau + 2 * L - 1, T); ++l) {
      peak = std::max(peak, pi_proj_hat(model.population_window(l, L),
                                        model.basis(static_cast<Index>(k))));
    }
    min_peak = std::min(min_peak, peak);
  }
  if (!(min_peak > 10.0 * b)) {
    return {false, "post-change pi_proj peak " + std::to_string(min_peak) +
                       " fails to clear 10*b = " + std::to_string(10.0 * b)};
  }

  // Eigenvalue statistic at the old rank collapses after the rank drop.
  const Index tau1 = model.change_points()[0];
  const Index old_rank = model.segment_rank(0);
  double worst_collapse = 0.0;
  for (Index l = tau1; l <= tau1 + L; ++l) {
    const SymMatrix forward = model.population_window(l + L - 1, L);
    worst_collapse = std::max(worst_collapse, pi_eig_hat(forward, old_rank));
  }
  if (!(worst_collapse < b)) {
    return {false, "pi_eig at the old rank stayed at " + std::to_string(worst_collapse)};
  }
  return {true, "flat <= 1e-8 inside segments; post-change peak " +
                    std::to_string(min_peak) + " > 10*b = " + std::to_string(10.0 * b) +
                    "; collapsed eig " + std::to_string(worst_collapse) + " < b"};
}

// ---- criterion 4: toy trace reproduction ------------------------------------

Outcome toy_reproduction() {
  int good_seeds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    try {
      const auto [truth, sequence] = build_toy(seed);
      const DetectionReport report = detect(sequence);
      const std::vector<Index>& target = truth.change_points();
      bool ok = report.coarse.points.size() == 3 && report.config.window == 20;
      if (ok) {
        for (std::size_t k = 0; k < 3; ++k) {
          ok = ok && std::abs(report.coarse.points[k] - target[k]) <= 40;
        }
      }
      if (ok) {
        ++good_seeds;
      }
    } catch (const Error&) {
    }
  }
  return {good_seeds >= 18,
          "exactly 3 triggers within 2L of truth in " + std::to_string(good_seeds) +
              "/20 seeds (need >= 18)"};
}

// ---- criteria 5 and 6: Scenario I desk-scale metrics ------------------------

struct ScenarioIMetrics {
  std::vector<double> coarse_haus;
  std::vector<double> refined_haus;
  std::vector<double> refined_count;
  int failures = 0;
};

ScenarioIMetrics scenario_one_runs() {
  ScenarioIMetrics metrics;
  for (Index rep = 0; rep < 20; ++rep) {
    ScenarioParams params;
    params.n = 100;
    params.T = 200;
    params.s = 0.1;
    params.q = 0.5;
    params.rho = 1.0;
    params.seed = child_seed(20240506, static_cast<std::uint64_t>(rep));
    try {
      const auto [truth, sequence] = build_scenario(params);
      const DetectionReport report = detect(sequence);
      const std::vector<Index>& target = truth.change_points();
      metrics.coarse_haus.push_back(hausdorff(report.coarse.points, target, 200).value);
      metrics.refined_haus.push_back(hausdorff(report.refined.points, target, 200).value);
      metrics.refined_count.push_back(
          static_cast<double>(count_error(report.refined.points, target)));
    } catch (const Error&) {
      ++metrics.failures;
    }
  }
  return metrics;
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (const double x : xs) {
    sum += x;
  }
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

Outcome scenario_one_accuracy(const ScenarioIMetrics& metrics) {
  if (metrics.failures > 0) {
    return {false, std::to_string(metrics.failures) + " replications failed"};
  }
  const double count_mean = mean_of(metrics.refined_count);
  const double haus_mean = mean_of(metrics.refined_haus);
  const bool pass = count_mean <= 0.1 && haus_mean <= 2.0;
  std::ostringstream detail;
  detail << "refined mean |K-K*| = " << count_mean << " (<= 0.1), mean Hausdorff = "
         << haus_mean << " (<= 2.0), R=20";
  return {pass, detail.str()};
}

Outcome refinement_improvement(const ScenarioIMetrics& metrics) {
  if (metrics.failures > 0) {
    return {false, std::to_string(metrics.failures) + " replications failed"};
  }
  int no_worse = 0;
  for (std::size_t i = 0; i < metrics.refined_haus.size(); ++i) {
    if (metrics.refined_haus[i] <= metrics.coarse_haus[i]) {
      ++no_worse;
    }
  }
  const double coarse_mean = mean_of(metrics.coarse_haus);
  const double refined_mean = mean_of(metrics.refined_haus);
  const double improvement =
      coarse_mean > 0.0 ? (coarse_mean - refined_mean) / coarse_mean : 1.0;
  const bool pass = no_worse >= 18 && improvement >= 0.5;
  std::ostringstream detail;
  detail << "refined <= coarse in " << no_worse << "/20 seeds (need >= 18); mean Hausdorff "
         << coarse_mean << " -> " << refined_mean << " (" << improvement * 100.0
         << "% improvement, need >= 50%)";
  return {pass, detail.str()};
}

// ---- criterion 7: Scenario III sparsity robustness --------------------------

Outcome scenario_three_sparsity() {
  std::vector<double> count_errors;
  int failures = 0;
  for (Index rep = 0; rep < 20; ++rep) {
    ScenarioParams params;
    params.n = 100;
    params.T = 150;
    params.s = 0.25;
    params.q = 0.5;
    params.rho = 80.0 / 100.0;
    params.seed = child_seed(20240507, static_cast<std::uint64_t>(rep));
    try {
      const auto [truth, sequence] = build_scenario(params);
      const DetectionReport report = detect(sequence);
      count_errors.push_back(
          static_cast<double>(count_error(report.refined.points, truth.change_points())));
    } catch (const Error&) {
      ++failures;
    }
  }
  if (failures > 0) {
    return {false, std::to_string(failures) + " replications failed"};
  }
  const double count_mean = mean_of(count_errors);
  std::ostringstream detail;
  detail << "rho=80/n, refined mean |K-K*| = " << count_mean << " (<= 0.2), R=20";
  return {count_mean <= 0.2, detail.str()};
}

// ---- criterion 8: CLI determinism -------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("missing file " + path.string());
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome cli_determinism() {
  const char* bin = std::getenv("SUBTRACK_BIN");
  if (bin == nullptr) {
    return {false, "SUBTRACK_BIN not set"};
  }
  const fs::path dir =
      fs::temp_directory_path() / ("subtrack_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string command = std::string(bin) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(command.c_str()));
  };

  bool pass = true;
  std::string detail;
  const auto expect_equal = [&](const fs::path& a, const fs::path& b, const char* what) {
    if (slurp(a) != slurp(b)) {
      pass = false;
      detail += std::string(what) + " differ; ";
    }
  };

  for (int round = 1; round <= 2; ++round) {
    const std::string tag = std::to_string(round);
    if (run("generate --scenario 1 --seed 17 --n 60 --T 60 --out " +
            (dir / ("gen" + tag + ".dnet")).string()) != 0) {
      pass = false;
      detail += "generate failed; ";
    }
  }
  expect_equal(dir / "gen1.dnet", dir / "gen2.dnet", "generate DNET bytes");
  expect_equal(dir / "gen1.truth.json", dir / "gen2.truth.json", "generate truth bytes");

  for (int round = 1; round <= 2; ++round) {
    const std::string tag = std::to_string(round);
    // Run inside the temp dir so both rounds embed the same relative trace
    // path in their reports.
    const std::string command = "cd " + dir.string() + " && " + bin +
                                " detect gen1.dnet --out rep" + tag +
                                ".json --trace trace.csv >/dev/null 2>&1";
    if (WEXITSTATUS(std::system(command.c_str())) != 0) {
      pass = false;
      detail += "detect failed; ";
    }
    fs::rename(dir / "trace.csv", dir / ("trace" + tag + ".csv"));
  }
  expect_equal(dir / "rep1.json", dir / "rep2.json", "detect report bytes");
  expect_equal(dir / "trace1.csv", dir / "trace2.csv", "trace bytes");

  for (int round = 1; round <= 2; ++round) {
    const std::string tag = std::to_string(round);
    if (run("bench --scenario 1 --n 60 --T 60 --reps 2 --seed 23 --out " +
            (dir / ("bench" + tag)).string()) != 0) {
      pass = false;
      detail += "bench failed; ";
    }
  }
  expect_equal(dir / "bench1" / "scenario_I.csv", dir / "bench2" / "scenario_I.csv",
               "bench CSV bytes");
  expect_equal(dir / "bench1" / "scenario_I.json", dir / "bench2" / "scenario_I.json",
               "bench JSON bytes");

  std::error_code ec;
  fs::remove_all(dir, ec);
  if (pass) {
    detail = "generate, detect and bench each byte-identical across two runs";
  }
  return {pass, detail};
}

// ---- criterion 9: metric oracles --------------------------------------------

Outcome metric_oracles() {
  std::mt19937 gen(20240509);
  int mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<Index> a;
    std::vector<Index> b;
    const std::size_t na = 1 + gen() % 6;
    const std::size_t nb = 1 + gen() % 6;
    std::uniform_int_distribution<Index> pick(1, 200);
    while (a.size() < na) {
      a.push_back(pick(gen));
    }
    while (b.size() < nb) {
      b.push_back(pick(gen));
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (hausdorff(a, b, 200).value != oracles::hausdorff_sorted(a, b)) {
      ++mismatches;
    }
  }
  if (mismatches > 0) {
    return {false, std::to_string(mismatches) + " Hausdorff mismatches in 1000 pairs"};
  }

  // Fixed hand-computed community metrics.
  AdjLayer l1 = AdjLayer::Zero(5, 5);
  l1(0, 1) = l1(1, 0) = 1;
  l1(0, 2) = l1(2, 0) = 1;
  l1(3, 4) = l1(4, 3) = 1;
  AdjLayer l2 = AdjLayer::Zero(5, 5);
  l2(1, 2) = l2(2, 1) = 1;
  const GraphSequence g({l1, l2});
  const auto acc = internal_density(g, {0, 0, 0, 1, 1}, 1, 3);
  const bool density_ok = std::abs(acc[0] - 0.5) < 1e-12 && std::abs(acc[1] - 0.5) < 1e-12;

  std::vector<AdjLayer> kappa_layers;
  const auto kappa_layer = [](bool e02, bool e12) {
    AdjLayer m = AdjLayer::Zero(3, 3);
    if (e02) {
      m(0, 2) = m(2, 0) = 1;
    }
    if (e12) {
      m(1, 2) = m(2, 1) = 1;
    }
    return m;
  };
  kappa_layers.push_back(kappa_layer(true, true));
  kappa_layers.push_back(kappa_layer(true, true));
  kappa_layers.push_back(kappa_layer(true, false));
  kappa_layers.push_back(kappa_layer(false, false));
  const KappaResult kappa = cohen_kappa_pairs(GraphSequence(std::move(kappa_layers)),
                                              {0, 0, 1}, 1, 5);
  const bool kappa_ok =
      kappa.per_community[0].size() == 1 && std::abs(kappa.per_community[0][0] - 0.5) < 1e-12;

  if (!density_ok || !kappa_ok) {
    return {false, std::string("hand-example mismatch:") + (density_ok ? "" : " density") +
                       (kappa_ok ? "" : " kappa")};
  }
  return {true, "1000 Hausdorff pairs + hand-computed density and kappa values"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> body;
  };

  ScenarioIMetrics scenario_one;
  bool scenario_one_ready = false;
  const auto ensure_scenario_one = [&]() -> ScenarioIMetrics& {
    if (!scenario_one_ready) {
      scenario_one = scenario_one_runs();
      scenario_one_ready = true;
    }
    return scenario_one;
  };

  const std::vector<Criterion> criteria = {
      {1, "subspace inequality property suite", subspace_inequality_suite},
      {2, "spectral operation oracle suite", spectral_oracles},
      {3, "noiseless dichotomy", noiseless_dichotomy},
      {4, "toy sequence trace reproduction", toy_reproduction},
      {5, "Scenario I desk-scale accuracy",
       [&] { return scenario_one_accuracy(ensure_scenario_one()); }},
      {6, "refinement improves localization",
       [&] { return refinement_improvement(ensure_scenario_one()); }},
      {7, "Scenario III sparsity robustness", scenario_three_sparsity},
      {8, "CLI determinism", cli_determinism},
      {9, "metric oracles", metric_oracles},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << criterion.id << " ["
              << (outcome.pass ? "PASS" : "FAIL") << "] " << criterion.name << ": "
              << outcome.detail << " (" << std::fixed << std::setprecision(1) << seconds
              << "s)" << std::defaultfloat << "\n";
    if (!outcome.pass) {
      ++failed;
    }
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
