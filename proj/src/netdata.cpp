#include "subtrack/netdata.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "subtrack/errors.hpp"

namespace subtrack {

namespace {

void validate_edge(const Edge& e, Index n, Index T) {
  if (e.t < 1 || e.t > T) {
    throw ValidationError("edge layer " + std::to_string(e.t) + " out of [1," +
                          std::to_string(T) + "]");
  }
  if (e.i < 1 || e.i > n || e.j < 1 || e.j > n) {
    throw ValidationError("edge endpoint out of [1," + std::to_string(n) + "]");
  }
  if (e.i == e.j) {
    throw ValidationError("self-loop at node " + std::to_string(e.i) + " in layer " +
                          std::to_string(e.t));
  }
}

bool parse_int(std::string_view token, Index& out) {
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
      ++pos;
    }
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') {
      ++pos;
    }
    if (pos > start) {
      tokens.push_back(line.substr(start, pos - start));
    }
  }
  return tokens;
}

}  // namespace

GraphSequence::GraphSequence(Index n, Index T, const std::vector<Edge>& edges) : n_(n) {
  if (n < 1 || T < 1) {
    throw ValidationError("GraphSequence: need n >= 1 and T >= 1");
  }
  layers_.assign(static_cast<std::size_t>(T), AdjLayer::Zero(n, n));
  for (const Edge& e : edges) {
    validate_edge(e, n, T);
    AdjLayer& a = layers_[static_cast<std::size_t>(e.t - 1)];
    a(e.i - 1, e.j - 1) = 1;
    a(e.j - 1, e.i - 1) = 1;
  }
}

GraphSequence::GraphSequence(std::vector<AdjLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) {
    throw ValidationError("GraphSequence: need T >= 1");
  }
  n_ = layers_.front().rows();
  if (n_ < 1) {
    throw ValidationError("GraphSequence: need n >= 1");
  }
  for (const AdjLayer& a : layers_) {
    if (a.rows() != n_ || a.cols() != n_) {
      throw DimensionError("GraphSequence: layers must all be n x n");
    }
    for (Index i = 0; i < n_; ++i) {
      if (a(i, i) != 0) {
        throw ValidationError("GraphSequence: nonzero diagonal");
      }
      for (Index j = i + 1; j < n_; ++j) {
        if (a(i, j) > 1 || a(i, j) != a(j, i)) {
          throw ValidationError("GraphSequence: layers must be symmetric binary");
        }
      }
    }
  }
}

const AdjLayer& GraphSequence::layer(Index t) const {
  if (t < 1 || t > layer_count()) {
    throw RangeError("layer index " + std::to_string(t) + " out of [1," +
                     std::to_string(layer_count()) + "]");
  }
  return layers_[static_cast<std::size_t>(t - 1)];
}

std::vector<Edge> GraphSequence::canonical_edges() const {
  std::vector<Edge> edges;
  for (Index t = 1; t <= layer_count(); ++t) {
    const AdjLayer& a = layer(t);
    for (Index i = 0; i < n_; ++i) {
      for (Index j = i + 1; j < n_; ++j) {
        if (a(i, j) != 0) {
          edges.push_back(Edge{t, i + 1, j + 1});
        }
      }
    }
  }
  return edges;
}

GraphSequence parse_graph_sequence(std::istream& input) {
  std::string raw;
  int line_no = 0;
  Index n = 0;
  Index T = 0;
  bool have_header = false;
  std::vector<Edge> edges;

  while (std::getline(input, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') {
      raw.pop_back();
    }
    std::string_view line(raw);
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      continue;
    }
    if (!have_header) {
      if (tokens.size() != 4 || tokens[0] != "dnet" || tokens[1] != "v1" ||
          !tokens[2].starts_with("n=") || !tokens[3].starts_with("T=")) {
        throw ParseError(line_no, "expected header 'dnet v1 n=<int> T=<int>'");
      }
      if (!parse_int(tokens[2].substr(2), n) || !parse_int(tokens[3].substr(2), T)) {
        throw ParseError(line_no, "malformed n= or T= in header");
      }
      if (n < 1 || T < 1) {
        throw ParseError(line_no, "header requires n >= 1 and T >= 1");
      }
      have_header = true;
      continue;
    }
    Edge e;
    if (tokens.size() != 3 || !parse_int(tokens[0], e.t) || !parse_int(tokens[1], e.i) ||
        !parse_int(tokens[2], e.j)) {
      throw ParseError(line_no, "expected edge line '<t> <i> <j>'");
    }
    try {
      validate_edge(e, n, T);
    } catch (const ValidationError& err) {
      throw ParseError(line_no, err.what());
    }
    edges.push_back(e);
  }
  if (!have_header) {
    throw ParseError(line_no, "missing 'dnet v1' header");
  }
  return GraphSequence(n, T, edges);
}

void serialize_graph_sequence(const GraphSequence& g, std::ostream& out) {
  out << "dnet v1 n=" << g.node_count() << " T=" << g.layer_count() << "\n";
  for (const Edge& e : g.canonical_edges()) {
    out << e.t << " " << e.i << " " << e.j << "\n";
  }
}

double sequence_sparsity_estimate(const GraphSequence& g) {
  const Index n = g.node_count();
  const Index T = g.layer_count();
  Matrix counts = Matrix::Zero(n, n);
  for (Index t = 1; t <= T; ++t) {
    counts += g.layer(t).cast<double>();
  }
  double best = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      best = std::max(best, counts(i, j));
    }
  }
  return best / static_cast<double>(T);
}

SegmentModel::SegmentModel(Index n, Index T, double rho, std::vector<Index> change_points,
                           std::vector<SubspaceBasis> bases, std::vector<Matrix> cores)
    : n_(n),
      T_(T),
      rho_(rho),
      change_points_(std::move(change_points)),
      bases_(std::move(bases)),
      cores_(std::move(cores)) {
  if (n_ < 1 || T_ < 1) {
    throw ValidationError("SegmentModel: need n >= 1 and T >= 1");
  }
  if (!(rho_ > 0.0 && rho_ <= 1.0)) {
    throw ValidationError("SegmentModel: rho must lie in (0,1]");
  }
  for (std::size_t k = 0; k < change_points_.size(); ++k) {
    const Index tau = change_points_[k];
    if (tau <= 1 || tau >= T_) {
      throw ValidationError("SegmentModel: change points must be interior to (1,T)");
    }
    if (k > 0 && tau <= change_points_[k - 1]) {
      throw ValidationError("SegmentModel: change points must be strictly increasing");
    }
  }
  if (bases_.size() != change_points_.size() + 1) {
    throw ValidationError("SegmentModel: need one basis per segment");
  }
  if (cores_.size() != static_cast<std::size_t>(T_)) {
    throw ValidationError("SegmentModel: need one core matrix per layer");
  }
  for (std::size_t k = 0; k + 1 < bases_.size(); ++k) {
    if (subspace_distance_sq(bases_[k], bases_[k + 1]) <= 0.0) {
      throw ValidationError("SegmentModel: consecutive segment subspaces coincide");
    }
  }
  for (Index t = 1; t <= T_; ++t) {
    const Index k = segment_of(t);
    const Matrix& m = cores_[static_cast<std::size_t>(t - 1)];
    const Index r = bases_[static_cast<std::size_t>(k)].rank();
    if (m.rows() != r || m.cols() != r) {
      throw DimensionError("SegmentModel: core size does not match segment rank");
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (r > 0 && sv(r - 1) <= 1e-12 * sv(0)) {
      throw ValidationError("SegmentModel: core matrix at t=" + std::to_string(t) +
                            " is rank deficient");
    }
    const Matrix p = prob_matrix(t);
    if (p.minCoeff() < -1e-9 || p.maxCoeff() > 1.0 + 1e-9) {
      throw ValidationError("SegmentModel: P_t entries leave [0,1] at t=" + std::to_string(t));
    }
  }
}

Index SegmentModel::segment_of(Index t) const {
  if (t < 1 || t > T_) {
    throw RangeError("segment_of: t out of [1,T]");
  }
  const auto it = std::upper_bound(change_points_.begin(), change_points_.end(), t);
  return static_cast<Index>(it - change_points_.begin());
}

const Matrix& SegmentModel::core(Index t) const {
  if (t < 1 || t > T_) {
    throw RangeError("core: t out of [1,T]");
  }
  return cores_[static_cast<std::size_t>(t - 1)];
}

Matrix SegmentModel::prob_matrix(Index t) const {
  const Index k = segment_of(t);
  const Matrix& v = bases_[static_cast<std::size_t>(k)].columns();
  return rho_ * v * core(t) * v.transpose();
}

SymMatrix SegmentModel::prob_square(Index t) const {
  const Index k = segment_of(t);
  const Matrix& v = bases_[static_cast<std::size_t>(k)].columns();
  const Matrix& m = core(t);
  return SymMatrix(rho_ * rho_ * v * (m * m) * v.transpose());
}

SymMatrix SegmentModel::population_window(Index last, Index L) const {
  const Index first = last - L + 1;
  if (L < 1 || first < 1 || last > T_) {
    throw RangeError("population_window: [" + std::to_string(first) + "," +
                     std::to_string(last) + "] out of [1," + std::to_string(T_) + "]");
  }
  Matrix sum = Matrix::Zero(n_, n_);
  Index t = first;
  while (t <= last) {
    const Index k = segment_of(t);
    Index stop = last;
    if (static_cast<std::size_t>(k) < change_points_.size()) {
      stop = std::min(stop, change_points_[static_cast<std::size_t>(k)] - 1);
    }
    const Matrix& v = bases_[static_cast<std::size_t>(k)].columns();
    Matrix core_sum = Matrix::Zero(v.cols(), v.cols());
    for (Index u = t; u <= stop; ++u) {
      const Matrix& m = core(u);
      core_sum += m * m;
    }
    sum += rho_ * rho_ * v * core_sum * v.transpose();
    t = stop + 1;
  }
  return SymMatrix(std::move(sum));
}

}  // namespace subtrack
