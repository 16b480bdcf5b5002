#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "graph.hpp"
#include "pmi.hpp"
#include "spectral.hpp"

namespace infwalk {

enum class EmbedMethod { InfiniteWalk, BinarizedLpinv, Adjacency, LimitRaw };

inline const char* method_name(EmbedMethod m) {
  switch (m) {
    case EmbedMethod::InfiniteWalk: return "infinitewalk";
    case EmbedMethod::BinarizedLpinv: return "binlap";
    case EmbedMethod::Adjacency: return "adjacency";
    case EmbedMethod::LimitRaw: return "limitraw";
  }
  return "unknown";
}

inline EmbedMethod parse_method(const std::string& s) {
  if (s == "infinitewalk") return EmbedMethod::InfiniteWalk;
  if (s == "binlap") return EmbedMethod::BinarizedLpinv;
  if (s == "adjacency") return EmbedMethod::Adjacency;
  if (s == "limitraw") return EmbedMethod::LimitRaw;
  throw Error(ErrorKind::Usage, "config.method", "unknown embedding method '" + s + "'");
}

struct EmbedConfig {
  std::size_t dimension = 128;
  EmbedMethod method = EmbedMethod::InfiniteWalk;
  int window = 10;                    // infinitewalk
  double epsilon = std::exp(-36.0);   // infinitewalk
  RampKind ramp = RampKind::Epsilon;  // infinitewalk
  double quantile = 0.95;             // binlap

  void validate(std::size_t n) const {
    require(dimension >= 1 && dimension <= n, "config.dimension", "embedding dimension must lie in [1, n]");
    require(window >= 1, "config.window", "window T must be >= 1");
    require(quantile > 0.0 && quantile < 1.0, "config.quantile", "quantile q must lie in (0, 1)");
    require(epsilon > 0.0 && epsilon < 1.0, "config.epsilon", "epsilon must lie in (0, 1)");
  }
};

/// n x d node representations.
struct Embedding {
  Eigen::MatrixXd vectors;
  EmbedConfig config;
  Eigen::VectorXd eigenvalues_used;  // signed, aligned with columns
  std::vector<std::string> node_names;

  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
};

/// Rank-d symmetric factorization: keeps the d eigenpairs of largest |w|
/// (ties: larger signed value, then lower index) and returns V diag(sqrt|w|).
inline Embedding factorize(const DenseSymMatrix& m, std::size_t d) {
  const std::size_t n = m.size();
  if (d < 1 || d > n) throw Error(ErrorKind::Usage, "config.dimension", "embedding dimension must lie in [1, n]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "embed.no_convergence", "eigendecomposition did not converge");
  const Eigen::VectorXd& w = solver.eigenvalues();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double aa = std::abs(w[a]), ab = std::abs(w[b]);
    if (aa != ab) return aa > ab;
    if (w[a] != w[b]) return w[a] > w[b];
    return a < b;
  });

  Embedding e;
  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd v(n, dim);
  e.eigenvalues_used.resize(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    v.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    e.eigenvalues_used[k] = w[order[static_cast<std::size_t>(k)]];
  }
  canonicalize_signs(v);
  e.vectors = v * e.eigenvalues_used.cwiseAbs().cwiseSqrt().asDiagonal();
  e.config.dimension = d;
  if (!e.vectors.allFinite()) throw Error(ErrorKind::Numerical, "embed.non_finite", "embedding has NaN or Inf entries");
  return e;
}

/// B_ij = [lpinv_ij >= c] with c the nearest-rank q-quantile of all n^2 entries.
/// Entries within 1e-12 * max|lpinv| below c count as ties with c.
struct BinaryMatrix {
  BoolMatrix values;
  double threshold = 0.0;
  double quantile = 0.0;

  double density() const {
    return values.size() == 0 ? 0.0 : static_cast<double>(values.count()) / static_cast<double>(values.size());
  }
  Eigen::MatrixXd as_real() const { return values.cast<double>(); }
};

/// Nearest-rank quantile: the ceil(q N)-th smallest of `entries` (1-based). The
/// product q N is rounded down by 1e-9 first so that, e.g., 0.9 * 100 is rank 90.
inline double nearest_rank_quantile(std::vector<double> entries, double q) {
  if (entries.empty()) throw Error(ErrorKind::Usage, "quantile.empty", "quantile of an empty set");
  const auto count = static_cast<double>(entries.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * count - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, entries.size());
  std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(rank - 1), entries.end());
  return entries[rank - 1];
}

inline BinaryMatrix binarize_lpinv(const DenseSymMatrix& lpinv, double q) {
  require(q > 0.0 && q < 1.0, "config.quantile", "quantile q must lie in (0, 1)");
  const auto& m = lpinv.matrix();
  BinaryMatrix b;
  b.quantile = q;
  b.threshold = nearest_rank_quantile(std::vector<double>(m.data(), m.data() + m.size()), q);
  const double tie = 1e-12 * m.cwiseAbs().maxCoeff();
  b.values = (m.array() >= b.threshold - tie).matrix();
  return b;
}

/// Builds the matrix selected by `cfg.method` and factorizes it. `cache` may
/// supply a precomputed decomposition of the graph's transition matrix.
inline Embedding embed(const Graph& g, const EmbedConfig& cfg, const SpectralCache* cache = nullptr) {
  validate_walkable(g);
  cfg.validate(g.num_nodes());
  auto spectrum = [&]() { return cache ? *cache : decompose_graph(g); };

  Embedding e;
  switch (cfg.method) {
    case EmbedMethod::InfiniteWalk: {
      PmiConfig pc;
      pc.window = cfg.window;
      pc.epsilon = cfg.epsilon;
      pc.ramp = cfg.ramp;
      e = factorize(pmi_approx(pmi_limit(g, spectrum()), pc).values, cfg.dimension);
      break;
    }
    case EmbedMethod::BinarizedLpinv: {
      const auto b = binarize_lpinv(unnormalized_laplacian_pinv(g), cfg.quantile);
      e = factorize(DenseSymMatrix(b.as_real()), cfg.dimension);
      break;
    }
    case EmbedMethod::Adjacency:
      e = factorize(DenseSymMatrix(g.adjacency_matrix()), cfg.dimension);
      break;
    case EmbedMethod::LimitRaw:
      e = factorize(pmi_limit(g, spectrum()).values, cfg.dimension);
      break;
  }
  e.config = cfg;
  e.node_names.reserve(g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i) e.node_names.push_back(g.name(i));
  return e;
}

}  // namespace infwalk
