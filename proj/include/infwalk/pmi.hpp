#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "spectral.hpp"

namespace infwalk {

/// Floor applied before the logarithm: max(epsilon, x) or max(1, x).
enum class RampKind { Epsilon, One };

inline const char* ramp_name(RampKind r) { return r == RampKind::One ? "R1" : "Reps"; }

struct PmiConfig {
  int window = 10;             // T
  double negative_ratio = 1.0; // b
  double epsilon = std::exp(-36.0);
  RampKind ramp = RampKind::Epsilon;

  double floor() const { return ramp == RampKind::One ? 1.0 : epsilon; }

  void validate() const {
    require(window >= 1, "config.window", "window T must be >= 1");
    require(negative_ratio > 0.0, "config.negative_ratio", "negative sampling ratio b must be > 0");
    require(epsilon > 0.0 && epsilon < 1.0, "config.epsilon", "epsilon must lie in (0, 1)");
  }
};

enum class PmiKind { ExactPowerSum, ClosedForm, ApproxFromLimit, Empirical };

inline const char* pmi_kind_name(PmiKind k) {
  switch (k) {
    case PmiKind::ExactPowerSum: return "exact_power_sum";
    case PmiKind::ClosedForm: return "closed_form";
    case PmiKind::ApproxFromLimit: return "approx_from_limit";
    case PmiKind::Empirical: return "empirical";
  }
  return "unknown";
}

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Log-ramped PMI matrix. Ramped entries hold log(floor) - log(b) exactly.
struct PmiMatrix {
  DenseSymMatrix values;
  PmiConfig config;
  PmiKind kind = PmiKind::ExactPowerSum;
  BoolMatrix ramped_mask;

  std::size_t size() const noexcept { return values.size(); }
  std::size_t ramped_count() const { return static_cast<std::size_t>(ramped_mask.count()); }
};

/// Limiting PMI matrix M_inf = J + Dt^{-1/2} (Lt^+ - I) Dt^{-1/2}, Dt = D / vol.
struct LimitMatrix {
  DenseSymMatrix values;
  Eigen::VectorXd degree;
  double volume = 0.0;
};

struct WalkConfig {
  std::size_t walks_per_node = 80;  // gamma
  std::size_t walk_length = 40;     // L, vertices per walk
  int window = 10;                  // T
  std::uint64_t seed = 0;
  unsigned threads = 0;             // 0: INFWALK_THREADS or hardware concurrency

  void validate() const {
    require(walks_per_node >= 1, "config.walks", "walks per node must be >= 1");
    require(window >= 1, "config.window", "window T must be >= 1");
    require(walk_length >= static_cast<std::size_t>(window) + 1, "config.walk_length", "walk length must be >= T + 1");
  }
};

/// Entrywise log(max(floor, arg)) - log(b) on the symmetrized argument.
inline PmiMatrix log_ramp(const Eigen::MatrixXd& argument, const PmiConfig& cfg, PmiKind kind) {
  const Eigen::MatrixXd arg = 0.5 * (argument + argument.transpose());
  const double floor = cfg.floor();
  const double shift = std::log(cfg.negative_ratio);
  PmiMatrix out;
  out.config = cfg;
  out.kind = kind;
  out.ramped_mask = (arg.array() < floor).matrix();
  Eigen::MatrixXd values = arg.array().max(floor).log() - shift;
  out.values = DenseSymMatrix(std::move(values));
  return out;
}

/// Pre-log argument vol * ((1/T) sum_{k=1..T} P^k) D^{-1}, accumulated as powers
/// of the symmetrized transition matrix.
inline Eigen::MatrixXd power_sum_argument(const Graph& g, int window) {
  const Eigen::MatrixXd p = sym_transition(g).matrix();
  Eigen::MatrixXd power = p;
  Eigen::MatrixXd sum = p;
  for (int k = 2; k <= window; ++k) {
    power = power * p;
    sum += power;
  }
  const Eigen::ArrayXd inv_sqrt = g.degree_vector().array().rsqrt();
  Eigen::MatrixXd arg = (g.volume() / window) * (inv_sqrt.matrix().asDiagonal() * sum * inv_sqrt.matrix().asDiagonal());
  return 0.5 * (arg + arg.transpose());
}

/// Finite-window PMI by explicit power sums; the reference for every other route.
inline PmiMatrix pmi_exact(const Graph& g, const PmiConfig& cfg) {
  cfg.validate();
  validate_walkable(g);
  return log_ramp(power_sum_argument(g, cfg.window), cfg, PmiKind::ExactPowerSum);
}

/// Pre-log argument J + T^{-1} Dt^{-1/2} [sum_{j>=2} lambda_j (1 - lambda_j^T) / (1 - lambda_j) w_j w_j^T] Dt^{-1/2}.
/// Entries that cancel to within rounding of zero are set to exactly zero.
inline Eigen::MatrixXd spectral_argument(const SpectralCache& s, int window) {
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::VectorXd coef(n - 1);
  for (Eigen::Index j = 1; j < n; ++j) {
    const double lambda = s.eigenvalues[j];
    const double gap = 1.0 - lambda;
    if (gap <= 1e-9) throw Error(ErrorKind::Validation, "graph.disconnected", "eigenvalue 1 has multiplicity > 1");
    coef[j - 1] = lambda * (1.0 - std::pow(lambda, window)) / gap;
  }
  const auto tail = s.eigenvectors.rightCols(n - 1);
  const Eigen::VectorXd scale = (s.volume / s.degree.array()).sqrt().matrix();
  Eigen::MatrixXd inner = tail * coef.asDiagonal() * tail.transpose();
  Eigen::MatrixXd arg = (scale.asDiagonal() * inner * scale.asDiagonal()) / window;
  arg.array() += 1.0;
  arg = 0.5 * (arg + arg.transpose()).eval();
  const double snap = 1e-10 * std::max(1.0, arg.cwiseAbs().maxCoeff());
  arg = (arg.array().abs() <= snap).select(0.0, arg);
  return arg;
}

/// Finite-window PMI from the spectral closed form; b must be 1.
inline PmiMatrix pmi_closed_form(const Graph& g, const SpectralCache& s, const PmiConfig& cfg) {
  cfg.validate();
  validate_walkable(g);
  if (cfg.negative_ratio != 1.0)
    throw Error(ErrorKind::Usage, "pmi.negative_ratio", "closed form requires negative sampling ratio b = 1");
  if (s.size() != g.num_nodes()) throw Error(ErrorKind::Usage, "spectral.shape", "cache does not match graph");
  return log_ramp(spectral_argument(s, cfg.window), cfg, PmiKind::ClosedForm);
}

/// M_inf from the normalized Laplacian pseudoinverse.
inline LimitMatrix pmi_limit(const Graph& g, const SpectralCache& s) {
  validate_walkable(g);
  if (s.size() != g.num_nodes()) throw Error(ErrorKind::Usage, "spectral.shape", "cache does not match graph");
  Eigen::MatrixXd core = normalized_laplacian_pinv(s).matrix();
  core.diagonal().array() -= 1.0;
  const Eigen::VectorXd scale = (g.volume() / g.degree_vector().array()).sqrt().matrix();
  Eigen::MatrixXd m = scale.asDiagonal() * core * scale.asDiagonal();
  m.array() += 1.0;
  return {DenseSymMatrix(std::move(m)), g.degree_vector(), g.volume()};
}

/// M_inf = J + vol ((I - 1 dt^T) L^+ (I - dt 1^T) - D^{-1}) from the unnormalized
/// Laplacian pseudoinverse; independent of the transition-matrix spectrum.
inline LimitMatrix pmi_limit_rank3(const Graph& g) {
  validate_walkable(g);
  const Eigen::MatrixXd lp = unnormalized_laplacian_pinv(g).matrix();
  const Eigen::VectorXd dt = g.degree_vector() / g.volume();
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  // L^+ (I - dt 1^T) = L^+ - (L^+ dt) 1^T
  Eigen::MatrixXd right = lp - (lp * dt) * ones.transpose();
  // (I - 1 dt^T) X = X - 1 (dt^T X)
  Eigen::MatrixXd inner = right - ones * (dt.transpose() * right);
  inner.diagonal() -= g.degree_vector().cwiseInverse();
  Eigen::MatrixXd m = g.volume() * inner;
  m.array() += 1.0;
  return {DenseSymMatrix(std::move(m)), g.degree_vector(), g.volume()};
}

/// log(R(J + M_inf / T)); the finite-window approximation built from the limit.
inline PmiMatrix pmi_approx(const LimitMatrix& m, const PmiConfig& cfg) {
  cfg.validate();
  if (cfg.negative_ratio != 1.0)
    throw Error(ErrorKind::Usage, "pmi.negative_ratio", "limit-based PMI requires negative sampling ratio b = 1");
  Eigen::MatrixXd arg = m.values.matrix() / cfg.window;
  arg.array() += 1.0;
  return log_ramp(arg, cfg, PmiKind::ApproxFromLimit);
}

struct ErrorReport {
  double relative_frobenius_error = 0.0;
  double ramped_disagreement_fraction = 0.0;
  int window = 0;
  RampKind ramp = RampKind::One;
};

/// Relative Frobenius error of `approx` against `exact` and the fraction of
/// entries ramped in exactly one of them.
inline ErrorReport approx_error_report(const PmiMatrix& exact, const PmiMatrix& approx) {
  if (exact.size() != approx.size())
    throw Error(ErrorKind::Usage, "pmi.shape", "PMI matrices differ in dimension");
  ErrorReport r;
  r.window = exact.config.window;
  r.ramp = exact.config.ramp;
  const double diff = (exact.values.matrix() - approx.values.matrix()).norm();
  const double base = exact.values.matrix().norm();
  r.relative_frobenius_error = diff == 0.0 ? 0.0 : diff / base;
  const double n = static_cast<double>(exact.size());
  const auto disagree = (exact.ramped_mask.array() != approx.ramped_mask.array()).count();
  r.ramped_disagreement_fraction = n == 0.0 ? 0.0 : static_cast<double>(disagree) / (n * n);
  return r;
}

struct Deviation {
  double max_abs = 0.0;
  std::size_t compared = 0;  // entries unramped in both matrices
};

inline Deviation max_abs_deviation(const PmiMatrix& a, const PmiMatrix& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Usage, "pmi.shape", "PMI matrices differ in dimension");
  Deviation d;
  const auto n = static_cast<Eigen::Index>(a.size());
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a.ramped_mask(i, j) || b.ramped_mask(i, j)) continue;
      d.max_abs = std::max(d.max_abs, std::abs(a.values(i, j) - b.values(i, j)));
      ++d.compared;
    }
  return d;
}

/// Worker count from INFWALK_THREADS, else hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("INFWALK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// PMI estimated from simulated walks: `walks_per_node` walks of `walk_length`
/// vertices start at every node; each pair within `window` hops is counted in
/// both orders. Each (start node, walk index) draws from its own substream, so
/// the output depends only on the graph and the seed.
inline PmiMatrix empirical_pmi(const Graph& g, const WalkConfig& wcfg, PmiConfig ramp_cfg = {}) {
  wcfg.validate();
  validate_walkable(g);
  ramp_cfg.window = wcfg.window;
  ramp_cfg.negative_ratio = 1.0;
  ramp_cfg.validate();
  const std::size_t n = g.num_nodes();

  std::vector<double> cumulative;
  std::vector<std::size_t> offsets(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) {
    double acc = 0.0;
    for (const auto& nb : g.neighbors(u)) cumulative.push_back(acc += nb.weight);
    offsets[u + 1] = cumulative.size();
  }

  const unsigned threads = std::min<unsigned>(wcfg.threads ? wcfg.threads : default_thread_count(),
                                              static_cast<unsigned>(n));
  const auto window = static_cast<std::size_t>(wcfg.window);
  std::vector<std::vector<std::uint64_t>> counts(threads, std::vector<std::uint64_t>(n * n, 0));

  auto worker = [&](unsigned t) {
    auto& local = counts[t];
    std::vector<NodeId> walk(wcfg.walk_length);
    for (NodeId start = t; start < n; start += threads) {
      for (std::size_t r = 0; r < wcfg.walks_per_node; ++r) {
        Rng rng(substream_seed(wcfg.seed, {start, r}));
        walk[0] = start;
        for (std::size_t i = 1; i < walk.size(); ++i) {
          const NodeId u = walk[i - 1];
          const auto first = cumulative.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
          const auto last = cumulative.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
          const double target = uniform01(rng) * *(last - 1);
          auto it = std::upper_bound(first, last, target);
          if (it == last) --it;
          walk[i] = g.neighbors(u)[static_cast<std::size_t>(it - first)].node;
        }
        for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
          const std::size_t stop = std::min(walk.size(), i + window + 1);
          for (std::size_t j = i + 1; j < stop; ++j) {
            ++local[walk[i] * n + walk[j]];
            ++local[walk[j] * n + walk[i]];
          }
        }
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (unsigned t = 1; t < threads; ++t)
    for (std::size_t k = 0; k < n * n; ++k) counts[0][k] += counts[t][k];
  const auto& total = counts[0];

  std::vector<double> marginal(n, 0.0);
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      marginal[i] += static_cast<double>(total[i * n + j]);
    }
  for (double m : marginal) pairs += m;

  Eigen::MatrixXd arg(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = static_cast<double>(total[i * n + j]);
      arg(i, j) = c == 0.0 ? 0.0 : c * pairs / (marginal[i] * marginal[j]);
    }
  return log_ramp(arg, ramp_cfg, PmiKind::Empirical);
}

}  // namespace infwalk
