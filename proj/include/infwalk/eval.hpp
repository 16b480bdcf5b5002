#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "embed.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace infwalk {

struct EvalConfig {
  std::vector<double> train_ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repeats = 10;
  double C = 1.0;
  std::uint64_t seed = 0;
  double convergence_tol = 1e-6;
  int max_iters = 1000;

  void validate() const {
    require(!train_ratios.empty(), "config.ratios", "at least one training ratio is required");
    for (double r : train_ratios) require(r > 0.0 && r < 1.0, "config.ratios", "training ratios must lie in (0, 1)");
    require(repeats >= 1, "config.repeats", "repeats must be >= 1");
    require(C > 0.0, "config.C", "C must be > 0");
    require(convergence_tol > 0.0, "config.tol", "convergence tolerance must be > 0");
    require(max_iters >= 1, "config.max_iters", "max_iters must be >= 1");
  }
};

/// One binary L2-regularized logistic regression scorer. Labels without
/// positive (or without negative) training examples get a constant scorer.
struct LogisticScorer {
  enum class Mode { Fitted, ConstantNegative, ConstantPositive };

  Mode mode = Mode::ConstantNegative;
  Eigen::VectorXd weights;
  double bias = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;

  double probability(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    switch (mode) {
      case Mode::ConstantNegative: return 0.0;
      case Mode::ConstantPositive: return 1.0;
      case Mode::Fitted: break;
    }
    const double z = x.dot(weights) + bias;
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
};

namespace detail {

/// log(1 + exp(-m)) without overflow.
inline double softplus_neg(double m) { return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

/// sigma(-m) = 1 / (1 + exp(m)).
inline double sigmoid_neg(double m) { return m >= 0.0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m)); }

}  // namespace detail

/// Minimizes (1/2)||w||^2 + C sum_i log(1 + exp(-y_i (w.x_i + b))) by damped
/// Newton iterations with backtracking; the bias is not regularized.
inline LogisticScorer fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y, double C, double tol,
                                   int max_iters) {
  const auto m = x.rows();
  const auto d = x.cols();
  LogisticScorer s;
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0) return s;
  if (positives == m) {
    s.mode = LogisticScorer::Mode::ConstantPositive;
    return s;
  }
  s.mode = LogisticScorer::Mode::Fitted;

  Eigen::MatrixXd xa(m, d + 1);
  xa.leftCols(d) = x;
  xa.col(d).setOnes();
  Eigen::VectorXd ys(m);
  for (Eigen::Index i = 0; i < m; ++i) ys[i] = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd margin = (xa * beta).cwiseProduct(ys);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) loss += detail::softplus_neg(margin[i]);
    return 0.5 * beta.head(d).squaredNorm() + C * loss;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  double f = objective(beta);
  for (int iter = 0; iter < max_iters; ++iter) {
    const Eigen::VectorXd margin = (xa * beta).cwiseProduct(ys);
    Eigen::VectorXd coef(m), curv(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sn = detail::sigmoid_neg(margin[i]);
      coef[i] = -C * ys[i] * sn;
      curv[i] = C * sn * (1.0 - sn);
    }
    Eigen::VectorXd grad = xa.transpose() * coef;
    grad.head(d) += beta.head(d);
    s.gradient_norm = grad.norm();
    s.iterations = iter;
    if (s.gradient_norm <= tol) break;

    Eigen::MatrixXd hess = xa.transpose() * curv.asDiagonal() * xa;
    hess.diagonal().head(d).array() += 1.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || step.dot(grad) >= 0.0) {
      hess.diagonal().array() += 1e-8 * std::max(1.0, hess.diagonal().maxCoeff());
      step = hess.ldlt().solve(-grad);
      if (!step.allFinite() || step.dot(grad) >= 0.0) step = -grad;
    }

    double t = 1.0;
    const double slope = grad.dot(step);
    double f_new = objective(beta + step);
    while (f_new > f + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      f_new = objective(beta + t * step);
    }
    if (!(f_new <= f)) break;  // no further decrease representable
    beta += t * step;
    f = f_new;
    s.iterations = iter + 1;
  }
  s.weights = beta.head(d);
  s.bias = beta[d];
  return s;
}

/// One-vs-rest scorers, one per label.
struct Classifier {
  std::vector<LogisticScorer> scorers;

  /// rows(features) x num_labels matrix of membership probabilities.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd p(features.rows(), static_cast<Eigen::Index>(scorers.size()));
    for (Eigen::Index i = 0; i < features.rows(); ++i)
      for (std::size_t l = 0; l < scorers.size(); ++l)
        p(i, static_cast<Eigen::Index>(l)) = scorers[l].probability(features.row(i));
    return p;
  }
};

inline Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const NodeId> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

/// Fits one scorer per label on the embedding rows of `train`.
inline Classifier train_logreg_ovr(const Embedding& emb, const LabeledDataset& data, std::span<const NodeId> train,
                                   const EvalConfig& cfg) {
  if (train.empty()) throw Error(ErrorKind::Usage, "eval.empty_train", "training set is empty");
  const Eigen::MatrixXd x = gather_rows(emb.vectors, train);
  Classifier clf;
  clf.scorers.reserve(static_cast<std::size_t>(data.num_labels));
  std::vector<int> y(train.size());
  for (int label = 0; label < data.num_labels; ++label) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto& set = data.labels[train[i]];
      y[i] = std::binary_search(set.begin(), set.end(), label) ? 1 : 0;
    }
    clf.scorers.push_back(fit_logistic(x, y, cfg.C, cfg.convergence_tol, cfg.max_iters));
  }
  return clf;
}

/// For each row, the k highest-probability labels in descending probability
/// (ties: lower label id first), returned sorted by label id.
inline std::vector<std::vector<int>> top_k_labels(const Eigen::MatrixXd& probabilities, std::span<const int> k) {
  const auto labels = probabilities.cols();
  if (static_cast<std::size_t>(probabilities.rows()) != k.size())
    throw Error(ErrorKind::Usage, "eval.shape", "one k per row is required");
  std::vector<std::vector<int>> out(k.size());
  std::vector<int> order(static_cast<std::size_t>(labels));
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 0 || k[i] > labels) throw Error(ErrorKind::Usage, "eval.k", "k exceeds the number of labels");
    const auto row = probabilities.row(static_cast<Eigen::Index>(i));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });
    out[i].assign(order.begin(), order.begin() + k[i]);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

inline std::vector<std::vector<int>> predict_top_k(const Classifier& clf, const Embedding& emb,
                                                   std::span<const NodeId> nodes, std::span<const int> k) {
  return top_k_labels(clf.probabilities(gather_rows(emb.vectors, nodes)), k);
}

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro-F1 over pooled (node, label) decisions; macro-F1 averages per-label F1
/// over labels that occur in `truth`.
inline F1Scores f1_scores(const std::vector<std::vector<int>>& predicted, const std::vector<std::vector<int>>& truth,
                          int num_labels) {
  if (predicted.size() != truth.size()) throw Error(ErrorKind::Usage, "eval.shape", "prediction/truth size mismatch");
  std::vector<long long> tp(static_cast<std::size_t>(num_labels), 0), fp(tp), fn(tp);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = predicted[i];
    const auto& t = truth[i];
    for (int l : p) {
      if (std::find(t.begin(), t.end(), l) != t.end())
        ++tp[static_cast<std::size_t>(l)];
      else
        ++fp[static_cast<std::size_t>(l)];
    }
    for (int l : t)
      if (std::find(p.begin(), p.end(), l) == p.end()) ++fn[static_cast<std::size_t>(l)];
  }
  auto f1 = [](long long a, long long b, long long c) {
    const long long denom = 2 * a + b + c;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(a) / static_cast<double>(denom);
  };
  const long long TP = std::accumulate(tp.begin(), tp.end(), 0LL);
  const long long FP = std::accumulate(fp.begin(), fp.end(), 0LL);
  const long long FN = std::accumulate(fn.begin(), fn.end(), 0LL);
  F1Scores s;
  s.micro = f1(TP, FP, FN);
  double sum = 0.0;
  int supported = 0;
  for (std::size_t l = 0; l < tp.size(); ++l) {
    if (tp[l] + fn[l] == 0) continue;
    sum += f1(tp[l], fp[l], fn[l]);
    ++supported;
  }
  s.macro = supported == 0 ? 0.0 : sum / supported;
  return s;
}

struct EvalRow {
  std::string method;
  double ratio = 0.0;
  int repeat_count = 0;
  double micro_f1_mean = 0.0;
  double micro_f1_std = 0.0;
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

/// Random train/test split for (ratio index, repeat index); the first
/// `train_size` entries of the returned permutation are the training nodes.
inline std::vector<NodeId> split_permutation(std::size_t n, std::uint64_t seed, std::size_t ratio_index,
                                             std::size_t repeat_index) {
  Rng rng(substream_seed(seed, {ratio_index, repeat_index}));
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  return perm;
}

/// Repeated random-split evaluation over every training ratio. Population
/// standard deviations are reported.
inline EvalReport evaluate_sweep(const Embedding& emb, const LabeledDataset& data, const EvalConfig& cfg,
                                 const std::string& method = "") {
  cfg.validate();
  const std::size_t n = data.labels.size();
  if (emb.num_nodes() != n) throw Error(ErrorKind::Usage, "eval.shape", "embedding and dataset node counts differ");
  if (n < 2) throw Error(ErrorKind::Usage, "eval.too_small", "evaluation needs at least two nodes");

  EvalReport report;
  for (std::size_t a = 0; a < cfg.train_ratios.size(); ++a) {
    const double ratio = cfg.train_ratios[a];
    const auto train_size = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))), 1, n - 1);
    std::vector<double> micro, macro;
    for (int r = 0; r < cfg.repeats; ++r) {
      const auto perm = split_permutation(n, cfg.seed, a, static_cast<std::size_t>(r));
      const std::span<const NodeId> train(perm.data(), train_size);
      const std::span<const NodeId> test(perm.data() + train_size, n - train_size);
      const auto clf = train_logreg_ovr(emb, data, train, cfg);
      std::vector<int> k(test.size());
      std::vector<std::vector<int>> truth(test.size());
      for (std::size_t i = 0; i < test.size(); ++i) {
        truth[i] = data.labels[test[i]];
        k[i] = static_cast<int>(truth[i].size());
      }
      const auto scores = f1_scores(predict_top_k(clf, emb, test, k), truth, data.num_labels);
      micro.push_back(scores.micro);
      macro.push_back(scores.macro);
    }
    auto mean_std = [](const std::vector<double>& v) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      return std::pair{mean, std::sqrt(var / static_cast<double>(v.size()))};
    };
    EvalRow row;
    row.method = method;
    row.ratio = ratio;
    row.repeat_count = cfg.repeats;
    std::tie(row.micro_f1_mean, row.micro_f1_std) = mean_std(micro);
    std::tie(row.macro_f1_mean, row.macro_f1_std) = mean_std(macro);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace infwalk
