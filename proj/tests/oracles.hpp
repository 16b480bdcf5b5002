#pragma once

// Independent reference computations used only by the tests. None of these
// share a code path with the library routines they check.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "infwalk/graph.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t n) { return Dense(n, std::vector<double>(n, 0.0)); }

inline Dense multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// vol * ((1/T) sum_k P^k) D^{-1} with the row-stochastic P = D^{-1} A,
/// accumulated with plain loops.
inline Eigen::MatrixXd pmi_argument(const infwalk::Graph& g, int window) {
  const std::size_t n = g.num_nodes();
  Dense p = zeros(n);
  for (const auto& e : g.edges()) {
    p[e.u][e.v] += e.weight / g.degree()[e.u];
    p[e.v][e.u] += e.weight / g.degree()[e.v];
  }
  Dense power = p, sum = p;
  for (int k = 2; k <= window; ++k) {
    power = multiply(power, p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum[i][j] += power[i][j];
  }
  Eigen::MatrixXd arg(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) arg(i, j) = g.volume() * sum[i][j] / window / g.degree()[j];
  return arg;
}

/// L^+ = (L + J/n)^{-1} - J/n, valid for connected graphs.
inline Eigen::MatrixXd laplacian_pinv(const infwalk::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd l = -g.adjacency_matrix();
  l.diagonal() += g.degree_vector();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  return (l + j).partialPivLu().inverse() - j;
}

/// Lt^+ = (Lt + u u^T)^{-1} - u u^T with u = sqrt(d / vol), valid for connected graphs.
inline Eigen::MatrixXd normalized_laplacian_pinv(const infwalk::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  const Eigen::VectorXd s = g.degree_vector().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd lt = Eigen::MatrixXd::Identity(n, n) - s.asDiagonal() * g.adjacency_matrix() * s.asDiagonal();
  const Eigen::VectorXd u = (g.degree_vector() / g.volume()).cwiseSqrt();
  const Eigen::MatrixXd uu = u * u.transpose();
  return (lt + uu).partialPivLu().inverse() - uu;
}

/// M_inf from the brute-force normalized pseudoinverse.
inline Eigen::MatrixXd limit_matrix(const infwalk::Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd core = normalized_laplacian_pinv(g) - Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd s = (g.volume() / g.degree_vector().array()).sqrt().matrix();
  return (s.asDiagonal() * core * s.asDiagonal()).array() + 1.0;
}

inline double det3(const Eigen::Matrix3d& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

struct F1 {
  double micro, macro;
};

/// Confusion counts from an explicit node x label decision table.
inline F1 f1(const std::vector<std::vector<int>>& predicted, const std::vector<std::vector<int>>& truth, int labels) {
  std::vector<double> tp(labels), fp(labels), fn(labels);
  for (std::size_t i = 0; i < truth.size(); ++i)
    for (int l = 0; l < labels; ++l) {
      bool p = false, t = false;
      for (int x : predicted[i]) p = p || x == l;
      for (int x : truth[i]) t = t || x == l;
      if (p && t) tp[l] += 1;
      if (p && !t) fp[l] += 1;
      if (!p && t) fn[l] += 1;
    }
  double TP = 0, FP = 0, FN = 0, macro = 0;
  int support = 0;
  for (int l = 0; l < labels; ++l) {
    TP += tp[l];
    FP += fp[l];
    FN += fn[l];
    if (tp[l] + fn[l] > 0) {
      macro += 2 * tp[l] + fp[l] + fn[l] > 0 ? 2 * tp[l] / (2 * tp[l] + fp[l] + fn[l]) : 0.0;
      ++support;
    }
  }
  return {2 * TP + FP + FN > 0 ? 2 * TP / (2 * TP + FP + FN) : 0.0, support ? macro / support : 0.0};
}

/// Relative Frobenius difference ||a - b|| / ||b||.
inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace oracle
