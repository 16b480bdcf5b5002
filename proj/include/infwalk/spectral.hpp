#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"
#include "graph.hpp"

namespace infwalk {

/// Dense symmetric matrix. Construction rejects inputs whose asymmetry exceeds
/// 1e-9 (scaled by the largest entry when that exceeds 1) and stores the
/// average of the input and its transpose.
class DenseSymMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;

  DenseSymMatrix() = default;

  explicit DenseSymMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols())
      throw Error(ErrorKind::Usage, "matrix.shape", "symmetric matrix must be square");
    if (values_.size() > 0) {
      const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
      const double asym = (values_ - values_.transpose()).cwiseAbs().maxCoeff();
      if (!(asym <= kSymmetryTolerance * scale))
        throw Error(ErrorKind::Numerical, "matrix.asymmetric",
                    "matrix asymmetry " + std::to_string(asym) + " exceeds tolerance");
    }
    Eigen::MatrixXd sym = 0.5 * (values_ + values_.transpose());
    values_ = std::move(sym);
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// Flips each column so that its entry of largest magnitude is positive
/// (lowest row index among equal magnitudes).
inline void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

/// Full eigendecomposition of the symmetrized transition matrix
/// D^{-1/2} A D^{-1/2}, eigenvalues in descending order.
struct SpectralCache {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues[j]
  Eigen::VectorXd degree;
  double volume = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }

  /// Stationary distribution d / volume.
  Eigen::VectorXd stationary() const { return degree / volume; }
};

/// D^{-1/2} A D^{-1/2}.
inline DenseSymMatrix sym_transition(const Graph& g) {
  validate_walkable(g);
  const Eigen::ArrayXd inv_sqrt = g.degree_vector().array().rsqrt();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
  for (const auto& e : g.edges()) {
    const double v = e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
    p(e.u, e.v) = v;
    p(e.v, e.u) = v;
  }
  return DenseSymMatrix(std::move(p));
}

inline SpectralCache eigendecompose(const DenseSymMatrix& m, const Graph& g) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (static_cast<std::size_t>(n) != g.num_nodes())
    throw Error(ErrorKind::Usage, "spectral.shape", "matrix and graph sizes differ");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "spectral.no_convergence", "eigendecomposition did not converge");

  SpectralCache cache;
  cache.eigenvalues = solver.eigenvalues().reverse();
  cache.eigenvectors = solver.eigenvectors().rowwise().reverse();
  canonicalize_signs(cache.eigenvectors);
  cache.degree = g.degree_vector();
  cache.volume = g.volume();

  if (std::abs(cache.eigenvalues[0] - 1.0) > 1e-8)
    throw Error(ErrorKind::Numerical, "spectral.top_eigenvalue",
                "top eigenvalue " + std::to_string(cache.eigenvalues[0]) + " differs from 1");
  if (cache.eigenvalues.cwiseAbs().maxCoeff() > 1.0 + 1e-8)
    throw Error(ErrorKind::Numerical, "spectral.range", "eigenvalue outside [-1, 1]");
  const Eigen::VectorXd top = cache.stationary().cwiseSqrt();
  if ((cache.eigenvectors.col(0) - top).norm() > 1e-6)
    throw Error(ErrorKind::Numerical, "spectral.top_eigenvector", "top eigenvector is not sqrt(stationary)");
  return cache;
}

/// Convenience: sym_transition followed by eigendecompose.
inline SpectralCache decompose_graph(const Graph& g) { return eigendecompose(sym_transition(g), g); }

/// Second largest eigenvalue of the symmetrized transition matrix.
inline double fiedler_value(const SpectralCache& s) {
  if (s.size() < 2) throw Error(ErrorKind::Usage, "spectral.too_small", "Fiedler value needs n >= 2");
  return s.eigenvalues[1];
}

/// max_{j>=2} |lambda_j|; governs how fast P^k approaches its limit.
inline double second_largest_modulus(const SpectralCache& s) {
  if (s.size() < 2) throw Error(ErrorKind::Usage, "spectral.too_small", "needs n >= 2");
  return s.eigenvalues.tail(s.size() - 1).cwiseAbs().maxCoeff();
}

/// Pseudoinverse of I - D^{-1/2} A D^{-1/2}: sum_{j>=2} (1 - lambda_j)^{-1} w_j w_j^T.
inline DenseSymMatrix normalized_laplacian_pinv(const SpectralCache& s) {
  const auto n = static_cast<Eigen::Index>(s.size());
  if (n < 1) throw Error(ErrorKind::Usage, "spectral.too_small", "empty spectrum");
  Eigen::VectorXd inv_gap(n - 1);
  for (Eigen::Index j = 1; j < n; ++j) {
    const double gap = 1.0 - s.eigenvalues[j];
    if (gap <= 1e-9)
      throw Error(ErrorKind::Validation, "graph.disconnected", "eigenvalue 1 has multiplicity > 1");
    inv_gap[j - 1] = 1.0 / gap;
  }
  const auto tail = s.eigenvectors.rightCols(n - 1);
  Eigen::MatrixXd pinv = tail * inv_gap.asDiagonal() * tail.transpose();
  return DenseSymMatrix(std::move(pinv));
}

/// Laplacian D - A.
inline Eigen::MatrixXd laplacian_matrix(const Graph& g) {
  Eigen::MatrixXd l = -g.adjacency_matrix();
  l.diagonal() += g.degree_vector();
  return l;
}

/// Moore-Penrose pseudoinverse of D - A via its own eigendecomposition;
/// eigenvalues below 1e-9 times the largest count as zero.
inline DenseSymMatrix unnormalized_laplacian_pinv(const Graph& g) {
  validate_walkable(g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian_matrix(g));
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Numerical, "spectral.no_convergence", "Laplacian eigendecomposition did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double tol = 1e-9 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index j = 0; j < ev.size(); ++j)
    if (ev[j] > tol) inv[j] = 1.0 / ev[j];
  const auto& u = solver.eigenvectors();
  Eigen::MatrixXd pinv = u * inv.asDiagonal() * u.transpose();
  return DenseSymMatrix(std::move(pinv));
}

/// CSV "index,eigenvalue", 1-based index, descending eigenvalues.
inline void write_spectrum_csv(std::ostream& out, const SpectralCache& s) {
  out << "index,eigenvalue\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < s.eigenvalues.size(); ++j) out << (j + 1) << ',' << s.eigenvalues[j] << '\n';
}

}  // namespace infwalk
