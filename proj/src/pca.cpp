#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "blas.hpp"
#include "rslcr/error.hpp"
#include "rslcr/model.hpp"

namespace rslcr {

namespace {

// Lower triangle of A^T A (transpose = true) or A A^T, A column-major.
Eigen::MatrixXd scatter(const Eigen::MatrixXd& a, bool transpose) {
  const auto rows = static_cast<int>(a.rows());
  const auto cols = static_cast<int>(a.cols());
  const int n = transpose ? cols : rows;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  cblas_dsyrk(CblasColMajor, CblasLower, transpose ? CblasTrans : CblasNoTrans, n,
              transpose ? rows : cols, 1.0, a.data(), rows, 0.0, s.data(), n);
  return s;
}

// Ascending eigenvalues of a symmetric matrix given by its lower triangle.
Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd s) {
  const auto n = static_cast<lapack_int>(s.rows());
  Eigen::VectorXd w(n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  double unused = 0.0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'A', 'L', n, s.data(), n, 0.0, 0.0,
                                         0, 0, 0.0, &found, w.data(), &unused, 1, support.data());
  if (info != 0) {
    throw Error(ErrorCode::NonFiniteResult, "eigenvalue computation failed (info " +
                                                std::to_string(info) + ")");
  }
  return w;
}

// Eigenvectors for the `count` largest eigenvalues, largest first.
Eigen::MatrixXd leading_eigenvectors(Eigen::MatrixXd s, Eigen::Index count) {
  const auto n = static_cast<lapack_int>(s.rows());
  const auto d = static_cast<lapack_int>(count);
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, d);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, s.data(), n, 0.0, 0.0, n - d + 1, n, 0.0,
                     &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != d) {
    throw Error(ErrorCode::NonFiniteResult, "eigenvector computation failed (info " +
                                                std::to_string(info) + ")");
  }
  return z.rowwise().reverse().eval();
}

// Two passes of modified Gram-Schmidt, then a sign convention that makes the
// largest-magnitude entry of every column positive.
void orthonormalize(Eigen::MatrixXd& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
      for (Eigen::Index j = 0; j < k; ++j) {
        basis.col(k) -= basis.col(j).dot(basis.col(k)) * basis.col(j);
      }
      basis.col(k).normalize();
    }
  }
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    Eigen::Index peak = 0;
    basis.col(k).cwiseAbs().maxCoeff(&peak);
    if (basis(peak, k) < 0.0) basis.col(k) = -basis.col(k);
  }
}

}  // namespace

PcaFit fit_pca(const Eigen::MatrixXd& data, double energy) {
  const Eigen::Index m = data.rows();
  const Eigen::Index n = data.cols();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "PCA needs at least one sample");
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "PCA needs non-empty samples");
  if (!(energy > 0.0 && energy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "energy must lie in (0, 1]");
  }
  if (!data.allFinite()) throw Error(ErrorCode::NonFiniteResult, "PCA input is not finite");
  detail::ensure_blas_single_threaded();

  PcaFit fit;
  fit.mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - fit.mean;

  const bool gram_route = n < m;
  const Eigen::MatrixXd s = scatter(centered, gram_route);
  fit.eigenvalues = symmetric_eigenvalues(s).reverse();

  const double total = fit.eigenvalues.cwiseMax(0.0).sum();
  const double data_scale = data.squaredNorm();
  // A single sample has no variance either.
  if (n == 1 || !(total > 1e-20 * data_scale) || total <= std::numeric_limits<double>::min()) {
    fit.degenerate = true;
    fit.basis = Eigen::MatrixXd::Zero(m, 1);
    fit.basis(0, 0) = 1.0;
    fit.projected = Eigen::MatrixXd::Zero(1, n);
    fit.retained_energy = 1.0;
    return fit;
  }

  // Only numerically nonzero directions are eligible.
  const double rank_floor = fit.eigenvalues(0) * static_cast<double>(s.rows()) *
                            std::numeric_limits<double>::epsilon();
  Eigen::Index eligible = 0;
  while (eligible < fit.eigenvalues.size() && fit.eigenvalues(eligible) > rank_floor) ++eligible;

  const double target = energy * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  Eigen::Index dims = 0;
  while (dims < eligible) {
    cumulative += fit.eigenvalues(dims);
    ++dims;
    if (cumulative >= target) break;
  }
  fit.retained_energy = std::min(1.0, cumulative / total);

  const Eigen::MatrixXd vectors = leading_eigenvectors(s, dims);
  if (gram_route) {
    const Eigen::VectorXd inv_sqrt = fit.eigenvalues.head(dims).cwiseSqrt().cwiseInverse();
    fit.basis = centered * vectors * inv_sqrt.asDiagonal();
  } else {
    fit.basis = vectors;
  }
  orthonormalize(fit.basis);
  fit.projected = fit.basis.transpose() * centered;
  return fit;
}

}  // namespace rslcr
