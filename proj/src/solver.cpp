#include "rslcr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "blas.hpp"
#include "rslcr/error.hpp"
#include "rslcr/kernels.hpp"

namespace rslcr {

Eigen::VectorXd compute_distances(const Eigen::Ref<const Eigen::VectorXd>& test,
                                  const Eigen::Ref<const Eigen::MatrixXd>& dictionary) {
  if (test.size() != dictionary.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "test vector has length " + std::to_string(test.size()) + ", dictionary rows " +
                    std::to_string(dictionary.rows()));
  }
  Eigen::VectorXd d(dictionary.cols());
  kernels::active().squared_distances(dictionary.data(), static_cast<std::size_t>(dictionary.rows()),
                                      static_cast<std::size_t>(dictionary.cols()),
                                      static_cast<std::size_t>(dictionary.outerStride()),
                                      test.data(), d.data());
  return d.cwiseSqrt();
}

double stabilizing_ridge(double trace, std::size_t n) {
  return 1e-6 * (trace / static_cast<double>(n) + 1e-12);
}

namespace {

WeightVector normalize(const Eigen::VectorXd& raw, SolveRoute route) {
  const double total = raw.sum();
  if (!raw.allFinite() || !std::isfinite(total)) {
    throw Error(ErrorCode::NonFiniteResult, "weight solve produced non-finite values");
  }
  if (std::abs(total) <= 1e-300) {
    throw Error(ErrorCode::SingularSystem, "weights cannot be normalized to sum to one");
  }
  WeightVector out{raw / total, route};
  if (!out.values.allFinite()) {
    throw Error(ErrorCode::NonFiniteResult, "normalized weights are not finite");
  }
  return out;
}

// Reciprocal condition number below which the bordered system is treated as
// singular.
constexpr double kBorderedRcondFloor = 1e-10;

// [A 1; 1^T 0] [w; mu] = [0; 1] with A = Z^T Z + lambda * diag(d). Its
// solution is the limit of the normalized A^-1 1 as A approaches a singular
// matrix, so it covers a singular C whose constrained problem is still
// well posed (e.g. n = D + 1).
std::optional<Eigen::VectorXd> solve_bordered(const Eigen::MatrixXd& diff, const WeightProblem& problem) {
  const Eigen::Index n = diff.cols();
  const auto size = static_cast<lapack_int>(n + 1);
  thread_local Eigen::MatrixXd kkt;
  kkt.resize(n + 1, n + 1);
  cblas_dsyrk(CblasColMajor, CblasLower, CblasTrans, static_cast<int>(n), static_cast<int>(diff.rows()), 1.0,
              diff.data(), static_cast<int>(diff.rows()), 0.0, kkt.data(), size);
  kkt.topLeftCorner(n, n).diagonal() += problem.lambda * problem.distances;
  kkt.row(n).head(n).setOnes();
  kkt(n, n) = 0.0;
  const double norm = LAPACKE_dlansy(LAPACK_COL_MAJOR, '1', 'L', size, kkt.data(), size);

  std::vector<lapack_int> pivots(static_cast<std::size_t>(n + 1));
  if (LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', size, kkt.data(), size, pivots.data()) != 0) return std::nullopt;
  double rcond = 0.0;
  if (LAPACKE_dsycon(LAPACK_COL_MAJOR, 'L', size, kkt.data(), size, pivots.data(), norm, &rcond) != 0 ||
      !(rcond > kBorderedRcondFloor)) {
    return std::nullopt;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', size, 1, kkt.data(), size, pivots.data(), rhs.data(), size);
  return Eigen::VectorXd(rhs.head(n));
}

}  // namespace

WeightVector solve_lcr(const WeightProblem& problem) {
  const auto& x = problem.test;
  const auto& dict = problem.dictionary;
  const Eigen::Index dim = dict.rows();
  const Eigen::Index n = dict.cols();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "dictionary has no columns");
  if (x.size() != dim || problem.distances.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "weight problem dimensions disagree");
  }
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a finite non-negative number");
  }
  if (!x.allFinite() || !dict.allFinite() || !problem.distances.allFinite()) {
    throw Error(ErrorCode::NonFiniteResult, "weight problem has non-finite entries");
  }
  if (n == 1) return {Eigen::VectorXd::Ones(1), SolveRoute::Trivial};
  detail::ensure_blas_single_threaded();

  // Per-thread workspaces: n x n systems are megabytes, and reallocating them
  // for every patch shows up as page-fault time.
  thread_local Eigen::MatrixXd diff;
  thread_local Eigen::MatrixXd system;
  diff = dict.colwise() - x;
  const auto nn = static_cast<int>(n);
  auto build_system = [&](bool ridged) {
    system.resize(n, n);
    cblas_dsyrk(CblasColMajor, CblasLower, CblasTrans, nn, static_cast<int>(dim), 1.0, diff.data(),
                static_cast<int>(dim), 0.0, system.data(), nn);
    const double ridge = stabilizing_ridge(system.diagonal().sum(), static_cast<std::size_t>(n));
    system.diagonal() += problem.lambda * problem.distances;
    if (ridged) system.diagonal().array() += ridge;
  };

  // Route order: Cholesky of the system as is; if that fails (C singular),
  // the equivalent bordered constrained system, accepted only when well
  // conditioned; only then the stabilizing ridge. Adding the ridge
  // unconditionally would bias well-posed solves by O(ridge / eigenvalue).
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  build_system(false);
  if (LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', nn, system.data(), nn) == 0) {
    LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', nn, 1, system.data(), nn, rhs.data(), nn);
    return normalize(rhs, SolveRoute::Cholesky);
  }

  if (auto bordered = solve_bordered(diff, problem)) return normalize(*bordered, SolveRoute::Bordered);

  build_system(true);
  if (LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', nn, system.data(), nn) == 0) {
    LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', nn, 1, system.data(), nn, rhs.data(), nn);
    return normalize(rhs, SolveRoute::RidgeCholesky);
  }
  build_system(true);
  std::vector<lapack_int> pivots(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_dsysv(LAPACK_COL_MAJOR, 'L', nn, 1, system.data(), nn,
                                        pivots.data(), rhs.data(), nn);
  if (info != 0) {
    throw Error(ErrorCode::SingularSystem,
                "regularized weight system is singular (dictionary is degenerate)");
  }
  return normalize(rhs, SolveRoute::Indefinite);
}

WeightVector solve_lle(const Eigen::Ref<const Eigen::VectorXd>& test,
                       const Eigen::Ref<const Eigen::MatrixXd>& dictionary) {
  const Eigen::VectorXd d = compute_distances(test, dictionary);
  return solve_lcr({test, dictionary, d, 0.0});
}

std::vector<std::uint32_t> select_knn(std::span<const double> distances, std::size_t k) {
  if (k < 1 || k > distances.size()) {
    throw Error(ErrorCode::KOutOfRange, "K = " + std::to_string(k) + " must lie in [1, " +
                                            std::to_string(distances.size()) + "]");
  }
  std::vector<std::uint32_t> idx(distances.size());
  std::iota(idx.begin(), idx.end(), 0U);
  const auto closer = [&](std::uint32_t a, std::uint32_t b) {
    return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
  idx.resize(k);
  return idx;
}

}  // namespace rslcr
