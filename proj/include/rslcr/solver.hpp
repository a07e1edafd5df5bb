#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rslcr {

/// One locality-constrained reconstruction: represent `test` (length D) as
/// an affine combination of the columns of `dictionary` (D x n), penalizing
/// each weight by lambda * distances[k] * w_k^2.
struct WeightProblem {
  Eigen::Ref<const Eigen::VectorXd> test;
  Eigen::Ref<const Eigen::MatrixXd> dictionary;
  Eigen::Ref<const Eigen::VectorXd> distances;
  double lambda = 0.0;
};

enum class SolveRoute {
  Trivial,        // n = 1
  Cholesky,       // C + lambda * diag(d) factored as is
  Bordered,       // C singular; solved as the bordered constrained system
  RidgeCholesky,  // needed the stabilizing ridge
  Indefinite,     // ridge plus Bunch-Kaufman
};

struct WeightVector {
  Eigen::VectorXd values;  // sums to one
  SolveRoute route = SolveRoute::Trivial;
};

/// d_k = || x - X[:, k] ||_2
Eigen::VectorXd compute_distances(const Eigen::Ref<const Eigen::VectorXd>& test,
                                  const Eigen::Ref<const Eigen::MatrixXd>& dictionary);

/// Relative ridge added to the diagonal before factorization:
/// 1e-6 * (trace(C) / n + 1e-12).
double stabilizing_ridge(double trace, std::size_t n);

/// Solves (C + lambda * diag(d)) w' = 1 with C_kl = (X_k - x)^T (X_l - x)
/// and returns w = w' / (1^T w'). If that system is not positive definite
/// the equivalent bordered system [A 1; 1^T 0] is tried; if that is singular
/// too, eps * I (stabilizing_ridge) is added and the system is solved by
/// Cholesky or, failing that, Bunch-Kaufman.
/// Throws SingularSystem or NonFiniteResult.
WeightVector solve_lcr(const WeightProblem& problem);

/// Equality-constrained least squares min ||x - Xw||^2 s.t. 1^T w = 1,
/// i.e. solve_lcr with lambda = 0.
WeightVector solve_lle(const Eigen::Ref<const Eigen::VectorXd>& test,
                       const Eigen::Ref<const Eigen::MatrixXd>& dictionary);

/// Indices of the K smallest distances, ascending by distance, ties by index.
std::vector<std::uint32_t> select_knn(std::span<const double> distances, std::size_t k);

}  // namespace rslcr
