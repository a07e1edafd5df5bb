#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kkt_oracle.hpp"
#include "rslcr/error.hpp"
#include "rslcr/solver.hpp"
#include "support.hpp"

using namespace rslcr;

namespace {

using testing::bordered_condition;
using testing::kkt_oracle;

WeightVector lcr(const Eigen::VectorXd& x, const Eigen::MatrixXd& X, double lambda) {
  const Eigen::VectorXd d = compute_distances(x, X);
  return solve_lcr({x, X, d, lambda});
}

// w^T C w + lambda * sum_k d_k w_k^2
double objective(const Eigen::VectorXd& w, const Eigen::VectorXd& x, const Eigen::MatrixXd& X,
                 double lambda) {
  const Eigen::VectorXd d = compute_distances(x, X);
  const Eigen::VectorXd residual = (X.colwise() - x) * w;
  return residual.squaredNorm() + lambda * (d.array() * w.array().square()).sum();
}

}  // namespace

TEST_CASE("compute_distances examples") {
  Eigen::MatrixXd X(2, 2);
  X << 3.0, 0.0, 4.0, 1.0;
  const Eigen::Vector2d x(0.0, 0.0);
  const auto d = compute_distances(x, X);
  CHECK(d(0) == 5.0);
  CHECK(d(1) == 1.0);

  testing::Gen gen(1);
  const Eigen::MatrixXd R = gen.matrix(8, 20);
  const Eigen::VectorXd q = R.col(0);
  const auto dr = compute_distances(q, R);
  CHECK(dr(0) == 0.0);
  const Eigen::VectorXd t = gen.vector(8);
  const auto dt = compute_distances(t, R);
  for (Eigen::Index k = 0; k < 20; ++k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < 8; ++i) s += (t(i) - R(i, k)) * (t(i) - R(i, k));
    CHECK(std::abs(dt(k) - std::sqrt(s)) < 1e-12);
  }
  CHECK_THROWS_AS(compute_distances(Eigen::VectorXd::Zero(3), R), Error);
}

TEST_CASE("solve_lcr with one column returns [1]") {
  testing::Gen gen(2);
  for (double lambda : {0.0, 0.5, 1e6}) {
    const auto w = lcr(gen.vector(5), gen.matrix(5, 1), lambda);
    REQUIRE(w.values.size() == 1);
    CHECK(w.values(0) == 1.0);
    CHECK(w.route == SolveRoute::Trivial);
  }
}

TEST_CASE("solve_lcr at lambda 0 matches the KKT oracle") {
  testing::Gen gen(3);
  int checked = 0;
  while (checked < 100) {
    const auto D = static_cast<Eigen::Index>(gen.index(1, 16));
    const auto n = static_cast<Eigen::Index>(gen.index(1, 32));
    const Eigen::MatrixXd X = gen.matrix(D, n);
    const Eigen::VectorXd x = gen.vector(D);
    if (!(bordered_condition(x, X) < 1e8)) continue;
    ++checked;
    const auto w = lcr(x, X, 0.0);
    const auto oracle = kkt_oracle(x, X);
    CHECK((w.values - oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("solve_lcr weights sum to one") {
  testing::Gen gen(4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto D = static_cast<Eigen::Index>(gen.index(1, 16));
    const auto n = static_cast<Eigen::Index>(gen.index(1, 64));
    const double lambda = std::array{0.0, 0.1, 0.5, 5.0}[trial % 4];
    const auto w = lcr(gen.vector(D, 0, 255), gen.matrix(D, n, 0, 255), lambda);
    CHECK(std::abs(w.values.sum() - 1.0) < 1e-9);
    CHECK(w.values.allFinite());
  }
}

TEST_CASE("large lambda favors the nearest column") {
  testing::Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd X = gen.matrix(6, 12);
    const Eigen::VectorXd x = gen.vector(6);
    const Eigen::VectorXd d = compute_distances(x, X);
    const auto w = solve_lcr({x, X, d, 1e9});
    Eigen::Index nearest = 0;
    Eigen::Index heaviest = 0;
    d.minCoeff(&nearest);
    w.values.maxCoeff(&heaviest);
    CHECK(heaviest == nearest);
    // The diagonal dominates, so w is close to normalized 1/d.
    const Eigen::VectorXd inv = d.cwiseInverse() / d.cwiseInverse().sum();
    CHECK((w.values - inv).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("solve_lcr is translation invariant") {
  testing::Gen gen(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd X = gen.matrix(8, 10);
    const Eigen::VectorXd x = gen.vector(8);
    const Eigen::VectorXd t = gen.vector(8, -3.0, 3.0);
    const Eigen::MatrixXd Xt = X.colwise() + t;
    const Eigen::VectorXd xt = x + t;
    const auto a = lcr(x, X, 0.5);
    const auto b = lcr(xt, Xt, 0.5);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("pruning with K = n matches the full solve") {
  testing::Gen gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen.index(2, 40));
    const Eigen::MatrixXd X = gen.matrix(10, n);
    const Eigen::VectorXd x = gen.vector(10);
    const Eigen::VectorXd d = compute_distances(x, X);
    const auto full = solve_lcr({x, X, d, 0.5});
    const auto idx = select_knn({d.data(), static_cast<std::size_t>(n)}, static_cast<std::size_t>(n));
    Eigen::MatrixXd Xs(10, n);
    Eigen::VectorXd ds(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Xs.col(k) = X.col(idx[k]);
      ds(k) = d(idx[k]);
    }
    const auto pruned = solve_lcr({x, Xs, ds, 0.5});
    for (Eigen::Index k = 0; k < n; ++k) CHECK(std::abs(pruned.values(k) - full.values(idx[k])) < 1e-9);
  }
}

TEST_CASE("returned weights beat uniform weights on the objective") {
  testing::Gen gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto D = static_cast<Eigen::Index>(gen.index(1, 12));
    const auto n = static_cast<Eigen::Index>(gen.index(2, 30));
    const double lambda = gen.uniform(0.0, 5.0);
    const Eigen::MatrixXd X = gen.matrix(D, n);
    const Eigen::VectorXd x = gen.vector(D);
    const auto w = lcr(x, X, lambda);
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const double f_uniform = objective(uniform, x, X, lambda);
    CHECK(objective(w.values, x, X, lambda) <= f_uniform + 1e-6 * (1.0 + f_uniform));
  }
}

TEST_CASE("duplicate columns still solve") {
  Eigen::MatrixXd X(2, 3);
  X << 1.0, 1.0, 1.0, 2.0, 2.0, 2.0;
  const Eigen::Vector2d x(1.0, 2.0);
  const auto w = lcr(x, X, 0.0);
  CHECK(std::abs(w.values.sum() - 1.0) < 1e-9);
  CHECK(w.values.allFinite());
}

TEST_CASE("solve_lcr rejects bad input") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 4);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd d = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_lcr({x, X, d, 0.5}), Error);
  const Eigen::VectorXd d4 = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(solve_lcr({x, X, d4, -1.0}), Error);
  Eigen::VectorXd bad = x;
  bad(0) = NAN;
  CHECK_THROWS_AS(solve_lcr({bad, X, d4, 0.5}), Error);
}

TEST_CASE("select_knn examples and oracle") {
  const std::vector<double> d{5.0, 1.0, 3.0};
  CHECK(select_knn(d, 2) == std::vector<std::uint32_t>{1, 2});
  CHECK(select_knn(d, 3) == std::vector<std::uint32_t>{1, 2, 0});
  const std::vector<double> ties{2.0, 1.0, 2.0, 1.0};
  CHECK(select_knn(ties, 3) == std::vector<std::uint32_t>{1, 3, 0});

  testing::Gen gen(9);
  std::vector<double> big(800);
  for (double& v : big) v = std::round(gen.uniform(0.0, 300.0));  // plenty of ties
  std::vector<std::uint32_t> order(800);
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return big[a] < big[b]; });
  const auto knn = select_knn(big, 200);
  CHECK(knn == std::vector<std::uint32_t>(order.begin(), order.begin() + 200));

  for (std::size_t k : {std::size_t{0}, std::size_t{4}}) {
    try {
      select_knn(d, k);
      FAIL("expected KOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::KOutOfRange);
    }
  }
}

TEST_CASE("solve_lle examples") {
  Eigen::MatrixXd X(3, 2);
  X << 1.0, 0.0, 0.0, 1.0, 2.0, -1.0;
  const Eigen::VectorXd mid = 0.5 * (X.col(0) + X.col(1));
  const auto w = solve_lle(mid, X);
  CHECK(std::abs(w.values(0) - 0.5) < 1e-9);
  CHECK(std::abs(w.values(1) - 0.5) < 1e-9);

  CHECK(solve_lle(Eigen::VectorXd::Zero(3), X.leftCols(1)).values(0) == 1.0);

  testing::Gen gen(10);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd R = gen.matrix(12, 8);
    const auto k = static_cast<Eigen::Index>(gen.index(0, 7));
    const auto lle = solve_lle(R.col(k), R);
    const auto oracle = kkt_oracle(R.col(k), R);
    CHECK((lle.values - oracle).cwiseAbs().maxCoeff() < 1e-6);
    for (Eigen::Index l = 0; l < 8; ++l) {
      if (l != k) CHECK(lle.values(k) > lle.values(l));
    }
  }
}

TEST_CASE("stabilizing ridge is relative") {
  CHECK(stabilizing_ridge(10.0, 5) == doctest::Approx(1e-6 * (2.0 + 1e-12)));
  CHECK(stabilizing_ridge(0.0, 5) > 0.0);
}
