#include <gtest/gtest.h>

#include <random>

#include "pqse/gevp.hpp"

using namespace pqse;

namespace {

SubspaceProblem random_pd_problem(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(n, n), b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = cplx(g(rng), g(rng));
      b(i, j) = cplx(g(rng), g(rng));
    }
  SubspaceProblem p;
  p.smat = a * a.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(n, n);
  p.hmat = 0.5 * (b + b.adjoint());
  return p;
}

}  // namespace

TEST(Gevp, TwoByTwoByHand) {
  SubspaceProblem p{Eigen::MatrixXcd(2, 2), Eigen::MatrixXcd::Identity(2, 2)};
  p.hmat << 0, 1, 1, 0;
  const auto sol = solve_gevp(p, 0.0);
  EXPECT_NEAR(sol.ground_energy(), -1.0, 1e-15);
  const Eigen::VectorXcd& c = sol.ground_coeffs;
  EXPECT_NEAR(std::abs(c[0] + c[1]), 0.0, 1e-15);
  EXPECT_NEAR(c.squaredNorm(), 1.0, 1e-15);
  EXPECT_EQ(sol.retained_dim, 2);
}

TEST(Gevp, ThresholdDropsSmallDirection) {
  SubspaceProblem p{Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  p.smat(0, 0) = 1.0;
  p.smat(1, 1) = 1e-14;
  const auto sol = solve_gevp(p, 1e-13);
  EXPECT_EQ(sol.retained_dim, 1);
  ASSERT_EQ(sol.dropped_eigenvalues.size(), 1);
  EXPECT_EQ(sol.ground_coeffs.size(), 2);
  EXPECT_EQ(solve_gevp(p, 0.0).retained_dim, 2);
}

TEST(Gevp, DropsNonPositiveAndEmpty) {
  SubspaceProblem p{Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  p.smat(0, 0) = 1.0;
  p.smat(1, 1) = -1e-3;
  EXPECT_EQ(solve_gevp(p, 0.0).retained_dim, 1);
  EXPECT_THROW(solve_gevp(p, 2.0), GevpError);
  EXPECT_THROW(solve_gevp(p, -1.0), std::invalid_argument);
}

TEST(Gevp, AgreesWithIndependentWhitening) {
  // Oracle: Cholesky reduction L^{-1} H L^{-dagger}.
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_pd_problem(5, rng);
    const Eigen::LLT<Eigen::MatrixXcd> llt(p.smat);
    const Eigen::MatrixXcd linv = llt.matrixL().solve(Eigen::MatrixXcd::Identity(5, 5));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(linv * p.hmat * linv.adjoint(), Eigen::EigenvaluesOnly);
    const auto sol = solve_gevp(p, 0.0);
    ASSERT_EQ(sol.energies.size(), 5);
    EXPECT_LT((sol.energies - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::VectorXcd& c = sol.ground_coeffs;
    const double rq = (c.dot(p.hmat * c) / c.dot(p.smat * c)).real();
    EXPECT_NEAR(rq, sol.ground_energy(), 1e-9);
  }
}

TEST(Gevp, RetainedDimensionMonotoneInThreshold) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = random_pd_problem(6, rng);
    Eigen::Index prev = p.dim();
    for (double tau : {0.0, 1e-3, 1e-2, 1e-1, 0.5, 1.0, 3.0}) {
      try {
        const auto sol = solve_gevp(p, tau);
        EXPECT_LE(sol.retained_dim, prev);
        EXPECT_EQ(sol.retained_dim + sol.dropped_eigenvalues.size(), p.dim());
        prev = sol.retained_dim;
      } catch (const GevpError&) {
        prev = 0;
      }
    }
  }
}

TEST(Gevp, Deterministic) {
  std::mt19937_64 rng(23);
  const auto p = random_pd_problem(6, rng);
  const auto a = solve_gevp(p, 0.05), b = solve_gevp(p, 0.05);
  EXPECT_EQ(a.energies, b.energies);
  EXPECT_EQ(a.ground_coeffs, b.ground_coeffs);
}

TEST(Threshold, Formula) {
  EXPECT_EQ(scaled_threshold(0.0, 0.0, 1.7), 0.0);
  EXPECT_NEAR(scaled_threshold(3e-6, 4e-6, 1.0), 5e-7, 1e-21);
  EXPECT_NEAR(scaled_threshold(3.0, 4.0, 0.0), 5.0, 1e-15);
  Eigen::MatrixXcd dh = Eigen::MatrixXcd::Zero(2, 2), ds = Eigen::MatrixXcd::Zero(2, 2);
  dh(0, 1) = dh(1, 0) = 3e-6;
  ds(1, 1) = -4e-6;
  EXPECT_NEAR(scaled_threshold(dh, ds, 1.0), 5e-7, 1e-21);
}

TEST(Threshold, Grid) {
  const auto g = threshold_grid();
  ASSERT_EQ(g.size(), 50u);
  EXPECT_EQ(g.front(), -0.5);
  EXPECT_EQ(g.back(), 5.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] - g[i - 1], 5.5 / 49, 1e-14);
}

TEST(RelativeError, Examples) {
  EXPECT_EQ(relative_error(-1.0, -1.0), 0.0);
  EXPECT_NEAR(relative_error(-0.99, -1.0), 0.01, 1e-15);
  EXPECT_EQ(relative_error(0.0, -1.0), 1.0);
  EXPECT_THROW(relative_error(1.0, 0.0), std::invalid_argument);
}

TEST(TqseScan, SingletonAndZeroPerturbation) {
  std::mt19937_64 rng(29);
  const auto p = random_pd_problem(4, rng);
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(4, 4);
  const double truth = solve_gevp(p, 0.0).ground_energy() - 0.1;
  const auto one = tqse_scan(p, zero, zero, truth, {2.5});
  EXPECT_EQ(one.best_a, 2.5);
  const auto all = tqse_scan(p, zero, zero, truth, threshold_grid());
  EXPECT_EQ(all.tau, 0.0);
  EXPECT_EQ(all.best_a, -0.5);
  EXPECT_EQ(all.solution.ground_energy(), solve_gevp(p, 0.0).ground_energy());
}

TEST(TqseScan, PicksBestAndSkipsUnsolvable) {
  SubspaceProblem p{Eigen::MatrixXcd::Zero(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  p.smat(0, 0) = 1.0;
  p.smat(1, 1) = 1e-4;
  p.hmat(0, 0) = -1.0;
  p.hmat(1, 1) = -2e-4;  // second direction has Ritz value -2
  Eigen::MatrixXcd dh = Eigen::MatrixXcd::Zero(2, 2), ds = Eigen::MatrixXcd::Identity(2, 2);
  // a = -1 gives tau = 10 (empty), a = 3 keeps only the first (E = -1), a = 6 keeps both (E = -2).
  const auto near_one = tqse_scan(p, dh, ds, -1.0, {-1.0, 3.0, 6.0});
  EXPECT_EQ(near_one.best_a, 3.0);
  EXPECT_EQ(near_one.solution.retained_dim, 1);
  const auto near_two = tqse_scan(p, dh, ds, -2.0, {-1.0, 3.0, 6.0});
  EXPECT_EQ(near_two.best_a, 6.0);
  EXPECT_THROW(tqse_scan(p, dh, ds, -1.0, {-1.0}), GevpError);
  EXPECT_THROW(tqse_scan(p, dh, ds, -1.0, {}), std::invalid_argument);
}
