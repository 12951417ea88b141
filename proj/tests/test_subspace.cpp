#include <gtest/gtest.h>

#include <random>

#include "pqse/gevp.hpp"
#include "pqse/harness.hpp"
#include "pqse/subspace.hpp"
#include "support.hpp"

using namespace pqse;

namespace {

StateVector plus_plus() {
  auto v = StateVector::zero(2);
  v.amplitudes().setConstant(0.5);
  return v;
}

const PauliSum kZZ = parse_pauli_sum("2\n1 ZZ\n");

}  // namespace

TEST(Moments, HandExamples) {
  EXPECT_EQ(compute_moments(kZZ, plus_plus(), 4).values(), (std::vector<double>{1, 0, 1, 0, 1}));
  const auto z = parse_pauli_sum("1\n1 Z\n");
  EXPECT_EQ(compute_moments(z, basis_state("0"), 3).values(), (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(compute_moments(z, basis_state("0"), 0).values(), (std::vector<double>{1}));
}

TEST(Moments, RejectsNonUnitReference) {
  auto v = plus_plus();
  v.amplitudes() *= 1.0 + 1e-8;
  EXPECT_THROW(compute_moments(kZZ, v, 2), std::invalid_argument);
}

TEST(Moments, MatchSpectralSums) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = support::random_pauli_sum(4, 8, rng);
    const auto v = support::random_state(4, rng);
    const auto mu = compute_moments(h, v, 9);
    const auto& es = *eigensystem(h);
    const Eigen::VectorXd w = (es.vectors.adjoint() * v.amplitudes()).cwiseAbs2();
    for (std::size_t k = 0; k <= 9; ++k) {
      const double ref = (w.array() * es.values.array().pow(static_cast<double>(k))).sum();
      EXPECT_LT(support::scaled_diff(mu[k], ref), 1e-11) << "k=" << k;
    }
  }
}

TEST(Moments, OverflowGuard) {
  const auto big = parse_pauli_sum("1\n1e100 Z\n");
  EXPECT_THROW(compute_moments(big, basis_state("0"), 4), std::overflow_error);
}

TEST(Hankel, Examples) {
  const MomentSequence mu({1, 0, 1, 0});
  const auto p = hankel_matrices(mu, 2);
  EXPECT_EQ(p.smat, Eigen::MatrixXcd::Identity(2, 2));
  Eigen::MatrixXcd hx(2, 2);
  hx << 0, 1, 1, 0;
  EXPECT_EQ(p.hmat, hx);
  const auto one = hankel_matrices(MomentSequence({1, 0.25}), 1);
  EXPECT_EQ(one.smat(0, 0), cplx(1.0));
  EXPECT_EQ(one.hmat(0, 0), cplx(0.25));
  EXPECT_THROW(hankel_matrices(MomentSequence({1, 0, 1}), 2), std::invalid_argument);
}

TEST(Hankel, AntiDiagonalsAndPositivity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto h = support::random_pauli_sum(5, 10, rng);
    const auto mu = compute_moments(h, support::random_state(5, rng), 12);
    for (std::size_t r = 1; r <= 6; ++r) {
      const auto p = hankel_matrices(mu, r);
      for (Eigen::Index i = 0; i + 1 < p.dim(); ++i)
        for (Eigen::Index j = 1; j < p.dim(); ++j) {
          EXPECT_EQ(p.smat(i, j), p.smat(i + 1, j - 1));
          EXPECT_EQ(p.hmat(i, j), p.hmat(i + 1, j - 1));
        }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.smat, Eigen::EigenvaluesOnly);
      EXPECT_GE(es.eigenvalues()[0], -1e-10 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST(Hankel, NoiselessRitzMonotone) {
  const auto sys = resolve_system(SpinRingSystem{8, 0.2, 1.0, 6}, false);
  const auto mu = compute_moments(sys.hamiltonian, sys.reference, 30);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r <= 15; ++r) {
    const auto p = hankel_matrices(mu, r);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.smat, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() / es.eigenvalues()[0] >= 1e12) break;
    const double e = solve_gevp(p, 0.0).ground_energy();
    EXPECT_LE(e, prev + 1e-9) << "R=" << r;
    prev = e;
  }
}

TEST(Rte, DefaultTimestep) {
  EXPECT_NEAR(default_rte_timestep(kZZ), std::numbers::pi, 1e-14);
}

TEST(Rte, StructureAndOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    const auto h = support::random_pauli_sum(4, 8, rng);
    const auto v = support::random_state(4, rng);
    const double dt = default_rte_timestep(h);
    const auto t = rte_tensors(h, v, 5, dt);
    EXPECT_EQ(t.overlap(0, 0), cplx(1.0));
    for (Eigen::Index i = 0; i < 5; ++i) {
      EXPECT_EQ(t.overlap(i, i), cplx(1.0));
      for (Eigen::Index j = 0; j < 5; ++j) {
        EXPECT_EQ(t.overlap(i, j), std::conj(t.overlap(j, i)));
        EXPECT_EQ(t.energy(i, j), std::conj(t.energy(j, i)));
        EXPECT_EQ(t.energy_sq(i, j), std::conj(t.energy_sq(j, i)));
        if (i + 1 < 5 && j + 1 < 5) {
          EXPECT_LT(std::abs(t.overlap(i, j) - t.overlap(i + 1, j + 1)), 1e-10);
          EXPECT_LT(std::abs(t.energy(i, j) - t.energy(i + 1, j + 1)), 1e-10);
          EXPECT_LT(std::abs(t.energy_sq(i, j) - t.energy_sq(i + 1, j + 1)), 1e-10);
        }
      }
    }
    // Brute force from the dense propagator.
    const auto p = support::brute_problem(h, v, 5, RteBasis{dt});
    EXPECT_LT(support::scaled_diff(t.overlap, p.smat), 1e-10);
    EXPECT_LT(support::scaled_diff(t.energy, p.hmat), 1e-10);
    EXPECT_GE(t.energy_sq(0, 0).real() - std::norm(t.energy(0, 0)), -1e-10);
    const auto lead = t.leading_block(3);
    EXPECT_EQ(lead.order(), 3);
    EXPECT_EQ(lead.overlap, t.overlap.topLeftCorner(3, 3));
  }
}

TEST(Rte, Errors) {
  EXPECT_THROW(rte_tensors(kZZ, plus_plus(), 3, 0.0), std::invalid_argument);
  EXPECT_THROW(rte_tensors(kZZ, basis_state("0"), 3, 1.0), std::invalid_argument);
}
