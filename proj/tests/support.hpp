#pragma once

// Helpers shared by the unit tests and the acceptance runner: random
// operators and states, and brute-force constructions in the full 2^n space
// that serve as oracles for the moment-based algebra.

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

#include "pqse/pqse.hpp"
#include "pqse/simulator.hpp"

namespace pqse::support {

inline PauliSum random_pauli_sum(std::size_t n, std::size_t terms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> letter(0, 3);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::vector<PauliTerm> t;
  for (std::size_t k = 0; k < terms; ++k) {
    std::string s(n, 'I');
    for (auto& c : s) c = "IXYZ"[letter(rng)];
    t.push_back({coef(rng), PauliString(s)});
  }
  return PauliSum(n, t);
}

inline StateVector random_state(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto v = StateVector::zero(n);
  for (Eigen::Index i = 0; i < v.dim(); ++i) v.amplitudes()[i] = cplx(g(rng), g(rng));
  return v.normalized();
}

/// |a - b| <= tol * max(1, |b|) entrywise against the largest entry of b.
inline double scaled_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double scaled_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Krylov vectors A^i psi, i < q, built in the full space.
inline std::vector<StateVector> krylov_vectors(const PauliSum& h, const StateVector& psi, std::size_t q,
                                               const KrylovBasis& basis) {
  std::vector<StateVector> out{psi};
  for (std::size_t i = 1; i < q; ++i) {
    if (std::holds_alternative<PowerBasis>(basis))
      out.push_back(apply_pauli_sum(h, out.back()));
    else
      out.push_back(evolve_state(h, out.back(), std::get<RteBasis>(basis).dt));
  }
  return out;
}

/// S and H of K_q(A, psi), straight from the vectors.
inline SubspaceProblem brute_problem(const PauliSum& h, const StateVector& psi, std::size_t q,
                                     const KrylovBasis& basis) {
  const auto vs = krylov_vectors(h, psi, q, basis);
  const auto r = static_cast<Eigen::Index>(q);
  SubspaceProblem p{Eigen::MatrixXcd(r, r), Eigen::MatrixXcd(r, r)};
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto hv = apply_pauli_sum(h, vs[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < r; ++j) {
      p.smat(j, i) = state_overlap(vs[static_cast<std::size_t>(j)], vs[static_cast<std::size_t>(i)]);
      p.hmat(j, i) = state_overlap(vs[static_cast<std::size_t>(j)], hv);
    }
  }
  return p;
}

/// sum_i c_i A^i psi.
inline StateVector combine(const PauliSum& h, const StateVector& psi, const Eigen::VectorXcd& c,
                           const KrylovBasis& basis) {
  const auto vs = krylov_vectors(h, psi, static_cast<std::size_t>(c.size()), basis);
  auto out = StateVector::zero(psi.num_qubits());
  for (Eigen::Index i = 0; i < c.size(); ++i) out.amplitudes() += c[i] * vs[static_cast<std::size_t>(i)].amplitudes();
  return out;
}

struct BruteStats {
  double energy;
  double variance;
};

inline BruteStats brute_stats(const PauliSum& h, const StateVector& v) {
  const auto u = v.normalized();
  const auto hu = apply_pauli_sum(h, u);
  const double e = state_overlap(u, hu).real();
  return {e, hu.amplitudes().squaredNorm() - e * e};
}

/// Random partition with order <= r_max, every part >= 1.
inline std::vector<std::size_t> random_partition(std::size_t r_max, std::mt19937_64& rng) {
  std::vector<std::size_t> seq;
  std::size_t budget = r_max - 1;  // order - 1 = sum (r_k - 1)
  std::uniform_int_distribution<int> parts(1, 3);
  const int p = parts(rng);
  for (int k = 0; k < p; ++k) {
    std::uniform_int_distribution<std::size_t> take(k + 1 == p ? std::min<std::size_t>(1, budget) : 0, budget);
    const std::size_t grow = budget == 0 ? 0 : take(rng);
    seq.push_back(grow + 1);
    budget -= grow;
  }
  return seq;
}

}  // namespace pqse::support
