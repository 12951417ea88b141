#pragma once

// Raw subspace data as a quantum device would supply it: Hamiltonian
// moments for the power basis, and overlap / energy / energy-squared
// tensors for the real-time-evolution basis.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqse/simulator.hpp"

namespace pqse {

/// Moments with magnitude beyond this abort moment generation.
inline constexpr double kMomentOverflow = 1e290;

/// mu_k = <phi0|H^k|phi0>, k = 0..K, with mu_0 = 1.
class MomentSequence {
 public:
  explicit MomentSequence(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("MomentSequence: empty");
  }

  [[nodiscard]] std::size_t max_power() const noexcept { return values_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t k) const { return values_.at(k); }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  [[nodiscard]] MomentSequence truncated(std::size_t max_power) const {
    if (max_power > this->max_power()) throw std::invalid_argument("MomentSequence: truncation beyond K");
    return MomentSequence({values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(max_power) + 1});
  }

 private:
  std::vector<double> values_;
};

/// Paired (H, S) of a generalized Hermitian eigenproblem.
struct SubspaceProblem {
  Eigen::MatrixXcd hmat;
  Eigen::MatrixXcd smat;

  [[nodiscard]] Eigen::Index dim() const noexcept { return smat.rows(); }

  [[nodiscard]] SubspaceProblem leading_block(Eigen::Index r) const {
    return {hmat.topLeftCorner(r, r), smat.topLeftCorner(r, r)};
  }
};

/// Real-time-evolution matrix elements over |psi_j> = exp(-i j dt H)|phi0>.
struct RteTensors {
  Eigen::MatrixXcd overlap;    // <psi_i|psi_j>
  Eigen::MatrixXcd energy;     // <psi_i|H|psi_j>
  Eigen::MatrixXcd energy_sq;  // <psi_i|H^2|psi_j>
  double dt = 0.0;

  [[nodiscard]] Eigen::Index order() const noexcept { return overlap.rows(); }

  [[nodiscard]] RteTensors leading_block(Eigen::Index r) const {
    if (r < 1 || r > order()) throw std::invalid_argument("RteTensors: block order out of range");
    return {overlap.topLeftCorner(r, r), energy.topLeftCorner(r, r), energy_sq.topLeftCorner(r, r), dt};
  }

  /// Plain QSE problem over the RTE basis.
  [[nodiscard]] SubspaceProblem problem() const { return {energy, overlap}; }
};

/// Number of clean datasets generated in this process; lets callers verify
/// that data is reused across noise instances.
struct GenerationCounters {
  std::atomic<std::size_t> moment_sequences{0};
  std::atomic<std::size_t> rte_tensor_sets{0};

  static GenerationCounters& global() {
    static GenerationCounters counters;
    return counters;
  }
};

namespace detail {

inline void require_unit_reference(const StateVector& phi0) {
  if (std::abs(phi0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("reference state must be unit-norm (|norm - 1| <= 1e-10)");
}

}  // namespace detail

/// Moments by forward recursion v_{j+1} = H v_j, with
/// mu_k = <v_floor(k/2) | v_ceil(k/2)>.
inline MomentSequence compute_moments(const PauliSum& h, const StateVector& phi0, std::size_t max_power) {
  detail::check_qubits(h, phi0.num_qubits());
  detail::require_unit_reference(phi0);
  GenerationCounters::global().moment_sequences.fetch_add(1, std::memory_order_relaxed);

  const std::size_t depth = (max_power + 1) / 2;
  std::vector<StateVector> powers;
  powers.reserve(depth + 1);
  powers.push_back(phi0);
  for (std::size_t j = 0; j < depth; ++j) powers.push_back(apply_pauli_sum(h, powers.back()));

  std::vector<double> mu(max_power + 1);
  mu[0] = 1.0;
  for (std::size_t k = 1; k <= max_power; ++k) {
    mu[k] = state_overlap(powers[k / 2], powers[(k + 1) / 2]).real();
    if (!std::isfinite(mu[k]) || std::abs(mu[k]) > kMomentOverflow)
      throw std::overflow_error("moment mu_" + std::to_string(k) +
                                " overflows; rerun with spectral rescaling (H -> H/||H||)");
  }
  return MomentSequence(std::move(mu));
}

/// Hankel pair S_ij = mu_{i+j}, H_ij = mu_{i+j+1}, i,j < order.
inline SubspaceProblem hankel_matrices(const MomentSequence& mu, std::size_t order) {
  if (order == 0) throw std::invalid_argument("hankel_matrices: order must be positive");
  if (mu.max_power() < 2 * order - 1)
    throw std::invalid_argument("hankel_matrices: order " + std::to_string(order) + " needs moments through mu_" +
                                std::to_string(2 * order - 1) + ", have mu_" + std::to_string(mu.max_power()));
  const auto r = static_cast<Eigen::Index>(order);
  SubspaceProblem p{Eigen::MatrixXcd(r, r), Eigen::MatrixXcd(r, r)};
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      const auto k = static_cast<std::size_t>(i + j);
      p.smat(i, j) = mu[k];
      p.hmat(i, j) = mu[k + 1];
    }
  return p;
}

/// pi / ||H||.
inline double default_rte_timestep(const PauliSum& h) {
  const double norm = exact_ground(h).spectral_norm;
  if (norm == 0.0) throw std::invalid_argument("default timestep undefined for a zero Hamiltonian");
  return std::numbers::pi / norm;
}

inline RteTensors rte_tensors(const PauliSum& h, const StateVector& phi0, std::size_t order, double dt) {
  detail::check_qubits(h, phi0.num_qubits());
  detail::require_unit_reference(phi0);
  if (order == 0) throw std::invalid_argument("rte_tensors: order must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("rte_tensors: dt must be positive");
  GenerationCounters::global().rte_tensor_sets.fetch_add(1, std::memory_order_relaxed);

  std::vector<StateVector> psi;
  std::vector<StateVector> h_psi;
  psi.reserve(order);
  h_psi.reserve(order);
  for (std::size_t j = 0; j < order; ++j) {
    psi.push_back(evolve_state(h, phi0, static_cast<double>(j) * dt));
    h_psi.push_back(apply_pauli_sum(h, psi.back()));
  }

  const auto r = static_cast<Eigen::Index>(order);
  RteTensors t{Eigen::MatrixXcd(r, r), Eigen::MatrixXcd(r, r), Eigen::MatrixXcd(r, r), dt};
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    t.overlap(i, i) = 1.0;
    t.energy(i, i) = state_overlap(psi[ui], h_psi[ui]).real();
    t.energy_sq(i, i) = h_psi[ui].amplitudes().squaredNorm();
    for (Eigen::Index j = i + 1; j < r; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      t.overlap(i, j) = state_overlap(psi[ui], psi[uj]);
      t.energy(i, j) = state_overlap(psi[ui], h_psi[uj]);
      t.energy_sq(i, j) = state_overlap(h_psi[ui], h_psi[uj]);
      t.overlap(j, i) = std::conj(t.overlap(i, j));
      t.energy(j, i) = std::conj(t.energy(i, j));
      t.energy_sq(j, i) = std::conj(t.energy_sq(i, j));
    }
  }
  return t;
}

}  // namespace pqse
