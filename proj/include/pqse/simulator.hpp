#pragma once

// Dense statevector backend. Qubit 0 is the most significant bit of the
// amplitude index, so basis_state("10") has its amplitude at index 2.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pqse/pauli.hpp"

namespace pqse {

using cplx = std::complex<double>;

/// Largest qubit count accepted by the dense eigensolver.
inline constexpr std::size_t kMaxDenseQubits = 14;

class StateVector {
 public:
  StateVector(std::size_t num_qubits, Eigen::VectorXcd amplitudes)
      : n_(num_qubits), amp_(std::move(amplitudes)) {
    if (n_ == 0) throw std::invalid_argument("StateVector: zero qubits");
    if (n_ > 30 || amp_.size() != (Eigen::Index{1} << n_))
      throw std::invalid_argument("StateVector: length must be 2^n");
  }

  static StateVector zero(std::size_t num_qubits) {
    return StateVector(num_qubits, Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits));
  }

  [[nodiscard]] std::size_t num_qubits() const noexcept { return n_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return amp_.size(); }
  [[nodiscard]] const Eigen::VectorXcd& amplitudes() const noexcept { return amp_; }
  [[nodiscard]] Eigen::VectorXcd& amplitudes() noexcept { return amp_; }
  [[nodiscard]] double norm() const { return amp_.norm(); }

  [[nodiscard]] StateVector normalized() const {
    const double nrm = norm();
    if (nrm == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
    return StateVector(n_, amp_ / nrm);
  }

 private:
  std::size_t n_;
  Eigen::VectorXcd amp_;
};

inline StateVector basis_state(std::string_view bits) {
  if (bits.empty()) throw std::invalid_argument("basis_state: zero qubits");
  if (bits.size() > 30) throw std::invalid_argument("basis_state: too many qubits");
  std::uint64_t index = 0;
  for (char b : bits) {
    if (b != '0' && b != '1') throw std::invalid_argument("basis_state: bits must be 0/1");
    index = (index << 1) | static_cast<std::uint64_t>(b == '1');
  }
  auto v = StateVector::zero(bits.size());
  v.amplitudes()[static_cast<Eigen::Index>(index)] = 1.0;
  return v;
}

namespace detail {

/// Bit masks of one Pauli string: P|x> = i^{#Y} (-1)^{popcount(x & phase)} |x ^ flip>.
struct PauliMasks {
  std::uint64_t flip = 0;
  std::uint64_t phase = 0;
  cplx y_factor{1.0, 0.0};
};

inline PauliMasks masks_of(const PauliString& p) {
  const std::size_t n = p.num_qubits();
  PauliMasks m;
  int num_y = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    switch (p[q]) {
      case 'X': m.flip |= bit; break;
      case 'Y': m.flip |= bit; m.phase |= bit; ++num_y; break;
      case 'Z': m.phase |= bit; break;
      default: break;
    }
  }
  static constexpr cplx kPowI[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  m.y_factor = kPowI[num_y % 4];
  return m;
}

inline void check_qubits(const PauliSum& h, std::size_t n) {
  if (h.num_qubits() != n)
    throw std::invalid_argument("dimension mismatch: operator on " + std::to_string(h.num_qubits()) +
                                " qubits, state on " + std::to_string(n));
}

}  // namespace detail

inline StateVector apply_pauli_sum(const PauliSum& h, const StateVector& v) {
  detail::check_qubits(h, v.num_qubits());
  auto out = StateVector::zero(v.num_qubits());
  const auto& in = v.amplitudes();
  auto& res = out.amplitudes();
  const auto dim = static_cast<std::uint64_t>(v.dim());
  for (const auto& term : h.terms()) {
    const auto m = detail::masks_of(term.string);
    const cplx scale = term.coefficient * m.y_factor;
    for (std::uint64_t x = 0; x < dim; ++x) {
      const double sign = (std::popcount(x & m.phase) & 1) ? -1.0 : 1.0;
      res[static_cast<Eigen::Index>(x ^ m.flip)] += scale * sign * in[static_cast<Eigen::Index>(x)];
    }
  }
  return out;
}

inline Eigen::MatrixXcd dense_matrix(const PauliSum& h) {
  if (h.num_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("dense matrix limited to " + std::to_string(kMaxDenseQubits) + " qubits");
  const auto dim = std::uint64_t{1} << h.num_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& term : h.terms()) {
    const auto masks = detail::masks_of(term.string);
    const cplx scale = term.coefficient * masks.y_factor;
    for (std::uint64_t x = 0; x < dim; ++x) {
      const double sign = (std::popcount(x & masks.phase) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(x ^ masks.flip), static_cast<Eigen::Index>(x)) += scale * sign;
    }
  }
  return m;
}

/// Full eigendecomposition H = U diag(values) U^dagger, values ascending.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

namespace detail {

inline bool is_real_operator(const PauliSum& h) {
  for (const auto& t : h.terms()) {
    const auto ys = std::count(t.string.letters().begin(), t.string.letters().end(), 'Y');
    if (ys % 2 != 0) return false;
  }
  return true;
}

inline std::shared_ptr<const EigenSystem> diagonalize(const PauliSum& h) {
  auto sys = std::make_shared<EigenSystem>();
  const Eigen::MatrixXcd m = dense_matrix(h);
  if (is_real_operator(h)) {
    const Eigen::MatrixXd re = m.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    sys->values = es.eigenvalues();
    sys->vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    sys->values = es.eigenvalues();
    sys->vectors = es.eigenvectors();
  }
  return sys;
}

/// Eigendecompositions keyed on the serialized operator. Concurrent readers,
/// one writer at a time.
class EigenCache {
 public:
  static EigenCache& instance() {
    static EigenCache cache;
    return cache;
  }

  std::shared_ptr<const EigenSystem> get(const PauliSum& h) {
    const std::string key = serialize_pauli_sum(h);
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto sys = diagonalize(h);
    std::unique_lock lock(mutex_);
    if (entries_.size() >= kCapacity) entries_.clear();
    return entries_.emplace(key, std::move(sys)).first->second;
  }

  void clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
  }

 private:
  static constexpr std::size_t kCapacity = 16;
  std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const EigenSystem>> entries_;
};

}  // namespace detail

inline std::shared_ptr<const EigenSystem> eigensystem(const PauliSum& h) {
  if (h.num_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("exact diagonalization limited to " + std::to_string(kMaxDenseQubits) +
                                " qubits, got " + std::to_string(h.num_qubits()));
  return detail::EigenCache::instance().get(h);
}

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // ascending
  double ground_energy;
  StateVector ground_state;
  double spectral_norm;
};

inline Spectrum exact_ground(const PauliSum& h) {
  const auto sys = eigensystem(h);
  const auto& ev = sys->values;
  return Spectrum{ev, ev[0], StateVector(h.num_qubits(), sys->vectors.col(0)),
                  std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]))};
}

/// exp(-i H t) v via the cached eigendecomposition.
inline StateVector evolve_state(const PauliSum& h, const StateVector& v, double t) {
  detail::check_qubits(h, v.num_qubits());
  if (t == 0.0) return v;
  const auto sys = eigensystem(h);
  Eigen::VectorXcd coeffs = sys->vectors.adjoint() * v.amplitudes();
  for (Eigen::Index k = 0; k < coeffs.size(); ++k)
    coeffs[k] *= std::exp(cplx(0.0, -sys->values[k] * t));
  return StateVector(v.num_qubits(), sys->vectors * coeffs);
}

/// <u|v>, conjugate-linear in u.
inline cplx state_overlap(const StateVector& u, const StateVector& v) {
  if (u.num_qubits() != v.num_qubits()) throw std::invalid_argument("dimension mismatch in overlap");
  return u.amplitudes().dot(v.amplitudes());
}

/// <v|H|v> / <v|v>.
inline double expectation(const PauliSum& h, const StateVector& v) {
  detail::check_qubits(h, v.num_qubits());
  const double nrm2 = v.amplitudes().squaredNorm();
  if (nrm2 == 0.0) throw std::invalid_argument("expectation of the zero vector");
  return state_overlap(v, apply_pauli_sum(h, v)).real() / nrm2;
}

}  // namespace pqse
