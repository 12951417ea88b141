#pragma once

// Partitioned quantum subspace expansion.
//
// A run solves a sequence of small Krylov problems K_{r_1}(A, phi0),
// K_{r_2}(A, psi_1), ... where each psi_k is the ground Ritz vector of the
// previous step. Successive steps never prepare psi_k; every matrix element
// is rebuilt from the reference data:
//
//   power basis (A = H):   S_ij = sum_m o_m mu_{i+j+m},  H_ij = sum_m o_m mu_{i+j+m+1}
//   general basis:         S_ij = sum_{m,m'} conj(b_m) b_m' <phi0|(A^{m+i})^dag A^{m'+j}|phi0>
//
// with o_m = sum_{k+l=m} conj(b_k) b_l and psi = sum_m b_m A^m phi0. After
// each accepted step the coefficients are renormalized so <psi|psi> = 1.
//
// Candidates are ranked by |var|. Noisy variance estimates can go negative,
// and a signed argmin would then prefer the most noise-dominated candidate.
//
// Classical cost per iteration is dominated by the candidate GEVPs and the
// coefficient convolutions, O(R^4) over a run; `arithmetic_ops` in the result
// counts the multiply-adds spent building sub-problems and statistics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pqse/gevp.hpp"
#include "pqse/subspace.hpp"

namespace pqse {

/// Raised for a candidate whose norm <psi|psi> is not positive.
class DegenerateCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RealCoeffs = std::vector<double>;

/// O(R) = 1 - P + sum r_k.
inline std::size_t partition_order(const std::vector<std::size_t>& sequence) {
  if (sequence.empty()) throw std::invalid_argument("partition_order: empty sequence");
  std::size_t total = 1;
  for (std::size_t r : sequence) {
    if (r == 0) throw std::invalid_argument("partition_order: orders must be positive");
    total += r - 1;
  }
  return total;
}

/// Full discrete convolution (polynomial product).
template <typename T>
std::vector<T> convolve_coeffs(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("convolve_coeffs: empty input");
  std::vector<T> out(a.size() + b.size() - 1, T{});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Eigen::VectorXcd convolve_coeffs(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("convolve_coeffs: empty input");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// o_y = sum_{k+l=y} conj(c_k) c_l, which is real.
inline RealCoeffs outer_coeffs(const Eigen::VectorXcd& c) {
  if (c.size() == 0) throw std::invalid_argument("outer_coeffs: empty coefficient vector");
  const auto r = c.size();
  RealCoeffs o(static_cast<std::size_t>(2 * r - 1), 0.0);
  const double scale = std::max(c.squaredNorm(), std::numeric_limits<double>::min());
  for (Eigen::Index y = 0; y < 2 * r - 1; ++y) {
    cplx sum = 0.0;
    for (Eigen::Index k = std::max<Eigen::Index>(0, y - r + 1); k <= std::min(y, r - 1); ++k)
      sum += std::conj(c[k]) * c[y - k];
    if (std::abs(sum.imag()) > 1e-12 * scale) throw std::logic_error("outer_coeffs: imaginary residue");
    o[static_cast<std::size_t>(y)] = sum.real();
  }
  return o;
}

/// Reconstruction coefficients of the next iterate: b_new = c * b_old.
inline Eigen::VectorXcd b_update(const Eigen::VectorXcd& b_old, const Eigen::VectorXcd& c) {
  return convolve_coeffs(c, b_old);
}

/// Order-q problem in K_q(H, psi) with psi described by o.
inline SubspaceProblem sub_matrices_power(const RealCoeffs& o, const MomentSequence& mu, std::size_t q) {
  if (o.empty()) throw std::invalid_argument("sub_matrices_power: empty coefficients");
  if (q == 0) throw std::invalid_argument("sub_matrices_power: order must be positive");
  const std::size_t needed = 2 * (q - 1) + (o.size() - 1) + 1;
  if (mu.max_power() < needed)
    throw std::invalid_argument("sub_matrices_power: needs moments through mu_" + std::to_string(needed) +
                                ", have mu_" + std::to_string(mu.max_power()));
  // w[k] = sum_m o_m mu_{k+m}, k = 0..2q-1; S uses w[i+j], H uses w[i+j+1].
  std::vector<double> w(2 * q);
  for (std::size_t k = 0; k < 2 * q; ++k) {
    double s = 0.0;
    for (std::size_t m = 0; m < o.size(); ++m) s += o[m] * mu[k + m];
    w[k] = s;
  }
  const auto r = static_cast<Eigen::Index>(q);
  SubspaceProblem p{Eigen::MatrixXcd(r, r), Eigen::MatrixXcd(r, r)};
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      p.smat(i, j) = w[static_cast<std::size_t>(i + j)];
      p.hmat(i, j) = w[static_cast<std::size_t>(i + j + 1)];
    }
  return p;
}

struct CandidateStats {
  double norm;
  double energy;
  double variance;  // raw; may be negative under noise
};

/// Norm, energy and variance of the state described by o.
inline CandidateStats candidate_statistics(const RealCoeffs& o, const MomentSequence& mu) {
  if (o.empty()) throw std::invalid_argument("candidate_statistics: empty coefficients");
  const std::size_t needed = o.size() - 1 + 2;
  if (mu.max_power() < needed)
    throw std::invalid_argument("candidate_statistics: needs moments through mu_" + std::to_string(needed));
  double n0 = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t m = 0; m < o.size(); ++m) {
    n0 += o[m] * mu[m];
    n1 += o[m] * mu[m + 1];
    n2 += o[m] * mu[m + 2];
  }
  if (!(n0 > 0.0)) throw DegenerateCandidate("candidate norm is not positive");
  const double e = n1 / n0;
  return {n0, e, n2 / n0 - e * e};
}

namespace detail {

/// (order x q) matrix whose column i holds b shifted down by i rows.
inline Eigen::MatrixXcd shifted_columns(const Eigen::VectorXcd& b, Eigen::Index order, Eigen::Index q) {
  Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(order, q);
  for (Eigen::Index i = 0; i < q; ++i) shift.col(i).segment(i, b.size()) = b;
  return shift;
}

inline Eigen::VectorXcd padded(const Eigen::VectorXcd& b, Eigen::Index order) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(order);
  out.head(b.size()) = b;
  return out;
}

}  // namespace detail

/// Order-q problem in K_q(A, psi) with psi = sum_m b_m A^m phi0, from the
/// RTE tensors: S_ij = sum conj(b_m) b_m' S[m+i][m'+j], likewise for H.
inline SubspaceProblem sub_matrices_rte(const Eigen::VectorXcd& b, const RteTensors& t, std::size_t q) {
  if (b.size() == 0) throw std::invalid_argument("sub_matrices_rte: empty coefficients");
  if (q == 0) throw std::invalid_argument("sub_matrices_rte: order must be positive");
  const auto qi = static_cast<Eigen::Index>(q);
  if (b.size() - 1 + qi - 1 > t.order() - 1)
    throw std::invalid_argument("sub_matrices_rte: tensor order " + std::to_string(t.order()) +
                                " does not cover the requested block");
  const Eigen::MatrixXcd shift = detail::shifted_columns(b, t.order(), qi);
  SubspaceProblem p{shift.adjoint() * t.energy * shift, shift.adjoint() * t.overlap * shift};
  return p;
}

inline CandidateStats rte_candidate_statistics(const Eigen::VectorXcd& b, const RteTensors& t) {
  if (b.size() == 0 || b.size() > t.order())
    throw std::invalid_argument("rte_candidate_statistics: coefficient length outside tensor order");
  const Eigen::VectorXcd v = detail::padded(b, t.order());
  const double n0 = v.dot(t.overlap * v).real();
  if (!(n0 > 0.0)) throw DegenerateCandidate("candidate norm is not positive");
  const double e = v.dot(t.energy * v).real() / n0;
  const double h2 = v.dot(t.energy_sq * v).real() / n0;
  return {n0, e, h2 - e * e};
}

enum class Criterion { variance, energy_squared };

struct PqseOptions {
  Criterion criterion = Criterion::variance;
  /// Test hook: run exactly this partition, skipping selection and the
  /// acceptance test.
  std::optional<std::vector<std::size_t>> forced_sequence;
  /// Keep each accepted step's sub-problem in the log.
  bool record_problems = false;
};

struct IterationLog {
  std::vector<double> candidate_metrics;  // +inf for skipped candidates
  std::vector<double> candidate_energies;  // NaN for skipped candidates
  std::size_t chosen = 0;
  bool accepted = false;
  double energy = 0.0;
  double variance = 0.0;
  double metric = 0.0;
  Eigen::VectorXcd coeffs;               // ground coefficients c of the chosen candidate
  std::optional<SubspaceProblem> problem;  // when record_problems
};

struct PartitionState {
  std::vector<std::size_t> sequence;
  RealCoeffs o{1.0};                              // power basis only
  Eigen::VectorXcd b = Eigen::VectorXcd::Ones(1);
  std::size_t r_max = 0;
  double energy = 0.0;
  std::vector<double> var_history;

  [[nodiscard]] std::size_t order() const {
    return sequence.empty() ? std::size_t{1} : partition_order(sequence);
  }
};

struct PqseResult {
  double energy = 0.0;
  std::vector<std::size_t> sequence;
  std::size_t order = 1;
  bool terminated_early = false;
  double final_variance = 0.0;  // signed estimate
  Eigen::VectorXcd b;
  RealCoeffs o;  // empty for the RTE basis
  std::vector<double> var_history;  // |var| of the reference and each accepted iterate
  std::vector<IterationLog> iterations;
  std::size_t arithmetic_ops = 0;
};

namespace detail {

struct Candidate {
  SubspaceProblem problem;
  GevpSolution solution;
  CandidateStats stats;
  RealCoeffs o;
  Eigen::VectorXcd b;
  double metric;
};

class PowerBackend {
 public:
  PowerBackend(const MomentSequence& mu, std::size_t max_order, Criterion criterion)
      : mu_(mu), max_order_(max_order), criterion_(criterion) {
    const std::size_t needed = criterion == Criterion::variance ? 2 * max_order : 2 * max_order - 1;
    if (mu.max_power() < needed)
      throw std::invalid_argument("pqse_run: power basis order " + std::to_string(max_order) +
                                  " needs moments through mu_" + std::to_string(needed));
  }

  [[nodiscard]] CandidateStats reference_stats() const {
    // R = 1 under the energy-squared criterion supplies only mu_1.
    if (mu_.max_power() < 2) return {1.0, mu_[1], std::numeric_limits<double>::quiet_NaN()};
    return candidate_statistics({1.0}, mu_);
  }

  std::optional<Candidate> evaluate(const PartitionState& s, std::size_t q, std::size_t& ops) const {
    const std::size_t new_order = s.order() + q - 1;
    if (2 * new_order - 1 > 2 * max_order_ - 1) throw std::logic_error("power index bound exceeded");
    Candidate cand;
    cand.problem = sub_matrices_power(s.o, mu_, q);
    ops += 2 * q * s.o.size();
    try {
      cand.solution = solve_gevp(cand.problem, 0.0);
    } catch (const GevpError&) {
      return std::nullopt;
    }
    const Eigen::VectorXcd& c = cand.solution.ground_coeffs;
    cand.o = convolve_coeffs(s.o, outer_coeffs(c));
    cand.b = b_update(s.b, c);
    ops += static_cast<std::size_t>(c.size() * c.size()) + s.o.size() * (2 * q - 1) + s.b.size() * q;
    const bool terminating = new_order == max_order_;
    if (terminating && criterion_ == Criterion::energy_squared) {
      // Variance would need mu_{2R}; only norm and energy are formed.
      double n0 = 0.0, n1 = 0.0;
      for (std::size_t m = 0; m < cand.o.size(); ++m) {
        n0 += cand.o[m] * mu_[m];
        n1 += cand.o[m] * mu_[m + 1];
      }
      ops += 2 * cand.o.size();
      if (!(n0 > 0.0)) return std::nullopt;
      const double e = n1 / n0;
      cand.stats = {n0, e, std::numeric_limits<double>::quiet_NaN()};
      cand.metric = e * e;
      return cand;
    }
    if (cand.o.size() - 1 + 2 > 2 * max_order_) throw std::logic_error("power index bound exceeded");
    try {
      cand.stats = candidate_statistics(cand.o, mu_);
    } catch (const DegenerateCandidate&) {
      return std::nullopt;
    }
    ops += 3 * cand.o.size();
    cand.metric = std::abs(cand.stats.variance);
    return cand;
  }

  [[nodiscard]] double initial_energy() const { return mu_[1]; }

 private:
  const MomentSequence& mu_;
  std::size_t max_order_;
  Criterion criterion_;
};

class RteBackend {
 public:
  RteBackend(const RteTensors& t, std::size_t max_order, Criterion criterion)
      : t_(t), max_order_(max_order), criterion_(criterion) {
    if (static_cast<std::size_t>(t.order()) < max_order)
      throw std::invalid_argument("pqse_run: RTE tensors of order " + std::to_string(t.order()) +
                                  " do not cover order " + std::to_string(max_order));
  }

  [[nodiscard]] CandidateStats reference_stats() const {
    return rte_candidate_statistics(Eigen::VectorXcd::Ones(1), t_);
  }

  std::optional<Candidate> evaluate(const PartitionState& s, std::size_t q, std::size_t& ops) const {
    const std::size_t new_order = s.order() + q - 1;
    if (new_order > max_order_) throw std::logic_error("RTE index bound exceeded");
    Candidate cand;
    cand.problem = sub_matrices_rte(s.b, t_, q);
    const auto ord = static_cast<std::size_t>(t_.order());
    ops += 2 * (ord * ord * q + ord * q * q);
    try {
      cand.solution = solve_gevp(cand.problem, 0.0);
    } catch (const GevpError&) {
      return std::nullopt;
    }
    cand.b = b_update(s.b, cand.solution.ground_coeffs);
    try {
      cand.stats = rte_candidate_statistics(cand.b, t_);
    } catch (const DegenerateCandidate&) {
      return std::nullopt;
    }
    ops += 3 * (ord * ord + ord) + s.b.size() * q;
    const bool terminating = new_order == max_order_;
    cand.metric = terminating && criterion_ == Criterion::energy_squared ? cand.stats.energy * cand.stats.energy
                                                                         : std::abs(cand.stats.variance);
    return cand;
  }

  [[nodiscard]] double initial_energy() const { return t_.energy(0, 0).real(); }

 private:
  const RteTensors& t_;
  std::size_t max_order_;
  Criterion criterion_;
};

inline void accept(PartitionState& s, Candidate& cand, std::size_t q, bool power_basis) {
  const double n0 = cand.stats.norm;
  s.sequence.push_back(q);
  if (power_basis) {
    s.o = std::move(cand.o);
    for (double& x : s.o) x /= n0;
  }
  s.b = cand.b / std::sqrt(n0);
  s.r_max -= q - 1;
  s.energy = cand.solution.ground_energy();
}

template <typename Backend>
PqseResult run_engine(const Backend& backend, std::size_t max_order, const PqseOptions& opts, bool power_basis) {
  if (max_order == 0) throw std::invalid_argument("pqse_run: order must be positive");
  PartitionState state;
  state.r_max = max_order;
  state.energy = backend.initial_energy();
  if (!power_basis) state.o.clear();

  PqseResult result;
  const CandidateStats ref = backend.reference_stats();
  double prev_metric = std::abs(ref.variance);
  state.var_history.push_back(prev_metric);
  double final_variance = ref.variance;

  if (opts.forced_sequence) {
    const auto& forced = *opts.forced_sequence;
    if (partition_order(forced) > max_order)
      throw std::invalid_argument("forced partition exceeds the maximum order");
    for (std::size_t q : forced) {
      auto cand = backend.evaluate(state, q, result.arithmetic_ops);
      if (!cand) throw GevpError("forced partition step of order " + std::to_string(q) + " is unsolvable");
      IterationLog log;
      log.chosen = q;
      log.accepted = true;
      log.energy = cand->solution.ground_energy();
      log.variance = cand->stats.variance;
      log.metric = cand->metric;
      log.coeffs = cand->solution.ground_coeffs;
      log.candidate_metrics = {cand->metric};
      log.candidate_energies = {cand->stats.energy};
      if (opts.record_problems) log.problem = cand->problem;
      final_variance = cand->stats.variance;
      state.var_history.push_back(std::abs(cand->stats.variance));
      accept(state, *cand, q, power_basis);
      result.iterations.push_back(std::move(log));
    }
  } else {
    while (state.order() < max_order) {
      IterationLog log;
      std::optional<Candidate> best;
      std::size_t best_q = 0;
      for (std::size_t q = 1; q <= state.r_max; ++q) {
        auto cand = backend.evaluate(state, q, result.arithmetic_ops);
        const bool usable = cand && !std::isnan(cand->metric);
        log.candidate_metrics.push_back(usable ? cand->metric : std::numeric_limits<double>::infinity());
        log.candidate_energies.push_back(cand ? cand->stats.energy : std::numeric_limits<double>::quiet_NaN());
        if (usable && (!best || cand->metric < best->metric)) {
          best = std::move(cand);
          best_q = q;
        }
      }
      if (!best) {
        if (state.sequence.empty()) throw GevpError("pqse_run: no candidate is solvable at the first iteration");
        result.iterations.push_back(std::move(log));
        break;
      }
      log.chosen = best_q;
      log.energy = best->solution.ground_energy();
      log.variance = best->stats.variance;
      log.metric = best->metric;
      log.coeffs = best->solution.ground_coeffs;
      if (opts.record_problems) log.problem = best->problem;

      if (best_q == 1) {
        // No order growth: the candidate is the previous iterate.
        if (state.sequence.empty()) state.sequence.push_back(1);
        result.iterations.push_back(std::move(log));
        break;
      }
      if (prev_metric < best->metric) {
        result.iterations.push_back(std::move(log));
        break;
      }
      log.accepted = true;
      prev_metric = best->metric;
      final_variance = best->stats.variance;
      state.var_history.push_back(std::abs(best->stats.variance));
      accept(state, *best, best_q, power_basis);
      result.iterations.push_back(std::move(log));
    }
  }
  if (state.sequence.empty()) state.sequence.push_back(1);

  result.energy = state.energy;
  result.sequence = state.sequence;
  result.order = state.order();
  result.terminated_early = result.order < max_order;
  result.final_variance = final_variance;
  result.b = state.b;
  result.o = state.o;
  result.var_history = state.var_history;
  return result;
}

}  // namespace detail

/// PQSE over power-basis moments; needs mu through 2R (R-th order variance).
inline PqseResult pqse_run(const MomentSequence& mu, std::size_t max_order, const PqseOptions& opts = {}) {
  const detail::PowerBackend backend(mu, max_order, opts.criterion);
  return detail::run_engine(backend, max_order, opts, true);
}

/// PQSE over RTE tensors of order >= R.
inline PqseResult pqse_run(const RteTensors& tensors, std::size_t max_order, const PqseOptions& opts = {}) {
  const detail::RteBackend backend(tensors, max_order, opts.criterion);
  return detail::run_engine(backend, max_order, opts, false);
}

struct PowerBasis {};
struct RteBasis {
  double dt;
};
using KrylovBasis = std::variant<PowerBasis, RteBasis>;

/// sum_m b_m A^m phi0 in the full space, unnormalized.
inline StateVector reconstruct_state(const Eigen::VectorXcd& b, const PauliSum& h, const StateVector& phi0,
                                     const KrylovBasis& basis) {
  if (phi0.num_qubits() > kMaxDenseQubits)
    throw std::invalid_argument("reconstruct_state limited to " + std::to_string(kMaxDenseQubits) + " qubits");
  detail::check_qubits(h, phi0.num_qubits());
  auto out = StateVector::zero(phi0.num_qubits());
  StateVector term = phi0;
  for (Eigen::Index m = 0; m < b.size(); ++m) {
    if (m > 0) {
      if (std::holds_alternative<PowerBasis>(basis))
        term = apply_pauli_sum(h, term);
      else
        term = evolve_state(h, term, std::get<RteBasis>(basis).dt);
    }
    out.amplitudes() += b[m] * term.amplitudes();
  }
  return out;
}

}  // namespace pqse
