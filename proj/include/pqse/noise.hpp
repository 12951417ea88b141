#pragma once

// Finite-sampling noise on subspace data.
//
// Power basis: one Gaussian draw per moment index k >= 1, so the perturbed
// H and S stay Hankel and share perturbations. Width of draw k is
// delta * sqrt(mu_{2k} - mu_k^2); mu_0 is never perturbed.
//
// RTE basis: independent Hermitian element-wise noise on S, H and H^2.
// Off-diagonal elements get complex noise with N(0, sigma/sqrt(2)) in each
// quadrature; diagonal elements get real N(0, sigma). sigma = delta for S and
// delta * sqrt(Var_phi0(H)) for H and H^2. S_00 is never perturbed.
//
// Draw k of a stream depends only on (master_seed, instance, stream, k), so
// data sliced to a smaller order sees the same noise as the full set.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pqse/random.hpp"
#include "pqse/subspace.hpp"

namespace pqse {

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t instance = 0;
};

/// Width of the draw on mu_k given clean moments through mu_{2k}.
inline double moment_noise_width(const MomentSequence& clean, std::size_t k, double delta) {
  const double var = clean[2 * k] - clean[k] * clean[k];
  return delta * std::sqrt(std::max(var, 0.0));
}

inline MomentSequence perturb_moments(const MomentSequence& clean, std::size_t max_power, const NoiseSpec& spec) {
  if (!(spec.delta >= 0.0)) throw std::invalid_argument("noise strength must be non-negative");
  if (clean.max_power() < 2 * max_power)
    throw std::invalid_argument("perturb_moments: noisy mu_" + std::to_string(max_power) + " needs clean mu_" +
                                std::to_string(2 * max_power) + ", have mu_" + std::to_string(clean.max_power()));
  const CounterRng rng(spec.master_seed, spec.instance, StreamId::moments);
  std::vector<double> noisy(max_power + 1);
  noisy[0] = 1.0;
  for (std::size_t k = 1; k <= max_power; ++k)
    noisy[k] = clean[k] + moment_noise_width(clean, k, spec.delta) * rng.normal(k);
  return MomentSequence(std::move(noisy));
}

namespace detail {

inline std::uint64_t upper_index(Eigen::Index i, Eigen::Index j) {
  const auto ui = static_cast<std::uint64_t>(i);
  const auto uj = static_cast<std::uint64_t>(j);
  return uj * (uj + 1) / 2 + ui;
}

inline void add_hermitian_noise(Eigen::MatrixXcd& m, double sigma, const CounterRng& rng, bool skip_origin) {
  if (sigma == 0.0) return;
  const double quad = sigma / std::numbers::sqrt2;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const std::uint64_t id = upper_index(i, j);
      if (i == j) {
        if (skip_origin && i == 0) continue;
        m(i, i) = m(i, i).real() + sigma * rng.normal(2 * id);
      } else {
        m(i, j) += cplx(quad * rng.normal(2 * id), quad * rng.normal(2 * id + 1));
        m(j, i) = std::conj(m(i, j));
      }
    }
  }
}

}  // namespace detail

/// mean_energy = <phi0|H|phi0>, mean_energy_sq = <phi0|H^2|phi0>.
inline RteTensors perturb_rte_tensors(const RteTensors& clean, double mean_energy, double mean_energy_sq,
                                      const NoiseSpec& spec) {
  if (!(spec.delta >= 0.0)) throw std::invalid_argument("noise strength must be non-negative");
  RteTensors noisy = clean;
  const double sigma_h = spec.delta * std::sqrt(std::max(mean_energy_sq - mean_energy * mean_energy, 0.0));
  const double sigma_s = spec.delta;
  detail::add_hermitian_noise(noisy.overlap, sigma_s, CounterRng(spec.master_seed, spec.instance, StreamId::rte_overlap),
                              true);
  detail::add_hermitian_noise(noisy.energy, sigma_h, CounterRng(spec.master_seed, spec.instance, StreamId::rte_energy),
                              false);
  detail::add_hermitian_noise(noisy.energy_sq, sigma_h,
                              CounterRng(spec.master_seed, spec.instance, StreamId::rte_energy_sq), false);
  return noisy;
}

/// Convenience overload reading <H> and <H^2> of the reference from the
/// clean tensors' (0,0) entries.
inline RteTensors perturb_rte_tensors(const RteTensors& clean, const NoiseSpec& spec) {
  return perturb_rte_tensors(clean, clean.energy(0, 0).real(), clean.energy_sq(0, 0).real(), spec);
}

}  // namespace pqse
