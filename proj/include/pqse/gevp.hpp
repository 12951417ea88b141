#pragma once

// Generalized Hermitian eigenproblems H c = E S c solved by canonical
// orthogonalization, plus the thresholded variant and its threshold scan.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pqse/subspace.hpp"

namespace pqse {

/// Raised when no overlap eigenvalue survives the threshold.
class GevpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GevpSolution {
  Eigen::VectorXd energies;       // ascending
  Eigen::VectorXcd ground_coeffs;  // in the original basis, length = input dim
  Eigen::Index retained_dim = 0;
  Eigen::VectorXd dropped_eigenvalues;

  [[nodiscard]] double ground_energy() const { return energies[0]; }
};

/// Overlap eigenvalues at or below dim * eps * max|d| are numerically zero:
/// their eigenvectors are rounding error, not basis directions.
inline double rank_floor(const Eigen::VectorXd& d) {
  if (d.size() == 0) return 0.0;
  return static_cast<double>(d.size()) * std::numeric_limits<double>::epsilon() * d.cwiseAbs().maxCoeff();
}

/// Eigendecompose S = V D V^dagger, keep D_ii > max(tau, rank_floor), diagonalize the
/// whitened D^{-1/2} V^dagger H V D^{-1/2} and map back c = V D^{-1/2} y.
/// tau = 0 is plain QSE.
inline GevpSolution solve_gevp(const SubspaceProblem& p, double tau) {
  if (p.smat.rows() != p.smat.cols() || p.hmat.rows() != p.hmat.cols() || p.hmat.rows() != p.smat.rows())
    throw std::invalid_argument("solve_gevp: H and S must be square with equal dimension");
  if (!(tau >= 0.0)) throw std::invalid_argument("solve_gevp: threshold must be non-negative");
  const Eigen::Index dim = p.dim();
  if (dim == 0) throw std::invalid_argument("solve_gevp: empty problem");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> overlap(p.smat);
  if (overlap.info() != Eigen::Success) throw GevpError("overlap eigensolver failed");
  const Eigen::VectorXd& d = overlap.eigenvalues();

  const double floor = rank_floor(d);
  std::vector<Eigen::Index> kept;
  std::vector<double> dropped;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (d[k] > tau && d[k] > floor)
      kept.push_back(k);
    else
      dropped.push_back(d[k]);
  }
  if (kept.empty()) throw GevpError("all overlap eigenvalues are below the threshold");

  const auto r = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXcd whiten(dim, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index k = kept[static_cast<std::size_t>(c)];
    whiten.col(c) = overlap.eigenvectors().col(k) / std::sqrt(d[k]);
  }
  Eigen::MatrixXcd reduced = whiten.adjoint() * p.hmat * whiten;
  reduced = (0.5 * (reduced + reduced.adjoint())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> projected(reduced);
  if (projected.info() != Eigen::Success) throw GevpError("projected eigensolver failed");

  GevpSolution sol;
  sol.energies = projected.eigenvalues();
  if (!sol.energies.allFinite()) throw GevpError("non-finite Ritz values");
  sol.ground_coeffs = whiten * projected.eigenvectors().col(0);
  sol.retained_dim = r;
  sol.dropped_eigenvalues = Eigen::Map<const Eigen::VectorXd>(dropped.data(), static_cast<Eigen::Index>(dropped.size()));
  return sol;
}

inline double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

/// tau = 10^{-a} sqrt(||dH||^2 + ||dS||^2).
inline double scaled_threshold(double eta_h, double eta_s, double a) {
  return std::pow(10.0, -a) * std::sqrt(eta_h * eta_h + eta_s * eta_s);
}

inline double scaled_threshold(const Eigen::MatrixXcd& delta_h, const Eigen::MatrixXcd& delta_s, double a) {
  if (delta_h.rows() != delta_h.cols() || delta_s.rows() != delta_s.cols() || delta_h.rows() != delta_s.rows())
    throw std::invalid_argument("scaled_threshold: perturbations must be square with equal dimension");
  return scaled_threshold(spectral_norm(delta_h), spectral_norm(delta_s), a);
}

/// |(estimate - truth) / truth|.
inline double relative_error(double estimate, double truth) {
  if (truth == 0.0) throw std::invalid_argument("relative_error: exact energy is zero");
  return std::abs((estimate - truth) / truth);
}

/// Evenly spaced grid of threshold exponents; default -0.5..5 with 50 points.
inline std::vector<double> threshold_grid(double lo = -0.5, double hi = 5.0, std::size_t count = 50) {
  if (count == 0) throw std::invalid_argument("threshold_grid: empty grid");
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

struct TqseResult {
  double best_a = 0.0;
  double tau = 0.0;
  double rel_error = 0.0;
  GevpSolution solution;
};

/// Best-case thresholding: solve at every a and keep the one closest to the
/// exact energy. Unsolvable a are skipped; ties go to the smaller a.
inline TqseResult tqse_scan(const SubspaceProblem& noisy, const Eigen::MatrixXcd& delta_h,
                            const Eigen::MatrixXcd& delta_s, double truth, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("tqse_scan: empty grid");
  const double eta_h = spectral_norm(delta_h);
  const double eta_s = spectral_norm(delta_s);
  std::optional<TqseResult> best;
  for (double a : grid) {
    const double tau = scaled_threshold(eta_h, eta_s, a);
    GevpSolution sol;
    try {
      sol = solve_gevp(noisy, tau);
    } catch (const GevpError&) {
      continue;
    }
    const double err = relative_error(sol.ground_energy(), truth);
    if (!best || err < best->rel_error || (err == best->rel_error && a < best->best_a))
      best = TqseResult{a, tau, err, std::move(sol)};
  }
  if (!best) throw GevpError("tqse_scan: every threshold left an empty subspace");
  return *std::move(best);
}

}  // namespace pqse
