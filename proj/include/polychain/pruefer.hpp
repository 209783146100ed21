#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "polychain/mat2.hpp"
#include "polychain/model.hpp"

namespace polychain {

struct CriticalFrame;

/// prev + d with d ≡ raw − prev (mod 2π) and d in [−π/2, 3π/2).
inline double lift_angle(double prev, double raw) {
  constexpr double two_pi = 2.0 * M_PI;
  double d = raw - prev;
  d -= two_pi * std::floor((d + 0.5 * M_PI) / two_pi);
  return prev + d;
}

/// Lifted free Prüfer phase after one pass through the polymer, starting from θ⁰ = 0.
double block_rotation(const Polymer& polymer, double E);

/// Free Prüfer variables along sites 0..N; index n of each vector is site n
/// except `u`, whose index i is site i − 1 (so u[0] = u(−1)).
struct PrueferTrajectory {
  double E = 0.0;
  double theta0 = 0.0;
  std::vector<double> theta;  ///< θ(0..N)
  std::vector<double> log_R;  ///< log R(0..N)
  std::vector<double> u;      ///< u(−1..N−1) divided by exp(u_log_scale)
  double u_log_scale = 0.0;
  double tu_end = 0.0;  ///< t(N)u(N), same scale as u
};

/// Propagate (t(0)u(0), u(−1)) = (cos θ⁰, sin θ⁰) through sites 0..N−1.
PrueferTrajectory free_trajectory(const JacobiWindow& window, double E, double theta0, std::int64_t N);

/// Only θ(N), for counting and IDS estimates.
double free_phase_end(const JacobiWindow& window, double E, double theta0, std::int64_t N);

struct PhaseDerivativeCheck {
  double lhs = 0.0;        ///< R(N)² ∂_E θ(N), finite difference
  double rhs = 0.0;        ///< Σ_{l<N} u(l)²
  double residual = 0.0;   ///< |lhs − rhs| / |rhs|
  double dtheta_dE = 0.0;  ///< ∂_E θ(N)
};

/// Finite-difference check of R(N)² ∂_E θ(N) = Σ_{l=0}^{N−1} u(l)² for θ⁰ = 0.
PhaseDerivativeCheck phase_derivative_identity_check(const JacobiWindow& window, double E, std::int64_t N,
                                                     double h = 1e-6);

/// Eigenvalues of H_N (sites 0..N−1, Dirichlet) below E; Degenerate if E is an eigenvalue.
std::int64_t count_eigenvalues_below(const JacobiWindow& window, double E, std::int64_t N);

/// Gershgorin interval of H_N.
std::pair<double, double> gershgorin(const JacobiWindow& window, std::int64_t N);

/// E_j with θ^{E_j}(N) = π/2 + π(j−1), by 60 bisection steps.
double eigenvalue_by_index(const JacobiWindow& window, std::int64_t N, std::int64_t j);
double eigenvalue_by_index(const JacobiWindow& window, std::int64_t N, std::int64_t j,
                           std::pair<double, double> bracket);

struct Eigenvector {
  std::vector<double> psi;  ///< ψ(0..N−1), ‖ψ‖₂ = 1
  double boundary_residual = 0.0;  ///< |t(N)u(N)| / ‖u‖₂
};

/// Forward recursion from u(−1) = 0, t(0)u(0) = 1; NotAnEigenvalue above `tol`.
Eigenvector eigenvector(const JacobiWindow& window, double E, std::int64_t N, double tol = 1e-6);

/// Modified Prüfer variables: θ^E(n) = m(θ⁰(n)), R^E(n) = ‖M (t(n)u(n), u(n−1))‖,
/// started from (t(0)u(0), u(−1)) = M⁻¹ e_θ so that R^E(0) = 1.
struct ModifiedTrajectory {
  Mat2 M;
  std::vector<double> theta;
  std::vector<double> log_R;
  PrueferTrajectory free;
};

ModifiedTrajectory modified_trajectory(const CriticalFrame& frame, const JacobiWindow& window, double E,
                                       double theta, std::int64_t N);

/// Preimage of a lifted angle under the frame's m.
double m_inverse(const CriticalFrame& frame, double theta);

}  // namespace polychain
