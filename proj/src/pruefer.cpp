#include "polychain/pruefer.hpp"

#include <algorithm>
#include <string>

#include "polychain/critical.hpp"
#include "polychain/error.hpp"
#include "polychain/transfer.hpp"

namespace polychain {

namespace {

void require_sites(const JacobiWindow& window, std::int64_t N) {
  if (N < 1) throw Error(ErrorCode::InsufficientWindow, "N must be at least 1");
  if (!window.covers(0, N - 1))
    throw Error(ErrorCode::InsufficientWindow,
                "window [" + std::to_string(window.n_min) + ", " + std::to_string(window.n_max) +
                    "] does not cover sites 0.." + std::to_string(N - 1));
}

/// One site step on a unit vector: returns log of the stretch.
inline double step(Vec2& w, double v_minus_E, double t) {
  const double inv = 1.0 / t;
  const Vec2 x{(v_minus_E * w[0]) * inv - t * w[1], w[0] * inv};
  const double r = std::hypot(x[0], x[1]);
  w = {x[0] / r, x[1] / r};
  return std::log(r);
}

PrueferTrajectory run(const JacobiWindow& window, double E, Vec2 w, double theta_start, double log_r0,
                      std::int64_t N) {
  require_sites(window, N);
  PrueferTrajectory tr;
  tr.E = E;
  tr.theta0 = theta_start;
  const auto n_points = static_cast<std::size_t>(N + 1);
  tr.theta.resize(n_points);
  tr.log_R.resize(n_points);
  std::vector<double> w1(n_points);
  const double r0 = norm(w);
  w = {w[0] / r0, w[1] / r0};
  double theta = theta_start;
  double log_r = log_r0 + std::log(r0);
  tr.theta[0] = theta;
  tr.log_R[0] = log_r;
  w1[0] = w[1];
  for (std::int64_t n = 0; n < N; ++n) {
    log_r += step(w, window.v(n) - E, window.t(n));
    theta = lift_angle(theta, std::atan2(w[1], w[0]));
    const auto i = static_cast<std::size_t>(n + 1);
    tr.theta[i] = theta;
    tr.log_R[i] = log_r;
    w1[i] = w[1];
  }
  tr.u_log_scale = *std::max_element(tr.log_R.begin(), tr.log_R.end());
  tr.u.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) tr.u[i] = std::exp(tr.log_R[i] - tr.u_log_scale) * w1[i];
  tr.tu_end = std::exp(log_r - tr.u_log_scale) * w[0];
  return tr;
}


// One step of inverse iteration: x <- (H_N - E)^{-1} x by Thomas elimination,
// with tiny pivots nudged off zero as E is an eigenvalue to machine precision.
void inverse_iteration_step(const JacobiWindow& w, double E, std::vector<double>& x) {
  const std::size_t n = x.size();
  double scale = 0.0;
  for (std::size_t l = 0; l < n; ++l) scale = std::max(scale, std::abs(w.v(std::int64_t(l)) - E) + 2.0 * w.t(std::int64_t(l)));
  const double tiny = 1e-15 * std::max(scale, 1.0);
  std::vector<double> c(n, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    const double off = l == 0 ? 0.0 : -w.t(std::int64_t(l));
    double d = (w.v(std::int64_t(l)) - E) - (l == 0 ? 0.0 : off * c[l - 1]);
    if (std::abs(d) < tiny) d = d < 0.0 ? -tiny : tiny;
    if (l + 1 < n) c[l] = -w.t(std::int64_t(l + 1)) / d;
    x[l] = (x[l] - (l == 0 ? 0.0 : off * x[l - 1])) / d;
  }
  for (std::size_t l = n - 1; l-- > 0;) x[l] -= c[l] * x[l + 1];
  double s = 0.0;
  for (double v : x) s += v * v;
  const double nrm = std::sqrt(s);
  for (double& v : x) v /= nrm;
}

}  // namespace

double block_rotation(const Polymer& polymer, double E) {
  Vec2 w{1.0, 0.0};
  double theta = 0.0;
  for (std::size_t l = 0; l < polymer.length(); ++l) {
    step(w, polymer.potential[l] - E, polymer.hopping[l]);
    theta = lift_angle(theta, std::atan2(w[1], w[0]));
  }
  return theta;
}

PrueferTrajectory free_trajectory(const JacobiWindow& window, double E, double theta0, std::int64_t N) {
  return run(window, E, unit(theta0), theta0, 0.0, N);
}

double free_phase_end(const JacobiWindow& window, double E, double theta0, std::int64_t N) {
  require_sites(window, N);
  Vec2 w = unit(theta0);
  double theta = theta0;
  for (std::int64_t n = 0; n < N; ++n) {
    step(w, window.v(n) - E, window.t(n));
    theta = lift_angle(theta, std::atan2(w[1], w[0]));
  }
  return theta;
}

PhaseDerivativeCheck phase_derivative_identity_check(const JacobiWindow& window, double E, std::int64_t N,
                                                     double h) {
  const PrueferTrajectory tr = free_trajectory(window, E, 0.0, N);
  const double tp = free_phase_end(window, E + h, 0.0, N);
  const double tm = free_phase_end(window, E - h, 0.0, N);
  PhaseDerivativeCheck c;
  c.dtheta_dE = (tp - tm) / (2.0 * h);
  // Work relative to exp(u_log_scale) to stay in range.
  double sum = 0.0;
  for (std::int64_t l = 0; l < N; ++l) sum += tr.u[static_cast<std::size_t>(l + 1)] * tr.u[static_cast<std::size_t>(l + 1)];
  const double r2 = std::exp(2.0 * (tr.log_R[static_cast<std::size_t>(N)] - tr.u_log_scale));
  c.lhs = r2 * c.dtheta_dE;
  c.rhs = sum;
  c.residual = std::abs(c.lhs - c.rhs) / std::abs(c.rhs);
  const double back = std::exp(2.0 * tr.u_log_scale);
  c.lhs *= back;
  c.rhs *= back;
  return c;
}

std::int64_t count_eigenvalues_below(const JacobiWindow& window, double E, std::int64_t N) {
  const double x = free_phase_end(window, E, 0.0, N) / M_PI + 0.5;
  const double f = std::floor(x);
  if (x - f < 1e-10 || f + 1.0 - x < 1e-10)
    throw Error(ErrorCode::Degenerate, "E = " + std::to_string(E) + " is an eigenvalue within phase tolerance");
  return static_cast<std::int64_t>(f);
}

std::pair<double, double> gershgorin(const JacobiWindow& window, std::int64_t N) {
  require_sites(window, N);
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (std::int64_t i = 0; i < N; ++i) {
    const double off = (i > 0 ? window.t(i) : 0.0) + (i + 1 < N ? window.t(i + 1) : 0.0);
    lo = std::min(lo, window.v(i) - off);
    hi = std::max(hi, window.v(i) + off);
  }
  return {lo, hi};
}

double eigenvalue_by_index(const JacobiWindow& window, std::int64_t N, std::int64_t j) {
  return eigenvalue_by_index(window, N, j, gershgorin(window, N));
}

double eigenvalue_by_index(const JacobiWindow& window, std::int64_t N, std::int64_t j,
                           std::pair<double, double> bracket) {
  if (j < 1 || j > N)
    throw Error(ErrorCode::IndexOutOfRange, "j = " + std::to_string(j) + " not in 1.." + std::to_string(N));
  const double target = 0.5 * M_PI + M_PI * static_cast<double>(j - 1);
  const double pad = 1e-9 * std::max(1.0, bracket.second - bracket.first);
  double lo = bracket.first - pad, hi = bracket.second + pad;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (free_phase_end(window, mid, 0.0, N) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigenvector eigenvector(const JacobiWindow& window, double E, std::int64_t N, double tol) {
  const PrueferTrajectory tr = run(window, E, Vec2{1.0, 0.0}, 0.0, 0.0, N);
  Eigenvector ev;
  ev.psi.resize(static_cast<std::size_t>(N));
  double s = 0.0;
  for (std::int64_t l = 0; l < N; ++l) {
    const double x = tr.u[static_cast<std::size_t>(l + 1)];
    ev.psi[static_cast<std::size_t>(l)] = x;
    s += x * x;
  }
  const double nrm = std::sqrt(s);
  for (double& x : ev.psi) x /= nrm;
  ev.boundary_residual = std::abs(tr.tu_end) / nrm;
  if (!(ev.boundary_residual <= tol))
    throw Error(ErrorCode::NotAnEigenvalue,
                "boundary residual " + std::to_string(ev.boundary_residual) + " at E = " + std::to_string(E));
  // Forward shooting loses accuracy where the eigenvector decays away from site 0;
  // two inverse-iteration sweeps restore full precision.
  std::vector<double> x = ev.psi;
  inverse_iteration_step(window, E, x);
  inverse_iteration_step(window, E, x);
  double overlap = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) overlap += x[l] * ev.psi[l];
  if (overlap < 0.0)
    for (double& v : x) v = -v;
  ev.psi = std::move(x);
  return ev;
}

double m_inverse(const CriticalFrame& frame, double theta) {
  const Vec2 w = frame.M_inv * unit(theta);
  double t0 = std::atan2(w[1], w[0]);
  for (int it = 0; it < 3; ++it) t0 += M_PI * std::round((theta - frame.m(t0)) / M_PI);
  return t0;
}

ModifiedTrajectory modified_trajectory(const CriticalFrame& frame, const JacobiWindow& window, double E,
                                       double theta, std::int64_t N) {
  ModifiedTrajectory mt;
  mt.M = frame.M;
  const Vec2 w0 = frame.M_inv * unit(theta);
  mt.free = run(window, E, w0, m_inverse(frame, theta), 0.0, N);
  const std::size_t n = mt.free.theta.size();
  mt.theta.resize(n);
  mt.log_R.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th0 = mt.free.theta[i];
    mt.theta[i] = frame.m(th0);
    mt.log_R[i] = mt.free.log_R[i] + std::log(norm(frame.M * unit(th0)));
  }
  return mt;
}

}  // namespace polychain
