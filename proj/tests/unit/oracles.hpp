#pragma once

// Reference computations that share no code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "polychain/model.hpp"

namespace oracle {

/// Number of negative pivots of H_N - E (Sylvester inertia of the LDLᵀ factorization).
inline std::int64_t sturm_count(const polychain::JacobiWindow& w, double E, std::int64_t N) {
  std::int64_t neg = 0;
  double d = 1.0;
  for (std::int64_t n = 0; n < N; ++n) {
    const double off = n == 0 ? 0.0 : w.t(n);
    d = (w.v(n) - E) - (n == 0 ? 0.0 : off * off / d);
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++neg;
  }
  return neg;
}

/// Dense H_N on sites 0..N-1 with off-diagonal -t(n) between n-1 and n.
inline Eigen::MatrixXd dense_hamiltonian(const polychain::JacobiWindow& w, std::int64_t N) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  for (std::int64_t n = 0; n < N; ++n) {
    H(n, n) = w.v(n);
    if (n > 0) H(n, n - 1) = H(n - 1, n) = -w.t(n);
  }
  return H;
}

inline std::vector<double> dense_eigenvalues(const polychain::JacobiWindow& w, std::int64_t N) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hamiltonian(w, N), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace oracle
