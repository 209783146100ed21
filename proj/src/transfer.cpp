#include "polychain/transfer.hpp"

#include <string>

#include "polychain/error.hpp"

namespace polychain {

Mat2 site_matrix(double v, double t, double E) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveHopping, "t = " + std::to_string(t));
  const double inv = 1.0 / t;
  return {(v - E) * inv, -t, inv, 0.0};
}

CMat2 site_matrix(double v, double t, cplx z) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveHopping, "t = " + std::to_string(t));
  const double inv = 1.0 / t;
  return {(v - z) * inv, cplx(-t), cplx(inv), cplx(0.0)};
}

Mat2 polymer_matrix(const Polymer& polymer, double E) {
  Mat2 m = Mat2::identity();
  for (std::size_t l = 0; l < polymer.length(); ++l)
    m = site_matrix(polymer.potential[l], polymer.hopping[l], E) * m;
  return m;
}

CMat2 polymer_matrix(const Polymer& polymer, cplx z) {
  CMat2 m = CMat2::identity();
  for (std::size_t l = 0; l < polymer.length(); ++l)
    m = site_matrix(polymer.potential[l], polymer.hopping[l], z) * m;
  return m;
}

Mat2 polymer_matrix_derivative(const Polymer& polymer, double E) {
  // Forward recursion on (P, P'): P_{l+1} = T_l P_l, P'_{l+1} = T_l' P_l + T_l P_l'.
  Mat2 p = Mat2::identity();
  Mat2 dp = Mat2::zero();
  for (std::size_t l = 0; l < polymer.length(); ++l) {
    const double t = polymer.hopping[l];
    const Mat2 tl = site_matrix(polymer.potential[l], t, E);
    const Mat2 dtl{-1.0 / t, 0.0, 0.0, 0.0};
    dp = dtl * p + tl * dp;
    p = tl * p;
  }
  return dp;
}

BlockPair block_pair(const PolymerEnsemble& ensemble, double E) {
  return {polymer_matrix(ensemble.plus, E), polymer_matrix(ensemble.minus, E)};
}

ScaledProduct product(const Configuration& config, const BlockPair& blocks, std::int64_t k, std::int64_t m) {
  if (k < m) return product(config, blocks, m, k).inverse();
  ScaledProduct r;
  for (std::int64_t j = m; j < k; ++j) r.left_multiply(blocks.get(config.sign(j)));
  r.normalize();
  return r;
}

ScaledProduct product(const Configuration& config, const PolymerEnsemble& ensemble, double E,
                      std::int64_t k, std::int64_t m) {
  return product(config, block_pair(ensemble, E), k, m);
}

namespace {

template <class Z, class M>
ScaledProductT<M> window_transfer(const JacobiWindow& window, Z z, std::int64_t n, std::int64_t k) {
  if (n < k) return window_transfer<Z, M>(window, z, k, n).inverse();
  if (n > k && !window.covers(k, n - 1))
    throw Error(ErrorCode::InsufficientWindow, "window [" + std::to_string(window.n_min) + ", " +
                                                   std::to_string(window.n_max) + "] does not cover [" +
                                                   std::to_string(k) + ", " + std::to_string(n) + ")");
  ScaledProductT<M> r;
  for (std::int64_t l = k; l < n; ++l) r.left_multiply(site_matrix(window.v(l), window.t(l), z));
  r.normalize();
  return r;
}

}  // namespace

CScaledProduct operator_transfer(const JacobiWindow& window, cplx z, std::int64_t n, std::int64_t k) {
  return window_transfer<cplx, cplx>(window, z, n, k);
}

ScaledProduct operator_transfer(const JacobiWindow& window, double E, std::int64_t n, std::int64_t k) {
  return window_transfer<double, double>(window, E, n, k);
}

std::optional<double> perturbation_bound(double C, double D, double zeta_abs, std::int64_t m) {
  const double x = C * D * zeta_abs * static_cast<double>(m);
  if (x >= 1.0) return std::nullopt;
  return C / (1.0 - x);
}

}  // namespace polychain
