#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "polychain/mat2.hpp"
#include "polychain/model.hpp"

namespace polychain {

/// Product stored as exp(log_scale) * matrix with matrix entries kept near unit size.
template <class T>
struct ScaledProductT {
  Mat2T<T> matrix = Mat2T<T>::identity();
  double log_scale = 0.0;

  /// Pull a power of two out of the matrix when its largest entry leaves [2^-20, 2^20].
  void renormalize() {
    const double m = matrix.max_abs();
    if (m > 0x1.0p20 || (m < 0x1.0p-20 && m > 0.0)) {
      const int e = std::ilogb(m);
      matrix *= T(std::ldexp(1.0, -e));
      log_scale += e * M_LN2;
    }
  }
  /// Final normalization so that ‖matrix‖ lies in [1/2, 2].
  void normalize() {
    const double nrm = spectral_norm(matrix);
    if (nrm == 0.0 || (nrm >= 0.5 && nrm <= 2.0)) return;
    int e = 0;
    std::frexp(nrm, &e);
    matrix *= T(std::ldexp(1.0, -e));
    log_scale += e * M_LN2;
  }
  /// this <- m * this.
  void left_multiply(const Mat2T<T>& m) {
    matrix = m * matrix;
    renormalize();
  }
  double log_norm() const { return log_scale + std::log(spectral_norm(matrix)); }
  Mat2T<T> reconstruct() const { return T(std::exp(log_scale)) * matrix; }
  /// Inverse of a unimodular product: the adjugate, which has the same scale.
  ScaledProductT inverse() const {
    ScaledProductT r;
    r.matrix = matrix.adjugate();
    r.log_scale = log_scale;
    return r;
  }
};

using ScaledProduct = ScaledProductT<double>;
using CScaledProduct = ScaledProductT<cplx>;

template <class T>
ScaledProductT<T> operator*(const ScaledProductT<T>& x, const ScaledProductT<T>& y) {
  ScaledProductT<T> r;
  r.matrix = x.matrix * y.matrix;
  r.log_scale = x.log_scale + y.log_scale;
  r.normalize();
  return r;
}

/// T_{v-E,t} = (1/t) [[v-E, -t²], [1, 0]].
Mat2 site_matrix(double v, double t, double E);
CMat2 site_matrix(double v, double t, cplx z);

/// Ordered product T_{L-1} ⋯ T_0 over the polymer's sites.
Mat2 polymer_matrix(const Polymer& polymer, double E);
CMat2 polymer_matrix(const Polymer& polymer, cplx z);

/// Exact ∂_E of polymer_matrix by the product rule.
Mat2 polymer_matrix_derivative(const Polymer& polymer, double E);

/// Both polymer matrices at one energy, reused across products.
struct BlockPair {
  Mat2 plus;
  Mat2 minus;
  const Mat2& get(Sign s) const { return s == Sign::Plus ? plus : minus; }
};
BlockPair block_pair(const PolymerEnsemble& ensemble, double E);

/// T_ω^E(k, m) = T_{ω_{k-1}} ⋯ T_{ω_m}; inverse of T(m, k) when k < m.
ScaledProduct product(const Configuration& config, const PolymerEnsemble& ensemble, double E,
                      std::int64_t k, std::int64_t m);
ScaledProduct product(const Configuration& config, const BlockPair& blocks, std::int64_t k, std::int64_t m);

/// 𝒯^z(n, k) = ∏_{l=n-1}^{k} T_{v(l)-z, t(l)} over the window.
CScaledProduct operator_transfer(const JacobiWindow& window, cplx z, std::int64_t n, std::int64_t k);
ScaledProduct operator_transfer(const JacobiWindow& window, double E, std::int64_t n, std::int64_t k);

/// C / (1 - C D |ζ| m) when C D |ζ| m < 1, nothing otherwise.
std::optional<double> perturbation_bound(double C, double D, double zeta_abs, std::int64_t m);

/// Central finite difference step h = 1e-5·max(1, |E|).
inline double fd_step(double E) { return 1e-5 * std::max(1.0, std::abs(E)); }

}  // namespace polychain
