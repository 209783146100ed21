#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polychain/mat2.hpp"
#include "polychain/model.hpp"

namespace polychain {

/// G^z(n) = ⟨n|(H_R − z)⁻¹|0⟩ for the Dirichlet truncation to [−R, R].
struct GreenColumn {
  cplx z;
  std::int64_t radius = 0;
  std::vector<cplx> values;  ///< index n + radius
  cplx at(std::int64_t n) const { return values[static_cast<std::size_t>(n + radius)]; }
};

/// Riccati ratios from both truncation edges inward; window must cover [−R, R].
GreenColumn green_column(const JacobiWindow& window, cplx z, std::int64_t radius);

struct QuadratureSpec {
  double rel_tol = 1e-4;            ///< global adaptive Gauss-Kronrod tolerance
  std::int64_t max_panels = 4000000;
  std::int64_t fixed_radius = 0;    ///< > 0: one truncation for every energy
  std::int64_t start_radius = 64;   ///< adaptive: double from here ...
  double radius_tol = 1e-6;         ///< ... until sites beyond R/2 carry less than this fraction
  double panel_width = 8.0;        ///< initial core panel width in units of 1/T
  int threads = 1;
};

struct MomentResult {
  double T = 0.0;
  std::vector<double> q;
  std::vector<double> value;  ///< M_q(T) per q
  double quad_error = 0.0;    ///< estimated absolute error of value[0]
  std::int64_t evaluations = 0;
  std::int64_t max_radius = 0;
  std::int64_t capped = 0;    ///< energies whose radius hit the window edge unconverged
  std::int64_t work = 0;      ///< Σ truncation radii over all Green evaluations
};

/// Smallest adaptive radius cap (a power of two times start) covering 48·T·t_max.
std::int64_t green_radius_cap(double T, double t_max, std::int64_t start = 64);

/// M_q(T) = (η/π) ∫dE Σ_n |n|^q |G^{E+iη}(n)|², η = 1/(2T), which equals the
/// exponential time average of ⟨|X|^q⟩ at time scale T.
MomentResult moment_green(const JacobiWindow& window, const std::vector<double>& q, double T,
                          const QuadratureSpec& spec = {});
double moment_green(const JacobiWindow& window, double q, double T, const QuadratureSpec& spec = {});

/// Same moment from the eigen-decomposition of H on [−R, R]: Σ_jk A_jk ψ_j(0)ψ_k(0) w(E_j − E_k)
/// with w = 1/(1 + T²Δ²) (exponential) or sin(TΔ)/(TΔ) (Cesàro). FrontEscape when 2R+1 ≤ 4·T·t_max.
double moment_spectral_oracle(const JacobiWindow& window, double q, double T, std::int64_t radius,
                              bool cesaro = false);

enum class MomentMethod { GreenQuadrature, SpectralOracle };
const char* to_string(MomentMethod m);

struct MomentSeries {
  double q = 2.0;
  std::vector<double> T;
  std::vector<double> M;
  MomentMethod method = MomentMethod::GreenQuadrature;
};

struct DiffusionExponent {
  double beta = 0.0;        ///< global least-squares slope of log M vs log T^q
  double beta_minus = 0.0;  ///< smallest windowed slope
  double beta_plus = 0.0;   ///< largest windowed slope
  double C = 0.0;           ///< exp(intercept): M ≈ C T^{qβ}
};

/// Needs ≥ 5 points spanning ≥ 1.5 decades (InsufficientRange otherwise).
DiffusionExponent diffusion_exponent(const MomentSeries& series, std::size_t window = 5);

/// Exponential time average of ⟨X²⟩ for the free chain with unit hopping: 4T².
inline double free_chain_m2(double T) { return 4.0 * T * T; }

}  // namespace polychain
