#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polychain/critical.hpp"
#include "polychain/model.hpp"
#include "polychain/stats.hpp"

namespace polychain {

struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::string meta;
};

enum class LyapunovMethod {
  VectorQuadrature,  ///< average of log‖X e_θ‖ over equispaced θ nodes
  MatrixNorm,        ///< log of the product's operator norm
};

struct LyapunovOptions {
  Mat2 frame = Mat2::identity();  ///< products are taken as frame·T·frame⁻¹
  int nodes = 64;
  LyapunovMethod method = LyapunovMethod::VectorQuadrature;
  int threads = 0;
  OriginMeasure measure = OriginMeasure::Polymer;
};

/// γ(E) = γ₀(E)/⟨L⟩ from n_samples products of n_polymers blocks. With one
/// sample the error comes from 32 batch means along the chain.
EstimateWithError lyapunov_mc(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers,
                              std::size_t n_samples, std::uint64_t seed, const LyapunovOptions& options = {});

/// Per-sample log-norm growth per polymer, same estimator as lyapunov_mc (γ₀ units).
std::vector<double> lyapunov_samples(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers,
                                     std::size_t n_samples, std::uint64_t seed, const LyapunovOptions& options = {});

/// log‖T_ω^E(k,0) e_θ‖/k for one fixed direction θ (atoms in the θ measure).
double lyapunov_direction(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers,
                          std::uint64_t seed, std::uint64_t sample, double theta, const Mat2& frame = Mat2::identity());

struct LyapunovFormula {
  double leading = 0.0;       ///< 2p₊p₋/⟨L⟩ · |b₊ sin η₋ − b₋ sin η₊|² / |1 − ⟨e^{2iη}⟩|²
  double intermediate = 0.0;  ///< [½⟨|b|²⟩ + Re(⟨b e^{iη}⟩⟨b̄ e^{iη}⟩/(1 − ⟨e^{2iη}⟩))]/⟨L⟩
  double b_max = 0.0;
};

LyapunovFormula lyapunov_formula(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps);

/// 𝒩(E) from θ(N)/(πN) of the free Prüfer phase over sites 0..N−1, averaged over configurations.
EstimateWithError ids_mc(const PolymerEnsemble& ensemble, double E, std::int64_t N, std::size_t n_samples,
                         std::uint64_t seed, int threads = 0);

/// Per-sample θ(N)/(πN) at several energies on the same configurations.
std::vector<std::vector<double>> ids_samples(const PolymerEnsemble& ensemble, const std::vector<double>& energies,
                                             std::int64_t N, std::size_t n_samples, std::uint64_t seed,
                                             int threads = 0);

/// (𝒩(E+ε) − 𝒩(E−ε))/2ε with common configurations.
EstimateWithError ids_slope_mc(const PolymerEnsemble& ensemble, double E, double eps, std::int64_t N,
                               std::size_t n_samples, std::uint64_t seed, int threads = 0);

struct IdsFormula {
  double constant = 0.0;  ///< ⟨η⟩/(π⟨L⟩), η the lifted block rotation
  double slope = 0.0;     ///< ⟨d⟩/(π⟨L⟩)
  double value = 0.0;     ///< constant + ε·slope
};

IdsFormula ids_formula(const CriticalFrame& frame, const FirstOrderData& first_order,
                       const PolymerEnsemble& ensemble, double eps);

struct LevelReport {
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> spacings;
  double spacing_ratio = 0.0;  ///< max/min spacing
  double min_spread = 0.0;     ///< N·min_k(|ψ(k−1)|² + |ψ(k)|²) over eigenfunctions
  double max_spread = 0.0;
  double required_C = 0.0;     ///< smallest C for which both bounds hold
  bool too_narrow = false;
  bool pass = false;
};

struct LevelAggregate {
  std::int64_t N = 0;
  double alpha = 0.0;
  double C = 0.0;
  std::vector<LevelReport> samples;
  double pass_fraction = 0.0;
  std::vector<double> required_C() const;
};

/// Levels of H_{ω,N} in [E_c − N^{−1/2−α}, E_c + N^{−1/2−α}] by edge counts and indexed bisection.
LevelReport level_sample(const PolymerEnsemble& ensemble, double E_c, std::int64_t N, double alpha,
                         std::uint64_t seed, std::uint64_t sample, double C);

LevelAggregate level_statistics(const PolymerEnsemble& ensemble, const CriticalFrame& frame, std::int64_t N,
                                double alpha, std::size_t n_samples, std::uint64_t seed, double C = 50.0,
                                int threads = 0);

/// sup over pairs of ‖P_k P_m⁻¹‖ for unimodular P, from hyperbolic diameters.
double sup_pair_norm(const std::vector<CMat2>& products);
double sup_pair_norm_bruteforce(const std::vector<CMat2>& products);

struct BoundednessTail {
  std::vector<double> sup_norms;
  double quantile99 = 0.0;
  double threshold = 0.0;
  double tail_fraction = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
};

enum class BoundednessLevel {
  Sites,     ///< 𝒯^{E_c+δ+iκ}(k, m) over sites 0..N of (ω, l)
  Polymers,  ///< T^{E_c+δ}_ω(k, m) over polymers 0..N
};

struct BoundednessOptions {
  BoundednessLevel level = BoundednessLevel::Sites;
  double delta = -1.0;  ///< default N^{−α−1/2}
  double kappa = -1.0;  ///< default 1/N for sites, 0 for polymers
  double threshold = 0.0;
  int threads = 0;
};

BoundednessTail transfer_boundedness_tail(const PolymerEnsemble& ensemble, const CriticalFrame& frame,
                                          std::int64_t N, double alpha, std::size_t n_samples, std::uint64_t seed,
                                          const BoundednessOptions& options = {});

}  // namespace polychain
