#pragma once

#include <cstdint>
#include <vector>

#include "polychain/critical.hpp"
#include "polychain/model.hpp"
#include "polychain/stats.hpp"

namespace polychain {

/// Phase dynamics of the two conjugated polymer matrices at E_c + ε.
struct PhaseShiftMap {
  CriticalFrame frame;
  Reflection reflection;
  double eps = 0.0;
  Mat2 X_plus;  ///< M T₊^{E_c+ε} M⁻¹
  Mat2 X_minus;
  double eta_eps_plus = 0.0;  ///< lifted η^ε
  double eta_eps_minus = 0.0;

  const Mat2& X(Sign s) const { return s == Sign::Plus ? X_plus : X_minus; }
  double eta_eps(Sign s) const { return s == Sign::Plus ? eta_eps_plus : eta_eps_minus; }
  cplx a(Sign s) const { return reflection.a(s); }
  cplx b(Sign s) const { return reflection.b(s); }
};

/// Refuses (SmallDetuningGuard) when max|b±| reaches `guard`.
PhaseShiftMap make_phase_shift_map(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps,
                                   double guard = 0.3);

struct PhaseShift {
  double S = 0.0;
  double rho = 0.0;
};

/// ρ e_S = X e_θ with S − θ on the branch nearest the lifted η^ε.
PhaseShift phase_shift(const PhaseShiftMap& map, Sign s, double theta);

struct ExpansionResiduals {
  double r_log = 0.0;    ///< |log ρ² − (2Re(ab e^{2iθ}) + |b|² − Re((ab)² e^{4iθ}))|
  double r_shift = 0.0;  ///< |e^{2i(S−θ)} − (e^{2iη} + b̄ e^{iη} e^{−2iθ} − b e^{3iη} e^{2iθ})|
};

ExpansionResiduals expansion_residuals(const PhaseShiftMap& map, Sign s, double theta);

struct PhaseOrbit {
  std::vector<double> S;        ///< S^l, l = 0..N
  std::vector<double> log_rho;  ///< Σ_{m<l} log ρ_{ω_m}(S^m), l = 0..N
};

/// S^{l+1} = S_{ω_l}(S^l) over polymers 0..N−1 of the configuration.
PhaseOrbit iterate_shifts(const PhaseShiftMap& map, const Configuration& config, double theta0, std::int64_t N);

struct WeylSumTrajectory {
  int j = 1;
  double theta0 = 0.0;
  double eps = 0.0;
  cplx c_plus, c_minus;
  std::vector<cplx> partial_sums;  ///< I_k, k = 0..N
  double max_abs() const;
};

WeylSumTrajectory weyl_sum(const PhaseShiftMap& map, const Configuration& config, double theta, int j,
                           std::int64_t N, cplx c_plus, cplx c_minus);

/// N⟨c⟩⟨b̄ e^{iη}⟩ / (1 − ⟨e^{2iη}⟩), the leading drift of E(I¹_N).
cplx weyl_drift_formula(const PhaseShiftMap& map, const PolymerEnsemble& ensemble, std::int64_t N, cplx c_plus,
                        cplx c_minus);

struct WeylExpectation {
  cplx mean;
  double std_error = 0.0;  ///< of the complex mean (root of summed component variances)
  cplx formula;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of E₀(I^j_N) over configurations.
WeylExpectation weyl_sum_expectation(const PhaseShiftMap& map, const PolymerEnsemble& ensemble, double theta,
                                     int j, std::int64_t N, cplx c_plus, cplx c_minus, std::size_t samples,
                                     std::uint64_t seed, int threads = 0);

struct TailEstimate {
  double fraction = 0.0;
  stats::Interval wilson;
  std::size_t hits = 0;
  std::size_t samples = 0;
  double threshold = 0.0;
  double delta = 0.0;
  std::vector<double> max_abs;  ///< per sample max over θ and k ≤ N of |I¹_k|
};

/// Fraction of configurations with max_{k≤N} |I¹_k(θ, δ)| ≥ N^{α+1/2} for some θ in `thetas`.
/// δ defaults to N^{−1/2}. AnomalousAngles unless |⟨e^{2iη}⟩| < 1.
TailEstimate deviation_tail(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double alpha,
                            std::int64_t N, std::size_t samples, std::uint64_t seed, double delta = -1.0,
                            std::vector<double> thetas = {0.0, 1.5707963267948966}, int threads = 0);

struct InvariantMoments {
  cplx m2;  ///< ∫ e^{2iθ} dν
  cplx m4;  ///< ∫ e^{4iθ} dν
  double m2_std_error = 0.0;
  double m4_std_error = 0.0;
  cplx m2_formula;  ///< ⟨b̄ e^{iη}⟩ / (1 − ⟨e^{2iη}⟩)
};

InvariantMoments invariant_moments(const PhaseShiftMap& map, const PolymerEnsemble& ensemble,
                                   std::int64_t burn_in = 1000, std::int64_t samples = 1000000,
                                   std::uint64_t seed = 1);

/// γ under independent uniform phases: ⟨log ρ²⟩ averaged over θ, divided by 2⟨L⟩.
stats::MeanError random_phase_lyapunov(const PhaseShiftMap& map, const PolymerEnsemble& ensemble,
                                       std::size_t samples, std::uint64_t seed);

/// Closed form of the random-phase value: ⟨log(1 + |b|²)⟩ / (2⟨L⟩).
double random_phase_lyapunov_exact(const PhaseShiftMap& map, const PolymerEnsemble& ensemble);

}  // namespace polychain
