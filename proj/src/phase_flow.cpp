#include "polychain/phase_flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polychain/error.hpp"
#include "polychain/parallel.hpp"
#include "polychain/rng.hpp"
#include "polychain/transfer.hpp"

namespace polychain {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const cplx kI(0.0, 1.0);

/// z ↦ (a z + b̄ z̄)/|·| on unit complex numbers z = e^{iS}; returns |·| = ρ.
inline double advance(cplx& z, const cplx& a, const cplx& bbar) {
  const cplx w = a * z + bbar * std::conj(z);
  const double r = std::abs(w);
  z = w / r;
  return r;
}

struct FastBlocks {
  cplx a[2];
  cplx bbar[2];
  cplx c[2];
  static int idx(Sign s) { return s == Sign::Plus ? 0 : 1; }
};

FastBlocks fast_blocks(const PhaseShiftMap& map, cplx c_plus, cplx c_minus) {
  FastBlocks f;
  f.a[0] = map.a(Sign::Plus);
  f.a[1] = map.a(Sign::Minus);
  f.bbar[0] = std::conj(map.b(Sign::Plus));
  f.bbar[1] = std::conj(map.b(Sign::Minus));
  f.c[0] = c_plus;
  f.c[1] = c_minus;
  return f;
}

}  // namespace

PhaseShiftMap make_phase_shift_map(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps,
                                   double guard) {
  PhaseShiftMap m;
  m.frame = frame;
  m.eps = eps;
  m.reflection = reflection_coefficients(frame, ensemble, eps);
  const double bmax = std::max(std::abs(m.reflection.b_plus), std::abs(m.reflection.b_minus));
  if (bmax >= guard)
    throw Error(ErrorCode::SmallDetuningGuard,
                "|b| = " + std::to_string(bmax) + " at eps = " + std::to_string(eps) + " exceeds guard " +
                    std::to_string(guard));
  const BlockPair bp = block_pair(ensemble, frame.E_c + eps);
  m.X_plus = frame.conjugate(bp.plus);
  m.X_minus = frame.conjugate(bp.minus);
  m.eta_eps_plus = m.reflection.eta_eps(Sign::Plus, frame);
  m.eta_eps_minus = m.reflection.eta_eps(Sign::Minus, frame);
  return m;
}

PhaseShift phase_shift(const PhaseShiftMap& map, Sign s, double theta) {
  const Vec2 w = map.X(s) * unit(theta);
  const double ref = theta + map.eta_eps(s);
  PhaseShift r;
  r.rho = norm(w);
  r.S = ref + std::remainder(std::atan2(w[1], w[0]) - ref, kTwoPi);
  return r;
}

ExpansionResiduals expansion_residuals(const PhaseShiftMap& map, Sign s, double theta) {
  const PhaseShift ps = phase_shift(map, s, theta);
  const cplx a = map.a(s), b = map.b(s);
  const cplx e2 = std::polar(1.0, 2.0 * theta);
  const cplx ab = a * b;
  const double log_pred = 2.0 * (ab * e2).real() + std::norm(b) - (ab * ab * e2 * e2).real();
  const double eta = map.eta_eps(s);
  const cplx shift_pred = std::polar(1.0, 2.0 * eta) + std::conj(b) * std::polar(1.0, eta) / e2 -
                          b * std::polar(1.0, 3.0 * eta) * e2;
  ExpansionResiduals r;
  r.r_log = std::abs(std::log(ps.rho * ps.rho) - log_pred);
  r.r_shift = std::abs(std::polar(1.0, 2.0 * (ps.S - theta)) - shift_pred);
  return r;
}

PhaseOrbit iterate_shifts(const PhaseShiftMap& map, const Configuration& config, double theta0, std::int64_t N) {
  PhaseOrbit o;
  o.S.reserve(static_cast<std::size_t>(N + 1));
  o.log_rho.reserve(static_cast<std::size_t>(N + 1));
  double S = theta0, acc = 0.0;
  o.S.push_back(S);
  o.log_rho.push_back(0.0);
  for (std::int64_t l = 0; l < N; ++l) {
    const PhaseShift ps = phase_shift(map, config.sign(l), S);
    S = ps.S;
    acc += std::log(ps.rho);
    o.S.push_back(S);
    o.log_rho.push_back(acc);
  }
  return o;
}

double WeylSumTrajectory::max_abs() const {
  double m = 0.0;
  for (const auto& x : partial_sums) m = std::max(m, std::abs(x));
  return m;
}

WeylSumTrajectory weyl_sum(const PhaseShiftMap& map, const Configuration& config, double theta, int j,
                           std::int64_t N, cplx c_plus, cplx c_minus) {
  WeylSumTrajectory w;
  w.j = j;
  w.theta0 = theta;
  w.eps = map.eps;
  w.c_plus = c_plus;
  w.c_minus = c_minus;
  w.partial_sums.reserve(static_cast<std::size_t>(N + 1));
  const FastBlocks fb = fast_blocks(map, c_plus, c_minus);
  cplx z = std::polar(1.0, theta);
  cplx sum = 0.0;
  w.partial_sums.push_back(sum);
  for (std::int64_t l = 0; l < N; ++l) {
    const int s = FastBlocks::idx(config.sign(l));
    cplx zz = z * z;
    if (j == 2) zz *= zz;
    sum += fb.c[s] * zz;
    w.partial_sums.push_back(sum);
    advance(z, fb.a[s], fb.bbar[s]);
  }
  return w;
}

cplx weyl_drift_formula(const PhaseShiftMap& map, const PolymerEnsemble& ensemble, std::int64_t N, cplx c_plus,
                        cplx c_minus) {
  const cplx mean_c = ensemble.average(c_plus, c_minus);
  const cplx num = ensemble.average(std::conj(map.b(Sign::Plus)) * std::polar(1.0, map.eta_eps_plus),
                                    std::conj(map.b(Sign::Minus)) * std::polar(1.0, map.eta_eps_minus));
  const cplx den = 1.0 - ensemble.average(std::polar(1.0, 2.0 * map.eta_eps_plus),
                                          std::polar(1.0, 2.0 * map.eta_eps_minus));
  return static_cast<double>(N) * mean_c * num / den;
}

WeylExpectation weyl_sum_expectation(const PhaseShiftMap& map, const PolymerEnsemble& ensemble, double theta,
                                     int j, std::int64_t N, cplx c_plus, cplx c_minus, std::size_t samples,
                                     std::uint64_t seed, int threads) {
  std::vector<cplx> finals(samples);
  parallel_for(
      samples,
      [&](std::size_t i) {
        const Configuration cfg(ensemble, 0, std::max<std::int64_t>(N - 1, 0), seed, i, OriginMeasure::Polymer);
        finals[i] = weyl_sum(map, cfg, theta, j, N, c_plus, c_minus).partial_sums.back();
      },
      threads);
  std::vector<double> re, im;
  for (const auto& x : finals) {
    re.push_back(x.real());
    im.push_back(x.imag());
  }
  const auto mr = stats::mean_error(re), mi = stats::mean_error(im);
  WeylExpectation e;
  e.mean = {mr.mean, mi.mean};
  e.std_error = std::hypot(mr.std_error, mi.std_error);
  e.formula = j == 1 ? weyl_drift_formula(map, ensemble, N, c_plus, c_minus) : cplx(0.0);
  e.samples = samples;
  return e;
}

TailEstimate deviation_tail(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double alpha,
                            std::int64_t N, std::size_t samples, std::uint64_t seed, double delta,
                            std::vector<double> thetas, int threads) {
  const AnomalyReport an = anomaly_check(frame, ensemble);
  if (!(std::abs(an.mean_e2) < 1.0 - 1e-12))
    throw Error(ErrorCode::AnomalousAngles, "|<e^{2i eta}>| = " + std::to_string(std::abs(an.mean_e2)));
  if (N < 1 || samples == 0) throw Error(ErrorCode::ValidationError, "deviation_tail needs N >= 1 and samples > 0");
  TailEstimate t;
  t.delta = delta > 0.0 ? delta : 1.0 / std::sqrt(static_cast<double>(N));
  t.threshold = std::pow(static_cast<double>(N), alpha + 0.5);
  t.samples = samples;
  const PhaseShiftMap map = make_phase_shift_map(frame, ensemble, t.delta);
  const FirstOrderData fo = first_order_data(frame, ensemble);
  const FastBlocks fb = fast_blocks(map, fo.c_plus, fo.c_minus);
  t.max_abs.assign(samples, 0.0);
  const double p_plus = ensemble.p_plus;
  parallel_for(
      samples,
      [&](std::size_t i) {
        const std::uint64_t key = rng::stream_key(seed, i);
        std::vector<int> sgn(static_cast<std::size_t>(N));
        for (std::int64_t l = 0; l < N; ++l) sgn[static_cast<std::size_t>(l)] = rng::uniform(key, l) < p_plus ? 0 : 1;
        double best = 0.0;
        for (double th : thetas) {
          cplx z = std::polar(1.0, th);
          cplx sum = 0.0;
          double m2 = 0.0;
          for (std::int64_t l = 0; l < N; ++l) {
            const int s = sgn[static_cast<std::size_t>(l)];
            sum += fb.c[s] * (z * z);
            m2 = std::max(m2, std::norm(sum));
            advance(z, fb.a[s], fb.bbar[s]);
          }
          best = std::max(best, std::sqrt(m2));
        }
        t.max_abs[i] = best;
      },
      threads);
  for (double m : t.max_abs)
    if (m >= t.threshold) ++t.hits;
  t.fraction = static_cast<double>(t.hits) / static_cast<double>(samples);
  t.wilson = stats::wilson(t.hits, samples);
  return t;
}

InvariantMoments invariant_moments(const PhaseShiftMap& map, const PolymerEnsemble& ensemble, std::int64_t burn_in,
                                   std::int64_t samples, std::uint64_t seed) {
  const FastBlocks fb = fast_blocks(map, 0.0, 0.0);
  rng::Stream stream(seed, 0);
  cplx z = 1.0;
  for (std::int64_t l = 0; l < burn_in; ++l) {
    const int s = stream.uniform() < ensemble.p_plus ? 0 : 1;
    advance(z, fb.a[s], fb.bbar[s]);
  }
  std::vector<double> r2, i2, r4, i4;
  r2.reserve(static_cast<std::size_t>(samples));
  i2.reserve(static_cast<std::size_t>(samples));
  r4.reserve(static_cast<std::size_t>(samples));
  i4.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t l = 0; l < samples; ++l) {
    const cplx z2 = z * z, z4 = z2 * z2;
    r2.push_back(z2.real());
    i2.push_back(z2.imag());
    r4.push_back(z4.real());
    i4.push_back(z4.imag());
    const int s = stream.uniform() < ensemble.p_plus ? 0 : 1;
    advance(z, fb.a[s], fb.bbar[s]);
  }
  const auto a = stats::batch_means(r2), b = stats::batch_means(i2);
  const auto c = stats::batch_means(r4), d = stats::batch_means(i4);
  InvariantMoments m;
  m.m2 = {a.mean, b.mean};
  m.m4 = {c.mean, d.mean};
  m.m2_std_error = std::hypot(a.std_error, b.std_error);
  m.m4_std_error = std::hypot(c.std_error, d.std_error);
  const cplx num = ensemble.average(std::conj(map.b(Sign::Plus)) * std::polar(1.0, map.eta_eps_plus),
                                    std::conj(map.b(Sign::Minus)) * std::polar(1.0, map.eta_eps_minus));
  const cplx den = 1.0 - ensemble.average(std::polar(1.0, 2.0 * map.eta_eps_plus),
                                          std::polar(1.0, 2.0 * map.eta_eps_minus));
  m.m2_formula = num / den;
  return m;
}

stats::MeanError random_phase_lyapunov(const PhaseShiftMap& map, const PolymerEnsemble& ensemble,
                                       std::size_t samples, std::uint64_t seed) {
  rng::Stream stream(seed, 0);
  std::vector<double> xs;
  xs.reserve(samples);
  const double scale = 0.5 / ensemble.mean_length();
  for (std::size_t i = 0; i < samples; ++i) {
    const Sign s = stream.uniform() < ensemble.p_plus ? Sign::Plus : Sign::Minus;
    const double theta = M_PI * stream.uniform();
    const double rho = norm(map.X(s) * unit(theta));
    xs.push_back(scale * std::log(rho * rho));
  }
  return stats::mean_error(xs);
}

double random_phase_lyapunov_exact(const PhaseShiftMap& map, const PolymerEnsemble& ensemble) {
  const double v = ensemble.average(std::log1p(std::norm(map.b(Sign::Plus))),
                                    std::log1p(std::norm(map.b(Sign::Minus))));
  return v / (2.0 * ensemble.mean_length());
}

}  // namespace polychain
