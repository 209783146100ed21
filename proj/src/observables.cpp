#include "polychain/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "polychain/error.hpp"
#include "polychain/parallel.hpp"
#include "polychain/pruefer.hpp"
#include "polychain/transfer.hpp"

namespace polychain {

namespace {

/// Rescale (x, y) by a power of two when it drifts far from unit size.
inline void rescale(double& x, double& y, double& log_acc) {
  const double m = std::max(std::abs(x), std::abs(y));
  if (m > 1e150 || m < 1e-150) {
    const int e = std::ilogb(m);
    x = std::ldexp(x, -e);
    y = std::ldexp(y, -e);
    log_acc += e * M_LN2;
  }
}

/// θ-averaged log-norm increments over `chunks` consecutive stretches of the chain.
std::vector<double> vector_quadrature(const Configuration& cfg, const Mat2& xp, const Mat2& xm,
                                      std::int64_t n_polymers, int nodes, int chunks) {
  std::vector<double> x(static_cast<std::size_t>(nodes)), y(x.size()), lg(x.size(), 0.0);
  for (int j = 0; j < nodes; ++j) {
    const double th = M_PI * (j + 0.5) / nodes;
    x[static_cast<std::size_t>(j)] = std::cos(th);
    y[static_cast<std::size_t>(j)] = std::sin(th);
  }
  auto current = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += lg[j] + std::log(std::hypot(x[j], y[j]));
    return s / static_cast<double>(nodes);
  };
  std::vector<double> out;
  double prev = 0.0;
  std::int64_t k = 0;
  for (int c = 0; c < chunks; ++c) {
    const std::int64_t end = n_polymers * (c + 1) / chunks;
    for (; k < end; ++k) {
      const Mat2& m = cfg.sign(k) == Sign::Plus ? xp : xm;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double nx = m.a * x[j] + m.b * y[j];
        const double ny = m.c * x[j] + m.d * y[j];
        x[j] = nx;
        y[j] = ny;
        rescale(x[j], y[j], lg[j]);
      }
    }
    const double now = current();
    out.push_back(now - prev);
    prev = now;
  }
  return out;
}

}  // namespace

std::vector<double> lyapunov_samples(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers,
                                     std::size_t n_samples, std::uint64_t seed, const LyapunovOptions& options) {
  if (n_polymers < 1 || n_samples < 1) throw Error(ErrorCode::ValidationError, "lyapunov_mc needs polymers and samples");
  const BlockPair bp = block_pair(ensemble, E);
  const Mat2 inv = options.frame.inverse();
  const Mat2 xp = options.frame * bp.plus * inv;
  const Mat2 xm = options.frame * bp.minus * inv;
  std::vector<double> out(n_samples);
  parallel_for(
      n_samples,
      [&](std::size_t i) {
        const Configuration cfg(ensemble, 0, n_polymers - 1, seed, i, options.measure);
        if (options.method == LyapunovMethod::VectorQuadrature) {
          out[i] = vector_quadrature(cfg, xp, xm, n_polymers, options.nodes, 1)[0] / static_cast<double>(n_polymers);
        } else {
          ScaledProduct p;
          for (std::int64_t k = 0; k < n_polymers; ++k) p.left_multiply(cfg.sign(k) == Sign::Plus ? xp : xm);
          out[i] = p.log_norm() / static_cast<double>(n_polymers);
        }
      },
      options.threads);
  return out;
}

EstimateWithError lyapunov_mc(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers,
                              std::size_t n_samples, std::uint64_t seed, const LyapunovOptions& options) {
  const double L = ensemble.mean_length();
  EstimateWithError est;
  est.n_samples = n_samples;
  const char* method = options.method == LyapunovMethod::VectorQuadrature ? "vector_quadrature" : "matrix_norm";
  if (n_samples == 1 && options.method == LyapunovMethod::VectorQuadrature && n_polymers >= 64) {
    const BlockPair bp = block_pair(ensemble, E);
    const Mat2 inv = options.frame.inverse();
    const Configuration cfg(ensemble, 0, n_polymers - 1, seed, 0, options.measure);
    const int chunks = 32;
    const auto inc = vector_quadrature(cfg, options.frame * bp.plus * inv, options.frame * bp.minus * inv,
                                       n_polymers, options.nodes, chunks);
    std::vector<double> rates;
    for (int c = 0; c < chunks; ++c) {
      const double len = static_cast<double>(n_polymers * (c + 1) / chunks - n_polymers * c / chunks);
      rates.push_back(inc[static_cast<std::size_t>(c)] / len);
    }
    const auto m = stats::mean_error(rates);
    est.value = std::accumulate(inc.begin(), inc.end(), 0.0) / static_cast<double>(n_polymers) / L;
    est.std_error = m.std_error / L;
    est.meta = std::string(method) + ";batch_means=32";
    return est;
  }
  const auto xs = lyapunov_samples(ensemble, E, n_polymers, n_samples, seed, options);
  const auto m = stats::mean_error(xs);
  est.value = m.mean / L;
  est.std_error = m.std_error / L;
  est.meta = std::string(method) + ";nodes=" + std::to_string(options.nodes);
  return est;
}

double lyapunov_direction(const PolymerEnsemble& ensemble, double E, std::int64_t n_polymers, std::uint64_t seed,
                          std::uint64_t sample, double theta, const Mat2& frame) {
  const BlockPair bp = block_pair(ensemble, E);
  const Mat2 inv = frame.inverse();
  const Mat2 xp = frame * bp.plus * inv, xm = frame * bp.minus * inv;
  const Configuration cfg(ensemble, 0, n_polymers - 1, seed, sample, OriginMeasure::Polymer);
  double x = std::cos(theta), y = std::sin(theta), lg = 0.0;
  for (std::int64_t k = 0; k < n_polymers; ++k) {
    const Mat2& m = cfg.sign(k) == Sign::Plus ? xp : xm;
    const double nx = m.a * x + m.b * y, ny = m.c * x + m.d * y;
    x = nx;
    y = ny;
    rescale(x, y, lg);
  }
  return (lg + std::log(std::hypot(x, y))) / static_cast<double>(n_polymers);
}

LyapunovFormula lyapunov_formula(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps) {
  const AnomalyReport an = anomaly_check(frame, ensemble);
  if (an.any()) throw Error(ErrorCode::AnomalousAngles, "<e^{2i eta}> or <e^{4i eta}> equals 1");
  const Reflection r = reflection_coefficients(frame, ensemble, eps);
  const double ep = std::arg(r.a_plus), em = std::arg(r.a_minus);
  const cplx bp = r.b_plus, bm = r.b_minus;
  const double L = ensemble.mean_length();
  const double pp = ensemble.p_plus, pm = ensemble.p_minus();
  const cplx den = 1.0 - ensemble.average(std::polar(1.0, 2.0 * ep), std::polar(1.0, 2.0 * em));
  LyapunovFormula f;
  f.b_max = std::max(std::abs(bp), std::abs(bm));
  f.leading = 2.0 * pp * pm / L * std::norm(bp * std::sin(em) - bm * std::sin(ep)) / std::norm(den);
  const cplx x = ensemble.average(bp * std::polar(1.0, ep), bm * std::polar(1.0, em));
  const cplx y = ensemble.average(std::conj(bp) * std::polar(1.0, ep), std::conj(bm) * std::polar(1.0, em));
  f.intermediate = (0.5 * ensemble.average(std::norm(bp), std::norm(bm)) + (x * y / den).real()) / L;
  return f;
}

std::vector<std::vector<double>> ids_samples(const PolymerEnsemble& ensemble, const std::vector<double>& energies,
                                             std::int64_t N, std::size_t n_samples, std::uint64_t seed,
                                             int threads) {
  if (N < 1 || n_samples < 1) throw Error(ErrorCode::ValidationError, "ids_mc needs N >= 1 and samples >= 1");
  std::vector<std::vector<double>> out(energies.size(), std::vector<double>(n_samples));
  const std::int64_t kmax = polymers_needed(ensemble, 0, N);
  parallel_for(
      n_samples,
      [&](std::size_t i) {
        const Configuration cfg(ensemble, 0, kmax, seed, i, OriginMeasure::Site);
        const JacobiWindow w = assemble_window(cfg, ensemble, 0, N - 1);
        for (std::size_t e = 0; e < energies.size(); ++e)
          out[e][i] = free_phase_end(w, energies[e], 0.0, N) / (M_PI * static_cast<double>(N));
      },
      threads);
  return out;
}

EstimateWithError ids_mc(const PolymerEnsemble& ensemble, double E, std::int64_t N, std::size_t n_samples,
                         std::uint64_t seed, int threads) {
  const auto xs = ids_samples(ensemble, {E}, N, n_samples, seed, threads)[0];
  const auto m = stats::mean_error(xs);
  return {m.mean, m.std_error, n_samples, "pruefer_phase;N=" + std::to_string(N)};
}

EstimateWithError ids_slope_mc(const PolymerEnsemble& ensemble, double E, double eps, std::int64_t N,
                               std::size_t n_samples, std::uint64_t seed, int threads) {
  const auto xs = ids_samples(ensemble, {E - eps, E + eps}, N, n_samples, seed, threads);
  std::vector<double> d(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) d[i] = (xs[1][i] - xs[0][i]) / (2.0 * eps);
  const auto m = stats::mean_error(d);
  return {m.mean, m.std_error, n_samples, "central_difference;eps=" + std::to_string(eps)};
}

IdsFormula ids_formula(const CriticalFrame& frame, const FirstOrderData& first_order,
                       const PolymerEnsemble& ensemble, double eps) {
  const AnomalyReport an = anomaly_check(frame, ensemble);
  if (an.anomalous2) throw Error(ErrorCode::AnomalousAngles, "<e^{2i eta}> equals 1");
  const double scale = 1.0 / (M_PI * ensemble.mean_length());
  IdsFormula f;
  f.constant = scale * ensemble.average(frame.eta_lift_plus, frame.eta_lift_minus);
  f.slope = scale * ensemble.average(first_order.d_plus, first_order.d_minus);
  f.value = f.constant + eps * f.slope;
  return f;
}

std::vector<double> LevelAggregate::required_C() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.required_C);
  return out;
}

namespace {

std::int64_t robust_count(const JacobiWindow& w, double& E, std::int64_t N, double direction) {
  for (int attempt = 0;; ++attempt) {
    try {
      return count_eigenvalues_below(w, E, N);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate || attempt > 8) throw;
      E += direction * 1e-12 * (1.0 + std::abs(E));
    }
  }
}

}  // namespace

LevelReport level_sample(const PolymerEnsemble& ensemble, double E_c, std::int64_t N, double alpha,
                         std::uint64_t seed, std::uint64_t sample, double C) {
  const double half = std::pow(static_cast<double>(N), -0.5 - alpha);
  const Configuration cfg(ensemble, 0, polymers_needed(ensemble, 0, N), seed, sample, OriginMeasure::Site);
  const JacobiWindow w = assemble_window(cfg, ensemble, 0, N - 1);
  LevelReport r;
  r.window_lo = E_c - half;
  r.window_hi = E_c + half;
  double lo = r.window_lo, hi = r.window_hi;
  const std::int64_t c_lo = robust_count(w, lo, N, -1.0);
  const std::int64_t c_hi = robust_count(w, hi, N, 1.0);
  for (std::int64_t j = c_lo + 1; j <= c_hi; ++j) r.eigenvalues.push_back(eigenvalue_by_index(w, N, j, {lo, hi}));
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end());
  const double n = static_cast<double>(N);
  if (r.eigenvalues.size() < 2) {
    r.too_narrow = true;
    r.required_C = std::numeric_limits<double>::infinity();
    return r;
  }
  double smin = HUGE_VAL, smax = 0.0;
  double need = 0.0;
  for (std::size_t i = 1; i < r.eigenvalues.size(); ++i) {
    const double s = r.eigenvalues[i] - r.eigenvalues[i - 1];
    r.spacings.push_back(s);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
    need = std::max({need, n * s, 1.0 / (n * s)});
  }
  r.spacing_ratio = smax / smin;
  r.min_spread = HUGE_VAL;
  r.max_spread = 0.0;
  for (double E : r.eigenvalues) {
    const Eigenvector ev = eigenvector(w, E, N, 1e-4);
    double prev = 0.0;
    for (double x : ev.psi) {
      const double s = n * (prev * prev + x * x);
      r.min_spread = std::min(r.min_spread, s);
      r.max_spread = std::max(r.max_spread, s);
      prev = x;
    }
  }
  need = std::max({need, r.max_spread, 1.0 / r.min_spread});
  r.required_C = need;
  r.pass = need <= C;
  return r;
}

LevelAggregate level_statistics(const PolymerEnsemble& ensemble, const CriticalFrame& frame, std::int64_t N,
                                double alpha, std::size_t n_samples, std::uint64_t seed, double C, int threads) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::ValidationError, "alpha must be positive");
  LevelAggregate agg;
  agg.N = N;
  agg.alpha = alpha;
  agg.C = C;
  agg.samples.resize(n_samples);
  parallel_for(
      n_samples, [&](std::size_t i) { agg.samples[i] = level_sample(ensemble, frame.E_c, N, alpha, seed, i, C); },
      threads);
  std::size_t pass = 0, narrow = 0;
  for (const auto& s : agg.samples) {
    pass += s.pass ? 1 : 0;
    narrow += s.too_narrow ? 1 : 0;
  }
  if (narrow == n_samples)
    throw Error(ErrorCode::WindowTooNarrow, "no sample has two eigenvalues in the window; increase N or lower alpha");
  agg.pass_fraction = static_cast<double>(pass) / static_cast<double>(n_samples);
  return agg;
}

namespace {

struct HPoint {
  double x0, x1, x2, x3;
};

HPoint hyperboloid(const CMat2& p) {
  // Y = P*P = [[x0+x3, x1−i x2], [x1+i x2, x0−x3]], det Y = 1.
  const double y11 = std::norm(p.a) + std::norm(p.c);
  const double y22 = std::norm(p.b) + std::norm(p.d);
  const cplx y21 = std::conj(p.b) * p.a + std::conj(p.d) * p.c;
  return {0.5 * (y11 + y22), y21.real(), y21.imag(), 0.5 * (y11 - y22)};
}

inline double minkowski(const HPoint& a, const HPoint& b) {
  return a.x0 * b.x0 - a.x1 * b.x1 - a.x2 * b.x2 - a.x3 * b.x3;
}

/// ‖Q‖ from cosh d = B where ‖Q‖² = e^d.
inline double norm_from_cosh(double B) {
  B = std::max(1.0, B);
  return std::sqrt(B + std::sqrt((B - 1.0) * (B + 1.0)));
}

}  // namespace

double sup_pair_norm_bruteforce(const std::vector<CMat2>& products) {
  double best = 1.0;
  for (std::size_t k = 0; k < products.size(); ++k)
    for (std::size_t m = 0; m <= k; ++m) {
      const CMat2 inv{products[m].d, -products[m].b, -products[m].c, products[m].a};
      best = std::max(best, spectral_norm(products[k] * inv));
    }
  return best;
}

double sup_pair_norm(const std::vector<CMat2>& products) {
  const std::size_t n = products.size();
  if (n < 2) return 1.0;
  std::vector<HPoint> pts(n);
  HPoint c{0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = hyperboloid(products[i]);
    c.x0 += pts[i].x0;
    c.x1 += pts[i].x1;
    c.x2 += pts[i].x2;
    c.x3 += pts[i].x3;
  }
  const double q = std::sqrt(minkowski(c, c));
  c = {c.x0 / q, c.x1 / q, c.x2 / q, c.x3 / q};
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::acosh(std::max(1.0, minkowski(c, pts[i])));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });
  double best_B = 1.0, best_d = 0.0;
  for (std::size_t ii = 0; ii < n; ++ii) {
    const std::size_t i = order[ii];
    if (ii + 1 < n && r[i] + r[order[ii + 1]] <= best_d) break;
    for (std::size_t jj = ii + 1; jj < n; ++jj) {
      const std::size_t j = order[jj];
      if (r[i] + r[j] <= best_d) break;
      const double B = minkowski(pts[i], pts[j]);
      if (B > best_B) {
        best_B = B;
        best_d = std::acosh(B);
      }
    }
  }
  return norm_from_cosh(best_B);
}

BoundednessTail transfer_boundedness_tail(const PolymerEnsemble& ensemble, const CriticalFrame& frame,
                                          std::int64_t N, double alpha, std::size_t n_samples, std::uint64_t seed,
                                          const BoundednessOptions& options) {
  const AnomalyReport an = anomaly_check(frame, ensemble);
  if (!(std::abs(an.mean_e2) < 1.0 - 1e-12))
    throw Error(ErrorCode::AnomalousAngles, "|<e^{2i eta}>| = " + std::to_string(std::abs(an.mean_e2)));
  if (N < 1 || n_samples < 1) throw Error(ErrorCode::ValidationError, "boundedness tail needs N >= 1 and samples");
  BoundednessTail out;
  out.delta = options.delta >= 0.0 ? options.delta : std::pow(static_cast<double>(N), -alpha - 0.5);
  const bool sites = options.level == BoundednessLevel::Sites;
  out.kappa = options.kappa >= 0.0 ? options.kappa : (sites ? 1.0 / static_cast<double>(N) : 0.0);
  out.threshold = options.threshold;
  out.sup_norms.resize(n_samples);
  const cplx z(frame.E_c + out.delta, out.kappa);
  const BlockPair bp = block_pair(ensemble, frame.E_c + out.delta);
  parallel_for(
      n_samples,
      [&](std::size_t i) {
        std::vector<CMat2> ps;
        ps.reserve(static_cast<std::size_t>(N + 1));
        CMat2 p = CMat2::identity();
        ps.push_back(p);
        if (sites) {
          const Configuration cfg(ensemble, 0, polymers_needed(ensemble, 0, N), seed, i, OriginMeasure::Site);
          const JacobiWindow w = assemble_window(cfg, ensemble, 0, N - 1);
          for (std::int64_t n = 0; n < N; ++n) {
            p = site_matrix(w.v(n), w.t(n), z) * p;
            ps.push_back(p);
          }
        } else {
          const Configuration cfg(ensemble, 0, N - 1, seed, i, OriginMeasure::Polymer);
          const CMat2 tp = to_complex(bp.plus), tm = to_complex(bp.minus);
          for (std::int64_t k = 0; k < N; ++k) {
            p = (cfg.sign(k) == Sign::Plus ? tp : tm) * p;
            ps.push_back(p);
          }
        }
        out.sup_norms[i] = sup_pair_norm(ps);
      },
      options.threads);
  out.quantile99 = stats::quantile(out.sup_norms, 0.99);
  if (out.threshold > 0.0) {
    std::size_t above = 0;
    for (double s : out.sup_norms) above += s > out.threshold ? 1 : 0;
    out.tail_fraction = static_cast<double>(above) / static_cast<double>(n_samples);
  }
  return out;
}

}  // namespace polychain
