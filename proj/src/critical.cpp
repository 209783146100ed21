#include "polychain/critical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "polychain/error.hpp"
#include "polychain/pruefer.hpp"
#include "polychain/stats.hpp"
#include "polychain/transfer.hpp"

namespace polychain {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kIdentityTol = 1e-9;
constexpr double kTraceMargin = 1e-9;

double principal(double x) {
  // (-π, π]
  double r = std::remainder(x, kTwoPi);
  if (r <= -M_PI) r += kTwoPi;
  return r;
}

Mat2 frame_from_elliptic(const Mat2& t, double& eta) {
  const double cphi = 0.5 * t.trace();
  const double sphi = std::sqrt(std::max(0.0, 1.0 - cphi * cphi));
  const cplx lam(cphi, sphi);
  // Two candidate eigenvectors; take the better conditioned one.
  const CVec2 u1{cplx(t.b), lam - t.a};
  const CVec2 u2{lam - t.d, cplx(t.c)};
  const CVec2 u = norm(u1) >= norm(u2) ? u1 : u2;
  const double x0 = u[0].real(), x1 = u[1].real(), y0 = u[0].imag(), y1 = u[1].imag();
  Mat2 cols{x0, y0, x1, y1};
  if (cols.det() > 0.0) {
    eta = -std::atan2(sphi, cphi);
  } else {
    cols = Mat2{x0, -y0, x1, -y1};
    eta = std::atan2(sphi, cphi);
  }
  Mat2 m = cols.inverse();
  m *= 1.0 / std::sqrt(m.det());
  return m;
}

double identity_angle(BlockKind kind) { return kind == BlockKind::PlusIdentity ? 0.0 : M_PI; }

}  // namespace

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Elliptic: return "elliptic";
    case BlockKind::PlusIdentity: return "plus_identity";
    case BlockKind::MinusIdentity: return "minus_identity";
    case BlockKind::Hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

BlockKind classify_block(const Mat2& t) {
  if (spectral_norm(t - Mat2::identity()) < kIdentityTol) return BlockKind::PlusIdentity;
  if (spectral_norm(t + Mat2::identity()) < kIdentityTol) return BlockKind::MinusIdentity;
  if (std::abs(t.trace()) < 2.0 - kTraceMargin) return BlockKind::Elliptic;
  return BlockKind::Hyperbolic;
}

DefectReport commutator_defect(const PolymerEnsemble& ensemble, double E) {
  const BlockPair bp = block_pair(ensemble, E);
  DefectReport r;
  r.E = E;
  r.defect = spectral_norm(commutator(bp.minus, bp.plus));
  r.tolerance = 1e-9 * (1.0 + spectral_norm(bp.plus) * spectral_norm(bp.minus));
  r.trace_plus = bp.plus.trace();
  r.trace_minus = bp.minus.trace();
  r.kind_plus = classify_block(bp.plus);
  r.kind_minus = classify_block(bp.minus);
  return r;
}

namespace {

struct Sample {
  double E;
  double entries[3];  // commutator is traceless: (a, b, c) determine it
  double scaled_defect;
};

Sample sample_at(const PolymerEnsemble& ensemble, double E) {
  const BlockPair bp = block_pair(ensemble, E);
  const Mat2 c = commutator(bp.minus, bp.plus);
  const double scale = 1.0 + spectral_norm(bp.plus) * spectral_norm(bp.minus);
  return {E, {c.a / scale, c.b / scale, c.c / scale}, spectral_norm(c) / scale};
}

double bisect_entry(const PolymerEnsemble& ensemble, int idx, double lo, double hi, double flo, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = sample_at(ensemble, mid).entries[idx];
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_min(const PolymerEnsemble& ensemble, double lo, double hi, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = sample_at(ensemble, x1).scaled_defect, f2 = sample_at(ensemble, x2).scaled_defect;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = sample_at(ensemble, x1).scaled_defect;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = sample_at(ensemble, x2).scaled_defect;
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

std::vector<double> find_critical_energies(const PolymerEnsemble& ensemble, double lo, double hi, int grid_n,
                                           double tol) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::ValidationError, "critical scan interval must be finite with lo < hi");
  if (grid_n < 2) throw Error(ErrorCode::ValidationError, "grid_n must be at least 2");
  std::vector<Sample> grid;
  grid.reserve(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i) {
    const double E = i + 1 == grid_n ? hi : lo + (hi - lo) * i / (grid_n - 1);
    grid.push_back(sample_at(ensemble, E));
  }
  std::vector<double> candidates;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].scaled_defect == 0.0) candidates.push_back(grid[i].E);
    if (i + 1 < grid.size()) {
      for (int e = 0; e < 3; ++e) {
        const double f0 = grid[i].entries[e], f1 = grid[i + 1].entries[e];
        if (f0 != 0.0 && f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0))
          candidates.push_back(bisect_entry(ensemble, e, grid[i].E, grid[i + 1].E, f0, tol));
      }
    }
    if (i > 0 && i + 1 < grid.size() && grid[i].scaled_defect <= grid[i - 1].scaled_defect &&
        grid[i].scaled_defect <= grid[i + 1].scaled_defect)
      candidates.push_back(golden_min(ensemble, grid[i - 1].E, grid[i + 1].E, tol));
  }

  std::vector<DefectReport> accepted;
  for (double E : candidates) {
    const DefectReport r = commutator_defect(ensemble, E);
    if (r.critical()) accepted.push_back(r);
  }
  std::sort(accepted.begin(), accepted.end(), [](const auto& x, const auto& y) { return x.E < y.E; });
  std::vector<double> roots;
  std::vector<double> best;
  for (const auto& r : accepted) {
    if (!roots.empty() && r.E - roots.back() < 1e-7) {
      if (r.defect < best.back()) {
        roots.back() = r.E;
        best.back() = r.defect;
      }
      continue;
    }
    roots.push_back(r.E);
    best.push_back(r.defect);
  }
  return roots;
}

double CriticalFrame::conjugation_residual() const {
  return std::max(spectral_norm(conjugate(T_plus) - rotation(eta_plus)),
                  spectral_norm(conjugate(T_minus) - rotation(eta_minus)));
}

double CriticalFrame::condition() const { return spectral_norm(M) * spectral_norm(M_inv); }

double CriticalFrame::m(double theta) const {
  double m0 = std::atan2(M.c, M.a);
  if (m0 >= M_PI) m0 -= kTwoPi;
  const double k = std::floor(theta / M_PI);
  const double phi = theta - k * M_PI;
  const Vec2 w = M * unit(phi);
  double d = std::fmod(std::atan2(w[1], w[0]) - m0, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  if (d > 1.5 * M_PI) d -= kTwoPi;  // rounding just below m0
  return k * M_PI + m0 + d;
}

CriticalFrame build_frame(const PolymerEnsemble& ensemble, double E_c) {
  const DefectReport rep = commutator_defect(ensemble, E_c);
  if (!rep.commuting())
    throw Error(ErrorCode::NotCritical, "commutator defect " + std::to_string(rep.defect) + " at E = " +
                                            std::to_string(E_c));
  if (!rep.admissible())
    throw Error(ErrorCode::NotCritical, "a polymer matrix is hyperbolic at E = " + std::to_string(E_c));

  CriticalFrame f;
  f.E_c = E_c;
  f.T_plus = polymer_matrix(ensemble.plus, E_c);
  f.T_minus = polymer_matrix(ensemble.minus, E_c);
  f.kind_plus = rep.kind_plus;
  f.kind_minus = rep.kind_minus;

  const bool ell_p = f.kind_plus == BlockKind::Elliptic;
  const bool ell_m = f.kind_minus == BlockKind::Elliptic;
  if (!ell_p && !ell_m) {
    f.M = Mat2::identity();
    f.eta_plus = identity_angle(f.kind_plus);
    f.eta_minus = identity_angle(f.kind_minus);
  } else {
    const bool from_plus = ell_p;
    double eta = 0.0;
    f.M = frame_from_elliptic(from_plus ? f.T_plus : f.T_minus, eta);
    const Mat2& other = from_plus ? f.T_minus : f.T_plus;
    const BlockKind other_kind = from_plus ? f.kind_minus : f.kind_plus;
    double other_eta;
    if (other_kind == BlockKind::Elliptic) {
      const Mat2 x = f.M * other * f.M.inverse();
      other_eta = std::atan2(x.c, x.a);
    } else {
      other_eta = identity_angle(other_kind);
    }
    f.eta_plus = principal(from_plus ? eta : other_eta);
    f.eta_minus = principal(from_plus ? other_eta : eta);
  }
  f.M_inv = f.M.adjugate();
  const double res = f.conjugation_residual();
  if (!(res <= 1e-9 * (1.0 + spectral_norm(f.T_plus) * spectral_norm(f.T_minus))))
    throw Error(ErrorCode::NotCritical, "frame conjugation residual " + std::to_string(res));

  // Fix the 2π multiple of each angle from the continuous Prüfer rotation over one block.
  const double m0 = f.m(0.0);
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const double lifted = f.m(block_rotation(ensemble.get(s), E_c)) - m0;
    const double eta = f.eta(s);
    const double l = eta + kTwoPi * std::round((lifted - eta) / kTwoPi);
    (s == Sign::Plus ? f.eta_lift_plus : f.eta_lift_minus) = l;
  }
  return f;
}

void ab_coefficients(const Mat2& x, cplx& a, cplx& b) {
  a = 0.5 * cplx(x.a + x.d, x.c - x.b);
  b = 0.5 * cplx(x.a - x.d, -(x.b + x.c));
}

double Reflection::eta_eps(Sign s, const CriticalFrame& frame) const {
  const double ref = frame.eta_lift(s);
  return ref + std::remainder(std::arg(a(s)) - ref, kTwoPi);
}

Reflection reflection_coefficients(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps) {
  Reflection r;
  r.eps = eps;
  const BlockPair bp = block_pair(ensemble, frame.E_c + eps);
  ab_coefficients(frame.conjugate(bp.plus), r.a_plus, r.b_plus);
  ab_coefficients(frame.conjugate(bp.minus), r.a_minus, r.b_minus);
  return r;
}

FirstOrderData first_order_data(const CriticalFrame& frame, const PolymerEnsemble& ensemble) {
  FirstOrderData out;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    cplx da, db;
    ab_coefficients(frame.conjugate(polymer_matrix_derivative(ensemble.get(s), frame.E_c)), da, db);
    const cplx phase = std::polar(1.0, frame.eta(s));
    const cplx c = phase * db;
    const double d = (da * std::conj(phase)).imag();
    if (s == Sign::Plus) {
      out.c_plus = c;
      out.d_plus = d;
    } else {
      out.c_minus = c;
      out.d_minus = d;
    }
  }
  return out;
}

FirstOrderData first_order_data_fd(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double h) {
  const Reflection rp = reflection_coefficients(frame, ensemble, h);
  const Reflection rm = reflection_coefficients(frame, ensemble, -h);
  FirstOrderData out;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const cplx c = std::polar(1.0, frame.eta(s)) * (rp.b(s) - rm.b(s)) / (2.0 * h);
    const double d = (rp.eta_eps(s, frame) - rm.eta_eps(s, frame)) / (2.0 * h);
    if (s == Sign::Plus) {
      out.c_plus = c;
      out.d_plus = d;
    } else {
      out.c_minus = c;
      out.d_minus = d;
    }
  }
  return out;
}

int classify_order(const std::vector<double>& eps, const std::vector<double>& b_abs) {
  if (eps.size() != b_abs.size() || eps.size() < 2)
    throw Error(ErrorCode::OrderUndetermined, "need at least two (ε, |b|) points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(b_abs[i] > 0.0) || !(eps[i] > 0.0))
      throw Error(ErrorCode::OrderUndetermined, "|b| vanished at ε = " + std::to_string(eps[i]));
    x.push_back(std::log(eps[i]));
    y.push_back(std::log(b_abs[i]));
  }
  const double slope = stats::linear_fit(x, y).slope;
  const double r = std::round(slope);
  if (std::abs(slope - r) > 0.25 || r < 1.0)
    throw Error(ErrorCode::OrderUndetermined, "log-log slope " + std::to_string(slope));
  return static_cast<int>(r);
}

int critical_order(const CriticalFrame& frame, const PolymerEnsemble& ensemble) {
  std::vector<double> eps;
  for (int j = 6; j <= 16; ++j) eps.push_back(std::ldexp(1.0, -j));
  int best = 0;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    std::vector<double> b;
    bool usable = true;
    for (double e : eps) {
      const double v = std::abs(reflection_coefficients(frame, ensemble, e).b(s));
      if (!(v > 1e-14)) usable = false;
      b.push_back(v);
    }
    if (!usable) continue;
    const int r = classify_order(eps, b);
    best = best == 0 ? r : std::min(best, r);
  }
  if (best == 0) throw Error(ErrorCode::OrderUndetermined, "|b| below resolution for both polymers");
  return best;
}

AnomalyReport anomaly_check(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double tol) {
  AnomalyReport r;
  r.mean_e2 = ensemble.average(std::polar(1.0, 2.0 * frame.eta_plus), std::polar(1.0, 2.0 * frame.eta_minus));
  r.mean_e4 = ensemble.average(std::polar(1.0, 4.0 * frame.eta_plus), std::polar(1.0, 4.0 * frame.eta_minus));
  r.anomalous2 = std::abs(1.0 - r.mean_e2) < tol;
  r.anomalous4 = std::abs(1.0 - r.mean_e4) < tol;
  return r;
}

CriticalSummary analyze_critical(const PolymerEnsemble& ensemble, double E_c) {
  CriticalSummary s;
  s.frame = build_frame(ensemble, E_c);
  s.first_order = first_order_data(s.frame, ensemble);
  s.anomaly = anomaly_check(s.frame, ensemble);
  s.order = critical_order(s.frame, ensemble);
  return s;
}

}  // namespace polychain
