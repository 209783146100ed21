#include "polychain/transport.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "polychain/error.hpp"
#include "polychain/parallel.hpp"
#include "polychain/stats.hpp"

namespace polychain {

GreenColumn green_column(const JacobiWindow& window, cplx z, std::int64_t radius) {
  if (!(z.imag() > 0.0)) throw Error(ErrorCode::SingularSystem, "green_column needs Im z > 0");
  if (radius < 1) throw Error(ErrorCode::InsufficientWindow, "green_column radius must be >= 1");
  if (!window.covers(-radius, radius))
    throw Error(ErrorCode::InsufficientWindow, "window does not cover [-radius, radius]");
  const auto R = radius;
  std::vector<cplx> rp(static_cast<std::size_t>(R + 2)), rm(static_cast<std::size_t>(R + 2));
  // rp[n] = G(n)/G(n-1) for n > 0, rm[m] = G(-m)/G(-m+1) for m > 0
  rp[static_cast<std::size_t>(R + 1)] = 0.0;
  for (std::int64_t n = R; n >= 1; --n) {
    const double t_next = n < R ? window.t(n + 1) : 0.0;
    rp[static_cast<std::size_t>(n)] = window.t(n) / (window.v(n) - z - t_next * rp[static_cast<std::size_t>(n + 1)]);
  }
  rm[static_cast<std::size_t>(R + 1)] = 0.0;
  for (std::int64_t m = R; m >= 1; --m) {
    const double t_prev = m < R ? window.t(-m) : 0.0;
    rm[static_cast<std::size_t>(m)] = window.t(-m + 1) / (window.v(-m) - z - t_prev * rm[static_cast<std::size_t>(m + 1)]);
  }
  const cplx denom = window.v(0) - z - window.t(1) * rp[1] - window.t(0) * rm[1];
  if (denom == cplx(0.0)) throw Error(ErrorCode::SingularSystem, "zero pivot at the origin");
  GreenColumn g;
  g.z = z;
  g.radius = R;
  g.values.assign(static_cast<std::size_t>(2 * R + 1), cplx(0.0));
  g.values[static_cast<std::size_t>(R)] = 1.0 / denom;
  for (std::int64_t n = 1; n <= R; ++n) {
    g.values[static_cast<std::size_t>(R + n)] = rp[static_cast<std::size_t>(n)] * g.values[static_cast<std::size_t>(R + n - 1)];
    g.values[static_cast<std::size_t>(R - n)] = rm[static_cast<std::size_t>(n)] * g.values[static_cast<std::size_t>(R - n + 1)];
  }
  return g;
}

std::int64_t green_radius_cap(double T, double t_max, std::int64_t start) {
  std::int64_t R = std::max<std::int64_t>(start, 1);
  while (static_cast<double>(R) < 48.0 * T * t_max) R *= 2;
  return R;
}

namespace {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

enum class PanelKind { Core, RightTail, LeftTail };

struct Panel {
  PanelKind kind = PanelKind::Core;
  double a = 0.0, b = 0.0;
  std::vector<double> value;
  double error = 0.0;
  std::int64_t radius_hint = 0;
};

class MomentDensity {
 public:
  MomentDensity(const JacobiWindow& w, const std::vector<double>& q, double eta, const QuadratureSpec& spec)
      : w_(w), q_(q), eta_(eta), spec_(spec) {
    const std::int64_t reach = std::min(-w.n_min, w.n_max);
    if (spec.fixed_radius > 0) {
      if (!w.covers(-spec.fixed_radius, spec.fixed_radius))
        throw Error(ErrorCode::InsufficientWindow, "window does not cover the fixed truncation radius");
      cap_ = spec.fixed_radius;
    } else {
      if (reach < 1) throw Error(ErrorCode::InsufficientWindow, "window must contain sites on both sides of 0");
      double t_max = 0.0;
      for (double t : w.t_values) t_max = std::max(t_max, t);
      cap_ = std::min(green_radius_cap(1.0 / (2.0 * eta), t_max, spec.start_radius), reach);
    }
    pow_.assign(q.size(), std::vector<double>(static_cast<std::size_t>(cap_ + 1)));
    for (std::size_t j = 0; j < q.size(); ++j)
      for (std::int64_t n = 0; n <= cap_; ++n)
        pow_[j][static_cast<std::size_t>(n)] = n == 0 ? (q[j] == 0.0 ? 1.0 : 0.0) : std::pow(static_cast<double>(n), q[j]);
  }

  std::int64_t cap() const { return cap_; }

  struct Scratch {
    std::vector<double> pr, pi, mr, mi;
  };

  // For K energies at once: out[k*nq + j] = Σ_n |n|^q_j |G^{E_k+iη}(n)|² on [−R, R], with the
  // partial sums over |n| ≤ R/2 and |n| ≤ R/4 in half and quarter. The energies run in
  // lockstep so the K independent Riccati recursions overlap.
  void sums(const double* E, std::size_t K, std::int64_t R, double* out, double* half, double* quarter,
            Scratch& s) const {
    const std::size_t nq = q_.size();
    const std::size_t len = static_cast<std::size_t>(R + 1) * K;
    if (s.pr.size() < len) {
      s.pr.resize(len);
      s.pi.resize(len);
      s.mr.resize(len);
      s.mi.resize(len);
    }
    const double* t = w_.t_values.data() - w_.n_min;  // t[n] = t(n)
    const double* v = w_.v_values.data() - w_.n_min;
    // x ← t_in / (v − z − t_out·x), complex division written out
    auto sweep = [&](int side, double* xr_out, double* xi_out) {
      std::array<double, 16> xr{}, xi{};
      for (std::int64_t m = R; m >= 1; --m) {
        const std::int64_t n = side * m;
        const double t_in = side > 0 ? t[n] : t[n + 1];
        const double t_out = m < R ? (side > 0 ? t[n + 1] : t[n]) : 0.0;
        const double vn = v[n];
        double* pr = xr_out + static_cast<std::size_t>(m) * K;
        double* pi = xi_out + static_cast<std::size_t>(m) * K;
        for (std::size_t k = 0; k < K; ++k) {
          const double dr = vn - E[k] - t_out * xr[k], di = -eta_ - t_out * xi[k];
          const double sc = t_in / (dr * dr + di * di);
          xr[k] = sc * dr;
          xi[k] = -sc * di;
          pr[k] = xr[k];
          pi[k] = xi[k];
        }
      }
    };
    sweep(1, s.pr.data(), s.pi.data());
    sweep(-1, s.mr.data(), s.mi.data());
    std::array<double, 16> g0r{}, g0i{};
    for (std::size_t k = 0; k < K; ++k) {
      const double dr = v[0] - E[k] - t[1] * s.pr[K + k] - t[0] * s.mr[K + k];
      const double di = -eta_ - t[1] * s.pi[K + k] - t[0] * s.mi[K + k];
      const double n0 = 1.0 / (dr * dr + di * di);
      g0r[k] = dr * n0;
      g0i[k] = -di * n0;
      for (std::size_t j = 0; j < nq; ++j) {
        out[k * nq + j] = pow_[j][0] * n0;
        half[k * nq + j] = quarter[k * nq + j] = out[k * nq + j];
      }
    }
    for (int side = 0; side < 2; ++side) {
      const double* rr = side == 0 ? s.pr.data() : s.mr.data();
      const double* ri = side == 0 ? s.pi.data() : s.mi.data();
      std::array<double, 16> gr = g0r, gi = g0i;
      for (std::int64_t n = 1; n <= R; ++n) {
        const double* ar = rr + static_cast<std::size_t>(n) * K;
        const double* ai = ri + static_cast<std::size_t>(n) * K;
        bool alive = false;
        for (std::size_t k = 0; k < K; ++k) {
          const double tr = gr[k] * ar[k] - gi[k] * ai[k];
          gi[k] = gr[k] * ai[k] + gi[k] * ar[k];
          gr[k] = tr;
          const double a2 = gr[k] * gr[k] + gi[k] * gi[k];
          if (a2 < 1e-280) {
            gr[k] = gi[k] = 0.0;
            continue;
          }
          alive = true;
          for (std::size_t j = 0; j < nq; ++j) {
            const double term = pow_[j][static_cast<std::size_t>(n)] * a2;
            out[k * nq + j] += term;
            if (n <= R / 2) half[k * nq + j] += term;
            if (n <= R / 4) quarter[k * nq + j] += term;
          }
        }
        if (!alive) break;
      }
    }
  }

  struct Node {
    double E = 0.0;
    std::int64_t radius = 0;
    std::int64_t work = 0;
    bool capped = false;
  };

  // Evaluates K ≤ 16 energies starting from radius `start`. Adaptive mode accepts a
  // node once the sites beyond R/2 carry at most radius_tol of every sum; failing
  // nodes are redone together at 2R. Returns the radius a neighbouring panel may start from.
  std::int64_t evaluate(const double* E, std::size_t K, std::int64_t start, double* out, Node* info,
                        Scratch& s) const {
    const std::size_t nq = q_.size();
    std::vector<double> o(K * nq), h(K * nq), qt(K * nq);
    if (spec_.fixed_radius > 0) {
      sums(E, K, cap_, out, h.data(), qt.data(), s);
      for (std::size_t k = 0; k < K; ++k) info[k] = {E[k], cap_, cap_, false};
      return cap_;
    }
    std::vector<std::size_t> todo(K);
    for (std::size_t k = 0; k < K; ++k) todo[k] = k;
    std::int64_t R = std::min(std::max(start, spec_.start_radius), cap_);
    bool shrink_all = true;
    std::vector<double> Es;
    while (!todo.empty()) {
      Es.clear();
      for (std::size_t k : todo) Es.push_back(E[k]);
      sums(Es.data(), Es.size(), R, o.data(), h.data(), qt.data(), s);
      std::vector<std::size_t> next;
      for (std::size_t i = 0; i < todo.size(); ++i) {
        const std::size_t k = todo[i];
        info[k].E = E[k];
        info[k].work += R;
        bool ok = true, shrink = true;
        for (std::size_t j = 0; j < nq; ++j) {
          const double total = o[i * nq + j];
          const double lim = spec_.radius_tol * std::abs(total);
          ok = ok && total - h[i * nq + j] <= lim;
          shrink = shrink && total - qt[i * nq + j] <= lim;
        }
        if (ok || R >= cap_) {
          std::copy(o.begin() + static_cast<std::ptrdiff_t>(i * nq),
                    o.begin() + static_cast<std::ptrdiff_t>((i + 1) * nq), out + k * nq);
          info[k].radius = R;
          info[k].capped = !ok;
          shrink_all = shrink_all && shrink && ok;
        } else {
          next.push_back(k);
          shrink_all = false;
        }
      }
      todo = std::move(next);
      if (!todo.empty()) R = std::min(2 * R, cap_);
    }
    return shrink_all ? std::max(R / 2, spec_.start_radius) : R;
  }

 private:
  const JacobiWindow& w_;
  std::vector<double> q_;
  double eta_;
  QuadratureSpec spec_;
  std::int64_t cap_ = 0;
  std::vector<std::vector<double>> pow_;
};

}  // namespace

MomentResult moment_green(const JacobiWindow& window, const std::vector<double>& q, double T,
                          const QuadratureSpec& spec) {
  if (!(T > 0.0)) throw Error(ErrorCode::ValidationError, "moment_green needs T > 0");
  if (q.empty()) throw Error(ErrorCode::ValidationError, "moment_green needs at least one q");
  for (double x : q)
    if (!(x >= 0.0)) throw Error(ErrorCode::ValidationError, "moment exponent q must be >= 0");
  const double eta = 0.5 / T;
  const MomentDensity density(window, q, eta, spec);
  const std::int64_t R = density.cap();
  const std::size_t nq = q.size();

  // spectrum hull of the truncated operator
  double lo = 1e300, hi = -1e300;
  for (std::int64_t n = -R; n <= R; ++n) {
    const double off = (n > -R ? window.t(n) : 0.0) + (n < R ? window.t(n + 1) : 0.0);
    lo = std::min(lo, window.v(n) - off);
    hi = std::max(hi, window.v(n) + off);
  }
  lo -= 10.0 / T;
  hi += 10.0 / T;

  MomentResult result;
  result.T = T;
  result.q = q;

  std::vector<Panel> panels;
  const auto n_core = static_cast<std::size_t>(std::ceil((hi - lo) * T / spec.panel_width));
  const double width = (hi - lo) / static_cast<double>(n_core);
  for (std::size_t i = 0; i < n_core; ++i)
    panels.push_back({PanelKind::Core, lo + width * static_cast<double>(i),
                      i + 1 == n_core ? hi : lo + width * static_cast<double>(i + 1), {}, 0.0, 0});
  for (PanelKind kind : {PanelKind::LeftTail, PanelKind::RightTail})
    for (int i = 0; i < 8; ++i) panels.push_back({kind, i / 8.0, (i + 1) / 8.0, {}, 0.0, 0});

  std::vector<std::int64_t> radius_used;
  std::vector<char> capped_flag;
  auto evaluate = [&](std::vector<Panel>& ps, std::size_t begin, int threads) {
    const std::size_t count = ps.size() - begin;
    std::vector<std::int64_t> rad(count, 0), work(count, 0);
    std::vector<char> cap(count, 0);
    parallel_for(
        count,
        [&](std::size_t k) {
          thread_local MomentDensity::Scratch scratch;
          Panel& p = ps[begin + k];
          const double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
          std::array<double, 15> x{}, E{}, jac{};
          std::array<std::size_t, 15> idx{};
          for (std::size_t i = 0; i < 7; ++i) {
            x[i] = c - h * kXgk[i];
            x[14 - i] = c + h * kXgk[i];
            idx[i] = idx[14 - i] = i;
          }
          x[7] = c;
          idx[7] = 7;
          for (std::size_t i = 0; i < 15; ++i) {
            E[i] = x[i];
            jac[i] = 1.0;
            if (p.kind != PanelKind::Core) {
              jac[i] = 1.0 / ((1.0 - x[i]) * (1.0 - x[i]));
              E[i] = p.kind == PanelKind::RightTail ? hi + x[i] / (1.0 - x[i]) : lo - x[i] / (1.0 - x[i]);
            }
          }
          std::vector<double> f(15 * nq);
          std::array<MomentDensity::Node, 15> info{};
          p.radius_hint = density.evaluate(E.data(), 15, p.radius_hint, f.data(), info.data(), scratch);
          std::vector<double> kron(nq, 0.0), gauss(nq, 0.0);
          for (std::size_t i = 0; i < 15; ++i) {
            rad[k] = std::max(rad[k], info[i].radius);
            work[k] += info[i].work;
            if (info[i].capped) cap[k] = 1;
            for (std::size_t j = 0; j < nq; ++j) {
              const double val = f[i * nq + j] * jac[i];
              kron[j] += kWgk[idx[i]] * val;
              if (idx[i] % 2 == 1) gauss[j] += kWg[idx[i] / 2] * val;
            }
          }
          p.value.assign(nq, 0.0);
          for (std::size_t j = 0; j < nq; ++j) p.value[j] = h * kron[j];
          p.error = h * std::abs(kron[0] - gauss[0]);
        },
        threads);
    for (std::size_t k = 0; k < count; ++k) {
      result.max_radius = std::max(result.max_radius, rad[k]);
      result.capped += cap[k];
      result.work += work[k];
    }
    result.evaluations += static_cast<std::int64_t>(15 * count);
  };

  evaluate(panels, 0, spec.threads);
  for (;;) {
    double total = 0.0, err = 0.0;
    for (const auto& p : panels) {
      total += p.value[0];
      err += p.error;
    }
    const double tol = std::max(spec.rel_tol * std::abs(total), 1e-300);
    if (err <= tol) break;
    if (static_cast<std::int64_t>(panels.size()) >= spec.max_panels)
      throw Error(ErrorCode::QuadratureUnderResolved,
                  "moment_green: error " + std::to_string(err) + " above " + std::to_string(tol) + " at T=" +
                      std::to_string(T));
    // split every panel above its share of the tolerance
    const double share = tol / static_cast<double>(panels.size());
    std::vector<Panel> kept, fresh;
    for (auto& p : panels) {
      if (p.error > share) {
        const double m = 0.5 * (p.a + p.b);
        fresh.push_back({p.kind, p.a, m, {}, 0.0, p.radius_hint});
        fresh.push_back({p.kind, m, p.b, {}, 0.0, p.radius_hint});
      } else {
        kept.push_back(std::move(p));
      }
    }
    const std::size_t begin = kept.size();
    for (auto& p : fresh) kept.push_back(std::move(p));
    panels = std::move(kept);
    evaluate(panels, begin, spec.threads);
  }
  // fixed summation order: by kind, then by left endpoint
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) {
    return x.kind != y.kind ? static_cast<int>(x.kind) < static_cast<int>(y.kind) : x.a < y.a;
  });
  const double pref = eta / std::numbers::pi;
  result.value.assign(nq, 0.0);
  double err = 0.0;
  for (const auto& p : panels) {
    for (std::size_t j = 0; j < nq; ++j) result.value[j] += p.value[j];
    err += p.error;
  }
  for (auto& v : result.value) v *= pref;
  result.quad_error = err * pref;
  return result;
}

double moment_green(const JacobiWindow& window, double q, double T, const QuadratureSpec& spec) {
  return moment_green(window, std::vector<double>{q}, T, spec).value[0];
}

double moment_spectral_oracle(const JacobiWindow& window, double q, double T, std::int64_t radius, bool cesaro) {
  if (!(T >= 0.0)) throw Error(ErrorCode::ValidationError, "oracle needs T >= 0");
  if (radius < 1 || !window.covers(-radius, radius))
    throw Error(ErrorCode::InsufficientWindow, "window does not cover [-radius, radius]");
  double t_max = 0.0;
  for (std::int64_t n = -radius + 1; n <= radius; ++n) t_max = std::max(t_max, window.t(n));
  const auto N = static_cast<Eigen::Index>(2 * radius + 1);
  if (static_cast<double>(N) <= 4.0 * T * t_max)
    throw Error(ErrorCode::FrontEscape, "truncation of " + std::to_string(N) + " sites too small for T=" +
                                            std::to_string(T));
  Eigen::VectorXd diag(N), sub(N - 1), weight(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const std::int64_t n = i - radius;
    diag(i) = window.v(n);
    if (i + 1 < N) sub(i) = -window.t(n + 1);
    weight(i) = n == 0 ? (q == 0.0 ? 1.0 : 0.0) : std::pow(std::abs(static_cast<double>(n)), q);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "tridiagonal eigensolver failed");
  const Eigen::MatrixXd& psi = solver.eigenvectors();
  const Eigen::VectorXd& E = solver.eigenvalues();
  const Eigen::VectorXd w0 = psi.row(static_cast<Eigen::Index>(radius)).transpose();
  const Eigen::MatrixXd A = psi.transpose() * weight.asDiagonal() * psi;
  double total = 0.0;
  for (Eigen::Index j = 0; j < N; ++j) {
    double row = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
      const double d = T * (E(j) - E(k));
      const double kernel = cesaro ? (d == 0.0 ? 1.0 : std::sin(d) / d) : 1.0 / (1.0 + d * d);
      row += A(j, k) * w0(k) * kernel;
    }
    total += row * w0(j);
  }
  return std::max(total, 0.0);
}

const char* to_string(MomentMethod m) {
  return m == MomentMethod::GreenQuadrature ? "green_quadrature" : "spectral_oracle";
}

DiffusionExponent diffusion_exponent(const MomentSeries& series, std::size_t window) {
  const std::size_t n = series.T.size();
  if (n != series.M.size()) throw Error(ErrorCode::ValidationError, "series T and M lengths differ");
  if (n < 5 || window < 2) throw Error(ErrorCode::InsufficientRange, "need at least 5 (T, M) pairs");
  if (!(series.q > 0.0)) throw Error(ErrorCode::ValidationError, "q must be > 0");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series.T[a] < series.T[b]; });
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double T = series.T[order[i]], M = series.M[order[i]];
    if (!(T > 0.0) || !(M > 0.0)) throw Error(ErrorCode::ValidationError, "series needs T > 0 and M > 0");
    x[i] = series.q * std::log(T);
    y[i] = std::log(M);
  }
  if (std::log10(series.T[order.back()] / series.T[order.front()]) < 1.5 - 1e-9)
    throw Error(ErrorCode::InsufficientRange, "T range spans less than 1.5 decades");
  const auto fit = stats::linear_fit(x, y);
  DiffusionExponent out;
  out.beta = fit.slope;
  out.C = std::exp(fit.intercept);
  window = std::min(window, n);
  out.beta_minus = 1e300;
  out.beta_plus = -1e300;
  for (std::size_t s = 0; s + window <= n; ++s) {
    const std::vector<double> xs(x.begin() + static_cast<std::ptrdiff_t>(s), x.begin() + static_cast<std::ptrdiff_t>(s + window));
    const std::vector<double> ys(y.begin() + static_cast<std::ptrdiff_t>(s), y.begin() + static_cast<std::ptrdiff_t>(s + window));
    const double b = stats::linear_fit(xs, ys).slope;
    out.beta_minus = std::min(out.beta_minus, b);
    out.beta_plus = std::max(out.beta_plus, b);
  }
  return out;
}

}  // namespace polychain
