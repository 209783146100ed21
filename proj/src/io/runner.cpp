#include "polychain/io/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "polychain/critical.hpp"
#include "polychain/error.hpp"
#include "polychain/io/plot.hpp"
#include "polychain/observables.hpp"
#include "polychain/parallel.hpp"
#include "polychain/phase_flow.hpp"
#include "polychain/stats.hpp"
#include "polychain/transport.hpp"

namespace polychain::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string short_real(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

RunResult critical_scan(const ExperimentSpec& spec, const PolymerEnsemble& ens) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  const auto energies =
      find_critical_energies(ens, spec.real("energy_min"), spec.real("energy_max"), static_cast<int>(spec.integer("grid")));
  std::string list;
  for (double E : energies) {
    const CriticalSummary s = analyze_critical(ens, E);
    const auto& f = s.frame;
    const auto& d = s.first_order;
    r.table.rows.push_back({format_real(E), format_real(f.eta_plus), format_real(f.eta_minus),
                            format_real(f.eta_lift_plus), format_real(f.eta_lift_minus), to_string(f.kind_plus),
                            to_string(f.kind_minus), format_int(s.order), format_real(d.c_plus.real()),
                            format_real(d.c_plus.imag()), format_real(d.c_minus.real()), format_real(d.c_minus.imag()),
                            format_real(d.d_plus), format_real(d.d_minus), format_int(s.anomaly.any() ? 1 : 0)});
    list += (list.empty() ? "" : ", ") + short_real(E);
  }
  r.summary = "critical_scan: " + std::to_string(energies.size()) + " critical energies" +
              (list.empty() ? "" : " {" + list + "}");
  return r;
}

RunResult lyapunov_sweep(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed, int threads) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  // identity frame: plain products at E = critical_energy + eps, no perturbative formula
  const bool use_frame = spec.text("frame") == "critical";
  CriticalFrame frame;
  frame.E_c = spec.real("critical_energy");
  if (use_frame) frame = build_frame(ens, frame.E_c);
  LyapunovOptions opt;
  opt.frame = frame.M;
  opt.nodes = static_cast<int>(spec.integer("nodes"));
  opt.threads = threads;
  std::vector<double> eps_ok, gam;
  for (double eps : spec.reals("eps")) {
    const auto mc = lyapunov_mc(ens, frame.E_c + eps, spec.integer("polymers"),
                                static_cast<std::size_t>(spec.integer("samples")), seed, opt);
    double formula = kNaN;
    try {
      if (use_frame) formula = lyapunov_formula(frame, ens, eps).leading;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AnomalousAngles) throw;
    }
    r.table.rows.push_back({format_real(eps), format_real(mc.value), format_real(mc.std_error), format_real(formula)});
    if (mc.value > 0 && eps > 0) {
      eps_ok.push_back(std::log(eps));
      gam.push_back(std::log(mc.value));
    }
  }
  r.summary = "lyapunov_sweep: " + std::to_string(r.table.rows.size()) + " points";
  if (eps_ok.size() >= 2) r.summary += ", log-log slope " + short_real(stats::linear_fit(eps_ok, gam).slope);
  return r;
}

RunResult ids_sweep(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed, int threads) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  const CriticalFrame frame = build_frame(ens, spec.real("critical_energy"));
  const FirstOrderData fo = first_order_data(frame, ens);
  const auto& eps = spec.reals("eps");
  std::vector<double> energies;
  for (double e : eps) energies.push_back(frame.E_c + e);
  const auto xs = ids_samples(ens, energies, spec.integer("sites"), static_cast<std::size_t>(spec.integer("samples")),
                              seed, threads);
  double slope = kNaN;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto m = stats::mean_error(xs[i]);
    double formula = kNaN;
    try {
      const auto f = ids_formula(frame, fo, ens, eps[i]);
      formula = f.value;
      slope = f.slope;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AnomalousAngles) throw;
    }
    r.table.rows.push_back({format_real(eps[i]), format_real(m.mean), format_real(m.std_error), format_real(formula)});
  }
  r.summary = "ids_sweep: " + std::to_string(r.table.rows.size()) + " points, formula slope " + short_real(slope);
  return r;
}

RunResult levels(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed, int threads) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  const CriticalFrame frame = build_frame(ens, spec.real("critical_energy"));
  const std::int64_t N = spec.integer("sites");
  const auto agg = level_statistics(ens, frame, N, spec.real("alpha"), static_cast<std::size_t>(spec.integer("samples")),
                                    seed, spec.real("C"), threads);
  for (std::size_t i = 0; i < agg.samples.size(); ++i) {
    const auto& s = agg.samples[i];
    double lo = kNaN, hi = kNaN;
    if (!s.spacings.empty()) {
      lo = *std::min_element(s.spacings.begin(), s.spacings.end()) * static_cast<double>(N);
      hi = *std::max_element(s.spacings.begin(), s.spacings.end()) * static_cast<double>(N);
    }
    r.table.rows.push_back({format_int(static_cast<long long>(i)), format_int(static_cast<long long>(s.eigenvalues.size())),
                            format_real(lo), format_real(hi), format_real(s.min_spread), format_real(s.max_spread),
                            format_real(s.required_C), format_int(s.pass ? 1 : 0)});
  }
  r.summary = "levels: pass fraction " + short_real(agg.pass_fraction) + " at C = " + short_real(agg.C);
  return r;
}

RunResult deviations(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed, int threads) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  const CriticalFrame frame = build_frame(ens, spec.real("critical_energy"));
  const double alpha = spec.real("alpha");
  const auto norm_samples = static_cast<std::size_t>(spec.integer("norm_samples"));
  std::string fr;
  for (std::int64_t N : spec.integers("sites")) {
    const double delta = std::pow(static_cast<double>(N), -0.5 - alpha);
    const auto tail = deviation_tail(frame, ens, alpha, N, static_cast<std::size_t>(spec.integer("samples")), seed,
                                     delta, {0.0, M_PI / 2}, threads);
    double q99 = kNaN;
    if (norm_samples > 0) {
      BoundednessOptions opt;
      opt.level = BoundednessLevel::Polymers;
      opt.delta = delta;
      opt.threads = threads;
      q99 = transfer_boundedness_tail(ens, frame, N, alpha, norm_samples, seed, opt).quantile99;
    }
    r.table.rows.push_back({format_int(N), format_int(static_cast<long long>(tail.samples)),
                            format_int(static_cast<long long>(tail.hits)), format_real(tail.fraction),
                            format_real(tail.wilson.lo), format_real(tail.wilson.hi), format_real(tail.threshold),
                            format_real(stats::quantile(tail.max_abs, 0.99)), format_real(q99)});
    fr += (fr.empty() ? "" : ", ") + short_real(tail.fraction);
  }
  r.summary = "deviations: exceedance fractions {" + fr + "}";
  return r;
}

JacobiWindow transport_window(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed,
                              std::size_t config, std::int64_t radius) {
  const std::string& kind = spec.text("configuration");
  if (kind == "free")
    return make_window(std::vector<double>(static_cast<std::size_t>(2 * radius + 1), 1.0),
                       std::vector<double>(static_cast<std::size_t>(2 * radius + 1), 0.0), -radius);
  const std::int64_t K = polymers_needed(ens, -radius, radius);
  if (kind == "random") {
    const Configuration c = sample_configuration(ens, -K, K, seed, config, OriginMeasure::Site);
    return assemble_window(c, ens, -radius, radius);
  }
  std::vector<Sign> signs(static_cast<std::size_t>(2 * K + 1));
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (kind == "all_plus") signs[i] = Sign::Plus;
    else if (kind == "all_minus") signs[i] = Sign::Minus;
    else signs[i] = (i % 2 == 0) ? Sign::Plus : Sign::Minus;
  }
  return assemble_window(Configuration::from_signs(signs, -K), ens, -radius, radius);
}

RunResult transport(const ExperimentSpec& spec, const PolymerEnsemble& ens, std::uint64_t seed, int threads) {
  RunResult r;
  r.table.header = csv_schema(spec.kind);
  std::vector<double> times = spec.reals("times");
  std::sort(times.begin(), times.end());
  const double q = spec.real("q");
  const auto configs = static_cast<std::size_t>(spec.integer("configs"));
  const std::int64_t oracle = spec.integer("oracle_radius");
  double t_max = 1.0;
  if (spec.text("configuration") != "free")
    for (const auto* p : {&ens.plus, &ens.minus})
      for (double t : p->hopping) t_max = std::max(t_max, t);
  const std::int64_t radius = oracle > 0 ? oracle : green_radius_cap(times.back(), t_max);

  QuadratureSpec qs;
  qs.rel_tol = spec.real("rel_tol");
  qs.fixed_radius = oracle;
  std::vector<JacobiWindow> windows(configs);
  parallel_for(configs, [&](std::size_t c) { windows[c] = transport_window(spec, ens, seed, c, radius); }, threads);
  const std::size_t nt = times.size();
  std::vector<MomentResult> green(configs * nt);
  std::vector<double> orc(configs * nt, kNaN);
  // largest T first so the expensive jobs start early
  parallel_for(
      configs * nt,
      [&](std::size_t job) {
        const std::size_t c = job / nt, i = nt - 1 - job % nt;
        green[c * nt + i] = moment_green(windows[c], std::vector<double>{q}, times[i], qs);
        if (oracle > 0) {
          try {
            orc[c * nt + i] = moment_spectral_oracle(windows[c], q, times[i], oracle);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::FrontEscape) throw;
          }
        }
      },
      threads);
  std::vector<double> betas;
  for (std::size_t c = 0; c < configs; ++c) {
    std::vector<double> x(nt), y(nt);
    bool positive = q > 0;
    for (std::size_t i = 0; i < nt; ++i) {
      x[i] = q * std::log(times[i]);
      positive = positive && green[c * nt + i].value[0] > 0;
      y[i] = positive ? std::log(green[c * nt + i].value[0]) : 0.0;
    }
    for (std::size_t i = 0; i < nt; ++i) {
      double beta = kNaN;
      if (nt >= 5 && positive) {
        const std::size_t s = std::min(i >= 2 ? i - 2 : 0, nt - 5);
        beta = stats::linear_fit(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(s), x.begin() + static_cast<std::ptrdiff_t>(s + 5)),
                                 std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(s), y.begin() + static_cast<std::ptrdiff_t>(s + 5)))
                   .slope;
      }
      const auto& g = green[c * nt + i];
      r.table.rows.push_back({format_int(static_cast<long long>(c)), format_int(static_cast<long long>(seed)),
                              format_real(times[i]), format_real(q), format_real(g.value[0]),
                              format_real(g.quad_error), format_real(orc[c * nt + i]), format_real(beta)});
    }
    if (nt >= 2 && positive) betas.push_back(stats::linear_fit(x, y).slope);
  }
  r.summary = "transport: " + std::to_string(configs) + " configurations x " + std::to_string(nt) + " times";
  if (!betas.empty()) {
    const auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
    r.summary += ", fitted beta in [" + short_real(*lo) + ", " + short_real(*hi) + "]";
  }
  return r;
}

std::string resolve(const std::string& dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(dir) / p).string();
}

}  // namespace

RunResult compute(const ExperimentSpec& spec, const RunOptions& options) {
  const PolymerEnsemble ens = spec.ensemble();
  const std::uint64_t seed = options.seed.value_or(spec.seed);
  const int threads = resolve_threads(options.threads);
  try {
    switch (spec.kind) {
      case ExperimentKind::CriticalScan: return critical_scan(spec, ens);
      case ExperimentKind::LyapunovSweep: return lyapunov_sweep(spec, ens, seed, threads);
      case ExperimentKind::IdsSweep: return ids_sweep(spec, ens, seed, threads);
      case ExperimentKind::Levels: return levels(spec, ens, seed, threads);
      case ExperimentKind::Deviations: return deviations(spec, ens, seed, threads);
      case ExperimentKind::Transport: return transport(spec, ens, seed, threads);
    }
  } catch (const Error& e) {
    throw Error(e.code(), std::string(to_string(spec.kind)) + " experiment from " + spec.source + ": " + e.what());
  }
  throw Error(ErrorCode::ValidationError, "unknown experiment kind");
}

RunResult run(const ExperimentSpec& spec, const RunOptions& options) {
  RunResult r = compute(spec, options);
  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  r.csv_path = resolve(options.out_dir, spec.csv);
  write_csv(r.csv_path, r.table);
  if (!spec.svg.empty()) {
    r.svg_path = resolve(options.out_dir, spec.svg);
    write_text(r.svg_path, plot_svg(r.table, spec.kind));
  }
  return r;
}

}  // namespace polychain::io
