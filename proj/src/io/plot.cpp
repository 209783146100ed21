#include "polychain/io/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>

#include "polychain/error.hpp"

namespace polychain::io {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 78, kRight = 20, kTop = 24, kBottom = 52;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double to_double(const std::string& s) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw Error(ErrorCode::SchemaMismatch, "non-numeric field '" + s + "'");
  return x;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;
  std::string label;

  void fit(const std::vector<double>& v) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double x : v) {
      if (!std::isfinite(x) || (log && x <= 0)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (!std::isfinite(lo)) lo = log ? 1.0 : 0.0, hi = log ? 10.0 : 1.0;
    if (log) {
      lo = std::pow(10.0, std::floor(std::log10(lo) + 1e-12));
      hi = std::pow(10.0, std::ceil(std::log10(hi) - 1e-12));
      if (hi <= lo) hi = lo * 10;
    } else {
      const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1e-3, std::abs(lo) * 0.1);
      lo -= pad;
      hi += pad;
    }
  }
  double unit(double x) const {
    return log ? (std::log10(x) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (x - lo) / (hi - lo);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (double d = std::log10(lo); d <= std::log10(hi) + 1e-9; d += 1) t.push_back(std::pow(10.0, std::round(d)));
      return t;
    }
    const double raw = (hi - lo) / 6;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double x = std::ceil(lo / step) * step; x <= hi + 1e-12 * step; x += step)
      t.push_back(std::abs(x) < 1e-12 * step ? 0.0 : x);
    return t;
  }
};

class Canvas {
 public:
  Canvas(Axis x, Axis y, const std::string& title) : x_(std::move(x)), y_(std::move(y)) {
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
            "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out_ += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
    out_ += "<text x=\"" + num(kWidth / 2) + "\" y=\"16\" text-anchor=\"middle\">" + title + "</text>\n";
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    out_ += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
            num(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : x_.ticks()) {
      const double px = X(t);
      out_ += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) + "\" y2=\"" + num(y0 + 5) +
              "\" stroke=\"black\"/>\n";
      out_ += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" + tick_label(t) +
              "</text>\n";
    }
    for (double t : y_.ticks()) {
      const double py = Y(t);
      out_ += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(py) +
              "\" stroke=\"black\"/>\n";
      out_ += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
              "</text>\n";
    }
    out_ += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
            x_.label + "</text>\n";
    out_ += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
            num((y0 + y1) / 2) + ")\">" + y_.label + "</text>\n";
  }

  double X(double x) const { return kLeft + x_.unit(x) * (kWidth - kLeft - kRight); }
  double Y(double y) const { return kHeight - kBottom - y_.unit(y) * (kHeight - kTop - kBottom); }
  bool ok(double x, double y) const {
    return std::isfinite(x) && std::isfinite(y) && (!x_.log || x > 0) && (!y_.log || y > 0);
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
                const std::string& dash = "") {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (ok(xs[i], ys[i])) pts += (pts.empty() ? "" : " ") + num(X(xs[i])) + "," + num(Y(ys[i]));
    if (pts.empty()) return;
    out_ += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
            (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
  }

  void points(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& color,
              const std::vector<double>& err = {}) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!ok(xs[i], ys[i])) continue;
      if (i < err.size() && std::isfinite(err[i]) && err[i] > 0) {
        const double lo = ys[i] - err[i], hi = ys[i] + err[i];
        const double plo = ok(xs[i], lo) ? Y(lo) : kHeight - kBottom;
        out_ += "<line x1=\"" + num(X(xs[i])) + "\" y1=\"" + num(plo) + "\" x2=\"" + num(X(xs[i])) + "\" y2=\"" +
                num(Y(hi)) + "\" stroke=\"" + color + "\"/>\n";
      }
      out_ += "<circle cx=\"" + num(X(xs[i])) + "\" cy=\"" + num(Y(ys[i])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
  }

  void legend(const std::string& text, const std::string& color, const std::string& dash = "") {
    const double y = kTop + 16 + 16 * static_cast<double>(entries_++);
    out_ += "<line x1=\"" + num(kLeft + 10) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(kLeft + 34) + "\" y2=\"" +
            num(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
            (dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"") + "/>\n";
    out_ += "<text x=\"" + num(kLeft + 40) + "\" y=\"" + num(y) + "\">" + text + "</text>\n";
  }

  std::string finish() { return out_ + "</svg>\n"; }

 private:
  Axis x_, y_;
  std::string out_;
  int entries_ = 0;
};

std::vector<double> col(const Table& t, const std::string& name) {
  const std::size_t c = column(t, name);
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(to_double(r[c]));
  return v;
}

// y = y0 (x/x0)^slope through the geometric middle of the data
void reference(Canvas& cv, const std::vector<double>& xs, const std::vector<double>& ys, double slope,
               const std::string& color, const std::string& label) {
  double lx = 0, ly = 0;
  int n = 0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > 0 && ys[i] > 0 && std::isfinite(ys[i])) {
      lx += std::log(xs[i]);
      ly += std::log(ys[i]);
      xmin = std::min(xmin, xs[i]);
      xmax = std::max(xmax, xs[i]);
      ++n;
    }
  if (n == 0) return;
  const double x0 = std::exp(lx / n), y0 = std::exp(ly / n);
  cv.polyline({xmin, xmax}, {y0 * std::pow(xmin / x0, slope), y0 * std::pow(xmax / x0, slope)}, color, "6,4");
  cv.legend(label, color, "6,4");
}

}  // namespace

ExperimentKind parse_plot_kind(const std::string& name) {
  static const std::map<std::string, ExperimentKind> shorts = {
      {"lyapunov", ExperimentKind::LyapunovSweep}, {"ids", ExperimentKind::IdsSweep},
      {"transport", ExperimentKind::Transport},    {"deviations", ExperimentKind::Deviations},
      {"levels", ExperimentKind::Levels},          {"critical", ExperimentKind::CriticalScan}};
  const auto it = shorts.find(name);
  return it != shorts.end() ? it->second : parse_kind(name);
}

std::string plot_svg(const Table& table, ExperimentKind kind) {
  if (table.header.empty() || table.rows.empty())
    throw Error(ErrorCode::SchemaMismatch, "empty CSV, nothing to plot");
  if (table.header != csv_schema(kind))
    throw Error(ErrorCode::SchemaMismatch, std::string("header does not match the ") + to_string(kind) + " schema");
  Axis x, y;
  switch (kind) {
    case ExperimentKind::LyapunovSweep: {
      const auto eps = col(table, "eps"), g = col(table, "gamma_mc"), err = col(table, "gamma_stderr"),
                 f = col(table, "gamma_formula");
      x.log = y.log = true;
      x.label = "eps";
      y.label = "Lyapunov exponent";
      std::vector<double> all = g;
      all.insert(all.end(), f.begin(), f.end());
      x.fit(eps);
      y.fit(all);
      Canvas cv(x, y, "Lyapunov exponent near the critical energy");
      cv.points(eps, g, kPalette[0], err);
      cv.legend("Monte Carlo", kPalette[0]);
      cv.polyline(eps, f, kPalette[1]);
      cv.legend("perturbative formula", kPalette[1]);
      reference(cv, eps, f, 2.0, "#555555", "slope 2");
      return cv.finish();
    }
    case ExperimentKind::IdsSweep: {
      const auto eps = col(table, "eps"), n = col(table, "ids_mc"), err = col(table, "ids_stderr"),
                 f = col(table, "ids_formula");
      x.label = "eps";
      y.label = "integrated density of states";
      std::vector<double> all = n;
      all.insert(all.end(), f.begin(), f.end());
      x.fit(eps);
      y.fit(all);
      Canvas cv(x, y, "Integrated density of states near the critical energy");
      cv.points(eps, n, kPalette[0], err);
      cv.legend("Monte Carlo", kPalette[0]);
      cv.polyline(eps, f, kPalette[1]);
      cv.legend("linear formula", kPalette[1]);
      return cv.finish();
    }
    case ExperimentKind::Transport: {
      const auto cfg = col(table, "config"), T = col(table, "T"), M = col(table, "M_green"),
                 O = col(table, "M_oracle"), q = col(table, "q");
      x.log = y.log = true;
      x.label = "T";
      y.label = "M_q(T)";
      std::vector<double> all = M;
      all.insert(all.end(), O.begin(), O.end());
      x.fit(T);
      y.fit(all);
      Canvas cv(x, y, "Time-averaged position moments");
      std::map<long long, std::pair<std::vector<double>, std::vector<double>>> series;
      for (std::size_t i = 0; i < T.size(); ++i) {
        series[std::llround(cfg[i])].first.push_back(T[i]);
        series[std::llround(cfg[i])].second.push_back(M[i]);
      }
      int c = 0;
      for (const auto& [id, s] : series) {
        const char* color = kPalette[c++ % 6];
        cv.polyline(s.first, s.second, color);
        cv.points(s.first, s.second, color);
      }
      cv.legend("Green function quadrature", kPalette[0]);
      if (std::any_of(O.begin(), O.end(), [](double v) { return std::isfinite(v); })) {
        cv.points(T, O, "#000000");
        cv.legend("spectral oracle", "#000000");
      }
      reference(cv, T, M, q[0] - 0.5, "#555555", "slope q - 1/2");
      reference(cv, T, M, q[0] - 1.0, "#999999", "slope q - 1");
      return cv.finish();
    }
    case ExperimentKind::Deviations: {
      const auto N = col(table, "N"), fr = col(table, "fraction"), lo = col(table, "wilson_lo"),
                 hi = col(table, "wilson_hi");
      x.log = true;
      x.label = "N";
      y.label = "exceedance fraction";
      std::vector<double> all = hi;
      all.insert(all.end(), lo.begin(), lo.end());
      x.fit(N);
      y.fit(all);
      Canvas cv(x, y, "Weyl sum exceedance fraction");
      std::vector<double> err;
      for (std::size_t i = 0; i < fr.size(); ++i) err.push_back(std::max(hi[i] - fr[i], fr[i] - lo[i]));
      cv.polyline(N, fr, kPalette[0]);
      cv.points(N, fr, kPalette[0], err);
      cv.legend("fraction with Wilson interval", kPalette[0]);
      return cv.finish();
    }
    case ExperimentKind::Levels: {
      const auto s = col(table, "sample"), c = col(table, "required_C");
      y.log = true;
      x.label = "sample";
      y.label = "required C";
      x.fit(s);
      y.fit(c);
      Canvas cv(x, y, "Level spacing and eigenfunction spread constants");
      cv.points(s, c, kPalette[0]);
      cv.legend("per-sample C", kPalette[0]);
      return cv.finish();
    }
    case ExperimentKind::CriticalScan:
      break;
  }
  throw Error(ErrorCode::SchemaMismatch, std::string("no plot defined for ") + to_string(kind));
}

void plot(const std::string& csv_path, ExperimentKind kind, const std::string& svg_path) {
  write_text(svg_path, plot_svg(read_csv(csv_path), kind));
}

}  // namespace polychain::io
