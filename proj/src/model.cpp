#include "polychain/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polychain/error.hpp"
#include "polychain/rng.hpp"

namespace polychain {

Polymer make_polymer(std::vector<double> hopping, std::vector<double> potential) {
  if (hopping.empty() && potential.empty()) throw Error(ErrorCode::EmptyPolymer, "polymer has no sites");
  if (hopping.size() != potential.size())
    throw Error(ErrorCode::LengthMismatch, "hopping has " + std::to_string(hopping.size()) +
                                               " entries, potential has " +
                                               std::to_string(potential.size()));
  for (std::size_t i = 0; i < hopping.size(); ++i) {
    if (!(hopping[i] > 0.0) || !std::isfinite(hopping[i]))
      throw Error(ErrorCode::NonPositiveHopping, "hopping[" + std::to_string(i) + "] = " +
                                                     std::to_string(hopping[i]));
    if (!std::isfinite(potential[i]))
      throw Error(ErrorCode::ValidationError, "potential[" + std::to_string(i) + "] is not finite");
  }
  return Polymer{std::move(hopping), std::move(potential)};
}

double PolymerEnsemble::mean_length() const {
  return p_plus * static_cast<double>(plus.length()) + p_minus() * static_cast<double>(minus.length());
}

PolymerEnsemble build_ensemble(Polymer plus, Polymer minus, double p_plus) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0))
    throw Error(ErrorCode::InvalidProbability, "p_plus = " + std::to_string(p_plus));
  // Re-validate in case the caller built the structs by hand.
  plus = make_polymer(std::move(plus.hopping), std::move(plus.potential));
  minus = make_polymer(std::move(minus.hopping), std::move(minus.potential));
  return PolymerEnsemble{std::move(plus), std::move(minus), p_plus};
}

PolymerEnsemble dimer_ensemble(double lambda, double p_plus) {
  return build_ensemble(make_polymer({1.0, 1.0}, {lambda, lambda}),
                        make_polymer({1.0, 1.0}, {-lambda, -lambda}), p_plus);
}

namespace {

constexpr std::uint64_t kLaneSign = 0;
constexpr std::uint64_t kLaneOriginSign = 1;
constexpr std::uint64_t kLaneOffset = 2;

Sign draw_sign(std::uint64_t key, std::int64_t k, double p_plus, std::uint64_t lane) {
  return rng::uniform(key, k, lane) < p_plus ? Sign::Plus : Sign::Minus;
}

}  // namespace

Configuration::Configuration(const PolymerEnsemble& ensemble, std::int64_t k_min, std::int64_t k_max,
                             std::uint64_t seed, std::uint64_t sample, OriginMeasure measure)
    : k_min_(k_min), k_max_(k_max), seed_(seed), sample_(sample), measure_(measure), random_(true) {
  if (k_min > 0 || k_max < 0 || k_min > k_max)
    throw Error(ErrorCode::EmptyWindow, "polymer range [" + std::to_string(k_min) + ", " +
                                            std::to_string(k_max) + "] must contain 0");
  const std::uint64_t key = rng::stream_key(seed, sample);
  signs_.resize(static_cast<std::size_t>(k_max - k_min + 1));
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    Sign s;
    if (k == 0 && measure == OriginMeasure::Site) {
      const double w_plus = ensemble.p_plus * static_cast<double>(ensemble.plus.length());
      s = draw_sign(key, 0, w_plus / ensemble.mean_length(), kLaneOriginSign);
    } else {
      s = draw_sign(key, k, ensemble.p_plus, kLaneSign);
    }
    signs_[static_cast<std::size_t>(k - k_min)] = s;
  }
  if (measure == OriginMeasure::Site) {
    const auto len = ensemble.get(sign(0)).length();
    offset_ = static_cast<std::size_t>(rng::uniform(key, 0, kLaneOffset) * static_cast<double>(len));
    if (offset_ >= len) offset_ = len - 1;
  }
}

Configuration Configuration::from_signs(std::vector<Sign> signs, std::int64_t k_min, std::size_t offset) {
  Configuration c;
  c.k_min_ = k_min;
  c.k_max_ = k_min + static_cast<std::int64_t>(signs.size()) - 1;
  if (c.k_min_ > 0 || c.k_max_ < 0) throw Error(ErrorCode::EmptyWindow, "sign list must contain index 0");
  c.offset_ = offset;
  c.signs_ = std::move(signs);
  return c;
}

Sign Configuration::sign(std::int64_t k) const {
  if (k < k_min_ || k > k_max_)
    throw Error(ErrorCode::InsufficientConfiguration,
                "polymer " + std::to_string(k) + " outside sampled range [" + std::to_string(k_min_) +
                    ", " + std::to_string(k_max_) + "]");
  return signs_[static_cast<std::size_t>(k - k_min_)];
}

Configuration Configuration::extended(const PolymerEnsemble& ensemble, std::int64_t k_min,
                                      std::int64_t k_max) const {
  if (!random_) throw Error(ErrorCode::InsufficientConfiguration, "fixed configuration cannot be extended");
  return Configuration(ensemble, k_min, k_max, seed_, sample_, measure_);
}

Configuration sample_configuration(const PolymerEnsemble& ensemble, std::int64_t k_min, std::int64_t k_max,
                                   std::uint64_t seed, std::uint64_t sample, OriginMeasure measure) {
  return Configuration(ensemble, k_min, k_max, seed, sample, measure);
}

JacobiWindow JacobiWindow::sub(std::int64_t lo, std::int64_t hi) const {
  if (!covers(lo, hi)) throw Error(ErrorCode::InsufficientWindow, "sub-window outside window");
  JacobiWindow w;
  w.n_min = lo;
  w.n_max = hi;
  const auto b = static_cast<std::ptrdiff_t>(lo - n_min), e = static_cast<std::ptrdiff_t>(hi - n_min + 1);
  w.t_values.assign(t_values.begin() + b, t_values.begin() + e);
  w.v_values.assign(v_values.begin() + b, v_values.begin() + e);
  bool first = true;
  for (std::size_t i = 0; i < node_positions.size(); ++i) {
    if (node_positions[i] < lo || node_positions[i] > hi) continue;
    if (first) w.first_node_index = first_node_index + static_cast<std::int64_t>(i);
    first = false;
    w.node_positions.push_back(node_positions[i]);
  }
  return w;
}

JacobiWindow assemble_window(const Configuration& config, const PolymerEnsemble& ensemble,
                             std::int64_t n_min, std::int64_t n_max) {
  if (n_min > n_max) throw Error(ErrorCode::EmptyWindow, "n_min > n_max");
  JacobiWindow w;
  w.n_min = n_min;
  w.n_max = n_max;
  const std::size_t size = static_cast<std::size_t>(n_max - n_min + 1);
  w.t_values.resize(size);
  w.v_values.resize(size);

  // Start of polymer 0 is -l; walk back to the block containing n_min.
  std::int64_t k = 0;
  std::int64_t start = -static_cast<std::int64_t>(config.offset());
  while (start > n_min) {
    --k;
    start -= static_cast<std::int64_t>(ensemble.get(config.sign(k)).length());
  }
  bool first = true;
  while (start <= n_max) {
    const Polymer& p = ensemble.get(config.sign(k));
    const auto len = static_cast<std::int64_t>(p.length());
    if (start >= n_min) {
      if (first) w.first_node_index = k;
      first = false;
      w.node_positions.push_back(start);
    }
    for (std::int64_t j = 0; j < len; ++j) {
      const std::int64_t n = start + j;
      if (n < n_min || n > n_max) continue;
      w.t_values[static_cast<std::size_t>(n - n_min)] = p.hopping[static_cast<std::size_t>(j)];
      w.v_values[static_cast<std::size_t>(n - n_min)] = p.potential[static_cast<std::size_t>(j)];
    }
    start += len;
    ++k;
  }
  return w;
}

JacobiWindow make_window(std::vector<double> t, std::vector<double> v, std::int64_t n_min) {
  if (t.size() != v.size()) throw Error(ErrorCode::LengthMismatch, "t and v lengths differ");
  if (t.empty()) throw Error(ErrorCode::EmptyWindow, "empty window");
  for (double x : t)
    if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveHopping, "window hopping must be positive");
  JacobiWindow w;
  w.n_min = n_min;
  w.n_max = n_min + static_cast<std::int64_t>(t.size()) - 1;
  w.t_values = std::move(t);
  w.v_values = std::move(v);
  return w;
}

std::int64_t polymers_needed(const PolymerEnsemble& ensemble, std::int64_t n_min, std::int64_t n_max) {
  const auto lmin = static_cast<std::int64_t>(std::min(ensemble.plus.length(), ensemble.minus.length()));
  const std::int64_t reach = std::max<std::int64_t>(std::abs(n_min), std::abs(n_max)) + 1;
  return reach / lmin + 2;
}

}  // namespace polychain
