#pragma once

#include <cstdint>
#include <vector>

namespace polychain {

/// One building block: hopping t̂(0..L-1) and potential v̂(0..L-1).
struct Polymer {
  std::vector<double> hopping;
  std::vector<double> potential;

  std::size_t length() const { return hopping.size(); }
};

/// Validating constructor for Polymer.
Polymer make_polymer(std::vector<double> hopping, std::vector<double> potential);

enum class Sign : std::int8_t { Minus = -1, Plus = 1 };

inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

struct PolymerEnsemble {
  Polymer plus;
  Polymer minus;
  double p_plus = 0.5;

  double p_minus() const { return 1.0 - p_plus; }
  double prob(Sign s) const { return s == Sign::Plus ? p_plus : p_minus(); }
  const Polymer& get(Sign s) const { return s == Sign::Plus ? plus : minus; }
  /// ⟨L⟩ = p₊L₊ + p₋L₋.
  double mean_length() const;
  /// Average of a per-sign quantity: p₊x₊ + p₋x₋.
  template <class T>
  T average(const T& x_plus, const T& x_minus) const {
    return p_plus * x_plus + p_minus() * x_minus;
  }
};

PolymerEnsemble build_ensemble(Polymer plus, Polymer minus, double p_plus);

/// Dimer model: both hoppings 1, potentials ±λ.
PolymerEnsemble dimer_ensemble(double lambda, double p_plus = 0.5);

/// Which measure the origin polymer is drawn from.
enum class OriginMeasure {
  Site,     ///< covariant measure: ω₀ size-biased, offset l uniform in the block
  Polymer,  ///< Bernoulli product measure with l = 0
};

/// Sampled two-sided sign sequence with origin offset. Signs are a pure
/// function of (seed, sample, k), so every extension is consistent.
class Configuration {
 public:
  Configuration(const PolymerEnsemble& ensemble, std::int64_t k_min, std::int64_t k_max,
                std::uint64_t seed, std::uint64_t sample = 0,
                OriginMeasure measure = OriginMeasure::Site);

  /// Fixed signs (index 0 of `signs` is k_min); used for adversarial inputs.
  static Configuration from_signs(std::vector<Sign> signs, std::int64_t k_min, std::size_t offset = 0);

  Sign sign(std::int64_t k) const;
  std::size_t offset() const { return offset_; }
  std::int64_t k_min() const { return k_min_; }
  std::int64_t k_max() const { return k_max_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t sample() const { return sample_; }
  const std::vector<Sign>& signs() const { return signs_; }

  /// Same random sequence over a wider index range.
  Configuration extended(const PolymerEnsemble& ensemble, std::int64_t k_min, std::int64_t k_max) const;

 private:
  Configuration() = default;
  std::int64_t k_min_ = 0;
  std::int64_t k_max_ = -1;
  std::size_t offset_ = 0;
  std::uint64_t seed_ = 0;
  std::uint64_t sample_ = 0;
  OriginMeasure measure_ = OriginMeasure::Site;
  bool random_ = false;
  std::vector<Sign> signs_;
};

Configuration sample_configuration(const PolymerEnsemble& ensemble, std::int64_t k_min,
                                   std::int64_t k_max, std::uint64_t seed,
                                   std::uint64_t sample = 0,
                                   OriginMeasure measure = OriginMeasure::Site);

/// Hopping and potential over sites [n_min, n_max].
struct JacobiWindow {
  std::int64_t n_min = 0;
  std::int64_t n_max = -1;
  std::vector<double> t_values;
  std::vector<double> v_values;
  /// Sites n_k where polymer k starts, for every block starting inside the window.
  std::vector<std::int64_t> node_positions;
  /// Polymer index of node_positions[0].
  std::int64_t first_node_index = 0;

  std::size_t size() const { return t_values.size(); }
  bool covers(std::int64_t lo, std::int64_t hi) const { return lo >= n_min && hi <= n_max; }
  double t(std::int64_t n) const { return t_values[static_cast<std::size_t>(n - n_min)]; }
  double v(std::int64_t n) const { return v_values[static_cast<std::size_t>(n - n_min)]; }
  /// Same sequences restricted to [lo, hi].
  JacobiWindow sub(std::int64_t lo, std::int64_t hi) const;
};

JacobiWindow assemble_window(const Configuration& config, const PolymerEnsemble& ensemble,
                             std::int64_t n_min, std::int64_t n_max);

/// Window from explicit arrays; index 0 of the arrays is site n_min.
JacobiWindow make_window(std::vector<double> t, std::vector<double> v, std::int64_t n_min = 0);

/// Number of polymers needed on each side of the origin to cover [n_min, n_max].
std::int64_t polymers_needed(const PolymerEnsemble& ensemble, std::int64_t n_min, std::int64_t n_max);

}  // namespace polychain
