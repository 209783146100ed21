#include <cmath>
#include <random>

#include "doctest.h"
#include "polychain/transfer.hpp"

using namespace polychain;

namespace {

double dist(const Mat2& x, const Mat2& y) { return std::sqrt((x - y).frobenius2()); }
double dist(const CMat2& x, const CMat2& y) { return std::sqrt((x - y).frobenius2()); }

JacobiWindow random_window(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> t(0.5, 1.5), v(-1.0, 1.0);
  std::vector<double> tt(n), vv(n);
  for (int i = 0; i < n; ++i) tt[i] = t(gen), vv[i] = v(gen);
  return make_window(tt, vv, 0);
}

}  // namespace

TEST_CASE("site matrices") {
  const Mat2 j{0, -1, 1, 0};
  CHECK(dist(site_matrix(0.0, 1.0, 0.0), j) == 0.0);
  CHECK(dist(site_matrix(0.3, 1.0, 0.3), j) == 0.0);
  CHECK(dist(site_matrix(-0.3, 1.0, 0.3), Mat2{-0.6, -1, 1, 0}) < 1e-15);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int i = 0; i < 100; ++i) {
    auto m = site_matrix(u(gen) - 1.5, u(gen), u(gen) - 1.5);
    CHECK(std::abs(m.det() - 1.0) < 1e-12);
    CHECK(spectral_norm(m.adjugate()) == doctest::Approx(spectral_norm(m)).epsilon(1e-12));
  }
}

TEST_CASE("polymer matrices") {
  const double lambda = 0.5;
  const auto dimer = dimer_ensemble(lambda);
  CHECK(dist(polymer_matrix(dimer.plus, lambda), Mat2{-1, 0, 0, -1}) < 1e-15);
  CHECK(polymer_matrix(dimer.minus, lambda).trace() == doctest::Approx(4 * lambda * lambda - 2));

  // L identity-generating sites give a rotation by Lπ/2.
  for (int L = 1; L <= 7; ++L) {
    auto p = make_polymer(std::vector<double>(L, 1.0), std::vector<double>(L, 0.25));
    CHECK(dist(polymer_matrix(p, 0.25), rotation(L * M_PI / 2)) < 1e-14);
  }

  const auto cz = polymer_matrix(dimer.minus, cplx(0.3, 0.0));
  CHECK(dist(cz, to_complex(polymer_matrix(dimer.minus, 0.3))) < 1e-15);
}

TEST_CASE("polymer matrix derivative") {
  auto single = make_polymer({1}, {0.4});
  CHECK(dist(polymer_matrix_derivative(single, 0.1), Mat2{-1, 0, 0, 0}) < 1e-15);

  const auto p = make_polymer({0.7, 1.3, 1.1}, {0.2, -0.5, 0.9});
  const auto dimer = dimer_ensemble(0.5);
  for (const Polymer* q : {&dimer.plus, &dimer.minus, &p}) {
    for (double E : {-1.0, 0.5, 0.13}) {
      const double h = fd_step(E);
      Mat2 fd = polymer_matrix(*q, E + h) - polymer_matrix(*q, E - h);
      fd *= 1.0 / (2 * h);
      CHECK(dist(polymer_matrix_derivative(*q, E), fd) < 1e-8);
    }
  }
}

TEST_CASE("products over configurations") {
  const auto dimer = dimer_ensemble(0.5);
  auto c = sample_configuration(dimer, -200, 200, 3, 1, OriginMeasure::Polymer);

  auto id = product(c, dimer, 0.2, 5, 5);
  CHECK(id.log_scale == 0.0);
  CHECK(dist(id.matrix, Mat2::identity()) == 0.0);
  CHECK(dist(product(c, dimer, 0.2, 8, 7).reconstruct(), polymer_matrix(dimer.get(c.sign(7)), 0.2)) < 1e-14);

  // At E = λ every 4-block product lies in the commuting family generated by -𝟏 and T₋.
  const Mat2 tm = polymer_matrix(dimer.minus, 0.5);
  double sup = 0;
  for (std::int64_t m = -100; m < 100; ++m) {
    auto p = product(c, dimer, 0.5, m + 4, m).reconstruct();
    CHECK(std::abs(p.det() - 1.0) < 1e-12);
    CHECK(spectral_norm(commutator(p, tm)) < 1e-12);
    sup = std::max(sup, spectral_norm(p));
  }
  CHECK(sup < 10.0);

  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> idx(-100, 100);
  for (int trial = 0; trial < 50; ++trial) {
    int a = idx(gen), b = idx(gen), d = idx(gen);
    int m = std::min({a, b, d}), k = std::max({a, b, d}), j = a + b + d - m - k;
    for (double E : {0.1, 1.7}) {
      auto full = product(c, dimer, E, k, m);
      auto split = product(c, dimer, E, k, j) * product(c, dimer, E, j, m);
      CHECK(std::abs(full.log_norm() - split.log_norm()) < 1e-9 * (1 + std::abs(full.log_norm())));
      Mat2 aligned = split.matrix;
      aligned *= std::exp(split.log_scale - full.log_scale);
      CHECK(dist(aligned, full.matrix) < 1e-10 * spectral_norm(full.matrix));
      // det = 1 is only resolvable while the product is not numerically rank one.
      if (full.log_scale < 5) CHECK(std::abs(std::exp(2 * full.log_scale) * full.matrix.det() - 1.0) < 1e-10);
      CHECK(spectral_norm(full.inverse().matrix) == doctest::Approx(spectral_norm(full.matrix)).epsilon(1e-10));
      CHECK(full.inverse().log_norm() == doctest::Approx(full.log_norm()).epsilon(1e-10));
    }
  }

  // Inverse convention for k < m.
  auto fwd = product(c, dimer, 0.3, 10, 2).reconstruct();
  auto bwd = product(c, dimer, 0.3, 2, 10).reconstruct();
  CHECK(dist(fwd * bwd, Mat2::identity()) < 1e-10);
}

TEST_CASE("scaled products survive large growth") {
  // Hyperbolic energy: the product grows like e^{cN} far beyond double range.
  const auto dimer = dimer_ensemble(0.5);
  auto c = sample_configuration(dimer, 0, 20000, 8, 0, OriginMeasure::Polymer);
  auto p = product(c, dimer, 3.0, 20000, 0);
  CHECK(std::isfinite(p.log_norm()));
  CHECK(p.log_norm() > 1000.0);
  CHECK(spectral_norm(p.matrix) >= 0.5);
  CHECK(spectral_norm(p.matrix) <= 2.0);
}

TEST_CASE("operator transfer") {
  std::mt19937_64 gen(2);
  auto w = random_window(gen, 10);
  const cplx z(0.3, 0.05);
  auto id = operator_transfer(w, z, 4, 4);
  CHECK(dist(id.reconstruct(), CMat2::identity()) == 0.0);

  // Site-by-site product against a direct multiplication.
  CMat2 direct = CMat2::identity();
  for (int l = 2; l < 9; ++l) direct = site_matrix(w.v(l), w.t(l), z) * direct;
  CHECK(dist(operator_transfer(w, z, 9, 2).reconstruct(), direct) < 1e-12 * std::sqrt(direct.frobenius2()));
  CHECK(std::abs(operator_transfer(w, z, 9, 2).reconstruct().det() - 1.0) < 1e-12);

  // Real energies agree with polymer products of the same window.
  const auto dimer = dimer_ensemble(0.5);
  auto c = Configuration::from_signs({Sign::Plus, Sign::Minus, Sign::Minus, Sign::Plus}, 0);
  auto dw = assemble_window(c, dimer, 0, 7);
  CHECK(dist(operator_transfer(dw, 0.2, 8, 0).reconstruct(), product(c, dimer, 0.2, 4, 0).reconstruct()) < 1e-13);
  CHECK(dist(operator_transfer(dw, cplx(0.2, 0.0), 8, 0).reconstruct(),
             to_complex(product(c, dimer, 0.2, 4, 0).reconstruct())) < 1e-13);
}

TEST_CASE("transfer resolvent identity") {
  // 𝒯^{z+ζ}(n,k) = 𝒯^z(n,k) − ζ Σ_{l=k}^{n−1} 𝒯^{z+ζ}(n,l+1) P/t(l) 𝒯^z(l,k), P = [[1,0],[0,0]].
  std::mt19937_64 gen(5);
  auto w = random_window(gen, 10);
  const cplx z = 0.0, zeta = 0.01;
  const CMat2 P{1, 0, 0, 0};
  const int k = 0, n = 10;
  CMat2 rhs = operator_transfer(w, z, n, k).reconstruct();
  for (int l = k; l < n; ++l) {
    CMat2 term = operator_transfer(w, z + zeta, n, l + 1).reconstruct() * P * operator_transfer(w, z, l, k).reconstruct();
    rhs = rhs - (zeta / w.t(l)) * term;
  }
  CHECK(dist(operator_transfer(w, z + zeta, n, k).reconstruct(), rhs) < 1e-9);
}

TEST_CASE("perturbation bound") {
  CHECK(*perturbation_bound(1, 1, 0, 17) == 1.0);
  CHECK(*perturbation_bound(2, 1, 0.1, 4) == doctest::Approx(10.0));
  CHECK_FALSE(perturbation_bound(1, 1, 0.25, 4).has_value());

  // Measured sup over a window stays under the bound whenever it is feasible.
  std::mt19937_64 gen(6);
  auto w = random_window(gen, 12);
  const cplx z(0.1, 0.0);
  const double zeta = 1e-3;
  double C = 0, C2 = 0, D = 0;
  for (int l = 0; l < 12; ++l) D = std::max(D, 1.0 / w.t(l));
  for (int k = 0; k <= 12; ++k)
    for (int n = k; n <= 12; ++n) {
      C = std::max(C, spectral_norm(operator_transfer(w, z, n, k).reconstruct()));
      C2 = std::max(C2, spectral_norm(operator_transfer(w, z + zeta, n, k).reconstruct()));
    }
  auto bound = perturbation_bound(C, D, zeta, 12);
  REQUIRE(bound.has_value());
  CHECK(C2 <= *bound);
}
