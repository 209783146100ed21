#include <cmath>
#include <random>

#include "doctest.h"
#include "polychain/critical.hpp"
#include "polychain/error.hpp"
#include "polychain/transfer.hpp"

using namespace polychain;

namespace {

PolymerEnsemble two_one(double lambda) {
  return build_ensemble(make_polymer({1, 1}, {0, 0}), make_polymer({1}, {lambda}), 0.5);
}

}  // namespace

TEST_CASE("block classification") {
  CHECK(classify_block(Mat2::identity()) == BlockKind::PlusIdentity);
  CHECK(classify_block(Mat2{-1, 0, 0, -1}) == BlockKind::MinusIdentity);
  CHECK(classify_block(rotation(1.0)) == BlockKind::Elliptic);
  CHECK(classify_block(Mat2{2, 0, 0, 0.5}) == BlockKind::Hyperbolic);
  CHECK(classify_block(Mat2{1, 1, 0, 1}) == BlockKind::Hyperbolic);
}

TEST_CASE("commutator defect") {
  const auto dimer = dimer_ensemble(0.5);
  auto at = commutator_defect(dimer, 0.5);
  CHECK(at.defect == 0.0);
  CHECK(at.critical());
  CHECK(commutator_defect(dimer, 0.0).defect > 1e-3);
  CHECK(commutator_defect(dimer_ensemble(0.5, 0.1), 0.3).defect == commutator_defect(dimer, 0.3).defect);
}

TEST_CASE("critical energies") {
  auto dimer = find_critical_energies(dimer_ensemble(0.5), -2, 2);
  REQUIRE(dimer.size() == 2);
  CHECK(dimer[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(dimer[1] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(find_critical_energies(dimer_ensemble(1.5), -4, 4).empty());

  for (double lambda : {0.3, 1.0, -1.7}) {
    auto e = find_critical_energies(two_one(lambda), -3, 3);
    REQUIRE(e.size() == 1);
    CHECK(std::abs(e[0]) < 1e-12);
  }
}

TEST_CASE("frames") {
  const auto dimer = dimer_ensemble(0.5);
  auto f = build_frame(dimer, 0.5);
  CHECK(f.kind_plus == BlockKind::MinusIdentity);
  CHECK(f.eta_plus == doctest::Approx(M_PI));
  CHECK(std::cos(f.eta_minus) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.conjugation_residual() < 1e-9);
  CHECK(std::abs(f.M.det() - 1.0) < 1e-12);
  CHECK(std::abs(f.conjugate(f.T_minus).det() - 1.0) < 1e-12);

  auto g = build_frame(dimer, -0.5);
  CHECK(g.kind_minus == BlockKind::MinusIdentity);
  CHECK(g.conjugation_residual() < 1e-9);

  // Both blocks the identity: a two-site free polymer is -𝟏 at E = 0, so four sites give 𝟏.
  auto id = build_ensemble(make_polymer({1, 1, 1, 1}, {0, 0, 0, 0}), make_polymer({1, 1, 1, 1}, {0, 0, 0, 0}), 0.5);
  auto fi = build_frame(id, 0.0);
  CHECK(std::sqrt((fi.M - Mat2::identity()).frobenius2()) < 1e-14);
  CHECK(fi.eta_plus == 0.0);
  CHECK(fi.eta_minus == 0.0);

  auto two = build_frame(two_one(0.8), 0.0);
  CHECK(two.conjugation_residual() < 1e-9);

  // The projective lift of M is monotone and π-equivariant.
  double prev = f.m(-M_PI);
  for (int i = 1; i <= 400; ++i) {
    const double th = -M_PI + i * 2 * M_PI / 400;
    const double m = f.m(th);
    CHECK(m > prev);
    CHECK(f.m(th + M_PI) == doctest::Approx(m + M_PI).epsilon(1e-12));
    prev = m;
  }

  CHECK_THROWS_AS(build_frame(dimer, 0.0), Error);
}

TEST_CASE("rotation eigenvector") {
  const cplx v0(1 / std::sqrt(2.0), 0), v1(0, -1 / std::sqrt(2.0));
  for (double eta : {0.3, 2.0, -1.1}) {
    Mat2 r = rotation(eta);
    cplx w0 = r.a * v0 + r.b * v1, w1 = r.c * v0 + r.d * v1;
    cplx e = std::polar(1.0, eta);
    CHECK(std::abs(w0 - e * v0) < 1e-15);
    CHECK(std::abs(w1 - e * v1) < 1e-15);
  }
}

TEST_CASE("reflection coefficients") {
  const auto dimer = dimer_ensemble(0.5);
  auto f = build_frame(dimer, 0.5);
  auto r0 = reflection_coefficients(f, dimer, 0.0);
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    CHECK(std::abs(r0.a(s) - std::polar(1.0, f.eta(s))) < 1e-10);
    CHECK(std::abs(r0.b(s)) < 1e-10);
  }
  for (double eps : {0.01, 0.1, -0.05}) {
    auto r = reflection_coefficients(f, dimer, eps);
    for (Sign s : {Sign::Plus, Sign::Minus})
      CHECK(std::abs(std::norm(r.a(s)) - std::norm(r.b(s)) - 1.0) < 1e-10);
  }
  double prev = -1;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    auto r = reflection_coefficients(f, dimer, eps);
    const double ratio = std::abs(r.b_plus) / eps;
    CHECK(ratio < 2.0);
    if (prev > 0) CHECK(ratio == doctest::Approx(prev).epsilon(0.02));
    prev = ratio;
  }
}

TEST_CASE("first-order data") {
  const auto dimer = dimer_ensemble(0.5);
  for (double E_c : {0.5, -0.5}) {
    auto f = build_frame(dimer, E_c);
    auto exact = first_order_data(f, dimer);
    auto fd = first_order_data_fd(f, dimer, fd_step(E_c));
    for (Sign s : {Sign::Plus, Sign::Minus}) {
      CHECK(std::abs(exact.c(s) - fd.c(s)) < 1e-8);
      CHECK(std::abs(exact.d(s) - fd.d(s)) < 1e-8);
      CHECK(std::abs(exact.d(s)) == doctest::Approx(2 / std::sqrt(3.0)).epsilon(1e-12));
    }
    // b^ε − ε c e^{−iη} is second order.
    std::vector<double> xs, ys;
    for (int j = 4; j <= 12; ++j) {
      const double eps = std::ldexp(1.0, -j);
      auto r = reflection_coefficients(f, dimer, eps);
      xs.push_back(std::log(eps));
      ys.push_back(std::log(std::abs(r.b_plus - eps * exact.c_plus * std::polar(1.0, -f.eta_plus))));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size(), my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    CHECK(sxy / sxx >= 1.9);
  }
  auto f = build_frame(dimer, 0.5);
  auto d = first_order_data(f, dimer);
  CHECK(d.c_plus.real() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(d.c_plus.imag() == doctest::Approx(-1 / (2 * std::sqrt(3.0))).epsilon(1e-3));
}

TEST_CASE("critical order") {
  const auto dimer = dimer_ensemble(0.5);
  CHECK(critical_order(build_frame(dimer, 0.5), dimer) == 1);
  CHECK(critical_order(build_frame(dimer, -0.5), dimer) == 1);
  auto e = two_one(0.6);
  CHECK(critical_order(build_frame(e, 0.0), e) >= 1);

  std::vector<double> eps, b1, b2;
  for (int j = 6; j <= 16; ++j) {
    const double x = std::ldexp(1.0, -j);
    eps.push_back(x), b1.push_back(3 * x + x * x), b2.push_back(0.7 * x * x);
  }
  CHECK(classify_order(eps, b1) == 1);
  CHECK(classify_order(eps, b2) == 2);
  std::vector<double> bad;
  for (double x : eps) bad.push_back(std::pow(x, 1.5));
  CHECK_THROWS_AS(classify_order(eps, bad), Error);
}

TEST_CASE("anomaly detection") {
  const auto dimer = dimer_ensemble(0.5);
  auto f = build_frame(dimer, 0.5);
  auto a = anomaly_check(f, dimer);
  // η₊ = π, η₋ = -2π/3: ⟨e^{2iη}⟩ = (1 + e^{-4πi/3})/2, and 4η₋ ≡ 4π/3.
  CHECK(std::abs(a.mean_e2 - 0.5 * (1.0 + std::polar(1.0, -4 * M_PI / 3))) < 1e-12);
  CHECK_FALSE(a.anomalous2);
  CHECK_FALSE(a.anomalous4);

  // λ = 1/√2 gives T₋ a rotation by ±π/2 at E = λ, so e^{4iη±} = 1.
  const double l = 1 / std::sqrt(2.0);
  auto sq = dimer_ensemble(l);
  auto fs = build_frame(sq, l);
  CHECK(anomaly_check(fs, sq).anomalous4);
}
