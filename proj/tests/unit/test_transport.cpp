#include <cmath>
#include <random>

#include "doctest.h"
#include "polychain/error.hpp"
#include "polychain/transfer.hpp"
#include "polychain/transport.hpp"

using namespace polychain;

namespace {

JacobiWindow free_chain(std::int64_t R, double t = 1.0) {
  return make_window(std::vector<double>(2 * R + 2, t), std::vector<double>(2 * R + 2, 0.0), -R);
}

JacobiWindow dimer_window(std::int64_t R, std::uint64_t sample) {
  const auto dimer = dimer_ensemble(0.5);
  const auto k = polymers_needed(dimer, -R, R + 1);
  Configuration c(dimer, -k, k, 11, sample, OriginMeasure::Site);
  return assemble_window(c, dimer, -R, R + 1);
}

}  // namespace

TEST_CASE("Green column solves the resolvent equation") {
  auto w = dimer_window(60, 0);
  const cplx z(0.45, 0.02);
  auto g = green_column(w, z, 50);
  for (std::int64_t n = -49; n <= 49; ++n) {
    const cplx lhs = -w.t(n + 1) * g.at(n + 1) + (w.v(n) - z) * g.at(n) - w.t(n) * g.at(n - 1);
    CHECK(std::abs(lhs - (n == 0 ? 1.0 : 0.0)) < 1e-10);
  }

  // Transfer matrices carry (t(n)G(n), G(n−1)) outward from site 1.
  const CVec2 start{w.t(1) * g.at(1), g.at(0)};
  for (std::int64_t n = 1; n <= 20; ++n) {
    const CVec2 pred = operator_transfer(w, z, n, 1).reconstruct() * start;
    const CVec2 got{w.t(n) * g.at(n), g.at(n - 1)};
    const double scale = norm(got);
    CHECK(std::abs(pred[0] - got[0]) < 1e-8 * scale);
    CHECK(std::abs(pred[1] - got[1]) < 1e-8 * scale);
  }
}

TEST_CASE("free resolvent") {
  auto w = free_chain(1200);
  for (cplx z : {cplx(0.3, 0.1), cplx(-1.7, 0.05), cplx(2.5, 0.1)}) {
    // Branch of 1/√(z²−4) with positive imaginary part, as for any resolvent at Im z > 0.
    cplx r = 1.0 / std::sqrt(z * z - 4.0);
    if (r.imag() < 0) r = -r;
    auto g = green_column(w, z, 1200);
    CHECK(std::abs(g.at(0) - r) < 1e-8);
  }
}

TEST_CASE("Green moments") {
  auto w = dimer_window(5000, 1);
  QuadratureSpec spec;
  spec.rel_tol = 1e-5;
  auto r = moment_green(w, std::vector<double>{0.0, 1.0, 2.0, 4.0}, 50.0, spec);
  CHECK(std::abs(r.value[0] - 1.0) < 1e-3);
  CHECK(r.capped == 0);
  // Jensen: M_q^{1/q} is non-decreasing in q.
  CHECK(std::pow(r.value[2], 0.5) >= r.value[1] * (1 - 1e-3));
  CHECK(std::pow(r.value[3], 0.25) >= std::pow(r.value[2], 0.5) * (1 - 1e-3));

  // Fixed radius against the eigen-decomposition of the same truncation.
  QuadratureSpec fixed = spec;
  fixed.fixed_radius = 200;
  const double green = moment_green(w, 2.0, 50.0, fixed);
  const double oracle = moment_spectral_oracle(w, 2.0, 50.0, 200);
  CHECK(std::abs(green - oracle) < 0.02 * oracle);

  const double early = moment_green(w, 2.0, 0.05, spec);
  CHECK(early < 0.05);
  CHECK(early > 0.0);
}

TEST_CASE("free chain is ballistic") {
  QuadratureSpec spec;
  spec.rel_tol = 1e-5;
  auto w = free_chain(20000);
  for (double T : {10.0, 40.0}) CHECK(moment_green(w, 2.0, T, spec) == doctest::Approx(free_chain_m2(T)).epsilon(1e-3));

  MomentSeries s;
  s.method = MomentMethod::SpectralOracle;
  for (double T : {10.0, 20.0, 40.0, 70.0, 100.0}) {
    const auto R = static_cast<std::int64_t>(12 * T);
    s.T.push_back(T);
    s.M.push_back(moment_spectral_oracle(free_chain(R), 2.0, T, R));
  }
  std::vector<double> lt, lm;
  for (std::size_t i = 0; i < s.T.size(); ++i) lt.push_back(std::log(s.T[i])), lm.push_back(std::log(s.M[i]));
  const double slope = (lm.back() - lm.front()) / (lt.back() - lt.front());
  CHECK(std::abs(slope - 2.0) < 0.05);
}

TEST_CASE("spectral oracle edge cases") {
  auto w = dimer_window(100, 2);
  CHECK(std::abs(moment_spectral_oracle(w, 2.0, 0.0, 50)) < 1e-12);
  CHECK_THROWS_AS(moment_spectral_oracle(w, 2.0, 50.0, 50), Error);

  auto weak = make_window(std::vector<double>(42, 1e-6), std::vector<double>(42, 0.0), -20);
  for (double T : {1.0, 100.0, 1000.0}) CHECK(moment_spectral_oracle(weak, 2.0, T, 20) < 1e-4);

  // Cesàro and exponential averages differ but stay comparable.
  const double ex = moment_spectral_oracle(w, 2.0, 10.0, 60);
  const double ce = moment_spectral_oracle(w, 2.0, 10.0, 60, true);
  CHECK(ce > 0.0);
  CHECK(ce < 10 * ex);
  CHECK(ex < 10 * ce);
}

TEST_CASE("diffusion exponent") {
  MomentSeries s;
  for (int k = 0; k < 8; ++k) {
    const double T = 10.0 * std::pow(2.0, k);
    s.T.push_back(T);
    s.M.push_back(3.0 * std::pow(T, 1.5));
  }
  auto d = diffusion_exponent(s);
  CHECK(d.beta == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(d.beta_minus == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(d.beta_plus == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(d.C == doctest::Approx(3.0).epsilon(1e-10));

  MomentSeries free;
  for (double T : {10.0, 20.0, 40.0, 80.0, 160.0, 320.0}) free.T.push_back(T), free.M.push_back(free_chain_m2(T));
  CHECK(diffusion_exponent(free).beta == doctest::Approx(1.0).epsilon(1e-12));

  MomentSeries narrow;
  for (double T : {10.0, 12.0, 14.0, 16.0, 18.0}) narrow.T.push_back(T), narrow.M.push_back(T);
  CHECK_THROWS_AS(diffusion_exponent(narrow), Error);
  MomentSeries few;
  few.T = {1, 100, 1000}, few.M = {1, 2, 3};
  CHECK_THROWS_AS(diffusion_exponent(few), Error);
}

TEST_CASE("radius cap") {
  CHECK(green_radius_cap(1.0, 1.0) == 64);
  CHECK(green_radius_cap(100.0, 1.0) == 8192);
  CHECK(green_radius_cap(100.0, 1.0) >= 4800);
  CHECK(green_radius_cap(100.0, 1.0) % 64 == 0);
}
