#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "carrier/error.hpp"
#include "carrier/norms.hpp"
#include "carrier/pws.hpp"
#include "oracles.hpp"

using namespace carrier;

namespace {

const cplx I(0, 1);

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Cone halfline() { return Cone::orthant(1); }
Cone openHalfline() { return Cone::orthant(1, Openness::Open); }

cplx comb_closed(cplx z) { return 1.0 / (1.0 - std::exp(I * z)); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("transforms of atoms and combs") {
  auto d0 = CarriedFunctional::delta(v1(0), halfline());
  CHECK(laplace_transform(d0, cplx(3.0, 0.7)) == cplx(1.0));

  auto dx = CarriedFunctional::delta(v1(2.5), halfline());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-5, 5), P(0, 3);
  for (int k = 0; k < 100; ++k) {
    cplx z(U(rng), P(rng));
    cplx u = laplace_transform(dx, z);
    CHECK(std::abs(u - std::exp(I * 2.5 * z)) < 1e-14);
    CHECK(std::abs(u) <= 1.0 + 1e-15);
  }

  auto comb = CarriedFunctional::comb(v1(0), v1(1), halfline());
  cplx z(0, 0.5);
  CHECK(std::abs(laplace_transform(comb, z) - comb_closed(z)) < 1e-14);
  CHECK(std::abs(laplace_transform(comb, z)) == doctest::Approx(1.0 / (1.0 - std::exp(-0.5))).epsilon(1e-14));
  // partial sums, brute force
  cplx ps = 0;
  for (int k = 0; k < 200; ++k) ps += std::exp(I * double(k) * z);
  CHECK(std::abs(ps - comb_closed(z)) < 1e-10 * std::abs(comb_closed(z)));
  double tail = 0;
  std::array<cplx, 1> zz{z};
  CHECK(std::abs(laplace_series(comb, zz, 1e-15, &tail) - comb_closed(z)) < 1e-10 * std::abs(comb_closed(z)));
  CHECK(tail < 1e-13);

  // weighted combs: sum k^p w^k against brute force
  for (int p : {1, 2, 3, 5}) {
    cplx w = std::exp(I * cplx(0.3, 0.4));
    cplx brute = 0, wk = 1;
    for (int k = 0; k < 5000; ++k, wk *= w) brute += std::pow(double(k), p) * wk;
    CHECK(std::abs(neg_polylog(p, w) - brute) < 1e-9 * std::abs(brute));
  }

  CHECK(kind_of([&] { laplace_transform(comb, cplx(1.0, -0.1)); }) == ErrorKind::OutsideTube);
  CHECK(kind_of([&] {
          std::array<cplx, 1> w{cplx(1.0, 0.0)};
          laplace_series(comb, w);
        }) == ErrorKind::Divergence);
  CHECK(kind_of([&] { CarriedFunctional::delta(v1(-1), halfline()); }) == ErrorKind::CarrierViolation);

  // linearity
  auto sum = dx * 2.0 + comb * cplx(0, 1);
  for (cplx q : {cplx(0.2, 0.3), cplx(-1, 2)})
    CHECK(std::abs(laplace_transform(sum, q) - (2.0 * laplace_transform(dx, q) + I * laplace_transform(comb, q))) <
          1e-14);
}

TEST_CASE("derivative atoms and convolution") {
  auto dp = CarriedFunctional::derivative(v1(0), {1}, halfline());
  auto dpp = convolve(dp, dp);
  REQUIRE(dpp.terms().size() == 1);
  CHECK(dpp.terms()[0].q[0] == 2);
  cplx z(0.7, 0.2);
  CHECK(std::abs(laplace_transform(dpp, z) - (I * z) * (I * z)) < 1e-14);

  auto a = CarriedFunctional::delta(v1(1.5), halfline());
  auto b = CarriedFunctional::delta(v1(0.25), halfline());
  auto ab = convolve(a, b);
  CHECK(ab.terms()[0].x(0) == 1.75);
  CHECK(std::abs(laplace_transform(ab, z) - std::exp(I * 1.5 * z) * std::exp(I * 0.25 * z)) < 1e-14);

  auto comb = CarriedFunctional::comb(v1(0), v1(1), halfline());
  auto shifted = convolve(comb, CarriedFunctional::delta(v1(1), halfline()));
  std::vector<std::vector<cplx>> pts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> re(-3, 3), im(0.05, 2);
  for (int k = 0; k < 20; ++k) pts.push_back({cplx(re(rng), im(rng))});
  for (const auto& p : pts)
    CHECK(std::abs(laplace_transform(shifted, p[0]) - std::exp(I * p[0]) * comb_closed(p[0])) <
          1e-12 * std::abs(comb_closed(p[0])));
  CHECK(check_convolution_product(comb, CarriedFunctional::delta(v1(1), halfline()), pts).pass);
  CHECK(check_convolution_product(comb, comb, pts).pass);

  // two dimensions: quadrant carriers
  auto Q = Cone::orthant(2);
  auto c2 = CarriedFunctional::comb(v2(0, 0), v2(1, 0.5), Q);
  auto d2 = CarriedFunctional::derivative(v2(0.3, 1), {1, 2}, Q, cplx(2, -1));
  std::vector<std::vector<cplx>> p2;
  for (int k = 0; k < 20; ++k) p2.push_back({cplx(re(rng), im(rng)), cplx(re(rng), im(rng))});
  CHECK(check_convolution_product(c2, d2, p2).pass);

  // opposite half-lines have no properly convex common carrier
  auto neg = CarriedFunctional::delta(v1(-1), Cone::polyhedral({v1(-1)}));
  CHECK(kind_of([&] { convolve(a, neg); }) == ErrorKind::CarrierViolation);
}

TEST_CASE("exponential norm") {
  auto U = halfline();
  for (double eta : {0.2, 0.5, 0.9}) {
    std::array<cplx, 1> z{cplx(0, eta)};
    CHECK(exp_norm(z, U, 2.0, 0).value == doctest::Approx(1.0).epsilon(1e-14));
    auto n1 = exp_norm(z, U, 2.0, 1);
    CHECK(n1.value == doctest::Approx(std::exp(eta - 1) / eta).epsilon(1e-12));
    CHECK(n1.argmax(0) == doctest::Approx(1 / eta - 1).epsilon(1e-12));
    // brute force over x
    double best = 0;
    for (double x = -20; x <= 200; x += 1e-3)
      best = std::max(best, std::exp(-x * eta + std::log1p(std::abs(x)) - 2.0 * std::max(0.0, -x)));
    CHECK(n1.value == doctest::Approx(best).epsilon(1e-6));
  }
  std::array<cplx, 1> over{cplx(2.5, 0.3)};
  CHECK(kind_of([&] { exp_norm(over, U, 2.0, 0); }) == ErrorKind::Saturated);

  // finiteness region flips where predicted: 0 < eta < B for N >= 1
  const double B = 1.0;
  for (double eta : {-0.05, 0.0, 0.05, 0.5, 0.95, 1.05}) {
    std::array<cplx, 1> z{cplx(0.3, eta)};
    bool predicted = eta > 0 && eta < B;
    bool finite = true;
    try {
      exp_norm(z, U, B, 1);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Saturated);
      finite = false;
    }
    CHECK(finite == predicted);
  }

  // two dimensions: quadrant, eta on the diagonal
  std::array<cplx, 2> z2{cplx(0.1, 0.3), cplx(-0.2, 0.3)};
  auto n2 = exp_norm(z2, Cone::orthant(2), 2.0, 2);
  CHECK(std::isfinite(n2.value));
  // along the diagonal a = 0.3 sqrt 2: closed form of the ray maximum
  double a = 0.3 * std::sqrt(2.0);
  CHECK(n2.value >= std::exp(2 * std::log(2 / a) - (2 - a)) * (1 - 1e-12));
}

TEST_CASE("power-decay fits") {
  TubeDomain tube(openHalfline(), 1.0, halfline());
  auto one = sample_tube([](std::span<const cplx>) { return cplx(1.0); }, tube);
  auto f1 = verify_decay(one, tube);
  CHECK(f1.N == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(f1.C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.report.pass);

  auto comb = CarriedFunctional::comb(v1(0), v1(1), halfline());
  auto s = sample_tube(comb, tube);
  auto fc = verify_decay(s, tube);
  MESSAGE("comb N_fit ", fc.N);
  CHECK(std::abs(fc.N - 1.0) <= 0.05);
  CHECK(fc.report.pass);

  // exp((-i zeta)^{-1/2}): blows up like exp(eta^{-1/2}) on the imaginary axis
  auto ess = sample_tube([](std::span<const cplx> z) { return std::exp(std::pow(-I * z[0], -0.5)); }, tube);
  auto fe = verify_decay(ess, tube, 3.0);
  CHECK_FALSE(fe.report.pass);
  CHECK(fe.epsFit == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fe.epsRms < 1e-6);

  CHECK(kind_of([&] { TubeDomain(halfline(), 1.0, Cone::full(1)); }) == ErrorKind::NotCompactSubcone);
}

TEST_CASE("algebra norm") {
  auto U = openHalfline();
  auto one = [](std::span<const cplx>) { return cplx(1.0); };
  CHECK(algebra_norm(one, U, 1.0, 0) == 1.0);
  CHECK(algebra_norm(one, U, 3.0, 0) == 1.0);
  auto comb = [](std::span<const cplx> z) { return comb_closed(z[0]); };
  CHECK(algebra_norm(comb, U, 1.0, 1) == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-6));
  CHECK(std::abs(algebra_norm(comb, U, 1.0, 1) - 1.58198) < 1e-5);
  CHECK(kind_of([&] { algebra_norm(comb, U, 1.0, 0); }) == ErrorKind::Saturated);
}

TEST_CASE("boundary values") {
  auto f = [](double xi) { return standard_bump(xi - 1.0); };
  auto path = dyadic_path(1, 12);

  // u = exp(i x0 zeta): target int exp(i x0 xi) f(xi) dxi
  const double x0 = 1.3;
  auto bv = boundary_value([&](cplx z) { return std::exp(I * x0 * z); }, f, 0.0, 2.0, path);
  cplx target(oracle::simpson([&](double t) { return std::cos(x0 * t) * f(t); }, 0.0, 2.0, 4000),
              oracle::simpson([&](double t) { return std::sin(x0 * t) * f(t); }, 0.0, 2.0, 4000));
  CHECK(std::abs(bv.limit - target) < 1e-8);
  CHECK(bv.rate >= 0.9);
  MESSAGE("delta rate ", bv.rate);

  auto c = boundary_value([](cplx) { return cplx(1.0); }, f, 0.0, 2.0, path);
  for (auto p : c.pairings) CHECK(p == c.pairings.front());

  // comb against a bump supported in (pi - 1, pi + 1)
  auto g = [](double xi) { return standard_bump(xi - std::numbers::pi); };
  auto cb = boundary_value(comb_closed, g, std::numbers::pi - 1, std::numbers::pi + 1, path);
  cplx tc(oracle::simpson([&](double t) { return (comb_closed(cplx(t, 0)) * g(t)).real(); }, std::numbers::pi - 1,
                          std::numbers::pi + 1, 4000),
          oracle::simpson([&](double t) { return (comb_closed(cplx(t, 0)) * g(t)).imag(); }, std::numbers::pi - 1,
                          std::numbers::pi + 1, 4000));
  CHECK(std::abs(cb.limit - tc) < 1e-8);
  CHECK(cb.rate >= 0.9);

  // a non-integrable blowup at the floor
  auto bad = [](cplx z) { return 1.0 / std::pow(z - cplx(1.0, 0), 400); };
  CHECK(kind_of([&] { boundary_value(bad, f, 0.0, 2.0, path); }) == ErrorKind::QuadratureDivergence);
}

TEST_CASE("theta prime") {
  auto W = Cone::circular(v2(1, 1).normalized(), std::numbers::pi / 8);
  auto Up = Cone::circular(v2(1, 1).normalized(), std::numbers::pi / 6);
  auto r = check_theta_prime(Up, W);
  CHECK(r.pass);
  // exact: cos of the largest angle between the two cones
  CHECK(r.at("theta_prime") == doctest::Approx(std::cos(std::numbers::pi / 8 + std::numbers::pi / 6)).epsilon(1e-3));
  auto wide = Cone::circular(v2(1, 0), 1.2);
  CHECK_FALSE(check_theta_prime(wide, wide).pass);
}
