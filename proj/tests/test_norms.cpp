#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "carrier/error.hpp"
#include "carrier/norms.hpp"
#include "oracles.hpp"

using namespace carrier;

namespace {

Cone Rplus() { return Cone::orthant(1, Openness::Open); }

GridFunction exp_iz(std::vector<Axis> ax) {
  return GridFunction::sample(
      std::move(ax), [](auto x, auto y) { return std::exp(cplx(0, 1) * cplx(x[0], y[0])); }, Provenance::ClosedForm);
}

// bump transform at one point by Simpson quadrature of the defining integral
cplx bump_ft_ref(cplx z) {
  return oracle::simpson([&](double t) { return standard_bump(t) * std::exp(cplx(0, 1) * t * z); }, -1.0, 1.0, 4000);
}

}  // namespace

TEST_CASE("grid function basics and file round trip") {
  auto ax = grid_axes_1d(-1, 1, 5, -2, 2, 3);
  auto g = GridFunction::sample(ax, [](auto x, auto y) { return cplx(x[0], y[0]); }, Provenance::ClosedForm);
  CHECK(g.size() == 15);
  std::vector<double> x(1), y(1);
  g.point(7, x, y);
  CHECK(x[0] == 0.0);
  CHECK(y[0] == 0.0);
  CHECK_FALSE(g.on_boundary(7));
  CHECK(g.on_boundary(0));
  std::stringstream ss;
  write_grid(ss, g);
  auto h = read_grid(ss);
  CHECK(h.same_grid(g));
  CHECK(h.provenance() == Provenance::ClosedForm);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(h[i] == g[i]);
  std::stringstream bad("# gridfunction v1\nd 1\naxis x1 0 1 2\n");
  CHECK_THROWS_AS(read_grid(bad), Error);
}

TEST_CASE("sup norm of exp(iz)") {
  auto f = exp_iz(default_axes_1d());
  auto r = sup_norm_S0(f, NormParams::polynomial(Rplus(), 2.0, 0));
  // closed form: |f| weight = exp(-y - 2 max(0,-x) - 2|y|), maximal value 1 on y = 0, x >= 0
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.argmax[1] == 0.0);
  CHECK(r.argmax[0] >= 0.0);
  CHECK_FALSE(r.saturated);
  // grid oracle from the closed form
  double best = 0;
  for (int i = 0; i < 513; ++i)
    for (int j = 0; j < 513; ++j) {
      double xx = -40 + 80.0 * i / 512, yy = -10 + 20.0 * j / 512;
      best = std::max(best, std::exp(-yy - 2 * std::max(0.0, -xx) - 2 * std::abs(yy)));
    }
  CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("constant function saturates the polynomial weight") {
  auto one = GridFunction::sample(default_axes_1d(), [](auto, auto) { return cplx(1.0); }, Provenance::ClosedForm);
  auto r = sup_norm_S0(one, NormParams::polynomial(Cone::full(1), 1.0, 1));
  CHECK(r.saturated);
  CHECK(std::abs(r.argmax[0]) == 40.0);
}

TEST_CASE("bump transform: quadrature accuracy and finite unsaturated norm") {
  auto F = bump_transform();
  for (cplx z : {cplx(0, 0), cplx(3.5, -2), cplx(-17.25, 4), cplx(39, 9.5)})
    CHECK(std::abs(F(z) - bump_ft_ref(z)) <= 1e-10 * std::max(1.0, std::abs(bump_ft_ref(z))));
  auto g = F.on_grid(default_axes_1d());
  std::vector<double> x(1), y(1);
  for (std::size_t i : {std::size_t{0}, std::size_t{1000}, std::size_t{131328}, std::size_t{263168}}) {
    g.point(i, x, y);
    CHECK(std::abs(g[i] - F(cplx(x[0], y[0]))) <= 1e-12 * std::max(1.0, std::abs(g[i])));
  }
  auto r = sup_norm_S0(g, NormParams::polynomial(Rplus(), 2.0, 3));
  CHECK(std::isfinite(r.value));
  CHECK_FALSE(r.saturated);
  CHECK_FALSE(r.gridTooCoarse);
  CHECK(r.value == doctest::Approx(26.99).epsilon(0.01));
  // refinement by 2x changes the norm by < 1%
  auto g2 = F.on_grid(grid_axes_1d(-40, 40, 1025, -10, 10, 1025));
  auto r2 = sup_norm_S0(g2, NormParams::polynomial(Rplus(), 2.0, 3));
  CHECK(std::abs(r2.value - r.value) < 0.01 * r.value);
}

TEST_CASE("Gelfand-Shilov weighted norm") {
  auto f = exp_iz(default_axes_1d());
  auto r = sup_norm_S0a(f, NormParams::gevrey(Rplus(), 0.5, 1.0, 2.0));
  CHECK(r.saturated);
  auto z = GridFunction::zeros(default_axes_1d());
  auto r0 = sup_norm_S0a(z, NormParams::gevrey(Rplus(), 2.0, 1.0, 2.0));
  CHECK(r0.value == 0.0);
  // sequence-based weight agrees with the direct indicator at the argmax
  auto F = bump_transform().on_grid(grid_axes_1d(-40, 40, 161, -4, 4, 33));
  auto ps = NormParams::sequence(Rplus(), 2.0, 4.0, WeightSequence::gevrey(2.0));
  auto rs = sup_norm_S0a(F, ps);
  double xa = rs.argmax[0], ya = rs.argmax[1];
  double expect = std::abs(bump_ft_ref(cplx(xa, ya))) *
                  std::exp(log_indicator(WeightSequence::gevrey(2.0), std::abs(xa) / 4.0).logValue -
                           2.0 * std::max(0.0, -xa) - 2.0 * std::abs(ya));
  CHECK(rs.value == doctest::Approx(expect).epsilon(1e-9));
  CHECK_THROWS_AS(sup_norm_S0a(F, NormParams::polynomial(Rplus(), 2.0, 0)), Error);
}

TEST_CASE("norm properties") {
  auto ax = grid_axes_1d(-20, 20, 129, -5, 5, 65);
  auto F = bump_transform().on_grid(ax);
  auto G = exp_iz(ax) * cplx(0.3, 0.1);
  double prev = std::numeric_limits<double>::infinity();
  for (double B : {1.5, 2.0, 3.0, 5.0}) {
    double v = sup_norm_S0(F, NormParams::polynomial(Rplus(), B, 2)).value;
    CHECK(v <= prev);
    prev = v;
  }
  prev = 0;
  for (int N = 0; N <= 4; ++N) {
    double v = sup_norm_S0(F, NormParams::polynomial(Rplus(), 2.0, N)).value;
    CHECK(v >= prev);
    prev = v;
  }
  auto p = NormParams::polynomial(Rplus(), 2.0, 2);
  cplx lam(-2.5, 1.0);
  CHECK(sup_norm_S0(F * lam, p).value == doctest::Approx(std::abs(lam) * sup_norm_S0(F, p).value).epsilon(1e-14));
  CHECK(sup_norm_S0(F + G, p).value <= sup_norm_S0(F, p).value + sup_norm_S0(G, p).value);
  double l2a = l2_norm_S0(F, NormParams::polynomial(Rplus(), 2.0, 1));
  double l2b = l2_norm_S0(F, NormParams::polynomial(Rplus(), 3.0, 1));
  CHECK(std::isfinite(l2a));
  CHECK(l2b < l2a);
  CHECK(std::isfinite(l2_norm_S0a(F, NormParams::gevrey(Rplus(), 2.0, 4.0, 2.0))));
}

TEST_CASE("sigma0 normalization and approximation sequence") {
  auto s0 = sigma0();
  // integral over the real line by trapezoid over a window where the tails are negligible
  double step = 0.125, L = 600;
  cplx I = 0;
  for (double xi = -L; xi <= L; xi += step) I += s0(xi) * step;
  CHECK(std::abs(I - 1.0) < 1e-8);

  // direct Riemann sum oracle at nu = 1e4
  const int nu = 10000;
  const double Lb = std::sqrt(double(nu)), h = 2 * Lb / nu;
  for (cplx z : {cplx(0, 0), cplx(0.6, 0.3), cplx(-0.2, -0.9)}) {
    cplx s = 0;
    for (int k = 0; k < nu; ++k) s += h * s0(z - (-Lb + (k + 0.5) * h));
    CHECK(std::abs(sigma_nu(s0, nu, z) - s) < 1e-10);
    CHECK(std::abs(s - 1.0) < 1e-3);
  }

  auto ax = grid_axes_1d(-20, 20, 161, -4, 4, 33);
  auto f = bump_transform().on_grid(ax);
  auto pS0 = NormParams::polynomial(Rplus(), 6.0, 2);
  auto pS0a = NormParams::gevrey(Rplus(), 6.0, 8.0, 2.0);
  double base0 = sup_norm_S0(f, pS0).value, base1 = sup_norm_S0a(f, pS0a).value;
  double prevDiff = 1e9;
  for (int n : {100, 1000, 10000, 100000}) {
    auto r = approx_sequence(f, s0, n);
    CHECK(sup_norm_S0(r.fnu, pS0).value <= 3.0 * base0);
    CHECK(sup_norm_S0a(r.fnu, pS0a).value <= 3.0 * base1);
    CHECK(r.supDiffOnCompact < prevDiff * 1.5);
    prevDiff = r.supDiffOnCompact;
  }
  CHECK(prevDiff < 1e-3);
}
