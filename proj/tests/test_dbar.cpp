#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "carrier/dbar.hpp"
#include "carrier/error.hpp"
#include "carrier/norms.hpp"
#include "oracles.hpp"

using namespace carrier;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double bump(double t) { return std::abs(t) < 1 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }
double dbump(double t) { return std::abs(t) < 1 ? bump(t) * (-2.0 * t / ((1 - t * t) * (1 - t * t))) : 0.0; }

std::vector<Axis> square_axes(double L, int perUnit) {
  int n = static_cast<int>(2 * L * perUnit) + 1;
  return grid_axes_1d(-L, L, n, -L, L, n);
}

// g = bump(|z| / R) and its dbar, (1/2) g'(rho) z / rho
GridFunction manufactured_g(const std::vector<Axis>& axes, double R) {
  return GridFunction::sample(axes, [&](auto x, auto y) { return cplx(bump(std::hypot(x[0], y[0]) / R)); },
                              Provenance::External);
}
GridFunction manufactured_eta(const std::vector<Axis>& axes, double R) {
  return GridFunction::sample(
      axes,
      [&](auto x, auto y) {
        double r = std::hypot(x[0], y[0]);
        if (r == 0) return cplx(0.0);
        return 0.5 * dbump(r / R) / R * cplx(x[0], y[0]) / r;
      },
      Provenance::External);
}

// f(z) = exp(i z / 4) F(z / 2), spectrum inside [-1/4, 3/4]
GridFunction dilated_test(const std::vector<Axis>& axes) {
  auto F = bump_transform().scaled(0.5).shifted_frequency(0.25);
  return F.on_grid(axes);
}

}  // namespace

TEST_CASE("cutoff in one variable") {
  auto c = build_cutoff(Cone::orthant(1), 0.4);
  CHECK(c.chi(v1(0.0)) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(c.chi(v1(0.5)) - 1.0) < 1e-8);
  CHECK(c.chi(v1(3.0)) == 1.0);
  CHECK(c.chi(v1(-0.41)) == 0.0);
  CHECK(std::abs(c.chi0_mass() - 1.0) < 1e-8);
  // chi' = chi0, checked by differences
  for (double x : {-0.3, -0.1, 0.05, 0.2, 0.35}) {
    double h = 1e-4;
    double fd = (c.chi(v1(x + h)) - c.chi(v1(x - h))) / (2 * h);
    CHECK(c.grad(v1(x))(0) == doctest::Approx(fd).epsilon(1e-6));
  }
  // chi0 symmetric: chi(x) + chi(-x) = 1
  for (double x : {0.1, 0.25, 0.39}) CHECK(c.chi(v1(x)) + c.chi(v1(-x)) == doctest::Approx(1.0).epsilon(1e-10));

  auto m = build_cutoff(Cone::polyhedral({v1(-1)}), 0.4);
  for (double x : {-0.3, 0.0, 0.2}) {
    CHECK(m.chi(v1(x)) == doctest::Approx(c.chi(v1(-x))).epsilon(1e-12));
    CHECK(m.grad(v1(x))(0) == doctest::Approx(-c.grad(v1(-x))(0)).epsilon(1e-12));
  }
  auto full = build_cutoff(Cone::full(1), 0.4);
  CHECK(full.chi(v1(-5)) == 1.0);
  CHECK(full.grad(v1(0.1))(0) == 0.0);

  CHECK(c.certificate(grid_axes_1d(-2, 2, 81, 0, 0, 1)).pass);
  CHECK_THROWS_AS(build_cutoff(Cone::orthant(1), 0.5), Error);
}

TEST_CASE("cutoff in two variables") {
  const double eps = 0.4;
  auto q = build_cutoff(Cone::orthant(2), eps);
  CHECK(std::abs(q.chi0_mass() - 1.0) < 1e-8);
  CHECK(q.chi(v2(2, 2)) == 1.0);
  CHECK(std::abs(q.chi(v2(0.45, 0.45)) - 1.0) < 1e-8);
  CHECK(q.chi(v2(-0.5, 1.0)) == 0.0);

  // oracle: Simpson over the part of the disk inside the quadrant
  auto oracle = [&](const Vec& x) {
    double a = std::max(0.0, x(0) - eps), b = x(0) + eps;
    if (b <= a) return 0.0;
    return oracle::simpson(
        [&](double s) {
          double c = std::max(0.0, x(1) - eps), d = x(1) + eps;
          if (d <= c) return 0.0;
          return oracle::simpson([&](double t) { return q.chi0(v2(x(0) - s, x(1) - t)); }, c, d, 1200);
        },
        a, b, 1200);
  };
  for (auto x : {v2(0.0, 0.0), v2(0.1, 0.2), v2(-0.2, 0.1), v2(0.3, -0.05), v2(1.0, 0.15)})
    CHECK(q.chi(x) == doctest::Approx(oracle(x)).epsilon(1e-6));

  // symmetric corner: a quarter of the mass
  CHECK(q.chi(v2(0, 0)) == doctest::Approx(0.25).epsilon(1e-8));

  auto c = build_cutoff(Cone::circular(v2(1, 0), std::numbers::pi / 6), eps);
  for (auto x : {v2(0.5, 0.2), v2(0.8, 0.5), v2(-0.1, 0.05), v2(0.2, -0.2), v2(1.5, 0.9)}) {
    const double h = 1e-4;
    for (int k = 0; k < 2; ++k) {
      Vec e = Vec::Zero(2);
      e(k) = h;
      double fd = (c.chi(x + e) - c.chi(x - e)) / (2 * h);
      CHECK(c.grad(x)(k) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
  // the half-angle bisector at distance > eps from the boundary
  CHECK(std::abs(c.chi(v2(3.0, 0.0)) - 1.0) < 1e-8);
  std::vector<Axis> axes{{"x1", -2, 2, 17}, {"x2", -2, 2, 17}, {"y1", 0, 0, 1}, {"y2", 0, 0, 1}};
  CHECK(c.certificate(axes).pass);
  CHECK(q.certificate(axes).pass);
}

TEST_CASE("split") {
  auto axes = grid_axes_1d(-8, 8, 129, -2, 2, 33);
  auto f = bump_transform().on_grid(axes);
  auto c = build_cutoff(Cone::orthant(1), 0.4);
  auto sp = split(f, c, Cone::orthant(1, Openness::Open));
  CHECK(sp.report.pass);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(sp.f1[i] + sp.f2[i] == f[i]);
  }
  const auto* eta = sp.report.find("eta-bound");
  REQUIRE(eta != nullptr);
  for (int N = 0; N <= 4; ++N) CHECK(std::isfinite(eta->at("C_1_" + std::to_string(N))));
  CHECK(sp.report.find("f1-bound")->pass);

  auto whole = split(f, build_cutoff(Cone::full(1), 0.4), Cone::orthant(1, Openness::Open));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(whole.f2[i] == cplx(0.0));
    CHECK(whole.data.eta[0][i] == cplx(0.0));
  }

  // constants stay put under refinement
  auto fine = split(bump_transform().on_grid(grid_axes_1d(-8, 8, 257, -2, 2, 65)), c, Cone::orthant(1, Openness::Open));
  CHECK_NOTHROW(check_split_refinement(sp.report, fine.report));
  auto inflated = fine.report;
  for (auto& ch : inflated.children)
    if (ch.name == "eta-bound")
      for (auto& [k, v] : ch.constants) v *= 10;
  CHECK_THROWS_AS(check_split_refinement(sp.report, inflated), Error);
}

TEST_CASE("consistency") {
  auto axes = grid_axes_1d(-4, 4, 65, -1, 1, 17);
  auto f = bump_transform().on_grid(axes);
  auto sp = split(f, build_cutoff(Cone::orthant(1), 0.4), Cone::orthant(1, Openness::Open));
  auto r1 = check_consistency(sp.data);
  CHECK(r1.pass);

  std::vector<Axis> ax2{{"x1", -0.25, 0.25, 65}, {"x2", -0.25, 0.25, 65}, {"y1", -0.1, 0.1, 5}, {"y2", -0.1, 0.1, 5}};
  auto f2 = bump_transform().on_grid(ax2);
  auto V = Cone::circular(v2(1, 1).normalized(), std::numbers::pi / 8);
  auto sp2 = split(f2, build_cutoff(Cone::orthant(2), 0.4), V);
  auto r2 = check_consistency(sp2.data);
  CHECK(r2.pass);
  MESSAGE("consistency residual ", r2.at("residual"), " scale ", r2.at("scale"));

  auto bad = sp2.data;
  bad.eta[0] = bad.eta[0] * 1.1;
  CHECK_FALSE(check_consistency(bad).pass);

  std::vector<Axis> thin{{"x1", -0.5, 0.5, 9}, {"x2", -0.5, 0.5, 9}, {"y1", 0, 0, 1}, {"y2", 0, 0, 1}};
  auto sp3 = split(bump_transform().on_grid(thin), build_cutoff(Cone::orthant(2), 0.4), V);
  CHECK_THROWS_AS(check_consistency(sp3.data), Error);
}

TEST_CASE("finite-difference dbar") {
  auto axes = square_axes(1, 32);
  auto z2 = GridFunction::sample(axes, [](auto x, auto y) { return cplx(x[0], y[0]) * cplx(x[0], y[0]); },
                                 Provenance::ClosedForm);
  CHECK(dbar_residual(z2, nullptr, 2, 2) < 1e-12);
  auto zb = GridFunction::sample(axes, [](auto x, auto y) { return std::conj(cplx(x[0], y[0])); }, Provenance::ClosedForm);
  auto one = GridFunction::sample(axes, [](auto, auto) { return cplx(1.0); }, Provenance::ClosedForm);
  CHECK(dbar_residual(zb, &one, 2, 2) < 1e-12);
}

TEST_CASE("Pompeiu solve: zero, disk, manufactured") {
  {
    auto axes = square_axes(1, 16);
    auto z = GridFunction::zeros(axes);
    DbarData d{{z}, 0.0};
    auto s = solve_dbar(d);
    for (auto v : s.psi.samples()) CHECK(v == cplx(0.0));
  }
  {
    // coverage fraction of the unit disk per cell
    auto axes = square_axes(2, 64);
    const double h = axes[0].spacing();
    auto eta = GridFunction::sample(
        axes,
        [&](auto x, auto y) {
          int in = 0;
          for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b) {
              double px = x[0] + (a + 0.5) / 16 * h - h / 2, py = y[0] + (b + 0.5) / 16 * h - h / 2;
              in += px * px + py * py <= 1.0;
            }
          return cplx(in / 256.0);
        },
        Provenance::External);
    auto psi = pompeiu(eta);
    double err = 0, ref = 0;
    std::vector<double> x(1), y(1);
    for (std::size_t i = 0; i < psi.size(); ++i) {
      psi.point(i, x, y);
      cplx z(x[0], y[0]);
      double r = std::abs(z);
      if (std::abs(r - 1) < 0.1) continue;
      cplx exact = r <= 1 ? std::conj(z) : 1.0 / z;
      err = std::max(err, std::abs(psi[i] - exact));
      ref = std::max(ref, std::abs(exact));
    }
    MESSAGE("disk relative error ", err / ref);
    CHECK(err / ref < 1e-3);
  }
  {
    double prev = 0;
    for (int per : {16, 32, 64}) {
      auto axes = square_axes(3, per);
      auto eta = manufactured_eta(axes, 1.5);
      auto g = manufactured_g(axes, 1.5);
      auto psi = pompeiu(eta);
      double scale = 0;
      for (auto v : eta.samples()) scale = std::max(scale, std::abs(v));
      double res = dbar_residual(psi - g, nullptr, 2, 2);
      double diff = 0;
      for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(psi[i] - g[i]));
      MESSAGE("h = 1/", per, " residual ", res, " scale ", scale, " max|psi - g| ", diff);
      if (per == 64) {
        CHECK(res < 1e-4 * scale);
        CHECK(diff < 1e-4);
      }
      if (prev > 0) CHECK(res <= prev / 2);
      prev = res;
    }
  }
  auto rect = GridFunction::zeros(grid_axes_1d(-1, 1, 33, -1, 1, 17));
  try {
    pompeiu(rect);
    FAIL("expected QuadratureSingularity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::QuadratureSingularity);
  }
  std::vector<Axis> ax2{{"x1", -1, 1, 5}, {"x2", -1, 1, 5}, {"y1", 0, 0, 1}, {"y2", 0, 0, 1}};
  CHECK_THROWS_AS(solve_dbar(DbarData{{GridFunction::zeros(ax2), GridFunction::zeros(ax2)}, 0.0}), Error);
}

TEST_CASE("decompose: degenerate chain") {
  auto axes = grid_axes_1d(-2, 2, 129, -2, 2, 129);
  auto f = dilated_test(axes);
  auto K = Cone::orthant(1), P = Cone::orthant(1, Openness::Open);
  auto r = decompose(f, K, P, P, Cone::full(1), WeightSequence::gevrey(2.0));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(r.f1p[i] == f[i]);
    CHECK(r.f2p[i] == cplx(0.0));
    CHECK(r.psi[i] == cplx(0.0));
  }
  CHECK_THROWS_AS(decompose(f, Cone::full(1), P, P, P, WeightSequence::gevrey(2.0)), Error);
}

TEST_CASE("decompose: half-line pipeline and linearity") {
  auto axes = square_axes(2, 128);
  auto f = dilated_test(axes);
  auto K = Cone::orthant(1), P = Cone::orthant(1, Openness::Open);
  auto seq = WeightSequence::gevrey(2.0);
  auto r = decompose(f, K, P, P, P, seq);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(std::abs(r.f1p[i] + r.f2p[i] - f[i]) <= 8e-16 * (std::abs(f[i]) + std::abs(r.psi[i])));
  }
  CHECK(r.residual1 < 1e-4 * r.scale);
  CHECK(r.residual2 < 1e-4 * r.scale);
  CHECK(r.report.find("norm-f1p")->pass);
  CHECK(r.report.find("norm-f2p")->pass);
  CHECK(r.report.find("weight-field")->pass);
  CHECK(r.report.find("l2-estimate")->pass);

  // linearity, without the weight (which does not enter psi)
  DecomposeOptions o;
  o.buildWeight = false;
  auto coarse = square_axes(2, 32);
  auto a = dilated_test(coarse);
  auto b = GridFunction::sample(coarse, [](auto x, auto y) { return std::exp(cplx(0, 0.5) * cplx(x[0], y[0])); },
                                Provenance::ClosedForm);
  auto ra = decompose(a, K, P, P, P, seq, o), rb = decompose(b, K, P, P, P, seq, o), rab = decompose(a + b, K, P, P, P, seq, o);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(rab.f1p[i] - ra.f1p[i] - rb.f1p[i]) < 1e-12);
    CHECK(std::abs(rab.f2p[i] - ra.f2p[i] - rb.f2p[i]) < 1e-12);
  }
}

TEST_CASE("weight field dominates eta") {
  auto axes = square_axes(2, 16);
  auto f = dilated_test(axes);
  auto U = Cone::orthant(1, Openness::Open);
  auto sp = split(f, build_cutoff(U, 0.4), U);
  Window W(build_mollifier(kDefaultWindowDelta, WeightSequence::gevrey(2.0)));
  auto env = build_envelope(U, U, W, EtaProfile(sp.data.eta));
  auto w = make_weight_field(sample_envelope(env, axes));
  CHECK(check_weight_field(w, sp.data).pass);
  auto s = solve_dbar(sp.data, w);
  CHECK(s.l2Report.pass);
  CHECK(std::isfinite(s.l2Report.at("lhs")));
  CHECK(std::isfinite(s.l2Report.at("rhs")));
}
