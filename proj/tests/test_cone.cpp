#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>
#include <random>

#include "carrier/cone.hpp"
#include "carrier/error.hpp"
#include "oracles.hpp"

using namespace carrier;
using std::numbers::pi;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}
double deg(double x) { return x * pi / 180.0; }

Cone random_cone(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> cnt(1, 5), coef(-3, 3);
  for (;;) {
    std::vector<Vec> g;
    int m = cnt(rng);
    for (int j = 0; j < m; ++j) {
      Vec v(d);
      for (int i = 0; i < d; ++i) v(i) = coef(rng);
      if (v.norm() > 0) g.push_back(v);
    }
    if (!g.empty()) return Cone::polyhedral(g);
  }
}

Vec random_vec(std::mt19937_64& rng, int d, double scale = 3.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

}  // namespace

TEST_CASE("distance examples") {
  Vec m2(1);
  m2 << -2.0;
  CHECK(distance_to_cone(m2, Cone::orthant(1)) == doctest::Approx(2.0).epsilon(1e-15));
  Cone c45 = Cone::circular(v2(1, 0), deg(45));
  double d = distance_to_cone(v2(0, 1), c45);
  CHECK(d == doctest::Approx(oracle::circular_distance_sampled(v2(1, 0), deg(45), v2(0, 1))).epsilon(1e-8));
  CHECK(d == doctest::Approx(std::sin(deg(45))).epsilon(1e-12));
  CHECK(distance_to_cone(v2(2, 0.5), c45) == 0.0);
  CHECK_THROWS_AS(distance_to_cone(v2(1, 1), Cone::origin(2, Openness::Open)), Error);
  CHECK_THROWS_AS(distance_to_cone(v3(1, 1, 1), c45), Error);
}

TEST_CASE("polyhedral distance matches NNLS oracle") {
  std::mt19937_64 rng(7);
  for (int d = 2; d <= 4; ++d)
    for (int t = 0; t < 40; ++t) {
      Cone C = random_cone(rng, d);
      for (int s = 0; s < 10; ++s) {
        Vec x = random_vec(rng, d);
        double ref = oracle::cone_distance(C.generators(), x);
        CHECK(distance_to_cone(x, C) == doctest::Approx(ref).epsilon(1e-9).scale(1.0));
      }
    }
}

TEST_CASE("circular distance matches ray sampling in 3d") {
  std::mt19937_64 rng(11);
  Vec e = v3(1, 2, -1).normalized();
  Cone C = Cone::circular(e, deg(25));
  for (int s = 0; s < 30; ++s) {
    Vec x = random_vec(rng, 3);
    // ray sampling over-estimates by at most |x| times the angular step
    double ref = oracle::circular_distance_sampled(e, deg(25), x, 200000);
    double d = distance_to_cone(x, C);
    CHECK(d <= ref + 1e-12);
    CHECK(d >= ref - x.norm() * deg(25) / 200000);
  }
}

TEST_CASE("distance properties: Lipschitz, homogeneity, monotonicity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lam(0.01, 50.0);
  for (int t = 0; t < 30; ++t) {
    Cone U = random_cone(rng, 3);
    std::vector<Vec> sub{U.generators().front()};
    Cone V = Cone::polyhedral(sub);
    for (int s = 0; s < 20; ++s) {
      Vec x = random_vec(rng, 3), y = random_vec(rng, 3);
      double dx = distance_to_cone(x, U), dy = distance_to_cone(y, U);
      CHECK(std::abs(dx - dy) <= (x - y).norm() + 1e-8);
      double l = lam(rng);
      CHECK(distance_to_cone(l * x, U) == doctest::Approx(l * dx).epsilon(1e-9).scale(1e-12));
      CHECK(dx <= distance_to_cone(x, V) + 1e-9);
    }
  }
  Cone wide = Cone::circular(v2(1, 0), deg(40)), narrow = Cone::circular(v2(1, 0), deg(20));
  for (int s = 0; s < 100; ++s) {
    Vec x = random_vec(rng, 2);
    CHECK(distance_to_cone(x, wide) <= distance_to_cone(x, narrow) + 1e-12);
  }
}

TEST_CASE("dual cone examples") {
  for (int d = 1; d <= 4; ++d) {
    Cone D = dual_cone(Cone::orthant(d));
    std::mt19937_64 rng(d);
    for (int s = 0; s < 200; ++s) {
      Vec x = random_vec(rng, d);
      CHECK(D.in_closure(x) == Cone::orthant(d).in_closure(x));
    }
  }
  CHECK(dual_cone(Cone::origin(3)).is_full());
  CHECK(dual_cone(Cone::full(3)).is_origin());

  Vec e = v3(1, 0, 0);
  Cone C = Cone::circular(e, deg(30), Openness::Closed);
  Cone D = dual_cone(C);
  auto& k = std::get<Circular>(D.kind());
  CHECK(k.halfAngle == doctest::Approx(deg(60)).epsilon(1e-14));
  // sampling oracle: y is in the dual iff x.y >= 0 for every sampled x in C
  auto S = sample_sphere(3, deg(2));
  std::vector<Vec> inC;
  for (const auto& x : S.points)
    if (C.in_closure(x)) inC.push_back(x);
  double maxMismatchAngle = 0;
  for (const auto& y : S.points) {
    double worst = 1;
    for (const auto& x : inC) worst = std::min(worst, x.dot(y));
    bool sampledDual = worst >= 0;
    if (sampledDual != D.in_closure(y)) {
      double beta = std::acos(std::clamp(y.dot(e), -1.0, 1.0));
      maxMismatchAngle = std::max(maxMismatchAngle, std::abs(beta - deg(60)));
    }
  }
  CHECK(maxMismatchAngle <= deg(2) + 1e-12);
}

TEST_CASE("dual of dual: membership equivalence via NNLS") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 30; ++t) {
    int d = 2 + t % 2;
    Cone K = random_cone(rng, d);
    Cone KK = dual_cone(dual_cone(K));
    auto GK = oracle::columns(K.generators());
    for (int s = 0; s < 200; ++s) {
      Vec x = random_vec(rng, d);
      bool inK = oracle::cone_distance(K.generators(), x) < 1e-9;
      bool inKK = KK.generators().empty() ? x.norm() < 1e-12 : oracle::cone_distance(KK.generators(), x) < 1e-9;
      CHECK(inK == inKK);
    }
  }
}

TEST_CASE("dual of union is intersection of duals") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Cone K1 = random_cone(rng, 3), K2 = random_cone(rng, 3);
    std::vector<Cone> parts{K1, K2};
    auto h = convex_hull(std::span<const Cone>(parts));
    CHECK(h.dualVerified);
    Cone D = dual_cone(h.hull), D1 = dual_cone(K1), D2 = dual_cone(K2);
    for (int s = 0; s < 200; ++s) {
      Vec y = random_vec(rng, 3);
      bool viaGens = true;
      for (const auto& g : K1.generators()) viaGens = viaGens && g.dot(y) >= 0;
      for (const auto& g : K2.generators()) viaGens = viaGens && g.dot(y) >= 0;
      CHECK(D.in_closure(y, 1e-12) == viaGens);
      CHECK((D1.in_closure(y, 1e-12) && D2.in_closure(y, 1e-12)) == viaGens);
    }
  }
}

TEST_CASE("compact subcone examples") {
  Vec e = v2(1, 0);
  CHECK(is_compact_subcone(Cone::ray(e), Cone::circular(e, deg(10))));
  CHECK_FALSE(is_compact_subcone(Cone::circular(e, deg(30), Openness::Closed),
                                 Cone::circular(e, deg(30), Openness::Closed)));
  CHECK(is_compact_subcone(Cone::circular(e, deg(20)), Cone::circular(e, deg(30))));
  CHECK_FALSE(is_compact_subcone(Cone::circular(e, deg(20)), Cone::circular(v2(0, 1), deg(30))));
  Vec one(1);
  one << 1.0;
  CHECK(is_compact_subcone(Cone::orthant(1), Cone::orthant(1, Openness::Open)));
  CHECK(is_compact_subcone(Cone::circular(e, deg(20)), Cone::orthant(2, Openness::Open)) == false);
  CHECK(is_compact_subcone(Cone::circular(v2(1, 1), deg(20)), Cone::orthant(2, Openness::Open)));
  CHECK_FALSE(is_compact_subcone(Cone::orthant(2), Cone::orthant(2, Openness::Open)));
  CHECK_THROWS_AS(is_compact_subcone(Cone::orthant(2), Cone::orthant(3)), Error);
}

TEST_CASE("separation constant") {
  Vec e = v2(1, 0);
  auto r = separation_constant(Cone::ray(e), Cone::circular(e, deg(30)));
  CHECK(r.gamma == doctest::Approx(0.5).epsilon(1e-9));
  auto r2 = separation_constant(Cone::circular(e, deg(20)), Cone::circular(e, deg(30)));
  CHECK(r2.gamma == doctest::Approx(std::sin(deg(10))).epsilon(1e-9));
  CHECK(std::isinf(separation_constant(Cone::ray(e), Cone::full(2)).gamma));
  CHECK_THROWS_AS(separation_constant(Cone::circular(e, deg(30)), Cone::circular(e, deg(30))), Error);

  // the bound delta_V(x) >= gamma |x| on random exterior points (3d)
  Vec e3 = v3(0, 0, 1);
  Cone V = Cone::circular(e3, deg(15)), U = Cone::circular(e3, deg(35));
  auto r3 = separation_constant(V, U);
  CHECK(r3.gamma == doctest::Approx(std::sin(deg(20))).epsilon(1e-3));
  std::mt19937_64 rng(1);
  for (int s = 0; s < 2000; ++s) {
    Vec x = random_vec(rng, 3);
    if (U.in_interior(x)) continue;
    CHECK(distance_to_cone(x, V) >= r3.gamma * x.norm() - 1e-9);
  }
}

TEST_CASE("convex hull") {
  Cone c = Cone::circular(v2(1, 0), deg(20));
  auto h = convex_hull(c);
  CHECK(h.properlyConvex);
  CHECK(h.hull.is_circular());
  auto line = convex_hull(Cone::polyhedral({v2(1, 0), v2(-1, 0)}));
  CHECK_FALSE(line.properlyConvex);
  std::vector<Cone> rays{Cone::ray(v2(1, 0)), Cone::ray(v2(0, 1))};
  auto q = convex_hull(std::span<const Cone>(rays));
  CHECK(q.properlyConvex);
  CHECK(q.dualVerified);
  for (const auto& x : sample_sphere(2).points) {
    bool quarter = x(0) >= -1e-12 && x(1) >= -1e-12;
    CHECK(q.hull.in_closure(x) == quarter);
  }
}

TEST_CASE("sphere sampling covers the sphere") {
  std::mt19937_64 rng(17);
  for (int d = 2; d <= 3; ++d) {
    auto S = sample_sphere(d, deg(5));
    for (int t = 0; t < 200; ++t) {
      Vec u = random_vec(rng, d).normalized();
      double best = pi;
      for (const auto& p : S.points) best = std::min(best, std::acos(std::clamp(u.dot(p), -1.0, 1.0)));
      CHECK(best <= S.resolution);
    }
  }
}

TEST_CASE("chordal conversion") {
  CHECK(chord_to_half_angle(half_angle_to_chord(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(half_angle_to_chord(pi / 3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("boundary directions") {
  auto b = boundary_directions(Cone::circular(v2(1, 0), deg(30)), deg(0.5));
  REQUIRE(b.size() == 2);
  for (const auto& u : b) CHECK(std::abs(u(0) - std::cos(deg(30))) < 1e-15);
  Vec one(1);
  one << 1.0;
  auto b1 = boundary_directions(Cone::orthant(1, Openness::Open), deg(0.5));
  REQUIRE(b1.size() == 1);
  CHECK(b1[0](0) == 1.0);
}
