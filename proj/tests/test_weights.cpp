#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "carrier/error.hpp"
#include "carrier/weights.hpp"

using namespace carrier;

namespace {

// brute-force sup over nu <= nmax of nu log r - alpha nu log nu
double brute_gevrey(double alpha, double r, int nmax = 10000) {
  double best = 0;
  for (int nu = 1; nu <= nmax; ++nu) best = std::max(best, nu * std::log(r) - alpha * nu * std::log(nu));
  return best;
}

}  // namespace

TEST_CASE("gevrey terms") {
  auto g2 = WeightSequence::gevrey(2.0);
  CHECK(std::exp(g2.log_term(2)) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(g2.log_term(0) == 0.0);
  auto g15 = WeightSequence::gevrey(1.5);
  CHECK(std::exp(g15.log_term(3)) == doctest::Approx(140.296).epsilon(1e-5));
  CHECK(g2.flags().normalized);
  CHECK(g2.flags().monotone);
  CHECK(g2.flags().logConvex);
  CHECK(g2.prefix_length() == 200);
  auto rb = g2.ratio_bound();
  for (int nu = 0; nu < 200; ++nu)
    CHECK(g2.log_term(nu + 1) - g2.log_term(nu) <= rb.logC + nu * rb.logH + 1e-12);
}

TEST_CASE("log indicator") {
  auto g2 = WeightSequence::gevrey(2.0);
  CHECK(log_indicator(g2, 1.0).logValue == 0.0);
  auto v = log_indicator(g2, std::exp(4.0));
  CHECK(v.logValue == doctest::Approx(12.0 - 6.0 * std::log(3.0)).epsilon(1e-13));
  CHECK(v.logValue == doctest::Approx(brute_gevrey(2.0, std::exp(4.0))).epsilon(1e-13));
  CHECK(v.maximizer == 3);
  CHECK(v.logValue == doctest::Approx(5.40833).epsilon(1e-6));
  CHECK(log_indicator(g2, 0.0).logValue == 0.0);
  for (double r : {0.5, 2.0, 37.0, 1e3, 1e5, 1e7})
    CHECK(log_indicator(g2, r).logValue == doctest::Approx(brute_gevrey(2.0, r)).epsilon(1e-12));
  // tail search beyond the prefix: r = 1e8 has maximizer near sqrt(r)/e ~ 3679
  auto big = log_indicator(g2, 1e8);
  CHECK(big.fromTail);
  CHECK(big.logValue == doctest::Approx(brute_gevrey(2.0, 1e8)).epsilon(1e-12));
  CHECK(big.logValue / std::sqrt(1e8) == doctest::Approx(2.0 / std::numbers::e).epsilon(0.02));
  CHECK_THROWS_AS(log_indicator(WeightSequence::constant_one(), 2.0), Error);
  // monotone in r
  double prev = -1;
  for (double r : r_grid(1e-3, 1e8, 16)) {
    double x = log_indicator(g2, r).logValue;
    CHECK(x >= prev);
    prev = x;
  }
}

TEST_CASE("gevrey asymptote fit over [1e2, 1e8]") {
  auto g2 = WeightSequence::gevrey(2.0);
  // log a(r) - (2/e) sqrt(r) = O(log r)
  for (double r : {1e2, 1e4, 1e6, 1e8}) {
    double x = log_indicator(g2, r).logValue;
    double main = 2.0 * std::sqrt(r) / std::numbers::e;
    CHECK(std::abs(x - main) <= 2.0 * std::log(r));
  }
  double r = 1e8;
  CHECK(std::abs(log_indicator(g2, r).logValue / (2.0 * std::sqrt(r) / std::numbers::e) - 1) < 0.02);
}

TEST_CASE("regularization") {
  auto g2 = WeightSequence::gevrey(2.0);
  auto reg = regularize(g2);
  CHECK(reg.log_term(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  for (int nu = 0; nu <= 200; ++nu) CHECK(reg.log_term(nu) <= g2.log_term(nu) + 1e-9);
  // a*_nu >= r^nu / a(r) on grid points r >= 1 (independent recomputation)
  for (double r : r_grid(1.0, 1e8, 8))
    for (int nu : {0, 1, 5, 50, 200})
      CHECK(reg.log_term(nu) >= nu * std::log(r) - brute_gevrey(2.0, r) - 1e-9);
  for (double r : r_grid(1.0, 1e4, 64)) {
    double a = log_indicator(g2, r).logValue, b = log_indicator(reg, r).logValue;
    CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
  }
  auto reg2 = regularize(reg);
  for (double r : r_grid(1.0, 1e4, 64)) {
    double a = log_indicator(reg, r).logValue, b = log_indicator(reg2, r).logValue;
    CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
  }
  CHECK_THROWS_AS(regularize(WeightSequence::constant_one()), Error);
}

TEST_CASE("nonquasianalyticity") {
  auto r2 = check_nonquasianalytic(WeightSequence::gevrey(2.0));
  CHECK(r2.verdict);
  double pi26 = std::numbers::pi * std::numbers::pi / 6;
  CHECK(std::abs(r2.partialSum - pi26) < 1e-3);
  // certified: partial + tail bound encloses the limit
  CHECK(r2.partialSum <= pi26);
  CHECK(r2.partialSum + r2.tailBound >= pi26);
  CHECK(r2.tailBound < 1e-5);
  auto r1 = check_nonquasianalytic(WeightSequence::gevrey(1.0));
  CHECK_FALSE(r1.verdict);
  CHECK(std::isinf(r1.tailBound));
  CHECK_FALSE(check_nonquasianalytic(WeightSequence::constant_one()).verdict);
  WeightSequence noTail(std::vector<double>(10, 0.0), {}, "prefix-only");
  CHECK_THROWS_AS(check_nonquasianalytic(noTail), Error);
  // series terms decrease on the prefix for a log-convex normalized sequence
  auto g = WeightSequence::gevrey(1.7);
  for (int nu = 1; nu < 200; ++nu)
    CHECK(std::exp(-g.log_term(nu + 1) / (nu + 1)) <= std::exp(-g.log_term(nu) / nu));
}

TEST_CASE("exponential bound") {
  auto g2 = WeightSequence::gevrey(2.0);
  auto rep = check_exponential_bound(g2, 0.1);
  CHECK(rep.pass);
  // independent: sup_r (2 sqrt(r)/e - 0.1 r) = 10/e^2 plus the O(log r) slack
  CHECK(rep.at("log_C_eps") <= 10.0 / std::exp(2.0) + 1.0);
  CHECK_FALSE(check_exponential_bound(WeightSequence::constant_one(), 0.1).pass);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.01, 0.03, 0.1, 0.3, 1.0}) {
    double c = check_exponential_bound(g2, eps).at("log_C_eps");
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("multiplicative convexity: product form holds, interpolated form does not") {
  auto g2 = WeightSequence::gevrey(2.0);
  std::vector<ConvexityTriple> edge{{3.0, 50.0, 0.0}, {7.0, 7.0, 0.4}, {1.0, 100.0, 0.5}};
  auto rep = check_multiplicative_convexity(g2, edge);
  CHECK(rep.find("product-form")->pass);
  // direct evaluation at r1 = 1, r2 = 100, lambda = 1/2
  double mid = brute_gevrey(2.0, 50.5), hi = brute_gevrey(2.0, 100.0);
  CHECK(mid <= 0.0 + hi);
  CHECK(mid > 0.5 * 0.0 + 0.5 * hi);
  CHECK_FALSE(rep.find("log-interpolated-form")->pass);
  auto rnd = check_multiplicative_convexity(g2, 2000, 42);
  CHECK(rnd.find("product-form")->pass);
  CHECK(rnd.find("product-form")->samples == 2000);
}

TEST_CASE("dimension splitting") {
  auto g2 = WeightSequence::gevrey(2.0);
  std::vector<double> zero{0.0, 0.0};
  auto z = check_dimension_splitting(g2, zero);
  CHECK(z.pass);
  CHECK(z.at("lhs") == 0.0);
  std::vector<double> one{5.0};
  auto o = check_dimension_splitting(g2, one);
  CHECK(o.at("lhs") == o.at("rhs"));
  std::vector<double> x{9.0, 4.0};
  auto r = check_dimension_splitting(g2, x);
  CHECK(r.pass);
  CHECK(r.at("lhs") == doctest::Approx(brute_gevrey(2, 9) + brute_gevrey(2, 4)).epsilon(1e-13));
  CHECK(r.at("rhs") == doctest::Approx(brute_gevrey(2, 4.5)).epsilon(1e-13));
  for (int d = 2; d <= 4; ++d) CHECK(check_dimension_splitting(g2, d, 500, 7).pass);
}
