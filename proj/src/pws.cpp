#include "carrier/pws.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cplx I(0, 1);

cplx dot(const Vec& x, std::span<const cplx> z) {
  cplx s = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) s += x(j) * z[static_cast<std::size_t>(j)];
  return s;
}

void check_dim(const CarriedFunctional& v, std::size_t n) {
  if (static_cast<int>(n) != v.dim()) throw Error(ErrorKind::DimensionMismatch, "zeta dimension differs from carrier");
}

// unit directions of the closure of C (minus the origin)
std::vector<Vec> unit_directions(const Cone& C, double resolution) {
  std::vector<Vec> out;
  if (C.dim() == 1) {
    for (double s : {1.0, -1.0}) {
      Vec u(1);
      u << s;
      if (C.in_closure(u)) out.push_back(u);
    }
    return out;
  }
  for (const auto& p : sample_sphere(C.dim(), resolution).points)
    if (C.in_closure(p)) out.push_back(p);
  return out;
}

// least squares slope and intercept
std::pair<double, double> line_fit(std::span<const double> u, std::span<const double> v) {
  const double n = static_cast<double>(u.size());
  double su = 0, sv = 0, suu = 0, suv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
    suu += u[i] * u[i];
    suv += u[i] * v[i];
  }
  const double slope = (n * suv - su * sv) / (n * suu - su * su);
  return {slope, (sv - slope * su) / n};
}

// Eulerian numbers A(p, m), rows up to 20
const std::vector<std::vector<double>>& eulerian() {
  static const auto table = [] {
    std::vector<std::vector<double>> A(21);
    A[0] = {1.0};
    for (int n = 1; n <= 20; ++n) {
      A[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n), 0.0);
      const auto& prev = A[static_cast<std::size_t>(n - 1)];
      for (std::size_t m = 0; m < static_cast<std::size_t>(n); ++m) {
        double a = m < prev.size() ? static_cast<double>(m + 1) * prev[m] : 0.0;
        double b = m >= 1 && m - 1 < prev.size() ? static_cast<double>(static_cast<std::size_t>(n) - m) * prev[m - 1] : 0.0;
        A[static_cast<std::size_t>(n)][m] = a + b;
      }
    }
    return A;
  }();
  return table;
}

}  // namespace

// ---- functionals ----

CarriedFunctional::CarriedFunctional(std::vector<Term> terms, Cone carrier)
    : terms_(std::move(terms)), carrier_(std::move(carrier)) {
  const int d = carrier_.dim();
  for (auto& t : terms_) {
    if (t.x.size() != d) throw Error(ErrorKind::DimensionMismatch, "atom point dimension");
    if (t.q.empty()) t.q.assign(static_cast<std::size_t>(d), 0);
    if (static_cast<int>(t.q.size()) != d) throw Error(ErrorKind::DimensionMismatch, "multi-index dimension");
    for (int k : t.q)
      if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative multi-index entry");
    if (!carrier_.in_closure(t.x, 1e-12)) throw Error(ErrorKind::CarrierViolation, "atom outside the carrier");
    for (const auto& c : t.combs) {
      if (c.step.size() != d) throw Error(ErrorKind::DimensionMismatch, "comb step dimension");
      if (c.step.norm() == 0) throw Error(ErrorKind::InvalidArgument, "comb step must be nonzero");
      if (c.power < 0 || c.power > 20) throw Error(ErrorKind::InvalidArgument, "comb power must be in [0, 20]");
      if (!carrier_.in_closure(c.step, 1e-12)) throw Error(ErrorKind::CarrierViolation, "comb leaves the carrier");
    }
  }
}

CarriedFunctional CarriedFunctional::delta(const Vec& x0, const Cone& carrier, cplx c) {
  return CarriedFunctional({Term{c, x0, {}, {}}}, carrier);
}

CarriedFunctional CarriedFunctional::derivative(const Vec& x0, MultiIndex q, const Cone& carrier, cplx c) {
  return CarriedFunctional({Term{c, x0, std::move(q), {}}}, carrier);
}

CarriedFunctional CarriedFunctional::comb(const Vec& start, const Vec& step, const Cone& carrier, int power, cplx c) {
  return CarriedFunctional({Term{c, start, {}, {CombFactor{step, power}}}}, carrier);
}

bool CarriedFunctional::has_combs() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const Term& t) { return !t.combs.empty(); });
}

CarriedFunctional CarriedFunctional::operator+(const CarriedFunctional& o) const {
  if (o.dim() != dim()) throw Error(ErrorKind::DimensionMismatch, "sum of functionals in different dimensions");
  std::vector<Cone> parts{carrier_, o.carrier_};
  auto h = convex_hull(parts);
  auto t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return CarriedFunctional(std::move(t), h.hull);
}

CarriedFunctional CarriedFunctional::operator*(cplx s) const {
  auto t = terms_;
  for (auto& a : t) a.c *= s;
  return CarriedFunctional(std::move(t), carrier_);
}

cplx neg_polylog(int p, cplx w) {
  if (p < 0 || p > 20) throw Error(ErrorKind::InvalidArgument, "polylog order out of range");
  if (!(std::abs(w) < 1)) throw Error(ErrorKind::OutsideTube, "comb series diverges");
  const cplx om = 1.0 - w;
  if (p == 0) return 1.0 / om;
  const auto& A = eulerian()[static_cast<std::size_t>(p)];
  cplx poly = 0;
  for (auto it = A.rbegin(); it != A.rend(); ++it) poly = poly * w + *it;
  return w * poly / std::pow(om, p + 1);
}

namespace {

cplx term_prefactor(const Term& t, std::span<const cplx> zeta) {
  cplx v = t.c * std::exp(I * dot(t.x, zeta));
  for (std::size_t j = 0; j < t.q.size(); ++j)
    for (int k = 0; k < t.q[j]; ++k) v *= I * zeta[j];
  return v;
}

}  // namespace

cplx laplace_transform(const CarriedFunctional& v, std::span<const cplx> zeta) {
  check_dim(v, zeta.size());
  cplx s = 0;
  for (const auto& t : v.terms()) {
    cplx val = term_prefactor(t, zeta);
    for (const auto& c : t.combs) {
      cplx w = std::exp(I * dot(c.step, zeta));
      if (!(std::abs(w) < 1)) throw Error(ErrorKind::OutsideTube, "Im zeta does not pair positively with a comb step");
      val *= neg_polylog(c.power, w);
    }
    s += val;
  }
  return s;
}

cplx laplace_transform(const CarriedFunctional& v, cplx zeta) {
  std::array<cplx, 1> z{zeta};
  return laplace_transform(v, z);
}

cplx laplace_series(const CarriedFunctional& v, std::span<const cplx> zeta, double tol, double* tailBound) {
  check_dim(v, zeta.size());
  cplx s = 0;
  double tail = 0;
  for (const auto& t : v.terms()) {
    cplx val = term_prefactor(t, zeta);
    for (const auto& c : t.combs) {
      const cplx w = std::exp(I * dot(c.step, zeta));
      const double r = std::abs(w);
      if (!(r < 1)) throw Error(ErrorKind::Divergence, "ratio test fails for a comb series");
      cplx part = c.power == 0 ? 1.0 : 0.0;
      cplx wk = 1.0;
      bool done = false;
      for (long k = 1; k < 100000000L; ++k) {
        wk *= w;
        const double kp = std::pow(static_cast<double>(k), c.power);
        part += kp * wk;
        const double q = std::pow(1.0 + 1.0 / static_cast<double>(k), c.power) * r;
        if (q < 1) {
          const double rest = kp * std::abs(wk) * q / (1 - q);
          if (rest <= tol * std::abs(part)) {
            tail += rest * std::abs(val);
            done = true;
            break;
          }
        }
      }
      if (!done) throw Error(ErrorKind::Divergence, "comb partial sums did not settle");
      val *= part;
    }
    s += val;
  }
  if (tailBound) *tailBound = tail;
  return s;
}

// ---- exponential norm ----

ExpNorm exp_norm(std::span<const cplx> zeta, const Cone& U, double B, int N) {
  const int d = U.dim();
  if (static_cast<int>(zeta.size()) != d) throw Error(ErrorKind::DimensionMismatch, "zeta dimension");
  if (N < 0 || !(B >= 0)) throw Error(ErrorKind::InvalidArgument, "need B >= 0 and N >= 0");
  Vec xi(d), eta(d);
  for (int j = 0; j < d; ++j) {
    xi(j) = zeta[static_cast<std::size_t>(j)].real();
    eta(j) = zeta[static_cast<std::size_t>(j)].imag();
  }
  // y-part: sup over y of -y.xi - B|y| is 0 iff |xi| <= B
  if (xi.norm() > B * (1 + 1e-15)) throw Error(ErrorKind::Saturated, "|Re zeta| exceeds B");

  // along x = t u: -t a(u) + N log(1 + t), a(u) = u.eta + B dist(u, U)
  auto slope = [&](const Vec& u) { return u.dot(eta) + B * distance_to_cone(u, U); };
  auto best_on_ray = [&](double a) {
    if (N == 0) return std::pair{0.0, 0.0};
    double t = N / a - 1.0;
    if (t <= 0) return std::pair{0.0, 0.0};
    return std::pair{N * std::log(N / a) - (N - a), t};
  };
  std::vector<Vec> dirs;
  if (d == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else if (d == 2) {
    for (int k = 0; k < 3600; ++k) {
      double phi = 2 * std::numbers::pi * k / 3600;
      Vec u(2);
      u << std::cos(phi), std::sin(phi);
      dirs.push_back(u);
    }
  } else {
    dirs = sample_sphere(d, 0.02).points;
  }
  const double aTol = 1e-13 * (1 + eta.norm() + B);
  ExpNorm out;
  double best = 0;
  Vec bestU = dirs.front();
  double bestT = 0;
  for (const auto& u : dirs) {
    double a = slope(u);
    if (a < -aTol || (N > 0 && a <= aTol))
      throw Error(ErrorKind::Saturated, "exponent grows along a direction of x");
    if (a <= aTol) continue;
    auto [g, t] = best_on_ray(a);
    if (g > best) {
      best = g;
      bestU = u;
      bestT = t;
    }
  }
  if (d == 2 && N > 0 && best > 0) {
    // refine the angle around the best sample
    const double phi0 = std::atan2(bestU(1), bestU(0)), dphi = 2 * std::numbers::pi / 3600;
    auto negg = [&](double phi) {
      Vec u(2);
      u << std::cos(phi), std::sin(phi);
      double a = slope(u);
      if (a <= aTol) return kInf;
      return -best_on_ray(a).first;
    };
    auto r = boost::math::tools::brent_find_minima(negg, phi0 - dphi, phi0 + dphi, 50);
    if (-r.second > best) {
      best = -r.second;
      bestU << std::cos(r.first), std::sin(r.first);
      bestT = best_on_ray(slope(bestU)).second;
    }
  }
  out.value = std::exp(best);
  out.argmax = bestT * bestU;
  return out;
}

// ---- tube sampling and fits ----

TubeDomain::TubeDomain(Cone v, double r, Cone w) : V(std::move(v)), R(r), W(std::move(w)) {
  if (!(R > 0)) throw Error(ErrorKind::InvalidArgument, "tube radius must be positive");
  if (V.dim() != W.dim()) throw Error(ErrorKind::DimensionMismatch, "tube cones differ in dimension");
  if (!is_compact_subcone(W, V)) throw Error(ErrorKind::NotCompactSubcone, "W must be a compact subcone of V");
}

AnalyticSample sample_tube(const AnalyticFn& u, const TubeDomain& tube, double etaFloor, int nEta, int nXi,
                           Provenance p) {
  const int d = tube.V.dim();
  if (!(etaFloor > 0 && etaFloor <= tube.R)) throw Error(ErrorKind::InvalidArgument, "eta floor must be in (0, R]");
  if (nEta < 2 || nXi < 1) throw Error(ErrorKind::InvalidArgument, "sample counts too small");
  AnalyticSample s;
  s.dim = d;
  s.provenance = p;
  auto dirs = unit_directions(tube.W, d == 2 ? 0.05 : default_resolution(d));
  if (dirs.empty()) throw Error(ErrorKind::InvalidArgument, "no sampled direction inside W");
  std::vector<cplx> z(static_cast<std::size_t>(d));
  for (int k = 0; k < nEta; ++k) {
    const double t = etaFloor * std::pow(tube.R / etaFloor, static_cast<double>(k) / (nEta - 1));
    const double rho = std::sqrt(std::max(0.0, tube.R * tube.R - t * t));
    for (const auto& w : dirs) {
      // real parts on a uniform grid of the ball of radius rho (d = 1: segment)
      std::vector<Vec> reals;
      if (d == 1 || nXi == 1) {
        for (int i = 0; i < nXi; ++i) {
          Vec x = Vec::Zero(d);
          x(0) = nXi == 1 ? 0.0 : -rho + 2 * rho * i / (nXi - 1);
          reals.push_back(x);
        }
      } else {
        const int m = std::max(2, static_cast<int>(std::lround(std::sqrt(static_cast<double>(nXi)))));
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            Vec x = Vec::Zero(d);
            x(0) = -rho + 2 * rho * i / (m - 1);
            x(1) = -rho + 2 * rho * j / (m - 1);
            if (x.norm() <= rho * (1 + 1e-12)) reals.push_back(x);
          }
      }
      for (const auto& x : reals) {
        for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(j)] = cplx(x(j), t * w(j));
        s.points.insert(s.points.end(), z.begin(), z.end());
        s.values.push_back(u(z));
      }
    }
  }
  return s;
}

AnalyticSample sample_tube(const CarriedFunctional& v, const TubeDomain& tube, double etaFloor, int nEta, int nXi) {
  return sample_tube([&](std::span<const cplx> z) { return laplace_transform(v, z); }, tube, etaFloor, nEta, nXi,
                     Provenance::TransformOfBump);
}

DecayFit verify_decay(const AnalyticSample& u, const TubeDomain& tube, double alpha, double slopeTol) {
  if (u.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty sample");
  if (!(alpha > 1)) throw Error(ErrorKind::InvalidArgument, "alpha must exceed 1");
  DecayFit out;
  auto& r = out.report;
  r.name = "power-decay";
  std::map<double, double> level;  // |Im zeta| -> max log|u|
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto z = u.point(i);
    double t = 0;
    for (auto c : z) t += c.imag() * c.imag();
    t = std::sqrt(t);
    if (std::abs(z[0]) > tube.R * (1 + 1e-12) && u.dim == 1) continue;
    const double key = std::round(std::log(t) * 1e9) / 1e9;
    const double v = std::log(std::abs(u.values[i]));
    auto it = level.find(key);
    if (it == level.end())
      level.emplace(key, v);
    else
      it->second = std::max(it->second, v);
  }
  std::vector<double> x, y, p;
  for (auto [k, v] : level) {
    if (!std::isfinite(v)) continue;
    x.push_back(-k);  // -log |Im zeta|
    y.push_back(v);
    p.push_back(std::exp(-k / (alpha - 1)));  // |Im zeta|^{-1/(alpha-1)}
  }
  if (x.size() < 4) {
    r.pass = false;
    r.note("too few finite levels for a fit");
    return out;
  }
  auto [N, logC] = line_fit(x, y);
  double cEnv = -kInf, rms = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cEnv = std::max(cEnv, y[i] - N * x[i]);
    rms += std::pow(y[i] - (logC + N * x[i]), 2);
  }
  rms = std::sqrt(rms / static_cast<double>(x.size()));
  out.N = N;
  out.C = std::exp(cEnv);
  // slope over the smallest quarter of |Im zeta|
  const std::size_t q = std::max<std::size_t>(3, x.size() / 4);
  // levels are sorted by log|Im zeta| ascending, so the low end sits at the front
  std::vector<double> xl(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(q));
  std::vector<double> yl(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(q));
  const double lowSlope = line_fit(xl, yl).first;
  auto [eps, a0] = line_fit(p, y);
  double rms33 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) rms33 += std::pow(y[i] - (a0 + eps * p[i]), 2);
  rms33 = std::sqrt(rms33 / static_cast<double>(p.size()));
  out.epsFit = eps;
  out.epsRms = rms33;
  r.set("N_fit", N);
  r.set("C_fit", out.C);
  r.set("power_rms", rms);
  r.set("low_slope", lowSlope);
  r.set("residual_slope", lowSlope - N);
  r.set("eps_fit", eps);
  r.set("eps_rms", rms33);
  r.set("eta_floor", std::exp(-x.front()));
  r.observe(slopeTol - (lowSlope - N));
  r.pass = std::isfinite(N) && lowSlope - N <= slopeTol;
  if (!r.pass) r.note("log|u| grows faster than the fitted power near the floor");
  return out;
}

double algebra_norm(const AnalyticFn& u, const Cone& U, double R, int N, double etaFloor, int perOctave, int nXi) {
  const int d = U.dim();
  if (d != 1 && d != 2) throw Error(ErrorKind::UnsupportedDimension, "algebra norm sampled for d <= 2");
  if (!(R > 0 && etaFloor > 0 && etaFloor < R)) throw Error(ErrorKind::InvalidArgument, "need 0 < floor < R");
  auto dirs = unit_directions(U, 0.05);
  std::vector<Vec> inner;
  for (const auto& w : dirs)
    if (U.in_interior(w)) inner.push_back(w);
  if (inner.empty()) throw Error(ErrorKind::InvalidArgument, "no sampled direction inside U");
  std::vector<cplx> z(static_cast<std::size_t>(d));
  auto sup_to = [&](double floor) {
    double best = 0;
    for (int k = 0;; ++k) {
      double t = R * std::pow(2.0, -static_cast<double>(k) / perOctave);
      if (t < floor * (1 - 1e-12)) break;
      const double rho = std::sqrt(std::max(0.0, R * R - t * t));
      for (const auto& w : inner)
        for (int i = 0; i < nXi; ++i) {
          const double xr = nXi == 1 ? 0.0 : -rho + 2 * rho * i / (nXi - 1);
          // real part along the first axis only for d = 2
          for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(j)] = cplx(j == 0 ? xr : 0.0, t * w(j));
          best = std::max(best, std::pow(t, N) * std::abs(u(z)));
        }
    }
    return best;
  };
  const double s0 = sup_to(etaFloor), s1 = sup_to(etaFloor / 2), s2 = sup_to(etaFloor / 4);
  const double grow = 1e-3;
  if (!std::isfinite(s2) || (s1 > s0 * (1 + grow) && s2 > s1 * (1 + grow)))
    throw Error(ErrorKind::Saturated, "sup keeps growing as the floor decreases; N too small");
  return s0;
}

// ---- convolution ----

CarriedFunctional convolve(const CarriedFunctional& a, const CarriedFunctional& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimensionMismatch, "convolution of functionals in different dimensions");
  std::vector<Cone> parts{a.carrier(), b.carrier()};
  auto h = convex_hull(parts);
  if (!h.properlyConvex) throw Error(ErrorKind::CarrierViolation, "no common properly convex carrier");
  std::vector<Term> out;
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      Term c{s.c * t.c, s.x + t.x, s.q, s.combs};
      for (std::size_t j = 0; j < c.q.size(); ++j) c.q[j] += t.q[j];
      c.combs.insert(c.combs.end(), t.combs.begin(), t.combs.end());
      out.push_back(std::move(c));
    }
  return CarriedFunctional(std::move(out), h.hull);
}

EstimateReport check_convolution_product(const CarriedFunctional& a, const CarriedFunctional& b,
                                         std::span<const std::vector<cplx>> points, double tol) {
  EstimateReport r;
  r.name = "convolution-product";
  auto ab = convolve(a, b);
  double worst = 0;
  for (const auto& z : points) {
    cplx lhs = laplace_transform(ab, z);
    cplx rhs = laplace_transform(a, z) * laplace_transform(b, z);
    double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    worst = std::max(worst, rel);
    r.observe(tol - rel);
  }
  r.set("max_relative_error", worst);
  r.pass = r.minMargin >= 0;
  return r;
}

// ---- boundary values ----

std::vector<double> dyadic_path(int mFirst, int mLast) {
  std::vector<double> e;
  for (int m = mFirst; m <= mLast; ++m) e.push_back(std::ldexp(1.0, -m));
  return e;
}

BoundaryValue boundary_value(const std::function<cplx(cplx)>& u, const std::function<double(double)>& f, double a,
                             double b, std::span<const double> etaPath) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "empty pairing interval");
  if (etaPath.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least three path points");
  for (std::size_t i = 1; i < etaPath.size(); ++i)
    if (!(etaPath[i] < etaPath[i - 1] && etaPath[i] > 0))
      throw Error(ErrorKind::InvalidArgument, "eta path must decrease to zero");
  using boost::math::quadrature::gauss_kronrod;
  BoundaryValue out;
  auto& r = out.report;
  r.name = "boundary-value";
  for (double eta : etaPath) {
    auto re = [&](double xi) { return (u(cplx(xi, eta)) * f(xi)).real(); };
    auto im = [&](double xi) { return (u(cplx(xi, eta)) * f(xi)).imag(); };
    cplx p(gauss_kronrod<double, 61>::integrate(re, a, b, 15, 1e-13),
           gauss_kronrod<double, 61>::integrate(im, a, b, 15, 1e-13));
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
      throw Error(ErrorKind::QuadratureDivergence, "pairing not finite at eta = " + std::to_string(eta));
    out.eta.push_back(eta);
    out.pairings.push_back(p);
  }
  // Neville extrapolation to eta = 0 from the smallest four path points
  const std::size_t n = out.eta.size(), m = std::min<std::size_t>(4, n);
  std::vector<double> e(out.eta.end() - static_cast<std::ptrdiff_t>(m), out.eta.end());
  std::vector<cplx> P(out.pairings.end() - static_cast<std::ptrdiff_t>(m), out.pairings.end());
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t i = 0; i + k < m; ++i) P[i] = (e[i + k] * P[i] - e[i] * P[i + 1]) / (e[i + k] - e[i]);
  out.limit = P[0];
  std::vector<double> lx, ly;
  const double scale = std::max(std::abs(out.limit), 1e-300);
  for (std::size_t i = 0; i < n; ++i) {
    double err = std::abs(out.pairings[i] - out.limit);
    if (err > 1e-11 * scale) {
      lx.push_back(std::log(out.eta[i]));
      ly.push_back(std::log(err));
    }
  }
  if (lx.size() >= 3) {
    out.rate = line_fit(lx, ly).first;
  } else {
    out.rate = kInf;
    r.note("pairings independent of eta to rounding");
  }
  r.set("limit_re", out.limit.real());
  r.set("limit_im", out.limit.imag());
  r.set("rate", out.rate);
  r.set("eta_floor", out.eta.back());
  r.pass = std::isfinite(out.limit.real()) && std::isfinite(out.limit.imag());
  return out;
}

EstimateReport check_theta_prime(const Cone& Uprime, const Cone& W, double resolution) {
  if (Uprime.dim() != W.dim()) throw Error(ErrorKind::DimensionMismatch, "cones differ in dimension");
  const double res = resolution > 0 ? resolution : default_resolution(W.dim());
  auto xs = unit_directions(Uprime, res), es = unit_directions(W, res);
  EstimateReport r;
  r.name = "theta-prime";
  double theta = kInf;
  for (const auto& x : xs)
    for (const auto& e : es) theta = std::min(theta, x.dot(e));
  r.set("theta_prime", theta);
  r.set("pairs", static_cast<double>(xs.size() * es.size()));
  r.observe(theta);
  r.pass = !xs.empty() && !es.empty() && theta > 0;
  return r;
}

}  // namespace carrier
