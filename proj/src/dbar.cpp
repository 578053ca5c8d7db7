#include "carrier/dbar.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "carrier/error.hpp"
#include "carrier/mollifier.hpp"
#include "carrier/norms.hpp"

namespace carrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;

template <class F>
double gk(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

Vec to_vec(std::span<const double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

// x-part of a grid: number of x nodes and the flat x index of a node
struct XIndex {
  std::size_t nx = 1, ny = 1;
  explicit XIndex(const GridFunction& g) {
    for (int j = 0; j < g.dim(); ++j) {
      nx *= static_cast<std::size_t>(g.x_axis(j).n);
      ny *= static_cast<std::size_t>(g.y_axis(j).n);
    }
  }
  std::size_t x_of(std::size_t flat) const { return flat / ny; }
};

// centered 4th-order first derivative along one axis, zero extension outside
cplx d4(const GridFunction& u, std::size_t flat, int axis) {
  const auto& a = u.axes()[static_cast<std::size_t>(axis)];
  if (a.n < 2) return 0.0;
  const int i = u.index_along(flat, axis);
  const auto s = u.stride(axis);
  auto at = [&](int k) -> cplx {
    int j = i + k;
    if (j < 0 || j >= a.n) return 0.0;
    return u[k >= 0 ? flat + static_cast<std::size_t>(k) * s : flat - static_cast<std::size_t>(-k) * s];
  };
  return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * a.spacing());
}

bool interior(const GridFunction& u, std::size_t flat, int axis, int m) {
  const int n = u.axes()[static_cast<std::size_t>(axis)].n;
  if (n < 2) return true;
  const int i = u.index_along(flat, axis);
  return i >= m && i < n - m;
}

}  // namespace

// ---- cutoff ----

double Cutoff::chi0(const Vec& u) const {
  double r = u.norm() / eps_;
  return r < 1 ? norm_ * standard_bump(r) : 0.0;
}

double Cutoff::radial_cdf(double rho) const {
  if (rho <= 0) return 0.0;
  if (rho >= eps_) return G_.back();
  // cubic Hermite on the table, slopes from the exact derivative
  const double n = static_cast<double>(G_.size() - 1), h = eps_ / n;
  const double u = rho / h;
  const auto k = std::min(static_cast<std::size_t>(u), G_.size() - 2);
  const double t = u - static_cast<double>(k);
  auto dG = [&](std::size_t j) { double r = static_cast<double>(j) * h; return norm_ * standard_bump(r / eps_) * r; };
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * G_[k] + (t3 - 2 * t2 + t) * h * dG(k) + (-2 * t3 + 3 * t2) * G_[k + 1] +
         (t3 - t2) * h * dG(k + 1);
}

double Cutoff::line_integral(const Vec& x, const Vec& e) const {
  const double s = x.dot(e);
  const double p = (x - s * e).norm();
  if (p >= eps_) return 0.0;
  const double w = std::sqrt(eps_ * eps_ - p * p);
  const double lo = std::max(-s, -w);
  return gk([&](double u) { return norm_ * standard_bump(std::sqrt(u * u + p * p) / eps_); }, lo, w);
}

double Cutoff::chi(const Vec& x) const {
  if (x.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "cutoff point dimension");
  if (U_.is_full()) return 1.0;
  const double db = distance_to_boundary(x, U_);
  if (db >= 1.05 * eps_) return U_.in_closure(x, 0.0) ? 1.0 : 0.0;
  if (dim() == 1) {
    const double g = U_.generators().front()(0) > 0 ? 1.0 : -1.0;
    const double t = g * x(0);
    return gk([&](double u) { return norm_ * standard_bump(u / eps_); }, -eps_, std::min(t, eps_));
  }
  // polar quadrature around x; the rho-range inside U is an interval for each angle
  auto range = [&](double phi) {
    Vec d(2);
    d << std::cos(phi), std::sin(phi);
    double lo = 0, hi = eps_;
    for (const auto& h : normals_) {
      double a = h.dot(x), b = h.dot(d);
      if (b > 0)
        hi = std::min(hi, a / b);
      else if (b < 0)
        lo = std::max(lo, a / b);
      else if (a < 0)
        return std::pair{0.0, 0.0};
    }
    return std::pair{lo, std::max(lo, hi)};
  };
  std::vector<double> br{0.0, 2 * std::numbers::pi};
  auto addAngle = [&](double a) {
    a = std::fmod(a, 2 * std::numbers::pi);
    if (a < 0) a += 2 * std::numbers::pi;
    br.push_back(a);
  };
  for (const auto& h : normals_) {
    double ph = std::atan2(h(1), h(0)), a = h.dot(x);
    addAngle(ph + std::numbers::pi / 2);
    addAngle(ph - std::numbers::pi / 2);
    if (std::abs(a) <= eps_) {
      addAngle(ph + std::acos(a / eps_));
      addAngle(ph - std::acos(a / eps_));
    }
  }
  if (x.norm() > 0) {
    double px = std::atan2(x(1), x(0));
    addAngle(px);
    addAngle(px + std::numbers::pi);
  }
  std::sort(br.begin(), br.end());
  double total = 0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    if (br[k + 1] - br[k] < 1e-15) continue;
    total += gauss_kronrod<double, 21>::integrate(
        [&](double phi) {
          auto [lo, hi] = range(phi);
          return hi > lo ? radial_cdf(hi) - radial_cdf(lo) : 0.0;
        },
        br[k], br[k + 1], 10, 1e-13);
  }
  return std::clamp(total, 0.0, 1.0);
}

Vec Cutoff::grad(const Vec& x) const {
  if (x.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "cutoff point dimension");
  Vec g = Vec::Zero(dim());
  if (U_.is_full()) return g;
  if (distance_to_boundary(x, U_) >= eps_) return g;
  if (dim() == 1) {
    const double s = U_.generators().front()(0) > 0 ? 1.0 : -1.0;
    g(0) = s * chi0(x);
    return g;
  }
  for (std::size_t i = 0; i < normals_.size(); ++i)
    for (const auto& e : rays_[i]) g += normals_[i] * line_integral(x, e);
  return g;
}

double Cutoff::chi0_mass() const {
  boost::math::quadrature::tanh_sinh<double> ts;
  if (dim() == 1) return ts.integrate([&](double u) { return norm_ * standard_bump(u / eps_); }, -eps_, eps_);
  return 2 * std::numbers::pi * ts.integrate([&](double s) { return norm_ * standard_bump(s / eps_) * s; }, 0.0, eps_);
}

EstimateReport Cutoff::certificate(const std::vector<Axis>& axes) const {
  EstimateReport r;
  r.name = "cutoff";
  EstimateReport mass, range, inside, outside;
  mass.name = "unit-mass";
  range.name = "range-0-1";
  inside.name = "one-deep-inside";
  outside.name = "zero-far-outside";
  mass.observe(1e-8 - std::abs(chi0_mass() - 1.0));
  auto g = GridFunction::zeros(axes);
  const auto d = static_cast<std::size_t>(dim());
  std::vector<double> x(d), y(d);
  XIndex xi(g);
  for (std::size_t ix = 0; ix < xi.nx; ++ix) {
    g.point(ix * xi.ny, x, y);
    Vec xv = to_vec(x);
    double c = chi(xv);
    range.observe(std::min(c, 1.0 - c) + 1e-12);
    double db = distance_to_boundary(xv, U_);
    if (db > eps_) {
      if (U_.in_closure(xv, 0.0))
        inside.observe(1e-8 - std::abs(c - 1.0));
      else
        outside.observe(c == 0.0 ? 0.0 : -c);
    }
  }
  for (auto* c : {&mass, &range, &inside, &outside}) {
    c->pass = c->minMargin >= 0;
    r.add(*c);
  }
  r.set("epsilon", eps_);
  return r;
}

Cutoff build_cutoff(const Cone& U, double epsilon) {
  if (!(epsilon > 0 && epsilon < 0.5)) throw Error(ErrorKind::InvalidArgument, "epsilon must be in (0, 1/2)");
  const int d = U.dim();
  if (d > 2) throw Error(ErrorKind::UnsupportedDimension, "cutoff implemented for d <= 2");
  if (U.is_origin()) throw Error(ErrorKind::InvalidArgument, "cutoff needs a solid cone");
  Cutoff c(U, epsilon);
  if (d == 1) {
    c.norm_ = 1.0 / (epsilon * gk([](double t) { return standard_bump(t); }, -1.0, 1.0));
    if (!U.is_full() && U.generators().size() != 1)
      throw Error(ErrorKind::InvalidArgument, "cutoff needs a half-line or the full line");
    return c;
  }
  c.norm_ = 1.0 / (epsilon * epsilon * 2 * std::numbers::pi * gk([](double s) { return standard_bump(s) * s; }, 0.0, 1.0));
  constexpr int kTable = 4096;
  c.G_.assign(kTable + 1, 0.0);
  for (int j = 0; j < kTable; ++j) {
    const double a = epsilon * j / kTable, b = epsilon * (j + 1) / kTable;
    c.G_[static_cast<std::size_t>(j) + 1] =
        c.G_[static_cast<std::size_t>(j)] + gauss<double, 10>::integrate(
                                                [&](double r) { return c.norm_ * standard_bump(r / epsilon) * r; }, a, b);
  }
  if (U.is_full()) return c;
  if (auto* k = std::get_if<Circular>(&U.kind())) {
    const double phi = k->halfAngle;
    auto rot = [](const Vec& v, double a) {
      Vec w(2);
      w << std::cos(a) * v(0) - std::sin(a) * v(1), std::sin(a) * v(0) + std::cos(a) * v(1);
      return w;
    };
    c.normals_ = {rot(k->axis, phi - std::numbers::pi / 2), rot(k->axis, std::numbers::pi / 2 - phi)};
  } else {
    if (!U.full_dimensional()) throw Error(ErrorKind::InvalidArgument, "cutoff needs a solid cone");
    c.normals_ = U.facet_normals();
  }
  auto rays = boundary_directions(U, default_resolution(2));
  for (const auto& h : c.normals_) {
    std::vector<Vec> mine;
    for (const auto& e : rays)
      if (std::abs(h.dot(e)) < 1e-9) mine.push_back(e);
    c.rays_.push_back(std::move(mine));
  }
  return c;
}

// ---- split ----

double DbarData::scale() const {
  double m = 0;
  for (const auto& g : eta)
    for (const auto& v : g.samples()) m = std::max(m, std::abs(v));
  return m;
}

SplitResult split(const GridFunction& f, const Cutoff& c, const Cone& V) {
  const int d = f.dim();
  if (d != c.dim() || V.dim() != d) throw Error(ErrorKind::DimensionMismatch, "split inputs differ in dimension");
  const auto& U = c.cone();
  XIndex xi(f);
  std::vector<double> chiX(xi.nx);
  std::vector<Vec> gradX(xi.nx);
  const auto du = static_cast<std::size_t>(d);
  std::vector<double> x(du), y(du);
  for (std::size_t ix = 0; ix < xi.nx; ++ix) {
    f.point(ix * xi.ny, x, y);
    Vec xv = to_vec(x);
    chiX[ix] = c.chi(xv);
    gradX[ix] = c.grad(xv);
  }
  std::vector<cplx> s1(f.size()), s2(f.size());
  std::vector<std::vector<cplx>> se(du, std::vector<cplx>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto ix = xi.x_of(i);
    // the larger piece by multiplication, the other by an exact subtraction (Sterbenz)
    if (chiX[ix] >= 0.5) {
      s1[i] = f[i] * chiX[ix];
      s2[i] = f[i] - s1[i];
    } else {
      s2[i] = f[i] * (1.0 - chiX[ix]);
      s1[i] = f[i] - s2[i];
    }
    for (std::size_t j = 0; j < du; ++j) se[j][i] = 0.5 * f[i] * gradX[ix](static_cast<Eigen::Index>(j));
  }
  SplitResult out{f.with_samples(std::move(s1), Provenance::External), f.with_samples(std::move(s2), Provenance::External),
                  DbarData{}, EstimateReport{}};
  for (auto& v : se) out.data.eta.push_back(f.with_samples(std::move(v), Provenance::External));

  auto& r = out.report;
  r.name = "split";
  std::vector<double> fN(5);
  for (int N = 0; N <= 4; ++N) fN[static_cast<std::size_t>(N)] = sup_norm_S0(f, NormParams::polynomial(U, 1.0, N)).value;
  out.data.sourceNorm = fN[0];

  EstimateReport sum, b23, b24, b26;
  sum.name = "sum-identity";
  b23.name = "f1-bound";
  b24.name = "f2-bound";
  b26.name = "eta-bound";
  std::vector<double> c23(5, 0.0), c26(5 * du, 0.0);
  double c24 = 0;
  const double gamma = U.is_full() ? kInf : separation_constant(V, U).gamma;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.point(i, x, y);
    const double ax = norm(x), ay = norm(y);
    sum.observe(out.f1[i] + out.f2[i] == f[i] ? 0.0 : -std::abs(out.f1[i] + out.f2[i] - f[i]));
    for (int N = 0; N <= 4; ++N) {
      double w = std::pow(1 + ax, N) * std::exp(-ay);
      c23[static_cast<std::size_t>(N)] = std::max(c23[static_cast<std::size_t>(N)], std::abs(out.f1[i]) * w);
      for (std::size_t j = 0; j < du; ++j)
        c26[j * 5 + static_cast<std::size_t>(N)] =
            std::max(c26[j * 5 + static_cast<std::size_t>(N)], std::abs(out.data.eta[j][i]) * w);
    }
    if (std::isfinite(gamma) && std::abs(out.f2[i]) > 0) {
      double e = gamma * ax - 2 * distance_to_cone(to_vec(x), V) - ay;
      c24 = std::max(c24, std::abs(out.f2[i]) * std::exp(e));
    }
  }
  sum.pass = sum.minMargin >= 0;
  for (int N = 0; N <= 4; ++N) {
    double bound = fN[static_cast<std::size_t>(N)] * std::exp(c.epsilon());
    double fit = c23[static_cast<std::size_t>(N)];
    b23.observe(bound * (1 + 1e-12) - fit);
    b23.set("C_" + std::to_string(N), fit);
    b23.set("bound_" + std::to_string(N), bound);
    for (std::size_t j = 0; j < du; ++j)
      b26.set("C_" + std::to_string(j + 1) + "_" + std::to_string(N), c26[j * 5 + static_cast<std::size_t>(N)]);
  }
  b23.pass = b23.minMargin >= 0;
  b24.set("gamma", gamma);
  b24.set("C", fN[0] > 0 ? c24 / fN[0] : 0.0);
  b24.pass = std::isfinite(c24);
  b26.pass = true;
  for (const auto& [k, v] : b26.constants)
    if (!std::isfinite(v)) b26.pass = false;
  EstimateReport support;
  support.name = "eta-support";
  try {
    check_eta_support(out.data.eta, U, c.epsilon());
  } catch (const Error& e) {
    support.pass = false;
    support.note(e.what());
  }
  r.add(sum);
  r.add(b23);
  r.add(b24);
  r.add(b26);
  r.add(support);
  r.set("source_norm", fN[0]);
  r.set("eta_scale", out.data.scale());
  return out;
}

void check_split_refinement(const EstimateReport& coarse, const EstimateReport& fine, double factor) {
  for (const char* child : {"f1-bound", "f2-bound", "eta-bound"}) {
    const auto* a = coarse.find(child);
    const auto* b = fine.find(child);
    if (!a || !b) continue;
    for (const auto& [k, v] : a->constants) {
      if (k.rfind("bound_", 0) == 0) continue;
      auto w = b->get(k);
      if (!w) continue;
      if (!std::isfinite(*w) || (*w > factor * v && *w > 1e-300))
        throw Error(ErrorKind::BoundViolation, std::string(child) + " constant " + k + " grows under refinement");
    }
  }
}

// ---- finite differences ----

EstimateReport check_consistency(const DbarData& data) {
  EstimateReport r;
  r.name = "consistency";
  if (data.eta.empty()) throw Error(ErrorKind::InvalidArgument, "no eta components");
  const auto& g = data.eta.front();
  const int d = g.dim();
  if (d == 1) {
    r.note("vacuous in one variable");
    return r;
  }
  for (int k = 0; k < 2 * d; ++k)
    if (g.axes()[static_cast<std::size_t>(k)].n < 5)
      throw Error(ErrorKind::Inconclusive, "consistency check needs at least 5 nodes on every axis");
  const double scale = data.scale();
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool in = true;
    for (int k = 0; k < 2 * d; ++k) in = in && interior(g, i, k, 2);
    if (!in) continue;
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        const auto& ej = data.eta[static_cast<std::size_t>(j)];
        const auto& ek = data.eta[static_cast<std::size_t>(k)];
        cplx a = 0.5 * (d4(ej, i, k) + cplx(0, 1) * d4(ej, i, d + k));
        cplx b = 0.5 * (d4(ek, i, j) + cplx(0, 1) * d4(ek, i, d + j));
        worst = std::max(worst, std::abs(a - b));
      }
  }
  r.set("residual", worst);
  r.set("scale", scale);
  r.observe(1e-4 * scale - worst);
  r.pass = worst < 1e-4 * scale || (scale == 0 && worst == 0);
  return r;
}

GridFunction dbar_fd(const GridFunction& u) {
  if (u.dim() != 1) throw Error(ErrorKind::UnsupportedDimension, "dbar stencil implemented for d = 1");
  std::vector<cplx> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (interior(u, i, 0, 2) && interior(u, i, 1, 2)) out[i] = 0.5 * (d4(u, i, 0) + cplx(0, 1) * d4(u, i, 1));
  return u.with_samples(std::move(out), Provenance::External);
}

double dbar_residual(const GridFunction& u, const GridFunction* target, int mx, int my) {
  auto db = dbar_fd(u);
  if (target && !target->same_grid(u)) throw Error(ErrorKind::DimensionMismatch, "residual target grid");
  mx = std::max(mx, 2);
  my = std::max(my, 2);
  double worst = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!interior(u, i, 0, mx) || !interior(u, i, 1, my)) continue;
    cplx t = target ? (*target)[i] : cplx(0.0);
    worst = std::max(worst, std::abs(db[i] - t));
  }
  return worst;
}

// ---- weight field ----

WeightField make_weight_field(const EnvelopeSamples& rho) {
  auto g = GridFunction::zeros(rho.axes);
  const auto d = static_cast<std::size_t>(g.dim());
  std::vector<double> x(d), y(d);
  WeightField w{rho.axes, std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x, y);
    double z2 = 0;
    for (std::size_t j = 0; j < d; ++j) z2 += x[j] * x[j] + y[j] * y[j];
    w.varrho[i] = 2 * rho.rho[i] + (static_cast<double>(d) + 1) * std::log1p(z2);
  }
  return w;
}

EstimateReport check_weight_field(const WeightField& w, const DbarData& data) {
  EstimateReport r;
  r.name = "weight-field";
  const auto& g = data.eta.front();
  if (w.varrho.size() != g.size()) throw Error(ErrorKind::DimensionMismatch, "weight grid");
  bool finite = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(w.varrho[i])) finite = false;
    double m = -kInf;
    for (const auto& e : data.eta)
      if (std::abs(e[i]) > 0) m = std::max(m, std::log(std::abs(e[i])));
    if (m > -kInf) r.observe(w.varrho[i] - 2 * m);
  }
  r.pass = finite && r.minMargin >= -1e-9;
  if (!finite) r.note("weight not finite on the grid");
  return r;
}

// ---- Pompeiu solve ----

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuf = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuf fftw_buffer(std::size_t n) {
  return FftwBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

void fft2(fftw_complex* buf, int n0, int n1, int sign) {
  fftw_plan p = fftw_plan_dft_2d(n0, n1, buf, buf, sign, FFTW_ESTIMATE);
  fftw_execute(p);
  fftw_destroy_plan(p);
}

}  // namespace

GridFunction pompeiu(const GridFunction& eta) {
  if (eta.dim() != 1) throw Error(ErrorKind::UnsupportedDimension, "the Pompeiu solve is one-variable only");
  const auto& ax = eta.x_axis(0);
  const auto& ay = eta.y_axis(0);
  if (ax.n < 5 || ay.n < 5) throw Error(ErrorKind::QuadratureSingularity, "grid too small for the kernel");
  const double h = ax.spacing();
  if (std::abs(ay.spacing() - h) > 1e-12 * h)
    throw Error(ErrorKind::QuadratureSingularity, "square cells required for the punctured-lattice kernel");
  const int nx = ax.n, ny = ay.n, P0 = 2 * nx, P1 = 2 * ny;
  const auto tot = static_cast<std::size_t>(P0) * static_cast<std::size_t>(P1);
  auto A = fftw_buffer(tot), K = fftw_buffer(tot);
  for (std::size_t i = 0; i < tot; ++i) A[i][0] = A[i][1] = K[i][0] = K[i][1] = 0.0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      cplx v = eta[static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)];
      auto& c = A[static_cast<std::size_t>(i) * static_cast<std::size_t>(P1) + static_cast<std::size_t>(j)];
      c[0] = v.real();
      c[1] = v.imag();
    }
  for (int k = -(nx - 1); k <= nx - 1; ++k)
    for (int l = -(ny - 1); l <= ny - 1; ++l) {
      if (k == 0 && l == 0) continue;
      cplx v = 1.0 / (cplx(k, l) * h);
      auto& c = K[static_cast<std::size_t>((k + P0) % P0) * static_cast<std::size_t>(P1) +
                  static_cast<std::size_t>((l + P1) % P1)];
      c[0] = v.real();
      c[1] = v.imag();
    }
  fft2(A.get(), P0, P1, FFTW_FORWARD);
  fft2(K.get(), P0, P1, FFTW_FORWARD);
  for (std::size_t i = 0; i < tot; ++i) {
    cplx a(A[i][0], A[i][1]), k(K[i][0], K[i][1]);
    cplx p = a * k;
    A[i][0] = p.real();
    A[i][1] = p.imag();
  }
  fft2(A.get(), P0, P1, FFTW_BACKWARD);
  const double norm = h * h / (std::numbers::pi * static_cast<double>(tot));
  std::vector<cplx> out(eta.size());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const auto flat = static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j);
      const auto& c = A[static_cast<std::size_t>(i) * static_cast<std::size_t>(P1) + static_cast<std::size_t>(j)];
      // punctured sum plus the missing cell around the singularity
      cplx deta = 0.5 * (d4(eta, flat, 0) - cplx(0, 1) * d4(eta, flat, 1));
      out[flat] = cplx(c[0], c[1]) * norm - h * h / std::numbers::pi * deta;
    }
  return eta.with_samples(std::move(out), Provenance::External);
}

DbarSolution solve_dbar(const DbarData& data) {
  if (data.eta.size() != 1) throw Error(ErrorKind::UnsupportedDimension, "the dbar solve is one-variable only");
  DbarSolution s{pompeiu(data.eta.front()), EstimateReport{}};
  s.l2Report.name = "l2-estimate";
  s.l2Report.note("no weight supplied");
  return s;
}

DbarSolution solve_dbar(const DbarData& data, const WeightField& w) {
  auto s = solve_dbar(data);
  const auto& eta = data.eta.front();
  if (w.varrho.size() != eta.size()) throw Error(ErrorKind::DimensionMismatch, "weight grid");
  std::vector<double> x(1), y(1);
  double lhs = 0, rhs = 0;
  const double cell = eta.x_axis(0).spacing() * eta.y_axis(0).spacing();
  for (std::size_t i = 0; i < eta.size(); ++i) {
    eta.point(i, x, y);
    double wt = 1;
    for (int k = 0; k < 2; ++k) {
      int j = eta.index_along(i, k);
      if (j == 0 || j == eta.axes()[static_cast<std::size_t>(k)].n - 1) wt *= 0.5;
    }
    const double z2 = x[0] * x[0] + y[0] * y[0];
    const double e = std::exp(-w.varrho[i]);
    lhs += wt * 2 * std::norm(s.psi[i]) * e / ((1 + z2) * (1 + z2));
    rhs += wt * std::norm(eta[i]) * e;
  }
  lhs *= cell;
  rhs *= cell;
  auto& r = s.l2Report;
  r.notes.clear();
  r.set("lhs", lhs);
  r.set("rhs", rhs);
  r.pass = std::isfinite(lhs) && std::isfinite(rhs);
  if (lhs > rhs) r.note("flag: the Pompeiu solution exceeds the minimal-solution bound (not asserted)");
  return s;
}

// ---- pipeline ----

DecomposeResult decompose(const GridFunction& f, const Cone& K, const Cone& V, const Cone& Uprime, const Cone& U,
                          const WeightSequence& seq, const DecomposeOptions& opt) {
  if (!is_compact_subcone(K, V) || !is_compact_subcone(V, Uprime) || !is_compact_subcone(Uprime, U))
    throw Error(ErrorKind::ConeChainViolation, "cones must satisfy K << V << U' << U");
  const int d = f.dim();
  auto cut = build_cutoff(U, opt.epsilon);
  auto sp = split(f, cut, V);
  DecomposeResult out{sp.f1, sp.f2, GridFunction::zeros(f.axes(), Provenance::External), 0, 0, 0, EstimateReport{}};
  auto& r = out.report;
  r.name = "decompose";
  r.add(cut.certificate(f.axes()));
  r.add(sp.report);
  const double scale = sp.data.scale();
  out.scale = scale;
  r.set("eta_scale", scale);

  if (d != 1) {
    try {
      r.add(check_consistency(sp.data));
    } catch (const Error& e) {
      r.note(std::string("consistency skipped: ") + e.what());
    }
    r.note("dry run: the dbar solve is one-variable only");
    return out;
  }

  if (scale > 0) {
    std::optional<WeightField> wf;
    if (opt.buildWeight) {
      EtaProfile H(sp.data.eta);
      Window W(build_mollifier(opt.windowDelta, seq));
      EnvelopeOptions eo;
      eo.epsilon = opt.epsilon;
      auto env = build_envelope(U, Uprime, W, H, eo);
      wf = make_weight_field(sample_envelope(env, f.axes()));
      r.add(check_weight_field(*wf, sp.data));
    }
    auto sol = wf ? solve_dbar(sp.data, *wf) : solve_dbar(sp.data);
    out.psi = sol.psi;
    r.add(sol.l2Report);
  } else {
    r.note("eta vanishes: psi = 0");
  }

  std::vector<cplx> a(f.size()), b(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    a[i] = sp.f1[i] - out.psi[i];
    b[i] = sp.f2[i] + out.psi[i];
  }
  out.f1p = f.with_samples(std::move(a), Provenance::External);
  out.f2p = f.with_samples(std::move(b), Provenance::External);

  EstimateReport sum;
  sum.name = "pieces-sum";
  for (std::size_t i = 0; i < f.size(); ++i)
    sum.observe(8 * std::numeric_limits<double>::epsilon() * (std::abs(f[i]) + std::abs(out.psi[i])) -
                std::abs(out.f1p[i] + out.f2p[i] - f[i]));
  sum.pass = sum.minMargin >= 0;
  r.add(sum);

  const int my = static_cast<int>(std::ceil(opt.yMargin / f.y_axis(0).spacing()));
  const double ref = scale > 0 ? scale : std::max(1e-300, sup_norm_S0(f, NormParams::polynomial(Cone::full(1), 0.0 + 1.0, 0)).value);
  out.residual1 = dbar_residual(out.f1p, nullptr, opt.xMargin, my);
  out.residual2 = dbar_residual(out.f2p, nullptr, opt.xMargin, my);
  for (auto [name, v] : {std::pair{"dbar-f1p", out.residual1}, std::pair{"dbar-f2p", out.residual2}}) {
    EstimateReport c;
    c.name = name;
    c.set("residual", v);
    c.set("relative", v / ref);
    c.observe(1e-4 * ref - v);
    c.pass = v < 1e-4 * ref;
    r.add(c);
  }
  EstimateReport n1, n2;
  n1.name = "norm-f1p";
  n2.name = "norm-f2p";
  for (int N = 0; N <= 2; ++N) {
    auto s = sup_norm_S0(out.f1p, NormParams::polynomial(Cone::full(1), opt.B, N));
    n1.set("N" + std::to_string(N), s.value);
    if (!std::isfinite(s.value)) n1.pass = false;
    if (s.saturated) n1.note("N=" + std::to_string(N) + " maximum on the grid boundary");
  }
  const auto alpha = seq.gevrey_alpha();
  auto p2 = alpha ? NormParams::gevrey(V, opt.B, opt.A, *alpha) : NormParams::sequence(V, opt.B, opt.A, seq);
  auto s2 = sup_norm_S0a(out.f2p, p2);
  n2.set("value", s2.value);
  n2.pass = std::isfinite(s2.value);
  if (s2.saturated) n2.note("maximum on the grid boundary");
  r.add(n1);
  r.add(n2);
  return out;
}

}  // namespace carrier
