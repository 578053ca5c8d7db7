#include "carrier/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_axes(const std::vector<Axis>& a, const std::vector<Axis>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].n != b[k].n || a[k].lo != b[k].lo || a[k].hi != b[k].hi) return false;
  return true;
}

void check_eta_grids(std::span<const GridFunction> eta) {
  if (eta.empty()) throw Error(ErrorKind::InvalidArgument, "no eta components");
  for (const auto& g : eta)
    if (!g.same_grid(eta.front())) throw Error(ErrorKind::DimensionMismatch, "eta components on different grids");
}

double max_log_abs(std::span<const GridFunction> eta, std::size_t i) {
  double m = -kInf;
  for (const auto& g : eta) {
    double a = std::abs(g[i]);
    if (a > 0) m = std::max(m, std::log(a));
  }
  return m;
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

Vec to_vec(std::span<const double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

}  // namespace

EtaProfile::EtaProfile(std::span<const GridFunction> eta, double bin) : bin_(bin) {
  if (!(bin > 0)) throw Error(ErrorKind::InvalidArgument, "profile bin must be positive");
  check_eta_grids(eta);
  const auto& g = eta.front();
  const auto d = static_cast<std::size_t>(g.dim());
  std::vector<double> x(d), y(d);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m = max_log_abs(eta, i);
    if (m == -kInf) continue;
    g.point(i, x, y);
    pts.emplace_back(norm(x), m - norm(y));
  }
  std::sort(pts.begin(), pts.end());
  for (auto& [r, v] : pts) {
    radii_.push_back(r);
    vals_.push_back(v);
  }
}

double EtaProfile::operator()(double r) const {
  auto lo = std::lower_bound(radii_.begin(), radii_.end(), r - bin_);
  double best = -kInf;
  for (auto it = lo; it != radii_.end() && *it <= r + bin_; ++it)
    best = std::max(best, vals_[static_cast<std::size_t>(it - radii_.begin())]);
  return best;
}

EtaProfile EtaProfile::shifted(double logScale) const {
  EtaProfile p = *this;
  for (auto& v : p.vals_) v += logScale;
  return p;
}

EstimateReport EtaProfile::verify_decay(int Nmax) const {
  EstimateReport r;
  r.name = "profile-decay";
  if (radii_.empty()) {
    r.pass = false;
    r.note("profile is identically -inf");
    return r;
  }
  for (int N = 0; N <= Nmax; ++N) {
    double c = -kInf;
    for (std::size_t i = 0; i < radii_.size(); ++i) c = std::max(c, vals_[i] + N * std::log1p(radii_[i]));
    EstimateReport ch;
    ch.name = "N=" + std::to_string(N);
    ch.set("C", c);
    // bound holds with the fitted constant; margin is 0 at the worst node
    ch.observe(std::isfinite(c) ? 0.0 : -kInf);
    ch.pass = std::isfinite(c);
    r.set("C_" + std::to_string(N), c);
    r.add(ch);
  }
  // slope of the per-unit-radius maxima against log(1 + r), r >= 1
  std::vector<double> u, v;
  for (double lo = 1.0; lo < radii_.back(); lo += 1.0) {
    double m = -kInf;
    auto a = std::lower_bound(radii_.begin(), radii_.end(), lo);
    for (auto it = a; it != radii_.end() && *it < lo + 1.0; ++it)
      m = std::max(m, vals_[static_cast<std::size_t>(it - radii_.begin())]);
    if (m > -kInf) {
      u.push_back(std::log1p(lo + 0.5));
      v.push_back(m);
    }
  }
  if (u.size() >= 3) {
    double n = static_cast<double>(u.size()), su = 0, sv = 0, suu = 0, suv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      su += u[i];
      sv += v[i];
      suu += u[i] * u[i];
      suv += u[i] * v[i];
    }
    r.set("power_slope", (n * suv - su * sv) / (n * suu - su * su));
  }
  return r;
}

void check_eta_support(std::span<const GridFunction> eta, const Cone& U, double epsilon) {
  check_eta_grids(eta);
  const auto& g = eta.front();
  if (g.dim() != U.dim()) throw Error(ErrorKind::DimensionMismatch, "eta grid dimension differs from cone");
  const auto d = static_cast<std::size_t>(g.dim());
  std::vector<double> x(d), y(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (max_log_abs(eta, i) == -kInf) continue;
    g.point(i, x, y);
    if (distance_to_boundary(to_vec(x), U) > epsilon + 1e-12)
      throw Error(ErrorKind::UnsupportedEta, "eta is nonzero away from the boundary strip");
  }
}

std::vector<double> default_r_family(double rMax, double bin) {
  std::vector<double> r{0.0};
  for (int i = 0; i < 256; ++i) r.push_back(std::pow(10.0, -3.0 + 6.0 * i / 255.0));
  for (int k = 1; k * 2.0 * bin <= rMax + 2.0 * bin; ++k) r.push_back(k * 2.0 * bin);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

Eigen::MatrixXd householder_to_e1(const Vec& e) {
  const auto d = e.size();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(d, d);
  Vec v = e.normalized();
  v(0) -= 1.0;
  double n2 = v.squaredNorm();
  if (n2 < 1e-28) return T;
  return T - 2.0 * v * v.transpose() / n2;
}

EnvelopeField::EnvelopeField(Window W, const EtaProfile& H, std::vector<double> rFamily, std::vector<Vec> directions)
    : dim_(directions.empty() ? 0 : static_cast<int>(directions.front().size())),
      W_(std::move(W)),
      dirs_(std::move(directions)) {
  if (dirs_.empty()) throw Error(ErrorKind::InvalidArgument, "no boundary directions");
  for (double r : rFamily) {
    if (r < 0) throw Error(ErrorKind::InvalidArgument, "negative radius in family");
    double h = H(r);
    if (h > -kInf) {
      r_.push_back(r);
      h_.push_back(h);
    }
  }
  if (r_.empty()) throw Error(ErrorKind::InvalidArgument, "profile is -inf on the whole family");
  for (const auto& e : dirs_) T_.push_back(householder_to_e1(e));
  order_.resize(r_.size());
  for (std::size_t k = 0; k < order_.size(); ++k) order_[k] = k;
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return h_[a] > h_[b]; });
}

double EnvelopeField::rho1(std::span<const cplx> z) const {
  if (static_cast<int>(z.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension");
  double base = 0;
  for (std::size_t j = 1; j < z.size(); ++j) base += rho0(z[j]);
  // |Omega~(zeta)| <= 2 (1 + delta) exp((1 + 2 delta) |Im zeta|), the same for every r
  const double d = W_.delta();
  const double ub = std::log(4.0 * (1.0 + d) / d) + W_.half_support() * std::abs(z[0].imag()) + 1e-9;
  double best = -kInf;
  for (std::size_t k : order_) {
    if (h_[k] + ub <= best) break;
    best = std::max(best, rho0(z[0] - r_[k]) + h_[k]);
  }
  return best + base;
}

double EnvelopeField::rho_e(const Vec& e, std::span<const cplx> z) const {
  Eigen::MatrixXd T = householder_to_e1(e);
  std::vector<cplx> w(z.size());
  for (int i = 0; i < dim_; ++i) {
    cplx s = 0;
    for (int j = 0; j < dim_; ++j) s += T(i, j) * z[static_cast<std::size_t>(j)];
    w[static_cast<std::size_t>(i)] = s;
  }
  return rho1(w);
}

double EnvelopeField::operator()(std::span<const cplx> z) const {
  double best = -kInf;
  std::vector<cplx> w(z.size());
  for (const auto& T : T_) {
    for (int i = 0; i < dim_; ++i) {
      cplx s = 0;
      for (int j = 0; j < dim_; ++j) s += T(i, j) * z[static_cast<std::size_t>(j)];
      w[static_cast<std::size_t>(i)] = s;
    }
    best = std::max(best, rho1(w));
  }
  return best;
}

std::vector<double> EnvelopeField::on_grid(const std::vector<Axis>& axes) const {
  auto g = GridFunction::zeros(axes);
  if (g.dim() != dim_) throw Error(ErrorKind::DimensionMismatch, "grid dimension differs from envelope");
  const auto d = static_cast<std::size_t>(dim_);
  std::vector<double> x(d), y(d), out(g.size());
  std::vector<cplx> z(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x, y);
    for (std::size_t j = 0; j < d; ++j) z[j] = cplx(x[j], y[j]);
    out[i] = (*this)(z);
  }
  return out;
}

EnvelopeField build_envelope(const Cone& U, const Cone& Uprime, const Window& W, const EtaProfile& H,
                             const EnvelopeOptions& opt) {
  const int d = U.dim();
  if (Uprime.dim() != d) throw Error(ErrorKind::DimensionMismatch, "cones of different dimension");
  if (!(opt.epsilon > 0 && opt.epsilon < 0.5)) throw Error(ErrorKind::InvalidArgument, "epsilon must be in (0, 1/2)");
  if (!(2 * opt.epsilon + H.bin() < 1.0))
    throw Error(ErrorKind::InvalidArgument, "2 epsilon + profile bin must stay below 1");
  if (!is_compact_subcone(Uprime, U)) throw Error(ErrorKind::NotCompactSubcone, "U' is not a compact subcone of U");
  const double sep = angular_separation(Uprime, U);
  if (opt.theta < 0 || opt.theta > sep)
    throw Error(ErrorKind::SeparationViolation, "theta exceeds the angular separation " + std::to_string(sep));
  const double res = opt.resolution > 0 ? opt.resolution : default_resolution(d);
  auto dirs = boundary_directions(U, res);
  auto fam = opt.rFamily.empty() ? default_r_family(H.max_radius(), H.bin()) : opt.rFamily;
  return EnvelopeField(W, H, std::move(fam), std::move(dirs));
}

EnvelopeSamples sample_envelope(const EnvelopeField& f, std::vector<Axis> axes) {
  auto v = f.on_grid(axes);
  return {std::move(axes), std::move(v)};
}

EstimateReport verify_envelope(const EnvelopeSamples& rho, std::span<const GridFunction> eta, const Cone& U,
                               const Cone& Uprime, double B, int N, const WeightSequence& seq, double epsilon) {
  check_eta_grids(eta);
  if (!same_axes(rho.axes, eta.front().axes())) throw Error(ErrorKind::DimensionMismatch, "envelope and eta grids differ");
  const auto& g = eta.front();
  const int d = g.dim();
  if (!(B > std::sqrt(static_cast<double>(d)))) throw Error(ErrorKind::InvalidArgument, "B must exceed sqrt(d)");
  if (N < 0) throw Error(ErrorKind::InvalidArgument, "N must be nonnegative");
  const auto alpha = seq.gevrey_alpha();

  EstimateReport lower, upper, decay;
  lower.name = "lower-bound-boundary-strip";
  upper.name = "upper-bound-everywhere";
  decay.name = "decay-on-inner-cone";
  double cBN = -kInf, cB = -kInf;
  bool finite = true;
  std::vector<double> x(static_cast<std::size_t>(d)), y(x.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = rho.rho[i];
    if (!std::isfinite(v)) finite = false;
    g.point(i, x, y);
    const Vec xv = to_vec(x);
    const double ax = xv.norm(), ay = norm(y);
    if (distance_to_boundary(xv, U) <= epsilon) {
      double m = max_log_abs(eta, i);
      if (m > -kInf) lower.observe(v - m);
    }
    cBN = std::max(cBN, v + N * std::log1p(ax) - B * ay);
    if (ax > 0 && Uprime.in_interior(xv)) {
      double growth = alpha ? std::pow(ax, 1.0 / *alpha) : log_indicator(seq, ax).logValue;
      cB = std::max(cB, v + growth - B * ay);
      decay.observe(0.0);
    }
  }
  lower.pass = lower.minMargin >= -1e-9;
  upper.set("C_BN", cBN);
  upper.observe(std::isfinite(cBN) ? 0.0 : -kInf);
  upper.pass = finite && std::isfinite(cBN);
  if (!finite) upper.note("envelope not finite on the grid");
  decay.set("C_B", cB);
  decay.pass = std::isfinite(cB);
  if (decay.samples == 0) decay.note("no grid node inside the inner cone");

  EstimateReport r;
  r.name = "envelope B=" + std::to_string(B).substr(0, 4) + " N=" + std::to_string(N);
  r.set("B", B);
  r.set("N", N);
  r.set("C_BN", cBN);
  r.set("C_B", cB);
  r.set("lower_min_margin", lower.minMargin);
  r.observe(lower.minMargin);
  r.add(lower);
  r.add(upper);
  r.add(decay);
  return r;
}

EstimateReport verify_envelope(const EnvelopeField& rho, std::span<const GridFunction> eta, const Cone& U,
                               const Cone& Uprime, double B, int N, const WeightSequence& seq, double epsilon) {
  check_eta_grids(eta);
  return verify_envelope(sample_envelope(rho, eta.front().axes()), eta, U, Uprime, B, N, seq, epsilon);
}

EstimateReport compare_resolutions(const EstimateReport& coarse, const EstimateReport& fine, double tol) {
  EstimateReport r;
  r.name = "refinement " + coarse.name;
  for (const char* key : {"C_BN", "C_B"}) {
    auto a = coarse.get(key), b = fine.get(key);
    if (!a || !b) continue;
    EstimateReport c;
    c.name = std::string("drift ") + key;
    double drift = std::abs(*b - *a) / std::max(1.0, std::abs(*a));
    c.set("coarse", *a);
    c.set("fine", *b);
    c.set("drift", drift);
    c.observe(tol - drift);
    c.pass = std::isfinite(drift) && drift < tol;
    r.set(std::string("drift_") + key, drift);
    r.observe(tol - drift);
    r.add(c);
  }
  return r;
}

EstimateReport check_subharmonic(const std::function<double(cplx)>& u, cplx center, double radius) {
  EstimateReport r;
  r.name = "sub-mean-value";
  if (!(radius > 0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  auto mean = [&](int n) {
    double s = 0;
    for (int k = 0; k < n; ++k) s += u(center + std::polar(radius, 2.0 * std::numbers::pi * k / n));
    return s / n;
  };
  const double c = u(center), m16 = mean(16), m32 = mean(32);
  const double disc = std::abs(m16 - m32);
  const double margin = c == -kInf ? kInf : m16 + 1e-6 + disc - c;
  r.observe(margin);
  r.set("center", c);
  r.set("mean16", m16);
  r.set("discretization", disc);
  r.pass = margin >= 0;
  return r;
}

EstimateReport check_subharmonic(const EnvelopeField& f, std::span<const cplx> z0, std::span<const cplx> v,
                                 double radius) {
  if (z0.size() != v.size() || static_cast<int>(z0.size()) != f.dim())
    throw Error(ErrorKind::DimensionMismatch, "line data dimension");
  std::vector<cplx> z(z0.size());
  return check_subharmonic(
      [&](cplx lam) {
        for (std::size_t j = 0; j < z.size(); ++j) z[j] = z0[j] + lam * v[j];
        return f(z);
      },
      0.0, radius);
}

}  // namespace carrier
