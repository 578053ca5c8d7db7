#include "carrier/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const cplx I(0, 1);

cplx csinc(cplx w) {
  if (std::abs(w) < 1e-4) return 1.0 - w * w / 6.0 + w * w * w * w / 120.0;
  return std::sin(w) / w;
}

// log|sin(w)/w| in real arithmetic: |sin w|^2 e^{-2|b|} 4 = (1 - q)^2 + 4 q sin^2 a, q = e^{-2|b|}
double log_abs_sinc(cplx w) {
  const double a = w.real(), b = std::abs(w.imag()), r2 = a * a + b * b;
  if (r2 < 1e-16) return -(a * a - b * b) / 6.0;
  const double om = -std::expm1(-2.0 * b), q = 1.0 - om, s = std::sin(a);
  const double f = om * om + 4.0 * q * s * s;
  return f > 0 ? b + 0.5 * std::log(f / (4.0 * r2)) : kNegInf;
}

double falling(int j, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r *= j - i;
  return r;
}

}  // namespace

std::vector<double> Mollifier::widths() const {
  std::vector<double> w;
  for (int m : m_) w.push_back(2.0 * m * h_);
  return w;
}

double Mollifier::eval_cell(int c, double s, int order) const {
  const double* a = coeffs_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(deg_);
  double v = 0;
  for (int j = deg_ - 1; j >= order; --j) v = v * s + a[j] * falling(j, order);
  return v / std::pow(h_, order);
}

// clipped: cancellation near the support ends leaves ~1e-13 negatives
double Mollifier::value(double t) const { return std::max(0.0, derivative(t, 0)); }

double Mollifier::derivative(double t, int order) const {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  if (!(std::abs(t) < delta_)) return 0.0;
  double u = (t + delta_) / h_;
  int c = std::clamp(static_cast<int>(std::floor(u)), 0, 2 * n_ - 1);
  return eval_cell(c, u - c, order);
}

double Mollifier::cdf(double t) const {
  if (t <= -delta_) return 0.0;
  if (t >= delta_) return 1.0;
  double u = (t + delta_) / h_;
  int c = std::clamp(static_cast<int>(std::floor(u)), 0, 2 * n_ - 1);
  double s = u - c;
  const double* a = coeffs_.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(deg_);
  double v = 0;
  for (int j = deg_ - 1; j >= 0; --j) v = v * s + a[j] / (j + 1);
  return cum_[static_cast<std::size_t>(c)] + h_ * v * s;
}

std::vector<double> Mollifier::samples(int n) const {
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = value(-delta_ + 2.0 * delta_ * i / n);
  return v;
}

double Mollifier::mass() const { return cum_.back(); }

cplx Mollifier::transform(cplx zeta) const {
  cplx p = 1;
  for (int m : m_) p *= csinc(m * h_ * zeta);
  return p;
}

double Mollifier::log_abs_transform(cplx zeta) const {
  double s = 0;
  for (int m : m_) s += log_abs_sinc(m * h_ * zeta);
  return s;
}

double Mollifier::derivative_bound(int nu) const {
  if (nu < 0 || nu >= static_cast<int>(m_.size()))
    throw Error(ErrorKind::InvalidArgument, "derivative order outside the certified range");
  auto w = widths();
  std::sort(w.begin(), w.end(), std::greater<>());
  double b = 1.0 / w[static_cast<std::size_t>(nu)];
  for (int k = 0; k < nu; ++k) b *= 2.0 / w[static_cast<std::size_t>(k)];
  return b;
}

double Mollifier::sampled_derivative_sup(int nu) const {
  double best = 0;
  for (int c = 0; c < 2 * n_; ++c)
    for (double s : {0.0, 0.25, 0.5, 0.75}) best = std::max(best, std::abs(eval_cell(c, s, nu)));
  return best;
}

EstimateReport Mollifier::certificate() const {
  EstimateReport r;
  r.name = "mollifier";
  EstimateReport m;
  m.name = "unit-mass";
  m.observe(1e-8 - std::abs(mass() - 1.0));
  m.pass = m.minMargin >= 0;
  r.add(m);

  EstimateReport pos;
  pos.name = "nonnegative-even";
  for (int c = 0; c < 2 * n_; ++c)
    for (double s : {0.0, 0.5}) {
      double t = -delta_ + (c + s) * h_;
      double v = value(t), w = value(-t);
      pos.observe(std::min(v + 1e-12, 1e-9 * (1 + v) - std::abs(v - w)));
    }
  pos.pass = pos.minMargin >= 0;
  r.add(pos);

  EstimateReport d;
  d.name = "derivative-bounds";
  for (int nu = 0; nu <= maxCertifiedOrder; ++nu) {
    double rhs = C0_ * std::pow(A0_, nu) * std::exp(seq_.log_term(nu));
    double lhs = sampled_derivative_sup(nu);
    d.observe((rhs - lhs) / rhs);
  }
  d.pass = d.minMargin >= 0;
  r.add(d);
  r.set("C0", C0_);
  r.set("A0", A0_);
  r.set("delta", delta_);
  r.set("cells", 2.0 * n_);
  return r;
}

Mollifier build_mollifier(double delta, const WeightSequence& seq, int K, int targetHalfCells) {
  if (!(delta > 0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  if (K < Mollifier::maxCertifiedOrder + 2) throw Error(ErrorKind::InvalidArgument, "too few convolution factors");
  if (targetHalfCells < 4 * K) throw Error(ErrorKind::InvalidArgument, "too few cells");
  auto nqa = check_nonquasianalytic(seq);
  if (!nqa.verdict) throw Error(ErrorKind::QuasianalyticSequence, "sequence " + seq.label() + " is quasianalytic");

  // raw widths: k^-alpha for Gevrey, a_{k-1}/a_k otherwise
  std::vector<double> raw(static_cast<std::size_t>(K));
  const auto alpha = seq.gevrey_alpha();
  for (int k = 1; k <= K; ++k)
    raw[static_cast<std::size_t>(k - 1)] =
        alpha ? std::pow(k, -*alpha) : std::exp(seq.log_term(k - 1) - seq.log_term(k));
  double total = 0;
  for (double v : raw) total += v;
  const double c = 2.0 * delta / total;

  Mollifier w(delta, seq);
  const double h0 = delta / targetHalfCells;
  for (double v : raw) w.m_.push_back(std::max(1, static_cast<int>(std::lround(c * v / (2.0 * h0)))));
  w.n_ = 0;
  for (int m : w.m_) w.n_ += m;
  w.h_ = delta / w.n_;
  w.deg_ = K;

  const int cells = 2 * w.n_;
  const auto D = static_cast<std::size_t>(K);
  std::vector<double> cur(static_cast<std::size_t>(cells) * D, 0.0);
  // first box: constant 1/(2 m h) on the central 2m cells
  {
    int m = w.m_[0];
    for (int cc = w.n_ - m; cc < w.n_ + m; ++cc) cur[static_cast<std::size_t>(cc) * D] = 1.0 / (2.0 * m * w.h_);
  }
  std::vector<double> F(static_cast<std::size_t>(cells) * (D + 1));
  for (std::size_t b = 1; b < w.m_.size(); ++b) {
    // antiderivative coefficients per cell
    double acc = 0;
    for (int cc = 0; cc < cells; ++cc) {
      const double* a = cur.data() + static_cast<std::size_t>(cc) * D;
      double* f = F.data() + static_cast<std::size_t>(cc) * (D + 1);
      f[0] = acc;
      double cellMass = 0;
      for (std::size_t j = 0; j < D; ++j) {
        f[j + 1] = w.h_ * a[j] / static_cast<double>(j + 1);
        cellMass += f[j + 1];
      }
      acc += cellMass;
    }
    const double totalMass = acc;
    const int m = w.m_[b];
    const double scale = 1.0 / (2.0 * m * w.h_);
    auto Fat = [&](int cc, std::size_t j) -> double {
      if (cc < 0) return 0.0;
      if (cc >= cells) return j == 0 ? totalMass : 0.0;
      return F[static_cast<std::size_t>(cc) * (D + 1) + j];
    };
    for (int cc = 0; cc < cells; ++cc) {
      double* a = cur.data() + static_cast<std::size_t>(cc) * D;
      for (std::size_t j = 0; j < D; ++j) a[j] = scale * (Fat(cc + m, j) - Fat(cc - m, j));
    }
  }
  w.coeffs_ = std::move(cur);
  w.cum_.assign(static_cast<std::size_t>(cells) + 1, 0.0);
  for (int cc = 0; cc < cells; ++cc) {
    const double* a = w.coeffs_.data() + static_cast<std::size_t>(cc) * D;
    double cm = 0;
    for (std::size_t j = 0; j < D; ++j) cm += a[j] / static_cast<double>(j + 1);
    w.cum_[static_cast<std::size_t>(cc) + 1] = w.cum_[static_cast<std::size_t>(cc)] + w.h_ * cm;
  }

  w.A0_ = alpha ? 2.0 / (c * std::exp(*alpha)) : 2.0 / c;
  w.C0_ = 0;
  for (int nu = 0; nu <= Mollifier::maxCertifiedOrder; ++nu)
    w.C0_ = std::max(w.C0_, w.derivative_bound(nu) / (std::pow(w.A0_, nu) * std::exp(seq.log_term(nu))));
  return w;
}

Window::Window(Mollifier w) : omega_(std::move(w)) {
  if (!(1.0 + 2.0 * omega_.delta() < std::numbers::pi / 3.0))
    throw Error(ErrorKind::InvalidArgument, "window needs 1 + 2 delta < pi/3");
}

double Window::value(double t) const {
  const double a = 1.0 + delta();
  return omega_.cdf(t + a) - omega_.cdf(t - a);
}

std::vector<double> Window::samples(int n) const {
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  const double L = half_support();
  for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = value(-L + 2.0 * L * i / n);
  return v;
}

double Window::integral(int intervals) const {
  if (intervals < 2 || intervals % 2) throw Error(ErrorKind::InvalidArgument, "Simpson needs an even count");
  auto s = samples(intervals);
  double acc = 0;
  for (int i = 0; i <= intervals; ++i)
    acc += (i == 0 || i == intervals ? 1.0 : (i % 2 ? 4.0 : 2.0)) * s[static_cast<std::size_t>(i)];
  return acc * 2.0 * half_support() / intervals / 3.0;
}

cplx Window::laplace_quadrature(cplx zeta, int intervals) const {
  if (intervals < 2 || intervals % 2) throw Error(ErrorKind::InvalidArgument, "Simpson needs an even count");
  const double L = half_support(), h = 2.0 * L / intervals;
  cplx acc = 0;
  for (int i = 0; i <= intervals; ++i) {
    double t = -L + h * i;
    double wgt = i == 0 || i == intervals ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += wgt * value(t) * std::exp(I * t * zeta);
  }
  return acc * h / 3.0;
}

cplx Window::laplace(cplx zeta) const {
  const double a = 1.0 + delta();
  return omega_.transform(zeta) * 2.0 * a * csinc(a * zeta);
}

double Window::log_abs_laplace(cplx zeta) const {
  const double a = 1.0 + delta();
  return omega_.log_abs_transform(zeta) + std::log(2.0 * a) + log_abs_sinc(a * zeta);
}

double rho0(cplx zeta, const Window& W) {
  double m = std::abs(W.laplace_quadrature(zeta));
  if (!std::isfinite(m)) throw Error(ErrorKind::QuadratureDivergence, "window transform overflows");
  if (!(m >= 1e-300)) throw Error(ErrorKind::QuadratureUnderflow, "window transform underflows");
  return std::log(2.0 * m / W.delta());
}

double rho0_closed(cplx zeta, const Window& W) {
  return std::numbers::ln2 + W.log_abs_laplace(zeta) - std::log(W.delta());
}

EstimateReport check_strip_lower_bound(const Window& W, int nRe, int nIm, double imMax, bool quadrature) {
  EstimateReport r;
  r.name = "strip-lower-bound";
  EstimateReport up, lo;
  up.name = "im-positive";
  lo.name = "im-negative";
  for (int i = 0; i < nRe; ++i) {
    double re = -1.0 + (2.0 * i + 1.0) / nRe;
    for (int j = 0; j < nIm; ++j) {
      double im = nIm == 1 ? 0.0 : -imMax + 2.0 * imMax * j / (nIm - 1);
      cplx z(re, im);
      double v = quadrature ? rho0(z, W) : rho0_closed(z, W);
      double margin = v - std::abs(im);
      (im >= 0 ? up : lo).observe(margin);
    }
  }
  up.pass = up.minMargin >= -1e-6;
  lo.pass = lo.minMargin >= -1e-6;
  r.observe(std::min(up.minMargin, lo.minMargin));
  r.set("im_positive_min_margin", up.minMargin);
  r.set("im_negative_min_margin", lo.minMargin);
  r.add(up);
  r.add(lo);
  r.pass = up.pass && lo.pass;
  return r;
}

EstimateReport fit_real_decay(const Window& W, double xiMin, double xiMax, double step) {
  EstimateReport r;
  r.name = "real-axis-decay";
  const auto alpha = W.mollifier().sequence().gevrey_alpha();
  const double p = alpha ? 1.0 / *alpha : 1.0;
  std::vector<double> xs, gs;
  for (double xi = xiMin; xi <= xiMax; xi += step) {
    xs.push_back(xi);
    gs.push_back(rho0_closed(cplx(xi, 0), W));
  }
  // local maxima of the oscillating profile carry the envelope
  std::vector<double> u, v;
  for (std::size_t i = 1; i + 1 < gs.size(); ++i)
    if (gs[i] >= gs[i - 1] && gs[i] >= gs[i + 1] && std::isfinite(gs[i])) {
      u.push_back(std::pow(xs[i], p));
      v.push_back(gs[i]);
    }
  if (u.size() < 3) {
    r.pass = false;
    r.note("too few local maxima for a fit");
    return r;
  }
  double su = 0, sv = 0, suu = 0, suv = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
    suu += u[i] * u[i];
    suv += u[i] * v[i];
  }
  double slope = (n * suv - su * sv) / (n * suu - su * su);
  r.set("slope", slope);
  if (!(slope < 0)) {
    r.pass = false;
    r.note("no decay detected");
    return r;
  }
  const double A = std::pow(-slope, -1.0 / p);
  double cst = kNegInf;
  for (std::size_t i = 0; i < xs.size(); ++i) cst = std::max(cst, gs[i] + std::pow(xs[i] / A, p));
  r.set("A", A);
  r.set("const", cst);
  r.set("A_over_A0", A / W.mollifier().A0());
  r.observe(std::isfinite(cst) ? 0.0 : -1.0);
  r.pass = std::isfinite(cst) && std::isfinite(A);
  return r;
}

}  // namespace carrier
