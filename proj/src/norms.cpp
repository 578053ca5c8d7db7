#include "carrier/norms.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-node log weights; x-dependent parts are cached per x node.
template <class XPart>
std::vector<double> log_weighted(const GridFunction& f, double B, XPart&& xpart) {
  const int d = f.dim();
  std::size_t ny = 1, nx = 1;
  for (int j = 0; j < d; ++j) {
    nx *= static_cast<std::size_t>(f.x_axis(j).n);
    ny *= static_cast<std::size_t>(f.y_axis(j).n);
  }
  std::vector<double> xs(nx), ys(ny);
  Vec x(d);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    std::size_t rem = ix;
    for (int j = d - 1; j >= 0; --j) {
      const auto& a = f.x_axis(j);
      x(j) = a.node(static_cast<int>(rem % static_cast<std::size_t>(a.n)));
      rem /= static_cast<std::size_t>(a.n);
    }
    xs[ix] = xpart(x);
  }
  for (std::size_t iy = 0; iy < ny; ++iy) {
    std::size_t rem = iy;
    double s = 0;
    for (int j = d - 1; j >= 0; --j) {
      const auto& a = f.y_axis(j);
      double v = a.node(static_cast<int>(rem % static_cast<std::size_t>(a.n)));
      s += v * v;
      rem /= static_cast<std::size_t>(a.n);
    }
    ys[iy] = -B * std::sqrt(s);
  }
  std::vector<double> out(f.size());
  const auto samples = f.samples();
  for (std::size_t i = 0; i < f.size(); ++i) {
    double m = std::abs(samples[i]);
    out[i] = m > 0 ? std::log(m) + xs[i / ny] + ys[i % ny] : kNegInf;
  }
  return out;
}

SupNorm sup_from_logs(const GridFunction& f, const std::vector<double>& lw) {
  SupNorm r;
  double mx = kNegInf;
  for (double v : lw) mx = std::max(mx, v);
  std::vector<double> x(static_cast<std::size_t>(f.dim())), y(x.size());
  if (mx == kNegInf) {
    r.value = 0;
    f.point(0, x, y);
    r.argmax.assign(x.begin(), x.end());
    r.argmax.insert(r.argmax.end(), y.begin(), y.end());
    return r;
  }
  std::size_t arg = 0;
  for (std::size_t i = 0; i < lw.size(); ++i)
    if (lw[i] >= mx - 1e-12) {
      arg = i;
      break;
    }
  r.value = std::exp(mx);
  r.argIndex = arg;
  f.point(arg, x, y);
  r.argmax.assign(x.begin(), x.end());
  r.argmax.insert(r.argmax.end(), y.begin(), y.end());
  r.saturated = f.on_boundary(arg);
  for (std::size_t k = 0; k < f.axes().size(); ++k) {
    int n = f.axes()[k].n;
    int i = f.index_along(arg, static_cast<int>(k));
    for (int s : {-1, 1}) {
      if (i + s < 0 || i + s >= n) continue;
      std::size_t nb = s < 0 ? arg - f.stride(static_cast<int>(k)) : arg + f.stride(static_cast<int>(k));
      if (std::abs(lw[nb] - lw[arg]) > std::log(10.0)) r.gridTooCoarse = true;
    }
  }
  return r;
}

double l2_from_logs(const GridFunction& f, const std::vector<double>& lw) {
  double vol = 1;
  for (const auto& a : f.axes()) vol *= a.n > 1 ? a.spacing() : 1.0;
  double s = 0;
  for (std::size_t i = 0; i < lw.size(); ++i) {
    if (lw[i] == kNegInf) continue;
    double w = 1;
    for (std::size_t k = 0; k < f.axes().size(); ++k) {
      int n = f.axes()[k].n;
      int j = f.index_along(i, static_cast<int>(k));
      if (n > 1 && (j == 0 || j == n - 1)) w *= 0.5;
    }
    s += w * std::exp(2 * lw[i]);
  }
  return std::sqrt(s * vol);
}

}  // namespace

NormParams NormParams::polynomial(Cone U, double B, int N) {
  NormParams p{std::move(U), B, N, 1.0, std::nullopt, std::nullopt};
  return p;
}

NormParams NormParams::gevrey(Cone U, double B, double A, double alpha) {
  NormParams p{std::move(U), B, 0, A, alpha, std::nullopt};
  return p;
}

NormParams NormParams::sequence(Cone U, double B, double A, WeightSequence seq) {
  NormParams p{std::move(U), B, 0, A, std::nullopt, std::move(seq)};
  return p;
}

void NormParams::validate(int d) const {
  if (U.dim() != d) throw Error(ErrorKind::DimensionMismatch, "norm cone dimension differs from grid");
  if (!(B > 0)) throw Error(ErrorKind::InvalidArgument, "B must be positive");
  if (!(A > 0)) throw Error(ErrorKind::InvalidArgument, "A must be positive");
  if (N < 0) throw Error(ErrorKind::InvalidArgument, "N must be nonnegative");
}

double NormParams::growth_exponent(double absx) const {
  if (alpha) return std::pow(absx / A, 1.0 / *alpha);
  if (seq) return log_indicator(*seq, absx / A).logValue;
  throw Error(ErrorKind::InvalidArgument, "norm needs a Gevrey exponent or a weight sequence");
}

SupNorm sup_norm_S0(const GridFunction& f, const NormParams& p) {
  p.validate(f.dim());
  auto lw = log_weighted(f, p.B, [&](const Vec& x) {
    return p.N * std::log1p(x.norm()) - p.B * distance_to_cone(x, p.U);
  });
  return sup_from_logs(f, lw);
}

SupNorm sup_norm_S0a(const GridFunction& f, const NormParams& p) {
  p.validate(f.dim());
  auto lw = log_weighted(f, p.B, [&](const Vec& x) {
    return p.growth_exponent(x.norm()) - p.B * distance_to_cone(x, p.U);
  });
  return sup_from_logs(f, lw);
}

double l2_norm_S0(const GridFunction& f, const NormParams& p) {
  p.validate(f.dim());
  auto lw = log_weighted(f, p.B, [&](const Vec& x) {
    return p.N * std::log1p(x.norm()) - p.B * distance_to_cone(x, p.U);
  });
  return l2_from_logs(f, lw);
}

double l2_norm_S0a(const GridFunction& f, const NormParams& p) {
  p.validate(f.dim());
  auto lw = log_weighted(f, p.B, [&](const Vec& x) {
    return p.growth_exponent(x.norm()) - p.B * distance_to_cone(x, p.U);
  });
  return l2_from_logs(f, lw);
}

SpectralFunction::SpectralFunction(std::vector<double> nodes, std::vector<cplx> weights)
    : t_(std::move(nodes)), w_(std::move(weights)) {
  if (t_.size() != w_.size()) throw Error(ErrorKind::InvalidArgument, "nodes and weights differ in length");
}

cplx SpectralFunction::operator()(cplx z) const {
  const cplx i(0, 1);
  cplx s = 0;
  for (std::size_t k = 0; k < t_.size(); ++k) s += w_[k] * std::exp(i * t_[k] * z);
  return s;
}

cplx SpectralFunction::derivative(cplx z) const {
  const cplx i(0, 1);
  cplx s = 0;
  for (std::size_t k = 0; k < t_.size(); ++k) s += w_[k] * i * t_[k] * std::exp(i * t_[k] * z);
  return s;
}

SpectralFunction SpectralFunction::scaled(cplx s) const {
  auto w = w_;
  for (auto& v : w) v *= s;
  return SpectralFunction(t_, std::move(w));
}

SpectralFunction SpectralFunction::shifted_frequency(double b) const {
  auto t = t_;
  for (auto& v : t) v += b;
  return SpectralFunction(std::move(t), w_);
}

GridFunction SpectralFunction::on_grid(std::vector<Axis> axes, Provenance p) const {
  GridFunction g = GridFunction::zeros(axes, p);
  const int d = g.dim();
  const auto K = static_cast<Eigen::Index>(t_.size());
  const cplx i(0, 1);
  // per-coordinate tables T_j(x, y) = sum_k w_k e^{i t_k x} e^{-t_k y}
  std::vector<Eigen::MatrixXcd> tables;
  for (int j = 0; j < d; ++j) {
    const auto& ax = g.x_axis(j);
    const auto& ay = g.y_axis(j);
    Eigen::MatrixXcd Ex(ax.n, K);
    Eigen::MatrixXcd Ey(K, ay.n);
    for (int a = 0; a < ax.n; ++a)
      for (Eigen::Index k = 0; k < K; ++k)
        Ex(a, k) = w_[static_cast<std::size_t>(k)] * std::exp(i * t_[static_cast<std::size_t>(k)] * ax.node(a));
    for (Eigen::Index k = 0; k < K; ++k)
      for (int b = 0; b < ay.n; ++b) Ey(k, b) = std::exp(-t_[static_cast<std::size_t>(k)] * ay.node(b));
    tables.emplace_back(Ex * Ey);
  }
  auto s = g.samples_mut();
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    cplx v = 1;
    for (int j = 0; j < d; ++j) v *= tables[static_cast<std::size_t>(j)](g.index_along(flat, j), g.index_along(flat, d + j));
    s[flat] = v;
  }
  return g;
}

double standard_bump(double t) {
  if (std::abs(t) >= 1) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

SpectralFunction bump_transform(int nodes) {
  if (nodes < 4 || nodes % 2) throw Error(ErrorKind::InvalidArgument, "bump transform needs an even node count");
  std::vector<double> t;
  std::vector<cplx> w;
  const double h = 2.0 / nodes;
  for (int k = 1; k < nodes; ++k) {
    double tk = -1.0 + h * k;
    t.push_back(tk);
    w.emplace_back(h * standard_bump(tk), 0.0);
  }
  return SpectralFunction(std::move(t), std::move(w));
}

SpectralFunction sigma0(int nodes) {
  return bump_transform(nodes).scaled(1.0 / (2.0 * std::numbers::pi * standard_bump(0.0)));
}

namespace {

double sinc(double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; }

SpectralFunction sigma_nu_function(const SpectralFunction& s0, int nu) {
  if (nu < 1) throw Error(ErrorKind::InvalidArgument, "nu must be positive");
  const double L = std::sqrt(static_cast<double>(nu));
  const double h = 2.0 * L / nu;
  auto w = s0.weights();
  for (std::size_t k = 0; k < w.size(); ++k) {
    double t = s0.nodes()[k];
    // h sum_k exp(-i t xi_k) over the symmetric midpoints (Dirichlet kernel)
    w[k] *= 2.0 * L * sinc(t * L) / sinc(t * h / 2.0);
  }
  return SpectralFunction(s0.nodes(), std::move(w));
}

}  // namespace

cplx sigma_nu(const SpectralFunction& s0, int nu, cplx z) { return sigma_nu_function(s0, nu)(z); }

ApproxResult approx_sequence(const GridFunction& f, const SpectralFunction& s0, int nu) {
  auto sn = sigma_nu_function(s0, nu).on_grid(f.axes(), f.provenance());
  const int d = f.dim();
  std::vector<cplx> out(f.size());
  std::vector<double> x(static_cast<std::size_t>(d)), y(x.size());
  double diff = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = f[i] * sn[i];
    f.point(i, x, y);
    double r2 = 0;
    for (int j = 0; j < d; ++j) r2 += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)] + y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
    if (r2 <= 1.0 + 1e-12) diff = std::max(diff, std::abs(sn[i] - 1.0));
  }
  return {f.with_samples(std::move(out), f.provenance()), diff};
}

}  // namespace carrier
