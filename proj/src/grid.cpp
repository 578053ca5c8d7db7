#include "carrier/grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "carrier/error.hpp"

namespace carrier {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::TransformOfBump: return "transform-of-bump";
    case Provenance::External: return "external";
  }
  return "external";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "closed-form") return Provenance::ClosedForm;
  if (s == "transform-of-bump") return Provenance::TransformOfBump;
  if (s == "external") return Provenance::External;
  throw Error(ErrorKind::ParseError, "unknown provenance '" + s + "'");
}

GridFunction::GridFunction(std::vector<Axis> axes, std::vector<cplx> samples, Provenance p)
    : axes_(std::move(axes)), samples_(std::move(samples)), provenance_(p) {
  if (axes_.empty() || axes_.size() % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, "grid needs x and y axes for each dimension");
  std::size_t total = 1;
  for (const auto& a : axes_) {
    if (a.n < 1 || !(a.hi >= a.lo)) throw Error(ErrorKind::InvalidArgument, "bad axis " + a.name);
    total *= static_cast<std::size_t>(a.n);
  }
  if (total != samples_.size()) throw Error(ErrorKind::InvalidArgument, "sample count does not match axes");
  for (const auto& v : samples_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::InvalidArgument, "grid samples must be finite");
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size() - 1; k > 0; --k)
    strides_[k - 1] = strides_[k] * static_cast<std::size_t>(axes_[k].n);
}

GridFunction GridFunction::sample(std::vector<Axis> axes, const Sampler& f, Provenance p) {
  GridFunction g = zeros(std::move(axes), p);
  const int d = g.dim();
  std::vector<double> x(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x, y);
    g.samples_[i] = f(x, y);
  }
  return g;
}

GridFunction GridFunction::zeros(std::vector<Axis> axes, Provenance p) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(std::max(a.n, 0));
  return GridFunction(std::move(axes), std::vector<cplx>(total), p);
}

int GridFunction::index_along(std::size_t flat, int axis) const {
  const auto k = static_cast<std::size_t>(axis);
  return static_cast<int>((flat / strides_[k]) % static_cast<std::size_t>(axes_[k].n));
}

void GridFunction::point(std::size_t flat, std::span<double> x, std::span<double> y) const {
  const int d = dim();
  for (int j = 0; j < d; ++j) {
    x[static_cast<std::size_t>(j)] = axes_[static_cast<std::size_t>(j)].node(index_along(flat, j));
    y[static_cast<std::size_t>(j)] = axes_[static_cast<std::size_t>(d + j)].node(index_along(flat, d + j));
  }
}

bool GridFunction::on_boundary(std::size_t flat) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (axes_[k].n < 2) continue;
    int i = index_along(flat, static_cast<int>(k));
    if (i == 0 || i == axes_[k].n - 1) return true;
  }
  return false;
}

bool GridFunction::same_grid(const GridFunction& o) const {
  if (axes_.size() != o.axes_.size()) return false;
  for (std::size_t k = 0; k < axes_.size(); ++k)
    if (axes_[k].n != o.axes_[k].n || axes_[k].lo != o.axes_[k].lo || axes_[k].hi != o.axes_[k].hi) return false;
  return true;
}

GridFunction GridFunction::with_samples(std::vector<cplx> s, Provenance p) const {
  return GridFunction(axes_, std::move(s), p);
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
  if (!same_grid(o)) throw Error(ErrorKind::DimensionMismatch, "grids differ");
  std::vector<cplx> s(samples_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = samples_[i] + o.samples_[i];
  return with_samples(std::move(s), provenance_ == o.provenance_ ? provenance_ : Provenance::External);
}

GridFunction GridFunction::operator-(const GridFunction& o) const { return *this + o * cplx(-1.0); }

GridFunction GridFunction::operator*(cplx s) const {
  std::vector<cplx> v(samples_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples_[i] * s;
  return with_samples(std::move(v), provenance_);
}

std::vector<Axis> grid_axes_1d(double xlo, double xhi, int nx, double ylo, double yhi, int ny) {
  return {Axis{"x1", xlo, xhi, nx}, Axis{"y1", ylo, yhi, ny}};
}

std::vector<Axis> default_axes_1d() { return grid_axes_1d(-40, 40, 513, -10, 10, 513); }

void write_grid(std::ostream& os, const GridFunction& f) {
  os << "# gridfunction v1\n";
  os << "d " << f.dim() << '\n';
  char buf[128];
  for (const auto& a : f.axes()) {
    std::snprintf(buf, sizeof buf, "axis %s %.17g %.17g %d %.17g\n", a.name.c_str(), a.lo, a.hi, a.n, a.spacing());
    os << buf;
  }
  os << "provenance " << to_string(f.provenance()) << '\n';
  for (const auto& v : f.samples()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.real(), v.imag());
    os << buf;
  }
}

GridFunction read_grid(std::istream& is) {
  std::string line;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (line.empty() || (line[0] == '#' && line.rfind("# gridfunction", 0) != 0)) continue;
      return line;
    }
    throw Error(ErrorKind::ParseError, "unexpected end of grid file");
  };
  if (next().rfind("# gridfunction v1", 0) != 0) throw Error(ErrorKind::ParseError, "missing grid header");
  std::istringstream hs(next());
  std::string key;
  int d = 0;
  hs >> key >> d;
  if (key != "d" || d < 1) throw Error(ErrorKind::ParseError, "bad dimension line");
  std::vector<Axis> axes;
  for (int k = 0; k < 2 * d; ++k) {
    std::istringstream as(next());
    Axis a;
    as >> key >> a.name >> a.lo >> a.hi >> a.n;
    if (key != "axis" || !as) throw Error(ErrorKind::ParseError, "bad axis line");
    axes.push_back(a);
  }
  std::istringstream ps(next());
  std::string prov;
  ps >> key >> prov;
  if (key != "provenance") throw Error(ErrorKind::ParseError, "bad provenance line");
  std::size_t total = 1;
  for (const auto& a : axes) total *= static_cast<std::size_t>(a.n);
  std::vector<cplx> s;
  s.reserve(total);
  double re = 0, im = 0;
  while (s.size() < total && (is >> re >> im)) s.emplace_back(re, im);
  if (s.size() != total) throw Error(ErrorKind::ParseError, "sample count does not match axes");
  return GridFunction(std::move(axes), std::move(s), provenance_from_string(prov));
}

void save_grid(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot write " + path);
  write_grid(os, f);
}

GridFunction load_grid(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigError, "cannot read " + path);
  return read_grid(is);
}

}  // namespace carrier
