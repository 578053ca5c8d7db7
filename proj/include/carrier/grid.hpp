#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace carrier {

using cplx = std::complex<double>;

struct Axis {
  std::string name;
  double lo = 0;
  double hi = 0;
  int n = 1;

  double spacing() const { return n > 1 ? (hi - lo) / (n - 1) : 0.0; }
  double node(int i) const { return n > 1 ? lo + (hi - lo) * i / (n - 1) : lo; }
};

enum class Provenance { ClosedForm, TransformOfBump, External };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// Complex samples on a tensor grid of C^d = R^{2d}. Axes are ordered
// x1..xd, y1..yd and samples are row-major (last axis fastest).
class GridFunction {
 public:
  using Sampler = std::function<cplx(std::span<const double> x, std::span<const double> y)>;

  GridFunction(std::vector<Axis> axes, std::vector<cplx> samples, Provenance p);
  static GridFunction sample(std::vector<Axis> axes, const Sampler& f, Provenance p);
  static GridFunction zeros(std::vector<Axis> axes, Provenance p = Provenance::ClosedForm);

  int dim() const { return static_cast<int>(axes_.size()) / 2; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& x_axis(int j) const { return axes_[static_cast<std::size_t>(j)]; }
  const Axis& y_axis(int j) const { return axes_[static_cast<std::size_t>(dim() + j)]; }
  std::size_t size() const { return samples_.size(); }
  std::span<const cplx> samples() const { return samples_; }
  std::span<cplx> samples_mut() { return samples_; }
  cplx operator[](std::size_t i) const { return samples_[i]; }
  Provenance provenance() const { return provenance_; }

  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  int index_along(std::size_t flat, int axis) const;
  // fills x (size d) and y (size d) with the coordinates of a node
  void point(std::size_t flat, std::span<double> x, std::span<double> y) const;
  bool on_boundary(std::size_t flat) const;
  bool same_grid(const GridFunction& o) const;

  GridFunction with_samples(std::vector<cplx> s, Provenance p) const;
  GridFunction operator+(const GridFunction& o) const;
  GridFunction operator-(const GridFunction& o) const;
  GridFunction operator*(cplx s) const;

 private:
  std::vector<Axis> axes_;
  std::vector<cplx> samples_;
  std::vector<std::size_t> strides_;
  Provenance provenance_;
};

// x in [xlo, xhi] with nx nodes, y likewise
std::vector<Axis> grid_axes_1d(double xlo, double xhi, int nx, double ylo, double yhi, int ny);
// default norm grid for d = 1: |x| <= 40, |y| <= 10, 513 x 513 (x = 0 and y = 0 are nodes)
std::vector<Axis> default_axes_1d();

void write_grid(std::ostream& os, const GridFunction& f);
GridFunction read_grid(std::istream& is);
void save_grid(const std::string& path, const GridFunction& f);
GridFunction load_grid(const std::string& path);

}  // namespace carrier
