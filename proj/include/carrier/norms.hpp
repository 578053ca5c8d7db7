#pragma once

#include <optional>
#include <vector>

#include "carrier/cone.hpp"
#include "carrier/grid.hpp"
#include "carrier/weights.hpp"

namespace carrier {

struct NormParams {
  Cone U;
  double B = 1.0;
  int N = 0;
  // for the Gelfand-Shilov type norms: either a Gevrey exponent or a sequence
  double A = 1.0;
  std::optional<double> alpha;
  std::optional<WeightSequence> seq;

  static NormParams polynomial(Cone U, double B, int N);
  static NormParams gevrey(Cone U, double B, double A, double alpha);
  static NormParams sequence(Cone U, double B, double A, WeightSequence seq);
  void validate(int d) const;
  // log of the x-growth factor in the second family
  double growth_exponent(double absx) const;
};

struct SupNorm {
  double value = 0;
  std::size_t argIndex = 0;
  std::vector<double> argmax;  // x1..xd, y1..yd
  bool saturated = false;
  bool gridTooCoarse = false;
};

SupNorm sup_norm_S0(const GridFunction& f, const NormParams& p);
SupNorm sup_norm_S0a(const GridFunction& f, const NormParams& p);
// Hilbert-space counterparts with the squared weights (Riemann sums on the grid)
double l2_norm_S0(const GridFunction& f, const NormParams& p);
double l2_norm_S0a(const GridFunction& f, const NormParams& p);

// Finite exponential sum F(z) = sum_k w_k exp(i t_k z), a quadrature image
// of an integral over t. Accurate for |Re z| well below pi / (node spacing).
class SpectralFunction {
 public:
  SpectralFunction(std::vector<double> nodes, std::vector<cplx> weights);
  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;
  const std::vector<double>& nodes() const { return t_; }
  const std::vector<cplx>& weights() const { return w_; }
  SpectralFunction scaled(cplx s) const;
  SpectralFunction shifted_frequency(double b) const;  // multiplies by exp(i b z)
  // samples prod_j F(z_j) on a grid (separable evaluation)
  GridFunction on_grid(std::vector<Axis> axes, Provenance p = Provenance::TransformOfBump) const;

 private:
  std::vector<double> t_;
  std::vector<cplx> w_;
};

double standard_bump(double t);  // exp(-1/(1-t^2)) on (-1, 1)
SpectralFunction bump_transform(int nodes = 1024);
// bump transform normalized to unit integral over the real line
SpectralFunction sigma0(int nodes = 1024);

struct ApproxResult {
  GridFunction fnu;
  double supDiffOnCompact;  // max |sigma_nu - 1| over grid nodes with |z| <= 1
};

// sigma_nu(z) = h sum_k sigma0(z - xi_k) with nu midpoints on [-sqrt(nu), sqrt(nu)]
cplx sigma_nu(const SpectralFunction& s0, int nu, cplx z);
ApproxResult approx_sequence(const GridFunction& f, const SpectralFunction& s0, int nu);

}  // namespace carrier
