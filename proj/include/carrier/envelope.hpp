#pragma once

#include <functional>
#include <span>
#include <vector>

#include "carrier/cone.hpp"
#include "carrier/grid.hpp"
#include "carrier/mollifier.hpp"
#include "carrier/report.hpp"
#include "carrier/weights.hpp"

namespace carrier {

// H(r) = max over sampled nodes with ||x| - r| <= bin of max_j log|eta_j| - |y|.
// -inf where no node falls in the bin.
class EtaProfile {
 public:
  explicit EtaProfile(std::span<const GridFunction> eta, double bin = 0.125);
  double operator()(double r) const;
  double bin() const { return bin_; }
  double max_radius() const { return radii_.empty() ? 0.0 : radii_.back(); }
  bool empty() const { return radii_.empty(); }
  EtaProfile shifted(double logScale) const;  // profile of lambda * eta, lambda = e^logScale

  // H(r) <= C'_N - N log(1 + r), constants C'_N fitted for N = 0..Nmax
  EstimateReport verify_decay(int Nmax = 4) const;

 private:
  EtaProfile() = default;
  double bin_ = 0.125;
  std::vector<double> radii_;  // sorted node radii with finite values
  std::vector<double> vals_;
};

// Throws UnsupportedEta if some eta_j is nonzero at a node farther than epsilon from the boundary of U.
void check_eta_support(std::span<const GridFunction> eta, const Cone& U, double epsilon);

// log-spaced 256 points on [1e-3, 1e3], r = 0, and uniform steps of 2*bin up to rMax
std::vector<double> default_r_family(double rMax, double bin = 0.125);

// orthogonal map taking e to the first basis vector (Householder, identity if equal)
Eigen::MatrixXd householder_to_e1(const Vec& e);

class EnvelopeField {
 public:
  EnvelopeField(Window W, const EtaProfile& H, std::vector<double> rFamily, std::vector<Vec> directions);

  int dim() const { return dim_; }
  const Window& window() const { return W_; }
  const std::vector<Vec>& directions() const { return dirs_; }
  const std::vector<double>& r_values() const { return r_; }  // family members with finite H
  const std::vector<double>& h_values() const { return h_; }

  double rho0(cplx zeta) const { return rho0_closed(zeta, W_); }
  double rho1(std::span<const cplx> z) const;
  double rho_e(const Vec& e, std::span<const cplx> z) const;
  double operator()(std::span<const cplx> z) const;
  // values at every node of a grid with axes x1..xd, y1..yd
  std::vector<double> on_grid(const std::vector<Axis>& axes) const;

 private:
  int dim_;
  Window W_;
  std::vector<double> r_, h_;
  std::vector<Vec> dirs_;
  std::vector<Eigen::MatrixXd> T_;
  std::vector<std::size_t> order_;  // family indices by decreasing H
};

struct EnvelopeOptions {
  double theta = 0.0;       // must not exceed the angular separation of U' and U
  double epsilon = 0.4;     // boundary strip width; 2 epsilon + bin < 1
  double resolution = 0.0;  // sphere sampling of the boundary of U; 0 = default
  std::vector<double> rFamily;  // empty = default_r_family
};

EnvelopeField build_envelope(const Cone& U, const Cone& Uprime, const Window& W, const EtaProfile& H,
                             const EnvelopeOptions& opt = {});

struct EnvelopeSamples {
  std::vector<Axis> axes;
  std::vector<double> rho;
};
EnvelopeSamples sample_envelope(const EnvelopeField& f, std::vector<Axis> axes);

// Children: lower bound on the boundary strip, global upper bound (constant C_BN),
// decay on U' (constant C_B).
EstimateReport verify_envelope(const EnvelopeSamples& rho, std::span<const GridFunction> eta, const Cone& U,
                               const Cone& Uprime, double B, int N, const WeightSequence& seq, double epsilon);
EstimateReport verify_envelope(const EnvelopeField& rho, std::span<const GridFunction> eta, const Cone& U,
                               const Cone& Uprime, double B, int N, const WeightSequence& seq, double epsilon);

// relative drift of the fitted constants between two resolutions, pass if < tol
EstimateReport compare_resolutions(const EstimateReport& coarse, const EstimateReport& fine, double tol = 0.05);

// u(center) <= mean over 16 circle points + 1e-6 + |mean16 - mean32|
EstimateReport check_subharmonic(const std::function<double(cplx)>& u, cplx center, double radius);
// along the complex line z0 + lambda v
EstimateReport check_subharmonic(const EnvelopeField& f, std::span<const cplx> z0, std::span<const cplx> v,
                                 double radius);

}  // namespace carrier
