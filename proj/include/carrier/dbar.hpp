#pragma once

#include <optional>
#include <vector>

#include "carrier/cone.hpp"
#include "carrier/envelope.hpp"
#include "carrier/grid.hpp"
#include "carrier/report.hpp"
#include "carrier/weights.hpp"

namespace carrier {

// chi = chi0 * indicator(U), chi0 a radial bump supported in B_epsilon with unit mass.
// d = 1 and d = 2 only.
class Cutoff {
 public:
  const Cone& cone() const { return U_; }
  double epsilon() const { return eps_; }
  int dim() const { return U_.dim(); }
  double chi0(const Vec& u) const;
  double chi(const Vec& x) const;
  Vec grad(const Vec& x) const;  // analytic gradient (boundary integral)
  double chi0_mass() const;      // independent quadrature of the integral of chi0

  // 0 <= chi <= 1, chi = 1 deep inside, chi = 0 far outside, unit mass
  EstimateReport certificate(const std::vector<Axis>& axes) const;

  friend Cutoff build_cutoff(const Cone& U, double epsilon);

 private:
  Cutoff(Cone U, double eps) : U_(std::move(U)), eps_(eps) {}
  double radial_cdf(double rho) const;  // integral_0^rho chi0(s) s ds (d = 2), from the table G_
  double line_integral(const Vec& x, const Vec& e) const;  // integral_0^inf chi0(x - t e) dt

  Cone U_;
  double eps_;
  double norm_ = 1.0;  // chi0 = norm * bump(|u| / eps)
  std::vector<Vec> normals_;
  std::vector<std::vector<Vec>> rays_;  // boundary rays lying on each normal's line
  std::vector<double> G_;               // radial cdf at eps * j / 4096
};

Cutoff build_cutoff(const Cone& U, double epsilon);

struct DbarData {
  std::vector<GridFunction> eta;
  double sourceNorm = 0;  // sup norm of f with B = 1, N = 0 over U
  double scale() const;   // max |eta_j| over the grid
};

struct SplitResult {
  GridFunction f1;
  GridFunction f2;
  DbarData data;
  EstimateReport report;
};

// f1 = f chi, f2 = f (1 - chi), eta_j = f d(chi)/dx_j / 2. V is the cone used for the f2 bound.
SplitResult split(const GridFunction& f, const Cutoff& c, const Cone& V);
// throws BoundViolation if a fitted constant grows by more than the given factor under refinement
void check_split_refinement(const EstimateReport& coarse, const EstimateReport& fine, double factor = 2.0);

// antisymmetrized d/dzbar_k eta_j - d/dzbar_j eta_k by 4th-order differences
EstimateReport check_consistency(const DbarData& data);

// d/dzbar by centered 4th-order differences; zero where the stencil leaves the grid
GridFunction dbar_fd(const GridFunction& u);
// max |dbar u - target| over nodes at least (mx, my) nodes from the x / y edges
double dbar_residual(const GridFunction& u, const GridFunction* target, int mx, int my);

struct WeightField {
  std::vector<Axis> axes;
  std::vector<double> varrho;  // 2 rho + (d + 1) log(1 + |z|^2)
};
WeightField make_weight_field(const EnvelopeSamples& rho);
// varrho >= 2 max_j log|eta_j| where eta is nonzero
EstimateReport check_weight_field(const WeightField& w, const DbarData& data);

struct DbarSolution {
  GridFunction psi;
  EstimateReport l2Report;
};
// Pompeiu integral (1/pi) sum eta(w) h^2 / (z - w) over the punctured lattice,
// corrected by -(h^2/pi) d(eta)/dz. d = 1, square spacing.
GridFunction pompeiu(const GridFunction& eta);
DbarSolution solve_dbar(const DbarData& data, const WeightField& w);
DbarSolution solve_dbar(const DbarData& data);

struct DecomposeOptions {
  double epsilon = 0.4;
  double windowDelta = kDefaultWindowDelta;
  double B = 1.0;       // norm parameter for both targets
  double A = 1.0;       // Gevrey scale for the second target
  double yMargin = 0.5;  // residuals ignore this band at the y edges (eta truncation)
  int xMargin = 8;       // nodes
  bool buildWeight = true;
};

struct DecomposeResult {
  GridFunction f1p;
  GridFunction f2p;
  GridFunction psi;
  double residual1 = 0, residual2 = 0, scale = 0;
  EstimateReport report;
};

DecomposeResult decompose(const GridFunction& f, const Cone& K, const Cone& V, const Cone& Uprime, const Cone& U,
                          const WeightSequence& seq, const DecomposeOptions& opt = {});

}  // namespace carrier
