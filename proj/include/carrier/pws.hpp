#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "carrier/cone.hpp"
#include "carrier/grid.hpp"
#include "carrier/report.hpp"

namespace carrier {

using MultiIndex = std::vector<int>;

// sum_{k >= 0} k^power delta_{k step}; Laplace image Li_{-power}(exp(i step.zeta))
struct CombFactor {
  Vec step;
  int power = 0;
};

// c * delta^{(q)}_x convolved with a list of combs.
// Transform: c (i zeta)^q exp(i x.zeta) prod_m Li_{-p_m}(exp(i s_m.zeta)).
struct Term {
  cplx c = 1.0;
  Vec x;
  MultiIndex q;
  std::vector<CombFactor> combs;
};

class CarriedFunctional {
 public:
  // throws CarrierViolation if a point or comb step leaves the carrier
  CarriedFunctional(std::vector<Term> terms, Cone carrier);

  static CarriedFunctional delta(const Vec& x0, const Cone& carrier, cplx c = 1.0);
  static CarriedFunctional derivative(const Vec& x0, MultiIndex q, const Cone& carrier, cplx c = 1.0);
  static CarriedFunctional comb(const Vec& start, const Vec& step, const Cone& carrier, int power = 0, cplx c = 1.0);

  int dim() const { return carrier_.dim(); }
  const std::vector<Term>& terms() const { return terms_; }
  const Cone& carrier() const { return carrier_; }
  bool has_combs() const;

  CarriedFunctional operator+(const CarriedFunctional& o) const;
  CarriedFunctional operator*(cplx s) const;

 private:
  std::vector<Term> terms_;
  Cone carrier_;
};

// Li_{-p}(w) = sum_{k >= 0} k^p w^k for |w| < 1 (Eulerian-polynomial closed form), p <= 20
cplx neg_polylog(int p, cplx w);

// throws OutsideTube when a comb series diverges at zeta (|exp(i s.zeta)| >= 1)
cplx laplace_transform(const CarriedFunctional& v, std::span<const cplx> zeta);
cplx laplace_transform(const CarriedFunctional& v, cplx zeta);  // d = 1
// same value from partial sums of the comb series; Divergence if a ratio test fails,
// reports the truncation bound through tailBound when non-null
cplx laplace_series(const CarriedFunctional& v, std::span<const cplx> zeta, double tol = 1e-14,
                    double* tailBound = nullptr);

struct ExpNorm {
  double value = 0;  // sup of the weight times |exp(i x.zeta)|
  Vec argmax;        // x attaining it (y = 0 there)
  bool finite = true;
};
// ||exp(i z.zeta)||_{U,B,N}; throws Saturated when the supremum is infinite
ExpNorm exp_norm(std::span<const cplx> zeta, const Cone& U, double B, int N);

struct TubeDomain {
  Cone V;  // open cone of imaginary parts
  double R;
  Cone W;  // W compact in V
  TubeDomain(Cone V, double R, Cone W);
};

using AnalyticFn = std::function<cplx(std::span<const cplx>)>;

struct AnalyticSample {
  int dim = 1;
  std::vector<cplx> points;  // dim entries per sample
  std::vector<cplx> values;
  Provenance provenance = Provenance::ClosedForm;
  std::size_t size() const { return values.size(); }
  std::span<const cplx> point(std::size_t i) const {
    return {points.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

// samples with Im zeta = t w, w a unit direction of W, t log-spaced in [etaFloor, R],
// real parts uniform in the ball |zeta| <= R
AnalyticSample sample_tube(const AnalyticFn& u, const TubeDomain& tube, double etaFloor = 0x1p-10, int nEta = 41,
                           int nXi = 41, Provenance p = Provenance::ClosedForm);
AnalyticSample sample_tube(const CarriedFunctional& v, const TubeDomain& tube, double etaFloor = 0x1p-10, int nEta = 41,
                           int nXi = 41);

struct DecayFit {
  double C = 0;       // |u| <= C |Im zeta|^-N on the sample (upper envelope fit)
  double N = 0;
  double epsFit = 0;  // |u| ~ C' exp(eps |Im zeta|^{-1/(alpha-1)}) comparison fit
  double epsRms = 0;  // rms of that fit
  EstimateReport report;
};
// least squares on the per-level maxima of log|u| against -log|Im zeta|;
// pass iff the slope over the lowest quarter of levels does not exceed N by more than slopeTol
DecayFit verify_decay(const AnalyticSample& u, const TubeDomain& tube, double alpha = 3.0, double slopeTol = 0.1);

// sup |Im zeta|^N |u| over |zeta| <= R, Im zeta in U, |Im zeta| = R 2^(-k/perOctave) down to the floor;
// repeated at floors etaFloor, etaFloor/2, etaFloor/4 and throws Saturated if it keeps growing
double algebra_norm(const AnalyticFn& u, const Cone& U, double R, int N, double etaFloor = 0x1p-10, int perOctave = 8,
                    int nXi = 81);

// atom-wise convolution; carrier is the convex hull of both carriers (CarrierViolation if not properly convex)
CarriedFunctional convolve(const CarriedFunctional& a, const CarriedFunctional& b);
// laplace(a * b) = laplace(a) laplace(b) at the given points (relative error < tol)
EstimateReport check_convolution_product(const CarriedFunctional& a, const CarriedFunctional& b,
                                         std::span<const std::vector<cplx>> points, double tol = 1e-9);

struct BoundaryValue {
  std::vector<double> eta;
  std::vector<cplx> pairings;
  cplx limit;
  double rate = 0;  // fitted exponent of |pairing - limit| against eta
  EstimateReport report;
};
// pairings int u(xi + i eta) f(xi) dxi on [a, b] (f supported there) along eta = etaPath,
// Richardson limit assuming an O(eta) error; d = 1
BoundaryValue boundary_value(const std::function<cplx(cplx)>& u, const std::function<double(double)>& f, double a,
                             double b, std::span<const double> etaPath);
std::vector<double> dyadic_path(int mFirst, int mLast);  // eta = 2^-m

// min over sampled unit x in Uprime and eta in W of x.eta; pass iff positive
EstimateReport check_theta_prime(const Cone& Uprime, const Cone& W, double resolution = 0.0);

}  // namespace carrier
