#pragma once

#include <complex>
#include <vector>

#include "carrier/report.hpp"
#include "carrier/weights.hpp"

namespace carrier {

using cplx = std::complex<double>;

// Even, nonnegative, compactly supported density built as the convolution of
// K normalized boxes. Stored exactly as a piecewise polynomial on cells of
// width h covering [-delta, delta].
class Mollifier {
 public:
  double delta() const { return delta_; }
  double cell() const { return h_; }
  int half_cells() const { return n_; }
  const WeightSequence& sequence() const { return seq_; }
  const std::vector<int>& box_half_cells() const { return m_; }
  std::vector<double> widths() const;  // full box widths 2 m_k h

  double value(double t) const;
  double derivative(double t, int order) const;
  double cdf(double t) const;
  std::vector<double> samples(int n) const;  // n + 1 equispaced nodes over [-delta, delta]
  cplx transform(cplx zeta) const;          // integral of exp(i t zeta) omega(t)
  double log_abs_transform(cplx zeta) const;

  // |omega^(nu)| <= C0 A0^nu a_nu for nu <= maxCertifiedOrder
  double C0() const { return C0_; }
  double A0() const { return A0_; }
  static constexpr int maxCertifiedOrder = 8;
  double derivative_bound(int nu) const;      // rigorous product bound
  double sampled_derivative_sup(int nu) const;  // from the exact polynomials
  double mass() const;  // exact integral of the stored polynomials

  EstimateReport certificate() const;

  friend Mollifier build_mollifier(double delta, const WeightSequence& seq, int K, int targetHalfCells);

 private:
  Mollifier(double delta, WeightSequence seq) : delta_(delta), seq_(std::move(seq)) {}
  double eval_cell(int c, double s, int order) const;

  double delta_;
  WeightSequence seq_;
  double h_ = 0;
  int n_ = 0;
  int deg_ = 0;  // polynomial degree + 1 (stride of coeffs_)
  std::vector<int> m_;
  std::vector<double> coeffs_;  // 2n cells, local variable s in [0, 1]
  std::vector<double> cum_;     // cdf at the left edge of each cell
  double C0_ = 0, A0_ = 0;
};

Mollifier build_mollifier(double delta, const WeightSequence& seq, int K = 12, int targetHalfCells = 4096);

// 1 + 2 delta must stay below pi/3 for windows
constexpr double kDefaultMollifierDelta = 0.05;
constexpr double kDefaultWindowDelta = 0.02;

// Omega = omega * indicator of [-(1+delta), 1+delta]
class Window {
 public:
  explicit Window(Mollifier w);
  double delta() const { return omega_.delta(); }
  const Mollifier& mollifier() const { return omega_; }
  double value(double t) const;
  double half_support() const { return 1.0 + 2.0 * delta(); }
  std::vector<double> samples(int n) const;  // n + 1 equispaced nodes over the support
  double integral(int intervals = 8192) const;
  cplx laplace_quadrature(cplx zeta, int intervals = 8192) const;  // composite Simpson
  cplx laplace(cplx zeta) const;                                   // closed form
  double log_abs_laplace(cplx zeta) const;

 private:
  Mollifier omega_;
};

// log(2 |Omega~(zeta)| / delta) by quadrature
double rho0(cplx zeta, const Window& W);
// same quantity from the closed-form transform; -inf at exact zeros
double rho0_closed(cplx zeta, const Window& W);

// rho0 >= |Im zeta| over a grid of the strip |Re zeta| < 1, both signs of Im
EstimateReport check_strip_lower_bound(const Window& W, int nRe = 41, int nIm = 81, double imMax = 20.0,
                                       bool quadrature = true);
// upper fit log(2|Omega~(xi)|/delta) <= -(xi/A)^(1/alpha) + const on a real sweep
EstimateReport fit_real_decay(const Window& W, double xiMin, double xiMax, double step = 0.05);

}  // namespace carrier
