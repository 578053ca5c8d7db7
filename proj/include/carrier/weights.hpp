#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carrier/report.hpp"

namespace carrier {

struct WeightFlags {
  bool normalized = false;
  bool monotone = false;
  bool logConvex = false;
};

// Positive sequence a_0..a_M stored as logarithms, plus an optional closed
// form log a_nu for nu > M (real argument, used by tail searches).
class WeightSequence {
 public:
  using TailRule = std::function<double(double)>;

  WeightSequence(std::vector<double> logTerms, TailRule tail, std::string label);

  static WeightSequence gevrey(double alpha, int prefix = 200);
  static WeightSequence constant_one(int prefix = 200);

  double log_term(double nu) const;  // integral nu uses the prefix when possible
  int prefix_length() const { return static_cast<int>(logTerms_.size()) - 1; }
  bool has_tail() const { return static_cast<bool>(tail_); }
  const TailRule& tail() const { return tail_; }
  std::span<const double> log_terms() const { return logTerms_; }
  const WeightFlags& flags() const { return flags_; }
  const std::string& label() const { return label_; }
  std::optional<double> gevrey_alpha() const { return alpha_; }

  // Fitted (C, h) with a_{nu+1} <= C h^nu a_nu on the prefix.
  struct RatioBound {
    double logC;
    double logH;
  };
  RatioBound ratio_bound() const;

 private:
  std::vector<double> logTerms_;
  TailRule tail_;
  std::string label_;
  WeightFlags flags_;
  std::optional<double> alpha_;
};

struct IndicatorValue {
  double logValue;
  std::int64_t maximizer;
  bool fromTail;
};

// log a(r) = sup_nu (nu log r - log a_nu)
IndicatorValue log_indicator(const WeightSequence& seq, double r);

// log-spaced grid, 512 points per decade over [1e-3, 1e8]
std::vector<double> r_grid(double lo = 1e-3, double hi = 1e8, int perDecade = 512);

class IndicatorFunction {
 public:
  explicit IndicatorFunction(const WeightSequence& seq, std::vector<double> grid = r_grid());
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator()(double r) const { return log_indicator(seq_, r).logValue; }

 private:
  WeightSequence seq_;
  std::vector<double> grid_;
  std::vector<double> values_;
};

WeightSequence regularize(const WeightSequence& seq);

struct NqaResult {
  bool verdict;
  double partialSum;
  double tailBound;  // +inf when no finite bound exists
  std::int64_t exactTerms;
  double condensationRatio;
};

NqaResult check_nonquasianalytic(const WeightSequence& seq, double tol = 1e-6);

EstimateReport check_exponential_bound(const WeightSequence& seq, double epsilon);

struct ConvexityTriple {
  double r1, r2, lambda;
};

EstimateReport check_multiplicative_convexity(const WeightSequence& seq, std::span<const ConvexityTriple> triples);
EstimateReport check_multiplicative_convexity(const WeightSequence& seq, int samples, std::uint64_t seed);

EstimateReport check_dimension_splitting(const WeightSequence& seq, std::span<const double> x);
EstimateReport check_dimension_splitting(const WeightSequence& seq, int d, int samples, std::uint64_t seed);

}  // namespace carrier
