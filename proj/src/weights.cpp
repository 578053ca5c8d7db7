#include "carrier/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_increment(const WeightSequence& s, double nu) {
  return s.log_term(nu + 1) - s.log_term(nu);
}

// Neumaier-compensated running sum
struct CompensatedSum {
  double sum = 0, c = 0;
  void add(double v) {
    double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

WeightSequence::WeightSequence(std::vector<double> logTerms, TailRule tail, std::string label)
    : logTerms_(std::move(logTerms)), tail_(std::move(tail)), label_(std::move(label)) {
  if (logTerms_.empty()) throw Error(ErrorKind::InvalidArgument, "weight sequence needs a_0");
  for (double v : logTerms_)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "weight terms must be positive and finite");
  const auto M = logTerms_.size();
  flags_.normalized = std::abs(logTerms_[0]) < 1e-12;
  flags_.monotone = true;
  flags_.logConvex = true;
  for (std::size_t i = 0; i + 1 < M; ++i)
    if (logTerms_[i + 1] < logTerms_[i] - 1e-12) flags_.monotone = false;
  for (std::size_t i = 1; i + 1 < M; ++i) {
    double slack = logTerms_[i - 1] + logTerms_[i + 1] - 2 * logTerms_[i];
    if (slack < -1e-12 * (1.0 + std::abs(logTerms_[i]))) flags_.logConvex = false;
  }
}

WeightSequence WeightSequence::gevrey(double alpha, int prefix) {
  if (!(alpha >= 1.0)) throw Error(ErrorKind::InvalidArgument, "Gevrey exponent must be >= 1");
  auto rule = [alpha](double nu) { return nu <= 0 ? 0.0 : alpha * nu * std::log(nu); };
  std::vector<double> t(static_cast<std::size_t>(prefix) + 1);
  for (int i = 0; i <= prefix; ++i) t[static_cast<std::size_t>(i)] = rule(i);
  std::ostringstream os;
  os << "gevrey(" << alpha << ")";
  WeightSequence s(std::move(t), rule, os.str());
  s.alpha_ = alpha;
  return s;
}

WeightSequence WeightSequence::constant_one(int prefix) {
  return WeightSequence(std::vector<double>(static_cast<std::size_t>(prefix) + 1, 0.0),
                        [](double) { return 0.0; }, "constant(1)");
}

double WeightSequence::log_term(double nu) const {
  const auto M = prefix_length();
  if (nu < 0) throw Error(ErrorKind::InvalidArgument, "negative index");
  if (nu <= M && nu == std::floor(nu)) return logTerms_[static_cast<std::size_t>(nu)];
  if (!tail_) throw Error(ErrorKind::Inconclusive, "index beyond prefix and no tail rule");
  return tail_(nu);
}

WeightSequence::RatioBound WeightSequence::ratio_bound() const {
  // log a_{nu+1} - log a_nu <= log C + nu log h: fit the smallest slope whose
  // line through the worst intercept bounds every increment
  const auto M = prefix_length();
  if (M < 2) return {M == 1 ? logTerms_[1] - logTerms_[0] : 0.0, 0.0};
  double best = kInf, bestH = 0;
  for (int j = 1; j < M; ++j) {
    double logH = (logTerms_[static_cast<std::size_t>(j) + 1] - logTerms_[static_cast<std::size_t>(j)] -
                   (logTerms_[1] - logTerms_[0])) / j;
    logH = std::max(logH, 0.0);
    double logC = -kInf;
    for (int nu = 0; nu < M; ++nu)
      logC = std::max(logC, logTerms_[static_cast<std::size_t>(nu) + 1] - logTerms_[static_cast<std::size_t>(nu)] - nu * logH);
    double score = logC + M * logH;
    if (score < best) {
      best = score;
      bestH = logH;
    }
  }
  double logC = -kInf;
  for (int nu = 0; nu < M; ++nu)
    logC = std::max(logC, logTerms_[static_cast<std::size_t>(nu) + 1] - logTerms_[static_cast<std::size_t>(nu)] - nu * bestH);
  return {logC, bestH};
}

IndicatorValue log_indicator(const WeightSequence& seq, double r) {
  if (!(r >= 0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "indicator needs finite r >= 0");
  const auto terms = seq.log_terms();
  if (r == 0) return {-terms[0], 0, false};
  const double L = std::log(r);
  const auto M = seq.prefix_length();

  std::int64_t arg = 0;
  double best = -terms[0];
  if (seq.flags().logConvex) {
    // nu L - log a_nu is concave: first index whose increment is <= 0
    int lo = 0, hi = M;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      double g = L - (terms[static_cast<std::size_t>(mid) + 1] - terms[static_cast<std::size_t>(mid)]);
      if (g > 0) lo = mid + 1;
      else hi = mid;
    }
    arg = lo;
    best = static_cast<double>(lo) * L - terms[static_cast<std::size_t>(lo)];
  } else {
    for (int nu = 1; nu <= M; ++nu) {
      double v = nu * L - terms[static_cast<std::size_t>(nu)];
      if (v > best) {
        best = v;
        arg = nu;
      }
    }
  }
  if (arg < M || !seq.has_tail()) return {best, arg, false};

  auto g = [&](double nu) { return L - log_increment(seq, nu); };
  double lo = M;
  if (g(lo) <= 0) return {best, arg, false};
  double step = 1;
  while (g(lo + step) > 0) {
    lo += step;
    step *= 2;
    if (lo > 0x1p52) throw Error(ErrorKind::TailDivergence, "indicator supremum is infinite at r = " + std::to_string(r));
  }
  double hi = lo + step;  // g(lo) > 0 >= g(hi)
  while (hi - lo > 1) {
    double mid = std::floor((lo + hi) / 2);
    if (g(mid) > 0) lo = mid;
    else hi = mid;
  }
  double v = hi * L - seq.log_term(hi);
  return {v, static_cast<std::int64_t>(hi), true};
}

std::vector<double> r_grid(double lo, double hi, int perDecade) {
  std::vector<double> g;
  const double a = std::log10(lo), b = std::log10(hi);
  const auto n = static_cast<int>(std::lround((b - a) * perDecade));
  g.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) g.push_back(std::pow(10.0, a + static_cast<double>(k) / perDecade));
  g.front() = lo;
  g.back() = hi;
  return g;
}

IndicatorFunction::IndicatorFunction(const WeightSequence& seq, std::vector<double> grid)
    : seq_(seq), grid_(std::move(grid)) {
  values_.reserve(grid_.size());
  for (double r : grid_) {
    try {
      values_.push_back(log_indicator(seq_, r).logValue);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TailDivergence) throw;
      values_.push_back(kInf);
    }
  }
}

WeightSequence regularize(const WeightSequence& seq) {
  std::vector<double> rs;
  for (double r : r_grid())
    if (r >= 1.0) rs.push_back(r);
  rs.front() = 1.0;
  std::vector<double> la(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) la[i] = log_indicator(seq, rs[i]).logValue;
  const auto M = seq.prefix_length();
  std::vector<double> out(static_cast<std::size_t>(M) + 1);
  for (int nu = 0; nu <= M; ++nu) {
    double best = -kInf;
    for (std::size_t i = 0; i < rs.size(); ++i) best = std::max(best, nu * std::log(rs[i]) - la[i]);
    out[static_cast<std::size_t>(nu)] = best;
  }
  return WeightSequence(std::move(out), seq.tail(), "regularized(" + seq.label() + ")");
}

NqaResult check_nonquasianalytic(const WeightSequence& seq, double tol) {
  if (!seq.has_tail()) throw Error(ErrorKind::Inconclusive, "no tail rule: prefix alone cannot bound the series");
  auto term = [&](double nu) { return std::exp(-seq.log_term(nu) / nu); };
  constexpr int kExactPow = 20;
  const std::int64_t N = std::max<std::int64_t>(seq.prefix_length() + 1, std::int64_t{1} << kExactPow);
  CompensatedSum s;
  for (std::int64_t nu = 1; nu < N; ++nu) s.add(term(static_cast<double>(nu)));

  // Cauchy condensation beyond N: sum_{n >= 2^K} t_n <= sum_{k >= K} 2^k t_{2^k}
  const int K0 = static_cast<int>(std::ceil(std::log2(static_cast<double>(N))));
  constexpr int kLast = 62;
  std::vector<double> c;
  for (int k = K0; k <= kLast; ++k) c.push_back(std::ldexp(term(std::ldexp(1.0, k)), k));
  double q = 0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) q = std::max(q, c[i + 1] / c[i]);
  NqaResult r{false, s.value(), kInf, N - 1, q};
  // terms between N and 2^K0 (empty when N is a power of two) are dominated by c[0]
  if (q <= 1.0 - tol) {
    CompensatedSum t;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) t.add(c[i]);
    t.add(c.back() / (1.0 - q));
    if ((std::int64_t{1} << K0) > N) t.add(static_cast<double>((std::int64_t{1} << K0) - N) * term(static_cast<double>(N)));
    r.tailBound = t.value();
    r.verdict = std::isfinite(r.tailBound);
  }
  return r;
}

EstimateReport check_exponential_bound(const WeightSequence& seq, double epsilon) {
  EstimateReport rep;
  rep.name = "exponential-bound";
  rep.set("epsilon", epsilon);
  const auto grid = r_grid();
  double best = -kInf;
  std::size_t arg = 0;
  try {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double v = log_indicator(seq, grid[i]).logValue - epsilon * grid[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TailDivergence) throw;
    rep.pass = false;
    rep.note("indicator is infinite on part of the grid");
    rep.set("log_C_eps", kInf);
    return rep;
  }
  rep.set("log_C_eps", best);
  rep.set("argmax_r", grid[arg]);
  rep.samples = grid.size();
  rep.minMargin = 0;
  if (arg + 1 == grid.size()) {
    rep.pass = false;
    rep.note("maximum sits at the top of the r-grid; constant not certified");
  }
  return rep;
}

EstimateReport check_multiplicative_convexity(const WeightSequence& seq, std::span<const ConvexityTriple> triples) {
  EstimateReport prod, interp;
  prod.name = "product-form";
  interp.name = "log-interpolated-form";
  double worstR1 = 0, worstR2 = 0, worstL = 0;
  for (const auto& t : triples) {
    double a1 = log_indicator(seq, t.r1).logValue;
    double a2 = log_indicator(seq, t.r2).logValue;
    double am = log_indicator(seq, (1 - t.lambda) * t.r1 + t.lambda * t.r2).logValue;
    double tol = 1e-10 * (1.0 + std::abs(am));
    double mi = (1 - t.lambda) * a1 + t.lambda * a2 - am;
    prod.observe(a1 + a2 - am + tol);
    if (mi + tol < interp.minMargin) {
      worstR1 = t.r1;
      worstR2 = t.r2;
      worstL = t.lambda;
    }
    interp.observe(mi + tol);
  }
  prod.pass = prod.minMargin >= 0;
  interp.pass = interp.minMargin >= 0;
  if (!interp.pass) {
    interp.set("worst_r1", worstR1);
    interp.set("worst_r2", worstR2);
    interp.set("worst_lambda", worstL);
  }
  EstimateReport rep;
  rep.name = "multiplicative-convexity";
  rep.set("product_min_margin", prod.minMargin);
  rep.set("interpolated_min_margin", interp.minMargin);
  rep.add(std::move(prod));
  rep.add(std::move(interp));
  return rep;
}

EstimateReport check_multiplicative_convexity(const WeightSequence& seq, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto grid = r_grid();
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  std::vector<ConvexityTriple> t;
  t.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) t.push_back({grid[pick(rng)], grid[pick(rng)], lam(rng)});
  return check_multiplicative_convexity(seq, t);
}

EstimateReport check_dimension_splitting(const WeightSequence& seq, std::span<const double> x) {
  EstimateReport rep;
  rep.name = "dimension-splitting";
  double lhs = 0, m = 0;
  for (double v : x) {
    lhs += log_indicator(seq, std::abs(v)).logValue;
    m = std::max(m, std::abs(v));
  }
  double rhs = log_indicator(seq, m / static_cast<double>(x.size())).logValue;
  rep.observe(lhs - rhs + 1e-12 * (1.0 + std::abs(rhs)));
  rep.pass = rep.minMargin >= 0;
  rep.set("lhs", lhs);
  rep.set("rhs", rhs);
  return rep;
}

EstimateReport check_dimension_splitting(const WeightSequence& seq, int d, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ex(-3.0, 6.0);
  std::bernoulli_distribution zero(0.1);
  EstimateReport rep;
  rep.name = "dimension-splitting";
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int i = 0; i < samples; ++i) {
    for (auto& v : x) v = zero(rng) ? 0.0 : std::pow(10.0, ex(rng));
    auto one = check_dimension_splitting(seq, x);
    rep.observe(one.minMargin);
  }
  rep.pass = rep.minMargin >= 0;
  rep.set("dim", d);
  return rep;
}

}  // namespace carrier
