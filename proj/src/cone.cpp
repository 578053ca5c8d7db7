#include "carrier/cone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "carrier/error.hpp"

namespace carrier {

namespace {

constexpr int kMaxHrepDim = 4;

Vec unit(const Vec& v, const char* what) {
  double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n))
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be a nonzero finite vector");
  return v / n;
}

void push_unique(std::vector<Vec>& out, const Vec& v) {
  for (const auto& w : out)
    if ((w - v).norm() < 1e-9) return;
  out.push_back(v);
}

// Generators of {y : g.y >= 0 for all g} by extreme-ray enumeration.
std::vector<Vec> dual_generators(const std::vector<Vec>& gens, int d) {
  std::vector<Vec> out;
  if (gens.empty()) {
    for (int i = 0; i < d; ++i) {
      out.push_back(Vec::Unit(d, i));
      out.push_back(-Vec::Unit(d, i));
    }
    return out;
  }
  Eigen::MatrixXd G(d, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) G.col(static_cast<Eigen::Index>(j)) = gens[j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int k = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * sv(0)) ++k;
  Eigen::MatrixXd Q = svd.matrixU().leftCols(k);
  Eigen::MatrixXd Lperp = svd.matrixU().rightCols(d - k);
  for (Eigen::Index i = 0; i < Lperp.cols(); ++i) {
    push_unique(out, Lperp.col(i));
    push_unique(out, -Lperp.col(i));
  }

  Eigen::MatrixXd R = Q.transpose() * G;  // k x m
  const auto m = static_cast<int>(gens.size());
  auto feasible = [&](const Eigen::VectorXd& w) {
    for (int i = 0; i < m; ++i)
      if (R.col(i).dot(w) < -1e-10 * R.col(i).norm() * w.norm()) return false;
    return true;
  };
  auto consider = [&](Eigen::VectorXd w) {
    if (w.norm() < 1e-14) return;
    w.normalize();
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd c = s * w;
      if (feasible(c)) push_unique(out, (Q * c).normalized());
    }
  };

  if (k == 1) {
    consider(Eigen::VectorXd::Ones(1));
    return out;
  }
  // (k-1)-subsets of the reduced generators
  std::vector<int> idx(static_cast<std::size_t>(k - 1));
  for (int i = 0; i < k - 1; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k - 1 > m) return out;
  while (true) {
    Eigen::MatrixXd M(k - 1, k);
    for (int r = 0; r < k - 1; ++r) M.row(r) = R.col(idx[static_cast<std::size_t>(r)]).transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-10);
    if (lu.rank() == k - 1) consider(lu.kernel().col(0));
    int p = k - 2;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == m - (k - 1) + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < k - 1; ++q)
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
  return out;
}

double angle_to_axis(const Vec& x, const Vec& e) {
  double c = x.dot(e);
  double s = (x - c * e).norm();
  return std::atan2(s, c);
}

}  // namespace

Cone::Cone(int d, ConeKind k, Openness o) : dim_(d), kind_(std::move(k)), openness_(o) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "cone dimension must be positive");
  build_hrep();
}

Cone Cone::polyhedral(std::vector<Vec> generators, Openness o) {
  if (generators.empty())
    throw Error(ErrorKind::InvalidArgument, "polyhedral cone needs generators (use origin)");
  const auto d = static_cast<int>(generators.front().size());
  for (auto& g : generators) {
    if (g.size() != d) throw Error(ErrorKind::DimensionMismatch, "generator dimensions differ");
    if (!(g.norm() > 1e-12)) throw Error(ErrorKind::InvalidArgument, "zero generator");
  }
  return Cone(d, Polyhedral{std::move(generators)}, o);
}

Cone Cone::circular(Vec axis, double halfAngle, Openness o) {
  const auto d = static_cast<int>(axis.size());
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "circular cones need d >= 2");
  if (!(halfAngle > 0.0 && halfAngle < std::numbers::pi / 2))
    throw Error(ErrorKind::InvalidArgument, "half-angle must lie in (0, pi/2)");
  return Cone(d, Circular{unit(axis, "axis"), halfAngle}, o);
}

Cone Cone::ray(Vec direction) {
  const auto d = static_cast<int>(direction.size());
  return Cone(d, Ray{unit(direction, "ray direction")}, Openness::Closed);
}

Cone Cone::origin(int d, Openness o) { return Cone(d, Origin{}, o); }

Cone Cone::full(int d) { return Cone(d, Full{}, Openness::Open); }

Cone Cone::orthant(int d, Openness o) {
  std::vector<Vec> g;
  for (int i = 0; i < d; ++i) g.push_back(Vec::Unit(d, i));
  return polyhedral(std::move(g), o);
}

void Cone::build_hrep() {
  if (is_circular()) return;
  if (auto* p = std::get_if<Polyhedral>(&kind_)) {
    gens_ = p->generators;
  } else if (auto* r = std::get_if<Ray>(&kind_)) {
    gens_ = {r->direction};
  } else if (is_full()) {
    for (int i = 0; i < dim_; ++i) {
      gens_.push_back(Vec::Unit(dim_, i));
      gens_.push_back(-Vec::Unit(dim_, i));
    }
  }
  if (!gens_.empty()) {
    Eigen::MatrixXd G(dim_, static_cast<Eigen::Index>(gens_.size()));
    for (std::size_t j = 0; j < gens_.size(); ++j) G.col(static_cast<Eigen::Index>(j)) = gens_[j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    lu.setThreshold(1e-10);
    fullDim_ = lu.rank() == dim_;
  }
  if (dim_ <= kMaxHrepDim) normals_ = dual_generators(gens_, dim_);
}

const std::vector<Vec>& Cone::generators() const {
  if (is_circular()) throw Error(ErrorKind::InvalidArgument, "circular cone has no finite generators");
  return gens_;
}

const std::vector<Vec>& Cone::facet_normals() const {
  if (is_circular()) throw Error(ErrorKind::InvalidArgument, "circular cone has no finite facets");
  if (dim_ > kMaxHrepDim)
    throw Error(ErrorKind::UnsupportedDimension, "halfspace description limited to d <= 4");
  return normals_;
}

bool Cone::full_dimensional() const {
  if (is_circular()) return true;
  return fullDim_;
}

bool Cone::in_closure(const Vec& x, double tol) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from cone");
  double n = x.norm();
  if (is_full()) return true;
  if (is_origin()) return n <= tol;
  if (n <= tol) return true;
  if (auto* c = std::get_if<Circular>(&kind_)) return angle_to_axis(x / n, c->axis) <= c->halfAngle + tol;
  for (const auto& h : facet_normals())
    if (h.dot(x) < -tol * n) return false;
  return true;
}

bool Cone::in_interior(const Vec& x, double tol) const {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from cone");
  double n = x.norm();
  if (is_full()) return true;
  if (is_origin() || n <= tol) return false;
  if (auto* c = std::get_if<Circular>(&kind_)) return angle_to_axis(x / n, c->axis) < c->halfAngle - tol;
  if (!fullDim_) return false;
  for (const auto& h : facet_normals())
    if (h.dot(x) <= tol * n) return false;
  return true;
}

bool Cone::contains(const Vec& x, double tol) const {
  return openness_ == Openness::Closed ? in_closure(x, tol) : in_interior(x, tol);
}

std::string Cone::describe() const {
  std::ostringstream os;
  os << (openness_ == Openness::Open ? "open " : "closed ");
  auto vec = [&](const Vec& v) {
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    os << ')';
  };
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Polyhedral>) {
          os << "polyhedral";
          for (const auto& g : k.generators) vec(g);
        } else if constexpr (std::is_same_v<T, Circular>) {
          os << "circular axis=";
          vec(k.axis);
          os << " angle=" << k.halfAngle * 180.0 / std::numbers::pi << "deg";
        } else if constexpr (std::is_same_v<T, Ray>) {
          os << "ray ";
          vec(k.direction);
        } else if constexpr (std::is_same_v<T, Origin>) {
          os << "origin";
        } else {
          os << "full";
        }
      },
      kind_);
  os << " d=" << dim_;
  return os.str();
}

double distance_to_cone(const Vec& x, const Cone& U) {
  if (x.size() != U.dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from cone");
  if (U.is_empty()) throw Error(ErrorKind::EmptyCone, "distance to the empty cone");
  double n = x.norm();
  if (U.is_full()) return 0.0;
  if (U.is_origin()) return n;
  if (n == 0.0) return 0.0;
  if (auto* c = std::get_if<Circular>(&U.kind())) {
    double beta = angle_to_axis(x / n, c->axis);
    if (beta <= c->halfAngle) return 0.0;
    if (beta >= c->halfAngle + std::numbers::pi / 2) return n;
    return n * std::sin(beta - c->halfAngle);
  }
  const auto& gens = U.generators();
  if (gens.size() == 1) {
    Vec e = gens.front().normalized();
    double t = e.dot(x);
    return t >= 0 ? (x - t * e).norm() : n;
  }
  const auto& H = U.facet_normals();
  bool inside = true;
  for (const auto& h : H)
    if (h.dot(x) < 0) inside = false;
  if (inside) return 0.0;
  if (H.size() == 1) return std::max(0.0, -H.front().dot(x));

  // Dykstra's alternating projections onto the halfspaces h.y >= 0,
  // polished every few sweeps by an exact projection onto the active face
  auto polish = [&](const std::vector<Vec>& inc, const Vec& y) -> std::optional<double> {
    std::vector<Vec> act;
    for (std::size_t i = 0; i < H.size(); ++i)
      if (inc[i].norm() > 1e-12 * n || H[i].dot(y) <= 1e-12 * n) act.push_back(H[i]);
    if (act.empty()) return std::nullopt;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(act.size()), x.size());
    for (std::size_t i = 0; i < act.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = act[i].transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A * A.transpose());
    Vec lam = -cod.solve(A * x);
    Vec p = x + A.transpose() * lam;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam(i) < -1e-12 * n) return std::nullopt;
    for (const auto& h : H)
      if (h.dot(p) < -1e-12 * n) return std::nullopt;
    return (x - p).norm();
  };
  std::vector<Vec> inc(H.size(), Vec::Zero(x.size()));
  Vec y = x;
  for (int it = 1; it <= 10000; ++it) {
    Vec prev = y;
    for (std::size_t i = 0; i < H.size(); ++i) {
      Vec z = y + inc[i];
      double s = H[i].dot(z);
      Vec p = s < 0 ? Vec(z - s * H[i]) : z;
      inc[i] = z - p;
      y = p;
    }
    bool still = (y - prev).norm() < 1e-13 * (1.0 + n);
    if (it % 20 == 0 || still) {
      if (auto r = polish(inc, y)) return *r;
    }
    if (still) break;
  }
  return (x - y).norm();
}

double distance_to_boundary(const Vec& x, const Cone& U) {
  if (U.is_full()) return std::numeric_limits<double>::infinity();
  if (!U.in_closure(x, 0.0)) return distance_to_cone(x, U);
  const double n = x.norm();
  if (U.is_origin() || n == 0.0) return n;
  if (auto* c = std::get_if<Circular>(&U.kind())) return n * std::sin(c->halfAngle - angle_to_axis(x / n, c->axis));
  if (!U.full_dimensional()) return 0.0;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& h : U.facet_normals()) m = std::min(m, h.dot(x));
  return std::max(0.0, m);
}

Cone dual_cone(const Cone& C) {
  if (C.is_empty()) throw Error(ErrorKind::EmptyCone, "dual of the empty cone");
  const int d = C.dim();
  if (C.is_origin()) return Cone::full(d);
  if (C.is_full()) return Cone::origin(d);
  if (auto* c = std::get_if<Circular>(&C.kind()))
    return Cone::circular(c->axis, std::numbers::pi / 2 - c->halfAngle, Openness::Closed);
  if (d > kMaxHrepDim)
    throw Error(ErrorKind::UnsupportedDimension, "polyhedral dual limited to d <= 4");
  if (C.facet_normals().empty()) return Cone::origin(d);
  return Cone::polyhedral(C.facet_normals(), Openness::Closed);
}

bool is_compact_subcone(const Cone& V1, const Cone& V2) {
  if (V1.dim() != V2.dim()) throw Error(ErrorKind::DimensionMismatch, "cones of different dimension");
  constexpr double tol = 1e-12;
  if (V1.is_origin()) return true;
  if (V2.is_full()) return true;
  if (V1.is_full() || V2.is_origin()) return false;

  auto* c1 = std::get_if<Circular>(&V1.kind());
  auto* c2 = std::get_if<Circular>(&V2.kind());
  if (c1 && c2) return angle_to_axis(c1->axis, c2->axis) + c1->halfAngle < c2->halfAngle - tol;
  if (c1) {
    if (!V2.full_dimensional()) return false;
    for (const auto& h : V2.facet_normals())
      if (angle_to_axis(h, c1->axis) + c1->halfAngle >= std::numbers::pi / 2 - tol) return false;
    return true;
  }
  if (c2) {
    for (const auto& g : V1.generators())
      if (angle_to_axis(g.normalized(), c2->axis) >= c2->halfAngle - tol) return false;
    return true;
  }
  for (const auto& g : V1.generators())
    if (!V2.in_interior(g, tol)) return false;
  return true;
}

double chord_to_half_angle(double theta) { return 2.0 * std::asin(theta / 2.0); }
double half_angle_to_chord(double phi) { return 2.0 * std::sin(phi / 2.0); }

double default_resolution(int d) {
  return (d >= 4 ? 2.0 : 0.5) * std::numbers::pi / 180.0;
}

namespace {

void sphere_rec(int d, double res, std::vector<Vec>& out) {
  using std::numbers::pi;
  if (d == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return;
  }
  if (d == 2) {
    int n = std::max(2, static_cast<int>(std::ceil(2 * pi / res - 1e-9)));
    for (int k = 0; k < n; ++k) {
      double t = 2 * pi * k / n;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      out.push_back(v);
    }
    return;
  }
  int nt = std::max(1, static_cast<int>(std::ceil(pi / res - 1e-9)));
  for (int j = 0; j <= nt; ++j) {
    double th = pi * j / nt;
    double s = std::sin(th);
    Vec v(d);
    if (j == 0 || j == nt) {
      v.setZero();
      v(0) = std::cos(th);
      out.push_back(v);
      continue;
    }
    std::vector<Vec> sub;
    sphere_rec(d - 1, std::min(pi, res / s), sub);
    for (const auto& u : sub) {
      v(0) = std::cos(th);
      v.tail(d - 1) = s * u;
      out.push_back(v);
    }
  }
}

}  // namespace

UnitSphereSampling sample_sphere(int d, double resolution) {
  if (d > kMaxHrepDim) throw Error(ErrorKind::UnsupportedDimension, "sphere sampling limited to d <= 4");
  if (!(resolution > 0)) throw Error(ErrorKind::InvalidArgument, "resolution must be positive");
  UnitSphereSampling s{d, {}, resolution};
  sphere_rec(d, resolution, s.points);
  return s;
}

UnitSphereSampling sample_sphere(int d) { return sample_sphere(d, default_resolution(d)); }

SeparationResult separation_constant(const Cone& V, const Cone& U) {
  return separation_constant(V, U, default_resolution(U.dim()));
}

SeparationResult separation_constant(const Cone& V, const Cone& U, double resolution) {
  if (!is_compact_subcone(V, U)) throw Error(ErrorKind::NotCompactSubcone, "separation needs V compact in U");
  SeparationResult r{std::numeric_limits<double>::infinity(), resolution, 0};
  if (U.is_full()) return r;
  auto S = sample_sphere(U.dim(), resolution);
  for (const auto& u : S.points) {
    if (U.in_interior(u)) continue;
    ++r.exteriorSamples;
    r.gamma = std::min(r.gamma, distance_to_cone(u, V));
  }
  return r;
}

std::vector<Vec> boundary_directions(const Cone& U, double resolution) {
  const int d = U.dim();
  std::vector<Vec> out;
  if (U.is_full() || U.is_origin()) return out;
  if (d == 1) {
    for (const auto& g : U.generators()) push_unique(out, g.normalized());
    return out;
  }
  if (auto* c = std::get_if<Circular>(&U.kind())) {
    // orthonormal complement of the axis
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
    M.col(0) = c->axis;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd P = Q.rightCols(d - 1);
    std::vector<Vec> sub;
    sphere_rec(d - 1, std::min(std::numbers::pi, resolution / std::sin(c->halfAngle)), sub);
    for (const auto& u : sub)
      out.push_back(std::cos(c->halfAngle) * c->axis + std::sin(c->halfAngle) * (P * u));
    return out;
  }
  if (d == 2) {
    for (const auto& h : U.facet_normals()) {
      Vec t(2);
      t << -h(1), h(0);
      for (double s : {1.0, -1.0})
        if (U.in_closure(s * t, 1e-12)) push_unique(out, s * t);
    }
    return out;
  }
  double band = std::sin(resolution);
  for (const auto& u : sample_sphere(d, resolution).points) {
    if (!U.in_closure(u)) continue;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : U.facet_normals()) m = std::min(m, h.dot(u));
    if (m <= band) out.push_back(u);
  }
  return out;
}

double angular_separation(const Cone& V, const Cone& U) {
  auto B = boundary_directions(U, default_resolution(U.dim()));
  double best = std::numbers::pi / 2;
  for (const auto& b : B) best = std::min(best, std::asin(std::min(1.0, distance_to_cone(b, V))));
  return best;
}

namespace {

bool verify_dual(const Cone& hull, std::span<const Cone> parts) {
  Cone dh = dual_cone(hull);
  std::vector<Cone> dp;
  for (const auto& p : parts) dp.push_back(dual_cone(p));
  double res = (hull.dim() >= 4 ? 6.0 : hull.dim() == 3 ? 3.0 : 0.5) * std::numbers::pi / 180.0;
  for (const auto& y : sample_sphere(hull.dim(), res).points) {
    // skip points within rounding of a facet
    bool nearEdge = false;
    auto margin = [&](const Cone& c) {
      if (c.is_circular()) {
        auto& k = std::get<Circular>(c.kind());
        return k.halfAngle - angle_to_axis(y, k.axis);
      }
      double m = std::numeric_limits<double>::infinity();
      for (const auto& g : c.generators()) m = std::min(m, g.dot(y) / g.norm());
      return m;
    };
    double mh = margin(hull);
    if (std::abs(mh) < 1e-9) nearEdge = true;
    bool inParts = true;
    for (const auto& p : parts) {
      double m = margin(p);
      if (std::abs(m) < 1e-9) nearEdge = true;
      if (m < 0) inParts = false;
    }
    if (nearEdge) continue;
    if (dh.in_closure(y, 1e-9) != inParts) return false;
    bool inDuals = true;
    for (const auto& c : dp)
      if (!c.in_closure(y, 1e-9)) inDuals = false;
    if (inDuals != inParts) return false;
  }
  return true;
}

bool properly_convex(const Cone& C) {
  if (C.is_circular() || C.is_origin()) return true;
  if (C.is_full()) return false;
  return dual_cone(C).full_dimensional();
}

}  // namespace

HullResult convex_hull(const Cone& C) {
  std::array<Cone, 1> one{C};
  return convex_hull(std::span<const Cone>(one));
}

HullResult convex_hull(std::span<const Cone> parts) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "hull of nothing");
  const int d = parts.front().dim();
  for (const auto& p : parts)
    if (p.dim() != d) throw Error(ErrorKind::DimensionMismatch, "hull parts of different dimension");
  if (parts.size() == 1) {
    const Cone& c = parts.front();
    return {c, properly_convex(c), c.is_origin() || c.is_full() ? true : verify_dual(c, parts)};
  }
  std::vector<Vec> g;
  bool anyFull = false;
  for (const auto& p : parts) {
    if (p.is_circular())
      throw Error(ErrorKind::InvalidArgument, "hull of several cones needs polyhedral parts");
    if (p.is_full()) anyFull = true;
    if (p.is_origin()) continue;
    for (const auto& v : p.generators()) g.push_back(v);
  }
  if (anyFull) return {Cone::full(d), false, true};
  if (g.empty()) return {Cone::origin(d), true, true};
  Cone h = Cone::polyhedral(std::move(g), Openness::Closed);
  return {h, properly_convex(h), verify_dual(h, parts)};
}

}  // namespace carrier
