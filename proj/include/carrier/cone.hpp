#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace carrier {

using Vec = Eigen::VectorXd;

enum class Openness { Open, Closed };

struct Polyhedral {
  std::vector<Vec> generators;
};
struct Circular {
  Vec axis;
  double halfAngle;  // radians, in (0, pi/2)
};
struct Ray {
  Vec direction;
};
struct Origin {};
struct Full {};

using ConeKind = std::variant<Polyhedral, Circular, Ray, Origin, Full>;

// A convex cone in R^d. Polyhedral-type cones (polyhedral, ray, origin, full)
// carry a precomputed halfspace description for d <= 4.
class Cone {
 public:
  static Cone polyhedral(std::vector<Vec> generators, Openness o = Openness::Closed);
  static Cone circular(Vec axis, double halfAngle, Openness o = Openness::Open);
  static Cone ray(Vec direction);
  static Cone origin(int d, Openness o = Openness::Closed);
  static Cone full(int d);
  static Cone orthant(int d, Openness o = Openness::Closed);

  int dim() const { return dim_; }
  Openness openness() const { return openness_; }
  const ConeKind& kind() const { return kind_; }
  bool is_circular() const { return std::holds_alternative<Circular>(kind_); }
  bool is_full() const { return std::holds_alternative<Full>(kind_); }
  bool is_origin() const { return std::holds_alternative<Origin>(kind_); }
  // the open origin cone is the empty set
  bool is_empty() const { return is_origin() && openness_ == Openness::Open; }

  // Generators spanning the closed cone (not defined for circular cones).
  const std::vector<Vec>& generators() const;
  // Unit inward normals h with cone = {x : h.x >= 0 for all h}.
  const std::vector<Vec>& facet_normals() const;
  bool full_dimensional() const;

  // Membership following the openness flag.
  bool contains(const Vec& x, double tol = 1e-12) const;
  bool in_interior(const Vec& x, double tol = 1e-12) const;
  bool in_closure(const Vec& x, double tol = 1e-12) const;

  std::string describe() const;

 private:
  Cone(int d, ConeKind k, Openness o);
  void build_hrep();

  int dim_;
  ConeKind kind_;
  Openness openness_;
  std::vector<Vec> gens_;
  std::vector<Vec> normals_;
  bool fullDim_ = false;
};

double distance_to_cone(const Vec& x, const Cone& U);
// distance to the topological boundary of U (+inf for the full space)
double distance_to_boundary(const Vec& x, const Cone& U);
Cone dual_cone(const Cone& C);
bool is_compact_subcone(const Cone& V1, const Cone& V2);

// chordal parameter theta of {lambda x : |x - e| <= theta} <-> half-angle
double chord_to_half_angle(double theta);
double half_angle_to_chord(double phi);

struct UnitSphereSampling {
  int dim;
  std::vector<Vec> points;
  double resolution;
};

double default_resolution(int d);
UnitSphereSampling sample_sphere(int d, double resolution);
UnitSphereSampling sample_sphere(int d);

struct SeparationResult {
  double gamma;  // +inf when U is the full space
  double resolution;
  std::size_t exteriorSamples;
};

SeparationResult separation_constant(const Cone& V, const Cone& U);
SeparationResult separation_constant(const Cone& V, const Cone& U, double resolution);

// Smallest angle between a unit vector of the boundary of U and the closure of V.
double angular_separation(const Cone& V, const Cone& U);

struct HullResult {
  Cone hull;
  bool properlyConvex;  // contains no full line
  bool dualVerified;    // (ch V)* == V* on sampled points
};

HullResult convex_hull(const Cone& C);
HullResult convex_hull(std::span<const Cone> parts);

// Unit vectors on the relative boundary of U intersected with the sphere.
std::vector<Vec> boundary_directions(const Cone& U, double resolution);

}  // namespace carrier
