#pragma once

/// \file geometry.hpp
/// \brief Base domains, boundary patches, space-time panel grids with
/// sample interpolation, and the Dirichlet system B = (1, d_nu, Delta,
/// d_nu Delta, ...) with its adjoint C.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "polyheat/diffop.hpp"
#include "polyheat/errors.hpp"
#include "polyheat/kernel.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat {

inline double dot(const SpacePoint& a, const SpacePoint& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline SpacePoint axpy(double s, const SpacePoint& a, const SpacePoint& b) {
  return {b[0] + s * a[0], b[1] + s * a[1], b[2] + s * a[2]};
}
inline SpacePoint diff(const SpacePoint& a, const SpacePoint& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline double norm(const SpacePoint& a) { return std::sqrt(dot(a, a)); }

/// A boundary piece parametrized by u in [0, 1], with outward unit normal.
/// For n = 1 a piece is a single endpoint.
struct Segment {
  enum class Kind { point, line, arc };
  Kind kind = Kind::point;
  SpacePoint a{};       // point position or line start
  SpacePoint b{};       // line end
  SpacePoint center{};  // arc center
  double radius = 0.0;
  double th0 = 0.0;
  double th1 = 0.0;
  SpacePoint line_normal{};
  double sign = 1.0;    // arc: +1 normal points away from center; point: +-e1

  static Segment point(double x, double outward) {
    Segment s;
    s.kind = Kind::point;
    s.a = {x, 0.0, 0.0};
    s.sign = outward;
    return s;
  }
  static Segment line(SpacePoint p0, SpacePoint p1, SpacePoint outward) {
    Segment s;
    s.kind = Kind::line;
    s.a = p0;
    s.b = p1;
    const double l = norm(outward);
    s.line_normal = {outward[0] / l, outward[1] / l, 0.0};
    return s;
  }
  static Segment arc(SpacePoint c, double r, double t0, double t1, double sign) {
    Segment s;
    s.kind = Kind::arc;
    s.center = c;
    s.radius = r;
    s.th0 = t0;
    s.th1 = t1;
    s.sign = sign;
    return s;
  }

  [[nodiscard]] SpacePoint point_at(double u) const {
    switch (kind) {
      case Kind::point: return a;
      case Kind::line: return axpy(u, diff(b, a), a);
      case Kind::arc: {
        const double th = th0 + u * (th1 - th0);
        return {center[0] + radius * std::cos(th), center[1] + radius * std::sin(th), 0.0};
      }
    }
    return a;
  }
  [[nodiscard]] SpacePoint normal_at(double u) const {
    switch (kind) {
      case Kind::point: return {sign, 0.0, 0.0};
      case Kind::line: return line_normal;
      case Kind::arc: {
        const double th = th0 + u * (th1 - th0);
        return {sign * std::cos(th), sign * std::sin(th), 0.0};
      }
    }
    return {};
  }
  /// ds/du (1 for a point, so that point "integrals" are evaluations).
  [[nodiscard]] double jacobian() const {
    switch (kind) {
      case Kind::point: return 1.0;
      case Kind::line: return norm(diff(b, a));
      case Kind::arc: return radius * std::abs(th1 - th0);
    }
    return 1.0;
  }
  [[nodiscard]] double length() const { return kind == Kind::point ? 0.0 : jacobian(); }

  [[nodiscard]] Segment sub(double u0, double u1) const {
    Segment s = *this;
    if (kind == Kind::line) {
      s.a = point_at(u0);
      s.b = point_at(u1);
    } else if (kind == Kind::arc) {
      s.th0 = th0 + u0 * (th1 - th0);
      s.th1 = th0 + u1 * (th1 - th0);
    }
    return s;
  }

  /// Parameter of the nearest point and the distance to it.
  [[nodiscard]] std::pair<double, double> closest(const SpacePoint& x) const {
    switch (kind) {
      case Kind::point: return {0.5, norm(diff(x, a))};
      case Kind::line: {
        const SpacePoint d = diff(b, a);
        const double u = std::clamp(dot(diff(x, a), d) / dot(d, d), 0.0, 1.0);
        return {u, norm(diff(x, point_at(u)))};
      }
      case Kind::arc: {
        const double ang = std::atan2(x[1] - center[1], x[0] - center[0]);
        double best_u = 0.0;
        double best_d = norm(diff(x, point_at(0.0)));
        const double d1 = norm(diff(x, point_at(1.0)));
        if (d1 < best_d) {
          best_d = d1;
          best_u = 1.0;
        }
        const double two_pi = 2.0 * std::numbers::pi;
        for (int k = -2; k <= 2; ++k) {
          const double u = (ang + k * two_pi - th0) / (th1 - th0);
          if (u > 0.0 && u < 1.0) {
            const double d = norm(diff(x, point_at(u)));
            if (d < best_d) {
              best_d = d;
              best_u = u;
            }
          }
        }
        return {best_u, best_d};
      }
    }
    return {0.0, 0.0};
  }
};

/// Omega: interval (n = 1); disk, rectangle or annular sector (n = 2).
class BaseDomain {
public:
  enum class Shape { interval, disk, rectangle, annular_sector };

  static BaseDomain interval(double a, double b) {
    if (!(b > a)) throw ConstructionError("interval: need a < b");
    BaseDomain d(Shape::interval, 1);
    d.lo_ = {a, 0, 0};
    d.hi_ = {b, 0, 0};
    return d;
  }
  static BaseDomain disk(SpacePoint center, double radius) {
    if (!(radius > 0.0)) throw ConstructionError("disk: radius must be positive");
    BaseDomain d(Shape::disk, 2);
    d.center_ = center;
    d.r1_ = radius;
    return d;
  }
  static BaseDomain rectangle(SpacePoint lo, SpacePoint hi) {
    if (!(hi[0] > lo[0] && hi[1] > lo[1])) throw ConstructionError("rectangle: need lo < hi");
    BaseDomain d(Shape::rectangle, 2);
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }
  /// {center + r (cos th, sin th): r0 < r < r1, th0 < th < th1}.
  static BaseDomain annular_sector(SpacePoint center, double r0, double r1, double th0, double th1) {
    if (!(r0 >= 0.0 && r1 > r0 && th1 > th0 && th1 - th0 <= 2.0 * std::numbers::pi)) {
      throw ConstructionError("annular_sector: need 0 <= r0 < r1 and 0 < th1 - th0 <= 2 pi");
    }
    BaseDomain d(Shape::annular_sector, 2);
    d.center_ = center;
    d.r0_ = r0;
    d.r1_ = r1;
    d.th0_ = th0;
    d.th1_ = th1;
    return d;
  }

  [[nodiscard]] Shape shape() const { return shape_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] bool convex() const { return shape_ != Shape::annular_sector; }

  [[nodiscard]] bool contains(const SpacePoint& x) const {
    switch (shape_) {
      case Shape::interval: return x[0] > lo_[0] && x[0] < hi_[0];
      case Shape::rectangle: return x[0] > lo_[0] && x[0] < hi_[0] && x[1] > lo_[1] && x[1] < hi_[1];
      case Shape::disk: return norm(diff(x, center_)) < r1_;
      case Shape::annular_sector: {
        const double r = norm(diff(x, center_));
        if (!(r > r0_ && r < r1_)) return false;
        double th = std::atan2(x[1] - center_[1], x[0] - center_[0]);
        while (th <= th0_) th += 2.0 * std::numbers::pi;
        while (th > th0_ + 2.0 * std::numbers::pi) th -= 2.0 * std::numbers::pi;
        return th < th1_;
      }
    }
    return false;
  }

  /// Boundary pieces, outward normals, counterclockwise for n = 2.
  [[nodiscard]] std::vector<Segment> boundary() const {
    switch (shape_) {
      case Shape::interval: return {Segment::point(lo_[0], -1.0), Segment::point(hi_[0], 1.0)};
      case Shape::disk: return {Segment::arc(center_, r1_, 0.0, 2.0 * std::numbers::pi, 1.0)};
      case Shape::rectangle: {
        const SpacePoint p00{lo_[0], lo_[1], 0}, p10{hi_[0], lo_[1], 0};
        const SpacePoint p11{hi_[0], hi_[1], 0}, p01{lo_[0], hi_[1], 0};
        return {Segment::line(p00, p10, {0, -1, 0}), Segment::line(p10, p11, {1, 0, 0}),
                Segment::line(p11, p01, {0, 1, 0}), Segment::line(p01, p00, {-1, 0, 0})};
      }
      case Shape::annular_sector: {
        auto polar = [&](double r, double th) {
          return SpacePoint{center_[0] + r * std::cos(th), center_[1] + r * std::sin(th), 0.0};
        };
        std::vector<Segment> out;
        out.push_back(Segment::arc(center_, r1_, th0_, th1_, 1.0));
        if (th1_ - th0_ < 2.0 * std::numbers::pi) {
          out.push_back(Segment::line(polar(r1_, th1_), polar(r0_, th1_),
                                      {-std::sin(th1_), std::cos(th1_), 0}));
        }
        if (r0_ > 0.0) out.push_back(Segment::arc(center_, r0_, th1_, th0_, -1.0));
        if (th1_ - th0_ < 2.0 * std::numbers::pi) {
          out.push_back(Segment::line(polar(r0_, th0_), polar(r1_, th0_),
                                      {std::sin(th0_), -std::cos(th0_), 0}));
        }
        return out;
      }
    }
    return {};
  }

  [[nodiscard]] double measure() const {
    switch (shape_) {
      case Shape::interval: return hi_[0] - lo_[0];
      case Shape::rectangle: return (hi_[0] - lo_[0]) * (hi_[1] - lo_[1]);
      case Shape::disk: return std::numbers::pi * r1_ * r1_;
      case Shape::annular_sector: return 0.5 * (th1_ - th0_) * (r1_ * r1_ - r0_ * r0_);
    }
    return 0.0;
  }

  /// Axis-aligned bounding box.
  [[nodiscard]] std::pair<SpacePoint, SpacePoint> bounds() const {
    switch (shape_) {
      case Shape::interval:
      case Shape::rectangle: return {lo_, hi_};
      case Shape::disk:
      case Shape::annular_sector:
        return {SpacePoint{center_[0] - r1_, center_[1] - r1_, 0},
                SpacePoint{center_[0] + r1_, center_[1] + r1_, 0}};
    }
    return {};
  }

  [[nodiscard]] double diameter() const {
    switch (shape_) {
      case Shape::interval: return hi_[0] - lo_[0];
      case Shape::rectangle: return norm(diff(hi_, lo_));
      case Shape::disk: return 2.0 * r1_;
      case Shape::annular_sector: {
        const auto [lo, hi] = bounds();
        return norm(diff(hi, lo));
      }
    }
    return 0.0;
  }

  [[nodiscard]] double distance_to_boundary(const SpacePoint& x) const {
    double best = INFINITY;
    for (const auto& s : boundary()) best = std::min(best, s.closest(x).second);
    return best;
  }

  /// Intersection {r >= 0 : x + r dir in the closure}, convex shapes only.
  [[nodiscard]] std::optional<std::pair<double, double>> ray_interval(const SpacePoint& x,
                                                                     const SpacePoint& dir) const {
    double r0 = 0.0;
    double r1 = INFINITY;
    auto slab = [&](double xi, double di, double lo, double hi) {
      if (std::abs(di) < 1e-300) return xi >= lo && xi <= hi;
      double a = (lo - xi) / di;
      double b = (hi - xi) / di;
      if (a > b) std::swap(a, b);
      r0 = std::max(r0, a);
      r1 = std::min(r1, b);
      return r0 <= r1;
    };
    switch (shape_) {
      case Shape::interval:
        if (!slab(x[0], dir[0], lo_[0], hi_[0])) return std::nullopt;
        break;
      case Shape::rectangle:
        if (!slab(x[0], dir[0], lo_[0], hi_[0]) || !slab(x[1], dir[1], lo_[1], hi_[1])) {
          return std::nullopt;
        }
        break;
      case Shape::disk: {
        const SpacePoint q = diff(x, center_);
        const double b = dot(q, dir);
        const double c = dot(q, q) - r1_ * r1_;
        const double disc = b * b - c;
        if (disc <= 0.0) return std::nullopt;
        const double sq = std::sqrt(disc);
        r0 = std::max(0.0, -b - sq);
        r1 = -b + sq;
        if (r1 <= r0) return std::nullopt;
        break;
      }
      case Shape::annular_sector:
        throw CapabilityError("ray_interval: domain is not convex");
    }
    if (!(r1 > r0)) return std::nullopt;
    return std::make_pair(r0, r1);
  }

  /// Volume parametrization over [0, 1]^n: affine for interval/rectangle,
  /// polar for disk and annular sector.
  [[nodiscard]] SpacePoint map(std::span<const double> p) const {
    switch (shape_) {
      case Shape::interval: return {lo_[0] + p[0] * (hi_[0] - lo_[0]), 0, 0};
      case Shape::rectangle:
        return {lo_[0] + p[0] * (hi_[0] - lo_[0]), lo_[1] + p[1] * (hi_[1] - lo_[1]), 0};
      case Shape::disk:
      case Shape::annular_sector: {
        const auto [a0, a1] = angle_range();
        const double r = r0_ + p[0] * (r1_ - r0_);
        const double th = a0 + p[1] * (a1 - a0);
        return {center_[0] + r * std::cos(th), center_[1] + r * std::sin(th), 0};
      }
    }
    return {};
  }
  [[nodiscard]] double map_jacobian(std::span<const double> p) const {
    switch (shape_) {
      case Shape::interval:
      case Shape::rectangle: return measure();
      case Shape::disk:
      case Shape::annular_sector: {
        const auto [a0, a1] = angle_range();
        const double r = r0_ + p[0] * (r1_ - r0_);
        return r * (r1_ - r0_) * (a1 - a0);
      }
    }
    return 0.0;
  }
  [[nodiscard]] std::array<double, 2> inverse_map(const SpacePoint& x) const {
    switch (shape_) {
      case Shape::interval: return {(x[0] - lo_[0]) / (hi_[0] - lo_[0]), 0.0};
      case Shape::rectangle:
        return {(x[0] - lo_[0]) / (hi_[0] - lo_[0]), (x[1] - lo_[1]) / (hi_[1] - lo_[1])};
      case Shape::disk:
      case Shape::annular_sector: {
        const auto [a0, a1] = angle_range();
        const double r = norm(diff(x, center_));
        double th = std::atan2(x[1] - center_[1], x[0] - center_[0]);
        while (th < a0) th += 2.0 * std::numbers::pi;
        while (th > a0 + 2.0 * std::numbers::pi) th -= 2.0 * std::numbers::pi;
        return {(r - r0_) / (r1_ - r0_), (th - a0) / (a1 - a0)};
      }
    }
    return {};
  }
  /// Whether the second parameter is periodic (full disk).
  [[nodiscard]] bool periodic_angle() const { return shape_ == Shape::disk; }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (shape_) {
      case Shape::interval: os << "interval(" << lo_[0] << "," << hi_[0] << ")"; break;
      case Shape::disk: os << "disk(" << center_[0] << "," << center_[1] << "," << r1_ << ")"; break;
      case Shape::rectangle:
        os << "rectangle(" << lo_[0] << "," << lo_[1] << "," << hi_[0] << "," << hi_[1] << ")";
        break;
      case Shape::annular_sector:
        os << "annular_sector(" << center_[0] << "," << center_[1] << "," << r0_ << "," << r1_ << ","
           << th0_ << "," << th1_ << ")";
        break;
    }
    return os.str();
  }

  [[nodiscard]] const SpacePoint& lo() const { return lo_; }
  [[nodiscard]] const SpacePoint& hi() const { return hi_; }
  [[nodiscard]] const SpacePoint& center() const { return center_; }
  [[nodiscard]] double radius() const { return r1_; }

private:
  BaseDomain(Shape s, int dim) : shape_(s), dim_(dim) {}
  [[nodiscard]] std::pair<double, double> angle_range() const {
    if (shape_ == Shape::disk) return {0.0, 2.0 * std::numbers::pi};
    return {th0_, th1_};
  }
  Shape shape_;
  int dim_;
  SpacePoint lo_{}, hi_{}, center_{};
  double r0_ = 0.0, r1_ = 0.0, th0_ = 0.0, th1_ = 0.0;
};

/// Gamma as a parameter sub-range of one boundary piece of Omega. For n = 1
/// the piece is the endpoint itself (0 = left, 1 = right).
struct GammaSpec {
  int piece = 0;
  double u0 = 0.0;
  double u1 = 1.0;

  static GammaSpec endpoint(bool right) { return {right ? 1 : 0, 0.0, 1.0}; }
  /// Arc th0 < th < th1 of a disk boundary (0 <= th0 < th1 <= 2 pi).
  static GammaSpec disk_arc(double th0, double th1) {
    const double two_pi = 2.0 * std::numbers::pi;
    return {0, th0 / two_pi, th1 / two_pi};
  }
  static GammaSpec side(int k, double u0 = 0.0, double u1 = 1.0) { return {k, u0, u1}; }
};

enum class Patch { gamma, boundary, complement };

struct CylinderSpec {
  BaseDomain omega;
  double T;
  GammaSpec gamma;
  BaseDomain omega_plus;

  [[nodiscard]] int dim() const { return omega.dim(); }

  /// Boundary pieces of the requested patch (outward normals of Omega).
  [[nodiscard]] std::vector<Segment> segments(Patch patch) const {
    const auto pieces = omega.boundary();
    std::vector<Segment> out;
    for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
      const auto& s = pieces[k];
      const bool is_gamma_piece = k == gamma.piece;
      if (patch == Patch::boundary) {
        out.push_back(s);
      } else if (patch == Patch::gamma) {
        if (is_gamma_piece) out.push_back(s.kind == Segment::Kind::point ? s : s.sub(gamma.u0, gamma.u1));
      } else {
        if (!is_gamma_piece) {
          out.push_back(s);
        } else if (s.kind != Segment::Kind::point) {
          if (gamma.u0 > 0.0) out.push_back(s.sub(0.0, gamma.u0));
          if (gamma.u1 < 1.0) out.push_back(s.sub(gamma.u1, 1.0));
        }
      }
    }
    return out;
  }

  /// Diameter of D = Omega u Gamma u Omega+ (bounding-box diagonal).
  [[nodiscard]] double diameter_D() const {
    auto [a0, a1] = omega.bounds();
    auto [b0, b1] = omega_plus.bounds();
    SpacePoint lo, hi;
    for (int i = 0; i < kMaxDim; ++i) {
      lo[i] = std::min(a0[i], b0[i]);
      hi[i] = std::max(a1[i], b1[i]);
    }
    return norm(diff(hi, lo));
  }

  /// Whether x lies in the closure of D (up to tol).
  [[nodiscard]] double distance_to_D(const SpacePoint& x) const {
    if (omega.contains(x) || omega_plus.contains(x)) return 0.0;
    return std::min(omega.distance_to_boundary(x), omega_plus.distance_to_boundary(x));
  }
};

/// Validated cylinder D_T = (Omega u Gamma u Omega+) x (0, T).
inline CylinderSpec build_cylinder(BaseDomain omega, double T, GammaSpec gamma, BaseDomain omega_plus) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConstructionError("cylinder: T must be positive");
  if (omega.dim() != omega_plus.dim()) throw ConstructionError("cylinder: dimension mismatch");
  if (!omega.convex()) throw ConstructionError("cylinder: Omega must be an interval, disk or rectangle");
  const auto pieces = omega.boundary();
  if (gamma.piece < 0 || gamma.piece >= static_cast<int>(pieces.size())) {
    throw ConstructionError("cylinder: Gamma refers to a missing boundary piece");
  }
  CylinderSpec spec{omega, T, gamma, omega_plus};
  if (omega.dim() == 1) {
    if (omega_plus.shape() != BaseDomain::Shape::interval) {
      throw ConstructionError("cylinder: Omega+ must be an interval for n = 1");
    }
    const double x_gamma = pieces[gamma.piece].a[0];
    const bool left = gamma.piece == 0;
    const double joint = left ? omega_plus.hi()[0] : omega_plus.lo()[0];
    if (std::abs(joint - x_gamma) > 1e-12) {
      if ((left && omega_plus.hi()[0] > x_gamma) || (!left && omega_plus.lo()[0] < x_gamma)) {
        throw ConstructionError("cylinder: Omega+ overlaps Omega");
      }
      throw ConstructionError("cylinder: Omega+ is not attached to Omega across Gamma");
    }
    return spec;
  }
  if (!(gamma.u1 > gamma.u0) || gamma.u0 < 0.0 || gamma.u1 > 1.0) {
    throw ConstructionError("cylinder: Gamma must have positive measure");
  }
  // disjointness, tested on interior points of each set
  const int res = 48;
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      const std::array<double, 2> p{(i + 0.5) / res, (j + 0.5) / res};
      if (omega.contains(omega_plus.map(p))) throw ConstructionError("cylinder: Omega+ overlaps Omega");
      if (omega_plus.contains(omega.map(p))) throw ConstructionError("cylinder: Omega+ overlaps Omega");
    }
  }
  // attachment: crossing Gamma along the normal leads from Omega into Omega+
  const Segment g = spec.segments(Patch::gamma).front();
  for (double u : {0.25, 0.5, 0.75}) {
    const SpacePoint x = g.point_at(u);
    const SpacePoint nu = g.normal_at(u);
    const double eps = 1e-6 * omega.diameter();
    if (!omega_plus.contains(axpy(eps, nu, x)) || !omega.contains(axpy(-eps, nu, x))) {
      throw ConstructionError("cylinder: Omega+ is not attached to Omega across Gamma");
    }
  }
  return spec;
}

/// Composite Gauss-Legendre axis with barycentric interpolation on each panel.
class PanelAxis {
public:
  static constexpr int kMaxOrder = 32;

  /// Interpolation weights of one panel.
  struct Weights {
    int first = 0;
    int order = 0;
    std::array<double, kMaxOrder> w{};
  };

  PanelAxis() = default;
  PanelAxis(std::vector<double> breaks, int order) : breaks_(std::move(breaks)), order_(order) {
    if (breaks_.size() < 2 || order_ < 1) throw std::invalid_argument("PanelAxis: empty axis");
    if (order_ > kMaxOrder) throw std::invalid_argument("PanelAxis: order above 32");
    const auto& g = gauss_legendre(order_);
    bary_.resize(order_);
    for (int j = 0; j < order_; ++j) {
      double w = 1.0;
      for (int k = 0; k < order_; ++k) {
        if (k != j) w *= g.nodes[j] - g.nodes[k];
      }
      bary_[j] = 1.0 / w;
    }
  }
  static PanelAxis uniform(double a, double b, int panels, int order) {
    std::vector<double> br(panels + 1);
    for (int p = 0; p <= panels; ++p) br[p] = a + (b - a) * p / panels;
    br.back() = b;
    return PanelAxis(std::move(br), order);
  }
  /// `count` nodes on [a, b] as panels of at most `max_order` nodes.
  static PanelAxis with_nodes(double a, double b, int count, int max_order = 8) {
    const int order = std::min(count, max_order);
    const int panels = (count + order - 1) / order;
    return uniform(a, b, panels, order);
  }

  [[nodiscard]] int panels() const { return static_cast<int>(breaks_.size()) - 1; }
  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] int size() const { return panels() * order_; }
  [[nodiscard]] double lo() const { return breaks_.front(); }
  [[nodiscard]] double hi() const { return breaks_.back(); }
  [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }

  [[nodiscard]] double node(int i) const {
    const int p = i / order_;
    const double a = breaks_[p], b = breaks_[p + 1];
    return 0.5 * (a + b) + 0.5 * (b - a) * gauss_legendre(order_).nodes[i % order_];
  }
  [[nodiscard]] double weight(int i) const {
    const int p = i / order_;
    return 0.5 * (breaks_[p + 1] - breaks_[p]) * gauss_legendre(order_).weights[i % order_];
  }

  /// Interpolation weights at x (clamped into the axis); returns the index of
  /// the first node of the panel used.
  int interpolation_weights(double x, std::span<double> w) const {
    x = std::clamp(x, lo(), hi());
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    int p = static_cast<int>(it - breaks_.begin()) - 1;
    p = std::clamp(p, 0, panels() - 1);
    const double a = breaks_[p], b = breaks_[p + 1];
    const double xi = (2.0 * x - a - b) / (b - a);
    const auto& g = gauss_legendre(order_);
    double denom = 0.0;
    for (int j = 0; j < order_; ++j) {
      const double d = xi - g.nodes[j];
      if (d == 0.0) {
        std::fill(w.begin(), w.begin() + order_, 0.0);
        w[j] = 1.0;
        return p * order_;
      }
      w[j] = bary_[j] / d;
      denom += w[j];
    }
    for (int j = 0; j < order_; ++j) w[j] /= denom;
    return p * order_;
  }

  [[nodiscard]] Weights weights_at(double x) const {
    Weights r;
    r.order = order_;
    r.first = interpolation_weights(x, r.w);
    return r;
  }

private:
  std::vector<double> breaks_;
  int order_ = 1;
  std::vector<double> bary_;
};

/// A node of a space-time boundary grid.
struct BoundaryNode {
  SpaceTimePoint p;
  SpacePoint normal;
  double weight;
  int segment;
};

/// Tensor grid over (patch segments) x (T1, T2): per segment a panel axis in
/// the segment parameter, a shared time axis. Samples are stored segment by
/// segment, space-major, time-minor.
class BoundaryGrid {
public:
  BoundaryGrid(std::vector<Segment> segments, int n_space, PanelAxis time)
      : segments_(std::move(segments)), time_(std::move(time)) {
    if (segments_.empty()) throw ConstructionError("boundary grid: empty patch");
    if (n_space < 1) throw std::invalid_argument("boundary grid: n_space must be >= 1");
    double total = 0.0;
    for (const auto& s : segments_) total += s.length();
    for (const auto& s : segments_) {
      if (s.kind == Segment::Kind::point) {
        space_.push_back(PanelAxis::uniform(0.0, 1.0, 1, 1));
      } else {
        const int count = std::max(2, static_cast<int>(std::lround(n_space * s.length() / total)));
        space_.push_back(PanelAxis::with_nodes(0.0, 1.0, count));
      }
    }
    std::size_t off = 0;
    for (const auto& ax : space_) {
      offsets_.push_back(off);
      off += static_cast<std::size_t>(ax.size()) * time_.size();
    }
    size_ = off;
  }

  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  [[nodiscard]] const PanelAxis& space_axis(int seg) const { return space_[seg]; }
  [[nodiscard]] const PanelAxis& time_axis() const { return time_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] int dim() const { return segments_.front().kind == Segment::Kind::point ? 1 : 2; }

  [[nodiscard]] std::vector<BoundaryNode> nodes() const {
    std::vector<BoundaryNode> out;
    out.reserve(size_);
    for (int s = 0; s < static_cast<int>(segments_.size()); ++s) {
      const auto& seg = segments_[s];
      for (int i = 0; i < space_[s].size(); ++i) {
        const double u = space_[s].node(i);
        const double ws = space_[s].weight(i) * seg.jacobian();
        for (int k = 0; k < time_.size(); ++k) {
          out.push_back({{seg.point_at(u), time_.node(k)}, seg.normal_at(u), ws * time_.weight(k), s});
        }
      }
    }
    return out;
  }

  /// Sample a function of (node) on the grid.
  template <class F>
  [[nodiscard]] std::vector<double> sample(F&& f) const {
    std::vector<double> v;
    v.reserve(size_);
    for (const auto& nd : nodes()) v.push_back(f(nd));
    return v;
  }

  /// Interpolate samples at (segment, u, t).
  [[nodiscard]] double interpolate(std::span<const double> samples, int seg, double u, double t) const {
    return interpolate(samples, seg, space_[seg].weights_at(u), time_.weights_at(t));
  }
  [[nodiscard]] double interpolate(std::span<const double> samples, int seg,
                                   const PanelAxis::Weights& su, const PanelAxis::Weights& st) const {
    const std::size_t nt = time_.size();
    const double* base = samples.data() + offsets_[seg];
    double total = 0.0;
    for (int a = 0; a < su.order; ++a) {
      const double* row = base + (su.first + a) * nt + st.first;
      double acc = 0.0;
      for (int b = 0; b < st.order; ++b) acc += st.w[b] * row[b];
      total += su.w[a] * acc;
    }
    return total;
  }

private:
  std::vector<Segment> segments_;
  std::vector<PanelAxis> space_;
  PanelAxis time_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
};

/// boundary_grid over patch x (0, T): n_space spatial nodes in total
/// (distributed by length), n_time time nodes.
inline BoundaryGrid boundary_grid(const CylinderSpec& spec, Patch patch, int n_space, int n_time,
                                  double t0 = 0.0, double t1 = -1.0) {
  if (n_space < 2 && spec.dim() > 1) throw std::invalid_argument("boundary_grid: n_space >= 2");
  if (n_time < 2) throw std::invalid_argument("boundary_grid: n_time >= 2");
  if (t1 < 0.0) t1 = spec.T;
  return BoundaryGrid(spec.segments(patch), n_space, PanelAxis::with_nodes(t0, t1, n_time));
}

/// Tensor grid over the volume parametrization of a domain (and optionally
/// time). Samples are space-major, time-minor.
class VolumeGrid {
public:
  VolumeGrid(BaseDomain domain, int n_param, std::optional<PanelAxis> time = std::nullopt)
      : domain_(std::move(domain)), time_(std::move(time)) {
    const int dim = domain_.dim();
    // polar maps resolve the angle more finely
    axes_.push_back(PanelAxis::with_nodes(0.0, 1.0, n_param));
    if (dim == 2) {
      const bool polar = domain_.shape() == BaseDomain::Shape::disk ||
                         domain_.shape() == BaseDomain::Shape::annular_sector;
      axes_.push_back(PanelAxis::with_nodes(0.0, 1.0, polar ? 2 * n_param : n_param));
    }
  }

  [[nodiscard]] const BaseDomain& domain() const { return domain_; }
  [[nodiscard]] int space_size() const {
    int s = 1;
    for (const auto& a : axes_) s *= a.size();
    return s;
  }
  [[nodiscard]] int time_size() const { return time_ ? time_->size() : 1; }
  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(space_size()) * time_size();
  }
  [[nodiscard]] const std::optional<PanelAxis>& time_axis() const { return time_; }

  struct Node {
    SpaceTimePoint p;
    double weight;
  };
  [[nodiscard]] std::vector<Node> nodes() const {
    std::vector<Node> out;
    const int n0 = axes_[0].size();
    const int n1 = axes_.size() > 1 ? axes_[1].size() : 1;
    for (int i = 0; i < n0; ++i) {
      for (int j = 0; j < n1; ++j) {
        std::array<double, 2> p{axes_[0].node(i), axes_.size() > 1 ? axes_[1].node(j) : 0.0};
        double w = axes_[0].weight(i) * domain_.map_jacobian(p);
        if (axes_.size() > 1) w *= axes_[1].weight(j);
        const SpacePoint x = domain_.map(p);
        if (time_) {
          for (int k = 0; k < time_->size(); ++k) out.push_back({{x, time_->node(k)}, w * time_->weight(k)});
        } else {
          out.push_back({{x, 0.0}, w});
        }
      }
    }
    return out;
  }

  template <class F>
  [[nodiscard]] std::vector<double> sample(F&& f) const {
    std::vector<double> v;
    v.reserve(size());
    for (const auto& nd : nodes()) v.push_back(f(nd.p));
    return v;
  }

  /// Interpolate samples at physical x (and t when the grid has a time axis).
  [[nodiscard]] double interpolate(std::span<const double> samples, const SpacePoint& x, double t = 0.0) const {
    const auto q = domain_.inverse_map(x);
    std::array<double, 32> w0{}, w1{}, wt{};
    const int i0 = axes_[0].interpolation_weights(q[0], w0);
    int i1 = 0;
    int o1 = 1;
    int n1 = 1;
    if (axes_.size() > 1) {
      i1 = axes_[1].interpolation_weights(q[1], w1);
      o1 = axes_[1].order();
      n1 = axes_[1].size();
    } else {
      w1[0] = 1.0;
    }
    int it = 0;
    int ot = 1;
    const int nt = time_size();
    if (time_) {
      it = time_->interpolation_weights(t, wt);
      ot = time_->order();
    } else {
      wt[0] = 1.0;
    }
    double total = 0.0;
    for (int a = 0; a < axes_[0].order(); ++a) {
      for (int b = 0; b < o1; ++b) {
        const double* row = samples.data() + (static_cast<std::size_t>(i0 + a) * n1 + (i1 + b)) * nt + it;
        double acc = 0.0;
        for (int c = 0; c < ot; ++c) acc += wt[c] * row[c];
        total += w0[a] * w1[b] * acc;
      }
    }
    return total;
  }

private:
  BaseDomain domain_;
  std::vector<PanelAxis> axes_;
  std::optional<PanelAxis> time_;
};

/// An analytic field given by its derivative oracle (d^mi u)(p).
struct AnalyticField {
  std::function<double(const MultiIndex&, const SpaceTimePoint&)> deriv;
  int max_spatial = 0;
  int max_time = 0;

  [[nodiscard]] double derivative(const MultiIndex& mi, const SpaceTimePoint& p) const {
    if (mi.spatial_order() > max_spatial || mi.time > max_time) {
      throw CapabilityError("field: derivative order not available");
    }
    return deriv(mi, p);
  }
  [[nodiscard]] double operator()(const SpaceTimePoint& p) const { return derivative(MultiIndex{}, p); }

  static AnalyticField zero() {
    return {[](const MultiIndex&, const SpaceTimePoint&) { return 0.0; }, 64, 64};
  }
  /// a * Phi_m(x - z, t + delta) with source (z, -delta).
  static AnalyticField kernel_translate(const Kernel& k, SpacePoint z, double delta, double a = 1.0) {
    return {[k, z, delta, a](const MultiIndex& mi, const SpaceTimePoint& p) {
              return a * k.derivative(mi, {diff(p.x, z), p.t + delta});
            },
            k.max_spatial_order(), k.max_time_order()};
  }
  /// Time-independent polynomial sum c * x^e.
  static AnalyticField polynomial(std::vector<std::pair<double, std::array<int, kMaxDim>>> terms) {
    return {[terms](const MultiIndex& mi, const SpaceTimePoint& p) {
              if (mi.time > 0) return 0.0;
              double total = 0.0;
              for (const auto& [c, e] : terms) {
                double v = c;
                for (int i = 0; i < kMaxDim && v != 0.0; ++i) {
                  if (mi.space[i] > e[i]) {
                    v = 0.0;
                    break;
                  }
                  for (int r = 0; r < mi.space[i]; ++r) v *= e[i] - r;
                  v *= std::pow(p.x[i], e[i] - mi.space[i]);
                }
                total += v;
              }
              return total;
            },
            64, 64};
  }
  [[nodiscard]] AnalyticField scaled(double a) const {
    auto d = deriv;
    return {[d, a](const MultiIndex& mi, const SpaceTimePoint& p) { return a * d(mi, p); }, max_spatial,
            max_time};
  }
};

/// d/dt + (-Delta)^m in R^n.
inline DiffOp heat_operator(int n, int m) {
  return DiffOp::derivative(MultiIndex::dt()) + DiffOp::laplacian_power(n, m) * (m % 2 == 0 ? 1.0 : -1.0);
}

/// B_j = Delta^l (j = 2l) or d_nu Delta^l (j = 2l + 1); C_j flips the sign
/// of the odd members.
class DirichletSystem {
public:
  DirichletSystem(int n, int m) : n_(n), m_(m) {}
  [[nodiscard]] int size() const { return 2 * m_; }
  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] int n() const { return n_; }

  [[nodiscard]] DiffOp B(int j, const SpacePoint& normal) const {
    check(j);
    DiffOp op = DiffOp::laplacian_power(n_, j / 2);
    if (j % 2 == 1) op = DiffOp::directional(n_, normal) * op;
    return op;
  }
  [[nodiscard]] DiffOp C(int j, const SpacePoint& normal) const {
    return j % 2 == 1 ? B(j, normal) * -1.0 : B(j, normal);
  }
  /// Order of B_j as a differential operator.
  [[nodiscard]] int order(int j) const { return j; }

private:
  void check(int j) const {
    if (j < 0 || j >= 2 * m_) throw std::out_of_range("DirichletSystem: index out of range");
  }
  int n_, m_;
};

/// (B_j u)(node) for a field exposing derivative(mi, p).
template <class Field>
double apply_B(const DirichletSystem& sys, int j, const Field& field, const SpaceTimePoint& p,
               const SpacePoint& normal) {
  return sys.B(j, normal).apply(field, p);
}

/// (C_j)_y Phi_m(x - y, t - tau) at target (x, t), source (y, tau) with
/// normal nu(y).
inline double apply_C_kernel(const DirichletSystem& sys, int j, const Kernel& kernel,
                             const SpaceTimePoint& target, const SpaceTimePoint& source,
                             const SpacePoint& normal) {
  const SpaceTimePoint rel{diff(target.x, source.x), target.t - source.t};
  if (rel.t == 0.0 && norm(rel.x) == 0.0) {
    throw SingularityError("apply_C_kernel: target coincides with the source node");
  }
  if (rel.t <= 0.0) return 0.0;
  if (j == 0) return kernel.phi(rel);
  return kernel.apply(sys.C(j, normal).reflected(), rel);
}

}  // namespace polyheat
