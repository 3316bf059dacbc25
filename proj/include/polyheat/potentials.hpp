#pragma once

/// \file potentials.hpp
/// \brief Poisson, volume and layer potentials of Phi_m by target-adaptive
/// quadrature over sampled densities; the Green representation and the
/// jump relations of the layer sum.
///
/// Convention for the layer sum. For u smooth on the closed cylinder,
///
///   u = I(u(., T1)) + G(L_m u) + sum_j  int int  K_j(x - y, t - tau) (B_j u)(y, tau)
///
/// inside Omega_T and 0 outside, with K_j = (-1)^(m+1) (C_{2m-1-j})_y Phi_m,
/// i.e. the adjoint operator of complementary index paired with B_j. The
/// literal single-operator potentials V^(j) (C_j paired with its density)
/// are also available.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "polyheat/diffop.hpp"
#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/kernel.hpp"
#include "polyheat/quadrature.hpp"

namespace polyheat {

/// Similarity variable beyond which the profile envelope is below e^-40.
inline double negligible_similarity(int m) {
  const auto [c, q] = profile_decay(m);
  return std::pow(40.0 / c, 1.0 / q);
}

struct PotentialOptions {
  /// Gauss-Legendre nodes per panel, all directions.
  int order = 16;
  int base_time_panels = 4;
  int base_space_panels = 4;
  /// Smallest graded boundary panel relative to the target distance.
  double space_floor = 0.25;
  int angular_panels = 16;
  /// Radial panels per kernel width in volume integrals.
  double radial_density = 1.0;
};

/// Densities u_1..u_2m sampled on one boundary grid.
struct LayerData {
  const BoundaryGrid* grid = nullptr;
  std::vector<std::vector<double>> traces;  // traces[j] goes with B_j
};

class PotentialEvaluator {
public:
  explicit PotentialEvaluator(KernelParams params, PotentialOptions opt = {})
      : kernel_(make_kernel(params)), sys_(params.n, params.m), opt_(opt) {}

  [[nodiscard]] const Kernel& kernel() const { return kernel_; }
  [[nodiscard]] const DirichletSystem& system() const { return sys_; }
  [[nodiscard]] const PotentialOptions& options() const { return opt_; }
  [[nodiscard]] int n() const { return sys_.n(); }
  [[nodiscard]] int m() const { return sys_.m(); }

  /// op_x of int_Omega Phi_m(x - y, t - T1) h(y) dy.
  [[nodiscard]] double poisson_I(const VolumeGrid& grid, std::span<const double> h, double T1,
                                 const SpaceTimePoint& target,
                                 const DiffOp& op = DiffOp::identity()) const {
    const double sigma = target.t - T1;
    if (!(sigma > 0.0)) return 0.0;
    const auto c = kernel_.compile(op);
    return volume_slice(grid, sigma, target.x, [&](const SpacePoint& y) {
      return grid.interpolate(h, y);
    }, c);
  }

  /// op_x of int_T1^t int_Omega Phi_m(x - y, t - tau) f(y, tau) dy dtau.
  [[nodiscard]] double volume_G(const VolumeGrid& grid, std::span<const double> f, double T1,
                                const SpaceTimePoint& target,
                                const DiffOp& op = DiffOp::identity()) const {
    if (!grid.time_axis()) throw std::invalid_argument("volume_G: grid needs a time axis");
    const double tau_hi = std::min(target.t, grid.time_axis()->hi());
    const double tau_lo = std::max(T1, grid.time_axis()->lo());
    if (!(tau_hi > tau_lo)) return 0.0;
    const auto c = kernel_.compile(op);
    const double d = std::max(grid.domain().distance_to_boundary(target.x), 1e-3 * grid.domain().diameter());
    const LineRule rule = time_rule(target.t - tau_hi, target.t - tau_lo, d);
    double total = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double sigma = rule.nodes[k];
      if (sigma <= 0.0) continue;
      const double tau = target.t - sigma;
      total += rule.weights[k] * volume_slice(grid, sigma, target.x, [&](const SpacePoint& y) {
        return grid.interpolate(f, y, tau);
      }, c);
    }
    return total;
  }

  /// op_x of the literal potential int int (C_j)_y Phi_m(x - y, t - tau) v(y, tau).
  [[nodiscard]] double layer_V(int j, const BoundaryGrid& grid, std::span<const double> v, double T1,
                               const SpaceTimePoint& target,
                               const DiffOp& op = DiffOp::identity()) const {
    const std::vector<std::span<const double>> dens{v};
    return layer_integral(grid, dens, T1, target, [&](const SpacePoint& nu) {
      return std::vector<Kernel::Compiled>{kernel_.compile(op * sys_.C(j, nu).reflected())};
    });
  }

  /// op_x of sum_j int int K_j(x - y, t - tau) u_{j+1}(y, tau), over one grid.
  [[nodiscard]] double layer_sum(const LayerData& data, double T1, const SpaceTimePoint& target,
                                 const DiffOp& op = DiffOp::identity()) const {
    const int count = 2 * m();
    if (static_cast<int>(data.traces.size()) != count) {
      throw std::invalid_argument("layer_sum: need 2m traces");
    }
    std::vector<std::span<const double>> dens;
    std::vector<int> active;
    for (int j = 0; j < count; ++j) {
      if (data.traces[j].size() != data.grid->size()) {
        throw std::invalid_argument("layer_sum: trace size does not match the grid");
      }
      if (std::any_of(data.traces[j].begin(), data.traces[j].end(), [](double x) { return x != 0.0; })) {
        dens.emplace_back(data.traces[j]);
        active.push_back(j);
      }
    }
    if (active.empty()) return 0.0;
    const double sign = m() % 2 == 1 ? 1.0 : -1.0;
    return layer_integral(*data.grid, dens, T1, target, [&](const SpacePoint& nu) {
      std::vector<Kernel::Compiled> ops;
      for (int j : active) ops.push_back(kernel_.compile(op * sys_.C(count - 1 - j, nu).reflected() * sign));
      return ops;
    });
  }

  /// Kernel of term j of the layer sum, for direct checks.
  [[nodiscard]] double layer_kernel(int j, const SpaceTimePoint& target, const SpaceTimePoint& source,
                                    const SpacePoint& nu) const {
    const double sign = m() % 2 == 1 ? 1.0 : -1.0;
    return sign * apply_C_kernel(sys_, 2 * m() - 1 - j, kernel_, target, source, nu);
  }

private:
  static Kernel make_kernel(KernelParams p) {
    p.validate();
    ProfileOptions po;
    po.max_shift = 4 * p.m - 1;
    return Kernel(shared_profile(p, po), 4 * p.m - 2, 1);
  }

  /// Rule in sigma = t - tau over [s_lo, s_hi], graded toward sigma = 0 when
  /// s_lo = 0, down to the scale where Phi at distance d is negligible.
  [[nodiscard]] LineRule time_rule(double s_lo, double s_hi, double d) const {
    std::vector<double> br;
    const int P = opt_.base_time_panels;
    for (int p = 0; p <= P; ++p) br.push_back(s_lo + (s_hi - s_lo) * p / P);
    if (s_lo == 0.0) {
      const double floor = std::pow(d / negligible_similarity(m()), 2.0 * m());
      double w = br[1];
      while (w > floor && br.size() < 200) {
        w *= 0.5;
        br.push_back(w);
      }
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return panel_rule(br, opt_.order);
  }

  /// Rule in the segment parameter, graded toward u_star down to
  /// space_floor * d in arc length.
  [[nodiscard]] LineRule space_rule(const Segment& seg, double u_star, double d) const {
    std::vector<double> br;
    const int P = opt_.base_space_panels;
    for (int p = 0; p <= P; ++p) br.push_back(static_cast<double>(p) / P);
    const double len = seg.length();
    const double floor = std::max(opt_.space_floor * d / len, 1e-12);
    for (double w = floor; w < 1.0; w *= 2.0) {
      if (u_star - w > 0.0) br.push_back(u_star - w);
      if (u_star + w < 1.0) br.push_back(u_star + w);
    }
    br.push_back(u_star);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return panel_rule(br, opt_.order);
  }

  template <class OpsFor>
  [[nodiscard]] double layer_integral(const BoundaryGrid& grid, const std::vector<std::span<const double>>& dens,
                                      double T1, const SpaceTimePoint& target, OpsFor&& ops_for) const {
    const auto& taxis = grid.time_axis();
    const double tau_hi = std::min(target.t, taxis.hi());
    const double tau_lo = std::max(T1, taxis.lo());
    if (!(tau_hi > tau_lo)) return 0.0;
    double total = 0.0;
    std::vector<double> kv;
    const auto& segs = grid.segments();
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
      const Segment& seg = segs[s];
      const auto [u_star, d] = seg.closest(target.x);
      const double sigma_lo = target.t - tau_hi;
      if (d == 0.0 && sigma_lo == 0.0) {
        throw SingularityError("layer potential: target lies on the layer");
      }
      const LineRule trule = time_rule(sigma_lo, target.t - tau_lo, std::max(d, 1e-300));
      std::vector<PanelAxis::Weights> tw;
      tw.reserve(trule.size());
      for (std::size_t k = 0; k < trule.size(); ++k) tw.push_back(taxis.weights_at(target.t - trule.nodes[k]));

      LineRule srule;
      if (seg.kind == Segment::Kind::point) {
        srule.nodes = {0.5};
        srule.weights = {1.0};
      } else {
        srule = space_rule(seg, u_star, d);
      }
      const double jac = seg.jacobian();
      for (std::size_t i = 0; i < srule.size(); ++i) {
        const double u = srule.nodes[i];
        const SpacePoint y = seg.point_at(u);
        const SpacePoint nu = seg.normal_at(u);
        const auto ops = ops_for(nu);
        kv.resize(ops.size());
        const auto sw = grid.space_axis(s).weights_at(u);
        const SpacePoint rel = diff(target.x, y);
        double acc = 0.0;
        for (std::size_t k = 0; k < trule.size(); ++k) {
          const double sigma = trule.nodes[k];
          kernel_.evaluate(ops, {rel, sigma}, kv);
          double v = 0.0;
          for (std::size_t j = 0; j < ops.size(); ++j) {
            if (kv[j] != 0.0) v += kv[j] * grid.interpolate(dens[j], s, sw, tw[k]);
          }
          acc += trule.weights[k] * v;
        }
        total += srule.weights[i] * jac * acc;
      }
    }
    return total;
  }

  /// int_Omega (op Phi)(x - y, sigma) h(y) dy in target-centered coordinates.
  template <class H>
  [[nodiscard]] double volume_slice(const VolumeGrid& grid, double sigma, const SpacePoint& x, H&& h,
                                    const Kernel::Compiled& op) const {
    const BaseDomain& dom = grid.domain();
    const double w = std::pow(sigma, 1.0 / (2.0 * m()));
    const double reach = negligible_similarity(m()) * w;
    const auto& g = gauss_legendre(opt_.order);
    auto radial = [&](double r0, double r1, const SpacePoint& dir) {
      const double hi = std::min(r1, reach);
      if (!(hi > r0)) return 0.0;
      const int panels = std::clamp(static_cast<int>(std::ceil((hi - r0) / w * opt_.radial_density)), 1, 256);
      const double step = (hi - r0) / panels;
      double acc = 0.0;
      for (int p = 0; p < panels; ++p) {
        const double a = r0 + p * step;
        for (int i = 0; i < opt_.order; ++i) {
          const double r = a + 0.5 * step * (1.0 + g.nodes[i]);
          const SpacePoint y = axpy(r, dir, x);
          const double jac = dom.dim() == 2 ? r : 1.0;
          const double k = kernel_.evaluate(op, {SpacePoint{-r * dir[0], -r * dir[1], 0.0}, sigma});
          if (k != 0.0) acc += 0.5 * step * g.weights[i] * jac * k * h(y);
        }
      }
      return acc;
    };
    if (dom.dim() == 1) {
      double total = 0.0;
      for (double sgn : {-1.0, 1.0}) {
        const SpacePoint dir{sgn, 0.0, 0.0};
        if (auto iv = dom.ray_interval(x, dir)) total += radial(iv->first, iv->second, dir);
      }
      return total;
    }
    const auto breaks = angular_breaks(dom, x);
    double total = 0.0;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const double a0 = breaks[b], a1 = breaks[b + 1];
      for (int i = 0; i < opt_.order; ++i) {
        const double th = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * g.nodes[i];
        const SpacePoint dir{std::cos(th), std::sin(th), 0.0};
        if (auto iv = dom.ray_interval(x, dir)) {
          total += 0.5 * (a1 - a0) * g.weights[i] * radial(iv->first, iv->second, dir);
        }
      }
    }
    return total;
  }

  /// Angular panel breaks for polar integration around x.
  [[nodiscard]] std::vector<double> angular_breaks(const BaseDomain& dom, const SpacePoint& x) const {
    const double pi = std::numbers::pi;
    std::vector<double> br;
    std::vector<double> corners;
    if (dom.shape() == BaseDomain::Shape::rectangle) {
      const auto lo = dom.lo(), hi = dom.hi();
      for (const auto& c : {SpacePoint{lo[0], lo[1], 0}, SpacePoint{hi[0], lo[1], 0},
                            SpacePoint{hi[0], hi[1], 0}, SpacePoint{lo[0], hi[1], 0}}) {
        corners.push_back(std::atan2(c[1] - x[1], c[0] - x[0]));
      }
    }
    if (dom.contains(x)) {
      const int P = opt_.angular_panels;
      for (int p = 0; p <= P; ++p) br.push_back(-pi + 2.0 * pi * p / P);
      for (double c : corners) br.push_back(c);
    } else {
      // exterior (or boundary) target: the angular window seen from x
      SpacePoint toward;
      double half = 0.0;
      if (dom.shape() == BaseDomain::Shape::disk) {
        toward = diff(dom.center(), x);
        const double D = norm(toward);
        half = D > dom.radius() ? std::asin(dom.radius() / D) : 0.5 * pi;
      } else {
        const auto lo = dom.lo(), hi = dom.hi();
        toward = {0.5 * (lo[0] + hi[0]) - x[0], 0.5 * (lo[1] + hi[1]) - x[1], 0.0};
      }
      const double phi_c = std::atan2(toward[1], toward[0]);
      double lo_a = phi_c - half, hi_a = phi_c + half;
      if (!corners.empty()) {
        lo_a = INFINITY;
        hi_a = -INFINITY;
        for (double& c : corners) {
          double d = c - phi_c;
          while (d > pi) d -= 2.0 * pi;
          while (d < -pi) d += 2.0 * pi;
          c = phi_c + d;
          lo_a = std::min(lo_a, c);
          hi_a = std::max(hi_a, c);
        }
      }
      const int P = std::max(4, opt_.angular_panels / 2);
      br = dom.shape() == BaseDomain::Shape::disk ? graded_breaks_both(lo_a, hi_a, P, 8) : graded_breaks(lo_a, hi_a, P, 0);
      for (double c : corners) br.push_back(c);
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             br.end());
    return br;
  }

  Kernel kernel_;
  DirichletSystem sys_;
  PotentialOptions opt_;
};

/// Traces B_j u, j = 0..2m-1, of an analytic field on a boundary grid.
inline LayerData sample_traces(const BoundaryGrid& grid, const AnalyticField& u, const DirichletSystem& sys) {
  LayerData data{&grid, {}};
  const auto nodes = grid.nodes();
  for (int j = 0; j < sys.size(); ++j) {
    std::vector<double> v;
    v.reserve(nodes.size());
    for (const auto& nd : nodes) v.push_back(apply_B(sys, j, u, nd.p, nd.normal));
    data.traces.push_back(std::move(v));
  }
  return data;
}

struct GreenOptions {
  int n_space = 64;    // boundary nodes (n = 2)
  int n_time = 32;     // boundary time nodes
  int n_volume = 24;   // volume nodes per parameter direction
  bool caloric = true; // skip G when L_m u = 0
};

/// I(u(., T1)) + G(L_m u) + layer sum over the whole boundary, at each target.
inline std::vector<double> green_reproduce(const PotentialEvaluator& ev, const AnalyticField& u,
                                           const BaseDomain& omega, double T1, double T2,
                                           const std::vector<SpaceTimePoint>& targets,
                                           const GreenOptions& opt = {}) {
  const auto segs = omega.boundary();
  for (const auto& tg : targets) {
    for (const auto& s : segs) {
      if (s.closest(tg.x).second < 1e-12) throw SingularityError("green_reproduce: target on the boundary");
    }
  }
  BoundaryGrid bgrid(segs, opt.n_space, PanelAxis::with_nodes(T1, T2, opt.n_time));
  const LayerData data = sample_traces(bgrid, u, ev.system());
  VolumeGrid vgrid(omega, opt.n_volume);
  const auto h = vgrid.sample([&](const SpaceTimePoint& p) { return u({p.x, T1}); });
  std::optional<VolumeGrid> fgrid;
  std::vector<double> f;
  if (!opt.caloric) {
    fgrid.emplace(omega, opt.n_volume, PanelAxis::with_nodes(T1, T2, opt.n_time));
    const DiffOp L = heat_operator(ev.n(), ev.m());
    f = fgrid->sample([&](const SpaceTimePoint& p) { return L.apply(u, p); });
  }
  std::vector<double> out;
  out.reserve(targets.size());
  for (const auto& tg : targets) {
    double v = ev.poisson_I(vgrid, h, T1, tg) + ev.layer_sum(data, T1, tg);
    if (fgrid) v += ev.volume_G(*fgrid, f, T1, tg);
    out.push_back(v);
  }
  return out;
}

struct JumpOptions {
  double diameter = 1.0;
  int k_first = 3;           // offsets h = 2^-k * diameter
  int k_last = 9;
  double tolerance = 1e-2;   // abort if successive estimates differ by > 10x this
};

struct JumpResult {
  double estimate = 0.0;
  std::vector<double> offsets;
  std::vector<double> raw;       // (inner - outer) at each offset
  std::vector<double> richardson;  // second-order extrapolants
  bool converged = false;
  std::string diagnostic;
};

/// [B_i (layer sum)]^- - [B_i (layer sum)]^+ at a Gamma node, from
/// symmetric offsets along the normal and Richardson extrapolation in h.
inline JumpResult jump_test(const PotentialEvaluator& ev, const LayerData& data, int i, int segment,
                            double u, double t, const JumpOptions& opt = {}) {
  const Segment& seg = data.grid->segments().at(segment);
  const SpacePoint x = seg.point_at(u);
  const SpacePoint nu = seg.normal_at(u);
  const DiffOp Bi = ev.system().B(i, nu);
  JumpResult res;
  for (int k = opt.k_first; k <= opt.k_last; ++k) {
    const double h = std::ldexp(opt.diameter, -k);
    const double inner = ev.layer_sum(data, data.grid->time_axis().lo(), {axpy(-h, nu, x), t}, Bi);
    const double outer = ev.layer_sum(data, data.grid->time_axis().lo(), {axpy(h, nu, x), t}, Bi);
    res.offsets.push_back(h);
    res.raw.push_back(inner - outer);
  }
  // offsets halve, so R1 = 2 J(h/2) - J(h) and R2 = (4 R1(h/2) - R1(h)) / 3
  std::vector<double> r1;
  for (std::size_t k = 0; k + 1 < res.raw.size(); ++k) r1.push_back(2.0 * res.raw[k + 1] - res.raw[k]);
  for (std::size_t k = 0; k + 1 < r1.size(); ++k) res.richardson.push_back((4.0 * r1[k + 1] - r1[k]) / 3.0);
  if (res.richardson.empty()) {
    res.diagnostic = "too few offsets for extrapolation";
    res.estimate = res.raw.empty() ? 0.0 : res.raw.back();
    return res;
  }
  res.estimate = res.richardson.back();
  const double scale = std::max({std::abs(res.estimate), std::abs(res.raw.back()), 1e-300});
  res.converged = true;
  if (res.richardson.size() >= 2) {
    const double last = std::abs(res.richardson.back() - res.richardson[res.richardson.size() - 2]);
    if (last > 10.0 * opt.tolerance * scale) {
      res.converged = false;
      res.diagnostic = "extrapolants oscillate: last difference " + std::to_string(last);
    }
  }
  if (std::abs(res.estimate) < 1e-300 && std::all_of(res.raw.begin(), res.raw.end(), [](double v) { return v == 0.0; })) {
    res.estimate = 0.0;
  }
  return res;
}

/// Field values as CSV rows x1..xn, t, value.
inline void write_field_csv(std::ostream& os, int n, const std::vector<SpaceTimePoint>& pts,
                            const std::vector<double>& values) {
  for (int i = 0; i < n; ++i) os << 'x' << (i + 1) << ',';
  os << "t,value\n";
  os.precision(17);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (int i = 0; i < n; ++i) os << pts[k].x[i] << ',';
    os << pts[k].t << ',' << values[k] << '\n';
  }
}

}  // namespace polyheat
