#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "polyheat/potentials.hpp"
#include "polyheat/quadrature.hpp"

using namespace polyheat;

namespace {
constexpr double pi = std::numbers::pi;

CylinderSpec interval_spec(double T = 1.0) {
  return build_cylinder(BaseDomain::interval(0, 1), T, GammaSpec::endpoint(false), BaseDomain::interval(-1, 0));
}
CylinderSpec disk_spec() {
  return build_cylinder(BaseDomain::disk({0, 0, 0}, 1), 1.0, GammaSpec::disk_arc(0, pi),
                        BaseDomain::annular_sector({0, 0, 0}, 1, 1.5, 0, pi));
}
double bump(const SpaceTimePoint& p) {
  return std::exp(-(p.t - 0.5) * (p.t - 0.5) / 0.02) * (1.0 + 0.3 * (p.x[0] + 0.5 * p.x[1]));
}
LayerData single_trace(const BoundaryGrid& g, int count, int i) {
  LayerData d{&g, {}};
  for (int j = 0; j < count; ++j) d.traces.push_back(g.sample([&](const BoundaryNode& nd) { return j == i ? bump(nd.p) : 0.0; }));
  return d;
}
}  // namespace

TEST(Poisson, ZeroAndCausality) {
  const PotentialEvaluator ev({1, 1});
  const VolumeGrid g(BaseDomain::interval(-1, 1), 16);
  const auto zero = g.sample([](const SpaceTimePoint&) { return 0.0; });
  const auto one = g.sample([](const SpaceTimePoint&) { return 1.0; });
  EXPECT_EQ(ev.poisson_I(g, zero, 0.0, {{0.2, 0, 0}, 0.5}), 0.0);
  EXPECT_EQ(ev.poisson_I(g, one, 0.5, {{0.2, 0, 0}, 0.5}), 0.0);
  EXPECT_EQ(ev.poisson_I(g, one, 0.5, {{0.2, 0, 0}, 0.1}), 0.0);
}

TEST(Poisson, UnitMassOnLargeInterval) {
  const PotentialEvaluator ev({1, 1});
  const VolumeGrid g(BaseDomain::interval(-8, 8), 32);
  const auto one = g.sample([](const SpaceTimePoint&) { return 1.0; });
  // time argument is t - T1
  EXPECT_NEAR(ev.poisson_I(g, one, 0.25, {{0, 0, 0}, 0.75}), 1.0, 1e-8);
}

TEST(Poisson, SemigroupOracle) {
  for (int m : {1, 2}) {
    const PotentialEvaluator ev({1, m});
    const Kernel& k = ev.kernel();
    const double z = 0.3, delta = 0.05, s = 0.2;
    const VolumeGrid g(BaseDomain::interval(-6, 6), 384);
    const auto h = g.sample([&](const SpaceTimePoint& p) { return k.phi({{p.x[0] - z, 0, 0}, delta}); });
    const double expect = k.phi({{0, 0, 0}, delta + s});
    EXPECT_NEAR(ev.poisson_I(g, h, 0.0, {{z, 0, 0}, s}), expect, 1e-6 * expect) << m;
  }
}

TEST(VolumePotential, UnitSourceGivesElapsedTime) {
  const PotentialEvaluator ev({1, 2});
  // the m = 2 kernel has a slower tail than the heat kernel, hence the wide interval
  const VolumeGrid g(BaseDomain::interval(-20, 20), 32, PanelAxis::with_nodes(0.0, 1.0, 16));
  const auto one = g.sample([](const SpaceTimePoint&) { return 1.0; });
  const auto zero = g.sample([](const SpaceTimePoint&) { return 0.0; });
  EXPECT_NEAR(ev.volume_G(g, one, 0.0, {{0.1, 0, 0}, 0.7}), 0.7, 1e-7);
  EXPECT_EQ(ev.volume_G(g, zero, 0.0, {{0.1, 0, 0}, 0.7}), 0.0);
  EXPECT_EQ(ev.volume_G(g, one, 0.0, {{0.1, 0, 0}, 0.0}), 0.0);
  // L_m of a caloric field samples to zero
  const auto u = AnalyticField::kernel_translate(ev.kernel(), {9.0, 0, 0}, 0.3);
  const DiffOp L = heat_operator(1, 2);
  const auto f = g.sample([&](const SpaceTimePoint& p) { return L.apply(u, p); });
  EXPECT_NEAR(ev.volume_G(g, f, 0.0, {{0.1, 0, 0}, 0.7}), 0.0, 1e-12);
}

TEST(LayerPotential, PointSourceAgainstTimeIntegral) {
  const PotentialEvaluator ev({1, 1});
  const auto spec = interval_spec();
  const BoundaryGrid g = boundary_grid(spec, Patch::gamma, 1, 32);
  const auto one = g.sample([](const BoundaryNode&) { return 1.0; });
  const double got = ev.layer_V(0, g, one, 0.0, {{1, 0, 0}, 1.0});
  // reference on a refined composite rule; the integrand vanishes to all orders at sigma = 0
  const auto rule = composite_rule(0.0, 1.0, 2000, 12);
  const double ref = rule.integrate([](double s) { return s > 0.0 ? std::exp(-1.0 / (4.0 * s)) / std::sqrt(4.0 * pi * s) : 0.0; });
  EXPECT_NEAR(got, ref, 1e-9 * ref);
}

TEST(LayerPotential, CausalityAndZeroDensity) {
  const PotentialEvaluator ev({2, 2});
  const auto spec = disk_spec();
  const BoundaryGrid g = boundary_grid(spec, Patch::gamma, 16, 8);
  const auto dens = g.sample([](const BoundaryNode& nd) { return bump(nd.p); });
  const auto zero = g.sample([](const BoundaryNode&) { return 0.0; });
  for (int j = 0; j < 4; ++j) {
    EXPECT_EQ(ev.layer_V(j, g, dens, 0.0, {{0.2, 0.3, 0}, 0.0}), 0.0) << j;
    EXPECT_EQ(ev.layer_V(j, g, zero, 0.0, {{0.2, 0.3, 0}, 0.6}), 0.0) << j;
  }
  EXPECT_EQ(ev.layer_sum(single_trace(g, 4, 1), 0.3, {{0.2, 0.3, 0}, 0.3}), 0.0);
}

TEST(LayerPotential, Linearity) {
  const PotentialEvaluator ev({1, 2});
  const auto spec = interval_spec();
  const BoundaryGrid g = boundary_grid(spec, Patch::gamma, 1, 16);
  const auto a = g.sample([](const BoundaryNode& nd) { return bump(nd.p); });
  const auto b = g.sample([](const BoundaryNode& nd) { return std::sin(3.0 * nd.p.t); });
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = 2.0 * a[i] - 0.5 * b[i];
  for (int j = 0; j < 4; ++j) {
    const SpaceTimePoint x{{0.4, 0, 0}, 0.8};
    const double va = ev.layer_V(j, g, a, 0.0, x), vb = ev.layer_V(j, g, b, 0.0, x);
    const double vc = ev.layer_V(j, g, c, 0.0, x);
    EXPECT_NEAR(vc, 2.0 * va - 0.5 * vb, 1e-13 * (std::abs(va) + std::abs(vb))) << j;
  }
}

TEST(LayerPotential, AnnihilatedOffSource) {
  // L_m applied under the integral, and by central differences of the values
  for (int m : {1, 2}) {
    const PotentialEvaluator ev({1, m});
    const auto spec = interval_spec();
    const BoundaryGrid g = boundary_grid(spec, Patch::gamma, 1, 24);
    const auto dens = g.sample([](const BoundaryNode& nd) { return bump(nd.p); });
    const SpaceTimePoint x{{0.5, 0, 0}, 0.7};
    const DiffOp L = heat_operator(1, m);
    // L_m C_j needs 2m + j spatial derivatives; the evaluator expands 4m - 2
    for (int j = 0; j <= 2 * m - 2; ++j) {
      const double scale = std::abs(ev.layer_V(j, g, dens, 0.0, x, DiffOp::derivative(MultiIndex::dt())));
      EXPECT_LT(std::abs(ev.layer_V(j, g, dens, 0.0, x, L)), 1e-9 * scale) << m << ' ' << j;
    }
  }
  const PotentialEvaluator ev({1, 1});
  const BoundaryGrid g = boundary_grid(interval_spec(), Patch::gamma, 1, 24);
  const auto dens = g.sample([](const BoundaryNode& nd) { return bump(nd.p); });
  auto V = [&](double x, double t) { return ev.layer_V(1, g, dens, 0.0, {{x, 0, 0}, t}); };
  auto residual = [&](double h) {
    const double x = 0.5, t = 0.7;
    const double dt = (V(x, t + h) - V(x, t - h)) / (2.0 * h);
    const double dxx = (V(x + h, t) - 2.0 * V(x, t) + V(x - h, t)) / (h * h);
    return std::abs(dt - dxx);
  };
  const double r1 = residual(0.02), r2 = residual(0.01);
  EXPECT_GT(std::log2(r1 / r2), 1.8);
}

TEST(Green, HeatEquationInterval) {
  const PotentialEvaluator ev({1, 1});
  const auto u = AnalyticField::kernel_translate(ev.kernel(), {1.6, 0, 0}, 0.2);
  const std::vector<SpaceTimePoint> in{{{0.2, 0, 0}, 0.5}, {{0.5, 0, 0}, 1.0}, {{0.8, 0, 0}, 0.7}};
  const std::vector<SpaceTimePoint> out{{{-0.5, 0, 0}, 0.5}, {{1.4, 0, 0}, 1.0}};
  GreenOptions go;
  go.n_time = 32;
  go.n_volume = 32;
  const auto gi = green_reproduce(ev, u, BaseDomain::interval(0, 1), 0.0, 1.0, in, go);
  const auto ge = green_reproduce(ev, u, BaseDomain::interval(0, 1), 0.0, 1.0, out, go);
  double sup = 0.0;
  for (std::size_t k = 0; k < in.size(); ++k) {
    sup = std::max(sup, std::abs(u(in[k])));
    // closed-form heat kernel as the reference
    const std::array<double, 1> r{in[k].x[0] - 1.6};
    EXPECT_NEAR(gi[k], heat_closed_form(1, r, in[k].t + 0.2), 1e-4 * std::abs(gi[k]));
  }
  for (double v : ge) EXPECT_LT(std::abs(v), 1e-4 * sup);
}

TEST(Green, NonCaloricFieldUsesVolumeTerm) {
  const PotentialEvaluator ev({1, 2});
  // x^2 t: L_2 u = x^2, so the volume potential is exercised
  const auto u = AnalyticField(
      [](const MultiIndex& mi, const SpaceTimePoint& p) {
        const int a = mi.space[0];
        const double x = a == 0 ? p.x[0] * p.x[0] : (a == 1 ? 2.0 * p.x[0] : (a == 2 ? 2.0 : 0.0));
        const double t = mi.time == 0 ? p.t : (mi.time == 1 ? 1.0 : 0.0);
        return x * t;
      },
      8, 8);
  GreenOptions go;
  go.caloric = false;
  go.n_time = 24;
  go.n_volume = 32;
  const std::vector<SpaceTimePoint> pts{{{0.5, 0, 0}, 0.8}, {{-0.4, 0, 0}, 0.8}};
  const auto g = green_reproduce(ev, u, BaseDomain::interval(0, 1), 0.0, 1.0, pts, go);
  EXPECT_NEAR(g[0], 0.2, 1e-3 * 0.2);
  EXPECT_LT(std::abs(g[1]), 1e-3 * 0.8);
}

TEST(Green, RejectsBoundaryTargets) {
  const PotentialEvaluator ev({1, 1});
  const auto u = AnalyticField::zero();
  EXPECT_THROW(green_reproduce(ev, u, BaseDomain::interval(0, 1), 0.0, 1.0, {{{1.0, 0, 0}, 0.5}}), SingularityError);
  const auto z = green_reproduce(ev, u, BaseDomain::interval(0, 1), 0.0, 1.0, {{{0.5, 0, 0}, 0.5}});
  EXPECT_EQ(z[0], 0.0);
}

TEST(Jump, HeatLayersOnPoint) {
  const PotentialEvaluator ev({1, 1});
  const BoundaryGrid g = boundary_grid(interval_spec(), Patch::gamma, 1, 32);
  for (int i : {0, 1}) {
    const auto data = single_trace(g, 2, i);
    for (double t : {0.3, 0.6, 0.9}) {
      const JumpResult r = jump_test(ev, data, i, 0, 0.0, t);
      const double expect = bump({{0, 0, 0}, t});
      EXPECT_TRUE(r.converged) << r.diagnostic;
      EXPECT_NEAR(r.estimate, expect, 1e-2 * expect) << i << ' ' << t;
    }
  }
  const JumpResult z = jump_test(ev, LayerData{&g, {std::vector<double>(g.size()), std::vector<double>(g.size())}}, 0, 0, 0.0, 0.5);
  EXPECT_EQ(z.estimate, 0.0);
}

TEST(Jump, DiskArcDoubleLayer) {
  const PotentialEvaluator ev({2, 1});
  const BoundaryGrid g = boundary_grid(disk_spec(), Patch::gamma, 32, 24);
  JumpOptions jo;
  jo.diameter = 2.0;
  const auto data = single_trace(g, 2, 0);
  const JumpResult r = jump_test(ev, data, 0, 0, 0.5, 0.6, jo);
  const auto& seg = g.segments()[0];
  const double expect = bump({seg.point_at(0.5), 0.6});
  EXPECT_NEAR(r.estimate, expect, 1e-2 * expect);
}
