#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "polyheat/kernel.hpp"
#include "polyheat/quadrature.hpp"

using namespace polyheat;

namespace {
constexpr double pi = std::numbers::pi;

// |S^{n-1}| * int_0^R r^{n-1} Phi(r, t) dr on a fine composite rule
double radial_mass(const Kernel& k, double t) {
  const int n = k.params().n;
  const double surface = n == 1 ? 2.0 : (n == 2 ? 2.0 * pi : 4.0 * pi);
  const double R = k.profile().cutoff() * std::pow(t, 1.0 / (2.0 * k.params().m));
  const auto rule = composite_rule(0.0, R, 400, 12);
  return surface * rule.integrate([&](double r) { return std::pow(r, n - 1) * k.phi({{r, 0, 0}, t}); });
}
}  // namespace

TEST(KernelParams, SupportedRange) {
  EXPECT_NO_THROW((KernelParams{3, 3}.validate()));
  EXPECT_THROW((KernelParams{4, 1}.validate()), CapabilityError);
  EXPECT_THROW((KernelParams{1, 0}.validate()), std::invalid_argument);
}

// the normalization (2 pi)^{-n/2} is confirmed by total mass 1
TEST(Normalization, MassOracle) {
  EXPECT_NEAR(normalization(1), 0.3989422804, 1e-10);
  EXPECT_NEAR(normalization(2), 0.1591549431, 1e-10);
  EXPECT_NEAR(normalization(3), 0.0634936359, 1e-10);
  for (auto [n, m] : {std::pair{1, 1}, {2, 2}, {3, 1}}) {
    EXPECT_NEAR(radial_mass(Kernel::make({n, m}), 1.0), 1.0, 1e-9) << n << ' ' << m;
  }
}

TEST(Profile, CenterValues) {
  const auto p11 = shared_profile({1, 1});
  EXPECT_NEAR(p11->profile(0.0, 0), 1.0 / std::sqrt(4.0 * pi), 1e-14);
  const std::array<double, 1> zero{0.0};
  EXPECT_NEAR(p11->profile(0.0, 0), heat_closed_form(1, zero, 1.0), 1e-14);
  // phi(0) = k_n (Gamma(n/2m) / 2m) 2^{1-n/2} / Gamma(n/2), evaluated here by hand
  const double c12 = normalization(1) * std::tgamma(0.25) / 4.0 * std::sqrt(2.0) / std::tgamma(0.5);
  EXPECT_NEAR(shared_profile({1, 2})->profile(0.0, 0), c12, 1e-13);
  EXPECT_NEAR(profile_center_value(1, 2), c12, 1e-14);
  EXPECT_NEAR(shared_profile({2, 2})->profile(0.0, 1), 0.0, 1e-14);
}

TEST(Profile, TableMatchesDirectQuadrature) {
  for (auto [n, m] : {std::pair{1, 2}, {2, 3}, {3, 2}}) {
    const RadialProfile table({n, m});
    ProfileOptions o;
    o.tabulate = false;
    const RadialProfile direct({n, m}, o);
    const double scale = std::abs(table.center(0));
    double worst = 0.0;
    for (double s = 0.0; s <= 9.0; s += 0.0537) {
      worst = std::max(worst, std::abs(table.shifted(0, s) - direct.shifted(0, s)));
    }
    EXPECT_LT(worst / scale, 1e-10) << n << ' ' << m;
  }
}

TEST(Profile, ContourFormInFarField) {
  const RadialProfile p({1, 2});
  // the cancelling direct sum loses digits here; the rotated Fourier contour does not
  for (double s : {5.0, 8.0, 10.0}) {
    const double c = p.contour_value(1, s);
    EXPECT_NEAR(p.direct(0, s, true), c, 1e-9 * std::abs(c) + 1e-18) << s;
  }
}

TEST(Profile, SignChangeForHigherOrder) {
  for (int n : {1, 2, 3}) {
    const auto p = shared_profile({n, 2});
    double lo = INFINITY;
    for (double s = 0.0; s <= 12.0; s += 0.01) lo = std::min(lo, p->profile(s, 0));
    EXPECT_LT(lo, 0.0) << n;
  }
  const auto heat = shared_profile({1, 1});
  for (double s = 0.0; s <= 12.0; s += 0.01) ASSERT_GE(heat->profile(s, 0), 0.0);
}

TEST(Profile, DerivativeOrderLimit) {
  const auto p = shared_profile({1, 2});
  EXPECT_NO_THROW((void)p->profile(1.0, 4));
  EXPECT_THROW((void)p->profile(1.0, 5), UnsupportedOrderError);
}

TEST(Profile, SaveLoadRoundTrip) {
  const RadialProfile p({2, 2});
  std::stringstream ss;
  p.save_table(ss);
  EXPECT_EQ(ss.str().rfind("# polyheat profile table v1", 0), 0u);
  const auto q = RadialProfile::load_table(ss);
  EXPECT_EQ(q->params(), p.params());
  for (double s : {0.0, 0.37, 2.5, 7.01, 11.9}) {
    EXPECT_DOUBLE_EQ(q->shifted(0, s), p.shifted(0, s));
    EXPECT_DOUBLE_EQ(q->shifted(2, s), p.shifted(2, s));
  }
  std::stringstream bad("# something else\n1,2,3\n");
  EXPECT_ANY_THROW(RadialProfile::load_table(bad));
}

TEST(Kernel, CausalAndSingular) {
  const Kernel k = Kernel::make({2, 2});
  EXPECT_EQ(k.phi({{0.3, 0.1, 0}, 0.0}), 0.0);
  EXPECT_EQ(k.phi({{0.3, 0.1, 0}, -1.0}), 0.0);
  EXPECT_EQ(k.derivative(MultiIndex::partial(0), {{0.3, 0.1, 0}, -0.5}), 0.0);
  EXPECT_THROW((void)k.derivative(MultiIndex::partial(0), {{0, 0, 0}, 0.0}), SingularityError);
  EXPECT_THROW((void)k.derivative(MultiIndex::partial(0, 7), {{0.1, 0, 0}, 1.0}), UnsupportedOrderError);
}

TEST(Kernel, ScalingAndSelfSimilarity) {
  const Kernel k = Kernel::make({1, 2});
  EXPECT_NEAR(k.phi({{0, 0, 0}, 16.0}), 0.5 * profile_center_value(1, 2), 1e-15);
  const Kernel k3 = Kernel::make({3, 2});
  // same similarity variable |x| t^{-1/4} = 1.2
  const double a = k3.phi({{1.2, 0, 0}, 1.0});
  const double b = k3.phi({{0, 2.4 * 0.6, 2.4 * 0.8}, 16.0}) * std::pow(16.0, 0.75);
  EXPECT_NEAR(a, b, 1e-14 * std::abs(a));
}

TEST(Kernel, HeatDerivativeClosedForm) {
  const Kernel k = Kernel::make({1, 1});
  const SpaceTimePoint p{{2.0, 0, 0}, 1.0};
  EXPECT_NEAR(k.derivative(MultiIndex::partial(0), p), -0.1037768744, 1e-10);
  EXPECT_NEAR(k.derivative(MultiIndex::partial(0), p), -(2.0 / 2.0) * k.phi(p), 1e-15);
  const Kernel k2 = Kernel::make({1, 2});
  EXPECT_NEAR(k2.derivative(MultiIndex::partial(0), {{0, 0, 0}, 1.0}), 0.0, 1e-15);
}

TEST(Kernel, DerivativesMatchFiniteDifferences) {
  const Kernel k = Kernel::make({2, 2});
  const SpaceTimePoint p{{0.7, -0.4, 0}, 0.8};
  const double h = 1e-5;
  auto shift = [&](int axis, double d) {
    SpaceTimePoint q = p;
    if (axis < 0) q.t += d;
    else q.x[axis] += d;
    return q;
  };
  for (int axis : {-1, 0, 1}) {
    const MultiIndex mi = axis < 0 ? MultiIndex::dt() : MultiIndex::partial(axis);
    const double fd = (k.phi(shift(axis, h)) - k.phi(shift(axis, -h))) / (2.0 * h);
    EXPECT_NEAR(k.derivative(mi, p), fd, 1e-8) << axis;
  }
  // a third derivative from the second, once more by differences
  const MultiIndex dxx = MultiIndex::partial(0, 2);
  const double fd3 = (k.derivative(dxx, shift(1, h)) - k.derivative(dxx, shift(1, -h))) / (2.0 * h);
  EXPECT_NEAR(k.derivative(dxx + MultiIndex::partial(1), p), fd3, 1e-7);
}

TEST(Kernel, TimeDerivativeIsMinusPolyharmonic) {
  for (auto [n, m] : {std::pair{1, 1}, {1, 3}, {2, 2}, {3, 1}, {3, 2}}) {
    const Kernel k = Kernel::make({n, m});
    const DiffOp L = DiffOp::derivative(MultiIndex::dt()) + DiffOp::laplacian_power(n, m) * (m % 2 ? -1.0 : 1.0);
    for (const SpaceTimePoint& p : {SpaceTimePoint{{0.3, 0.2, -0.1}, 0.5}, SpaceTimePoint{{1.1, 0.0, 0.4}, 2.0}}) {
      const double scale = std::abs(k.derivative(MultiIndex::dt(), p)) + 1e-12;
      EXPECT_NEAR(k.apply(L, p) / scale, 0.0, 1e-10) << n << ' ' << m;
    }
  }
}

TEST(Kernel, CompiledOperatorsAgreeWithApply) {
  const Kernel k = Kernel::make({2, 2});
  const DiffOp op = DiffOp::laplacian_power(2, 1) * DiffOp::directional(2, {0.6, 0.8, 0}) + DiffOp::identity() * 2.0;
  const auto c = k.compile(op);
  for (const SpaceTimePoint& p : {SpaceTimePoint{{0.3, 0.2, 0}, 0.5}, SpaceTimePoint{{-1.1, 0.7, 0}, 1.5}}) {
    EXPECT_NEAR(k.evaluate(c, p), k.apply(op, p), 1e-13 * (1.0 + std::abs(k.apply(op, p))));
  }
}
