#pragma once

/// \file quadrature.hpp
/// \brief Gauss-Legendre rules, composite and geometrically graded panel
/// rules, and a bisection-adaptive integrator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace polyheat {

/// Nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) {
      rule.nodes[0] = 0.0;
      rule.weights[0] = 2.0;
      return rule;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1]; cached, safe for concurrent use.
inline const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(detail::build_gauss_legendre(n));
  return *slot;
}

/// A 1-d rule on an interval: absolute nodes and weights.
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  void append_panel(double a, double b, const GaussRule& g) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      nodes.push_back(mid + half * g.nodes[i]);
      weights.push_back(half * g.weights[i]);
    }
  }

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
inline LineRule composite_rule(double a, double b, int panels, int order) {
  LineRule rule;
  const auto& g = gauss_legendre(order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) rule.append_panel(a + p * h, a + (p + 1) * h, g);
  return rule;
}

/// Composite rule over explicit panel breakpoints.
inline LineRule panel_rule(const std::vector<double>& breaks, int order) {
  LineRule rule;
  const auto& g = gauss_legendre(order);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) rule.append_panel(breaks[i], breaks[i + 1], g);
  }
  return rule;
}

/// Breakpoints on [a, b] graded geometrically toward b: a base partition of
/// `base_panels` equal panels, after which the last panel is bisected
/// `levels` times toward b (ratio 1/2).
inline std::vector<double> graded_breaks(double a, double b, int base_panels, int levels) {
  std::vector<double> br;
  const double h = (b - a) / base_panels;
  for (int p = 0; p < base_panels; ++p) br.push_back(a + p * h);
  double width = h;
  for (int l = 0; l < levels; ++l) {
    width *= 0.5;
    br.push_back(b - width);
  }
  br.push_back(b);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

/// Breakpoints graded geometrically toward both ends.
inline std::vector<double> graded_breaks_both(double a, double b, int base_panels, int levels) {
  auto right = graded_breaks(a, b, base_panels, levels);
  std::vector<double> br;
  const double h = (b - a) / base_panels;
  double width = h;
  br.push_back(a);
  for (int l = 0; l < levels; ++l) {
    width *= 0.5;
    br.push_back(a + width);
  }
  br.insert(br.end(), right.begin(), right.end());
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

/// Result of an adaptive integration.
struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
  bool converged = true;
};

/// Adaptive Gauss-Legendre on [a, b]: each panel's n-point estimate is
/// compared with the sum over its two halves; panels are bisected until the
/// difference is below max(abs_tol, rel_tol*|total|) apportioned by length.
/// At most `max_panels` panels are produced; beyond that, remaining panels
/// are accepted as they stand and the result is flagged unconverged.
inline AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                         double b, double rel_tol = 1e-12,
                                         double abs_tol = 1e-300, int order = 15,
                                         int max_depth = 40, int max_panels = 20000) {
  const auto& g = gauss_legendre(order);
  auto panel = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
  };
  struct Item {
    double lo, hi, whole;
    int depth;
  };
  AdaptiveResult res;
  const double total_len = b - a;
  if (total_len == 0.0) return res;
  std::vector<Item> stack{{a, b, panel(a, b), 0}};
  const double scale_guess = std::abs(stack.front().whole);
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (it.lo + it.hi);
    const double left = panel(it.lo, mid);
    const double right = panel(mid, it.hi);
    const double diff = std::abs(left + right - it.whole);
    const double share = (it.hi - it.lo) / total_len;
    const double tol = std::max(abs_tol, rel_tol * std::max(scale_guess, std::abs(res.value))) * share;
    const bool exhausted = it.depth >= max_depth ||
                           res.panels + static_cast<int>(stack.size()) >= max_panels;
    if (diff <= tol || exhausted) {
      if (diff > tol) res.converged = false;
      res.value += left + right;
      res.error += diff;
      ++res.panels;
    } else {
      stack.push_back({it.lo, mid, left, it.depth + 1});
      stack.push_back({mid, it.hi, right, it.depth + 1});
    }
  }
  return res;
}

}  // namespace polyheat
