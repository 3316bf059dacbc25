#pragma once

/// \file kernel.hpp
/// \brief Fundamental solution Phi_m(x, t) of d/dt + (-Delta)^m and its
/// space-time derivatives.
///
/// With F_k(x, t) = phi_{n+2k}(|x| t^(-1/2m)) the ladder relation gives
///
///     d/dx_i [x^b t^(p/2m) F_k] = b_i x^(b-e_i) t^(p/2m) F_k
///                                 - 2 pi x^(b+e_i) t^((p-2)/2m) F_{k+1}
///     d/dt   [x^b t^(p/2m) F_k] = (p/2m) x^b t^((p-2m)/2m) F_k
///                                 + (pi/m) |x|^2 x^b t^((p-2m-2)/2m) F_{k+1}
///
/// starting from Phi = t^(-n/2m) F_0. Every derivative is therefore a finite
/// sum of monomials times ladder profiles, expanded once per multi-index.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

#include "polyheat/diffop.hpp"
#include "polyheat/errors.hpp"
#include "polyheat/profile.hpp"

namespace polyheat {

class Kernel {
public:
  /// One monomial of a derivative expansion: coef * x^power * t^(t2m/2m) * F_shift.
  struct Term {
    double coef;
    std::array<int, kMaxDim> power;
    int shift;
    int t2m;
  };

  explicit Kernel(std::shared_ptr<const RadialProfile> profile, int max_spatial = -1,
                  int max_time = 1)
      : profile_(std::move(profile)) {
    const auto& p = profile_->params();
    max_spatial_ = max_spatial < 0 ? 2 * p.m : max_spatial;
    max_time_ = max_time;
    if (params().n + 2 * max_spatial_ + (2 * params().m + 2) * max_time_ >= kScratch) {
      throw UnsupportedOrderError("Kernel: requested derivative orders are too high");
    }
    if (max_spatial_ + max_time_ > profile_->max_shift()) {
      throw UnsupportedOrderError("Kernel: profile ladder too short for the requested orders");
    }
    for (const auto& mi : multi_indices(p.n, max_spatial_, max_time_)) {
      expansions_[mi] = expand(mi);
    }
  }

  /// Kernel backed by the shared, tabulated profile for (n, m).
  static Kernel make(KernelParams params) { return Kernel(shared_profile(params)); }

  [[nodiscard]] const KernelParams& params() const { return profile_->params(); }
  [[nodiscard]] const RadialProfile& profile() const { return *profile_; }
  [[nodiscard]] std::shared_ptr<const RadialProfile> profile_ptr() const { return profile_; }
  [[nodiscard]] int max_spatial_order() const { return max_spatial_; }
  [[nodiscard]] int max_time_order() const { return max_time_; }

  /// Phi_m(x, t); exactly 0 for t <= 0.
  [[nodiscard]] double phi(const SpaceTimePoint& p) const {
    if (p.t <= 0.0) return 0.0;
    const auto& kp = params();
    const double root = std::pow(p.t, 1.0 / (2.0 * kp.m));
    const double s = radius(p.x) / root;
    if (s > profile_->cutoff()) return 0.0;
    return std::pow(root, -kp.n) * profile_->shifted(0, s);
  }

  /// d_t^j d_x^alpha Phi_m at p.
  [[nodiscard]] double derivative(const MultiIndex& mi, const SpaceTimePoint& p) const {
    const auto it = expansions_.find(normalized(mi));
    if (it == expansions_.end()) {
      throw UnsupportedOrderError("Kernel: derivative order beyond the expanded range");
    }
    if (p.t == 0.0 && radius(p.x) == 0.0) {
      throw SingularityError("Kernel: derivative evaluated at the singularity (0, 0)");
    }
    if (p.t <= 0.0) return 0.0;
    Eval ev(*this, p);
    if (ev.zero) return 0.0;
    return ev.sum(it->second);
  }

  /// sum_i c_i d^{alpha_i} Phi_m, sharing one profile lookup.
  [[nodiscard]] double apply(const DiffOp& op, const SpaceTimePoint& p) const {
    if (op.empty()) return 0.0;
    if (p.t == 0.0 && radius(p.x) == 0.0) {
      throw SingularityError("Kernel: derivative evaluated at the singularity (0, 0)");
    }
    if (p.t <= 0.0) return 0.0;
    Eval ev(*this, p);
    if (ev.zero) return 0.0;
    double total = 0.0;
    for (const auto& term : op.terms()) {
      const auto it = expansions_.find(normalized(term.index));
      if (it == expansions_.end()) {
        throw UnsupportedOrderError("Kernel: derivative order beyond the expanded range");
      }
      total += term.coef * ev.sum(it->second);
    }
    return total;
  }

  /// A DiffOp flattened into one merged monomial list.
  struct Compiled {
    std::vector<Term> terms;
  };

  [[nodiscard]] Compiled compile(const DiffOp& op) const {
    using Key = std::tuple<std::array<int, kMaxDim>, int, int>;
    std::map<Key, double> merged;
    for (const auto& t : op.terms()) {
      for (const auto& e : expansion(t.index)) merged[Key{e.power, e.shift, e.t2m}] += t.coef * e.coef;
    }
    Compiled c;
    for (const auto& [key, coef] : merged) {
      if (coef == 0.0) continue;
      const auto& [pw, k, t2m] = key;
      c.terms.push_back({coef, pw, k, t2m});
    }
    return c;
  }

  /// Evaluate several compiled operators at one point.
  void evaluate(std::span<const Compiled> ops, const SpaceTimePoint& p, std::span<double> out) const {
    if (p.t == 0.0 && radius(p.x) == 0.0) {
      throw SingularityError("Kernel: derivative evaluated at the singularity (0, 0)");
    }
    std::fill(out.begin(), out.end(), 0.0);
    if (p.t <= 0.0) return;
    Eval ev(*this, p);
    if (ev.zero) return;
    for (std::size_t i = 0; i < ops.size(); ++i) out[i] = ev.sum(ops[i].terms);
  }

  [[nodiscard]] double evaluate(const Compiled& op, const SpaceTimePoint& p) const {
    double v = 0.0;
    evaluate(std::span<const Compiled>(&op, 1), p, std::span<double>(&v, 1));
    return v;
  }

  [[nodiscard]] const std::vector<Term>& expansion(const MultiIndex& mi) const {
    const auto it = expansions_.find(normalized(mi));
    if (it == expansions_.end()) {
      throw UnsupportedOrderError("Kernel: derivative order beyond the expanded range");
    }
    return it->second;
  }

private:
  static constexpr int kScratch = 64;

  struct Eval {
    Eval(const Kernel& k, const SpaceTimePoint& p) : kernel(k) {
      const auto& kp = k.params();
      const double root = std::pow(p.t, 1.0 / (2.0 * kp.m));
      s = radius_of(kp.n, p.x) / root;
      if (s > k.profile_->cutoff()) {
        zero = true;
        return;
      }
      const int order = k.max_spatial_ + k.max_time_;
      const int degree = k.max_spatial_ + 2 * k.max_time_;
      for (int i = 0; i < kp.n; ++i) {
        pow_x[i][0] = 1.0;
        for (int e = 1; e <= degree; ++e) pow_x[i][e] = pow_x[i][e - 1] * p.x[i];
      }
      const double inv_root = 1.0 / root;
      // t2m ranges over [-(n + 2 spatial + (2m + 2) time), -n]
      const int span_t = kp.n + 2 * k.max_spatial_ + (2 * kp.m + 2) * k.max_time_;
      inv_pow[0] = 1.0;
      for (int e = 1; e <= span_t; ++e) inv_pow[e] = inv_pow[e - 1] * inv_root;
      k.profile_->shifted_all(s, std::span<double>(ladder.data(), order + 1));
    }
    [[nodiscard]] double sum(const std::vector<Term>& terms) const {
      const int n = kernel.params().n;
      double total = 0.0;
      for (const auto& t : terms) {
        double mono = t.coef * ladder[t.shift] * inv_pow[-t.t2m];
        for (int i = 0; i < n; ++i) mono *= pow_x[i][t.power[i]];
        total += mono;
      }
      return total;
    }
    const Kernel& kernel;
    double s = 0.0;
    bool zero = false;
    std::array<double, kScratch> inv_pow{};
    std::array<std::array<double, kScratch>, kMaxDim> pow_x{};
    std::array<double, kScratch> ladder{};
  };

  static double radius_of(int n, const SpacePoint& x) {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    return std::sqrt(r2);
  }
  [[nodiscard]] double radius(const SpacePoint& x) const { return radius_of(params().n, x); }

  [[nodiscard]] MultiIndex normalized(MultiIndex mi) const {
    for (int i = params().n; i < kMaxDim; ++i) {
      if (mi.space[i] != 0) {
        throw UnsupportedOrderError("Kernel: derivative along an inactive axis");
      }
    }
    return mi;
  }

  [[nodiscard]] std::vector<Term> expand(const MultiIndex& mi) const {
    const auto& kp = params();
    using Key = std::tuple<std::array<int, kMaxDim>, int, int>;
    std::map<Key, double> cur{{Key{{0, 0, 0}, 0, -kp.n}, 1.0}};
    const double pi = std::numbers::pi;
    auto dx = [&](int axis) {
      std::map<Key, double> next;
      for (const auto& [key, c] : cur) {
        auto [pw, k, t2m] = key;
        if (pw[axis] > 0) {
          auto q = pw;
          q[axis] -= 1;
          next[Key{q, k, t2m}] += c * pw[axis];
        }
        auto q = pw;
        q[axis] += 1;
        next[Key{q, k + 1, t2m - 2}] += -2.0 * pi * c;
      }
      cur = std::move(next);
    };
    auto dt = [&]() {
      std::map<Key, double> next;
      const int two_m = 2 * kp.m;
      for (const auto& [key, c] : cur) {
        auto [pw, k, t2m] = key;
        next[Key{pw, k, t2m - two_m}] += c * t2m / static_cast<double>(two_m);
        for (int i = 0; i < kp.n; ++i) {
          auto q = pw;
          q[i] += 2;
          next[Key{q, k + 1, t2m - two_m - 2}] += c * pi / kp.m;
        }
      }
      cur = std::move(next);
    };
    for (int axis = 0; axis < kp.n; ++axis) {
      for (int r = 0; r < mi.space[axis]; ++r) dx(axis);
    }
    for (int r = 0; r < mi.time; ++r) dt();
    std::vector<Term> out;
    for (const auto& [key, c] : cur) {
      if (c == 0.0) continue;
      const auto& [pw, k, t2m] = key;
      out.push_back({c, pw, k, t2m});
    }
    return out;
  }

  std::shared_ptr<const RadialProfile> profile_;
  int max_spatial_ = 0;
  int max_time_ = 0;
  std::map<MultiIndex, std::vector<Term>> expansions_;
};

}  // namespace polyheat
