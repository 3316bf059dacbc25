#pragma once

/// \file diffop.hpp
/// \brief Constant-coefficient linear differential operators in (x, t),
/// stored as sparse combinations of multi-indices.

#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace polyheat {

inline constexpr int kMaxDim = 3;

using SpacePoint = std::array<double, kMaxDim>;

/// Space-time point; coordinates beyond the active dimension are zero.
struct SpaceTimePoint {
  SpacePoint x{};
  double t = 0.0;
};

/// Derivative orders (d/dx1, d/dx2, d/dx3, d/dt).
struct MultiIndex {
  std::array<int, kMaxDim> space{};
  int time = 0;

  [[nodiscard]] int spatial_order() const { return space[0] + space[1] + space[2]; }
  [[nodiscard]] MultiIndex operator+(const MultiIndex& o) const {
    MultiIndex r;
    for (int i = 0; i < kMaxDim; ++i) r.space[i] = space[i] + o.space[i];
    r.time = time + o.time;
    return r;
  }
  auto operator<=>(const MultiIndex&) const = default;

  static MultiIndex partial(int axis, int times = 1) {
    MultiIndex r;
    r.space[axis] = times;
    return r;
  }
  static MultiIndex dt(int times = 1) {
    MultiIndex r;
    r.time = times;
    return r;
  }
};

/// sum_i coef_i * d^{alpha_i}
class DiffOp {
public:
  struct Term {
    MultiIndex index;
    double coef;
  };

  DiffOp() = default;
  static DiffOp identity() { return DiffOp({{MultiIndex{}, 1.0}}); }
  static DiffOp derivative(MultiIndex mi, double coef = 1.0) { return DiffOp({{mi, coef}}); }

  /// Laplacian power Delta^l in R^n (multinomial expansion).
  static DiffOp laplacian_power(int n, int l) {
    DiffOp op = identity();
    DiffOp lap;
    for (int i = 0; i < n; ++i) lap.add(MultiIndex::partial(i, 2), 1.0);
    for (int k = 0; k < l; ++k) op = op * lap;
    return op;
  }

  /// Directional derivative sum_i dir_i d/dx_i.
  static DiffOp directional(int n, const SpacePoint& dir) {
    DiffOp op;
    for (int i = 0; i < n; ++i) {
      if (dir[i] != 0.0) op.add(MultiIndex::partial(i), dir[i]);
    }
    return op;
  }

  void add(const MultiIndex& mi, double coef) {
    for (auto& t : terms_) {
      if (t.index == mi) {
        t.coef += coef;
        return;
      }
    }
    terms_.push_back({mi, coef});
  }

  [[nodiscard]] DiffOp operator*(const DiffOp& o) const {
    DiffOp r;
    for (const auto& a : terms_) {
      for (const auto& b : o.terms_) r.add(a.index + b.index, a.coef * b.coef);
    }
    r.prune();
    return r;
  }
  [[nodiscard]] DiffOp operator*(double s) const {
    DiffOp r = *this;
    for (auto& t : r.terms_) t.coef *= s;
    return r;
  }
  [[nodiscard]] DiffOp operator+(const DiffOp& o) const {
    DiffOp r = *this;
    for (const auto& t : o.terms_) r.add(t.index, t.coef);
    r.prune();
    return r;
  }

  /// The same operator acting on the source variable y of a function of
  /// x - y: each spatial derivative picks up a factor -1.
  [[nodiscard]] DiffOp reflected() const {
    DiffOp r = *this;
    for (auto& t : r.terms_) {
      if (t.index.spatial_order() % 2 != 0) t.coef = -t.coef;
    }
    return r;
  }

  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] bool empty() const { return terms_.empty(); }
  [[nodiscard]] int max_spatial_order() const {
    int o = 0;
    for (const auto& t : terms_) o = std::max(o, t.index.spatial_order());
    return o;
  }
  [[nodiscard]] int max_time_order() const {
    int o = 0;
    for (const auto& t : terms_) o = std::max(o, t.index.time);
    return o;
  }

  /// Apply to anything exposing `double derivative(const MultiIndex&, const SpaceTimePoint&)`.
  template <class Field>
  [[nodiscard]] double apply(const Field& f, const SpaceTimePoint& p) const {
    double sum = 0.0;
    for (const auto& t : terms_) sum += t.coef * f.derivative(t.index, p);
    return sum;
  }

private:
  explicit DiffOp(std::vector<Term> t) : terms_(std::move(t)) {}
  void prune() {
    std::erase_if(terms_, [](const Term& t) { return t.coef == 0.0; });
  }
  std::vector<Term> terms_;
};

/// All multi-indices in n space dimensions with spatial order <= max_order
/// and time order <= max_time.
inline std::vector<MultiIndex> multi_indices(int n, int max_order, int max_time) {
  std::vector<MultiIndex> out;
  for (int j = 0; j <= max_time; ++j) {
    for (int a = 0; a <= max_order; ++a) {
      for (int b = 0; b <= (n > 1 ? max_order - a : 0); ++b) {
        for (int c = 0; c <= (n > 2 ? max_order - a - b : 0); ++c) {
          MultiIndex mi;
          mi.space = {a, b, c};
          mi.time = j;
          out.push_back(mi);
        }
      }
    }
  }
  return out;
}

}  // namespace polyheat
