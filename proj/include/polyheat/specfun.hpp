#pragma once

/// \file specfun.hpp
/// \brief Gamma function and Bessel functions of the first kind J_nu for the
/// orders nu = k/2 >= -1/2 reachable from the kernel's dimension shifts.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyheat {

/// Bessel order restricted to multiples of 1/2, nu >= -1/2.
class BesselOrder {
public:
  /// Order nu = twice_nu / 2.
  static BesselOrder from_twice(int twice_nu) { return BesselOrder(twice_nu); }
  /// The order n/2 - 1 attached to space dimension n >= 1.
  static BesselOrder for_dimension(int n) { return BesselOrder(n - 2); }

  explicit BesselOrder(double nu) : BesselOrder(to_twice(nu)) {}

  [[nodiscard]] double value() const { return 0.5 * twice_; }
  [[nodiscard]] int twice() const { return twice_; }
  [[nodiscard]] bool half_integer() const { return (twice_ % 2) != 0; }
  [[nodiscard]] BesselOrder shifted(int k) const { return BesselOrder(twice_ + 2 * k); }

private:
  explicit BesselOrder(int twice_nu) : twice_(twice_nu) {
    if (twice_nu < -1) {
      throw std::domain_error("BesselOrder: order must be >= -1/2, got " +
                              std::to_string(0.5 * twice_nu));
    }
  }
  static int to_twice(double nu) {
    const double t = 2.0 * nu;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-12) {
      throw std::domain_error("BesselOrder: order must be a multiple of 1/2");
    }
    return static_cast<int>(r);
  }
  int twice_;
};

/// Gamma function for x > 0 (backed by std::tgamma).
inline double gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("gamma: argument must be positive");
  }
  return std::tgamma(x);
}

namespace detail {

inline constexpr double kPi = std::numbers::pi;

/// Branch boundaries for J_nu(z).
inline constexpr double kSeriesMax = 8.0;
inline double asymptotic_min(double nu) { return std::max(30.0, 2.0 * nu * nu); }

/// sum_j (-1)^j (z/2)^(2j) / (j! Gamma(j+nu+1)), i.e. (z/2)^(-nu) J_nu(z).
inline double scaled_series(double nu, double z) {
  const double q = 0.25 * z * z;
  double term = 1.0 / std::tgamma(nu + 1.0);
  double sum = term;
  for (int j = 1; j < 200; ++j) {
    term *= -q / (j * (j + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && j > q) break;
  }
  return sum;
}

/// Hankel asymptotic expansion, valid for z >> max(1, nu^2).
inline double asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 120; ++k) {
    const double a = mu - static_cast<double>((2 * k - 1) * (2 * k - 1));
    term *= a / (k * 8.0 * z);
    if (term == 0.0) break;
    const double mag = std::abs(term);
    if (mag > prev) break;  // divergent tail
    prev = mag;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < 1e-17) break;
  }
  const double chi = z - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// Miller backward recurrence for integer order, normalized by
/// J_0 + 2 sum_k J_2k = 1.
inline double miller_integer(int nu, double z) {
  const double top = std::max(static_cast<double>(nu), z);
  int start = static_cast<int>(top + 20.0 + 3.0 * std::sqrt(top));
  start += start % 2;
  double next = 0.0;
  double cur = 1e-300;
  double sum = 0.0;
  double hit = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = (2.0 * k / z) * cur - next;
    next = cur;
    cur = prev;
    const int order = k - 1;
    if (order == nu) hit = cur;
    if (order > 0 && order % 2 == 0) sum += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      sum *= 1e-250;
      hit *= 1e-250;
    }
  }
  sum += cur;  // J_0
  return hit / sum;
}

/// Half-integer order nu = l + 1/2 (l >= -1) from sin/cos closed forms:
/// upward recurrence of spherical Bessel functions when z > l.
inline double half_integer_upward(int l, double z) {
  // j_{-1} = cos z / z, j_0 = sin z / z
  double jm = std::cos(z) / z;
  double j0 = std::sin(z) / z;
  if (l == -1) return std::sqrt(2.0 * z / kPi) * jm;
  for (int k = 0; k < l; ++k) {
    const double jn = ((2.0 * k + 1.0) / z) * j0 - jm;
    jm = j0;
    j0 = jn;
  }
  return std::sqrt(2.0 * z / kPi) * j0;
}

}  // namespace detail

/// J_nu(z) for z >= 0.
inline double bessel_j(BesselOrder order, double z) {
  if (!(z >= 0.0)) {
    throw std::domain_error("bessel_j: argument must be non-negative");
  }
  const double nu = order.value();
  if (z == 0.0) return order.twice() == 0 ? 1.0 : (nu > 0.0 ? 0.0 : INFINITY);
  if (order.half_integer()) {
    const int l = (order.twice() - 1) / 2;
    if (z > std::max(1.0, static_cast<double>(l))) {
      return detail::half_integer_upward(l, z);
    }
    return std::pow(0.5 * z, nu) * detail::scaled_series(nu, z);
  }
  if (z <= detail::kSeriesMax || z < 0.5 * nu) {
    return std::pow(0.5 * z, nu) * detail::scaled_series(nu, z);
  }
  if (z >= detail::asymptotic_min(nu)) return detail::asymptotic(nu, z);
  return detail::miller_integer(order.twice() / 2, z);
}

/// g_nu(z) = z^(-nu) J_nu(z), finite at the origin
/// with g_nu(0) = 1 / (2^nu Gamma(nu+1)).
inline double regularized_j(BesselOrder order, double z) {
  if (!(z >= 0.0)) {
    throw std::domain_error("regularized_j: argument must be non-negative");
  }
  const double nu = order.value();
  if (z <= detail::kSeriesMax || (!order.half_integer() && z < 0.5 * nu) ||
      (order.half_integer() && z <= std::max(1.0, nu))) {
    return std::pow(0.5, nu) * detail::scaled_series(nu, z);
  }
  return bessel_j(order, z) * std::pow(z, -nu);
}

/// g_{nu0+k}(z) for k = 0..out.size()-1, via the downward recurrence
/// g_{nu-1} = 2 nu g_nu - z^2 g_{nu+1} seeded with the two top orders.
inline void regularized_j_ladder(BesselOrder base, double z, std::span<double> out) {
  const std::size_t count = out.size();
  if (count == 0) return;
  const int top = static_cast<int>(count) - 1;
  out[top] = regularized_j(base.shifted(top), z);
  if (top == 0) return;
  out[top - 1] = regularized_j(base.shifted(top - 1), z);
  const double z2 = z * z;
  for (int k = top - 1; k >= 1; --k) {
    const double nu = base.shifted(k).value();
    out[k - 1] = 2.0 * nu * out[k] - z2 * out[k + 1];
  }
}

/// Positive zeros of J_nu, ascending, up to (and including the first beyond)
/// zmax. McMahon initial guesses refined by Newton on J_nu.
inline std::vector<double> bessel_j_zeros(BesselOrder order, double zmax) {
  std::vector<double> zeros;
  const double nu = order.value();
  const double mu = 4.0 * nu * nu;
  auto deriv = [&](double z) {
    return (nu / z) * bessel_j(order, z) - bessel_j(order.shifted(1), z);
  };
  for (int s = 1; s < 100000; ++s) {
    const double beta = (s + 0.5 * nu - 0.25) * detail::kPi;
    double z = beta - (mu - 1.0) / (8.0 * beta) -
               4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * std::pow(8.0 * beta, 3));
    if (z <= 0.0) z = 0.5 * beta + 0.5;
    for (int it = 0; it < 50; ++it) {
      const double f = bessel_j(order, z);
      const double step = f / deriv(z);
      z -= step;
      if (std::abs(step) < 1e-15 * z) break;
    }
    if (!zeros.empty() && z <= zeros.back() + 1e-9) continue;
    zeros.push_back(z);
    if (z > zmax) break;
  }
  return zeros;
}

}  // namespace polyheat
