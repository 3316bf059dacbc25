#pragma once

/// \file profile.hpp
/// \brief Self-similar radial profile of the polyharmonic heat kernel.
///
/// The fundamental solution of d/dt + (-Delta)^m in R^n is
///
///     Phi_m(x, t) = t^(-n/2m) phi_n(|x| t^(-1/2m)),   t > 0,
///     phi_N(s)    = k_N int_0^inf rho^(N-1) exp(-rho^2m) g_{N/2-1}(s rho) d rho,
///
/// with g_nu(z) = z^-nu J_nu(z) and k_N = (2 pi)^(-N/2) (unit mass). The
/// profiles of the shifted dimensions N = n + 2k form a ladder closed under
/// differentiation: phi_N'(s) = -2 pi s phi_{N+2}(s). RadialProfile
/// evaluates the ladder k = 0..max_shift by panel quadrature, optionally
/// backed by a quintic Hermite table whose node derivatives come from the
/// ladder itself.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "polyheat/errors.hpp"
#include "polyheat/quadrature.hpp"
#include "polyheat/specfun.hpp"

namespace polyheat {

/// Space dimension n and polyharmonic order m.
struct KernelParams {
  int n = 1;
  int m = 1;

  void validate() const {
    if (n < 1 || m < 1) {
      throw std::invalid_argument("KernelParams: n and m must be positive");
    }
    if (n > 3 || m > 3) {
      throw CapabilityError("KernelParams: supported range is n, m in {1, 2, 3} (got n=" +
                            std::to_string(n) + ", m=" + std::to_string(m) + ")");
    }
  }
  auto operator<=>(const KernelParams&) const = default;
};

/// Unit-mass constant of the profile integral in dimension `dim`.
inline double normalization(int dim) { return std::pow(2.0 * std::numbers::pi, -0.5 * dim); }
inline double normalization(const KernelParams& p) { return normalization(p.n); }

/// phi_dim(0) = k_dim Gamma(dim/2m)/(2m) * 2^(1-dim/2)/Gamma(dim/2).
inline double profile_center_value(int dim, int m) {
  return normalization(dim) * std::tgamma(dim / (2.0 * m)) / (2.0 * m) *
         std::pow(2.0, 1.0 - 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// Classical heat kernel exp(-|x|^2/4t) / (2 sqrt(pi t))^n, zero for t <= 0.
inline double heat_closed_form(int n, std::span<const double> x, double t) {
  if (t <= 0.0) return 0.0;
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
  return std::exp(-r2 / (4.0 * t)) / std::pow(2.0 * std::sqrt(std::numbers::pi * t), n);
}

/// Rate c and power q of the profile envelope exp(-c s^q), the steepest
/// descent estimate of the large-s decay.
inline std::pair<double, double> profile_decay(int m) {
  const double q = 2.0 * m / (2.0 * m - 1.0);
  const double c = (2.0 * m - 1.0) * std::pow(2.0 * m, -q) *
                   std::sin(std::numbers::pi / (2.0 * (2.0 * m - 1.0)));
  return {c, q};
}

struct ProfileOptions {
  /// Highest ladder shift k evaluated (phi_{n+2k}); < 0 selects 2m + 1.
  int max_shift = -1;
  /// Quintic Hermite table over [0, table_max].
  bool tabulate = true;
  double table_step = 1e-2;
  /// <= 0 selects the s at which the envelope falls below e^-40 (at least 12).
  /// A tabulated profile is exactly 0 beyond its table.
  double table_max = 0.0;
  /// Truncation level of the rho integral.
  double trunc_eps = 1e-16;
  /// Gauss-Legendre nodes per panel.
  int panel_nodes = 32;
  /// Untabulated profiles are exactly 0 beyond this s (<= 0: envelope < e^-150).
  double cutoff = 0.0;

  auto operator<=>(const ProfileOptions&) const = default;
};

class RadialProfile {
public:
  explicit RadialProfile(KernelParams params, ProfileOptions options = {})
      : params_(params), opt_(options) {
    params_.validate();
    const int m = params_.m;
    if (opt_.max_shift < 0) opt_.max_shift = 2 * m + 1;
    auto [c, q] = profile_decay(m);
    if (opt_.table_max <= 0.0) {
      opt_.table_max = std::max(12.0, std::pow(40.0 / c, 1.0 / q));
    }
    if (opt_.cutoff <= 0.0) opt_.cutoff = std::pow(150.0 / c, 1.0 / q);
    opt_.cutoff = std::max(opt_.cutoff, opt_.table_max);

    // truncation radius covering the top ladder dimension used (incl. the
    // two extra shifts needed for table derivatives)
    const int top_dim = params_.n + 2 * (opt_.max_shift + 2);
    const double two_m = 2.0 * m;
    const double rho0 = std::pow(std::log(1.0 / opt_.trunc_eps), 1.0 / two_m);
    const double rho_peak = std::pow((top_dim - 1) / two_m, 1.0 / two_m);
    auto logf = [&](double r) { return (top_dim - 1) * std::log(r) - std::pow(r, two_m); };
    const double target = logf(rho_peak) + std::log(opt_.trunc_eps);
    double r = std::max(rho0, rho_peak);
    while (logf(r) > target) r += 0.01;
    rho_max_ = r;

    zeros_ = bessel_j_zeros(BesselOrder::for_dimension(params_.n), opt_.cutoff * rho_max_ + 10.0);
    for (int k = 0; k <= opt_.max_shift + 2; ++k) {
      centers_.push_back(profile_center_value(params_.n + 2 * k, m));
    }
    if (opt_.tabulate) build_table();
  }

  /// Construct from a previously dumped table (see save_table / load_table).
  RadialProfile(KernelParams params, ProfileOptions options, std::vector<std::vector<double>> table)
      : RadialProfile(params, with_tabulate(options, false)) {
    opt_.tabulate = true;
    table_ = std::move(table);
    knots_ = static_cast<int>(table_.empty() ? 0 : table_[0].size() / 3);
  }

  [[nodiscard]] const KernelParams& params() const { return params_; }
  [[nodiscard]] const ProfileOptions& options() const { return opt_; }
  [[nodiscard]] int max_shift() const { return opt_.max_shift; }
  [[nodiscard]] double rho_max() const { return rho_max_; }
  [[nodiscard]] double table_max() const { return opt_.table_max; }
  /// Beyond this s every ladder member is treated as exactly 0.
  [[nodiscard]] double cutoff() const { return tabulated() ? opt_.table_max : opt_.cutoff; }
  [[nodiscard]] bool tabulated() const { return opt_.tabulate && knots_ > 0; }

  /// phi_{n+2k}(0).
  [[nodiscard]] double center(int k) const { return centers_.at(k); }

  /// phi_{n+2k}(s) for k = 0..out.size()-1; table-backed where available.
  void shifted_all(double s, std::span<double> out) const {
    check_shift(static_cast<int>(out.size()) - 1, opt_.max_shift);
    if (tabulated()) {
      if (s <= opt_.table_max) {
        table_lookup(s, out);
      } else {
        std::fill(out.begin(), out.end(), 0.0);
      }
    } else {
      direct_all(s, out);
    }
  }

  [[nodiscard]] double shifted(int k, double s) const {
    std::vector<double> v(k + 1);
    shifted_all(s, v);
    return v[k];
  }

  /// Direct quadrature of the ladder. With `relative` set, entries whose
  /// panel sum cancels by more than 1e4 are recomputed from the
  /// contour-shifted Fourier form, which keeps relative accuracy in the
  /// far field.
  void direct_all(double s, std::span<double> out, bool relative = false) const {
    const int count = static_cast<int>(out.size());
    check_shift(count - 1, opt_.max_shift + 2);
    if (s < 0.0) throw std::domain_error("RadialProfile: s must be non-negative");
    if (s == 0.0) {
      for (int k = 0; k < count; ++k) out[k] = centers_[k];
      return;
    }
    if (s > opt_.cutoff) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    std::vector<double> l1(count, 0.0);
    const BesselOrder base = BesselOrder::for_dimension(params_.n);
    const double two_m = 2.0 * params_.m;
    std::vector<double> g(count);
    std::vector<double> acc(count, 0.0);

    auto accumulate = [&](const LineRule& rule) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(l1.begin(), l1.end(), 0.0);
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double rho = rule.nodes[i];
        const double w = rule.weights[i] * std::pow(rho, params_.n - 1) * std::exp(-std::pow(rho, two_m));
        regularized_j_ladder(base, s * rho, g);
        double rho2k = 1.0;
        for (int k = 0; k < count; ++k) {
          const double term = w * rho2k * g[k];
          acc[k] += term;
          l1[k] += std::abs(term);
          rho2k *= rho * rho;
        }
      }
    };

    if (s * rho_max_ > 8.0) {
      std::vector<double> breaks{0.0};
      for (double z : zeros_) {
        const double b = z / s;
        if (b >= rho_max_) break;
        breaks.push_back(b);
      }
      breaks.push_back(rho_max_);
      accumulate(panel_rule(breaks, opt_.panel_nodes));
    } else {
      // smooth regime: double the panel count until converged to 1e-12
      int panels = 2;
      accumulate(composite_rule(0.0, rho_max_, panels, opt_.panel_nodes));
      std::vector<double> prev = acc;
      for (int it = 0; it < 6; ++it) {
        panels *= 2;
        accumulate(composite_rule(0.0, rho_max_, panels, opt_.panel_nodes));
        bool done = true;
        for (int k = 0; k < count; ++k) {
          if (std::abs(acc[k] - prev[k]) > 1e-12 * std::max(std::abs(acc[k]), 1e-300)) done = false;
        }
        if (done) break;
        prev = acc;
      }
    }
    bool cancels = false;
    for (int k = 0; k < count; ++k) {
      out[k] = normalization(params_.n + 2 * k) * acc[k];
      if (l1[k] > 1e4 * std::abs(acc[k])) cancels = true;
    }
    // the even-dimension contour is a 2D integral; for m >= 2 the tail is
    // long enough that tabulating it costs minutes, so those keep the
    // direct sum (absolute error near 1e-18 in the far tail)
    if (relative && cancels && (params_.n % 2 == 1 || params_.m == 1))
      contour_all(params_.n, s, out);
  }

  [[nodiscard]] double direct(int k, double s, bool relative = false) const {
    std::vector<double> v(k + 1);
    direct_all(s, v, relative);
    return v[k];
  }

  /// d^order/ds^order phi_n(s), expanded through the ladder recurrence.
  [[nodiscard]] double profile(double s, int deriv_order) const {
    if (deriv_order < 0 || deriv_order > 2 * params_.m) {
      throw UnsupportedOrderError("profile: derivative order must be in [0, 2m]");
    }
    // terms: coef * s^a * phi_{n+2k}
    std::map<std::pair<int, int>, double> terms{{{0, 0}, 1.0}};
    for (int d = 0; d < deriv_order; ++d) {
      std::map<std::pair<int, int>, double> next;
      for (const auto& [key, c] : terms) {
        const auto [a, k] = key;
        if (a > 0) next[{a - 1, k}] += c * a;
        next[{a + 1, k + 1}] += -2.0 * std::numbers::pi * c;
      }
      terms = std::move(next);
    }
    std::vector<double> v(deriv_order + 1);
    shifted_all(s, v);
    double sum = 0.0;
    for (const auto& [key, c] : terms) {
      if (c == 0.0) continue;
      sum += c * std::pow(s, key.first) * v[key.second];
    }
    return sum;
  }

  /// Fourier form with the first frequency coordinate shifted to a + i eta,
  /// eta the imaginary part of the dominant saddle of i s xi - xi^2m. With
  /// base dimension b = 1 or 2 (the parity of N = b + 2k),
  ///
  ///   phi_b(s) = (2pi)^-b c_b Re 2 int_0^inf da e^{i s xi} J(xi),  xi = a + i eta,
  ///
  /// J(xi) = exp(-xi^2m) for b = 1 and int_0^inf exp(-(xi^2 + r^2)^m) dr,
  /// c_2 = 2, for b = 2. The ladder phi_{b+2k} = (-1/(2 pi s) d/ds)^k phi_b
  /// acts on e^{i s xi} alone, giving a polynomial weight P_k(s, xi), so one
  /// pass serves every entry. The shifted integrand is bounded by the true
  /// far-field size, so no cancellation below it occurs.
  void contour_all(int dim, double s, std::span<double> out) const {
    if (dim < 1) throw std::invalid_argument("contour_all: dimension must be >= 1");
    using cplx = std::complex<double>;
    const int m = params_.m;
    const double pi = std::numbers::pi;
    const int base = dim % 2 == 1 ? 1 : 2;
    const int k0 = (dim - base) / 2;
    const int kmax = k0 + static_cast<int>(out.size()) - 1;
    const double eta = std::pow(s / (2.0 * m), 1.0 / (2.0 * m - 1.0)) *
                       std::sin(pi / (2.0 * (2.0 * m - 1.0)));
    const bool radial = base == 2;
    auto exponent = [&](double a, double r) {
      const cplx w = cplx(a, eta) * cplx(a, eta) + r * r;
      cplx wm = 1.0;
      for (int i = 0; i < m; ++i) wm *= w;
      return cplx(-s * eta, s * a) - wm;
    };
    // P_k = sum_{j,p} i^j beta[j][p] xi^j s^-p, from P_{k+1} = (d_s P_k + i xi P_k) / s
    std::vector<std::vector<cplx>> weight(kmax + 1);
    {
      std::vector<std::vector<double>> beta{{1.0}};
      for (int k = 0; k <= kmax; ++k) {
        std::vector<cplx> c(beta.size(), 0.0);
        for (std::size_t j = 0; j < beta.size(); ++j) {
          double sum = 0.0;
          for (std::size_t p = 0; p < beta[j].size(); ++p) sum += beta[j][p] * std::pow(s, -static_cast<double>(p));
          c[j] = std::pow(cplx(0.0, 1.0), static_cast<int>(j)) * sum;
        }
        weight[k] = std::move(c);
        std::vector<std::vector<double>> next(beta.size() + 1, std::vector<double>(2 * k + 3, 0.0));
        for (std::size_t j = 0; j < beta.size(); ++j) {
          for (std::size_t p = 0; p < beta[j].size(); ++p) {
            if (beta[j][p] == 0.0) continue;
            if (p + 2 < next[j].size()) next[j][p + 2] -= static_cast<double>(p) * beta[j][p];
            next[j + 1][p + 1] += beta[j][p];
          }
        }
        beta = std::move(next);
      }
    }
    // support: coarse scan of the log-magnitude
    const double a_scan = 2.0 * eta + rho_max_ + 2.0;
    const double r_scan = radial ? eta + rho_max_ + 2.0 : 0.0;
    const double step = 0.1;
    double peak = -INFINITY;
    double a_max = 0.0, r_max = 0.0;
    std::vector<std::pair<double, double>> scan;
    for (double a = 0.0; a <= a_scan; a += step) {
      for (double r = 0.0; r <= r_scan; r += step) {
        const double lm = exponent(a, r).real();
        scan.emplace_back(a, r);
        peak = std::max(peak, lm);
      }
    }
    const double floor = peak - 46.0;
    for (const auto& [a, r] : scan) {
      if (exponent(a, r).real() > floor) {
        a_max = std::max(a_max, a);
        r_max = std::max(r_max, r);
      }
    }
    // margin for the scan step and the polynomial weights
    a_max += 1.0;
    r_max += 1.0;

    std::vector<double> cur(out.size()), prev(out.size());
    auto evaluate = [&](int pa, int pr, std::vector<double>& res) {
      const LineRule ra = composite_rule(0.0, a_max, pa, 16);
      const LineRule rr = radial ? composite_rule(0.0, r_max, pr, 16) : LineRule{};
      std::vector<cplx> total(out.size(), 0.0);
      for (std::size_t i = 0; i < ra.size(); ++i) {
        const double a = ra.nodes[i];
        cplx inner = 0.0;
        if (radial) {
          for (std::size_t j = 0; j < rr.size(); ++j) inner += rr.weights[j] * std::exp(exponent(a, rr.nodes[j]));
        } else {
          inner = std::exp(exponent(a, 0.0));
        }
        const cplx xi(a, eta);
        for (std::size_t q = 0; q < out.size(); ++q) {
          const auto& c = weight[k0 + q];
          cplx poly = 0.0;
          for (std::size_t j = c.size(); j-- > 0;) poly = poly * xi + c[j];
          total[q] += ra.weights[i] * inner * poly;
        }
      }
      const double cb = radial ? 2.0 : 1.0;
      for (std::size_t q = 0; q < out.size(); ++q) {
        const int k = k0 + static_cast<int>(q);
        res[q] = 2.0 * total[q].real() * std::pow(2.0 * pi, -base) * cb * std::pow(-1.0 / (2.0 * pi), k);
      }
    };
    int pa = std::max(4, static_cast<int>(std::ceil(a_max * (s + 4.0) / 8.0)));
    int pr = std::max(2, static_cast<int>(std::ceil(r_max / 1.0)));
    evaluate(pa, pr, prev);
    for (int it = 0; it < 4; ++it) {
      pa *= 2;
      pr *= 2;
      evaluate(pa, pr, cur);
      bool done = true;
      for (std::size_t q = 0; q < out.size(); ++q) {
        if (std::abs(cur[q] - prev[q]) > 1e-13 * std::abs(cur[q]) + std::exp(peak) * 1e-17) done = false;
      }
      if (done) break;
      prev = cur;
    }
    std::copy(cur.begin(), cur.end(), out.begin());
  }

  [[nodiscard]] double contour_value(int dim, double s) const {
    double v = 0.0;
    contour_all(dim, s, std::span<double>(&v, 1));
    return v;
  }

  /// Table as rows (s, k, phi, phi', phi'') in CSV with a versioned header.
  void save_table(std::ostream& os) const {
    os << "# polyheat profile table v1\n";
    os << "n,m,s_max,step,max_shift\n";
    os.precision(17);
    os << params_.n << ',' << params_.m << ',' << opt_.table_max << ',' << opt_.table_step << ','
       << opt_.max_shift << '\n';
    os << "s,k,value,d1,d2\n";
    for (int k = 0; k <= opt_.max_shift && tabulated(); ++k) {
      for (int i = 0; i < knots_; ++i) {
        os << i * opt_.table_step << ',' << k << ',' << table_[k][3 * i] << ','
           << table_[k][3 * i + 1] << ',' << table_[k][3 * i + 2] << '\n';
      }
    }
  }

  static std::shared_ptr<RadialProfile> load_table(std::istream& is) {
    std::string line;
    std::getline(is, line);
    if (line != "# polyheat profile table v1") {
      throw std::runtime_error("profile table: unsupported header '" + line + "'");
    }
    std::getline(is, line);  // column names
    std::getline(is, line);
    KernelParams p;
    ProfileOptions o;
    {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      ss >> p.n >> p.m >> o.table_max >> o.table_step >> o.max_shift;
      if (!ss) throw std::runtime_error("profile table: malformed parameter row");
    }
    std::getline(is, line);  // column names
    const int knots = static_cast<int>(std::lround(o.table_max / o.table_step)) + 1;
    std::vector<std::vector<double>> table(o.max_shift + 1, std::vector<double>(3 * knots));
    int rows = 0;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double s = 0.0;
      int k = 0;
      double v = 0.0, d1 = 0.0, d2 = 0.0;
      ss >> s >> k >> v >> d1 >> d2;
      if (!ss || k < 0 || k > o.max_shift) throw std::runtime_error("profile table: malformed row");
      const int i = static_cast<int>(std::lround(s / o.table_step));
      if (i < 0 || i >= knots) throw std::runtime_error("profile table: knot out of range");
      table[k][3 * i] = v;
      table[k][3 * i + 1] = d1;
      table[k][3 * i + 2] = d2;
      ++rows;
    }
    if (rows != knots * (o.max_shift + 1)) throw std::runtime_error("profile table: truncated");
    return std::make_shared<RadialProfile>(p, o, std::move(table));
  }

private:
  static ProfileOptions with_tabulate(ProfileOptions o, bool t) {
    o.tabulate = t;
    return o;
  }

  static void check_shift(int k, int limit) {
    if (k > limit) {
      throw UnsupportedOrderError("RadialProfile: ladder shift " + std::to_string(k) +
                                  " exceeds the configured maximum " + std::to_string(limit));
    }
  }

  void build_table() {
    knots_ = static_cast<int>(std::lround(opt_.table_max / opt_.table_step)) + 1;
    opt_.table_max = (knots_ - 1) * opt_.table_step;
    const int shifts = opt_.max_shift + 1;
    table_.assign(shifts, std::vector<double>(3 * knots_));
    std::vector<double> v(shifts + 2);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < knots_; ++i) {
      const double s = i * opt_.table_step;
      // relative mode: far-field knots come from the contour form
      direct_all(s, v, true);
      for (int k = 0; k < shifts; ++k) {
        table_[k][3 * i] = v[k];
        table_[k][3 * i + 1] = -two_pi * s * v[k + 1];
        table_[k][3 * i + 2] = -two_pi * v[k + 1] + two_pi * two_pi * s * s * v[k + 2];
      }
    }
  }

  void table_lookup(double s, std::span<double> out) const {
    const double h = opt_.table_step;
    int i = static_cast<int>(s / h);
    if (i >= knots_ - 1) i = knots_ - 2;
    const double u = s / h - i;
    const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
    const double h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    const double h1 = (u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5) * h;
    const double h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5) * h * h;
    const double g0 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    const double g1 = (-4.0 * u3 + 7.0 * u4 - 3.0 * u5) * h;
    const double g2 = 0.5 * (u3 - 2.0 * u4 + u5) * h * h;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double* a = &table_[k][3 * i];
      const double* b = a + 3;
      out[k] = h0 * a[0] + h1 * a[1] + h2 * a[2] + g0 * b[0] + g1 * b[1] + g2 * b[2];
    }
  }

  KernelParams params_;
  ProfileOptions opt_;
  double rho_max_ = 0.0;
  std::vector<double> zeros_;
  std::vector<double> centers_;
  int knots_ = 0;
  std::vector<std::vector<double>> table_;  // per shift: (f, f', f'') per knot
};

/// Process-wide cache of profiles keyed by (params, options).
inline std::shared_ptr<const RadialProfile> shared_profile(KernelParams params,
                                                          ProfileOptions options = {}) {
  static std::mutex mutex;
  static std::map<std::pair<KernelParams, ProfileOptions>, std::shared_ptr<const RadialProfile>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{params, options}];
  if (!slot) slot = std::make_shared<RadialProfile>(params, options);
  return slot;
}

}  // namespace polyheat
