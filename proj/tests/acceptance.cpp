// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "polyheat/app.hpp"
#include "polyheat/cauchy.hpp"
#include "polyheat/potentials.hpp"
#include "polyheat/quadrature.hpp"

using namespace polyheat;
namespace fs = std::filesystem;

namespace {
constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// (4 pi t)^{-n/2} exp(-|x|^2 / 4t), written out here rather than taken from the library
double gauss(int n, double r, double t) { return std::pow(4.0 * pi * t, -0.5 * n) * std::exp(-r * r / (4.0 * t)); }

CylinderSpec interval_spec() {
  return build_cylinder(BaseDomain::interval(0, 1), 1.0, GammaSpec::endpoint(false), BaseDomain::interval(-1, 0));
}
CylinderSpec disk_spec() {
  return build_cylinder(BaseDomain::disk({0, 0, 0}, 1), 1.0, GammaSpec::disk_arc(0, pi),
                        BaseDomain::annular_sector({0, 0, 0}, 1, 1.5, 0, pi));
}
SpacePoint along(int n, double r, double angle) {
  if (n == 1) return {r, 0, 0};
  if (n == 2) return {r * std::cos(angle), r * std::sin(angle), 0};
  return {r * std::cos(angle) * 0.6, r * std::sin(angle) * 0.6, r * 0.8};
}

Outcome kernel_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    const Kernel k = Kernel::make({n, 1});
    for (double t : {0.1, 1.0, 4.0}) {
      for (int i = 0; i <= 1000; ++i) {
        const double s = 0.01 * i;
        const double r = s * std::sqrt(t);
        const double ref = gauss(n, r, t);
        const double v = k.phi({along(n, r, 0.7 * i), t});
        worst = std::max(worst, std::abs(v - ref) / std::max(std::abs(ref), 1e-300));
      }
    }
  }
  // includes building the profile tables
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-8 && secs <= 10.0, fmt("max rel error %.2e (<= 1e-8) in %.2fs (<= 10 s)", worst, secs)};
}

Outcome mass() {
  double worst = 0.0;
  for (int n : {1, 2, 3}) {
    for (int m : {1, 2, 3}) {
      const Kernel k = Kernel::make({n, m});
      const double surface = n == 1 ? 2.0 : (n == 2 ? 2.0 * pi : 4.0 * pi);
      for (double t : {0.5, 1.0, 2.0}) {
        const double R = k.profile().cutoff() * std::pow(t, 1.0 / (2.0 * m));
        const auto rule = composite_rule(0.0, R, 600, 12);
        const double M = surface * rule.integrate([&](double r) { return std::pow(r, n - 1) * k.phi({along(n, r, 0.0), t}); });
        worst = std::max(worst, std::abs(M - 1.0));
      }
    }
  }
  return {worst <= 1e-6, fmt("max |mass - 1| %.2e (<= 1e-6)", worst)};
}

// second-order central differences of Phi values only
double fd_residual(const Kernel& k, const SpaceTimePoint& p, double hx, double ht) {
  const int n = k.params().n, m = k.params().m;
  auto phi = [&](const SpaceTimePoint& q) { return k.phi(q); };
  auto lap = [&](const std::function<double(const SpaceTimePoint&)>& f) {
    return [f, n, hx](const SpaceTimePoint& q) {
      double s = -2.0 * n * f(q);
      for (int a = 0; a < n; ++a) {
        SpaceTimePoint u = q, d = q;
        u.x[a] += hx;
        d.x[a] -= hx;
        s += f(u) + f(d);
      }
      return s / (hx * hx);
    };
  };
  std::function<double(const SpaceTimePoint&)> L = phi;
  for (int j = 0; j < m; ++j) L = lap(L);
  SpaceTimePoint up = p, dn = p;
  up.t += ht;
  dn.t -= ht;
  const double dt = (phi(up) - phi(dn)) / (2.0 * ht);
  return dt + (m % 2 == 0 ? 1.0 : -1.0) * L(p);
}

Outcome pde_residual() {
  double worst = INFINITY;
  for (int n : {1, 2}) {
    for (int m : {1, 2}) {
      const Kernel k = Kernel::make({n, m});
      for (int i = 0; i < 20; ++i) {
        const double s = 0.5 + 2.5 * (i + 0.5) / 20.0;
        const double t = std::array{0.5, 1.0, 2.0}[i % 3];
        const double scale = std::pow(t, 1.0 / (2.0 * m));
        const SpaceTimePoint p{along(n, s * scale, 0.4 + 0.3 * i), t};
        const double h = 0.08;
        const double r1 = std::abs(fd_residual(k, p, h * scale, h * t));
        const double r2 = std::abs(fd_residual(k, p, 0.5 * h * scale, 0.5 * h * t));
        worst = std::min(worst, std::log2(r1 / r2));
      }
    }
  }
  return {worst >= 1.8, fmt("min observed order %.3f over 80 probes (>= 1.8)", worst)};
}

Outcome semigroup() {
  double worst = 0.0, tail = 0.0;
  const double t = 0.3, s = 0.5, L = 20.0;
  for (int m : {1, 2}) {
    const Kernel k = Kernel::make({1, m});
    const auto rule = composite_rule(-L, L, 800, 10);
    tail = std::max(tail, std::abs(1.0 - rule.integrate([&](double y) { return k.phi({{y, 0, 0}, t}); })));
    for (double x = -3.0; x <= 3.0; x += 0.25) {
      const double conv = rule.integrate([&](double y) { return k.phi({{x - y, 0, 0}, t}) * k.phi({{y, 0, 0}, s}); });
      worst = std::max(worst, std::abs(conv - k.phi({{x, 0, 0}, t + s})));
    }
  }
  return {worst <= 1e-4 && tail < 1e-8, fmt("max error %.2e (<= 1e-4), tail mass on [-%g, %g] %.1e", worst, L, L, tail)};
}

Outcome recurrence() {
  double worst = 0.0;
  for (int m : {1, 2, 3}) {
    const auto lo = shared_profile({1, m});
    const auto hi = shared_profile({3, m});
    const double h = 1e-3;
    double err = 0.0, ref = 0.0;
    for (double s = 0.1; s <= 8.0 + 1e-12; s += 0.01) {
      auto f = [&](double x) { return lo->profile(x, 0); };
      const double d = (-f(s + 2 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2 * h)) / (12.0 * h);
      const double rhs = -2.0 * pi * s * hi->profile(s, 0);
      err = std::max(err, std::abs(d - rhs));
      ref = std::max(ref, std::abs(rhs));
    }
    worst = std::max(worst, err / ref);
  }
  return {worst <= 1e-6, fmt("max error / max |phi'| %.2e over m = 1..3 (<= 1e-6)", worst)};
}

Outcome green() {
  std::string detail;
  bool pass = true;
  for (int n : {1, 2}) {
    for (int m : {1, 2}) {
      const auto t0 = std::chrono::steady_clock::now();
      const PotentialEvaluator ev({n, m});
      const CylinderSpec spec = n == 1 ? interval_spec() : disk_spec();
      const SpacePoint z = n == 1 ? SpacePoint{1.6, 0, 0} : SpacePoint{0.3, -1.7, 0};
      const auto u = AnalyticField::kernel_translate(ev.kernel(), z, 0.2);
      std::vector<SpaceTimePoint> in, out;
      for (double t : {0.5, 1.0}) {
        for (double a : {0.2, 0.5, 0.8}) {
          if (n == 1) {
            const std::array<double, 1> p{a};
            in.push_back({spec.omega.map(p), t});
            out.push_back({spec.omega_plus.map(p), t});
          } else {
            for (double b : {0.2, 0.5, 0.8}) {
              const std::array<double, 2> p{a, b};
              in.push_back({spec.omega.map(p), t});
              out.push_back({spec.omega_plus.map(p), t});
            }
          }
        }
      }
      const auto gi = green_reproduce(ev, u, spec.omega, 0.0, 1.0, in);
      const auto ge = green_reproduce(ev, u, spec.omega, 0.0, 1.0, out);
      double sup = 0.0, ie = 0.0, ee = 0.0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        sup = std::max(sup, std::abs(u(in[i])));
        ie = std::max(ie, std::abs(gi[i] - u(in[i])));
      }
      for (double v : ge) ee = std::max(ee, std::abs(v));
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      pass = pass && ie <= 1e-3 * sup && ee <= 1e-3 * sup && secs <= 300.0;
      detail += fmt("%s(n=%d,m=%d) int %.1e ext %.1e %.0fs", detail.empty() ? "" : "; ", n, m, ie / sup, ee / sup, secs);
    }
  }
  return {pass, detail + " (<= 1e-3, <= 5 min)"};
}

Outcome jumps() {
  auto bump = [](const SpaceTimePoint& p) {
    return std::exp(-(p.t - 0.5) * (p.t - 0.5) / 0.02) * (1.0 + 0.3 * (p.x[0] + 0.5 * p.x[1]));
  };
  double worst = 0.0;
  bool converged = true;
  for (auto [n, m] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
    const PotentialEvaluator ev({n, m});
    const CylinderSpec spec = n == 1 ? interval_spec() : disk_spec();
    const BoundaryGrid g = boundary_grid(spec, Patch::gamma, 32, 32);
    JumpOptions jo;
    jo.diameter = spec.omega.diameter();
    const std::array<std::pair<double, double>, 3> nodes{{{0.25, 0.4}, {0.5, 0.5}, {0.75, 0.6}}};
    for (int i = 0; i < 2 * m; ++i) {
      LayerData d{&g, {}};
      for (int j = 0; j < 2 * m; ++j) d.traces.push_back(g.sample([&](const BoundaryNode& nd) { return j == i ? bump(nd.p) : 0.0; }));
      for (auto [uu, t] : nodes) {
        const double u = n == 1 ? 0.0 : uu;
        const JumpResult r = jump_test(ev, d, i, 0, u, t, jo);
        const double e = bump({g.segments()[0].point_at(u), t});
        worst = std::max(worst, std::abs(r.estimate - e) / std::abs(e));
        converged = converged && r.converged;
      }
    }
  }
  return {worst <= 1e-2 && converged, fmt("max rel error %.2e over 24 node/index pairs (<= 1e-2)%s", worst,
                                          converged ? "" : ", extrapolation did not settle")};
}

Outcome uniqueness() {
  bool pass = true;
  std::string detail;
  for (int m : {1, 2}) {
    const PotentialEvaluator ev({1, m});
    const auto rows = uniqueness_experiment(ev, interval_spec(), FitConfig{}, {}, {0.0, 1e-6, 1e-4, 1e-2}, 20240611);
    bool mono = rows[0].sup_U == 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) mono = mono && rows[i].sup_U >= rows[i - 1].sup_U;
    pass = pass && mono;
    detail += fmt("%sm=%d sup|U| 0:%g 1e-6:%.2e 1e-4:%.2e 1e-2:%.2e", detail.empty() ? "" : "; ", m, rows[0].sup_U,
                  rows[1].sup_U, rows[2].sup_U, rows[3].sup_U);
  }
  return {pass, detail};
}

struct CauchyCase {
  SolvabilityReport good, bad;
  ReconstructionResult rec;
  double secs = 0.0;
};

const CauchyCase& cauchy_case(int m) {
  static std::map<int, CauchyCase> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  const PotentialEvaluator ev({1, m});
  const auto spec = interval_spec();
  FitConfig cfg;
  CauchyCase c;
  const auto u = AnalyticField::kernel_translate(ev.kernel(), {1.6, 0, 0}, 0.1);
  const CauchyData good = synthesize_data(ev, u, spec);
  c.good = solvability(ev, good, spec, cfg);
  c.rec = reconstruct(ev, good, spec, c.good, evaluation_points(spec, cfg), &u);
  c.secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // the source sits in Omega+ at x = -0.5 and switches on at t = 0.3
  const CauchyData bad = synthesize_data(ev, AnalyticField::kernel_translate(ev.kernel(), {-0.5, 0, 0}, -0.3), spec);
  c.bad = solvability(ev, bad, spec, cfg);
  return cache.emplace(m, std::move(c)).first->second;
}

Outcome separation() {
  bool pass = true;
  std::string detail;
  for (int m : {1, 2}) {
    const auto& c = cauchy_case(m);
    double lo = INFINITY;
    std::string ks;
    for (const auto& r : c.bad.k_sweep) {
      lo = std::min(lo, r.residual);
      ks += fmt(" K%d:%.3f", r.K, r.residual);
    }
    const bool ok = c.good.residual_rel <= 1e-3 && c.bad.k_sweep.size() == 3 &&
                    lo >= 10.0 * c.good.residual_rel && c.bad.verdict == Verdict::incompatible;
    pass = pass && ok;
    detail += fmt("%sm=%d compatible %.2e, incompatible%s (%s)", detail.empty() ? "" : "; ", m, c.good.residual_rel,
                  ks.c_str(), to_string(c.bad.verdict));
  }
  return {pass, detail};
}

Outcome reconstruction() {
  const auto& a = cauchy_case(1);
  const auto& b = cauchy_case(2);
  const bool pass = a.rec.rel_l2_error <= 1e-2 && b.rec.rel_l2_error <= 5e-2 && a.secs <= 600.0 && b.secs <= 600.0;
  return {pass, fmt("m=1 rel L2 %.2e (<= 1e-2) %.1fs; m=2 rel L2 %.2e (<= 5e-2) %.1fs", a.rec.rel_l2_error, a.secs,
                    b.rec.rel_l2_error, b.secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  RunConfig c;
  c.scenario = "uniqueness";
  c.truth = "zero";
  c.seed = 777;
  RunConfig r;
  r.scenario = "solve-cauchy";
  const fs::path base = fs::temp_directory_path() / "polyheat_acceptance";
  std::string detail;
  bool pass = true;
  for (const auto& [cfg, file] : {std::pair{c, "uniqueness.csv"}, {r, "reconstruction.csv"}}) {
    std::string first;
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = base / (std::string(file) + std::to_string(run));
      fs::remove_all(dir);
      (void)run_scenario(cfg, dir);
      const std::string csv = slurp(dir / file);
      if (run == 0) first = csv;
      else pass = pass && !csv.empty() && csv == first;
    }
    detail += fmt("%s%s %zu bytes", detail.empty() ? "" : ", ", file, first.size());
  }
  return {pass, (pass ? "identical across two runs: " : "runs differ: ") + detail};
}
}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"kernel oracle", kernel_oracle}, {"mass", mass},         {"pde residual", pde_residual},
      {"semigroup", semigroup},         {"recurrence", recurrence}, {"green identity", green},
      {"jump relations", jumps},        {"uniqueness", uniqueness}, {"solvability separation", separation},
      {"reconstruction", reconstruction}, {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %-24s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
