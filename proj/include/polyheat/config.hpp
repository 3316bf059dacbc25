#pragma once

/// \file config.hpp
/// \brief Run configuration: sectioned `key = value` text, strictly typed.
///
///     # comment
///     [run]
///     scenario = solve-cauchy
///     [kernel]
///     n = 1
///     m = 1
///
/// Unknown sections or keys, repeated keys and ill-typed values are errors
/// that carry the line number. `to_text` writes every key in a fixed order
/// with round-trip precision, so parse(to_text(c)) == c.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"

namespace polyheat {

struct RunConfig {
  // [run]
  std::string scenario = "kernel-table";
  std::uint64_t seed = 20240611;
  bool fail_on_incompatible = false;
  std::string out_dir = ".";
  // [kernel]
  int n = 1;
  int m = 1;
  // [domain]; shape parameters: interval a b, disk cx cy r, rectangle x0 y0 x1 y1,
  // annular_sector cx cy r0 r1 th0 th1
  std::string omega = "interval";
  std::vector<double> omega_params{0.0, 1.0};
  std::string omega_plus = "interval";
  std::vector<double> omega_plus_params{-1.0, 0.0};
  /// left | right (n = 1), arc th0 th1 (disk), side k u0 u1 (rectangle)
  std::string gamma = "left";
  std::vector<double> gamma_params{};
  double T = 1.0;
  // [grid]
  int n_space = 32;
  int n_time = 32;
  int n_volume = 16;
  int order = 16;
  // [truth]: exact solution Phi_m(x - source, t + shift), or zero
  std::string truth = "kernel";
  std::vector<double> source{1.6};
  double shift = 0.1;
  // [fit]
  int K = 64;
  std::vector<int> k_sweep{32, 64, 128};
  int lambda_lo = -14;
  int lambda_hi = -2;
  double d_src = 0.0;
  double delta_min = 0.02;
  double delta_max = 2.0;
  double tau_res = 1e-3;
  double noise_floor = 1e-8;
  double h_min = 0.0;
  int col_space = 20;
  int col_time = 20;
  int eval_space = 15;
  int eval_time = 15;
  // [noise]
  std::vector<double> eps{0.0, 1e-6, 1e-4, 1e-2};
  // [table]
  double s_max = 12.0;
  double step = 0.01;
  // [probe]: jump test location
  int index = -1;  // -1 runs every i
  int segment = 0;
  std::vector<double> u{0.5};
  std::vector<double> t{0.3, 0.6, 0.9};
  // [bench]
  int points = 100000;
  int repeats = 5;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

using Slot = std::variant<int*, double*, bool*, std::string*, std::uint64_t*, std::vector<double>*,
                          std::vector<int>*>;

struct Key {
  const char* section;
  const char* name;
  Slot slot;
};

inline std::vector<Key> config_keys(RunConfig& c) {
  return {
      {"run", "scenario", &c.scenario},
      {"run", "seed", &c.seed},
      {"run", "fail_on_incompatible", &c.fail_on_incompatible},
      {"run", "out_dir", &c.out_dir},
      {"kernel", "n", &c.n},
      {"kernel", "m", &c.m},
      {"domain", "omega", &c.omega},
      {"domain", "omega_params", &c.omega_params},
      {"domain", "omega_plus", &c.omega_plus},
      {"domain", "omega_plus_params", &c.omega_plus_params},
      {"domain", "gamma", &c.gamma},
      {"domain", "gamma_params", &c.gamma_params},
      {"domain", "T", &c.T},
      {"grid", "n_space", &c.n_space},
      {"grid", "n_time", &c.n_time},
      {"grid", "n_volume", &c.n_volume},
      {"grid", "order", &c.order},
      {"truth", "kind", &c.truth},
      {"truth", "source", &c.source},
      {"truth", "shift", &c.shift},
      {"fit", "K", &c.K},
      {"fit", "k_sweep", &c.k_sweep},
      {"fit", "lambda_lo", &c.lambda_lo},
      {"fit", "lambda_hi", &c.lambda_hi},
      {"fit", "d_src", &c.d_src},
      {"fit", "delta_min", &c.delta_min},
      {"fit", "delta_max", &c.delta_max},
      {"fit", "tau_res", &c.tau_res},
      {"fit", "noise_floor", &c.noise_floor},
      {"fit", "h_min", &c.h_min},
      {"fit", "col_space", &c.col_space},
      {"fit", "col_time", &c.col_time},
      {"fit", "eval_space", &c.eval_space},
      {"fit", "eval_time", &c.eval_time},
      {"noise", "eps", &c.eps},
      {"table", "s_max", &c.s_max},
      {"table", "step", &c.step},
      {"probe", "index", &c.index},
      {"probe", "segment", &c.segment},
      {"probe", "u", &c.u},
      {"probe", "t", &c.t},
      {"bench", "points", &c.points},
      {"bench", "repeats", &c.repeats},
  };
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& text, int line, const std::string& key) {
  T v{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || text.empty()) {
    throw ConfigError("key '" + key + "': cannot read '" + text + "' as a number", line);
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), line, key));
  return out;
}

inline std::string format_real(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

struct Assign {
  const std::string& text;
  int line;
  const std::string& key;
  void operator()(int* p) const { *p = parse_number<int>(text, line, key); }
  void operator()(double* p) const { *p = parse_number<double>(text, line, key); }
  void operator()(std::uint64_t* p) const { *p = parse_number<std::uint64_t>(text, line, key); }
  void operator()(std::string* p) const { *p = text; }
  void operator()(bool* p) const {
    if (text == "true") *p = true;
    else if (text == "false") *p = false;
    else throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'", line);
  }
  void operator()(std::vector<double>* p) const { *p = parse_list<double>(text, line, key); }
  void operator()(std::vector<int>* p) const { *p = parse_list<int>(text, line, key); }
};

struct Render {
  std::string operator()(const int* p) const { return std::to_string(*p); }
  std::string operator()(const double* p) const { return format_real(*p); }
  std::string operator()(const std::uint64_t* p) const { return std::to_string(*p); }
  std::string operator()(const std::string* p) const { return *p; }
  std::string operator()(const bool* p) const { return *p ? "true" : "false"; }
  std::string operator()(const std::vector<double>* p) const {
    std::string s;
    for (std::size_t i = 0; i < p->size(); ++i) s += (i ? ", " : "") + format_real((*p)[i]);
    return s;
  }
  std::string operator()(const std::vector<int>* p) const {
    std::string s;
    for (std::size_t i = 0; i < p->size(); ++i) s += (i ? ", " : "") + std::to_string((*p)[i]);
    return s;
  }
};

}  // namespace detail

inline const std::vector<std::string>& known_scenarios() {
  static const std::vector<std::string> s{"kernel-table", "verify-green", "verify-jump",
                                          "solve-cauchy", "uniqueness", "bench"};
  return s;
}

/// Range checks that do not need the geometry.
inline void validate_config(const RunConfig& c) {
  if (std::find(known_scenarios().begin(), known_scenarios().end(), c.scenario) == known_scenarios().end()) {
    throw ConfigError("unknown scenario '" + c.scenario + "'");
  }
  KernelParams{c.n, c.m}.validate();
  auto positive = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string(what));
  };
  positive(c.T > 0.0, "domain.T must be positive");
  positive(c.n_space >= 2 && c.n_time >= 2 && c.n_volume >= 2, "grid resolutions must be >= 2");
  positive(c.order >= 2 && c.order <= 64, "grid.order must lie in [2, 64]");
  positive(c.K >= 2, "fit.K must be >= 2");
  positive(!c.k_sweep.empty(), "fit.k_sweep must not be empty");
  for (int k : c.k_sweep) positive(k >= 2, "fit.k_sweep entries must be >= 2");
  positive(c.lambda_lo <= c.lambda_hi, "fit.lambda_lo must not exceed fit.lambda_hi");
  positive(c.delta_min > 0.0 && c.delta_max >= c.delta_min, "fit needs 0 < delta_min <= delta_max");
  positive(c.tau_res > 0.0 && c.noise_floor >= 0.0, "fit.tau_res must be positive");
  positive(c.col_space >= 2 && c.col_time >= 2 && c.eval_space >= 2 && c.eval_time >= 2,
           "collocation and evaluation grids must be >= 2");
  positive(c.truth == "kernel" || c.truth == "zero", "truth.kind must be kernel or zero");
  positive(c.truth == "zero" || static_cast<int>(c.source.size()) == c.n, "truth.source needs n coordinates");
  for (double e : c.eps) positive(e >= 0.0, "noise.eps entries must be >= 0");
  positive(c.s_max > 0.0 && c.step > 0.0, "table needs positive s_max and step");
  positive(c.points >= 1 && c.repeats >= 1, "bench needs points >= 1 and repeats >= 1");
}

inline RunConfig parse_config(std::istream& in) {
  RunConfig c;
  auto keys = detail::config_keys(c);
  std::set<std::string> sections;
  for (const auto& k : keys) sections.insert(k.section);
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("unterminated section header", line);
      section = detail::trim(text.substr(1, text.size() - 2));
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
    const std::string name = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + name + "' outside any section", line);
    const std::string full = section + "." + name;
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const detail::Key& k) { return k.section == section && k.name == name; });
    if (it == keys.end()) throw ConfigError("unknown key '" + full + "'", line);
    if (!seen.insert(full).second) throw ConfigError("key '" + full + "' given twice", line);
    std::visit(detail::Assign{value, line, full}, it->slot);
  }
  validate_config(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Canonical text of every key; re-parses to an equal RunConfig.
inline std::string to_text(const RunConfig& cfg) {
  RunConfig c = cfg;
  std::string out;
  std::string section;
  for (const auto& k : detail::config_keys(c)) {
    if (section != k.section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(k.name) + " = " + std::visit(detail::Render{}, k.slot) + "\n";
  }
  return out;
}

inline BaseDomain make_domain(const std::string& shape, const std::vector<double>& p) {
  auto need = [&](std::size_t count) {
    if (p.size() != count) {
      throw ConfigError("domain '" + shape + "' needs " + std::to_string(count) + " parameters");
    }
  };
  if (shape == "interval") {
    need(2);
    return BaseDomain::interval(p[0], p[1]);
  }
  if (shape == "disk") {
    need(3);
    return BaseDomain::disk({p[0], p[1], 0.0}, p[2]);
  }
  if (shape == "rectangle") {
    need(4);
    return BaseDomain::rectangle({p[0], p[1], 0.0}, {p[2], p[3], 0.0});
  }
  if (shape == "annular_sector") {
    need(6);
    return BaseDomain::annular_sector({p[0], p[1], 0.0}, p[2], p[3], p[4], p[5]);
  }
  throw ConfigError("unknown domain shape '" + shape + "'");
}

inline GammaSpec make_gamma(const std::string& kind, const std::vector<double>& p) {
  if (kind == "left" || kind == "right") {
    if (!p.empty()) throw ConfigError("gamma '" + kind + "' takes no parameters");
    return GammaSpec::endpoint(kind == "right");
  }
  if (kind == "arc") {
    if (p.size() != 2) throw ConfigError("gamma 'arc' needs th0 th1");
    return GammaSpec::disk_arc(p[0], p[1]);
  }
  if (kind == "side") {
    if (p.size() != 3) throw ConfigError("gamma 'side' needs k u0 u1");
    return GammaSpec::side(static_cast<int>(p[0]), p[1], p[2]);
  }
  throw ConfigError("unknown gamma kind '" + kind + "'");
}

inline CylinderSpec make_cylinder(const RunConfig& c) {
  BaseDomain omega = make_domain(c.omega, c.omega_params);
  if (omega.dim() != c.n) throw ConfigError("domain.omega dimension does not match kernel.n");
  return build_cylinder(omega, c.T, make_gamma(c.gamma, c.gamma_params), make_domain(c.omega_plus, c.omega_plus_params));
}

}  // namespace polyheat
