#pragma once

/// \file app.hpp
/// \brief Scenario runners behind the command line tool. Each writes
/// report.json plus CSV artifacts into an output directory.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyheat/cauchy.hpp"
#include "polyheat/config.hpp"
#include "polyheat/potentials.hpp"

namespace polyheat {

inline constexpr int kReportVersion = 1;

using Json = nlohmann::ordered_json;

struct RunOutcome {
  int exit_code = 0;
  Json report;
  std::vector<std::filesystem::path> files;
};

inline FitConfig fit_config(const RunConfig& c) {
  FitConfig f;
  f.K = c.K;
  f.k_sweep = c.k_sweep;
  f.lambda_lo = c.lambda_lo;
  f.lambda_hi = c.lambda_hi;
  f.d_src = c.d_src;
  f.delta_min = c.delta_min;
  f.delta_max = c.delta_max;
  f.tau_res = c.tau_res;
  f.noise_floor = c.noise_floor;
  f.h_min = c.h_min;
  f.col_space = c.col_space;
  f.col_time = c.col_time;
  f.eval_space = c.eval_space;
  f.eval_time = c.eval_time;
  return f;
}

inline PotentialOptions potential_options(const RunConfig& c) {
  PotentialOptions o;
  o.order = c.order;
  return o;
}

inline AnalyticField truth_field(const RunConfig& c, const Kernel& k) {
  if (c.truth == "zero") return AnalyticField::zero();
  SpacePoint z{};
  for (int i = 0; i < c.n; ++i) z[i] = c.source[i];
  return AnalyticField::kernel_translate(k, z, c.shift);
}

/// CSV writer: header row, ',' separator, shortest round-trip reals, LF.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  CsvWriter& cell(double v) { return raw(detail::format_real(v)); }
  CsvWriter& cell(const std::string& s) { return raw(s); }
  void end() {
    out_ << '\n';
    first_ = true;
  }

private:
  CsvWriter& raw(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ofstream out_;
  bool first_ = true;
};

inline std::vector<std::string> point_header(int n, std::initializer_list<const char*> rest) {
  std::vector<std::string> h;
  for (int i = 0; i < n; ++i) h.push_back("x" + std::to_string(i + 1));
  h.emplace_back("t");
  for (const char* r : rest) h.emplace_back(r);
  return h;
}

inline void point_cells(CsvWriter& w, int n, const SpaceTimePoint& p) {
  for (int i = 0; i < n; ++i) w.cell(p.x[i]);
  w.cell(p.t);
}

inline Json point_json(int n, const SpaceTimePoint& p) {
  Json x = Json::array();
  for (int i = 0; i < n; ++i) x.push_back(p.x[i]);
  return {{"x", x}, {"t", p.t}};
}

inline Json to_json(const SolvabilityReport& r) {
  Json lam = Json::array();
  for (const auto& row : r.lambda_table) {
    lam.push_back({{"lambda", row.lambda}, {"residual_rel", row.residual}, {"coef_norm", row.coef_norm}});
  }
  Json ks = Json::array();
  for (const auto& row : r.k_sweep) ks.push_back({{"K", row.K}, {"residual_rel", row.residual}});
  return {{"verdict", to_string(r.verdict)},
          {"residual_rel", r.residual_rel},
          {"residual_absolute", r.absolute_residual},
          {"lambda", r.lambda},
          {"K", r.K},
          {"calF_norm", r.calF_norm},
          {"condition", r.condition},
          {"rank", r.rank},
          {"degenerate", r.degenerate},
          {"lambda_table", lam},
          {"k_sweep", ks},
          {"notes", r.notes}};
}

inline Json to_json(const ReconstructionResult& r) {
  Json j{{"points", r.points.size()}, {"sup_U", r.sup_U}};
  if (!r.exact.empty()) {
    j["sup_error"] = r.sup_error;
    j["rel_l2_error"] = r.rel_l2_error;
    Json prof = Json::array();
    for (std::size_t b = 0; b < r.profile_error.size(); ++b) {
      prof.push_back({{"distance_lo", r.profile_edges[b]}, {"distance_hi", r.profile_edges[b + 1]},
                      {"max_error", r.profile_error[b]}});
    }
    j["error_by_distance"] = prof;
  }
  return j;
}

namespace scenario {

inline void kernel_table(const RunConfig& c, const std::filesystem::path& out, RunOutcome& res) {
  const auto prof = shared_profile({c.n, c.m});
  const auto path = out / "kernel_table.csv";
  CsvWriter w(path, {"s", "phi", "dphi"});
  const int rows = static_cast<int>(std::floor(c.s_max / c.step + 1e-9)) + 1;
  for (int k = 0; k < rows; ++k) {
    const double s = k * c.step;
    w.cell(s).cell(prof->profile(s, 0)).cell(prof->profile(s, 1)).end();
  }
  res.files.push_back(path);
  res.report["result"] = {{"rows", rows},
                          {"phi_0", prof->profile(0.0, 0)},
                          {"center_closed_form", profile_center_value(c.n, c.m)},
                          {"table_max", prof->table_max()}};
}

inline void verify_green(const RunConfig& c, const std::filesystem::path& out, RunOutcome& res) {
  PotentialEvaluator ev({c.n, c.m}, potential_options(c));
  const AnalyticField u = truth_field(c, ev.kernel());
  const CylinderSpec spec = make_cylinder(c);
  std::vector<SpaceTimePoint> targets;
  std::vector<bool> inside;
  const std::vector<double> params{0.2, 0.5, 0.8};
  for (double t : {0.5 * c.T, c.T}) {
    for (const BaseDomain* dom : {&spec.omega, &spec.omega_plus}) {
      if (c.n == 1) {
        for (double a : params) {
          const std::array<double, 1> p{a};
          targets.push_back({dom->map(p), t});
          inside.push_back(dom == &spec.omega);
        }
      } else {
        for (double a : params) {
          for (double b : params) {
            const std::array<double, 2> p{a, b};
            targets.push_back({dom->map(p), t});
            inside.push_back(dom == &spec.omega);
          }
        }
      }
    }
  }
  GreenOptions go;
  go.n_space = c.n_space;
  go.n_time = c.n_time;
  go.n_volume = c.n_volume;
  go.caloric = true;
  const auto g = green_reproduce(ev, u, spec.omega, 0.0, c.T, targets, go);
  double sup_u = 0.0, int_err = 0.0, ext = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (inside[i]) sup_u = std::max(sup_u, std::abs(u(targets[i])));
  }
  const auto path = out / "green.csv";
  CsvWriter w(path, point_header(c.n, {"region", "green", "exact"}));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double e = inside[i] ? u(targets[i]) : 0.0;
    if (inside[i]) int_err = std::max(int_err, std::abs(g[i] - e));
    else ext = std::max(ext, std::abs(g[i]));
    point_cells(w, c.n, targets[i]);
    w.cell(inside[i] ? "interior" : "exterior").cell(g[i]).cell(e).end();
  }
  res.files.push_back(path);
  const double scale = sup_u > 0.0 ? sup_u : 1.0;
  res.report["result"] = {{"targets", targets.size()},
                          {"sup_u", sup_u},
                          {"interior_max_error", int_err},
                          {"interior_max_rel_error", int_err / scale},
                          {"exterior_max", ext},
                          {"exterior_max_rel", ext / scale}};
}

inline void verify_jump(const RunConfig& c, const std::filesystem::path& out, RunOutcome& res) {
  PotentialEvaluator ev({c.n, c.m}, potential_options(c));
  const CylinderSpec spec = make_cylinder(c);
  const BoundaryGrid grid = boundary_grid(spec, Patch::gamma, c.n_space, c.n_time);
  if (c.segment < 0 || c.segment >= static_cast<int>(grid.segments().size())) {
    throw ConfigError("probe.segment out of range");
  }
  const int count = 2 * c.m;
  std::vector<int> indices;
  if (c.index >= 0) {
    if (c.index >= count) throw ConfigError("probe.index must be < 2m");
    indices.push_back(c.index);
  } else {
    for (int i = 0; i < count; ++i) indices.push_back(i);
  }
  // smooth density bump in time, tilted in space
  auto density = [&](const SpaceTimePoint& p) {
    const double s = p.x[0] + 0.5 * p.x[1];
    return std::exp(-(p.t - 0.5 * c.T) * (p.t - 0.5 * c.T) / (0.02 * c.T * c.T)) * (1.0 + 0.3 * s);
  };
  JumpOptions jo;
  jo.diameter = spec.omega.diameter();
  const auto path = out / "jump.csv";
  CsvWriter w(path, point_header(c.n, {"index", "estimate", "expected", "rel_error", "converged"}));
  Json rows = Json::array();
  double worst = 0.0;
  const auto& seg = grid.segments()[c.segment];
  const std::vector<double> us = seg.kind == Segment::Kind::point ? std::vector<double>{0.0} : c.u;
  for (int i : indices) {
    LayerData data{&grid, {}};
    for (int j = 0; j < count; ++j) {
      data.traces.push_back(grid.sample([&](const BoundaryNode& nd) { return j == i ? density(nd.p) : 0.0; }));
    }
    for (double uu : us) {
      for (double t : c.t) {
        const JumpResult jr = jump_test(ev, data, i, c.segment, uu, t, jo);
        const SpaceTimePoint p{seg.point_at(uu), t};
        const double expected = density(p);
        const double rel = std::abs(jr.estimate - expected) / std::max(std::abs(expected), 1e-300);
        worst = std::max(worst, rel);
        point_cells(w, c.n, p);
        w.cell(static_cast<double>(i)).cell(jr.estimate).cell(expected).cell(rel).cell(jr.converged ? "true" : "false").end();
        Json row = point_json(c.n, p);
        row["index"] = i;
        row["estimate"] = jr.estimate;
        row["expected"] = expected;
        row["rel_error"] = rel;
        row["converged"] = jr.converged;
        if (!jr.diagnostic.empty()) row["diagnostic"] = jr.diagnostic;
        rows.push_back(row);
      }
    }
  }
  res.files.push_back(path);
  res.report["result"] = {{"max_rel_error", worst}, {"probes", rows}};
}

inline void write_field(const std::filesystem::path& path, int n, const ReconstructionResult& r) {
  CsvWriter w(path, point_header(n, r.exact.empty() ? std::initializer_list<const char*>{"U"}
                                                     : std::initializer_list<const char*>{"U", "exact"}));
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    point_cells(w, n, r.points[i]);
    w.cell(r.U[i]);
    if (!r.exact.empty()) w.cell(r.exact[i]);
    w.end();
  }
}

inline void solve_cauchy(const RunConfig& c, const std::filesystem::path& out, RunOutcome& res) {
  PotentialEvaluator ev({c.n, c.m}, potential_options(c));
  const CylinderSpec spec = make_cylinder(c);
  const AnalyticField u = truth_field(c, ev.kernel());
  const FitConfig fc = fit_config(c);
  DataResolution dr{c.n_space, c.n_time, c.n_volume};
  const CauchyData data = synthesize_data(ev, u, spec, dr);
  const SolvabilityReport rep = solvability(ev, data, spec, fc);
  res.report["solvability"] = to_json(rep);
  if (rep.verdict == Verdict::compatible) {
    const auto rec = reconstruct(ev, data, spec, rep, evaluation_points(spec, fc), &u);
    const auto path = out / "reconstruction.csv";
    write_field(path, c.n, rec);
    res.files.push_back(path);
    res.report["reconstruction"] = to_json(rec);
  } else {
    res.report["reconstruction"] = nullptr;
    res.report["refusal"] = std::string("verdict ") + to_string(rep.verdict) + "; reconstruction not attempted";
    if (rep.verdict == Verdict::incompatible && c.fail_on_incompatible) res.exit_code = 3;
  }
}

inline void uniqueness(const RunConfig& c, const std::filesystem::path& out, RunOutcome& res) {
  PotentialEvaluator ev({c.n, c.m}, potential_options(c));
  const CylinderSpec spec = make_cylinder(c);
  const FitConfig fc = fit_config(c);
  DataResolution dr{c.n_space, c.n_time, c.n_volume};
  const auto rows = uniqueness_experiment(ev, spec, fc, dr, c.eps, c.seed);
  const auto path = out / "uniqueness.csv";
  CsvWriter w(path, {"eps", "sup_U", "amplification", "lambda", "verdict"});
  Json j = Json::array();
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    w.cell(r.eps).cell(r.sup_U).cell(r.amplification).cell(r.lambda).cell(to_string(r.verdict)).end();
    j.push_back({{"eps", r.eps}, {"sup_U", r.sup_U}, {"amplification", r.amplification}, {"lambda", r.lambda},
                 {"verdict", to_string(r.verdict)}});
    for (std::size_t k = 0; k < i; ++k) {
      if (rows[k].eps <= r.eps && rows[k].sup_U > r.sup_U) monotone = false;
    }
  }
  res.files.push_back(path);
  res.report["result"] = {{"rows", j}, {"monotone", monotone}};
}

}  // namespace scenario

/// Runs one scenario; the report (with the config echo) goes to report.json.
inline RunOutcome run_scenario(const RunConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  RunOutcome res;
  res.report["version"] = kReportVersion;
  res.report["scenario"] = c.scenario;
  res.report["seed"] = c.seed;
  res.report["kernel"] = {{"n", c.n}, {"m", c.m}};
  res.report["config"] = to_text(c);
  if (c.scenario == "kernel-table") scenario::kernel_table(c, out, res);
  else if (c.scenario == "verify-green") scenario::verify_green(c, out, res);
  else if (c.scenario == "verify-jump") scenario::verify_jump(c, out, res);
  else if (c.scenario == "solve-cauchy") scenario::solve_cauchy(c, out, res);
  else if (c.scenario == "uniqueness") scenario::uniqueness(c, out, res);
  else throw ConfigError("scenario '" + c.scenario + "' is not runnable with `run`");
  Json files = Json::array();
  for (const auto& f : res.files) files.push_back(f.filename().string());
  res.report["files"] = files;
  std::ofstream(out / "report.json", std::ios::binary) << res.report.dump(2) << '\n';
  return res;
}

namespace bench_detail {

struct Timing {
  double median;
  double p95;
};

template <class F>
Timing time_it(int repeats, F&& f) {
  std::vector<double> s;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(s.begin(), s.end());
  const auto at = [&](double q) { return s[std::min(s.size() - 1, static_cast<std::size_t>(q * (s.size() - 1) + 0.5))]; };
  return {at(0.5), at(0.95)};
}

}  // namespace bench_detail

/// Wall-time medians and p95 for kernel evaluation (table and direct),
/// a layer-potential target sweep and collocation assembly.
inline RunOutcome run_bench(const RunConfig& c, const std::filesystem::path& out) {
  using bench_detail::time_it;
  std::filesystem::create_directories(out);
  RunOutcome res;
  res.report["version"] = kReportVersion;
  res.report["scenario"] = "bench";
  res.report["config"] = to_text(c);
  const auto prof = shared_profile({c.n, c.m});
  volatile double sink = 0.0;
  const int np = c.points;
  const double s_hi = std::min(prof->table_max(), 10.0);
  auto table = time_it(c.repeats, [&] {
    double acc = 0.0;
    for (int i = 0; i < np; ++i) acc += prof->shifted(0, s_hi * i / np);
    sink = acc;
  });
  // direct quadrature is slow; time a smaller batch and scale per point
  const int nd = std::max(1, np / 100);
  auto direct = time_it(c.repeats, [&] {
    double acc = 0.0;
    for (int i = 0; i < nd; ++i) acc += prof->direct(0, s_hi * i / nd, false);
    sink = acc;
  });
  PotentialEvaluator ev({c.n, c.m}, potential_options(c));
  const CylinderSpec spec = make_cylinder(c);
  const FitConfig fc = fit_config(c);
  const AnalyticField u = AnalyticField::zero();
  CauchyData data = synthesize_data(ev, u, spec, {c.n_space, c.n_time, c.n_volume});
  for (auto& tr : data.traces) std::fill(tr.begin(), tr.end(), 1.0);
  const auto targets = collocation_points(spec, fc);
  const std::size_t nt = std::min<std::size_t>(targets.size(), 64);
  auto sweep = time_it(c.repeats, [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < nt; ++i) acc += ev.layer_sum(data.layer(), 0.0, targets[i]);
    sink = acc;
  });
  // assembly at K = 128 over 4096 collocation points
  FitConfig big = fc;
  big.col_space = c.n == 1 ? 64 : 16;
  big.col_time = c.n == 1 ? 64 : 16;
  const auto cpts = collocation_points(spec, big);
  const ExtensionBasis basis = make_basis(ev.kernel(), spec, 128, fc);
  auto assembly = time_it(c.repeats, [&] {
    const Eigen::MatrixXd A = basis.matrix(cpts);
    sink = A(0, 0);
  });
  (void)sink;
  const auto path = out / "bench.csv";
  CsvWriter w(path, {"name", "count", "median_s", "p95_s", "per_item_s", "speedup"});
  const double per_table = table.median / np, per_direct = direct.median / nd;
  w.cell("kernel_table").cell(static_cast<double>(np)).cell(table.median).cell(table.p95).cell(per_table)
      .cell(per_direct / per_table).end();
  w.cell("kernel_direct").cell(static_cast<double>(nd)).cell(direct.median).cell(direct.p95).cell(per_direct).cell(1.0).end();
  w.cell("layer_sweep").cell(static_cast<double>(nt)).cell(sweep.median).cell(sweep.p95).cell(sweep.median / nt).cell("").end();
  const double cells = static_cast<double>(cpts.size()) * basis.size();
  w.cell("assembly").cell(cells).cell(assembly.median).cell(assembly.p95).cell(assembly.median / cells).cell("").end();
  res.files.push_back(path);
  res.report["result"] = {{"kernel_speedup", per_direct / per_table},
                          {"collocation_points", cpts.size()},
                          {"basis_size", basis.size()}};
  res.report["files"] = Json::array({"bench.csv"});
  std::ofstream(out / "report.json", std::ios::binary) << res.report.dump(2) << '\n';
  return res;
}

}  // namespace polyheat
