#pragma once

/// \file cauchy.hpp
/// \brief Lateral Cauchy problem: potential sum F_cal over Gamma, caloric
/// extension by a fundamental-solution basis with Tikhonov regularization,
/// compatibility verdict, and the reconstruction U = F_cal - F in Omega_T.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyheat/errors.hpp"
#include "polyheat/geometry.hpp"
#include "polyheat/kernel.hpp"
#include "polyheat/potentials.hpp"

namespace polyheat {

/// Traces u_1..u_2m on Gamma_T and the source term f on Omega_T.
struct CauchyData {
  BoundaryGrid grid;
  std::vector<std::vector<double>> traces;
  std::optional<VolumeGrid> f_grid;
  std::vector<double> f;

  [[nodiscard]] LayerData layer() const { return {&grid, traces}; }
  [[nodiscard]] bool has_source() const {
    return f_grid && std::any_of(f.begin(), f.end(), [](double v) { return v != 0.0; });
  }
  void validate(int m) const {
    if (static_cast<int>(traces.size()) != 2 * m) throw std::invalid_argument("CauchyData: need 2m traces");
    for (const auto& t : traces) {
      if (t.size() != grid.size()) throw std::invalid_argument("CauchyData: trace size mismatch");
    }
    if (f_grid && f.size() != f_grid->size()) throw std::invalid_argument("CauchyData: source size mismatch");
  }
};

struct DataResolution {
  int n_space = 32;  // Gamma nodes (n = 2)
  int n_time = 32;
  int n_volume = 16;
};

/// u_{j+1} = B_j(exact) on Gamma_T; f = L_m(exact) on Omega_T unless the
/// field is declared caloric.
inline CauchyData synthesize_data(const PotentialEvaluator& ev, const AnalyticField& exact,
                                  const CylinderSpec& spec, const DataResolution& res = {},
                                  bool caloric = true) {
  CauchyData data{boundary_grid(spec, Patch::gamma, res.n_space, res.n_time), {}, std::nullopt, {}};
  data.traces = sample_traces(data.grid, exact, ev.system()).traces;
  if (!caloric) {
    data.f_grid.emplace(spec.omega, res.n_volume, PanelAxis::with_nodes(0.0, spec.T, res.n_time));
    const DiffOp L = heat_operator(ev.n(), ev.m());
    data.f = data.f_grid->sample([&](const SpaceTimePoint& p) { return L.apply(exact, p); });
  }
  return data;
}

struct FitConfig {
  int K = 64;
  /// Source distance from D; <= 0 selects 0.5 diam(D).
  double d_src = 0.0;
  /// Time shifts: geometric range [delta_min, delta_max] * T.
  double delta_min = 0.02;
  double delta_max = 2.0;
  /// Source rings (n = 2) or distances per side (n = 1); <= 0 picks a default.
  int rings = 0;
  /// Time shifts per ring location (n = 2).
  int time_shifts = 4;
  /// Tikhonov sweep lambda = 10^k, k = lambda_lo..lambda_hi.
  int lambda_lo = -14;
  int lambda_hi = -2;
  double noise_floor = 1e-8;
  double discrepancy_factor = 1.5;
  double tau_res = 1e-3;
  double incompat_factor = 10.0;
  std::vector<int> k_sweep{32, 64, 128};
  /// Exclusion band around Gamma (collocation) and around dOmega (evaluation);
  /// <= 0 selects 0.02 diam(Omega).
  double h_min = 0.0;
  int col_space = 20;
  int col_time = 20;
  int eval_space = 15;
  int eval_time = 15;
  double t_min = 0.05;  // fraction of T
};

/// psi_k(x, t) = Phi_m(x - z_k, t + delta_k).
class ExtensionBasis {
public:
  ExtensionBasis(const Kernel& kernel, std::vector<SpacePoint> z, std::vector<double> delta)
      : kernel_(&kernel), z_(std::move(z)), delta_(std::move(delta)) {}

  [[nodiscard]] int size() const { return static_cast<int>(z_.size()); }
  [[nodiscard]] const SpacePoint& source(int k) const { return z_[k]; }
  [[nodiscard]] double shift(int k) const { return delta_[k]; }
  [[nodiscard]] double psi(int k, const SpaceTimePoint& p) const {
    return kernel_->phi({diff(p.x, z_[k]), p.t + delta_[k]});
  }
  [[nodiscard]] double psi_derivative(int k, const MultiIndex& mi, const SpaceTimePoint& p) const {
    return kernel_->derivative(mi, {diff(p.x, z_[k]), p.t + delta_[k]});
  }
  [[nodiscard]] Eigen::MatrixXd matrix(const std::vector<SpaceTimePoint>& pts) const {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int k = 0; k < size(); ++k) A(static_cast<Eigen::Index>(i), k) = psi(k, pts[i]);
    }
    return A;
  }

private:
  const Kernel* kernel_;
  std::vector<SpacePoint> z_;
  std::vector<double> delta_;
};

inline double resolved_h_min(const CylinderSpec& spec, const FitConfig& cfg) {
  return cfg.h_min > 0.0 ? cfg.h_min : 0.02 * spec.omega.diameter();
}
inline double resolved_d_src(const CylinderSpec& spec, const FitConfig& cfg) {
  return cfg.d_src > 0.0 ? cfg.d_src : 0.5 * spec.diameter_D();
}

/// Sources outside D at distances d_src..2 d_src, each carrying a geometric
/// ladder of time shifts.
inline ExtensionBasis make_basis(const Kernel& kernel, const CylinderSpec& spec, int K, const FitConfig& cfg) {
  if (K < 2) throw std::invalid_argument("make_basis: K must be >= 2");
  const double d = resolved_d_src(spec, cfg);
  std::vector<SpacePoint> locs;
  if (spec.dim() == 1) {
    // a single time shift needs every source at its own distance
    const int rings = cfg.rings > 0 ? cfg.rings : (cfg.delta_min == cfg.delta_max ? std::max(1, K / 2) : 4);
    const double lo = std::min(spec.omega.lo()[0], spec.omega_plus.lo()[0]);
    const double hi = std::max(spec.omega.hi()[0], spec.omega_plus.hi()[0]);
    for (double side : {-1.0, 1.0}) {
      for (int r = 0; r < rings; ++r) {
        const double dist = rings == 1 ? d : d * (1.0 + static_cast<double>(r) / (rings - 1));
        locs.push_back({side < 0 ? lo - dist : hi + dist, 0.0, 0.0});
      }
    }
  } else {
    // rings around the center of Omega, just outside the farthest point of D
    const int rings = cfg.rings > 0 ? cfg.rings : 2;
    auto [a0, a1] = spec.omega.bounds();
    const SpacePoint c{0.5 * (a0[0] + a1[0]), 0.5 * (a0[1] + a1[1]), 0};
    double R = 0.0;
    for (const auto* dom : {&spec.omega, &spec.omega_plus}) {
      for (const auto& seg : dom->boundary()) {
        for (int q = 0; q <= 64; ++q) R = std::max(R, norm(diff(seg.point_at(q / 64.0), c)));
      }
    }
    const int n_delta = cfg.delta_min == cfg.delta_max ? 1 : std::max(1, std::min(cfg.time_shifts, K / (rings * 4)));
    const int n_ang = std::max(1, K / (rings * n_delta));
    for (int r = 0; r < rings; ++r) {
      const double rad = R + (rings == 1 ? d : d * (1.0 + static_cast<double>(r) / (rings - 1)));
      for (int a = 0; a < n_ang; ++a) {
        const double th = 2.0 * std::numbers::pi * (a + 0.5 * r) / n_ang;
        locs.push_back({c[0] + rad * std::cos(th), c[1] + rad * std::sin(th), 0.0});
      }
    }
  }
  const int n_loc = static_cast<int>(locs.size());
  std::vector<SpacePoint> z;
  std::vector<double> delta;
  for (int l = 0; l < n_loc; ++l) {
    const int count = K / n_loc + (l < K % n_loc ? 1 : 0);
    for (int q = 0; q < count; ++q) {
      const double f = count == 1 ? 0.5 : static_cast<double>(q) / (count - 1);
      z.push_back(locs[l]);
      delta.push_back(spec.T * cfg.delta_min * std::pow(cfg.delta_max / cfg.delta_min, f));
    }
  }
  return ExtensionBasis(kernel, std::move(z), std::move(delta));
}

/// Collocation points in Omega+_T at distance >= h_min from Gamma.
inline std::vector<SpaceTimePoint> collocation_points(const CylinderSpec& spec, const FitConfig& cfg) {
  const double h = resolved_h_min(spec, cfg);
  std::vector<SpaceTimePoint> pts;
  const auto gamma = spec.segments(Patch::gamma);
  auto far_from_gamma = [&](const SpacePoint& x) {
    for (const auto& s : gamma) {
      if (s.closest(x).second < h) return false;
    }
    return true;
  };
  std::vector<SpacePoint> xs;
  if (spec.dim() == 1) {
    const double x_gamma = gamma.front().a[0];
    const bool left = spec.omega_plus.hi()[0] <= x_gamma + 1e-12;
    const double a = left ? spec.omega_plus.lo()[0] + h : x_gamma + h;
    const double b = left ? x_gamma - h : spec.omega_plus.hi()[0] - h;
    for (int i = 0; i < cfg.col_space; ++i) {
      xs.push_back({a + (b - a) * i / std::max(1, cfg.col_space - 1), 0.0, 0.0});
    }
  } else {
    for (int i = 0; i < cfg.col_space; ++i) {
      for (int j = 0; j < cfg.col_space; ++j) {
        const std::array<double, 2> p{(i + 0.5) / cfg.col_space, (j + 0.5) / cfg.col_space};
        const SpacePoint x = spec.omega_plus.map(p);
        if (far_from_gamma(x)) xs.push_back(x);
      }
    }
  }
  for (int k = 0; k < cfg.col_time; ++k) {
    const double t = spec.T * (cfg.t_min + (1.0 - cfg.t_min) * k / std::max(1, cfg.col_time - 1));
    for (const auto& x : xs) pts.push_back({x, t});
  }
  return pts;
}

/// Evaluation points in Omega_T at distance >= h_min from dOmega.
inline std::vector<SpaceTimePoint> evaluation_points(const CylinderSpec& spec, const FitConfig& cfg) {
  const double h = resolved_h_min(spec, cfg);
  std::vector<SpacePoint> xs;
  if (spec.dim() == 1) {
    const double a = spec.omega.lo()[0] + h, b = spec.omega.hi()[0] - h;
    for (int i = 0; i < cfg.eval_space; ++i) xs.push_back({a + (b - a) * i / std::max(1, cfg.eval_space - 1), 0, 0});
  } else {
    for (int i = 0; i < cfg.eval_space; ++i) {
      for (int j = 0; j < cfg.eval_space; ++j) {
        const std::array<double, 2> p{(i + 0.5) / cfg.eval_space, (j + 0.5) / cfg.eval_space};
        const SpacePoint x = spec.omega.map(p);
        if (spec.omega.distance_to_boundary(x) >= h) xs.push_back(x);
      }
    }
  }
  std::vector<SpaceTimePoint> pts;
  for (int k = 0; k < cfg.eval_time; ++k) {
    const double t = spec.T * (cfg.t_min + (1.0 - cfg.t_min) * k / std::max(1, cfg.eval_time - 1));
    for (const auto& x : xs) pts.push_back({x, t});
  }
  return pts;
}

/// F_cal = G(f) + sum_j (layer term j over Gamma)(u_{j+1}) at each target.
/// Targets within h_min of Gamma are skipped and reported in `excluded`.
inline std::vector<double> assemble_calF(const PotentialEvaluator& ev, const CauchyData& data,
                                         const CylinderSpec& spec, const std::vector<SpaceTimePoint>& targets,
                                         double h_min = 0.0, std::vector<std::size_t>* excluded = nullptr) {
  data.validate(ev.m());
  const LayerData layer = data.layer();
  const bool source = data.has_source();
  std::vector<double> out(targets.size(), 0.0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    bool near = false;
    for (const auto& s : data.grid.segments()) {
      if (s.closest(targets[i].x).second < h_min) near = true;
    }
    if (near) {
      if (excluded) excluded->push_back(i);
      out[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double v = ev.layer_sum(layer, 0.0, targets[i]);
    if (source) v += ev.volume_G(*data.f_grid, data.f, 0.0, targets[i]);
    out[i] = v;
  }
  (void)spec;
  return out;
}

struct LambdaRow {
  double lambda;
  double residual;
  double coef_norm;
};

struct ExtensionFit {
  Eigen::VectorXd coef;
  double residual_rel = 0.0;
  bool absolute = false;   // residual is absolute because ||F_cal|| < 1e-14
  double lambda = 0.0;
  std::vector<LambdaRow> table;
  double condition = 0.0;
  int rank = 0;
  bool degenerate = false;
};

/// Thin SVD of the collocation matrix, reused across lambda.
class TikhonovSolver {
public:
  TikhonovSolver(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
      : svd_(A, Eigen::ComputeThinU | Eigen::ComputeThinV), A_(A), b_(b) {
    if (A.rows() < A.cols()) throw std::invalid_argument("fit_extension: need collocation count >= K");
    beta_ = svd_.matrixU().transpose() * b;
    bnorm_ = b.norm();
  }
  [[nodiscard]] Eigen::VectorXd solve(double lambda) const {
    const auto& S = svd_.singularValues();
    Eigen::VectorXd w(S.size());
    for (Eigen::Index i = 0; i < S.size(); ++i) {
      const double den = S(i) * S(i) + lambda;
      w(i) = den > 0.0 ? S(i) * beta_(i) / den : 0.0;
    }
    return svd_.matrixV() * w;
  }
  [[nodiscard]] double residual(const Eigen::VectorXd& c, bool* absolute = nullptr) const {
    const double r = (A_ * c - b_).norm();
    const bool abs_mode = bnorm_ < 1e-14;
    if (absolute) *absolute = abs_mode;
    return abs_mode ? r : r / bnorm_;
  }
  [[nodiscard]] double condition() const {
    const auto& S = svd_.singularValues();
    return S(S.size() - 1) > 0.0 ? S(0) / S(S.size() - 1) : std::numeric_limits<double>::infinity();
  }
  [[nodiscard]] int rank() const {
    const auto& S = svd_.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < S.size(); ++i) {
      if (S(i) > 1e-15 * S(0)) ++r;
    }
    return r;
  }

private:
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd beta_;
  double bnorm_ = 0.0;
};

/// Single-lambda fit: min ||A c - b||^2 + lambda ||c||^2.
inline ExtensionFit fit_extension(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda) {
  TikhonovSolver solver(A, b);
  ExtensionFit fit;
  fit.coef = solver.solve(lambda);
  fit.residual_rel = solver.residual(fit.coef, &fit.absolute);
  fit.lambda = lambda;
  fit.condition = solver.condition();
  fit.rank = solver.rank();
  fit.degenerate = !std::isfinite(fit.condition) || fit.condition > 1e300;
  fit.table.push_back({lambda, fit.residual_rel, fit.coef.norm()});
  return fit;
}

/// Lambda sweep with the discrepancy principle: the largest lambda whose
/// residual is within discrepancy_factor * max(noise_floor, best residual).
inline ExtensionFit fit_extension_sweep(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const FitConfig& cfg) {
  TikhonovSolver solver(A, b);
  ExtensionFit fit;
  fit.condition = solver.condition();
  fit.rank = solver.rank();
  fit.degenerate = !std::isfinite(fit.condition) || fit.condition > 1e300;
  std::vector<Eigen::VectorXd> coefs;
  double best = std::numeric_limits<double>::infinity();
  for (int e = cfg.lambda_lo; e <= cfg.lambda_hi; ++e) {
    const double lambda = std::pow(10.0, e);
    coefs.push_back(solver.solve(lambda));
    const double r = solver.residual(coefs.back(), &fit.absolute);
    fit.table.push_back({lambda, r, coefs.back().norm()});
    best = std::min(best, r);
  }
  const double target = cfg.discrepancy_factor * std::max(cfg.noise_floor, best);
  std::size_t pick = 0;
  for (std::size_t i = 0; i < fit.table.size(); ++i) {
    if (fit.table[i].residual <= target) pick = i;
  }
  fit.coef = coefs[pick];
  fit.lambda = fit.table[pick].lambda;
  fit.residual_rel = fit.table[pick].residual;
  return fit;
}

enum class Verdict { compatible, incompatible, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::compatible: return "compatible";
    case Verdict::incompatible: return "incompatible";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

struct KSweepRow {
  int K;
  double residual;
  double lambda;
};

struct SolvabilityReport {
  double residual_rel = 0.0;
  double lambda = 0.0;
  int K = 0;
  Verdict verdict = Verdict::inconclusive;
  double condition = 0.0;
  int rank = 0;
  bool degenerate = false;
  bool absolute_residual = false;
  double calF_norm = 0.0;
  std::vector<LambdaRow> lambda_table;
  std::vector<KSweepRow> k_sweep;
  std::vector<std::string> notes;
  // fitted extension, for reconstruction
  std::optional<ExtensionBasis> basis;
  Eigen::VectorXd coef;
};

/// Collocation values of F_cal, computed once and shared by the K sweep.
struct CollocationData {
  std::vector<SpaceTimePoint> points;
  Eigen::VectorXd calF;
};

inline CollocationData collocate(const PotentialEvaluator& ev, const CauchyData& data, const CylinderSpec& spec,
                                 const FitConfig& cfg) {
  CollocationData c;
  c.points = collocation_points(spec, cfg);
  const auto v = assemble_calF(ev, data, spec, c.points);
  c.calF = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return c;
}

/// Verdict: compatible if the discrepancy-selected residual at K is <= tau_res;
/// incompatible if the residual exceeds incompat_factor * tau_res for every K
/// of the sweep and does not drop by more than half across it; otherwise
/// inconclusive.
inline SolvabilityReport solvability(const PotentialEvaluator& ev, const CauchyData& data, const CylinderSpec& spec,
                                     const FitConfig& cfg, const CollocationData* pre = nullptr) {
  CollocationData local;
  if (!pre) {
    local = collocate(ev, data, spec, cfg);
    pre = &local;
  }
  SolvabilityReport rep;
  rep.K = cfg.K;
  rep.calF_norm = pre->calF.norm();
  auto run = [&](int K) {
    ExtensionBasis basis = make_basis(ev.kernel(), spec, K, cfg);
    const Eigen::MatrixXd A = basis.matrix(pre->points);
    ExtensionFit fit = fit_extension_sweep(A, pre->calF, cfg);
    return std::make_pair(std::move(basis), std::move(fit));
  };
  auto [basis, fit] = run(cfg.K);
  rep.residual_rel = fit.residual_rel;
  rep.lambda = fit.lambda;
  rep.condition = fit.condition;
  rep.rank = fit.rank;
  rep.degenerate = fit.degenerate;
  rep.absolute_residual = fit.absolute;
  rep.lambda_table = fit.table;
  rep.basis.emplace(std::move(basis));
  rep.coef = fit.coef;
  if (rep.degenerate) rep.notes.push_back("collocation matrix is numerically singular at lambda = 0");
  if (rep.residual_rel <= cfg.tau_res) {
    rep.verdict = Verdict::compatible;
    return rep;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool all_large = true;
  for (int K : cfg.k_sweep) {
    const double r = K == cfg.K ? fit.residual_rel : run(K).second.residual_rel;
    const double l = K == cfg.K ? fit.lambda : 0.0;
    rep.k_sweep.push_back({K, r, l});
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    if (r <= cfg.incompat_factor * cfg.tau_res) all_large = false;
  }
  if (all_large && lo >= 0.5 * hi) {
    rep.verdict = Verdict::incompatible;
  } else {
    rep.verdict = Verdict::inconclusive;
    rep.notes.push_back("residual neither below tau_res nor on a plateau above the incompatibility level");
  }
  return rep;
}

struct ReconstructionResult {
  std::vector<SpaceTimePoint> points;
  std::vector<double> U;
  std::vector<double> exact;   // empty without ground truth
  double sup_error = 0.0;
  double rel_l2_error = 0.0;
  double sup_U = 0.0;
  /// max error binned by distance to dOmega \ Gamma (bin edges in `profile_edges`)
  std::vector<double> profile_edges;
  std::vector<double> profile_error;
};

/// U = F_cal - F at the evaluation points, without checking the verdict.
inline ReconstructionResult reconstruct_unchecked(const PotentialEvaluator& ev, const CauchyData& data,
                                                  const CylinderSpec& spec, const ExtensionBasis& basis,
                                                  const Eigen::VectorXd& coef,
                                                  const std::vector<SpaceTimePoint>& pts,
                                                  const AnalyticField* truth = nullptr) {
  ReconstructionResult res;
  res.points = pts;
  const auto calF = assemble_calF(ev, data, spec, pts);
  const Eigen::MatrixXd A = basis.matrix(pts);
  const Eigen::VectorXd F = A * coef;
  res.U.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    res.U[i] = calF[i] - F(static_cast<Eigen::Index>(i));
    res.sup_U = std::max(res.sup_U, std::abs(res.U[i]));
  }
  if (truth) {
    double num = 0.0, den = 0.0;
    const auto rest = spec.segments(Patch::complement);
    const double diam = spec.omega.diameter();
    const int bins = 5;
    for (int b = 0; b <= bins; ++b) res.profile_edges.push_back(diam * b / (2.0 * bins));
    res.profile_error.assign(bins, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double e = (*truth)(pts[i]);
      res.exact.push_back(e);
      const double err = std::abs(res.U[i] - e);
      res.sup_error = std::max(res.sup_error, err);
      num += err * err;
      den += e * e;
      double dist = INFINITY;
      for (const auto& s : rest) dist = std::min(dist, s.closest(pts[i].x).second);
      const int b = std::clamp(static_cast<int>(dist / (diam / (2.0 * bins))), 0, bins - 1);
      res.profile_error[b] = std::max(res.profile_error[b], err);
    }
    res.rel_l2_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  }
  return res;
}

inline ReconstructionResult reconstruct(const PotentialEvaluator& ev, const CauchyData& data, const CylinderSpec& spec,
                                        const SolvabilityReport& rep, const std::vector<SpaceTimePoint>& pts,
                                        const AnalyticField* truth = nullptr) {
  if (rep.verdict != Verdict::compatible || !rep.basis) {
    throw RefusalError(std::string("reconstruct: data are not compatible (verdict ") + to_string(rep.verdict) + ")");
  }
  return reconstruct_unchecked(ev, data, spec, *rep.basis, rep.coef, pts, truth);
}

/// Uniform noise in [-1, 1) from one seeded 64-bit Mersenne twister, mapped
/// through the top 53 bits so that the sequence is platform independent.
class NoiseSource {
public:
  explicit NoiseSource(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-52 - 1.0; }

private:
  std::mt19937_64 gen_;
};

struct UniquenessRow {
  double eps;
  double sup_U;
  double amplification;  // sup|U| / eps
  double lambda;
  Verdict verdict;
};

/// Zero Cauchy data perturbed by eps * (the same seeded noise pattern);
/// returns sup |U| over the evaluation grid for each eps.
inline std::vector<UniquenessRow> uniqueness_experiment(const PotentialEvaluator& ev, const CylinderSpec& spec,
                                                        const FitConfig& cfg, const DataResolution& res,
                                                        const std::vector<double>& eps_list, std::uint64_t seed) {
  CauchyData base{boundary_grid(spec, Patch::gamma, res.n_space, res.n_time), {}, std::nullopt, {}};
  NoiseSource noise(seed);
  std::vector<std::vector<double>> pattern(2 * ev.m(), std::vector<double>(base.grid.size()));
  for (auto& tr : pattern) {
    for (auto& v : tr) v = noise.next();
  }
  const auto pts = evaluation_points(spec, cfg);
  std::vector<UniquenessRow> rows;
  for (double eps : eps_list) {
    CauchyData data = base;
    data.traces = pattern;
    for (auto& tr : data.traces) {
      for (auto& v : tr) v *= eps;
    }
    const SolvabilityReport rep = solvability(ev, data, spec, cfg);
    const auto rec = reconstruct_unchecked(ev, data, spec, *rep.basis, rep.coef, pts);
    rows.push_back({eps, rec.sup_U, eps > 0.0 ? rec.sup_U / eps : 0.0, rep.lambda, rep.verdict});
  }
  return rows;
}

}  // namespace polyheat
