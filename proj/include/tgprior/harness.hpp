#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "indexfn.hpp"
#include "modulus.hpp"
#include "posterior.hpp"
#include "rng.hpp"
#include "spectra.hpp"
#include "truncation.hpp"

namespace tgprior {

struct ModeSpec {
  enum class Type { commuting_diagonal, noncommuting_dense } type = Type::commuting_diagonal;
  double eps = 0.0;
  std::uint64_t seed = 7;
  long long N = 200;
  double a = 0.0;  // 0: derive from the prior spectrum
};

inline std::vector<double> decade_grid(int lo, int hi) {
  std::vector<double> g;
  for (int e = lo; e <= hi; ++e) g.push_back(std::pow(10.0, e));
  return g;
}

struct Scenario {
  std::string name;
  std::string description;
  SpectrumModel forward;
  SpectrumModel prior;
  SmoothnessSpec smoothness;
  ModeSpec mode;
  std::vector<double> n_grid = decade_grid(3, 9);
  std::vector<double> sim_grid = decade_grid(3, 5);
  std::vector<double> delta_grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  BoundConstants constants;
  long long N = 2000;
  std::uint64_t seed = 42;

  void validate() const {
    try {
      smoothness.validate();
    } catch (const DomainError& e) {
      throw ConfigError("smoothness", e.what());
    }
    constants.validate();
    if (n_grid.empty()) throw ConfigError("n_grid", "must not be empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (!(n_grid[i] > 0.0)) throw ConfigError("n_grid", "entries must be positive");
      if (i > 0 && !(n_grid[i] > n_grid[i - 1])) throw ConfigError("n_grid", "must be strictly increasing");
    }
    if (N < 1) throw ConfigError("N", "must be >= 1");
    if (mode.type == ModeSpec::Type::noncommuting_dense) {
      if (!(mode.eps >= 0.0 && mode.eps < 1.0)) throw ConfigError("mode.eps", "must lie in [0, 1)");
      if (mode.N < 2) throw ConfigError("mode.N", "must be >= 2");
      if (mode.a != 0.0 && mode.a < 0.5) throw ConfigError("mode.a", "must be >= 0.5");
    }
  }
};

// Everything the pipeline needs, derived once from a scenario.
struct ScenarioContext {
  SpectrumModel sH;
  SpectrumModel sLf;
  SpectrumModel sLg;
  IndexFunction phi;
  IndexFunction theta_phi;
  IndexFunction chi;
  IndexFunction psi;
  long long Jmax;
  std::optional<bool> alphabeta_analytic;
  std::optional<MatrixProblem> dense;
  std::optional<WeylCheck> weyl;
};

// Closed-form verdict of psi^2(s_j) <= c4 j s_j in the Sobolev setting, where
// the ratio behaves like j^{-2 beta} / (j s_j(Lambda^f)).
inline std::optional<bool> alphabeta_verdict(const Scenario& sc) {
  if (sc.smoothness.mu > 0.0 || sc.mode.type != ModeSpec::Type::commuting_diagonal) return std::nullopt;
  const double beta = sc.smoothness.beta;
  switch (sc.prior.family()) {
    case SpectrumFamily::alpha_regular: return sc.prior.params()[0] <= beta;
    case SpectrumFamily::power: return 2.0 * sc.prior.params()[0] <= 1.0 + 2.0 * beta;
    case SpectrumFamily::analytic: return false;
    default: return std::nullopt;
  }
}

// Link exponent a with s_j(Lambda^f) = s_j(H)^{2a}, for a power forward spectrum.
inline double link_exponent(const Scenario& sc) {
  if (sc.mode.a > 0.0) return sc.mode.a;
  if (sc.forward.family() != SpectrumFamily::power) {
    throw ConfigError("mode.a", "required unless the forward spectrum is a power");
  }
  const double p = sc.forward.params()[0];
  switch (sc.prior.family()) {
    case SpectrumFamily::alpha_regular: return (1.0 + 2.0 * sc.prior.params()[0]) / (4.0 * p);
    case SpectrumFamily::power: return sc.prior.params()[0] / (2.0 * p);
    default: throw ConfigError("mode.a", "cannot derive link exponent from this prior");
  }
}

inline ScenarioContext build_context(const Scenario& sc) {
  sc.validate();
  const IndexFunction phi = natural_phi(sc.forward, sc.smoothness);
  if (sc.mode.type == ModeSpec::Type::commuting_diagonal) {
    const IndexFunction chi = spectral_link_chi(sc.forward, sc.prior);
    return ScenarioContext{sc.forward,
                           sc.prior,
                           commuting_product_spectrum(sc.forward, sc.prior),
                           phi,
                           companion_theta(phi),
                           chi,
                           compose_psi(phi, chi),
                           default_jmax(sc.forward),
                           alphabeta_verdict(sc),
                           std::nullopt,
                           std::nullopt};
  }
  if (phi.family() != Family::power) {
    throw ConfigError("mode", "noncommuting_dense needs a power-type smoothness function");
  }
  const double a = link_exponent(sc);
  MatrixProblem mp = build_noncommuting(sc.mode.N, sc.forward, a, sc.mode.eps, sc.mode.seed);
  mp.f0 = default_truth(phi, sc.forward, sc.mode.N, sc.smoothness.R);
  const Vector lg = sym_eig_desc(mp.LambdaG()).values;
  const Vector lf = sym_eig_desc(mp.LambdaF).values;
  const SpectrumModel sLg = SpectrumModel::explicit_values(std::vector<double>(lg.data(), lg.data() + lg.size()));
  const SpectrumModel sLf = SpectrumModel::explicit_values(std::vector<double>(lf.data(), lf.data() + lf.size()));
  const double mu = phi.params()[0];
  const double upper = std::max(1.0, 2.0 * lg(0));
  auto weyl = check_weyl_link(mp, mp.N);
  return ScenarioContext{sc.forward,
                         sLf,
                         sLg,
                         phi,
                         companion_theta(phi),
                         IndexFunction::power(a, std::max(1.0, sc.forward.singular_value(1))),
                         IndexFunction::power((mu + 0.5) / (2.0 * a + 1.0), upper),
                         mp.N,
                         std::nullopt,
                         std::move(mp),
                         std::move(weyl)};
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

// Least squares through (log x, log y), optionally over points [first, last).
inline RateFit fit_loglog(const std::vector<std::pair<double, double>>& pts,
                          std::optional<std::pair<std::size_t, std::size_t>> window = std::nullopt) {
  std::size_t b = 0, e = pts.size();
  if (window) {
    b = window->first;
    e = std::min(window->second, pts.size());
  }
  if (e < b + 3) throw DomainError("fit_loglog: need at least 3 points");
  RateFit f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = b; i < e; ++i) {
    const auto [x, y] = pts[i];
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("fit_loglog: data must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
    f.points.push_back(pts[i]);
  }
  const double m = static_cast<double>(e - b);
  const double vx = sxx - sx * sx / m, vy = syy - sy * sy / m, cxy = sxy - sx * sy / m;
  if (!(vx > 0.0)) throw DomainError("fit_loglog: x values must not all coincide");
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / m;
  f.r_squared = vy > 1e-300 * m ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
  return f;
}

struct PipelineRow {
  double n = 0.0;
  long long k_n = 0;
  Dominance dominant = Dominance::variance_term;
  double delta_n_sq = 0.0;  // constant-free kernel max{psi^2(1/n), k_n/n}
  double spc_bound = 0.0;   // 4 c_a kernel
  double eps_n = 0.0;       // phi(Theta_phi^{-1}(delta_n))
  bool degenerate = false;
};

struct PipelineReport {
  std::vector<PipelineRow> rows;
  std::optional<RateFit> k_fit;          // log k_n vs log n
  std::optional<RateFit> delta_sq_fit;   // log delta_n^2 vs log n
  std::optional<RateFit> eps_fit;        // log eps_n vs log n
  std::optional<RateFit> eps_logn_fit;   // log eps_n vs log log n
  std::optional<WeylCheck> weyl;
};

namespace detail {
inline std::optional<RateFit> try_fit(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> keep;
  for (const auto& p : pts)
    if (p.first > 0.0 && p.second > 0.0) keep.push_back(p);
  if (keep.size() < 3) return std::nullopt;
  try {
    return fit_loglog(keep);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}
}  // namespace detail

inline PipelineReport run_pipeline(const Scenario& sc, const ScenarioContext& ctx) {
  PipelineReport rep;
  rep.rows.resize(sc.n_grid.size());
  parallel_for(static_cast<long long>(sc.n_grid.size()), [&](long long i) {
    const double n = sc.n_grid[i];
    const TruncationDecision d = select_kn(ctx.psi, ctx.sLg, n, ctx.Jmax, sc.constants);
    PipelineRow& r = rep.rows[i];
    r.n = n;
    r.k_n = d.k_n;
    r.dominant = d.dominant;
    r.delta_n_sq = d.kernel;
    r.spc_bound = d.spc_bound;
    r.eps_n = inverse_rate(ctx.phi, std::sqrt(d.kernel));
    r.degenerate = d.degenerate;
  });
  std::vector<std::pair<double, double>> pk, pd, pe, pl;
  for (const auto& r : rep.rows) {
    pk.emplace_back(r.n, static_cast<double>(r.k_n));
    pd.emplace_back(r.n, r.delta_n_sq);
    pe.emplace_back(r.n, r.eps_n);
    pl.emplace_back(std::log(r.n), r.eps_n);
  }
  rep.k_fit = detail::try_fit(pk);
  rep.delta_sq_fit = detail::try_fit(pd);
  rep.eps_fit = detail::try_fit(pe);
  rep.eps_logn_fit = detail::try_fit(pl);
  rep.weyl = ctx.weyl;
  return rep;
}

inline PipelineReport run_pipeline(const Scenario& sc) { return run_pipeline(sc, build_context(sc)); }

struct AnalyticPriorReport {
  PipelineReport pipeline;
  bool all_regularization_bias = true;
  std::vector<double> k_ratio;  // k_n / ((log n)/(xi_prior + 2 gamma))^{1/p}
  double delta_sq_slope = 0.0;
  double predicted_slope = 0.0;  // -2 gamma / (2 gamma + xi_prior)
};

inline AnalyticPriorReport run_analytic_prior_scenario(const Scenario& sc) {
  if (sc.prior.family() != SpectrumFamily::analytic) throw ConfigError("prior", "must be analytic");
  if (sc.forward.family() != SpectrumFamily::exponential) throw ConfigError("forward", "must be exponential");
  AnalyticPriorReport out;
  out.pipeline = run_pipeline(sc);
  const double gamma = sc.forward.params()[0], p = sc.forward.params()[1];
  const double xi = sc.prior.params()[1];
  for (const auto& r : out.pipeline.rows) {
    if (r.dominant != Dominance::regularization_bias) out.all_regularization_bias = false;
    out.k_ratio.push_back(static_cast<double>(r.k_n) / std::pow(std::log(r.n) / (xi + 2.0 * gamma), 1.0 / p));
  }
  out.delta_sq_slope = out.pipeline.delta_sq_fit ? out.pipeline.delta_sq_fit->slope : 0.0;
  out.predicted_slope = -2.0 * gamma / (2.0 * gamma + xi);
  return out;
}

struct SimulationRow {
  double n = 0.0;
  long long k_n = 0;
  double eps_n = 0.0;
  double radius = 0.0;
  double probability = 0.0;
};

// Expected posterior mass outside M eps_n per n of `grid`.
inline std::vector<SimulationRow> run_simulation_study(const Scenario& sc, const std::vector<double>& grid, double M,
                                                       long long reps_outer, long long reps_inner,
                                                       std::uint64_t seed) {
  if (sc.mode.type != ModeSpec::Type::commuting_diagonal) {
    throw ConfigError("mode", "simulation requires commuting_diagonal");
  }
  const ScenarioContext ctx = build_context(sc);
  SequenceProblem sp{sc.N, ctx.sH, ctx.sLf, default_truth(ctx.phi, ctx.sH, sc.N, sc.smoothness.R), 1.0};
  std::vector<SimulationRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sp.n = grid[i];
    const TruncationDecision d = select_kn(ctx.psi, ctx.sLg, sp.n, ctx.Jmax, sc.constants);
    if (d.k_n > sp.N) throw ScanExhausted("run_simulation_study: k_n exceeds ambient dimension N");
    SimulationRow r;
    r.n = sp.n;
    r.k_n = d.k_n;
    r.eps_n = inverse_rate(ctx.phi, std::sqrt(d.kernel));
    r.radius = M * r.eps_n;
    r.probability = contraction_probability(sp, d.k_n, r.eps_n, M, reps_outer, reps_inner, stream_seed(seed, i));
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<SimulationRow> run_simulation_study(const Scenario& sc, double M, long long reps_outer,
                                                       long long reps_inner, std::uint64_t seed) {
  return run_simulation_study(sc, sc.sim_grid, M, reps_outer, reps_inner, seed);
}

// Presets for the standard examples: moderate (power), severe (exponential),
// analytic prior, mild (logarithmic) and the non-commuting construction.
inline std::vector<Scenario> presets() {
  std::vector<Scenario> v;
  {
    Scenario s;
    s.name = "moderate";
    s.description = "moderately ill-posed: s_j(H)=j^-2p, alpha-regular prior, p=alpha=beta=1";
    s.forward = SpectrumModel::power(1.0);
    s.prior = SpectrumModel::alpha_regular(1.0);
    s.smoothness = {1.0, 0.0, 1.0};
    s.n_grid = decade_grid(3, 9);
    v.push_back(s);
  }
  {
    Scenario s;
    s.name = "severe";
    s.description = "severely ill-posed: s_j(H)=exp(-2 gamma j^p), gamma=p=alpha=beta=1";
    s.forward = SpectrumModel::exponential(1.0, 1.0);
    s.prior = SpectrumModel::alpha_regular(1.0);
    s.smoothness = {1.0, 0.0, 1.0};
    s.n_grid = decade_grid(6, 18);
    s.N = 200;
    v.push_back(s);
  }
  {
    Scenario s = v.back();
    s.name = "severe-rough-prior";
    s.description = "severely ill-posed with alpha=2 > beta=1";
    s.prior = SpectrumModel::alpha_regular(2.0);
    v.push_back(s);
  }
  {
    Scenario s = v.back();
    s.name = "severe-analytic";
    s.description = "severely ill-posed with analytic prior j^-alpha exp(-xi j^p), gamma=p=alpha=xi=beta=1";
    s.prior = SpectrumModel::analytic(1.0, 1.0, 1.0);
    v.push_back(s);
  }
  {
    Scenario s;
    s.name = "mild";
    s.description = "mildly ill-posed: s_j(H)=log^-2p(j+1), p=alpha=beta=1";
    s.forward = SpectrumModel::logarithmic(1.0);
    s.prior = SpectrumModel::alpha_regular(1.0);
    s.smoothness = {1.0, 0.0, 1.0};
    s.n_grid = decade_grid(6, 18);
    v.push_back(s);
  }
  {
    Scenario s;
    s.name = "noncommuting";
    s.description = "Lambda^f = H^a (I + eps S) H^a, power forward p=1, a=0.75, eps=0.5, N=200";
    s.forward = SpectrumModel::power(1.0);
    s.prior = SpectrumModel::alpha_regular(1.0);
    s.smoothness = {1.0, 0.0, 1.0};
    s.mode = {ModeSpec::Type::noncommuting_dense, 0.5, 7, 200, 0.75};
    s.n_grid = decade_grid(3, 7);
    s.N = 200;
    v.push_back(s);
  }
  return v;
}

inline std::optional<Scenario> find_preset(const std::string& name) {
  for (auto& s : presets())
    if (s.name == name) return s;
  return std::nullopt;
}

}  // namespace tgprior
