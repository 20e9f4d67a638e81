#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tgprior/config.hpp>
#include <tgprior/tgprior.hpp>

namespace tgprior::cli {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kScan = 3 };

struct Options {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string json_out;
  long long reps = 0;
  double M = 5.0;
};

inline Scenario load_scenario(const Options& o) {
  if (!o.config.empty() && !o.scenario.empty()) {
    throw ConfigError("--scenario", "give either --config or --scenario, not both");
  }
  Scenario sc;
  if (!o.config.empty()) {
    try {
      sc = scenario_from_file(o.config);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("--config", e.what());
    }
  } else {
    const std::string name = o.scenario.empty() ? "moderate" : o.scenario;
    auto p = find_preset(name);
    if (!p) throw ConfigError("--scenario", "unknown preset '" + name + "'");
    sc = *p;
  }
  if (o.seed) sc.seed = *o.seed;
  return sc;
}

inline nlohmann::json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"r_squared", f->r_squared}};
}

// Writes the CSV to --out (or `out` when absent) and the JSON summary to
// --json, defaulting to <out>.json when --out is given.
inline void emit(const Options& o, const CsvTable& csv, nlohmann::json summary, std::ostream& out) {
  summary["format_version"] = "1";
  if (o.out.empty()) {
    csv.write(out);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ConfigError("--out", "cannot write '" + o.out + "'");
    csv.write(f);
  }
  const std::string jpath = !o.json_out.empty() ? o.json_out : (o.out.empty() ? "" : o.out + ".json");
  if (!jpath.empty()) {
    std::ofstream f(jpath, std::ios::binary);
    if (!f) throw ConfigError("--json", "cannot write '" + jpath + "'");
    f << summary.dump(2) << '\n';
  }
}

inline nlohmann::json base_summary(const std::string& cmd, const Scenario& sc) {
  return {{"subcommand", cmd}, {"scenario", sc.name}, {"seed", sc.seed}};
}

inline void cmd_truncate(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const ScenarioContext ctx = build_context(sc);
  CsvTable csv({"n", "k_n", "dominant", "kernel", "spc_bound", "delta_n", "degenerate"});
  for (double n : sc.n_grid) {
    const auto d = select_kn(ctx.psi, ctx.sLg, n, ctx.Jmax, sc.constants);
    csv.add(n, d.k_n, dominance_name(d.dominant), d.kernel, d.spc_bound, d.delta_n, d.degenerate);
  }
  auto s = base_summary("truncate", sc);
  s["rows"] = csv.size();
  emit(o, csv, s, out);
}

inline void cmd_rates(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const PipelineReport rep = run_pipeline(sc);
  CsvTable csv({"n", "k_n", "dominant", "delta_sq", "eps"});
  for (const auto& r : rep.rows) csv.add(r.n, r.k_n, dominance_name(r.dominant), r.delta_n_sq, r.eps_n);
  auto s = base_summary("rates", sc);
  s["rows"] = csv.size();
  s["fits"] = {{"k_n_vs_n", fit_json(rep.k_fit)},
               {"delta_sq_vs_n", fit_json(rep.delta_sq_fit)},
               {"eps_vs_n", fit_json(rep.eps_fit)},
               {"eps_vs_log_n", fit_json(rep.eps_logn_fit)}};
  if (rep.weyl) s["weyl"] = {{"ratios", rep.weyl->ratios}, {"within", rep.weyl->within}};
  emit(o, csv, s, out);
}

inline void cmd_spc(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const ScenarioContext ctx = build_context(sc);
  const long long reps = o.reps > 0 ? o.reps : 1000;
  CsvTable csv({"n", "k", "bias_sq", "variance", "spread", "total", "mc_estimate", "mc_stderr"});
  for (std::size_t i = 0; i < sc.n_grid.size(); ++i) {
    const double n = sc.n_grid[i];
    const auto d = select_kn(ctx.psi, ctx.sLg, n, ctx.Jmax, sc.constants);
    SpcReport r;
    McEstimate mc;
    const std::uint64_t seed = stream_seed(sc.seed, i);
    if (ctx.dense) {
      MatrixProblem mp = *ctx.dense;
      mp.n = n;
      r = spc_exact(mp, d.k_n);
      mc = spc_monte_carlo(mp, d.k_n, reps, seed);
    } else {
      SequenceProblem sp{sc.N, ctx.sH, ctx.sLf, default_truth(ctx.phi, ctx.sH, sc.N, sc.smoothness.R), n};
      if (d.k_n > sp.N) throw ScanExhausted("spc: k_n exceeds ambient dimension N");
      r = spc_exact(sp, d.k_n);
      mc = spc_monte_carlo(sp, d.k_n, reps, seed);
    }
    csv.add(n, d.k_n, r.bias_sq, r.variance, r.spread, r.total, mc.estimate, mc.stderr_);
  }
  auto s = base_summary("spc", sc);
  s["rows"] = csv.size();
  s["reps"] = reps;
  emit(o, csv, s, out);
}

inline void cmd_modulus(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const ScenarioContext ctx = build_context(sc);
  CsvTable csv({"delta", "k_delta", "exact", "feasible", "prop_bound", "optimized_bound"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double delta : sc.delta_grid) {
    const auto ob = modulus_bound_optimized(ctx.phi, ctx.sH, delta, sc.constants, ctx.Jmax);
    ModulusResult m;
    if (ctx.dense) {
      m = modulus_numeric(*ctx.dense, SubspaceSpec::singular(ob.k_delta), ctx.dense->f0, delta);
    } else {
      const long long dim = std::max(sc.N, 2 * ob.k_delta);
      m = modulus_exact_diagonal(ctx.sH, default_truth(ctx.phi, ctx.sH, dim, sc.smoothness.R), ob.k_delta, delta);
    }
    const double prop = ob.k_delta >= 1 ? modulus_bound(ctx.phi, ctx.sH, ob.k_delta, delta, sc.constants) : nan;
    csv.add(delta, ob.k_delta, m.value, m.feasible, prop, ob.bound);
  }
  auto s = base_summary("modulus", sc);
  s["rows"] = csv.size();
  s["c7"] = sc.constants.derived_c7();
  emit(o, csv, s, out);
}

inline void cmd_minimax(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const ScenarioContext ctx = build_context(sc);
  CsvTable csv({"n", "k_star", "R_T", "k_n", "kernel"});
  bool boundary = false;
  for (double n : sc.n_grid) {
    const auto mm = truncated_series_minimax(ctx.psi, ctx.sLg, n, ctx.Jmax);
    const auto d = select_kn(ctx.psi, ctx.sLg, n, ctx.Jmax, sc.constants);
    boundary = boundary || mm.at_boundary;
    csv.add(n, mm.k_star, mm.R_T, d.k_n, d.kernel);
  }
  auto s = base_summary("minimax", sc);
  s["rows"] = csv.size();
  s["minimizer_at_scan_boundary"] = boundary;
  emit(o, csv, s, out);
}

inline void cmd_simulate(const Options& o, std::ostream& out) {
  const Scenario sc = load_scenario(o);
  const long long reps = o.reps > 0 ? o.reps : 200;
  const auto rows = run_simulation_study(sc, o.M, reps, reps, sc.seed);
  CsvTable csv({"n", "k_n", "eps_n", "radius", "probability"});
  for (const auto& r : rows) csv.add(r.n, r.k_n, r.eps_n, r.radius, r.probability);
  auto s = base_summary("simulate", sc);
  s["rows"] = csv.size();
  s["M"] = o.M;
  s["reps_outer"] = reps;
  s["reps_inner"] = reps;
  emit(o, csv, s, out);
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Truncated Gaussian prior laboratory: truncation levels, contraction, moduli and rates"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::string show_name;

  auto add_common = [&](CLI::App* sub, bool with_reps, bool with_M) {
    sub->add_option("--config", o.config, "JSON scenario file");
    sub->add_option("--scenario", o.scenario, "preset name (see `scenario list`)");
    sub->add_option("--seed", seed, "master RNG seed");
    sub->add_option("--out", o.out, "CSV output path (stdout when absent)");
    sub->add_option("--json", o.json_out, "JSON summary path (default <out>.json)");
    if (with_reps) sub->add_option("--reps", o.reps, "Monte Carlo replicates");
    if (with_M) sub->add_option("--M", o.M, "radius multiplier");
  };
  auto* truncate = app.add_subcommand("truncate", "k_n sweep over the n grid");
  add_common(truncate, false, false);
  auto* spc = app.add_subcommand("spc", "exact and Monte Carlo squared posterior contraction");
  add_common(spc, true, false);
  auto* modulus = app.add_subcommand("modulus", "modulus of continuity and bounds over the delta grid");
  add_common(modulus, false, false);
  auto* minimax = app.add_subcommand("minimax", "truncated-series minimax risk sweep");
  add_common(minimax, false, false);
  auto* rates = app.add_subcommand("rates", "k_n -> delta_n -> eps_n pipeline with slope fits");
  add_common(rates, false, false);
  auto* simulate = app.add_subcommand("simulate", "posterior mass outside M eps_n by nested Monte Carlo");
  add_common(simulate, true, true);
  auto* scenario = app.add_subcommand("scenario", "inspect presets");
  scenario->require_subcommand(1);
  auto* list = scenario->add_subcommand("list", "list presets");
  auto* show = scenario->add_subcommand("show", "print a preset as JSON config");
  show->add_option("name", show_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfig;
  }
  for (auto* sub : {truncate, spc, modulus, minimax, rates, simulate}) {
    if (sub->parsed() && sub->count("--seed")) o.seed = seed;
  }

  try {
    if (truncate->parsed()) cmd_truncate(o, out);
    else if (spc->parsed()) cmd_spc(o, out);
    else if (modulus->parsed()) cmd_modulus(o, out);
    else if (minimax->parsed()) cmd_minimax(o, out);
    else if (rates->parsed()) cmd_rates(o, out);
    else if (simulate->parsed()) cmd_simulate(o, out);
    else if (list->parsed()) {
      for (const auto& p : presets()) out << p.name << "\t" << p.description << '\n';
    } else if (show->parsed()) {
      auto p = find_preset(show_name);
      if (!p) throw ConfigError("name", "unknown preset '" + show_name + "'");
      out << scenario_to_json(*p).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ScanExhausted& e) {
    err << "scan exhausted: " << e.what() << '\n';
    return kScan;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace tgprior::cli
