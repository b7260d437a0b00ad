// Command-line front end: rs-curve, ric, phase-diagram, emc, wham, oracle,
// compare. Flat key=value configs with --set overrides; every run emits a
// manifest echoing the fully-resolved configuration.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ric/combinatorics.hpp"
#include "ric/config.hpp"
#include "ric/csvio.hpp"
#include "ric/dos_wham.hpp"
#include "ric/emc.hpp"
#include "ric/ensemble.hpp"
#include "ric/errors.hpp"
#include "ric/ric_bounds.hpp"
#include "ric/rs_solver.hpp"
#include "ric/version.hpp"

namespace {

using namespace ric;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "key=value configuration file");
  cmd->add_option("--set", a.overrides, "override, repeatable: --set key=value")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", a.seed, "RNG seed (mandatory for emc and oracle)")
      ->each([&a](const std::string&) { a.seed_given = true; });
  cmd->add_option("--threads", a.threads,
                  "worker threads, 0 = available parallelism");
}

RunConfig load_config(const CommonArgs& a) {
  RunConfig cfg;
  if (!a.config_path.empty()) cfg = RunConfig::from_file(a.config_path);
  for (const std::string& kv : a.overrides) cfg.apply_override(kv);
  if (a.seed_given) cfg.set("seed", std::to_string(a.seed));
  return cfg;
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
  const std::string dir = cfg.get_string("output_dir", ".");
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::filesystem::filesystem_error& e) {
    throw IoError("cannot create output_dir '" + dir + "': " + e.what());
  }
  return (std::filesystem::path(dir) / file).string();
}

void emit_manifest(const RunConfig& cfg, const std::string& command,
                   const std::string& file, const Metadata& extras) {
  Metadata m;
  for (const auto& [k, v] : cfg.entries()) m[k] = v;
  m["command"] = command;
  m["tool"] = kToolName;
  m["tool_version"] = kVersion;
  m["config_hash"] = cfg.config_hash();
  for (const auto& [k, v] : extras) m[k] = v;
  write_manifest(out_path(cfg, file), m);
}

Metadata base_meta(const RunConfig& cfg, const std::string& command) {
  Metadata m;
  m["command"] = command;
  m["config_hash"] = cfg.config_hash();
  return m;
}

SolveOptions solve_options_from(const RunConfig& cfg) {
  SolveOptions o;
  o.tol = cfg.get_double("tol", o.tol);
  o.max_iter = static_cast<int>(cfg.get_long("max_iter", o.max_iter));
  o.damping = cfg.get_double("damping", o.damping);
  o.quad_nodes = static_cast<int>(cfg.get_long("quad_nodes", o.quad_nodes));
  return o;
}

void default_solver_keys(RunConfig& cfg) {
  const SolveOptions d;
  if (!cfg.has("tol")) cfg.set("tol", fmt(d.tol));
  if (!cfg.has("max_iter")) cfg.set("max_iter", std::to_string(d.max_iter));
  if (!cfg.has("damping")) cfg.set("damping", fmt(d.damping));
  if (!cfg.has("quad_nodes")) cfg.set("quad_nodes", std::to_string(d.quad_nodes));
}

CurveOptions curve_options_from(const RunConfig& cfg) {
  CurveOptions o;
  o.mu_start = cfg.get_double("mu_start", o.mu_start);
  o.growth = cfg.get_double("growth", o.growth);
  o.sigma_margin = cfg.get_double("sigma_margin", o.sigma_margin);
  o.mu_cap = cfg.get_double("mu_cap", o.mu_cap);
  o.lambda_bracket = cfg.get_double("lambda_bracket", o.lambda_bracket);
  o.sigma_tol = cfg.get_double("sigma_tol", o.sigma_tol);
  return o;
}

void default_curve_keys(RunConfig& cfg) {
  const CurveOptions d;
  if (!cfg.has("mu_start")) cfg.set("mu_start", fmt(d.mu_start));
  if (!cfg.has("growth")) cfg.set("growth", fmt(d.growth));
  if (!cfg.has("sigma_margin")) cfg.set("sigma_margin", fmt(d.sigma_margin));
  if (!cfg.has("mu_cap")) cfg.set("mu_cap", fmt(d.mu_cap));
  if (!cfg.has("lambda_bracket")) cfg.set("lambda_bracket", fmt(d.lambda_bracket));
  if (!cfg.has("sigma_tol")) cfg.set("sigma_tol", fmt(d.sigma_tol));
}

const std::set<std::string> kSolverKeys = {"tol", "max_iter", "damping",
                                           "quad_nodes"};
const std::set<std::string> kCurveKeys = {"mu_start",      "growth",
                                          "sigma_margin",  "mu_cap",
                                          "lambda_bracket", "sigma_tol"};

std::set<std::string> with(std::set<std::string> s,
                           std::initializer_list<std::string> more) {
  for (const auto& k : more) s.insert(k);
  return s;
}

std::set<std::string> merged(const std::set<std::string>& a,
                             const std::set<std::string>& b) {
  std::set<std::string> s = a;
  s.insert(b.begin(), b.end());
  return s;
}

// ---------------------------------------------------------------- rs-curve

void cmd_rs_curve(RunConfig cfg) {
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  default_solver_keys(cfg);
  if (!cfg.has("mu_min")) cfg.set("mu_min", "0.001");
  if (!cfg.has("mu_max")) cfg.set("mu_max", "1000");
  if (!cfg.has("mu_steps")) cfg.set("mu_steps", "40");
  if (!cfg.has("branch")) cfg.set("branch", "both");
  cfg.require_known(merged(kSolverKeys,
                           {"alpha", "rho", "mu_min", "mu_max", "mu_steps",
                            "branch", "output_dir"}));
  const double alpha = cfg.get_double("alpha");
  const double rho = cfg.get_double("rho");
  const double mu_min = cfg.get_double("mu_min");
  const double mu_max = cfg.get_double("mu_max");
  const int mu_steps = static_cast<int>(cfg.get_long("mu_steps"));
  if (mu_steps < 1) throw ConfigError("mu_steps must be >= 1");
  if (!(mu_min > 0.0) || !(mu_max >= mu_min))
    throw ConfigError("need 0 < mu_min <= mu_max");
  const std::string branch = cfg.get_string("branch");
  if (branch != "both" && branch != "min" && branch != "max")
    throw ConfigError("branch must be both, min or max");
  const SolveOptions opts = solve_options_from(cfg);

  std::vector<RsPoint> rows;
  std::vector<std::pair<double, std::string>> failures;
  int requested = 0;
  for (int sign : {-1, +1}) {
    if (sign < 0 && branch == "min") continue;
    if (sign > 0 && branch == "max") continue;
    const auto grid = geometric_grid(mu_min, mu_max, mu_steps, sign);
    requested += static_cast<int>(grid.size());
    RsCurve curve = rs_curve(alpha, rho, grid, opts, true);
    rows.insert(rows.end(), curve.points.begin(), curve.points.end());
    failures.insert(failures.end(), curve.failures.begin(),
                    curve.failures.end());
  }
  std::sort(rows.begin(), rows.end(),
            [](const RsPoint& a, const RsPoint& b) { return a.mu < b.mu; });

  Metadata meta = base_meta(cfg, "rs-curve");
  meta["alpha"] = fmt(alpha);
  meta["rho"] = fmt(rho);
  const std::string csv = out_path(cfg, "rs_curve.csv");
  write_rs_csv(csv, rows, meta);
  write_entropy_plot_script(out_path(cfg, "entropy_plot.gp"), "rs_curve.csv",
                            alpha, rho);

  Metadata extras;
  extras["points_written"] = std::to_string(rows.size());
  extras["points_requested"] = std::to_string(requested);
  extras["points_failed"] = std::to_string(failures.size());
  for (std::size_t i = 0; i < failures.size() && i < 8; ++i)
    extras["failed_mu_" + std::to_string(i)] = fmt(failures[i].first);
  emit_manifest(cfg, "rs-curve", "rs_curve_manifest.txt", extras);

  for (const auto& [mu, why] : failures)
    std::cerr << "rs-curve: mu=" << fmt(mu) << " failed: " << why << "\n";
  if (failures.size() * 10 > static_cast<std::size_t>(requested))
    throw Error("rs-curve: more than 10% of grid points failed (" +
                std::to_string(failures.size()) + "/" +
                std::to_string(requested) + ")");
  std::cout << "rs-curve: wrote " << rows.size() << " points to " << csv
            << "\n";
}

// --------------------------------------------------------------------- ric

void cmd_ric(RunConfig cfg) {
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  default_solver_keys(cfg);
  default_curve_keys(cfg);
  const double alpha_peek = cfg.get_double("alpha", 0.5);
  if (!cfg.has("alpha")) cfg.set("alpha", fmt(alpha_peek));
  if (!cfg.has("rho_min")) cfg.set("rho_min", fmt(0.05 * alpha_peek));
  if (!cfg.has("rho_max")) cfg.set("rho_max", fmt(0.5 * alpha_peek));
  if (!cfg.has("rho_steps")) cfg.set("rho_steps", "10");
  cfg.require_known(merged(merged(kSolverKeys, kCurveKeys),
                           {"alpha", "rho_min", "rho_max", "rho_steps",
                            "output_dir"}));
  const double alpha = cfg.get_double("alpha");
  const double rho_min = cfg.get_double("rho_min");
  const double rho_max = cfg.get_double("rho_max");
  const int rho_steps = static_cast<int>(cfg.get_long("rho_steps"));
  if (rho_steps < 1) throw ConfigError("rho_steps must be >= 1");
  if (!(rho_min > 0.0) || !(rho_max >= rho_min))
    throw ConfigError("need 0 < rho_min <= rho_max");
  if (rho_max >= alpha)
    throw ConfigError("rho grid must stay below alpha (rho >= alpha rejected)");
  const SolveOptions sopts = solve_options_from(cfg);
  const CurveOptions copts = curve_options_from(cfg);

  std::vector<RicEstimate> rows;
  std::vector<std::pair<double, std::string>> failures;
  for (int i = 0; i < rho_steps; ++i) {
    const double rho =
        rho_steps == 1
            ? rho_min
            : rho_min + (rho_max - rho_min) * i / (rho_steps - 1);
    try {
      rows.push_back(ric::ric(alpha, rho, sopts, copts));
    } catch (const Error& e) {
      failures.emplace_back(rho, e.what());
    }
  }

  Metadata meta = base_meta(cfg, "ric");
  meta["alpha"] = fmt(alpha);
  const std::string csv = out_path(cfg, "ric.csv");
  write_ric_csv(csv, rows, meta);
  write_ric_plot_script(out_path(cfg, "ric_plot.gp"), "ric.csv", alpha);

  Metadata extras;
  extras["rows_written"] = std::to_string(rows.size());
  extras["rows_failed"] = std::to_string(failures.size());
  for (std::size_t i = 0; i < failures.size() && i < 8; ++i)
    extras["failed_rho_" + std::to_string(i)] = fmt(failures[i].first);
  emit_manifest(cfg, "ric", "ric_manifest.txt", extras);

  for (const auto& [rho, why] : failures)
    std::cerr << "ric: rho=" << fmt(rho) << " failed: " << why << "\n";
  if (!failures.empty())
    throw Error("ric: " + std::to_string(failures.size()) +
                " rho value(s) failed");
  std::cout << "ric: wrote " << rows.size() << " rows to " << csv << "\n";
}

// ----------------------------------------------------------- phase-diagram

void cmd_phase_diagram(RunConfig cfg) {
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  default_solver_keys(cfg);
  default_curve_keys(cfg);
  if (!cfg.has("alpha_min")) cfg.set("alpha_min", "0.1");
  if (!cfg.has("alpha_max")) cfg.set("alpha_max", "0.9");
  if (!cfg.has("alpha_steps")) cfg.set("alpha_steps", "9");
  if (!cfg.has("conditions")) cfg.set("conditions", "l0,l1_sym,l1_asym");
  if (!cfg.has("rho_tol")) cfg.set("rho_tol", "0.001");
  cfg.require_known(merged(merged(kSolverKeys, kCurveKeys),
                           {"alpha_min", "alpha_max", "alpha_steps",
                            "conditions", "rho_tol", "output_dir"}));
  const double alpha_min = cfg.get_double("alpha_min");
  const double alpha_max = cfg.get_double("alpha_max");
  const int alpha_steps = static_cast<int>(cfg.get_long("alpha_steps"));
  if (alpha_steps < 1) throw ConfigError("alpha_steps must be >= 1");
  if (!(alpha_min > 0.0) || !(alpha_max >= alpha_min) || alpha_max > 1.0)
    throw ConfigError("need 0 < alpha_min <= alpha_max <= 1");
  std::vector<double> alphas(alpha_steps);
  for (int i = 0; i < alpha_steps; ++i)
    alphas[i] = alpha_steps == 1 ? alpha_min
                                 : alpha_min + (alpha_max - alpha_min) * i /
                                                   (alpha_steps - 1);
  std::vector<Condition> conditions;
  for (const std::string& tok :
       {std::string("l0"), std::string("l1_sym"), std::string("l1_asym")}) {
    if (cfg.get_string("conditions").find(tok) != std::string::npos)
      conditions.push_back(condition_from_string(tok));
  }
  if (conditions.empty()) throw ConfigError("conditions selected none");
  const SolveOptions sopts = solve_options_from(cfg);
  const CurveOptions copts = curve_options_from(cfg);
  PhaseOptions popts;
  popts.rho_tol = cfg.get_double("rho_tol");

  std::map<Condition, std::vector<double>> rho_star;
  Metadata extras;
  bool monotone_warning = false;
  for (Condition c : conditions) {
    PhaseBoundary pb = phase_boundary(alphas, c, sopts, copts, popts);
    std::vector<double> col(alphas.size(), std::nan(""));
    for (const auto& [a, r] : pb.points) {
      for (std::size_t i = 0; i < alphas.size(); ++i)
        if (std::abs(alphas[i] - a) < 1e-12) col[i] = r;
    }
    for (std::size_t i = 1; i < col.size(); ++i)
      if (std::isfinite(col[i - 1]) && std::isfinite(col[i]) &&
          col[i] < col[i - 1])
        monotone_warning = true;
    rho_star[c] = std::move(col);
    extras["failures_" + to_string(c)] = std::to_string(pb.failures.size());
    for (const auto& [a, why] : pb.failures)
      std::cerr << "phase-diagram[" << to_string(c) << "]: alpha=" << fmt(a)
                << " failed: " << why << "\n";
  }

  Metadata meta = base_meta(cfg, "phase-diagram");
  const std::string csv = out_path(cfg, "phase.csv");
  write_phase_csv(csv, alphas, rho_star, meta);
  write_phase_plot_script(out_path(cfg, "phase_plot.gp"), "phase.csv");
  extras["monotone_warning"] = monotone_warning ? "1" : "0";
  emit_manifest(cfg, "phase-diagram", "phase_manifest.txt", extras);
  if (monotone_warning)
    std::cerr << "phase-diagram: warning: rho*(alpha) not monotone "
                 "non-decreasing\n";
  std::cout << "phase-diagram: wrote " << alphas.size() << " alphas to " << csv
            << "\n";
}

// --------------------------------------------------------------------- emc

EnsembleSpec ensemble_from(const RunConfig& cfg) {
  EnsembleSpec spec;
  spec.n_cols = cfg.get_long("N");
  spec.alpha = cfg.get_double("alpha");
  spec.normalization =
      normalization_from_string(cfg.get_string("normalization", "raw"));
  spec.seed = cfg.get_u64("seed");
  spec.validate();
  return spec;
}

void require_seed(const RunConfig& cfg) {
  if (!cfg.has("seed"))
    throw ConfigError("this command is stochastic: pass --seed or set seed=");
}

void cmd_emc(RunConfig cfg) {
  require_seed(cfg);
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  if (!cfg.has("normalization")) cfg.set("normalization", "raw");
  if (!cfg.has("branch")) cfg.set("branch", "min");
  if (!cfg.has("mu_lo")) cfg.set("mu_lo", "0.02");
  if (!cfg.has("mu_hi")) cfg.set("mu_hi", "3");
  if (!cfg.has("rungs")) cfg.set("rungs", "24");
  if (!cfg.has("exchange_interval")) cfg.set("exchange_interval", "1");
  if (!cfg.has("burn_in")) cfg.set("burn_in", "0");  // 0 -> 20% of sweeps
  if (!cfg.has("bins")) cfg.set("bins", "200");
  if (!cfg.has("lambda_lo")) cfg.set("lambda_lo", "0");
  if (!cfg.has("lambda_hi")) cfg.set("lambda_hi", "4");
  if (!cfg.has("blocks")) cfg.set("blocks", "20");
  if (!cfg.has("record_subsets")) cfg.set("record_subsets", "false");
  cfg.require_known({"N", "S", "alpha", "normalization", "seed", "branch",
                     "mu_lo", "mu_hi", "rungs", "exchange_interval", "sweeps",
                     "burn_in", "bins", "lambda_lo", "lambda_hi", "blocks",
                     "record_subsets", "output_dir"});
  const EnsembleSpec spec = ensemble_from(cfg);
  const int s = static_cast<int>(cfg.get_long("S"));
  const Branch branch = branch_from_string(cfg.get_string("branch"));
  const Ladder ladder = geometric_ladder(
      cfg.get_double("mu_lo"), cfg.get_double("mu_hi"),
      static_cast<int>(cfg.get_long("rungs")), branch,
      static_cast<int>(cfg.get_long("exchange_interval")));
  EmcOptions opts;
  opts.sweeps = cfg.get_long("sweeps");
  opts.burn_in = cfg.get_long("burn_in");
  opts.bins = static_cast<int>(cfg.get_long("bins"));
  opts.lambda_lo = cfg.get_double("lambda_lo");
  opts.lambda_hi = cfg.get_double("lambda_hi");
  opts.seed = cfg.get_u64("seed");
  opts.blocks = static_cast<int>(cfg.get_long("blocks"));
  opts.record_subsets = cfg.get_bool("record_subsets", false);

  const MeasurementMatrix mat = generate(spec);
  const EmcResult res = run_emc(mat, s, ladder, opts);

  Metadata meta = base_meta(cfg, "emc");
  meta["alpha"] = fmt(spec.alpha);
  meta["rho"] = fmt(static_cast<double>(s) / spec.n_cols);
  meta["seed"] = std::to_string(spec.seed);
  std::vector<std::string> files;
  for (int r = 0; r < ladder.rungs(); ++r) {
    char name[64];
    std::snprintf(name, sizeof(name), "emc_hist_rung%03d.csv", r);
    Metadata m = meta;
    m["rung"] = std::to_string(r);
    write_histogram(out_path(cfg, name), res.histograms[r], m);
    files.push_back(name);
  }

  Metadata extras;
  extras["measured_sweeps"] = std::to_string(res.measured_sweeps);
  extras["grid_extended_warning"] = res.grid_extended_warning ? "1" : "0";
  extras["low_exchange_warning"] = res.low_exchange_warning ? "1" : "0";
  extras["lambda_lowest_seen"] = fmt(res.lambda_lowest_seen);
  extras["lambda_highest_seen"] = fmt(res.lambda_highest_seen);
  for (std::size_t r = 0; r < res.move_acceptance.size(); ++r)
    extras["move_acceptance_rung_" + std::to_string(r)] =
        fmt(res.move_acceptance[r]);
  for (std::size_t p = 0; p < res.exchange_acceptance.size(); ++p)
    extras["exchange_acceptance_pair_" + std::to_string(p)] =
        fmt(res.exchange_acceptance[p]);
  emit_manifest(cfg, "emc", "emc_manifest.txt", extras);

  if (res.grid_extended_warning)
    std::cerr << "emc: warning: histogram grid extended to cover samples\n";
  if (res.low_exchange_warning)
    std::cerr << "emc: warning: an adjacent-rung exchange rate fell below "
                 "0.1; consider a denser ladder\n";
  std::cout << "emc: wrote " << files.size() << " rung histograms to "
            << cfg.get_string("output_dir") << "\n";
}

// -------------------------------------------------------------------- wham

void cmd_wham(RunConfig cfg, const std::vector<std::string>& positional) {
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  if (!cfg.has("wham_tol")) cfg.set("wham_tol", "1e-10");
  if (!cfg.has("wham_max_iter")) cfg.set("wham_max_iter", "100000");
  if (!cfg.has("min_support")) cfg.set("min_support", "100");
  std::string inputs = cfg.get_string("inputs", "");
  for (const std::string& p : positional)
    inputs += (inputs.empty() ? "" : ",") + p;
  if (inputs.empty())
    throw ConfigError("wham: pass histogram files as arguments or inputs=");
  cfg.set("inputs", inputs);
  cfg.require_known(
      {"inputs", "wham_tol", "wham_max_iter", "min_support", "output_dir"});

  std::vector<EnergyHistogram> hists;
  Metadata first_meta;
  std::string cur;
  std::vector<std::string> paths;
  for (char c : inputs + ",") {
    if (c == ',') {
      if (!cur.empty()) paths.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  for (const std::string& p : paths) {
    HistogramFile hf = read_histogram(p);
    if (hists.empty()) first_meta = hf.meta;
    hists.push_back(std::move(hf.histogram));
  }
  WhamOptions wopts;
  wopts.tol = cfg.get_double("wham_tol");
  wopts.max_iter = static_cast<int>(cfg.get_long("wham_max_iter"));
  wopts.min_support_samples = cfg.get_long("min_support");

  const DensityOfStates dos = wham_solve(hists, wopts);
  bool edge = false;
  const double phi0 = free_entropy_from_dos(dos, 0.0, &edge);

  Metadata meta = base_meta(cfg, "wham");
  if (first_meta.count("alpha")) meta["alpha"] = first_meta["alpha"];
  meta["rho"] =
      fmt(static_cast<double>(dos.subset_size) / static_cast<double>(dos.n_cols));
  const std::string csv = out_path(cfg, "dos.csv");
  write_dos(csv, dos, meta);

  Metadata extras;
  extras["rungs"] = std::to_string(hists.size());
  extras["phi_mu0"] = fmt(phi0);
  extras["phi_mu0_edge_warning"] = edge ? "1" : "0";
  long long supported = 0;
  for (char sbit : dos.support) supported += sbit ? 1 : 0;
  extras["supported_bins"] = std::to_string(supported);
  emit_manifest(cfg, "wham", "wham_manifest.txt", extras);
  std::cout << "wham: wrote density of " << dos.bins() << " bins ("
            << supported << " supported) to " << csv << "\n";
}

// ------------------------------------------------------------------ oracle

void cmd_oracle(RunConfig cfg) {
  require_seed(cfg);
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  if (!cfg.has("normalization")) cfg.set("normalization", "raw");
  if (!cfg.has("branch")) cfg.set("branch", "min");
  if (!cfg.has("bins")) cfg.set("bins", "200");
  if (!cfg.has("lambda_lo")) cfg.set("lambda_lo", "0");
  if (!cfg.has("lambda_hi")) cfg.set("lambda_hi", "4");
  cfg.require_known({"N", "S", "alpha", "normalization", "seed", "branch",
                     "bins", "lambda_lo", "lambda_hi", "output_dir"});
  const EnsembleSpec spec = ensemble_from(cfg);
  const int s = static_cast<int>(cfg.get_long("S"));
  const Branch branch = branch_from_string(cfg.get_string("branch"));
  BinGrid grid;
  grid.lambda_lo = cfg.get_double("lambda_lo");
  grid.lambda_hi = cfg.get_double("lambda_hi");
  grid.bins = static_cast<int>(cfg.get_long("bins"));

  const MeasurementMatrix mat = generate(spec);
  const EnumerationResult res = enumerate_exact(mat, s, branch, grid);

  Metadata meta = base_meta(cfg, "oracle");
  meta["alpha"] = fmt(spec.alpha);
  meta["rho"] = fmt(static_cast<double>(s) / spec.n_cols);
  meta["seed"] = std::to_string(spec.seed);
  const std::string csv = out_path(cfg, "oracle_dos.csv");
  write_dos(csv, res.dos, meta);

  Metadata extras;
  extras["lambda_star_min"] = fmt(res.lambda_min_star);
  extras["lambda_star_max"] = fmt(res.lambda_max_star);
  // Enumeration is guarded at 1e7 subsets, so the count is exactly
  // representable; report it as the integer it is.
  const long long n_subsets =
      std::llround(std::exp(res.dos.log_normalization));
  extras["subsets"] = std::to_string(n_subsets);
  emit_manifest(cfg, "oracle", "oracle_manifest.txt", extras);
  std::cout << "oracle: enumerated " << n_subsets
            << " subsets; lambda*_min=" << fmt(res.lambda_min_star)
            << " lambda*_max=" << fmt(res.lambda_max_star) << "\n";
}

// ----------------------------------------------------------------- compare

double meta_double(const Metadata& m, const std::string& key,
                   const std::string& who) {
  const auto it = m.find(key);
  if (it == m.end())
    throw ConfigError("compare: " + who + " is missing '" + key +
                      "' in its metadata comment");
  return std::stod(it->second);
}

void cmd_compare(RunConfig cfg, const std::vector<std::string>& positional) {
  if (!cfg.has("output_dir")) cfg.set("output_dir", ".");
  if (positional.size() >= 1 && !cfg.has("rs_csv"))
    cfg.set("rs_csv", positional[0]);
  if (positional.size() >= 2 && !cfg.has("dos_csv"))
    cfg.set("dos_csv", positional[1]);
  cfg.require_known({"rs_csv", "dos_csv", "output_dir"});
  const RsCsv rs = read_rs_csv(cfg.get_string("rs_csv"));
  const DosFile df = read_dos(cfg.get_string("dos_csv"));

  const double a_rs = meta_double(rs.meta, "alpha", "rs_csv");
  const double r_rs = meta_double(rs.meta, "rho", "rs_csv");
  const double a_dos = meta_double(df.meta, "alpha", "dos_csv");
  const double r_dos = meta_double(df.meta, "rho", "dos_csv");
  if (std::abs(a_rs - a_dos) > 1e-9 || std::abs(r_rs - r_dos) > 1e-9)
    throw ConfigError("compare: (alpha, rho) headers disagree: rs=(" +
                      fmt(a_rs) + ", " + fmt(r_rs) + ") dos=(" + fmt(a_dos) +
                      ", " + fmt(r_dos) + ")");

  // RS rows of the DOS branch, as a lambda-sorted interpolation table.
  std::vector<std::pair<double, double>> table;
  for (const RsPoint& p : rs.points)
    if (branch_for_mu(p.mu) == df.dos.branch)
      table.emplace_back(p.lambda, p.sigma);
  if (table.size() < 2)
    throw ConfigError("compare: rs_csv has no rows for branch " +
                      to_string(df.dos.branch));
  std::sort(table.begin(), table.end());

  auto interp = [&table](double x, double* y) {
    if (x < table.front().first || x > table.back().first) return false;
    auto it = std::lower_bound(
        table.begin(), table.end(), std::make_pair(x, -1e300));
    if (it == table.begin()) {
      *y = it->second;
      return true;
    }
    const auto lo = it - 1;
    const double t = (x - lo->first) / (it->first - lo->first);
    *y = lo->second + t * (it->second - lo->second);
    return true;
  };

  std::vector<ComparePoint> rows;
  const double nd = static_cast<double>(df.dos.n_cols);
  (void)nd;
  for (int b = 0; b < df.dos.bins(); ++b) {
    if (!df.dos.support[b]) continue;
    double sig_rs = 0.0;
    if (!interp(df.dos.bin_centers[b], &sig_rs)) continue;
    ComparePoint p;
    p.lambda = df.dos.bin_centers[b];
    p.sigma_rs = sig_rs;
    p.sigma_emc = df.dos.log_counts[b] / static_cast<double>(df.dos.n_cols);
    rows.push_back(p);
  }

  Metadata meta = base_meta(cfg, "compare");
  meta["alpha"] = fmt(a_rs);
  meta["rho"] = fmt(r_rs);
  meta["branch"] = to_string(df.dos.branch);
  const std::string csv = out_path(cfg, "compare.csv");
  write_compare_csv(csv, rows, meta);
  write_compare_plot_script(out_path(cfg, "compare_plot.gp"), "compare.csv",
                            a_rs, r_rs);
  Metadata extras;
  extras["joined_bins"] = std::to_string(rows.size());
  emit_manifest(cfg, "compare", "compare_manifest.txt", extras);
  std::cout << "compare: joined " << rows.size() << " bins into " << csv
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) +
               " - restricted isometry constants of Gaussian measurement "
               "matrices via replica-symmetric theory and exchange Monte "
               "Carlo"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  CommonArgs a_rs, a_ric, a_phase, a_emc, a_wham, a_oracle, a_compare;
  std::vector<std::string> wham_inputs, compare_inputs;

  CLI::App* c_rs = app.add_subcommand(
      "rs-curve", "entropy curve sigma(lambda) from the saddle equations");
  add_common(c_rs, a_rs);
  CLI::App* c_ric =
      app.add_subcommand("ric", "RIC table over a rho grid at fixed alpha");
  add_common(c_ric, a_ric);
  CLI::App* c_phase = app.add_subcommand(
      "phase-diagram", "recovery phase boundaries rho*(alpha)");
  add_common(c_phase, a_phase);
  CLI::App* c_emc = app.add_subcommand(
      "emc", "exchange Monte Carlo over column subsets (histograms per rung)");
  add_common(c_emc, a_emc);
  CLI::App* c_wham = app.add_subcommand(
      "wham", "multihistogram density-of-states reconstruction");
  add_common(c_wham, a_wham);
  c_wham->add_option("histograms", wham_inputs, "per-rung histogram files");
  CLI::App* c_oracle = app.add_subcommand(
      "oracle", "exhaustive enumeration oracle for small instances");
  add_common(c_oracle, a_oracle);
  CLI::App* c_compare = app.add_subcommand(
      "compare", "join an RS curve CSV with a DOS CSV for overlay plots");
  add_common(c_compare, a_compare);
  c_compare->add_option("files", compare_inputs, "rs_curve.csv dos.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_rs) {
      apply_threads(a_rs.threads);
      cmd_rs_curve(load_config(a_rs));
    } else if (*c_ric) {
      apply_threads(a_ric.threads);
      cmd_ric(load_config(a_ric));
    } else if (*c_phase) {
      apply_threads(a_phase.threads);
      cmd_phase_diagram(load_config(a_phase));
    } else if (*c_emc) {
      apply_threads(a_emc.threads);
      cmd_emc(load_config(a_emc));
    } else if (*c_wham) {
      apply_threads(a_wham.threads);
      cmd_wham(load_config(a_wham), wham_inputs);
    } else if (*c_oracle) {
      apply_threads(a_oracle.threads);
      cmd_oracle(load_config(a_oracle));
    } else if (*c_compare) {
      apply_threads(a_compare.threads);
      cmd_compare(load_config(a_compare), compare_inputs);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
