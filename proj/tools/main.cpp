#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "sparselog/io.hpp"
#include "sparselog/posterior.hpp"
#include "sparselog/riccati.hpp"
#include "sparselog/risk.hpp"
#include "sparselog/sweep.hpp"
#include "sparselog/trainers.hpp"
#include "sparselog/verify.hpp"

namespace fs = std::filesystem;
using namespace sparselog;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Settings {
  int d = 50;
  int s = 5;
  int n = 1000;
  int n_val = 10'000;
  std::uint64_t seed = 0;
  std::uint64_t verify_seed = 7;
  std::string algo = "spindly_gd";
  std::vector<std::string> algos{"single_gd", "spindly_gd"};
  double eta = 1.0;
  long steps = 2000;
  double dt = 1e-2;
  double alpha = 0.0;
  double eps = 0.5;
  double eta_conf = 0.05;
  long mcmc_steps = 20'000;
  long burnin = 5'000;
  double target_accept = 0.3;
  std::vector<int> d_list{10, 20, 40, 80};
  std::vector<int> n_list;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int jobs = 1;
  std::string out = "out";
  std::string config;
  std::string suite = "all";
  double tolerance_scale = 1.0;
  std::string kind = "dimension";
  bool coordinates = false;
};

// Option builders shared by the subcommands.
struct Flags {
  CLI::App* app;
  Settings& st;

  void d() { app->add_option("--d", st.d, "ambient dimension")->capture_default_str()->check(CLI::PositiveNumber); }
  void s() { app->add_option("--s", st.s, "support size of the target")->capture_default_str()->check(CLI::PositiveNumber); }
  void n() { app->add_option("--n", st.n, "training sample size")->capture_default_str()->check(CLI::PositiveNumber); }
  void n_val() {
    app->add_option("--n-val", st.n_val, "validation (and test) sample size")
        ->capture_default_str()->check(CLI::PositiveNumber);
  }
  void seed() { app->add_option("--seed", st.seed, "random seed")->capture_default_str(); }
  void eta() {
    app->add_option("--eta", st.eta, "learning rate for gradient descent (dimensionless)")
        ->capture_default_str()->check(CLI::PositiveNumber);
  }
  void steps() {
    app->add_option("--steps", st.steps, "number of descent or integrator steps")
        ->capture_default_str()->check(CLI::PositiveNumber);
  }
  void dt() {
    app->add_option("--dt", st.dt, "integrator step for flows (flow time units)")
        ->capture_default_str()->check(CLI::PositiveNumber);
  }
  void alpha() {
    app->add_option("--alpha", st.alpha, "spindly initialization u = v = alpha; 0 means 1/sqrt(d)")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
  }
  void eps() {
    app->add_option("--eps", st.eps, "relative accuracy defining the stopping time, in (0, 1)")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  }
  void eta_conf() {
    app->add_option("--eta-conf", st.eta_conf, "failure probability of the noise bound, in (0, 1)")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  }
  void mcmc() {
    app->add_option("--mcmc-steps", st.mcmc_steps, "total Metropolis steps including burn-in")
        ->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--burnin", st.burnin, "adaptation steps discarded before sampling")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--target-accept", st.target_accept, "acceptance rate targeted during burn-in")
        ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  }
  void out() { app->add_option("--out", st.out, "output directory")->capture_default_str(); }
  void config() {
    app->add_option("--config", st.config,
                    "JSON file with flat keys named like the flags (without dashes); flags override it");
  }
  void coordinates() {
    app->add_flag("--coordinates", st.coordinates, "add one column per coordinate to trajectory files");
  }
};

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : ",") + p;
  return s;
}

// Command-line tokens equivalent to a flat JSON config.
std::vector<std::string> config_tokens(const std::string& sub, const json& cfg) {
  if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  std::vector<std::string> tokens{sub};
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw std::invalid_argument("config values must be scalars or arrays of scalars");
  };
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
      continue;
    }
    tokens.push_back(flag);
    if (value.is_array()) {
      std::vector<std::string> parts;
      for (const auto& v : value) parts.push_back(scalar(v));
      tokens.push_back(join(parts));
    } else {
      tokens.push_back(scalar(value));
    }
  }
  return tokens;
}

// Records the values of every option given in the last parse.
void capture_given(CLI::App* sub, json& into) {
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name.empty() || opt->count() == 0) continue;
    into[name] = opt->get_expected_min() == 0 ? json("true") : json(join(opt->results()));
  }
}

json defaults_json(CLI::App* sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name.empty()) continue;
    j[name] = opt->get_expected_min() == 0 ? json("false") : json(opt->get_default_str());
  }
  return j;
}

// Same draws as the sweep cells for a given (d, seed).
struct Draws {
  TargetVector target;
  Dataset train;
};

Draws draw(const Settings& st, bool soft = false) {
  const RngStream base(st.seed, static_cast<std::uint64_t>(st.d));
  RngStream r0 = base.substream(0), r1 = base.substream(1);
  TargetVector target = sample_target(st.d, st.s, TargetProfile::flat, r0);
  Dataset train = sample_dataset(target, st.n, r1, soft);
  return {std::move(target), std::move(train)};
}

Dataset draw_validation(const Settings& st, const TargetVector& target) {
  RngStream r2 = RngStream(st.seed, static_cast<std::uint64_t>(st.d)).substream(2);
  return sample_dataset(target, st.n_val, r2, false);
}

int cmd_simulate(const Settings& st, json meta) {
  const Draws dr = draw(st, true);
  const fs::path dir(st.out);
  write_dataset_csv(dir / "data.csv", dr.train);
  meta["target"] = dataset_metadata(dr.target, dr.train);
  meta["bayes_risk"] = bayes_risk();
  write_json(dir / "metadata.json", meta);
  std::cout << "wrote " << (dir / "data.csv").string() << '\n';
  return 0;
}

int cmd_train(const Settings& st, json meta) {
  const Algo algo = parse_algo(st.algo);
  const Draws dr = draw(st);
  const Dataset val = draw_validation(st, dr.target);
  const fs::path dir(st.out);
  Trajectory traj;
  if (algo == Algo::riccati) {
    const EnvelopeModel model = EnvelopeModel::measured(dr.target, dr.train, st.eta_conf);
    traj = riccati_flow(model, st.dt * static_cast<double>(st.steps), st.dt);
  } else {
    const bool descent = algo == Algo::single_gd || algo == Algo::spindly_gd;
    TrainConfig tc;
    tc.dt = descent ? st.eta : st.dt;
    tc.steps = st.steps;
    tc.alpha = st.alpha;
    tc.support = dr.target.support();
    tc.val = &val;
    tc.keep_iterates = st.coordinates;
    traj = train(algo, empirical_objective(dr.train), tc);
  }
  write_trajectory_csv(dir / ("traj_" + to_string(algo) + ".csv"), traj, st.coordinates);
  meta["target"] = dataset_metadata(dr.target, dr.train);
  meta["bayes_risk"] = bayes_risk();
  meta["final_excess_risk"] = excess_risk(traj.final_w, dr.target);
  if (traj.val_loss.size() == traj.size()) {
    const StopSelection sel = early_stop_select(traj);
    meta["early_stop"] = {{"time", sel.time},
                          {"val_loss", sel.val_loss},
                          {"excess_risk", excess_risk(sel.w, dr.target)}};
  }
  write_json(dir / "metadata.json", meta);
  std::cout << to_string(algo) << ": final excess risk " << format_double(meta["final_excess_risk"])
            << '\n';
  return 0;
}

int cmd_envelopes(const Settings& st, json meta) {
  const Draws dr = draw(st);
  const EnvelopeModel model = EnvelopeModel::measured(dr.target, dr.train, st.eta_conf);
  const double T = stopping_time(st.eps, model);
  const SandwichReport sandwich = sandwich_check(model, envelope_grid(T));
  const fs::path dir(st.out);
  write_envelope_csv(dir / "envelopes.csv", sandwich);

  // The (u, v) flow at flow time T/2 corresponds to envelope time T.
  TrainConfig tc = TrainConfig::for_duration(T / 2.0, st.dt);
  tc.alpha = st.alpha;
  tc.support = dr.target.support();
  const Trajectory traj = flow_spindly(empirical_objective(dr.train), tc);
  write_trajectory_csv(dir / "traj_spindly_gf.csv", traj, true);

  double active_err = 0.0, inactive_mass = 0.0;
  const Vec w_star = dr.target.dense();
  for (int i = 0; i < st.d; ++i) {
    const double wi = traj.final_w(i);
    if (model.in_support(i))
      active_err += (wi - w_star(i)) * (wi - w_star(i));
    else
      inactive_mass += wi * wi;
  }
  const BoundReport bound = error_bound(model, st.eps, st.s, st.n, st.eta_conf);
  meta["target"] = dataset_metadata(dr.target, dr.train);
  meta["model"] = to_json(model);
  meta["stopping_time"] = T;
  meta["stopping_time_alternative"] = stopping_time_alternative(st.eps, model);
  meta["flow_time"] = T / 2.0;
  meta["bound"] = to_json(bound);
  meta["active_error"] = active_err;
  meta["inactive_mass"] = inactive_mass;
  meta["active_within_bound"] = active_err <= bound.active_total;
  meta["sandwich"] = {{"violations", sandwich.violations},
                      {"max_violation", sandwich.max_violation},
                      {"a_min", sandwich.a_min},
                      {"a_max", sandwich.a_max},
                      {"ok", sandwich.ok}};
  write_json(dir / "metadata.json", meta);
  std::cout << "stopping time " << format_double(T) << ", sandwich "
            << (sandwich.ok ? "holds" : "violated") << " (" << sandwich.violations
            << " violations)\n";
  return sandwich.ok ? 0 : kExitCheckFailed;
}

int cmd_posterior(const Settings& st, json meta) {
  const Draws dr = draw(st);
  RngStream r2 = RngStream(st.seed, static_cast<std::uint64_t>(st.d)).substream(2);
  SamplerConfig sc;
  sc.steps = st.mcmc_steps;
  sc.burn_in = st.burnin;
  sc.target_accept = st.target_accept;
  const PosteriorChain chain = sample_posterior(dr.train, TangentChart(dr.target), sc, r2);
  const std::vector<double> excess = chain_excess(chain, dr.target);
  const PosteriorEstimate est = batch_means(excess);
  const fs::path dir(st.out);
  write_chain_csv(dir / "chain.csv", chain, excess);
  meta["target"] = dataset_metadata(dr.target, dr.train);
  meta["posterior_excess_risk"] = to_json(est);
  meta["acceptance_rate"] = chain.acceptance_rate;
  meta["step"] = chain.step;
  meta["warnings"] = chain.warnings;
  write_json(dir / "metadata.json", meta);
  std::cout << "posterior excess risk " << format_double(est.mean) << " +- "
            << format_double(est.std_error) << ", acceptance " << format_double(chain.acceptance_rate)
            << '\n';
  for (const auto& w : chain.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int cmd_sweep(const Settings& st, json meta) {
  ExperimentConfig cfg;
  cfg.d_list = st.kind == "curves" ? std::vector<int>{st.d} : st.d_list;
  cfg.s = st.s;
  cfg.n = st.n;
  cfg.n_list = st.n_list;
  cfg.n_test = st.n_val;
  cfg.seeds = st.kind == "curves" ? std::vector<std::uint64_t>{st.seed} : st.seeds;
  cfg.algos.clear();
  for (const auto& a : st.algos) cfg.algos.push_back(parse_algo(a));
  cfg.eta = st.eta;
  cfg.steps = st.steps;
  cfg.alpha = st.alpha;
  cfg.mcmc_steps = st.mcmc_steps;
  cfg.burn_in = st.burnin;
  cfg.target_accept = st.target_accept;
  cfg.jobs = st.jobs;
  cfg.coordinates = st.coordinates;
  cfg.out_dir = st.out;
  cfg.validate();
  const fs::path dir(st.out);
  if (st.kind == "curves") {
    const CurvesResult r = run_training_curves(cfg);
    for (std::size_t k = 0; k < r.trajectories.size(); ++k)
      std::cout << to_string(r.trajectories[k].algo) << ": early stop at t = "
                << format_double(r.selections[k].time) << ", val loss "
                << format_double(r.selections[k].val_loss) << '\n';
  } else if (st.kind == "dimension") {
    const SweepResult r = run_dimension_sweep(cfg);
    for (const auto& row : r.summary)
      std::cout << "d=" << row.d << ' ' << to_string(row.algo) << ": "
                << format_double(row.mean_excess) << " +- " << format_double(row.stderr_excess) << '\n';
    for (std::size_t k = 0; k < r.slopes.size(); ++k)
      std::cout << to_string(cfg.algos[k]) << " log-log slope " << format_double(r.slopes[k]) << '\n';
  } else {
    const PosteriorSweepResult r = run_posterior_sweep(cfg);
    for (const auto& row : r.summary)
      std::cout << "n=" << row.n << " d=" << row.d << ": " << format_double(row.mean_excess) << " +- "
                << format_double(row.stderr_excess) << '\n';
    for (double e : r.exponents) std::cout << "exponent vs d-1: " << format_double(e) << '\n';
  }
  write_json(dir / "metadata.json", meta);
  return 0;
}

int cmd_verify(const Settings& st, json meta) {
  VerifyConfig vc;
  std::string part;
  for (char c : st.suite + ",") {
    if (c == ',') {
      if (!part.empty()) vc.suites.push_back(part);
      part.clear();
    } else {
      part += c;
    }
  }
  vc.seed = st.verify_seed;
  vc.tolerance_scale = st.tolerance_scale;
  const std::vector<OracleReport> reports = run_all(vc);
  for (const auto& r : reports)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  discrepancy "
              << format_double(r.discrepancy) << "  tolerance " << format_double(r.tolerance) << '\n';
  const fs::path dir(st.out);
  write_json(dir / "report.json", to_json(reports));
  meta["all_passed"] = all_passed(reports);
  write_json(dir / "metadata.json", meta);
  return all_passed(reports) ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  Settings st;
  CLI::App app{"Sparse logistic regression: data, training dynamics, envelopes, posteriors and checks"};
  app.require_subcommand(1);
  app.option_defaults()->delimiter(',');

  auto add = [&](const std::string& name, const std::string& about) {
    CLI::App* sub = app.add_subcommand(name, about);
    return Flags{sub, st};
  };

  Flags sim = add("simulate", "draw a target and a labelled dataset (CSV plus metadata JSON)");
  sim.d(); sim.s(); sim.n(); sim.seed(); sim.out(); sim.config();

  Flags tr = add("train", "train one algorithm and write its trajectory");
  tr.d(); tr.s(); tr.n(); tr.n_val(); tr.seed();
  tr.app->add_option("--algo", st.algo, "single_gf, spindly_gf, single_gd (single), spindly_gd (spindly) or riccati")
      ->capture_default_str();
  tr.eta(); tr.steps(); tr.dt(); tr.alpha(); tr.eta_conf(); tr.out(); tr.config(); tr.coordinates();

  Flags env = add("envelopes", "envelope sandwich, stopping time and error bound on one dataset");
  env.d(); env.s(); env.n(); env.seed(); env.eps(); env.eta_conf(); env.dt(); env.alpha(); env.out();
  env.config();

  Flags post = add("posterior", "sample the spherical posterior and estimate its excess risk");
  post.d(); post.s(); post.n(); post.seed(); post.mcmc(); post.out(); post.config();

  Flags sw = add("sweep", "training curves, dimension sweep or posterior sweep over seeds");
  sw.app->add_option("--kind", st.kind, "curves, dimension or posterior")
      ->capture_default_str()
      ->check(CLI::IsMember({"curves", "dimension", "posterior"}));
  sw.d();
  sw.app->add_option("--d-list", st.d_list, "dimensions, strictly increasing")->capture_default_str();
  sw.s(); sw.n();
  sw.app->add_option("--n-list", st.n_list, "posterior sweep sample sizes; empty means --n")
      ->capture_default_str();
  sw.n_val();
  sw.app->add_option("--seed", st.seed, "random seed of the curves run")->capture_default_str();
  sw.app->add_option("--seeds", st.seeds, "seeds, distinct")->capture_default_str();
  sw.app->add_option("--algo", st.algos, "algorithms compared")->capture_default_str();
  sw.eta(); sw.steps(); sw.alpha(); sw.mcmc();
  sw.app->add_option("--jobs", st.jobs, "worker threads for sweep cells")
      ->capture_default_str()->check(CLI::PositiveNumber);
  sw.out(); sw.config(); sw.coordinates();

  Flags ver = add("verify", "run the numerical oracle suites and write a JSON report");
  ver.app->add_option("--suite", st.suite, "comma-separated: stein, minimizers, hessian, coverage, invariants or all")
      ->capture_default_str();
  ver.app->add_option("--seed", st.verify_seed, "base seed of the oracle suites")->capture_default_str();
  ver.app->add_option("--tolerance-scale", st.tolerance_scale, "multiplier applied to every tolerance")
      ->capture_default_str()->check(CLI::PositiveNumber);
  ver.out(); ver.config();

  CLI::App* active = nullptr;
  json resolved;
  try {
    app.parse(argc, argv);
    active = app.get_subcommands().front();
    resolved = defaults_json(active);
    if (!st.config.empty()) {
      // File values first, then the command line again so flags win.
      std::vector<std::string> tokens = config_tokens(active->get_name(), read_json(st.config));
      std::reverse(tokens.begin(), tokens.end());
      app.clear();
      app.parse(tokens);
      capture_given(active, resolved);
      app.clear();
      app.parse(argc, argv);
    }
    capture_given(active, resolved);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (active->get_name() != "sweep") omp_set_num_threads(1);
  json meta{{"command", active->get_name()}, {"config", resolved}};
  if (!st.config.empty()) meta["config_file"] = st.config;
  try {
    const std::string& name = active->get_name();
    if (name == "simulate") return cmd_simulate(st, meta);
    if (name == "train") return cmd_train(st, meta);
    if (name == "envelopes") return cmd_envelopes(st, meta);
    if (name == "posterior") return cmd_posterior(st, meta);
    if (name == "sweep") return cmd_sweep(st, meta);
    return cmd_verify(st, meta);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
