#include "sparselog/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "sparselog/io.hpp"
#include "sparselog/posterior.hpp"
#include "sparselog/risk.hpp"

namespace sparselog {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (d_list.empty()) fail("d-list is empty");
  for (std::size_t k = 0; k < d_list.size(); ++k) {
    if (d_list[k] < 2) fail("every d must be at least 2");
    if (k > 0 && d_list[k] <= d_list[k - 1]) fail("d-list must be strictly increasing");
  }
  if (s < 1) fail("s must be positive");
  if (n < 1 || n_test < 1) fail("n and n_test must be positive");
  for (int m : n_list)
    if (m < 1) fail("every n must be positive");
  if (seeds.empty()) fail("no seeds");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    fail("seeds must be distinct");
  if (algos.empty()) fail("no algorithms");
  if (!(eta > 0.0)) fail("eta must be positive");
  if (steps < 1) fail("steps must be positive");
  if (alpha < 0.0) fail("alpha must be nonnegative");
  if (nodes < 16) fail("nodes must be at least 16");
  if (val_stride < 1 || thin < 1) fail("strides must be positive");
  if (!(mcmc_steps > burn_in && burn_in >= 0)) fail("need mcmc_steps > burn_in >= 0");
  if (!(target_accept > 0.0 && target_accept < 1.0)) fail("target acceptance must lie in (0, 1)");
  if (jobs < 1) fail("jobs must be positive");
}

namespace {

json config_json(const ExperimentConfig& cfg) {
  json algos = json::array();
  for (Algo a : cfg.algos) algos.push_back(to_string(a));
  return json{{"d_list", cfg.d_list},
              {"s", cfg.s},
              {"n", cfg.n},
              {"n_list", cfg.n_list},
              {"n_test", cfg.n_test},
              {"seeds", cfg.seeds},
              {"algos", algos},
              {"eta", cfg.eta},
              {"steps", cfg.steps},
              {"alpha", cfg.alpha},
              {"nodes", cfg.nodes},
              {"val_stride", cfg.val_stride},
              {"mcmc_steps", cfg.mcmc_steps},
              {"burn_in", cfg.burn_in},
              {"target_accept", cfg.target_accept},
              {"thin", cfg.thin},
              {"jobs", cfg.jobs}};
}

// Data for one (d, seed) cell; every algorithm sees the same draws.
struct CellData {
  TargetVector target;
  Dataset train;
  Dataset val;
};

CellData make_cell(int d, int s, int n, int n_val, std::uint64_t seed) {
  const RngStream base(seed, static_cast<std::uint64_t>(d));
  RngStream r0 = base.substream(0), r1 = base.substream(1), r2 = base.substream(2);
  TargetVector target = sample_target(d, s, TargetProfile::flat, r0);
  Dataset train = sample_dataset(target, n, r1, false);
  Dataset val = sample_dataset(target, n_val, r2, false);
  return {std::move(target), std::move(train), std::move(val)};
}

TrainConfig train_config(const ExperimentConfig& cfg, const CellData& cell, long stride) {
  TrainConfig tc;
  tc.dt = cfg.eta;
  tc.steps = cfg.steps;
  tc.alpha = cfg.alpha;
  tc.support = cell.target.support();
  tc.val = &cell.val;
  tc.record.stride = stride;
  return tc;
}

double mean_of(const std::vector<double>& v) {
  double t = 0.0;
  for (double x : v) t += x;
  return t / v.size();
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1) / v.size());
}

// Runs body(i) for i in [0, count) on `jobs` threads and rethrows the first failure.
template <class Body>
void parallel_cells(std::size_t count, int jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

CurvesResult run_training_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  const int d = cfg.d_list.front();
  const CellData cell = make_cell(d, cfg.s, cfg.n, cfg.n_test, cfg.seeds.front());
  CurvesResult out;
  out.bayes = bayes_risk(cfg.nodes);
  for (Algo algo : cfg.algos) {
    const TrainConfig tc = train_config(cfg, cell, 1);
    out.trajectories.push_back(train(algo, empirical_objective(cell.train), tc));
    out.selections.push_back(early_stop_select(out.trajectories.back()));
  }
  if (!cfg.out_dir.empty()) {
    const fs::path dir(cfg.out_dir);
    ensure_directory(dir);
    for (const Trajectory& t : out.trajectories)
      write_trajectory_csv(dir / ("traj_" + to_string(t.algo) + ".csv"), t, cfg.coordinates);
    std::ostringstream bayes;
    bayes << "t,bayes_risk\n";
    for (double t : out.trajectories.front().times)
      bayes << format_double(t) << ',' << format_double(out.bayes) << '\n';
    write_text(dir / "bayes_risk.csv", bayes.str());
    json meta = config_json(cfg);
    meta["d"] = d;
    meta["seed"] = cfg.seeds.front();
    meta["target"] = dataset_metadata(cell.target, cell.train);
    json stops = json::object();
    for (std::size_t k = 0; k < out.selections.size(); ++k)
      stops[to_string(out.trajectories[k].algo)] = {{"time", out.selections[k].time},
                                                    {"val_loss", out.selections[k].val_loss}};
    meta["early_stop"] = stops;
    write_json(dir / "config.json", meta);
  }
  return out;
}

SweepResult run_dimension_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    int d;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int d : cfg.d_list)
    for (std::uint64_t seed : cfg.seeds) cells.push_back({d, seed});
  const std::size_t A = cfg.algos.size();
  std::vector<SweepRow> rows(cells.size() * A);
  const double bayes = bayes_risk(cfg.nodes);

  parallel_cells(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const CellData data = make_cell(cell.d, cfg.s, cfg.n, cfg.n_test, cell.seed);
    RngStream r3 = RngStream(cell.seed, static_cast<std::uint64_t>(cell.d)).substream(3);
    const Dataset test = sample_dataset(data.target, cfg.n_test, r3, false);
    for (std::size_t a = 0; a < A; ++a) {
      const Trajectory traj =
          train(cfg.algos[a], empirical_objective(data.train), train_config(cfg, data, cfg.val_stride));
      const StopSelection sel = early_stop_select(traj);
      SweepRow& row = rows[c * A + a];
      row.d = cell.d;
      row.seed = cell.seed;
      row.algo = cfg.algos[a];
      row.excess = excess_risk(sel.w, data.target, cfg.nodes);
      row.stop_time = sel.time;
      row.val_loss = sel.val_loss;
      row.test_excess = empirical_risk(sel.w, test) - bayes;
      row.norm_Sc = traj.norm_Sc[sel.index];
    }
  });

  SweepResult out;
  out.rows = rows;
  for (int d : cfg.d_list)
    for (Algo algo : cfg.algos) {
      std::vector<double> vals;
      for (const auto& r : rows)
        if (r.d == d && r.algo == algo) vals.push_back(r.excess);
      if (vals.size() != cfg.seeds.size()) throw std::logic_error("sweep aggregate is missing runs");
      out.summary.push_back({d, algo, mean_of(vals), stderr_of(vals), static_cast<int>(vals.size())});
    }
  if (cfg.d_list.size() >= 2)
    for (Algo algo : cfg.algos) {
      std::vector<double> x, y;
      for (const auto& s : out.summary)
        if (s.algo == algo) {
          x.push_back(s.d);
          y.push_back(s.mean_excess);
        }
      out.slopes.push_back(loglog_slope(x, y));
    }

  if (!cfg.out_dir.empty()) {
    const fs::path dir(cfg.out_dir);
    ensure_directory(dir);
    std::ostringstream sweep, test, summary;
    sweep << "d,seed,algo,excess,stop_time,val_loss\n";
    test << "d,seed,algo,test_excess\n";
    for (const auto& r : rows) {
      sweep << r.d << ',' << r.seed << ',' << to_string(r.algo) << ',' << format_double(r.excess)
            << ',' << format_double(r.stop_time) << ',' << format_double(r.val_loss) << '\n';
      test << r.d << ',' << r.seed << ',' << to_string(r.algo) << ','
           << format_double(r.test_excess) << '\n';
    }
    summary << "d,algo,mean_excess,stderr\n";
    for (const auto& s : out.summary)
      summary << s.d << ',' << to_string(s.algo) << ',' << format_double(s.mean_excess) << ','
              << format_double(s.stderr_excess) << '\n';
    write_text(dir / "sweep.csv", sweep.str());
    write_text(dir / "sweep_testset.csv", test.str());
    write_text(dir / "summary.csv", summary.str());
    json meta = config_json(cfg);
    json slopes = json::object();
    for (std::size_t k = 0; k < out.slopes.size(); ++k) slopes[to_string(cfg.algos[k])] = out.slopes[k];
    meta["loglog_slopes"] = slopes;
    meta["bayes_risk"] = bayes;
    write_json(dir / "config.json", meta);
  }
  return out;
}

PosteriorSweepResult run_posterior_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<int> n_list = cfg.n_list.empty() ? std::vector<int>{cfg.n} : cfg.n_list;
  struct Cell {
    int n, d;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : n_list)
    for (int d : cfg.d_list)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({n, d, seed});
  std::vector<PosteriorRow> rows(cells.size());

  parallel_cells(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    const RngStream base(cell.seed, (static_cast<std::uint64_t>(cell.n) << 20) |
                                        static_cast<std::uint64_t>(cell.d));
    RngStream r0 = base.substream(0), r1 = base.substream(1), r2 = base.substream(2);
    const TargetVector target = sample_target(cell.d, std::min(cfg.s, cell.d - 1), TargetProfile::flat, r0);
    const Dataset data = sample_dataset(target, cell.n, r1, false);
    SamplerConfig sc;
    sc.steps = cfg.mcmc_steps;
    sc.burn_in = cfg.burn_in;
    sc.target_accept = cfg.target_accept;
    sc.thin = cfg.thin;
    const PosteriorChain chain = sample_posterior(data, TangentChart(target), sc, r2);
    const PosteriorEstimate est = posterior_excess_risk(chain, target, cfg.nodes);
    rows[c] = {cell.d, cell.n, cell.seed, est.mean, est.std_error, chain.acceptance_rate};
  });

  PosteriorSweepResult out;
  out.rows = rows;
  for (int n : n_list) {
    std::vector<double> x, y;
    for (int d : cfg.d_list) {
      std::vector<double> vals;
      for (const auto& r : rows)
        if (r.n == n && r.d == d) vals.push_back(r.mean_excess);
      if (vals.size() != cfg.seeds.size()) throw std::logic_error("posterior aggregate is missing runs");
      out.summary.push_back({d, n, mean_of(vals), stderr_of(vals)});
      x.push_back(d - 1.0);
      y.push_back(out.summary.back().mean_excess);
    }
    if (cfg.d_list.size() >= 2) out.exponents.push_back(loglog_slope(x, y));
  }

  if (!cfg.out_dir.empty()) {
    const fs::path dir(cfg.out_dir);
    ensure_directory(dir);
    std::ostringstream per, summary;
    per << "d,n,seed,mean_excess,stderr,acceptance\n";
    for (const auto& r : rows)
      per << r.d << ',' << r.n << ',' << r.seed << ',' << format_double(r.mean_excess) << ','
          << format_double(r.std_error) << ',' << format_double(r.acceptance) << '\n';
    summary << "d,n,mean_excess,stderr\n";
    for (const auto& s : out.summary)
      summary << s.d << ',' << s.n << ',' << format_double(s.mean_excess) << ','
              << format_double(s.stderr_excess) << '\n';
    write_text(dir / "posterior.csv", per.str());
    write_text(dir / "posterior_summary.csv", summary.str());
    json meta = config_json(cfg);
    meta["exponents_vs_d_minus_1"] = out.exponents;
    write_json(dir / "config.json", meta);
  }
  return out;
}

}  // namespace sparselog
