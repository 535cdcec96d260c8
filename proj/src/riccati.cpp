#include "sparselog/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparselog/risk.hpp"

namespace sparselog {

bool EnvelopeModel::in_support(int i) const {
  return std::binary_search(support.begin(), support.end(), i);
}

double EnvelopeModel::rate(int i) const { return w_star(i) * a_star + zeta(i); }

bool EnvelopeModel::delta_ok() const { return delta_margin >= 0.25 && delta_margin < 0.5; }

EnvelopeModel EnvelopeModel::make(int d, std::vector<int> support, std::vector<double> values,
                                  Vec zeta, int nodes) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (support.empty() || support.size() != values.size())
    throw std::invalid_argument("support and values must be nonempty and of equal length");
  if (zeta.size() != d) throw std::invalid_argument("zeta must have length d");
  EnvelopeModel m;
  m.d = d;
  m.w_star = Vec::Zero(d);
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] < 0 || support[k] >= d) throw std::invalid_argument("support index out of range");
    if (k > 0 && support[k] <= support[k - 1]) throw std::invalid_argument("support must be increasing");
    if (!(values[k] > 0.0)) throw std::invalid_argument("target values must be positive");
    m.w_star(support[k]) = values[k];
  }
  m.support = std::move(support);
  m.zeta = std::move(zeta);
  m.nodes = nodes;
  m.a_star = curvature_at_norm(m.w_star.norm(), nodes);
  m.w_min = std::numeric_limits<double>::infinity();
  for (int i : m.support)
    if (m.w_star(i) < m.w_min) {
      m.w_min = m.w_star(i);
      m.i_min = i;
    }
  m.eps_curvature = 1.0 - 4.0 * m.a_star;
  m.delta_margin = std::numeric_limits<double>::quiet_NaN();
  return m;
}

EnvelopeModel EnvelopeModel::from_target(const TargetVector& target, Vec zeta, int nodes) {
  return make(target.d(), target.support(), target.values(), std::move(zeta), nodes);
}

EnvelopeModel EnvelopeModel::measured(const TargetVector& target, const Dataset& data, double eta,
                                      int nodes) {
  Vec zeta = -noise_vector(target.dense(), data, target, nodes);
  EnvelopeModel m = from_target(target, std::move(zeta), nodes);
  m.gamma = noise_bound_gamma(data.n(), target.d(), eta);
  m.delta_margin = 0.5 - *m.gamma / (m.a_star * m.w_min);
  return m;
}

namespace {

void riccati_field(const EnvelopeModel& m, const Vec& w, Vec& out) {
  const double a = curvature_at_norm(w.norm(), m.nodes);
  out.resize(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    out(i) = m.rate(static_cast<int>(i)) * w(i) - a * w(i) * w(i);
}

void rk4_step(const EnvelopeModel& m, Vec& w, double h) {
  Vec k1, k2, k3, k4;
  riccati_field(m, w, k1);
  riccati_field(m, w + 0.5 * h * k1, k2);
  riccati_field(m, w + 0.5 * h * k2, k3);
  riccati_field(m, w + h * k3, k4);
  w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!(w.norm() < 1e6)) throw DivergenceError("Riccati flow diverged");
}

double pop_loss(const EnvelopeModel& m, const Vec& w) {
  return population_risk_reduced(w.dot(m.w_star) / m.w_star.norm(), w.squaredNorm(), m.nodes);
}

}  // namespace

Trajectory riccati_flow(const EnvelopeModel& model, double t_end, double dt,
                        const RecordPolicy& record) {
  const TrainConfig cfg = TrainConfig::for_duration(t_end, dt);
  const std::vector<long> schedule = record_schedule(cfg.steps, record);
  Trajectory traj;
  traj.algo = Algo::riccati;
  traj.step = cfg.dt;
  traj.init_scale = 1.0 / std::sqrt(static_cast<double>(model.d));
  Vec w = Vec::Constant(model.d, 1.0 / model.d);
  std::size_t next = 0;
  for (long k = 0;; ++k) {
    if (next < schedule.size() && schedule[next] == k) {
      traj.times.push_back(static_cast<double>(k) * cfg.dt);
      traj.iterates.push_back(w);
      traj.train_loss.push_back(pop_loss(model, w));
      double s_part = 0.0;
      for (int i : model.support) s_part += w(i) * w(i);
      traj.norm_S.push_back(s_part);
      traj.norm_Sc.push_back(std::max(0.0, w.squaredNorm() - s_part));
      ++next;
    }
    if (k == cfg.steps) break;
    rk4_step(model, w, cfg.dt);
  }
  traj.final_w = w;
  return traj;
}

std::vector<Vec> riccati_flow_at(const EnvelopeModel& model, const std::vector<double>& times,
                                 double max_dt) {
  if (!(max_dt > 0.0)) throw std::invalid_argument("max_dt must be positive");
  std::vector<Vec> out;
  out.reserve(times.size());
  Vec w = Vec::Constant(model.d, 1.0 / model.d);
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("evaluation times must be sorted and nonnegative");
    const double span = target - t;
    const long steps = static_cast<long>(std::ceil(span / max_dt - 1e-12));
    for (long k = 0; k < steps; ++k) rk4_step(model, w, span / steps);
    t = target;
    out.push_back(w);
  }
  return out;
}

double riccati_scalar(double w0, double b, double c, double t) {
  const double bt = b * t;
  const double phi = std::abs(bt) < 1e-12 ? t : -std::expm1(-bt) / b;
  return 1.0 / (std::exp(-bt) / w0 + c * phi);
}

namespace {

double active_rate(int i, const EnvelopeModel& m) {
  if (!m.in_support(i)) throw std::invalid_argument("coordinate is not active");
  const double b = m.rate(i);
  if (!(b > 0.0))
    throw std::domain_error("assumption A1 violated at coordinate " + std::to_string(i) +
                            ": w*_i a* + zeta_i <= 0");
  return b;
}

}  // namespace

double upper_envelope_active(double t, int i, const EnvelopeModel& model) {
  return riccati_scalar(1.0 / model.d, active_rate(i, model), model.a_star, t);
}

double lower_envelope_active(double t, int i, const EnvelopeModel& model) {
  return riccati_scalar(1.0 / model.d, active_rate(i, model), 0.25, t);
}

InactiveEnvelope upper_envelope_inactive(double t, int i, const EnvelopeModel& model) {
  if (model.in_support(i)) throw std::invalid_argument("coordinate is active");
  const double z = model.zeta(i);
  const double w0 = 1.0 / model.d;
  InactiveEnvelope e;
  e.closed_form = riccati_scalar(w0, z, model.a_star, t);
  e.lower = riccati_scalar(w0, z, 0.25, t);
  e.exp_bound = w0 * std::exp(z * t);
  e.exp_bound_loose = 2.0 * w0 * std::exp(z * t);
  return e;
}

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0, 1)");
}

}  // namespace

double stopping_time(double eps, const EnvelopeModel& model) {
  check_eps(eps);
  const double beta = model.w_min * model.a_star;
  const double ratio = 4.0 * model.a_star / (1.0 - eps);
  if (!(ratio > 1.0))
    throw std::domain_error("assumption A2 violated: 4 a* / (1 - eps) <= 1, target not reachable");
  const double num = 4.0 * model.d * beta - 1.0;
  if (!(num > 0.0) || (1.0 - eps) * model.w_min <= 1.0 / model.d)
    throw std::domain_error("target (1 - eps) w_min does not exceed the initialization 1/d");
  return std::log(num / (ratio - 1.0)) / beta;
}

double stopping_time_alternative(double eps, const EnvelopeModel& model) {
  check_eps(eps);
  const double beta = model.w_min * model.a_star;
  const double den = 4.0 * model.a_star / ((1.0 - eps) * model.w_min) - 1.0;
  if (!(den > 0.0)) throw std::domain_error("assumption A2 violated");
  return std::log((4.0 * beta * model.d - 1.0) / den) / (2.0 * beta);
}

BoundReport error_bound(const EnvelopeModel& model, double eps, int s, int n, double eta,
                            std::optional<double> c2) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in [0, 1)");
  if (n < 1 || s < 1) throw std::invalid_argument("n and s must be positive");
  const double beta = model.w_min * model.a_star;
  BoundReport r;
  r.term_signal = eps * eps * model.w_star.squaredNorm();
  r.term_noise = 16.0 * s * std::log(2.0 * model.d / eta) / (n * beta * beta);
  r.active_total = r.term_signal + r.term_noise;
  const double gamma = noise_bound_gamma(n, model.d, eta);
  r.delta = 0.5 - gamma / beta;
  r.delta_ok = r.delta >= 0.25 && r.delta < 0.5;
  r.eps_ok = model.eps_ok();
  if (c2) {
    r.term_inactive = *c2 / std::pow(static_cast<double>(model.d), r.delta + 0.5);
    r.total = r.active_total + *r.term_inactive;
  }
  return r;
}

DominanceReport weakest_coordinate_dominance(const EnvelopeModel& model, double eps) {
  DominanceReport r;
  r.stop_time = stopping_time(eps, model);
  r.ok = true;
  for (int i : model.support) {
    const double low = lower_envelope_active(r.stop_time, i, model);
    const double rel = std::abs(low - model.w_star(i)) / model.w_star(i);
    r.coords.push_back(i);
    r.lower_at_stop.push_back(low);
    r.rel_error.push_back(rel);
    if (rel > eps * (1.0 + 1e-12)) r.ok = false;
  }
  return r;
}

std::vector<double> envelope_grid(double t_end, int points, double first_fraction) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  if (!(t_end > 0.0)) throw std::invalid_argument("grid end must be positive");
  std::vector<double> grid{0.0};
  const double t0 = t_end * first_fraction;
  for (int k = 0; k < points - 1; ++k) {
    const double f = points == 2 ? 1.0 : static_cast<double>(k) / (points - 2);
    grid.push_back(t0 * std::pow(t_end / t0, f));
  }
  grid.back() = t_end;
  return grid;
}

SandwichReport sandwich_check(const EnvelopeModel& model, const std::vector<double>& grid,
                              double tol, double max_dt) {
  SandwichReport r;
  const std::vector<Vec> flow = riccati_flow_at(model, grid, max_dt);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double a = curvature_at_norm(flow[k].norm(), model.nodes);
    r.a_min = std::min(r.a_min, a);
    r.a_max = std::max(r.a_max, a);
    for (int i = 0; i < model.d; ++i) {
      EnvelopeRow row;
      row.t = t;
      row.i = i;
      row.active = model.in_support(i);
      row.flow_value = flow[k](i);
      if (row.active) {
        row.lower = lower_envelope_active(t, i, model);
        row.upper = upper_envelope_active(t, i, model);
      } else {
        const InactiveEnvelope e = upper_envelope_inactive(t, i, model);
        row.lower = e.lower;
        row.upper = e.closed_form;
      }
      const double slack = tol * std::max(1.0, std::abs(row.flow_value));
      const double excess = std::max(row.lower - row.flow_value, row.flow_value - row.upper);
      if (excess > slack) {
        ++r.violations;
        r.max_violation = std::max(r.max_violation, excess);
      }
      r.rows.push_back(row);
    }
  }
  r.ok = r.violations == 0;
  return r;
}

double fit_c2(const std::vector<double>& dims, const std::vector<double>& inactive_mass,
              double delta) {
  if (dims.size() != inactive_mass.size() || dims.empty())
    throw std::invalid_argument("fit_c2 needs matching, nonempty inputs");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const double x = std::pow(dims[k], -(delta + 0.5));
    num += x * inactive_mass[k];
    den += x * x;
  }
  return num / den;
}

double empirical_window(const std::vector<double>& times, const std::vector<double>& err,
                        double t_stop, double bound) {
  if (times.size() != err.size() || times.empty())
    throw std::invalid_argument("empirical_window needs matching, nonempty inputs");
  std::vector<std::size_t> order(times.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(times[a] - t_stop) < std::abs(times[b] - t_stop);
  });
  double h = 0.0;
  for (std::size_t k : order) {
    if (err[k] > bound) break;
    h = std::abs(times[k] - t_stop);
  }
  return h;
}

}  // namespace sparselog
