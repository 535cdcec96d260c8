#include "sparselog/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sparselog/risk.hpp"

namespace sparselog {

std::string to_string(Algo algo) {
  switch (algo) {
    case Algo::single_gf: return "single_gf";
    case Algo::spindly_gf: return "spindly_gf";
    case Algo::single_gd: return "single_gd";
    case Algo::spindly_gd: return "spindly_gd";
    case Algo::riccati: return "riccati";
  }
  return "unknown";
}

Algo parse_algo(const std::string& name) {
  if (name == "single_gf") return Algo::single_gf;
  if (name == "spindly_gf") return Algo::spindly_gf;
  if (name == "single_gd" || name == "single") return Algo::single_gd;
  if (name == "spindly_gd" || name == "spindly") return Algo::spindly_gd;
  if (name == "riccati") return Algo::riccati;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

bool is_spindly(Algo algo) { return algo == Algo::spindly_gf || algo == Algo::spindly_gd; }

Objective empirical_objective(const Dataset& data) {
  return {[&data](const Vec& w, Vec& g) { return empirical_risk_grad(w, data, g); }, data.d()};
}

Objective population_objective(const TargetVector& target, int nodes) {
  return {[target, nodes](const Vec& w, Vec& g) {
            g = population_grad_stein(w, target, nodes);
            return population_risk(w, target, nodes);
          },
          target.d()};
}

std::vector<long> record_schedule(long steps, const RecordPolicy& policy) {
  if (steps < 0) throw std::invalid_argument("negative step count");
  std::vector<long> out;
  if (policy.stride > 0) {
    for (long k = 0; k <= steps; k += policy.stride) out.push_back(k);
    if (out.back() != steps) out.push_back(steps);
    return out;
  }
  if (steps + 1 <= policy.dense_limit) {
    out.resize(static_cast<std::size_t>(steps + 1));
    for (long k = 0; k <= steps; ++k) out[static_cast<std::size_t>(k)] = k;
    return out;
  }
  // Dense head, geometric tail.
  const long head = std::max(2L, policy.dense_limit / 2);
  std::set<long> picked;
  for (long k = 0; k < head; ++k) picked.insert(k);
  const long tail = policy.dense_limit - head;
  const double ratio = std::log(static_cast<double>(steps) / head) / std::max(1L, tail - 1);
  for (long q = 0; q < tail; ++q)
    picked.insert(std::min(steps, static_cast<long>(std::llround(head * std::exp(ratio * q)))));
  picked.insert(steps);
  return {picked.begin(), picked.end()};
}

TrainConfig TrainConfig::for_duration(double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be nonnegative");
  TrainConfig cfg;
  cfg.steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  cfg.dt = cfg.steps > 0 ? t_end / cfg.steps : dt;
  return cfg;
}

namespace {

class Recorder {
public:
  Recorder(Algo algo, const TrainConfig& cfg, double init_scale)
      : cfg_(cfg), schedule_(record_schedule(cfg.steps, cfg.record)) {
    traj_.algo = algo;
    traj_.step = cfg.dt;
    traj_.init_scale = init_scale;
  }

  bool wants(long k) const { return next_ < schedule_.size() && schedule_[next_] == k; }

  void push(long k, const Vec& w, double loss) {
    traj_.times.push_back(static_cast<double>(k) * cfg_.dt);
    traj_.train_loss.push_back(loss);
    double s_part = 0.0;
    for (int j : cfg_.support) s_part += w(j) * w(j);
    traj_.norm_S.push_back(s_part);
    traj_.norm_Sc.push_back(std::max(0.0, w.squaredNorm() - s_part));
    if (cfg_.val) traj_.val_loss.push_back(empirical_risk(w, *cfg_.val));
    if (cfg_.keep_iterates) traj_.iterates.push_back(w);
    ++next_;
  }

  void track_balance(const Vec& u, const Vec& v, const Vec& c0) {
    const double drift = (u.cwiseProduct(u) - v.cwiseProduct(v) - c0).lpNorm<Eigen::Infinity>();
    traj_.balance_drift = std::max(traj_.balance_drift, drift);
  }

  Trajectory finish(const Vec& w) {
    traj_.final_w = w;
    return std::move(traj_);
  }

private:
  const TrainConfig& cfg_;
  std::vector<long> schedule_;
  std::size_t next_ = 0;
  Trajectory traj_;
};

void validate(const Objective& obj, const TrainConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("step size must be positive");
  if (cfg.steps < 0) throw std::invalid_argument("negative step count");
  if (cfg.init && cfg.init->size() != obj.dim)
    throw std::invalid_argument("initialization has the wrong dimension");
  for (int j : cfg.support)
    if (j < 0 || j >= obj.dim) throw std::invalid_argument("support index out of range");
  if (cfg.val && cfg.val->d() != obj.dim)
    throw std::invalid_argument("validation data has the wrong dimension");
}

void guard(const Vec& w, const TrainConfig& cfg, long k) {
  const double norm = w.norm();
  if (!(norm < cfg.divergence_norm))
    throw DivergenceError("iterate norm exceeded " + std::to_string(cfg.divergence_norm) +
                          " at step " + std::to_string(k) +
                          " (separable data or step size too large)");
}

double spindly_alpha(const TrainConfig& cfg, int d) {
  return cfg.alpha > 0.0 ? cfg.alpha : 1.0 / std::sqrt(static_cast<double>(d));
}

Vec spindly_init(const TrainConfig& cfg, int d) {
  if (cfg.init) return *cfg.init;
  const double a = spindly_alpha(cfg, d);
  return Vec::Constant(d, a * a);
}

// Balanced factorization u = sign(w) sqrt|w|, v = sqrt|w| unless v(0) is given.
void split_factors(const Vec& w, const TrainConfig& cfg, Vec& u, Vec& v) {
  if (cfg.init_v) {
    if (cfg.init_v->size() != w.size() || (cfg.init_v->array() == 0.0).any())
      throw std::invalid_argument("v(0) must be nonzero with the predictor's dimension");
    v = *cfg.init_v;
    u = w.cwiseQuotient(v);
    return;
  }
  v = w.cwiseAbs().cwiseSqrt();
  u = v;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (w(j) < 0.0) u(j) = -u(j);
}

// Generic RK4 driver for dw/dt = field(w, loss_out) on the predictor itself.
template <class Field>
Trajectory rk4_predictor(Algo algo, const Objective& obj, const TrainConfig& cfg, Vec w,
                         double init_scale, Field&& field) {
  validate(obj, cfg);
  Recorder rec(algo, cfg, init_scale);
  const double h = cfg.dt;
  Vec k1, k2, k3, k4;
  for (long k = 0;; ++k) {
    const double loss = field(w, k1);
    if (rec.wants(k)) rec.push(k, w, loss);
    if (k == cfg.steps) break;
    field(w + 0.5 * h * k1, k2);
    field(w + 0.5 * h * k2, k3);
    field(w + h * k3, k4);
    w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    guard(w, cfg, k + 1);
  }
  return rec.finish(w);
}

}  // namespace

Trajectory flow_single_layer(const Objective& obj, const TrainConfig& cfg) {
  Vec g(obj.dim);
  Vec w0 = cfg.init ? *cfg.init : Vec::Zero(obj.dim);
  return rk4_predictor(Algo::single_gf, obj, cfg, std::move(w0), 0.0, [&](const Vec& w, Vec& out) {
    const double loss = obj.value_grad(w, g);
    out = -g;
    return loss;
  });
}

Trajectory flow_spindly_reduced(const Objective& obj, const TrainConfig& cfg) {
  Vec g(obj.dim);
  return rk4_predictor(Algo::spindly_gf, obj, cfg, spindly_init(cfg, obj.dim),
                       spindly_alpha(cfg, obj.dim), [&](const Vec& w, Vec& out) {
                         const double loss = obj.value_grad(w, g);
                         out = -2.0 * w.cwiseAbs().cwiseProduct(g);
                         return loss;
                       });
}

Trajectory flow_spindly(const Objective& obj, const TrainConfig& cfg) {
  validate(obj, cfg);
  const int d = obj.dim;
  Recorder rec(Algo::spindly_gf, cfg, spindly_alpha(cfg, d));
  Vec u, v;
  split_factors(spindly_init(cfg, d), cfg, u, v);
  const Vec c0 = u.cwiseProduct(u) - v.cwiseProduct(v);
  const double h = cfg.dt;
  Vec g(d), ku[4], kv[4];
  auto field = [&](const Vec& uu, const Vec& vv, Vec& du, Vec& dv) {
    const double loss = obj.value_grad(uu.cwiseProduct(vv), g);
    du = -vv.cwiseProduct(g);
    dv = -uu.cwiseProduct(g);
    return loss;
  };
  for (long k = 0;; ++k) {
    const double loss = field(u, v, ku[0], kv[0]);
    rec.track_balance(u, v, c0);
    if (rec.wants(k)) rec.push(k, u.cwiseProduct(v), loss);
    if (k == cfg.steps) break;
    field(u + 0.5 * h * ku[0], v + 0.5 * h * kv[0], ku[1], kv[1]);
    field(u + 0.5 * h * ku[1], v + 0.5 * h * kv[1], ku[2], kv[2]);
    field(u + h * ku[2], v + h * kv[2], ku[3], kv[3]);
    u += (h / 6.0) * (ku[0] + 2.0 * ku[1] + 2.0 * ku[2] + ku[3]);
    v += (h / 6.0) * (kv[0] + 2.0 * kv[1] + 2.0 * kv[2] + kv[3]);
    guard(u.cwiseProduct(v), cfg, k + 1);
  }
  return rec.finish(u.cwiseProduct(v));
}

Trajectory gd_single_layer(const Objective& obj, const TrainConfig& cfg) {
  validate(obj, cfg);
  Recorder rec(Algo::single_gd, cfg, 0.0);
  Vec w = cfg.init ? *cfg.init : Vec::Zero(obj.dim);
  Vec g(obj.dim);
  for (long k = 0;; ++k) {
    const double loss = obj.value_grad(w, g);
    if (rec.wants(k)) rec.push(k, w, loss);
    if (k == cfg.steps) break;
    w -= cfg.dt * g;
    guard(w, cfg, k + 1);
  }
  return rec.finish(w);
}

Trajectory gd_spindly(const Objective& obj, const TrainConfig& cfg) {
  validate(obj, cfg);
  const int d = obj.dim;
  Recorder rec(Algo::spindly_gd, cfg, spindly_alpha(cfg, d));
  Vec u, v;
  split_factors(spindly_init(cfg, d), cfg, u, v);
  const Vec c0 = u.cwiseProduct(u) - v.cwiseProduct(v);
  Vec g(d);
  for (long k = 0;; ++k) {
    const Vec w = u.cwiseProduct(v);
    const double loss = obj.value_grad(w, g);
    rec.track_balance(u, v, c0);
    if (rec.wants(k)) rec.push(k, w, loss);
    if (k == cfg.steps) break;
    const Vec u_next = u - cfg.dt * v.cwiseProduct(g);
    v -= cfg.dt * u.cwiseProduct(g);
    u = u_next;
    guard(u.cwiseProduct(v), cfg, k + 1);
  }
  return rec.finish(u.cwiseProduct(v));
}

Trajectory train(Algo algo, const Objective& obj, const TrainConfig& cfg) {
  switch (algo) {
    case Algo::single_gf: return flow_single_layer(obj, cfg);
    case Algo::spindly_gf: return flow_spindly(obj, cfg);
    case Algo::single_gd: return gd_single_layer(obj, cfg);
    case Algo::spindly_gd: return gd_spindly(obj, cfg);
    case Algo::riccati: break;
  }
  throw std::invalid_argument("train: the Riccati system is integrated by riccati_flow");
}

StopSelection early_stop_select(const Trajectory& traj) {
  if (traj.times.empty()) throw std::invalid_argument("early stopping on an empty trajectory");
  if (traj.val_loss.size() != traj.times.size())
    throw std::invalid_argument("early stopping needs validation losses at every record");
  if (traj.iterates.size() != traj.times.size())
    throw std::invalid_argument("early stopping needs recorded iterates");
  std::size_t best = 0;
  for (std::size_t k = 1; k < traj.val_loss.size(); ++k)
    if (traj.val_loss[k] < traj.val_loss[best]) best = k;
  return {best, traj.times[best], traj.iterates[best], traj.val_loss[best]};
}

ColMat sample_rotation(int d, RngStream& rng) {
  if (d < 1) throw std::invalid_argument("rotation dimension must be positive");
  ColMat G(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<ColMat> qr(G);
  ColMat Q = qr.householderQ() * ColMat::Identity(d, d);
  const ColMat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

Dataset rotate_dataset(const Dataset& data, const ColMat& U) {
  if (U.rows() != data.d() || U.cols() != data.d())
    throw std::invalid_argument("rotation has the wrong size");
  Dataset out = data;
  out.X = data.X * U.transpose();
  return out;
}

double equivariance_gap(Algo algo, const Dataset& data, const ColMat& U, double t_end, double dt,
                        double alpha) {
  if (algo == Algo::riccati) throw std::invalid_argument("equivariance gap is defined for trainers");
  const Dataset rotated = rotate_dataset(data, U);
  TrainConfig cfg;
  if (algo == Algo::single_gf || algo == Algo::spindly_gf) {
    cfg = TrainConfig::for_duration(t_end, dt);
  } else {
    cfg.dt = dt;
    cfg.steps = static_cast<long>(std::llround(t_end / dt));
  }
  cfg.alpha = alpha;
  cfg.record.stride = 1;
  const Trajectory a = train(algo, empirical_objective(data), cfg);
  TrainConfig cfg_b = cfg;
  cfg_b.init = U * a.iterates.front();
  const Trajectory b = train(algo, empirical_objective(rotated), cfg_b);
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    gap = std::max(gap, (b.iterates[k] - U * a.iterates[k]).norm());
  return gap;
}

}  // namespace sparselog
