#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparselog/model.hpp"
#include "sparselog/rng.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

enum class Algo { single_gf, spindly_gf, single_gd, spindly_gd, riccati };

std::string to_string(Algo algo);
/// Accepts the enum spellings plus the short forms "single" and "spindly" (gradient descent).
Algo parse_algo(const std::string& name);
bool is_spindly(Algo algo);

/// Loss and gradient oracle driven by the integrators.
struct Objective {
  std::function<double(const Vec&, Vec&)> value_grad;
  int dim = 0;
};

Objective empirical_objective(const Dataset& data);
/// Population risk with the closed-form Gaussian gradient.
Objective population_objective(const TargetVector& target, int nodes = 64);

struct RecordPolicy {
  long stride = 0;            // 0: dense up to dense_limit records, then geometric thinning
  long dense_limit = 10'000;
};

/// Steps at which a run of `steps` steps is recorded; always holds 0 and `steps`.
std::vector<long> record_schedule(long steps, const RecordPolicy& policy);

struct TrainConfig {
  double dt = 1e-2;    // integrator step for flows, learning rate for descent
  long steps = 0;
  double alpha = 0.0;  // spindly initialization u = v = alpha; 0 means 1/sqrt(d)
  std::vector<int> support;          // for the norm_S / norm_Sc split
  const Dataset* val = nullptr;      // validation data for val_loss, optional
  RecordPolicy record;
  bool keep_iterates = true;
  std::optional<Vec> init;           // overrides the initial predictor
  std::optional<Vec> init_v;         // spindly only: v(0), nonzero, with u(0) = w(0) / v(0)
  double divergence_norm = 1e6;

  /// Flow of duration t_end: picks the step count and shrinks dt so the run ends exactly at t_end.
  static TrainConfig for_duration(double t_end, double dt);
};

struct Trajectory {
  Algo algo = Algo::single_gf;
  std::vector<double> times;
  std::vector<Vec> iterates;  // empty unless keep_iterates
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // empty without validation data
  std::vector<double> norm_S;
  std::vector<double> norm_Sc;
  Vec final_w;
  double step = 0.0;
  double init_scale = 0.0;
  double balance_drift = 0.0;  // max_t |u*u - v*v - (u0*u0 - v0*v0)|_inf for (u, v) runs

  std::size_t size() const { return times.size(); }
};

class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// RK4 on dw/dt = -grad L(w), from w = 0.
Trajectory flow_single_layer(const Objective& objective, const TrainConfig& config);
/// RK4 on du/dt = -v * grad L(u*v), dv/dt = -u * grad L(u*v).
Trajectory flow_spindly(const Objective& objective, const TrainConfig& config);
/// RK4 on the predictor equation the (u, v) flow induces on balanced
/// sign-consistent initializations: dw/dt = -2 |w| * grad L(w).
Trajectory flow_spindly_reduced(const Objective& objective, const TrainConfig& config);
Trajectory gd_single_layer(const Objective& objective, const TrainConfig& config);
Trajectory gd_spindly(const Objective& objective, const TrainConfig& config);

Trajectory train(Algo algo, const Objective& objective, const TrainConfig& config);

struct StopSelection {
  std::size_t index = 0;
  double time = 0.0;
  Vec w;
  double val_loss = 0.0;
};

/// Minimum validation loss over the records, earliest index on ties.
StopSelection early_stop_select(const Trajectory& traj);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed by diag(R) > 0).
ColMat sample_rotation(int d, RngStream& rng);
/// Rows x_i -> U x_i; labels and soft labels unchanged.
Dataset rotate_dataset(const Dataset& data, const ColMat& U);

/// sup_t |w_B(t) - U w_A(t)|_2 where run A trains on `data` and run B trains
/// on the rotated data from the transported initialization U w_A(0).
double equivariance_gap(Algo algo, const Dataset& data, const ColMat& U, double t_end, double dt,
                        double alpha = 0.0);

}  // namespace sparselog
