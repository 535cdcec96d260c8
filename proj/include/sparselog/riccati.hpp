#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparselog/model.hpp"
#include "sparselog/trainers.hpp"
#include "sparselog/types.hpp"

namespace sparselog {

/// Scalars of the coupled Riccati system
///   dw_i/dt = (w*_i a* + zeta_i) w_i - a(w) w_i^2,   w_i(0) = 1/d,
/// with w*_i = 0 off the support.
///
/// Time here runs twice as fast as the (u, v) gradient flow: the balanced
/// flow moves the predictor by -2|w| * grad, so Riccati time tau equals
/// 2 x flow time. zeta is the negative of the empirical gradient noise at w*.
struct EnvelopeModel {
  int d = 0;
  std::vector<int> support;
  Vec w_star;      // dense, length d
  double a_star = 0.0;
  double w_min = 0.0;
  int i_min = -1;
  Vec zeta;        // length d
  std::optional<double> gamma;  // noise bound when (n, eta) are known
  double delta_margin = 0.0;    // 1/2 - gamma / (a* w_min), NaN without gamma
  double eps_curvature = 0.0;   // 1 - 4 a*
  int nodes = 64;

  int s() const { return static_cast<int>(support.size()); }
  bool in_support(int i) const;
  /// w*_i a* + zeta_i.
  double rate(int i) const;
  /// delta in [1/4, 1/2): the sample-size condition n >= 256 log(2d/eta) / (a* w_min)^2.
  bool delta_ok() const;
  bool eps_ok() const { return eps_curvature > 0.0 && eps_curvature < 1.0; }

  /// General constructor; `values` are the (positive) target values on `support`.
  /// Allows s = d, unlike TargetVector.
  static EnvelopeModel make(int d, std::vector<int> support, std::vector<double> values, Vec zeta,
                            int nodes = 64);
  static EnvelopeModel from_target(const TargetVector& target, Vec zeta, int nodes = 64);
  /// zeta measured on `data` at w*, gamma from (n, d, eta).
  static EnvelopeModel measured(const TargetVector& target, const Dataset& data, double eta,
                                int nodes = 64);
};

/// RK4 integration of the coupled system, a(w) by quadrature at every stage.
Trajectory riccati_flow(const EnvelopeModel& model, double t_end, double dt,
                        const RecordPolicy& record = {});

/// State of the coupled system at each of the sorted `times`; steps never exceed
/// max_dt and land exactly on every requested time.
std::vector<Vec> riccati_flow_at(const EnvelopeModel& model, const std::vector<double>& times,
                                 double max_dt = 1e-3);

/// Solution of dw/dt = b w - c w^2 with w(0) = w0 > 0, c > 0. Stable for b -> 0.
double riccati_scalar(double w0, double b, double c, double t);

/// Envelopes for i in S. Both throw std::domain_error when w*_i a* + zeta_i <= 0.
double upper_envelope_active(double t, int i, const EnvelopeModel& model);
double lower_envelope_active(double t, int i, const EnvelopeModel& model);

struct InactiveEnvelope {
  double closed_form = 0.0;  // curvature frozen at a*
  double lower = 0.0;        // curvature frozen at 1/4
  double exp_bound = 0.0;    // (1/d) e^{zeta t}
  double exp_bound_loose = 0.0;  // (2/d) e^{zeta t}
};

InactiveEnvelope upper_envelope_inactive(double t, int i, const EnvelopeModel& model);

/// Time at which the lower envelope of the weakest active coordinate (with
/// zeta set to 0) reaches (1 - eps) w_min; obtained by inverting the closed form.
/// Throws std::domain_error when eps is outside (0, 1) or the target is not reachable.
double stopping_time(double eps, const EnvelopeModel& model);

/// The alternative expression (1/(2b)) log((4bd - 1)/(4a*/((1-eps)w_min) - 1)),
/// b = w_min a*. Kept for comparison only: it does not invert the lower envelope.
double stopping_time_alternative(double eps, const EnvelopeModel& model);

struct BoundReport {
  double term_signal = 0.0;   // eps^2 |w*|^2
  double term_noise = 0.0;    // 16 s log(2d/eta) / (n (w_min a*)^2)
  std::optional<double> term_inactive;  // c2 / d^{delta + 1/2}
  double active_total = 0.0;
  std::optional<double> total;
  double delta = 0.0;
  bool delta_ok = false;
  bool eps_ok = false;
};

/// Right-hand sides of the error bound; assumption flags are reported, not enforced.
BoundReport error_bound(const EnvelopeModel& model, double eps, int s, int n, double eta,
                            std::optional<double> c2 = std::nullopt);

struct DominanceReport {
  double stop_time = 0.0;
  std::vector<int> coords;
  std::vector<double> lower_at_stop;
  std::vector<double> rel_error;
  bool ok = false;
};

/// Every active lower envelope at T(eps) is within relative error eps of its target.
DominanceReport weakest_coordinate_dominance(const EnvelopeModel& model, double eps);

/// 0 followed by `points - 1` geometrically spaced times ending at t_end.
std::vector<double> envelope_grid(double t_end, int points = 200, double first_fraction = 1e-3);

struct EnvelopeRow {
  double t = 0.0;
  int i = 0;
  bool active = false;
  double lower = 0.0;
  double upper = 0.0;
  double flow_value = 0.0;
};

struct SandwichReport {
  std::vector<EnvelopeRow> rows;
  int violations = 0;
  double max_violation = 0.0;
  double a_min = 0.25;  // curvature range seen along the flow on the grid
  double a_max = 0.0;
  bool ok = false;
};

/// lower <= flow <= upper for every coordinate on `grid`, with slack tol * max(1, |value|).
/// Inactive coordinates use the a* closed form above and the 1/4 closed form below.
SandwichReport sandwich_check(const EnvelopeModel& model, const std::vector<double>& grid,
                              double tol = 1e-6, double max_dt = 1e-3);

/// Least-squares c2 in mass ~ c2 d^{-(delta + 1/2)}.
double fit_c2(const std::vector<double>& dims, const std::vector<double>& inactive_mass,
              double delta);

/// Largest h such that err(t) <= bound for every record with |t - t_stop| <= h (0 if it
/// fails at the record nearest t_stop).
double empirical_window(const std::vector<double>& times, const std::vector<double>& err,
                        double t_stop, double bound);

}  // namespace sparselog
