#pragma once

#include <cmath>
#include <string>

#include "tracklab/control_map.hpp"

namespace tracklab {

struct TargetTuple {
  Vector y_d;
  Vector u_d;
};

/// min_u ||S(u) - y_d||_Y^p + ||u - u_d||_U^p. Immutable; safe to share
/// across solver workers as long as the map is reentrant.
class TrackingProblem {
 public:
  TrackingProblem(MapPtr map, Vector y_d, Vector u_d, double p, Norm state_norm, Norm control_norm)
      : map_(std::move(map)),
        y_d_(std::move(y_d)),
        u_d_(std::move(u_d)),
        p_(p),
        state_norm_(std::move(state_norm)),
        control_norm_(std::move(control_norm)) {
    require(map_ != nullptr, "tracking problem: null control-to-state map");
    require(std::isfinite(p_) && p_ > 1.0, "tracking problem: exponent p must lie in (1, inf), got " + std::to_string(p_));
    check_target(y_d_, u_d_);
    const Index ny = norm_dim(state_norm_), nu = norm_dim(control_norm_);
    require(ny < 0 || ny == map_->output_dim(), "tracking problem: state norm dimension does not match the map");
    require(nu < 0 || nu == map_->input_dim(), "tracking problem: control norm dimension does not match the map");
  }

  /// Euclidean norms on both factors.
  static TrackingProblem euclidean(MapPtr map, Vector y_d, Vector u_d, double p = 2.0) {
    const Index ny = map->output_dim(), nu = map->input_dim();
    return TrackingProblem(std::move(map), std::move(y_d), std::move(u_d), p, WeightedNorm::euclidean(ny),
                           WeightedNorm::euclidean(nu));
  }

  const ControlToStateMap& map() const { return *map_; }
  const MapPtr& map_ptr() const { return map_; }
  const Vector& y_d() const { return y_d_; }
  const Vector& u_d() const { return u_d_; }
  TargetTuple target() const { return {y_d_, u_d_}; }
  double p() const { return p_; }
  const Norm& state_norm() const { return state_norm_; }
  const Norm& control_norm() const { return control_norm_; }
  Index control_dim() const { return map_->input_dim(); }
  Index state_dim() const { return map_->output_dim(); }

  TrackingProblem with_target(const TargetTuple& t) const {
    return TrackingProblem(map_, t.y_d, t.u_d, p_, state_norm_, control_norm_);
  }

  TrackingProblem with_control_norm(Norm n) const {
    return TrackingProblem(map_, y_d_, u_d_, p_, state_norm_, std::move(n));
  }

  double state_distance(const Vector& a, const Vector& b) const { return norm(state_norm_, a - b); }
  double control_distance(const Vector& a, const Vector& b) const { return norm(control_norm_, a - b); }

  /// Distance in the product norm (||dy||^p + ||du||^p)^{1/p}.
  double product_distance(const TargetTuple& a, const TargetTuple& b) const {
    return product_norm(state_distance(a.y_d, b.y_d), control_distance(a.u_d, b.u_d), p_);
  }

 private:
  void check_target(const Vector& y_d, const Vector& u_d) const {
    require(y_d.size() == map_->output_dim(), "tracking problem: y_d has dimension " + std::to_string(y_d.size()) +
                                                  ", map output dimension is " + std::to_string(map_->output_dim()));
    require(u_d.size() == map_->input_dim(), "tracking problem: u_d has dimension " + std::to_string(u_d.size()) +
                                                 ", map input dimension is " + std::to_string(map_->input_dim()));
  }

  MapPtr map_;
  Vector y_d_;
  Vector u_d_;
  double p_;
  Norm state_norm_;
  Norm control_norm_;
};

/// Objective value given an already computed state.
inline double objective_from_state(const TrackingProblem& prob, const Vector& y, const Vector& u) {
  return std::pow(norm(prob.state_norm(), y - prob.y_d()), prob.p()) +
         std::pow(norm(prob.control_norm(), u - prob.u_d()), prob.p());
}

inline double objective(const TrackingProblem& prob, const Vector& u) {
  require(u.size() == prob.control_dim(), "objective: control has dimension " + std::to_string(u.size()) +
                                              ", expected " + std::to_string(prob.control_dim()));
  Vector y;
  try {
    y = prob.map()(u);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("objective: state evaluation failed: ") + e.what(), e.iterations(),
                           e.residual());
  }
  return objective_from_state(prob, y, u);
}

/// Problem with nu * ||u - u_d||^p in place of ||u - u_d||^p, expressed by
/// scaling the control norm by nu^{1/p}.
inline TrackingProblem rescale_nu(const TrackingProblem& prob, double nu) {
  require(std::isfinite(nu) && nu > 0.0, "rescale_nu: nu must be positive");
  if (nu == 1.0) return prob;
  return prob.with_control_norm(scaled(prob.control_norm(), std::pow(nu, 1.0 / prob.p())));
}

/// Central finite differences, 2 * dim objective evaluations.
inline Vector gradient_fd(const TrackingProblem& prob, const Vector& u, double step = 1e-6) {
  require(step > 0.0 && std::isfinite(step), "gradient_fd: step must be positive");
  require(u.allFinite(), "gradient_fd: control is not finite");
  Vector g(u.size());
  Vector probe = u;
  for (Index i = 0; i < u.size(); ++i) {
    probe[i] = u[i] + step;
    const double plus = objective(prob, probe);
    probe[i] = u[i] - step;
    const double minus = objective(prob, probe);
    probe[i] = u[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error("gradient_fd: non-finite objective at coordinate " + std::to_string(i));
    }
    g[i] = (plus - minus) / (2.0 * step);
  }
  return g;
}

}  // namespace tracklab
