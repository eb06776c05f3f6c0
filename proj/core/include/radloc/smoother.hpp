#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "radloc/geodesy.hpp"
#include "radloc/se2.hpp"

namespace radloc {

/// Isotropic planar noise: sigma_xy on both translation axes, sigma_yaw on
/// rotation. Both strictly positive.
struct NoiseModel {
  double sigma_xy = 1.0;   // m
  double sigma_yaw = 1.0;  // rad

  void validate() const;
  Vector3 whiten(const Vector3& r) const { return {r.x() / sigma_xy, r.y() / sigma_xy, r.z() / sigma_yaw}; }
};

NoiseModel default_odometry_noise();  // 0.04 m, 0.1 deg
NoiseModel default_unary_noise();     // 0.5 m, 4.5 deg

/// Relative pose measurement between consecutive states, to = from + 1.
struct OdometryFactor {
  std::size_t from_index = 0;
  std::size_t to_index = 1;
  Pose2 measurement;
  NoiseModel noise;
};

/// Map-frame pose measurement of one state. `fitness` is the registration
/// fitness the measurement came from.
struct UnaryFactor {
  std::size_t index = 0;
  Pose2 measurement;
  NoiseModel noise;
  double fitness = 1.0;
};

/// Full-information pose prior; residual S * log(Z^-1 T) in the body frame.
struct PriorFactor {
  std::size_t index = 0;
  Pose2 measurement;
  Matrix3 sqrt_information = Matrix3::Identity();
};

struct State {
  double timestamp = 0.0;
  Pose2 pose;
};

struct FactorGraph {
  std::vector<State> states;
  std::vector<OdometryFactor> odometry;
  std::vector<UnaryFactor> unary;
  std::vector<PriorFactor> priors;
};

// Whitened residuals. Jacobians are with respect to the right perturbation
// T <- T exp(delta) of each referenced state.

/// r = log(Z * inverse(between(T_from, T_to))), whitened.
Vector3 residual_odometry(const OdometryFactor& factor, const std::vector<State>& states,
                          Matrix3* jacobian_from = nullptr, Matrix3* jacobian_to = nullptr);
/// r = log(Z * inverse(T)), whitened.
Vector3 residual_unary(const UnaryFactor& factor, const std::vector<State>& states, Matrix3* jacobian = nullptr);
Vector3 residual_prior(const PriorFactor& factor, const std::vector<State>& states, Matrix3* jacobian = nullptr);

/// Sum of squared whitened residuals over every factor.
double total_cost(const FactorGraph& graph);

struct OptimizerOptions {
  std::size_t max_iterations = 100;
  double step_tolerance = 1e-8;  // max |delta| component
  double initial_damping = 1e-6;
};

struct OptimizeReport {
  std::size_t iterations = 0;
  bool converged = false;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> accepted_costs;  // non-increasing
};

/// Levenberg-Marquardt on SE(2)^n with dense normal equations. Damping scales
/// the Hessian diagonal by (1 + lambda); a step is kept only if the cost does
/// not increase.
///
/// Throws std::invalid_argument for an empty graph, for out-of-range factor
/// indices, or when neither a prior nor a unary factor fixes the gauge.
OptimizeReport optimize(FactorGraph& graph, const OptimizerOptions& options = {});

struct WindowConfig {
  double window_duration = 10.0;  // s
  NoiseModel odometry_noise = default_odometry_noise();
  NoiseModel unary_noise = default_unary_noise();
  double prior_sigma_xy = 0.01;   // m, on the initial guess
  double prior_sigma_yaw = 0.01;  // rad
  double tau_fit = 0.6;
  OptimizerOptions optimizer;

  void validate() const;
};

struct UnaryMeasurement {
  Pose2 pose;
  double fitness = 0.0;
};

/// Fixed-lag smoother over the states of the last `window_duration` seconds.
///
/// States older than the bound are marginalized: the information their
/// factors carry about the new oldest state, linearized at the current
/// estimates, becomes a single PriorFactor on that state.
class FactorGraphWindow {
 public:
  FactorGraphWindow(const Pose2& initial_guess, WindowConfig config = {});

  /// The first call places state 0 at the initial guess and takes no
  /// odometry. Later calls require odometry (pose of the new state in the
  /// frame of the previous one). Throws std::invalid_argument on a
  /// non-increasing timestamp, a missing or unexpected odometry measurement,
  /// or a unary measurement with fitness below tau_fit.
  const OptimizeReport& advance(double timestamp, const std::optional<Pose2>& odometry,
                                const std::optional<UnaryMeasurement>& unary = std::nullopt);

  const FactorGraph& graph() const { return graph_; }
  const WindowConfig& config() const { return config_; }
  const OptimizeReport& last_report() const { return report_; }
  bool empty() const { return graph_.states.empty(); }
  const State& latest() const { return graph_.states.back(); }
  /// Number of states marginalized so far; window index i is global index
  /// dropped_count() + i.
  std::size_t dropped_count() const { return dropped_; }

 private:
  void marginalize_before(std::size_t count);

  WindowConfig config_;
  Pose2 initial_guess_;
  FactorGraph graph_;
  OptimizeReport report_;
  std::size_t dropped_ = 0;
};

/// Empty window whose first state will sit at the reference's map-frame pose.
FactorGraphWindow initialize(const GeoReference& origin, WindowConfig config = {});

}  // namespace radloc
