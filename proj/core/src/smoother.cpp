#include "radloc/smoother.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace radloc {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Guards the window bound against timestamp round-off.
constexpr double kWindowSlack = 1e-9;

Matrix3 whitening(const NoiseModel& noise) {
  return Vector3(1.0 / noise.sigma_xy, 1.0 / noise.sigma_xy, 1.0 / noise.sigma_yaw).asDiagonal();
}

const Pose2& state_at(const std::vector<State>& states, std::size_t index) {
  if (index >= states.size()) throw std::invalid_argument("factor references a missing state");
  return states[index].pose;
}

void add_block(Eigen::MatrixXd& H, Eigen::VectorXd& g, std::size_t i, const Matrix3& Ji, const Vector3& r) {
  H.block<3, 3>(3 * i, 3 * i) += Ji.transpose() * Ji;
  g.segment<3>(3 * i) += Ji.transpose() * r;
}

// Gauss-Newton system of every factor whose lowest state index is below
// `limit`. H and g cover states [0, min(n, limit + 1)).
void linearize(const FactorGraph& graph, std::size_t limit, Eigen::MatrixXd& H, Eigen::VectorXd& g) {
  const std::size_t n = std::min(graph.states.size(), limit + 1);
  H.setZero(3 * n, 3 * n);
  g.setZero(3 * n);
  Matrix3 Ja;
  Matrix3 Jb;
  for (const auto& f : graph.priors) {
    if (f.index >= limit) continue;
    const Vector3 r = residual_prior(f, graph.states, &Ja);
    add_block(H, g, f.index, Ja, r);
  }
  for (const auto& f : graph.unary) {
    if (f.index >= limit) continue;
    const Vector3 r = residual_unary(f, graph.states, &Ja);
    add_block(H, g, f.index, Ja, r);
  }
  for (const auto& f : graph.odometry) {
    if (std::min(f.from_index, f.to_index) >= limit) continue;
    const Vector3 r = residual_odometry(f, graph.states, &Ja, &Jb);
    const std::size_t a = 3 * f.from_index;
    const std::size_t b = 3 * f.to_index;
    H.block<3, 3>(a, a) += Ja.transpose() * Ja;
    H.block<3, 3>(b, b) += Jb.transpose() * Jb;
    H.block<3, 3>(a, b) += Ja.transpose() * Jb;
    H.block<3, 3>(b, a) += Jb.transpose() * Ja;
    g.segment<3>(a) += Ja.transpose() * r;
    g.segment<3>(b) += Jb.transpose() * r;
  }
}

void check_indices(const FactorGraph& graph) {
  const std::size_t n = graph.states.size();
  for (const auto& f : graph.odometry) {
    if (f.to_index != f.from_index + 1) throw std::invalid_argument("OdometryFactor: to_index must be from_index + 1");
    if (f.to_index >= n) throw std::invalid_argument("OdometryFactor references a missing state");
    f.noise.validate();
  }
  for (const auto& f : graph.unary) {
    if (f.index >= n) throw std::invalid_argument("UnaryFactor references a missing state");
    f.noise.validate();
  }
  for (const auto& f : graph.priors) {
    if (f.index >= n) throw std::invalid_argument("PriorFactor references a missing state");
  }
}

std::vector<State> retract(const std::vector<State>& states, const Eigen::VectorXd& delta) {
  std::vector<State> out = states;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].pose = compose(states[i].pose, exp(Twist2::from_vector(delta.segment<3>(3 * i))));
  }
  return out;
}

// Upper-triangular S with S^T S == H; H must be symmetric positive definite
// up to round-off.
Matrix3 sqrt_information(Matrix3 H) {
  H = 0.5 * (H + H.transpose());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::LLT<Matrix3> llt(H + jitter * Matrix3::Identity());
    if (llt.info() == Eigen::Success) return llt.matrixU();
    jitter = jitter == 0.0 ? 1e-12 * std::max(1.0, H.trace()) : jitter * 10.0;
  }
  throw std::runtime_error("marginal information is not positive definite");
}

}  // namespace

void NoiseModel::validate() const {
  if (!(sigma_xy > 0.0) || !(sigma_yaw > 0.0)) throw std::invalid_argument("NoiseModel: sigmas must be positive");
}

NoiseModel default_odometry_noise() { return {0.04, 0.1 * kDegToRad}; }
NoiseModel default_unary_noise() { return {0.5, 4.5 * kDegToRad}; }

Vector3 residual_odometry(const OdometryFactor& factor, const std::vector<State>& states, Matrix3* jacobian_from,
                          Matrix3* jacobian_to) {
  const Pose2& a = state_at(states, factor.from_index);
  const Pose2& b = state_at(states, factor.to_index);
  const Pose2 relative = between(a, b);
  const Vector3 r = log(compose(factor.measurement, inverse(relative))).vector();
  if (jacobian_from || jacobian_to) {
    const Matrix3 W = whitening(factor.noise) * right_jacobian_inverse(Twist2::from_vector(r));
    if (jacobian_from) *jacobian_from = W;
    if (jacobian_to) *jacobian_to = -W * adjoint(relative);
  }
  return factor.noise.whiten(r);
}

Vector3 residual_unary(const UnaryFactor& factor, const std::vector<State>& states, Matrix3* jacobian) {
  const Pose2& t = state_at(states, factor.index);
  const Vector3 r = log(compose(factor.measurement, inverse(t))).vector();
  if (jacobian) {
    *jacobian = -whitening(factor.noise) * right_jacobian_inverse(Twist2::from_vector(r)) * adjoint(t);
  }
  return factor.noise.whiten(r);
}

Vector3 residual_prior(const PriorFactor& factor, const std::vector<State>& states, Matrix3* jacobian) {
  const Pose2& t = state_at(states, factor.index);
  const Vector3 r = log(between(factor.measurement, t)).vector();
  if (jacobian) *jacobian = factor.sqrt_information * right_jacobian_inverse(Twist2::from_vector(r));
  return factor.sqrt_information * r;
}

double total_cost(const FactorGraph& graph) {
  double cost = 0.0;
  for (const auto& f : graph.priors) cost += residual_prior(f, graph.states).squaredNorm();
  for (const auto& f : graph.unary) cost += residual_unary(f, graph.states).squaredNorm();
  for (const auto& f : graph.odometry) cost += residual_odometry(f, graph.states).squaredNorm();
  return cost;
}

OptimizeReport optimize(FactorGraph& graph, const OptimizerOptions& options) {
  if (graph.states.empty()) throw std::invalid_argument("optimize: graph has no states");
  if (graph.priors.empty() && graph.unary.empty()) {
    throw std::invalid_argument("optimize: gauge is free (no prior or unary factor)");
  }
  check_indices(graph);

  OptimizeReport report;
  double cost = total_cost(graph);
  report.initial_cost = cost;
  report.accepted_costs.push_back(cost);
  double lambda = options.initial_damping;
  constexpr double kMaxDamping = 1e12;

  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  while (report.iterations < options.max_iterations) {
    ++report.iterations;
    linearize(graph, graph.states.size(), H, g);
    bool accepted = false;
    double step = std::numeric_limits<double>::infinity();
    while (lambda <= kMaxDamping) {
      Eigen::MatrixXd damped = H;
      damped.diagonal() *= 1.0 + lambda;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
      const Eigen::VectorXd delta = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      step = delta.cwiseAbs().maxCoeff();
      std::vector<State> candidate = retract(graph.states, delta);
      std::swap(candidate, graph.states);
      const double new_cost = total_cost(graph);
      if (new_cost <= cost) {
        cost = new_cost;
        report.accepted_costs.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        break;
      }
      std::swap(candidate, graph.states);
      if (step < options.step_tolerance) break;
      lambda *= 10.0;
    }
    if (step < options.step_tolerance || cost == 0.0) {
      report.converged = true;
      break;
    }
    if (!accepted) break;
  }
  report.final_cost = cost;
  return report;
}

void WindowConfig::validate() const {
  if (!(window_duration > 0.0)) throw std::invalid_argument("WindowConfig: window_duration must be positive");
  odometry_noise.validate();
  unary_noise.validate();
  if (!(prior_sigma_xy > 0.0) || !(prior_sigma_yaw > 0.0)) {
    throw std::invalid_argument("WindowConfig: prior sigmas must be positive");
  }
}

FactorGraphWindow::FactorGraphWindow(const Pose2& initial_guess, WindowConfig config)
    : config_(config), initial_guess_(initial_guess) {
  config_.validate();
}

const OptimizeReport& FactorGraphWindow::advance(double timestamp, const std::optional<Pose2>& odometry,
                                                 const std::optional<UnaryMeasurement>& unary) {
  if (!std::isfinite(timestamp)) throw std::invalid_argument("advance: timestamp must be finite");
  if (unary && unary->fitness < config_.tau_fit) {
    throw std::invalid_argument("advance: unary measurement below the fitness gate");
  }
  if (graph_.states.empty()) {
    if (odometry) throw std::invalid_argument("advance: the first state takes no odometry");
    graph_.states.push_back({timestamp, initial_guess_});
    const Matrix3 S =
        Vector3(1.0 / config_.prior_sigma_xy, 1.0 / config_.prior_sigma_xy, 1.0 / config_.prior_sigma_yaw)
            .asDiagonal();
    graph_.priors.push_back({0, initial_guess_, S});
  } else {
    if (!(timestamp > graph_.states.back().timestamp)) {
      throw std::invalid_argument("advance: timestamps must be strictly increasing");
    }
    if (!odometry) throw std::invalid_argument("advance: odometry is required after the first state");
    const std::size_t from = graph_.states.size() - 1;
    graph_.states.push_back({timestamp, compose(graph_.states.back().pose, *odometry)});
    graph_.odometry.push_back({from, from + 1, *odometry, config_.odometry_noise});
  }
  if (unary) {
    graph_.unary.push_back({graph_.states.size() - 1, unary->pose, config_.unary_noise, unary->fitness});
  }

  std::size_t stale = 0;
  while (stale < graph_.states.size() &&
         timestamp - graph_.states[stale].timestamp > config_.window_duration + kWindowSlack) {
    ++stale;
  }
  if (stale > 0) marginalize_before(stale);

  report_ = optimize(graph_, config_.optimizer);
  return report_;
}

void FactorGraphWindow::marginalize_before(std::size_t count) {
  // Dense system over states [0, count]; the first `count` blocks are eliminated.
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  linearize(graph_, count, H, g);
  const Eigen::Index m = static_cast<Eigen::Index>(3 * count);
  const Eigen::MatrixXd Hmm = H.topLeftCorner(m, m);
  const Eigen::MatrixXd Hkm = H.bottomLeftCorner(3, m);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(Hmm);
  const Matrix3 H_marg = H.bottomRightCorner<3, 3>() - Hkm * ldlt.solve(Hkm.transpose());
  const Vector3 g_marg = g.tail<3>() - Hkm * ldlt.solve(g.head(m));

  const Matrix3 S = sqrt_information(H_marg);
  const Matrix3 H_sym = S.transpose() * S;
  const Vector3 shift = -H_sym.ldlt().solve(g_marg);
  const Pose2 anchor = compose(graph_.states[count].pose, exp(Twist2::from_vector(shift)));

  FactorGraph kept;
  kept.states.assign(graph_.states.begin() + static_cast<std::ptrdiff_t>(count), graph_.states.end());
  kept.priors.push_back({0, anchor, S});
  for (const auto& f : graph_.priors) {
    if (f.index >= count) kept.priors.push_back({f.index - count, f.measurement, f.sqrt_information});
  }
  for (const auto& f : graph_.unary) {
    if (f.index >= count) kept.unary.push_back({f.index - count, f.measurement, f.noise, f.fitness});
  }
  for (const auto& f : graph_.odometry) {
    if (f.from_index >= count) kept.odometry.push_back({f.from_index - count, f.to_index - count, f.measurement, f.noise});
  }
  graph_ = std::move(kept);
  dropped_ += count;
}

FactorGraphWindow initialize(const GeoReference& origin, WindowConfig config) {
  return FactorGraphWindow(origin_pose(origin), config);
}

}  // namespace radloc
