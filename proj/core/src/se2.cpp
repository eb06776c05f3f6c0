#include "radloc/se2.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace radloc {
namespace {

// Below this |omega| the V-matrix coefficients switch to their series form.
constexpr double kSmallAngle = 1e-10;

}  // namespace

double normalize_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped = std::numbers::pi;
  return wrapped;
}

Matrix3 Pose2::matrix() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  Matrix3 m;
  m << c, -s, x_, s, c, y_, 0.0, 0.0, 1.0;
  return m;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta());
  const double s = std::sin(a.theta());
  return {a.x() + c * b.x() - s * b.y(), a.y() + s * b.x() + c * b.y(), a.theta() + b.theta()};
}

Pose2 inverse(const Pose2& p) {
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  return {-c * p.x() - s * p.y(), s * p.x() - c * p.y(), -p.theta()};
}

Pose2 between(const Pose2& a, const Pose2& b) { return compose(inverse(a), b); }

Pose2 exp(const Twist2& xi) {
  const double w = xi.omega;
  double a;  // sin(w) / w
  double b;  // (1 - cos(w)) / w
  if (std::abs(w) < kSmallAngle) {
    a = 1.0 - w * w / 6.0;
    b = 0.5 * w;
  } else {
    const double sh = std::sin(0.5 * w);
    a = std::sin(w) / w;
    b = 2.0 * sh * sh / w;
  }
  return {a * xi.rho_x - b * xi.rho_y, b * xi.rho_x + a * xi.rho_y, w};
}

Twist2 log(const Pose2& p) {
  const double w = p.theta();
  const double half = 0.5 * w;
  double a;  // (w/2) cot(w/2)
  if (std::abs(w) < kSmallAngle) {
    a = 1.0 - w * w / 12.0;
  } else {
    a = half / std::tan(half);
  }
  return {a * p.x() + half * p.y(), -half * p.x() + a * p.y(), w};
}

Point2 transform_point(const Pose2& p, const Point2& pt) {
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  return {p.x() + c * pt.x() - s * pt.y(), p.y() + s * pt.x() + c * pt.y()};
}

Matrix3 adjoint(const Pose2& p) {
  const double c = std::cos(p.theta());
  const double s = std::sin(p.theta());
  Matrix3 ad;
  ad << c, -s, p.y(), s, c, -p.x(), 0.0, 0.0, 1.0;
  return ad;
}

Matrix3 right_jacobian(const Twist2& xi) {
  const double w = xi.omega;
  const double r1 = xi.rho_x;
  const double r2 = xi.rho_y;
  double sw, cw, t1, t2;
  if (std::abs(w) < 1e-3) {
    // sin(w)/w, (1-cos(w))/w, (w - sin(w))/w^2, (1-cos(w))/w^2 by Taylor series.
    const double w2 = w * w;
    sw = 1.0 - w2 / 6.0 + w2 * w2 / 120.0;
    cw = 0.5 * w - w * w2 / 24.0 + w * w2 * w2 / 720.0;
    t1 = w / 6.0 - w * w2 / 120.0 + w * w2 * w2 / 5040.0;
    t2 = 0.5 - w2 / 24.0 + w2 * w2 / 720.0;
  } else {
    const double sh = std::sin(0.5 * w);
    sw = std::sin(w) / w;
    cw = 2.0 * sh * sh / w;
    t1 = (w - std::sin(w)) / (w * w);
    t2 = 2.0 * sh * sh / (w * w);
  }
  Matrix3 j;
  j << sw, cw, r1 * t1 - r2 * t2,
      -cw, sw, r1 * t2 + r2 * t1,
      0.0, 0.0, 1.0;
  return j;
}

Matrix3 right_jacobian_inverse(const Twist2& xi) { return right_jacobian(xi).inverse(); }

}  // namespace radloc
