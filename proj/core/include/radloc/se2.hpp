#pragma once

#include <Eigen/Core>

namespace radloc {

using Point2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Wraps an angle into (-pi, pi]. An input of exactly -pi maps to +pi.
double normalize_angle(double angle);

/// Element of se(2), ordered (rho_x, rho_y, omega).
struct Twist2 {
  double rho_x = 0.0;
  double rho_y = 0.0;
  double omega = 0.0;

  Vector3 vector() const { return {rho_x, rho_y, omega}; }
  static Twist2 from_vector(const Vector3& v) { return {v.x(), v.y(), v.z()}; }
};

/// Planar rigid transform stored as (x, y, theta). Every constructor and
/// operation keeps theta in (-pi, pi].
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta) : x_(x), y_(y), theta_(normalize_angle(theta)) {}

  static Pose2 identity() { return {}; }

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }
  Point2 translation() const { return {x_, y_}; }

  /// Homogeneous 3x3 form; only materialized for exp/log and Jacobians.
  Matrix3 matrix() const;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// a * b: applies b first, then a.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);
/// inverse(a) * b, the pose of b expressed in the frame of a.
Pose2 between(const Pose2& a, const Pose2& b);

Pose2 exp(const Twist2& xi);
/// Matrix logarithm followed by vee. theta == pi yields omega = +pi.
Twist2 log(const Pose2& p);

Point2 transform_point(const Pose2& p, const Point2& pt);

/// Adjoint representation in (rho, omega) ordering:
/// T exp(xi) T^-1 == exp(Ad_T xi).
Matrix3 adjoint(const Pose2& p);

/// Right Jacobian of exp: exp(xi + d) ~= exp(xi) exp(J_r(xi) d).
Matrix3 right_jacobian(const Twist2& xi);
Matrix3 right_jacobian_inverse(const Twist2& xi);

inline Pose2 operator*(const Pose2& a, const Pose2& b) { return compose(a, b); }
inline Point2 operator*(const Pose2& p, const Point2& pt) { return transform_point(p, pt); }

}  // namespace radloc
