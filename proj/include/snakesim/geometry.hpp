#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cmath>

#include "snakesim/dual.hpp"

// Minimal 3-vector / 3x3-matrix / rigid-pose templates that accept dual
// scalars. Heavy linear algebra stays in Eigen on plain doubles; these exist
// only so the kinematic chain can be differentiated by substituting scalars.

namespace snakesim {

template <typename T>
struct Vec3T {
  T x{}, y{}, z{};
};

template <typename T>
struct Mat3T {
  T m[3][3]{};

  static Mat3T identity() {
    Mat3T r;
    r.m[0][0] = 1.0; r.m[1][1] = 1.0; r.m[2][2] = 1.0;
    return r;
  }
};

template <typename T>
Vec3T<T> operator+(const Vec3T<T>& a, const Vec3T<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

template <typename T>
Vec3T<T> mat_vec(const Mat3T<T>& A, const Vec3T<T>& v) {
  return {A.m[0][0] * v.x + A.m[0][1] * v.y + A.m[0][2] * v.z,
          A.m[1][0] * v.x + A.m[1][1] * v.y + A.m[1][2] * v.z,
          A.m[2][0] * v.x + A.m[2][1] * v.y + A.m[2][2] * v.z};
}

template <typename T>
Mat3T<T> mat_mul(const Mat3T<T>& A, const Mat3T<T>& B) {
  Mat3T<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = A.m[i][0] * B.m[0][j] + A.m[i][1] * B.m[1][j] +
                  A.m[i][2] * B.m[2][j];
  return r;
}

// Right-multiplication by a constant (double) matrix / action on a constant
// vector; avoids lifting constants to dual scalars in hot paths.
template <typename T>
Mat3T<T> mat_mul_c(const Mat3T<T>& A, const Mat3T<double>& B) {
  Mat3T<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = A.m[i][0] * B.m[0][j] + A.m[i][1] * B.m[1][j] +
                  A.m[i][2] * B.m[2][j];
  return r;
}

template <typename T>
Vec3T<T> mat_vec_c(const Mat3T<T>& A, const Vec3T<double>& v) {
  return {A.m[0][0] * v.x + A.m[0][1] * v.y + A.m[0][2] * v.z,
          A.m[1][0] * v.x + A.m[1][1] * v.y + A.m[1][2] * v.z,
          A.m[2][0] * v.x + A.m[2][1] * v.y + A.m[2][2] * v.z};
}

template <typename T>
struct PoseT {
  Mat3T<T> R = Mat3T<T>::identity();
  Vec3T<T> p{};
};

// compose(A, B): frame B expressed in A's parent (A then B).
template <typename T>
PoseT<T> compose(const PoseT<T>& A, const PoseT<T>& B) {
  PoseT<T> r;
  r.R = mat_mul(A.R, B.R);
  r.p = A.p + mat_vec(A.R, B.p);
  return r;
}

template <typename T>
Vec3T<T> transform_point(const PoseT<T>& A, const Vec3T<T>& q) {
  return A.p + mat_vec(A.R, q);
}

template <typename T>
Mat3T<T> rot_x(const T& a) {
  Mat3T<T> r = Mat3T<T>::identity();
  T c = cos(a), s = sin(a);
  r.m[1][1] = c; r.m[1][2] = -s;
  r.m[2][1] = s; r.m[2][2] = c;
  return r;
}

template <typename T>
Mat3T<T> rot_y(const T& a) {
  Mat3T<T> r = Mat3T<T>::identity();
  T c = cos(a), s = sin(a);
  r.m[0][0] = c; r.m[0][2] = s;
  r.m[2][0] = -s; r.m[2][2] = c;
  return r;
}

template <typename T>
Mat3T<T> rot_z(const T& a) {
  Mat3T<T> r = Mat3T<T>::identity();
  T c = cos(a), s = sin(a);
  r.m[0][0] = c; r.m[0][1] = -s;
  r.m[1][0] = s; r.m[1][1] = c;
  return r;
}

// Intrinsic ZYX Euler angles: R = Rz(gamma) * Ry(beta) * Rx(alpha).
// eul packs (alpha, beta, gamma).
template <typename T>
Mat3T<T> rot_euler_zyx(const Vec3T<T>& eul) {
  return mat_mul(rot_z(eul.z), mat_mul(rot_y(eul.y), rot_x(eul.x)));
}

inline Eigen::Matrix3d to_eigen(const Mat3T<double>& A) {
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = A.m[i][j];
  return r;
}

inline Eigen::Vector3d to_eigen(const Vec3T<double>& v) {
  return {v.x, v.y, v.z};
}

inline Mat3T<double> from_eigen(const Eigen::Matrix3d& A) {
  Mat3T<double> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = A(i, j);
  return r;
}

// Extract ZYX angles from a rotation matrix. At the |R(2,0)| = 1 degeneracy
// only alpha -/+ gamma is determined; gamma is pinned to 0.
inline Eigen::Vector3d euler_zyx_from_R(const Eigen::Matrix3d& R) {
  double sb = -R(2, 0);
  sb = std::clamp(sb, -1.0, 1.0);
  double beta = std::asin(sb);
  if (std::abs(sb) < 1.0 - 1e-12) {
    return {std::atan2(R(2, 1), R(2, 2)), beta, std::atan2(R(1, 0), R(0, 0))};
  }
  if (sb > 0.0)  // beta = +pi/2: R(0,1) = sin(a - g), R(0,2) = cos(a - g)
    return {std::atan2(R(0, 1), R(0, 2)), beta, 0.0};
  // beta = -pi/2: R(0,1) = -sin(a + g), R(0,2) = -cos(a + g)
  return {std::atan2(-R(0, 1), -R(0, 2)), beta, 0.0};
}

// World angular velocity from ZYX Euler rates: omega = E(eul) * eul_dot,
// with columns [Rz*Ry*ex, Rz*ey, ez]. det(E) = cos(beta).
inline Eigen::Matrix3d euler_zyx_rate_map(const Eigen::Vector3d& eul) {
  double cb = std::cos(eul.y()), cg = std::cos(eul.z());
  double sb = std::sin(eul.y()), sg = std::sin(eul.z());
  Eigen::Matrix3d E;
  E.col(0) = Eigen::Vector3d(cg * cb, sg * cb, -sb);
  E.col(1) = Eigen::Vector3d(-sg, cg, 0.0);
  E.col(2) = Eigen::Vector3d(0.0, 0.0, 1.0);
  return E;
}

// Least-squares Euler rates reproducing omega; finite even at gimbal lock,
// where the unreachable omega component is dropped.
inline Eigen::Vector3d euler_rates_from_omega_pinv(const Eigen::Vector3d& eul,
                                                   const Eigen::Vector3d& omega) {
  Eigen::Matrix3d E = euler_zyx_rate_map(eul);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-9);
  return svd.solve(omega);
}

}  // namespace snakesim
