#pragma once

#include <array>
#include <cmath>

// Forward-mode automatic differentiation on fixed-width dual numbers.
// Dual<double, N> carries a value and N first derivatives; nesting the type
// (Dual<Dual<double, N>, M>) carries second derivatives. The kinematic chain
// is templated on the scalar, so Jacobians and directional Jacobian rates
// come out exact to machine precision.

namespace snakesim {

template <typename T, int N>
struct Dual {
  T val{};
  std::array<T, N> der{};

  Dual() = default;
  Dual(const T& v) : val(v) {}  // NOLINT: implicit lift of a constant
  template <typename U = T, typename = std::enable_if_t<!std::is_same_v<U, double>>>
  Dual(double v) : val(v) {}  // NOLINT: lift through nested levels
};

// scalar_value strips all derivative structure (for branching in kernels).
inline double scalar_value(double x) { return x; }
template <typename T, int N>
double scalar_value(const Dual<T, N>& x) { return scalar_value(x.val); }

template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.val = -a.val;
  for (int i = 0; i < N; ++i) r.der[i] = -a.der[i];
  return r;
}

template <typename T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.val = a.val + b.val;
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] + b.der[i];
  return r;
}

template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.val = a.val - b.val;
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] - b.der[i];
  return r;
}

template <typename T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.val = a.val * b.val;
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] * b.val + a.val * b.der[i];
  return r;
}

template <typename T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
  Dual<T, N> r;
  r.val = a.val / b.val;
  for (int i = 0; i < N; ++i)
    r.der[i] = (a.der[i] - r.val * b.der[i]) / b.val;
  return r;
}

// Mixed Dual/double forms (the double is a constant: no derivative).
template <typename T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, double b) {
  Dual<T, N> r = a;
  r.val = a.val + b;
  return r;
}
template <typename T, int N>
Dual<T, N> operator+(double a, const Dual<T, N>& b) { return b + a; }

template <typename T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, double b) {
  Dual<T, N> r = a;
  r.val = a.val - b;
  return r;
}
template <typename T, int N>
Dual<T, N> operator-(double a, const Dual<T, N>& b) {
  Dual<T, N> r = -b;
  r.val = a - b.val;
  return r;
}

template <typename T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, double b) {
  Dual<T, N> r;
  r.val = a.val * b;
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] * b;
  return r;
}
template <typename T, int N>
Dual<T, N> operator*(double a, const Dual<T, N>& b) { return b * a; }

template <typename T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, double b) { return a * (1.0 / b); }
template <typename T, int N>
Dual<T, N> operator/(double a, const Dual<T, N>& b) {
  return Dual<T, N>(a) / b;
}

template <typename T, int N>
Dual<T, N>& operator+=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a + b; }
template <typename T, int N>
Dual<T, N>& operator-=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a - b; }
template <typename T, int N>
Dual<T, N>& operator*=(Dual<T, N>& a, const Dual<T, N>& b) { return a = a * b; }

using std::cos;
using std::sin;
using std::sqrt;

template <typename T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.val = sin(a.val);
  T c = cos(a.val);
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] * c;
  return r;
}

template <typename T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.val = cos(a.val);
  T ms = -sin(a.val);
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] * ms;
  return r;
}

template <typename T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  Dual<T, N> r;
  r.val = sqrt(a.val);
  T half_inv = 0.5 / r.val;
  for (int i = 0; i < N; ++i) r.der[i] = a.der[i] * half_inv;
  return r;
}

}  // namespace snakesim
