#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> yields exact second
// derivatives: seed the outer tangent along x_i and the inner along x_j and
// read d.d as d2f/dx_i dx_j.

#include <cmath>
#include <type_traits>

namespace semiconvex {

template <class T>
struct Dual {
  T v{};
  T d{};

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value), d(0.0) {}  // NOLINT: implicit by design of AD
  constexpr Dual(const T& value, const T& tangent) : v(value), d(tangent) {}

  template <class U = T>
    requires(!std::is_same_v<U, double>)
  constexpr Dual(const T& value) : v(value), d(0.0) {}  // NOLINT

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    T inv = 1.0 / o.v;
    d = (d - v * inv * o.d) * inv;
    v *= inv;
    return *this;
  }
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

/// Plain value of a possibly nested dual.
inline double value_of(double x) { return x; }
template <class T>
double value_of(const Dual<T>& x) {
  return value_of(x.v);
}

template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <class T>
Dual<T> operator+(Dual<T> a, const Dual<T>& b) {
  return a += b;
}
template <class T>
Dual<T> operator-(Dual<T> a, const Dual<T>& b) {
  return a -= b;
}
template <class T>
Dual<T> operator*(Dual<T> a, const Dual<T>& b) {
  return a *= b;
}
template <class T>
Dual<T> operator/(Dual<T> a, const Dual<T>& b) {
  return a /= b;
}

template <class T>
Dual<T> operator+(Dual<T> a, double b) {
  a.v += b;
  return a;
}
template <class T>
Dual<T> operator+(double b, Dual<T> a) {
  a.v += b;
  return a;
}
template <class T>
Dual<T> operator-(Dual<T> a, double b) {
  a.v -= b;
  return a;
}
template <class T>
Dual<T> operator-(double b, const Dual<T>& a) {
  return {b - a.v, -a.d};
}
template <class T>
Dual<T> operator*(Dual<T> a, double b) {
  a.v *= b;
  a.d *= b;
  return a;
}
template <class T>
Dual<T> operator*(double b, Dual<T> a) {
  a.v *= b;
  a.d *= b;
  return a;
}
template <class T>
Dual<T> operator/(Dual<T> a, double b) {
  a.v /= b;
  a.d /= b;
  return a;
}
template <class T>
Dual<T> operator/(double b, const Dual<T>& a) {
  T inv = 1.0 / a.v;
  return {b * inv, -b * inv * inv * a.d};
}

template <class T>
bool operator<(const Dual<T>& a, const Dual<T>& b) {
  return value_of(a) < value_of(b);
}
template <class T>
bool operator<(const Dual<T>& a, double b) {
  return value_of(a) < b;
}
template <class T>
bool operator>(const Dual<T>& a, double b) {
  return value_of(a) > b;
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos, std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos, std::sin;
  return {cos(a.v), -sin(a.v) * a.d};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
  using std::cos, std::tan;
  T c = cos(a.v);
  return {tan(a.v), a.d / (c * c)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> abs(const Dual<T>& a) {
  return value_of(a.v) < 0.0 ? -a : a;
}
template <class T>
Dual<T> sinh(const Dual<T>& a) {
  using std::cosh, std::sinh;
  return {sinh(a.v), cosh(a.v) * a.d};
}
template <class T>
Dual<T> cosh(const Dual<T>& a) {
  using std::cosh, std::sinh;
  return {cosh(a.v), sinh(a.v) * a.d};
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  T t = tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
template <class T>
Dual<T> atan(const Dual<T>& a) {
  using std::atan;
  return {atan(a.v), a.d / (1.0 + a.v * a.v)};
}
template <class T>
Dual<T> asin(const Dual<T>& a) {
  using std::asin, std::sqrt;
  return {asin(a.v), a.d / sqrt(1.0 - a.v * a.v)};
}
template <class T>
Dual<T> acos(const Dual<T>& a) {
  using std::acos, std::sqrt;
  return {acos(a.v), -a.d / sqrt(1.0 - a.v * a.v)};
}

/// Integer powers by repeated squaring: keeps x^3 differentiable for x < 0,
/// which exp(3 log x) would not.
template <class T>
T pow_int(T base, long n) {
  if (n < 0) return 1.0 / pow_int(base, -n);
  T result(1.0);
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
  double ip;
  if (std::modf(p, &ip) == 0.0 && std::abs(p) < 64.0) return pow_int(a, static_cast<long>(p));
  using std::pow;
  return {pow(a.v, p), p * pow(a.v, p - 1.0) * a.d};
}
inline bool is_constant(double) { return true; }
template <class T>
bool is_constant(const Dual<T>& x) {
  return is_constant(x.v) && value_of(x.d) == 0.0 && is_constant(x.d);
}

template <class T>
Dual<T> pow(const Dual<T>& a, const Dual<T>& b) {
  if (is_constant(b)) return pow(a, value_of(b));
  return exp(b * log(a));
}

inline double pow_real(double a, double p) {
  double ip;
  if (std::modf(p, &ip) == 0.0 && std::abs(p) < 64.0) return pow_int(a, static_cast<long>(p));
  return std::pow(a, p);
}

}  // namespace semiconvex
