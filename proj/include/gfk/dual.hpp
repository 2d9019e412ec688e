#ifndef GFK_DUAL_HPP
#define GFK_DUAL_HPP

#include <array>
#include <cmath>
#include <concepts>

#include "gfk/tape.hpp"

namespace gfk {

template <class T>
struct Dual;

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }
template <class T>
double value_of(const Dual<T>& x) { return value_of(x.v); }

// Forward-mode scalar carrying three directional derivatives (the spatial
// seeds x, y, z). The payload type T may itself be a Var, which nests forward
// over reverse: spatial derivatives become differentiable quantities on the
// tape. T = Dual<double> gives second spatial derivatives.
template <class T>
struct Dual {
  T v{};
  std::array<T, 3> d{};

  Dual() = default;
  Dual(const T& value) : v(value) {}  // NOLINT: constants promote implicitly
  Dual(double value)                  // NOLINT
    requires(!std::same_as<T, double>)
      : v(value) {}
  Dual(const T& value, const std::array<T, 3>& deriv) : v(value), d(deriv) {}

  // Seeded coordinate: derivative 1 along axis k.
  static Dual seeded(const T& value, int k) {
    Dual r(value);
    r.d[static_cast<std::size_t>(k)] = T(1.0);
    return r;
  }
};

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]}};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]}};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v,
          {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1],
           a.d[2] * b.v + a.v * b.d[2]}};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  const T inv = T(1.0) / b.v;
  const T q = a.v * inv;
  return {q, {(a.d[0] - q * b.d[0]) * inv, (a.d[1] - q * b.d[1]) * inv,
              (a.d[2] - q * b.d[2]) * inv}};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, {-a.d[0], -a.d[1], -a.d[2]}};
}

// Mixed arithmetic with plain doubles (no derivative payload).
template <class T>
Dual<T> operator+(const Dual<T>& a, double b) { return a + Dual<T>(b); }
template <class T>
Dual<T> operator+(double a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
Dual<T> operator-(const Dual<T>& a, double b) { return a - Dual<T>(b); }
template <class T>
Dual<T> operator-(double a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.v * b, {a.d[0] * b, a.d[1] * b, a.d[2] * b}};
}
template <class T>
Dual<T> operator*(double a, const Dual<T>& b) { return b * a; }
template <class T>
Dual<T> operator/(const Dual<T>& a, double b) { return a * (1.0 / b); }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

// Mixed arithmetic with the payload scalar itself (e.g. Var with Dual<Var>).
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator+(const Dual<T>& a, const T& b) { return a + Dual<T>(b); }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator+(const T& a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator-(const Dual<T>& a, const T& b) { return a - Dual<T>(b); }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator-(const T& a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator*(const Dual<T>& a, const T& b) {
  return {a.v * b, {a.d[0] * b, a.d[1] * b, a.d[2] * b}};
}
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator*(const T& a, const Dual<T>& b) { return b * a; }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator/(const Dual<T>& a, const T& b) { return a / Dual<T>(b); }
template <class T>
  requires(!std::same_as<T, double>)
Dual<T> operator/(const T& a, const Dual<T>& b) { return Dual<T>(a) / b; }

template <class T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) { return a = a + b; }
template <class T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) { return a = a - b; }
template <class T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) { return a = a * b; }

template <class T>
Dual<T> chain(const T& fv, const T& dfdv, const Dual<T>& a) {
  return {fv, {dfdv * a.d[0], dfdv * a.d[1], dfdv * a.d[2]}};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return chain(e, e, a);
}
template <class T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return chain(log(a.v), T(1.0) / a.v, a);
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  return chain(s, T(0.5) / s, a);
}
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  return chain(t, T(1.0) - t * t, a);
}
template <class T>
Dual<T> sigmoid(const Dual<T>& a) {
  const T s = sigmoid(a.v);
  return chain(s, s * (T(1.0) - s), a);
}
template <class T>
Dual<T> max(const Dual<T>& a, const Dual<T>& b) {
  return value_of(a.v) >= value_of(b.v) ? a : b;
}

}  // namespace gfk

#endif
