#pragma once
//
// Truncated Taylor series ("jets"): c[j] = f^{(j)}(t0) / j!, j <= N.
// Arithmetic is exact to roundoff in every retained coefficient, so nested
// derivative operators can be applied without finite differencing.
//

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>

namespace curvlens {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T, int N>
struct Jet {
  static_assert(N >= 0);
  std::array<T, N + 1> c{};

  Jet() = default;
  Jet(T v) { c[0] = v; } // NOLINT: scalars promote to constant jets
  template <class U>
    requires(!std::is_same_v<U, T> && std::is_convertible_v<U, T>)
  Jet(const Jet<U, N>& o) {
    for (int j = 0; j <= N; ++j)
      c[j] = T(o.c[j]);
  }

  static Jet variable(T t0) {
    Jet r;
    r.c[0] = t0;
    if constexpr (N >= 1)
      r.c[1] = T(1);
    return r;
  }

  T value() const { return c[0]; }
  // j-th derivative at t0
  T derivative(int j) const {
    double f = 1.0;
    for (int i = 2; i <= j; ++i)
      f *= i;
    return c[j] * f;
  }

  // d/dt; the top coefficient is lost (set to zero).
  Jet differentiate() const {
    Jet r;
    for (int j = 0; j < N; ++j)
      r.c[j] = c[j + 1] * T(j + 1);
    return r;
  }

  Jet operator-() const {
    Jet r;
    for (int j = 0; j <= N; ++j)
      r.c[j] = -c[j];
    return r;
  }
  Jet& operator+=(const Jet& o) {
    for (int j = 0; j <= N; ++j)
      c[j] += o.c[j];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int j = 0; j <= N; ++j)
      c[j] -= o.c[j];
    return *this;
  }
};

template <class A, class B>
using jet_common_t = decltype(std::declval<A>() * std::declval<B>());

template <class A, class B, int N>
Jet<jet_common_t<A, B>, N> operator+(const Jet<A, N>& a, const Jet<B, N>& b) {
  Jet<jet_common_t<A, B>, N> r;
  for (int j = 0; j <= N; ++j)
    r.c[j] = a.c[j] + b.c[j];
  return r;
}
template <class A, class B, int N>
Jet<jet_common_t<A, B>, N> operator-(const Jet<A, N>& a, const Jet<B, N>& b) {
  Jet<jet_common_t<A, B>, N> r;
  for (int j = 0; j <= N; ++j)
    r.c[j] = a.c[j] - b.c[j];
  return r;
}
template <class A, class B, int N>
Jet<jet_common_t<A, B>, N> operator*(const Jet<A, N>& a, const Jet<B, N>& b) {
  Jet<jet_common_t<A, B>, N> r;
  for (int k = 0; k <= N; ++k) {
    jet_common_t<A, B> s{};
    for (int j = 0; j <= k; ++j)
      s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}
template <class A, class B, int N>
Jet<jet_common_t<A, B>, N> operator/(const Jet<A, N>& a, const Jet<B, N>& b) {
  using R = jet_common_t<A, B>;
  Jet<R, N> r;
  for (int k = 0; k <= N; ++k) {
    R s = a.c[k];
    for (int j = 1; j <= k; ++j)
      s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  return r;
}

// scalar mixes
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator*(const Jet<A, N>& a, S s) {
  Jet<jet_common_t<A, S>, N> r;
  for (int j = 0; j <= N; ++j)
    r.c[j] = a.c[j] * s;
  return r;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator*(S s, const Jet<A, N>& a) {
  return a * s;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator+(const Jet<A, N>& a, S s) {
  Jet<jet_common_t<A, S>, N> r(a);
  r.c[0] += s;
  return r;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator+(S s, const Jet<A, N>& a) {
  return a + s;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator-(const Jet<A, N>& a, S s) {
  return a + (-s);
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator-(S s, const Jet<A, N>& a) {
  return (-a) + s;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator/(const Jet<A, N>& a, S s) {
  Jet<jet_common_t<A, S>, N> r;
  for (int j = 0; j <= N; ++j)
    r.c[j] = a.c[j] / s;
  return r;
}
template <class A, class S, int N>
  requires(std::is_arithmetic_v<S> || is_complex<S>::value)
Jet<jet_common_t<A, S>, N> operator/(S s, const Jet<A, N>& a) {
  return Jet<jet_common_t<A, S>, N>(jet_common_t<A, S>(s)) / a;
}

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
  Jet<T, N> r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T s{};
    for (int j = 1; j <= k; ++j)
      s += T(j) * a.c[j] * r.c[k - j];
    r.c[k] = s / T(k);
  }
  return r;
}

// sin and cos share one recurrence
template <class T, int N>
void sincos(const Jet<T, N>& a, Jet<T, N>& s, Jet<T, N>& co) {
  s.c[0] = std::sin(a.c[0]);
  co.c[0] = std::cos(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T ss{}, cc{};
    for (int j = 1; j <= k; ++j) {
      ss += T(j) * a.c[j] * co.c[k - j];
      cc -= T(j) * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / T(k);
    co.c[k] = cc / T(k);
  }
}
template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sincos(a, s, c);
  return s;
}
template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sincos(a, s, c);
  return c;
}

template <class T, int N>
void sinhcosh(const Jet<T, N>& a, Jet<T, N>& s, Jet<T, N>& co) {
  s.c[0] = std::sinh(a.c[0]);
  co.c[0] = std::cosh(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T ss{}, cc{};
    for (int j = 1; j <= k; ++j) {
      ss += T(j) * a.c[j] * co.c[k - j];
      cc += T(j) * a.c[j] * s.c[k - j];
    }
    s.c[k] = ss / T(k);
    co.c[k] = cc / T(k);
  }
}
template <class T, int N>
Jet<T, N> sinh(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sinhcosh(a, s, c);
  return s;
}
template <class T, int N>
Jet<T, N> cosh(const Jet<T, N>& a) {
  Jet<T, N> s, c;
  sinhcosh(a, s, c);
  return c;
}

} // namespace curvlens
