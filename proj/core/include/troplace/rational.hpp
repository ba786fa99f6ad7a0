#pragma once

#include <gmpxx.h>

#include <optional>
#include <type_traits>
#include <vector>

namespace troplace {

using Rational = mpq_class;
using RationalMatrix = std::vector<std::vector<Rational>>;

inline double to_double(double x) { return x; }
// nearest double; mpq get_d alone truncates
double to_double(const Rational& x);

// Exact determinant by fraction-free elimination over the rationals.
Rational determinant(RationalMatrix a);

// Exact solve of a square system; nullopt when singular.
std::optional<std::vector<Rational>> solve_exact(RationalMatrix a, std::vector<Rational> b);

}  // namespace troplace

namespace troplace {

template <class T>
struct scalar_traits;
template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
};
template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
};

inline double abs_d(double x) { return x < 0 ? -x : x; }
inline double abs_d(const Rational& x) { return x < 0 ? -x.get_d() : x.get_d(); }

// Shortest decimal that reads back as x, taken exactly: 0.1 becomes 1/10.
Rational decimal_rational(double x);

// Input conversion; exact types read doubles as their shortest decimal.
template <class T, class S>
T scalar_cast(const S& x) {
  if constexpr (scalar_traits<T>::exact && std::is_same_v<S, double>)
    return decimal_rational(x);
  else
    return T(x);
}

// Zero test: exact for rationals, |x| <= tol otherwise.
template <class T>
bool is_zero(const T& x, double tol) {
  if constexpr (scalar_traits<T>::exact)
    return x == 0;
  else
    return abs_d(x) <= tol;
}

}  // namespace troplace
