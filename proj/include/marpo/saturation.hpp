/// @file saturation.hpp
/// @brief Michaelis-Menten saturation f_K(x) = x/(|x|+K) and its derivative.
#pragma once

#include <cmath>
#include <stdexcept>

namespace marpo {

/// f_K(x) = x/(|x|+K). Bounded by 1 in modulus, Lipschitz with constant 1/K.
/// The modulus stays in the denominator so negative arguments are admissible.
inline double saturation(double x, double K) {
  if (K <= 0.0) throw std::invalid_argument("saturation: K must be positive");
  return x / (std::abs(x) + K);
}

/// f_K'(x) = K/(|x|+K)^2, one two-sided value also at x = 0. Range (0, 1/K].
inline double saturation_derivative(double x, double K) {
  if (K <= 0.0) throw std::invalid_argument("saturation: K must be positive");
  double s = std::abs(x) + K;
  return K / (s * s);
}

}  // namespace marpo
