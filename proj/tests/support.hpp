// Small helpers shared by the unit tests.
#ifndef DIRACSOC_TESTS_SUPPORT_HPP
#define DIRACSOC_TESTS_SUPPORT_HPP

#include <random>

#include "diracsoc/types.hpp"

namespace testing_support {

using diracsoc::Complex;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline Complex random_complex() { return {uniform(), uniform()}; }

inline diracsoc::Upper4 random_upper() {
  return diracsoc::Upper4(random_complex(), random_complex(), random_complex(), random_complex());
}

inline diracsoc::Lower4 random_lower() {
  return diracsoc::Lower4(random_complex(), random_complex(), random_complex(), random_complex());
}

inline diracsoc::Mat4 random_antisymmetric() {
  diracsoc::Mat4 F = diracsoc::Mat4::Zero();
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu + 1; nu < 4; ++nu) {
      F(mu, nu) = random_complex();
      F(nu, mu) = -F(mu, nu);
    }
  return F;
}

// Leibniz expansion over all 24 permutations; independent of any LU code.
inline Complex leibniz_det(const diracsoc::Mat4& M) {
  int p[4] = {0, 1, 2, 3};
  Complex det = 0.0;
  auto sign = [&] {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) inv += p[i] > p[j];
    return inv % 2 ? -1.0 : 1.0;
  };
  do {
    det += sign() * M(0, p[0]) * M(1, p[1]) * M(2, p[2]) * M(3, p[3]);
  } while (std::next_permutation(p, p + 4));
  return det;
}

}  // namespace testing_support

#endif
