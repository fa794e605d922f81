#include <doctest.h>

#include <cmath>

#include "diracsoc/spectrum.hpp"
#include "support.hpp"

using namespace diracsoc;
using testing_support::leibniz_det;
using testing_support::uniform;

namespace {

FourMomentum momentum(double k0, double k1, double k2 = 0, double k3 = 0) {
  FourMomentum k;
  k.k << k0, k1, k2, k3;
  return k;
}

FourMomentum random_on_shell(const PhysicalConstants& c) {
  const std::array<double, 3> s{uniform(-3, 3), uniform(-3, 3), uniform(-3, 3)};
  const auto [plus, minus] = dispersion_solve(s, c);
  return momentum(uniform() < 0 ? minus : plus, s[0], s[1], s[2]);
}

ModeState state(const FourMomentum& k) {
  ModeState s;
  s.chi << Complex(0.5, 0.1), Complex(-0.2, 0.3), Complex(0.1, 0.0), Complex(0.0, -0.6);
  s.k = k;
  return s;
}

}  // namespace

TEST_CASE("dispersion roots") {
  const PhysicalConstants c;
  auto [a, b] = dispersion_solve({0, 0, 0}, c);
  CHECK(a == 1.0);
  CHECK(b == -1.0);
  std::tie(a, b) = dispersion_solve({3, 0, 0}, c);
  CHECK(a == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK(b == -a);

  const PhysicalConstants other{0.9, 1.3, 0.7, 1.0, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const std::array<double, 3> s{uniform(-2, 2), uniform(-2, 2), uniform(-2, 2)};
    const auto [p, m] = dispersion_solve(s, other);
    for (double k0 : {p, m}) {
      const Mat4 M = momentum_operator(momentum(k0, s[0], s[1], s[2]).as_upper(), other, -1.0);
      CHECK(std::abs(leibniz_det(M)) <= 1e-9);
    }
    // bisection on Delta(k0) over [0, 10]
    auto gap = [&](double k0) { return momentum(k0, s[0], s[1], s[2]).gap(other); };
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) < 0 ? lo : hi) = mid;
    }
    CHECK(std::abs(lo - p) <= 1e-12);
  }
}

TEST_CASE("nullspace spinors") {
  const PhysicalConstants c;
  const auto rest = nullspace_spinors(momentum(1, 0, 0, 0), c);
  REQUIRE(rest.size() == 2);
  Mat4 P = Mat4::Zero();
  for (const auto& v : rest) P += v * v.adjoint();
  Mat4 expected = Mat4::Zero();
  expected(0, 0) = expected(1, 1) = 1.0;
  CHECK((P - expected).cwiseAbs().maxCoeff() <= 1e-12);

  const PhysicalConstants other{1.1, 0.8, 1.4, 1.0, -1};
  for (int trial = 0; trial < 20; ++trial) {
    const FourMomentum k = random_on_shell(other);
    const auto basis = nullspace_spinors(k, other);
    REQUIRE(basis.size() == 2);
    const Mat4 M = momentum_operator(k.as_upper(), other, -1.0);
    for (const auto& v : basis) CHECK((M * v).norm() <= 1e-10 * M.norm());
    CHECK(std::abs(basis[0].dot(basis[1])) <= 1e-12);
  }

  CHECK_THROWS_AS(nullspace_spinors(momentum(1.1, 0, 0, 0), c), std::domain_error);
}

TEST_CASE("proper-time evolution") {
  const PhysicalConstants c;
  const auto free = PotentialSpec::free_field();

  const auto on = propertime_evolve(state(momentum(1.25, 0.75)), free, 0.01, 1000, c);
  CHECK(on.size() == 1001);
  CHECK(max_drift(on) <= 1e-12);

  const FourMomentum k_off = momentum(1.25, 0.5);
  const double delta = k_off.gap(c);
  const auto off = propertime_evolve(state(k_off), free, 0.01, 1000, c);
  CHECK(std::abs(measured_frequency(off) - delta) <= 1e-8);
  for (const auto& s : off) CHECK(std::abs(s.chi.norm() - off.front().chi.norm()) <= 1e-12);
  CHECK(off.back().tau == doctest::Approx(10.0));

  PhysicalConstants neg = c;
  neg.epsilon = -1;
  CHECK(std::abs(measured_frequency(propertime_evolve(state(k_off), free, 0.01, 1000, neg)) + delta) <= 1e-8);

  // frequency scales as Delta / (hbar m)
  const PhysicalConstants heavy{0.5, 1.0, 2.0, 1.0, 1};
  const FourMomentum kh = momentum(4.5, 1.0);
  const auto traj = propertime_evolve(state(kh), free, 0.001, 500, heavy);
  CHECK(std::abs(measured_frequency(traj) - kh.gap(heavy) / (0.5 * 2.0)) <= 1e-8);

  CHECK_THROWS_AS(propertime_evolve(state(k_off), PotentialSpec::constant_electric(1.0), 0.01, 10, c),
                  std::invalid_argument);
  CHECK_THROWS_AS(propertime_evolve(state(k_off), free, 1.0, 10, c), std::invalid_argument);
}

TEST_CASE("stationary exactly on the shell across a gap sweep") {
  const PhysicalConstants c;
  for (double target : {0.0, 1e-6, -1e-6, 1e-3, -1e-3, 0.1, -0.1, 1.0, -1.0}) {
    // k^0 chosen so that k.k - 1 = target with k^1 = 0.75
    const FourMomentum k = momentum(std::sqrt(1.0 + 0.5625 + target), 0.75);
    const auto traj = propertime_evolve(state(k), PotentialSpec::free_field(), 0.01, 1000, c);
    const bool stationary = max_drift(traj) <= 1e-12;
    CHECK(stationary == k.on_shell(c));
    CHECK(stationary == (target == 0.0));
  }
}

TEST_CASE("legacy stationarity conditions") {
  const PhysicalConstants c;
  const auto& g = dirac_gammas();
  const FourMomentum k = momentum(1.25, 0.75);

  // chi with hbar kslash chi = mc chi: both residuals vanish
  for (const auto& chi : nullspace(momentum_operator(k.as_upper(), c, -1.0))) {
    const LegacyModeReport r = legacy_mode_condition(k, chi, c, g);
    CHECK(r.new_residual <= 1e-12);
    CHECK(r.legacy_residual <= 1e-12);
  }
  // chi with hbar kslash chi = -mc chi: legacy residual 2 m^2 c^2 |chi|
  for (const auto& chi : nullspace(momentum_operator(k.as_upper(), c, +1.0))) {
    const LegacyModeReport r = legacy_mode_condition(k, chi, c, g);
    CHECK(r.new_residual <= 1e-12);
    CHECK(std::abs(r.legacy_residual - 2.0 * chi.norm()) <= 1e-12);
    CHECK_FALSE(r.legacy_stationary);
  }
  // lightlike k with kslash chi = 0: legacy-stationary although Delta = -m^2c^2
  const FourMomentum light = momentum(0.8, 0, 0, 0.8);
  const auto kernel = nullspace(slash(g, light.as_upper()));
  REQUIRE(kernel.size() == 2);
  for (const auto& chi : kernel) {
    const LegacyModeReport r = legacy_mode_condition(light, chi, c, g);
    CHECK(r.gap == -1.0);
    CHECK_FALSE(r.on_shell);
    CHECK(r.legacy_stationary);
    CHECK_FALSE(r.new_stationary);
    CHECK(std::abs(r.new_residual - std::abs(r.gap) * chi.norm()) <= 1e-10);
  }
}
