#include <doctest.h>

#include <cmath>
#include <numbers>

#include "diracsoc/operators.hpp"
#include "support.hpp"

using namespace diracsoc;

namespace {

constexpr double pi = std::numbers::pi;
const Complex I(0, 1);

// 1+1 grid with fundamental 1/4, so k = (5/4, 3/4) lies on the unit mass shell.
SpacetimeGrid shell_grid(int n = 64) { return SpacetimeGrid(2, 8 * pi, n); }
const Upper4 k_on(1.25, 0.75, 0, 0);
const Upper4 k_off(1.25, 0.5, 0, 0);  // k.k = 1.3125
const Spinor chi(Complex(0.3, 0.1), Complex(-0.7, 0.2), Complex(0.05, 0.9), Complex(0.4, -0.4));

RandomFieldOptions enveloped() { return {4, 1.0, 0.0, 0.05}; }

double rel(const SpinorField& a, const SpinorField& b) { return (a - b).values().norm() / b.values().norm(); }

}  // namespace

TEST_CASE("dirac_apply on plane waves") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k;
  const SampledPotential free(PotentialSpec::free_field(), g);
  const Mat4 conj = slash(dirac_gammas(), k_on) + Mat4::Identity();

  const SpinorField psi = plane_wave(g, conj * chi, k_on);
  CHECK(max_abs(dirac_apply(psi, free, k)) <= 1e-10 * max_abs(psi));

  CHECK(max_abs(dirac_apply(SpinorField(g), free, k)) == 0.0);

  // off shell: the residual is Delta chi e^{-ik.z}
  const double delta = minkowski_square(k_off).real() - 1.0;
  const SpinorField psi_off = plane_wave(g, (slash(dirac_gammas(), k_off) + Mat4::Identity()) * chi, k_off);
  const SpinorField base = plane_wave(g, chi, k_off);
  const double ratio = dirac_apply(psi_off, free, k).values().norm() / (std::abs(delta) * base.values().norm());
  CHECK(std::abs(ratio - 1.0) <= 1e-8);
}

TEST_CASE("conjugate_apply and build_spinor") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k;
  const SampledPotential free(PotentialSpec::free_field(), g);

  const SpinorField phi = plane_wave(g, chi, k_off);
  const SpinorField expected = plane_wave(g, (slash(dirac_gammas(), k_off) + Mat4::Identity()) * chi, k_off);
  CHECK(rel(conjugate_apply(phi, free, k), expected) <= 1e-10);
  CHECK(build_spinor(phi, free, k).values() == conjugate_apply(phi, free, k).values());

  const SpinorField c = sample_spinor(g, [](const Upper4&) { return chi; });
  CHECK(rel(conjugate_apply(c, free, k), 1.0 * c) <= 1e-14);

  // rest frame, lower bispinor: (gamma^0 + 1) e_3 = 0
  const SpinorField rest = plane_wave(g, Spinor::Unit(3), Upper4(1, 0, 0, 0));
  CHECK(max_abs(conjugate_apply(rest, free, k)) <= 1e-12);
}

TEST_CASE("fock_rhs in the free case") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k;
  const SampledPotential free(PotentialSpec::free_field(), g);

  const SpinorField off = plane_wave(g, chi, k_off);
  const double delta = minkowski_square(k_off).real() - 1.0;
  CHECK(rel(fock_rhs(off, free, k), delta * off) <= 1e-10);

  const SpinorField on = plane_wave(g, chi, k_on);
  CHECK(max_abs(fock_rhs(on, free, k)) <= 1e-10);

  const SpinorField c = sample_spinor(g, [](const Upper4&) { return chi; });
  CHECK(rel(fock_rhs(c, free, k), -1.0 * c) <= 1e-14);

  CHECK(rel(factored_rhs(off, free, k), fock_rhs(off, free, k)) <= 1e-10);
}

TEST_CASE("factors commute without a field") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k{1.0, 1.0, 1.3, 0.8, -1};
  const SampledPotential free(PotentialSpec::free_field(), g);
  const SpinorField phi = random_spinor_field(g, 11);
  const SpinorField dc = dirac_apply(conjugate_apply(phi, free, k), free, k);
  const SpinorField cd = conjugate_apply(dirac_apply(phi, free, k), free, k);
  CHECK(max_abs(dc - cd) <= 1e-12 * max_abs(dc));
}

TEST_CASE("factorization matches the second-order form in Lorenz gauge") {
  const SpacetimeGrid g = shell_grid(128);
  const double kap = 2 * g.fundamental(1);
  const std::vector<PotentialSpec> pots{
      PotentialSpec::free_field(), PotentialSpec::constant_electric(0.5), PotentialSpec::constant_magnetic(0.5, 1),
      PotentialSpec::plane_wave({kap, kap, 0, 0}, {0, 0, 1, 0}, 0.5)};
  for (const PhysicalConstants& k : {PhysicalConstants{}, PhysicalConstants{1.0, 1.0, 1.0, 0.7, -1}}) {
    for (const auto& spec : pots) {
      const SampledPotential A(spec, g);
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const EquivalenceCheck c = check_factorization(random_spinor_field(g, seed, enveloped()), A, k);
        CHECK_MESSAGE(c.relative <= 1e-8, spec.describe());
      }
    }
  }
}

TEST_CASE("fd4 discrepancy shrinks at fourth order") {
  std::vector<double> h, err;
  for (int n : {64, 128, 256}) {
    const SpacetimeGrid g = shell_grid(n);
    const SampledPotential A(PotentialSpec::constant_electric(0.5), g);
    h.push_back(g.spacing(0));
    err.push_back(check_factorization(random_spinor_field(g, 5, enveloped()), A, PhysicalConstants{}, Backend::fd4).relative);
  }
  const double s1 = std::log(err[0] / err[1]) / std::log(h[0] / h[1]);
  const double s2 = std::log(err[1] / err[2]) / std::log(h[1] / h[2]);
  CHECK(std::abs(s1 - 4.0) <= 0.3);
  CHECK(std::abs(s2 - 4.0) <= 0.3);
}

TEST_CASE("gauge-violating potential leaves -i e hbar (d.A) phi behind") {
  // A_0 = 0.3 z^0 + 0.2 z^0 z^1, A_1 = 0.25 (z^1)^2, so d_mu A^mu = 0.3 - 0.3 z^1
  const SpacetimeGrid g = shell_grid(128);
  const auto spec = PotentialSpec::custom_polynomial({{"l0_0", 0.3}, {"q0_01", 0.2}, {"q1_11", 0.25}});
  const SampledPotential A(spec, g);
  for (const PhysicalConstants& k : {PhysicalConstants{}, PhysicalConstants{1.0, 1.0, 1.0, 0.6, -1}}) {
    const SpinorField phi = random_spinor_field(g, 3, enveloped());
    const SpinorField diff = factored_rhs(phi, A, k) - fock_rhs(phi, A, k);

    SpinorField expected(g);
    for (Eigen::Index p = 0; p < g.size(); ++p) {
      const double z1 = g.coordinate(p)[1].real();
      expected.values().row(p) = (-I * k.e * k.hbar * (0.3 - 0.3 * z1)) * phi.values().row(p);
    }
    CHECK(max_abs(diff - expected) <= 1e-8);
    CHECK(max_abs(gauge_violation_term(phi, A, k) - expected) <= 1e-13);

    // the discrepancy is twice -(i e hbar / 2)(d.A) phi, not equal to it
    const SpinorField half = 0.5 * expected;
    CHECK(max_abs(diff - half) >= 0.1 * max_abs(half));
  }
}

TEST_CASE("legacy factorization") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k{1.0, 1.0, 1.2, 0.5, 1};
  const SampledPotential A(PotentialSpec::constant_electric(0.4), g);
  const SpinorField phi = random_spinor_field(g, 8, enveloped());
  const SpinorField diff = factored_rhs(phi, A, k) - legacy_factored_rhs(phi, A, k);
  const SpinorField expected = dirac_apply(k.mc() * phi, A, k);
  CHECK(max_abs(diff - expected) <= 1e-10 * max_abs(expected));
  CHECK(max_abs(legacy_factored_rhs(SpinorField(g), A, k)) == 0.0);
}

TEST_CASE("componentwise Klein-Gordon residual") {
  const SpacetimeGrid g = shell_grid();
  const PhysicalConstants k;
  const SampledPotential free(PotentialSpec::free_field(), g);

  const SpinorField psi = build_spinor(plane_wave(g, chi, k_on), free, k);
  const KleinGordonResidual r = kg_residual_componentwise(psi, free, k);
  for (int a = 0; a < 4; ++a) {
    CHECK(r.residual[static_cast<std::size_t>(a)] <= 1e-10);
    CHECK_FALSE(r.degenerate[static_cast<std::size_t>(a)]);
  }

  const double delta = minkowski_square(k_off).real() - 1.0;
  const KleinGordonResidual off = kg_residual_componentwise(plane_wave(g, chi, k_off), free, k);
  for (double v : off.residual) CHECK(std::abs(v - std::abs(delta)) <= 1e-10);

  const KleinGordonResidual zero = kg_residual_componentwise(SpinorField(g), free, k);
  for (int a = 0; a < 4; ++a) {
    CHECK(zero.degenerate[static_cast<std::size_t>(a)]);
    CHECK(zero.residual[static_cast<std::size_t>(a)] == 0.0);
  }

  const SampledPotential A(PotentialSpec::constant_electric(1.0), g);
  CHECK_THROWS_AS(kg_residual_componentwise(psi, A, k), std::invalid_argument);
}

TEST_CASE("preconditions") {
  const SpacetimeGrid g = shell_grid(16);
  // the symmetric gauge varies along z^2, which a 1+1 grid does not resolve
  CHECK_THROWS_AS(SampledPotential(PotentialSpec::constant_magnetic(1.0, 0), g), std::invalid_argument);
  CHECK_NOTHROW(SampledPotential(PotentialSpec::constant_magnetic(1.0, 1), g));
  const SampledPotential A(PotentialSpec::free_field(), SpacetimeGrid(2, 1.0, 16));
  CHECK_THROWS_AS(dirac_apply(SpinorField(g), A, PhysicalConstants{}), std::invalid_argument);
  CHECK_THROWS_AS(fock_rhs(SpinorField(g), SampledPotential(PotentialSpec::free_field(), g),
                           PhysicalConstants{1.0, 1.0, -1.0, 1.0, 1}),
                  std::invalid_argument);
}
