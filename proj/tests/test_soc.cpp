#include <doctest.h>

#include <cmath>
#include <numbers>

#include "diracsoc/soc.hpp"
#include "support.hpp"

using namespace diracsoc;

namespace {

constexpr double pi = std::numbers::pi;
const Complex I(0, 1);

SpacetimeGrid grid64() { return SpacetimeGrid(2, 8 * pi, 64); }

// exp(-i k.z) as a scalar field
ScalarField mode(const SpacetimeGrid& g, const Upper4& k) {
  const Lower4 kl = lower(k);
  return sample(g, [&](const Upper4& z) { return std::exp(-I * contract(z, kl)); });
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("optimal control, pointwise") {
  const PhysicalConstants k{1.1, 1.0, 0.9, 0.7, 1};
  const Lower4 kl(1.3, -0.4, 0.2, 0.0);
  const Lower4 grad = Complex(0, -1) * kl;  // Jtilde = -i k.z
  const Lower4 w = optimal_control(grad, Lower4(), k);
  for (int mu = 0; mu < 4; ++mu) CHECK(std::abs(w[mu] - k.hbar * kl[mu] / k.m) <= 1e-15);

  PhysicalConstants neg = k;
  neg.epsilon = -1;
  CHECK(optimal_control(grad, Lower4(), neg) == -w);

  const Lower4 A(0.5, 0.25, -1.0, 2.0);
  const Lower4 shifted = optimal_control(grad, A, k);
  for (int mu = 0; mu < 4; ++mu) CHECK(std::abs(shifted[mu] - (w[mu] - k.e * A[mu] / k.m)) <= 1e-15);

  Lower4 bad = grad;
  bad[2] = Complex(std::nan(""), 0);
  CHECK_THROWS_AS(optimal_control(bad, A, k), std::domain_error);
}

TEST_CASE("optimal control on a grid") {
  const SpacetimeGrid g = grid64();
  const PhysicalConstants k;
  const Upper4 ku(1.25, 0.75, 0, 0);
  const Lower4 kl = lower(ku);
  const SampledPotential free(PotentialSpec::free_field(), g);

  const CovectorField w = optimal_control_from_phi(mode(g, ku), free, k);
  for (int mu = 0; mu < 2; ++mu) CHECK((w.component(mu).array() - kl[mu]).abs().maxCoeff() <= 1e-12);

  // periodic Jtilde = a sin(z^1 / 2): d_1 Jtilde = (a/2) cos(z^1 / 2)
  const Complex a(0.3, 0.8);
  const ScalarField jt = sample(g, [&](const Upper4& z) { return a * std::sin(z[1] / 2.0); });
  const SampledPotential E(PotentialSpec::constant_electric(0.2), g);
  const CovectorField wj = optimal_control(jt, E, k);
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const Upper4 z = g.coordinate(p);
    const Lower4 grad(0, a / 2.0 * std::cos(z[1] / 2.0), 0, 0);
    const Lower4 expected = optimal_control(grad, evaluate_potential(E.spec(), z), k);
    for (int mu = 0; mu < 4; ++mu) CHECK(std::abs(wj.values()(p, mu) - expected[mu]) <= 1e-12);
  }

  ScalarField zero(g);
  CHECK_THROWS_AS(optimal_control_from_phi(zero, free, k), std::domain_error);
}

TEST_CASE("weak condition") {
  const Upper4 ku(1.25, 0.75, 0, 0);
  for (int eps : {1, -1}) {
    const PhysicalConstants k{1.0, 1.0, 1.0, 1.0, eps};
    const Lower4 w = optimal_control(Complex(0, -1) * lower(ku), Lower4(), k);
    CHECK(std::abs(weak_condition_residual(w, k)) <= 1e-12);
  }
  // off shell by Delta: residual Delta / m^2
  const PhysicalConstants k{1.0, 1.0, 2.0, 1.0, 1};
  const Upper4 off(2.5, 1.0, 0.5, 0);
  const double delta = minkowski_square(off).real() - 4.0;
  const Lower4 w = optimal_control(Complex(0, -1) * lower(off), Lower4(), k);
  CHECK(std::abs(weak_condition_residual(w, k) - delta / 4.0) <= 1e-14);
  CHECK(weak_condition_residual(Lower4(1, 0, 0, 0), PhysicalConstants{}) == Complex(0.0));

  const SpacetimeGrid g = grid64();
  const SampledPotential free(PotentialSpec::free_field(), g);
  const ScalarField r = weak_condition_residual(optimal_control_from_phi(mode(g, ku), free, PhysicalConstants{}),
                                                PhysicalConstants{});
  CHECK(max_abs(r) <= 1e-12);
}

TEST_CASE("HJB residual: plane waves") {
  const SpacetimeGrid g = grid64();
  const PhysicalConstants k;
  const SampledPotential free(PotentialSpec::free_field(), g);

  const ScalarField on = mode(g, Upper4(1.25, 0.75, 0, 0));
  CHECK(max_abs(hjb_residual(jet_from_phi(on), free, k)) <= 1e-10);

  // off shell the residual is -Delta everywhere, and affine in Delta with slope -1
  std::vector<double> deltas, values;
  for (int n1 : {0, 1, 2, 3, 4, 6}) {
    const Upper4 ku(1.25, 0.25 * n1, 0, 0);
    const double delta = minkowski_square(ku).real() - 1.0;
    const ScalarField r = hjb_residual(jet_from_phi(mode(g, ku)), free, k);
    CHECK((r.values().array() + delta).abs().maxCoeff() <= 1e-10);
    deltas.push_back(delta);
    values.push_back(r.values()(0, 0).real());
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i)
    sx += deltas[i], sy += values[i], sxx += deltas[i] * deltas[i], sxy += deltas[i] * values[i];
  CHECK(std::abs((n * sxy - sx * sy) / (n * sxx - sx * sx) + 1.0) <= 1e-6);

  // Jtilde = 0, A = 0: pure rest-mass term
  const PhysicalConstants kk{1.0, 2.0, 1.5, 1.0, 1};
  const ScalarField one = sample(g, [](const Upper4&) { return Complex(1.0); });
  CHECK((hjb_residual(jet_from_phi(one), free, kk).values().array() - 9.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("HJB residual vanishes off shell once the proper-time phase is included") {
  const SpacetimeGrid g = grid64();
  const SampledPotential free(PotentialSpec::free_field(), g);
  const Upper4 ku(1.25, 0.5, 0, 0);
  const double delta = minkowski_square(ku).real() - 1.0;
  for (int eps : {1, -1}) {
    const PhysicalConstants k{1.0, 1.0, 1.0, 1.0, eps};
    // phi(tau) = exp(i eps Delta tau / (hbar m)) phi(0)
    ScalarField dtau(g);
    dtau.values().setConstant(I * double(eps) * delta);
    CHECK(max_abs(hjb_residual(jet_from_phi(mode(g, ku)), free, k, &dtau)) <= 1e-10);
  }
}

TEST_CASE("HJB residual with a magnetic field, by hand") {
  // Jtilde = 0, A_2 = B z^1: residual = m^2c^2 + e hbar B <e0|Sigma_3|e0> + e^2 B^2 (z^1)^2
  const SpacetimeGrid g = grid64();
  const PhysicalConstants k{1.0, 1.0, 1.0, 0.6, 1};
  const double B = 0.3;
  const SampledPotential A(PotentialSpec::constant_magnetic(B, 1), g);
  const ScalarField one = sample(g, [](const Upper4&) { return Complex(1.0); });
  const ScalarField r = hjb_residual(jet_from_phi(one), A, k);
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    const double z1 = g.coordinate(p)[1].real();
    const double expected = 1.0 + k.e * k.hbar * B + k.e * k.e * B * B * z1 * z1;
    CHECK(std::abs(r.values()(p, 0) - expected) <= 1e-12);
  }
  // spin-down bispinor sees the opposite projection
  const ScalarField r3 = hjb_residual(jet_from_phi(one), A, k, nullptr, Spinor::Unit(1));
  CHECK(std::abs(r3.values()(0, 0) - r.values()(0, 0) + 2.0 * k.e * k.hbar * B) <= 1e-12);
}

TEST_CASE("Hopf-Cole identity") {
  const SpacetimeGrid g = grid64();
  for (const Upper4& ku : {Upper4(0, 0.75, 0, 0), Upper4(1.25, -0.5, 0, 0), Upper4(0.25, 2.0, 0, 0)}) {
    // exp(a z^1) with imaginary a keeps the field periodic
    CHECK(hopf_cole_check(mode(g, ku)) <= 1e-10);
  }
  // d(phi)/phi is not band-limited; 64 points leaves ~1e-8 of truncation error, 128 resolves it
  const SpacetimeGrid fine(2, 8 * pi, 128);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ScalarField phi = random_scalar_field(fine, seed, {4, 0.5, 1.0, 0.0});
    REQUIRE(phi.values().cwiseAbs().minCoeff() >= 0.5);
    CHECK(hopf_cole_check(phi) <= 1e-8);
  }
  const ScalarField crossing = sample(g, [](const Upper4& z) { return Complex(std::cos(z[1].real() / 4.0)); });
  CHECK_THROWS_AS(hopf_cole_check(crossing), std::domain_error);
  try {
    hopf_cole_check(crossing);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("z = (") != std::string::npos);
  }
}

TEST_CASE("diffusion coefficients square exactly") {
  for (int eps : {1, -1})
    for (double hm : {1.0, 4.0, 0.25}) {
      const PhysicalConstants k{hm, 1.0, 1.0, 1.0, eps};
      const DiffusionCoefficients d = make_diffusion(k);
      CHECK(d.sigma[0] * d.sigma[0] == Complex(0, 2.0 * eps * hm));
      for (int i = 1; i < 4; ++i)
        CHECK(d.sigma[static_cast<std::size_t>(i)] * d.sigma[static_cast<std::size_t>(i)] == Complex(0, -2.0 * eps * hm));
      CHECK_FALSE(d.branch.empty());
    }
  const DiffusionCoefficients d = make_diffusion(PhysicalConstants{});
  CHECK(d.sigma[0] * d.sigma[0] == Complex(0, 2));
  CHECK(d.sigma[1] * d.sigma[1] == Complex(0, -2));
  CHECK(make_diffusion(PhysicalConstants{1, 1, 1, 1, -1}).sigma[0] * make_diffusion(PhysicalConstants{1, 1, 1, 1, -1}).sigma[0] ==
        Complex(0, -2));
}

TEST_CASE("simulation: straight lines, moments and correlations") {
  // dyadic inputs keep every sum exact
  const Upper4 z0(0.5, -0.25, 1.0, 0.0), w(1.0, 0.5, -0.125, 0.75);
  const EnsembleParams straight{3, 64, 1.0 / 1024, z0};
  const TrajectoryEnsemble line = simulate(straight, constant_control(w), DiffusionCoefficients::disabled(), 5);
  for (std::int64_t p = 0; p < 3; ++p)
    for (int n = 0; n <= 64; ++n) CHECK(line.position(p, n) == z0 + (n / 1024.0) * w);

  for (int eps : {1, -1}) {
    const PhysicalConstants k{1, 1, 1, 1, eps};
    const DiffusionCoefficients sig = make_diffusion(k);
    const std::int64_t N = 20000;
    const double s = 0.1;
    const TrajectoryEnsemble ens = simulate({N, 10, s / 10, Upper4()}, constant_control(Upper4()), sig, 99);
    CHECK(ens.truncated_count() == 0);
    for (int mu = 0; mu < 4; ++mu) {
      std::vector<double> re, im;
      for (std::int64_t p = 0; p < N; ++p) {
        re.push_back(ens.position(p, 10)[mu].real());
        im.push_back(ens.position(p, 10)[mu].imag());
      }
      const double expected = std::norm(sig.sigma[static_cast<std::size_t>(mu)]) * s / 2;
      double vr = 0, vi = 0;
      for (std::size_t i = 0; i < re.size(); ++i) vr += re[i] * re[i], vi += im[i] * im[i];
      vr /= N, vi /= N;
      CHECK(std::abs(vr / expected - 1.0) <= 5.0 / std::sqrt(double(N)));
      CHECK(std::abs(vi / expected - 1.0) <= 5.0 / std::sqrt(double(N)));
      // time component correlates with sign eps, spatial ones with -eps
      CHECK(corr(re, im) == doctest::Approx(mu == 0 ? eps : -eps).epsilon(1e-12));
    }
  }
}

TEST_CASE("simulation is reproducible and flags blow-ups") {
  const DiffusionCoefficients sig = make_diffusion(PhysicalConstants{});
  const EnsembleParams prm{50, 20, 1e-2, Upper4(0.1, 0.2, 0.3, 0.4)};
  auto drift = [](const Upper4& z, double) { return Upper4(z[1], -z[0], 0.5, 0.0); };
  const TrajectoryEnsemble a = simulate(prm, drift, sig, 1234);
  const TrajectoryEnsemble b = simulate(prm, drift, sig, 1234);
  const TrajectoryEnsemble c = simulate(prm, drift, sig, 1235);
  CHECK(a.positions == b.positions);
  CHECK(a.controls == b.controls);
  CHECK(a.positions != c.positions);

  // the first paths of a larger ensemble are the same paths
  EnsembleParams more = prm;
  more.paths = 80;
  const TrajectoryEnsemble d = simulate(more, drift, sig, 1234);
  CHECK(d.positions.topRows(a.positions.rows()) == a.positions);

  auto explode = [](const Upper4& z, double) {
    return Upper4(z[0] * z[0] * 1e200, 0, 0, 0);
  };
  const TrajectoryEnsemble e = simulate({4, 10, 1e-2, Upper4(1, 0, 0, 0)}, explode, DiffusionCoefficients::disabled(), 1);
  CHECK(e.truncated_count() == 4);
  CHECK(e.truncated_at[0] > 0);
  CHECK_FALSE(e.position(0, 10).allFinite());

  CHECK_THROWS(simulate({0, 1, 1e-3, Upper4()}, drift, sig, 1));
  CHECK_THROWS(simulate({1, 1, 0.0, Upper4()}, drift, sig, 1));
}

TEST_CASE("polynomials") {
  const Polynomial f({{Complex(2, 1), {1, 2, 0, 0}}, {Complex(-1), {0, 0, 3, 1}}});
  const Upper4 z(Complex(0.5, 0.2), Complex(-1, 0.3), Complex(0.7, 0), Complex(0, 1));
  CHECK(std::abs(f(z) - (Complex(2, 1) * z[0] * z[1] * z[1] - z[2] * z[2] * z[2] * z[3])) <= 1e-15);
  CHECK(std::abs(f.derivative(z, 1) - Complex(2, 1) * z[0] * 2.0 * z[1]) <= 1e-15);
  CHECK(std::abs(f.second_derivative(z, 2) + 6.0 * z[2] * z[3]) <= 1e-15);
  CHECK(f.second_derivative(z, 0) == Complex(0.0));
  CHECK(f.degree() == 4);
  CHECK(Polynomial::monomial(1.0, {0, 1, 0, 0}).describe() == "z1");
  CHECK_THROWS(Polynomial::monomial(1.0, {-1, 0, 0, 0}));
}

TEST_CASE("generator consistency") {
  const DiffusionCoefficients sig = make_diffusion(PhysicalConstants{});
  const std::int64_t N = 100000;
  const double ds = 1e-3;

  // linear f: drift only
  const auto r1 = generator_check(Polynomial::monomial(1.0, {0, 1, 0, 0}), Upper4(0.3, -0.7, 0, 0),
                                  Upper4(0.1, 0.2, 0, 0), sig, ds, N, 1);
  CHECK(r1.pass);
  CHECK(r1.predicted == Complex(-0.7));

  // z1^2 with w = 0: pure diffusion, estimate -> sigma_1^2
  const auto r2 = generator_check(Polynomial::monomial(1.0, {0, 2, 0, 0}), Upper4(), Upper4(), sig, ds, N, 2);
  CHECK(r2.pass);
  CHECK(r2.predicted == Complex(0, -2));
  CHECK(std::abs(r2.estimate - r2.predicted) / std::abs(r2.predicted) <= 5.0 / std::sqrt(double(N)) + ds);

  // z0 z1: independent increments leave no cross term
  const auto r3 = generator_check(Polynomial::monomial(1.0, {1, 1, 0, 0}), Upper4(), Upper4(), sig, ds, N, 3);
  CHECK(r3.pass);
  CHECK(r3.predicted == Complex(0.0));

  // a wrong diffusion is caught
  DiffusionCoefficients wrong = sig;
  wrong.sigma[1] *= 1.5;
  const auto bad = generator_check(Polynomial::monomial(1.0, {0, 2, 0, 0}), Upper4(), Upper4(), wrong, ds, N, 2);
  const Complex true_pred = generator_apply(Polynomial::monomial(1.0, {0, 2, 0, 0}), Upper4(), Upper4(), sig);
  CHECK(std::abs(bad.estimate - true_pred) > 3.0 * bad.standard_error);

  CHECK_THROWS(generator_check(Polynomial::monomial(1.0, {5, 0, 0, 0}), Upper4(), Upper4(), sig, ds, 10, 1));
}

TEST_CASE("one-step estimate carries the quartic cross moment") {
  // z0^2 z1^2 at the origin, w = 0: the generator vanishes but
  // E[dz0^2 dz1^2] / ds = sigma0^2 sigma1^2 ds, with sigma0^2 sigma1^2 = (2i)(-2i) = 4
  const DiffusionCoefficients sig = make_diffusion(PhysicalConstants{});
  const double ds = 1e-3;
  const auto r = generator_check(Polynomial::monomial(1.0, {2, 2, 0, 0}), Upper4(), Upper4(), sig, ds, 100000, 4);
  CHECK(r.predicted == Complex(0.0));
  CHECK(std::abs(r.estimate - 4.0 * ds) <= 3.0 * r.standard_error);
  CHECK(std::abs(r.estimate) > 10.0 * r.standard_error);  // visible, so it has no place in the battery
}

TEST_CASE("generator battery") {
  const PhysicalConstants k{1.0, 2.0, 1.5, 1.0, -1};
  const auto battery = generator_battery(k);
  REQUIRE(battery.size() == 6);
  const DiffusionCoefficients sig = make_diffusion(k);
  for (std::size_t i = 0; i < battery.size(); ++i) {
    INFO(battery[i].f.describe());
    CHECK(battery[i].f.degree() <= 4);
    const auto r = generator_check(battery[i].f, battery[i].w, battery[i].z0, sig, 1e-3, 100000, 500 + i);
    CHECK(r.error <= 3.0 * r.standard_error);
  }
}

TEST_CASE("action accumulation") {
  const PhysicalConstants k{1.0, 2.0, 1.5, 1.0, 1};
  // sigma = 0, A = 0, on-shell w = (c, 0, 0, 0): S = -m c^2 (s_f - s_i)
  const Upper4 w(2.0, 0, 0, 0);
  const TrajectoryEnsemble ens = simulate({2, 128, 1.0 / 128, Upper4()}, constant_control(w),
                                          DiffusionCoefficients::disabled(), 1);
  const ActionEstimate S = accumulate_action(ens, PotentialSpec::free_field(), k);
  CHECK(S.mean == Complex(-1.5 * 4.0));
  CHECK(S.stderr_re == 0.0);
  CHECK(S.branch_flags == 0);
  CHECK_FALSE(S.branch.empty());

  // w = 0: degenerate control on every step
  const TrajectoryEnsemble still = simulate({2, 8, 0.125, Upper4()}, constant_control(Upper4()),
                                            DiffusionCoefficients::disabled(), 1);
  const ActionEstimate S0 = accumulate_action(still, PotentialSpec::free_field(), k);
  CHECK(S0.degenerate_flags == 16);
  CHECK(S0.mean == Complex(0.0));

  // spacelike control sits on the branch cut side
  const TrajectoryEnsemble space = simulate({1, 4, 0.25, Upper4()}, constant_control(Upper4(0, 1, 0, 0)),
                                            DiffusionCoefficients::disabled(), 1);
  CHECK(accumulate_action(space, PotentialSpec::free_field(), k).branch_flags == 4);

  // flipping eps changes only the charge coupling: S(+) - S(-) = -2 e sum A_mu w^mu ds
  const double E = 0.8;
  const Upper4 z0(0, 0.5, 0, 0), wv(1.0, 0.25, 0, 0);
  const TrajectoryEnsemble tr = simulate({1, 16, 1.0 / 16, z0}, constant_control(wv), DiffusionCoefficients::disabled(), 1);
  PhysicalConstants kp{1.0, 1.0, 1.0, 0.7, 1}, km = kp;
  km.epsilon = -1;
  const auto spec = PotentialSpec::constant_electric(E);
  const Complex diff = accumulate_action(tr, spec, kp).mean - accumulate_action(tr, spec, km).mean;
  Complex coupling = 0.0;
  for (int n = 0; n < 16; ++n) {
    const double z1 = 0.5 + 0.25 * n / 16.0;
    coupling += (-E * z1) * wv[0] / 16.0;  // A_0 w^0
  }
  CHECK(std::abs(diff - (-2.0 * kp.e * coupling)) <= 1e-14);
}
