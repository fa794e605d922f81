#include "diracsoc/cli/commands.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diracsoc/cli/records.hpp"
#include "diracsoc/operators.hpp"
#include "diracsoc/philox.hpp"
#include "diracsoc/soc.hpp"
#include "diracsoc/spectrum.hpp"

namespace diracsoc::cli {

namespace {

constexpr double pi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// splitmix64 finaliser over (seed, a, b): independent sub-seeds per case
std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Sequential standard normals from one Philox stream.
class Normals {
 public:
  Normals(std::uint64_t seed, std::uint64_t stream) : key_(Philox4x32::key_from_seed(seed)), stream_(stream) {}
  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const auto [a, b] = Philox4x32::normal_pair(key_, stream_, counter_++, 3);
    spare_ = b;
    return a;
  }
  Complex complex() {
    const double re = next();
    return {re, next()};
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint32_t counter_ = 0;
  std::optional<double> spare_;
};

Spinor random_bispinor(Normals& n) {
  Spinor chi;
  for (int a = 0; a < 4; ++a) chi(a) = n.complex();
  return chi / chi.norm();
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw NumericalBlowup("non-finite result in " + what);
}

int finish(const SuiteLog& log, const RunConfig& config, const std::string& command_line) {
  log.write(config.out, command_line);
  std::cout << log.suite() << ": " << log.size() << " records, " << log.failures() << " failed -> "
            << (std::filesystem::path(config.out) / (log.suite() + ".jsonl")).string() << '\n';
  return log.failures() == 0 ? exit_pass : exit_failure;
}

std::ofstream open_csv(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out);
  std::ofstream out(std::filesystem::path(config.out) / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + name);
  out << std::setprecision(17);
  return out;
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Grid on which k = (5, 3) * mc / (4 hbar) is commensurate and on shell.
SpacetimeGrid shell_grid(const PhysicalConstants& k, int points = 64) {
  return SpacetimeGrid(2, 8.0 * pi * k.hbar / k.mc(), points);
}

Upper4 shell_mode(const PhysicalConstants& k, double n0, double n1) {
  const double f = k.mc() / (4.0 * k.hbar);
  return Upper4(n0 * f, n1 * f, 0, 0);
}

ScalarField scalar_mode(const SpacetimeGrid& g, const Upper4& k) {
  const Lower4 kl = lower(k);
  return sample(g, [&](const Upper4& z) { return std::exp(-kI * contract(z, kl)); });
}

std::vector<PotentialSpec> lorenz_catalog(const SpacetimeGrid& grid) {
  const double kap = 2.0 * grid.fundamental(1);
  return {PotentialSpec::free_field(), PotentialSpec::constant_electric(0.5, 1),
          PotentialSpec::constant_magnetic(0.5, 1), PotentialSpec::plane_wave({kap, kap, 0, 0}, {0, 0, 1, 0}, 0.5)};
}

// d_mu A^mu = 0.3 - 0.3 z^1
PotentialSpec gauge_violating() {
  return PotentialSpec::custom_polynomial({{"l0_0", 0.3}, {"q0_01", 0.2}, {"q1_11", 0.25}});
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_verify_clifford(const RunConfig& config, const std::string& command_line) {
  SuiteLog log("verify-clifford", config);
  std::array<Mat4, 4> mats;
  for (int mu = 0; mu < 4; ++mu) mats[static_cast<std::size_t>(mu)] = dirac_gammas()[mu];
  if (config.corrupt_gammas) mats[2](0, 3) = -mats[2](0, 3);
  const GammaSet<double> g(mats);
  const std::string none = "none";

  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      const Mat4 expected = double(2 * Metric::eta(mu, nu)) * Mat4::Identity();
      const Mat4 ac = anticommutator(g, mu, nu);
      log.check("anticommutator", none, (ac - expected).cwiseAbs().maxCoeff(), 0.0, ac == expected)
          .set("mu", mu)
          .set("nu", nu)
          .set("comparison", "exact");
    }

  for (int mu = 0; mu < 4; ++mu) {
    const Mat4 target = mu == 0 ? Mat4(g[0]) : Mat4(-g[mu]);
    const bool ok = g[mu].adjoint() == target;
    log.check("hermiticity", none, (g[mu].adjoint() - target).cwiseAbs().maxCoeff(), 0.0, ok).set("mu", mu);
  }

  double antisym = 0.0, split = 0.0;
  bool antisym_ok = true, split_ok = true;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      const Mat4 s = spin_tensor(g, mu, nu) + spin_tensor(g, nu, mu);
      antisym = std::max(antisym, s.cwiseAbs().maxCoeff());
      antisym_ok = antisym_ok && s == Mat4::Zero();
      const Mat4 rhs = double(Metric::eta(nu, mu)) * Mat4::Identity() + 0.5 * commutator(g, nu, mu);
      split = std::max(split, (g[nu] * g[mu] - rhs).cwiseAbs().maxCoeff());
      split_ok = split_ok && g[nu] * g[mu] == rhs;
    }
  log.check("spin-tensor-antisymmetry", none, antisym, 0.0, antisym_ok).set("comparison", "exact");
  log.check("product-decomposition", none, split, 0.0, split_ok).set("comparison", "exact");

  // both forms of the spin coupling on 50 random antisymmetric F
  Normals n(config.seed, 1);
  const auto& k = config.constants;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Mat4 F = Mat4::Zero();
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = mu + 1; nu < 4; ++nu) {
        F(mu, nu) = n.complex();
        F(nu, mu) = -F(mu, nu);
      }
    const Mat4 d = spin_coupling_matrix(F, g, k.e, k.m, k.hbar) - spin_coupling_commutator_form(F, g, k.e, k.m, k.hbar);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  log.check("spin-coupling-forms", none, worst, config.tol("clifford_forms"), worst <= config.tol("clifford_forms"))
      .set("samples", 50);
  return finish(log, config, command_line);
}

// ---------------------------------------------------------------------------

int cmd_verify_identity(const RunConfig& config, const std::string& command_line) {
  if (config.grid_dims < 2) throw ConfigError("verify-identity needs at least two active grid axes");
  SuiteLog log("verify-identity", config);
  const auto& k = config.constants;
  const SpacetimeGrid grid = config.grid();
  const RandomFieldOptions opts{config.identity_max_mode, 1.0, 0.0, config.identity_envelope};
  const double tol = config.backend == Backend::spectral ? config.tol("identity") : config.tol("identity_fd4");

  const auto catalog = lorenz_catalog(grid);
  for (std::size_t p = 0; p < catalog.size(); ++p) {
    const SampledPotential A(catalog[p], grid);
    for (int i = 0; i < config.identity_fields; ++i) {
      const SpinorField phi = random_spinor_field(grid, mix(config.seed, p, static_cast<std::uint64_t>(i)), opts);
      const EquivalenceCheck c = check_factorization(phi, A, k, config.backend);
      require_finite(c.relative, "factorization check");
      log.check("factorization", catalog[p].describe(), c.relative, tol, c.relative <= tol)
          .set("field", i)
          .set("max_abs", c.max_abs)
          .set("fock_norm", c.fock_norm);
    }
  }

  // fd4 discrepancy under refinement, on three grids ending at the configured one
  {
    std::vector<double> logh, loge;
    std::string grids;
    JsonObject errs;
    for (int div : {4, 2, 1}) {
      const int pts = grid.points(0) / div;
      if (pts <= 2 * config.identity_max_mode)
        throw ConfigError("fd4 refinement runs down to grid.points/4, which must exceed 2*identity.max_mode");
      const SpacetimeGrid g(grid.dims(), grid.extent(0), pts);
      const SampledPotential A(PotentialSpec::constant_electric(0.5, 1), g);
      const double e = check_factorization(random_spinor_field(g, mix(config.seed, 99), opts), A, k, Backend::fd4).relative;
      require_finite(e, "fd4 refinement");
      logh.push_back(std::log(g.spacing(0)));
      loge.push_back(std::log(e));
      errs.set(std::to_string(pts), e);
      grids += (grids.empty() ? "" : ", ") + g.describe();
    }
    const double slope = fitted_slope(logh, loge);
    log.check("fd4-convergence", PotentialSpec::constant_electric(0.5, 1).describe(), std::abs(slope - 4.0),
              config.tol("fd4_slope"), std::abs(slope - 4.0) <= config.tol("fd4_slope"))
        .set("grid", grids)
        .set("backend", "fd4")
        .set("slope", slope)
        .set("relative_errors", errs);
  }

  // gauge-violating potential: the discrepancy must equal -i e hbar (d.A) phi
  {
    const PotentialSpec bad = gauge_violating();
    const SampledPotential A(bad, grid);
    for (int i = 0; i < config.identity_gauge_fields; ++i) {
      const SpinorField phi = random_spinor_field(grid, mix(config.seed, 77, static_cast<std::uint64_t>(i)), opts);
      const SpinorField diff = factored_rhs(phi, A, k, config.backend) - fock_rhs(phi, A, k, config.backend);
      const SpinorField law = gauge_violation_term(phi, A, k);
      const double residual = max_abs(diff - law);
      require_finite(residual, "gauge law");
      const double half = max_abs(diff - 0.5 * law);
      log.check("negative-gauge", bad.describe(), residual, config.tol("gauge"), residual <= config.tol("gauge"))
          .set("field", i)
          .set("law", "factored - fock = -i e hbar (d_mu A^mu) phi")
          .set("max_divergence", A.divergence().cwiseAbs().maxCoeff())
          .set("equivalence_relative", (diff.values().norm() / fock_rhs(phi, A, k, config.backend).values().norm()))
          .set("half_coefficient_residual", half);
    }
  }

  // spinor built from an on-shell plane wave solves the first-order equation
  {
    const SpacetimeGrid g = shell_grid(k);
    const SampledPotential free(PotentialSpec::free_field(), g);
    Normals n(config.seed, 2);
    const Spinor chi = random_bispinor(n);
    const SpinorField psi = build_spinor(plane_wave(g, chi, shell_mode(k, 5, 3)), free, k, config.backend);
    const double scale = max_abs(psi);
    const double dirac = max_abs(dirac_apply(psi, free, k, config.backend)) / scale;
    const KleinGordonResidual kg = kg_residual_componentwise(psi, free, k, config.backend);
    const double kg_max = *std::max_element(kg.residual.begin(), kg.residual.end());
    require_finite(dirac + kg_max, "spinor construction");
    log.check("spinor-dirac-residual", "free", dirac, config.tol("spinor"), dirac <= config.tol("spinor"))
        .set("grid", g.describe());
    JsonObject per;
    for (int a = 0; a < 4; ++a) per.set("r" + std::to_string(a), kg.residual[static_cast<std::size_t>(a)]);
    log.check("spinor-klein-gordon", "free", kg_max, config.tol("spinor"), kg_max <= config.tol("spinor"))
        .set("grid", g.describe())
        .set("components", per);
  }
  return finish(log, config, command_line);
}

// ---------------------------------------------------------------------------

int cmd_dispersion(const RunConfig& config, const std::string& command_line) {
  SuiteLog log("dispersion", config);
  const auto& k = config.constants;
  std::ofstream csv = open_csv(config, "dispersion.csv");
  csv << "k1,k2,k3,k0,det_abs,nullspace_dim\n";

  const double tol = config.tol("dispersion_det");
  for (int i = 0; i < config.dispersion_points; ++i) {
    const double kx = config.dispersion_points == 1
                          ? 0.0
                          : -config.dispersion_kmax + 2.0 * config.dispersion_kmax * i / (config.dispersion_points - 1);
    const std::array<double, 3> s{kx, 0.0, 0.0};
    const auto [plus, minus] = dispersion_solve(s, k);
    for (double k0 : {plus, minus}) {
      FourMomentum fm;
      fm.k << k0, s[0], s[1], s[2];
      const Mat4 M = momentum_operator(fm.as_upper(), k, -1.0);
      const double scale = std::pow(k.hbar * k.hbar * fm.k.squaredNorm() + k.mc() * k.mc(), 2);
      const double det = std::abs(M.determinant()) / scale;
      std::size_t dim = 0;
      try {
        dim = nullspace_spinors(fm, k).size();
      } catch (const std::domain_error&) {
        dim = 0;
      }
      require_finite(det, "dispersion determinant");
      log.check("dispersion-root", "free", det, tol, det <= tol && dim == 2)
          .set("k0", k0)
          .set("k1", kx)
          .set("nullspace_dim", static_cast<std::int64_t>(dim));
      csv << s[0] << ',' << s[1] << ',' << s[2] << ',' << k0 << ',' << det << ',' << dim << '\n';
    }
  }

  // legacy factorization in Fourier space
  const double tol_l = config.tol("legacy");
  const double mc2 = k.mc() * k.mc();
  {
    FourMomentum light;
    light.k << 0.8 * k.mc() / k.hbar, 0, 0, 0.8 * k.mc() / k.hbar;
    const auto kernel = nullspace(slash(dirac_gammas(), light.as_upper()));
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      const LegacyModeReport r = legacy_mode_condition(light, kernel[j], k, dirac_gammas(), tol_l);
      const double mismatch = std::abs(r.new_residual - std::abs(r.gap) * kernel[j].norm()) / mc2;
      log.check("legacy-lightlike", "free", mismatch, tol_l, r.legacy_stationary && !r.on_shell && mismatch <= tol_l)
          .set("gap", r.gap)
          .set("legacy_residual", r.legacy_residual)
          .set("new_residual", r.new_residual)
          .set("legacy_stationary", r.legacy_stationary)
          .set("new_stationary", r.new_stationary);
    }
  }
  {
    const auto [k0, unused] = dispersion_solve({0.6 * k.mc() / k.hbar, 0, 0}, k);
    (void)unused;
    FourMomentum on;
    on.k << k0, 0.6 * k.mc() / k.hbar, 0, 0;
    for (double branch : {-1.0, 1.0}) {
      for (const auto& chi : nullspace(momentum_operator(on.as_upper(), k, branch))) {
        const LegacyModeReport r = legacy_mode_condition(on, chi, k, dirac_gammas(), tol_l);
        // hbar kslash chi = -branch mc chi, so the legacy residual is (1 + branch) m^2c^2 |chi|
        const double expected = (1.0 + branch) * mc2 * chi.norm();
        const double mismatch = (std::abs(r.legacy_residual - expected) + r.new_residual) / mc2;
        log.check(branch < 0 ? "legacy-positive-branch" : "legacy-negative-branch", "free", mismatch, tol_l,
                  mismatch <= tol_l)
            .set("legacy_residual", r.legacy_residual)
            .set("new_residual", r.new_residual)
            .set("legacy_stationary", r.legacy_stationary);
      }
    }
  }
  return finish(log, config, command_line);
}

// ---------------------------------------------------------------------------

int cmd_evolve(const RunConfig& config, const std::string& command_line) {
  SuiteLog log("evolve", config);
  const auto& k = config.constants;
  std::ofstream csv = open_csv(config, "evolve.csv");
  csv << "k0,k1,delta,frequency,stationary\n";

  Normals n(config.seed, 3);
  const Spinor chi = random_bispinor(n);
  const double mc2 = k.mc() * k.mc();
  int stationary_rows = 0, shell_rows = 0;
  for (double target : config.evolve_deltas) {
    const double arg = config.evolve_k1 * config.evolve_k1 + (mc2 + target) / (k.hbar * k.hbar);
    if (!(arg >= 0.0)) throw ConfigError("evolve.deltas: no real k0 for Delta = " + format_number(target));
    ModeState s;
    s.chi = chi;
    s.k.k << std::sqrt(arg), config.evolve_k1, 0, 0;
    const double delta = s.k.gap(k);
    std::vector<ModeState> traj;
    try {
      traj = propertime_evolve(s, PotentialSpec::free_field(), config.evolve_dtau, config.evolve_steps, k);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("evolve: ") + e.what());
    }
    const double drift = max_drift(traj);
    const double freq = measured_frequency(traj);
    require_finite(drift + freq, "proper-time evolution");
    const bool stationary = drift <= config.tol("stationary");
    const bool on_shell = s.k.on_shell(k);
    stationary_rows += stationary;
    shell_rows += on_shell;

    log.check("stationarity", "free", drift, config.tol("stationary"), stationary == on_shell)
        .set("delta", delta)
        .set("on_shell", on_shell)
        .set("stationary", stationary);
    const double predicted = k.epsilon * delta / (k.hbar * k.m);
    const double ferr = std::abs(freq - predicted);
    log.check("frequency", "free", ferr, config.tol("frequency"), ferr <= config.tol("frequency"))
        .set("delta", delta)
        .set("measured", freq)
        .set("predicted", predicted);
    double norm_drift = 0.0;
    for (const auto& st : traj) norm_drift = std::max(norm_drift, std::abs(st.chi.norm() - chi.norm()));
    log.check("norm-preservation", "free", norm_drift, config.tol("stationary"), norm_drift <= config.tol("stationary"))
        .set("delta", delta);
    csv << s.k.k(0) << ',' << s.k.k(1) << ',' << delta << ',' << freq << ',' << (stationary ? 1 : 0) << '\n';
  }
  log.check("stationary-rows", "free", std::abs(stationary_rows - shell_rows), 0.0, stationary_rows == shell_rows)
      .set("stationary_rows", stationary_rows)
      .set("on_shell_rows", shell_rows);
  return finish(log, config, command_line);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& config, const std::string& command_line) {
  SuiteLog log("simulate", config);
  const auto& k = config.constants;
  const DiffusionCoefficients sig = make_diffusion(k);
  bool blew_up = false;

  // diffusion squares
  for (int mu = 0; mu < 4; ++mu) {
    const Complex sq = sig.sigma[static_cast<std::size_t>(mu)] * sig.sigma[static_cast<std::size_t>(mu)];
    const Complex expected(0.0, 2.0 * k.epsilon * Metric::eta(mu, mu) * k.hbar / k.m);
    const double r = std::abs(sq - expected);
    const double tol = 4.0 * DBL_EPSILON * std::abs(expected);
    log.check("diffusion-square", "free", r, tol, r <= tol).set("mu", mu).set("exact", r == 0.0);
  }

  // generator battery
  {
    const std::vector<GeneratorCase> battery = generator_battery(k);
    std::ofstream csv = open_csv(config, "generator.csv");
    csv << "function,estimate_re,estimate_im,predicted_re,predicted_im,stderr,error,pass\n";
    const double sigmas = config.tol("generator_sigmas");
    for (std::size_t i = 0; i < battery.size(); ++i) {
      const auto& cs = battery[i];
      const GeneratorReport r = generator_check(cs.f, cs.w, cs.z0, sig, config.simulate_ds, config.simulate_paths,
                                                mix(config.seed, 5, i));
      require_finite(r.error + r.standard_error, "generator check");
      const bool pass = r.error <= sigmas * r.standard_error;
      log.check("generator", cs.f.describe(), r.error, sigmas * r.standard_error, pass)
          .set("estimate_re", r.estimate.real())
          .set("estimate_im", r.estimate.imag())
          .set("predicted_re", r.predicted.real())
          .set("predicted_im", r.predicted.imag())
          .set("stderr", r.standard_error)
          .set("paths", static_cast<std::int64_t>(config.simulate_paths))
          .set("ds", config.simulate_ds);
      csv << '"' << cs.f.describe() << "\"," << r.estimate.real() << ',' << r.estimate.imag() << ','
          << r.predicted.real() << ',' << r.predicted.imag() << ',' << r.standard_error << ',' << r.error << ','
          << (pass ? 1 : 0) << '\n';
    }

    // z0^2 z1^2 at the origin with w = 0: the generator vanishes, and the one-step
    // estimate carries exactly the quartic cross moment sigma0^2 sigma1^2 ds
    const Polynomial quartic = Polynomial::monomial(1.0, {2, 2, 0, 0});
    const GeneratorReport r =
        generator_check(quartic, Upper4(), Upper4(), sig, config.simulate_ds, config.simulate_paths, mix(config.seed, 5, 99));
    const Complex bias = sig.sigma[0] * sig.sigma[0] * sig.sigma[1] * sig.sigma[1] * config.simulate_ds;
    const double err = std::abs(r.estimate - r.predicted - bias);
    require_finite(err + r.standard_error, "generator bias check");
    log.check("generator-step-bias", quartic.describe(), err, sigmas * r.standard_error, err <= sigmas * r.standard_error)
        .set("estimate_re", r.estimate.real())
        .set("estimate_im", r.estimate.imag())
        .set("bias_re", bias.real())
        .set("bias_im", bias.imag())
        .set("stderr", r.standard_error);
  }

  // moments and real/imaginary correlation with w = 0
  {
    const int steps = 10;
    const std::int64_t N = config.simulate_paths;
    const double s = steps * config.simulate_ds;
    const TrajectoryEnsemble ens = simulate({N, steps, config.simulate_ds, Upper4()}, constant_control(Upper4()), sig,
                                            mix(config.seed, 6));
    blew_up = blew_up || ens.truncated_count() > 0;
    const double band = config.tol("moments") / std::sqrt(static_cast<double>(N));
    for (int mu = 0; mu < 4; ++mu) {
      double vr = 0, vi = 0, cov = 0;
      for (std::int64_t p = 0; p < N; ++p) {
        const Complex z = ens.position(p, steps)[mu];
        vr += z.real() * z.real();
        vi += z.imag() * z.imag();
        cov += z.real() * z.imag();
      }
      vr /= static_cast<double>(N);
      vi /= static_cast<double>(N);
      cov /= static_cast<double>(N);
      const double expected = std::norm(sig.sigma[static_cast<std::size_t>(mu)]) * s / 2.0;
      const double dev = std::max(std::abs(vr / expected - 1.0), std::abs(vi / expected - 1.0));
      require_finite(dev, "moment check");
      log.check("variance", "free", dev, band, dev <= band).set("mu", mu).set("expected", expected);
      const double corr = cov / std::sqrt(vr * vi);
      const double want = (mu == 0 ? 1.0 : -1.0) * k.epsilon;
      log.check("re-im-correlation", "free", std::abs(corr - want), 1e-12, std::abs(corr - want) <= 1e-12)
          .set("mu", mu)
          .set("correlation", corr);
    }
  }

  // sigma = 0: straight lines, bit for bit (dyadic inputs keep sums exact)
  {
    const Upper4 z0(0.5, -0.25, 1.0, 0.0), w(1.0, 0.5, -0.125, 0.75);
    const double ds = 1.0 / 1024.0;
    const TrajectoryEnsemble ens = simulate({4, config.simulate_steps, ds, z0}, constant_control(w),
                                            DiffusionCoefficients::disabled(), config.seed);
    std::int64_t mismatches = 0;
    double worst = 0.0;
    for (std::int64_t p = 0; p < 4; ++p)
      for (int n = 0; n <= config.simulate_steps; ++n) {
        const Upper4 expected = z0 + (n * ds) * w;
        mismatches += !(ens.position(p, n) == expected);
        worst = std::max(worst, (ens.position(p, n) - expected).components().cwiseAbs().maxCoeff());
      }
    log.check("straight-line", "free", worst, 0.0, mismatches == 0).set("mismatched_points", mismatches);
  }

  // fixed seed -> identical ensembles
  const EnsembleParams prm{config.simulate_action_paths, config.simulate_steps, config.simulate_ds, Upper4()};
  const Upper4 w_shell(k.c, 0, 0, 0);
  const TrajectoryEnsemble first = simulate(prm, constant_control(w_shell), sig, config.seed);
  {
    const TrajectoryEnsemble second = simulate(prm, constant_control(w_shell), sig, config.seed);
    const Eigen::Index n = first.positions.size();
    Eigen::Index differ = 0;
    for (Eigen::Index i = 0; i < n; ++i) differ += first.positions.data()[i] != second.positions.data()[i];
    log.check("reproducibility", "free", static_cast<double>(differ), 0.0, differ == 0 && first.controls == second.controls)
        .set("paths", static_cast<std::int64_t>(prm.paths))
        .set("steps", prm.steps);
    blew_up = blew_up || first.truncated_count() > 0;
  }

  // action: deterministic on-shell value, then the report-only ensemble estimate
  {
    const TrajectoryEnsemble line = simulate({1, config.simulate_steps, config.simulate_ds, Upper4()},
                                             constant_control(w_shell), DiffusionCoefficients::disabled(), 0);
    const ActionEstimate S = accumulate_action(line, PotentialSpec::free_field(), k);
    const double expected = -k.m * k.c * k.c * config.simulate_steps * config.simulate_ds;
    const double r = std::abs(S.mean - expected) / std::abs(expected);
    log.check("action-straight-line", "free", r, 1e-12, r <= 1e-12).set("action_re", S.mean.real());

    const ActionEstimate est = accumulate_action(first, config.potential, k);
    require_finite(est.mean.real() + est.mean.imag(), "action estimate");
    log.report("action-estimate", config.potential.describe())
        .set("mean_re", est.mean.real())
        .set("mean_im", est.mean.imag())
        .set("stderr_re", est.stderr_re)
        .set("stderr_im", est.stderr_im)
        .set("branch_flags", est.branch_flags)
        .set("degenerate_flags", est.degenerate_flags)
        .set("sqrt_branch", est.branch);
  }

  if (config.simulate_dump_paths > 0) {
    std::ofstream csv = open_csv(config, "paths.csv");
    csv << "path,step,s,re_z0,im_z0,re_z1,im_z1,re_z2,im_z2,re_z3,im_z3\n";
    const std::int64_t count = std::min(config.simulate_dump_paths, first.params.paths);
    for (std::int64_t p = 0; p < count; ++p)
      for (int n = 0; n <= first.params.steps; ++n) {
        const Upper4 z = first.position(p, n);
        csv << p << ',' << n << ',' << n * first.params.ds;
        for (int mu = 0; mu < 4; ++mu) csv << ',' << z[mu].real() << ',' << z[mu].imag();
        csv << '\n';
      }
  }

  // control law, weak condition, HJB and Hopf-Cole on plane waves
  {
    const SpacetimeGrid g = shell_grid(k);
    const SampledPotential free(PotentialSpec::free_field(), g);
    const ScalarField on = scalar_mode(g, shell_mode(k, 5, 3));
    for (int eps : {k.epsilon, -k.epsilon}) {
      PhysicalConstants ke = k;
      ke.epsilon = eps;
      const double r = max_abs(weak_condition_residual(optimal_control_from_phi(on, free, ke), ke)) / (k.c * k.c);
      log.check("weak-condition", "free", r, config.tol("weak"), r <= config.tol("weak"))
          .set("epsilon", eps)
          .set("grid", g.describe());
    }

    const double mc2 = k.mc() * k.mc();
    const double hjb_on = max_abs(hjb_residual(jet_from_phi(on), free, k)) / mc2;
    log.check("hjb-on-shell", "free", hjb_on, config.tol("hjb"), hjb_on <= config.tol("hjb")).set("grid", g.describe());

    std::vector<double> deltas, values;
    double uniform = 0.0;
    for (int n1 : {0, 1, 2, 3, 4, 6}) {
      const Upper4 km = shell_mode(k, 5, n1);
      const double delta = k.hbar * k.hbar * minkowski_square(km).real() - mc2;
      const ScalarField r = hjb_residual(jet_from_phi(scalar_mode(g, km)), free, k);
      uniform = std::max(uniform, (r.values().array() + delta).abs().maxCoeff() / mc2);
      deltas.push_back(delta);
      values.push_back(r.values().col(0).real().mean());
    }
    const double slope = fitted_slope(deltas, values);
    log.check("hjb-off-shell", "free", uniform, config.tol("hjb"), uniform <= config.tol("hjb"))
        .set("grid", g.describe());
    log.check("hjb-slope", "free", std::abs(std::abs(slope) - 1.0), config.tol("hjb_slope"),
              std::abs(std::abs(slope) - 1.0) <= config.tol("hjb_slope"))
        .set("slope", slope)
        .set("grid", g.describe());

    double hc_exp = 0.0;
    for (const Upper4& km : {shell_mode(k, 0, 3), shell_mode(k, 5, -2), shell_mode(k, 1, 8)})
      hc_exp = std::max(hc_exp, hopf_cole_check(scalar_mode(g, km)));
    log.check("hopf-cole-exponential", "free", hc_exp, config.tol("hopf_cole_exp"), hc_exp <= config.tol("hopf_cole_exp"))
        .set("grid", g.describe());
    // d(phi)/phi is not band-limited: resolve it on a finer grid
    const SpacetimeGrid fine = shell_grid(k, 128);
    double hc_rand = 0.0;
    for (std::uint64_t i = 0; i < 5; ++i)
      hc_rand = std::max(hc_rand, hopf_cole_check(random_scalar_field(fine, mix(config.seed, 8, i), {4, 0.5, 1.0, 0.0})));
    log.check("hopf-cole-random", "free", hc_rand, config.tol("hopf_cole_random"),
              hc_rand <= config.tol("hopf_cole_random"))
        .set("grid", fine.describe());
  }

  const int code = finish(log, config, command_line);
  if (blew_up) {
    std::cerr << "simulate: non-finite positions, paths truncated\n";
    return exit_blowup;
  }
  return code;
}

// ---------------------------------------------------------------------------

int cmd_report(const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(out_dir)) {
    std::cerr << "report: no output directory '" << out_dir.string() << "'\n";
    return exit_usage;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir))
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "report: no .jsonl files in '" << out_dir.string() << "'\n";
    return exit_usage;
  }

  struct Tally {
    std::int64_t total = 0, failed = 0, report_only = 0;
    std::vector<std::string> failures;
  };
  std::map<std::string, Tally> suites;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        std::cerr << "report: " << f.string() << ":" << lineno << ": " << e.what() << '\n';
        return exit_usage;
      }
      Tally& t = suites[rec.value("suite", f.stem().string())];
      ++t.total;
      if (rec.value("report_only", false)) ++t.report_only;
      if (!rec.value("pass", false)) {
        ++t.failed;
        t.failures.push_back(rec.value("check_name", std::string("?")) + " [" + rec.value("potential", std::string()) + "]");
      }
    }
  }

  std::int64_t total = 0, failed = 0;
  std::ostringstream table;
  table << std::left << std::setw(18) << "suite" << std::right << std::setw(9) << "records" << std::setw(9) << "passed"
        << std::setw(9) << "failed" << std::setw(13) << "report-only" << '\n';
  nlohmann::ordered_json summary;
  for (const auto& [name, t] : suites) {
    table << std::left << std::setw(18) << name << std::right << std::setw(9) << t.total << std::setw(9)
          << t.total - t.failed << std::setw(9) << t.failed << std::setw(13) << t.report_only << '\n';
    for (const auto& f : t.failures) table << "    FAIL " << f << '\n';
    summary["suites"][name] = {{"records", t.total}, {"failed", t.failed}, {"report_only", t.report_only},
                               {"failures", t.failures}};
    total += t.total;
    failed += t.failed;
  }
  table << std::left << std::setw(18) << "total" << std::right << std::setw(9) << total << std::setw(9)
        << total - failed << std::setw(9) << failed << '\n';
  summary["total"] = total;
  summary["failed"] = failed;
  std::cout << table.str();
  std::ofstream(out_dir / "summary.txt", std::ios::binary) << table.str();
  std::ofstream(out_dir / "summary.json", std::ios::binary) << summary.dump(2) << '\n';
  return failed == 0 ? exit_pass : exit_failure;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Verification suites for the stochastic-control construction of the Dirac equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seed, backend, epsilon;
  std::vector<std::string> sets;
  struct Entry {
    std::string name, help;
    int (*fn)(const RunConfig&, const std::string&);
  };
  const std::vector<Entry> entries{
      {"verify-clifford", "gamma-matrix identities", cmd_verify_clifford},
      {"verify-identity", "factored vs second-order operator, gauge law, spinor construction", cmd_verify_identity},
      {"dispersion", "mass-shell roots and legacy mode comparison", cmd_dispersion},
      {"evolve", "proper-time mode evolution over a gap sweep", cmd_evolve},
      {"simulate", "complex diffusion, generator battery, control and HJB checks", cmd_simulate},
  };
  std::vector<CLI::App*> subs;
  for (const auto& e : entries) subs.push_back(app.add_subcommand(e.name, e.help));
  CLI::App* report = app.add_subcommand("report", "aggregate JSON-lines outputs into a summary table");
  subs.push_back(report);
  for (CLI::App* s : subs) {
    s->add_option("--config", config_path, "config file (flat key = value)");
    s->add_option("--out", out_dir, "output directory (default: out)");
    if (s == report) continue;
    s->add_option("--seed", seed, "random seed");
    s->add_option("--backend", backend, "spectral | fd4");
    s->add_option("--epsilon", epsilon, "charge sign, +1 | -1");
    s->add_option("--set", sets, "override a config key, key=value (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  std::string command_line;
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  try {
    ConfigBuilder builder;
    if (!config_path.empty()) builder.read_file(config_path);
    if (!seed.empty()) builder.set("seed", seed);
    if (!backend.empty()) builder.set("backend", backend);
    if (!epsilon.empty()) builder.set("constants.epsilon", epsilon);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      builder.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    RunConfig config = builder.resolve();
    if (!out_dir.empty()) config.out = out_dir;

    if (report->parsed()) return cmd_report(config.out);
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (subs[i]->parsed()) return entries[i].fn(config, command_line);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_usage;
  } catch (const NumericalBlowup& e) {
    std::cerr << "numerical blow-up: " << e.what() << '\n';
    return exit_blowup;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_usage;
}

}  // namespace diracsoc::cli
