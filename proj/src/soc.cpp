#include "diracsoc/soc.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "diracsoc/philox.hpp"

namespace diracsoc {

namespace {

const Complex kI(0.0, 1.0);

Lower4 row_as_lower(const Eigen::Matrix<Complex, Eigen::Dynamic, 4>& m, Eigen::Index r) {
  return Lower4(m.row(r).transpose());
}

Complex sandwich(const Mat4& M, const Spinor& chi) { return chi.dot(M * chi) / chi.squaredNorm(); }

struct Moments {
  Complex mean;
  double var_re = 0.0;
  double var_im = 0.0;
};

// Two-pass sample mean and unbiased variances of the real and imaginary parts.
Moments sample_moments(const std::vector<Complex>& x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  for (const Complex& v : x) m.mean += v;
  m.mean /= n;
  if (x.size() < 2) return m;
  for (const Complex& v : x) {
    const Complex d = v - m.mean;
    m.var_re += d.real() * d.real();
    m.var_im += d.imag() * d.imag();
  }
  m.var_re /= n - 1.0;
  m.var_im /= n - 1.0;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

Lower4 optimal_control(const Lower4& grad_jtilde, const Lower4& A, const PhysicalConstants& k) {
  k.validate();
  if (!grad_jtilde.allFinite()) throw std::domain_error("non-finite gradient of Jtilde");
  return (double(k.epsilon) / k.m) * ((kI * k.hbar) * grad_jtilde - k.e * A);
}

namespace {

CovectorField control_from_gradient(const CovectorField& grad, const SampledPotential& A, const PhysicalConstants& k) {
  if (!grad.allFinite()) throw std::domain_error("non-finite gradient of Jtilde");
  CovectorField w(grad.grid());
  w.values() = (double(k.epsilon) / k.m) * ((kI * k.hbar) * grad.values() - k.e * A.lower());
  return w;
}

}  // namespace

CovectorField optimal_control(const ScalarField& jtilde, const SampledPotential& A, const PhysicalConstants& k,
                              Backend backend) {
  k.validate();
  return control_from_gradient(jet_from_field(jtilde, backend).grad, A, k);
}

CovectorField optimal_control_from_phi(const ScalarField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                       Backend backend) {
  k.validate();
  CovectorField grad(phi.grid());
  for (int mu = 0; mu < phi.grid().dims(); ++mu)
    grad.component(mu) = partial(phi, mu, backend).values().col(0).cwiseQuotient(phi.values().col(0));
  return control_from_gradient(grad, A, k);
}

Complex weak_condition_residual(const Lower4& w, const PhysicalConstants& k) {
  return minkowski_square(w) - k.c * k.c;
}

ScalarField weak_condition_residual(const CovectorField& w, const PhysicalConstants& k) {
  ScalarField out(w.grid());
  for (Eigen::Index p = 0; p < w.grid().size(); ++p) out.values()(p, 0) = weak_condition_residual(row_as_lower(w.values(), p), k);
  return out;
}

// ---------------------------------------------------------------------------

LogAmplitudeJet jet_from_field(const ScalarField& jtilde, Backend backend) {
  const SpacetimeGrid& grid = jtilde.grid();
  LogAmplitudeJet jet{CovectorField(grid), dalembertian(jtilde, backend)};
  for (int mu = 0; mu < grid.dims(); ++mu) jet.grad.component(mu) = partial(jtilde, mu, backend).values().col(0);
  return jet;
}

LogAmplitudeJet jet_from_phi(const ScalarField& phi, Backend backend) {
  const SpacetimeGrid& grid = phi.grid();
  LogAmplitudeJet jet{CovectorField(grid), ScalarField(grid)};
  for (int mu = 0; mu < grid.dims(); ++mu) {
    ScalarField g(grid);
    g.values().col(0) = partial(phi, mu, backend).values().col(0).cwiseQuotient(phi.values().col(0));
    jet.grad.component(mu) = g.values().col(0);
    jet.box.values() += double(Metric::diag[static_cast<std::size_t>(mu)]) * partial(g, mu, backend).values();
  }
  return jet;
}

Spinor default_reference_bispinor() { return Spinor::Unit(0); }

Complex hjb_residual(const Lower4& grad_jtilde, Complex box_jtilde, const Lower4& A, Complex spin_scalar,
                     Complex dtau_jtilde, const PhysicalConstants& k) {
  const double mc = k.mc();
  const Lower4 kinetic = (kI * k.hbar) * grad_jtilde - k.e * A;
  const Complex lhs = -kI * double(k.epsilon) * k.hbar * k.m * dtau_jtilde;
  const Complex rhs = -mc * mc - k.hbar * k.hbar * box_jtilde - spin_scalar + minkowski_square(kinetic);
  return lhs - rhs;
}

ScalarField hjb_residual(const LogAmplitudeJet& jet, const SampledPotential& A, const PhysicalConstants& k,
                         const ScalarField* dtau_jtilde, const Spinor& reference) {
  k.validate();
  const SpacetimeGrid& grid = jet.grad.grid();
  if (!(grid == A.grid()) || !(grid == jet.box.grid())) throw std::invalid_argument("jet and potential grids differ");
  if (dtau_jtilde && !(dtau_jtilde->grid() == grid)) throw std::invalid_argument("d_tau Jtilde lives on another grid");
  const GammaSet<double>& g = dirac_gammas();
  ScalarField out(grid);
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    Complex spin = 0.0;
    if (!A.is_free()) spin = k.m * sandwich(spin_coupling_matrix(A.field_strength(p), g, k.e, k.m, k.hbar), reference);
    const Complex dtau = dtau_jtilde ? dtau_jtilde->values()(p, 0) : Complex(0.0);
    out.values()(p, 0) =
        hjb_residual(row_as_lower(jet.grad.values(), p), jet.box.values()(p, 0), row_as_lower(A.lower(), p), spin, dtau, k);
  }
  return out;
}

double hopf_cole_check(const ScalarField& phi, Backend backend) {
  const SpacetimeGrid& grid = phi.grid();
  const Eigen::VectorXd modulus = phi.values().col(0).cwiseAbs();
  Eigen::Index worst = 0;
  const double smallest = modulus.minCoeff(&worst);
  if (!(smallest >= 1e-8 * modulus.maxCoeff())) {
    const Upper4 z = grid.coordinate(worst);
    std::ostringstream os;
    os << "phi nearly vanishes (|phi| = " << smallest << ") near z = (";
    for (int a = 0; a < grid.dims(); ++a) os << (a ? ", " : "") << z[a].real();
    os << ")";
    throw std::domain_error(os.str());
  }

  const LogAmplitudeJet jet = jet_from_phi(phi, backend);
  Eigen::VectorXcd lhs = jet.box.values().col(0);
  for (int mu = 0; mu < grid.dims(); ++mu)
    lhs += double(Metric::diag[static_cast<std::size_t>(mu)]) * jet.grad.component(mu).cwiseProduct(jet.grad.component(mu));
  const Eigen::VectorXcd rhs = dalembertian(phi, backend).values().col(0).cwiseQuotient(phi.values().col(0));
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

DiffusionCoefficients DiffusionCoefficients::disabled() { return {{}, "disabled"}; }

DiffusionCoefficients make_diffusion(const PhysicalConstants& k) {
  k.validate();
  const double s = std::sqrt(k.hbar / k.m);
  const double eps = k.epsilon;
  DiffusionCoefficients d;
  d.sigma[0] = s * Complex(1.0, eps);
  for (int i = 1; i < 4; ++i) d.sigma[static_cast<std::size_t>(i)] = s * Complex(-eps, 1.0);
  d.branch = eps > 0 ? "sigma_0 = sqrt(2hbar/m) exp(+i pi/4), sigma_i = i sigma_0"
                     : "sigma_0 = sqrt(2hbar/m) exp(-i pi/4), sigma_i = i sigma_0";
  return d;
}

ControlLaw constant_control(const Upper4& w) {
  return [w](const Upper4&, double) { return w; };
}

Upper4 TrajectoryEnsemble::position(std::int64_t path, int step) const {
  return Upper4(positions.row(path * (params.steps + 1) + step).transpose());
}

Upper4 TrajectoryEnsemble::control(std::int64_t path, int step) const {
  return Upper4(controls.row(path * params.steps + step).transpose());
}

std::int64_t TrajectoryEnsemble::truncated_count() const {
  std::int64_t n = 0;
  for (int t : truncated_at) n += t >= 0;
  return n;
}

TrajectoryEnsemble simulate(const EnsembleParams& params, const ControlLaw& w, const DiffusionCoefficients& sigma,
                            std::uint64_t seed) {
  if (params.paths < 1 || params.steps < 1) throw std::invalid_argument("need at least one path and one step");
  if (!(params.ds > 0.0)) throw std::invalid_argument("ds must be positive");

  TrajectoryEnsemble ens;
  ens.params = params;
  ens.seed = seed;
  ens.diffusion = sigma;
  const Eigen::Index rows_per_path = params.steps + 1;
  ens.positions.resize(params.paths * rows_per_path, 4);
  ens.controls.resize(params.paths * params.steps, 4);
  ens.truncated_at.assign(static_cast<std::size_t>(params.paths), -1);

  const auto key = Philox4x32::key_from_seed(seed);
  const double sqrt_ds = std::sqrt(params.ds);
  const Complex nan(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());

  for (std::int64_t p = 0; p < params.paths; ++p) {
    Upper4 z = params.z0;
    const Eigen::Index base = p * rows_per_path;
    ens.positions.row(base) = z.components().transpose();
    for (int n = 0; n < params.steps; ++n) {
      const Upper4 drift = w(z, n * params.ds);
      ens.controls.row(p * params.steps + n) = drift.components().transpose();
      const auto [x0, x1] = Philox4x32::normal_pair(key, static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(n), 0);
      const auto [x2, x3] = Philox4x32::normal_pair(key, static_cast<std::uint64_t>(p), static_cast<std::uint32_t>(n), 1);
      const std::array<double, 4> xi{x0, x1, x2, x3};
      for (int mu = 0; mu < 4; ++mu)
        z[mu] += drift[mu] * params.ds + sigma.sigma[static_cast<std::size_t>(mu)] * (sqrt_ds * xi[static_cast<std::size_t>(mu)]);
      if (!z.allFinite()) {
        ens.truncated_at[static_cast<std::size_t>(p)] = n + 1;
        for (Eigen::Index r = n + 1; r < rows_per_path; ++r) ens.positions.row(base + r).setConstant(nan);
        for (int r = n + 1; r < params.steps; ++r) ens.controls.row(p * params.steps + r).setConstant(nan);
        break;
      }
      ens.positions.row(base + n + 1) = z.components().transpose();
    }
  }
  return ens;
}

// ---------------------------------------------------------------------------

Polynomial::Polynomial(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_)
    for (int p : t.power)
      if (p < 0) throw std::invalid_argument("negative power in polynomial");
}

Polynomial Polynomial::monomial(Complex coefficient, std::array<int, 4> power) {
  return Polynomial({Term{coefficient, power}});
}

namespace {

Complex power_product(const Upper4& z, const std::array<int, 4>& power) {
  Complex v = 1.0;
  for (int mu = 0; mu < 4; ++mu)
    for (int i = 0; i < power[static_cast<std::size_t>(mu)]; ++i) v *= z[mu];
  return v;
}

}  // namespace

Complex Polynomial::operator()(const Upper4& z) const {
  Complex s = 0.0;
  for (const auto& t : terms_) s += t.coefficient * power_product(z, t.power);
  return s;
}

Complex Polynomial::derivative(const Upper4& z, int mu) const {
  check_index(mu);
  Complex s = 0.0;
  for (const auto& t : terms_) {
    const int n = t.power[static_cast<std::size_t>(mu)];
    if (n == 0) continue;
    auto pw = t.power;
    pw[static_cast<std::size_t>(mu)] -= 1;
    s += (t.coefficient * double(n)) * power_product(z, pw);
  }
  return s;
}

Complex Polynomial::second_derivative(const Upper4& z, int mu) const {
  check_index(mu);
  Complex s = 0.0;
  for (const auto& t : terms_) {
    const int n = t.power[static_cast<std::size_t>(mu)];
    if (n < 2) continue;
    auto pw = t.power;
    pw[static_cast<std::size_t>(mu)] -= 2;
    s += (t.coefficient * double(n * (n - 1))) * power_product(z, pw);
  }
  return s;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.power[0] + t.power[1] + t.power[2] + t.power[3]);
  return d;
}

std::string Polynomial::describe() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    os << (first ? "" : " + ");
    first = false;
    if (t.coefficient != Complex(1.0)) os << '(' << t.coefficient.real() << (t.coefficient.imag() < 0 ? "" : "+")
                                          << t.coefficient.imag() << "i)";
    bool any = false;
    for (int mu = 0; mu < 4; ++mu) {
      const int n = t.power[static_cast<std::size_t>(mu)];
      if (n == 0) continue;
      os << (any ? "*" : "") << 'z' << mu;
      if (n > 1) os << '^' << n;
      any = true;
    }
    if (!any) os << '1';
  }
  return first ? "0" : os.str();
}

Complex generator_apply(const Polynomial& f, const Upper4& z, const Upper4& w, const DiffusionCoefficients& sigma) {
  Complex s = 0.0;
  for (int mu = 0; mu < 4; ++mu) {
    const Complex sig = sigma.sigma[static_cast<std::size_t>(mu)];
    s += w[mu] * f.derivative(z, mu) + 0.5 * sig * sig * f.second_derivative(z, mu);
  }
  return s;
}

GeneratorReport generator_check(const Polynomial& f, const Upper4& w, const Upper4& z0,
                                const DiffusionCoefficients& sigma, double ds, std::int64_t samples,
                                std::uint64_t seed) {
  if (f.degree() > 4) throw std::invalid_argument("generator_check expects a polynomial of degree <= 4");
  if (samples < 2) throw std::invalid_argument("generator_check needs at least two samples");
  const TrajectoryEnsemble ens = simulate({samples, 1, ds, z0}, constant_control(w), sigma, seed);

  const Complex f0 = f(z0);
  std::vector<Complex> d(static_cast<std::size_t>(samples));
  for (std::int64_t p = 0; p < samples; ++p) d[static_cast<std::size_t>(p)] = f(ens.position(p, 1)) - f0;
  const auto [mean, var_re, var_im] = sample_moments(d);

  GeneratorReport r;
  r.estimate = mean / ds;
  r.predicted = generator_apply(f, z0, w, sigma);
  r.standard_error = std::sqrt((var_re + var_im) / static_cast<double>(samples)) / ds;
  r.error = std::abs(r.estimate - r.predicted);
  r.pass = r.error <= 3.0 * r.standard_error;
  return r;
}

std::vector<GeneratorCase> generator_battery(const PhysicalConstants& k) {
  const double c = k.c;
  return {
      {Polynomial::monomial(1.0, {0, 1, 0, 0}), Upper4(0.6 * c, 0.3 * c, -0.2 * c, 0.1 * c), Upper4(0.1, 0.2, 0, 0)},
      {Polynomial::monomial(1.0, {0, 2, 0, 0}), Upper4(), Upper4()},
      {Polynomial::monomial(1.0, {1, 1, 0, 0}), Upper4(), Upper4()},
      {Polynomial::monomial(1.0, {2, 0, 0, 0}), Upper4(0.5 * c, 0, 0, 0), Upper4(0.2, 0, 0, 0)},
      {Polynomial({{1.0, {0, 3, 0, 0}}, {1.0, {0, 0, 1, 1}}}), Upper4(0, 0.4 * c, 0.3 * c, -0.2 * c),
       Upper4(0, 0.1, 0.2, -0.1)},
      {Polynomial::monomial(1.0, {3, 1, 0, 0}), Upper4(0.3 * c, 0.2 * c, 0, 0), Upper4(0.1, -0.2, 0, 0)},
  };
}

ActionEstimate accumulate_action(const TrajectoryEnsemble& ensemble, const PotentialSpec& A,
                                 const PhysicalConstants& k, const Spinor& reference) {
  k.validate();
  const PotentialModel model(A);
  const bool free = model.is_zero();
  const GammaSet<double>& g = dirac_gammas();
  const auto& prm = ensemble.params;

  ActionEstimate est;
  est.branch = "principal sqrt(w.w); spin term sandwiched with the reference bispinor";
  std::vector<Complex> actions(static_cast<std::size_t>(prm.paths));
  for (std::int64_t p = 0; p < prm.paths; ++p) {
    Complex S = 0.0;
    for (int n = 0; n < prm.steps; ++n) {
      const Upper4 z = ensemble.position(p, n);
      const Upper4 w = ensemble.control(p, n);
      if (!z.allFinite() || !w.allFinite()) break;
      const Complex ww = minkowski_square(w);
      if (ww == Complex(0.0)) ++est.degenerate_flags;
      if (ww.real() < 0.0) ++est.branch_flags;
      Complex L = -k.mc() * std::sqrt(ww);
      if (!free) {
        const Lower4 a = model.value(z);
        L -= double(k.epsilon) * k.e * contract(w, a);
        L -= sandwich(spin_coupling_matrix(field_strength(model, z), g, k.e, k.m, k.hbar), reference);
      }
      S += L * prm.ds;
    }
    actions[static_cast<std::size_t>(p)] = S;
  }
  const auto [mean, var_re, var_im] = sample_moments(actions);
  est.mean = mean;
  const double n = static_cast<double>(prm.paths);
  est.stderr_re = std::sqrt(var_re / n);
  est.stderr_im = std::sqrt(var_im / n);
  return est;
}

}  // namespace diracsoc
