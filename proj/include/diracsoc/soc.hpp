#ifndef DIRACSOC_SOC_HPP
#define DIRACSOC_SOC_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "diracsoc/emfield.hpp"
#include "diracsoc/grid.hpp"
#include "diracsoc/operators.hpp"

namespace diracsoc {

// ---------------------------------------------------------------------------
// Optimal control and the weak condition

// w_mu = (eps / m)(i hbar d_mu Jtilde - e A_mu)
Lower4 optimal_control(const Lower4& grad_jtilde, const Lower4& A, const PhysicalConstants& k);

// Control field on a grid, one column per lower component w_mu.
using CovectorField = Field<4>;

// Gradient of Jtilde taken directly from the (periodic) field Jtilde.
CovectorField optimal_control(const ScalarField& jtilde, const SampledPotential& A, const PhysicalConstants& k,
                              Backend backend = Backend::spectral);
// Gradient of Jtilde = log phi taken as d_mu phi / phi, which stays periodic
// for plane waves where Jtilde itself does not.
CovectorField optimal_control_from_phi(const ScalarField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                       Backend backend = Backend::spectral);

// w_mu w^mu - c^2
Complex weak_condition_residual(const Lower4& w, const PhysicalConstants& k);
ScalarField weak_condition_residual(const CovectorField& w, const PhysicalConstants& k);

// ---------------------------------------------------------------------------
// HJB residual for the log-amplitude Jtilde

// First and second derivatives of Jtilde on a grid.
struct LogAmplitudeJet {
  CovectorField grad;  // d_mu Jtilde
  ScalarField box;     // d^mu d_mu Jtilde
};

LogAmplitudeJet jet_from_field(const ScalarField& jtilde, Backend backend = Backend::spectral);
// Jtilde = log phi: grad = d phi / phi, box = d^mu (d_mu phi / phi).
LogAmplitudeJet jet_from_phi(const ScalarField& phi, Backend backend = Backend::spectral);

// Reference bispinor used to reduce the 4x4 spin coupling to a scalar:
// <chi|M|chi> / <chi|chi>. Defaults to the rest-frame spin-up vector e_0.
Spinor default_reference_bispinor();

// LHS - RHS of
//   -i eps hbar m d_tau Jtilde = -m^2c^2 - hbar^2 d^mu d_mu Jtilde - (e hbar/2) sigma F
//                                + (i hbar d^mu Jtilde - e A^mu)(i hbar d_mu Jtilde - e A_mu)
// at a single point; spin_scalar is the reduced (e hbar/2) sigma^{mu nu} F_{mu nu}.
Complex hjb_residual(const Lower4& grad_jtilde, Complex box_jtilde, const Lower4& A, Complex spin_scalar,
                     Complex dtau_jtilde, const PhysicalConstants& k);

// Field version; dtau_jtilde may be null for a stationary Jtilde.
ScalarField hjb_residual(const LogAmplitudeJet& jet, const SampledPotential& A, const PhysicalConstants& k,
                         const ScalarField* dtau_jtilde = nullptr,
                         const Spinor& reference = default_reference_bispinor());

// Maximum over the grid of
//   |d^mu J d_mu J + d^mu d_mu J - (d^mu d_mu phi)/phi|,  J = log phi.
// Throws std::domain_error if |phi| < 1e-8 max|phi| anywhere, naming the point.
double hopf_cole_check(const ScalarField& phi, Backend backend = Backend::spectral);

// ---------------------------------------------------------------------------
// Complex diffusion

// sigma_0 = sqrt(2 hbar/m) rho, sigma_i = i sqrt(2 hbar/m) rho with
// rho = exp(i eps pi/4), so sigma_mu^2 = 2 i eps eta^{mu mu} hbar/m. Written as
// sqrt(hbar/m)(1 + i eps) and sqrt(hbar/m)(i - eps) so squares are exact
// whenever sqrt(hbar/m) is.
struct DiffusionCoefficients {
  std::array<Complex, 4> sigma{};
  std::string branch;  // description of the root choice, for provenance

  static DiffusionCoefficients disabled();
};

DiffusionCoefficients make_diffusion(const PhysicalConstants& k);

// Contravariant drift w^mu as a function of position and parameter s.
using ControlLaw = std::function<Upper4(const Upper4& z, double s)>;

ControlLaw constant_control(const Upper4& w);

struct EnsembleParams {
  std::int64_t paths = 1;
  int steps = 1;
  double ds = 1e-3;
  Upper4 z0;
};

// Complex paths from dz^mu = w^mu ds + sigma_mu dW_mu with real, independent
// Wiener increments. positions holds paths * (steps + 1) rows and controls
// paths * steps rows, path-major.
struct TrajectoryEnsemble {
  EnsembleParams params;
  std::uint64_t seed = 0;
  DiffusionCoefficients diffusion;
  Eigen::Matrix<Complex, Eigen::Dynamic, 4> positions;
  Eigen::Matrix<Complex, Eigen::Dynamic, 4> controls;
  std::vector<int> truncated_at;  // first non-finite step per path, -1 if none

  Upper4 position(std::int64_t path, int step) const;
  Upper4 control(std::int64_t path, int step) const;
  std::int64_t truncated_count() const;
};

TrajectoryEnsemble simulate(const EnsembleParams& params, const ControlLaw& w, const DiffusionCoefficients& sigma,
                            std::uint64_t seed);

// Holomorphic polynomial in (z^0, z^1, z^2, z^3).
class Polynomial {
 public:
  struct Term {
    Complex coefficient;
    std::array<int, 4> power;
  };

  Polynomial() = default;
  explicit Polynomial(std::vector<Term> terms);

  static Polynomial monomial(Complex coefficient, std::array<int, 4> power);

  Complex operator()(const Upper4& z) const;
  Complex derivative(const Upper4& z, int mu) const;
  Complex second_derivative(const Upper4& z, int mu) const;
  int degree() const;
  std::string describe() const;

 private:
  std::vector<Term> terms_;
};

// w^mu d_mu f + (1/2) sum_mu sigma_mu^2 d_mu d_mu f at z.
Complex generator_apply(const Polynomial& f, const Upper4& z, const Upper4& w, const DiffusionCoefficients& sigma);

struct GeneratorReport {
  Complex estimate;   // (E[f(z_ds)] - f(z_0)) / ds
  Complex predicted;  // generator_apply at z_0
  double standard_error = 0.0;
  double error = 0.0;  // |estimate - predicted|
  bool pass = false;   // error <= 3 stderr
};

GeneratorReport generator_check(const Polynomial& f, const Upper4& w, const Upper4& z0,
                                const DiffusionCoefficients& sigma, double ds, std::int64_t samples,
                                std::uint64_t seed);

// The fixed six-function battery: linear, pure diffusion, independent cross
// term, time-like square with drift, mixed cubic, and a quartic whose one-step
// O(ds) bias vanishes (no even-even fourth derivative).
struct GeneratorCase {
  Polynomial f;
  Upper4 w;
  Upper4 z0;
};
std::vector<GeneratorCase> generator_battery(const PhysicalConstants& k);

struct ActionEstimate {
  Complex mean;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  std::int64_t branch_flags = 0;      // steps with Re(w.w) < 0
  std::int64_t degenerate_flags = 0;  // steps with w.w = 0
  std::string branch;                 // square-root branch used
};

// Per path S = sum over steps of L(z, w) ds with
//   L = -m c sqrt(w_mu w^mu) - eps e A_mu w^mu - (e hbar / 2m) <chi|sigma F|chi>
// (principal square root), averaged over paths.
ActionEstimate accumulate_action(const TrajectoryEnsemble& ensemble, const PotentialSpec& A,
                                 const PhysicalConstants& k, const Spinor& reference = default_reference_bispinor());

}  // namespace diracsoc

#endif  // DIRACSOC_SOC_HPP
