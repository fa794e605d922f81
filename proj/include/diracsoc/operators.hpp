#ifndef DIRACSOC_OPERATORS_HPP
#define DIRACSOC_OPERATORS_HPP

#include <array>
#include <vector>

#include "diracsoc/clifford.hpp"
#include "diracsoc/emfield.hpp"
#include "diracsoc/grid.hpp"

namespace diracsoc {

// A potential sampled on a grid together with its analytic field strength
// and divergence. The potential may only vary along active grid axes.
class SampledPotential {
 public:
  SampledPotential(const PotentialSpec& spec, const SpacetimeGrid& grid, const GammaSet<double>& gammas = dirac_gammas());

  const PotentialSpec& spec() const { return spec_; }
  const SpacetimeGrid& grid() const { return grid_; }
  bool is_free() const { return free_; }

  // A_mu at every point, one column per mu.
  const Eigen::Matrix<Complex, Eigen::Dynamic, 4>& lower() const { return lower_; }
  // d_mu A^mu at every point.
  const Eigen::VectorXcd& divergence() const { return divergence_; }
  // F_{mu nu} at point p.
  const Mat4& field_strength(Eigen::Index p) const { return strength_[static_cast<std::size_t>(p)]; }
  // sum over mu, nu of [gamma^mu, gamma^nu] F_{mu nu} at point p.
  const Mat4& commutator_contraction(Eigen::Index p) const { return contraction_[static_cast<std::size_t>(p)]; }

 private:
  PotentialSpec spec_;
  SpacetimeGrid grid_;
  bool free_ = true;
  Eigen::Matrix<Complex, Eigen::Dynamic, 4> lower_;
  Eigen::VectorXcd divergence_;
  std::vector<Mat4> strength_;
  std::vector<Mat4> contraction_;
};

// (i hbar gamma^nu d_nu - e gamma^nu A_nu + mass_sign m c) psi.
// mass_sign is -1 for the Dirac operator, +1 for its conjugate and 0 for the
// bare kinetic factor of the legacy equation.
SpinorField first_order_apply(const SpinorField& psi, const SampledPotential& A, const PhysicalConstants& k,
                              double mass_sign, Backend backend = Backend::spectral,
                              const GammaSet<double>& gammas = dirac_gammas());

SpinorField dirac_apply(const SpinorField& psi, const SampledPotential& A, const PhysicalConstants& k,
                        Backend backend = Backend::spectral);
SpinorField conjugate_apply(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                            Backend backend = Backend::spectral);
// psi = i hbar gamma^mu d_mu phi - e gamma^mu A_mu phi + m c phi, the spinor
// built from the proper-time amplitude. Same operator as conjugate_apply.
SpinorField build_spinor(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                         Backend backend = Backend::spectral);

// Second-order form, term by term:
//   -m^2c^2 phi - hbar^2 d^mu d_mu phi - (i e hbar/4)[gamma^mu, gamma^nu] F_{mu nu} phi
//   - 2 i e hbar A^mu d_mu phi + e^2 A^mu A_mu phi
SpinorField fock_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                     Backend backend = Backend::spectral);

// dirac_apply(conjugate_apply(phi)), by two actual applications on the grid.
SpinorField factored_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                         Backend backend = Backend::spectral);

// dirac_apply(first_order_apply(phi, mass_sign = 0)); the older factorization
// whose inner factor lacks +mc.
SpinorField legacy_factored_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                Backend backend = Backend::spectral);

// The term the second-order form drops when d_mu A^mu != 0:
// factored_rhs - fock_rhs = -i e hbar (d_mu A^mu) phi.
SpinorField gauge_violation_term(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k);

struct KleinGordonResidual {
  std::array<double, 4> residual{};
  std::array<bool, 4> degenerate{};
};

// r_a = |(d^mu d_mu + m^2c^2/hbar^2) psi_a| / |psi_a| per component, free
// potential only. Components whose norm is below 1e-12 of the largest (or
// all of them, for psi = 0) are flagged degenerate and reported as 0.
KleinGordonResidual kg_residual_componentwise(const SpinorField& psi, const SampledPotential& A,
                                              const PhysicalConstants& k, Backend backend = Backend::spectral);

struct EquivalenceCheck {
  double relative = 0.0;      // |factored - fock| / |fock|
  double max_abs = 0.0;       // max pointwise |factored - fock|
  double fock_norm = 0.0;
};

EquivalenceCheck check_factorization(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                     Backend backend = Backend::spectral);

}  // namespace diracsoc

#endif  // DIRACSOC_OPERATORS_HPP
