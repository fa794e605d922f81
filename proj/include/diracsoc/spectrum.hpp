#ifndef DIRACSOC_SPECTRUM_HPP
#define DIRACSOC_SPECTRUM_HPP

#include <utility>
#include <vector>

#include "diracsoc/clifford.hpp"
#include "diracsoc/emfield.hpp"

namespace diracsoc {

// Real wave four-vector k^mu (units 1/length).
struct FourMomentum {
  Eigen::Vector4d k = Eigen::Vector4d::Zero();

  Upper4 as_upper() const { return Upper4(k.cast<Complex>()); }

  // Delta = hbar^2 k.k - m^2 c^2
  double gap(const PhysicalConstants& c) const;
  // |Delta| <= rel_tol * m^2 c^2
  bool on_shell(const PhysicalConstants& c, double rel_tol = 1e-12) const;
};

// Roots k^0 = +-sqrt(|k|^2 + m^2c^2/hbar^2), positive first.
std::pair<double, double> dispersion_solve(const std::array<double, 3>& spatial_k, const PhysicalConstants& c);

// hbar kslash + sign m c I
Mat4 momentum_operator(const Upper4& k, const PhysicalConstants& c, double sign,
                       const GammaSet<double>& gammas = dirac_gammas());

// Orthonormal basis of null(M): right singular vectors whose singular values
// are below rel_threshold times the largest.
std::vector<Spinor> nullspace(const Mat4& M, double rel_threshold = 1e-8);

// Basis of null(hbar kslash - m c). Requires |Delta| <= 1e-10 m^2c^2 and
// throws std::domain_error otherwise or if the nullspace is not 2-dimensional.
std::vector<Spinor> nullspace_spinors(const FourMomentum& k, const PhysicalConstants& c,
                                      const GammaSet<double>& gammas = dirac_gammas());

struct ModeState {
  Spinor chi = Spinor::Zero();
  FourMomentum k;
  double tau = 0.0;
};

// Proper-time evolution of a single Fourier mode phi = chi exp(-i k.z) under
//   -i eps hbar m d_tau phi = (i hbar gamma d - mc)(i hbar gamma d + mc) phi
// with A = 0. On the mode the right-hand side is Delta phi, so each step
// multiplies chi by exp(i eps Delta dtau / (hbar m)). Returns steps + 1
// states starting with the input. Requires a free potential and
// dtau |Delta| / (hbar m) < 0.1.
std::vector<ModeState> propertime_evolve(const ModeState& state, const PotentialSpec& A, double dtau, int steps,
                                         const PhysicalConstants& c);

// Signed angular frequency of the trajectory, from a least-squares fit of
// the unwrapped phase of <chi(0), chi(tau)>.
double measured_frequency(const std::vector<ModeState>& trajectory);

// max over the trajectory of |chi(tau) - chi(0)| / |chi(0)|
double max_drift(const std::vector<ModeState>& trajectory);

struct LegacyModeReport {
  double gap = 0.0;              // Delta
  double new_residual = 0.0;     // |(hbar kslash - mc)(hbar kslash + mc) chi|
  double legacy_residual = 0.0;  // |(hbar kslash - mc)(hbar kslash) chi|
  bool on_shell = false;
  bool new_stationary = false;
  bool legacy_stationary = false;
};

// Stationarity of a plane-wave mode under the current second-order operator
// and under the legacy factorization, side by side. A residual counts as
// stationary when it is below tol * m^2c^2 |chi|.
LegacyModeReport legacy_mode_condition(const FourMomentum& k, const Spinor& chi, const PhysicalConstants& c,
                                       const GammaSet<double>& gammas = dirac_gammas(), double tol = 1e-10);

}  // namespace diracsoc

#endif  // DIRACSOC_SPECTRUM_HPP
