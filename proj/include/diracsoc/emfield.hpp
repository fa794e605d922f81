#ifndef DIRACSOC_EMFIELD_HPP
#define DIRACSOC_EMFIELD_HPP

#include <map>
#include <string>
#include <string_view>

#include "diracsoc/clifford.hpp"
#include "diracsoc/types.hpp"

namespace diracsoc {

enum class PotentialKind { free, constant_electric, constant_magnetic, em_plane_wave, custom_polynomial };

std::string_view to_string(PotentialKind kind);
// Throws std::invalid_argument on an unknown name.
PotentialKind parse_potential_kind(std::string_view name);

// A named analytic four-potential family. Components are stored lower-index.
//
//   free               A = 0
//   constant_electric  A_0 = -E z^a              params: E, axis (default 1)
//   constant_magnetic  symmetric gauge (gauge=0): A_1 = -B z^2/2, A_2 = B z^1/2
//                      Landau gauge (gauge=1):    A_2 = B z^1
//                      params: B, gauge (default 0); both give F_12 = B
//   em_plane_wave      A_mu = amplitude eps_mu cos(k_nu z^nu)
//                      params: k0..k3, eps0..eps3 (contravariant), amplitude (default 1)
//   custom_polynomial  A_mu = c<mu> + sum l<mu>_<nu> z^nu + sum q<mu>_<nu><rho> z^nu z^rho
//                      e.g. c0, l0_1, q2_01 (nu <= rho)
//
// All entries are entire functions of z, so complex arguments are allowed.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::free;
  std::map<std::string, double> params;

  static PotentialSpec free_field();
  static PotentialSpec constant_electric(double E, int axis = 1);
  static PotentialSpec constant_magnetic(double B, int gauge = 0);
  static PotentialSpec plane_wave(const std::array<double, 4>& k_upper, const std::array<double, 4>& eps_upper,
                                  double amplitude = 1.0);
  static PotentialSpec custom_polynomial(std::map<std::string, double> coefficients);

  std::string describe() const;
};

// Parameter-resolved form of a PotentialSpec; construction validates the spec.
class PotentialModel {
 public:
  explicit PotentialModel(const PotentialSpec& spec);

  Lower4 value(const Upper4& z) const;
  // J(mu, nu) = d_mu A_nu
  Mat4 jacobian(const Upper4& z) const;
  // Coordinates the potential depends on.
  std::array<bool, 4> varying_axes() const;
  bool is_zero() const;

 private:
  Eigen::Matrix<double, 4, 1> constant_;
  Eigen::Matrix<double, 4, 4> linear_;                   // linear_(mu, nu): coefficient of z^nu in A_mu
  std::array<Eigen::Matrix<double, 4, 4>, 4> quadratic_;  // quadratic_[mu](nu, rho), nu <= rho
  bool wave_ = false;
  Eigen::Matrix<double, 4, 1> wave_k_lower_;
  Eigen::Matrix<double, 4, 1> wave_eps_lower_;
  double wave_amplitude_ = 0.0;
};

Lower4 evaluate_potential(const PotentialSpec& spec, const Upper4& z);

enum class Differentiation { analytic, finite_difference };

struct FiniteDifference {
  double h = 1e-3;
  int order = 4;  // 2 or 4, central stencils
};

// F(mu, nu) = d_mu A_nu - d_nu A_mu at z.
using FieldStrength = Mat4;

Mat4 potential_jacobian_fd(const PotentialModel& model, const Upper4& z, const FiniteDifference& fd);

FieldStrength field_strength(const PotentialSpec& spec, const Upper4& z,
                             Differentiation method = Differentiation::analytic, const FiniteDifference& fd = {});
FieldStrength field_strength(const PotentialModel& model, const Upper4& z,
                             Differentiation method = Differentiation::analytic, const FiniteDifference& fd = {});

// d_mu A^mu at z, from the analytic Jacobian.
Complex lorenz_residual(const PotentialSpec& spec, const Upper4& z);
Complex lorenz_residual(const PotentialModel& model, const Upper4& z);

// (e hbar / 2m) sigma^{mu nu} F_{mu nu}
Mat4 spin_coupling_matrix(const FieldStrength& F, const GammaSet<double>& gammas, double e, double m, double hbar);
// (i e hbar / 4m) [gamma^mu, gamma^nu] F_{mu nu}; equal to the sigma form.
Mat4 spin_coupling_commutator_form(const FieldStrength& F, const GammaSet<double>& gammas, double e, double m,
                                   double hbar);

}  // namespace diracsoc

#endif  // DIRACSOC_EMFIELD_HPP
